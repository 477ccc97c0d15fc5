//! Spectral measures of the stationary processes, their covariance functions,
//! masses and exponential moments.
//!
//! Continuous measures have densities in the frequency variable `u`; discrete
//! measures put their atoms at the frequencies `2πk`, so the sample paths of the
//! corresponding processes have period one. Covariances follow Bochner's
//! representation `R(t) = ∫ e^{iut} F(du)`, which is real for every model here
//! because all measures are symmetric.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur};

use crate::error::{Error, Result};
use crate::numeric::{integrate, Tolerance};

/// Largest number of quadrature panels an oscillatory integral may use.
const MAX_PANELS: usize = 200_000;

/// Relative size of the neglected tail of a continuous measure.
const TAIL_REL: f64 = 1e-16;

/// Spectral measure of a centered stationary Gaussian process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpectralModel {
    /// Density `exp(-|u|^ν)`.
    Continuous { nu: f64 },
    /// Atoms `exp(-|k|^ν)` at the frequencies `2πk`, `k ∈ ℤ`.
    Discrete { nu: f64 },
    /// Lebesgue measure on `[-cutoff, cutoff]`; cutoff 1 is the band-limited member of the family.
    Bandlimited { cutoff: f64 },
    /// Density `exp(-(log₊|u|)^α)` with `log₊ = max(log, 0)`.
    LogPower { alpha: f64 },
    /// Density `exp(-|u|^ν)` restricted to `|u| ≤ cutoff`.
    Truncated { nu: f64, cutoff: f64 },
    /// Minorant `exp(-l^ν)·1{|u| ≤ l}` of the continuous density.
    BandMinorant { nu: f64, l: f64 },
    /// Minorant with equal atoms `exp(-l^ν)` at `2πk`, `|k| ≤ l`.
    DirichletMinorant { nu: f64, l: u32 },
}

/// Discriminant of [`SpectralModel`], used by the CLI and configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralKind {
    Continuous,
    Discrete,
    Bandlimited,
    LogPower,
    Truncated,
    BandMinorant,
    DirichletMinorant,
}

impl SpectralKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectralKind::Continuous => "continuous",
            SpectralKind::Discrete => "discrete",
            SpectralKind::Bandlimited => "bandlimited",
            SpectralKind::LogPower => "log-power",
            SpectralKind::Truncated => "truncated",
            SpectralKind::BandMinorant => "band-minorant",
            SpectralKind::DirichletMinorant => "dirichlet-minorant",
        }
    }
}

impl fmt::Display for SpectralKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpectralKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "continuous" => SpectralKind::Continuous,
            "discrete" => SpectralKind::Discrete,
            "bandlimited" | "infinity" => SpectralKind::Bandlimited,
            "log-power" => SpectralKind::LogPower,
            "truncated" => SpectralKind::Truncated,
            "band-minorant" => SpectralKind::BandMinorant,
            "dirichlet-minorant" => SpectralKind::DirichletMinorant,
            other => return Err(Error::precondition(format!("unknown spectrum kind '{other}'"))),
        })
    }
}

/// Covariance `R(t)` at one lag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceValue {
    pub lag: f64,
    pub value: f64,
}

impl SpectralModel {
    /// Builds a model from flat fields, as they appear on the command line.
    pub fn from_fields(
        kind: SpectralKind,
        nu: Option<f64>,
        alpha: Option<f64>,
        cutoff: Option<f64>,
    ) -> Result<Self> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::precondition(format!("spectrum '{kind}' needs --{name}")))
        };
        let model = match kind {
            SpectralKind::Continuous => SpectralModel::Continuous { nu: need(nu, "nu")? },
            SpectralKind::Discrete => SpectralModel::Discrete { nu: need(nu, "nu")? },
            SpectralKind::Bandlimited => SpectralModel::Bandlimited { cutoff: cutoff.unwrap_or(1.0) },
            SpectralKind::LogPower => SpectralModel::LogPower { alpha: need(alpha, "alpha")? },
            SpectralKind::Truncated => {
                SpectralModel::Truncated { nu: need(nu, "nu")?, cutoff: need(cutoff, "cutoff")? }
            }
            SpectralKind::BandMinorant => {
                SpectralModel::BandMinorant { nu: need(nu, "nu")?, l: need(cutoff, "cutoff")? }
            }
            SpectralKind::DirichletMinorant => {
                let l = need(cutoff, "cutoff")?;
                if l < 1.0 || l.fract() != 0.0 || l > u32::MAX as f64 {
                    return Err(Error::precondition("dirichlet minorant needs an integer cutoff l ≥ 1"));
                }
                SpectralModel::DirichletMinorant { nu: need(nu, "nu")?, l: l as u32 }
            }
        };
        model.validate()?;
        Ok(model)
    }

    pub fn kind(&self) -> SpectralKind {
        match self {
            SpectralModel::Continuous { .. } => SpectralKind::Continuous,
            SpectralModel::Discrete { .. } => SpectralKind::Discrete,
            SpectralModel::Bandlimited { .. } => SpectralKind::Bandlimited,
            SpectralModel::LogPower { .. } => SpectralKind::LogPower,
            SpectralModel::Truncated { .. } => SpectralKind::Truncated,
            SpectralModel::BandMinorant { .. } => SpectralKind::BandMinorant,
            SpectralModel::DirichletMinorant { .. } => SpectralKind::DirichletMinorant,
        }
    }

    /// Checks the parameter constraints of the model.
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::precondition(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match *self {
            SpectralModel::Continuous { nu } | SpectralModel::Discrete { nu } => positive(nu, "nu"),
            SpectralModel::Bandlimited { cutoff } => positive(cutoff, "cutoff"),
            SpectralModel::LogPower { alpha } => {
                if alpha.is_finite() && alpha > 1.0 {
                    Ok(())
                } else {
                    Err(Error::precondition(format!("alpha must exceed 1, got {alpha}")))
                }
            }
            SpectralModel::Truncated { nu, cutoff } => {
                positive(nu, "nu")?;
                positive(cutoff, "cutoff")
            }
            SpectralModel::BandMinorant { nu, l } => {
                positive(nu, "nu")?;
                positive(l, "l")
            }
            SpectralModel::DirichletMinorant { nu, l } => {
                positive(nu, "nu")?;
                if l == 0 {
                    return Err(Error::precondition("l must be at least 1"));
                }
                Ok(())
            }
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, SpectralModel::Discrete { .. } | SpectralModel::DirichletMinorant { .. })
    }

    /// `log f(u)` for continuous models (`-∞` outside the support).
    pub fn log_density(&self, u: f64) -> Result<f64> {
        let a = u.abs();
        Ok(match *self {
            SpectralModel::Continuous { nu } => -a.powf(nu),
            SpectralModel::Bandlimited { cutoff } => {
                if a <= cutoff {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            SpectralModel::LogPower { alpha } => {
                let lp = a.ln().max(0.0);
                -lp.powf(alpha)
            }
            SpectralModel::Truncated { nu, cutoff } => {
                if a <= cutoff {
                    -a.powf(nu)
                } else {
                    f64::NEG_INFINITY
                }
            }
            SpectralModel::BandMinorant { nu, l } => {
                if a <= l {
                    -l.powf(nu)
                } else {
                    f64::NEG_INFINITY
                }
            }
            SpectralModel::Discrete { .. } | SpectralModel::DirichletMinorant { .. } => {
                return Err(Error::Unsupported("density of a discrete spectral measure".into()))
            }
        })
    }

    /// Spectral density `f(u)`; even in `u`.
    pub fn density(&self, u: f64) -> Result<f64> {
        self.log_density(u).map(f64::exp)
    }

    /// Mass of the atom at frequency `2πk`.
    pub fn atom_mass(&self, k: i64) -> Result<f64> {
        let a = k.unsigned_abs() as f64;
        match *self {
            SpectralModel::Discrete { nu } => Ok((-a.powf(nu)).exp()),
            SpectralModel::DirichletMinorant { nu, l } => {
                if k.unsigned_abs() <= l as u64 {
                    Ok((-(l as f64).powf(nu)).exp())
                } else {
                    Ok(0.0)
                }
            }
            _ => Err(Error::Unsupported("atom mass of a continuous spectral measure".into())),
        }
    }

    /// `F(ℝ)`, which is also the variance `R(0)`.
    pub fn total_mass(&self) -> f64 {
        match *self {
            SpectralModel::Continuous { nu } => 2.0 * gamma(1.0 + 1.0 / nu),
            SpectralModel::Discrete { nu } => {
                discrete_sum(nu, |_k| 1.0)
            }
            SpectralModel::Bandlimited { cutoff } => 2.0 * cutoff,
            SpectralModel::LogPower { alpha } => {
                // substitute u = e^s on u > 1
                let s_max = log_power_s_max(alpha);
                let tail = integrate(
                    |s: f64| (s - s.powf(alpha)).exp(),
                    &crate::numeric::panels(0.0, s_max, 1.0),
                    Tolerance::default(),
                )
                .map(|r| r.value)
                .unwrap_or_else(|_| f64::NAN);
                2.0 * (1.0 + tail)
            }
            SpectralModel::Truncated { nu, cutoff } => {
                2.0 * gamma(1.0 + 1.0 / nu) * gamma_lr(1.0 / nu, cutoff.powf(nu))
            }
            SpectralModel::BandMinorant { nu, l } => 2.0 * l * (-l.powf(nu)).exp(),
            SpectralModel::DirichletMinorant { nu, l } => {
                (2 * l + 1) as f64 * (-(l as f64).powf(nu)).exp()
            }
        }
    }

    /// Upper end `U` of the numerical support on `u ≥ 0`: the measure of
    /// `(U, ∞)` is below `1e-16` times the total mass.
    pub fn support_upper(&self) -> f64 {
        match *self {
            SpectralModel::Continuous { nu } => continuous_tail_cutoff(nu),
            SpectralModel::Truncated { nu, cutoff } => continuous_tail_cutoff(nu).min(cutoff),
            SpectralModel::Bandlimited { cutoff } => cutoff,
            SpectralModel::BandMinorant { l, .. } => l,
            SpectralModel::LogPower { alpha } => log_power_s_max(alpha).exp(),
            SpectralModel::Discrete { nu } => discrete_cutoff(nu) as f64 * 2.0 * PI,
            SpectralModel::DirichletMinorant { l, .. } => l as f64 * 2.0 * PI,
        }
    }

    /// Quadrature breakpoints on `[0, U]` for a continuous model; panels are
    /// no wider than `max_width` when given (for oscillatory integrands).
    pub(crate) fn panel_edges(&self, max_width: Option<f64>) -> Result<Vec<f64>> {
        self.panel_edges_below(max_width, self.support_upper())
    }

    /// Smallest `A` with `2·f(A)/freq ≤ abs_tol`. Every continuous density here
    /// is nonincreasing on `u ≥ 0`, so by the second mean value theorem the
    /// part of `∫ f(u) cos(freq·u) du` beyond `A` is below `abs_tol`.
    fn oscillatory_cutoff(&self, freq: f64, abs_tol: f64) -> f64 {
        let upper = self.support_upper();
        let target = (0.5 * abs_tol * freq).ln();
        let below = |u: f64| self.log_density(u).map_or(true, |ld| ld <= target);
        if freq <= 0.0 || !below(upper) {
            return upper;
        }
        // bisect in log scale; the density is at its maximum on [0, 1]
        let (mut lo, mut hi) = (0.0f64, upper.ln());
        if below(1.0) {
            return 1.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if below(mid.exp()) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi.exp()
    }

    fn panel_edges_below(&self, max_width: Option<f64>, upper: f64) -> Result<Vec<f64>> {
        let mut base: Vec<f64> = match *self {
            SpectralModel::Continuous { nu } | SpectralModel::Truncated { nu, .. } => {
                let mut e = vec![0.0];
                if nu < 1.0 {
                    // resolve the cusp of |u|^ν at the origin
                    e.extend([1e-8, 1e-6, 1e-4, 1e-2, 0.1].iter().copied().filter(|&x| x < upper));
                }
                let n = 64;
                let start = *e.last().unwrap();
                let first = if start > 0.0 { 1 } else { 1 };
                for i in first..=n {
                    let x = upper * i as f64 / n as f64;
                    if x > start {
                        e.push(x);
                    }
                }
                e
            }
            SpectralModel::LogPower { alpha } => {
                let s_max = log_power_s_max(alpha);
                let mut e = vec![0.0, 1.0];
                let steps = ((s_max / 0.05).ceil() as usize).max(1);
                for i in 1..=steps {
                    e.push((s_max * i as f64 / steps as f64).exp());
                }
                e
            }
            SpectralModel::Bandlimited { .. } | SpectralModel::BandMinorant { .. } => vec![0.0, upper],
            SpectralModel::Discrete { .. } | SpectralModel::DirichletMinorant { .. } => {
                return Err(Error::Unsupported("quadrature over a discrete spectral measure".into()))
            }
        };
        if upper < *base.last().unwrap() {
            base.retain(|&x| x < upper);
            base.push(upper);
        }
        base.dedup();
        let Some(width) = max_width else {
            return Ok(base);
        };
        let mut edges = Vec::with_capacity(base.len());
        edges.push(base[0]);
        for w in base.windows(2) {
            let pieces = ((w[1] - w[0]) / width).ceil().max(1.0);
            if edges.len() as f64 + pieces > MAX_PANELS as f64 {
                return Err(Error::numeric(
                    "oscillatory spectral integral needs too many quadrature panels",
                    f64::INFINITY,
                ));
            }
            let pieces = pieces as usize;
            for i in 1..=pieces {
                edges.push(w[0] + (w[1] - w[0]) * i as f64 / pieces as f64);
            }
        }
        Ok(edges)
    }

    /// `∫_0^∞ f(u) g(u) du` for a continuous model; `g` is either free of
    /// oscillation (`freq = 0`) or `cos(freq·u)`.
    pub(crate) fn integrate_half<G: Fn(f64) -> f64>(&self, g: G, freq: f64, tol: Tolerance) -> Result<f64> {
        let freq = freq.abs();
        let max_width = if freq > 0.0 { Some(PI / freq) } else { None };
        let edges = self.panel_edges_below(max_width, self.oscillatory_cutoff(freq, 0.1 * tol.abs))?;
        let tol = Tolerance { max_intervals: tol.max_intervals.max(edges.len() * 8), ..tol };
        let f = |u: f64| {
            let ld = self.log_density(u).unwrap_or(f64::NEG_INFINITY);
            if ld == f64::NEG_INFINITY {
                0.0
            } else {
                ld.exp() * g(u)
            }
        };
        integrate(f, &edges, tol).map(|r| r.value)
    }

    /// Covariance `R(t) = ∫ e^{iut} F(du)`.
    ///
    /// Continuous models use adaptive Gauss–Kronrod quadrature (absolute
    /// tolerance 1e-12 per integral); discrete models sum their atoms.
    pub fn covariance(&self, t: f64) -> Result<CovarianceValue> {
        let value = match *self {
            SpectralModel::Discrete { nu } => discrete_sum(nu, |k| (2.0 * PI * k * t).cos()),
            SpectralModel::DirichletMinorant { nu, l } => {
                let mass = (-(l as f64).powf(nu)).exp();
                let s: f64 = (1..=l).map(|k| (2.0 * PI * k as f64 * t).cos()).sum();
                mass * (1.0 + 2.0 * s)
            }
            _ => {
                let tol = Tolerance { abs: 1e-12, rel: 1e-14, max_intervals: 50_000 };
                2.0 * self.integrate_half(|u| (u * t).cos(), t, tol)?
            }
        };
        Ok(CovarianceValue { lag: t, value })
    }

    /// Closed-form covariance where one is known (ν ∈ {1, 2} continuous, the
    /// band-limited and minorant measures); used to cross-check the quadrature.
    pub fn closed_form_covariance(&self, t: f64) -> Option<f64> {
        let sinc_band = |c: f64| if t == 0.0 { 2.0 * c } else { 2.0 * (c * t).sin() / t };
        match *self {
            SpectralModel::Continuous { nu } if nu == 1.0 => Some(2.0 / (1.0 + t * t)),
            SpectralModel::Continuous { nu } if nu == 2.0 => Some(PI.sqrt() * (-t * t / 4.0).exp()),
            SpectralModel::Bandlimited { cutoff } => Some(sinc_band(cutoff)),
            SpectralModel::BandMinorant { nu, l } => Some((-l.powf(nu)).exp() * sinc_band(l)),
            SpectralModel::DirichletMinorant { nu, l } => {
                let mass = (-(l as f64).powf(nu)).exp();
                let n = (2 * l + 1) as f64;
                // n is odd, so the ratio only depends on t modulo 1
                let tr = t - t.round();
                let s = (PI * tr).sin();
                if tr == 0.0 {
                    Some(mass * n)
                } else {
                    Some(mass * (n * PI * tr).sin() / s)
                }
            }
            _ => None,
        }
    }

    /// `log ∫ e^{rate·|u|} F(du)`.
    pub fn log_exp_integral(&self, rate: f64) -> Result<f64> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::Domain(format!("exponential-moment rate must be ≥ 0, got {rate}")));
        }
        let diverges = || Err(Error::Domain(format!("∫ e^{{{rate}|u|}} F(du) diverges for {self:?}")));
        match *self {
            SpectralModel::Continuous { nu } => {
                if rate > 0.0 && (nu < 1.0 || (nu == 1.0 && rate >= 1.0)) {
                    return diverges();
                }
                let peak = if nu > 1.0 && rate > 0.0 { (rate / nu).powf(1.0 / (nu - 1.0)) } else { 0.0 };
                let log_f = move |u: f64| rate * u - u.powf(nu);
                let mut upper = (2.0 * peak).max(1.0);
                while log_f(upper) - log_f(peak) > -50.0 {
                    upper *= 2.0;
                }
                log_integral_exp(log_f, peak, upper).map(|v| v + std::f64::consts::LN_2)
            }
            SpectralModel::Truncated { nu, cutoff } => {
                let peak = if nu > 1.0 && rate > 0.0 {
                    (rate / nu).powf(1.0 / (nu - 1.0)).min(cutoff)
                } else if nu < 1.0 && rate > 0.0 {
                    // rate·u − u^ν is convex: the maximum sits at an endpoint
                    if rate * cutoff - cutoff.powf(nu) > 0.0 {
                        cutoff
                    } else {
                        0.0
                    }
                } else if nu == 1.0 && rate > 1.0 {
                    cutoff
                } else {
                    0.0
                };
                let upper = self.support_upper();
                let log_f = move |u: f64| rate * u - u.powf(nu);
                log_integral_exp(log_f, peak.min(upper), upper).map(|v| v + std::f64::consts::LN_2)
            }
            SpectralModel::Bandlimited { cutoff } => Ok(if rate == 0.0 {
                (2.0 * cutoff).ln()
            } else {
                // 2 ∫_0^c e^{ρu} du
                std::f64::consts::LN_2 + rate * cutoff + (-(-rate * cutoff).exp_m1()).ln() - rate.ln()
            }),
            SpectralModel::BandMinorant { nu, l } => {
                let base = SpectralModel::Bandlimited { cutoff: l }.log_exp_integral(rate)?;
                Ok(base - l.powf(nu))
            }
            SpectralModel::LogPower { .. } => {
                if rate > 0.0 {
                    diverges()
                } else {
                    Ok(self.total_mass().ln())
                }
            }
            SpectralModel::Discrete { nu } => {
                if rate > 0.0 && (nu < 1.0 || (nu == 1.0 && rate >= 1.0)) {
                    return diverges();
                }
                let term = |k: f64| rate * k - k.powf(nu);
                let peak = if nu > 1.0 && rate > 0.0 { (rate / nu).powf(1.0 / (nu - 1.0)) } else { 0.0 };
                let top = term(peak.floor()).max(term(peak.ceil()));
                let mut sum = (term(0.0) - top).exp();
                let mut k = 1.0;
                loop {
                    let lt = term(k) - top;
                    sum += 2.0 * lt.exp();
                    if k > peak && lt < -50.0 {
                        break;
                    }
                    k += 1.0;
                    if k > 1e9 {
                        return Err(Error::numeric("discrete exponential moment did not converge", lt));
                    }
                }
                Ok(top + sum.ln())
            }
            SpectralModel::DirichletMinorant { nu, l } => {
                let lf = l as f64;
                let s: f64 = 1.0 + 2.0 * (1..=l).map(|k| (rate * k as f64).exp()).sum::<f64>();
                Ok(s.ln() - lf.powf(nu))
            }
        }
    }

    /// `M(rate) = (∫ e^{rate·|u|} F(du))^{1/2}`, the bound on `|h(z)|` over the
    /// RKHS unit ball at `|Im z| = rate/2`.
    pub fn exp_moment(&self, rate: f64) -> Result<f64> {
        self.log_exp_integral(rate).map(|l| (0.5 * l).exp())
    }
}

/// Leading asymptotic of `log M_ν(rate)` for the continuous family with ν > 1:
/// `(ν−1)·rate^{ν/(ν−1)} / (2·ν^{ν/(ν−1)})`.
pub fn log_moment_asym(nu: f64, rate: f64) -> Result<f64> {
    if !(nu > 1.0) {
        return Err(Error::Domain(format!("moment asymptotic needs ν > 1, got {nu}")));
    }
    let p = nu / (nu - 1.0);
    Ok((nu - 1.0) * rate.powf(p) / (2.0 * nu.powf(p)))
}

fn log_integral_exp<F: Fn(f64) -> f64>(log_f: F, peak: f64, upper: f64) -> Result<f64> {
    let top = log_f(peak);
    let mut edges = vec![0.0];
    if peak > 0.0 && peak < upper {
        edges.push(peak);
    }
    edges.push(upper);
    let r = integrate(|u| (log_f(u) - top).exp(), &edges, Tolerance { abs: 0.0, rel: 1e-13, max_intervals: 50_000 })?;
    Ok(top + r.value.ln())
}

/// `U` with `∫_U^∞ e^{-u^ν} du ≤ 1e-16 · Γ(1+1/ν)`.
fn continuous_tail_cutoff(nu: f64) -> f64 {
    let a = 1.0 / nu;
    let mut x: f64 = 30.0;
    while gamma_ur(a, x) > TAIL_REL {
        x += 2.0;
    }
    x.powf(1.0 / nu)
}

/// `S` such that the log-power density beyond `u = e^S` carries mass below `e^{-45}`.
fn log_power_s_max(alpha: f64) -> f64 {
    let mut s: f64 = 2.0;
    while s.powf(alpha) - s < 45.0 || alpha * s.powf(alpha - 1.0) < 2.0 {
        s *= 1.25;
    }
    s
}

fn discrete_cutoff(nu: f64) -> u64 {
    // e^{-k^ν} < 1e-19 once k^ν > 44
    (44f64.powf(1.0 / nu)).ceil() as u64 + 1
}

fn discrete_sum<G: Fn(f64) -> f64>(nu: f64, g: G) -> f64 {
    let kmax = discrete_cutoff(nu);
    let mut s = 0.0;
    // small terms first
    for k in (1..=kmax).rev() {
        let kf = k as f64;
        s += (-kf.powf(nu)).exp() * g(kf);
    }
    g(0.0) + 2.0 * s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn density_examples() {
        let c1 = SpectralModel::Continuous { nu: 1.0 };
        assert_eq!(c1.density(0.0).unwrap(), 1.0);
        let c2 = SpectralModel::Continuous { nu: 2.0 };
        assert!((c2.density(1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        let lp = SpectralModel::LogPower { alpha: 2.0 };
        assert!((lp.density(std::f64::consts::E).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(lp.density(0.5).unwrap(), 1.0);
        assert!(matches!(SpectralModel::Discrete { nu: 1.0 }.density(0.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn atom_examples() {
        let d1 = SpectralModel::Discrete { nu: 1.0 };
        assert_eq!(d1.atom_mass(0).unwrap(), 1.0);
        assert!((d1.atom_mass(3).unwrap() - 0.049_787_068_367_863_944).abs() < 1e-15);
        let d2 = SpectralModel::Discrete { nu: 2.0 };
        assert!((d2.atom_mass(-2).unwrap() - (-4f64).exp()).abs() < 1e-16);
        assert!(SpectralModel::Continuous { nu: 1.0 }.atom_mass(0).is_err());
    }

    #[test]
    fn total_mass_against_simpson_oracle() {
        // independent composite Simpson on a long interval
        let m1 = 2.0 * simpson(|u| (-u).exp(), 0.0, 60.0, 60_000);
        assert!((m1 - 2.0).abs() < 1e-9);
        assert!((SpectralModel::Continuous { nu: 1.0 }.total_mass() - m1).abs() < 1e-9);
        let m2 = 2.0 * simpson(|u| (-u * u).exp(), 0.0, 10.0, 10_000);
        assert!((SpectralModel::Continuous { nu: 2.0 }.total_mass() - m2).abs() < 1e-12);
        assert!((m2 - 1.772_453_850_905_516).abs() < 1e-12);
        assert_eq!(SpectralModel::Bandlimited { cutoff: 1.0 }.total_mass(), 2.0);
        let mlp = 2.0 * simpson(|u| (-(u.ln().max(0.0)).powi(2)).exp(), 0.0, 5000.0, 2_000_000);
        let lp = SpectralModel::LogPower { alpha: 2.0 }.total_mass();
        assert!((lp - mlp).abs() < 1e-6 * mlp, "{lp} vs {mlp}");
    }

    #[test]
    fn covariance_examples() {
        let c1 = SpectralModel::Continuous { nu: 1.0 };
        assert!((c1.covariance(0.5).unwrap().value - 1.6).abs() < 1e-10);
        let c2 = SpectralModel::Continuous { nu: 2.0 };
        assert!((c2.covariance(0.0).unwrap().value - PI.sqrt()).abs() < 1e-10);
        let band = SpectralModel::Bandlimited { cutoff: 1.0 };
        assert!(band.covariance(PI).unwrap().value.abs() < 1e-10);
    }

    #[test]
    fn closed_forms_agree_with_quadrature() {
        for m in [
            SpectralModel::Continuous { nu: 1.0 },
            SpectralModel::Continuous { nu: 2.0 },
            SpectralModel::Bandlimited { cutoff: 1.0 },
            SpectralModel::BandMinorant { nu: 1.0, l: 2.0 },
            SpectralModel::DirichletMinorant { nu: 2.0, l: 3 },
        ] {
            for &t in &[0.0, 0.001, 0.1, 0.5, 1.0, 3.7, 12.0] {
                let q = m.covariance(t).unwrap().value;
                let c = m.closed_form_covariance(t).unwrap();
                assert!((q - c).abs() < 1e-10, "{m:?} t={t}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn discrete_covariance_is_periodic() {
        let d = SpectralModel::Discrete { nu: 1.0 };
        let a = d.covariance(0.3).unwrap().value;
        let b = d.covariance(1.3).unwrap().value;
        assert!((a - b).abs() < 1e-12);
        let var = d.covariance(0.0).unwrap().value;
        assert!((var - d.total_mass()).abs() < 1e-13);
    }

    #[test]
    fn exp_moment_examples() {
        let c2 = SpectralModel::Continuous { nu: 2.0 };
        assert!((c2.exp_moment(0.0).unwrap() - 1.331_335_363_800_389_7).abs() < 1e-10);
        // M_2(2)^2 = e·√π·(1 + erf 1)
        let erf1 = libm::erf(1.0);
        let m2 = (std::f64::consts::E * PI.sqrt() * (1.0 + erf1)).sqrt();
        assert!((c2.exp_moment(2.0).unwrap() - m2).abs() < 1e-10);
        let c1 = SpectralModel::Continuous { nu: 1.0 };
        assert!(matches!(c1.exp_moment(1.0), Err(Error::Domain(_))));
        // ∫ e^{ρ|u|−|u|} du = 2/(1−ρ)
        assert!((c1.exp_moment(0.5).unwrap() - 2f64.sqrt() * 2f64.sqrt()).abs() < 1e-10);
        assert!(SpectralModel::Continuous { nu: 0.5 }.exp_moment(0.1).is_err());
        assert!(SpectralModel::Discrete { nu: 1.0 }.exp_moment(1.0).is_err());
    }

    #[test]
    fn moment_asymptotic_ratio_tends_to_one() {
        let c2 = SpectralModel::Continuous { nu: 2.0 };
        let mut last = f64::INFINITY;
        for &r in &[10.0, 40.0, 160.0] {
            let log_m = c2.log_exp_integral(r).unwrap() * 0.5;
            let ratio = log_m / log_moment_asym(2.0, r).unwrap();
            assert!((ratio - 1.0).abs() < last);
            last = (ratio - 1.0).abs();
        }
        assert!(last < 1e-3);
        assert!((log_moment_asym(2.0, 4.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(SpectralModel::Continuous { nu: 0.0 }.validate().is_err());
        assert!(SpectralModel::LogPower { alpha: 1.0 }.validate().is_err());
        assert!(SpectralModel::from_fields(SpectralKind::Discrete, None, None, None).is_err());
        let m = SpectralModel::from_fields(SpectralKind::Bandlimited, None, None, None).unwrap();
        assert_eq!(m, SpectralModel::Bandlimited { cutoff: 1.0 });
    }
}
