use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{hurwitz_zeta, zeta};

/// Parameters of `G(t) = ∏_{k≥1} sin(a_k t)/(a_k t)` with `a_k = c·k^{-1-γ}`
/// and `c = 1/ζ(1+γ)`, so that `Σ a_k = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GFunctionSpec {
    pub gamma: f64,
    pub c: f64,
    /// Largest number of factors multiplied directly.
    pub max_depth: usize,
}

impl GFunctionSpec {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::precondition(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        Ok(GFunctionSpec { gamma, c: 1.0 / zeta(1.0 + gamma), max_depth: 10_000_000 })
    }

    pub fn a(&self, k: usize) -> f64 {
        self.c * (k as f64).powf(-1.0 - self.gamma)
    }

    /// Number of leading factors with `a_k·|t| > 1`, which are multiplied directly.
    pub fn depth(&self, t: f64) -> usize {
        let mut k = (self.c * t.abs()).powf(1.0 / (1.0 + self.gamma)).floor() as usize;
        while k > 0 && self.a(k) * t.abs() <= 1.0 {
            k -= 1;
        }
        while self.a(k + 1) * t.abs() > 1.0 {
            k += 1;
        }
        k
    }

    /// Largest `|t|` whose direct depth fits in `max_depth`.
    pub fn max_supported_t(&self) -> f64 {
        (self.max_depth as f64).powf(1.0 + self.gamma) / self.c
    }
}

/// `Σ_{k>depth} log(sin(a_k t)/(a_k t))` through
/// `log(sin x/x) = −Σ_n ζ(2n) x^{2n} / (n π^{2n})`, summed over `k` with the
/// Hurwitz zeta function.
fn log_tail(spec: &GFunctionSpec, t: f64, depth: usize) -> f64 {
    let ct = spec.c * t.abs();
    let s = 1.0 + spec.gamma;
    let q = depth as f64 + 1.0;
    let mut total = 0.0;
    for n in 1..200 {
        let nf = n as f64;
        // (ct/π)^{2n} Σ_{k>depth} k^{-2n(1+γ)} computed in log space
        let log_mag = 2.0 * nf * (ct / PI).ln() + hurwitz_zeta(2.0 * nf * s, q).ln();
        let term = zeta(2.0 * nf) / nf * log_mag.exp();
        total -= term;
        if term <= 1e-18 * total.abs() || term == 0.0 {
            break;
        }
    }
    total
}

/// `(log|G(t)|, sign G(t))`.
pub fn g_log_abs(spec: &GFunctionSpec, t: f64) -> Result<(f64, f64)> {
    if t == 0.0 {
        return Ok((0.0, 1.0));
    }
    let depth = spec.depth(t);
    if depth > spec.max_depth {
        return Err(Error::Capacity {
            what: format!("G({t}) needs {depth} direct factors (cap {})", spec.max_depth),
            min_supported: spec.max_supported_t(),
        });
    }
    let mut log_abs = 0.0;
    let mut sign = 1.0;
    for k in 1..=depth {
        let x = spec.a(k) * t;
        let f = x.sin() / x;
        if f == 0.0 {
            return Ok((f64::NEG_INFINITY, 1.0));
        }
        if f < 0.0 {
            sign = -sign;
        }
        log_abs += f.abs().ln();
    }
    Ok((log_abs + log_tail(spec, t, depth), sign))
}

pub fn g_eval(spec: &GFunctionSpec, t: f64) -> Result<f64> {
    let (l, s) = g_log_abs(spec, t)?;
    Ok(s * l.exp())
}

/// Properties of `G` established numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GCertificate {
    pub gamma: f64,
    pub c: f64,
    /// Certified lower bound on `inf_{0≤t≤1} |G(t)|`.
    pub theta_g: f64,
    pub theta_grid_intervals: usize,
    /// Lipschitz constant of `G` on `[0, 1]` used for the padding.
    pub lipschitz: f64,
    /// Largest `|G|` on the real test grid.
    pub max_abs: f64,
    pub bounded_by_one: bool,
    pub below_exp_growth: bool,
    /// Smallest `−log|G(t)|/t^{1/(1+γ)}` over local maxima of `|G|` in `[t₀, t_max]`.
    pub c_g: f64,
    /// Slope of `log(−log|G|)` against `log t` over those maxima.
    pub decay_exponent: f64,
    pub maxima: usize,
    pub t0: f64,
    pub t_max: f64,
}

/// Certifies `θ_G > 0` on `[0, 1]`, checks `|G| ≤ 1 ≤ e^{|t|}` on the grid
/// `0, step, …, t_max`, and fits the decay envelope on `[t0, t_max]`.
pub fn g_certify(spec: &GFunctionSpec, t0: f64, t_max: f64, step: f64) -> Result<GCertificate> {
    if !(t0 > 0.0 && t_max > t0 && step > 0.0) {
        return Err(Error::precondition("need 0 < t0 < t_max and step > 0"));
    }
    // |G'(t)| ≤ Σ a_k |cot(a_k t) − 1/(a_k t)| ≤ 1.02·t·Σ a_k²/3 for a_k t ≤ c < 1/2
    let lipschitz = 1.02 * spec.c * spec.c * zeta(2.0 + 2.0 * spec.gamma) / 3.0;
    let mut intervals = 64;
    let theta_g = loop {
        let h = 1.0 / intervals as f64;
        let mut min = f64::INFINITY;
        for i in 0..=intervals {
            min = min.min(g_eval(spec, i as f64 * h)?.abs());
        }
        let padded = min - lipschitz * h / 2.0;
        if padded > 0.0 || intervals >= 1 << 20 {
            break padded;
        }
        intervals *= 2;
    };

    let n = (t_max / step).round() as usize;
    let mut max_abs = 0.0f64;
    let mut below_exp = true;
    let mut logs = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = i as f64 * step;
        let (l, _) = g_log_abs(spec, t)?;
        max_abs = max_abs.max(l.exp());
        below_exp &= l <= t.abs();
        logs.push((t, l));
    }

    let power = 1.0 / (1.0 + spec.gamma);
    let mut c_g = f64::INFINITY;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for w in logs.windows(3) {
        let (t, l) = w[1];
        if t < t0 || !(l >= w[0].1 && l >= w[2].1) || !l.is_finite() {
            continue;
        }
        c_g = c_g.min(-l / t.powf(power));
        if l < 0.0 {
            xs.push(t.ln());
            ys.push((-l).ln());
        }
    }
    let decay_exponent = slope(&xs, &ys);
    Ok(GCertificate {
        gamma: spec.gamma,
        c: spec.c,
        theta_g,
        theta_grid_intervals: intervals,
        lipschitz,
        max_abs,
        bounded_by_one: max_abs <= 1.0 + 1e-12,
        below_exp_growth: below_exp,
        c_g: c_g.max(0.0),
        decay_exponent,
        maxima: xs.len(),
        t0,
        t_max,
    })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct product with a long explicit tail, as an independent route.
    fn brute(spec: &GFunctionSpec, t: f64, terms: usize) -> f64 {
        (1..=terms).map(|k| {
            let x = spec.a(k) * t;
            if x == 0.0 { 1.0 } else { x.sin() / x }
        }).product()
    }

    #[test]
    fn normalization_and_first_zero() {
        let g = GFunctionSpec::new(0.5).unwrap();
        assert!((g.c - 1.0 / 2.612_375_348_685_488_3).abs() < 1e-12);
        assert!((g.c - 0.382_793).abs() < 1e-6);
        assert!((PI / g.c - 8.2068).abs() < 1e-3);
        assert_eq!(g_eval(&g, 0.0).unwrap(), 1.0);
        assert!(g_eval(&g, PI / g.c).unwrap().abs() < 1e-12);
    }

    #[test]
    fn series_tail_matches_long_product() {
        let g = GFunctionSpec::new(0.5).unwrap();
        for &t in &[0.3, 1.0, 5.0, 20.0, 75.0] {
            let a = g_eval(&g, t).unwrap();
            let b = brute(&g, t, 2_000_000);
            // the brute product misses Σ_{k>2e6} (a_k t)²/6
            assert!((a - b).abs() < 1e-9 * b.abs().max(1e-300) + 1e-14, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn certificate_for_half() {
        let g = GFunctionSpec::new(0.5).unwrap();
        let cert = g_certify(&g, 10.0, 1000.0, 0.1).unwrap();
        assert!(cert.theta_g > 0.0);
        assert!(cert.bounded_by_one && cert.below_exp_growth);
        assert!(cert.c_g > 0.0);
    }

    #[test]
    fn decay_exponent_across_gamma() {
        for gamma in [0.3, 0.5, 0.8] {
            let g = GFunctionSpec::new(gamma).unwrap();
            let cert = g_certify(&g, 10.0, 1e4, 0.1).unwrap();
            let target = 1.0 / (1.0 + gamma);
            assert!(cert.theta_g > 0.0 && cert.bounded_by_one);
            assert!(cert.decay_exponent >= target - 0.1 && cert.decay_exponent <= 1.0, "{cert:?}");
        }
    }

    #[test]
    fn capacity() {
        let mut g = GFunctionSpec::new(0.5).unwrap();
        g.max_depth = 10;
        assert!(matches!(g_eval(&g, 1e4), Err(Error::Capacity { .. })));
    }
}
