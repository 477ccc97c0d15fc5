//! Lower bounds on the small-deviation function from minorant processes whose
//! values on an arithmetic grid are uncorrelated.
//!
//! The minorant `Y_l` has spectral measure `e^{-l^ν}` times counting measure on
//! `|k| ≤ l` (discrete spectrum) or times Lebesgue measure on `|u| ≤ l`
//! (continuous spectrum). Its covariance vanishes at every nonzero multiple of
//! the grid step `Δ`, so `Y(0), Y(Δ), …` are independent `N(0, σ²)` and
//! `P(‖Y‖ ≤ r) ≤ P(σ|N| ≤ r)^{#points} ≤ (√(2/π)·r/σ)^{#points}`. Anderson's
//! inequality carries the bound over to the original process.
//!
//! Two variants are available. `PaperExponent` uses the exponent `1/Δ` and
//! the weaker base `r·e^{l^ν}`; this is the form whose optimization reproduces
//! the constant `ν/(π(ν+1)^{1+1/ν})`. `RigorousGridCount` uses the base
//! `√(2/π)·r/σ` raised to the number of grid points that lie in `[0, 1]`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumType {
    Discrete,
    Continuous,
}

/// Period convention of the discrete spectrum: atoms at integers (paths of
/// period 2π) or at `2πk` (paths of period 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    #[serde(rename = "paper-2pi")]
    Paper2Pi,
    #[serde(rename = "period-1")]
    Period1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundVariant {
    PaperExponent,
    RigorousGridCount,
}

macro_rules! string_enum {
    ($ty:ty, $($variant:path => $name:literal),+ $(,)?) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($variant => $name),+ }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(Error::precondition(format!("unknown value '{other}'"))),
                }
            }
        }
    };
}

string_enum!(SpectrumType, SpectrumType::Discrete => "discrete", SpectrumType::Continuous => "continuous");
string_enum!(Convention, Convention::Paper2Pi => "paper-2pi", Convention::Period1 => "period-1");
string_enum!(BoundVariant, BoundVariant::PaperExponent => "paper-exponent", BoundVariant::RigorousGridCount => "rigorous-grid-count");

/// Minorant parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsirelsonConfig {
    pub nu: f64,
    pub spectrum: SpectrumType,
    pub l: f64,
    pub convention: Convention,
}

impl TsirelsonConfig {
    pub fn new(nu: f64, spectrum: SpectrumType, l: f64, convention: Convention) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::precondition(format!("nu must be positive, got {nu}")));
        }
        match spectrum {
            SpectrumType::Discrete if !(l >= 1.0 && l.fract() == 0.0) => {
                Err(Error::precondition(format!("discrete minorant needs an integer l ≥ 1, got {l}")))
            }
            SpectrumType::Continuous if !(l > 0.0 && l.is_finite()) => {
                Err(Error::precondition(format!("continuous minorant needs l > 0, got {l}")))
            }
            _ => Ok(TsirelsonConfig { nu, spectrum, l, convention }),
        }
    }

    /// Grid step on which the minorant is uncorrelated. The continuous
    /// spectrum ignores the convention.
    pub fn delta(&self) -> f64 {
        match (self.spectrum, self.convention) {
            (SpectrumType::Discrete, Convention::Paper2Pi) => 2.0 * PI / (2.0 * self.l + 1.0),
            (SpectrumType::Discrete, Convention::Period1) => 1.0 / (2.0 * self.l + 1.0),
            (SpectrumType::Continuous, _) => 2.0 * PI / self.l,
        }
    }

    /// `log σ²` with `σ² = (2l+1)e^{-l^ν}` or `2l·e^{-l^ν}`.
    pub fn log_sigma2(&self) -> f64 {
        let count = match self.spectrum {
            SpectrumType::Discrete => 2.0 * self.l + 1.0,
            SpectrumType::Continuous => 2.0 * self.l,
        };
        count.ln() - self.l.powf(self.nu)
    }

    pub fn sigma2(&self) -> f64 {
        self.log_sigma2().exp()
    }

    /// Number of grid points `kΔ` in `[0, 1]`, capped at one period for the
    /// discrete spectrum.
    pub fn grid_count(&self) -> f64 {
        let n = (1.0 / self.delta()).floor() + 1.0;
        match self.spectrum {
            SpectrumType::Discrete => n.min(2.0 * self.l + 1.0),
            SpectrumType::Continuous => n,
        }
    }

    /// Minorant covariance at lag `t` in closed form.
    pub fn minorant_covariance(&self, t: f64) -> f64 {
        let height = (-self.l.powf(self.nu)).exp();
        match (self.spectrum, self.convention) {
            (SpectrumType::Discrete, Convention::Paper2Pi) => {
                // 4e^{-l^ν} sin((2l+1)t/2) sin(t/2) / |e^{it} − 1|²
                let denom = 2.0 - 2.0 * t.cos();
                if denom.abs() < 1e-300 {
                    return height * (2.0 * self.l + 1.0);
                }
                4.0 * height * ((2.0 * self.l + 1.0) * t / 2.0).sin() * (t / 2.0).sin() / denom
            }
            (SpectrumType::Discrete, Convention::Period1) => {
                let tr = t - t.round();
                if tr == 0.0 {
                    return height * (2.0 * self.l + 1.0);
                }
                height * ((2.0 * self.l + 1.0) * PI * tr).sin() / (PI * tr).sin()
            }
            (SpectrumType::Continuous, _) => {
                if t == 0.0 {
                    2.0 * self.l * height
                } else {
                    2.0 * height * (self.l * t).sin() / t
                }
            }
        }
    }
}

/// One lower bound on `φ(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundResult {
    pub nu: f64,
    pub spectrum: SpectrumType,
    pub convention: Convention,
    pub variant: BoundVariant,
    pub r: f64,
    pub l_used: f64,
    pub sigma2: f64,
    pub phi_lower: f64,
    pub valid: bool,
}

/// Bound for a fixed minorant. An invalid radius (log base ≥ 0) gives 0.
pub fn bound_at(cfg: &TsirelsonConfig, r: f64, variant: BoundVariant) -> Result<LowerBoundResult> {
    if !(r > 0.0) {
        return Err(Error::precondition(format!("radius must be positive, got {r}")));
    }
    let (exponent, log_base) = match variant {
        BoundVariant::PaperExponent => (1.0 / cfg.delta(), r.ln() + cfg.l.powf(cfg.nu)),
        BoundVariant::RigorousGridCount => {
            (cfg.grid_count(), 0.5 * (2.0 / PI).ln() + r.ln() - 0.5 * cfg.log_sigma2())
        }
    };
    let valid = log_base < 0.0;
    Ok(LowerBoundResult {
        nu: cfg.nu,
        spectrum: cfg.spectrum,
        convention: cfg.convention,
        variant,
        r,
        l_used: cfg.l,
        sigma2: cfg.sigma2(),
        phi_lower: if valid { -exponent * log_base } else { 0.0 },
        valid,
    })
}

/// Candidate values of `l`: integers `1..=4⌈l*⌉` (discrete) or multiples of
/// 0.25 up to the same bound (continuous), where `l* = (|log r|/(ν+1))^{1/ν}`.
pub fn search_window(nu: f64, spectrum: SpectrumType, r: f64) -> Vec<f64> {
    let seed = (r.ln().abs() / (nu + 1.0)).powf(1.0 / nu);
    let top = 4.0 * seed.ceil().max(1.0);
    match spectrum {
        SpectrumType::Discrete => (1..=top as u64).map(|l| l as f64).collect(),
        SpectrumType::Continuous => (1..=(4.0 * top) as u64).map(|i| 0.25 * i as f64).collect(),
    }
}

/// Largest bound over the search window; ties keep the smallest `l`.
pub fn bound_opt(
    nu: f64,
    spectrum: SpectrumType,
    r: f64,
    convention: Convention,
    variant: BoundVariant,
) -> Result<LowerBoundResult> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::precondition(format!("optimization needs 0 < r < 1, got {r}")));
    }
    let mut best: Option<LowerBoundResult> = None;
    for l in search_window(nu, spectrum, r) {
        let cfg = TsirelsonConfig::new(nu, spectrum, l, convention)?;
        let b = bound_at(&cfg, r, variant)?;
        if best.map_or(true, |cur| b.phi_lower > cur.phi_lower) {
            best = Some(b);
        }
    }
    best.ok_or_else(|| Error::precondition("empty search window"))
}

/// `ν / (π (ν+1)^{1+1/ν})`.
pub fn asymptotic_constant(nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::precondition(format!("nu must be positive, got {nu}")));
    }
    Ok(nu / (PI * (nu + 1.0).powf(1.0 + 1.0 / nu)))
}

/// Minorant covariance at every checked grid lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub delta: f64,
    pub sigma2: f64,
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    pub max_ratio: f64,
}

/// Checks `|R(kΔ)| ≤ 1e−10·σ²` for `k = 1..2l` (discrete) or
/// `k = 1..max(1, ⌊1/Δ⌋)` (continuous).
pub fn uncorrelated_certificate(cfg: &TsirelsonConfig) -> Result<CertificateReport> {
    uncorrelated_certificate_with_step(cfg, cfg.delta())
}

/// [`uncorrelated_certificate`] with an arbitrary step, for probing.
pub fn uncorrelated_certificate_with_step(cfg: &TsirelsonConfig, delta: f64) -> Result<CertificateReport> {
    let count = match cfg.spectrum {
        SpectrumType::Discrete => 2 * cfg.l as usize,
        SpectrumType::Continuous => ((1.0 / cfg.delta()).floor() as usize).max(1),
    };
    let var = cfg.minorant_covariance(0.0);
    let limit = 1e-10 * var;
    let mut report = CertificateReport { delta, sigma2: var, lags: Vec::new(), values: Vec::new(), max_ratio: 0.0 };
    for k in 1..=count {
        let t = k as f64 * delta;
        let v = cfg.minorant_covariance(t);
        report.max_ratio = report.max_ratio.max(v.abs() / var);
        if v.abs() > limit {
            return Err(Error::Certificate { lag: t, value: v.abs(), limit });
        }
        report.lags.push(t);
        report.values.push(v);
    }
    Ok(report)
}

/// Writes rows with columns `nu, spectrum, convention, variant, r, l_used, sigma2, phi_lower, valid`.
pub fn write_bounds_csv<W: Write>(rows: &[LowerBoundResult], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["nu", "spectrum", "convention", "variant", "r", "l_used", "sigma2", "phi_lower", "valid"])?;
    for b in rows {
        w.write_record([
            b.nu.to_string(),
            b.spectrum.to_string(),
            b.convention.to_string(),
            b.variant.to_string(),
            format!("{:e}", b.r),
            b.l_used.to_string(),
            format!("{:e}", b.sigma2),
            b.phi_lower.to_string(),
            b.valid.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn discrete(nu: f64, l: f64, conv: Convention) -> TsirelsonConfig {
        TsirelsonConfig::new(nu, SpectrumType::Discrete, l, conv).unwrap()
    }

    #[test]
    fn derived_quantities() {
        let c = discrete(1.0, 3.0, Convention::Paper2Pi);
        assert!((c.sigma2() - 0.348_509_478_575_047_6).abs() < 1e-15);
        assert!((c.delta() - 2.0 * PI / 7.0).abs() < 1e-15);
        assert!((discrete(1.0, 3.0, Convention::Period1).delta() - 1.0 / 7.0).abs() < 1e-15);
        let cont = TsirelsonConfig::new(1.0, SpectrumType::Continuous, 2.0, Convention::Period1).unwrap();
        assert!((cont.sigma2() - 4.0 * (-2f64).exp()).abs() < 1e-15);
        assert!((cont.delta() - PI).abs() < 1e-15);
        assert_eq!(cont.grid_count(), 1.0);
        assert!(TsirelsonConfig::new(1.0, SpectrumType::Discrete, 2.5, Convention::Period1).is_err());
    }

    #[test]
    fn invalid_radius_gives_zero() {
        let c = discrete(1.0, 3.0, Convention::Paper2Pi);
        let r = c.sigma2().sqrt() * (PI / 2.0).sqrt();
        for v in [BoundVariant::PaperExponent, BoundVariant::RigorousGridCount] {
            let b = bound_at(&c, r * (1.0 + 1e-12), v).unwrap();
            assert_eq!(b.phi_lower, 0.0);
            assert!(!b.valid);
        }
    }

    #[test]
    fn paper_exponent_at_fixed_l() {
        let c = discrete(1.0, 3.0, Convention::Paper2Pi);
        let b = bound_at(&c, 0.01, BoundVariant::PaperExponent).unwrap();
        // (7/2π)·(−log(0.01·e³))
        let oracle = 7.0 / (2.0 * PI) * -(0.01f64 * 3f64.exp()).ln();
        assert!((b.phi_lower - oracle).abs() < 1e-12);
        assert!((oracle - 1.788_295_387_226_192_4).abs() < 1e-12);
        let p1 = bound_at(&discrete(1.0, 3.0, Convention::Period1), 0.01, BoundVariant::PaperExponent).unwrap();
        assert!((p1.phi_lower / b.phi_lower - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn rigorous_one_point_continuous() {
        let c = TsirelsonConfig::new(1.0, SpectrumType::Continuous, 2.0, Convention::Paper2Pi).unwrap();
        let b = bound_at(&c, 0.01, BoundVariant::RigorousGridCount).unwrap();
        let sigma = (4.0 * (-2f64).exp()).sqrt();
        let oracle = -((2.0 / PI).sqrt() * 0.01 / sigma).ln();
        assert!((b.phi_lower - oracle).abs() < 1e-12);
    }

    #[test]
    fn optimal_l_at_one_in_a_million() {
        let b = bound_opt(1.0, SpectrumType::Discrete, 1e-6, Convention::Paper2Pi, BoundVariant::PaperExponent).unwrap();
        assert!([6.0, 7.0, 8.0].contains(&b.l_used), "l_used = {}", b.l_used);
    }

    #[test]
    fn optimized_bound_grows_as_r_shrinks() {
        for spectrum in [SpectrumType::Discrete, SpectrumType::Continuous] {
            let mut last = -1.0;
            for e in 1..40 {
                let r = 10f64.powi(-e);
                let b = bound_opt(1.5, spectrum, r, Convention::Paper2Pi, BoundVariant::PaperExponent).unwrap();
                assert!(b.phi_lower > last);
                last = b.phi_lower;
            }
        }
    }

    #[test]
    fn constants() {
        assert!((asymptotic_constant(1.0).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((asymptotic_constant(2.0).unwrap() - 0.122_517_532_315_953_8).abs() < 1e-15);
        let big = asymptotic_constant(1e3).unwrap();
        assert!(big < 1.0 / PI && big > asymptotic_constant(100.0).unwrap());
        let lr = 100.0 * 10f64.ln();
        let b = bound_opt(1.0, SpectrumType::Discrete, 1e-100, Convention::Paper2Pi, BoundVariant::PaperExponent).unwrap();
        assert!((b.phi_lower / (lr * lr) / asymptotic_constant(1.0).unwrap() - 1.0).abs() < 0.05);
    }

    #[test]
    fn certificates() {
        for l in 1..=10 {
            for conv in [Convention::Paper2Pi, Convention::Period1] {
                let rep = uncorrelated_certificate(&discrete(1.3, l as f64, conv)).unwrap();
                assert_eq!(rep.lags.len(), 2 * l);
            }
        }
        let c = discrete(1.0, 1.0, Convention::Period1);
        assert!(c.minorant_covariance(1.0 / 3.0).abs() < 1e-16);
        for l in [1.0, 2.0, 5.0] {
            let cont = TsirelsonConfig::new(1.0, SpectrumType::Continuous, l, Convention::Paper2Pi).unwrap();
            uncorrelated_certificate(&cont).unwrap();
        }
        let bad = discrete(1.0, 3.0, Convention::Paper2Pi);
        let err = uncorrelated_certificate_with_step(&bad, bad.delta() / 2.0).unwrap_err();
        assert!(matches!(err, Error::Certificate { .. }));
    }
}
