//! Least-squares fits of `φ(r) ≈ A·|log r|^γ·(log|log r|)^β` and the reference
//! bounds for the one-parameter family `Y_α`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curve::{Abscissa, BoundCurve};
use crate::error::{Error, Result};
use crate::smallball::SmallBallEstimate;

/// Whether the exponent of `log|log r|` is fitted or held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BetaMode {
    Free,
    Fixed(f64),
}

impl fmt::Display for BetaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaMode::Free => write!(f, "free"),
            BetaMode::Fixed(b) => write!(f, "fixed({b})"),
        }
    }
}

impl FromStr for BetaMode {
    type Err = Error;

    /// `free`, or a number meaning a fixed value.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("free") {
            return Ok(BetaMode::Free);
        }
        let inner = s.strip_prefix("fixed(").and_then(|x| x.strip_suffix(')')).unwrap_or(s);
        inner
            .parse::<f64>()
            .map(BetaMode::Fixed)
            .map_err(|_| Error::precondition(format!("beta mode must be 'free' or a number, got '{s}'")))
    }
}

/// Curves from exact bounds versus Monte Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitRegime {
    Deterministic,
    /// Monte Carlo input: the asymptotic regime is out of reach.
    Qualitative,
}

/// Fitted template, or the reason no fit was made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFitResult {
    #[serde(rename = "A")]
    pub a: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub rss: Option<f64>,
    pub n_points: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub mode: String,
    pub regime: FitRegime,
    pub refused: Option<String>,
}

impl RateFitResult {
    pub fn is_refused(&self) -> bool {
        self.refused.is_some()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Smallest `r_max/r_min` accepted: two decades.
pub const MIN_RANGE_RATIO: f64 = 100.0;

/// `log φ = log A + γ·log|log r| + β·log log|log r|` by SVD least squares.
pub fn fit(points: &[(f64, f64)], beta_mode: BetaMode) -> Result<RateFitResult> {
    fit_with_regime(points, beta_mode, FitRegime::Deterministic)
}

fn fit_with_regime(points: &[(f64, f64)], beta_mode: BetaMode, regime: FitRegime) -> Result<RateFitResult> {
    let limit = (-std::f64::consts::E).exp();
    for &(r, phi) in points {
        if !(r > 0.0 && r < limit) {
            return Err(Error::precondition(format!("radii must lie in (0, e^-e), got {r}")));
        }
        if !(phi > 0.0 && phi.is_finite()) {
            return Err(Error::precondition(format!("phi must be positive and finite, got {phi} at r={r}")));
        }
    }
    let (r_min, r_max) = points
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(r, _)| (lo.min(r), hi.max(r)));
    let mut result = RateFitResult {
        a: None,
        gamma: None,
        beta: None,
        rss: None,
        n_points: points.len(),
        r_min,
        r_max,
        mode: beta_mode.to_string(),
        regime,
        refused: None,
    };
    let params = match beta_mode {
        BetaMode::Free => 3,
        BetaMode::Fixed(_) => 2,
    };
    if points.len() <= params {
        result.refused = Some(format!("{} points cannot determine {params} parameters", points.len()));
        return Ok(result);
    }
    if r_max / r_min < MIN_RANGE_RATIO {
        result.refused = Some(format!("radii span a factor {} below {MIN_RANGE_RATIO}", r_max / r_min));
        return Ok(result);
    }

    let n = points.len();
    let mut x = DMatrix::zeros(n, params);
    let mut y = DVector::zeros(n);
    for (i, &(r, phi)) in points.iter().enumerate() {
        let l = r.ln().abs().ln();
        let ll = l.ln();
        x[(i, 0)] = 1.0;
        x[(i, 1)] = l;
        y[i] = phi.ln();
        match beta_mode {
            BetaMode::Free => x[(i, 2)] = ll,
            BetaMode::Fixed(b) => y[i] -= b * ll,
        }
    }
    // scale columns so the conditioning test reflects collinearity, not units
    let scales: Vec<f64> = (0..params).map(|j| x.column(j).norm()).collect();
    for (j, s) in scales.iter().enumerate() {
        x.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = x.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 1e-10 * smax) {
        result.refused = Some(format!("design matrix is collinear (condition {:e})", smax / smin));
        return Ok(result);
    }
    let coef = svd.solve(&y, 0.0).map_err(|e| Error::numeric(format!("least squares failed: {e}"), f64::NAN))?;
    let resid = &x * &coef - &y;
    let c: Vec<f64> = coef.iter().zip(&scales).map(|(c, s)| c / s).collect();
    result.a = Some(c[0].exp());
    result.gamma = Some(c[1]);
    result.beta = Some(match beta_mode {
        BetaMode::Free => c[2],
        BetaMode::Fixed(b) => b,
    });
    result.rss = Some(resid.norm_squared());
    Ok(result)
}

/// Fit on Monte Carlo estimates, keeping points whose confidence interval for
/// `φ` has relative width below 10%.
pub fn fit_estimates(estimates: &[SmallBallEstimate], beta_mode: BetaMode) -> Result<RateFitResult> {
    let rows: Vec<[f64; 4]> = estimates.iter().map(|e| [e.r, e.phi_hat, e.phi_lo, e.phi_hi]).collect();
    fit_interval_points(&rows, beta_mode)
}

/// Same as [`fit_estimates`] for rows `[r, φ̂, φ_lo, φ_hi]`.
pub fn fit_interval_points(rows: &[[f64; 4]], beta_mode: BetaMode) -> Result<RateFitResult> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|&&[_, phi, lo, hi]| phi > 0.0 && phi.is_finite() && (hi - lo) / phi < 0.1)
        .map(|&[r, phi, _, _]| (r, phi))
        .collect();
    fit_with_regime(&points, beta_mode, FitRegime::Qualitative)
}

/// Template `A·|log r|^γ·(log|log r|)^β`.
pub fn rate_template(a: f64, gamma: f64, beta: f64, r: f64) -> f64 {
    let l = r.ln().abs();
    a * l.powf(gamma) * l.ln().powf(beta)
}

/// Natural logs of the lower and upper reference bounds for `Y_α` at `r`:
/// `L^{(α−1)/α}·exp((2L)^{1/α})` and `L·exp((2L)^{1/α} + (5/α)L^{2/α−1})`, `L = |log r|`.
pub fn open_problem_log_bounds(alpha: f64, r: f64) -> Result<(f64, f64)> {
    if !(alpha > 1.0) {
        return Err(Error::precondition(format!("alpha must exceed 1, got {alpha}")));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::precondition(format!("r must lie in (0, 1), got {r}")));
    }
    let l = r.ln().abs();
    let core = (2.0 * l).powf(1.0 / alpha);
    let lower = (alpha - 1.0) / alpha * l.ln() + core;
    let upper = l.ln() + core + 5.0 / alpha * l.powf(2.0 / alpha - 1.0);
    Ok((lower, upper))
}

pub fn open_problem_curves(alpha: f64, radii: &[f64]) -> Result<BoundCurve> {
    let mut out = BoundCurve::new(Abscissa::R);
    let params = format!("alpha={alpha}");
    for &r in radii {
        let (lo, hi) = open_problem_log_bounds(alpha, r)?;
        out.push(r, Some(lo.exp()), Some(hi.exp()), "y-alpha-reference", &params);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn recovers_synthetic_template() {
        let pts: Vec<(f64, f64)> = log_grid(-12.0, -2.0, 40).into_iter().map(|r| (r, rate_template(3.0, 1.5, 0.5, r))).collect();
        let f = fit(&pts, BetaMode::Free).unwrap();
        assert!((f.gamma.unwrap() - 1.5).abs() < 0.05 && (f.beta.unwrap() - 0.5).abs() < 0.3, "{f:?}");
        let sq: Vec<(f64, f64)> = pts.iter().map(|&(r, _)| (r, r.ln().powi(2))).collect();
        let f = fit(&sq, BetaMode::Fixed(0.0)).unwrap();
        assert!((f.gamma.unwrap() - 2.0).abs() < 1e-6 && (f.a.unwrap() - 1.0).abs() < 1e-6);
        assert!(f.rss.unwrap() < 1e-20);
    }

    #[test]
    fn refusals() {
        let two = [(1e-10, 5.0), (1e-3, 2.0)];
        assert!(fit(&two, BetaMode::Free).unwrap().is_refused());
        let narrow: Vec<(f64, f64)> = log_grid(-5.0, -4.0, 10).into_iter().map(|r| (r, r.ln().powi(2))).collect();
        assert!(fit(&narrow, BetaMode::Fixed(0.0)).unwrap().is_refused());
        let same_r = vec![(1e-5, 1.0); 3].into_iter().chain([(1e-9, 2.0)]).collect::<Vec<_>>();
        assert!(!fit(&same_r, BetaMode::Fixed(0.0)).unwrap().is_refused());
        assert!(fit(&[(0.5, 1.0)], BetaMode::Free).is_err());
    }

    #[test]
    fn idempotent() {
        let pts: Vec<(f64, f64)> = log_grid(-30.0, -3.0, 25).into_iter().map(|r| (r, 1.0 + r.ln().abs().powf(1.7))).collect();
        let f = fit(&pts, BetaMode::Free).unwrap();
        let (a, g, b) = (f.a.unwrap(), f.gamma.unwrap(), f.beta.unwrap());
        let again: Vec<(f64, f64)> = pts.iter().map(|&(r, _)| (r, rate_template(a, g, b, r))).collect();
        let f2 = fit(&again, BetaMode::Free).unwrap();
        assert!((f2.a.unwrap() - a).abs() < 1e-9 * a);
        assert!((f2.gamma.unwrap() - g).abs() < 1e-9 && (f2.beta.unwrap() - b).abs() < 1e-9);
    }

    #[test]
    fn json_keys() {
        let pts: Vec<(f64, f64)> = log_grid(-12.0, -2.0, 10).into_iter().map(|r| (r, r.ln().powi(2))).collect();
        let v: serde_json::Value = serde_json::from_str(&fit(&pts, BetaMode::Fixed(0.0)).unwrap().to_json().unwrap()).unwrap();
        for k in ["A", "gamma", "beta", "rss", "n_points", "r_min", "r_max", "mode"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(v["mode"], "fixed(0)");
        assert_eq!("fixed(0.5)".parse::<BetaMode>().unwrap(), BetaMode::Fixed(0.5));
        assert_eq!("-1".parse::<BetaMode>().unwrap(), BetaMode::Fixed(-1.0));
    }

    #[test]
    fn reference_bounds() {
        let (lo, hi) = open_problem_log_bounds(2.0, 1e-10).unwrap();
        let l = 10.0 * std::f64::consts::LN_10;
        assert!((lo - (l.sqrt().ln() + (2.0 * l).sqrt())).abs() < 1e-12);
        assert!((lo.exp() - 4.7985 * 6.7861f64.exp()).abs() < 1e-3 * lo.exp());
        assert!(lo < hi);
        for alpha in [1.5, 2.0, 3.0, 8.0] {
            for r in [1e-3, 1e-10, 1e-50] {
                let (lo, hi) = open_problem_log_bounds(alpha, r).unwrap();
                assert!(lo <= hi);
            }
        }
        let lows: Vec<f64> = [2.0, 4.0, 8.0, 16.0].iter().map(|&a| open_problem_log_bounds(a, 1e-10).unwrap().0).collect();
        assert!(lows.windows(2).all(|w| w[1] < w[0]));
        // α → ∞: lower → e·L
        assert!(lows[3] > (std::f64::consts::E * l).ln());
        let c = open_problem_curves(2.0, &[1e-3, 1e-10]).unwrap();
        assert_eq!(c.points.len(), 2);
    }
}
