use serde::{Deserialize, Serialize};

use crate::curve::{Abscissa, BoundCurve};
use crate::error::{Error, Result};
use crate::numeric::{log_norm_cdf, norm_quantile_log};

/// `H(2r/λ) ≤ φ(r) + λ²/2` for every `(r, φ(r))`.
pub fn kl_phi_to_h(phi_curve: &[(f64, f64)], lambda: f64) -> Result<BoundCurve> {
    if !(lambda > 0.0) {
        return Err(Error::precondition(format!("lambda must be positive, got {lambda}")));
    }
    let mut out = BoundCurve::new(Abscissa::Epsilon);
    let params = format!("lambda={lambda}");
    for &(r, phi) in phi_curve {
        if !(r > 0.0) {
            return Err(Error::precondition(format!("radii must be positive, got {r}")));
        }
        if phi.is_finite() {
            out.push(2.0 * r / lambda, None, Some(phi + 0.5 * lambda * lambda), "kuelbs-li-upper", &params);
        }
    }
    Ok(out)
}

/// `α_r = Φ⁻¹(e^{-φ(r)})`; `+∞` when `φ = 0`.
pub fn alpha_r(phi: f64) -> Result<f64> {
    if !(phi >= 0.0) {
        return Err(Error::precondition(format!("phi must be nonnegative, got {phi}")));
    }
    if phi == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(norm_quantile_log(-phi))
}

/// `H(r/λ) ≥ φ(2r) + log Φ(λ + α_r)`; `None` when `φ(r)` or `φ(2r)` is infinite.
pub fn kl_h_lower(phi_r: f64, phi_2r: f64, lambda: f64) -> Result<Option<f64>> {
    if !(phi_r.is_finite() && phi_2r.is_finite()) {
        return Ok(None);
    }
    let a = alpha_r(phi_r)?;
    if a.is_infinite() {
        return Ok(Some(phi_2r));
    }
    Ok(Some(phi_2r + log_norm_cdf(lambda + a)))
}

/// `φ(2r) − ½(λ − √(2φ(r)))²`.
pub fn kl_h_lower_simplified(phi_r: f64, phi_2r: f64, lambda: f64) -> f64 {
    let d = lambda - (2.0 * phi_r).sqrt();
    phi_2r - 0.5 * d * d
}

/// Lower bounds on `H(r/λ)` from `(r, φ(r), φ(2r))` triples.
pub fn kl_h_to_phi(triples: &[(f64, f64, f64)], lambda: f64) -> Result<BoundCurve> {
    let mut out = BoundCurve::new(Abscissa::Epsilon);
    let params = format!("lambda={lambda}");
    for &(r, phi_r, phi_2r) in triples {
        if let Some(h) = kl_h_lower(phi_r, phi_2r, lambda)? {
            out.push(r / lambda, Some(h.max(0.0)), None, "kuelbs-li-lower", &params);
        }
    }
    Ok(out)
}

/// Exact and simplified lower bounds compared at `λ = √(2φ(r))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlConsistency {
    pub phi_r: f64,
    pub phi_2r: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub exact: f64,
    pub simplified: f64,
    /// `exact ≥ simplified − 1e−9`.
    pub exact_dominates: bool,
    /// `simplified − exact ≤ log 2 + 1e−9`.
    pub gap_within_log2: bool,
    /// `|−log Φ(α_r) − φ(r)|`.
    pub alpha_roundtrip_error: f64,
}

pub fn kl_consistency(phi_r: f64, phi_2r: f64) -> Result<KlConsistency> {
    let lambda = (2.0 * phi_r).sqrt();
    let alpha = alpha_r(phi_r)?;
    let exact = kl_h_lower(phi_r, phi_2r, lambda)?
        .ok_or_else(|| Error::precondition("consistency check needs finite phi values"))?;
    let simplified = kl_h_lower_simplified(phi_r, phi_2r, lambda);
    let roundtrip = if alpha.is_finite() { (-log_norm_cdf(alpha) - phi_r).abs() } else { 0.0 };
    Ok(KlConsistency {
        phi_r,
        phi_2r,
        lambda,
        alpha,
        exact,
        simplified,
        exact_dominates: exact >= simplified - 1e-9,
        gap_within_log2: simplified - exact <= std::f64::consts::LN_2 + 1e-9,
        alpha_roundtrip_error: roundtrip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::norm_cdf;

    #[test]
    fn upper_translation() {
        let c = kl_phi_to_h(&[(0.1, 5.0)], 2.0).unwrap();
        assert_eq!(c.points[0].x, 0.1);
        assert_eq!(c.points[0].upper, Some(7.0));
        let z = kl_phi_to_h(&[(0.3, 0.0), (0.5, 0.0)], 3.0).unwrap();
        assert!(z.points.iter().all(|p| p.upper == Some(4.5)));
        let a = kl_phi_to_h(&[(1.0, 2.0)], 2.0).unwrap().points[0].upper.unwrap();
        let b = kl_phi_to_h(&[(1.0, 2.0)], 4.0).unwrap().points[0].upper.unwrap();
        assert!((b - a - (16.0 - 4.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn alpha_values() {
        assert!(alpha_r(std::f64::consts::LN_2).unwrap().abs() < 1e-15);
        assert_eq!(alpha_r(0.0).unwrap(), f64::INFINITY);
        let a = alpha_r(5.0).unwrap();
        // bisection on the complementary error function as an independent route
        let (mut lo, mut hi) = (-10.0f64, 0.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if norm_cdf(mid) < (-5f64).exp() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((a - lo).abs() < 1e-12);
        assert!((a + 2.470_938_637_261_588_7).abs() < 1e-9);
        for phi in [0.01, 1.0, 8.0, 50.0, 700.0] {
            let c = kl_consistency(phi, phi).unwrap();
            assert!(c.alpha_roundtrip_error < 1e-9 * phi.max(1.0));
        }
    }

    #[test]
    fn simplified_form_gap_is_log_phi() {
        for phi in [8.0, 12.0, 30.0] {
            let c = kl_consistency(phi, 2.0 * phi).unwrap();
            let gap = c.exact - c.simplified;
            assert!((gap - log_norm_cdf(c.lambda + c.alpha)).abs() < 1e-12);
            assert!(gap < 0.0 && c.gap_within_log2);
        }
    }
}
