use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit ball of the RKHS of the periodic process, truncated to frequencies
/// `|k| ≤ k_max` and scaled by `radius`.
///
/// Members are `h(t) = Σ_{|k|≤K} c_k e^{-2πikt}` with `Σ |c_k|² e^{|k|^ν} ≤ radius²`.
/// In the real coordinates `h = x₀ + Σ_k (x_k cos 2πkt + y_k sin 2πkt)` the
/// semi-axes are `radius` for `x₀` and `√2·radius·e^{-k^ν/2}` for `x_k, y_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEllipsoid {
    pub nu: f64,
    pub k_max: usize,
    pub radius: f64,
}

impl CoefficientEllipsoid {
    pub fn new(nu: f64, k_max: usize) -> Result<Self> {
        Self::with_radius(nu, k_max, 1.0)
    }

    pub fn with_radius(nu: f64, k_max: usize, radius: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::precondition(format!("nu must be positive, got {nu}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::precondition(format!("radius must be positive, got {radius}")));
        }
        Ok(CoefficientEllipsoid { nu, k_max, radius })
    }

    /// Weight `e^{-|k|^ν}` of frequency `k`.
    pub fn weight(&self, k: usize) -> f64 {
        (-(k as f64).powf(self.nu)).exp()
    }

    /// Semi-axis of the real coordinates at frequency `k` (both of them for `k ≥ 1`).
    pub fn semi_axis(&self, k: usize) -> f64 {
        if k == 0 {
            self.radius
        } else {
            std::f64::consts::SQRT_2 * self.radius * (-0.5 * (k as f64).powf(self.nu)).exp()
        }
    }

    /// `Σ |c_k|² e^{|k|^ν}` for coefficients indexed `-K..=K`.
    pub fn norm_sq(&self, coeffs: &[Complex64]) -> Result<f64> {
        let k = self.check_len(coeffs)?;
        Ok(coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let freq = (i as i64 - k as i64).unsigned_abs() as f64;
                c.norm_sqr() * freq.powf(self.nu).exp()
            })
            .sum())
    }

    pub fn contains(&self, coeffs: &[Complex64]) -> Result<bool> {
        Ok(self.norm_sq(coeffs)? <= self.radius * self.radius * (1.0 + 1e-12))
    }

    fn check_len(&self, coeffs: &[Complex64]) -> Result<usize> {
        if coeffs.len() != 2 * self.k_max + 1 {
            return Err(Error::precondition(format!(
                "expected {} coefficients (k = -{K}..={K}), got {}",
                2 * self.k_max + 1,
                coeffs.len(),
                K = self.k_max
            )));
        }
        Ok(self.k_max)
    }

    /// Supremum of `|h(t)|` over the ball: `radius·(Σ_{|k|≤K} e^{-|k|^ν})^{1/2}`,
    /// or with the untruncated series when `untruncated` is set.
    pub fn sup_radius(&self, untruncated: bool) -> f64 {
        let mut s = 1.0;
        let mut k = 1;
        loop {
            let w = self.weight(k);
            if !untruncated && k > self.k_max {
                break;
            }
            if untruncated && k > self.k_max && w < 1e-20 * s {
                break;
            }
            s += 2.0 * w;
            k += 1;
        }
        self.radius * s.sqrt()
    }
}

/// Evaluates `Re Σ c_k e^{-2πikt}` on `times` for a member of the ellipsoid.
pub fn ellipsoid_member_to_function(ell: &CoefficientEllipsoid, coeffs: &[Complex64], times: &[f64]) -> Result<Vec<f64>> {
    let norm_sq = ell.norm_sq(coeffs)?;
    if norm_sq > ell.radius * ell.radius * (1.0 + 1e-12) {
        return Err(Error::precondition(format!("coefficients have norm² {norm_sq} outside the ball")));
    }
    let k = ell.k_max as i64;
    Ok(times
        .iter()
        .map(|&t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let x = (i as i64 - k) as f64 * t;
                    let phase = -2.0 * PI * (x - x.floor());
                    (c * Complex64::from_polar(1.0, phase)).re
                })
                .sum()
        })
        .collect())
}
