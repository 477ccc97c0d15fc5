use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate, panels, Tolerance};
use crate::spectra::SpectralModel;

/// Outcome of checking `|h(iy)| ≤ M_ν(2|y|)` on random members of the unit ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub nu: f64,
    pub samples: usize,
    pub degree: usize,
    pub y_values: Vec<f64>,
    /// Largest `|h(iy)|/M_ν(2|y|)` seen at each `y`.
    pub max_ratio: Vec<f64>,
    pub seed: u64,
}

/// Half-width of the window carrying `∫ |u|^d e^{|y||u| − |u|^ν} du` up to `e^{-60}`.
fn window(nu: f64, y: f64, degree: usize) -> f64 {
    let mut u = 2.0f64;
    while u.powf(nu) - y.abs() * u - degree as f64 * u.ln() < 60.0 {
        u *= 1.25;
    }
    u
}

/// `∫ u^n e^{yu} e^{-|u|^ν} du` for `n = 0..=max_power`.
fn tilted_moments(nu: f64, y: f64, max_power: usize) -> Result<Vec<f64>> {
    let u_max = window(nu, y, max_power);
    let edges = panels(0.0, u_max, 0.5);
    let tol = Tolerance { abs: 0.0, rel: 1e-13, max_intervals: 50_000 };
    // fold onto u ≥ 0 so odd moments at y = 0 vanish identically
    (0..=max_power)
        .map(|n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let g = |u: f64| u.powi(n as i32) * (((y * u).exp() + sign * (-y * u).exp()) * (-u.powf(nu)).exp());
            integrate(g, &edges, tol).map(|r| r.value)
        })
        .collect()
}

/// `h(iy) = ∫ ℓ(u) e^{yu} F(du)` for the polynomial `ℓ(u) = Σ a_j u^j`.
pub fn h_at_imag(nu: f64, coeffs: &[f64], y: f64) -> Result<f64> {
    let m = tilted_moments(nu, y, coeffs.len().saturating_sub(1))?;
    Ok(coeffs.iter().zip(&m).map(|(a, m)| a * m).sum())
}

/// `‖ℓ‖²_{L2(F)}` for the polynomial `ℓ(u) = Σ a_j u^j`.
pub fn poly_norm_sq(nu: f64, coeffs: &[f64]) -> Result<f64> {
    let d = coeffs.len().saturating_sub(1);
    let m = tilted_moments(nu, 0.0, 2 * d)?;
    let mut s = 0.0;
    for (i, a) in coeffs.iter().enumerate() {
        for (j, b) in coeffs.iter().enumerate() {
            s += a * b * m[i + j];
        }
    }
    Ok(s)
}

/// Samples `sample_count` random polynomial `ℓ` of degree `degree` normalized in
/// `L2(F)` and checks `|h(iy)| ≤ M_ν(2|y|)(1 + 1e−8)` at each `y` in `y_values`.
pub fn rkhs_growth_check(nu: f64, sample_count: usize, y_values: &[f64], degree: usize, seed: u64) -> Result<GrowthReport> {
    if !(nu > 1.0 && nu.is_finite()) {
        return Err(Error::precondition(format!("growth check needs nu > 1, got {nu}")));
    }
    let model = SpectralModel::Continuous { nu };
    let bounds: Vec<f64> = y_values.iter().map(|y| model.exp_moment(2.0 * y.abs())).collect::<Result<_>>()?;
    let moments: Vec<Vec<f64>> = y_values.iter().map(|&y| tilted_moments(nu, y, degree)).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = vec![0.0f64; y_values.len()];
    for _ in 0..sample_count {
        let mut a: Vec<f64> = (0..=degree).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = poly_norm_sq(nu, &a)?.sqrt();
        a.iter_mut().for_each(|x| *x /= norm);
        for (i, &y) in y_values.iter().enumerate() {
            let h: f64 = a.iter().zip(&moments[i]).map(|(a, m)| a * m).sum();
            let ratio = h.abs() / bounds[i];
            if ratio > 1.0 + 1e-8 {
                return Err(Error::Property(format!("|h(i·{y})| = {} exceeds M(2|y|) = {}", h.abs(), bounds[i])));
            }
            max_ratio[i] = max_ratio[i].max(ratio);
        }
    }
    Ok(GrowthReport { nu, samples: sample_count, degree, y_values: y_values.to_vec(), max_ratio, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_member_at_zero() {
        let mass = SpectralModel::Continuous { nu: 2.0 }.total_mass();
        let a = [1.0 / mass.sqrt()];
        assert!((poly_norm_sq(2.0, &a).unwrap() - 1.0).abs() < 1e-12);
        // ℓ ≡ const attains Cauchy–Schwarz at y = 0
        assert!((h_at_imag(2.0, &a, 0.0).unwrap() - mass.sqrt()).abs() < 1e-12);
        assert_eq!(h_at_imag(2.0, &[0.0, 0.0], 1.5).unwrap(), 0.0);
    }

    #[test]
    fn random_members_respect_bound() {
        let rep = rkhs_growth_check(2.0, 50, &[0.0, 0.5, 1.0, 2.0], 5, 3).unwrap();
        assert!(rep.max_ratio.iter().all(|&r| r > 0.0 && r <= 1.0 + 1e-8));
        let rep = rkhs_growth_check(1.5, 20, &[-1.0, 1.0, 3.0], 4, 9).unwrap();
        assert!(rep.max_ratio.iter().all(|&r| r <= 1.0 + 1e-8));
    }

    #[test]
    fn taylor_member_nearly_attains_bound() {
        // ℓ(u) ≈ e^{yu} is the Cauchy–Schwarz extremal direction
        let y = 1.0;
        let mut a = vec![1.0];
        for j in 1..=14 {
            a.push(a[j - 1] * y / j as f64);
        }
        let n = poly_norm_sq(2.0, &a).unwrap().sqrt();
        let h = h_at_imag(2.0, &a, y).unwrap() / n;
        // sup over the ball is ‖e^{yu}‖ = (√π e^{y²})^{1/2}, below M_2(2)
        let best = (std::f64::consts::PI.sqrt() * (y * y).exp()).sqrt();
        assert!(h <= best * (1.0 + 1e-10) && h > 0.9999 * best, "{h} vs {best}");
        let m = SpectralModel::Continuous { nu: 2.0 }.exp_moment(2.0).unwrap();
        assert!(best < m);
    }

    #[test]
    fn rejects_small_nu() {
        assert!(matches!(rkhs_growth_check(1.0, 1, &[0.0], 1, 0), Err(Error::Precondition(_))));
    }
}
