use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{Error, Result};
use crate::numeric::{integrate, Tolerance};
use crate::spectra::SpectralModel;

/// Inputs of the truncation entropy bound for the continuous family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationBoundInput {
    pub model: SpectralModel,
    pub epsilon: f64,
    /// Rate coefficient, `δ = θ·|log ε|^{1−1/ν}`; defaults to `3^{-1/ν}`.
    pub theta: Option<f64>,
    /// Multiplicative constant of the bound.
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub nu: f64,
    pub epsilon: f64,
    pub theta: f64,
    pub delta: f64,
    /// Truncation frequency `v = (3|log ε|)^{1/ν}`.
    pub v: f64,
    /// `I = ∫_{|u|≤v} e^{δ|u| − |u|^ν} du`.
    pub i_value: f64,
    pub i_within_2v: bool,
    /// `(∫_{|u|>v} F(du))^{1/2}`, the sup bound of the discarded spectral part.
    pub tail_sup: f64,
    pub tail_ok: bool,
    pub c: f64,
    /// `C·|log(ε/√I)|²/δ`.
    pub h_upper: f64,
}

pub fn truncation_entropy_upper(input: &TruncationBoundInput) -> Result<TruncationReport> {
    let nu = match input.model {
        SpectralModel::Continuous { nu } => nu,
        other => return Err(Error::Unsupported(format!("truncation bound is defined for the continuous family, got {other:?}"))),
    };
    input.model.validate()?;
    let eps = input.epsilon;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::precondition(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if !(input.c > 0.0) {
        return Err(Error::precondition("constant C must be positive"));
    }
    let theta_max = 3f64.powf(-1.0 / nu);
    let theta = input.theta.unwrap_or(theta_max);
    if !(theta > 0.0 && theta <= theta_max * (1.0 + 1e-12)) {
        return Err(Error::precondition(format!("theta must lie in (0, 3^(-1/nu)] = (0, {theta_max}], got {theta}")));
    }
    let log_eps = eps.ln().abs();
    let v = (3.0 * log_eps).powf(1.0 / nu);
    let delta = theta * log_eps.powf(1.0 - 1.0 / nu);

    let exponent = |u: f64| delta * u - u.powf(nu);
    let mut edges = vec![0.0];
    for k in (-12..=0).rev() {
        let x = v * 10f64.powi(k);
        if x > *edges.last().unwrap() {
            edges.push(x);
        }
    }
    let mut refined = vec![0.0];
    for w in edges.windows(2) {
        for i in 1..=16 {
            refined.push(w[0] + (w[1] - w[0]) * i as f64 / 16.0);
        }
    }
    let half = integrate(|u| exponent(u).exp(), &refined, Tolerance { abs: 0.0, rel: 1e-12, max_intervals: 100_000 })?;
    let i_value = 2.0 * half.value;

    let a = 1.0 / nu;
    let tail_mass = 2.0 / nu * gamma(a) * gamma_ur(a, v.powf(nu));
    let tail_sup = tail_mass.sqrt();

    let log_ratio = (eps / i_value.sqrt()).ln();
    Ok(TruncationReport {
        nu,
        epsilon: eps,
        theta,
        delta,
        v,
        i_value,
        i_within_2v: i_value <= 2.0 * v,
        tail_sup,
        tail_ok: tail_sup <= eps,
        c: input.c,
        h_upper: input.c * log_ratio * log_ratio / delta,
    })
}

/// Upper bound on `φ(r)` read off the entropy bound at `ε = r`.
pub fn truncation_phi_upper(nu: f64, r: f64, c: f64) -> Result<f64> {
    let rep = truncation_entropy_upper(&TruncationBoundInput {
        model: SpectralModel::Continuous { nu },
        epsilon: r,
        theta: None,
        c,
    })?;
    Ok(rep.h_upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(nu: f64, eps: f64) -> TruncationBoundInput {
        TruncationBoundInput { model: SpectralModel::Continuous { nu }, epsilon: eps, theta: None, c: 1.0 }
    }

    #[test]
    fn half_power_example() {
        let rep = truncation_entropy_upper(&input(0.5, 1e-3)).unwrap();
        let l = 1e-3f64.ln().abs();
        assert!((rep.v - (3.0 * l).powi(2)).abs() < 1e-9);
        assert!((rep.v - 429.47).abs() < 0.1);
        assert!((rep.delta - l.recip() / 9.0).abs() < 1e-15);
        assert!((rep.delta - 0.016_084).abs() < 1e-5);
        assert!(rep.i_within_2v && rep.tail_ok);
    }

    #[test]
    fn integral_against_midpoint_oracle() {
        let rep = truncation_entropy_upper(&input(1.0, 1e-4)).unwrap();
        // ν = 1: I = 2(1 − e^{(δ−1)v})/(1 − δ)
        let d = rep.delta;
        let exact = 2.0 * (1.0 - ((d - 1.0) * rep.v).exp()) / (1.0 - d);
        assert!((rep.i_value - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn linear_in_constant_and_theta_checked() {
        let a = truncation_entropy_upper(&input(0.5, 1e-6)).unwrap();
        let b = truncation_entropy_upper(&TruncationBoundInput { c: 3.0, ..input(0.5, 1e-6) }).unwrap();
        assert!((b.h_upper - 3.0 * a.h_upper).abs() < 1e-12 * b.h_upper);
        let bad = TruncationBoundInput { theta: Some(0.2), ..input(0.5, 1e-6) };
        assert!(matches!(truncation_entropy_upper(&bad), Err(Error::Precondition(_))));
    }
}
