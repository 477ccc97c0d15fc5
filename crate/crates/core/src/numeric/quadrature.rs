//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// Stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-12, rel: 1e-12, max_intervals: 20_000 }
    }
}

impl Tolerance {
    pub fn abs(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0, ..Default::default() }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kron += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Integrates `f` over `[breakpoints[0], breakpoints.last()]`, starting from the
/// given partition and bisecting the worst interval until the error estimate
/// meets `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], tol: Tolerance) -> Result<Integral> {
    assert!(breakpoints.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::with_capacity(breakpoints.len() * 4);
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b == a {
            continue;
        }
        let (v, e) = kronrod(&f, a, b);
        evaluations += 15;
        value += v;
        error += e;
        heap.push(Piece { a, b, value: v, error: e });
    }
    loop {
        if !value.is_finite() {
            return Err(Error::numeric("integrand produced a non-finite value", f64::INFINITY));
        }
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(Integral { value, abs_error: error, evaluations });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::numeric("adaptive quadrature did not converge", error));
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Ok(Integral { value, abs_error: error, evaluations }),
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            return Err(Error::numeric("quadrature interval underflow", error));
        }
        let (v1, e1) = kronrod(&f, worst.a, mid);
        let (v2, e2) = kronrod(&f, mid, worst.b);
        evaluations += 30;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
    }
}

/// Evenly spaced breakpoints on `[a, b]` with panels no longer than `max_panel`.
pub fn panels(a: f64, b: f64, max_panel: f64) -> Vec<f64> {
    let n = (((b - a) / max_panel).ceil() as usize).max(1);
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, &[0.0, 2.0], Tolerance::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_with_panels() {
        let bp = panels(0.0, 50.0, 1.0);
        let r = integrate(|x| (3.0 * x).cos() * (-x).exp(), &bp, Tolerance::default()).unwrap();
        // ∫_0^50 e^{-x} cos 3x dx = (1 - e^{-50}(cos150 - 3 sin150))/10
        let exact = (1.0 - (-50f64).exp() * ((150f64).cos() - 3.0 * (150f64).sin())) / 10.0;
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn reports_failure() {
        let tol = Tolerance { abs: 1e-14, rel: 0.0, max_intervals: 4 };
        let err = integrate(|x| 1.0 / x.sqrt(), &[0.0, 1.0], tol).unwrap_err();
        assert!(err.is_numeric());
    }
}
