use crate::curve::{Abscissa, BoundCurve};
use crate::error::{Error, Result};

/// Multiplier `n = ⌈1/c⌉` of the patching bound.
pub fn patch_multiplier(c: f64) -> Result<u64> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::precondition(format!("c must lie in (0, 1], got {c}")));
    }
    // 1/c computed in floating point can land just above an integer
    Ok((1.0 / c - 1e-12).ceil().max(1.0) as u64)
}

/// Entropy bound for the time-rescaled process: `H^c(2ε) ≤ ⌈1/c⌉·H(ε)` for every
/// upper value of `h_curve`.
pub fn scaling_patch(h_curve: &BoundCurve, c: f64) -> Result<BoundCurve> {
    if h_curve.abscissa != Abscissa::Epsilon {
        return Err(Error::precondition("scaling patch expects an entropy curve"));
    }
    let n = patch_multiplier(c)?;
    let params = format!("c={c},n={n}");
    let mut out = BoundCurve::new(Abscissa::Epsilon);
    for (eps, h) in h_curve.uppers() {
        out.push(2.0 * eps, None, Some(n as f64 * h), "scaling-patch", &params);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: &[(f64, f64)]) -> BoundCurve {
        let mut c = BoundCurve::new(Abscissa::Epsilon);
        for &(e, h) in points {
            c.push(e, None, Some(h), "input", "");
        }
        c
    }

    #[test]
    fn multipliers() {
        assert_eq!(patch_multiplier(1.0).unwrap(), 1);
        assert_eq!(patch_multiplier(0.5).unwrap(), 2);
        assert_eq!(patch_multiplier(0.4).unwrap(), 3);
        assert_eq!(patch_multiplier(0.1).unwrap(), 10);
        assert_eq!(patch_multiplier(1.0 / 3.0).unwrap(), 3);
        assert!(patch_multiplier(0.0).is_err() && patch_multiplier(1.5).is_err());
    }

    #[test]
    fn patched_curve() {
        let out = scaling_patch(&curve(&[(0.1, 10.0), (0.2, 4.0)]), 0.5).unwrap();
        assert_eq!(out.uppers(), vec![(0.2, 20.0), (0.4, 8.0)]);
        let same = scaling_patch(&curve(&[(0.1, 10.0)]), 1.0).unwrap();
        assert_eq!(same.uppers(), vec![(0.2, 10.0)]);
    }
}
