use serde::{Deserialize, Serialize};

use super::ellipsoid::CoefficientEllipsoid;
use crate::error::{Error, Result};

/// Settings of the covering-number bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyOptions {
    /// Bound the frequencies beyond `k_max` analytically instead of ignoring them.
    pub include_remainder: bool,
    /// Largest number of frequencies resolved by the lattice (2k+1 real dimensions).
    pub max_frequencies: usize,
    /// Resolution of the discretized quadratic budget in the lattice count.
    pub bins: usize,
    /// Largest number of lattice cells along one coordinate.
    pub max_cells_per_axis: usize,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        EntropyOptions { include_remainder: true, max_frequencies: 14, bins: 1 << 14, max_cells_per_axis: 4_000_000 }
    }
}

/// Lower and upper bounds on `H(ε) = log N(ε)` in the sup norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyBracket {
    pub epsilon: f64,
    pub h_lower: f64,
    pub h_upper: f64,
    pub lower_method: String,
    pub upper_method: String,
    /// Frequencies resolved by the lattice that achieved `h_upper`.
    pub frequencies: usize,
}

/// Sup-norm bound on the part of a member above frequency `k0`
/// (Cauchy–Schwarz against the weights).
pub fn tail_sup(ell: &CoefficientEllipsoid, k0: usize, include_remainder: bool) -> f64 {
    let mut s = 0.0;
    let mut k = k0 + 1;
    loop {
        if k > ell.k_max && !include_remainder {
            break;
        }
        let w = ell.weight(k);
        if k > ell.k_max && (w == 0.0 || w < 1e-22 * s) {
            break;
        }
        s += w;
        k += 1;
    }
    ell.radius * (2.0 * s).sqrt()
}

/// Costs `((|o + 2sj| − s)_+ / a)² < 1` of the cells along one axis, for the
/// offset (0 or s) that gives fewer cells.
fn axis_costs(a: f64, s: f64, max_cells: usize) -> Result<Vec<f64>> {
    let reach = ((a + s) / (2.0 * s)).ceil() as i64 + 1;
    if reach as f64 * 2.0 > max_cells as f64 {
        return Err(Error::Capacity { what: "lattice has too many cells along one axis".into(), min_supported: f64::NAN });
    }
    let costs_for = |offset: f64| -> Vec<f64> {
        (-reach..=reach)
            .filter_map(|j| {
                let gap = ((offset + 2.0 * s * j as f64).abs() - s).max(0.0) / a;
                let c = gap * gap;
                (c < 1.0).then_some(c)
            })
            .collect()
    };
    let centered = costs_for(0.0);
    let shifted = costs_for(s);
    Ok(if shifted.len() < centered.len() { shifted } else { centered })
}

/// `log` of the number of lattice cells (half-width `s` per coordinate)
/// meeting the ellipsoid with the given semi-axes. Cell costs are rounded
/// down onto `bins` levels, so the count can only be too large.
fn log_lattice_count(axes: &[f64], s: f64, opts: &EntropyOptions) -> Result<f64> {
    let bins = opts.bins;
    let mut dp = vec![0.0f64; bins];
    dp[0] = 1.0;
    for &a in axes {
        let mut hist = vec![0.0f64; bins];
        for c in axis_costs(a, s, opts.max_cells_per_axis)? {
            hist[((c * bins as f64) as usize).min(bins - 1)] += 1.0;
        }
        let used: Vec<(usize, f64)> = hist.iter().copied().enumerate().filter(|&(_, h)| h > 0.0).collect();
        let mut next = vec![0.0f64; bins];
        for (b, &v) in dp.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            for &(cb, h) in &used {
                let t = b + cb;
                if t >= bins {
                    break;
                }
                next[t] += v * h;
            }
        }
        dp = next;
    }
    Ok(dp.iter().sum::<f64>().ln())
}

/// Upper bound on `H(ε)` from a product lattice on the first `k0` frequencies,
/// optimized over `k0`; returns the bound and the optimal `k0`.
pub fn entropy_upper(ell: &CoefficientEllipsoid, epsilon: f64, opts: &EntropyOptions) -> Result<(f64, usize)> {
    if !(epsilon > 0.0) {
        return Err(Error::precondition(format!("epsilon must be positive, got {epsilon}")));
    }
    if epsilon >= ell.sup_radius(opts.include_remainder) {
        return Ok((0.0, 0));
    }
    let cap = ell.k_max.min(opts.max_frequencies);
    let mut best: Option<(f64, usize)> = None;
    for k0 in 0..=cap {
        let tail = tail_sup(ell, k0, opts.include_remainder);
        if tail >= epsilon {
            continue;
        }
        // constant coordinate contributes s, each frequency pair √2·s
        let s = (epsilon - tail) / (1.0 + std::f64::consts::SQRT_2 * k0 as f64);
        let mut axes = vec![ell.semi_axis(0)];
        for k in 1..=k0 {
            axes.push(ell.semi_axis(k));
            axes.push(ell.semi_axis(k));
        }
        let h = match log_lattice_count(&axes, s, opts) {
            Ok(h) => h,
            Err(Error::Capacity { .. }) => continue,
            Err(e) => return Err(e),
        };
        if best.map_or(true, |(b, _)| h < b) {
            best = Some((h, k0));
        }
    }
    best.ok_or_else(|| Error::Capacity {
        what: format!("entropy bracket needs more than {cap} frequencies at epsilon={epsilon}"),
        min_supported: tail_sup(ell, cap, opts.include_remainder),
    })
}

/// Volumetric lower bound: the sup ball is inside the L2 ball, so
/// `log N(ε) ≥ Σ_i log(a_i/ε)` over the L2 semi-axes `a_i > ε`.
pub fn entropy_lower(ell: &CoefficientEllipsoid, epsilon: f64) -> f64 {
    let mut h = 0.0;
    let mut add = |a: f64| {
        if a > epsilon {
            h += (a / epsilon).ln();
        }
    };
    add(ell.radius);
    for k in 1..=ell.k_max {
        let a = ell.radius * (-0.5 * (k as f64).powf(ell.nu)).exp();
        if a <= epsilon {
            break;
        }
        add(a);
        add(a);
    }
    h
}

pub fn entropy_bracket(ell: &CoefficientEllipsoid, epsilon: f64, opts: &EntropyOptions) -> Result<EntropyBracket> {
    let (h_upper, frequencies) = entropy_upper(ell, epsilon, opts)?;
    Ok(EntropyBracket {
        epsilon,
        h_lower: entropy_lower(ell, epsilon),
        h_upper,
        lower_method: "volumetric-l2".into(),
        upper_method: "product-lattice".into(),
        frequencies,
    })
}

/// Brackets for a batch of radii with monotone envelopes: an upper bound at
/// `ε` also holds at every larger radius, a lower bound at every smaller one.
pub fn entropy_brackets(ell: &CoefficientEllipsoid, epsilons: &[f64], opts: &EntropyOptions) -> Result<Vec<EntropyBracket>> {
    let mut out: Vec<EntropyBracket> = epsilons.iter().map(|&e| entropy_bracket(ell, e, opts)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..out.len()).collect();
    order.sort_by(|&a, &b| out[a].epsilon.total_cmp(&out[b].epsilon));
    let mut best_upper = f64::INFINITY;
    for &i in &order {
        best_upper = best_upper.min(out[i].h_upper);
        out[i].h_upper = best_upper;
    }
    let mut best_lower = 0.0f64;
    for &i in order.iter().rev() {
        best_lower = best_lower.max(out[i].h_lower);
        out[i].h_lower = best_lower;
    }
    Ok(out)
}
