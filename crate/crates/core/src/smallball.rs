//! Small-ball probabilities: Monte Carlo estimates with Wilson intervals, and the
//! exact distribution of the squared L2 norm of the periodic process.
//!
//! Under the period-1 convention the squared `L2[0,1]` norm of the truncated
//! Fourier series is `ξ₀² + Σ_k e^{-k^ν}(ξ_k² + η_k²)`, a weighted chi-square
//! variable. Its distribution function is recovered from the Laplace transform
//! `∏_j (1+2λ_j z)^{-1/2} / z`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate, Tolerance};
use crate::pathgen::{self, GenMethod, GridSpec, PathSource};

/// 97.5% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Norm in which the ball is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Sup,
    L2,
}

impl Norm {
    pub fn of(self, values: &[f64], spacing: f64) -> f64 {
        match self {
            Norm::Sup => pathgen::sup_of(values),
            Norm::L2 => pathgen::l2_of(values, spacing),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Norm::Sup => "sup",
            Norm::L2 => "l2",
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sup" | "inf" | "uniform" => Ok(Norm::Sup),
            "l2" | "L2" => Ok(Norm::L2),
            other => Err(Error::precondition(format!("unknown norm '{other}'"))),
        }
    }
}

/// Monte Carlo estimate of `P(‖X‖ ≤ r)`.
///
/// `phi_hat` is `+∞` when there are no hits (serialized as `inf` in CSV and
/// `null` in JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBallEstimate {
    pub r: f64,
    pub norm: Norm,
    pub n_samples: usize,
    pub hits: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub phi_hat: f64,
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub grid_points: usize,
    pub seed: u64,
    pub generator: GenMethod,
}

impl SmallBallEstimate {
    /// Standard error of `p_hat`.
    pub fn p_se(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.n_samples as f64).sqrt()
    }

    /// Delta-method standard error of `phi_hat`; infinite without hits.
    pub fn phi_se(&self) -> f64 {
        if self.hits == 0 {
            f64::INFINITY
        } else {
            ((1.0 - self.p_hat) / (self.n_samples as f64 * self.p_hat)).sqrt()
        }
    }
}

/// 95% Wilson score interval for `hits` successes out of `n`.
pub fn wilson(hits: usize, n: usize) -> (f64, f64) {
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if hits as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

fn neg_log(p: f64) -> f64 {
    if p <= 0.0 {
        f64::INFINITY
    } else {
        -p.ln()
    }
}

/// Builds the estimate record from a hit count.
pub fn from_hits(r: f64, norm: Norm, hits: usize, n: usize, grid_points: usize, seed: u64, generator: GenMethod) -> SmallBallEstimate {
    let p_hat = hits as f64 / n as f64;
    let (ci_low, ci_high) = wilson(hits, n);
    SmallBallEstimate {
        r,
        norm,
        n_samples: n,
        hits,
        p_hat,
        ci_low,
        ci_high,
        phi_hat: neg_log(p_hat),
        phi_lo: neg_log(ci_high),
        phi_hi: neg_log(ci_low),
        grid_points,
        seed,
        generator,
    }
}

/// Norms of paths `0..n_samples`, in index order.
pub fn path_norms<S: PathSource + ?Sized>(source: &S, norm: Norm, n_samples: usize, seed: u64) -> Vec<f64> {
    let spacing = source.grid().spacing();
    pathgen::map_paths(source, seed, n_samples, |p| norm.of(p, spacing))
}

/// Estimates `P(‖X‖ ≤ r)` for every radius with the same paths (common random
/// numbers), so the estimates are monotone in `r`.
pub fn estimate<S: PathSource + ?Sized>(
    source: &S,
    norm: Norm,
    radii: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<SmallBallEstimate>> {
    if n_samples < 100 {
        return Err(Error::precondition(format!("need at least 100 samples, got {n_samples}")));
    }
    if let Some(&bad) = radii.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::precondition(format!("radii must be positive, got {bad}")));
    }
    let mut norms = path_norms(source, norm, n_samples, seed);
    norms.sort_by(f64::total_cmp);
    let grid_points = source.grid().n_points;
    Ok(radii
        .iter()
        .map(|&r| {
            let hits = norms.partition_point(|&x| x <= r);
            from_hits(r, norm, hits, n_samples, grid_points, seed, source.method())
        })
        .collect())
}

/// Result of the grid-doubling loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinedEstimate {
    pub levels: Vec<Vec<SmallBallEstimate>>,
    pub converged: bool,
}

impl RefinedEstimate {
    pub fn finest(&self) -> &[SmallBallEstimate] {
        self.levels.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Repeats [`estimate`] on successively doubled grids until every finite
/// `phi_hat` moves by less than 1% relative, or `max_levels` grids were used.
pub fn estimate_refined<F>(
    make_source: F,
    grid: GridSpec,
    norm: Norm,
    radii: &[f64],
    n_samples: usize,
    seed: u64,
    max_levels: usize,
) -> Result<RefinedEstimate>
where
    F: Fn(GridSpec) -> Result<Box<dyn PathSource + Send>>,
{
    let mut levels: Vec<Vec<SmallBallEstimate>> = Vec::new();
    let mut g = grid;
    for _ in 0..max_levels.max(1) {
        let src = make_source(g)?;
        let est = estimate(src.as_ref(), norm, radii, n_samples, seed)?;
        if let Some(prev) = levels.last() {
            let settled = prev.iter().zip(&est).all(|(a, b)| {
                if a.phi_hat.is_finite() && b.phi_hat.is_finite() {
                    (a.phi_hat - b.phi_hat).abs() <= 0.01 * b.phi_hat.abs().max(1e-300)
                } else {
                    a.phi_hat == b.phi_hat
                }
            });
            levels.push(est);
            if settled {
                return Ok(RefinedEstimate { levels, converged: true });
            }
        } else {
            levels.push(est);
        }
        g = g.refined();
    }
    Ok(RefinedEstimate { levels, converged: false })
}

fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

/// Writes the estimates with columns
/// `r, norm, n, hits, p_hat, ci_low, ci_high, phi_hat, phi_lo, phi_hi, grid, seed`.
pub fn write_estimates_csv<W: Write>(rows: &[SmallBallEstimate], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["r", "norm", "n", "hits", "p_hat", "ci_low", "ci_high", "phi_hat", "phi_lo", "phi_hi", "grid", "seed"])?;
    for e in rows {
        w.write_record([
            fmt_f64(e.r),
            e.norm.to_string(),
            e.n_samples.to_string(),
            e.hits.to_string(),
            fmt_f64(e.p_hat),
            fmt_f64(e.ci_low),
            fmt_f64(e.ci_high),
            fmt_f64(e.phi_hat),
            fmt_f64(e.phi_lo),
            fmt_f64(e.phi_hi),
            e.grid_points.to_string(),
            e.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Law of `Σ_j λ_j Z_j²` with independent standard normal `Z_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedChiSquareSpec {
    /// Positive weights in nonincreasing order.
    pub weights: Vec<f64>,
}

impl WeightedChiSquareSpec {
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::precondition("need at least one weight"));
        }
        if let Some(&w) = weights.iter().find(|&&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::precondition(format!("weights must be positive, got {w}")));
        }
        weights.sort_by(|a, b| b.total_cmp(a));
        Ok(WeightedChiSquareSpec { weights })
    }

    /// Weights of the squared L2 norm of the periodic process truncated at `K`:
    /// 1, then `e^{-k^ν}` twice for `k = 1..K`; weights that underflow are dropped.
    pub fn periodic(nu: f64, k: usize) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::precondition(format!("nu must be positive, got {nu}")));
        }
        let mut w = vec![1.0];
        for j in 1..=k {
            let l = (-(j as f64).powf(nu)).exp();
            if l == 0.0 {
                break;
            }
            w.push(l);
            w.push(l);
        }
        Self::new(w)
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn log_transform(&self, z: Complex64) -> Complex64 {
        // log of ∏(1+2λz)^{-1/2} / z with principal logarithms
        let mut s = -z.ln();
        for &l in &self.weights {
            s -= 0.5 * (1.0 + 2.0 * l * z).ln();
        }
        s
    }
}

/// `P(Σ λ_j Z_j² ≤ x)` from `N` trapezoid nodes on the parabolic contour
/// `z(θ) = N/x·(0.1309 − 0.1194θ² + 0.25iθ)`.
fn contour_cdf(spec: &WeightedChiSquareSpec, x: f64, nodes: usize) -> f64 {
    let nf = nodes as f64;
    let h = 2.0 * PI / nf;
    let scale = nf / x;
    let mut acc = 0.0;
    // conjugate symmetry: sum over θ > 0 and double the real part
    for k in 0..nodes / 2 {
        let theta = (k as f64 + 0.5) * h;
        let z = Complex64::new(scale * (0.1309 - 0.1194 * theta * theta), scale * 0.25 * theta);
        let dz = Complex64::new(-scale * 0.2388 * theta, scale * 0.25);
        let term = (z * x + spec.log_transform(z)).exp() * dz;
        // Re(term / i) = Im(term)
        acc += term.im;
    }
    2.0 * acc * h / (2.0 * PI)
}

/// `P(Σ λ_j Z_j² ≤ r²)` with absolute error below 1e−8.
///
/// The Laplace transform is inverted on a Weideman–Trefethen parabolic contour
/// whose node count doubles from 16 until two successive values differ by less
/// than 1e−9.
pub fn exact_l2(spec: &WeightedChiSquareSpec, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::precondition(format!("radius must be positive, got {r}")));
    }
    let x = r * r;
    let mut nodes = 16;
    let mut prev = contour_cdf(spec, x, nodes);
    while nodes < 256 {
        nodes *= 2;
        let next = contour_cdf(spec, x, nodes);
        if !next.is_finite() {
            break;
        }
        if (next - prev).abs() < 1e-9 {
            return Ok(next.clamp(0.0, 1.0));
        }
        prev = next;
    }
    Err(Error::numeric("contour inversion of the weighted chi-square law did not settle", f64::NAN))
}

/// Saddle point `c > 0` of `s·x − ½Σ log(1+2λs) − log s`.
fn saddle(spec: &WeightedChiSquareSpec, x: f64) -> f64 {
    let slope = |s: f64| x - spec.weights.iter().map(|&l| l / (1.0 + 2.0 * l * s)).sum::<f64>() - 1.0 / s;
    // slope increases from −∞ to x; bracket in log s
    let (mut lo, mut hi) = (-60.0f64, 0.0f64);
    while slope(hi.exp()) < 0.0 {
        hi += 5.0;
    }
    while slope(lo.exp()) > 0.0 {
        lo -= 10.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid.exp()) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// `log P(Σ λ_j Z_j² ≤ r²)`, accurate in relative terms deep in the lower tail.
///
/// Moderate probabilities come from [`exact_l2`]. Below 1e−3 the inversion
/// integral runs along the parabola `z(θ) = c(1+iθ)²`, which crosses the real
/// axis vertically at the saddle point `c` of the integrand, and the saddle
/// value is factored out so the computation stays in log space.
pub fn log_exact_l2(spec: &WeightedChiSquareSpec, r: f64) -> Result<f64> {
    let p = exact_l2(spec, r)?;
    if p > 1e-3 {
        return Ok(p.ln());
    }
    let x = r * r;
    let c = saddle(spec, x);
    let phase = |z: Complex64| z * x + spec.log_transform(z);
    let base = phase(Complex64::new(c, 0.0)).re;
    // Im(e^{Φ(z)−Φ(c)} z'(θ)) with z'(θ) = 2c(i − θ)
    let integrand = |theta: f64| {
        let z = Complex64::new(c * (1.0 - theta * theta), 2.0 * c * theta);
        let dz = Complex64::new(-2.0 * c * theta, 2.0 * c);
        ((phase(z) - base).exp() * dz).im
    };
    let curv = spec.weights.iter().map(|&l| 2.0 * l * l / (1.0 + 2.0 * l * c).powi(2)).sum::<f64>() + 1.0 / (c * c);
    // Φ(z(θ)) − Φ(c) ≈ −2c²Φ''(c)θ² near θ = 0
    let width = (1.0 / (4.0 * c * c * curv)).sqrt().min(1.0);
    let peak = 2.0 * c;
    let mut upper = 8.0 * width;
    while integrand(upper).abs() > 1e-20 * peak {
        upper *= 1.5;
        if upper > 1e6 * width.max(1.0) {
            return Err(Error::numeric("saddle-point integral tail did not decay", integrand(upper).abs()));
        }
    }
    let n = ((upper / (0.5 * width)).ceil() as usize).clamp(8, 100_000);
    let edges: Vec<f64> = (0..=n).map(|i| upper * i as f64 / n as f64).collect();
    let tol = Tolerance { abs: 1e-18 * peak * width, rel: 1e-12, max_intervals: 8 * n + 1000 };
    let value = integrate(integrand, &edges, tol)?.value / PI;
    if !(value > 0.0) {
        return Err(Error::numeric("saddle-point integral is not positive", value));
    }
    Ok(base + value.ln())
}

/// One point of the exact L2 small-deviation curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2CurvePoint {
    pub r: f64,
    pub phi: f64,
    /// `φ(r)/|log r|²`.
    pub ratio: f64,
}

/// `φ(r) = −log P(‖X̃_ν‖_{L2} ≤ r)` for the periodic process truncated at `K`.
pub fn phi_l2_curve(nu: f64, k: usize, radii: &[f64]) -> Result<Vec<L2CurvePoint>> {
    let spec = WeightedChiSquareSpec::periodic(nu, k)?;
    radii
        .iter()
        .map(|&r| {
            let phi = -log_exact_l2(&spec, r)?;
            let lr = r.ln();
            Ok(L2CurvePoint { r, phi, ratio: phi / (lr * lr) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::norm_cdf;
    use crate::pathgen::BasisSource;
    use crate::spectra::SpectralModel;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    /// P(Z₀² + λ(Z₁² + Z₂²) ≤ x): the pair term is exponential with mean 2λ.
    fn two_level_oracle(lambda: f64, x: f64) -> f64 {
        let a = x.sqrt();
        let f = |z: f64| (-0.5 * z * z).exp() / (2.0 * PI).sqrt() * (1.0 - (-(x - z * z) / (2.0 * lambda)).exp());
        simpson(f, -a, a, 20_000)
    }

    #[test]
    fn wilson_at_zero_hits() {
        let (lo, hi) = wilson(0, 100_000);
        assert_eq!(lo, 0.0);
        let z2 = Z95 * Z95;
        assert!((hi - z2 / (1e5 + z2)).abs() < 1e-18);
        assert!((hi - 3.8413e-5).abs() < 1e-8);
        let e = from_hits(0.1, Norm::Sup, 0, 100_000, 5, 1, GenMethod::FourierSeries { truncation_k: 0 });
        assert!(e.phi_hat.is_infinite() && e.phi_lo.is_finite());
    }

    #[test]
    fn wilson_contains_p_hat() {
        for &(h, n) in &[(1, 100), (50, 100), (99, 100), (100, 100), (7, 100_000)] {
            let (lo, hi) = wilson(h, n);
            let p = h as f64 / n as f64;
            assert!(lo <= p && p <= hi);
        }
    }

    #[test]
    fn chi_square_one_dimension() {
        let spec = WeightedChiSquareSpec::periodic(1.0, 0).unwrap();
        let p = exact_l2(&spec, 1.0).unwrap();
        assert!((p - (2.0 * norm_cdf(1.0) - 1.0)).abs() < 1e-9);
        assert!((p - 0.682_689_492_137_086).abs() < 1e-9);
        for &r in &[0.05, 0.3, 2.0, 4.0] {
            let q = exact_l2(&spec, r).unwrap();
            assert!((q - (2.0 * norm_cdf(r) - 1.0)).abs() < 1e-9, "r={r}");
        }
    }

    #[test]
    fn two_level_against_quadrature_oracle() {
        let spec = WeightedChiSquareSpec::periodic(1.0, 1).unwrap();
        let lambda = (-1f64).exp();
        for &r in &[0.1, 0.5, 1.0, 2.5] {
            let p = exact_l2(&spec, r).unwrap();
            let o = two_level_oracle(lambda, r * r);
            assert!((p - o).abs() < 1e-9, "r={r}: {p} vs {o}");
        }
        // frozen value at r = 0.1
        let p = exact_l2(&spec, 0.1).unwrap();
        assert!((p - two_level_oracle(lambda, 0.01)).abs() < 1e-10);
    }

    #[test]
    fn large_radius_gives_one() {
        let spec = WeightedChiSquareSpec::periodic(1.0, 8).unwrap();
        assert!((exact_l2(&spec, 20.0).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn log_route_matches_direct_route() {
        let spec = WeightedChiSquareSpec::periodic(1.0, 8).unwrap();
        for &r in &[0.05, 0.1, 0.2] {
            let p = exact_l2(&spec, r).unwrap();
            let lp = log_exact_l2(&spec, r).unwrap();
            assert!(p > 1e-15);
            assert!((lp - p.ln()).abs() < 1e-4 * p.ln().abs() + 1e-8 / p, "r={r}: {lp} vs {}", p.ln());
        }
        // one dimension: log(2Φ(r) − 1) in the tail
        let one = WeightedChiSquareSpec::periodic(1.0, 0).unwrap();
        let r: f64 = 1e-6;
        let exact = (2.0 * (r / (2.0 * PI).sqrt()) * (1.0 - r * r / 6.0)).ln();
        assert!((log_exact_l2(&one, r).unwrap() - exact).abs() < 1e-8);
    }

    #[test]
    fn log_route_deep_tail_two_levels() {
        let spec = WeightedChiSquareSpec::periodic(1.0, 1).unwrap();
        let lambda = (-1f64).exp();
        for &r in &[1e-2, 1e-3] {
            let o = two_level_oracle(lambda, r * r).ln();
            let l = log_exact_l2(&spec, r).unwrap();
            assert!((l - o).abs() < 1e-6 * o.abs(), "r={r}: {l} vs {o}");
        }
    }

    #[test]
    fn l2_curve_ratio_and_truncation_stability() {
        let radii: Vec<f64> = (0..=8).map(|i| 10f64.powf(-8.0 + 0.5 * i as f64)).collect();
        let c40 = phi_l2_curve(1.0, 40, &radii).unwrap();
        let lo = c40.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
        let hi = c40.iter().map(|p| p.ratio).fold(0.0, f64::max);
        assert!(hi / lo - 1.0 < 0.15, "ratios {lo}..{hi}");
        let a = phi_l2_curve(1.0, 40, &[1e-6]).unwrap()[0].phi;
        let b = phi_l2_curve(1.0, 60, &[1e-6]).unwrap()[0].phi;
        assert!((a - b).abs() < 1e-6 * b);
    }

    #[test]
    fn phi_curve_is_monotone() {
        let radii = [1e-6, 1e-4, 1e-2, 0.5];
        let c = phi_l2_curve(1.0, 20, &radii).unwrap();
        for w in c.windows(2) {
            assert!(w[0].phi > w[1].phi);
        }
    }

    #[test]
    fn monte_carlo_monotone_and_close_to_exact() {
        let g = GridSpec::unit(65).unwrap();
        let src = BasisSource::fourier(&SpectralModel::Discrete { nu: 1.0 }, 8, g).unwrap();
        let radii = [0.5, 1.0, 1.5];
        let est = estimate(&src, Norm::L2, &radii, 20_000, 3).unwrap();
        for w in est.windows(2) {
            assert!(w[0].hits <= w[1].hits);
        }
        let spec = WeightedChiSquareSpec::periodic(1.0, 8).unwrap();
        for e in &est {
            let p = exact_l2(&spec, e.r).unwrap();
            assert!((e.p_hat - p).abs() <= 4.0 * e.p_se().max(1e-4), "r={} {} vs {p}", e.r, e.p_hat);
        }
        assert!(estimate(&src, Norm::L2, &radii, 99, 3).is_err());
    }

    #[test]
    fn csv_columns() {
        let e = from_hits(0.5, Norm::L2, 3, 100, 17, 7, GenMethod::FourierSeries { truncation_k: 8 });
        let mut out = Vec::new();
        write_estimates_csv(&[e], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("r,norm,n,hits,p_hat,ci_low,ci_high,phi_hat,phi_lo,phi_hi,grid,seed\n0.5,l2,100,3,0.03,"));
    }
}
