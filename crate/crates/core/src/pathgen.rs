//! Sample paths of stationary Gaussian processes on equally spaced grids.
//!
//! Three generators are provided:
//!
//! * a finite random Fourier series for atomic spectral measures (exact in law
//!   up to the truncated tail variance),
//! * circulant embedding of the grid covariance for continuous measures, and
//! * a spectral-strata series (equal-measure strata, midpoint frequencies) used
//!   when the embedding has significantly negative eigenvalues.
//!
//! Paths are produced in aligned blocks of [`BLOCK`] consecutive path indices.
//! The normals of path `i` come from a ChaCha8 stream selected by `(seed, i)`,
//! and each block is computed the same way regardless of which thread runs it,
//! so every path is bit-reproducible independently of the worker count.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate, Tolerance};
use crate::spectra::SpectralModel;

/// Number of consecutive path indices generated together.
pub const BLOCK: usize = 64;

/// Number of strata in the spectral fallback.
pub const DEFAULT_STRATA: usize = 4096;

/// Largest circulant size, as a multiple of the minimal one.
pub const MAX_EMBEDDING_GROWTH: usize = 16;

/// Default bound on the variance dropped by truncating a Fourier series.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Equally spaced time grid `t_min, …, t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_min >= 0.0 && t_min.is_finite() && t_max.is_finite()) {
            return Err(Error::precondition(format!("grid bounds must be finite with t_min ≥ 0, got [{t_min}, {t_max}]")));
        }
        if !(t_min < t_max) {
            return Err(Error::precondition(format!("grid needs t_min < t_max, got [{t_min}, {t_max}]")));
        }
        if n_points < 2 {
            return Err(Error::precondition("grid needs at least 2 points"));
        }
        Ok(GridSpec { t_min, t_max, n_points })
    }

    /// `n_points` points on `[0, 1]`.
    pub fn unit(n_points: usize) -> Result<Self> {
        Self::new(0.0, 1.0, n_points)
    }

    pub fn spacing(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.t_max
        } else {
            self.t_min + i as f64 * self.spacing()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// The same interval with `2(n−1)+1` points.
    pub fn refined(&self) -> Self {
        GridSpec { n_points: 2 * (self.n_points - 1) + 1, ..*self }
    }
}

/// How a path was generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum GenMethod {
    FourierSeries { truncation_k: usize },
    Circulant { embedding_size: usize },
    SpectralStrata { strata: usize, embedding_rejected: bool },
}

/// One simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub seed: u64,
    pub path_index: u64,
    pub method: GenMethod,
}

/// Truncation of the random Fourier series of the discrete family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGenConfig {
    pub nu: f64,
    pub k: usize,
    pub tail_tol: f64,
}

impl PeriodicGenConfig {
    /// Checks `2·Σ_{k>K} e^{-k^ν} ≤ tail_tol`.
    pub fn new(nu: f64, k: usize, tail_tol: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::precondition(format!("nu must be positive, got {nu}")));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::precondition("tail_tol must be positive"));
        }
        let tail = tail_variance(nu, k);
        if tail > tail_tol {
            let min_k = minimal_truncation(nu, tail_tol);
            return Err(Error::precondition(format!(
                "truncation K={k} leaves tail variance {tail:e} > {tail_tol:e}; minimal admissible K is {min_k}"
            )));
        }
        Ok(PeriodicGenConfig { nu, k, tail_tol })
    }

    /// Smallest admissible `K` for the tolerance.
    pub fn auto(nu: f64, tail_tol: f64) -> Result<Self> {
        Self::new(nu, minimal_truncation(nu, tail_tol), tail_tol)
    }
}

/// `2·Σ_{k>K} e^{-k^ν}`.
pub fn tail_variance(nu: f64, k: usize) -> f64 {
    let mut s = 0.0;
    let mut j = k as f64 + 1.0;
    loop {
        let term = (-j.powf(nu)).exp();
        s += term;
        if term < 1e-30 * s.max(1e-300) || term == 0.0 {
            break;
        }
        j += 1.0;
    }
    2.0 * s
}

/// Smallest `K` with `2·Σ_{k>K} e^{-k^ν} ≤ tail_tol`.
pub fn minimal_truncation(nu: f64, tail_tol: f64) -> usize {
    let mut k = 0;
    while tail_variance(nu, k) > tail_tol {
        k += 1;
    }
    k
}

/// Something that produces blocks of sample paths.
pub trait PathSource: Sync {
    fn grid(&self) -> &GridSpec;

    fn method(&self) -> GenMethod;

    /// Writes paths `BLOCK·block .. BLOCK·(block+1)` into `out`, path-major
    /// (`out.len() == BLOCK · n_points`).
    fn fill_block(&self, seed: u64, block: u64, out: &mut [f64]);
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Path number `index` of the stream `seed`.
pub fn sample<S: PathSource + ?Sized>(source: &S, seed: u64, index: u64) -> PathSample {
    let n = source.grid().n_points;
    let mut buf = vec![0.0; BLOCK * n];
    let block = index / BLOCK as u64;
    source.fill_block(seed, block, &mut buf);
    let row = (index % BLOCK as u64) as usize;
    PathSample {
        grid: *source.grid(),
        values: buf[row * n..(row + 1) * n].to_vec(),
        seed,
        path_index: index,
        method: source.method(),
    }
}

/// Applies `f` to paths `0..n_paths` in parallel; results are in index order.
pub fn map_paths<S, T, F>(source: &S, seed: u64, n_paths: usize, f: F) -> Vec<T>
where
    S: PathSource + ?Sized,
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    let n = source.grid().n_points;
    let blocks = n_paths.div_ceil(BLOCK);
    let per_block: Vec<Vec<T>> = (0..blocks)
        .into_par_iter()
        .map_init(
            || vec![0.0; BLOCK * n],
            |buf, b| {
                source.fill_block(seed, b as u64, buf);
                let rows = BLOCK.min(n_paths - b * BLOCK);
                buf.chunks_exact(n).take(rows).map(&f).collect()
            },
        )
        .collect();
    per_block.into_iter().flatten().collect()
}

/// Paths as linear combinations `X = Σ_j z_j·b_j` of fixed basis vectors with
/// i.i.d. standard normal `z`.
#[derive(Debug, Clone)]
pub struct BasisSource {
    grid: GridSpec,
    /// `n_points × terms`, column `j` is the basis vector `b_j`.
    basis: DMatrix<f64>,
    method: GenMethod,
}

impl BasisSource {
    /// Random Fourier series of an atomic model truncated at `|k| ≤ k_max`:
    /// `ξ₀√m₀ + Σ_k √(2m_k)(ξ_k cos 2πkt + η_k sin 2πkt)`.
    pub fn fourier(model: &SpectralModel, k_max: usize, grid: GridSpec) -> Result<Self> {
        if !model.is_discrete() {
            return Err(Error::Unsupported("Fourier series generation needs an atomic spectral measure".into()));
        }
        let n = grid.n_points;
        let terms = 2 * k_max + 1;
        let mut basis = DMatrix::zeros(n, terms);
        let times = grid.times();
        let m0 = model.atom_mass(0)?.sqrt();
        basis.column_mut(0).fill(m0);
        for k in 1..=k_max {
            let amp = (2.0 * model.atom_mass(k as i64)?).sqrt();
            for (i, &t) in times.iter().enumerate() {
                // reduce kt modulo 1 before scaling by 2π
                let x = k as f64 * t;
                let phase = 2.0 * PI * (x - x.floor());
                basis[(i, 2 * k - 1)] = amp * phase.cos();
                basis[(i, 2 * k)] = amp * phase.sin();
            }
        }
        Ok(BasisSource { grid, basis, method: GenMethod::FourierSeries { truncation_k: k_max } })
    }

    /// Equal-measure strata of a continuous model with frequencies at the
    /// measure midpoints of each stratum.
    pub fn spectral_strata(model: &SpectralModel, grid: GridSpec, strata: usize, embedding_rejected: bool) -> Result<Self> {
        let freqs = strata_frequencies(model, strata)?;
        let half_mass = 0.5 * model.total_mass();
        let amp = (2.0 * half_mass / strata as f64).sqrt();
        let n = grid.n_points;
        let mut basis = DMatrix::zeros(n, 2 * strata);
        let times = grid.times();
        for (j, &u) in freqs.iter().enumerate() {
            for (i, &t) in times.iter().enumerate() {
                let (s, c) = (u * t).sin_cos();
                basis[(i, 2 * j)] = amp * c;
                basis[(i, 2 * j + 1)] = amp * s;
            }
        }
        Ok(BasisSource { grid, basis, method: GenMethod::SpectralStrata { strata, embedding_rejected } })
    }

    pub fn terms(&self) -> usize {
        self.basis.ncols()
    }
}

impl PathSource for BasisSource {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn method(&self) -> GenMethod {
        self.method
    }

    fn fill_block(&self, seed: u64, block: u64, out: &mut [f64]) {
        let terms = self.terms();
        let mut z = Vec::with_capacity(terms * BLOCK);
        for row in 0..BLOCK as u64 {
            let mut rng = stream(seed, block * BLOCK as u64 + row);
            z.extend((0..terms).map(|_| rng.sample::<f64, _>(StandardNormal)));
        }
        let z = DMatrix::from_vec(terms, BLOCK, z);
        let paths = &self.basis * z;
        out.copy_from_slice(paths.as_slice());
    }
}

/// Frequencies `u_j = G⁻¹((j+½)/S · G(∞))` where `G(u) = ∫_0^u f`.
pub fn strata_frequencies(model: &SpectralModel, strata: usize) -> Result<Vec<f64>> {
    if model.is_discrete() {
        return Err(Error::Unsupported("spectral strata need a continuous spectral measure".into()));
    }
    if strata == 0 {
        return Err(Error::precondition("at least one stratum is needed"));
    }
    // cumulative half-line mass on a fine partition
    let coarse = model.panel_edges(None)?;
    let mut edges = Vec::new();
    for w in coarse.windows(2) {
        let pieces = 8;
        for i in 0..pieces {
            edges.push(w[0] + (w[1] - w[0]) * i as f64 / pieces as f64);
        }
    }
    edges.push(*coarse.last().unwrap());
    let tol = Tolerance { abs: 1e-15, rel: 1e-13, max_intervals: 2000 };
    let density = |u: f64| model.density(u).unwrap_or(0.0);
    let mut cumulative = vec![0.0];
    for w in edges.windows(2) {
        let piece = integrate(density, &[w[0], w[1]], tol)?.value;
        cumulative.push(cumulative.last().unwrap() + piece);
    }
    let total = *cumulative.last().unwrap();
    let mut freqs = Vec::with_capacity(strata);
    let mut panel = 0;
    for j in 0..strata {
        let target = (j as f64 + 0.5) / strata as f64 * total;
        while cumulative[panel + 1] < target {
            panel += 1;
        }
        let (a, b) = (edges[panel], edges[panel + 1]);
        let need = target - cumulative[panel];
        let (mut lo, mut hi) = (a, b);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let mass = integrate(density, &[a, mid], tol)?.value;
            if mass < need {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        freqs.push(0.5 * (lo + hi));
    }
    Ok(freqs)
}

/// Exact-in-law generation by circulant embedding of the grid covariance.
pub struct Circulant {
    grid: GridSpec,
    /// `√(λ_j / m)` for the clipped embedding eigenvalues.
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Circulant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Circulant").field("grid", &self.grid).field("size", &self.scale.len()).finish()
    }
}

impl Circulant {
    /// Minimal embedding size `2^⌈log₂ 2(n−1)⌉`.
    pub fn minimal_size(n_points: usize) -> usize {
        (2 * (n_points - 1)).next_power_of_two()
    }

    /// Tries sizes `m₀, 2m₀, …, growth·m₀`; `None` when every embedding has an
    /// eigenvalue below `−1e−8·R(0)`.
    pub fn try_new(model: &SpectralModel, grid: GridSpec, growth: usize) -> Result<Option<Self>> {
        let m0 = Self::minimal_size(grid.n_points);
        let delta = grid.spacing();
        let var = model.covariance(0.0)?.value;
        let mut lags: Vec<f64> = vec![var];
        let mut planner = FftPlanner::new();
        let mut m = m0;
        while m <= m0 * growth.max(1) {
            while lags.len() <= m / 2 {
                lags.push(model.covariance(lags.len() as f64 * delta)?.value);
            }
            let mut row: Vec<Complex<f64>> =
                (0..m).map(|j| Complex::new(lags[j.min(m - j)], 0.0)).collect();
            let fft = planner.plan_fft_forward(m);
            fft.process(&mut row);
            let min = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
            if min >= -1e-8 * var {
                let scale = row.iter().map(|c| (c.re.max(0.0) / m as f64).sqrt()).collect();
                return Ok(Some(Circulant { grid, scale, fft }));
            }
            m *= 2;
        }
        Ok(None)
    }

    pub fn size(&self) -> usize {
        self.scale.len()
    }
}

impl PathSource for Circulant {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn method(&self) -> GenMethod {
        GenMethod::Circulant { embedding_size: self.size() }
    }

    fn fill_block(&self, seed: u64, block: u64, out: &mut [f64]) {
        let m = self.size();
        let n = self.grid.n_points;
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for (row, dst) in out.chunks_exact_mut(n).enumerate() {
            let mut rng = stream(seed, block * BLOCK as u64 + row as u64);
            for (b, &s) in buf.iter_mut().zip(&self.scale) {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *b = Complex::new(s * re, s * im);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (d, b) in dst.iter_mut().zip(&buf) {
                *d = b.re;
            }
        }
    }
}

/// Generator for a continuous spectral model: circulant embedding when it is
/// admissible, spectral strata otherwise.
#[derive(Debug)]
pub enum ContinuousSource {
    Circulant(Circulant),
    Strata(BasisSource),
}

impl ContinuousSource {
    pub fn new(model: &SpectralModel, grid: GridSpec) -> Result<Self> {
        if model.is_discrete() {
            return Err(Error::Unsupported("continuous generation needs a continuous spectral measure".into()));
        }
        model.validate()?;
        match Circulant::try_new(model, grid, MAX_EMBEDDING_GROWTH)? {
            Some(c) => Ok(ContinuousSource::Circulant(c)),
            None => Ok(ContinuousSource::Strata(BasisSource::spectral_strata(model, grid, DEFAULT_STRATA, true)?)),
        }
    }
}

impl PathSource for ContinuousSource {
    fn grid(&self) -> &GridSpec {
        match self {
            ContinuousSource::Circulant(c) => c.grid(),
            ContinuousSource::Strata(s) => s.grid(),
        }
    }

    fn method(&self) -> GenMethod {
        match self {
            ContinuousSource::Circulant(c) => c.method(),
            ContinuousSource::Strata(s) => s.method(),
        }
    }

    fn fill_block(&self, seed: u64, block: u64, out: &mut [f64]) {
        match self {
            ContinuousSource::Circulant(c) => c.fill_block(seed, block, out),
            ContinuousSource::Strata(s) => s.fill_block(seed, block, out),
        }
    }
}

/// Generator for any model: Fourier series for atomic measures (truncated by
/// `tail_tol`), otherwise [`ContinuousSource`].
pub fn source_for(model: &SpectralModel, grid: GridSpec, tail_tol: f64) -> Result<Box<dyn PathSource + Send>> {
    match *model {
        SpectralModel::Discrete { nu } => {
            let cfg = PeriodicGenConfig::auto(nu, tail_tol)?;
            Ok(Box::new(BasisSource::fourier(model, cfg.k, grid)?))
        }
        SpectralModel::DirichletMinorant { l, .. } => Ok(Box::new(BasisSource::fourier(model, l as usize, grid)?)),
        _ => Ok(Box::new(ContinuousSource::new(model, grid)?)),
    }
}

/// One path of the discrete family truncated at `cfg.k`.
pub fn gen_periodic(cfg: &PeriodicGenConfig, grid: GridSpec, seed: u64) -> Result<PathSample> {
    let cfg = PeriodicGenConfig::new(cfg.nu, cfg.k, cfg.tail_tol)?;
    let src = BasisSource::fourier(&SpectralModel::Discrete { nu: cfg.nu }, cfg.k, grid)?;
    Ok(sample(&src, seed, 0))
}

/// One path of a continuous model.
pub fn gen_continuous(model: &SpectralModel, grid: GridSpec, seed: u64) -> Result<PathSample> {
    let src = ContinuousSource::new(model, grid)?;
    Ok(sample(&src, seed, 0))
}

/// One path of the discrete minorant with equal atoms on `|k| ≤ l`.
pub fn gen_minorant_discrete(l: u32, nu: f64, grid: GridSpec, seed: u64) -> Result<PathSample> {
    let model = SpectralModel::DirichletMinorant { nu, l };
    model.validate()?;
    let src = BasisSource::fourier(&model, l as usize, grid)?;
    Ok(sample(&src, seed, 0))
}

/// One path of the continuous minorant with constant density on `|u| ≤ l`.
pub fn gen_minorant_continuous(l: f64, nu: f64, grid: GridSpec, seed: u64) -> Result<PathSample> {
    if !(l >= 1.0) {
        return Err(Error::precondition(format!("minorant needs l ≥ 1, got {l}")));
    }
    gen_continuous(&SpectralModel::BandMinorant { nu, l }, grid, seed)
}

/// `max |x_i|`.
pub fn sup_of(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Trapezoid approximation of `(∫ x² dt)^{1/2}`.
pub fn l2_of(values: &[f64], spacing: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return values.first().map_or(0.0, |v| v.abs());
    }
    let inner: f64 = values[1..n - 1].iter().map(|v| v * v).sum();
    let ends = 0.5 * (values[0] * values[0] + values[n - 1] * values[n - 1]);
    ((inner + ends) * spacing).sqrt()
}

pub fn sup_norm(path: &PathSample) -> f64 {
    sup_of(&path.values)
}

/// L2 norm over the grid interval, normalized so that a constant path has its own absolute value as norm
/// when the interval has unit length.
pub fn l2_norm(path: &PathSample) -> f64 {
    l2_of(&path.values, path.grid.spacing())
}

/// Writes `t,x` rows.
pub fn write_path_csv<W: Write>(path: &PathSample, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "x"])?;
    for (i, v) in path.values.iter().enumerate() {
        w.write_record([format!("{}", path.grid.point(i)), format!("{v}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_moments(src: &dyn PathSource, seed: u64, n_paths: usize, i: usize, j: usize) -> (f64, f64) {
        let prods = map_paths(src, seed, n_paths, |p| p[i] * p[j]);
        let mean = prods.iter().sum::<f64>() / n_paths as f64;
        let var = prods.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n_paths - 1) as f64;
        (mean, (var / n_paths as f64).sqrt())
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0.5, 0.5, 2).is_err());
        assert!(GridSpec::new(0.0, 1.0, 1).is_err());
        let g = GridSpec::unit(11).unwrap();
        assert!((g.spacing() - 0.1).abs() < 1e-15);
        assert_eq!(g.point(10), 1.0);
        assert_eq!(g.refined().n_points, 21);
    }

    #[test]
    fn truncation_rule() {
        // 2Σ_{k>20} e^{-k} = 2e^{-21}/(1-e^{-1})
        let tail = tail_variance(1.0, 20);
        assert!((tail - 2.0 * (-21f64).exp() / (1.0 - (-1f64).exp())).abs() < 1e-22);
        let k = minimal_truncation(1.0, DEFAULT_TAIL_TOL);
        assert!(tail_variance(1.0, k) <= DEFAULT_TAIL_TOL && tail_variance(1.0, k - 1) > DEFAULT_TAIL_TOL);
        let err = PeriodicGenConfig::new(1.0, 3, 1e-10).unwrap_err();
        assert!(err.to_string().contains(&format!("minimal admissible K is {k}")));
    }

    #[test]
    fn periodic_is_deterministic_and_k0_is_constant() {
        let g = GridSpec::unit(33).unwrap();
        let cfg = PeriodicGenConfig::new(1.0, 0, 10.0).unwrap();
        let p = gen_periodic(&cfg, g, 9).unwrap();
        assert!(p.values.iter().all(|&v| v == p.values[0]));
        let cfg = PeriodicGenConfig::auto(1.0, 1e-10).unwrap();
        let a = gen_periodic(&cfg, g, 3).unwrap();
        let b = gen_periodic(&cfg, g, 3).unwrap();
        assert_eq!(a, b);
        let c = gen_periodic(&cfg, g, 4).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn block_position_does_not_matter() {
        let g = GridSpec::unit(17).unwrap();
        let src = BasisSource::fourier(&SpectralModel::Discrete { nu: 2.0 }, 5, g).unwrap();
        let all = map_paths(&src, 5, 130, |p| p.to_vec());
        for idx in [0u64, 63, 64, 129] {
            assert_eq!(sample(&src, 5, idx).values, all[idx as usize]);
        }
    }

    #[test]
    fn periodic_variance_k20() {
        let g = GridSpec::unit(5).unwrap();
        let model = SpectralModel::Discrete { nu: 1.0 };
        let src = BasisSource::fourier(&model, 20, g).unwrap();
        let q = (-1f64).exp();
        let exact = 1.0 + 2.0 * q * (1.0 - q.powi(20)) / (1.0 - q);
        assert!((exact - 2.163_953_411_339_566).abs() < 1e-12);
        let (m, se) = sample_moments(&src, 1, 20_000, 0, 0);
        assert!((m - exact).abs() < 4.0 * se, "{m} vs {exact} (se {se})");
    }

    #[test]
    fn minorant_variances() {
        let g = GridSpec::unit(7).unwrap();
        let d = SpectralModel::DirichletMinorant { nu: 1.0, l: 3 };
        assert!((d.total_mass() - 7.0 * (-3f64).exp()).abs() < 1e-15);
        let src = BasisSource::fourier(&d, 3, g).unwrap();
        let (m, se) = sample_moments(&src, 2, 20_000, 3, 3);
        assert!((m - 0.348_509_478_575_047_6).abs() < 4.0 * se);
        let c = SpectralModel::BandMinorant { nu: 1.0, l: 2.0 };
        let csrc = ContinuousSource::new(&c, g).unwrap();
        let (m, se) = sample_moments(&csrc, 2, 20_000, 0, 0);
        assert!((m - 4.0 * (-2f64).exp()).abs() < 4.0 * se);
    }

    #[test]
    fn circulant_works_for_gaussian_kernel() {
        let g = GridSpec::unit(101).unwrap();
        let c = Circulant::try_new(&SpectralModel::Continuous { nu: 2.0 }, g, MAX_EMBEDDING_GROWTH)
            .unwrap()
            .expect("gaussian kernel embeds");
        assert!(c.size() >= Circulant::minimal_size(101));
        let pair = GridSpec::new(0.0, 0.5, 2).unwrap();
        let src = ContinuousSource::new(&SpectralModel::Continuous { nu: 2.0 }, pair).unwrap();
        let n = 20_000;
        let (c01, se) = sample_moments(&src, 11, n, 0, 1);
        let target = PI.sqrt() * (-0.0625f64).exp();
        assert!((c01 - target).abs() < 4.0 * se, "{c01} vs {target}");
    }

    #[test]
    fn strata_frequencies_are_equal_measure() {
        let m = SpectralModel::Continuous { nu: 1.0 };
        let u = strata_frequencies(&m, 8).unwrap();
        // half-line CDF of e^{-u} is 1 - e^{-u}
        for (j, &x) in u.iter().enumerate() {
            let target = (j as f64 + 0.5) / 8.0;
            assert!((1.0 - (-x).exp() - target).abs() < 1e-10);
        }
        let band = strata_frequencies(&SpectralModel::Bandlimited { cutoff: 1.0 }, 4).unwrap();
        for (j, &x) in band.iter().enumerate() {
            assert!((x - (j as f64 + 0.5) / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn norms() {
        let g = GridSpec::unit(1001).unwrap();
        let flat = PathSample { grid: g, values: vec![0.7; 1001], seed: 0, path_index: 0, method: GenMethod::FourierSeries { truncation_k: 0 } };
        assert!((sup_norm(&flat) - 0.7).abs() < 1e-15);
        assert!((l2_norm(&flat) - 0.7).abs() < 1e-12);
        assert_eq!(sup_of(&[-3.0, 1.0]), 3.0);
        let cos: Vec<f64> = g.times().iter().map(|t| (2.0 * PI * t).cos()).collect();
        assert!((l2_of(&cos, g.spacing()) - 0.5f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn csv_export() {
        let g = GridSpec::unit(3).unwrap();
        let p = PathSample { grid: g, values: vec![1.0, 2.0, 3.0], seed: 0, path_index: 0, method: GenMethod::FourierSeries { truncation_k: 0 } };
        let mut out = Vec::new();
        write_path_csv(&p, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "t,x\n0,1\n0.5,2\n1,3\n");
    }
}
