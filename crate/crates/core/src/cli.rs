//! Command-line front end. Every run writes its result file and a manifest
//! `<out>.manifest.json` holding the resolved configuration; `rerun` replays a
//! manifest and reproduces the result byte for byte.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::curve::{Abscissa, BoundCurve};
use crate::error::{Error, Result};
use crate::pathgen::{self, BasisSource, GridSpec, PathSource, DEFAULT_TAIL_TOL};
use crate::ratefit::{self, BetaMode};
use crate::rkhs::{self, CoefficientEllipsoid, EntropyOptions, GFunctionSpec, TruncationBoundInput};
use crate::smallball::{self, Norm, WeightedChiSquareSpec};
use crate::spectra::{SpectralKind, SpectralModel};
use crate::tsirelson::{self, BoundVariant, Convention, SpectrumType, TsirelsonConfig};

/// Environment variable supplying the default seed.
pub const SEED_ENV: &str = "SMOOTHBALL_SEED";

#[derive(Parser, Debug)]
#[command(name = "smoothball", version, about = "Small deviations of smooth stationary Gaussian processes")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Seed of the path streams.
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    /// Result file; the manifest goes to `<out>.manifest.json`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat `key = value` file; flags on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// Comma-separated list of reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealList(pub Vec<f64>);

impl std::str::FromStr for RealList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| x.trim().parse::<f64>().map_err(|_| Error::precondition(format!("'{x}' is not a number"))))
            .collect::<Result<Vec<_>>>()
            .map(RealList)
    }
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Sample paths of a spectral model.
    Simulate(SimulateArgs),
    /// Monte Carlo small-ball probabilities.
    Smallball(SmallballArgs),
    /// Exact L2 small-ball probabilities of the truncated periodic process.
    L2Exact(L2ExactArgs),
    /// Minorant lower bounds on the small-deviation function.
    Tsirelson(TsirelsonArgs),
    /// Metric entropy bracket or truncation bound.
    Entropy(EntropyArgs),
    /// Translate between small deviations and entropy.
    KlTranslate(KlArgs),
    /// Certify the auxiliary product function.
    GCertify(GArgs),
    /// Entropy bound of the time-rescaled process.
    Scaling(ScalingArgs),
    /// Fit the rate template to a curve.
    Fit(FitArgs),
    /// Reference bounds for the family with log-power spectrum.
    Problem5(Problem5Args),
    /// Replay a manifest.
    #[serde(skip)]
    Rerun(RerunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Smallball(_) => "smallball",
            Command::L2Exact(_) => "l2-exact",
            Command::Tsirelson(_) => "tsirelson",
            Command::Entropy(_) => "entropy",
            Command::KlTranslate(_) => "kl-translate",
            Command::GCertify(_) => "g-certify",
            Command::Scaling(_) => "scaling",
            Command::Fit(_) => "fit",
            Command::Problem5(_) => "problem5",
            Command::Rerun(_) => "rerun",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ModelArgs {
    /// continuous, discrete, bandlimited, log-power, truncated, band-minorant, dirichlet-minorant
    #[arg(long, alias = "kind", default_value = "discrete")]
    pub spectrum: SpectralKind,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Band edge; the parameter `l` for the minorants.
    #[arg(long, alias = "l")]
    pub cutoff: Option<f64>,
    /// Fourier truncation of the discrete family (the process itself is truncated).
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Tail variance allowed when the truncation is chosen automatically.
    #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
    pub tail_tol: f64,
}

impl ModelArgs {
    fn model(&self) -> Result<SpectralModel> {
        SpectralModel::from_fields(self.spectrum, self.nu, self.alpha, self.cutoff)
    }

    fn source(&self, grid: GridSpec) -> Result<Box<dyn PathSource + Send>> {
        let model = self.model()?;
        match (model, self.k) {
            (SpectralModel::Discrete { .. }, Some(k)) => Ok(Box::new(BasisSource::fourier(&model, k, grid)?)),
            _ => pathgen::source_for(&model, grid, self.tail_tol),
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GridArgs {
    /// Number of grid points.
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,
    /// Time scale of the rescaled process `X(t/c)`; stretches the horizon to `t_max/c`.
    #[arg(long)]
    pub c: Option<f64>,
}

impl GridArgs {
    fn spec(&self) -> Result<GridSpec> {
        let horizon = match self.c {
            Some(c) if c > 0.0 => self.t_max / c,
            Some(c) => return Err(Error::precondition(format!("time scale must be positive, got {c}"))),
            None => self.t_max,
        };
        GridSpec::new(0.0, horizon, self.grid)
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Path written to the CSV output.
    #[arg(long, default_value_t = 0)]
    pub path_index: u64,
    /// Paths summarized in the JSON output.
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SmallballArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value = "sup")]
    pub norm: Norm,
    #[arg(long)]
    pub r: RealList,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Grid doublings allowed until the estimates settle.
    #[arg(long, default_value_t = 1)]
    pub refine: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct L2ExactArgs {
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long = "K", default_value_t = 40)]
    pub k: usize,
    #[arg(long)]
    pub r: RealList,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct TsirelsonArgs {
    #[arg(long, default_value = "discrete")]
    pub spectrum: SpectrumType,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long)]
    pub r: RealList,
    #[arg(long, default_value = "paper-2pi")]
    pub convention: Convention,
    #[arg(long, default_value = "paper-exponent")]
    pub variant: BoundVariant,
    /// Fixed minorant parameter; optimized over the search window when absent.
    #[arg(long)]
    pub l: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyMethod {
    Bracket,
    Truncation,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EntropyArgs {
    #[arg(long, value_enum, default_value = "bracket")]
    pub method: EntropyMethod,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Frequencies of the ellipsoid.
    #[arg(long = "K", default_value_t = 20)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long)]
    pub eps: RealList,
    #[arg(long, default_value_t = 14)]
    pub max_frequencies: usize,
    /// Ignore frequencies beyond K.
    #[arg(long)]
    pub no_remainder: bool,
    /// Rate coefficient of the truncation bound.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Constant of the truncation bound.
    #[arg(long = "C", default_value_t = 1.0)]
    pub constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KlDirection {
    /// `H(2r/λ) ≤ φ(r) + λ²/2`.
    Upper,
    /// `H(r/λ) ≥ φ(2r) + log Φ(λ + α_r)`.
    Lower,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct KlArgs {
    /// CSV with an `r` column and a φ column.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Inline `r:phi` pairs, comma separated.
    #[arg(long)]
    pub points: Option<String>,
    #[arg(long)]
    pub phi_column: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value = "upper")]
    pub direction: KlDirection,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GArgs {
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t0: f64,
    #[arg(long, default_value_t = 1e4)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_depth: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ScalingArgs {
    #[arg(long)]
    pub c: f64,
    /// Entropy curve CSV (`epsilon`, `upper`); computed from the ellipsoid when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long = "K", default_value_t = 20)]
    pub k: usize,
    #[arg(long)]
    pub eps: Option<RealList>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FitArgs {
    /// Curve CSV with an `r` column.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub phi_column: Option<String>,
    /// `free` or a fixed value of β.
    #[arg(long, default_value = "free")]
    pub beta: BetaMode,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct Problem5Args {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub r: RealList,
}

#[derive(Args, Debug, Clone)]
pub struct RerunArgs {
    pub manifest: PathBuf,
}

/// Everything needed to reproduce a result file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub format: Format,
    pub threads: Option<usize>,
    pub output: PathBuf,
    #[serde(flatten)]
    pub command: Command,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Path of the manifest written next to `out`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Parses `args` (program name first), runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse(&args) {
        Ok(c) => c,
        Err(Failure::Usage(e)) => {
            let _ = e.print();
            return e.exit_code();
        }
        Err(Failure::Run(e)) => return report(&e),
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => report(&e),
    }
}

fn report(e: &Error) -> i32 {
    eprintln!("error: {e}");
    match e {
        Error::Precondition(_) | Error::Domain(_) | Error::Unsupported(_) => 2,
        _ => 1,
    }
}

enum Failure {
    Usage(clap::Error),
    Run(Error),
}

const SUBCOMMANDS: [&str; 11] = [
    "simulate", "smallball", "l2-exact", "tsirelson", "entropy", "kl-translate", "g-certify", "scaling", "fit", "problem5", "rerun",
];

fn parse(args: &[OsString]) -> std::result::Result<Cli, Failure> {
    let given: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let config = given.iter().enumerate().find_map(|(i, a)| match a.strip_prefix("--config") {
        Some("") => given.get(i + 1).cloned(),
        Some(rest) => rest.strip_prefix('=').map(str::to_string),
        None => None,
    });
    let at = given.iter().skip(1).position(|a| SUBCOMMANDS.contains(&a.as_str())).map(|i| i + 1);
    let (Some(config), Some(at)) = (config, at) else {
        return Cli::try_parse_from(args).map_err(Failure::Usage);
    };
    let entries = read_config(Path::new(&config)).map_err(Failure::Run)?;
    let mut merged: Vec<OsString> = args[..=at].to_vec();
    for (key, value) in entries {
        let flag = format!("--{key}");
        let present = given.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if !present {
            merged.push(flag.into());
            if value != "true" {
                merged.push(value.into());
            }
        }
    }
    merged.extend_from_slice(&args[at + 1..]);
    Cli::try_parse_from(merged).map_err(Failure::Usage)
}

/// `key = value` lines; `#` starts a comment.
fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::precondition(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        let key = k.trim().trim_start_matches("--").to_string();
        if key == "config" {
            continue;
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn execute(cli: Cli) -> Result<()> {
    let manifest = match cli.command {
        Command::Rerun(args) => {
            let mut m = Manifest::load(&args.manifest)?;
            if let Some(out) = cli.global.out {
                m.output = out;
            }
            if cli.global.threads.is_some() {
                m.threads = cli.global.threads;
            }
            m
        }
        command => Manifest {
            tool: "smoothball".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: cli.global.seed,
            format: cli.global.format,
            threads: cli.global.threads,
            output: cli
                .global
                .out
                .unwrap_or_else(|| PathBuf::from(format!("{}.{}", command.name(), cli.global.format.extension()))),
            command,
        },
    };
    run_manifest(&manifest)
}

/// Runs the command of `manifest`, writing the result and the manifest.
pub fn run_manifest(manifest: &Manifest) -> Result<()> {
    let rendered = match manifest.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::precondition(format!("cannot start {n} threads: {e}")))?;
            pool.install(|| render(&manifest.command, manifest.seed))?
        }
        None => render(&manifest.command, manifest.seed)?,
    };
    let bytes = match manifest.format {
        Format::Csv => rendered.csv,
        Format::Json => rendered.json.into_bytes(),
    };
    if let Some(dir) = manifest.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&manifest.output, bytes)?;
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(manifest_path(&manifest.output), text)?;
    Ok(())
}

struct Rendered {
    csv: Vec<u8>,
    json: String,
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn curve_output(curve: &BoundCurve) -> Result<Rendered> {
    let mut csv = Vec::new();
    curve.write_csv(&mut csv)?;
    Ok(Rendered { csv, json: json(curve)? })
}

fn record_output<T: Serialize>(rows: &[T]) -> Result<Rendered> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let csv = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(Rendered { csv, json: json(&rows)? })
}

fn render(command: &Command, seed: u64) -> Result<Rendered> {
    match command {
        Command::Simulate(a) => simulate(a, seed),
        Command::Smallball(a) => small_ball(a, seed),
        Command::L2Exact(a) => l2_exact(a),
        Command::Tsirelson(a) => tsirelson_bounds(a),
        Command::Entropy(a) => entropy(a),
        Command::KlTranslate(a) => kl_translate(a),
        Command::GCertify(a) => g_certify(a),
        Command::Scaling(a) => scaling(a),
        Command::Fit(a) => fit(a),
        Command::Problem5(a) => curve_output(&ratefit::open_problem_curves(a.alpha, &a.r.0)?),
        Command::Rerun(_) => Err(Error::precondition("a manifest cannot name rerun")),
    }
}

#[derive(Serialize)]
struct BatchSummary {
    paths: usize,
    mean_sup: f64,
    mean_l2: f64,
    /// Sample variance of `X(0)`.
    var_at_zero: f64,
}

#[derive(Serialize)]
struct SimulateReport {
    path: pathgen::PathSample,
    sup: f64,
    l2: f64,
    batch: BatchSummary,
}

fn simulate(a: &SimulateArgs, seed: u64) -> Result<Rendered> {
    let source = a.model.source(a.grid.spec()?)?;
    let path = pathgen::sample(source.as_ref(), seed, a.path_index);
    let mut csv = Vec::new();
    pathgen::write_path_csv(&path, &mut csv)?;
    let n = a.paths.max(1);
    let spacing = source.grid().spacing();
    let stats = pathgen::map_paths(source.as_ref(), seed, n, |v| (pathgen::sup_of(v), pathgen::l2_of(v, spacing), v[0] * v[0]));
    let nf = n as f64;
    let batch = BatchSummary {
        paths: n,
        mean_sup: stats.iter().map(|s| s.0).sum::<f64>() / nf,
        mean_l2: stats.iter().map(|s| s.1).sum::<f64>() / nf,
        var_at_zero: stats.iter().map(|s| s.2).sum::<f64>() / nf,
    };
    let report = SimulateReport { sup: pathgen::sup_norm(&path), l2: pathgen::l2_norm(&path), path, batch };
    Ok(Rendered { csv, json: json(&report)? })
}

fn small_ball(a: &SmallballArgs, seed: u64) -> Result<Rendered> {
    let grid = a.grid.spec()?;
    let refined = smallball::estimate_refined(|g| a.model.source(g), grid, a.norm, &a.r.0, a.n, seed, a.refine)?;
    let rows = refined.finest();
    let mut csv = Vec::new();
    smallball::write_estimates_csv(rows, &mut csv)?;
    Ok(Rendered { csv, json: json(&refined)? })
}

#[derive(Serialize)]
struct L2Row {
    r: f64,
    p: f64,
    phi: f64,
    ratio: f64,
}

fn l2_exact(a: &L2ExactArgs) -> Result<Rendered> {
    WeightedChiSquareSpec::periodic(a.nu, a.k)?;
    let rows: Vec<L2Row> = smallball::phi_l2_curve(a.nu, a.k, &a.r.0)?
        .into_iter()
        .map(|p| L2Row { r: p.r, p: (-p.phi).exp(), phi: p.phi, ratio: p.ratio })
        .collect();
    record_output(&rows)
}

fn tsirelson_bounds(a: &TsirelsonArgs) -> Result<Rendered> {
    let rows = a
        .r
        .0
        .iter()
        .map(|&r| match a.l {
            Some(l) => tsirelson::bound_at(&TsirelsonConfig::new(a.nu, a.spectrum, l, a.convention)?, r, a.variant),
            None => tsirelson::bound_opt(a.nu, a.spectrum, r, a.convention, a.variant),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = Vec::new();
    tsirelson::write_bounds_csv(&rows, &mut csv)?;
    Ok(Rendered { csv, json: json(&rows)? })
}

fn entropy_curve(nu: f64, k: usize, radius: f64, eps: &[f64], opts: &EntropyOptions) -> Result<BoundCurve> {
    let ell = CoefficientEllipsoid::with_radius(nu, k, radius)?;
    let brackets = rkhs::entropy_brackets(&ell, eps, opts)?;
    let mut curve = BoundCurve::new(Abscissa::Epsilon);
    for b in brackets {
        let method = format!("{}/{}", b.lower_method, b.upper_method);
        let params = format!("nu={nu};K={k};radius={radius};k0={}", b.frequencies);
        curve.push(b.epsilon, Some(b.h_lower), Some(b.h_upper), &method, &params);
    }
    Ok(curve)
}

fn entropy(a: &EntropyArgs) -> Result<Rendered> {
    match a.method {
        EntropyMethod::Bracket => {
            let opts = EntropyOptions { include_remainder: !a.no_remainder, max_frequencies: a.max_frequencies, ..Default::default() };
            curve_output(&entropy_curve(a.nu, a.k, a.radius, &a.eps.0, &opts)?)
        }
        EntropyMethod::Truncation => {
            let mut curve = BoundCurve::new(Abscissa::Epsilon);
            for &eps in &a.eps.0 {
                let rep = rkhs::truncation_entropy_upper(&TruncationBoundInput {
                    model: SpectralModel::Continuous { nu: a.nu },
                    epsilon: eps,
                    theta: a.theta,
                    c: a.constant,
                })?;
                let params = format!(
                    "nu={};theta={};C={};delta={};v={};I={};I_le_2v={};tail_ok={}",
                    rep.nu, rep.theta, rep.c, rep.delta, rep.v, rep.i_value, rep.i_within_2v, rep.tail_ok
                );
                curve.push(eps, None, Some(rep.h_upper), "truncation", &params);
            }
            curve_output(&curve)
        }
    }
}

const PHI_COLUMNS: [&str; 6] = ["phi", "phi_hat", "phi_lower", "upper", "lower", "h"];

/// Reads `(x, y)` pairs from a CSV with header, skipping rows whose cells are
/// empty or not numbers.
fn read_pairs(path: &Path, x_names: &[&str], y_name: Option<&str>) -> Result<(Vec<(f64, f64)>, csv::StringRecord)> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let xi = x_names
        .iter()
        .find_map(|n| find(n))
        .ok_or_else(|| Error::precondition(format!("{} has no {} column", path.display(), x_names.join("/"))))?;
    let yi = match y_name {
        Some(n) => find(n).ok_or_else(|| Error::precondition(format!("{} has no column '{n}'", path.display())))?,
        None => PHI_COLUMNS
            .iter()
            .find_map(|n| find(n))
            .ok_or_else(|| Error::precondition(format!("{} has none of the columns {}", path.display(), PHI_COLUMNS.join(", "))))?,
    };
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if let (Some(Ok(x)), Some(Ok(y))) = (rec.get(xi).map(str::parse::<f64>), rec.get(yi).map(str::parse::<f64>)) {
            out.push((x, y));
        }
    }
    Ok((out, headers))
}

fn parse_points(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (r, phi) = p.split_once(':').ok_or_else(|| Error::precondition(format!("expected r:phi, got '{p}'")))?;
            let num = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::precondition(format!("'{x}' is not a number")));
            Ok((num(r)?, num(phi)?))
        })
        .collect()
}

fn kl_translate(a: &KlArgs) -> Result<Rendered> {
    let points = match (&a.input, &a.points) {
        (Some(path), _) => read_pairs(path, &["r"], a.phi_column.as_deref())?.0,
        (None, Some(p)) => parse_points(p)?,
        (None, None) => return Err(Error::precondition("kl-translate needs --input or --points")),
    };
    let curve = match a.direction {
        KlDirection::Upper => rkhs::kl_phi_to_h(&points, a.lambda)?,
        KlDirection::Lower => {
            let triples: Vec<(f64, f64, f64)> = points
                .iter()
                .filter_map(|&(r, phi)| {
                    points.iter().find(|&&(r2, _)| (r2 - 2.0 * r).abs() <= 1e-9 * r).map(|&(_, phi2)| (r, phi, phi2))
                })
                .collect();
            if triples.is_empty() {
                return Err(Error::precondition("the lower bound needs φ at both r and 2r"));
            }
            rkhs::kl_h_to_phi(&triples, a.lambda)?
        }
    };
    curve_output(&curve)
}

fn g_certify(a: &GArgs) -> Result<Rendered> {
    let mut spec = GFunctionSpec::new(a.gamma)?;
    spec.max_depth = a.max_depth;
    let cert = rkhs::g_certify(&spec, a.t0, a.t_max, a.step)?;
    record_output(std::slice::from_ref(&cert))
}

fn scaling(a: &ScalingArgs) -> Result<Rendered> {
    let input = match &a.input {
        Some(path) => {
            let (pairs, _) = read_pairs(path, &["epsilon"], Some("upper"))?;
            let mut c = BoundCurve::new(Abscissa::Epsilon);
            for (e, h) in pairs {
                c.push(e, None, Some(h), "input", "");
            }
            c
        }
        None => {
            let eps = a.eps.as_ref().ok_or_else(|| Error::precondition("scaling needs --input or --eps"))?;
            entropy_curve(a.nu, a.k, 1.0, &eps.0, &EntropyOptions::default())?
        }
    };
    curve_output(&rkhs::scaling_patch(&input, a.c)?)
}

fn fit(a: &FitArgs) -> Result<Rendered> {
    let limit = (-std::f64::consts::E).exp();
    let keep = |r: f64, phi: f64| r > 0.0 && r < limit && phi > 0.0 && phi.is_finite();
    let mut reader = csv::Reader::from_path(&a.input)?;
    let headers = reader.headers()?.clone();
    let has = |n: &str| headers.iter().any(|h| h == n);
    let report = if a.phi_column.is_none() && has("phi_hat") && has("phi_lo") && has("phi_hi") {
        let col = |n: &str| headers.iter().position(|h| h == n).unwrap_or(0);
        let idx = [col("r"), col("phi_hat"), col("phi_lo"), col("phi_hi")];
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let v: Vec<f64> = idx.iter().map(|&i| rec.get(i).and_then(|s| s.parse().ok()).unwrap_or(f64::NAN)).collect();
            if keep(v[0], v[1]) {
                rows.push([v[0], v[1], v[2], v[3]]);
            }
        }
        ratefit::fit_interval_points(&rows, a.beta)?
    } else {
        let (pairs, _) = read_pairs(&a.input, &["r"], a.phi_column.as_deref())?;
        let pts: Vec<(f64, f64)> = pairs.into_iter().filter(|&(r, phi)| keep(r, phi)).collect();
        ratefit::fit(&pts, a.beta)?
    };
    record_output(std::slice::from_ref(&report))
}
