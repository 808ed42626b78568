//! Command-line front end. Every command writes its tables plus
//! `summary.json` and `manifest.json` into the output directory.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::chain::{run, run_collect, ChainConfig, ChainState, StartRule, StepRecord};
use crate::diagnostics::{OVERLAP_TV_MAX, 
    self, capsule_experiment, close_pair_radius, estimate_f, mixing_curve, overlap_tv, s_gamma, tv_noise_floor,
    CapsuleConfig, Partition,
};
use crate::error::{Error, Result};
use crate::geometry::witness::{curvature_witness, diameter_witness};
use crate::geometry::{BodySpec, BoundaryPoint, ConvexBody, Point};
use crate::io::{write_table, Cell, Format, Manifest, TableWriter};
use crate::sampler::{DirectionLaw, RngStream};
use crate::spectral2d::{build_transition_matrix, spectral_summary, stationary_distribution};

/// Environment variable holding the default output directory.
pub const OUT_ENV: &str = "BILLIARD_OUT";
const MAX_MATRIX_DUMP: usize = 1024;

#[derive(Debug, Parser, Serialize)]
#[command(name = "billiard", version, about = "Stochastic billiard sampling on convex boundaries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Body specification file (JSON).
    #[arg(long, global = true)]
    pub body: Option<PathBuf>,
    /// Inline body specification (JSON).
    #[arg(long = "body-json", global = true, conflicts_with = "body")]
    pub body_json: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, env = OUT_ENV, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Run chains and write their trajectories.
    Run {
        #[arg(long)]
        steps: u64,
        #[arg(long, default_value_t = 1000)]
        burn_in: u64,
        #[arg(long, default_value_t = 1)]
        thin: u64,
        #[arg(long, default_value = "cosine")]
        law: DirectionLaw,
        /// Independent replicas; replica r uses RNG stream r.
        #[arg(long, default_value_t = 1)]
        replicas: u64,
        /// Start point; points off the boundary are moved radially onto it
        /// (default: first-coordinate maximizer).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        start: Option<Vec<f64>>,
    },
    /// Discretize a planar kernel and analyze its spectrum.
    Spectral {
        #[arg(long, default_value_t = 512)]
        bins: usize,
        #[arg(long, default_value_t = crate::spectral2d::DEFAULT_QUAD_POINTS)]
        quad: usize,
        /// Also write the dense matrix.
        #[arg(long)]
        matrix: bool,
    },
    /// Quantile of the one-step chord length.
    FQuantile {
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = diagnostics::F_LEVEL)]
        level: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Option<Vec<f64>>,
    },
    /// Largest ball radius keeping a gamma share of its volume inside.
    SGamma {
        #[arg(long, value_delimiter = ',', default_value = "0.25")]
        gamma: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        points: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Option<Vec<f64>>,
    },
    /// Partition TV between the one-step laws of two boundary points.
    Overlap {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        u: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        v: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 64)]
        bins: usize,
        /// Samples for the step-length quantiles that set the close-pair radius.
        #[arg(long, default_value_t = 100_000)]
        f_samples: usize,
    },
    /// TV to uniform of fresh-start replicas at checkpoints.
    Mixing {
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,4,8,16,32")]
        checkpoints: Vec<u64>,
        #[arg(long, default_value_t = 64)]
        bins: usize,
        #[arg(long, default_value = "cosine")]
        law: DirectionLaw,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        start: Option<Vec<f64>>,
    },
    /// Increment variance and passage times on capsules of radius 1.
    Capsule {
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 8.0)]
        half_length: f64,
        #[arg(long, default_value_t = 100_000)]
        replicas: usize,
        #[arg(long, default_value_t = 0)]
        tau_replicas: usize,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: u64,
    },
    /// Long-run share of chain states in a coordinate region such as `x3>0.5`.
    Fraction {
        #[arg(long)]
        steps: u64,
        #[arg(long, default_value_t = 1000)]
        burn_in: u64,
        #[arg(long, default_value_t = 1)]
        thin: u64,
        #[arg(long)]
        region: Region,
    },
    /// Print C and D and run the curvature and diameter witnesses.
    Validate {
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long, default_value_t = 8)]
        probes: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Run { .. } => "run",
            Command::Spectral { .. } => "spectral",
            Command::FQuantile { .. } => "f-quantile",
            Command::SGamma { .. } => "s-gamma",
            Command::Overlap { .. } => "overlap",
            Command::Mixing { .. } => "mixing",
            Command::Capsule { .. } => "capsule",
            Command::Fraction { .. } => "fraction",
            Command::Validate { .. } => "validate",
        }
    }
}

/// A half-space in one coordinate, written `x<i><op><value>` with 1-based `i`
/// and `op` one of `>`, `>=`, `<`, `<=`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    pub coord: usize,
    pub op: String,
    pub threshold: f64,
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::input(format!("region {s:?} is not of the form x3>0.5"));
        let rest = s.trim().strip_prefix('x').ok_or_else(bad)?;
        let split = rest.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
        let coord: usize = rest[..split].parse().map_err(|_| bad())?;
        let tail = &rest[split..];
        let op = [">=", "<=", ">", "<"]
            .into_iter()
            .find(|op| tail.starts_with(op))
            .ok_or_else(bad)?;
        let threshold: f64 = tail[op.len()..].trim().parse().map_err(|_| bad())?;
        if coord == 0 {
            return Err(bad());
        }
        Ok(Self {
            coord,
            op: op.to_owned(),
            threshold,
        })
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "x{}{}{}", self.coord, self.op, self.threshold)
    }
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        let v = x[self.coord - 1];
        match self.op.as_str() {
            ">" => v > self.threshold,
            ">=" => v >= self.threshold,
            "<" => v < self.threshold,
            _ => v <= self.threshold,
        }
    }
}

/// Why a command failed; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad command line, unreadable or malformed body: exit 2.
    Usage(String),
    /// Failure while computing: exit 1.
    Runtime(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Input(msg) => Failure::Usage(msg),
            other => Failure::Runtime(other),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "usage error: {msg}"),
            Failure::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status. Diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let argv = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, argv) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("billiard: {f}");
            f.exit_code()
        }
    }
}

/// Collects what a command produced for the manifest.
struct Outputs {
    dir: PathBuf,
    format: Format,
    files: Vec<String>,
    thresholds: BTreeMap<String, f64>,
    streams: String,
}

impl Outputs {
    fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
        let path = write_table(&self.dir, name, header, rows, self.format)?;
        self.record(&path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let path = self.dir.join(format!("{name}.json"));
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text)?;
        self.record(&path);
        Ok(())
    }

    fn record(&mut self, path: &Path) {
        if let Some(name) = path.file_name() {
            self.files.push(name.to_string_lossy().into_owned());
        }
    }
}

fn load_body(common: &Common) -> std::result::Result<ConvexBody, Failure> {
    let text = match (&common.body, &common.body_json) {
        (Some(path), _) => fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read body file {}: {e}", path.display())))?,
        (None, Some(text)) => text.clone(),
        (None, None) => return Err(Failure::Usage("this command needs --body or --body-json".into())),
    };
    let spec = BodySpec::from_json(&text).map_err(|e| Failure::Usage(format!("malformed body: {e}")))?;
    spec.build().map_err(|e| Failure::Usage(format!("invalid body: {e}")))
}

fn point_or_seed(body: &ConvexBody, at: &Option<Vec<f64>>) -> Result<BoundaryPoint> {
    match at {
        Some(x) => at_point(body, x),
        None => Ok(body.seed_point()),
    }
}

fn at_point(body: &ConvexBody, x: &[f64]) -> Result<BoundaryPoint> {
    if x.len() != body.dim() {
        return Err(Error::input(format!("point has {} coordinates, body has dimension {}", x.len(), body.dim())));
    }
    let x = Point::from_column_slice(x);
    if body.level(&x)?.abs() <= crate::geometry::PROJECTION_REACH {
        body.project_to_boundary(&x)
    } else {
        body.boundary_point_toward(&(x - body.interior_point()))
    }
}

fn body_label(spec: &BodySpec) -> String {
    serde_json::to_value(spec)
        .ok()
        .and_then(|v| v.get("type").and_then(Value::as_str).map(String::from))
        .unwrap_or_else(|| "body".into())
}

fn execute(cli: &Cli, argv: Vec<String>) -> std::result::Result<(), Failure> {
    let started = Instant::now();
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let common = &cli.common;
    let needs_body = !matches!(cli.command, Command::Capsule { .. });
    let body = if needs_body { Some(load_body(common)?) } else { None };
    fs::create_dir_all(&common.out).map_err(|e| Failure::Runtime(e.into()))?;
    let mut out = Outputs {
        dir: common.out.clone(),
        format: common.format,
        files: Vec::new(),
        thresholds: BTreeMap::new(),
        streams: String::new(),
    };
    let seed = common.seed;
    match (&cli.command, body.as_ref()) {
        (Command::Capsule { .. }, _) => cmd_capsule(&cli.command, seed, &mut out)?,
        (cmd, Some(body)) => match cmd {
            Command::Run { .. } => cmd_run(cmd, body, seed, &mut out)?,
            Command::Spectral { .. } => cmd_spectral(cmd, body, &mut out)?,
            Command::FQuantile { .. } => cmd_f(cmd, body, seed, &mut out)?,
            Command::SGamma { .. } => cmd_s_gamma(cmd, body, seed, &mut out)?,
            Command::Overlap { .. } => cmd_overlap(cmd, body, seed, &mut out)?,
            Command::Mixing { .. } => cmd_mixing(cmd, body, seed, &mut out)?,
            Command::Fraction { .. } => cmd_fraction(cmd, body, seed, &mut out)?,
            Command::Validate { .. } => cmd_validate(cmd, body, seed, &mut out)?,
            Command::Capsule { .. } => unreachable!(),
        },
        (_, None) => unreachable!("body loaded for every command but capsule"),
    }
    let mut config = serde_json::to_value(cli).map_err(Error::from)?;
    if let Some(body) = &body {
        config["body_spec"] = serde_json::to_value(body.spec()).map_err(Error::from)?;
    }
    let manifest = Manifest {
        command: cli.command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        argv,
        config,
        seed,
        streams: out.streams.clone(),
        thresholds: out.thresholds.clone(),
        files: out.files.clone(),
        started_unix,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    manifest.write(&out.dir)?;
    Ok(())
}

fn cmd_run(cmd: &Command, body: &ConvexBody, seed: u64, out: &mut Outputs) -> Result<()> {
    let Command::Run {
        steps,
        burn_in,
        thin,
        law,
        replicas,
        start,
    } = cmd
    else {
        unreachable!()
    };
    if *replicas == 0 {
        return Err(Error::input("need at least one replica"));
    }
    let start_rule = match start {
        Some(x) => StartRule::At(at_point(body, x)?.position.iter().copied().collect()),
        None => StartRule::SeedPoint,
    };
    let base = ChainConfig::new(body.spec().clone(), *steps, seed)
        .with_burn_in(*burn_in)
        .with_thin(*thin)
        .with_law(*law)
        .with_start(start_rule);
    base.validate()?;
    let results: Vec<(Vec<StepRecord>, ChainState)> = (0..*replicas)
        .into_par_iter()
        .map(|r| run_collect(&base.clone().with_stream(r)))
        .collect::<Result<_>>()?;

    let n = body.dim();
    let mut header = vec!["replica".to_string(), "k".to_string()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    header.extend(["chord", "cos_out", "cos_in"].map(String::from));
    let mut w = TableWriter::create(&out.dir, "trajectory", &header, out.format)?;
    for (r, (records, _)) in results.iter().enumerate() {
        for rec in records {
            let mut row = vec![Cell::from(r), Cell::from(rec.k)];
            row.extend(rec.position.iter().map(|&v| Cell::from(v)));
            row.extend([rec.chord, rec.cos_out, rec.cos_in].map(Cell::from));
            w.row(&row)?;
        }
    }
    let rows = w.rows();
    let path = w.finish()?;
    out.record(&path);
    let states: Vec<&ChainState> = results.iter().map(|(_, s)| s).collect();
    out.json("state", &states)?;
    out.streams = "replica r uses stream r".into();
    println!("wrote {rows} trajectory rows from {replicas} replica(s)");
    Ok(())
}

fn cmd_spectral(cmd: &Command, body: &ConvexBody, out: &mut Outputs) -> Result<()> {
    let Command::Spectral { bins, quad, matrix } = cmd else {
        unreachable!()
    };
    if *matrix && *bins > MAX_MATRIX_DUMP {
        return Err(Error::input(format!("matrix dump limited to {MAX_MATRIX_DUMP} bins")));
    }
    let p = build_transition_matrix(body, *bins, *quad)?;
    let pi = stationary_distribution(&p)?;
    let summary = spectral_summary(&p)?;
    let uniform = 1.0 / *bins as f64;
    let stationary_linf = pi.iter().map(|v| (v - uniform).abs()).fold(0.0, f64::max);

    let eigs: Vec<Vec<Cell>> = summary
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &l)| vec![Cell::from(k), Cell::from(l)])
        .collect();
    out.table("eigs", &["k", "lambda_k"], &eigs)?;
    let sweep: Vec<Vec<Cell>> = summary
        .sweep
        .iter()
        .map(|&(len, phi)| vec![Cell::from(len), Cell::from(phi)])
        .collect();
    out.table("sweep", &["cut_index", "conductance"], &sweep)?;
    if *matrix {
        let mut header = vec!["row".to_string()];
        header.extend((0..*bins).map(|j| format!("p_{j}")));
        let mut w = TableWriter::create(&out.dir, "matrix", &header, out.format)?;
        for i in 0..*bins {
            let mut row = vec![Cell::from(i)];
            row.extend(p.matrix.row(i).iter().map(|&v| Cell::from(v)));
            w.row(&row)?;
        }
        let path = w.finish()?;
        out.record(&path);
    }
    out.json(
        "summary",
        &json!({
            "bins": bins,
            "quad_points": quad,
            "spectral_gap": summary.spectral_gap,
            "cheeger_gap": summary.cheeger_gap,
            "conductance_lower": summary.conductance_lower,
            "conductance_upper": summary.conductance_upper,
            "sweep_conductance": summary.sweep_conductance,
            "stationary_linf": stationary_linf,
            "max_row_sum_error": p.max_row_sum_error(),
            "max_detailed_balance_error": p.max_detailed_balance_error(),
        }),
    )?;
    out.streams = "none (deterministic)".into();
    println!(
        "gap {:.6}  lambda_1 {:.6}  sweep conductance {:.6} in [{:.6}, {:.6}]",
        summary.spectral_gap,
        summary.eigenvalues.get(1).copied().unwrap_or(f64::NAN),
        summary.sweep_conductance,
        summary.conductance_lower,
        summary.conductance_upper
    );
    Ok(())
}

fn cmd_f(cmd: &Command, body: &ConvexBody, seed: u64, out: &mut Outputs) -> Result<()> {
    let Command::FQuantile { samples, level, at } = cmd else {
        unreachable!()
    };
    let x = point_or_seed(body, at)?;
    let f = estimate_f(body, &x, *samples, *level, seed)?;
    let row = vec![
        Cell::from(body_label(body.spec()).as_str()),
        Cell::from(body.dim()),
        Cell::from(f.level),
        Cell::from(f.f),
        Cell::from(f.ci_lo),
        Cell::from(f.ci_hi),
    ];
    out.table("fquant", &["body", "n", "level", "F", "ci_lo", "ci_hi"], &[row])?;
    out.json("summary", &f)?;
    out.streams = format!("samples in chunks of {}, chunk c on stream c", diagnostics::CHUNK);
    println!("F = {:.6} (95% CI [{:.6}, {:.6}])", f.f, f.ci_lo, f.ci_hi);
    Ok(())
}

fn cmd_s_gamma(cmd: &Command, body: &ConvexBody, seed: u64, out: &mut Outputs) -> Result<()> {
    let Command::SGamma { gamma, points, at } = cmd else {
        unreachable!()
    };
    let x = point_or_seed(body, at)?;
    let results = gamma
        .iter()
        .map(|&g| s_gamma(body, &x, g, *points, seed))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<Cell>> = results
        .iter()
        .map(|s| vec![Cell::from(s.gamma), Cell::from(s.t), Cell::from(s.g_t), Cell::from(s.se)])
        .collect();
    out.table("sgamma", &["gamma", "t", "g_t", "se"], &rows)?;
    out.json("summary", &results)?;
    out.streams = format!("ball points in chunks of {}, chunk c on stream c, shared by all gamma", diagnostics::CHUNK);
    for s in &results {
        if s.degenerate {
            eprintln!("billiard: gamma {} ≥ 1/2 has no positive radius at a smooth point; reported t = 0", s.gamma);
        }
        println!("gamma {:.4}: t = {:.6} (g = {:.4} ± {:.4})", s.gamma, s.t, s.g_t, s.se);
    }
    Ok(())
}

fn cmd_overlap(cmd: &Command, body: &ConvexBody, seed: u64, out: &mut Outputs) -> Result<()> {
    let Command::Overlap {
        u,
        v,
        samples,
        bins,
        f_samples,
    } = cmd
    else {
        unreachable!()
    };
    let (pu, pv) = (at_point(body, u)?, at_point(body, v)?);
    let partition = Partition::for_body(body, *bins)?;
    let f_u = estimate_f(body, &pu, *f_samples, diagnostics::F_LEVEL, seed)?.f;
    let f_v = estimate_f(body, &pv, *f_samples, diagnostics::F_LEVEL, seed ^ 1)?.f;
    let radius = close_pair_radius(f_u, f_v, body.dim());
    let distance = (&pu.position - &pv.position).norm();
    let tv = overlap_tv(body, &pu, &pv, *samples, &partition, seed)?;
    let noise = tv_noise_floor(partition.masses(), *samples as u64, *samples as u64);
    let close = distance < radius;
    let row = vec![
        Cell::from(distance),
        Cell::from(radius),
        Cell::from(u64::from(close)),
        Cell::from(tv),
        Cell::from(noise),
    ];
    out.table("overlap", &["distance", "close_radius", "close", "tv", "noise_floor"], &[row])?;
    out.json(
        "summary",
        &json!({
            "f_u": f_u, "f_v": f_v, "distance": distance, "close_radius": radius,
            "close": close, "tv": tv, "noise_floor": noise,
            "within_threshold": tv <= OVERLAP_TV_MAX,
        }),
    )?;
    out.thresholds.insert("overlap_tv_max".into(), OVERLAP_TV_MAX);
    out.streams = format!(
        "steps from u on streams 0.., from v on streams {}.., chunks of {}; F(v) uses seed ^ 1",
        diagnostics::STREAM_SPLIT,
        diagnostics::CHUNK
    );
    println!(
        "tv {tv:.4} (noise floor {noise:.4}); |u − v| = {distance:.3e}, close radius {radius:.3e}{}",
        if close { " (close pair)" } else { "" }
    );
    Ok(())
}

fn cmd_mixing(cmd: &Command, body: &ConvexBody, seed: u64, out: &mut Outputs) -> Result<()> {
    let Command::Mixing {
        replicas,
        checkpoints,
        bins,
        law,
        start,
    } = cmd
    else {
        unreachable!()
    };
    let start_rule = match start {
        Some(x) => StartRule::At(at_point(body, x)?.position.iter().copied().collect()),
        None => StartRule::SeedPoint,
    };
    let config = ChainConfig::new(body.spec().clone(), 0, seed)
        .with_law(*law)
        .with_start(start_rule);
    let partition = Partition::for_body(body, *bins)?;
    let curve = mixing_curve(&config, &partition, *replicas, checkpoints)?;
    let rows: Vec<Vec<Cell>> = (0..curve.ks.len())
        .map(|i| vec![Cell::from(curve.ks[i]), Cell::from(curve.tv[i]), Cell::from(curve.se[i])])
        .collect();
    out.table("mixing", &["k", "tv", "se"], &rows)?;
    out.json(
        "summary",
        &json!({
            "replicas": curve.replicas,
            "bins": partition.bins(),
            "warm_start": curve.warm_start,
            "noise_floor": tv_noise_floor(partition.masses(), *replicas as u64, u64::MAX),
        }),
    )?;
    out.streams = "replica r uses stream r".into();
    for i in 0..curve.ks.len() {
        println!("k {:>6}  tv {:.4} ± {:.4}", curve.ks[i], curve.tv[i], curve.se[i]);
    }
    Ok(())
}

fn cmd_capsule(cmd: &Command, seed: u64, out: &mut Outputs) -> Result<()> {
    let Command::Capsule {
        dims,
        half_length,
        replicas,
        tau_replicas,
        max_steps,
    } = cmd
    else {
        unreachable!()
    };
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &n in dims {
        let config = CapsuleConfig::new(n, *half_length, *replicas, seed).with_passage(*tau_replicas, *max_steps);
        let r = capsule_experiment(&config)?;
        rows.push(vec![
            Cell::from(n),
            Cell::from(r.half_length),
            Cell::from(r.var_z1_hat),
            Cell::from(r.var_z1_quad),
            Cell::from(r.tau_median),
        ]);
        println!(
            "n {n:>4}: var_z1 {:.6e} ± {:.1e} (quadrature {:.6e}), median tau {:?}",
            r.var_z1_hat, r.var_z1_se, r.var_z1_quad, r.tau_median
        );
        reports.push(json!({
            "n": n, "half_length": r.half_length, "replicas": r.replicas,
            "mean_z1": r.mean_z1, "mean_z1_se": r.mean_z1_se,
            "var_z1_hat": r.var_z1_hat, "var_z1_se": r.var_z1_se, "var_z1_quad": r.var_z1_quad,
            "tau_level": r.tau_level, "tau_replicas": r.tau.len(), "tau_censored": r.censored(),
            "tau_median": r.tau_median,
        }));
    }
    out.table("capsule", &["n", "L", "var_z1_hat", "var_z1_quad", "tau_median"], &rows)?;
    out.json("summary", &reports)?;
    out.streams = format!(
        "increments in chunks of {}, chunk c on stream c; passage replica i on stream {} + i; same seed for every n",
        diagnostics::CHUNK,
        diagnostics::STREAM_SPLIT
    );
    Ok(())
}

fn cmd_fraction(cmd: &Command, body: &ConvexBody, seed: u64, out: &mut Outputs) -> Result<()> {
    let Command::Fraction {
        steps,
        burn_in,
        thin,
        region,
    } = cmd
    else {
        unreachable!()
    };
    if region.coord > body.dim() {
        return Err(Error::input(format!("region coordinate {} exceeds dimension {}", region.coord, body.dim())));
    }
    let config = ChainConfig::new(body.spec().clone(), *steps, seed)
        .with_burn_in(*burn_in)
        .with_thin(*thin);
    let mut hits = Vec::with_capacity(config.record_count() as usize);
    let state = run(&config, |rec| {
        hits.push(region.contains(rec.position.as_slice()));
        Ok(())
    })?;
    let est = diagnostics::fraction_from_hits(&hits)?;
    let row = vec![
        Cell::from(region.to_string().as_str()),
        Cell::from(est.fraction),
        Cell::from(est.se),
        Cell::from(est.samples),
    ];
    out.table("fraction", &["region", "fraction", "se", "samples"], &[row])?;
    out.json("summary", &json!({ "estimate": est, "final_state": state }))?;
    out.streams = "single chain on stream 0".into();
    println!("fraction {:.5} ± {:.5} over {} states", est.fraction, est.se, est.samples);
    Ok(())
}

fn cmd_validate(cmd: &Command, body: &ConvexBody, seed: u64, out: &mut Outputs) -> std::result::Result<(), Failure> {
    let Command::Validate { points, probes } = cmd else {
        unreachable!()
    };
    let mut rng = RngStream::new(seed, 0);
    let curvature = curvature_witness(body, *points, *probes, &mut rng)?;
    let diameter = diameter_witness(body, *points, &mut rng)?;
    println!("dimension {}", body.dim());
    println!("C = {}", body.curvature_bound());
    println!("D = {}", body.diameter());
    println!(
        "curvature witness: {} ({} checks, {} failures)",
        if curvature.passed() { "pass" } else { "FAIL" },
        curvature.checks,
        curvature.failures
    );
    println!(
        "diameter witness: {} ({} checks, {} failures, longest chord {:.6})",
        if diameter.passed() { "pass" } else { "FAIL" },
        diameter.checks,
        diameter.failures,
        diameter.worst
    );
    out.json(
        "summary",
        &json!({
            "dimension": body.dim(),
            "curvature_bound": body.curvature_bound(),
            "diameter": body.diameter(),
            "curvature_witness": curvature,
            "diameter_witness": diameter,
        }),
    )?;
    out.streams = "witness points on stream 0".into();
    if curvature.passed() && diameter.passed() {
        Ok(())
    } else {
        Err(Failure::Runtime(Error::Geometry("witness checks failed".into())))
    }
}
