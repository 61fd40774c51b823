//! Command-line front end. Every file written is accompanied by a
//! `<file>.manifest.json` holding the resolved parameters.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::flux::{flux_h, flux_h_deriv, ModelParams};
use crate::fvm::{fvm_solve, FvmConfig};
use crate::io::{self, num, ProfileTable};
use crate::riemann::{grid_points, phase_diagram_grid, RiemannProblem, RiemannSolution};
use crate::sim::{self, SimConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

pub const THREADS_ENV: &str = "NCR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ncr", version, about = "Flux, Riemann solutions and simulation for the three-state exclusion process")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate H, H', H'' on [-1, 1].
    Flux(FluxArgs),
    /// Phase label and wave structure of one Riemann problem.
    Classify(ClassifyArgs),
    /// Sample the closed-form entropy solution at time t.
    Solve(SolveArgs),
    /// Label every cell of a grid over (u_-, u_+).
    PhaseDiagram(PhaseDiagramArgs),
    /// Run the stochastic particle system.
    Simulate(SimulateArgs),
    /// L1 / L-infinity distances between two profiles.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ParamArgs {
    #[arg(long, conflicts_with = "c", allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub d: f64,
}

impl ParamArgs {
    fn resolve(&self) -> Result<ModelParams> {
        resolve_params(self.b, self.c, self.d)
    }
}

fn resolve_params(b: Option<f64>, c: Option<f64>, d: f64) -> Result<ModelParams> {
    let p = match (b, c) {
        (Some(b), None) => ModelParams::from_b(b, d)?,
        (None, Some(c)) => ModelParams::from_c(c, d)?,
        _ => return Err(Error::domain("give exactly one of --b and --c")),
    };
    p.require_attractive()?;
    Ok(p)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FluxArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value = "flux.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub ul: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub ur: f64,
    /// Also write the JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub ul: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub ur: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub xmin: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub xmax: f64,
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    #[arg(long, default_value = "solution.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PhaseDiagramArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 201)]
    pub resolution: usize,
    #[arg(long, default_value = "phase_diagram.csv")]
    pub out: PathBuf,
}

/// Every option can also come from `--config`; flags win.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct SimulateArgs {
    /// Flat `key = value` file using the flag names as keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<f64>,
    /// Sites per macroscopic unit.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ul: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ur: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated macroscopic times (default: t-end).
    #[arg(long)]
    pub snapshots: Option<String>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Half-width of the observation window.
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    /// Profile CSV (simulator, solve or fvm output).
    #[arg(long)]
    pub sim: Option<PathBuf>,
    /// Second profile CSV.
    #[arg(long)]
    pub other: Option<PathBuf>,
    /// Closed-form solution; give twice to compare it with itself.
    #[arg(long, action = clap::ArgAction::Count)]
    pub exact: u8,
    /// Godunov solution with this many cells.
    #[arg(long)]
    pub fvm: Option<usize>,
    /// Interpolate the second profile onto the first grid when they differ.
    #[arg(long)]
    pub resample: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ul: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ur: Option<f64>,
    /// Time; defaults to the time stored in the profile.
    #[arg(long)]
    pub t: Option<f64>,
    /// Grid for closed-form/fvm-only comparisons.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub xmin: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub xmax: f64,
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub results: Value,
}

impl RunManifest {
    fn new(subcommand: &str, parameters: impl Serialize) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            parameters: serde_json::to_value(parameters).unwrap_or(Value::Null),
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
            results: Value::Null,
        }
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn write_manifest(primary: &Path, manifest: &RunManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest).map_err(|e| Error::Parse(e.to_string()))?;
    write_file(&manifest_path(primary), &(text + "\n"))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).unwrap_or_default()
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InfluenceConeBreach { .. } => EXIT_GUARD,
        Error::Io(_) => EXIT_IO,
        Error::Domain(_) | Error::NotAttractive { .. } | Error::Parse(_) => EXIT_INVALID,
    }
}

/// Caps the global rayon pool from `NCR_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Parse(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a pool that is already built keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    match execute(&cli.command) {
        Ok(stdout) => {
            if !stdout.is_empty() {
                use std::io::Write;
                // a closed pipe downstream is not our failure
                let _ = writeln!(std::io::stdout().lock(), "{stdout}");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs one command and returns what it prints on stdout.
pub fn execute(cmd: &Command) -> Result<String> {
    match cmd {
        Command::Flux(a) => cmd_flux(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Solve(a) => cmd_solve(a),
        Command::PhaseDiagram(a) => cmd_phase_diagram(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Compare(a) => cmd_compare(a),
    }
}

pub fn cmd_flux(a: &FluxArgs) -> Result<String> {
    let p = a.params.resolve()?;
    if a.samples == 0 {
        return Err(Error::domain("--samples must be at least 1"));
    }
    let mut csv = String::from("v,H,dH,d2H\n");
    for k in 0..=a.samples {
        let v = (-1.0 + 2.0 * k as f64 / a.samples as f64).clamp(-1.0, 1.0);
        csv.push_str(&format!(
            "{},{},{},{}\n",
            num(v),
            num(flux_h(v, &p)),
            num(flux_h_deriv(v, &p, 1)),
            num(flux_h_deriv(v, &p, 2))
        ));
    }
    write_file(&a.out, &csv)?;

    let mut sidecar = json!({ "b": p.b(), "c": p.c(), "d": p.d() });
    if let Ok(g) = p.symmetric_flux() {
        sidecar["convexity_class"] = serde_json::to_value(g.convexity_class()).unwrap_or(Value::Null);
        if let Ok(sp) = g.special_points() {
            sidecar["special_points"] = serde_json::to_value(sp).unwrap_or(Value::Null);
        }
    }
    let mut side_path = a.out.as_os_str().to_owned();
    side_path.push(".json");
    let side_path = PathBuf::from(side_path);
    write_file(&side_path, &(pretty(&sidecar) + "\n"))?;

    let mut m = RunManifest::new("flux", a);
    m.outputs = vec![a.out.display().to_string(), side_path.display().to_string()];
    write_manifest(&a.out, &m)?;
    Ok(pretty(&sidecar))
}

pub fn cmd_classify(a: &ClassifyArgs) -> Result<String> {
    let p = a.params.resolve()?;
    let sol = RiemannSolution::new(RiemannProblem::new(a.ul, a.ur, p)?)?;
    let s = sol.structure();
    let out = json!({ "label": s.label, "waves": s.waves });
    if let Some(path) = &a.out {
        write_file(path, &(pretty(&out) + "\n"))?;
        let mut m = RunManifest::new("classify", a);
        m.outputs = vec![path.display().to_string()];
        write_manifest(path, &m)?;
    }
    Ok(pretty(&out))
}

/// `samples` points spanning `[xmin, xmax]`.
fn linspace(xmin: f64, xmax: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 || !(xmin < xmax) {
        return Err(Error::domain("need xmin < xmax and at least 2 samples"));
    }
    let h = (xmax - xmin) / (samples - 1) as f64;
    Ok((0..samples).map(|k| if k == samples - 1 { xmax } else { xmin + k as f64 * h }).collect())
}

pub fn cmd_solve(a: &SolveArgs) -> Result<String> {
    let p = a.params.resolve()?;
    if !(a.t > 0.0) {
        return Err(Error::domain(format!("--t must be positive, got {}", a.t)));
    }
    let sol = RiemannSolution::new(RiemannProblem::new(a.ul, a.ur, p)?)?;
    let xs = linspace(a.xmin, a.xmax, a.samples)?;
    let us = xs.iter().map(|&x| sol.density(x, a.t)).collect::<Result<Vec<_>>>()?;
    write_file(&a.out, &io::solution_to_csv(&xs, &us))?;
    let mut m = RunManifest::new("solve", a);
    m.outputs = vec![a.out.display().to_string()];
    m.results = json!({ "label": sol.label() });
    write_manifest(&a.out, &m)?;
    Ok(String::new())
}

pub fn cmd_phase_diagram(a: &PhaseDiagramArgs) -> Result<String> {
    let p = a.params.resolve()?;
    let grid = phase_diagram_grid(&p, a.resolution)?;
    let xs = grid_points(a.resolution);
    let mut csv = String::from("u_minus,u_plus,label\n");
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for (i, row) in grid.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            let label = cell.map_or("NONE", |l| l.as_str());
            *counts.entry(label.to_string()).or_default() += 1;
            csv.push_str(&format!("{},{},{label}\n", num(xs[i]), num(xs[j])));
        }
    }
    write_file(&a.out, &csv)?;
    let mut m = RunManifest::new("phase-diagram", a);
    m.outputs = vec![a.out.display().to_string()];
    m.results = json!({ "label_counts": counts });
    write_manifest(&a.out, &m)?;
    Ok(pretty(&json!({ "label_counts": counts })))
}

/// Simulation settings after merging the config file under the flags.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedSimulate {
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: f64,
    pub n: usize,
    pub t_end: f64,
    pub ul: f64,
    pub ur: f64,
    pub margin: f64,
    pub seed: u64,
    pub snapshots: Vec<f64>,
    pub replicas: usize,
    pub bin_width: f64,
    pub window: f64,
    pub out: PathBuf,
}

fn lookup<T: std::str::FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        None => Ok(None),
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("config key {key}: cannot parse {s:?}"))),
    }
}

fn parse_times(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad snapshot time {t:?}"))))
        .collect()
}

pub fn resolve_simulate(a: &SimulateArgs) -> Result<ResolvedSimulate> {
    let file = match &a.config {
        Some(path) => io::parse_key_values(&std::fs::read_to_string(path)?)?,
        None => BTreeMap::new(),
    };
    const KEYS: [&str; 14] = [
        "b", "c", "d", "n", "t-end", "ul", "ur", "margin", "seed", "snapshots", "replicas", "bin-width", "window", "out",
    ];
    if let Some(k) = file.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(Error::Parse(format!("unknown config key {k:?}")));
    }
    let need = |v: Option<f64>, key: &str| v.ok_or_else(|| Error::domain(format!("missing required setting {key}")));
    let mut b = lookup(a.b, &file, "b")?;
    let mut c = lookup(a.c, &file, "c")?;
    // a flag for one parametrisation overrides the other from the file
    if a.b.is_some() {
        c = None;
    } else if a.c.is_some() {
        b = None;
    }
    let snapshots = match &a.snapshots {
        Some(s) => parse_times(s)?,
        None => file.get("snapshots").map(|s| parse_times(s)).transpose()?.unwrap_or_default(),
    };
    Ok(ResolvedSimulate {
        b,
        c,
        d: lookup(a.d, &file, "d")?.unwrap_or(0.0),
        n: lookup(a.n, &file, "n")?.ok_or_else(|| Error::domain("missing required setting n"))?,
        t_end: need(lookup(a.t_end, &file, "t-end")?, "t-end")?,
        ul: need(lookup(a.ul, &file, "ul")?, "ul")?,
        ur: need(lookup(a.ur, &file, "ur")?, "ur")?,
        margin: lookup(a.margin, &file, "margin")?.unwrap_or(0.25),
        seed: lookup(a.seed, &file, "seed")?.unwrap_or(0),
        snapshots,
        replicas: lookup(a.replicas, &file, "replicas")?.unwrap_or(1),
        bin_width: lookup(a.bin_width, &file, "bin-width")?.unwrap_or(0.02),
        window: lookup(a.window, &file, "window")?.unwrap_or(1.0),
        out: lookup(a.out.clone(), &file, "out")?.unwrap_or_else(|| PathBuf::from("profile.csv")),
    })
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<String> {
    let r = resolve_simulate(a)?;
    let p = resolve_params(r.b, r.c, r.d)?;
    let mut cfg = SimConfig::new(p, r.n, r.t_end, r.ul, r.ur);
    cfg.margin = r.margin;
    cfg.seed = r.seed;
    cfg.snapshot_times = r.snapshots.clone();
    cfg.replicas = r.replicas;
    cfg.bin_width = r.bin_width;
    cfg.window = r.window;
    let out = sim::run(&cfg)?;
    let tables: Vec<ProfileTable> = out.profiles.iter().map(ProfileTable::from_empirical).collect();
    write_file(&r.out, &io::profiles_to_csv(&tables))?;

    let mut l1 = Vec::new();
    if p.is_symmetric() && r.ul != r.ur {
        let sol = RiemannSolution::new(RiemannProblem::new(r.ul, r.ur, p)?)?;
        for t in &tables {
            if let Some(time) = t.time.filter(|&s| s > 0.0) {
                let exact = t.x.iter().map(|&x| sol.density(x, time)).collect::<Result<Vec<_>>>()?;
                l1.push(json!({ "time": time, "l1": profile_distance(&t.x, &t.u, &exact).l1 }));
            }
        }
    }
    let currents: Vec<Value> = out
        .currents
        .iter()
        .filter(|c| c.time > 0.0)
        .map(|c| {
            let (mean, se) = c.mean_current(cfg.n);
            json!({ "bond_offset": c.bond_offset, "time": c.time, "mean": mean, "std_error": se })
        })
        .collect();
    let results = json!({
        "total_events": out.total_events(),
        "lattice_sites": out.layout.len,
        "l1_to_closed_form": l1,
        "currents": currents,
    });
    let mut m = RunManifest::new("simulate", &r);
    m.seed = Some(r.seed);
    m.outputs = vec![r.out.display().to_string()];
    m.results = results.clone();
    write_manifest(&r.out, &m)?;
    Ok(pretty(&results))
}

#[derive(Debug, Clone, Serialize)]
pub struct BinDiff {
    pub x: f64,
    pub a: f64,
    pub b: f64,
    pub diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Distance {
    pub l1: f64,
    pub linf: f64,
    pub per_bin: Vec<BinDiff>,
}

/// L1 (weighted by the grid spacing) and L-infinity distances between two
/// profiles on the same uniform grid.
pub fn profile_distance(x: &[f64], a: &[f64], b: &[f64]) -> Distance {
    let h = if x.len() > 1 { (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64 } else { 1.0 };
    let per_bin: Vec<BinDiff> = x
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&x, (&a, &b))| BinDiff { x, a, b, diff: a - b })
        .collect();
    Distance {
        l1: per_bin.iter().map(|d| d.diff.abs()).sum::<f64>() * h,
        linf: per_bin.iter().map(|d| d.diff.abs()).fold(0.0, f64::max),
        per_bin,
    }
}

fn same_grid(x: &[f64], y: &[f64]) -> bool {
    x.len() == y.len() && x.iter().zip(y).all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + a.abs()))
}

/// Piecewise-linear interpolation of `(xs, us)` at `x`, constant beyond the
/// ends. `xs` must be increasing.
pub fn interpolate(xs: &[f64], us: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return us[0];
    }
    if x >= xs[xs.len() - 1] {
        return us[us.len() - 1];
    }
    let k = xs.partition_point(|&v| v <= x).max(1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = (x - x0) / (x1 - x0);
    us[k - 1] * (1.0 - w) + us[k] * w
}

enum Source {
    File(PathBuf),
    Exact,
    Fvm(usize),
}

fn pick_table(tables: Vec<ProfileTable>, t: Option<f64>) -> Result<ProfileTable> {
    match t {
        Some(t) => {
            let n = tables.len();
            tables
                .into_iter()
                .find(|tb| tb.time.map_or(n == 1, |s| (s - t).abs() <= 1e-12 * (1.0 + t.abs())))
                .ok_or_else(|| Error::domain(format!("profile has no snapshot at time {t}")))
        }
        None => tables.into_iter().last().ok_or_else(|| Error::Parse("empty profile".into())),
    }
}

pub fn cmd_compare(a: &CompareArgs) -> Result<String> {
    let mut sources = Vec::new();
    if let Some(p) = &a.sim {
        sources.push(Source::File(p.clone()));
    }
    if let Some(p) = &a.other {
        sources.push(Source::File(p.clone()));
    }
    if let Some(n) = a.fvm {
        sources.push(Source::Fvm(n));
    }
    for _ in 0..a.exact {
        sources.push(Source::Exact);
    }
    if sources.len() != 2 {
        return Err(Error::domain(format!(
            "compare needs exactly two profiles (--sim, --other, --exact, --fvm), got {}",
            sources.len()
        )));
    }
    // load files first: they fix the time and the grid
    let mut tables: Vec<Option<ProfileTable>> = Vec::new();
    for s in &sources {
        tables.push(match s {
            Source::File(p) => Some(pick_table(io::read_profile_csv(p)?, a.t)?),
            _ => None,
        });
    }
    let t = a
        .t
        .or_else(|| tables.iter().flatten().find_map(|tb| tb.time))
        .ok_or_else(|| Error::domain("no time given: pass --t"))?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("comparison time must be positive, got {t}")));
    }
    let needs_problem = sources.iter().any(|s| !matches!(s, Source::File(_)));
    let problem = if needs_problem {
        let p = resolve_params(a.b, a.c, 0.0)?;
        let ul = a.ul.ok_or_else(|| Error::domain("--ul is required for --exact/--fvm"))?;
        let ur = a.ur.ok_or_else(|| Error::domain("--ur is required for --exact/--fvm"))?;
        Some(RiemannProblem::new(ul, ur, p)?)
    } else {
        None
    };
    let file_extent = tables.iter().flatten().flat_map(|tb| [tb.x[0].abs(), tb.x[tb.x.len() - 1].abs()]).fold(0.0, f64::max);
    for (s, slot) in sources.iter().zip(tables.iter_mut()) {
        if let (Source::Fvm(cells), Some(prob)) = (s, &problem) {
            let flux = prob.params.symmetric_flux()?;
            let mut cfg = FvmConfig::new(prob.params, prob.u_minus, prob.u_plus, *cells);
            cfg.t_end = t;
            cfg.half_width = a.xmax.abs().max(a.xmin.abs()).max(file_extent).max(1.1 * flux.max_speed() * t + 1e-9);
            let prof = fvm_solve(&cfg)?;
            *slot = Some(ProfileTable { time: Some(t), x: prof.centers, u: prof.densities, replicas: None });
        }
    }
    // the reference grid: first gridded profile, else the --xmin/--xmax grid
    let grid: Vec<f64> = match tables.iter().flatten().next() {
        Some(tb) => tb.x.clone(),
        None => linspace(a.xmin, a.xmax, a.samples)?,
    };
    let mut values = Vec::new();
    for slot in &tables {
        values.push(match slot {
            Some(tb) if same_grid(&tb.x, &grid) => tb.u.clone(),
            Some(tb) if a.resample => grid.iter().map(|&x| interpolate(&tb.x, &tb.u, x)).collect(),
            Some(_) => {
                return Err(Error::domain("profiles live on different grids; pass --resample"));
            }
            None => {
                let sol = RiemannSolution::new(problem.expect("exact source has a problem"))?;
                grid.iter().map(|&x| sol.density(x, t)).collect::<Result<Vec<_>>>()?
            }
        });
    }
    let dist = profile_distance(&grid, &values[0], &values[1]);
    let out = serde_json::to_value(&dist).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(path) = &a.out {
        write_file(path, &(pretty(&out) + "\n"))?;
        let mut m = RunManifest::new("compare", a);
        m.outputs = vec![path.display().to_string()];
        m.results = json!({ "l1": dist.l1, "linf": dist.linf, "time": t });
        write_manifest(path, &m)?;
    }
    Ok(pretty(&json!({ "l1": dist.l1, "linf": dist.linf, "per_bin": dist.per_bin })))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::domain("x")), EXIT_INVALID);
        assert_eq!(exit_code(&Error::NotAttractive { c: 1.0, limit: 0.5 }), EXIT_INVALID);
        assert_eq!(exit_code(&Error::InfluenceConeBreach { offset: 3, time: 1.0 }), EXIT_GUARD);
    }

    #[test]
    fn params_need_exactly_one() {
        assert!(resolve_params(None, None, 0.0).is_err());
        assert!(resolve_params(Some(0.08), Some(0.01), 0.0).is_err());
        assert!(resolve_params(Some(0.6), None, 0.0).is_err());
        assert!(matches!(resolve_params(None, Some(0.6), 0.0), Err(Error::NotAttractive { .. })));
        assert!((resolve_params(Some(0.08), None, 0.0).unwrap().b() - 0.08).abs() < 1e-15);
    }

    #[test]
    fn interpolation() {
        let xs = [0.0, 1.0, 2.0];
        let us = [0.0, 2.0, 0.0];
        assert_eq!(interpolate(&xs, &us, -1.0), 0.0);
        assert_eq!(interpolate(&xs, &us, 0.5), 1.0);
        assert_eq!(interpolate(&xs, &us, 1.0), 2.0);
        assert_eq!(interpolate(&xs, &us, 1.75), 0.5);
        assert_eq!(interpolate(&xs, &us, 3.0), 0.0);
    }

    #[test]
    fn distance() {
        let d = profile_distance(&[0.0, 0.5, 1.0], &[1.0, 1.0, 1.0], &[1.0, 0.0, 0.5]);
        assert!((d.l1 - 0.75).abs() < 1e-15);
        assert_eq!(d.linf, 1.0);
        assert_eq!(d.per_bin.len(), 3);
    }

    #[test]
    fn config_file_under_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "b = 0.08\nn = 100\nt_end = 0.5\nul = 0.3\nur = 0.3\nseed = 4\nreplicas = 2\n").unwrap();
        let a = SimulateArgs { config: Some(path.clone()), seed: Some(9), c: Some(0.01), ..Default::default() };
        let r = resolve_simulate(&a).unwrap();
        assert_eq!(r.seed, 9);
        assert_eq!(r.n, 100);
        assert_eq!(r.replicas, 2);
        assert_eq!(r.b, None);
        assert_eq!(r.c, Some(0.01));
        std::fs::write(&path, "bogus = 1\n").unwrap();
        assert!(resolve_simulate(&SimulateArgs { config: Some(path), ..Default::default() }).is_err());
    }
}
