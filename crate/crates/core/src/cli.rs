//! Command-line front end: `setup`, `solve` and `quality` runs on generated
//! grids or ingested matrices.
//!
//! Settings come from flags, then an optional JSON config file, then
//! defaults. Exit codes: 0 success, 1 usage or configuration error, 2 I/O or
//! parse error, 3 numerical failure (including non-convergence).

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::aggregation::{aggregate, AggregationConfig, NeighborOrder, Reach};
use crate::analysis::{hierarchy_report, QualityEvaluator};
use crate::error::Error;
use crate::hierarchy::{setup, SetupConfig};
use crate::reshaping::{reshape_sweep, ReshapeConfig};
use crate::solvers::{npcg_solve, CycleKind, CycleSpec, SmootherSpec};
use crate::sparse::io::{read_graph_file, read_matrix_market_file};
use crate::sparse::{generate_structured_grid, BoundaryCondition, CsrMatrix};
use crate::vecops;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "uaamg", version, about = "Aggregation AMG setup, solve and quality runs")]
pub struct Cli {
    /// Worker threads (falls back to UAAMG_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON file with default settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the hierarchy and print per-level statistics.
    Setup(SetupArgs),
    /// Build the hierarchy and solve with preconditioned flexible CG.
    Solve(SolveArgs),
    /// Coarsening ratio and projection energy norm over grids, caps and seeds.
    Quality(QualityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Grid sizes, comma separated (n x n lattice).
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    #[arg(long)]
    pub bc: Option<BoundaryCondition>,
    /// Edge weights as horizontal:vertical.
    #[arg(long)]
    pub aniso: Option<String>,
    /// Matrix Market (.mtx) or graph text file instead of a grid.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Aggregate size caps, comma separated; `inf` for no cap.
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<String>>,
    /// Reshaping sweeps after each aggregation (0 = off).
    #[arg(long)]
    pub reshape: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n0: Option<usize>,
    #[arg(long)]
    pub max_levels: Option<usize>,
    #[arg(long)]
    pub passes_per_level: Option<usize>,
    /// Aggregate growth: neighbors or distance-two.
    #[arg(long)]
    pub reach: Option<Reach>,
    /// Truncation order under the size cap: index or strength.
    #[arg(long)]
    pub order: Option<NeighborOrder>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SetupArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Write the finest-level aggregation to this file.
    #[arg(long)]
    pub dump_agg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub cycle: Option<CycleKind>,
    /// l1, jacobi or jacobi:<omega>.
    #[arg(long)]
    pub smoother: Option<SmootherSpec>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct QualityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of consecutive seeds to average over.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Report every level pair of the full hierarchy instead of one level.
    #[arg(long)]
    pub levels: bool,
    /// Also estimate the two-level rate |E|_A (fine levels up to 20000 unknowns).
    #[arg(long)]
    pub e_norm: bool,
    /// Smoother for |E|_A and reshaping: l1, jacobi or jacobi:<omega>.
    #[arg(long)]
    pub smoother: Option<SmootherSpec>,
}

/// Settings readable from `--config`. Every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub grid: Option<Vec<usize>>,
    pub bc: Option<BoundaryCondition>,
    pub aniso: Option<String>,
    pub file: Option<PathBuf>,
    pub t: Option<Vec<String>>,
    pub reshape: Option<usize>,
    pub seed: Option<u64>,
    pub seeds: Option<usize>,
    pub n0: Option<usize>,
    pub max_levels: Option<usize>,
    pub passes_per_level: Option<usize>,
    pub reach: Option<Reach>,
    pub order: Option<NeighborOrder>,
    pub cycle: Option<CycleKind>,
    pub smoother: Option<String>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub threads: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Io(_) => EXIT_IO,
            Self::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Io(m) | Self::Numerical(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Parse { .. } => Self::Io(e.to_string()),
            Error::InvalidConfig(_) => Self::Usage(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Serialize)]
enum ProblemSpec {
    Grid { n: usize, bc: BoundaryCondition, aniso: (f64, f64) },
    File { path: PathBuf },
}

impl ProblemSpec {
    fn label(&self) -> String {
        match self {
            Self::Grid { n, .. } => n.to_string(),
            Self::File { path } => path.display().to_string(),
        }
    }

    fn build(&self) -> CliResult<(CsrMatrix, bool)> {
        match self {
            Self::Grid { n, bc, aniso } => {
                let g = generate_structured_grid(*n, *bc, *aniso)?;
                Ok((g.assemble_laplacian(), g.singular()))
            }
            Self::File { path } => {
                let a = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mtx")) {
                    read_matrix_market_file(path)?
                } else {
                    read_graph_file(path)?.assemble_laplacian()
                };
                if !a.is_square() || !a.is_symmetric(1e-12) {
                    return Err(CliError::Numerical(format!("{} is not a symmetric matrix", path.display())));
                }
                let singular = a.annihilates_constants(1e-12);
                Ok((a, singular))
            }
        }
    }
}

/// Settings after merging flags, config file and defaults.
#[derive(Debug, Clone)]
struct Resolved {
    problems: Vec<ProblemSpec>,
    caps: Vec<Option<usize>>,
    setup: SetupConfig,
    out: Option<PathBuf>,
    format: Format,
}

fn parse_cap(s: &str) -> CliResult<Option<usize>> {
    match s.trim() {
        "inf" | "none" | "unlimited" => Ok(None),
        v => match v.parse::<usize>() {
            Ok(0) | Err(_) => Err(CliError::Usage(format!("bad size cap '{v}'"))),
            Ok(t) => Ok(Some(t)),
        },
    }
}

fn parse_aniso(s: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::Usage(format!("bad anisotropy '{s}', expected wh:wv"));
    let (h, v) = s.split_once(':').ok_or_else(bad)?;
    let h: f64 = h.parse().map_err(|_| bad())?;
    let v: f64 = v.parse().map_err(|_| bad())?;
    if !(h > 0.0 && v > 0.0) {
        return Err(bad());
    }
    Ok((h, v))
}

fn resolve(c: &CommonArgs, f: &FileConfig, default_format: Format) -> CliResult<Resolved> {
    let file = c.file.clone().or_else(|| f.file.clone());
    let problems = if let Some(path) = file {
        vec![ProblemSpec::File { path }]
    } else {
        let grids = c
            .grid
            .clone()
            .or_else(|| f.grid.clone())
            .ok_or_else(|| CliError::Usage("either --grid or --file is required".into()))?;
        let bc = c.bc.or(f.bc).unwrap_or(BoundaryCondition::Dirichlet);
        let aniso = match c.aniso.as_ref().or(f.aniso.as_ref()) {
            Some(s) => parse_aniso(s)?,
            None => (1.0, 1.0),
        };
        for &n in &grids {
            if n < 2 {
                return Err(CliError::Usage(format!("grid size must be at least 2, got {n}")));
            }
        }
        grids.into_iter().map(|n| ProblemSpec::Grid { n, bc, aniso }).collect()
    };
    let caps = match c.t.as_ref().or(f.t.as_ref()) {
        Some(list) => list.iter().map(|s| parse_cap(s)).collect::<CliResult<Vec<_>>>()?,
        None => vec![Some(5)],
    };
    let defaults = SetupConfig::default();
    let aggregation = AggregationConfig {
        size_cap: caps[0],
        seed: c.seed.or(f.seed).unwrap_or(0),
        passes_per_level: c.passes_per_level.or(f.passes_per_level).unwrap_or(1),
        reach: c.reach.or(f.reach).unwrap_or(Reach::Neighbors),
        neighbor_order: c.order.or(f.order).unwrap_or(NeighborOrder::Index),
        ..AggregationConfig::default()
    };
    let setup = SetupConfig {
        n0: c.n0.or(f.n0).unwrap_or(defaults.n0),
        max_levels: c.max_levels.or(f.max_levels).unwrap_or(defaults.max_levels),
        aggregation,
        reshape: ReshapeConfig::sweeps(c.reshape.or(f.reshape).unwrap_or(0)),
    };
    setup.validate()?;
    Ok(Resolved {
        problems,
        caps,
        setup,
        out: c.out.clone().or_else(|| f.out.clone()),
        format: c.format.or(f.format).unwrap_or(default_format),
    })
}

fn with_cap(cfg: &SetupConfig, cap: Option<usize>) -> SetupConfig {
    let mut cfg = cfg.clone();
    cfg.aggregation.size_cap = cap;
    cfg
}

fn cap_label(cap: Option<usize>) -> String {
    cap.map(|t| t.to_string()).unwrap_or_else(|| "inf".into())
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            let mut f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            f.write_all(text.as_bytes())?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable output") + "\n"
}

fn cmd_setup(args: &SetupArgs, f: &FileConfig, stdout: &mut dyn Write) -> CliResult<i32> {
    let r = resolve(&args.common, f, Format::Json)?;
    let mut records = Vec::new();
    let mut csv = String::from("problem,t,level,n,nnz,ratio,max_aggregate\n");
    for p in &r.problems {
        let (a, _) = p.build()?;
        for &cap in &r.caps {
            let cfg = with_cap(&r.setup, cap);
            let start = Instant::now();
            let h = setup(&a, &cfg)?;
            let seconds = start.elapsed().as_secs_f64();
            if let (Some(path), Some(agg)) = (&args.dump_agg, h.aggregation(0)) {
                agg.write(File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?)?;
            }
            let summary = h.summary();
            for lev in &summary.levels {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    p.label(),
                    cap_label(cap),
                    lev.level,
                    lev.n,
                    lev.nnz,
                    lev.coarsening_ratio.map(|x| format!("{x:.6}")).unwrap_or_default(),
                    lev.max_aggregate.map(|x| x.to_string()).unwrap_or_default()
                ));
            }
            records.push(json!({
                "problem": p,
                "t": cap,
                "seed": cfg.aggregation.seed,
                "hierarchy": summary,
                "timings": { "setup_seconds": seconds },
            }));
        }
    }
    let text = match r.format {
        Format::Json => to_json(&records),
        Format::Csv => csv,
    };
    emit(&r.out, stdout, &text)?;
    Ok(EXIT_OK)
}

/// Deterministic right-hand side, mean-free for singular systems.
fn rhs(n: usize, seed: u64, singular: bool) -> Vec<f64> {
    let mut b: Vec<f64> = (0..n).map(|i| crate::aggregation::unit_random(seed ^ 0xb0b, 0, i) * 2.0 - 1.0).collect();
    if singular {
        vecops::remove_mean(&mut b);
    }
    b
}

fn cmd_solve(args: &SolveArgs, f: &FileConfig, stdout: &mut dyn Write) -> CliResult<i32> {
    let r = resolve(&args.common, f, Format::Json)?;
    let spec = CycleSpec { kind: args.cycle.or(f.cycle).unwrap_or(CycleKind::K), ..CycleSpec::default() };
    let smoother = match (&args.smoother, &f.smoother) {
        (Some(s), _) => *s,
        (None, Some(s)) => s.parse().map_err(CliError::Usage)?,
        (None, None) => SmootherSpec::l1(1),
    };
    let tol = args.tol.or(f.tol).unwrap_or(1e-6);
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("tolerance must be positive, got {tol}")));
    }
    let max_iters = args.max_iters.or(f.max_iters).unwrap_or(200);
    let mut records = Vec::new();
    let mut csv = String::from("problem,t,iterations,converged,final_residual,setup_seconds,solve_seconds\n");
    let mut all_converged = true;
    for p in &r.problems {
        let (a, singular) = p.build()?;
        for &cap in &r.caps {
            let cfg = with_cap(&r.setup, cap);
            let start = Instant::now();
            let h = setup(&a, &cfg)?;
            let setup_seconds = start.elapsed().as_secs_f64();
            let b = rhs(a.n_rows(), cfg.aggregation.seed, singular);
            let (_, mut report) = npcg_solve(&h, &spec, &smoother, &b, tol, max_iters)?;
            report.timings.setup_seconds = Some(setup_seconds);
            all_converged &= report.converged;
            csv.push_str(&format!(
                "{},{},{},{},{:.6e},{:.6},{:.6}\n",
                p.label(),
                cap_label(cap),
                report.iterations,
                report.converged,
                report.final_residual(),
                setup_seconds,
                report.timings.solve_seconds
            ));
            records.push(json!({
                "problem": p,
                "t": cap,
                "cycle": spec,
                "smoother": smoother.to_string(),
                "tol": tol,
                "levels": h.n_levels(),
                "report": report,
            }));
        }
    }
    let text = match r.format {
        Format::Json => to_json(&records),
        Format::Csv => csv,
    };
    emit(&r.out, stdout, &text)?;
    Ok(if all_converged { EXIT_OK } else { EXIT_NUMERICAL })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

const E_NORM_LIMIT: usize = 20_000;

fn cmd_quality(args: &QualityArgs, f: &FileConfig, stdout: &mut dyn Write) -> CliResult<i32> {
    let r = resolve(&args.common, f, Format::Csv)?;
    let seeds = args.seeds.or(f.seeds).unwrap_or(1).max(1);
    let smoother = match (&args.smoother, &f.smoother) {
        (Some(s), _) => *s,
        (None, Some(s)) => s.parse().map_err(CliError::Usage)?,
        (None, None) => SmootherSpec::l1(1),
    };
    let base_seed = r.setup.aggregation.seed;
    let mut records = Vec::new();
    let mut csv = if args.levels {
        String::from("problem,t,seed,fine,coarse,ratio,q_energy_sq,e_norm\n")
    } else {
        String::from("problem,t,seeds,ratio_mean,ratio_std,q_energy_sq_mean,q_energy_sq_std,e_norm_mean,e_norm_std\n")
    };
    for p in &r.problems {
        let (a, singular) = p.build()?;
        let mut ev = QualityEvaluator::new(&a, singular)?;
        for &cap in &r.caps {
            let mut ratios = Vec::new();
            let mut qs = Vec::new();
            let mut es = Vec::new();
            for s in 0..seeds as u64 {
                let mut cfg = with_cap(&r.setup, cap);
                cfg.aggregation.seed = base_seed.wrapping_add(s);
                cfg.reshape.smoother = smoother;
                if args.levels {
                    let h = setup(&a, &cfg)?;
                    let e_smoother = args.e_norm.then_some(&smoother);
                    let rows = hierarchy_report(&h, e_smoother, E_NORM_LIMIT)?;
                    for row in &rows {
                        csv.push_str(&format!(
                            "{},{},{},{},{},{:.6},{:.6},{}\n",
                            p.label(),
                            cap_label(cap),
                            cfg.aggregation.seed,
                            row.fine_level,
                            row.coarse_level,
                            row.coarsening_ratio,
                            row.q_energy_sq,
                            row.e_norm.map(|e| format!("{e:.6}")).unwrap_or_default()
                        ));
                    }
                    records.push(json!({ "problem": p, "t": cap, "seed": cfg.aggregation.seed, "rows": rows }));
                    continue;
                }
                let mut agg = aggregate(&a, &cfg.aggregation)?;
                if cfg.reshape.sweeps > 0 {
                    agg = reshape_sweep(&a, &agg, &cfg.reshape)?;
                }
                ratios.push(agg.coarsening_ratio());
                qs.push(ev.q_energy_sq(&agg)?);
                if args.e_norm && a.n_rows() <= E_NORM_LIMIT {
                    es.push(ev.two_level_rate(&agg, &smoother)?);
                }
            }
            if args.levels {
                continue;
            }
            let (rm, rs) = mean_std(&ratios);
            let (qm, qsd) = mean_std(&qs);
            let e = (!es.is_empty()).then(|| mean_std(&es));
            let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
            csv.push_str(&format!(
                "{},{},{},{:.6},{:.6},{:.6},{:.6},{},{}\n",
                p.label(),
                cap_label(cap),
                seeds,
                rm,
                rs,
                qm,
                qsd,
                fmt_opt(e.map(|e| e.0)),
                fmt_opt(e.map(|e| e.1))
            ));
            records.push(json!({
                "problem": p,
                "t": cap,
                "seeds": seeds,
                "ratio": { "mean": rm, "std": rs },
                "q_energy_sq": { "mean": qm, "std": qsd },
                "e_norm": e.map(|e| json!({ "mean": e.0, "std": e.1 })),
            }));
        }
    }
    let text = match r.format {
        Format::Json => to_json(&records),
        Format::Csv => csv,
    };
    emit(&r.out, stdout, &text)?;
    Ok(EXIT_OK)
}

fn load_config(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn thread_count(flag: Option<usize>, file: Option<usize>) -> CliResult<Option<usize>> {
    if let Some(t) = flag.or(file) {
        return Ok(Some(t));
    }
    match std::env::var("UAAMG_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("UAAMG_THREADS='{v}' is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> CliResult<i32> {
    let file = load_config(cli.config.as_deref())?;
    let threads = thread_count(cli.threads, file.threads)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let mut buf: Vec<u8> = Vec::new();
    let code = pool.install(|| match &cli.command {
        Command::Setup(a) => cmd_setup(a, &file, &mut buf),
        Command::Solve(a) => cmd_solve(a, &file, &mut buf),
        Command::Quality(a) => cmd_quality(a, &file, &mut buf),
    })?;
    stdout.write_all(&buf)?;
    Ok(code)
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `stdout` (unless `--out` is given) and diagnostics
/// to `stderr`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{}", e.render()) } else { write!(stdout, "{}", e.render()) };
            return code;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("uaamg").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn cap_parsing() {
        assert_eq!(parse_cap("5").unwrap(), Some(5));
        assert_eq!(parse_cap("inf").unwrap(), None);
        assert!(parse_cap("0").is_err());
    }

    #[test]
    fn aniso_parsing() {
        assert_eq!(parse_aniso("1:10").unwrap(), (1.0, 10.0));
        assert!(parse_aniso("1").is_err());
        assert!(parse_aniso("1:-2").is_err());
    }

    #[test]
    fn setup_small_neumann_grid() {
        let (code, out, _) = run_capture(&["setup", "--grid", "2", "--bc", "neumann", "--t", "2"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let levels = v[0]["hierarchy"]["levels"].as_array().unwrap().len();
        assert!((1..=2).contains(&levels));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_capture(&["setup"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["setup", "--grid", "1"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["solve", "--grid", "8", "--smoother", "gs"]).0, EXIT_USAGE);
    }

    #[test]
    fn missing_file_exits_two() {
        let (code, _, err) = run_capture(&["setup", "--file", "/nonexistent/x.mtx"]);
        assert_eq!(code, EXIT_IO);
        assert!(err.contains("error"));
    }

    #[test]
    fn solve_tolerance_one_takes_no_iterations() {
        let (code, out, _) = run_capture(&["solve", "--grid", "16", "--tol", "1"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v[0]["report"]["iterations"], 0);
    }

    #[test]
    fn non_convergence_exits_three() {
        let (code, out, _) = run_capture(&["solve", "--grid", "32", "--tol", "1e-12", "--max-iters", "1"]);
        assert_eq!(code, EXIT_NUMERICAL);
        assert!(out.contains("\"converged\": false"));
    }

    #[test]
    fn quality_degenerate_cap() {
        let (code, out, _) = run_capture(&["quality", "--grid", "4", "--t", "99"]);
        assert_eq!(code, 0);
        let line = out.lines().nth(1).unwrap();
        assert!(line.starts_with("4,99,1,"));
    }
}
