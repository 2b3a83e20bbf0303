//! The `bamp` command-line interface.
//!
//! Exit codes: 0 on success, 1 on runtime errors, 2 on usage errors
//! (bad flags, missing or malformed configuration).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytics::{correlation_bounds, joint_missingness_prob, pairwise_correlation};
use crate::copula::{Copula, CopulaSpec};
use crate::dataset::CompleteDataset;
use crate::engine::{
    ampute_cell_sets, ampute_monotone_mixture, ampute_rows_iid, ampute_rows_independent,
    Amputation, MonotoneMixtureSpec,
};
use crate::error::Error;
use crate::imputation::study::{standard_mechanisms, BiasStudyReport};
use crate::imputation::{pmm_impute, run_bias_study, BiasStudyConfig, Estimator, PmmOptions};
use crate::io::config::{require, AmputationConfig, DataSource, Mode, Probabilities, SCHEMA_VERSION};
use crate::io::{self, Palette};
use crate::model::implied_coefficients;
use crate::scenario::scenario_ampute;
use crate::{mtcars, rng};

#[derive(Debug, Parser)]
#[command(name = "bamp", version, about = "Copula-driven Bernoulli amputation of tabular data")]
pub struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ampute a dataset as described by a configuration file.
    Ampute(RunArgs),
    /// Scenario-based amputation from the `[scenario]` section of a config.
    Scenario(RunArgs),
    /// Monotone-missingness mixture, from a config or from flags.
    Monotone(MonotoneArgs),
    /// Joint missingness probabilities, correlations and bounds.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Logistic coefficients implied by a probability range.
    Coeffs(CoeffsArgs),
    /// Repeated amputation bias study on a dataset.
    Simulate(SimulateArgs),
    /// Multiple imputation by chained equations with predictive mean matching.
    Impute(ImputeArgs),
    /// Render a matrix with values in [0, 1] (NA allowed) as PPM or SVG.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed in the config; one of the two is required.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MonotoneArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV path or bundled dataset name (`mtcars`, `mtcars01`).
    #[arg(long, default_value = "mtcars01")]
    pub data: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub miss_row_prob: f64,
    /// Homogeneous Gauss parameter of the row dependence (0 = independent rows).
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 1)]
    pub replications: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Family {
    Independence,
    Comonotone,
    Countermonotone,
    Gauss,
    HomogeneousGauss,
}

#[derive(Debug, Args)]
pub struct CopulaArgs {
    #[arg(long, value_enum, required_unless_present = "copula_config")]
    pub copula: Option<Family>,
    /// TOML file with a `[copula]` table, instead of `--copula`.
    #[arg(long, conflicts_with = "copula")]
    pub copula_config: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Correlation parameter for the Gauss families.
    #[arg(long)]
    pub rho: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// P(all selected cells missing).
    Joint {
        #[command(flatten)]
        copula: CopulaArgs,
        /// Marginal probabilities, comma separated; one value is broadcast.
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        /// Monte-Carlo fallback sample size when no exact evaluation exists.
        #[arg(long)]
        mc_samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Correlation of two missingness indicators, with its bounds.
    Corr {
        #[command(flatten)]
        copula: CopulaArgs,
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
    },
    /// Attainable correlation range of two indicators.
    Bounds {
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
    },
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub cmin: f64,
    #[arg(long)]
    pub cmax: f64,
    /// Number of covariates.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EstimatorArg {
    CompleteCase,
    PmmMice,
    Both,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "mtcars01")]
    pub data: String,
    /// Column whose mean is estimated.
    #[arg(long, default_value = "qsec")]
    pub target: String,
    #[arg(long, default_value_t = 200)]
    pub replications: usize,
    #[arg(long, value_enum, default_value = "both")]
    pub estimator: EstimatorArg,
    /// Homogeneous Gauss parameter joining the columns.
    #[arg(long, default_value_t = 0.7181)]
    pub rho: f64,
    #[arg(long, default_value_t = 5)]
    pub imputations: usize,
    #[arg(long, default_value_t = 5)]
    pub iterations: usize,
    #[arg(long, default_value_t = 5)]
    pub donors: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImputeArgs {
    /// CSV with `NA` cells.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub imputations: usize,
    #[arg(long, default_value_t = 5)]
    pub iterations: usize,
    #[arg(long, default_value_t = 5)]
    pub donors: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// CSV path (may contain `NA`) or bundled dataset name.
    #[arg(long)]
    pub input: String,
    /// Output file ending in .ppm or .svg.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub cell_size: usize,
    #[arg(long)]
    pub low: Option<String>,
    #[arg(long)]
    pub high: Option<String>,
    #[arg(long)]
    pub missing: Option<String>,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => CliError::Usage(format!("config: {msg}")),
            other => CliError::Runtime(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parse `args`, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let stdout = std::io::stdout();
    match run(cli.command, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run<W: Write>(command: Command, out: &mut W) -> CliResult<()> {
    match command {
        Command::Ampute(a) => run_config_command(&a, None, out),
        Command::Scenario(a) => run_config_command(&a, Some(Mode::Scenario), out),
        Command::Monotone(a) => monotone(&a, out),
        Command::Analyze(a) => analyze(a, out),
        Command::Coeffs(a) => coeffs(&a, out),
        Command::Simulate(a) => simulate(&a, out),
        Command::Impute(a) => impute(&a, out),
        Command::Render(a) => render(&a, out),
    }
}

fn run_config_command<W: Write>(args: &RunArgs, force: Option<Mode>, out: &mut W) -> CliResult<()> {
    let mut cfg = AmputationConfig::load(&args.config).map_err(|e| match e {
        Error::Io(io) => usage(format!("cannot read {}: {io}", args.config.display())),
        other => other.into(),
    })?;
    if let Some(mode) = force {
        cfg.mode = mode;
    }
    let base = args.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    execute(&cfg, &base, args.seed, args.out.as_deref(), out)
}

fn monotone<W: Write>(args: &MonotoneArgs, out: &mut W) -> CliResult<()> {
    if let Some(path) = &args.config {
        let run = RunArgs {
            config: path.clone(),
            seed: args.seed,
            out: args.out.clone(),
        };
        return run_config_command(&run, Some(Mode::Monotone), out);
    }
    let data = data_source(&args.data);
    let cwd = PathBuf::from(".");
    let n = load_source(&data, &cwd)?.nrows();
    let row_dependence = if args.rho == 0.0 {
        CopulaSpec::independence(n)
    } else {
        CopulaSpec::homogeneous_gauss(args.rho, n)
    };
    let cfg = AmputationConfig {
        schema_version: SCHEMA_VERSION,
        mode: Mode::Monotone,
        seed: None,
        replications: args.replications,
        data,
        copula: None,
        row_copulas: None,
        probabilities: None,
        cell_sets: None,
        monotone: Some(MonotoneMixtureSpec {
            miss_row_prob: args.miss_row_prob,
            alpha: args.alpha,
            beta: args.beta,
            row_dependence,
        }),
        scenario: None,
        output: Default::default(),
    };
    execute(&cfg, &cwd, args.seed, args.out.as_deref(), out)
}

fn data_source(name: &str) -> DataSource {
    if mtcars::builtin(name).is_some() {
        DataSource {
            builtin: Some(name.to_string()),
            ..Default::default()
        }
    } else {
        DataSource {
            path: Some(PathBuf::from(name)),
            ..Default::default()
        }
    }
}

fn load_source(data: &DataSource, base: &Path) -> CliResult<CompleteDataset> {
    let probe = AmputationConfig {
        schema_version: SCHEMA_VERSION,
        mode: Mode::RowsIid,
        seed: None,
        replications: 1,
        data: data.clone(),
        copula: None,
        row_copulas: None,
        probabilities: None,
        cell_sets: None,
        monotone: None,
        scenario: None,
        output: Default::default(),
    };
    Ok(probe.dataset(base)?)
}

/// File name for replication `r` of `stem`.
fn artifact(stem: &str, r: usize, total: usize) -> String {
    if total == 1 {
        format!("{stem}.csv")
    } else {
        format!("{stem}_{:04}.csv", r + 1)
    }
}

/// Run one configuration and write its artifacts.
pub fn execute<W: Write>(
    cfg: &AmputationConfig,
    base: &Path,
    seed_flag: Option<u64>,
    out_flag: Option<&Path>,
    out: &mut W,
) -> CliResult<()> {
    let seed = seed_flag
        .or(cfg.seed)
        .ok_or_else(|| usage("a seed is required: pass --seed or set `seed` in the config"))?;
    let out_dir = out_flag
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let y = cfg.dataset(base)?;
    fs::create_dir_all(&out_dir)?;

    let mode = cfg.mode;
    let reps = cfg.replications;
    let mut total_missing = 0usize;
    for r in 0..reps {
        let rep_seed = if reps == 1 { seed } else { rng::derive(seed, &[r as u64]) };
        let (amp, extra) = amputate_once(cfg, &y, rep_seed)?;
        total_missing += amp.mask.count_missing();
        io::save_mask(&out_dir.join(artifact("mask", r, reps)), y.names(), &amp.mask)?;
        io::save_amputed(&out_dir.join(artifact("amputed", r, reps)), &amp.amputed)?;
        match extra {
            Extra::None => {}
            Extra::Probabilities(p) => {
                io::save_matrix(&out_dir.join(artifact("probabilities", r, reps)), y.names(), &p)?
            }
            Extra::Assignment(a) => io::save_assignment(&out_dir.join(artifact("assignment", r, reps)), &a)?,
        }
    }
    let resolved = cfg.resolved(base, seed, &out_dir);
    fs::write(out_dir.join("resolved.toml"), resolved.to_toml_string()?)?;
    if let (Mode::Scenario, Some(spec)) = (mode, &cfg.scenario) {
        for w in spec.warnings() {
            eprintln!("warning: {w}");
        }
    }
    let cells = (y.nrows() * y.ncols() * reps).max(1);
    writeln!(out, "mode\t{}", mode.name())?;
    writeln!(out, "replications\t{reps}")?;
    writeln!(out, "missing_fraction\t{:.6}", total_missing as f64 / cells as f64)?;
    writeln!(out, "output\t{}", out_dir.display())?;
    Ok(())
}

enum Extra {
    None,
    Probabilities(nalgebra::DMatrix<f64>),
    Assignment(Vec<usize>),
}

fn amputate_once(cfg: &AmputationConfig, y: &CompleteDataset, seed: u64) -> CliResult<(Amputation, Extra)> {
    let mode = cfg.mode;
    Ok(match mode {
        Mode::RowsIid | Mode::Mechanism => {
            let copula = Copula::new(require(&cfg.copula, "copula", mode)?.clone())?;
            let probs = require(&cfg.probabilities, "probabilities", mode)?;
            if mode == Mode::Mechanism && !matches!(probs, Probabilities::Model { .. }) {
                return Err(usage("mode mechanism needs `probabilities.kind = \"model\"`"));
            }
            let p = probs.resolve(y)?;
            let amp = ampute_rows_iid(y, &p, &copula, seed)?;
            let extra = if mode == Mode::Mechanism {
                Extra::Probabilities(p.values().clone())
            } else {
                Extra::None
            };
            (amp, extra)
        }
        Mode::RowsIndependent => {
            let specs = require(&cfg.row_copulas, "row_copulas", mode)?;
            let copulas = specs
                .iter()
                .map(|s| Copula::new(s.clone()))
                .collect::<crate::Result<Vec<_>>>()?;
            let p = require(&cfg.probabilities, "probabilities", mode)?.resolve(y)?;
            (ampute_rows_independent(y, &p, &copulas, seed)?, Extra::None)
        }
        Mode::CellSets => (
            ampute_cell_sets(y, require(&cfg.cell_sets, "cell_sets", mode)?, seed)?,
            Extra::None,
        ),
        Mode::Monotone => (
            ampute_monotone_mixture(y, require(&cfg.monotone, "monotone", mode)?, seed)?,
            Extra::None,
        ),
        Mode::Scenario => {
            let s = scenario_ampute(y, require(&cfg.scenario, "scenario", mode)?, seed)?;
            (s.amputation, Extra::Assignment(s.assignment))
        }
    })
}

fn copula_from_args(args: &CopulaArgs, default_dim: usize) -> CliResult<Copula> {
    let spec = if let Some(path) = &args.copula_config {
        #[derive(serde::Deserialize)]
        struct File {
            copula: CopulaSpec,
        }
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str::<File>(&text)
            .map_err(|e| usage(format!("{}: {e}", path.display())))?
            .copula
    } else {
        let dim = args.dim.unwrap_or(default_dim);
        let rho = || args.rho.ok_or_else(|| usage("--rho is required for Gauss copulas"));
        match args.copula.expect("clap requires --copula or --copula-config") {
            Family::Independence => CopulaSpec::independence(dim),
            Family::Comonotone => CopulaSpec::comonotone(dim),
            Family::Countermonotone => CopulaSpec::Countermonotone { dim },
            Family::HomogeneousGauss => CopulaSpec::homogeneous_gauss(rho()?, dim),
            Family::Gauss => {
                let r = rho()?;
                CopulaSpec::gauss(
                    (0..dim)
                        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { r }).collect())
                        .collect(),
                )
            }
        }
    };
    Ok(Copula::new(spec)?)
}

fn analyze<W: Write>(cmd: AnalyzeCommand, out: &mut W) -> CliResult<()> {
    match cmd {
        AnalyzeCommand::Joint {
            copula,
            p,
            mc_samples,
            seed,
        } => {
            let c = copula_from_args(&copula, p.len().max(1))?;
            let p = if p.len() == 1 { vec![p[0]; c.dim()] } else { p };
            if p.len() != c.dim() {
                return Err(usage(format!("{} probabilities for a {}-dimensional copula", p.len(), c.dim())));
            }
            match joint_missingness_prob(&c, &p) {
                Ok(v) => {
                    writeln!(out, "quantity\tvalue")?;
                    writeln!(out, "joint_missingness_prob\t{v:.6e}")?;
                    writeln!(out, "method\texact")?;
                }
                Err(Error::UseMonteCarlo(msg)) => {
                    let (Some(n), Some(seed)) = (mc_samples, seed) else {
                        return Err(CliError::Runtime(Error::UseMonteCarlo(format!(
                            "{msg}; rerun with --mc-samples and --seed"
                        ))));
                    };
                    let survival = Copula::new(CopulaSpec::survival(c.spec().clone()))?;
                    let est = survival.mc_cdf(&p, n, seed)?;
                    writeln!(out, "quantity\tvalue")?;
                    writeln!(out, "joint_missingness_prob\t{:.6e}", est.estimate)?;
                    writeln!(out, "half_width_95\t{:.6e}", est.half_width_95)?;
                    writeln!(out, "method\tmonte-carlo")?;
                }
                Err(e) => return Err(e.into()),
            }
        }
        AnalyzeCommand::Corr { copula, p1, p2 } => {
            let c = copula_from_args(&copula, 2)?;
            let rho = pairwise_correlation(&c, p1, p2)?;
            let (lo, hi) = correlation_bounds(p1, p2)?;
            writeln!(out, "quantity\tvalue")?;
            writeln!(out, "correlation\t{rho:.6}")?;
            writeln!(out, "rho_min\t{lo:.6}")?;
            writeln!(out, "rho_max\t{hi:.6}")?;
        }
        AnalyzeCommand::Bounds { p1, p2 } => {
            let (lo, hi) = correlation_bounds(p1, p2)?;
            writeln!(out, "quantity\tvalue")?;
            writeln!(out, "rho_min\t{lo:.6}")?;
            writeln!(out, "rho_max\t{hi:.6}")?;
        }
    }
    Ok(())
}

fn coeffs<W: Write>(a: &CoeffsArgs, out: &mut W) -> CliResult<()> {
    let (b0, b) = implied_coefficients(a.p, a.eps, a.cmin, a.cmax, a.k)?;
    writeln!(out, "quantity\tvalue")?;
    writeln!(out, "beta0\t{b0:.4}")?;
    writeln!(out, "beta\t{b:.4}")?;
    writeln!(out, "p_min\t{:.6}", a.p - a.eps)?;
    writeln!(out, "p_max\t{:.6}", a.p + a.eps)?;
    Ok(())
}

fn simulate<W: Write>(a: &SimulateArgs, out: &mut W) -> CliResult<()> {
    let y = load_source(&data_source(&a.data), Path::new("."))?;
    let target = y
        .column_index(&a.target)
        .ok_or_else(|| usage(format!("no column named `{}`", a.target)))?;
    let estimators: &[Estimator] = match a.estimator {
        EstimatorArg::CompleteCase => &[Estimator::CompleteCase],
        EstimatorArg::PmmMice => &[Estimator::PmmMice],
        EstimatorArg::Both => &[Estimator::CompleteCase, Estimator::PmmMice],
    };
    fs::create_dir_all(&a.out)?;
    let mut samples = String::from("estimator,mechanism,replication,estimate,bias\n");
    let mut summary = String::from("estimator,mechanism,succeeded,failed,mean_bias,q1,median,q3\n");
    let mut failures = String::from("estimator,mechanism,replication,reason\n");
    writeln!(out, "estimator\tmechanism\tsucceeded\tfailed\tmean_bias\tmedian_bias")?;
    for &est in estimators {
        let cfg = BiasStudyConfig {
            target,
            replications: a.replications,
            mechanisms: standard_mechanisms(y.ncols(), a.rho)?,
            estimator: est,
            pmm: PmmOptions {
                donors: a.donors,
                imputations: a.imputations,
                iterations: a.iterations,
                predictors: None,
            },
            seed: a.seed,
        };
        let report: BiasStudyReport = run_bias_study(&y, &cfg)?;
        for s in &report.samples {
            samples.push_str(&format!(
                "{},{},{},{},{}\n",
                est.name(),
                s.mechanism,
                s.replication,
                io_num(s.estimate),
                io_num(s.bias)
            ));
        }
        for f in &report.failures {
            failures.push_str(&format!(
                "{},{},{},\"{}\"\n",
                est.name(),
                f.mechanism,
                f.replication,
                f.reason.replace('"', "'")
            ));
        }
        for s in &report.summaries {
            summary.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                est.name(),
                s.mechanism,
                s.succeeded,
                s.failed,
                io_num(s.mean),
                io_num(s.q1),
                io_num(s.median),
                io_num(s.q3)
            ));
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:.5}\t{:.5}",
                est.name(),
                s.mechanism,
                s.succeeded,
                s.failed,
                s.mean,
                s.median
            )?;
        }
        if est == Estimator::PmmMice {
            writeln!(
                out,
                "donor_check\t{} imputed cells\t{} violations",
                report.donors.imputed_cells, report.donors.violations
            )?;
        }
    }
    fs::write(a.out.join("bias_samples.csv"), samples)?;
    fs::write(a.out.join("bias_summary.csv"), summary)?;
    fs::write(a.out.join("bias_failures.csv"), failures)?;
    Ok(())
}

fn io_num(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else {
        io::csv_number(v)
    }
}

fn impute<W: Write>(a: &ImputeArgs, out: &mut W) -> CliResult<()> {
    let x = io::load_amputed(&a.input)?;
    let opts = PmmOptions {
        donors: a.donors,
        imputations: a.imputations,
        iterations: a.iterations,
        predictors: None,
    };
    let completed = pmm_impute(&x, &opts, a.seed)?;
    fs::create_dir_all(&a.out)?;
    for (k, c) in completed.iter().enumerate() {
        let path = a.out.join(format!("imputed_{}.csv", k + 1));
        io::save_complete(&path, c)?;
        writeln!(out, "{}", path.display())?;
    }
    Ok(())
}

fn render<W: Write>(a: &RenderArgs, out: &mut W) -> CliResult<()> {
    let values = match mtcars::builtin(&a.input) {
        Some(y) => y.values().map(Some),
        None => io::load_amputed(Path::new(&a.input))?.values().clone(),
    };
    let mut palette = Palette::default();
    for (arg, slot) in [
        (&a.low, &mut palette.low),
        (&a.high, &mut palette.high),
        (&a.missing, &mut palette.missing),
    ] {
        if let Some(hex) = arg {
            *slot = Palette::parse_hex(hex).map_err(|e| usage(e.to_string()))?;
        }
    }
    io::write_heatmap(&a.out, &values, a.cell_size, &palette)?;
    writeln!(out, "{}", a.out.display())?;
    Ok(())
}
