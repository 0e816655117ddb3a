//! Batch commands: JSON configs in, CSV tables and curves out.

pub mod config;
pub mod error;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use aloha_calculus::numeric::fmt_sig;
use aloha_calculus::receivers::d_fold_network;
use aloha_calculus::sim::{simulate, simulate_with_workers};
use aloha_calculus::{
    build_success_table, capture_psuc, d_fold, density_evolution, induce, near_far, rayleigh_model, route,
    slotted_aloha, BipartiteTopology, CaptureParams, Evaluator, InduceMode, SharedReceiver, SuccessTable,
};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::{
    ClassSweep, DeConfig, DegreeSpec, InduceConfig, ModelSpec, NetworkMethod, RayleighConfig, ReceiverSpec, SimConfig,
    Sweep, TableConfig, TopologySpec,
};
pub use error::{CliError, CliResult};

/// Truncation used when a receiver has no exact induction path.
pub const DEFAULT_INDUCE_MODE: InduceMode = InduceMode::Truncated { max_terms: 1000, tolerance: 1e-12 };

/// CSV text plus non-fatal diagnostics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Output {
    pub csv: String,
    pub warnings: Vec<String>,
}

impl From<String> for Output {
    fn from(csv: String) -> Self {
        Output { csv, warnings: Vec::new() }
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn build_topology(spec: &TopologySpec, base: &Path, seed: Option<u64>) -> CliResult<BipartiteTopology> {
    let h = match spec {
        TopologySpec::Rows { rows } => BipartiteTopology::from_rows(rows)?,
        TopologySpec::Csv { path } => BipartiteTopology::from_csv(&read_text(&config::resolve(base, path))?)?,
        TopologySpec::EdgeList { path, classes, receivers } => {
            BipartiteTopology::from_edge_list(&read_text(&config::resolve(base, path))?, *classes, *receivers)?
        }
        TopologySpec::Random { classes, receivers, edge_probability, seed: own } => {
            if !(0.0..=1.0).contains(edge_probability) {
                return Err(CliError::Invalid(format!("edge_probability {edge_probability} is not a probability")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(*own));
            let rows: Vec<Vec<u8>> = (0..*classes)
                .map(|_| (0..*receivers).map(|_| u8::from(rng.random_bool(*edge_probability))).collect())
                .collect();
            BipartiteTopology::from_rows(&rows)?
        }
    };
    Ok(h)
}

pub fn build_receiver(spec: &ReceiverSpec, base: &Path, seed: Option<u64>) -> CliResult<Evaluator> {
    let phi = match spec {
        ReceiverSpec::Sa => slotted_aloha(),
        ReceiverSpec::DFold { d } => d_fold(*d)?,
        ReceiverSpec::NearFar => near_far(),
        ReceiverSpec::Table { path, saturating } => {
            Evaluator::from_table(SuccessTable::from_csv(&read_text(&config::resolve(base, path))?, *saturating)?)
        }
        ReceiverSpec::Network { topology, d, method } => {
            let h = build_topology(topology, base, seed)?;
            match method {
                NetworkMethod::MaxSum => build_success_table(&h, *d)?,
                NetworkMethod::Combinators => d_fold_network(&h, *d)?,
            }
        }
    };
    Ok(phi)
}

fn default_cap(spec: &ReceiverSpec, phi: &Evaluator) -> Vec<u32> {
    match spec {
        ReceiverSpec::DFold { d } => vec![d + 1],
        ReceiverSpec::Network { d, .. } => vec![d + 1; phi.dim()],
        _ => vec![2; phi.dim()],
    }
}

/// Success table of a receiver over its enumeration box.
pub fn cmd_table(cfg: &TableConfig, base: &Path, seed: Option<u64>) -> CliResult<String> {
    let phi = build_receiver(&cfg.receiver, base, seed)?;
    if let (Some(table), None) = (phi.table(), &cfg.cap) {
        return Ok(table.to_csv());
    }
    let cap = cfg.cap.clone().unwrap_or_else(|| default_cap(&cfg.receiver, &phi));
    if cap.len() != phi.dim() {
        return Err(aloha_calculus::Error::DimensionMismatch { expected: phi.dim(), actual: cap.len() }.into());
    }
    let saturating = matches!(cfg.receiver, ReceiverSpec::Network { .. });
    let table = SuccessTable::tabulate(cap, saturating, |n| phi.evaluate(n))?;
    Ok(table.to_csv())
}

/// The Poisson receiver a model spec describes.
pub fn build_model(spec: &ModelSpec, base: &Path, seed: Option<u64>) -> CliResult<SharedReceiver> {
    match spec {
        ModelSpec::Induced { receiver, mode } => {
            let phi = build_receiver(receiver, base, seed)?;
            let mode = mode.unwrap_or_else(|| default_mode(receiver));
            Ok(Arc::new(induce(&phi, mode)?))
        }
        ModelSpec::Rayleigh { gamma_db, threshold_db, classes } => {
            Ok(Arc::new(rayleigh_model(CaptureParams::from_db(*gamma_db, *threshold_db)?, *classes)?))
        }
    }
}

fn default_mode(receiver: &ReceiverSpec) -> InduceMode {
    match receiver {
        ReceiverSpec::Network { d, method: NetworkMethod::MaxSum, .. } => InduceMode::ExactSaturating { d: *d },
        _ => DEFAULT_INDUCE_MODE,
    }
}

fn header(first: &[&str], groups: &[(&str, usize)]) -> String {
    let mut cols: Vec<String> = first.iter().map(|s| s.to_string()).collect();
    for (prefix, k) in groups {
        cols.extend((1..=*k).map(|c| format!("{prefix}{c}")));
    }
    cols.join(",")
}

fn row(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt_sig).collect::<Vec<_>>().join(",")
}

/// Induced success probabilities over a grid of offered loads.
pub fn cmd_induce(cfg: &InduceConfig, base: &Path, seed: Option<u64>) -> CliResult<String> {
    let model = build_model(&ModelSpec::Induced { receiver: cfg.receiver.clone(), mode: cfg.mode }, base, seed)?;
    let k = model.dim();
    let mut loads = cfg.loads.clone();
    if let Some(sweep) = &cfg.sweep {
        let direction = cfg.direction.clone().unwrap_or_else(|| vec![1.0; k]);
        for x in sweep.values()? {
            loads.push(direction.iter().map(|d| d * x).collect());
        }
    } else if cfg.direction.is_some() {
        return Err(CliError::Invalid("`direction` needs a `sweep`".into()));
    }
    if loads.is_empty() {
        return Err(CliError::Invalid("no loads given".into()));
    }
    let mut out = header(&[], &[("rho_", k), ("Psuc_", k)]);
    out.push('\n');
    for rho in loads {
        let p = model.success_probabilities(&rho)?;
        out.push_str(&row(rho.iter().copied().chain(p)));
        out.push('\n');
    }
    Ok(out)
}

fn sweep_class(sweep: &ClassSweep, classes: usize) -> CliResult<usize> {
    if sweep.class == 0 || sweep.class > classes {
        return Err(CliError::Invalid(format!("sweep class {} is not in 1..={classes}", sweep.class)));
    }
    Ok(sweep.class - 1)
}

/// Density-evolution error probabilities while sweeping one class's users.
pub fn cmd_de(cfg: &DeConfig, base: &Path, seed: Option<u64>) -> CliResult<Output> {
    let inner = build_model(&cfg.model, base, seed)?;
    let k = cfg.users.len();
    let model: SharedReceiver = match &cfg.routing {
        Some(r) => Arc::new(route(inner, r.clone())?),
        None => inner,
    };
    if model.dim() != k || cfg.degrees.len() != k {
        return Err(CliError::Invalid(format!(
            "{k} user classes, {} degree distributions and a model with {} classes",
            cfg.degrees.len(),
            model.dim()
        )));
    }
    if !cfg.slots.is_finite() || cfg.slots <= 0.0 {
        return Err(CliError::Invalid("slots must be positive".into()));
    }
    let c = sweep_class(&cfg.sweep, k)?;
    let degrees: Vec<_> = cfg.degrees.iter().map(DegreeSpec::distribution).collect();
    let mut output = Output::from(header(&["sweep_value"], &[("err_class_", k)]));
    output.csv.push('\n');
    for x in cfg.sweep.points.values()? {
        let mut users = cfg.users.clone();
        users[c] = x;
        let g: Vec<f64> = users.iter().map(|n| n / cfg.slots).collect();
        let trace = density_evolution(model.as_ref(), &g, &degrees, cfg.max_iterations, cfg.tolerance)?;
        if !trace.converged {
            output.warnings.push(format!(
                "sweep value {}: not converged to {} within {} iterations",
                fmt_sig(x),
                cfg.tolerance,
                cfg.max_iterations
            ));
        }
        output.csv.push_str(&row(std::iter::once(x).chain(trace.final_error())));
        output.csv.push('\n');
    }
    Ok(output)
}

/// Simulated error rates with standard errors while sweeping one class's
/// users. Uses the current rayon pool unless `workers` is given.
pub fn cmd_sim(cfg: &SimConfig, seed: Option<u64>, runs: Option<u64>, workers: Option<usize>) -> CliResult<String> {
    let mut scenario = cfg.scenario.clone();
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let runs = runs.unwrap_or(cfg.runs);
    let k = scenario.classes.len();
    let c = sweep_class(&cfg.sweep, k)?;
    let mut out = header(&["sweep_value"], &[("err_class_", k), ("se_class_", k)]);
    out.push('\n');
    for x in cfg.sweep.points.values()? {
        if x < 0.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
            return Err(CliError::Invalid(format!("user count {x} is not a non-negative integer")));
        }
        scenario.classes[c].users = x as u32;
        let stats = match workers {
            Some(w) => simulate_with_workers(&scenario, runs, w)?,
            None => simulate(&scenario, runs)?,
        };
        out.push_str(&row(std::iter::once(x).chain(stats.error_rates()).chain(stats.std_errs())));
        out.push('\n');
    }
    Ok(out)
}

/// Capture success probability over a grid of total loads.
pub fn cmd_rayleigh(cfg: &RayleighConfig) -> CliResult<String> {
    let mut params = CaptureParams::from_db(cfg.gamma_db, cfg.threshold_db)?;
    if cfg.max_terms.is_some() || cfg.tolerance.is_some() {
        params = params
            .with_truncation(cfg.max_terms.unwrap_or(params.max_terms), cfg.tolerance.unwrap_or(params.tolerance))?;
    }
    let mut out = String::from("rho,Psuc\n");
    for rho in cfg.rho.values()? {
        out.push_str(&row([rho, capture_psuc(rho, &params)?]));
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Parser)]
#[command(name = "aloha", version, about = "Success tables, Poisson receivers, density evolution and SIC simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate a receiver's success function.
    Table(CommonArgs),
    /// Induced Poisson success probabilities over offered loads.
    Induce(CommonArgs),
    /// Density-evolution error probabilities over a user sweep.
    De(CommonArgs),
    /// Simulated error probabilities over a user sweep.
    Sim {
        #[command(flatten)]
        common: CommonArgs,
        /// Overrides the number of runs per sweep point.
        #[arg(long)]
        runs: Option<u64>,
        /// Worker threads for the simulation.
        #[arg(long, env = "ALOHA_WORKERS")]
        workers: Option<usize>,
    },
    /// Rayleigh capture success probability over offered loads.
    Rayleigh(CommonArgs),
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Table(c) | Command::Induce(c) | Command::De(c) | Command::Rayleigh(c) => c,
            Command::Sim { common, .. } => common,
        }
    }
}

/// Runs a parsed command and returns its output without writing it.
pub fn execute(command: &Command) -> CliResult<Output> {
    let common = command.common();
    match command {
        Command::Table(_) => {
            let (cfg, base) = config::read::<TableConfig>(&common.config)?;
            cmd_table(&cfg, &base, common.seed).map(Output::from)
        }
        Command::Induce(_) => {
            let (cfg, base) = config::read::<InduceConfig>(&common.config)?;
            cmd_induce(&cfg, &base, common.seed).map(Output::from)
        }
        Command::De(_) => {
            let (cfg, base) = config::read::<DeConfig>(&common.config)?;
            cmd_de(&cfg, &base, common.seed)
        }
        Command::Sim { runs, workers, .. } => {
            let (cfg, _) = config::read::<SimConfig>(&common.config)?;
            cmd_sim(&cfg, common.seed, *runs, *workers).map(Output::from)
        }
        Command::Rayleigh(_) => {
            let (cfg, _) = config::read::<RayleighConfig>(&common.config)?;
            cmd_rayleigh(&cfg).map(Output::from)
        }
    }
}

/// Executes `command` and writes its CSV to `--out` or standard output.
pub fn run(command: &Command) -> CliResult<Vec<String>> {
    let output = execute(command)?;
    match &command.common().out {
        Some(path) => {
            std::fs::write(path, &output.csv).map_err(|source| CliError::Io { path: path.clone(), source })?
        }
        None => print!("{}", output.csv),
    }
    Ok(output.warnings)
}
