//! JSON run configurations. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use aloha_calculus::sim::Scenario;
use aloha_calculus::{DegreeDistribution, InduceMode};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Which ALOHA receiver to build.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReceiverSpec {
    Sa,
    DFold {
        d: u32,
    },
    NearFar,
    /// A success table in the `n_1,..,phi_K` CSV layout.
    Table {
        path: PathBuf,
        #[serde(default)]
        saturating: bool,
    },
    /// Cooperative `D`-fold receivers wired to the classes by a topology.
    Network {
        topology: TopologySpec,
        d: u32,
        #[serde(default)]
        method: NetworkMethod,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkMethod {
    /// Message passing over every load class.
    #[default]
    MaxSum,
    /// Splitting, multiplexing and packet coding of D-fold receivers.
    Combinators,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TopologySpec {
    /// One 0/1 row per class.
    Rows { rows: Vec<Vec<u8>> },
    /// CSV incidence matrix, one row per class.
    Csv { path: PathBuf },
    /// `class,receiver` pairs, 0-based.
    EdgeList { path: PathBuf, classes: usize, receivers: usize },
    /// Each edge present independently with probability `edge_probability`.
    Random { classes: usize, receivers: usize, edge_probability: f64, seed: u64 },
}

/// Either an explicit list of `values` or the inclusive range
/// `start, start + step, ..., stop`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl Sweep {
    pub fn list(values: Vec<f64>) -> Self {
        Sweep { values: Some(values), ..Sweep::default() }
    }

    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        Sweep { values: None, start: Some(start), stop: Some(stop), step: Some(step) }
    }

    pub fn values(&self) -> CliResult<Vec<f64>> {
        match (&self.values, self.start, self.stop, self.step) {
            (Some(values), None, None, None) => {
                if values.is_empty() {
                    return Err(CliError::Invalid("sweep has no values".into()));
                }
                Ok(values.clone())
            }
            (None, Some(start), Some(stop), Some(step)) => {
                if !(step.is_finite() && step > 0.0) || !(start.is_finite() && stop.is_finite()) || stop < start {
                    return Err(CliError::Invalid(format!("bad sweep range {start}..{stop} step {step}")));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                Ok((0..count).map(|i| start + i as f64 * step).collect())
            }
            _ => Err(CliError::Invalid("a sweep needs either `values` or all of `start`, `stop`, `step`".into())),
        }
    }
}

/// `L` for `x^L`, or explicit coefficients `[Lambda_0, Lambda_1, ...]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DegreeSpec {
    Regular(usize),
    Coefficients(DegreeDistribution),
}

impl DegreeSpec {
    pub fn distribution(&self) -> DegreeDistribution {
        match self {
            DegreeSpec::Regular(l) => DegreeDistribution::regular(*l),
            DegreeSpec::Coefficients(d) => d.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub receiver: ReceiverSpec,
    /// Enumeration box for receivers without a natural one.
    #[serde(default)]
    pub cap: Option<Vec<u32>>,
}

/// A Poisson receiver model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Induced {
        receiver: ReceiverSpec,
        #[serde(default)]
        mode: Option<InduceMode>,
    },
    /// Rayleigh fading with capture; every class sees the total load.
    Rayleigh { gamma_db: f64, threshold_db: f64, classes: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InduceConfig {
    pub receiver: ReceiverSpec,
    #[serde(default)]
    pub mode: Option<InduceMode>,
    /// Explicit load vectors.
    #[serde(default)]
    pub loads: Vec<Vec<f64>>,
    /// Loads `x * direction` for every swept `x`.
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSweep {
    /// 1-based external class whose user count is swept.
    pub class: usize,
    pub points: Sweep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeConfig {
    pub model: ModelSpec,
    /// Fraction of external class `k1` sent as internal class `k2`.
    #[serde(default)]
    pub routing: Option<Vec<Vec<f64>>>,
    /// User densities are `users / slots`.
    pub slots: f64,
    pub users: Vec<f64>,
    pub degrees: Vec<DegreeSpec>,
    pub sweep: ClassSweep,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_iterations() -> usize {
    aloha_calculus::density::DEFAULT_ITERATIONS
}

fn default_tolerance() -> f64 {
    aloha_calculus::density::DEFAULT_TOLERANCE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub sweep: ClassSweep,
    pub runs: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayleighConfig {
    pub gamma_db: f64,
    pub threshold_db: f64,
    pub rho: Sweep,
    #[serde(default)]
    pub max_terms: Option<u32>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(CliError::Config)
}

/// Reads a config file; also returns its directory, against which relative
/// paths inside the config are resolved.
pub fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<(T, PathBuf)> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((parse(&text)?, base))
}

pub(crate) fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}
