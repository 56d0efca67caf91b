//! Batch experiments writing tidy CSV: method comparison on clipped-normal
//! instances, the small-sample bias study, the inequality verification
//! battery and approximation-scheme timing.
//!
//! Every experiment reads an [`ExperimentConfig`] (JSON, all fields
//! optional) and derives one seed per trial from the master seed, so a
//! rerun with the same config reproduces every value column.

mod compare;
mod scaling;
mod verify;

pub use compare::{expand_methods, run_bias, run_compare, MethodRun, Runner};
pub use scaling::{run_scaling, ScalingRow};
pub use verify::{default_suites, run_verify, run_verify_suites, CheckOutcome, Suite, VerifyReport};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::exact::Objective;
use crate::generators::ClippedNormalParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Compare,
    Bias,
    Verify,
    Scaling,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Compare => "compare",
            Self::Bias => "bias",
            Self::Verify => "verify",
            Self::Scaling => "scaling",
        }
    }
}

/// A selection method as named in configs: `quantile`, `kr-q`,
/// `kr-samples`, `mean`, `greedy`, `oracle` or `ptas:<epsilon>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    Quantile,
    KrQuantile,
    KrSamples,
    Mean,
    Greedy,
    Oracle,
    Ptas { epsilon: f64 },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Quantile => write!(f, "quantile"),
            Self::KrQuantile => write!(f, "kr-q"),
            Self::KrSamples => write!(f, "kr-samples"),
            Self::Mean => write!(f, "mean"),
            Self::Greedy => write!(f, "greedy"),
            Self::Oracle => write!(f, "oracle"),
            Self::Ptas { epsilon } => write!(f, "ptas:{epsilon}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "quantile" => Self::Quantile,
            "kr-q" | "kr" => Self::KrQuantile,
            "kr-samples" => Self::KrSamples,
            "mean" | "expectation" => Self::Mean,
            "greedy" => Self::Greedy,
            "oracle" => Self::Oracle,
            other => match other.strip_prefix("ptas:") {
                Some(e) => {
                    let epsilon: f64 = e.parse().map_err(|_| Error::Parse(format!("bad epsilon in {other:?}")))?;
                    if !(epsilon > 0.0 && epsilon <= 1.0) {
                        return Err(Error::Parse(format!("epsilon must be in (0, 1], got {epsilon}")));
                    }
                    Self::Ptas { epsilon }
                }
                None => return Err(Error::Parse(format!("unknown method {other:?}"))),
            },
        })
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}

/// Settings for every experiment; each one ignores the fields it does not
/// use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub k_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub objectives: Vec<Objective>,
    /// Bottom-quantile sweep for `quantile` and `kr-q` (a bottom quantile
    /// `b` keeps the top `1 - b`); the theory points `1 - 1/sqrt(k)` and
    /// `1 - 1/k` are always added.
    pub bottom_quantiles: Vec<f64>,
    pub instance: ClippedNormalParams,
    /// Bias study: draws seen by "small" and "big" variables.
    pub small_draws: usize,
    pub big_draws: usize,
    /// Bias study: Monte Carlo samples used to score a selection against
    /// the true normals.
    pub score_samples: usize,
    /// Verify: suites to run (`None` runs all).
    pub suites: Option<Vec<String>>,
    /// Scaling: instance sizes, accuracy, timing rounds, and the least time
    /// spent timing each size (spread over the rounds); the median run is
    /// reported.
    pub n_list: Vec<usize>,
    pub epsilon: f64,
    pub repetitions: usize,
    pub min_time_ms: f64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Compare,
            n: 500,
            k_list: vec![10, 20, 30],
            trials: 100,
            seed: 0,
            methods: vec![
                Method::Quantile,
                Method::KrQuantile,
                Method::KrSamples,
                Method::Mean,
                Method::Greedy,
            ],
            objectives: vec![Objective::Max],
            bottom_quantiles: vec![0.7, 0.8, 0.9, 0.95, 0.99],
            instance: ClippedNormalParams::default(),
            small_draws: 10,
            big_draws: 5000,
            score_samples: 500,
            suites: None,
            n_list: (0..8).map(|j| 1000 << j).collect(),
            epsilon: 0.25,
            repetitions: 3,
            min_time_ms: 200.0,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn for_experiment(experiment: Experiment) -> Self {
        Self {
            experiment,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return param("trials must be >= 1");
        }
        match self.experiment {
            Experiment::Compare | Experiment::Bias => {
                if self.k_list.is_empty() {
                    return param("k_list is empty");
                }
                if let Some(&k) = self.k_list.iter().find(|&&k| k < 2 || k > self.n) {
                    return param(format!("k = {k} outside 2..=n (n = {})", self.n));
                }
                if self.methods.is_empty() || self.objectives.is_empty() {
                    return param("methods and objectives must be nonempty");
                }
                if let Some(b) = self.bottom_quantiles.iter().find(|b| !(0.0..1.0).contains(*b)) {
                    return param(format!("bottom quantile {b} outside [0, 1)"));
                }
                if self.experiment == Experiment::Bias && (self.small_draws == 0 || self.big_draws == 0) {
                    return param("draw counts must be positive");
                }
                if self.experiment == Experiment::Bias && self.score_samples < 2 {
                    return param("score_samples must be >= 2");
                }
            }
            Experiment::Scaling => {
                if self.n_list.is_empty() || self.repetitions == 0 {
                    return param("n_list must be nonempty and repetitions >= 1");
                }
                if !(self.min_time_ms >= 0.0 && self.min_time_ms.is_finite()) {
                    return param(format!("min_time_ms must be finite and >= 0, got {}", self.min_time_ms));
                }
                if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
                    return param(format!("epsilon must be in (0, 1], got {}", self.epsilon));
                }
                if let Some(&k) = self.k_list.first() {
                    if let Some(&n) = self.n_list.iter().find(|&&n| n < k) {
                        return param(format!("n = {n} below k = {k}"));
                    }
                }
            }
            Experiment::Verify => {}
        }
        Ok(())
    }
}

/// One raw result row of `compare` or `bias`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub trial: usize,
    pub method: String,
    /// Bottom quantile for `quantile`/`kr-q`, `r` for `kr-samples`,
    /// epsilon for `ptas`; empty otherwise.
    pub parameter: Option<f64>,
    pub theory_point: bool,
    pub k: usize,
    pub objective: String,
    pub value: f64,
    /// Bias study only.
    pub small_label_fraction: Option<f64>,
    pub runtime_ms: f64,
}

/// Mean and standard error (`sd / sqrt(count)`, sample standard deviation)
/// of one (method, parameter, k, objective) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub method: String,
    pub parameter: Option<f64>,
    pub theory_point: bool,
    pub k: usize,
    pub objective: String,
    pub count: usize,
    pub mean: f64,
    pub stderr: f64,
    pub small_fraction_mean: Option<f64>,
    pub small_fraction_stderr: Option<f64>,
}

/// Mean and standard error of a sample.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups raw rows by cell, keeping first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut cells: Vec<(SummaryRow, Vec<f64>, Vec<f64>)> = Vec::new();
    for r in rows {
        let key = |s: &SummaryRow| {
            s.method == r.method
                && s.parameter.map(f64::to_bits) == r.parameter.map(f64::to_bits)
                && s.k == r.k
                && s.objective == r.objective
        };
        let idx = match cells.iter().position(|(s, _, _)| key(s)) {
            Some(i) => i,
            None => {
                cells.push((
                    SummaryRow {
                        experiment: r.experiment.clone(),
                        method: r.method.clone(),
                        parameter: r.parameter,
                        theory_point: r.theory_point,
                        k: r.k,
                        objective: r.objective.clone(),
                        count: 0,
                        mean: 0.0,
                        stderr: 0.0,
                        small_fraction_mean: None,
                        small_fraction_stderr: None,
                    },
                    Vec::new(),
                    Vec::new(),
                ));
                cells.len() - 1
            }
        };
        cells[idx].1.push(r.value);
        if let Some(f) = r.small_label_fraction {
            cells[idx].2.push(f);
        }
    }
    cells
        .into_iter()
        .map(|(mut s, values, fractions)| {
            s.count = values.len();
            (s.mean, s.stderr) = mean_stderr(&values);
            if !fractions.is_empty() {
                let (m, e) = mean_stderr(&fractions);
                s.small_fraction_mean = Some(m);
                s.small_fraction_stderr = Some(e);
            }
            s
        })
        .collect()
}

/// Writes serializable rows as CSV with a header.
pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", path.display()))))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `results.csv` -> `results.summary.csv`.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.summary.csv"))
}

/// Writes raw rows to `path` and the summary next to it.
pub fn write_results(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<()> {
    let path = path.as_ref();
    write_csv(path, rows)?;
    write_csv(summary_path(path), &summarize(rows))
}
