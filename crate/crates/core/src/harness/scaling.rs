use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{Experiment, ExperimentConfig};
use crate::error::{param, Result};
use crate::generators::gen_scaling_instance;
use crate::ptas::{ptas_select, PtasConfig};
use crate::rng::{derive_seed, SeededRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    /// Median of the timed runs.
    pub runtime_ms: f64,
    /// Runtime divided by the previous row's runtime.
    pub ratio_to_previous: Option<f64>,
    pub value: f64,
    pub type_count: usize,
    pub histograms_evaluated: u64,
}

/// Times the approximation scheme on two-point instances of growing size.
/// `k` is the first entry of `k_list`; instance `j` uses the seed derived
/// from the master seed and `j`. All instances are generated up front.
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<Vec<ScalingRow>> {
    let mut cfg = cfg.clone();
    cfg.experiment = Experiment::Scaling;
    cfg.validate()?;
    let Some(&k) = cfg.k_list.first() else {
        return param("k_list is empty");
    };
    let ptas = PtasConfig::new(cfg.epsilon);
    let instances = cfg
        .n_list
        .iter()
        .enumerate()
        .map(|(j, &n)| gen_scaling_instance(n, k, &mut SeededRng::new(derive_seed(cfg.seed, j as u64))))
        .collect::<Result<Vec<_>>>()?;
    let mut outcomes = Vec::with_capacity(instances.len());
    for instance in &instances {
        outcomes.push(ptas_select(instance, &ptas)?);
    }
    // Rounds visit every size in turn so a slow stretch of the machine hits
    // all sizes alike; within a round a size repeats until it has used its
    // share of `min_time_ms`. The median run per size is reported: the
    // minimum is thrown off by the occasional unusually fast run.
    let share = cfg.min_time_ms / cfg.repetitions as f64;
    let mut times: Vec<Vec<f64>> = vec![Vec::new(); instances.len()];
    for _ in 0..cfg.repetitions {
        for (ts, instance) in times.iter_mut().zip(&instances) {
            let mut spent = 0.0;
            while ts.is_empty() || spent < share {
                let t = Instant::now();
                ptas_select(instance, &ptas)?;
                let ms = t.elapsed().as_secs_f64() * 1e3;
                ts.push(ms);
                spent += ms;
            }
        }
    }
    let best: Vec<f64> = times.into_iter().map(median).collect();
    let mut rows: Vec<ScalingRow> = Vec::new();
    for ((&n, out), ms) in cfg.n_list.iter().zip(outcomes).zip(best) {
        rows.push(ScalingRow {
            n,
            k,
            epsilon: cfg.epsilon,
            runtime_ms: ms,
            ratio_to_previous: rows.last().map(|r| ms / r.runtime_ms),
            value: out.result.value_max,
            type_count: out.trace.type_count,
            histograms_evaluated: out.trace.histograms_evaluated,
        });
    }
    Ok(rows)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}
