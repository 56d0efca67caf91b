use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use kselect::anchoring::{compute_beta, probability_lower_bound_check, tail_bound_report, truncation_equivariance_check};
use kselect::exact::{brute_force_optimum, NumberMode, Objective};
use kselect::generators::{
    gen_bias_instance, gen_clipped_normal_instance, gen_densest_subgraph_instance, gen_independent_set_instance,
    gen_scaling_instance, team_example, ClippedNormalParams, DksBase, Graph,
};
use kselect::harness::{
    run_bias, run_compare, run_scaling, run_verify, summarize, write_csv, write_results, Experiment, ExperimentConfig,
};
use kselect::io::{instance_to_json, parse_families, read_instance, write_instance};
use kselect::ptas::{ptas_select, CountMode, PtasConfig};
use kselect::scalar::format_rational;
use kselect::selectors::{select_by_score, SelectorSpec};
use kselect::{Instance, SeededRng, Value};

#[derive(Parser)]
#[command(name = "kselect", version, about = "Pick k of n random variables to maximize the expected (second) maximum")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Max,
    Smax,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Max => Objective::Max,
            ObjectiveArg::Smax => Objective::SecondMax,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Float,
    Rational,
}

impl From<ModeArg> for NumberMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Float => NumberMode::Float64,
            ModeArg::Rational => NumberMode::ExactRational,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Quantile,
    KrQ,
    KrSamples,
    Mean,
    Greedy,
}

/// How quantile parameters are read: `bottom` takes a fraction `b` and keeps
/// the top `1 - b`; `top` takes `p` (quantile rule) or `q` (top fraction).
#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Convention {
    Bottom,
    Top,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountsArg {
    Exact,
    Geometric,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFamily {
    CliqueReduction,
    DksReduction,
    ClippedNormal,
    Bias,
    Scaling,
    Team,
}

#[derive(Subcommand)]
enum Command {
    /// Expected objective of a given subset.
    Eval {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated indices, e.g. 0,3,7.
        #[arg(long, value_delimiter = ',', required = true)]
        subset: Vec<usize>,
        #[arg(long, value_enum, default_value = "max")]
        objective: ObjectiveArg,
        #[arg(long, value_enum, default_value = "float")]
        mode: ModeArg,
    },
    /// Best size-k subset by exhaustive search.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "max")]
        objective: ObjectiveArg,
        #[arg(long, value_enum, default_value = "float")]
        mode: ModeArg,
    },
    /// Run a score-based rule or greedy.
    Select {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Rule parameter, or `auto` for the defaults (p = sqrt(k), q = 1/k, r = k).
        #[arg(long, default_value = "auto")]
        param: String,
        #[arg(long, value_enum, default_value = "max")]
        objective: ObjectiveArg,
        #[arg(long, value_enum, default_value = "bottom")]
        convention: Convention,
    },
    /// Run the approximation scheme for the expected maximum.
    Ptas {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "exact")]
        counts: CountsArg,
        /// Write the preprocessing trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compute the anchoring thresholds beta1 and beta2.
    Beta {
        #[arg(long)]
        instance: PathBuf,
        /// Also print the bound checks and their margins.
        #[arg(long)]
        report: bool,
    },
    /// Generate an instance file.
    Gen {
        #[arg(long, value_enum)]
        family: GenFamily,
        /// Comma-separated key=value pairs, e.g. `n=500,k=10` or
        /// `graph=regular,n=6,d=2,k=2` or `edges=0-1;1-2,n=3,k=2`.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare methods on clipped-normal instances.
    Compare(ExperimentArgs),
    /// Small-sample bias study.
    Bias(ExperimentArgs),
    /// Run the inequality verification battery; exits 1 on any violation.
    Verify(ExperimentArgs),
    /// Time the approximation scheme for growing n.
    Scaling(ExperimentArgs),
}

#[derive(clap::Args)]
struct ExperimentArgs {
    /// JSON config; every field is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error kinds mapped to exit codes.
enum Failure {
    Violation,
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<Instance> {
    read_instance(path).with_context(|| format!("reading {}", path.display()))
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn value_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Float(x) => json!(x),
        Value::Exact(r) => json!({"exact": format_rational(r), "approx": kselect::scalar::ratio_to_f64(r)}),
    }
}

fn run(command: Command) -> std::result::Result<(), Failure> {
    match command {
        Command::Eval {
            instance,
            subset,
            objective,
            mode,
        } => {
            let inst = load(&instance)?;
            let v = inst.evaluate_in(&subset, objective.into(), mode.into()).map_err(anyhow::Error::from)?;
            match v {
                Value::Float(x) => println!("{x}"),
                Value::Exact(r) => println!("{}", format_rational(&r)),
            }
        }
        Command::Oracle {
            instance,
            objective,
            mode,
        } => {
            let inst = load(&instance)?;
            let (subset, v) = brute_force_optimum(&inst, objective.into(), mode.into()).map_err(anyhow::Error::from)?;
            print_json(&json!({"subset": subset, "value": value_json(&v)}));
        }
        Command::Select {
            instance,
            method,
            param,
            objective,
            convention,
        } => {
            let inst = load(&instance)?;
            let spec = selector(method, &param, convention, objective.into(), inst.k())?;
            let res = select_by_score(&inst, &spec).map_err(anyhow::Error::from)?;
            print_json(&json!({
                "method": spec.to_string(),
                "subset": res.subset,
                "scores": res.scores,
                "value_max": res.value_max,
                "value_smax": res.value_smax,
                "no_guarantee": res.no_guarantee,
            }));
        }
        Command::Ptas {
            instance,
            epsilon,
            counts,
            trace,
        } => {
            let inst = load(&instance)?;
            let mut cfg = PtasConfig::new(epsilon);
            cfg.counts = match counts {
                CountsArg::Exact => CountMode::Exact,
                CountsArg::Geometric => CountMode::Geometric,
            };
            let out = ptas_select(&inst, &cfg).map_err(anyhow::Error::from)?;
            if let Some(path) = trace {
                let text = serde_json::to_string_pretty(&out.trace).map_err(anyhow::Error::from)?;
                std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            print_json(&json!({
                "subset": out.result.sorted_subset(),
                "value_max": out.result.value_max,
                "value_smax": out.result.value_smax,
                "tau": out.trace.tau,
                "types": out.trace.type_count,
                "histograms_evaluated": out.trace.histograms_evaluated,
            }));
        }
        Command::Beta { instance, report } => beta(&instance, report)?,
        Command::Gen {
            family,
            params,
            seed,
            out,
        } => generate(family, &params, seed, &out)?,
        Command::Compare(args) => experiment(Experiment::Compare, args)?,
        Command::Bias(args) => experiment(Experiment::Bias, args)?,
        Command::Scaling(args) => experiment(Experiment::Scaling, args)?,
        Command::Verify(args) => {
            let (cfg, out) = config(Experiment::Verify, args)?;
            let report = run_verify(&cfg).map_err(anyhow::Error::from)?;
            if let Some(path) = out {
                write_csv(&path, &report.checks).map_err(anyhow::Error::from)?;
            }
            for v in report.violations() {
                println!(
                    "VIOLATION {} seed={} {}: lhs={} rhs={} margin={}{}",
                    v.suite,
                    v.seed,
                    v.inequality,
                    v.lhs,
                    v.rhs,
                    v.margin,
                    v.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
                );
            }
            let bad = report.violations().count();
            println!("{} checks, {} violations", report.checks.len(), bad);
            if bad > 0 {
                return Err(Failure::Violation);
            }
        }
    }
    Ok(())
}

fn selector(method: MethodArg, param: &str, convention: Convention, objective: Objective, k: usize) -> Result<SelectorSpec> {
    let value = if param == "auto" {
        None
    } else {
        Some(param.parse::<f64>().with_context(|| format!("bad --param {param:?}"))?)
    };
    let spec = match (method, value) {
        (MethodArg::Quantile, None) => SelectorSpec::quantile_default(k),
        (MethodArg::Quantile, Some(v)) if convention == Convention::Bottom => SelectorSpec::quantile_from_bottom(v)?,
        (MethodArg::Quantile, Some(p)) => SelectorSpec::Quantile { p },
        (MethodArg::KrQ, None) => SelectorSpec::top_quantile_default(k),
        (MethodArg::KrQ, Some(v)) if convention == Convention::Bottom => SelectorSpec::top_quantile_from_bottom(v)?,
        (MethodArg::KrQ, Some(q)) => SelectorSpec::TopQuantileExpectation { q },
        (MethodArg::KrSamples, None) => SelectorSpec::best_of_default(k),
        (MethodArg::KrSamples, Some(r)) => {
            if !(r >= 1.0 && r.fract() == 0.0 && r <= u32::MAX as f64) {
                bail!("kr-samples needs a positive integer r, got {r}");
            }
            SelectorSpec::BestOfSamples { r: r as u32 }
        }
        (MethodArg::Mean, _) => SelectorSpec::Mean,
        (MethodArg::Greedy, _) => SelectorSpec::Greedy { objective },
    };
    spec.validate()?;
    Ok(spec)
}

fn beta(path: &Path, report: bool) -> Result<()> {
    let inst = load(path)?;
    let trace = compute_beta(inst.variables())?;
    let mut out = json!({"beta1": trace.beta1, "beta2": trace.beta2, "k_padded": trace.k_padded});
    if report {
        let pb = probability_lower_bound_check(inst.variables(), &trace)?;
        out["probability_bounds"] = json!({
            "p_max": format_rational(&pb.p_max),
            "p_max_margin": kselect::scalar::ratio_to_f64(&pb.p_max) - 0.5,
            "max_holds": pb.max_holds(),
            "p_smax": format_rational(&pb.p_smax),
            "p_smax_margin": kselect::scalar::ratio_to_f64(&pb.p_smax) - 0.098,
            "smax_holds": pb.smax_holds(),
        });
        out["truncation_equivariant"] = json!(truncation_equivariance_check(inst.variables(), &trace)?);
        let text = std::fs::read_to_string(path)?;
        if let Some(families) = parse_families(&text)? {
            let ftrace = kselect::anchoring::compute_beta_continuous(&families)?;
            let mut rng = SeededRng::new(0);
            let mut reports = Vec::new();
            for eps in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 256.0] {
                reports.push(tail_bound_report(&families, &ftrace, eps, 10_000, &mut rng)?);
            }
            out["tail_bounds"] = serde_json::to_value(reports)?;
        }
    }
    print_json(&out);
    Ok(())
}

fn parse_params(s: &str) -> Result<Vec<(String, String)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| anyhow!("parameter {p:?} is not key=value"))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

struct Params(Vec<(String, String)>);

impl Params {
    fn get<T: std::str::FromStr>(&self, key: &str, default: Option<T>) -> Result<T> {
        match self.0.iter().find(|(k, _)| k == key) {
            Some((_, v)) => v.parse().map_err(|_| anyhow!("bad value {v:?} for {key}")),
            None => default.ok_or_else(|| anyhow!("missing parameter {key}")),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn graph_from(params: &Params, rng: &mut SeededRng) -> Result<Graph> {
    let n: usize = params.get("n", None)?;
    if let Some(edges) = params.raw("edges") {
        let list = edges
            .split(';')
            .filter(|e| !e.is_empty())
            .map(|e| {
                let (a, b) = e.split_once('-').ok_or_else(|| anyhow!("edge {e:?} is not u-v"))?;
                Ok((a.parse()?, b.parse()?))
            })
            .collect::<Result<Vec<(usize, usize)>>>()?;
        return Ok(Graph::new(n, list)?);
    }
    Ok(match params.raw("graph").unwrap_or("gnp") {
        "regular" => Graph::random_regular(n, params.get("d", None)?, rng)?,
        "complete" => Graph::complete(n),
        "gnp" => Graph::random_gnp(n, params.get("p", Some(0.5))?, rng)?,
        other => bail!("unknown graph kind {other:?} (regular|complete|gnp)"),
    })
}

fn generate(family: GenFamily, params: &str, seed: u64, out: &Path) -> Result<()> {
    let params = Params(parse_params(params)?);
    let mut rng = SeededRng::new(seed);
    let clipped = |params: &Params| -> Result<ClippedNormalParams> {
        let d = ClippedNormalParams::default();
        Ok(ClippedNormalParams {
            draws: params.get("draws", Some(d.draws))?,
            v_max: params.get("v_max", Some(d.v_max))?,
            ..d
        })
    };
    let doc = match family {
        GenFamily::CliqueReduction => {
            let g = graph_from(&params, &mut rng)?;
            let red = gen_independent_set_instance(&g, params.get("k", None)?)?;
            let mut doc = instance_to_json(&red.instance);
            doc["graph"] = serde_json::to_value(&g)?;
            doc["mu"] = json!(format_rational(&red.mu));
            doc["completeness"] = json!(format_rational(&red.completeness));
            doc["soundness"] = json!(format_rational(&red.soundness));
            doc
        }
        GenFamily::DksReduction => {
            let g = graph_from(&params, &mut rng)?;
            let base = match params.raw("base").unwrap_or("safe") {
                "safe" => DksBase::Safe,
                "small" => DksBase::Small,
                other => bail!("unknown base {other:?} (safe|small)"),
            };
            let red = gen_densest_subgraph_instance(&g, params.get("k", None)?, base)?;
            let mut doc = instance_to_json(&red.instance);
            doc["graph"] = serde_json::to_value(&g)?;
            doc["base"] = json!(red.base);
            doc
        }
        GenFamily::ClippedNormal => {
            let inst = gen_clipped_normal_instance(
                params.get("n", Some(500))?,
                params.get("k", Some(10))?,
                &mut rng,
                &clipped(&params)?,
            )?;
            instance_to_json(&inst)
        }
        GenFamily::Bias => {
            let b = gen_bias_instance(
                params.get("n", Some(500))?,
                params.get("k", Some(10))?,
                &mut rng,
                &clipped(&params)?,
                params.get("small_draws", Some(10))?,
                params.get("big_draws", Some(5000))?,
            )?;
            let mut doc = instance_to_json(&b.instance);
            doc["true_families"] = serde_json::to_value(&b.families)?;
            doc
        }
        GenFamily::Scaling => {
            let inst = gen_scaling_instance(params.get("n", Some(1000))?, params.get("k", Some(8))?, &mut rng)?;
            instance_to_json(&inst)
        }
        GenFamily::Team => {
            write_instance(out, &team_example())?;
            return Ok(());
        }
    };
    let text = serde_json::to_string_pretty(&doc)?;
    std::fs::write(out, text + "\n").with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn config(experiment: Experiment, args: ExperimentArgs) -> Result<(ExperimentConfig, Option<PathBuf>)> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::read(path).with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentConfig::for_experiment(experiment),
    };
    cfg.experiment = experiment;
    let out = args.out.or_else(|| cfg.output.clone());
    Ok((cfg, out))
}

fn experiment(kind: Experiment, args: ExperimentArgs) -> Result<()> {
    let (cfg, out) = config(kind, args)?;
    match kind {
        Experiment::Scaling => {
            let rows = run_scaling(&cfg)?;
            if let Some(path) = &out {
                write_csv(path, &rows)?;
            }
            for r in &rows {
                let ratio = r.ratio_to_previous.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into());
                println!("n={:<8} runtime_ms={:<10.3} ratio={ratio}", r.n, r.runtime_ms);
            }
        }
        _ => {
            let rows = if kind == Experiment::Compare { run_compare(&cfg)? } else { run_bias(&cfg)? };
            if let Some(path) = &out {
                write_results(path, &rows)?;
            }
            for s in summarize(&rows) {
                let param = s.parameter.map(|p| format!("{p}")).unwrap_or_default();
                let frac = s
                    .small_fraction_mean
                    .map(|f| format!(" small={f:.3}"))
                    .unwrap_or_default();
                println!(
                    "k={:<3} {:<5} {:<11} {:<8}{} mean={:.4} stderr={:.4}{frac}",
                    s.k,
                    s.objective,
                    s.method,
                    param,
                    if s.theory_point { "*" } else { " " },
                    s.mean,
                    s.stderr
                );
            }
        }
    }
    Ok(())
}
