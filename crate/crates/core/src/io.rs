//! JSON instance files.
//!
//! ```json
//! {"n": 3, "k": 2, "variables": [
//!   {"atoms": [[0, 0.5], [10, 0.5]], "label": "risky"},
//!   {"atoms": [["0", "2/3"], ["3", "1/3"]]},
//!   {"family": "exponential", "rate": 1.0, "grid": 0.01, "clip": 20}
//! ]}
//! ```
//!
//! If any atom entry is written as a string, the whole instance is read in
//! exact mode: every atom number (string or JSON number, taken by its
//! decimal text) becomes an exact rational and each variable's
//! probabilities must sum to exactly one. Otherwise atoms are floats whose
//! mass may be off by at most `1e-9`. Continuous families are discretized
//! on a grid (`grid`, `clip` optional; by default the clip point is the
//! value exceeded with probability `1e-6` and the grid has 1000 cells).

use std::path::Path;

use num_rational::BigRational;
use serde_json::{json, Map, Value};

use crate::distributions::{ContinuousFamily, DiscreteDistribution, RationalDistribution};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::scalar::{format_rational, parse_rational};

pub const DEFAULT_CLIP_TAIL: f64 = 1e-6;
pub const DEFAULT_GRID_CELLS: f64 = 1000.0;

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Discretization used for a family when the file does not say.
pub fn default_discretization(family: &ContinuousFamily) -> Result<(f64, f64)> {
    let clip = family.quantile_alpha(1.0 / DEFAULT_CLIP_TAIL)?.max(0.0);
    let grid = if clip > 0.0 { clip / DEFAULT_GRID_CELLS } else { 1.0 };
    Ok((grid, clip))
}

fn parse_family(obj: &Map<String, Value>) -> Result<DiscreteDistribution> {
    let mut spec = obj.clone();
    let take = |spec: &mut Map<String, Value>, key: &str| -> Result<Option<f64>> {
        match spec.remove(key) {
            None => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| bad(format!("{key} must be a number"))),
        }
    };
    let grid = take(&mut spec, "grid")?;
    let clip = take(&mut spec, "clip")?;
    spec.remove("label");
    let family: ContinuousFamily = serde_json::from_value(Value::Object(spec))?;
    let family = family.validated()?;
    let (default_grid, default_clip) = default_discretization(&family)?;
    family.discretize(grid.unwrap_or(default_grid), clip.unwrap_or(default_clip))
}

fn atom_pairs(obj: &Map<String, Value>) -> Result<&Vec<Value>> {
    obj.get("atoms")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("each variable needs an \"atoms\" list or a \"family\""))
}

fn pair(atom: &Value) -> Result<(&Value, &Value)> {
    match atom.as_array().map(Vec::as_slice) {
        Some([v, p]) => Ok((v, p)),
        _ => Err(bad(format!("atom must be [value, probability], got {atom}"))),
    }
}

fn exact_number(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        _ => Err(bad(format!("expected a number, got {v}"))),
    }
}

fn float_number(v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| bad(format!("expected a number, got {v}")))
}

/// Parses an instance document.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let doc: Value = serde_json::from_str(text)?;
    let obj = doc.as_object().ok_or_else(|| bad("instance must be a JSON object"))?;
    let vars = obj
        .get("variables")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing \"variables\" list"))?;
    let k = obj
        .get("k")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("missing integer \"k\""))? as usize;
    if let Some(n) = obj.get("n") {
        let n = n.as_u64().ok_or_else(|| bad("\"n\" must be an integer"))?;
        if n as usize != vars.len() {
            return Err(Error::InvalidInstance(format!("n = {n} but {} variables listed", vars.len())));
        }
    }
    let mut objs = Vec::with_capacity(vars.len());
    let mut labels = Vec::with_capacity(vars.len());
    for v in vars {
        let o = v.as_object().ok_or_else(|| bad("each variable must be an object"))?;
        labels.push(match o.get("label") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => return Err(bad(format!("label must be a string, got {other}"))),
        });
        objs.push(o);
    }
    let exact_mode = objs.iter().any(|o| {
        o.get("atoms")
            .and_then(Value::as_array)
            .is_some_and(|a| a.iter().flat_map(|x| x.as_array().into_iter().flatten()).any(Value::is_string))
    });
    let instance = if exact_mode {
        let mut dists = Vec::with_capacity(objs.len());
        for o in &objs {
            dists.push(if o.contains_key("family") {
                parse_family(o)?.to_rational()
            } else {
                let atoms = atom_pairs(o)?
                    .iter()
                    .map(|a| {
                        let (v, p) = pair(a)?;
                        Ok((exact_number(v)?, exact_number(p)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                RationalDistribution::new(atoms)?
            });
        }
        Instance::from_rational(dists, k)?
    } else {
        let mut dists = Vec::with_capacity(objs.len());
        for o in &objs {
            dists.push(if o.contains_key("family") {
                parse_family(o)?
            } else {
                let atoms = atom_pairs(o)?
                    .iter()
                    .map(|a| {
                        let (v, p) = pair(a)?;
                        Ok((float_number(v)?, float_number(p)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                DiscreteDistribution::new(atoms)?
            });
        }
        Instance::new(dists, k)?
    };
    instance.with_labels(labels)
}

/// The continuous families of a document whose variables are all given as
/// families, or `None` if any variable is given by atoms.
pub fn parse_families(text: &str) -> Result<Option<Vec<ContinuousFamily>>> {
    let doc: Value = serde_json::from_str(text)?;
    let vars = doc
        .get("variables")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing \"variables\" list"))?;
    let mut out = Vec::with_capacity(vars.len());
    for v in vars {
        let Some(o) = v.as_object().filter(|o| o.contains_key("family")) else {
            return Ok(None);
        };
        let mut spec = o.clone();
        for key in ["grid", "clip", "label"] {
            spec.remove(key);
        }
        let family: ContinuousFamily = serde_json::from_value(Value::Object(spec))?;
        out.push(family.validated()?);
    }
    Ok(Some(out))
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

/// The document for an instance: exact instances write every atom as a
/// decimal `"n"` or `"n/d"` string, float instances as JSON numbers.
pub fn instance_to_json(instance: &Instance) -> Value {
    let vars: Vec<Value> = (0..instance.n())
        .map(|i| {
            let atoms: Vec<Value> = match instance.exact_variables() {
                Some(ex) => ex[i]
                    .atoms()
                    .map(|(v, p)| json!([format_rational(v), format_rational(p)]))
                    .collect(),
                None => instance.variable(i).atoms().map(|(v, p)| json!([v, p])).collect(),
            };
            let mut o = Map::new();
            o.insert("atoms".into(), Value::Array(atoms));
            if let Some(label) = &instance.labels()[i] {
                o.insert("label".into(), Value::String(label.clone()));
            }
            Value::Object(o)
        })
        .collect();
    json!({"n": instance.n(), "k": instance.k(), "variables": vars})
}

pub fn write_instance(path: impl AsRef<Path>, instance: &Instance) -> Result<()> {
    let text = serde_json::to_string_pretty(&instance_to_json(instance))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
