//! Experiment configurations from a JSON file plus command-line overrides.
//!
//! Both sources are merged as JSON objects before deserializing, so a flag
//! simply replaces the field of the same name. For sweeps every field may
//! hold a list, and the grid is the cartesian product.

use std::path::{Path, PathBuf};

use clap::Args;
use dsl_core::experiment::ExperimentConfig;
use serde_json::{Map, Value};

use crate::Failure;

#[derive(Args, Clone, Debug, Default)]
pub struct ConfigArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// zygmund, flag, strong2d or control1d.
    #[arg(long)]
    pub setting: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub s: Option<String>,
    /// Sparseness, as `1/2` or `0.5`.
    #[arg(long)]
    pub eta: Option<String>,
    /// Offset seed for the Z construction.
    #[arg(long)]
    pub seed: Option<String>,
    /// Output directory. Without it results go to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Int,
    Float,
    Text,
}

/// Grid axes in sweep order.
const FIELDS: [(&str, Kind); 7] = [
    ("setting", Kind::Text),
    ("m", Kind::Int),
    ("k", Kind::Int),
    ("r", Kind::Float),
    ("s", Kind::Float),
    ("eta", Kind::Text),
    ("offset_seed", Kind::Int),
];

fn kind_of(field: &str) -> Kind {
    FIELDS.iter().find(|(f, _)| *f == field).map_or(Kind::Text, |(_, k)| *k)
}

/// `3`, `1,2,4` or `1..4` (inclusive) for integers; comma lists otherwise.
fn parse_list(field: &str, raw: &str) -> Result<Vec<Value>, Failure> {
    let bad = || Failure::usage(format!("bad value for --{field}: {raw:?}"));
    let mut out = Vec::new();
    for piece in raw.split(',').map(str::trim) {
        match kind_of(field) {
            Kind::Int => match piece.split_once("..") {
                Some((a, b)) => {
                    let a: u64 = a.parse().map_err(|_| bad())?;
                    let b: u64 = b.parse().map_err(|_| bad())?;
                    if a > b {
                        return Err(bad());
                    }
                    out.extend((a..=b).map(Value::from));
                }
                None => out.push(Value::from(piece.parse::<u64>().map_err(|_| bad())?)),
            },
            Kind::Float => {
                let x: f64 = piece.parse().map_err(|_| bad())?;
                out.push(Value::from(x));
            }
            Kind::Text => out.push(Value::from(piece)),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn read_file(path: &Path) -> Result<Map<String, Value>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(Failure::usage(format!("{}: config must be a JSON object", path.display()))),
        Err(e) => Err(Failure::usage(format!("{}: {e}", path.display()))),
    }
}

impl ConfigArgs {
    fn flags(&self) -> [(&'static str, Option<&str>); 7] {
        [
            ("setting", self.setting.as_deref()),
            ("m", self.m.as_deref()),
            ("k", self.k.as_deref()),
            ("r", self.r.as_deref()),
            ("s", self.s.as_deref()),
            ("eta", self.eta.as_deref()),
            ("offset_seed", self.seed.as_deref()),
        ]
    }

    /// File fields overridden by flags; every value is a list.
    fn merged(&self) -> Result<Map<String, Value>, Failure> {
        let mut map = match &self.config {
            Some(p) => read_file(p)?,
            None => Map::new(),
        };
        map.remove("out");
        for (field, raw) in self.flags() {
            if let Some(raw) = raw {
                map.insert(field.into(), Value::Array(parse_list(field, raw)?));
            }
        }
        for v in map.values_mut() {
            if !v.is_array() {
                *v = Value::Array(vec![v.take()]);
            }
        }
        Ok(map)
    }

    pub fn out_dir(&self) -> Result<Option<PathBuf>, Failure> {
        if self.out.is_some() {
            return Ok(self.out.clone());
        }
        let Some(p) = &self.config else { return Ok(None) };
        Ok(read_file(p)?.get("out").and_then(Value::as_str).map(PathBuf::from))
    }

    /// Exactly one configuration.
    pub fn single(&self) -> Result<ExperimentConfig, Failure> {
        let map = self.merged()?;
        let mut one = Map::new();
        for (field, v) in map {
            let Value::Array(mut vs) = v else { unreachable!() };
            if vs.len() != 1 {
                return Err(Failure::usage(format!("{field} takes a single value here")));
            }
            one.insert(field, vs.remove(0));
        }
        to_config(one)
    }

    /// The cartesian product over every listed field.
    pub fn grid(&self) -> Result<Vec<ExperimentConfig>, Failure> {
        let map = self.merged()?;
        let mut fields: Vec<(String, Vec<Value>)> = map
            .into_iter()
            .map(|(f, v)| match v {
                Value::Array(vs) => (f, vs),
                _ => unreachable!(),
            })
            .collect();
        fields.sort_by_key(|(f, _)| FIELDS.iter().position(|(g, _)| g == f).unwrap_or(FIELDS.len()));
        let mut points = vec![Map::new()];
        for (field, values) in &fields {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.insert(field.clone(), v.clone());
                        q
                    })
                })
                .collect();
        }
        points.into_iter().map(to_config).collect()
    }
}

fn to_config(map: Map<String, Value>) -> Result<ExperimentConfig, Failure> {
    let cfg: ExperimentConfig =
        serde_json::from_value(Value::Object(map)).map_err(|e| Failure::usage(format!("config: {e}")))?;
    Ok(cfg)
}
