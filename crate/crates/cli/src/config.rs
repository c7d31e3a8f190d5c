//! Scenario files and `--sweep` parameter grids.

use std::path::Path;

use dispctl_core::scenario::Scenario;
use serde_json::{Map, Number, Value};

use crate::CliError;

/// Reads and validates a TOML scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let scenario: Scenario =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
    scenario.validate()?;
    Ok(scenario)
}

/// One scenario parameter swept over a list of values.
///
/// Syntax: `path=start:stop:count` for `count` evenly spaced values including
/// both ends, or `path=v1,v2,...`. `path` is a dotted key into the scenario
/// file, e.g. `T`, `s` or `stabilize.lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub path: String,
    pub values: Vec<f64>,
}

impl std::str::FromStr for Sweep {
    type Err = CliError;

    fn from_str(spec: &str) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::Config(format!("--sweep `{spec}`: {why}"));
        let (path, range) = spec.split_once('=').ok_or_else(|| bad("expected `param=range`"))?;
        let path = path.trim();
        if path.is_empty() || path.split('.').any(str::is_empty) {
            return Err(bad("parameter name is empty"));
        }
        let number = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite());
        let values = if range.contains(':') {
            let parts: Vec<&str> = range.split(':').collect();
            let [start, stop, count] = parts[..] else {
                return Err(bad("ranges are `start:stop:count`"));
            };
            let (start, stop) = number(start)
                .zip(number(stop))
                .ok_or_else(|| bad("range ends must be finite numbers"))?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| bad("count must be a positive integer"))?;
            match count {
                0 => return Err(bad("count must be a positive integer")),
                1 => vec![start],
                _ => (0..count)
                    .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                    .collect(),
            }
        } else {
            range
                .split(',')
                .map(|t| number(t).ok_or_else(|| bad("values must be finite numbers")))
                .collect::<Result<_, _>>()?
        };
        Ok(Sweep {
            path: path.to_string(),
            values,
        })
    }
}

impl Sweep {
    /// The scenario with the swept parameter set to `value`, re-validated.
    pub fn apply(&self, scenario: &Scenario, value: f64) -> Result<Scenario, CliError> {
        let mut doc = serde_json::to_value(scenario).map_err(|e| CliError::Config(e.to_string()))?;
        let mut node = &mut doc;
        let keys: Vec<&str> = self.path.split('.').collect();
        for key in &keys[..keys.len() - 1] {
            let Value::Object(map) = node else {
                return Err(CliError::Config(format!("--sweep: `{}` is not a table", key)));
            };
            node = map.entry(key.to_string()).or_insert_with(|| Value::Object(Map::new()));
        }
        let Value::Object(map) = node else {
            return Err(CliError::Config(format!("--sweep: cannot set `{}`", self.path)));
        };
        map.insert(keys[keys.len() - 1].to_string(), number_value(value));
        let swept: Scenario =
            serde_json::from_value(doc).map_err(|e| CliError::Config(format!("--sweep {}={value}: {e}", self.path)))?;
        swept.validate()?;
        Ok(swept)
    }
}

/// Integral values become JSON integers so they also fit integer fields such as `N`.
fn number_value(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < 2f64.powi(53) {
        Value::Number(Number::from(v as i64))
    } else {
        Number::from_f64(v).map_or(Value::Null, Value::Number)
    }
}
