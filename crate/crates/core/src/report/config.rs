use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::numerics::GridSpec;
use crate::operators::{operator_from_value, OperatorHandle};

/// One experiment run as read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    #[serde(default)]
    pub operator: Option<Value>,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    #[serde(default)]
    pub outputs: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment_id: &str) -> Self {
        ExperimentConfig {
            experiment_id: experiment_id.to_string(),
            operator: None,
            parameters: Map::new(),
            outputs: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::config("config", format!("invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::config("config", "expected a JSON object"))?;
        for key in obj.keys() {
            if !["experiment_id", "operator", "parameters", "outputs"].contains(&key.as_str()) {
                return Err(Error::config(key.clone(), "unknown field"));
            }
        }
        let id = obj
            .get("experiment_id")
            .ok_or_else(|| Error::config("experiment_id", "missing field"))?
            .as_str()
            .ok_or_else(|| Error::config("experiment_id", "expected a string"))?;
        let parameters = match obj.get("parameters") {
            None | Some(Value::Null) => Map::new(),
            Some(Value::Object(m)) => m.clone(),
            Some(_) => return Err(Error::config("parameters", "expected an object")),
        };
        let outputs = match obj.get("outputs") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(_) => return Err(Error::config("outputs", "expected a directory path string")),
        };
        Ok(ExperimentConfig {
            experiment_id: id.to_string(),
            operator: obj.get("operator").filter(|v| !v.is_null()).cloned(),
            parameters,
            outputs,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.parameters.insert(key.to_string(), value);
    }

    pub fn params(&self) -> Params<'_> {
        Params {
            map: &self.parameters,
        }
    }

    /// The configured operator, or `default` when none is given.
    pub fn operator_or(&self, default: Value) -> Result<(OperatorHandle, Value)> {
        let value = self.operator.clone().unwrap_or(default);
        let op = operator_from_value(&value, "operator")?;
        Ok((op, value))
    }
}

/// Typed, validated access to `parameters` with field-level diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct Params<'a> {
    map: &'a Map<String, Value>,
}

fn path(key: &str) -> String {
    format!("parameters.{key}")
}

impl Params<'_> {
    /// Rejects keys outside `allowed`, so typos do not silently fall back to defaults.
    pub fn only(&self, allowed: &[&str]) -> Result<()> {
        for key in self.map.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::config(
                    path(key),
                    format!("unknown parameter (expected one of: {})", allowed.join(", ")),
                ));
            }
        }
        Ok(())
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::config(path(key), "expected a finite number")),
        }
    }

    pub fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.f64(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::config(path(key), format!("must be positive, got {v}")))
        }
    }

    pub fn unit_interval(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.f64(key, default)?;
        if v > 0.0 && v < 1.0 {
            Ok(v)
        } else {
            Err(Error::config(path(key), format!("must lie in (0, 1), got {v}")))
        }
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .ok_or_else(|| Error::config(path(key), "expected a nonnegative integer")),
        }
    }

    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(items)) if !items.is_empty() => items
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    v.as_f64()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| Error::config(format!("{}[{i}]", path(key)), "expected a finite number"))
                })
                .collect(),
            Some(_) => Err(Error::config(path(key), "expected a nonempty array of numbers")),
        }
    }

    /// A grid given as `{"start": a, "stop": b, "points": n}`.
    pub fn grid(&self, key: &str, default: GridSpec) -> Result<GridSpec> {
        let g = match self.map.get(key) {
            None => default,
            Some(v) => serde_json::from_value::<GridSpec>(v.clone())
                .map_err(|e| Error::config(path(key), format!("expected {{start, stop, points}}: {e}")))?,
        };
        g.validate().map_err(|e| Error::config(path(key), e.to_string()))?;
        Ok(g)
    }
}
