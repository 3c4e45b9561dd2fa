//! Operator descriptions as JSON documents:
//!
//! ```text
//! {"type":"diagonal","formula":"paper-example","truncation":N}
//! {"type":"diagonal","formula":"power-law","re_decay":a,"im_growth":b,"truncation":N}
//! {"type":"diagonal","eigenvalues":[[re,im],...]}
//! {"type":"matrix","entries":[[[re,im],...],...]}
//! ```
//!
//! Formula operators accept an optional `"auto_refine": bool` (default true).

use num_complex::Complex64;
use serde_json::{Map, Value};

use super::{CMatrix, DiagonalOperator, MatrixOperator, OperatorHandle, SpectrumFormula, SpectrumModel};
use crate::error::{Error, Result};

pub fn operator_from_json(text: &str) -> Result<OperatorHandle> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::config("operator", format!("invalid JSON: {e}")))?;
    operator_from_value(&value, "operator")
}

fn field<'a>(obj: &'a Map<String, Value>, prefix: &str, name: &str) -> Result<&'a Value> {
    obj.get(name)
        .ok_or_else(|| Error::config(format!("{prefix}.{name}"), "missing field"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::config(path, "expected a finite number"))
}

fn complex_pair(v: &Value, path: &str) -> Result<Complex64> {
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => Ok(Complex64::new(
            as_f64(re, &format!("{path}[0]"))?,
            as_f64(im, &format!("{path}[1]"))?,
        )),
        _ => Err(Error::config(path, "expected a [re, im] pair")),
    }
}

fn validation(path: &str, e: Error) -> Error {
    if e.is_config() {
        e
    } else {
        Error::config(path, e.to_string())
    }
}

pub fn operator_from_value(value: &Value, prefix: &str) -> Result<OperatorHandle> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::config(prefix, "expected an object"))?;
    let kind = field(obj, prefix, "type")?
        .as_str()
        .ok_or_else(|| Error::config(format!("{prefix}.type"), "expected a string"))?;
    match kind {
        "diagonal" => diagonal_from(obj, prefix).map(OperatorHandle::Diagonal),
        "matrix" => matrix_from(obj, prefix).map(OperatorHandle::Matrix),
        other => Err(Error::config(
            format!("{prefix}.type"),
            format!("unknown operator type `{other}` (expected `diagonal` or `matrix`)"),
        )),
    }
}

fn diagonal_from(obj: &Map<String, Value>, prefix: &str) -> Result<DiagonalOperator> {
    match (obj.get("formula"), obj.get("eigenvalues")) {
        (Some(_), Some(_)) => Err(Error::config(
            prefix,
            "give either `formula` or `eigenvalues`, not both",
        )),
        (None, None) => Err(Error::config(
            format!("{prefix}.formula"),
            "missing field (or give `eigenvalues`)",
        )),
        (Some(formula), None) => {
            let path = format!("{prefix}.formula");
            let name = formula
                .as_str()
                .ok_or_else(|| Error::config(&path, "expected a string"))?;
            let formula = match name {
                "paper-example" => SpectrumFormula::PaperExample,
                "power-law" => SpectrumFormula::power_law(
                    as_f64(field(obj, prefix, "re_decay")?, &format!("{prefix}.re_decay"))?,
                    as_f64(field(obj, prefix, "im_growth")?, &format!("{prefix}.im_growth"))?,
                ),
                other => {
                    return Err(Error::config(
                        path,
                        format!("unknown formula `{other}` (expected `paper-example` or `power-law`)"),
                    ))
                }
            };
            let tpath = format!("{prefix}.truncation");
            let truncation = field(obj, prefix, "truncation")?
                .as_u64()
                .filter(|n| *n >= 1)
                .ok_or_else(|| Error::config(&tpath, "expected a positive integer"))?;
            let auto_refine = match obj.get("auto_refine") {
                None => true,
                Some(v) => v.as_bool().ok_or_else(|| {
                    Error::config(format!("{prefix}.auto_refine"), "expected a boolean")
                })?,
            };
            let op = DiagonalOperator::new(SpectrumModel::Formula {
                formula,
                truncation: truncation as usize,
            })
            .map_err(|e| validation(prefix, e))?;
            Ok(op.with_auto_refine(auto_refine))
        }
        (None, Some(points)) => {
            let path = format!("{prefix}.eigenvalues");
            let arr = points
                .as_array()
                .ok_or_else(|| Error::config(&path, "expected an array of [re, im] pairs"))?;
            let eigenvalues = arr
                .iter()
                .enumerate()
                .map(|(i, v)| complex_pair(v, &format!("{path}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            DiagonalOperator::from_eigenvalues(eigenvalues).map_err(|e| validation(&path, e))
        }
    }
}

fn matrix_from(obj: &Map<String, Value>, prefix: &str) -> Result<MatrixOperator> {
    let path = format!("{prefix}.entries");
    let rows = field(obj, prefix, "entries")?
        .as_array()
        .ok_or_else(|| Error::config(&path, "expected an array of rows"))?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::config(&path, "matrix must have at least one row"));
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let rpath = format!("{path}[{i}]");
        let row = row
            .as_array()
            .ok_or_else(|| Error::config(&rpath, "expected an array of [re, im] pairs"))?;
        if row.len() != n {
            return Err(Error::config(
                &rpath,
                format!("row has {} entries, matrix must be {n}x{n}", row.len()),
            ));
        }
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = complex_pair(v, &format!("{rpath}[{j}]"))?;
        }
    }
    MatrixOperator::new(m).map_err(|e| validation(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_field(e: Error) -> String {
        match e {
            Error::Config { field, .. } => field,
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn parses_all_three_shapes() {
        let op = operator_from_json(r#"{"type":"diagonal","formula":"paper-example","truncation":5}"#).unwrap();
        assert_eq!(op.dim(), 5);
        assert!(op.as_diagonal().unwrap().auto_refine());

        let op = operator_from_json(r#"{"type":"diagonal","eigenvalues":[[-1,0],[-0.5,2]]}"#).unwrap();
        assert_eq!(op.eigenvalues()[1], Complex64::new(-0.5, 2.0));

        let op = operator_from_json(r#"{"type":"matrix","entries":[[[-1,0],[1,0]],[[0,0],[-2,0]]]}"#).unwrap();
        assert_eq!(op.dim(), 2);
    }

    #[test]
    fn diagnostics_name_the_offending_field() {
        let e = operator_from_json(r#"{"type":"diagonal","formula":"paper-example"}"#).unwrap_err();
        assert_eq!(config_field(e), "operator.truncation");

        let e = operator_from_json(r#"{"type":"matrix","entries":[[[-1,0],[1,"x"]],[[0,0],[-2,0]]]}"#).unwrap_err();
        assert_eq!(config_field(e), "operator.entries[0][1][1]");

        let e = operator_from_json(r#"{"type":"diagonal","eigenvalues":[[-1,0],[0.5,0]]}"#).unwrap_err();
        assert_eq!(config_field(e), "operator.eigenvalues");

        let e = operator_from_json(r#"{"type":"tensor"}"#).unwrap_err();
        assert_eq!(config_field(e), "operator.type");

        let e = operator_from_json("{not json").unwrap_err();
        assert_eq!(config_field(e), "operator");
    }
}
