//! Input files: `{"lattice_data": [[a, b], …], "conformal_angles": [θ, …]}`.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::toric_data::{CombinatorialData, ConformalData};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputData {
    pub lattice_data: Vec<[i64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conformal_angles: Option<Vec<f64>>,
}

impl InputData {
    pub fn s(&self) -> CombinatorialData {
        CombinatorialData::from_pairs(&self.lattice_data)
    }

    pub fn r(&self) -> Option<ConformalData> {
        self.conformal_angles.clone().map(ConformalData::new)
    }

    /// Conformal data, or an input error naming the missing field.
    pub fn require_r(&self) -> Result<ConformalData> {
        self.r()
            .ok_or_else(|| Error::Input("/conformal_angles: required by this command".into()))
    }
}

fn at(pointer: &str, what: &str) -> Error {
    Error::Input(format!("{pointer}: {what}"))
}

/// Parse and shape-check an input document. Errors carry a JSON pointer to
/// the offending field.
pub fn parse_input(text: &str) -> Result<InputData> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Input(format!("malformed JSON: {e}")))?;
    let obj = doc.as_object().ok_or_else(|| at("", "expected an object"))?;
    if let Some(key) = obj.keys().find(|k| *k != "lattice_data" && *k != "conformal_angles") {
        return Err(at(&format!("/{key}"), "unknown field"));
    }

    let lattice = obj.get("lattice_data").ok_or_else(|| at("/lattice_data", "missing"))?;
    let lattice = lattice.as_array().ok_or_else(|| at("/lattice_data", "expected an array"))?;
    let lattice_data = lattice
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let ptr = format!("/lattice_data/{i}");
            let pair = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| at(&ptr, "expected a pair [a, b]"))?;
            let mut out = [0i64; 2];
            for (j, x) in pair.iter().enumerate() {
                out[j] = x.as_i64().ok_or_else(|| at(&format!("{ptr}/{j}"), "expected an integer"))?;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let conformal_angles = obj
        .get("conformal_angles")
        .map(|v| {
            let arr = v.as_array().ok_or_else(|| at("/conformal_angles", "expected an array"))?;
            arr.iter()
                .enumerate()
                .map(|(i, x)| {
                    x.as_f64()
                        .ok_or_else(|| at(&format!("/conformal_angles/{i}"), "expected a number"))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .transpose()?;

    if let Some(a) = &conformal_angles {
        if a.len() != lattice_data.len() {
            return Err(at(
                "/conformal_angles",
                &format!("has {} entries but lattice_data has {}", a.len(), lattice_data.len()),
            ));
        }
    }
    Ok(InputData {
        lattice_data,
        conformal_angles,
    })
}

pub fn read_input(path: &Path) -> Result<InputData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_input(&text)
}

/// `x,y,value` rows with a header.
pub fn csv_triples(header: &str, rows: impl IntoIterator<Item = (f64, f64, f64)>) -> String {
    let mut out = format!("x,y,{header}\n");
    for (x, y, v) in rows {
        out.push_str(&format!("{x},{y},{v}\n"));
    }
    out
}
