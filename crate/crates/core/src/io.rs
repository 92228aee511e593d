//! JSON constellation files.
//!
//! ```json
//! { "m": 6, "points": [[x1, x2, x3, x4], ...], "labels": [...], "metadata": {"name": "..."} }
//! ```

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::Path;

use crate::constellation::LabeledConstellation;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConstellationFile {
    m: u32,
    points: Vec<[f64; 4]>,
    labels: Vec<u32>,
    #[serde(default)]
    metadata: Map<String, Value>,
}

/// Serializes a constellation. Coordinates are written with 17 significant
/// digits so an `f64` round-trips exactly.
pub fn to_json<T: Real>(c: &LabeledConstellation<T>, metadata: &Map<String, Value>) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"m\": {},\n  \"points\": [\n", c.bits_per_symbol()));
    for (k, p) in c.points().iter().enumerate() {
        let row: Vec<String> = p.iter().map(|v| format!("{:.16e}", v.as_f64())).collect();
        let sep = if k + 1 == c.len() { "" } else { "," };
        out.push_str(&format!("    [{}]{sep}\n", row.join(", ")));
    }
    let labels: Vec<String> = c.labels().iter().map(u32::to_string).collect();
    out.push_str(&format!("  ],\n  \"labels\": [{}],\n", labels.join(", ")));
    let meta = serde_json::to_string(&Value::Object(metadata.clone())).expect("map serializes");
    out.push_str(&format!("  \"metadata\": {meta}\n}}\n"));
    out
}

/// Parses a constellation file, returning the constellation and its metadata.
pub fn from_json<T: Real>(text: &str) -> Result<(LabeledConstellation<T>, Map<String, Value>)> {
    let f: ConstellationFile = serde_json::from_str(text)?;
    if f.m == 0 || f.m > 16 || f.points.len() != 1usize << f.m {
        return Err(Error::InvalidConstellation(format!(
            "m = {} is inconsistent with {} points",
            f.m,
            f.points.len()
        )));
    }
    let points = f.points.into_iter().map(|p| p.map(T::lit)).collect();
    Ok((LabeledConstellation::new(points, f.labels)?, f.metadata))
}

pub fn read_constellation<T: Real>(path: impl AsRef<Path>) -> Result<(LabeledConstellation<T>, Map<String, Value>)> {
    from_json(&std::fs::read_to_string(path)?)
}

pub fn write_constellation<T: Real>(
    path: impl AsRef<Path>,
    c: &LabeledConstellation<T>,
    metadata: &Map<String, Value>,
) -> Result<()> {
    std::fs::write(path, to_json(c, metadata))?;
    Ok(())
}
