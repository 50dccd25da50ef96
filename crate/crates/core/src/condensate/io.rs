//! Field snapshots on disk: raw little-endian `(re, im)` pairs of `f64`
//! plus a JSON sidecar describing the grid.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Grid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub grid: Grid,
    pub time: f64,
    /// What the field is (`"psi"`, `"delta_psi"`, ...).
    pub kind: String,
    pub units: String,
    pub config_hash: String,
    pub layout: String,
}

pub fn write_field(path: &Path, field: &[Complex64], sidecar: &FieldSidecar) -> Result<()> {
    if field.len() != sidecar.grid.len() {
        return Err(Error::invalid("field does not match the sidecar grid"));
    }
    let mut out = BufWriter::new(File::create(path)?);
    for c in field {
        out.write_all(&c.re.to_le_bytes())?;
        out.write_all(&c.im.to_le_bytes())?;
    }
    out.flush()?;
    let side = path.with_extension("json");
    std::fs::write(side, serde_json::to_string_pretty(sidecar)?)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<(Vec<Complex64>, FieldSidecar)> {
    let sidecar: FieldSidecar = serde_json::from_str(&std::fs::read_to_string(path.with_extension("json"))?)?;
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() != 16 * sidecar.grid.len() {
        return Err(Error::Schema(format!("{} holds {} bytes, expected {}", path.display(), bytes.len(), 16 * sidecar.grid.len())));
    }
    let field = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok((field, sidecar))
}

pub const LAYOUT: &str = "row-major, axis 0 (x) slowest, little-endian f64 (re, im) pairs";
