//! Field files: flat samples (CSV or little-endian f64) plus a JSON sidecar
//! `<path>.json` holding {"n", "kind", "zero_mean"}.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FieldKind, GridField};
use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldFormat {
    Csv,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub n: usize,
    pub kind: FieldKind,
    pub zero_mean: bool,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn row_values(field: &GridField, j: usize) -> Vec<f64> {
    let n = field.n();
    let row = &field.values()[j * n..(j + 1) * n];
    match field.kind() {
        FieldKind::Real => row.iter().map(|v| v.re).collect(),
        FieldKind::Complex => row.iter().flat_map(|v| [v.re, v.im]).collect(),
    }
}

/// Writes the samples (one grid row per CSV line, complex values as re,im
/// pairs) and the sidecar.
pub fn write_field(path: &Path, field: &GridField, format: FieldFormat) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    for j in 0..field.n() {
        let row = row_values(field, j);
        match format {
            FieldFormat::Csv => {
                let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
                writeln!(buf, "{}", line.join(","))?;
            }
            FieldFormat::Binary => row.iter().for_each(|v| buf.extend_from_slice(&v.to_le_bytes())),
        }
    }
    fs::write(path, buf)?;
    let meta = FieldMeta {
        n: field.n(),
        kind: field.kind(),
        zero_mean: field.is_zero_mean(),
    };
    fs::write(sidecar_path(path), serde_json::to_string(&meta)?)?;
    Ok(())
}

pub fn read_field(path: &Path, format: FieldFormat) -> Result<GridField> {
    let meta: FieldMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let flat: Vec<f64> = match format {
        FieldFormat::Csv => {
            let text = fs::read_to_string(path)?;
            let mut out = Vec::new();
            for tok in text
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
            {
                out.push(
                    tok.parse::<f64>()
                        .map_err(|e| LabError::config(format!("bad sample {tok:?}: {e}")))?,
                );
            }
            out
        }
        FieldFormat::Binary => {
            let bytes = fs::read(path)?;
            if bytes.len() % 8 != 0 {
                return Err(LabError::config("binary field length is not a multiple of 8"));
            }
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect()
        }
    };
    let values: Vec<Complex64> = match meta.kind {
        FieldKind::Real => flat.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        FieldKind::Complex => {
            if !flat.len().is_multiple_of(2) {
                return Err(LabError::config("complex field has an odd number of values"));
            }
            flat.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
        }
    };
    let mut field = GridField::from_values(meta.n, values, meta.kind)?;
    field.zero_mean = meta.zero_mean;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_both_formats() {
        let dir = std::env::temp_dir().join(format!("euler-lab-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let real = GridField::from_fn(16, |x, y| (x - 2.0 * y).sin() / 3.0).unwrap();
        let cplx = GridField::from_fn_complex(16, |x, y| Complex64::new(x.cos(), y.sin() * 0.1)).unwrap();
        for (name, f) in [("r", &real), ("c", &cplx)] {
            for (ext, fmt) in [("csv", FieldFormat::Csv), ("bin", FieldFormat::Binary)] {
                let path = dir.join(format!("{name}.{ext}"));
                write_field(&path, f, fmt).unwrap();
                let back = read_field(&path, fmt).unwrap();
                assert_eq!(&back, f);
            }
        }
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("c.csv.json")).unwrap()).unwrap();
        assert_eq!(
            meta,
            serde_json::json!({"n": 16, "kind": "complex", "zero_mean": false})
        );
        fs::remove_dir_all(&dir).unwrap();
    }
}
