//! `{"rows": r, "cols": c, "data": [[re, im], ...]}` in row-major order.

use std::fs;
use std::path::Path;

use qcorr::{Complex64, ComplexMatrix};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.to_row_major().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, CliError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(CliError::Parse("rows and cols must be positive".into()));
        }
        if self.data.len() != self.rows * self.cols {
            return Err(CliError::Parse(format!(
                "data has {} entries, expected rows*cols = {}",
                self.data.len(),
                self.rows * self.cols
            )));
        }
        let data = self.data.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        ComplexMatrix::from_row_major(self.rows, self.cols, data).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("plain numbers serialize")
    }
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, CliError> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    file.to_matrix()
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| match e {
        CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn render(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("Value always serializes");
    s.push('\n');
    s
}

pub fn matrix_value(m: &ComplexMatrix) -> Value {
    MatrixFile::from_matrix(m).to_value()
}

pub fn complex_value(z: Complex64) -> Value {
    serde_json::json!([z.re, z.im])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let m = ComplexMatrix::from_fn(3, 2, |i, j| {
            Complex64::new(0.1 * (i as f64) + 1.0 / 3.0, -(j as f64) / 7.0 + 1e-300)
        });
        let text = render(&matrix_value(&m));
        let back = parse_matrix(&text).unwrap();
        assert_eq!(back.to_row_major(), m.to_row_major());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(parse_matrix(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).is_err());
        assert!(parse_matrix(r#"{"rows":0,"cols":0,"data":[]}"#).is_err());
        assert!(parse_matrix(r#"{"rows":1,"cols":1,"data":[[1,0,0]]}"#).is_err());
        assert!(parse_matrix(r#"{"rows":1,"cols":1,"data":[[1,0]],"x":1}"#).is_err());
        assert!(parse_matrix("not json").is_err());
    }

    #[test]
    fn keys_are_sorted() {
        let text = render(&serde_json::json!({"zeta": 1, "alpha": 2}));
        assert!(text.find("alpha").unwrap() < text.find("zeta").unwrap());
        assert!(text.contains("\n  \"alpha\""));
    }
}
