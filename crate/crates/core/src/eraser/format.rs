//! JSON file format for fitted erasers.
//!
//! ```json
//! {"version":1,"dim":2,"arity":2,"erased_rank":1,"rtol":1e-10,
//!  "proj":[[..],[..]],"offset":[..],"mu":[..],"categories":["A","B"]}
//! ```

use serde::{Deserialize, Serialize};

use super::LeaceEraser;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EraserFile {
    version: u32,
    dim: usize,
    arity: usize,
    erased_rank: usize,
    rtol: f64,
    proj: Vec<Vec<f64>>,
    offset: Vec<f64>,
    mu: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    categories: Option<Vec<String>>,
}

/// Byte offset of a 1-based (line, column) position reported by serde_json.
fn byte_offset(text: &str, line: usize, column: usize) -> u64 {
    let line_start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (line_start + column.saturating_sub(1)) as u64
}

fn schema_error(msg: impl Into<String>) -> Error {
    Error::at_byte(0, msg)
}

impl LeaceEraser {
    pub fn to_json(&self) -> String {
        let file = EraserFile {
            version: FORMAT_VERSION,
            dim: self.dim(),
            arity: self.arity,
            erased_rank: self.erased_rank,
            rtol: self.rtol,
            proj: self.proj.to_rows(),
            offset: self.offset.clone(),
            mu: self.mu.clone(),
            categories: self.categories.clone(),
        };
        let mut s = crate::json::to_string_compact(&file);
        s.push('\n');
        s
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.to_json().into_bytes()
    }

    /// Parses an eraser file. Syntax errors carry the byte offset reported by
    /// the JSON parser; structural errors (wrong sizes, bad version) are
    /// reported at offset 0.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes)
            .map_err(|e| Error::at_byte(e.valid_up_to() as u64, "eraser file is not valid UTF-8"))?;
        let file: EraserFile = serde_json::from_str(text)
            .map_err(|e| Error::at_byte(byte_offset(text, e.line(), e.column()), e.to_string()))?;

        if file.version != FORMAT_VERSION {
            return Err(schema_error(format!("unsupported eraser version {}", file.version)));
        }
        let d = file.dim;
        if file.proj.len() != d || file.proj.iter().any(|r| r.len() != d) {
            return Err(schema_error(format!("proj must be {d}x{d}")));
        }
        if file.offset.len() != d || file.mu.len() != d {
            return Err(schema_error(format!("offset and mu must have length {d}")));
        }
        if file.erased_rank > d {
            return Err(schema_error(format!("erased_rank {} exceeds dim {d}", file.erased_rank)));
        }
        if !(file.rtol.is_finite() && file.rtol > 0.0) {
            return Err(schema_error("rtol must be positive"));
        }
        if let Some(cats) = &file.categories {
            if cats.len() != file.arity {
                return Err(schema_error(format!("{} categories but arity {}", cats.len(), file.arity)));
            }
        }
        let proj = Matrix::new(d, d, file.proj.into_iter().flatten().collect())
            .map_err(|e| schema_error(format!("proj: {e}")))?;
        if file.offset.iter().chain(&file.mu).any(|v| !v.is_finite()) {
            return Err(schema_error("offset and mu must be finite"));
        }
        Ok(LeaceEraser {
            proj,
            offset: file.offset,
            mu: file.mu,
            arity: file.arity,
            erased_rank: file.erased_rank,
            rtol: file.rtol,
            categories: file.categories,
        })
    }
}
