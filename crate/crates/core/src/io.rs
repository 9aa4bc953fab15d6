//! Reading and writing embeddings, labels and pair lists.
//!
//! EMBX layout (all little-endian):
//!
//! | offset | size | field                         |
//! |--------|------|-------------------------------|
//! | 0      | 4    | magic `EMBX`                  |
//! | 4      | 4    | version, `u32`, = 1           |
//! | 8      | 8    | rows, `u64`                   |
//! | 16     | 8    | cols, `u64`                   |
//! | 24     | 8·rows·cols | `f64` values, row-major |

use std::collections::HashSet;
use std::path::Path;

use crate::eraser::ConceptLabels;
use crate::error::{Error, Result};
use crate::json::format_f64;
use crate::linalg::Matrix;

pub const EMBX_MAGIC: &[u8; 4] = b"EMBX";
pub const EMBX_VERSION: u32 = 1;
pub const EMBX_HEADER_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbeddingFileHeader {
    pub version: u32,
    pub rows: u64,
    pub cols: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmbeddingFormat {
    /// `.embx`/`.csv` extension, otherwise sniff the magic bytes.
    #[default]
    Auto,
    Embx,
    Csv,
}

impl std::str::FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "embx" => Ok(Self::Embx),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Validation(format!("unknown embedding format {other:?}"))),
        }
    }
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

fn u64_at(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

pub fn parse_embx_header(bytes: &[u8]) -> Result<EmbeddingFileHeader> {
    if bytes.len() < 4 || &bytes[..4] != EMBX_MAGIC {
        let ok = bytes.iter().zip(EMBX_MAGIC).take_while(|(a, b)| a == b).count();
        return Err(Error::at_byte(ok as u64, "missing EMBX magic"));
    }
    if bytes.len() < EMBX_HEADER_LEN {
        return Err(Error::at_byte(bytes.len() as u64, "truncated EMBX header"));
    }
    let version = u32_at(bytes, 4);
    if version != EMBX_VERSION {
        return Err(Error::at_byte(4, format!("unsupported EMBX version {version}")));
    }
    let (rows, cols) = (u64_at(bytes, 8), u64_at(bytes, 16));
    if cols == 0 && rows > 0 {
        return Err(Error::at_byte(16, "rows declared with zero columns"));
    }
    Ok(EmbeddingFileHeader { version, rows, cols })
}

pub fn parse_embx(bytes: &[u8]) -> Result<Matrix> {
    let header = parse_embx_header(bytes)?;
    let payload_len = header
        .rows
        .checked_mul(header.cols)
        .and_then(|v| v.checked_mul(8))
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| Error::at_byte(8, "declared size overflows"))?;
    let expected_end = EMBX_HEADER_LEN
        .checked_add(payload_len)
        .ok_or_else(|| Error::at_byte(8, "declared size overflows"))?;
    if bytes.len() < expected_end {
        return Err(Error::at_byte(
            bytes.len() as u64,
            format!(
                "payload ends early: header declares {}x{} ({expected_end} bytes total), file has {}",
                header.rows,
                header.cols,
                bytes.len()
            ),
        ));
    }
    if bytes.len() > expected_end {
        return Err(Error::at_byte(expected_end as u64, "trailing bytes after payload"));
    }
    let (rows, cols) = (header.rows as usize, header.cols as usize);
    let mut data = Vec::with_capacity(rows * cols);
    for (i, chunk) in bytes[EMBX_HEADER_LEN..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        if !v.is_finite() {
            return Err(Error::at_byte((EMBX_HEADER_LEN + 8 * i) as u64, format!("non-finite value {v}")));
        }
        data.push(v);
    }
    Matrix::new(rows, cols, data)
}

pub fn write_embx(m: &Matrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(EMBX_HEADER_LEN + 8 * m.data().len());
    out.extend_from_slice(EMBX_MAGIC);
    out.extend_from_slice(&EMBX_VERSION.to_le_bytes());
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for v in m.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// One row per line, comma-separated decimal or scientific floats. A first
/// line that does not parse as numbers is taken as a header.
pub fn parse_csv(bytes: &[u8]) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut data = Vec::new();
    let mut cols: Option<usize> = None;
    let mut rows = 0usize;
    let mut record = csv::ByteRecord::new();
    let mut first = true;
    loop {
        let more = reader.read_byte_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::at_line(line, e.to_string())
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line() as usize);
        let parsed: std::result::Result<Vec<f64>, usize> = record
            .iter()
            .enumerate()
            .map(|(i, field)| {
                std::str::from_utf8(field).ok().and_then(|s| s.parse::<f64>().ok()).ok_or(i)
            })
            .collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if first => {
                first = false;
                continue;
            }
            Err(field) => {
                return Err(Error::at_line(line, format!("field {} is not a number", field + 1)));
            }
        };
        first = false;
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::at_line(line, format!("field {} is not finite", pos + 1)));
        }
        match cols {
            None => cols = Some(values.len()),
            Some(c) if c != values.len() => {
                return Err(Error::at_line(line, format!("expected {c} fields, found {}", values.len())));
            }
            _ => {}
        }
        data.extend(values);
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::at_line(1, "no numeric rows"));
    }
    Matrix::new(rows, cols.unwrap_or(0), data)
}

/// Values written with 17 significant digits.
pub fn write_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn format_for(path: &Path, format: EmbeddingFormat, bytes: Option<&[u8]>) -> EmbeddingFormat {
    match format {
        EmbeddingFormat::Auto => match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("embx") => EmbeddingFormat::Embx,
            Some(e) if e.eq_ignore_ascii_case("csv") => EmbeddingFormat::Csv,
            _ if bytes.is_some_and(|b| b.starts_with(EMBX_MAGIC)) => EmbeddingFormat::Embx,
            _ if bytes.is_some() => EmbeddingFormat::Csv,
            _ => EmbeddingFormat::Embx,
        },
        f => f,
    }
}

pub fn parse_embeddings(bytes: &[u8], format: EmbeddingFormat) -> Result<Matrix> {
    match format {
        EmbeddingFormat::Embx => parse_embx(bytes),
        EmbeddingFormat::Csv => parse_csv(bytes),
        EmbeddingFormat::Auto if bytes.starts_with(EMBX_MAGIC) => parse_embx(bytes),
        EmbeddingFormat::Auto => parse_csv(bytes),
    }
}

pub fn read_embeddings(path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<Matrix> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    parse_embeddings(&bytes, format_for(path, format, Some(&bytes)))
}

/// Writes EMBX unless the path ends in `.csv` or `format` says otherwise.
pub fn write_embeddings(path: impl AsRef<Path>, m: &Matrix, format: EmbeddingFormat) -> Result<()> {
    let path = path.as_ref();
    match format_for(path, format, None) {
        EmbeddingFormat::Csv => std::fs::write(path, write_csv(m))?,
        _ => std::fs::write(path, write_embx(m))?,
    }
    Ok(())
}

fn lines(bytes: &[u8]) -> Result<Vec<&str>> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        Error::at_line(line, "invalid UTF-8")
    })?;
    let mut lines: Vec<&str> = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    Ok(lines)
}

/// One label per line; categories in order of first appearance.
pub fn parse_labels(bytes: &[u8]) -> Result<ConceptLabels> {
    let lines = lines(bytes)?;
    if lines.is_empty() {
        return Err(Error::Validation("label file is empty".into()));
    }
    let mut labels = Vec::with_capacity(lines.len());
    for (i, l) in lines.iter().enumerate() {
        let l = l.trim();
        if l.is_empty() {
            return Err(Error::at_line(i + 1, "blank label"));
        }
        labels.push(l);
    }
    Ok(ConceptLabels::from_strings(&labels))
}

pub fn write_labels(labels: &ConceptLabels) -> String {
    let mut out = String::new();
    for i in 0..labels.len() {
        out.push_str(labels.label(i));
        out.push('\n');
    }
    out
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<ConceptLabels> {
    parse_labels(&std::fs::read(path)?)
}

/// One zero-based `i,j` pair per line. Self-pairs and repeated pairs (in
/// either order) are rejected; range checks happen at evaluation time.
pub fn parse_pairs(bytes: &[u8]) -> Result<Vec<(usize, usize)>> {
    let mut seen = HashSet::new();
    let mut pairs = Vec::new();
    for (i, l) in lines(bytes)?.iter().enumerate() {
        let line = i + 1;
        let (a, b) = l.split_once(',').ok_or_else(|| Error::at_line(line, "expected \"i,j\""))?;
        let parse = |s: &str| {
            s.trim().parse::<usize>().map_err(|_| Error::at_line(line, format!("{:?} is not an index", s.trim())))
        };
        let (a, b) = (parse(a)?, parse(b)?);
        if a == b {
            return Err(Error::at_line(line, format!("self-pair ({a}, {b})")));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(Error::at_line(line, format!("duplicate pair ({a}, {b})")));
        }
        pairs.push((a, b));
    }
    Ok(pairs)
}

pub fn write_pairs(pairs: &[(usize, usize)]) -> String {
    pairs.iter().map(|(a, b)| format!("{a},{b}\n")).collect()
}

pub fn read_pairs(path: impl AsRef<Path>) -> Result<Vec<(usize, usize)>> {
    parse_pairs(&std::fs::read(path)?)
}
