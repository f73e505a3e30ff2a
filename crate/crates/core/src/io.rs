//! Dataset readers.
//!
//! Dense files are CSV with one vector per line. Sparse files carry one vector
//! per line as whitespace-separated `index:value` tokens with strictly
//! ascending indices (libsvm layout without the label column).

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use crate::error::{DataError, SimError};
use crate::simcore::{normalize, DenseVector, SparseVector, UnitVector, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Dense,
    Sparse,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dense" | "csv" => Ok(Format::Dense),
            "sparse" | "libsvm" => Ok(Format::Sparse),
            _ => Err(format!("unknown format `{s}` (expected dense or sparse)")),
        }
    }
}

fn parse_error(origin: &str, line: usize, message: impl Into<String>) -> DataError {
    DataError::Parse {
        path: origin.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_number(token: &str) -> Result<f64, String> {
    let v: f64 = token
        .trim()
        .parse()
        .map_err(|_| format!("invalid number `{}`", token.trim()))?;
    if !v.is_finite() {
        return Err(format!("non-finite value `{}`", token.trim()));
    }
    Ok(v)
}

/// Parses comma-separated dense components.
pub fn parse_dense(text: &str) -> Result<DenseVector, String> {
    let values = text
        .split(',')
        .map(parse_number)
        .collect::<Result<Vec<_>, _>>()?;
    DenseVector::new(values).map_err(|e| e.to_string())
}

/// Parses `index:value` tokens separated by whitespace or commas.
pub fn parse_sparse(text: &str) -> Result<SparseVector, String> {
    let mut entries = Vec::new();
    for token in text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
    {
        let (i, v) = token
            .split_once(':')
            .ok_or_else(|| format!("expected index:value, found `{token}`"))?;
        let index: u32 = i
            .trim()
            .parse()
            .map_err(|_| format!("invalid index `{i}`"))?;
        entries.push((index, parse_number(v)?));
    }
    SparseVector::new(entries).map_err(|e| match e {
        SimError::UnsortedIndices { position } => {
            format!("indices not strictly ascending at token {}", position + 1)
        }
        other => other.to_string(),
    })
}

/// Parses an inline vector, sparse if any token contains `:`.
pub fn parse_vector(text: &str) -> Result<Vector, String> {
    if text.contains(':') {
        parse_sparse(text).map(Vector::Sparse)
    } else {
        parse_dense(text).map(Vector::Dense)
    }
}

/// A parsed vector and the 1-based line it came from.
pub type Record = (usize, Vector);

/// Reads vectors from `reader`; `origin` names the source in errors.
pub fn read_vectors(
    reader: impl Read,
    format: Format,
    origin: &str,
) -> Result<Vec<Record>, DataError> {
    match format {
        Format::Dense => read_dense(reader, origin),
        Format::Sparse => read_sparse(reader, origin),
    }
}

fn read_dense(reader: impl Read, origin: &str) -> Result<Vec<Record>, DataError> {
    let mut out = Vec::new();
    let mut dim = None;
    for (n, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|source| DataError::Io {
            path: origin.to_string(),
            source,
        })?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let v = parse_dense(body).map_err(|m| parse_error(origin, n + 1, m))?;
        if *dim.get_or_insert(v.dim()) != v.dim() {
            let message = format!("expected {} components, found {}", dim.unwrap(), v.dim());
            return Err(parse_error(origin, n + 1, message));
        }
        out.push((n + 1, Vector::Dense(v)));
    }
    Ok(out)
}

fn read_sparse(reader: impl Read, origin: &str) -> Result<Vec<Record>, DataError> {
    let mut out = Vec::new();
    for (n, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|source| DataError::Io {
            path: origin.to_string(),
            source,
        })?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let v = parse_sparse(body).map_err(|m| parse_error(origin, n + 1, m))?;
        out.push((n + 1, Vector::Sparse(v)));
    }
    Ok(out)
}

pub fn read_file(path: &Path, format: Format) -> Result<Vec<Record>, DataError> {
    let origin = path.display().to_string();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: origin.clone(),
        source,
    })?;
    read_vectors(file, format, &origin)
}

/// Normalizes parsed records, citing the line of the first failure.
pub fn normalize_all(records: Vec<Record>, origin: &str) -> Result<Vec<UnitVector>, DataError> {
    records
        .into_iter()
        .map(|(line, v)| normalize(v).map_err(|e| parse_error(origin, line, e.to_string())))
        .collect()
}

/// Reads and normalizes a dataset file.
pub fn load_unit_vectors(path: &Path, format: Format) -> Result<Vec<UnitVector>, DataError> {
    normalize_all(read_file(path, format)?, &path.display().to_string())
}
