//! Vector representations and cosine similarity.
//!
//! Dense vectors are plain component lists. Sparse vectors keep `(index, value)`
//! pairs sorted by index so that the dot product is a two-cursor merge over the
//! shared support. A [`UnitVector`] is either kind, certified to have unit norm,
//! and lets similarity skip the norm division.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Maximum tolerated deviation of a certified unit vector's norm from 1.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-9;

/// Cosine similarity, always within `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Similarity(f64);

impl Similarity {
    pub const ONE: Similarity = Similarity(1.0);
    pub const MINUS_ONE: Similarity = Similarity(-1.0);

    /// Clamps `value` into `[-1, 1]`.
    ///
    /// NaN is mapped to -1 so that a corrupted value can never be mistaken for
    /// a match.
    pub fn clamped(value: f64) -> Self {
        if value.is_nan() {
            Similarity(-1.0)
        } else {
            Similarity(value.clamp(-1.0, 1.0))
        }
    }

    /// Accepts `value` only if it already lies in `[-1, 1]`.
    pub fn try_new(value: f64) -> Result<Self, SimError> {
        if (-1.0..=1.0).contains(&value) {
            Ok(Similarity(value))
        } else {
            Err(SimError::Domain(value))
        }
    }

    /// Similarity of two directions separated by `degrees`.
    pub fn from_degrees(degrees: f64) -> Self {
        Self::clamped(degrees.to_radians().cos())
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Total order used for result ranking (values are never NaN).
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl From<Similarity> for f64 {
    fn from(s: Similarity) -> f64 {
        s.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseVector {
    values: Vec<f64>,
}

impl DenseVector {
    pub fn new(values: Vec<f64>) -> Result<Self, SimError> {
        if values.is_empty() {
            return Err(SimError::EmptyVector);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SimError::NonFinite { index });
        }
        Ok(DenseVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &DenseVector) -> Result<f64, SimError> {
        if self.dim() != other.dim() {
            return Err(SimError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    fn scaled(&self, factor: f64) -> DenseVector {
        DenseVector {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Entries must be sorted strictly ascending by index, finite and non-zero.
    pub fn new(entries: Vec<(u32, f64)>) -> Result<Self, SimError> {
        for (pos, &(index, value)) in entries.iter().enumerate() {
            if !value.is_finite() {
                return Err(SimError::NonFinite {
                    index: index as usize,
                });
            }
            if value == 0.0 {
                return Err(SimError::ExplicitZero {
                    index: index as usize,
                });
            }
            if pos > 0 && entries[pos - 1].0 >= index {
                return Err(SimError::UnsortedIndices { position: pos });
            }
        }
        Ok(SparseVector { entries })
    }

    /// Drops the zero components of a dense vector.
    pub fn from_dense(dense: &DenseVector) -> Self {
        SparseVector {
            entries: dense
                .values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i as u32, *v))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    /// Number of stored (non-zero) entries.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Smallest dense dimensionality that can hold every stored index.
    pub fn min_dim(&self) -> usize {
        self.entries.last().map_or(0, |&(i, _)| i as usize + 1)
    }

    pub fn to_dense(&self, dim: usize) -> Result<DenseVector, SimError> {
        if dim < self.min_dim() {
            return Err(SimError::DimensionMismatch {
                left: self.min_dim(),
                right: dim,
            });
        }
        let mut values = vec![0.0; dim];
        for &(i, v) in &self.entries {
            values[i as usize] = v;
        }
        DenseVector::new(values)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    /// Merge-based dot product; only indices present in both vectors contribute.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        let mut sum = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    /// Dot product against a dense vector, touching only the sparse support.
    pub fn dot_dense(&self, dense: &DenseVector) -> Result<f64, SimError> {
        if self.min_dim() > dense.dim() {
            return Err(SimError::DimensionMismatch {
                left: self.min_dim(),
                right: dense.dim(),
            });
        }
        Ok(self
            .entries
            .iter()
            .map(|&(i, v)| v * dense.values[i as usize])
            .sum())
    }

    fn scaled(&self, factor: f64) -> SparseVector {
        SparseVector {
            entries: self
                .entries
                .iter()
                .map(|&(i, v)| (i, v * factor))
                .filter(|&(_, v)| v != 0.0)
                .collect(),
        }
    }
}

/// A raw input vector of either representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "repr", rename_all = "lowercase")]
pub enum Vector {
    Dense(DenseVector),
    Sparse(SparseVector),
}

impl Vector {
    pub fn norm(&self) -> f64 {
        match self {
            Vector::Dense(d) => d.norm(),
            Vector::Sparse(s) => s.norm(),
        }
    }

    /// Dense length, or the minimal dimensionality covering a sparse support.
    pub fn dim(&self) -> usize {
        match self {
            Vector::Dense(d) => d.dim(),
            Vector::Sparse(s) => s.min_dim(),
        }
    }

    /// Number of components a dot product with this vector touches.
    pub fn support(&self) -> usize {
        match self {
            Vector::Dense(d) => d.dim(),
            Vector::Sparse(s) => s.nnz(),
        }
    }

    pub fn dot(&self, other: &Vector) -> Result<f64, SimError> {
        match (self, other) {
            (Vector::Dense(a), Vector::Dense(b)) => a.dot(b),
            (Vector::Sparse(a), Vector::Sparse(b)) => Ok(a.dot(b)),
            (Vector::Sparse(s), Vector::Dense(d)) | (Vector::Dense(d), Vector::Sparse(s)) => {
                s.dot_dense(d)
            }
        }
    }

    fn scaled(&self, factor: f64) -> Vector {
        match self {
            Vector::Dense(d) => Vector::Dense(d.scaled(factor)),
            Vector::Sparse(s) => Vector::Sparse(s.scaled(factor)),
        }
    }

    fn check_finite(&self) -> Result<(), SimError> {
        // Constructors already reject non-finite values; scaling can still overflow.
        let bad = match self {
            Vector::Dense(d) => d.values.iter().position(|v| !v.is_finite()),
            Vector::Sparse(s) => s
                .entries
                .iter()
                .find(|(_, v)| !v.is_finite())
                .map(|&(i, _)| i as usize),
        };
        match bad {
            Some(index) => Err(SimError::NonFinite { index }),
            None => Ok(()),
        }
    }
}

impl From<DenseVector> for Vector {
    fn from(v: DenseVector) -> Self {
        Vector::Dense(v)
    }
}

impl From<SparseVector> for Vector {
    fn from(v: SparseVector) -> Self {
        Vector::Sparse(v)
    }
}

/// A vector whose L2 norm is within [`UNIT_NORM_TOLERANCE`] of 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitVector {
    inner: Vector,
}

impl UnitVector {
    /// Wraps an already normalized vector after checking its norm.
    pub fn certify(v: impl Into<Vector>) -> Result<Self, SimError> {
        let inner = v.into();
        let norm = inner.norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(SimError::NotUnit { norm });
        }
        Ok(UnitVector { inner })
    }

    pub fn inner(&self) -> &Vector {
        &self.inner
    }

    pub fn into_inner(self) -> Vector {
        self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// `|‖v‖ - 1|`, as computed.
    pub fn norm_deviation(&self) -> f64 {
        (self.inner.norm() - 1.0).abs()
    }

    /// Cosine similarity without the norm division.
    pub fn similarity(&self, other: &UnitVector) -> Result<Similarity, SimError> {
        Ok(Similarity::clamped(self.inner.dot(&other.inner)?))
    }
}

/// Scales `v` to unit length.
pub fn normalize(v: impl Into<Vector>) -> Result<UnitVector, SimError> {
    let v = v.into();
    v.check_finite()?;
    let norm = v.norm();
    if norm == 0.0 {
        return Err(SimError::ZeroVector);
    }
    if !norm.is_finite() {
        // Squares overflowed; rescale by the largest magnitude first.
        let peak = match &v {
            Vector::Dense(d) => d.values.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            Vector::Sparse(s) => s.entries.iter().fold(0.0f64, |m, (_, x)| m.max(x.abs())),
        };
        return normalize(v.scaled(1.0 / peak));
    }
    let unit = v.scaled(1.0 / norm);
    unit.check_finite()?;
    Ok(UnitVector { inner: unit })
}

/// Cosine similarity of two raw vectors, clamped into `[-1, 1]`.
pub fn cosine_similarity(x: &Vector, y: &Vector) -> Result<Similarity, SimError> {
    let dot = x.dot(y)?;
    let (nx, ny) = (x.norm(), y.norm());
    if nx == 0.0 || ny == 0.0 {
        return Err(SimError::ZeroVector);
    }
    Ok(Similarity::clamped(dot / (nx * ny)))
}

/// Metric distances derived from cosine similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DistanceKind {
    /// `1 - s`; not a metric.
    Cosine,
    /// `sqrt(2 - 2s)`, the Euclidean distance of the normalized vectors.
    SqrtCosine,
    /// `arccos(s)`, the angle itself.
    Arccos,
}

pub fn similarity_to_distance(kind: DistanceKind, s: Similarity) -> f64 {
    let s = s.get();
    match kind {
        DistanceKind::Cosine => 1.0 - s,
        DistanceKind::SqrtCosine => (2.0 - 2.0 * s).max(0.0).sqrt(),
        DistanceKind::Arccos => s.acos(),
    }
}
