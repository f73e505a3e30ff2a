//! C ABI over `simtri`.
//!
//! Every fallible function returns a [`SimtriStatus`] and writes its result
//! through an out-pointer, which is left untouched on failure. The message for
//! the most recent failure on the calling thread is available from
//! [`simtri_last_error_message`]. Indexes and result sets are opaque handles
//! that must be released with their matching `_free` function.
//!
//! Vectors are passed as `(pointer, length)` pairs of `double`; datasets as a
//! row-major `n x dim` matrix. Inputs need not be unit length; they are
//! normalized on entry.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use simtri::index::{Hit, LaesaIndex, Query, QueryStats, SavedIndex, VpTree};
use simtri::{
    cosine_similarity, normalize, BoundKind, DataError, DenseVector, SimError, Similarity,
    SparseVector, UnitVector, Vector,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimtriStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A similarity or threshold outside `[-1, 1]`, or NaN.
    Domain = 3,
    DimensionMismatch = 4,
    /// Zero, empty or non-finite vector.
    InvalidVector = 5,
    /// File could not be read or written.
    Io = 6,
    /// Malformed, tampered or unsupported index file.
    Format = 7,
    /// An internal panic was caught at the boundary.
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimtriBound {
    Euclidean = 0,
    EuclLb = 1,
    Arccos = 2,
    Mult = 3,
    MultVariant = 4,
    MultLb1 = 5,
    MultLb2 = 6,
}

impl From<SimtriBound> for BoundKind {
    fn from(b: SimtriBound) -> Self {
        match b {
            SimtriBound::Euclidean => BoundKind::Euclidean,
            SimtriBound::EuclLb => BoundKind::EuclLB,
            SimtriBound::Arccos => BoundKind::Arccos,
            SimtriBound::Mult => BoundKind::Mult,
            SimtriBound::MultVariant => BoundKind::MultVariant,
            SimtriBound::MultLb1 => BoundKind::MultLB1,
            SimtriBound::MultLb2 => BoundKind::MultLB2,
        }
    }
}

/// Work counters for one query.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimtriStats {
    pub sims_computed: usize,
    pub nodes_pruned: usize,
    pub candidates_filtered: usize,
}

impl From<QueryStats> for SimtriStats {
    fn from(s: QueryStats) -> Self {
        SimtriStats {
            sims_computed: s.sims_computed,
            nodes_pruned: s.nodes_pruned,
            candidates_filtered: s.candidates_filtered,
        }
    }
}

/// A VP-tree or pivot-table index over normalized vectors.
pub struct SimtriIndex {
    inner: SavedIndex,
}

/// Query answer, ordered by similarity descending then id ascending.
pub struct SimtriResults {
    hits: Vec<Hit>,
    stats: QueryStats,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SimtriStatus, String);

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let status = match e {
            SimError::Domain(_) | SimError::BadInterval { .. } => SimtriStatus::Domain,
            SimError::DimensionMismatch { .. } | SimError::DataMismatch { .. } => {
                SimtriStatus::DimensionMismatch
            }
            SimError::ZeroVector
            | SimError::EmptyVector
            | SimError::NonFinite { .. }
            | SimError::ExplicitZero { .. }
            | SimError::UnsortedIndices { .. }
            | SimError::NotUnit { .. } => SimtriStatus::InvalidVector,
            _ => SimtriStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        let status = match e {
            DataError::Io { .. } => SimtriStatus::Io,
            DataError::Sim(inner) => return inner.into(),
            _ => SimtriStatus::Format,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SimtriStatus::NullPointer, format!("{what} is null"))
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure> + UnwindSafe) -> SimtriStatus {
    match catch_unwind(f) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            SimtriStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            SimtriStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or valid for `len` reads.
unsafe fn doubles<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn dense(p: *const f64, dim: usize, what: &str) -> Result<DenseVector, Failure> {
    Ok(DenseVector::new(doubles(p, dim, what)?.to_vec())?)
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path).to_str().map(Path::new).map_err(|_| {
        Failure(
            SimtriStatus::InvalidArgument,
            "path is not valid UTF-8".into(),
        )
    })
}

unsafe fn dataset(data: *const f64, n: usize, dim: usize) -> Result<Vec<UnitVector>, Failure> {
    if n == 0 || dim == 0 {
        return Err(SimError::EmptyDataset.into());
    }
    let len = n
        .checked_mul(dim)
        .ok_or_else(|| Failure(SimtriStatus::InvalidArgument, "n * dim overflows".into()))?;
    doubles(data, len, "data")?
        .chunks_exact(dim)
        .enumerate()
        .map(|(row, values)| {
            DenseVector::new(values.to_vec())
                .and_then(normalize)
                .map_err(|e| Failure::from(e).context(&format!("row {row}")))
        })
        .collect()
}

impl Failure {
    fn context(self, at: &str) -> Failure {
        Failure(self.0, format!("{at}: {}", self.1))
    }
}

/// Message for the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn simtri_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Cosine similarity of two dense vectors of length `dim`.
///
/// # Safety
/// `a` and `b` must be valid for `dim` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn simtri_cosine_dense(
    a: *const f64,
    b: *const f64,
    dim: usize,
    out: *mut f64,
) -> SimtriStatus {
    guard(|| {
        let x = Vector::Dense(dense(a, dim, "a")?);
        let y = Vector::Dense(dense(b, dim, "b")?);
        write(out, cosine_similarity(&x, &y)?.get())
    })
}

/// Cosine similarity of two sparse vectors given as parallel index/value
/// arrays with strictly increasing indices.
///
/// # Safety
/// Each index/value array must be valid for its `nnz` reads; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn simtri_cosine_sparse(
    a_idx: *const u32,
    a_val: *const f64,
    a_nnz: usize,
    b_idx: *const u32,
    b_val: *const f64,
    b_nnz: usize,
    out: *mut f64,
) -> SimtriStatus {
    guard(|| {
        let sparse = |idx: *const u32, val: *const f64, nnz: usize| -> Result<Vector, Failure> {
            if idx.is_null() {
                return Err(null("indices"));
            }
            let idx = slice::from_raw_parts(idx, nnz);
            let val = doubles(val, nnz, "values")?;
            let entries = idx.iter().copied().zip(val.iter().copied()).collect();
            Ok(Vector::Sparse(SparseVector::new(entries)?))
        };
        let x = sparse(a_idx, a_val, a_nnz)?;
        let y = sparse(b_idx, b_val, b_nnz)?;
        write(out, cosine_similarity(&x, &y)?.get())
    })
}

/// Lower bound on `sim(x, y)` given `s1 = sim(x, z)` and `s2 = sim(z, y)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn simtri_lower_bound(
    bound: SimtriBound,
    s1: f64,
    s2: f64,
    out: *mut f64,
) -> SimtriStatus {
    guard(|| write(out, simtri::bounds::lower_bound_raw(bound.into(), s1, s2)?))
}

/// Upper bound on `sim(x, y)` given `s1 = sim(x, z)` and `s2 = sim(z, y)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn simtri_upper_bound(s1: f64, s2: f64, out: *mut f64) -> SimtriStatus {
    guard(|| write(out, simtri::bounds::upper_bound_raw(s1, s2)?))
}

/// Builds a VP-tree over a row-major `n x dim` matrix.
///
/// # Safety
/// `data` must be valid for `n * dim` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn simtri_vp_build(
    data: *const f64,
    n: usize,
    dim: usize,
    leaf_capacity: usize,
    seed: u64,
    out: *mut *mut SimtriIndex,
) -> SimtriStatus {
    guard(|| {
        let tree = VpTree::build(dataset(data, n, dim)?, leaf_capacity, seed)?;
        write(out, boxed(SavedIndex::Vp(tree)))
    })
}

/// Builds a pivot table with `pivots` farthest-first pivots.
///
/// # Safety
/// `data` must be valid for `n * dim` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn simtri_laesa_build(
    data: *const f64,
    n: usize,
    dim: usize,
    pivots: usize,
    seed: u64,
    out: *mut *mut SimtriIndex,
) -> SimtriStatus {
    guard(|| {
        let index = LaesaIndex::build(dataset(data, n, dim)?, pivots, seed)?;
        write(out, boxed(SavedIndex::Laesa(index)))
    })
}

fn boxed(inner: SavedIndex) -> *mut SimtriIndex {
    Box::into_raw(Box::new(SimtriIndex { inner }))
}

/// Loads an index written by [`simtri_index_save`] or the command-line tool.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn simtri_index_load(
    path: *const c_char,
    out: *mut *mut SimtriIndex,
) -> SimtriStatus {
    guard(|| {
        let saved = SavedIndex::load(path_arg(path)?)?;
        write(out, boxed(saved))
    })
}

/// # Safety
/// `index` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn simtri_index_save(
    index: *const SimtriIndex,
    path: *const c_char,
) -> SimtriStatus {
    guard(|| {
        let index = index.as_ref().ok_or_else(|| null("index"))?;
        Ok(index.inner.save(path_arg(path)?)?)
    })
}

/// Number of indexed vectors; 0 for a null handle.
///
/// # Safety
/// `index` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simtri_index_len(index: *const SimtriIndex) -> usize {
    index.as_ref().map_or(0, |i| i.inner.data().len())
}

unsafe fn run_query(
    index: *const SimtriIndex,
    q: *const f64,
    dim: usize,
    query: Query,
    out: *mut *mut SimtriResults,
) -> Result<(), Failure> {
    let index = index.as_ref().ok_or_else(|| null("index"))?;
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let q = normalize(dense(q, dim, "query")?)?;
    let (hits, stats) = match &index.inner {
        SavedIndex::Vp(t) => t.query(&q, query)?,
        SavedIndex::Laesa(l) => l.query(&q, query)?,
    };
    write(out, Box::into_raw(Box::new(SimtriResults { hits, stats })))
}

/// All indexed vectors with similarity at least `tau` to `q`.
///
/// # Safety
/// `index` must be a live handle, `q` valid for `dim` reads and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn simtri_index_range(
    index: *const SimtriIndex,
    q: *const f64,
    dim: usize,
    tau: f64,
    out: *mut *mut SimtriResults,
) -> SimtriStatus {
    guard(|| {
        let tau = Similarity::try_new(tau)?;
        run_query(index, q, dim, Query::Range(tau), out)
    })
}

/// The `k` indexed vectors most similar to `q`.
///
/// # Safety
/// `index` must be a live handle, `q` valid for `dim` reads and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn simtri_index_knn(
    index: *const SimtriIndex,
    q: *const f64,
    dim: usize,
    k: usize,
    out: *mut *mut SimtriResults,
) -> SimtriStatus {
    guard(|| run_query(index, q, dim, Query::Knn(k), out))
}

/// # Safety
/// `results` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simtri_results_len(results: *const SimtriResults) -> usize {
    results.as_ref().map_or(0, |r| r.hits.len())
}

/// Writes the `i`-th hit. Either output pointer may be null.
///
/// # Safety
/// `results` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn simtri_results_get(
    results: *const SimtriResults,
    i: usize,
    id: *mut usize,
    sim: *mut f64,
) -> SimtriStatus {
    guard(|| {
        let r = results.as_ref().ok_or_else(|| null("results"))?;
        let hit = r.hits.get(i).ok_or_else(|| {
            Failure(
                SimtriStatus::InvalidArgument,
                format!("position {i} out of range for {} results", r.hits.len()),
            )
        })?;
        if !id.is_null() {
            id.write(hit.id);
        }
        if !sim.is_null() {
            sim.write(hit.sim.get());
        }
        Ok(())
    })
}

/// # Safety
/// `results` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn simtri_results_stats(
    results: *const SimtriResults,
    out: *mut SimtriStats,
) -> SimtriStatus {
    guard(|| {
        let r = results.as_ref().ok_or_else(|| null("results"))?;
        write(out, r.stats.into())
    })
}

/// # Safety
/// `results` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn simtri_results_free(results: *mut SimtriResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}

/// # Safety
/// `index` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn simtri_index_free(index: *mut SimtriIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}
