//! Triangle inequalities for cosine similarity and exact similarity search
//! built on them.
//!
//! - [`simcore`]: dense/sparse vectors, normalization, cosine similarity.
//! - [`bounds`]: lower and upper bounds on `sim(x, y)` from `sim(x, z)` and
//!   `sim(z, y)`, plus interval forms for subtree pruning.
//! - [`index`]: VP-tree and pivot-table indexes with a linear-scan oracle.
//! - [`analysis`]: grid studies of bound tightness and numerical agreement.
//! - [`bench`]: per-bound evaluation cost.

pub mod analysis;
pub mod bench;
pub mod bounds;
pub mod datagen;
pub mod error;
pub mod index;
pub mod io;
pub mod oracle;
pub mod simcore;

pub use bounds::{
    best_case_similarity, lower_bound, upper_bound, worst_case_similarity, BoundKind, SimInterval,
};
pub use error::{DataError, SimError};
pub use index::{Hit, Query, QueryStats};
pub use simcore::{
    cosine_similarity, normalize, similarity_to_distance, DenseVector, DistanceKind, Similarity,
    SparseVector, UnitVector, Vector,
};
