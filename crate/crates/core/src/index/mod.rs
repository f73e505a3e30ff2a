//! Exact cosine-similarity search.
//!
//! Two index families prune candidates with the similarity-domain triangle
//! inequality: a vantage-point tree whose children carry [`SimInterval`]s, and
//! a LAESA-style pivot table. [`linear_scan`] is the brute-force reference
//! both are checked against.
//!
//! Every result list is ordered by descending similarity with ties broken by
//! ascending id, so index and oracle answers can be compared bit-exactly.
//!
//! [`SimInterval`]: crate::bounds::SimInterval

mod laesa;
mod persist;
mod scan;
mod vptree;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::simcore::{Similarity, UnitVector, Vector};

pub use laesa::{laesa_build, LaesaIndex, PivotTable};
pub use persist::{data_checksum, SavedIndex, INDEX_FORMAT, INDEX_VERSION};
pub use scan::{linear_scan, linear_scan_knn, linear_scan_range};
pub use vptree::{vp_build, TracedHits, VpNode, VpTree};

/// A search result: dataset id and its similarity to the query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub id: usize,
    pub sim: Similarity,
}

impl Hit {
    /// Descending similarity, then ascending id.
    pub fn rank_cmp(&self, other: &Hit) -> Ordering {
        other
            .sim
            .total_cmp(&self.sim)
            .then_with(|| self.id.cmp(&other.id))
    }
}

pub(crate) fn sort_hits(hits: &mut [Hit]) {
    hits.sort_by(Hit::rank_cmp);
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryStats {
    /// Exact similarity evaluations (routing objects, pivots and candidates).
    pub sims_computed: usize,
    /// Subtrees skipped by the VP-tree.
    pub nodes_pruned: usize,
    /// Candidates eliminated by pivot bounds without verification.
    pub candidates_filtered: usize,
}

/// Range (`sim ≥ tau`) or k-nearest-neighbour request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Query {
    Range(Similarity),
    Knn(usize),
}

/// Layout facts about a dataset needed to validate queries and to bound the
/// floating-point error of computed similarities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataShape {
    /// Common length of the dense members, if any.
    pub dense_dim: Option<usize>,
    /// Largest dimensionality implied by a sparse member.
    pub sparse_dim: usize,
    /// Largest number of components touched by one dot product.
    pub max_support: usize,
    /// Largest `|‖v‖ - 1|` over the members.
    pub max_norm_dev: f64,
}

impl DataShape {
    pub fn of(data: &[UnitVector]) -> Result<Self, SimError> {
        if data.is_empty() {
            return Err(SimError::EmptyDataset);
        }
        let mut shape = DataShape {
            dense_dim: None,
            sparse_dim: 0,
            max_support: 0,
            max_norm_dev: 0.0,
        };
        for v in data {
            match v.inner() {
                Vector::Dense(d) => match shape.dense_dim {
                    None => shape.dense_dim = Some(d.dim()),
                    Some(dim) if dim != d.dim() => {
                        return Err(SimError::DimensionMismatch {
                            left: dim,
                            right: d.dim(),
                        })
                    }
                    Some(_) => {}
                },
                Vector::Sparse(s) => shape.sparse_dim = shape.sparse_dim.max(s.min_dim()),
            }
            shape.max_support = shape.max_support.max(v.inner().support());
            shape.max_norm_dev = shape.max_norm_dev.max(v.norm_deviation());
        }
        if let Some(dim) = shape.dense_dim {
            if shape.sparse_dim > dim {
                return Err(SimError::DimensionMismatch {
                    left: dim,
                    right: shape.sparse_dim,
                });
            }
        }
        Ok(shape)
    }

    pub(crate) fn check_query(&self, q: &UnitVector) -> Result<(), SimError> {
        let bad = |right| SimError::DimensionMismatch {
            left: self.dense_dim.unwrap_or(self.sparse_dim),
            right,
        };
        match q.inner() {
            Vector::Dense(d) => {
                if self.dense_dim.is_some_and(|dim| dim != d.dim()) || self.sparse_dim > d.dim() {
                    return Err(bad(d.dim()));
                }
            }
            Vector::Sparse(s) => {
                if self.dense_dim.is_some_and(|dim| s.min_dim() > dim) {
                    return Err(bad(s.min_dim()));
                }
            }
        }
        Ok(())
    }

    /// Absolute error bound on any similarity computed between the query and
    /// a member, or between two members.
    pub(crate) fn sim_error(&self, q: &UnitVector) -> f64 {
        let support = self.max_support.max(q.inner().support());
        let dev = self.max_norm_dev.max(q.norm_deviation());
        sim_error_bound(dev, support)
    }
}

/// Error of a dot product of two vectors of length `support` whose norms are
/// within `norm_dev` of 1, measured against their true cosine.
pub(crate) fn sim_error_bound(norm_dev: f64, support: usize) -> f64 {
    let u = f64::EPSILON / 2.0;
    let n = support as f64;
    // computed norm deviations are themselves rounded
    let dev = norm_dev + 2.0 * n * u;
    let gamma = 1.01 * n * u;
    (2.0 * dev + dev * dev + gamma * (1.0 + dev) * (1.0 + dev)).max(f64::EPSILON)
}

/// Bounded set of the best `k` hits seen so far.
pub(crate) struct TopK {
    k: usize,
    // max-heap on "worseness": the root is the current k-th best
    heap: BinaryHeap<Worst>,
}

struct Worst(Hit);

impl PartialEq for Worst {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Worst {}
impl PartialOrd for Worst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Worst {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.rank_cmp(&other.0)
    }
}

impl TopK {
    pub(crate) fn new(k: usize) -> Self {
        TopK {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    pub(crate) fn offer(&mut self, hit: Hit) {
        if self.heap.len() < self.k {
            self.heap.push(Worst(hit));
        } else if let Some(worst) = self.heap.peek() {
            if hit.rank_cmp(&worst.0) == Ordering::Less {
                self.heap.pop();
                self.heap.push(Worst(hit));
            }
        }
    }

    /// Similarity of the current k-th best hit, once k hits are held.
    pub(crate) fn threshold(&self) -> Option<f64> {
        if self.heap.len() == self.k {
            self.heap.peek().map(|w| w.0.sim.get())
        } else {
            None
        }
    }

    pub(crate) fn into_sorted(self) -> Vec<Hit> {
        let mut hits: Vec<Hit> = self.heap.into_iter().map(|w| w.0).collect();
        sort_hits(&mut hits);
        hits
    }
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<(), SimError> {
    if k == 0 || k > n {
        Err(SimError::BadK { k, n })
    } else {
        Ok(())
    }
}
