//! Vantage-point tree over unit vectors.
//!
//! Each internal node picks a routing object uniformly at random from its
//! partition and splits the remaining points at the median similarity to it.
//! The higher-similarity ("inner") half comes first. Every child stores the
//! exact [`SimInterval`] of its members' similarities to the routing object,
//! and a query skips the child whenever the best similarity any member could
//! reach is below the threshold.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{guarded_best_case, SimInterval};
use crate::error::SimError;
use crate::simcore::{Similarity, UnitVector};

use super::{check_k, sort_hits, DataShape, Hit, Query, QueryStats, TopK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VpNode {
    Leaf {
        ids: Vec<usize>,
    },
    Internal {
        routing_id: usize,
        children: Vec<(SimInterval, VpNode)>,
    },
}

impl VpNode {
    /// Every dataset id stored in this subtree, routing objects included.
    pub fn member_ids(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_ids(&mut out);
        out
    }

    fn collect_ids(&self, out: &mut Vec<usize>) {
        match self {
            VpNode::Leaf { ids } => out.extend_from_slice(ids),
            VpNode::Internal {
                routing_id,
                children,
            } => {
                out.push(*routing_id);
                for (_, child) in children {
                    child.collect_ids(out);
                }
            }
        }
    }

    pub fn height(&self) -> usize {
        match self {
            VpNode::Leaf { .. } => 1,
            VpNode::Internal { children, .. } => {
                1 + children.iter().map(|(_, c)| c.height()).max().unwrap_or(0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VpTree {
    data: Vec<UnitVector>,
    root: VpNode,
    leaf_capacity: usize,
    seed: u64,
    shape: DataShape,
}

/// Hits, stats and the member ids of every pruned subtree.
pub type TracedHits = (Vec<Hit>, QueryStats, Vec<Vec<usize>>);

pub fn vp_build(
    data: Vec<UnitVector>,
    leaf_capacity: usize,
    seed: u64,
) -> Result<VpTree, SimError> {
    VpTree::build(data, leaf_capacity, seed)
}

impl VpTree {
    pub fn build(data: Vec<UnitVector>, leaf_capacity: usize, seed: u64) -> Result<Self, SimError> {
        if leaf_capacity == 0 {
            return Err(SimError::BadLeafCapacity);
        }
        let shape = DataShape::of(&data)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids: Vec<usize> = (0..data.len()).collect();
        let root = build_node(&data, ids, leaf_capacity, &mut rng)?;
        Ok(VpTree {
            data,
            root,
            leaf_capacity,
            seed,
            shape,
        })
    }

    pub(crate) fn from_parts(
        data: Vec<UnitVector>,
        root: VpNode,
        leaf_capacity: usize,
        seed: u64,
    ) -> Result<Self, SimError> {
        let shape = DataShape::of(&data)?;
        Ok(VpTree {
            data,
            root,
            leaf_capacity,
            seed,
            shape,
        })
    }

    pub fn data(&self) -> &[UnitVector] {
        &self.data
    }

    pub fn root(&self) -> &VpNode {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn query(&self, q: &UnitVector, query: Query) -> Result<(Vec<Hit>, QueryStats), SimError> {
        match query {
            Query::Range(tau) => self.range_query(q, tau),
            Query::Knn(k) => self.knn_query(q, k),
        }
    }

    /// All points with similarity at least `tau`.
    pub fn range_query(
        &self,
        q: &UnitVector,
        tau: Similarity,
    ) -> Result<(Vec<Hit>, QueryStats), SimError> {
        let (hits, stats, _) = self.range_search(q, tau, false)?;
        Ok((hits, stats))
    }

    /// Like [`range_query`](Self::range_query), also returning the member ids
    /// of every pruned subtree.
    pub fn range_query_traced(
        &self,
        q: &UnitVector,
        tau: Similarity,
    ) -> Result<TracedHits, SimError> {
        self.range_search(q, tau, true)
    }

    fn range_search(
        &self,
        q: &UnitVector,
        tau: Similarity,
        trace: bool,
    ) -> Result<TracedHits, SimError> {
        self.shape.check_query(q)?;
        let err = self.shape.sim_error(q);
        let mut hits = Vec::new();
        let mut stats = QueryStats::default();
        let mut pruned = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            match node {
                VpNode::Leaf { ids } => {
                    for &id in ids {
                        let sim = self.sim(q, id, &mut stats)?;
                        if sim.get() >= tau.get() {
                            hits.push(Hit { id, sim });
                        }
                    }
                }
                VpNode::Internal {
                    routing_id,
                    children,
                } => {
                    let s_qz = self.sim(q, *routing_id, &mut stats)?;
                    if s_qz.get() >= tau.get() {
                        hits.push(Hit {
                            id: *routing_id,
                            sim: s_qz,
                        });
                    }
                    // reversed so the inner child is explored first
                    for (iv, child) in children.iter().rev() {
                        if guarded_best_case(s_qz, *iv, err).get() >= tau.get() {
                            stack.push(child);
                        } else {
                            stats.nodes_pruned += 1;
                            if trace {
                                pruned.push(child.member_ids());
                            }
                        }
                    }
                }
            }
        }
        sort_hits(&mut hits);
        Ok((hits, stats, pruned))
    }

    /// The `k` most similar points, best-first by subtree priority.
    pub fn knn_query(&self, q: &UnitVector, k: usize) -> Result<(Vec<Hit>, QueryStats), SimError> {
        check_k(k, self.data.len())?;
        self.shape.check_query(q)?;
        let err = self.shape.sim_error(q);
        let mut stats = QueryStats::default();
        let mut top = TopK::new(k);
        let mut queue = BinaryHeap::new();
        let mut seq = 0usize;
        queue.push(Pending {
            bound: 1.0,
            seq,
            node: &self.root,
        });
        while let Some(Pending { bound, node, .. }) = queue.pop() {
            // strict comparison: a tie may still hide a smaller id
            if top.threshold().is_some_and(|kth| bound < kth) {
                stats.nodes_pruned += 1 + queue.len();
                break;
            }
            match node {
                VpNode::Leaf { ids } => {
                    for &id in ids {
                        let sim = self.sim(q, id, &mut stats)?;
                        top.offer(Hit { id, sim });
                    }
                }
                VpNode::Internal {
                    routing_id,
                    children,
                } => {
                    let s_qz = self.sim(q, *routing_id, &mut stats)?;
                    top.offer(Hit {
                        id: *routing_id,
                        sim: s_qz,
                    });
                    for (iv, child) in children {
                        let b = guarded_best_case(s_qz, *iv, err).get();
                        if top.threshold().is_some_and(|kth| b < kth) {
                            stats.nodes_pruned += 1;
                            continue;
                        }
                        seq += 1;
                        queue.push(Pending {
                            bound: b,
                            seq,
                            node: child,
                        });
                    }
                }
            }
        }
        Ok((top.into_sorted(), stats))
    }

    fn sim(
        &self,
        q: &UnitVector,
        id: usize,
        stats: &mut QueryStats,
    ) -> Result<Similarity, SimError> {
        stats.sims_computed += 1;
        q.similarity(&self.data[id])
    }

    /// Recomputes every member's similarity to each ancestor routing object
    /// and checks it lies in the stored interval. Returns the number of
    /// violations, zero for a sound tree.
    pub fn audit(&self) -> Result<usize, SimError> {
        let mut violations = 0;
        audit_node(&self.data, &self.root, &mut violations)?;
        Ok(violations)
    }
}

fn audit_node(data: &[UnitVector], node: &VpNode, violations: &mut usize) -> Result<(), SimError> {
    if let VpNode::Internal {
        routing_id,
        children,
    } = node
    {
        let z = &data[*routing_id];
        for (iv, child) in children {
            for id in child.member_ids() {
                if !iv.contains(z.similarity(&data[id])?) {
                    *violations += 1;
                }
            }
            audit_node(data, child, violations)?;
        }
    }
    Ok(())
}

fn build_node(
    data: &[UnitVector],
    mut ids: Vec<usize>,
    capacity: usize,
    rng: &mut ChaCha8Rng,
) -> Result<VpNode, SimError> {
    if ids.len() <= capacity {
        return Ok(VpNode::Leaf { ids });
    }
    let routing_id = ids.swap_remove(rng.random_range(0..ids.len()));
    let z = &data[routing_id];
    let mut scored = ids
        .into_iter()
        .map(|id| Ok((z.similarity(&data[id])?, id)))
        .collect::<Result<Vec<_>, SimError>>()?;
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let median = scored[(scored.len() - 1) / 2].0;
    // equals go to the lower child
    let mut split = scored.partition_point(|(s, _)| s.get() <= median.get());
    if split == scored.len() && scored.len() > 1 {
        // all similarities tie: split by position, intervals then coincide
        split = scored.len() / 2;
    }
    let inner = scored.split_off(split);
    let outer = scored;

    let mut children = Vec::with_capacity(2);
    for part in [inner, outer] {
        let Some(iv) = SimInterval::spanning(part.iter().map(|(s, _)| *s)) else {
            continue;
        };
        let child_ids = part.into_iter().map(|(_, id)| id).collect();
        children.push((iv, build_node(data, child_ids, capacity, rng)?));
    }
    Ok(VpNode::Internal {
        routing_id,
        children,
    })
}

struct Pending<'a> {
    bound: f64,
    seq: usize,
    node: &'a VpNode,
}

impl PartialEq for Pending<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending<'_> {}
impl PartialOrd for Pending<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending<'_> {
    // highest bound first, then insertion order
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::linear_scan;
    use crate::simcore::{normalize, DenseVector};

    fn planar(deg: f64) -> UnitVector {
        let r = deg.to_radians();
        normalize(DenseVector::new(vec![r.cos(), r.sin()]).unwrap()).unwrap()
    }

    fn planar_set() -> Vec<UnitVector> {
        [0.0, 30.0, 60.0, 90.0].iter().map(|&d| planar(d)).collect()
    }

    #[test]
    fn single_vector_is_a_leaf() {
        let tree = vp_build(vec![planar(0.0)], 8, 1).unwrap();
        assert_eq!(tree.root(), &VpNode::Leaf { ids: vec![0] });
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(vp_build(vec![], 4, 0), Err(SimError::EmptyDataset));
        assert_eq!(
            vp_build(vec![planar(0.0)], 0, 0),
            Err(SimError::BadLeafCapacity)
        );
    }

    #[test]
    fn planar_intervals_bracket_members() {
        let data = planar_set();
        let tree = vp_build(data.clone(), 1, 42).unwrap();
        assert_eq!(tree.audit().unwrap(), 0);
        let mut ids = tree.root().member_ids();
        ids.sort();
        assert_eq!(ids, vec![0, 1, 2, 3]);
        // hand check against recomputed pairwise cosines
        fn walk(node: &VpNode, data: &[UnitVector]) {
            if let VpNode::Internal {
                routing_id,
                children,
            } = node
            {
                assert!(!children.is_empty());
                for (iv, child) in children {
                    for id in child.member_ids() {
                        let s = data[*routing_id].similarity(&data[id]).unwrap();
                        assert!(iv.lo().get() <= s.get() && s.get() <= iv.hi().get());
                    }
                    walk(child, data);
                }
            }
        }
        walk(tree.root(), &data);
    }

    #[test]
    fn planar_range_and_knn() {
        let tree = vp_build(planar_set(), 1, 42).unwrap();
        let q = planar(10.0);
        let (hits, stats) = tree
            .range_query(&q, Similarity::from_degrees(35.0))
            .unwrap();
        assert_eq!(hits.iter().map(|h| h.id).collect::<Vec<_>>(), vec![0, 1]);
        assert!((hits[0].sim.get() - 0.984807753012208).abs() < 1e-12);
        assert!((hits[1].sim.get() - 0.9396926207859084).abs() < 1e-12);
        assert!(stats.sims_computed <= 4);

        let (knn, _) = tree.knn_query(&q, 2).unwrap();
        assert_eq!(knn.iter().map(|h| h.id).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(
            tree.knn_query(&q, 5).unwrap_err(),
            SimError::BadK { k: 5, n: 4 }
        );
    }

    #[test]
    fn minus_one_returns_everything() {
        let data: Vec<_> = (0..50).map(|i| planar(i as f64 * 7.3)).collect();
        let tree = vp_build(data, 2, 3).unwrap();
        let (hits, stats) = tree
            .range_query(&planar(1.0), Similarity::MINUS_ONE)
            .unwrap();
        assert_eq!(hits.len(), 50);
        assert_eq!(stats.nodes_pruned, 0);
    }

    #[test]
    fn duplicates_and_ties() {
        let mut data: Vec<_> = (0..20).map(|_| planar(15.0)).collect();
        data.extend((0..20).map(|i| planar(i as f64 * 10.0)));
        let tree = vp_build(data.clone(), 3, 9).unwrap();
        assert_eq!(tree.audit().unwrap(), 0);
        let q = planar(15.0);
        for k in [1, 5, 21, 40] {
            let (hits, _) = tree.knn_query(&q, k).unwrap();
            assert_eq!(hits, linear_scan(&data, &q, Query::Knn(k)).unwrap());
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let data: Vec<_> = (0..64).map(|i| planar(i as f64 * 5.1)).collect();
        let a = vp_build(data.clone(), 2, 17).unwrap();
        let b = vp_build(data, 2, 17).unwrap();
        assert_eq!(a, b);
    }
}
