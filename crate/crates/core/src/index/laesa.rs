//! LAESA-style pivot filtering.
//!
//! `m` pivots are drawn from the dataset by farthest-first traversal, and the
//! similarity of every object to every pivot is stored. At query time the
//! similarities between the query and the pivots bound each object's
//! similarity from above; objects whose bound falls below the threshold are
//! discarded without touching their vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::guarded_upper;
use crate::error::SimError;
use crate::simcore::{Similarity, UnitVector};

use super::{check_k, sort_hits, DataShape, Hit, Query, QueryStats, TopK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotTable {
    pivot_ids: Vec<usize>,
    /// Row-major `n × m`: `table[i * m + j] = sim(object i, pivot j)`.
    table: Vec<Similarity>,
    rows: usize,
    seed: u64,
    shape: DataShape,
}

pub fn laesa_build(data: &[UnitVector], m: usize, seed: u64) -> Result<PivotTable, SimError> {
    PivotTable::build(data, m, seed)
}

impl PivotTable {
    /// Farthest-first pivot selection from a seeded random start: each new
    /// pivot is the object whose highest similarity to the chosen pivots is
    /// lowest (ties to the smaller id).
    pub fn build(data: &[UnitVector], m: usize, seed: u64) -> Result<Self, SimError> {
        let n = data.len();
        if n == 0 {
            return Err(SimError::EmptyDataset);
        }
        if m == 0 || m > n {
            return Err(SimError::BadPivotCount { m, n });
        }
        let shape = DataShape::of(data)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pivot_ids = Vec::with_capacity(m);
        let mut columns: Vec<Vec<Similarity>> = Vec::with_capacity(m);
        let mut chosen = vec![false; n];
        let mut closest = vec![f64::NEG_INFINITY; n];
        let mut next = rng.random_range(0..n);
        loop {
            chosen[next] = true;
            pivot_ids.push(next);
            let column = similarity_column(data, next)?;
            for (c, s) in closest.iter_mut().zip(&column) {
                *c = c.max(s.get());
            }
            columns.push(column);
            if pivot_ids.len() == m {
                break;
            }
            next = (0..n)
                .filter(|&i| !chosen[i])
                .min_by(|&a, &b| closest[a].total_cmp(&closest[b]).then(a.cmp(&b)))
                .expect("m <= n leaves an unchosen object");
        }
        Ok(Self::assemble(pivot_ids, columns, n, seed, shape))
    }

    /// Table over caller-chosen pivots.
    pub fn with_pivots(data: &[UnitVector], pivot_ids: Vec<usize>) -> Result<Self, SimError> {
        let n = data.len();
        if n == 0 {
            return Err(SimError::EmptyDataset);
        }
        let m = pivot_ids.len();
        if m == 0 || m > n || pivot_ids.iter().any(|&p| p >= n) {
            return Err(SimError::BadPivotCount { m, n });
        }
        let shape = DataShape::of(data)?;
        let columns = pivot_ids
            .iter()
            .map(|&p| similarity_column(data, p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::assemble(pivot_ids, columns, n, 0, shape))
    }

    fn assemble(
        pivot_ids: Vec<usize>,
        columns: Vec<Vec<Similarity>>,
        rows: usize,
        seed: u64,
        shape: DataShape,
    ) -> Self {
        let m = pivot_ids.len();
        let mut table = Vec::with_capacity(rows * m);
        for i in 0..rows {
            table.extend(columns.iter().map(|c| c[i]));
        }
        PivotTable {
            pivot_ids,
            table,
            rows,
            seed,
            shape,
        }
    }

    pub fn pivot_ids(&self) -> &[usize] {
        &self.pivot_ids
    }

    pub fn pivot_count(&self) -> usize {
        self.pivot_ids.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn row(&self, i: usize) -> &[Similarity] {
        let m = self.pivot_count();
        &self.table[i * m..(i + 1) * m]
    }

    pub fn get(&self, i: usize, j: usize) -> Similarity {
        self.table[i * self.pivot_count() + j]
    }

    fn check_data(&self, data: &[UnitVector]) -> Result<(), SimError> {
        if data.len() != self.rows {
            return Err(SimError::DataMismatch {
                expected: self.rows,
                actual: data.len(),
            });
        }
        Ok(())
    }

    fn pivot_sims(
        &self,
        data: &[UnitVector],
        q: &UnitVector,
        stats: &mut QueryStats,
    ) -> Result<Vec<f64>, SimError> {
        self.shape.check_query(q)?;
        stats.sims_computed += self.pivot_count();
        self.pivot_ids
            .iter()
            .map(|&p| q.similarity(&data[p]).map(Similarity::get))
            .collect()
    }

    /// Tightest pivot upper bound on `sim(q, object i)`.
    fn upper(&self, i: usize, q_pivot: &[f64], err: f64) -> f64 {
        self.row(i)
            .iter()
            .zip(q_pivot)
            .map(|(s, &sq)| guarded_upper(sq, s.get(), err))
            .fold(1.0, f64::min)
    }

    pub fn query(
        &self,
        data: &[UnitVector],
        q: &UnitVector,
        query: Query,
    ) -> Result<(Vec<Hit>, QueryStats), SimError> {
        match query {
            Query::Range(tau) => self.range_query(data, q, tau),
            Query::Knn(k) => self.knn_query(data, q, k),
        }
    }

    pub fn range_query(
        &self,
        data: &[UnitVector],
        q: &UnitVector,
        tau: Similarity,
    ) -> Result<(Vec<Hit>, QueryStats), SimError> {
        self.check_data(data)?;
        let mut stats = QueryStats::default();
        let q_pivot = self.pivot_sims(data, q, &mut stats)?;
        let err = self.shape.sim_error(q);
        let mut hits = Vec::new();
        for (id, x) in data.iter().enumerate() {
            if self.upper(id, &q_pivot, err) < tau.get() {
                stats.candidates_filtered += 1;
                continue;
            }
            stats.sims_computed += 1;
            let sim = q.similarity(x)?;
            if sim.get() >= tau.get() {
                hits.push(Hit { id, sim });
            }
        }
        sort_hits(&mut hits);
        Ok((hits, stats))
    }

    /// Verifies candidates in decreasing order of their pivot bound and stops
    /// once no remaining bound can beat the current k-th best.
    pub fn knn_query(
        &self,
        data: &[UnitVector],
        q: &UnitVector,
        k: usize,
    ) -> Result<(Vec<Hit>, QueryStats), SimError> {
        self.check_data(data)?;
        check_k(k, data.len())?;
        let mut stats = QueryStats::default();
        let q_pivot = self.pivot_sims(data, q, &mut stats)?;
        let err = self.shape.sim_error(q);
        let mut order: Vec<(f64, usize)> = (0..self.rows)
            .map(|i| (self.upper(i, &q_pivot, err), i))
            .collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut top = TopK::new(k);
        for (pos, &(bound, id)) in order.iter().enumerate() {
            if top.threshold().is_some_and(|kth| bound < kth) {
                stats.candidates_filtered += order.len() - pos;
                break;
            }
            stats.sims_computed += 1;
            top.offer(Hit {
                id,
                sim: q.similarity(&data[id])?,
            });
        }
        Ok((top.into_sorted(), stats))
    }
}

fn similarity_column(data: &[UnitVector], pivot: usize) -> Result<Vec<Similarity>, SimError> {
    let p = &data[pivot];
    data.iter().map(|x| x.similarity(p)).collect()
}

/// A pivot table bundled with the data it indexes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaesaIndex {
    data: Vec<UnitVector>,
    table: PivotTable,
}

impl LaesaIndex {
    pub fn build(data: Vec<UnitVector>, m: usize, seed: u64) -> Result<Self, SimError> {
        let table = PivotTable::build(&data, m, seed)?;
        Ok(LaesaIndex { data, table })
    }

    pub(crate) fn from_parts(data: Vec<UnitVector>, table: PivotTable) -> Result<Self, SimError> {
        table.check_data(&data)?;
        Ok(LaesaIndex { data, table })
    }

    pub fn data(&self) -> &[UnitVector] {
        &self.data
    }

    pub fn table(&self) -> &PivotTable {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn query(&self, q: &UnitVector, query: Query) -> Result<(Vec<Hit>, QueryStats), SimError> {
        self.table.query(&self.data, q, query)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::{normalize, DenseVector};

    fn planar(deg: f64) -> UnitVector {
        let r = deg.to_radians();
        normalize(DenseVector::new(vec![r.cos(), r.sin()]).unwrap()).unwrap()
    }

    fn planar_set() -> Vec<UnitVector> {
        [0.0, 30.0, 60.0, 90.0].iter().map(|&d| planar(d)).collect()
    }

    #[test]
    fn full_pivot_set_is_similarity_matrix() {
        let data = planar_set();
        let pt = laesa_build(&data, 4, 5).unwrap();
        let mut pivots = pt.pivot_ids().to_vec();
        pivots.sort();
        assert_eq!(pivots, vec![0, 1, 2, 3]);
        for i in 0..4 {
            for (j, &p) in pt.pivot_ids().iter().enumerate() {
                assert_eq!(pt.get(i, j), data[i].similarity(&data[p]).unwrap());
            }
        }
    }

    #[test]
    fn single_pivot_column_is_cosines() {
        let data = planar_set();
        let pt = PivotTable::with_pivots(&data, vec![0]).unwrap();
        for (i, deg) in [0.0f64, 30.0, 60.0, 90.0].iter().enumerate() {
            assert!((pt.get(i, 0).get() - deg.to_radians().cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn planar_filtering() {
        let data = planar_set();
        let pt = PivotTable::with_pivots(&data, vec![0]).unwrap();
        let q = planar(10.0);
        let tau = Similarity::from_degrees(35.0);
        // cos 10° · cos 90° + sin 10° · sin 90° = cos 80°
        let ub = crate::bounds::upper(q.similarity(&data[0]).unwrap().get(), pt.get(3, 0).get());
        assert!((ub - 0.17364817766693041).abs() < 1e-12);
        let (hits, stats) = pt.range_query(&data, &q, tau).unwrap();
        assert_eq!(hits.iter().map(|h| h.id).collect::<Vec<_>>(), vec![0, 1]);
        assert!(stats.candidates_filtered >= 1);
        assert_eq!(stats.sims_computed, 1 + (4 - stats.candidates_filtered));
    }

    #[test]
    fn minus_one_keeps_everyone() {
        let data = planar_set();
        let pt = laesa_build(&data, 2, 1).unwrap();
        let (hits, stats) = pt
            .range_query(&data, &planar(3.0), Similarity::MINUS_ONE)
            .unwrap();
        assert_eq!(hits.len(), 4);
        assert_eq!(stats.candidates_filtered, 0);
        assert_eq!(stats.sims_computed, 2 + 4);
    }

    #[test]
    fn errors() {
        let data = planar_set();
        assert_eq!(laesa_build(&[], 1, 0), Err(SimError::EmptyDataset));
        assert_eq!(
            laesa_build(&data, 0, 0),
            Err(SimError::BadPivotCount { m: 0, n: 4 })
        );
        assert_eq!(
            laesa_build(&data, 5, 0),
            Err(SimError::BadPivotCount { m: 5, n: 4 })
        );
        let pt = laesa_build(&data, 2, 0).unwrap();
        assert_eq!(
            pt.range_query(&data[..3], &planar(0.0), Similarity::ONE),
            Err(SimError::DataMismatch {
                expected: 4,
                actual: 3
            })
        );
    }

    #[test]
    fn farthest_first_spreads_pivots() {
        let data: Vec<_> = (0..36).map(|i| planar(i as f64 * 10.0)).collect();
        let pt = laesa_build(&data, 2, 11).unwrap();
        let (a, b) = (pt.pivot_ids()[0], pt.pivot_ids()[1]);
        // second pivot is antipodal to the first
        assert_eq!((a + 18) % 36, b);
    }
}
