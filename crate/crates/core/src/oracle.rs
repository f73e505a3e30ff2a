//! Index-versus-brute-force equivalence runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datagen::random_unit_vector;
use crate::error::SimError;
use crate::index::{linear_scan, Hit, LaesaIndex, Query, QueryStats, VpTree};
use crate::simcore::{Similarity, UnitVector, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub leaf_capacity: usize,
    pub pivots: usize,
    pub k: usize,
    /// Fraction of the dataset each range query should select.
    pub match_fraction: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            leaf_capacity: 8,
            pivots: 16,
            k: 10,
            match_fraction: 0.01,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModeSummary {
    pub queries: usize,
    pub mismatches: usize,
    pub mean_sims_computed: f64,
    pub mean_nodes_pruned: f64,
    pub mean_candidates_filtered: f64,
}

impl ModeSummary {
    fn record(&mut self, stats: QueryStats, matched: bool) {
        let n = self.queries as f64;
        let fold = |mean: f64, x: usize| (mean * n + x as f64) / (n + 1.0);
        self.mean_sims_computed = fold(self.mean_sims_computed, stats.sims_computed);
        self.mean_nodes_pruned = fold(self.mean_nodes_pruned, stats.nodes_pruned);
        self.mean_candidates_filtered =
            fold(self.mean_candidates_filtered, stats.candidates_filtered);
        self.queries += 1;
        if !matched {
            self.mismatches += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub n: usize,
    pub vp_range: ModeSummary,
    pub vp_knn: ModeSummary,
    pub laesa_range: ModeSummary,
    pub laesa_knn: ModeSummary,
    /// Mean number of hits per range query.
    pub mean_range_hits: f64,
    /// Interval violations found by the post-build tree audit.
    pub audit_violations: usize,
}

impl OracleReport {
    pub fn modes(&self) -> [(&'static str, &ModeSummary); 4] {
        [
            ("vp-range", &self.vp_range),
            ("vp-knn", &self.vp_knn),
            ("laesa-range", &self.laesa_range),
            ("laesa-knn", &self.laesa_knn),
        ]
    }

    pub fn total_mismatches(&self) -> usize {
        self.modes()
            .iter()
            .map(|(_, m)| m.mismatches)
            .sum::<usize>()
            + self.audit_violations
    }

    pub fn passed(&self) -> bool {
        self.total_mismatches() == 0
    }
}

/// Queries for a dataset: random directions for dense data, sampled members
/// for sparse data.
pub fn default_queries(data: &[UnitVector], count: usize, seed: u64) -> Vec<UnitVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    match data.first().map(UnitVector::inner) {
        Some(Vector::Dense(d)) => {
            let dim = d.dim();
            (0..count)
                .map(|_| random_unit_vector(&mut rng, dim))
                .collect()
        }
        Some(Vector::Sparse(_)) => (0..count)
            .map(|_| data[rng.random_range(0..data.len())].clone())
            .collect(),
        None => Vec::new(),
    }
}

/// Threshold at which `fraction` of the dataset (at least one point) matches.
pub fn quantile_threshold(ranked: &[Hit], fraction: f64) -> Similarity {
    let want = ((ranked.len() as f64 * fraction).ceil() as usize).clamp(1, ranked.len());
    ranked[want - 1].sim
}

pub fn oracle_check(
    data: &[UnitVector],
    queries: &[UnitVector],
    config: &OracleConfig,
) -> Result<OracleReport, SimError> {
    let n = data.len();
    let tree = VpTree::build(data.to_vec(), config.leaf_capacity, config.seed)?;
    let laesa = LaesaIndex::build(data.to_vec(), config.pivots.min(n), config.seed)?;
    let k = config.k.min(n);
    let mut report = OracleReport {
        n,
        vp_range: ModeSummary::default(),
        vp_knn: ModeSummary::default(),
        laesa_range: ModeSummary::default(),
        laesa_knn: ModeSummary::default(),
        mean_range_hits: 0.0,
        audit_violations: tree.audit()?,
    };
    let mut hits_total = 0usize;
    for q in queries {
        let ranked = linear_scan(data, q, Query::Range(Similarity::MINUS_ONE))?;
        let tau = quantile_threshold(&ranked, config.match_fraction);
        let range = Query::Range(tau);
        let expected = linear_scan(data, q, range)?;
        hits_total += expected.len();

        let (got, stats) = tree.query(q, range)?;
        report.vp_range.record(stats, got == expected);
        let (got, stats) = laesa.query(q, range)?;
        report.laesa_range.record(stats, got == expected);

        let knn = Query::Knn(k);
        let expected = linear_scan(data, q, knn)?;
        let (got, stats) = tree.query(q, knn)?;
        report.vp_knn.record(stats, got == expected);
        let (got, stats) = laesa.query(q, knn)?;
        report.laesa_knn.record(stats, got == expected);
    }
    if !queries.is_empty() {
        report.mean_range_hits = hits_total as f64 / queries.len() as f64;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::random_unit_vectors;

    #[test]
    fn small_run_is_clean() {
        let data = random_unit_vectors(300, 5, 1);
        let queries = default_queries(&data, 10, 2);
        let report = oracle_check(&data, &queries, &OracleConfig::default()).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.vp_range.queries, 10);
        assert!(report.mean_range_hits >= 3.0);
    }

    #[test]
    fn quantile_picks_at_least_one() {
        let data = random_unit_vectors(50, 3, 1);
        let q = &data[0];
        let ranked = linear_scan(&data, q, Query::Range(Similarity::MINUS_ONE)).unwrap();
        assert_eq!(quantile_threshold(&ranked, 0.0), ranked[0].sim);
        assert_eq!(quantile_threshold(&ranked, 0.1), ranked[4].sim);
    }
}
