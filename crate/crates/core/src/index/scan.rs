use crate::error::SimError;
use crate::simcore::{Similarity, UnitVector};

use super::{check_k, sort_hits, Hit, Query, TopK};

/// Brute-force answer to `query`; the reference every index must reproduce.
pub fn linear_scan(
    data: &[UnitVector],
    q: &UnitVector,
    query: Query,
) -> Result<Vec<Hit>, SimError> {
    match query {
        Query::Range(tau) => linear_scan_range(data, q, tau),
        Query::Knn(k) => linear_scan_knn(data, q, k),
    }
}

pub fn linear_scan_range(
    data: &[UnitVector],
    q: &UnitVector,
    tau: Similarity,
) -> Result<Vec<Hit>, SimError> {
    let mut hits = Vec::new();
    for (id, x) in data.iter().enumerate() {
        let sim = q.similarity(x)?;
        if sim.get() >= tau.get() {
            hits.push(Hit { id, sim });
        }
    }
    sort_hits(&mut hits);
    Ok(hits)
}

pub fn linear_scan_knn(
    data: &[UnitVector],
    q: &UnitVector,
    k: usize,
) -> Result<Vec<Hit>, SimError> {
    check_k(k, data.len())?;
    let mut top = TopK::new(k);
    for (id, x) in data.iter().enumerate() {
        top.offer(Hit {
            id,
            sim: q.similarity(x)?,
        });
    }
    Ok(top.into_sorted())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::{normalize, DenseVector};

    fn planar(deg: f64) -> UnitVector {
        let r = deg.to_radians();
        normalize(DenseVector::new(vec![r.cos(), r.sin()]).unwrap()).unwrap()
    }

    #[test]
    fn singleton_knn() {
        let data = vec![planar(40.0)];
        let hits = linear_scan_knn(&data, &planar(0.0), 1).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].id, 0);
    }

    #[test]
    fn planar_range() {
        let data: Vec<_> = [0.0, 30.0, 60.0, 90.0].iter().map(|&d| planar(d)).collect();
        let tau = Similarity::from_degrees(35.0);
        let hits = linear_scan_range(&data, &planar(10.0), tau).unwrap();
        assert_eq!(hits.iter().map(|h| h.id).collect::<Vec<_>>(), vec![0, 1]);
        assert!((hits[0].sim.get() - 0.984807753012208).abs() < 1e-12);
        assert!((hits[1].sim.get() - 0.9396926207859084).abs() < 1e-12);
    }

    #[test]
    fn full_range_returns_everything() {
        let data: Vec<_> = (0..12).map(|i| planar(i as f64 * 30.0)).collect();
        let hits = linear_scan_range(&data, &planar(5.0), Similarity::MINUS_ONE).unwrap();
        assert_eq!(hits.len(), 12);
    }

    #[test]
    fn bad_k() {
        let data = vec![planar(0.0)];
        assert_eq!(
            linear_scan_knn(&data, &planar(0.0), 2),
            Err(SimError::BadK { k: 2, n: 1 })
        );
        assert_eq!(
            linear_scan_knn(&data, &planar(0.0), 0),
            Err(SimError::BadK { k: 0, n: 1 })
        );
    }
}
