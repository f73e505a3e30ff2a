//! Seeded synthetic data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::simcore::{normalize, DenseVector, UnitVector};

/// Isotropic Gaussian direction in `dim` dimensions.
pub fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> UnitVector {
    loop {
        let values: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        if let Ok(u) = DenseVector::new(values).and_then(normalize) {
            return u;
        }
    }
}

/// `n` directions uniform on the unit sphere.
pub fn random_unit_vectors(n: usize, dim: usize, seed: u64) -> Vec<UnitVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_unit_vector(&mut rng, dim)).collect()
}

/// The unit vector at `degrees` in the plane.
pub fn planar(degrees: f64) -> UnitVector {
    let r = degrees.to_radians();
    normalize(DenseVector::new(vec![r.cos(), r.sin()]).expect("finite")).expect("non-zero")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_normalized() {
        let a = random_unit_vectors(20, 7, 3);
        assert_eq!(a, random_unit_vectors(20, 7, 3));
        assert!(a.iter().all(|u| u.norm_deviation() < 1e-12 && u.dim() == 7));
    }
}
