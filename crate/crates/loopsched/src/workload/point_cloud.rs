//! Synthetic oriented point clouds for the spin-image workload.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};

/// A 3D point with a unit surface normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedPoint {
    pub position: [f64; 3],
    pub normal: [f64; 3],
}

impl OrientedPoint {
    pub fn normal_len(&self) -> f64 {
        self.normal.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Seeded uniform points in the unit cube with uniformly distributed unit
/// normals. Deterministic for a given seed.
pub fn generate_point_cloud(count: usize, seed: u64) -> Vec<OrientedPoint> {
    assert!(count >= 1, "point cloud needs at least one point");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let position = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
            let normal: [f64; 3] = UnitSphere.sample(&mut rng);
            OrientedPoint { position, normal }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_cloud_has_unit_normal() {
        let cloud = generate_point_cloud(1, 7);
        assert_eq!(cloud.len(), 1);
        assert!((cloud[0].normal_len() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn same_seed_reproduces_cloud() {
        assert_eq!(generate_point_cloud(64, 42), generate_point_cloud(64, 42));
        assert_ne!(generate_point_cloud(64, 42), generate_point_cloud(64, 43));
    }

    #[test]
    fn all_normals_are_unit_length() {
        for point in generate_point_cloud(1000, 3) {
            assert!((point.normal_len() - 1.0).abs() <= 1e-9);
            for c in point.position {
                assert!((0.0..1.0).contains(&c));
            }
        }
    }
}
