//! Spin-image kernel: converts an oriented point cloud into 2D histogram
//! descriptors.
//!
//! Iteration `i` builds the spin image of point `i`: every cloud point whose
//! normal lies within the support angle of point `i`'s normal is projected
//! into the (distance along normal, distance from normal axis) plane and
//! binned into a `W x W` counting grid. Projections falling outside the grid
//! are skipped.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workload::point_cloud::OrientedPoint;
use crate::workload::{KernelError, WorkloadKernel};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinImageParams {
    /// Histogram is `image_width x image_width` bins.
    pub image_width: u32,
    /// Edge length of one histogram bin, in model units.
    pub bin_size: f64,
    /// Maximum angle (radians) between normals for a point to contribute.
    pub support_angle: f64,
    #[serde(skip)]
    pub points: Vec<OrientedPoint>,
    /// Number of spin images to generate (the loop length); at most
    /// `points.len()`.
    pub image_count: u64,
}

impl SpinImageParams {
    pub fn validate(&self) -> Result<()> {
        if self.image_width == 0 {
            return Err(Error::InvalidWorkload("image width must be >= 1".into()));
        }
        if !(self.bin_size > 0.0) {
            return Err(Error::InvalidWorkload("bin size must be positive".into()));
        }
        if self.support_angle < 0.0 {
            return Err(Error::InvalidWorkload("support angle must be non-negative".into()));
        }
        if self.points.is_empty() {
            return Err(Error::InvalidWorkload("point cloud is empty".into()));
        }
        if self.image_count == 0 || self.image_count > self.points.len() as u64 {
            return Err(Error::InvalidWorkload(format!(
                "image count {} out of range for {} points",
                self.image_count,
                self.points.len()
            )));
        }
        for (i, p) in self.points.iter().enumerate() {
            if (p.normal_len() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidWorkload(format!(
                    "normal of point {i} is not unit length"
                )));
            }
        }
        Ok(())
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Builds the spin image of point `index` over the whole cloud.
pub fn compute_spin_image(params: &SpinImageParams, index: usize) -> Vec<u32> {
    let w = params.image_width as usize;
    let mut image = vec![0u32; w * w];
    let center = params.points[index];
    let half_width = params.image_width as f64 / 2.0;
    for other in &params.points {
        let cos_angle = dot(center.normal, other.normal).clamp(-1.0, 1.0);
        if cos_angle.acos() > params.support_angle {
            continue;
        }
        let offset = sub(other.position, center.position);
        let along = dot(center.normal, offset);
        let row = ((half_width - along) / params.bin_size).ceil();
        let perp_sq = dot(offset, offset) - along * along;
        let col = (perp_sq.max(0.0).sqrt() / params.bin_size).ceil();
        let bound = params.image_width as f64;
        if row >= 0.0 && row < bound && col >= 0.0 && col < bound {
            image[row as usize * w + col as usize] += 1;
        }
    }
    image
}

/// Counts how many cloud points pass the support-angle test for `index`,
/// split into (accepted, binned-in-bounds). Used to cross-check histogram
/// mass.
pub fn support_counts(params: &SpinImageParams, index: usize) -> (u64, u64) {
    let center = params.points[index];
    let half_width = params.image_width as f64 / 2.0;
    let bound = params.image_width as f64;
    let mut accepted = 0;
    let mut in_bounds = 0;
    for other in &params.points {
        let cos_angle = dot(center.normal, other.normal).clamp(-1.0, 1.0);
        if cos_angle.acos() > params.support_angle {
            continue;
        }
        accepted += 1;
        let offset = sub(other.position, center.position);
        let along = dot(center.normal, offset);
        let row = ((half_width - along) / params.bin_size).ceil();
        let perp_sq = dot(offset, offset) - along * along;
        let col = (perp_sq.max(0.0).sqrt() / params.bin_size).ceil();
        if row >= 0.0 && row < bound && col >= 0.0 && col < bound {
            in_bounds += 1;
        }
    }
    (accepted, in_bounds)
}

/// Spin-image loop with one result slot per image. Writing a slot twice is
/// reported as a kernel error, which doubles as an exactly-once check.
pub struct SpinImageKernel {
    params: SpinImageParams,
    images: Vec<OnceLock<Vec<u32>>>,
}

impl SpinImageKernel {
    pub fn new(params: SpinImageParams) -> Result<Self> {
        params.validate()?;
        let mut images = Vec::with_capacity(params.image_count as usize);
        images.resize_with(params.image_count as usize, OnceLock::new);
        Ok(SpinImageKernel { params, images })
    }

    pub fn params(&self) -> &SpinImageParams {
        &self.params
    }

    /// The computed images, in iteration order. Panics if an image was never
    /// executed.
    pub fn images(&self) -> Vec<&Vec<u32>> {
        self.images
            .iter()
            .enumerate()
            .map(|(i, slot)| slot.get().unwrap_or_else(|| panic!("image {i} never computed")))
            .collect()
    }

    /// Writes all histograms as CSV rows `image,row,col,count`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let w = self.params.image_width as usize;
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "image,row,col,count")?;
        for (i, image) in self.images().into_iter().enumerate() {
            for row in 0..w {
                for col in 0..w {
                    writeln!(out, "{i},{row},{col},{}", image[row * w + col])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}

impl WorkloadKernel for SpinImageKernel {
    fn len(&self) -> u64 {
        self.params.image_count
    }

    fn execute(&self, iteration: u64) -> std::result::Result<(), KernelError> {
        let slot = self
            .images
            .get(iteration as usize)
            .ok_or(KernelError::OutOfRange(iteration))?;
        let image = compute_spin_image(&self.params, iteration as usize);
        slot.set(image).map_err(|_| KernelError::DuplicateResult(iteration))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::point_cloud::generate_point_cloud;

    fn params(width: u32, bin: f64, angle: f64, points: Vec<OrientedPoint>) -> SpinImageParams {
        let image_count = points.len() as u64;
        SpinImageParams {
            image_width: width,
            bin_size: bin,
            support_angle: angle,
            points,
            image_count,
        }
    }

    #[test]
    fn self_pair_lands_on_axis_bin_when_in_bounds() {
        // For X = P the projection is (W/2 / B, 0). With B = 1 and W = 5
        // that is bin (3, 0); with B = 0.01 the row index 250 falls outside
        // the 5-bin grid and nothing is counted.
        let point = OrientedPoint { position: [0.0; 3], normal: [0.0, 0.0, 1.0] };
        let wide = params(5, 1.0, 2.0, vec![point]);
        let image = compute_spin_image(&wide, 0);
        assert_eq!(image[3 * 5], 1);
        assert_eq!(image.iter().sum::<u32>(), 1);

        let narrow = params(5, 0.01, 2.0, vec![point]);
        assert_eq!(compute_spin_image(&narrow, 0).iter().sum::<u32>(), 0);
    }

    #[test]
    fn zero_support_angle_keeps_only_parallel_normals() {
        let mk = |normal| OrientedPoint { position: [0.2, 0.2, 0.2], normal };
        let points = vec![
            mk([0.0, 0.0, 1.0]),
            mk([0.0, 0.0, 1.0]),
            mk([0.0, 1.0, 0.0]),
        ];
        let p = params(8, 1.0, 0.0, points);
        let (accepted, _) = support_counts(&p, 0);
        assert_eq!(accepted, 2);
    }

    #[test]
    fn histogram_mass_equals_in_bounds_support_hits() {
        let cloud = generate_point_cloud(200, 11);
        let p = params(6, 0.25, 2.0, cloud);
        for index in [0usize, 57, 199] {
            let image = compute_spin_image(&p, index);
            let (_, in_bounds) = support_counts(&p, index);
            assert_eq!(image.iter().map(|&c| c as u64).sum::<u64>(), in_bounds);
        }
    }

    #[test]
    fn duplicate_execution_is_reported() {
        let cloud = generate_point_cloud(10, 5);
        let kernel = SpinImageKernel::new(params(4, 0.5, 2.0, cloud)).unwrap();
        kernel.execute(3).unwrap();
        assert!(matches!(kernel.execute(3), Err(KernelError::DuplicateResult(3))));
    }

    #[test]
    fn rejects_non_unit_normals() {
        let bad = OrientedPoint { position: [0.0; 3], normal: [0.0, 0.0, 1.5] };
        assert!(SpinImageKernel::new(params(4, 0.5, 2.0, vec![bad])).is_err());
    }
}
