//! Quartic Mandelbrot set kernel.
//!
//! Pixel `counter` maps to row `counter / W`, column `counter mod W`, and a
//! complex point `c` inside the configured domain. The orbit `z <- z^4 + c`
//! starting at 0 is iterated until it leaves the radius-2 disk or the
//! iteration budget is exhausted; the per-pixel result is the iteration
//! count, with `max_iterations` marking points inside the set.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU32, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workload::{KernelError, WorkloadKernel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MandelbrotParams {
    /// Image width in pixels; the loop has `width * width` iterations.
    pub width: u32,
    /// Conversion threshold: orbits surviving this many iterations count as
    /// inside the set.
    pub max_iterations: u32,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for MandelbrotParams {
    /// Desk-scale defaults: the quartic set fits inside |c| <= 2, so the
    /// domain is the square [-2, 2] x [-2, 2].
    fn default() -> Self {
        MandelbrotParams {
            width: 256,
            max_iterations: 100,
            x_min: -2.0,
            x_max: 2.0,
            y_min: -2.0,
            y_max: 2.0,
        }
    }
}

impl MandelbrotParams {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 {
            return Err(Error::InvalidWorkload("image width must be >= 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidWorkload("iteration budget must be >= 1".into()));
        }
        if !(self.x_min < self.x_max) || !(self.y_min < self.y_max) {
            return Err(Error::InvalidWorkload("empty complex domain".into()));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> u64 {
        self.width as u64 * self.width as u64
    }
}

/// Iteration count for one pixel: `max_iterations` means the orbit never
/// escaped (the pixel is inside the set).
pub fn escape_iterations(params: &MandelbrotParams, counter: u64) -> u32 {
    let w = params.width as u64;
    let x = counter / w;
    let y = counter % w;
    let c_re = params.x_min + (x as f64 / params.width as f64) * (params.x_max - params.x_min);
    let c_im = params.y_min + (y as f64 / params.width as f64) * (params.y_max - params.y_min);
    let mut z_re = 0.0f64;
    let mut z_im = 0.0f64;
    let mut k = 0u32;
    while k < params.max_iterations && z_re * z_re + z_im * z_im < 4.0 {
        // z^4 + c via two squarings.
        let sq_re = z_re * z_re - z_im * z_im;
        let sq_im = 2.0 * z_re * z_im;
        z_re = sq_re * sq_re - sq_im * sq_im + c_re;
        z_im = 2.0 * sq_re * sq_im + c_im;
        k += 1;
    }
    k
}

/// Mandelbrot loop with a shared pixel buffer. Each iteration owns exactly
/// one pixel slot, so concurrent execution of distinct iterations is safe.
pub struct MandelbrotKernel {
    params: MandelbrotParams,
    pixels: Vec<AtomicU32>,
}

impl MandelbrotKernel {
    pub fn new(params: MandelbrotParams) -> Result<Self> {
        params.validate()?;
        let n = params.pixel_count() as usize;
        let mut pixels = Vec::with_capacity(n);
        pixels.resize_with(n, || AtomicU32::new(0));
        Ok(MandelbrotKernel { params, pixels })
    }

    pub fn params(&self) -> &MandelbrotParams {
        &self.params
    }

    /// Snapshot of the pixel buffer (escape iteration counts).
    pub fn pixel_values(&self) -> Vec<u32> {
        self.pixels.iter().map(|p| p.load(Ordering::Relaxed)).collect()
    }

    /// Writes the buffer as a binary PPM: inside pixels black, escaped
    /// pixels shaded blue by how quickly they escaped.
    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        write_ppm(&self.params, &self.pixel_values(), path)
    }
}

impl WorkloadKernel for MandelbrotKernel {
    fn len(&self) -> u64 {
        self.params.pixel_count()
    }

    fn execute(&self, iteration: u64) -> std::result::Result<(), KernelError> {
        let slot = self
            .pixels
            .get(iteration as usize)
            .ok_or(KernelError::OutOfRange(iteration))?;
        slot.store(escape_iterations(&self.params, iteration), Ordering::Relaxed);
        Ok(())
    }
}

pub fn write_ppm(params: &MandelbrotParams, values: &[u32], path: &Path) -> Result<()> {
    let w = params.width as usize;
    if values.len() != w * w {
        return Err(Error::InvalidWorkload(format!(
            "pixel buffer has {} values, expected {}",
            values.len(),
            w * w
        )));
    }
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P6\n{w} {w}\n255\n")?;
    for row in 0..w {
        for col in 0..w {
            let k = values[row * w + col];
            let rgb = if k >= params.max_iterations {
                [0u8, 0, 0]
            } else {
                let shade = 55 + (200 * k / params.max_iterations) as u8;
                [0, 0, shade]
            };
            out.write_all(&rgb)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_pixel_is_inside() {
        // With the symmetric default domain, pixel (W/2, W/2) maps to c = 0
        // and the orbit stays at the fixed point forever.
        let params = MandelbrotParams::default();
        let counter = (params.width as u64 / 2) * params.width as u64 + params.width as u64 / 2;
        assert_eq!(escape_iterations(&params, counter), params.max_iterations);
    }

    #[test]
    fn far_exterior_escapes_within_two_iterations() {
        // |c| > 2 fails the radius test as soon as z picks up c.
        let params = MandelbrotParams {
            width: 4,
            x_min: 4.0,
            x_max: 8.0,
            y_min: 4.0,
            y_max: 8.0,
            ..MandelbrotParams::default()
        };
        for counter in 0..params.pixel_count() {
            assert!(escape_iterations(&params, counter) <= 2);
        }
    }

    #[test]
    fn buffer_is_symmetric_under_conjugation() {
        // Power-of-two width keeps the row/column fractions exact, so the
        // grid points for y and W-y are exact complex conjugates and the
        // orbit arithmetic mirrors bit for bit.
        let params = MandelbrotParams { width: 64, ..MandelbrotParams::default() };
        let kernel = MandelbrotKernel::new(params).unwrap();
        for i in 0..kernel.len() {
            kernel.execute(i).unwrap();
        }
        let values = kernel.pixel_values();
        let w = params.width as u64;
        for x in 0..w {
            for y in 1..w {
                let a = values[(x * w + y) as usize];
                let b = values[(x * w + (w - y)) as usize];
                assert_eq!(a, b, "pixel ({x},{y}) vs ({x},{})", w - y);
            }
        }
    }

    #[test]
    fn out_of_range_iteration_is_rejected() {
        let kernel = MandelbrotKernel::new(MandelbrotParams { width: 2, ..Default::default() })
            .unwrap();
        assert!(matches!(kernel.execute(4), Err(KernelError::OutOfRange(4))));
    }
}
