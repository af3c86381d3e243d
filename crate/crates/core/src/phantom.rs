//! Synthetic mesh phantom with known ground truth.
//!
//! The lattice has axis-aligned beams: pixel `(x, y)` is beam iff
//! `x % period < width` or `y % period < width`. Beams have intensity 200,
//! pores 50. Noise is added per pixel in row-major order as
//! `sigma * z` with `z` from [`Stream::standard_normal`], then rounded half-up
//! and clamped to `[0, 255]`.

use crate::error::{Error, Result};
use crate::image::{BinaryMask, GrayImage};
use crate::rng::Stream;

pub const BEAM_INTENSITY: u8 = 200;
pub const PORE_INTENSITY: u8 = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    pub beam_period: usize,
    pub beam_width: usize,
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            width: 256,
            height: 256,
            beam_period: 32,
            beam_width: 8,
            noise_sigma: 0.0,
            rng_seed: 1,
        }
    }
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter(
                "phantom size must be positive".into(),
            ));
        }
        if self.beam_width == 0 || self.beam_width >= self.beam_period {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= beam_width < beam_period, got width {} period {}",
                self.beam_width, self.beam_period
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise_sigma must be finite and >= 0, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }

    pub fn is_beam(&self, x: usize, y: usize) -> bool {
        x % self.beam_period < self.beam_width || y % self.beam_period < self.beam_width
    }
}

/// Returns the (noisy image, ground-truth beam mask) pair.
pub fn generate_phantom(spec: &PhantomSpec) -> Result<(GrayImage, BinaryMask)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = Stream::new(spec.rng_seed);
    let mut mask = Vec::with_capacity(w * h);
    let mut pixels = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let beam = spec.is_beam(x, y);
            let base = if beam { BEAM_INTENSITY } else { PORE_INTENSITY } as f64;
            let noisy = base + spec.noise_sigma * rng.standard_normal();
            pixels.push((noisy + 0.5).floor().clamp(0.0, 255.0) as u8);
            mask.push(beam);
        }
    }
    Ok((GrayImage::new(w, h, pixels)?, BinaryMask::new(w, h, mask)?))
}
