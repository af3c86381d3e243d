//! Segmentation of mesh-like tissue (lamina cribrosa beams and pores) from
//! 8-bit grayscale images.
//!
//! The chain is: à trous wavelet enhancement ([`wavelet`]), a bat-algorithm
//! search for the Otsu-optimal intensity threshold ([`bat`]), threshold-to-zero
//! and histogram equalization ([`enhance`]), an optional crop, and a
//! marker-controlled watershed of the Sobel gradient ([`watershed`]). The
//! [`metrics`] module scores a segmentation against ground truth and
//! [`phantom`] synthesizes test images with known masks.

pub mod bat;
pub mod config;
pub mod enhance;
pub mod error;
pub mod image;
pub mod metrics;
pub mod phantom;
pub mod pipeline;
pub mod pnm;
pub mod rng;
pub mod threshold;
pub mod watershed;
pub mod wavelet;

pub use error::{Error, Result};
pub use image::{BinaryMask, FloatImage, GrayImage, RgbImage};
