//! Isotropic undecimated wavelet transform (starlet / à trous).
//!
//! Each level smooths the previous approximation with the B3-spline kernel
//! `[1, 4, 6, 4, 1] / 16`, applied separably along rows then columns, with
//! `2^(j-1) - 1` zeros ("holes") inserted between taps at level `j`. The
//! detail plane is the difference of successive approximations, so the
//! coarsest approximation plus all details telescopes back to the input.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::image::{mirror, FloatImage, GrayImage};

pub const B3_KERNEL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Scale subset used when no selection is configured.
pub const DEFAULT_KEPT_SCALES: [usize; 2] = [2, 3];

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    smooth: FloatImage,
    details: Vec<FloatImage>,
}

impl WaveletPyramid {
    pub fn new(smooth: FloatImage, details: Vec<FloatImage>) -> Result<Self> {
        if details.is_empty() {
            return Err(Error::InvalidParameter(
                "pyramid needs at least one level".into(),
            ));
        }
        if let Some(d) = details.iter().find(|d| d.dims() != smooth.dims()) {
            return Err(Error::mismatch(smooth.dims(), d.dims()));
        }
        Ok(WaveletPyramid { smooth, details })
    }

    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.smooth.dims()
    }

    /// Coarsest approximation `c_J`.
    pub fn smooth(&self) -> &FloatImage {
        &self.smooth
    }

    /// Detail planes `w_1..w_J`, fine to coarse.
    pub fn details(&self) -> &[FloatImage] {
        &self.details
    }

    /// Detail plane for 1-based scale index `j`.
    pub fn detail(&self, j: usize) -> Option<&FloatImage> {
        j.checked_sub(1).and_then(|i| self.details.get(i))
    }

    /// Replaces each detail plane not in `keep` with zeros.
    pub fn retain_scales(&self, keep: &ScaleSelection) -> WaveletPyramid {
        let (w, h) = self.dims();
        let details = self
            .details
            .iter()
            .enumerate()
            .map(|(i, d)| {
                if keep.contains(i + 1) {
                    d.clone()
                } else {
                    FloatImage::from_parts_unchecked(w, h, vec![0.0; w * h])
                }
            })
            .collect();
        WaveletPyramid {
            smooth: self.smooth.clone(),
            details,
        }
    }
}

/// Non-empty set of 1-based scale indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleSelection {
    kept: BTreeSet<usize>,
}

impl ScaleSelection {
    pub fn new(scales: impl IntoIterator<Item = usize>) -> Result<Self> {
        let kept: BTreeSet<usize> = scales.into_iter().collect();
        if kept.is_empty() {
            return Err(Error::InvalidParameter("scale selection is empty".into()));
        }
        if kept.contains(&0) {
            return Err(Error::InvalidParameter("scale indices start at 1".into()));
        }
        Ok(ScaleSelection { kept })
    }

    pub fn all(levels: usize) -> Result<Self> {
        Self::new(1..=levels)
    }

    pub fn contains(&self, j: usize) -> bool {
        self.kept.contains(&j)
    }

    pub fn scales(&self) -> impl Iterator<Item = usize> + '_ {
        self.kept.iter().copied()
    }

    pub fn validate_for(&self, levels: usize) -> Result<()> {
        match self.kept.iter().find(|&&j| j > levels) {
            Some(j) => Err(Error::InvalidParameter(format!(
                "scale {j} exceeds decomposition depth {levels}"
            ))),
            None => Ok(()),
        }
    }
}

impl Default for ScaleSelection {
    fn default() -> Self {
        ScaleSelection {
            kept: DEFAULT_KEPT_SCALES.into_iter().collect(),
        }
    }
}

/// Smallest side length accepted for a `levels`-deep decomposition.
pub fn min_side(levels: usize) -> usize {
    (1usize << (levels - 1)) * 4 + 1
}

/// One separable B3 smoothing pass with tap spacing `step`.
pub(crate) fn smooth_step(src: &[f64], width: usize, height: usize, step: usize) -> Vec<f64> {
    let taps: Vec<(isize, f64)> = (-2isize..=2)
        .map(|k| (k * step as isize, B3_KERNEL[(k + 2) as usize]))
        .collect();
    let mut rows = vec![0.0; src.len()];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..width {
            rows[y * width + x] = taps
                .iter()
                .map(|&(off, w)| w * row[mirror(x as isize + off, width)])
                .sum();
        }
    }
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = taps
                .iter()
                .map(|&(off, w)| w * rows[mirror(y as isize + off, height) * width + x])
                .sum();
        }
    }
    out
}

/// Decomposes a real-valued image into `levels` detail planes plus a residual.
pub fn iuwt_decompose_float(image: &FloatImage, levels: usize) -> Result<WaveletPyramid> {
    let (w, h) = image.dims();
    if levels == 0 {
        return Err(Error::InvalidParameter("levels must be at least 1".into()));
    }
    if levels > 30 || w < min_side(levels) || h < min_side(levels) {
        return Err(Error::InvalidDimensions {
            width: w,
            height: h,
            reason: format!(
                "{levels} levels need at least {} pixels per side",
                if levels > 30 {
                    usize::MAX
                } else {
                    min_side(levels)
                }
            ),
        });
    }
    let mut current = image.data().to_vec();
    let mut details = Vec::with_capacity(levels);
    for j in 1..=levels {
        let next = smooth_step(&current, w, h, 1 << (j - 1));
        let detail = current.iter().zip(&next).map(|(a, b)| a - b).collect();
        details.push(FloatImage::from_parts_unchecked(w, h, detail));
        current = next;
    }
    Ok(WaveletPyramid {
        smooth: FloatImage::from_parts_unchecked(w, h, current),
        details,
    })
}

pub fn iuwt_decompose(image: &GrayImage, levels: usize) -> Result<WaveletPyramid> {
    iuwt_decompose_float(&image.to_float(), levels)
}

/// `c_J + sum_j w_j`.
pub fn iuwt_reconstruct(pyramid: &WaveletPyramid) -> FloatImage {
    let mut acc = pyramid.smooth.data().to_vec();
    for d in &pyramid.details {
        for (a, v) in acc.iter_mut().zip(d.data()) {
            *a += v;
        }
    }
    let (w, h) = pyramid.dims();
    FloatImage::from_parts_unchecked(w, h, acc)
}

/// Residual plus the selected detail planes, min-max rescaled to 8 bits
/// with round-half-up. A flat sum yields an all-zero image.
pub fn enhance_scales(pyramid: &WaveletPyramid, selection: &ScaleSelection) -> Result<GrayImage> {
    selection.validate_for(pyramid.levels())?;
    Ok(iuwt_reconstruct(&pyramid.retain_scales(selection)).to_gray_rescaled())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_has_zero_details() {
        let img = GrayImage::filled(20, 20, 100).unwrap();
        let p = iuwt_decompose(&img, 3).unwrap();
        for d in p.details() {
            assert!(d.data().iter().all(|&v| v == 0.0));
        }
        assert!(p.smooth().data().iter().all(|&v| v == 100.0));
    }

    #[test]
    fn too_small_is_rejected() {
        let img = GrayImage::filled(8, 40, 1).unwrap();
        assert!(iuwt_decompose(&img, 1).is_ok());
        assert!(iuwt_decompose(&img, 2).is_err());
        assert!(iuwt_decompose(&img, 0).is_err());
        assert_eq!(min_side(1), 5);
        assert_eq!(min_side(3), 17);
    }

    #[test]
    fn impulse_center_detail() {
        let img = GrayImage::from_fn(9, 9, |x, y| if x == 4 && y == 4 { 255 } else { 0 }).unwrap();
        let p = iuwt_decompose(&img, 1).unwrap();
        let expect = 255.0 * (1.0 - (6.0f64 / 16.0).powi(2));
        assert!((p.detail(1).unwrap().get(4, 4) - expect).abs() < 1e-12);
    }

    #[test]
    fn zeroed_details_reconstruct_to_smooth() {
        let img = GrayImage::from_fn(17, 17, |x, y| (x * 13 + y * 7) as u8).unwrap();
        let p = iuwt_decompose(&img, 2).unwrap();
        let none = WaveletPyramid::new(
            p.smooth().clone(),
            vec![FloatImage::zeros(17, 17).unwrap(); 2],
        )
        .unwrap();
        assert_eq!(iuwt_reconstruct(&none), *p.smooth());
    }

    #[test]
    fn full_selection_of_full_range_image_is_identity() {
        let img = GrayImage::from_fn(32, 32, |x, y| ((x * 37 + y * 91 + 1) % 256) as u8)
            .unwrap()
            .into_data();
        let mut data = img;
        data[0] = 0;
        data[1] = 255;
        let img = GrayImage::new(32, 32, data).unwrap();
        assert!(img.data().contains(&0) && img.data().contains(&255));
        let p = iuwt_decompose(&img, 3).unwrap();
        let out = enhance_scales(&p, &ScaleSelection::all(3).unwrap()).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn constant_input_enhances_to_zero() {
        let img = GrayImage::filled(20, 20, 77).unwrap();
        let p = iuwt_decompose(&img, 3).unwrap();
        let out = enhance_scales(&p, &ScaleSelection::default()).unwrap();
        assert!(out.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn selection_validation() {
        assert!(ScaleSelection::new([]).is_err());
        assert!(ScaleSelection::new([0, 1]).is_err());
        let img = GrayImage::filled(20, 20, 1).unwrap();
        let p = iuwt_decompose(&img, 2).unwrap();
        assert!(enhance_scales(&p, &ScaleSelection::new([3]).unwrap()).is_err());
    }
}
