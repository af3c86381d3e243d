//! Row-major pixel containers shared by every stage.

use crate::error::{Error, Result};

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "width and height must be at least 1".into(),
        });
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: format!("buffer holds {len} samples"),
        });
    }
    Ok(())
}

/// Reflect-without-repeat boundary extension: `-1 -> 1`, `n -> n - 2`.
///
/// Offsets larger than `n - 1` keep bouncing, so any integer maps into range.
pub fn mirror(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut r = i.rem_euclid(period);
    if r >= n as isize {
        r = period - r;
    }
    r as usize
}

/// 8-bit single-channel raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn to_float(&self) -> FloatImage {
        FloatImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| v as f64).collect(),
        }
    }

    /// Applies a per-intensity lookup table.
    pub fn map_lut(&self, lut: &[u8; 256]) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| lut[v as usize]).collect(),
        }
    }

    /// Foreground where the intensity is strictly above `threshold`.
    pub fn threshold_above(&self, threshold: u8) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| v > threshold).collect(),
        }
    }

    /// Sub-raster of size `w`x`h` with top-left corner at (`x0`, `y0`).
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<GrayImage> {
        check_crop(self.dims(), x0, y0, w, h)?;
        let data = crop_rows(&self.data, self.width, x0, y0, w, h);
        Ok(GrayImage {
            width: w,
            height: h,
            data,
        })
    }
}

fn check_crop(dims: (usize, usize), x0: usize, y0: usize, w: usize, h: usize) -> Result<()> {
    let (width, height) = dims;
    let fits = w >= 1
        && h >= 1
        && x0.checked_add(w).is_some_and(|r| r <= width)
        && y0.checked_add(h).is_some_and(|b| b <= height);
    if fits {
        Ok(())
    } else {
        Err(Error::CropOutOfBounds {
            x0,
            y0,
            w,
            h,
            width,
            height,
        })
    }
}

fn crop_rows<T: Copy>(
    data: &[T],
    stride: usize,
    x0: usize,
    y0: usize,
    w: usize,
    h: usize,
) -> Vec<T> {
    (y0..y0 + h)
        .flat_map(|y| data[y * stride + x0..y * stride + x0 + w].iter().copied())
        .collect()
}

/// Real-valued raster for intermediate results. Values are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl FloatImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite sample {} at index {i}",
                data[i]
            )));
        }
        Ok(FloatImage {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0.0; width * height])
    }

    pub(crate) fn from_parts_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(width * height, data.len());
        FloatImage {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Affine map of `[min, max]` onto `[0, 255]`, kept in floating point.
    /// A flat image maps to all zeros.
    pub fn rescale_unit(&self) -> FloatImage {
        let (lo, hi) = self.min_max();
        let data = if hi > lo {
            let k = 255.0 / (hi - lo);
            self.data.iter().map(|&v| (v - lo) * k).collect()
        } else {
            vec![0.0; self.data.len()]
        };
        FloatImage::from_parts_unchecked(self.width, self.height, data)
    }

    /// Affine rescale onto `[0, 255]` followed by round-half-up quantization.
    pub fn to_gray_rescaled(&self) -> GrayImage {
        let scaled = self.rescale_unit();
        GrayImage {
            width: self.width,
            height: self.height,
            data: scaled
                .data
                .iter()
                .map(|&v| (v + 0.5).floor().clamp(0.0, 255.0) as u8)
                .collect(),
        }
    }
}

/// Boolean raster; `true` marks foreground (tissue).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(BinaryMask {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn invert(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|b| !b).collect(),
        }
    }

    /// 0 for background, 255 for foreground.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        }
    }

    /// Any nonzero intensity is foreground.
    pub fn from_gray(image: &GrayImage) -> BinaryMask {
        BinaryMask {
            width: image.width,
            height: image.height,
            data: image.data.iter().map(|&v| v != 0).collect(),
        }
    }

    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<BinaryMask> {
        check_crop(self.dims(), x0, y0, w, h)?;
        Ok(BinaryMask {
            width: w,
            height: h,
            data: crop_rows(&self.data, self.width, x0, y0, w, h),
        })
    }
}

/// 8-bit RGB raster, used only for overlays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(RgbImage {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[[u8; 3]] {
        &self.data
    }

    /// Gray replicated to `(v, v, v)`, boundary pixels painted `(255, 0, 0)`.
    pub fn overlay(image: &GrayImage, boundary: &BinaryMask) -> Result<RgbImage> {
        if image.dims() != boundary.dims() {
            return Err(Error::mismatch(image.dims(), boundary.dims()));
        }
        let data = image
            .data
            .iter()
            .zip(&boundary.data)
            .map(|(&v, &b)| if b { [255, 0, 0] } else { [v, v, v] })
            .collect();
        Ok(RgbImage {
            width: image.width,
            height: image.height,
            data,
        })
    }
}
