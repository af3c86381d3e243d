//! Intensity histograms and global histogram equalization.

use crate::image::GrayImage;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    bins: [u64; 256],
    total: u64,
}

impl Histogram {
    pub fn of(image: &GrayImage) -> Histogram {
        let mut bins = [0u64; 256];
        for &v in image.data() {
            bins[v as usize] += 1;
        }
        Histogram {
            bins,
            total: image.len() as u64,
        }
    }

    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn cdf(&self) -> [u64; 256] {
        let mut cdf = [0u64; 256];
        let mut acc = 0;
        for (c, &b) in cdf.iter_mut().zip(&self.bins) {
            acc += b;
            *c = acc;
        }
        cdf
    }

    pub fn distinct(&self) -> usize {
        self.bins.iter().filter(|&&b| b > 0).count()
    }

    /// Equalization lookup table:
    /// `round((cdf(v) - cdf_min) / (total - cdf_min) * 255)`, half-up, in
    /// exact integer arithmetic. `None` for single-intensity images.
    pub fn equalization_lut(&self) -> Option<[u8; 256]> {
        let cdf = self.cdf();
        let cdf_min = cdf.iter().copied().find(|&c| c > 0)?;
        let span = self.total - cdf_min;
        if span == 0 {
            return None;
        }
        let mut lut = [0u8; 256];
        for (out, &c) in lut.iter_mut().zip(&cdf) {
            let num = c.saturating_sub(cdf_min) * 255;
            *out = ((2 * num + span) / (2 * span)) as u8;
        }
        Some(lut)
    }
}

pub fn histogram(image: &GrayImage) -> Histogram {
    Histogram::of(image)
}

/// Global histogram equalization. Single-intensity images come back unchanged.
///
/// With two or more distinct intensities the output spans exactly 0..=255.
pub fn equalize(image: &GrayImage) -> GrayImage {
    match Histogram::of(image).equalization_lut() {
        Some(lut) => image.map_lut(&lut),
        None => image.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let img = GrayImage::new(2, 2, vec![0, 0, 255, 255]).unwrap();
        let h = histogram(&img);
        assert_eq!(h.bins()[0], 2);
        assert_eq!(h.bins()[255], 2);
        assert_eq!(h.bins().iter().sum::<u64>(), 4);

        let h = histogram(&GrayImage::filled(10, 10, 7).unwrap());
        assert_eq!(h.bins()[7], 100);
        assert_eq!(h.distinct(), 1);
    }

    #[test]
    fn hand_cdf_example() {
        let img = GrayImage::new(4, 1, vec![52, 52, 154, 255]).unwrap();
        assert_eq!(equalize(&img).data(), &[0, 0, 128, 255]);
    }

    #[test]
    fn constant_unchanged() {
        let img = GrayImage::filled(3, 3, 90).unwrap();
        assert_eq!(equalize(&img), img);
    }

    #[test]
    fn ramp_is_fixed_point() {
        let img = GrayImage::new(16, 16, (0..=255).collect()).unwrap();
        assert_eq!(equalize(&img), img);
    }

    #[test]
    fn two_levels_go_to_extremes() {
        let img = GrayImage::new(3, 1, vec![100, 101, 101]).unwrap();
        assert_eq!(equalize(&img).data(), &[0, 255, 255]);
    }
}
