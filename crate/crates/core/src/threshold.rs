//! Otsu between-class variance over 8-bit thresholds.
//!
//! Threshold `t` splits pixels into a lower class `v <= t` and an upper
//! class `v > t`.

use crate::enhance::Histogram;
use crate::image::GrayImage;

/// `sigma_B^2(t) = w0 w1 (mu0 - mu1)^2` for every `t` in 0..=255; zero when
/// either class is empty.
pub fn between_class_variance(hist: &Histogram) -> [f64; 256] {
    let total = hist.total() as f64;
    let sum_all: f64 = hist
        .bins()
        .iter()
        .enumerate()
        .map(|(v, &c)| v as f64 * c as f64)
        .sum();
    let mut table = [0.0; 256];
    let (mut n0, mut s0) = (0u64, 0.0f64);
    for (t, &c) in hist.bins().iter().enumerate() {
        n0 += c;
        s0 += t as f64 * c as f64;
        let n1 = hist.total() - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let w0 = n0 as f64 / total;
        let w1 = n1 as f64 / total;
        let mu0 = s0 / n0 as f64;
        let mu1 = (sum_all - s0) / n1 as f64;
        table[t] = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    }
    table
}

/// Lowest threshold attaining the maximum between-class variance.
pub fn otsu_exhaustive(image: &GrayImage) -> (u8, f64) {
    let table = between_class_variance(&Histogram::of(image));
    let mut best = (0u8, table[0]);
    for (t, &v) in table.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (t as u8, v);
        }
    }
    best
}

/// Fitness over a 1-D position: `sigma_B^2(floor(x))`, with `floor(x)`
/// clamped into 0..=255.
pub fn otsu_fitness(image: &GrayImage) -> impl Fn(&[f64]) -> f64 + Send + Sync {
    let table = between_class_variance(&Histogram::of(image));
    move |x: &[f64]| table[position_to_threshold(x[0]) as usize]
}

pub fn position_to_threshold(x: f64) -> u8 {
    x.floor().clamp(0.0, 255.0) as u8
}

/// Threshold-to-zero: intensities at or below `threshold` become 0, the
/// rest are kept.
pub fn suppress_below(image: &GrayImage, threshold: u8) -> GrayImage {
    let mut lut = [0u8; 256];
    for (v, out) in lut.iter_mut().enumerate() {
        if v > threshold as usize {
            *out = v as u8;
        }
    }
    image.map_lut(&lut)
}

/// Otsu split of weighted real samples. Returns the smallest value of the
/// upper class, or `None` when all samples are equal (one class).
pub(crate) fn otsu_split_weighted(samples: &[(f64, u64)]) -> Option<f64> {
    let mut sorted: Vec<(f64, u64)> = samples.iter().copied().filter(|s| s.1 > 0).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: u64 = sorted.iter().map(|s| s.1).sum();
    let sum_all: f64 = sorted.iter().map(|s| s.0 * s.1 as f64).sum();
    let (mut n0, mut s0) = (0u64, 0.0);
    let mut best: Option<(f64, f64)> = None;
    for i in 0..sorted.len().saturating_sub(1) {
        n0 += sorted[i].1;
        s0 += sorted[i].0 * sorted[i].1 as f64;
        if sorted[i + 1].0 == sorted[i].0 {
            continue;
        }
        let n1 = total - n0;
        let (w0, w1) = (n0 as f64 / total as f64, n1 as f64 / total as f64);
        let d = s0 / n0 as f64 - (sum_all - s0) / n1 as f64;
        let var = w0 * w1 * d * d;
        if best.is_none_or(|(bv, _)| var > bv) {
            best = Some((var, sorted[i + 1].0));
        }
    }
    best.map(|(_, cut)| cut)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_valued_closed_form() {
        let img = GrayImage::from_fn(10, 10, |x, _| if x < 5 { 50 } else { 200 }).unwrap();
        let table = between_class_variance(&Histogram::of(&img));
        for (t, &v) in table.iter().enumerate() {
            if (50..200).contains(&t) {
                assert_eq!(v, 5625.0);
            } else {
                assert_eq!(v, 0.0);
            }
        }
        assert_eq!(otsu_exhaustive(&img), (50, 5625.0));
    }

    #[test]
    fn constant_is_zero_everywhere() {
        let img = GrayImage::filled(4, 4, 33).unwrap();
        let table = between_class_variance(&Histogram::of(&img));
        assert!(table.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fitness_floors_and_clamps() {
        let img = GrayImage::from_fn(10, 10, |x, _| if x < 5 { 50 } else { 200 }).unwrap();
        let f = otsu_fitness(&img);
        assert_eq!(f(&[49.99]), 0.0);
        assert_eq!(f(&[50.0]), 5625.0);
        assert_eq!(f(&[199.9]), 5625.0);
        assert_eq!(f(&[-3.0]), 0.0);
        assert_eq!(f(&[300.0]), 0.0);
    }

    #[test]
    fn suppress() {
        let img = GrayImage::new(4, 1, vec![0, 10, 11, 255]).unwrap();
        assert_eq!(suppress_below(&img, 10).data(), &[0, 0, 11, 255]);
        assert_eq!(suppress_below(&img, 255).data(), &[0, 0, 0, 0]);
    }

    #[test]
    fn weighted_split() {
        assert_eq!(otsu_split_weighted(&[(60.0, 10), (190.0, 10)]), Some(190.0));
        assert_eq!(otsu_split_weighted(&[(5.0, 3)]), None);
        assert_eq!(otsu_split_weighted(&[(5.0, 3), (5.0, 1)]), None);
        assert_eq!(
            otsu_split_weighted(&[(10.0, 5), (12.0, 5), (100.0, 5), (101.0, 5)]),
            Some(100.0)
        );
    }
}
