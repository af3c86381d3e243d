//! Sobel gradient, h-minima suppression and priority-flood watershed.
//!
//! All neighborhoods are 4-connected.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::error::{Error, Result};
use crate::image::{mirror, BinaryMask, FloatImage, GrayImage};
use crate::threshold::otsu_split_weighted;

pub const RIDGE: u32 = 0;

/// Default h-minima depth, in units of a gradient rescaled onto 0..=255.
pub const DEFAULT_H_MIN: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    basins: u32,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 || width * height != labels.len() {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: format!("{} labels supplied", labels.len()),
            });
        }
        let basins = labels.iter().copied().max().unwrap_or(0);
        Ok(LabelMap {
            width,
            height,
            labels,
            basins,
        })
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

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Number of catchment basins `K`.
    pub fn basin_count(&self) -> u32 {
        self.basins
    }

    pub fn ridge_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == RIDGE).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WatershedParams {
    pub h_min: f64,
}

impl Default for WatershedParams {
    fn default() -> Self {
        WatershedParams {
            h_min: DEFAULT_H_MIN,
        }
    }
}

/// How basins are turned into foreground and background.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasinClassifier {
    /// Otsu split of pixel-weighted basin means.
    #[default]
    Otsu,
    /// Basins whose mean intensity exceeds the given threshold.
    Fixed(u8),
}

fn neighbors4(i: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (i % w, i / w);
    [
        (y > 0).then(|| i - w),
        (x > 0).then(|| i - 1),
        (x + 1 < w).then(|| i + 1),
        (y + 1 < h).then(|| i + w),
    ]
    .into_iter()
    .flatten()
}

/// `sqrt(Gx^2 + Gy^2)` with 3x3 Sobel kernels and mirrored borders.
pub fn gradient_magnitude(image: &GrayImage) -> Result<FloatImage> {
    let (w, h) = image.dims();
    if w < 3 || h < 3 {
        return Err(Error::InvalidDimensions {
            width: w,
            height: h,
            reason: "gradient needs at least 3x3 pixels".into(),
        });
    }
    let px = |x: isize, y: isize| image.get(mirror(x, w), mirror(y, h)) as f64;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1))
                - (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
            let gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1))
                - (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    FloatImage::new(w, h, out)
}

#[derive(PartialEq)]
struct Entry {
    value: f64,
    seq: u64,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // BinaryHeap is a max-heap; reverse so the lowest (value, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reconstruction by erosion of `surface + h` over `surface`: every regional
/// minimum shallower than `h` is filled.
pub fn h_minima(surface: &FloatImage, h: f64) -> Result<FloatImage> {
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "h must be finite and >= 0, got {h}"
        )));
    }
    let (w, ht) = surface.dims();
    let floor = surface.data();
    let mut level: Vec<f64> = floor.iter().map(|v| v + h).collect();
    let mut heap: BinaryHeap<Entry> = level
        .iter()
        .enumerate()
        .map(|(i, &v)| Entry {
            value: v,
            seq: i as u64,
            index: i,
        })
        .collect();
    let mut seq = level.len() as u64;
    while let Some(Entry { value, index, .. }) = heap.pop() {
        if value > level[index] {
            continue;
        }
        for q in neighbors4(index, w, ht) {
            let cand = value.max(floor[q]);
            if cand < level[q] {
                level[q] = cand;
                heap.push(Entry {
                    value: cand,
                    seq,
                    index: q,
                });
                seq += 1;
            }
        }
    }
    FloatImage::new(w, ht, level)
}

/// Labels the 4-connected regional minima (plateaus with no strictly lower
/// neighbor) `1..=M` in row-major order of their first pixel.
pub fn regional_minima(surface: &FloatImage) -> LabelMap {
    let (w, h) = surface.dims();
    let v = surface.data();
    let mut labels = vec![0u32; v.len()];
    let mut visited = vec![false; v.len()];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    let mut component = Vec::new();
    for start in 0..v.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        component.clear();
        let mut is_min = true;
        while let Some(p) = queue.pop_front() {
            component.push(p);
            for q in neighbors4(p, w, h) {
                if v[q] < v[p] {
                    is_min = false;
                } else if v[q] == v[p] && !visited[q] {
                    visited[q] = true;
                    queue.push_back(q);
                }
            }
        }
        if is_min {
            next += 1;
            for &p in &component {
                labels[p] = next;
            }
        }
    }
    LabelMap {
        width: w,
        height: h,
        labels,
        basins: next,
    }
}

/// Priority-flood watershed seeded from the regional minima of the
/// h-minima-filtered surface.
///
/// The queue is ordered by (original surface value, insertion sequence).
/// A popped pixel whose already-labeled neighbors carry more than one basin
/// label becomes ridge ([`RIDGE`]) and does not propagate. Pixels never
/// reached because they are walled in by ridge pixels are ridge as well.
pub fn watershed_segment(surface: &FloatImage, params: &WatershedParams) -> Result<LabelMap> {
    let filtered = h_minima(surface, params.h_min)?;
    let markers = regional_minima(&filtered);
    Ok(flood(surface, &markers))
}

/// Flooding stage on its own, for caller-supplied markers.
pub fn flood(surface: &FloatImage, markers: &LabelMap) -> LabelMap {
    const UNSEEN: u8 = 0;
    const QUEUED: u8 = 1;
    const DONE: u8 = 2;

    let (w, h) = surface.dims();
    let v = surface.data();
    let mut labels = markers.labels.clone();
    let mut state: Vec<u8> = labels
        .iter()
        .map(|&l| if l > 0 { DONE } else { UNSEEN })
        .collect();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;

    for p in (0..v.len()).filter(|&p| labels[p] != 0) {
        for q in neighbors4(p, w, h) {
            if state[q] == UNSEEN {
                state[q] = QUEUED;
                heap.push(Entry {
                    value: v[q],
                    seq,
                    index: q,
                });
                seq += 1;
            }
        }
    }

    while let Some(Entry { index: p, .. }) = heap.pop() {
        let mut found = None;
        let mut conflict = false;
        for q in neighbors4(p, w, h) {
            let l = labels[q];
            if state[q] == DONE && l != RIDGE {
                match found {
                    None => found = Some(l),
                    Some(f) if f != l => conflict = true,
                    _ => {}
                }
            }
        }
        state[p] = DONE;
        match (found, conflict) {
            (Some(l), false) => {
                labels[p] = l;
                for q in neighbors4(p, w, h) {
                    if state[q] == UNSEEN {
                        state[q] = QUEUED;
                        heap.push(Entry {
                            value: v[q],
                            seq,
                            index: q,
                        });
                        seq += 1;
                    }
                }
            }
            _ => labels[p] = RIDGE,
        }
    }

    LabelMap {
        width: w,
        height: h,
        labels,
        basins: markers.basins,
    }
}

/// Assigns every basin to foreground or background by its mean intensity in
/// `image`; ridge pixels follow the majority of their basin neighbors, with
/// ties going to foreground.
pub fn labels_to_mask(
    labels: &LabelMap,
    image: &GrayImage,
    classifier: BasinClassifier,
) -> Result<BinaryMask> {
    if labels.dims() != image.dims() {
        return Err(Error::mismatch(labels.dims(), image.dims()));
    }
    let k = labels.basins as usize;
    let mut sums = vec![0u64; k + 1];
    let mut counts = vec![0u64; k + 1];
    for (&l, &v) in labels.labels.iter().zip(image.data()) {
        sums[l as usize] += v as u64;
        counts[l as usize] += 1;
    }
    let means: Vec<f64> = (0..=k)
        .map(|b| {
            if counts[b] > 0 {
                sums[b] as f64 / counts[b] as f64
            } else {
                0.0
            }
        })
        .collect();

    let mut basin_fg = vec![true; k + 1];
    match classifier {
        BasinClassifier::Otsu => {
            let samples: Vec<(f64, u64)> = (1..=k).map(|b| (means[b], counts[b])).collect();
            if let Some(cut) = otsu_split_weighted(&samples) {
                for b in 1..=k {
                    basin_fg[b] = means[b] >= cut;
                }
            }
        }
        BasinClassifier::Fixed(t) => {
            for b in 1..=k {
                basin_fg[b] = means[b] > t as f64;
            }
        }
    }

    let (w, h) = labels.dims();
    let data = (0..labels.labels.len())
        .map(|p| match labels.labels[p] {
            RIDGE => {
                let (mut fg, mut bg) = (0, 0);
                for q in neighbors4(p, w, h) {
                    match labels.labels[q] {
                        RIDGE => {}
                        l if basin_fg[l as usize] => fg += 1,
                        _ => bg += 1,
                    }
                }
                fg >= bg
            }
            l => basin_fg[l as usize],
        })
        .collect();
    BinaryMask::new(w, h, data)
}

/// Foreground pixels with at least one background 4-neighbor; the image
/// border counts as background.
pub fn mask_boundary(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let m = mask.data();
    let data = (0..m.len())
        .map(|p| {
            let (x, y) = (p % w, p / w);
            m[p] && (x == 0
                || y == 0
                || x + 1 == w
                || y + 1 == h
                || neighbors4(p, w, h).any(|q| !m[q]))
        })
        .collect();
    BinaryMask::new(w, h, data).expect("same dimensions as input mask")
}
