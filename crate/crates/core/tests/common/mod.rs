//! Brute-force reference implementations. Each one is written directly from
//! the definition, without sharing code with the library.

#![allow(dead_code)]

use lcseg::rng::Stream;
use lcseg::{FloatImage, GrayImage};

pub fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

pub fn random_gray(rng: &mut Stream, w: usize, h: usize) -> GrayImage {
    let data = (0..w * h).map(|_| (rng.next_u64() >> 56) as u8).collect();
    GrayImage::new(w, h, data).unwrap()
}

/// One level of the à trous smoothing as a full 5x5 two-dimensional
/// convolution with holes of `step - 1` zeros.
pub fn atrous_smooth_2d(src: &[f64], w: usize, h: usize, step: usize) -> Vec<f64> {
    let k = [1.0, 4.0, 6.0, 4.0, 1.0];
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (a, ka) in k.iter().enumerate() {
                for (b, kb) in k.iter().enumerate() {
                    let yy = reflect(y as isize + (a as isize - 2) * step as isize, h);
                    let xx = reflect(x as isize + (b as isize - 2) * step as isize, w);
                    acc += ka * kb * src[yy * w + xx];
                }
            }
            out[y * w + x] = acc / 256.0;
        }
    }
    out
}

/// Detail planes and residual by repeated 2-D convolution.
pub fn atrous_planes(image: &GrayImage, levels: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (w, h) = image.dims();
    let mut c: Vec<f64> = image.data().iter().map(|&v| v as f64).collect();
    let mut details = Vec::new();
    for j in 1..=levels {
        let next = atrous_smooth_2d(&c, w, h, 1 << (j - 1));
        details.push(c.iter().zip(&next).map(|(a, b)| a - b).collect());
        c = next;
    }
    (details, c)
}

/// Equalization from a per-pixel recount of the cumulative distribution.
pub fn equalize_by_hand(image: &GrayImage) -> GrayImage {
    let px = image.data();
    let n = px.len() as f64;
    let cdf = |v: u8| px.iter().filter(|&&p| p <= v).count() as f64;
    let lo = *px.iter().min().unwrap();
    let cdf_min = cdf(lo);
    if cdf_min == n {
        return image.clone();
    }
    let data = px
        .iter()
        .map(|&v| ((cdf(v) - cdf_min) / (n - cdf_min) * 255.0 + 0.5).floor() as u8)
        .collect();
    GrayImage::new(image.width(), image.height(), data).unwrap()
}

/// Between-class variance at threshold `t` from the pixels themselves.
pub fn otsu_variance_by_hand(image: &GrayImage, t: u8) -> f64 {
    let lo: Vec<f64> = image
        .data()
        .iter()
        .filter(|&&v| v <= t)
        .map(|&v| v as f64)
        .collect();
    let hi: Vec<f64> = image
        .data()
        .iter()
        .filter(|&&v| v > t)
        .map(|&v| v as f64)
        .collect();
    if lo.is_empty() || hi.is_empty() {
        return 0.0;
    }
    let n = image.len() as f64;
    let m0 = lo.iter().sum::<f64>() / lo.len() as f64;
    let m1 = hi.iter().sum::<f64>() / hi.len() as f64;
    (lo.len() as f64 / n) * (hi.len() as f64 / n) * (m0 - m1).powi(2)
}

pub fn otsu_best_by_hand(image: &GrayImage) -> f64 {
    (0..=255u8)
        .map(|t| otsu_variance_by_hand(image, t))
        .fold(0.0, f64::max)
}

/// Sobel magnitude by explicit 3x3 kernels.
pub fn sobel_by_hand(image: &GrayImage) -> Vec<f64> {
    const KX: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    const KY: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
    let (w, h) = image.dims();
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let (mut gx, mut gy) = (0.0, 0.0);
            for (r, (rx, ry)) in KX.iter().zip(&KY).enumerate() {
                for c in 0..3 {
                    let v = image.get(
                        reflect(x as isize + c as isize - 1, w),
                        reflect(y as isize + r as isize - 1, h),
                    ) as f64;
                    gx += rx[c] * v;
                    gy += ry[c] * v;
                }
            }
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    out
}

/// Neighbors in the order up, left, right, down.
pub fn nbrs(p: usize, w: usize, h: usize) -> Vec<usize> {
    let (x, y) = (p % w, p / w);
    let mut v = Vec::new();
    if y > 0 {
        v.push(p - w);
    }
    if x > 0 {
        v.push(p - 1);
    }
    if x + 1 < w {
        v.push(p + 1);
    }
    if y + 1 < h {
        v.push(p + w);
    }
    v
}

/// Reconstruction by erosion through repeated geodesic erosion steps until
/// nothing changes.
pub fn h_minima_by_iteration(f: &[f64], w: usize, h: usize, depth: f64) -> Vec<f64> {
    let mut g: Vec<f64> = f.iter().map(|v| v + depth).collect();
    loop {
        let mut changed = false;
        let prev = g.clone();
        for p in 0..g.len() {
            let m = nbrs(p, w, h).iter().fold(prev[p], |m, &q| m.min(prev[q]));
            let next = m.max(f[p]);
            if next < g[p] {
                g[p] = next;
                changed = true;
            }
        }
        if !changed {
            return g;
        }
    }
}

/// Plateaus without a strictly lower neighbor, numbered in row-major order
/// of their first pixel. Returns (labels, count).
pub fn minima_by_search(f: &[f64], w: usize, h: usize) -> (Vec<u32>, u32) {
    let mut comp = vec![usize::MAX; f.len()];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for s in 0..f.len() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = members.len();
        let mut stack = vec![s];
        let mut list = Vec::new();
        comp[s] = id;
        while let Some(p) = stack.pop() {
            list.push(p);
            for q in nbrs(p, w, h) {
                if comp[q] == usize::MAX && f[q] == f[p] {
                    comp[q] = id;
                    stack.push(q);
                }
            }
        }
        members.push(list);
    }
    let mut labels = vec![0u32; f.len()];
    let mut next = 0;
    for list in &members {
        let lowest = list
            .iter()
            .all(|&p| nbrs(p, w, h).iter().all(|&q| f[q] >= f[p]));
        if lowest {
            next += 1;
            for &p in list {
                labels[p] = next;
            }
        }
    }
    (labels, next)
}

/// Meyer flooding with a plain list as the queue: each step scans for the
/// smallest (value, insertion number).
pub fn flood_by_scan(f: &[f64], w: usize, h: usize, markers: &[u32]) -> Vec<u32> {
    let mut labels = markers.to_vec();
    let mut done: Vec<bool> = markers.iter().map(|&l| l > 0).collect();
    let mut queued = done.clone();
    let mut queue: Vec<(f64, u64, usize)> = Vec::new();
    let mut seq = 0u64;
    for (p, &m) in markers.iter().enumerate() {
        if m > 0 {
            for q in nbrs(p, w, h) {
                if !queued[q] {
                    queued[q] = true;
                    queue.push((f[q], seq, q));
                    seq += 1;
                }
            }
        }
    }
    while !queue.is_empty() {
        let mut best = 0;
        for i in 1..queue.len() {
            let (a, b) = (queue[i], queue[best]);
            if a.0 < b.0 || (a.0 == b.0 && a.1 < b.1) {
                best = i;
            }
        }
        let (_, _, p) = queue.swap_remove(best);
        let mut seen: Vec<u32> = nbrs(p, w, h)
            .into_iter()
            .filter(|&q| done[q] && labels[q] > 0)
            .map(|q| labels[q])
            .collect();
        seen.sort_unstable();
        seen.dedup();
        done[p] = true;
        if seen.len() == 1 {
            labels[p] = seen[0];
            for q in nbrs(p, w, h) {
                if !queued[q] {
                    queued[q] = true;
                    queue.push((f[q], seq, q));
                    seq += 1;
                }
            }
        } else {
            labels[p] = 0;
        }
    }
    labels
}

pub fn watershed_by_hand(surface: &FloatImage, h_min: f64) -> Vec<u32> {
    let (w, h) = surface.dims();
    let filled = h_minima_by_iteration(surface.data(), w, h, h_min);
    let (markers, _) = minima_by_search(&filled, w, h);
    flood_by_scan(surface.data(), w, h, &markers)
}

/// Rand index by enumerating every unordered pixel pair.
pub fn rand_index_by_pairs(a: &[u32], b: &[u32]) -> f64 {
    let n = a.len();
    let (mut agree, mut total) = (0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    agree as f64 / total as f64
}
