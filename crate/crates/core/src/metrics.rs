//! Segmentation and image-quality measures.
//!
//! Every ratio with a zero denominator evaluates to 0.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::image::{mirror, BinaryMask, GrayImage};
use crate::watershed::LabelMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Recall, in percent.
    pub fn sensitivity(&self) -> f64 {
        100.0 * ratio(self.tp, self.tp + self.fn_)
    }

    pub fn specificity(&self) -> f64 {
        100.0 * ratio(self.tn, self.tn + self.fp)
    }

    pub fn accuracy(&self) -> f64 {
        100.0 * ratio(self.tp + self.tn, self.total())
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::mismatch(a, b))
    }
}

pub fn confusion(pred: &BinaryMask, truth: &BinaryMask) -> Result<ConfusionCounts> {
    same_dims(pred.dims(), truth.dims())?;
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.data().iter().zip(truth.data()) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Mean squared error and PSNR against a peak of 255. PSNR is `+inf` when
/// the images are identical.
pub fn mse_psnr(a: &GrayImage, b: &GrayImage) -> Result<(f64, f64)> {
    same_dims(a.dims(), b.dims())?;
    let sse: u64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    let mse = sse as f64 / a.len() as f64;
    Ok((mse, psnr_from_mse(mse)))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / mse).log10()
    }
}

/// `(precision, recall, F1)`.
pub fn precision_recall_f(c: &ConfusionCounts) -> (f64, f64, f64) {
    let p = ratio(c.tp, c.tp + c.fp);
    let r = ratio(c.tp, c.tp + c.fn_);
    let f = if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    };
    (p, r, f)
}

fn pairs(n: u64) -> u128 {
    n as u128 * n.saturating_sub(1) as u128 / 2
}

/// Rand index of two labelings of the same pixels, from the contingency table.
pub fn rand_index(a: &[u32], b: &[u32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "labelings differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidParameter(
            "rand index needs at least two pixels".into(),
        ));
    }
    let mut joint: HashMap<(u32, u32), u64> = HashMap::new();
    let mut rows: HashMap<u32, u64> = HashMap::new();
    let mut cols: HashMap<u32, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let total = pairs(a.len() as u64);
    let same_both: u128 = joint.values().map(|&n| pairs(n)).sum();
    let same_a: u128 = rows.values().map(|&n| pairs(n)).sum();
    let same_b: u128 = cols.values().map(|&n| pairs(n)).sum();
    // agreements = same_both + (total - same_a - same_b + same_both)
    let agree = total + 2 * same_both - same_a - same_b;
    Ok(agree as f64 / total as f64)
}

pub fn rand_index_masks(pred: &BinaryMask, truth: &BinaryMask) -> Result<f64> {
    same_dims(pred.dims(), truth.dims())?;
    let enc = |m: &BinaryMask| m.data().iter().map(|&b| b as u32).collect::<Vec<_>>();
    rand_index(&enc(pred), &enc(truth))
}

pub fn rand_index_labels(pred: &LabelMap, truth: &LabelMap) -> Result<f64> {
    same_dims(pred.dims(), truth.dims())?;
    rand_index(pred.labels(), truth.labels())
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
pub const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

fn gaussian_window() -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as isize;
    let g: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

/// Mean SSIM over windows centered at every pixel, with an 11x11 Gaussian
/// window (sigma 1.5) and mirrored borders. Result lies in [-1, 1].
pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    same_dims(a.dims(), b.dims())?;
    let (w, h) = a.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::InvalidDimensions {
            width: w,
            height: h,
            reason: format!("ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW}"),
        });
    }
    let g = gaussian_window();
    let r = (SSIM_WINDOW / 2) as isize;
    let mut total = 0.0;
    let mut xs = vec![0.0; SSIM_WINDOW * SSIM_WINDOW];
    let mut ys = vec![0.0; SSIM_WINDOW * SSIM_WINDOW];
    let mut ws = vec![0.0; SSIM_WINDOW * SSIM_WINDOW];
    for cy in 0..h as isize {
        for cx in 0..w as isize {
            let mut k = 0;
            for dy in -r..=r {
                let yy = mirror(cy + dy, h);
                for dx in -r..=r {
                    let xx = mirror(cx + dx, w);
                    xs[k] = a.get(xx, yy) as f64;
                    ys[k] = b.get(xx, yy) as f64;
                    ws[k] = g[(dy + r) as usize] * g[(dx + r) as usize];
                    k += 1;
                }
            }
            let mx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * x).sum();
            let my: f64 = ws.iter().zip(&ys).map(|(w, y)| w * y).sum();
            let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
            for i in 0..xs.len() {
                let (dx, dy) = (xs[i] - mx, ys[i] - my);
                vx += ws[i] * dx * dx;
                vy += ws[i] * dy * dy;
                cxy += ws[i] * dx * dy;
            }
            total += ((2.0 * mx * my + SSIM_C1) * (2.0 * cxy + SSIM_C2))
                / ((mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2));
        }
    }
    Ok(total / (w * h) as f64)
}

/// The eight reported measures.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub psnr: f64,
    pub mse: f64,
    pub f_measure: f64,
    pub rand_index: f64,
    /// Percent.
    pub sensitivity: f64,
    /// Percent.
    pub specificity: f64,
    /// SSIM times 100.
    pub ssim: f64,
    /// Percent.
    pub accuracy: f64,
    pub counts: ConfusionCounts,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str =
        "psnr,mse,f_measure,rand_index,sensitivity,specificity,ssim,accuracy";

    /// Assembles the classification part from counts; image measures are
    /// passed in already computed.
    pub fn from_parts(counts: ConfusionCounts, rand_index: f64, mse: f64, ssim: f64) -> Self {
        MetricsReport {
            psnr: psnr_from_mse(mse),
            mse,
            f_measure: precision_recall_f(&counts).2,
            rand_index,
            sensitivity: counts.sensitivity(),
            specificity: counts.specificity(),
            ssim: 100.0 * ssim,
            accuracy: counts.accuracy(),
            counts,
        }
    }

    fn values(&self) -> [(&'static str, f64); 8] {
        [
            ("PSNR", self.psnr),
            ("MSE", self.mse),
            ("F-Measure", self.f_measure),
            ("Rand Index", self.rand_index),
            ("Sensitivity", self.sensitivity),
            ("Specificity", self.specificity),
            ("SSIM", self.ssim),
            ("Accuracy", self.accuracy),
        ]
    }

    pub fn to_csv(&self) -> String {
        let row: Vec<String> = self.values().iter().map(|(_, v)| fmt_value(*v)).collect();
        format!("{}\n{}\n", Self::CSV_HEADER, row.join(","))
    }

    /// Parses the output of [`MetricsReport::to_csv`] into the eight values.
    pub fn parse_csv_row(text: &str) -> Result<[f64; 8]> {
        let mut lines = text.lines();
        if lines.next() != Some(Self::CSV_HEADER) {
            return Err(Error::InvalidParameter("report csv header mismatch".into()));
        }
        let row = lines
            .next()
            .ok_or_else(|| Error::InvalidParameter("report csv has no data row".into()))?;
        let vals: Vec<f64> = row
            .split(',')
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidParameter(format!("report csv: {e}")))?;
        vals.try_into()
            .map_err(|_| Error::InvalidParameter("report csv needs 8 columns".into()))
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.6}")
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<22}{:>14}", "Performance measures", "")?;
        for (name, v) in self.values() {
            writeln!(f, "{:<22}{:>14}", name, fmt_value(v))?;
        }
        Ok(())
    }
}

/// All eight measures. `pred_img`/`truth_img` feed MSE, PSNR and SSIM; the
/// masks feed the rest.
pub fn full_report(
    pred: &BinaryMask,
    truth: &BinaryMask,
    pred_img: &GrayImage,
    truth_img: &GrayImage,
) -> Result<MetricsReport> {
    same_dims(pred.dims(), pred_img.dims())?;
    let counts = confusion(pred, truth)?;
    let ri = rand_index_masks(pred, truth)?;
    let (mse, _) = mse_psnr(pred_img, truth_img)?;
    let s = ssim(pred_img, truth_img)?;
    Ok(MetricsReport::from_parts(counts, ri, mse, s))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: u16,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// One point per threshold 0..=255 (score >= threshold is positive).
    pub sweep: Vec<RocPoint>,
    /// Sweep plus the (0,0) and (1,1) anchors, sorted by (fpr, tpr).
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

impl RocCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for p in &self.sweep {
            out.push_str(&format!("{},{:.9},{:.9}\n", p.threshold, p.fpr, p.tpr));
        }
        out.push_str(&format!("# auc={:.9}\n", self.auc));
        out
    }
}

/// Sweeps every 8-bit threshold over `score` against `truth`.
pub fn roc_curve(score: &GrayImage, truth: &BinaryMask) -> Result<RocCurve> {
    same_dims(score.dims(), truth.dims())?;
    let mut pos = [0u64; 256];
    let mut neg = [0u64; 256];
    for (&v, &t) in score.data().iter().zip(truth.data()) {
        if t {
            pos[v as usize] += 1;
        } else {
            neg[v as usize] += 1;
        }
    }
    let (p_total, n_total) = (pos.iter().sum::<u64>(), neg.iter().sum::<u64>());
    let mut sweep = Vec::with_capacity(256);
    let (mut tp, mut fp) = (p_total, n_total);
    for t in 0..256usize {
        sweep.push(RocPoint {
            threshold: t as u16,
            fpr: ratio(fp, n_total),
            tpr: ratio(tp, p_total),
        });
        tp -= pos[t];
        fp -= neg[t];
    }
    let mut points: Vec<(f64, f64)> = sweep.iter().map(|p| (p.fpr, p.tpr)).collect();
    points.push((0.0, 0.0));
    points.push((1.0, 1.0));
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let auc = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum();
    Ok(RocCurve { sweep, points, auc })
}

/// ROC curves of the optimized score image and the baseline score image.
pub fn roc_sweep(
    score: &GrayImage,
    truth: &BinaryMask,
    baseline: &GrayImage,
) -> Result<(RocCurve, RocCurve)> {
    Ok((roc_curve(score, truth)?, roc_curve(baseline, truth)?))
}
