//! End-to-end segmentation: wavelet enhancement, bat threshold search,
//! threshold-to-zero, histogram equalization, ROI crop, gradient watershed,
//! basin classification and evaluation.
//!
//! By default the flooded surface is the gradient of the threshold-to-zero
//! image (cropped like the equalized one). Equalization reshapes the sparse
//! intensities on blurred beam edges and moves the steepest step one pixel
//! into the beam, so flooding its gradient shifts every basin boundary.
//!
//! Each stage is also exposed on its own so the CLI can run them one at a
//! time on files; [`run_pipeline`] is exactly their composition.

use std::fs;
use std::path::{Path, PathBuf};

use crate::bat::{convergence_csv, optimize_threshold, BatParams, BatState};
use crate::config::{ClassifyMode, PipelineConfig, QualityImage, Roi, SurfaceSource};
use crate::enhance::equalize;
use crate::error::{Error, Result};
use crate::image::{BinaryMask, FloatImage, GrayImage, RgbImage};
use crate::metrics::{full_report, roc_sweep, MetricsReport, RocCurve};
use crate::pnm::{encode_labels, encode_pgm, encode_ppm};
use crate::threshold::suppress_below;
use crate::watershed::{
    gradient_magnitude, labels_to_mask, mask_boundary, watershed_segment, BasinClassifier,
    LabelMap, WatershedParams,
};
use crate::wavelet::{iuwt_decompose, ScaleSelection};

/// Wavelet stage: residual plus kept detail scales, rescaled to 8 bits.
pub fn stage_enhance(
    input: &GrayImage,
    levels: usize,
    selection: &ScaleSelection,
) -> Result<GrayImage> {
    let pyramid = iuwt_decompose(input, levels)?;
    crate::wavelet::enhance_scales(&pyramid, selection)
}

/// Bat stage: best Otsu threshold and the threshold-to-zero image.
pub fn stage_optimize(
    enhanced: &GrayImage,
    params: &BatParams,
) -> Result<(u8, BatState, GrayImage)> {
    let (t, state) = optimize_threshold(enhanced, params)?;
    Ok((t, state, suppress_below(enhanced, t)))
}

fn crop_opt(image: &GrayImage, roi: Option<Roi>) -> Result<GrayImage> {
    match roi {
        Some(r) => image.crop(r.x0, r.y0, r.w, r.h),
        None => Ok(image.clone()),
    }
}

/// Equalization over the full frame, then the optional crop.
pub fn stage_equalize(optimized: &GrayImage, roi: Option<Roi>) -> Result<GrayImage> {
    crop_opt(&equalize(optimized), roi)
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    /// Gradient magnitude rescaled onto 0..=255.
    pub surface: FloatImage,
    pub labels: LabelMap,
    pub mask: BinaryMask,
}

/// Watershed of the rescaled gradient of `relief`, then basin classification
/// on `image`. Both must have the same dimensions.
pub fn stage_segment(
    relief: &GrayImage,
    image: &GrayImage,
    h_min: f64,
    classifier: BasinClassifier,
) -> Result<Segmentation> {
    if relief.dims() != image.dims() {
        return Err(Error::mismatch(relief.dims(), image.dims()));
    }
    let surface = gradient_magnitude(relief)?.rescale_unit();
    let labels = watershed_segment(&surface, &WatershedParams { h_min })?;
    let mask = labels_to_mask(&labels, image, classifier)?;
    Ok(Segmentation {
        surface,
        labels,
        mask,
    })
}

/// Score image of the non-optimized comparison: the same chain with a fixed
/// threshold in place of the bat search.
pub fn baseline_score(
    enhanced: &GrayImage,
    fixed_threshold: u8,
    roi: Option<Roi>,
) -> Result<GrayImage> {
    stage_equalize(&suppress_below(enhanced, fixed_threshold), roi)
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    /// Input restricted to the ROI.
    pub input: GrayImage,
    pub enhanced: GrayImage,
    pub threshold: u8,
    pub bat: BatState,
    pub optimized: GrayImage,
    /// Equalized and cropped; the image that gets segmented.
    pub equalized: GrayImage,
    pub surface: FloatImage,
    pub labels: LabelMap,
    pub mask: BinaryMask,
    pub boundary: BinaryMask,
    pub overlay: RgbImage,
    pub report: Option<MetricsReport>,
    /// (optimized, baseline)
    pub roc: Option<(RocCurve, RocCurve)>,
    pub warnings: Vec<String>,
}

impl PipelineResult {
    pub fn is_degenerate(&self) -> bool {
        !self.warnings.is_empty()
    }

    /// Writes the result files into `dir` and returns their paths in the
    /// order written. Intermediate images are added when `dump` is set.
    pub fn write_outputs(&self, dir: &Path, dump: bool) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let (w, h) = self.labels.dims();
        let mut files: Vec<(&str, Vec<u8>)> = vec![
            ("enhanced.pgm", encode_pgm(&self.enhanced)),
            ("equalized.pgm", encode_pgm(&self.equalized)),
            ("labels.pgm", encode_labels(w, h, self.labels.labels())),
            ("mask.pgm", encode_pgm(&self.mask.to_gray())),
            ("overlay.ppm", encode_ppm(&self.overlay)),
            (
                "convergence.csv",
                convergence_csv(&self.bat.history).into_bytes(),
            ),
        ];
        if let Some(report) = &self.report {
            files.push(("report.csv", report.to_csv().into_bytes()));
        }
        if let Some((opt, base)) = &self.roc {
            files.push(("roc.csv", opt.to_csv().into_bytes()));
            files.push(("roc_baseline.csv", base.to_csv().into_bytes()));
        }
        if dump {
            files.push(("optimized.pgm", encode_pgm(&self.optimized)));
            files.push(("gradient.pgm", encode_pgm(&self.surface.to_gray_rescaled())));
            files.push(("boundary.pgm", encode_pgm(&self.boundary.to_gray())));
            files.push((
                "threshold.txt",
                format!("{}\n", self.threshold).into_bytes(),
            ));
        }
        let mut written = Vec::with_capacity(files.len());
        for (name, bytes) in files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Brings a ground-truth mask into the ROI frame. Full-frame masks are
/// cropped; masks already of ROI size are taken as they are.
pub fn align_truth(
    truth: &BinaryMask,
    input_dims: (usize, usize),
    roi: Option<Roi>,
) -> Result<BinaryMask> {
    match roi {
        Some(r) if truth.dims() == input_dims => truth.crop(r.x0, r.y0, r.w, r.h),
        Some(r) if truth.dims() == (r.w, r.h) => Ok(truth.clone()),
        None if truth.dims() == input_dims => Ok(truth.clone()),
        _ => Err(Error::mismatch(truth.dims(), input_dims)),
    }
}

pub fn run_pipeline(
    input: &GrayImage,
    truth: Option<&BinaryMask>,
    config: &PipelineConfig,
) -> Result<PipelineResult> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    let selection = config.scale_selection().map_err(|e| e.in_stage("config"))?;
    let truth = truth
        .map(|t| align_truth(t, input.dims(), config.roi))
        .transpose()
        .map_err(|e| e.in_stage("truth"))?;

    let enhanced =
        stage_enhance(input, config.levels, &selection).map_err(|e| e.in_stage("wavelet"))?;
    let (threshold, bat, optimized) =
        stage_optimize(&enhanced, &config.bat_params()).map_err(|e| e.in_stage("bat"))?;
    let equalized = stage_equalize(&optimized, config.roi).map_err(|e| e.in_stage("equalize"))?;
    let classifier = match config.classify {
        ClassifyMode::Otsu => BasinClassifier::Otsu,
        ClassifyMode::Bat => BasinClassifier::Fixed(threshold),
    };
    let relief = match config.surface {
        SurfaceSource::Optimized => {
            crop_opt(&optimized, config.roi).map_err(|e| e.in_stage("crop"))?
        }
        SurfaceSource::Equalized => equalized.clone(),
    };
    let seg = stage_segment(&relief, &equalized, config.h_min, classifier)
        .map_err(|e| e.in_stage("watershed"))?;
    let boundary = mask_boundary(&seg.mask);
    let input_roi = crop_opt(input, config.roi).map_err(|e| e.in_stage("crop"))?;
    let overlay = RgbImage::overlay(&input_roi, &boundary).map_err(|e| e.in_stage("overlay"))?;

    let mut warnings = Vec::new();
    if bat.best_fitness <= 0.0 {
        warnings
            .push("threshold search found no two-class split (flat enhanced image)".to_string());
    }
    let fg = seg.mask.count();
    if fg == 0 || fg == seg.mask.data().len() {
        warnings.push("segmentation mask contains a single class".to_string());
    }

    let (report, roc) = match &truth {
        Some(truth) => {
            let quality = match config.quality_image {
                QualityImage::Enhanced => crop_opt(&enhanced, config.roi),
                QualityImage::Optimized => crop_opt(&optimized, config.roi),
                QualityImage::Equalized => Ok(equalized.clone()),
            }
            .map_err(|e| e.in_stage("metrics"))?;
            let report = full_report(&seg.mask, truth, &quality, &input_roi)
                .map_err(|e| e.in_stage("metrics"))?;
            let base = baseline_score(&enhanced, config.fixed_threshold, config.roi)
                .map_err(|e| e.in_stage("baseline"))?;
            let roc = roc_sweep(&equalized, truth, &base).map_err(|e| e.in_stage("roc"))?;
            (Some(report), Some(roc))
        }
        None => (None, None),
    };

    Ok(PipelineResult {
        input: input_roi,
        enhanced,
        threshold,
        bat,
        optimized,
        equalized,
        surface: seg.surface,
        labels: seg.labels,
        mask: seg.mask,
        boundary,
        overlay,
        report,
        roc,
        warnings,
    })
}
