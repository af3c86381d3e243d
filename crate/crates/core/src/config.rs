//! Pipeline configuration and its INI representation.
//!
//! Format: `[section]` headers, `key = value` lines, `#` starts a comment
//! line. Unknown sections or keys, duplicates and malformed values are
//! rejected with the offending line number. Every key is optional; missing
//! keys keep their defaults.
//!
//! ```text
//! [run]
//! seed = 1
//! output_dir = out
//!
//! [wavelet]
//! levels = 3
//! kept_scales = 2,3
//!
//! [bat]
//! population = 20
//! iterations = 500
//! f_min = 0
//! f_max = 2
//! alpha = 0.9
//! gamma = 0.9
//! loudness = 1
//! pulse_rate = 0.5
//!
//! [roi]            # optional; all four keys required when present
//! x0 = 0
//! y0 = 0
//! w = 128
//! h = 128
//!
//! [watershed]
//! h_min = 5
//! classify = otsu  # or `bat`: basins above the bat threshold
//! surface = optimized  # image whose gradient is flooded: optimized | equalized
//!
//! [baseline]
//! fixed_threshold = 128
//!
//! [metrics]
//! quality_image = enhanced   # enhanced | optimized | equalized
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::bat::BatParams;
use crate::error::{Error, Result};
use crate::watershed::DEFAULT_H_MIN;
use crate::wavelet::{ScaleSelection, DEFAULT_KEPT_SCALES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Roi {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassifyMode {
    #[default]
    Otsu,
    Bat,
}

/// Image whose gradient magnitude is flooded. Basins are always classified
/// on the equalized image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SurfaceSource {
    /// Threshold-to-zero output, cropped to the ROI.
    #[default]
    Optimized,
    Equalized,
}

/// Which image is compared against the input for MSE, PSNR and SSIM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QualityImage {
    #[default]
    Enhanced,
    Optimized,
    Equalized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub levels: usize,
    pub kept_scales: Vec<usize>,
    pub population: usize,
    pub iterations: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub loudness: f64,
    pub pulse_rate: f64,
    pub roi: Option<Roi>,
    pub h_min: f64,
    pub classify: ClassifyMode,
    pub surface: SurfaceSource,
    pub fixed_threshold: u8,
    pub quality_image: QualityImage,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let bat = BatParams::default();
        PipelineConfig {
            seed: 1,
            output_dir: None,
            levels: 3,
            kept_scales: DEFAULT_KEPT_SCALES.to_vec(),
            population: bat.population,
            iterations: bat.iterations,
            f_min: bat.f_min,
            f_max: bat.f_max,
            alpha: bat.alpha,
            gamma: bat.gamma,
            loudness: bat.loudness0,
            pulse_rate: bat.pulse_rate0,
            roi: None,
            h_min: DEFAULT_H_MIN,
            classify: ClassifyMode::Otsu,
            surface: SurfaceSource::Optimized,
            fixed_threshold: 128,
            quality_image: QualityImage::Enhanced,
        }
    }
}

impl PipelineConfig {
    pub fn bat_params(&self) -> BatParams {
        BatParams {
            population: self.population,
            iterations: self.iterations,
            f_min: self.f_min,
            f_max: self.f_max,
            alpha: self.alpha,
            gamma: self.gamma,
            loudness0: self.loudness,
            pulse_rate0: self.pulse_rate,
            lower: vec![0.0],
            upper: vec![255.0],
            seed: self.seed,
        }
    }

    pub fn scale_selection(&self) -> Result<ScaleSelection> {
        ScaleSelection::new(self.kept_scales.iter().copied())
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::InvalidParameter(
                "wavelet.levels must be >= 1".into(),
            ));
        }
        self.scale_selection()?.validate_for(self.levels)?;
        self.bat_params().validate()?;
        if !(self.h_min >= 0.0 && self.h_min.is_finite()) {
            return Err(Error::InvalidParameter(
                "watershed.h_min must be >= 0".into(),
            ));
        }
        if let Some(r) = self.roi {
            if r.w == 0 || r.h == 0 {
                return Err(Error::InvalidParameter(
                    "roi width and height must be >= 1".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        let mut section: Option<String> = None;
        let mut seen = BTreeSet::new();
        let mut roi = [None::<usize>; 4];
        let mut roi_line = 0;

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| Error::Config {
                line: line_no,
                message,
            };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("unterminated section header {line:?}")))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                if name == "roi" {
                    roi_line = line_no;
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section
                .as_deref()
                .ok_or_else(|| err(format!("key `{key}` outside any section")))?;
            if !seen.insert((sec.to_string(), key.to_string())) {
                return Err(err(format!("duplicate key {sec}.{key}")));
            }
            let bad = |e: String| err(format!("{sec}.{key}: {e}"));
            match (sec, key) {
                ("run", "seed") => cfg.seed = num(value).map_err(bad)?,
                ("run", "output_dir") => cfg.output_dir = Some(PathBuf::from(value)),
                ("wavelet", "levels") => cfg.levels = num(value).map_err(bad)?,
                ("wavelet", "kept_scales") => {
                    cfg.kept_scales = value
                        .split(',')
                        .map(|s| num(s.trim()))
                        .collect::<std::result::Result<_, _>>()
                        .map_err(bad)?
                }
                ("bat", "population") => cfg.population = num(value).map_err(bad)?,
                ("bat", "iterations") => cfg.iterations = num(value).map_err(bad)?,
                ("bat", "f_min") => cfg.f_min = num(value).map_err(bad)?,
                ("bat", "f_max") => cfg.f_max = num(value).map_err(bad)?,
                ("bat", "alpha") => cfg.alpha = num(value).map_err(bad)?,
                ("bat", "gamma") => cfg.gamma = num(value).map_err(bad)?,
                ("bat", "loudness") => cfg.loudness = num(value).map_err(bad)?,
                ("bat", "pulse_rate") => cfg.pulse_rate = num(value).map_err(bad)?,
                ("roi", "x0") => roi[0] = Some(num(value).map_err(bad)?),
                ("roi", "y0") => roi[1] = Some(num(value).map_err(bad)?),
                ("roi", "w") => roi[2] = Some(num(value).map_err(bad)?),
                ("roi", "h") => roi[3] = Some(num(value).map_err(bad)?),
                ("watershed", "h_min") => cfg.h_min = num(value).map_err(bad)?,
                ("watershed", "classify") => {
                    cfg.classify = match value {
                        "otsu" => ClassifyMode::Otsu,
                        "bat" => ClassifyMode::Bat,
                        other => return Err(bad(format!("expected otsu or bat, got {other:?}"))),
                    }
                }
                ("watershed", "surface") => {
                    cfg.surface = match value {
                        "optimized" => SurfaceSource::Optimized,
                        "equalized" => SurfaceSource::Equalized,
                        other => {
                            return Err(bad(format!(
                                "expected optimized or equalized, got {other:?}"
                            )))
                        }
                    }
                }
                ("baseline", "fixed_threshold") => cfg.fixed_threshold = num(value).map_err(bad)?,
                ("metrics", "quality_image") => {
                    cfg.quality_image = match value {
                        "enhanced" => QualityImage::Enhanced,
                        "optimized" => QualityImage::Optimized,
                        "equalized" => QualityImage::Equalized,
                        other => {
                            return Err(bad(format!(
                                "expected enhanced, optimized or equalized, got {other:?}"
                            )))
                        }
                    }
                }
                _ => return Err(err(format!("unknown key {sec}.{key}"))),
            }
        }

        cfg.roi = match roi {
            [None, None, None, None] => None,
            [Some(x0), Some(y0), Some(w), Some(h)] => Some(Roi { x0, y0, w, h }),
            _ => {
                return Err(Error::Config {
                    line: roi_line,
                    message: "[roi] needs all of x0, y0, w, h".into(),
                })
            }
        };
        cfg.validate().map_err(|e| Error::Config {
            line: 0,
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    /// Canonical INI text; `parse(to_ini())` reproduces `self`.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[run]\nseed = {}", self.seed);
        if let Some(dir) = &self.output_dir {
            let _ = writeln!(s, "output_dir = {}", dir.display());
        }
        let scales: Vec<String> = self.kept_scales.iter().map(|j| j.to_string()).collect();
        let _ = writeln!(
            s,
            "\n[wavelet]\nlevels = {}\nkept_scales = {}",
            self.levels,
            scales.join(",")
        );
        let _ = writeln!(
            s,
            "\n[bat]\npopulation = {}\niterations = {}\nf_min = {:?}\nf_max = {:?}\nalpha = {:?}\ngamma = {:?}\nloudness = {:?}\npulse_rate = {:?}",
            self.population, self.iterations, self.f_min, self.f_max, self.alpha, self.gamma, self.loudness, self.pulse_rate
        );
        if let Some(r) = self.roi {
            let _ = writeln!(
                s,
                "\n[roi]\nx0 = {}\ny0 = {}\nw = {}\nh = {}",
                r.x0, r.y0, r.w, r.h
            );
        }
        let classify = match self.classify {
            ClassifyMode::Otsu => "otsu",
            ClassifyMode::Bat => "bat",
        };
        let surface = match self.surface {
            SurfaceSource::Optimized => "optimized",
            SurfaceSource::Equalized => "equalized",
        };
        let _ = writeln!(
            s,
            "\n[watershed]\nh_min = {:?}\nclassify = {classify}\nsurface = {surface}",
            self.h_min
        );
        let _ = writeln!(
            s,
            "\n[baseline]\nfixed_threshold = {}",
            self.fixed_threshold
        );
        let quality = match self.quality_image {
            QualityImage::Enhanced => "enhanced",
            QualityImage::Optimized => "optimized",
            QualityImage::Equalized => "equalized",
        };
        let _ = writeln!(s, "\n[metrics]\nquality_image = {quality}");
        s
    }
}

const SECTIONS: [&str; 7] = [
    "run",
    "wavelet",
    "bat",
    "roi",
    "watershed",
    "baseline",
    "metrics",
];

fn num<T: FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| format!("{e} ({s:?})"))
}
