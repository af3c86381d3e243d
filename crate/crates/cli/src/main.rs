use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lcseg::bat::write_convergence_csv;
use lcseg::config::{ClassifyMode, PipelineConfig, Roi, SurfaceSource};
use lcseg::metrics::{full_report, roc_sweep};
use lcseg::phantom::{generate_phantom, PhantomSpec};
use lcseg::pipeline::{run_pipeline, stage_enhance, stage_equalize, stage_optimize, stage_segment};
use lcseg::pnm::{read_mask, read_pgm, write_labels, write_mask, write_pgm};
use lcseg::threshold::suppress_below;
use lcseg::watershed::{mask_boundary, BasinClassifier};
use lcseg::wavelet::iuwt_decompose;

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lcseg",
    version,
    about = "Wavelet, bat-threshold and watershed segmentation of mesh-like tissue"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic phantom (image.pgm) and its mask (truth.pgm).
    Synth(SynthArgs),
    /// Wavelet enhancement: residual plus the kept detail scales.
    Decompose(DecomposeArgs),
    /// Bat search for the Otsu threshold, then threshold-to-zero.
    Optimize(OptimizeArgs),
    /// Histogram equalization followed by the optional ROI crop.
    Equalize(EqualizeArgs),
    /// Gradient watershed and basin classification.
    Segment(SegmentArgs),
    /// Score a predicted mask against ground truth.
    Evaluate(EvaluateArgs),
    /// Full pipeline.
    Run(RunArgs),
    /// ROC curves of an optimized and a baseline score image.
    Roc(RocArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// INI configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides [run] seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                PipelineConfig::parse(&text)
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            None => PipelineConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Side length in pixels.
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Gaussian noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 32)]
    period: usize,
    /// Beam width in pixels.
    #[arg(long, default_value_t = 8)]
    width: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write every detail plane and the residual, each rescaled to 0..255.
    #[arg(long)]
    dump_planes: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Enhanced image.
    #[arg(long)]
    input: PathBuf,
    /// Directory for optimized.pgm, threshold.txt and convergence.csv.
    #[arg(long)]
    out: PathBuf,
    /// Skip the search and threshold at this value (the baseline chain).
    #[arg(long)]
    fixed: Option<u8>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EqualizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct SegmentArgs {
    /// Equalized (and cropped) image; basins are classified on it.
    #[arg(long)]
    input: PathBuf,
    /// Full-frame threshold-to-zero image, cropped with the config ROI.
    /// Required unless the config selects `surface = equalized`.
    #[arg(long)]
    relief: Option<PathBuf>,
    /// Bat threshold, needed for `classify = bat`.
    #[arg(long)]
    threshold: Option<u8>,
    /// Directory for labels.pgm, mask.pgm and boundary.pgm.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Image compared for MSE, PSNR and SSIM (defaults to the predicted mask).
    #[arg(long)]
    pred_image: Option<PathBuf>,
    /// Reference image for MSE, PSNR and SSIM (defaults to the truth mask).
    #[arg(long)]
    truth_image: Option<PathBuf>,
    /// Print the aligned table instead of CSV.
    #[arg(long)]
    table: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Output directory; falls back to [run] output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the intermediate images.
    #[arg(long)]
    dump: bool,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct RocArgs {
    #[arg(long)]
    score: PathBuf,
    #[arg(long)]
    baseline: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Directory for roc.csv and roc_baseline.csv.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(warnings) if warnings.is_empty() => ExitCode::SUCCESS,
        Ok(warnings) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::from(EXIT_DEGENERATE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn dispatch(command: Command) -> Result<Vec<String>> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Decompose(a) => decompose(a),
        Command::Optimize(a) => optimize(a),
        Command::Equalize(a) => equalize(a),
        Command::Segment(a) => segment(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Run(a) => run(a),
        Command::Roc(a) => roc(a),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn crop_roi(image: lcseg::GrayImage, roi: Option<Roi>) -> Result<lcseg::GrayImage> {
    Ok(match roi {
        Some(r) => image.crop(r.x0, r.y0, r.w, r.h)?,
        None => image,
    })
}

fn synth(a: SynthArgs) -> Result<Vec<String>> {
    let spec = PhantomSpec {
        width: a.size,
        height: a.size,
        beam_period: a.period,
        beam_width: a.width,
        noise_sigma: a.noise,
        rng_seed: a.seed,
    };
    let (image, truth) = generate_phantom(&spec)?;
    create_dir(&a.out)?;
    write_pgm(&image, a.out.join("image.pgm"))?;
    write_mask(&truth, a.out.join("truth.pgm"))?;
    Ok(vec![])
}

fn decompose(a: DecomposeArgs) -> Result<Vec<String>> {
    let cfg = a.config.load()?;
    let input = read_pgm(&a.input)?;
    let enhanced = stage_enhance(&input, cfg.levels, &cfg.scale_selection()?)?;
    write_pgm(&enhanced, &a.out)?;
    if let Some(dir) = a.dump_planes {
        create_dir(&dir)?;
        let pyramid = iuwt_decompose(&input, cfg.levels)?;
        for (i, plane) in pyramid.details().iter().enumerate() {
            write_pgm(
                &plane.to_gray_rescaled(),
                dir.join(format!("detail_{}.pgm", i + 1)),
            )?;
        }
        write_pgm(&pyramid.smooth().to_gray_rescaled(), dir.join("smooth.pgm"))?;
    }
    Ok(vec![])
}

fn optimize(a: OptimizeArgs) -> Result<Vec<String>> {
    let cfg = a.config.load()?;
    let enhanced = read_pgm(&a.input)?;
    create_dir(&a.out)?;
    if let Some(t) = a.fixed {
        write_pgm(&suppress_below(&enhanced, t), a.out.join("optimized.pgm"))?;
        fs::write(a.out.join("threshold.txt"), format!("{t}\n"))?;
        return Ok(vec![]);
    }
    let (t, state, optimized) = stage_optimize(&enhanced, &cfg.bat_params())?;
    write_pgm(&optimized, a.out.join("optimized.pgm"))?;
    write_convergence_csv(&state, a.out.join("convergence.csv"))?;
    fs::write(a.out.join("threshold.txt"), format!("{t}\n"))?;
    println!("threshold {t} fitness {:.6}", state.best_fitness);
    if state.best_fitness <= 0.0 {
        return Ok(vec!["threshold search found no two-class split".into()]);
    }
    Ok(vec![])
}

fn equalize(a: EqualizeArgs) -> Result<Vec<String>> {
    let cfg = a.config.load()?;
    let image = read_pgm(&a.input)?;
    write_pgm(&stage_equalize(&image, cfg.roi)?, &a.out)?;
    Ok(vec![])
}

fn segment(a: SegmentArgs) -> Result<Vec<String>> {
    let cfg = a.config.load()?;
    let image = read_pgm(&a.input)?;
    let relief = match (cfg.surface, &a.relief) {
        (SurfaceSource::Optimized, Some(path)) => crop_roi(read_pgm(path)?, cfg.roi)?,
        (SurfaceSource::Optimized, None) => {
            bail!("--relief is required when the surface is the optimized image")
        }
        (SurfaceSource::Equalized, _) => image.clone(),
    };
    let classifier = match (cfg.classify, a.threshold) {
        (ClassifyMode::Otsu, _) => BasinClassifier::Otsu,
        (ClassifyMode::Bat, Some(t)) => BasinClassifier::Fixed(t),
        (ClassifyMode::Bat, None) => bail!("--threshold is required for classify = bat"),
    };
    let seg = stage_segment(&relief, &image, cfg.h_min, classifier)?;
    create_dir(&a.out)?;
    let (w, h) = seg.labels.dims();
    write_labels(w, h, seg.labels.labels(), a.out.join("labels.pgm"))?;
    write_mask(&seg.mask, a.out.join("mask.pgm"))?;
    write_mask(&mask_boundary(&seg.mask), a.out.join("boundary.pgm"))?;
    println!("basins {}", seg.labels.basin_count());
    let fg = seg.mask.count();
    if fg == 0 || fg == seg.mask.data().len() {
        return Ok(vec!["segmentation mask contains a single class".into()]);
    }
    Ok(vec![])
}

fn evaluate(a: EvaluateArgs) -> Result<Vec<String>> {
    let pred = read_mask(&a.pred)?;
    let truth = read_mask(&a.truth)?;
    let pred_img = match &a.pred_image {
        Some(p) => read_pgm(p)?,
        None => pred.to_gray(),
    };
    let truth_img = match &a.truth_image {
        Some(p) => read_pgm(p)?,
        None => truth.to_gray(),
    };
    let report = full_report(&pred, &truth, &pred_img, &truth_img)?;
    if a.table {
        print!("{report}");
    } else {
        print!("{}", report.to_csv());
    }
    if let Some(out) = a.out {
        fs::write(&out, report.to_csv()).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(vec![])
}

fn run(a: RunArgs) -> Result<Vec<String>> {
    let cfg = a.config.load()?;
    let out = a
        .out
        .or_else(|| cfg.output_dir.clone())
        .context("no output directory: pass --out or set [run] output_dir")?;
    let input = read_pgm(&a.input)?;
    let truth = a.truth.as_ref().map(read_mask).transpose()?;
    let result = run_pipeline(&input, truth.as_ref(), &cfg)?;
    result.write_outputs(&out, a.dump)?;
    println!("threshold {}", result.threshold);
    if let Some(report) = &result.report {
        print!("{report}");
    }
    if let Some((opt, base)) = &result.roc {
        println!("auc {:.6} baseline {:.6}", opt.auc, base.auc);
    }
    Ok(result.warnings)
}

fn roc(a: RocArgs) -> Result<Vec<String>> {
    let score = read_pgm(&a.score)?;
    let baseline = read_pgm(&a.baseline)?;
    let truth = read_mask(&a.truth)?;
    let (opt, base) = roc_sweep(&score, &truth, &baseline)?;
    create_dir(&a.out)?;
    fs::write(a.out.join("roc.csv"), opt.to_csv())?;
    fs::write(a.out.join("roc_baseline.csv"), base.to_csv())?;
    println!("auc {:.6} baseline {:.6}", opt.auc, base.auc);
    Ok(vec![])
}
