//! Command-line surface. The binary only forwards to [`run`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cohort::{bmi_group, generate_cohort, Cohort, CohortSpec};
use crate::dataset::{
    generate_dataset, mix_seed, simulate_record, slice_record, split_dataset, subject_style, Condition,
    DatasetConfig, DatasetManifest, SplitPolicy, MANIFEST_FILE,
};
use crate::error::{Error, Result};
use crate::knn::{image_feature_matrix, knn_baseline, read_latents, FeatureSource};
use crate::plot::{confusion_png, scatter_png, ColorBy};
use crate::radar::{read_iq, write_iq, RadarConfig};
use crate::segment::{segment, SegmentationReport};
use crate::spectrogram::spectrogram;
use crate::tsne::{tsne, EmbeddingPoint, FeatureMatrix, PointMeta, TsneConfig};

/// Settings read from `--config`; every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub cohort: Option<CohortSpec>,
    pub dataset: DatasetConfig,
    pub tsne: TsneConfig,
    pub knn_k: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            cohort: None,
            dataset: DatasetConfig::default(),
            tsne: TsneConfig::default(),
            knn_k: 5,
        }
    }
}

impl PipelineConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        serde_json::from_str(&s).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Parser)]
#[command(name = "microdoppler", version, about = "Synthetic radar micro-Doppler gait signatures")]
pub struct Cli {
    /// Seed for cohort generation and the recording session.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for all outputs.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a cohort and write `cohort.json`.
    Cohort,
    /// Simulate one subject's walk and write its baseband and spectrogram.
    Simulate(SimulateArgs),
    /// Generate a labeled image dataset and its manifest.
    Dataset(DatasetArgs),
    /// Segment a recording into half gaits.
    Segment(SegmentArgs),
    /// Embed manifest images or latents in 2-D with t-SNE.
    Tsne(TsneArgs),
    /// k-NN identification baseline on a split manifest.
    Baseline(BaselineArgs),
    /// Render an embedding CSV or an evaluation report as PNG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct CohortSource {
    /// Cohort file instead of generating one from `--seed`.
    #[arg(long)]
    pub cohort: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub subject: u32,
    #[command(flatten)]
    pub cohort: CohortSource,
    #[arg(long, default_value_t = 3.0)]
    pub range: f64,
    #[arg(long, default_value_t = 10.0)]
    pub duration: f64,
    /// Also dump per-scatterer trajectories as CSV.
    #[arg(long)]
    pub trajectories: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitKind {
    None,
    FreshSession,
    Random,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// paper-highsnr, paper-lowsnr or paper-mixed; overrides the configured
    /// conditions.
    #[arg(long)]
    pub preset: Option<String>,
    #[command(flatten)]
    pub cohort: CohortSource,
    /// Record duration per subject and condition, seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long, value_enum, default_value_t = SplitKind::None)]
    pub split: SplitKind,
    #[arg(long, default_value_t = 0.5)]
    pub test_fraction: f64,
    /// Seed of the test session or the random split.
    #[arg(long)]
    pub test_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Baseband file written by `simulate`; labels then alternate.
    #[arg(long, conflicts_with = "subject")]
    pub iq: Option<PathBuf>,
    /// Simulate this subject and label swings from ground truth.
    #[arg(long)]
    pub subject: Option<u32>,
    #[command(flatten)]
    pub cohort: CohortSource,
    #[arg(long, default_value_t = 180.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 3.0)]
    pub range: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TsneArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Latent file (defaults to decoded image features).
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub perplexity: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Embed every k-th record so that at most this many remain.
    #[arg(long)]
    pub max_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColorChoice {
    Subject,
    Bmi,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long, required_unless_present = "report")]
    pub embedding: Option<PathBuf>,
    #[arg(long, conflicts_with = "embedding")]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ColorChoice::Bmi)]
    pub color_by: ColorChoice,
    #[arg(long)]
    pub out: PathBuf,
}

struct Ctx {
    seed: u64,
    out_dir: PathBuf,
    config: PipelineConfig,
}

impl Ctx {
    fn cohort(&self, source: &CohortSource) -> Result<Cohort> {
        match &source.cohort {
            Some(p) => Cohort::read(p),
            None => {
                let mut spec = self.config.cohort.clone().unwrap_or_else(|| CohortSpec::standard(self.seed));
                spec.seed = self.seed;
                generate_cohort(&spec)
            }
        }
    }

    fn out(&self, explicit: &Option<PathBuf>, default: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.out_dir.join(default))
    }
}

/// Executes a parsed command line and returns the paths written.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let config = match &cli.config {
        Some(p) => PipelineConfig::read(p)?,
        None => PipelineConfig::default(),
    };
    std::fs::create_dir_all(&cli.out_dir).map_err(|e| Error::file(&cli.out_dir, e))?;
    let ctx = Ctx {
        seed: cli.seed,
        out_dir: cli.out_dir,
        config,
    };
    match cli.command {
        Command::Cohort => {
            let cohort = ctx.cohort(&CohortSource { cohort: None })?;
            let p = ctx.out_dir.join("cohort.json");
            cohort.write(&p)?;
            Ok(vec![p])
        }
        Command::Simulate(a) => simulate_cmd(&ctx, &a),
        Command::Dataset(a) => dataset_cmd(&ctx, &a),
        Command::Segment(a) => segment_cmd(&ctx, &a),
        Command::Tsne(a) => tsne_cmd(&ctx, &a),
        Command::Baseline(a) => baseline_cmd(&ctx, &a),
        Command::Plot(a) => plot_cmd(&a),
    }
}

fn condition(ctx: &Ctx, range: f64, duration: f64) -> Condition {
    let base = ctx.config.dataset.conditions.first().cloned().unwrap_or_else(Condition::high_snr);
    Condition {
        name: format!("r{range}m"),
        range_m: range,
        duration_s: duration,
        ..base
    }
}

fn simulate_cmd(ctx: &Ctx, a: &SimulateArgs) -> Result<Vec<PathBuf>> {
    let cohort = ctx.cohort(&a.cohort)?;
    let subject = cohort
        .subject(a.subject)
        .ok_or_else(|| Error::Config(format!("subject {} not in cohort", a.subject)))?;
    let cfg = &ctx.config.dataset;
    let cond = condition(ctx, a.range, a.duration);
    let style = subject_style(&cohort, subject.id, cfg.style_spread);
    let noise_seed = mix_seed(ctx.seed, &[u64::from(subject.id), 1]);
    let rec = simulate_record(subject, &cohort.rcs, &cond, cfg, &style, 0.0, noise_seed)?;
    let stem = format!("subject{:02}", subject.id);
    let iq = ctx.out_dir.join(format!("{stem}.cf32"));
    write_iq(&rec.signal, &iq)?;
    let spec = ctx.out_dir.join(format!("{stem}_spectrogram.f32"));
    rec.spectrogram.dump(&spec)?;
    let mut out = vec![iq, spec];
    if a.trajectories {
        let params = crate::gait::gait_parameters(subject, cond.speed_m_s)?;
        let setup = crate::gait::SimulationSetup {
            mode: cfg.mode,
            duration_s: cond.duration_s,
            sample_rate_hz: cfg.radar.slow_time_rate_hz,
            radar_pose: cfg.radar_pose,
            style,
            ..Default::default()
        };
        let traj = crate::gait::simulate_trajectories(subject, &params, &setup)?;
        let p = ctx.out_dir.join(format!("{stem}_trajectories.csv"));
        traj.write_csv(&p)?;
        out.push(p);
    }
    Ok(out)
}

fn dataset_cmd(ctx: &Ctx, a: &DatasetArgs) -> Result<Vec<PathBuf>> {
    let cohort = ctx.cohort(&a.cohort)?;
    let mut cfg = match &a.preset {
        Some(name) => DatasetConfig {
            conditions: DatasetConfig::preset(name)?.conditions,
            ..ctx.config.dataset.clone()
        },
        None => ctx.config.dataset.clone(),
    };
    if let Some(d) = a.duration {
        cfg = cfg.with_duration(d);
    }
    let id = a.preset.clone().unwrap_or_else(|| "custom".into());
    let mut manifest = generate_dataset(&cohort, &cfg, ctx.seed, &format!("{id}-seed{}", ctx.seed), &ctx.out_dir)?;
    let test_seed = a.test_seed.unwrap_or_else(|| mix_seed(ctx.seed, &[0x7E57]));
    manifest = match a.split {
        SplitKind::None => manifest,
        SplitKind::FreshSession => split_dataset(&manifest, SplitPolicy::FreshSession, test_seed, &ctx.out_dir)?,
        SplitKind::Random => split_dataset(
            &manifest,
            SplitPolicy::RandomFraction {
                test_fraction: a.test_fraction,
            },
            test_seed,
            &ctx.out_dir,
        )?,
    };
    let p = ctx.out_dir.join(MANIFEST_FILE);
    manifest.write(&p)?;
    Ok(vec![p])
}

fn segment_cmd(ctx: &Ctx, a: &SegmentArgs) -> Result<Vec<PathBuf>> {
    let cfg = &ctx.config.dataset;
    let report = match (&a.iq, a.subject) {
        (Some(iq), _) => {
            let signal = read_iq(iq)?;
            let radar = RadarConfig {
                slow_time_rate_hz: signal.sample_rate_hz,
                ..cfg.radar
            };
            let spec = spectrogram(&signal, &cfg.stft, &radar)?;
            let seg = segment(&spec, &cfg.segment)?;
            SegmentationReport::new(&spec, &seg, None)
        }
        (None, Some(id)) => {
            let cohort = ctx.cohort(&a.cohort)?;
            let subject = cohort
                .subject(id)
                .ok_or_else(|| Error::Config(format!("subject {id} not in cohort")))?;
            let cond = condition(ctx, a.range, a.duration);
            let style = subject_style(&cohort, id, cfg.style_spread);
            let rec = simulate_record(subject, &cohort.rcs, &cond, cfg, &style, 0.0, mix_seed(ctx.seed, &[u64::from(id), 1]))?;
            let (seg, _) = slice_record(&rec, cfg)?;
            SegmentationReport::new(&rec.spectrogram, &seg, Some(&rec.clock))
        }
        (None, None) => return Err(Error::Config("segment needs --iq or --subject".into())),
    };
    let p = ctx.out(&a.out, "segmentation.json");
    report.write(&p)?;
    Ok(vec![p])
}

fn manifest_root(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn tsne_cmd(ctx: &Ctx, a: &TsneArgs) -> Result<Vec<PathBuf>> {
    let manifest = DatasetManifest::read(&a.manifest)?;
    let root = manifest_root(&a.manifest);
    let features = match &a.features {
        Some(p) => {
            let (f, side) = read_latents(p)?;
            if f.n != manifest.records.len() {
                return Err(Error::Config(format!(
                    "{} latent rows for {} manifest records",
                    f.n,
                    manifest.records.len()
                )));
            }
            if side.manifest_hash != manifest.hash()? {
                return Err(Error::Config("latents were exported for a different manifest".into()));
            }
            f
        }
        None => image_feature_matrix(&manifest, &root, 4)?,
    };
    let n = manifest.records.len();
    let stride = a.max_points.map_or(1, |m| n.div_ceil(m.max(1)).max(1));
    let rows: Vec<usize> = (0..n).step_by(stride).collect();
    let sel = features.select(&rows);
    let meta = rows
        .iter()
        .map(|&i| {
            let r = &manifest.records[i];
            PointMeta {
                subject_id: Some(r.subject_id),
                bmi: Some(r.bmi),
                bmi_group: Some(bmi_group(r.bmi)),
                swing_side: Some(r.swing_side),
            }
        })
        .collect();
    let x = FeatureMatrix::new(sel.n, sel.d, sel.data.iter().map(|&v| f64::from(v)).collect())?.with_meta(meta)?;
    let mut cfg = ctx.config.tsne;
    cfg.seed = ctx.seed;
    if let Some(p) = a.perplexity {
        cfg.perplexity = p;
    }
    if let Some(i) = a.iterations {
        cfg.iterations = i;
    }
    let emb = tsne(&x, &cfg)?;
    let p = ctx.out(&a.out, "embedding.csv");
    emb.write_csv(&p)?;
    Ok(vec![p])
}

fn baseline_cmd(ctx: &Ctx, a: &BaselineArgs) -> Result<Vec<PathBuf>> {
    let manifest = DatasetManifest::read(&a.manifest)?;
    let root = manifest_root(&a.manifest);
    let source = match &a.features {
        Some(path) => FeatureSource::Latents { path: path.clone() },
        None => FeatureSource::default(),
    };
    let report = knn_baseline(&manifest, &root, a.k.unwrap_or(ctx.config.knn_k), &source)?;
    let p = ctx.out(&a.out, "report.json");
    report.write(&p)?;
    let png = p.with_extension("png");
    confusion_png(&report, &png)?;
    Ok(vec![p, png])
}

/// Parses an embedding CSV written by the `tsne` command.
pub fn read_embedding_csv(path: &Path) -> Result<Vec<EmbeddingPoint>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let bad = |line: usize| Error::Config(format!("{}:{line}: malformed embedding row", path.display()));
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad(i + 1));
            }
            let x = f[1].parse().map_err(|_| bad(i + 1))?;
            let y = f[2].parse().map_err(|_| bad(i + 1))?;
            let subject_id = if f[3].is_empty() { None } else { Some(f[3].parse().map_err(|_| bad(i + 1))?) };
            let bmi: Option<f64> = if f[4].is_empty() { None } else { Some(f[4].parse().map_err(|_| bad(i + 1))?) };
            Ok(EmbeddingPoint {
                x,
                y,
                meta: PointMeta {
                    subject_id,
                    bmi,
                    bmi_group: bmi.map(bmi_group),
                    swing_side: None,
                },
            })
        })
        .collect()
}

fn plot_cmd(a: &PlotArgs) -> Result<Vec<PathBuf>> {
    if let Some(r) = &a.report {
        confusion_png(&crate::knn::EvaluationReport::read(r)?, &a.out)?;
    } else if let Some(e) = &a.embedding {
        let color = match a.color_by {
            ColorChoice::Subject => ColorBy::Subject,
            ColorChoice::Bmi => ColorBy::BmiGroup,
        };
        scatter_png(&read_embedding_csv(e)?, color, &a.out)?;
    }
    Ok(vec![a.out.clone()])
}

/// One-line diagnostic: `error kind=<kind> message="<text>"`.
pub fn diagnostic(e: &Error) -> String {
    format!("error kind={} message={:?}", e.kind(), e.to_string())
}
