//! Labeled half-gait image datasets and their JSON manifest.
//!
//! A dataset is one recording session: every subject walks once per
//! condition, the record is segmented and each half gait is rendered to
//! `images/s{seed}/{condition}/subject{ID}_gait{K}_snr{dB}.png`. Paths in the
//! manifest are relative to the directory holding `manifest.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::body::RcsModel;
use crate::cohort::{Cohort, Gender, SubjectProfile};
use crate::error::{Error, Result};
use crate::gait::{
    gait_parameters, simulate_trajectories, GaitClock, GaitParameters, GaitStyle, RadarPose,
    SimulationSetup, WalkMode, TREADMILL_SPEED,
};
use crate::radar::{apply_snr, synthesize, BasebandSignal, RadarConfig};
use crate::render::{image_file_name, render_image, RenderConfig};
use crate::segment::{segment, slice_half_gaits, GaitSegmentation, HalfGaitSpan, SegmentConfig, SwingSide};
use crate::spectrogram::{spectrogram, Spectrogram, StftConfig};

pub const MANIFEST_FILE: &str = "manifest.json";

/// SplitMix64 finalizer folded over `parts`.
pub fn mix_seed(seed: u64, parts: &[u64]) -> u64 {
    let mut z = seed;
    for &p in parts {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(p);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub range_m: f64,
    /// SNR of the reference subject at the reference range; `None` is
    /// noiseless.
    pub reference_snr_db: Option<f64>,
    pub duration_s: f64,
    pub speed_m_s: f64,
}

impl Condition {
    pub fn high_snr() -> Self {
        Self {
            name: "high_snr".into(),
            range_m: 3.0,
            reference_snr_db: Some(30.0),
            duration_s: 180.0,
            speed_m_s: TREADMILL_SPEED,
        }
    }

    pub fn low_snr() -> Self {
        Self {
            name: "low_snr".into(),
            range_m: 10.0,
            ..Self::high_snr()
        }
    }

    pub fn with_duration(mut self, duration_s: f64) -> Self {
        self.duration_s = duration_s;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub conditions: Vec<Condition>,
    pub radar: RadarConfig,
    pub stft: StftConfig,
    pub segment: SegmentConfig,
    pub render: RenderConfig,
    pub mode: WalkMode,
    pub radar_pose: RadarPose,
    /// Relative per-subject walking-style perturbation.
    pub style_spread: f64,
    /// Keep half gaits cut by the start or end of a record.
    pub include_partial: bool,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            conditions: vec![Condition::high_snr()],
            radar: RadarConfig::default(),
            stft: StftConfig::default(),
            segment: SegmentConfig::default(),
            render: RenderConfig::default(),
            mode: WalkMode::Treadmill,
            radar_pose: RadarPose::default(),
            style_spread: 0.1,
            include_partial: true,
        }
    }
}

impl DatasetConfig {
    /// `paper-highsnr`, `paper-lowsnr` or `paper-mixed`.
    pub fn preset(name: &str) -> Result<Self> {
        let conditions = match name {
            "paper-highsnr" => vec![Condition::high_snr()],
            "paper-lowsnr" => vec![Condition::low_snr()],
            "paper-mixed" => vec![Condition::high_snr(), Condition::low_snr()],
            other => {
                return Err(Error::Config(format!(
                    "unknown preset '{other}' (expected paper-highsnr, paper-lowsnr or paper-mixed)"
                )))
            }
        };
        Ok(Self {
            conditions,
            ..Default::default()
        })
    }

    pub fn with_duration(mut self, duration_s: f64) -> Self {
        for c in &mut self.conditions {
            c.duration_s = duration_s;
        }
        self
    }
}

/// Walking style of a subject; fixed by the cohort seed so it is shared by
/// every session.
pub fn subject_style(cohort: &Cohort, id: u32, spread: f64) -> GaitStyle {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cohort.seed, &[0x5717_1E, u64::from(id)]));
    GaitStyle::jittered(&mut rng, spread)
}

#[derive(Debug, Clone)]
pub struct SimulatedRecord {
    pub params: GaitParameters,
    pub clock: GaitClock,
    pub signal: BasebandSignal,
    pub spectrogram: Spectrogram,
}

/// One walk of `profile` under `cond`: kinematics, synthesis at the radar pose,
/// range scaling with noise, and the micro-Doppler map.
pub fn simulate_record(
    profile: &SubjectProfile,
    rcs: &RcsModel,
    cond: &Condition,
    cfg: &DatasetConfig,
    style: &GaitStyle,
    start_phase: f64,
    noise_seed: u64,
) -> Result<SimulatedRecord> {
    let params = gait_parameters(profile, cond.speed_m_s)?;
    let setup = SimulationSetup {
        mode: cfg.mode,
        duration_s: cond.duration_s,
        sample_rate_hz: cfg.radar.slow_time_rate_hz,
        radar_pose: cfg.radar_pose,
        start_phase,
        style: *style,
        ..Default::default()
    };
    let traj = simulate_trajectories(profile, &params, &setup)?;
    let radar = RadarConfig {
        reference_snr_db: cond.reference_snr_db,
        ..cfg.radar
    };
    let clean = synthesize(&traj, &profile.segments(rcs), &radar)?.with_subject(profile.id);
    let signal = apply_snr(&clean, cond.range_m, &radar, noise_seed)?;
    let spectrogram = spectrogram(&signal, &cfg.stft, &radar)?;
    Ok(SimulatedRecord {
        params,
        clock: traj.clock,
        signal,
        spectrogram,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub path: String,
    pub subject_id: u32,
    pub bmi: f64,
    pub gender: Gender,
    pub swing_side: SwingSide,
    pub snr_db: Option<f64>,
    pub range_m: f64,
    pub condition: String,
    pub session_seed: u64,
    pub gait_index: usize,
    pub start_s: f64,
    pub end_s: f64,
    pub complete: bool,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dataset_id: String,
    pub seed: u64,
    /// Seeds of the recording sessions, training session first.
    pub sessions: Vec<u64>,
    pub cohort: Cohort,
    pub config: DatasetConfig,
    pub records: Vec<ImageRecord>,
}

impl DatasetManifest {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::file(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?)
    }

    /// Hex SHA-256 of the serialized manifest.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_json()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn count(&self, split: Split) -> usize {
        self.records.iter().filter(|r| r.split == split).count()
    }

    pub fn indices(&self, split: Split) -> Vec<usize> {
        (0..self.records.len())
            .filter(|&i| self.records[i].split == split)
            .collect()
    }

    /// Image counts per `(subject, condition, split)`.
    pub fn counts(&self) -> BTreeMap<(u32, String, Split), usize> {
        let mut out = BTreeMap::new();
        for r in &self.records {
            *out.entry((r.subject_id, r.condition.clone(), r.split)).or_insert(0) += 1;
        }
        out
    }

    /// Every listed image exists under `root` and no path is listed twice.
    pub fn validate(&self, root: &Path) -> Result<()> {
        let mut seen = BTreeSet::new();
        for r in &self.records {
            if !seen.insert(&r.path) {
                return Err(Error::Constraint(format!("image '{}' listed twice", r.path)));
            }
            if !root.join(&r.path).is_file() {
                return Err(Error::Constraint(format!("image '{}' does not exist", r.path)));
            }
        }
        Ok(())
    }
}

struct Job<'a> {
    subject: &'a SubjectProfile,
    condition: &'a Condition,
}

/// Segmentation and spans of one simulated record.
pub fn slice_record(record: &SimulatedRecord, cfg: &DatasetConfig) -> Result<(GaitSegmentation, Vec<HalfGaitSpan>)> {
    let seg = segment(&record.spectrogram, &cfg.segment)?;
    let spans = slice_half_gaits(&seg, Some(&record.clock))
        .into_iter()
        .filter(|s| cfg.include_partial || s.complete)
        .collect();
    Ok((seg, spans))
}

fn run_job(job: &Job, cohort: &Cohort, cfg: &DatasetConfig, session: u64, root: &Path) -> Result<Vec<ImageRecord>> {
    let id = job.subject.id;
    let cond = job.condition;
    let cond_key = cond.name.bytes().fold(0u64, |h, b| h.wrapping_mul(131).wrapping_add(u64::from(b)));
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(session, &[u64::from(id), cond_key]));
    let start_phase: f64 = rng.random_range(0.0..1.0);
    let noise_seed: u64 = rng.random();
    let style = subject_style(cohort, id, cfg.style_spread);
    let record = simulate_record(job.subject, &cohort.rcs, cond, cfg, &style, start_phase, noise_seed)?;
    let (_, spans) = slice_record(&record, cfg)?;

    let rel_dir = PathBuf::from("images").join(format!("s{session}")).join(&cond.name);
    let dir = root.join(&rel_dir);
    std::fs::create_dir_all(&dir).map_err(|e| Error::file(&dir, e))?;
    let snr = record.signal.snr_db;
    spans
        .iter()
        .enumerate()
        .map(|(k, span)| {
            let name = image_file_name(id, k, snr);
            let img = render_image(&record.spectrogram, span.span, &cfg.render)?;
            img.write_png(&dir.join(&name))?;
            Ok(ImageRecord {
                path: format!("{}/{name}", rel_dir.to_string_lossy()),
                subject_id: id,
                bmi: job.subject.bmi(),
                gender: job.subject.gender,
                swing_side: span.side,
                snr_db: snr,
                range_m: cond.range_m,
                condition: cond.name.clone(),
                session_seed: session,
                gait_index: k,
                start_s: span.span.start_s,
                end_s: span.span.end_s,
                complete: span.complete,
                split: Split::Train,
            })
        })
        .collect()
}

fn generate_session(
    cohort: &Cohort,
    cfg: &DatasetConfig,
    session: u64,
    root: &Path,
) -> Result<Vec<ImageRecord>> {
    if cohort.subjects.is_empty() {
        return Err(Error::Config("cohort is empty".into()));
    }
    if cfg.conditions.is_empty() {
        return Err(Error::Config("no acquisition conditions given".into()));
    }
    let mut names = BTreeSet::new();
    for c in &cfg.conditions {
        if !names.insert(&c.name) {
            return Err(Error::Config(format!("duplicate condition name '{}'", c.name)));
        }
    }
    let jobs: Vec<Job> = cfg
        .conditions
        .iter()
        .flat_map(|condition| cohort.subjects.iter().map(move |subject| Job { subject, condition }))
        .collect();
    let parts: Vec<Vec<ImageRecord>> = jobs
        .par_iter()
        .map(|job| {
            run_job(job, cohort, cfg, session, root).map_err(|e| {
                e.context(format!("subject {} condition {}", job.subject.id, job.condition.name))
            })
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// Simulates, segments and renders every `(subject, condition)` pair, writes
/// the images under `root` and returns the manifest (not yet written).
pub fn generate_dataset(
    cohort: &Cohort,
    cfg: &DatasetConfig,
    seed: u64,
    dataset_id: &str,
    root: &Path,
) -> Result<DatasetManifest> {
    let records = generate_session(cohort, cfg, seed, root)?;
    Ok(DatasetManifest {
        dataset_id: dataset_id.to_string(),
        seed,
        sessions: vec![seed],
        cohort: cohort.clone(),
        config: cfg.clone(),
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum SplitPolicy {
    /// Test images come from a second, independently seeded session.
    FreshSession,
    RandomFraction { test_fraction: f64 },
}

/// Tags every record train or test. `FreshSession` simulates the test session
/// with `seed` (which must differ from the training session seed) and
/// truncates both sessions to equal counts per subject and condition.
pub fn split_dataset(manifest: &DatasetManifest, policy: SplitPolicy, seed: u64, root: &Path) -> Result<DatasetManifest> {
    let mut out = manifest.clone();
    match policy {
        SplitPolicy::RandomFraction { test_fraction } => {
            if !(test_fraction > 0.0 && test_fraction < 1.0) {
                return Err(Error::Config(format!(
                    "test fraction must lie in (0, 1), got {test_fraction}"
                )));
            }
            let mut idx: Vec<usize> = (0..out.records.len()).collect();
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let n_test = (test_fraction * idx.len() as f64).round() as usize;
            for r in &mut out.records {
                r.split = Split::Train;
            }
            for &i in &idx[..n_test] {
                out.records[i].split = Split::Test;
            }
        }
        SplitPolicy::FreshSession => {
            let train_session = manifest.seed;
            if seed == train_session {
                return Err(Error::Config(format!(
                    "test session seed {seed} equals the training session seed"
                )));
            }
            let mut test = generate_session(&manifest.cohort, &manifest.config, seed, root)?;
            for r in &mut test {
                r.split = Split::Test;
            }
            let mut train: Vec<ImageRecord> = manifest
                .records
                .iter()
                .filter(|r| r.session_seed == train_session)
                .cloned()
                .map(|mut r| {
                    r.split = Split::Train;
                    r
                })
                .collect();
            let count = |rs: &[ImageRecord]| {
                let mut m: BTreeMap<(u32, String), usize> = BTreeMap::new();
                for r in rs {
                    *m.entry((r.subject_id, r.condition.clone())).or_insert(0) += 1;
                }
                m
            };
            let (ct, cs) = (count(&train), count(&test));
            let keep = |rs: Vec<ImageRecord>, root: &Path| -> Result<Vec<ImageRecord>> {
                let mut seen: BTreeMap<(u32, String), usize> = BTreeMap::new();
                let mut kept = Vec::new();
                for r in rs {
                    let key = (r.subject_id, r.condition.clone());
                    let limit = ct.get(&key).copied().unwrap_or(0).min(cs.get(&key).copied().unwrap_or(0));
                    let n = seen.entry(key).or_insert(0);
                    if *n < limit {
                        *n += 1;
                        kept.push(r);
                    } else {
                        let p = root.join(&r.path);
                        std::fs::remove_file(&p).map_err(|e| Error::file(&p, e))?;
                    }
                }
                Ok(kept)
            };
            train = keep(train, root)?;
            let test = keep(test, root)?;
            out.records = train;
            out.records.extend(test);
            out.sessions = vec![train_session, seed];
        }
    }
    Ok(out)
}
