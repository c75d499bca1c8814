//! Reproducible end-to-end runs: cropping, dataset builds, identification,
//! segmentation, synthetic corpora and evaluation.
//!
//! Every command takes a [`RunConfig`] and embeds it in the manifest it
//! writes. Outputs are sorted and free of timestamps, so identical inputs and
//! configs give byte-identical files.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{identify_intersection, FrameVerdict, DEFAULT_MIN_PDOTS, DEFAULT_SCORE_THRESHOLD};
use crate::classifier::{
    load_predictions, DepthHeuristic, LinearModel, PdotClassifier, PdotScore, PredictionTable,
};
use crate::dataset::{
    build_direct_dataset, materialize_plan, plan_pdot_dataset, write_annotations, CropLabel, CropOrigin,
    CropParams, FrameAnnotation, PdotSet, SoftLabeledFrame, DEFAULT_JITTER_DEG, DEFAULT_KEEP_NEGATIVE,
    DEFAULT_STRIDE,
};
use crate::error::{Error, Result};
use crate::raster::EquirectImage;
use crate::sampler::{crop_ring, ViewRing, DEFAULT_FOV_DEG, DEFAULT_OUT_SIZE, DEFAULT_VIEWS};
use crate::segment::{smooth_decisions, split_points, split_segments, Segment, DEFAULT_MIN_RUN};
use crate::synth::{generate_scene, render_depth_panorama, SceneKind, SceneSample};

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartYawMode {
    /// Every frame's ring starts at yaw 0.
    Fixed,
    /// Each frame draws its start yaw from the seeded generator.
    Random,
}

/// Hyperparameters handed to the external CNN trainer. Not used in-process;
/// carried so dataset manifests record the intended training recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainerDefaults {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub input_size: usize,
    pub augmentations: Vec<String>,
}

impl Default for TrainerDefaults {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            batch_size: 8,
            epochs: 300,
            input_size: 224,
            augmentations: vec![
                "horizontal_flip".into(),
                "color_jitter".into(),
                "random_erasing".into(),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub views: usize,
    pub fov_deg: f64,
    pub out_size: usize,
    pub k: usize,
    pub score_threshold: f64,
    pub start_yaw: StartYawMode,
    /// `depth`, `depth:<tau>`, `linear:<path>` or `predictions:<path>`.
    pub classifier: String,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub min_run: usize,
    pub stride: usize,
    pub keep_negative: f64,
    pub jitter_deg: f64,
    pub trainer: TrainerDefaults,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            views: DEFAULT_VIEWS,
            fov_deg: DEFAULT_FOV_DEG,
            out_size: DEFAULT_OUT_SIZE,
            k: DEFAULT_MIN_PDOTS,
            score_threshold: DEFAULT_SCORE_THRESHOLD,
            start_yaw: StartYawMode::Fixed,
            classifier: "depth".into(),
            seed: 0,
            workers: 0,
            min_run: DEFAULT_MIN_RUN,
            stride: DEFAULT_STRIDE,
            keep_negative: DEFAULT_KEEP_NEGATIVE,
            jitter_deg: DEFAULT_JITTER_DEG,
            trainer: TrainerDefaults::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let cfg: Self = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.as_ref().display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ViewRing::with_overlap(0.0, self.views, self.fov_deg, self.out_size)?;
        if self.k == 0 || self.k > self.views {
            return Err(Error::Config(format!("k = {} must be in 1..={}", self.k, self.views)));
        }
        if !(0.0..=1.0).contains(&self.score_threshold) {
            return Err(Error::Config(format!("score threshold {} outside [0, 1]", self.score_threshold)));
        }
        if self.stride == 0 || !(0.0..=1.0).contains(&self.keep_negative) {
            return Err(Error::Config("stride must be positive and keep_negative in [0, 1]".into()));
        }
        if !(self.jitter_deg.is_finite() && self.jitter_deg >= 0.0) {
            return Err(Error::Config(format!("jitter {} deg", self.jitter_deg)));
        }
        ClassifierSpec::from_str(&self.classifier)?;
        Ok(())
    }

    pub fn crop_params(&self) -> CropParams {
        CropParams {
            fov_deg: self.fov_deg,
            out_size: self.out_size,
            jitter_deg: self.jitter_deg,
        }
    }

    /// The ring for the `index`-th frame of a sorted run.
    pub fn ring_for(&self, index: usize) -> Result<ViewRing> {
        let start = match self.start_yaw {
            StartYawMode::Fixed => 0.0,
            StartYawMode::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(index as u64);
                rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)
            }
        };
        ViewRing::with_overlap(start, self.views, self.fov_deg, self.out_size)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierSpec {
    Depth { tau: Option<f64> },
    Linear(PathBuf),
    Predictions(PathBuf),
}

impl FromStr for ClassifierSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        match (head, arg) {
            ("depth", None) => Ok(Self::Depth { tau: None }),
            ("depth", Some(t)) => t
                .parse()
                .map(|tau| Self::Depth { tau: Some(tau) })
                .map_err(|_| Error::Config(format!("bad depth threshold {t:?}"))),
            ("linear", Some(p)) if !p.is_empty() => Ok(Self::Linear(p.into())),
            ("predictions", Some(p)) if !p.is_empty() => Ok(Self::Predictions(p.into())),
            _ => Err(Error::Config(format!(
                "classifier {s:?}: expected depth[:tau], linear:<path> or predictions:<path>"
            ))),
        }
    }
}

/// Where per-view scores come from during identification.
pub enum Scorer {
    Model(Box<dyn PdotClassifier>),
    Table(PredictionTable),
}

impl Scorer {
    pub fn from_spec(spec: &ClassifierSpec) -> Result<Self> {
        Ok(match spec {
            ClassifierSpec::Depth { tau } => Self::Model(Box::new(match tau {
                Some(t) => DepthHeuristic::new(*t)?,
                None => DepthHeuristic::default(),
            })),
            ClassifierSpec::Linear(p) => Self::Model(Box::new(LinearModel::load(p)?)),
            ClassifierSpec::Predictions(p) => Self::Table(load_predictions(p)?),
        })
    }
}

/// Crops the ring from one panorama, scores each view and aggregates.
pub fn identify_frame(
    erp: &EquirectImage,
    frame_id: &str,
    ring: &ViewRing,
    classifier: &dyn PdotClassifier,
    k: usize,
    score_threshold: f64,
) -> Result<FrameVerdict> {
    let crops = crop_ring(erp, ring, frame_id)?;
    let scores = crops
        .iter()
        .map(|c| classifier.classify(c))
        .collect::<Result<Vec<PdotScore>>>()?;
    identify_intersection(frame_id, &scores, k, score_threshold)
}

/// Image files of a directory, or the paths listed one per line in a text file.
pub fn collect_inputs(path: &Path) -> Result<Vec<PathBuf>> {
    let mut out = if path.is_dir() {
        let mut v = Vec::new();
        for e in std::fs::read_dir(path)? {
            let p = e?.path();
            let ext = p
                .extension()
                .map(|e| e.to_string_lossy().to_ascii_lowercase())
                .unwrap_or_default();
            if p.is_file() && IMAGE_EXTENSIONS.contains(&ext.as_str()) {
                v.push(p);
            }
        }
        v
    } else if IMAGE_EXTENSIONS.iter().any(|e| {
        path.extension()
            .is_some_and(|x| x.to_string_lossy().eq_ignore_ascii_case(e))
    }) {
        vec![path.to_owned()]
    } else {
        let base = path.parent().unwrap_or(Path::new(""));
        std::fs::read_to_string(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| base.join(l))
            .collect()
    };
    out.sort();
    Ok(out)
}

pub fn frame_id_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// `<dir>/<frame_id>.{png,jpg,jpeg}`, whichever exists first.
pub fn find_image(dir: &Path, frame_id: &str) -> Option<PathBuf> {
    IMAGE_EXTENSIONS
        .iter()
        .map(|e| dir.join(format!("{frame_id}.{e}")))
        .find(|p| p.is_file())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifyOutput {
    pub run_config: RunConfig,
    /// Sorted by frame id.
    pub verdicts: Vec<FrameVerdict>,
    /// Frames whose image could not be read.
    pub skipped: Vec<String>,
}

/// Identifies every frame of `input` (an image, a directory or a frame
/// list). In predictions mode `input` may be omitted, in which case every
/// frame of the prediction file is used, and images are never opened.
pub fn cmd_identify(input: Option<&Path>, cfg: &RunConfig) -> Result<IdentifyOutput> {
    cfg.validate()?;
    let scorer = Scorer::from_spec(&ClassifierSpec::from_str(&cfg.classifier)?)?;
    let paths = match input {
        Some(p) => collect_inputs(p)?,
        None => Vec::new(),
    };
    let mut frames: Vec<(String, Option<PathBuf>)> = paths.into_iter().map(|p| (frame_id_of(&p), Some(p))).collect();

    let verdicts_and_skips: Vec<std::result::Result<FrameVerdict, String>> = match &scorer {
        Scorer::Table(table) => {
            table.check_view_count(cfg.views)?;
            if input.is_none() {
                frames = table.frame_ids().into_iter().map(|f| (f, None)).collect();
            }
            frames.sort();
            frames
                .iter()
                .map(|(fid, _)| {
                    let scores = table.scores_for(fid, cfg.views)?;
                    Ok(Ok(identify_intersection(fid, &scores, cfg.k, cfg.score_threshold)?))
                })
                .collect::<Result<_>>()?
        }
        Scorer::Model(model) => {
            if input.is_none() {
                return Err(Error::Config("an input is required unless scoring from predictions".into()));
            }
            frames.sort();
            let pool = cfg.pool()?;
            pool.install(|| {
                frames
                    .par_iter()
                    .enumerate()
                    .map(|(i, (fid, path))| {
                        let path = path.as_ref().expect("model mode has paths");
                        let erp = match EquirectImage::load(path) {
                            Ok(e) => e,
                            Err(e) => {
                                log::warn!("skipping {}: {e}", path.display());
                                return Ok(Err(fid.clone()));
                            }
                        };
                        let ring = cfg.ring_for(i)?;
                        Ok(Ok(identify_frame(&erp, fid, &ring, model.as_ref(), cfg.k, cfg.score_threshold)?))
                    })
                    .collect::<Result<Vec<_>>>()
            })?
        }
    };
    let mut verdicts = Vec::new();
    let mut skipped = Vec::new();
    for r in verdicts_and_skips {
        match r {
            Ok(v) => verdicts.push(v),
            Err(f) => skipped.push(f),
        }
    }
    if !skipped.is_empty() {
        log::warn!("{} unreadable frames skipped", skipped.len());
    }
    Ok(IdentifyOutput {
        run_config: cfg.clone(),
        verdicts,
        skipped,
    })
}

pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_owned(),
            line: i + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentManifest {
    pub run_config: RunConfig,
    pub video_id: String,
    pub split_points: Vec<usize>,
    pub segments: Vec<Segment>,
}

/// Smooths a video's verdicts (in frame order) and splits it at intersections.
pub fn cmd_segment(video_id: &str, verdicts: &[FrameVerdict], cfg: &RunConfig) -> Result<SegmentManifest> {
    let smoothed = smooth_decisions(verdicts, cfg.min_run)?;
    Ok(SegmentManifest {
        run_config: cfg.clone(),
        video_id: video_id.to_owned(),
        split_points: split_points(&smoothed),
        segments: split_segments(video_id, &smoothed),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthLabel {
    pub frame_id: String,
    pub is_intersection: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

impl Confusion {
    fn add(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.true_positive += 1,
            (true, false) => self.false_positive += 1,
            (false, false) => self.true_negative += 1,
            (false, true) => self.false_negative += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_positive + self.false_positive + self.true_negative + self.false_negative
    }

    pub fn correct(&self) -> usize {
        self.true_positive + self.true_negative
    }

    /// `None` for an empty group.
    pub fn accuracy(&self) -> Option<f64> {
        (self.total() > 0).then(|| self.correct() as f64 / self.total() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub train_domain: String,
    pub groups: BTreeMap<String, Confusion>,
    pub overall: Confusion,
}

impl EvalReport {
    pub fn accuracy(&self) -> f64 {
        self.overall.accuracy().unwrap_or(0.0)
    }
}

pub const UNGROUPED: &str = "all";

/// Scores verdicts against labels. Every labeled frame needs a verdict;
/// verdicts without a label are ignored.
pub fn cmd_eval(
    verdicts: &[FrameVerdict],
    labels: &[GroundTruthLabel],
    method: &str,
    train_domain: &str,
) -> Result<EvalReport> {
    let mut by_id: BTreeMap<&str, bool> = BTreeMap::new();
    for v in verdicts {
        if by_id.insert(v.frame_id.as_str(), v.is_intersection).is_some() {
            return Err(Error::Evaluation(format!("duplicate verdict for {:?}", v.frame_id)));
        }
    }
    let mut groups: BTreeMap<String, Confusion> = BTreeMap::new();
    let mut overall = Confusion::default();
    for l in labels {
        let predicted = *by_id
            .get(l.frame_id.as_str())
            .ok_or_else(|| Error::Evaluation(format!("no verdict for labeled frame {:?}", l.frame_id)))?;
        overall.add(predicted, l.is_intersection);
        groups
            .entry(l.group.clone().unwrap_or_else(|| UNGROUPED.into()))
            .or_default()
            .add(predicted, l.is_intersection);
    }
    let unlabeled = verdicts.len().saturating_sub(labels.len());
    if unlabeled > 0 {
        log::info!("{unlabeled} verdicts have no label");
    }
    Ok(EvalReport {
        method: method.to_owned(),
        train_domain: train_domain.to_owned(),
        groups,
        overall,
    })
}

/// Plain-text accuracy table: one row per (method, training domain), one
/// column per test group plus the overall accuracy.
pub fn render_eval_table(reports: &[EvalReport]) -> String {
    let mut cols: Vec<&str> = reports.iter().flat_map(|r| r.groups.keys().map(String::as_str)).collect();
    cols.sort_unstable();
    cols.dedup();
    let head_w = reports
        .iter()
        .map(|r| r.method.len() + r.train_domain.len() + 3)
        .chain([17])
        .max()
        .unwrap_or(17);
    let col_w = cols.iter().map(|c| c.len()).chain([7]).max().unwrap_or(7) + 2;
    let mut s = format!("{:<head_w$}", "method (train)");
    for c in &cols {
        s.push_str(&format!("{c:>col_w$}"));
    }
    s.push_str(&format!("{:>col_w$}\n", "overall"));
    for r in reports {
        s.push_str(&format!("{:<head_w$}", format!("{} ({})", r.method, r.train_domain)));
        for c in &cols {
            let cell = r
                .groups
                .get(*c)
                .and_then(Confusion::accuracy)
                .map(|a| format!("{a:.3}"))
                .unwrap_or_else(|| "-".into());
            s.push_str(&format!("{cell:>col_w$}"));
        }
        s.push_str(&format!("{:>col_w$}\n", format!("{:.3}", r.accuracy())));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthEntry {
    pub scene_id: String,
    pub kind: SceneKind,
    pub depth: String,
    pub shaded: String,
    pub gt_is_intersection: bool,
    pub gt_pdot_count: usize,
    pub omnidirectional: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub run_config: RunConfig,
    pub seed: u64,
    pub count_per_kind: usize,
    pub width: usize,
    pub entries: Vec<SynthEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub scene_id: String,
    #[serde(flatten)]
    pub scene: SceneSample,
}

/// Generates `count_per_kind` scenes of each kind, seeded by `cfg.seed`.
///
/// Writes `depth/<id>.png` (16-bit millimeters), `shaded/<id>.png`,
/// `scenes.jsonl`, `labels.jsonl`, `annotations.jsonl` and `manifest.json`.
pub fn cmd_synth(count_per_kind: usize, width: usize, out_dir: &Path, cfg: &RunConfig) -> Result<SynthManifest> {
    std::fs::create_dir_all(out_dir.join("depth"))?;
    std::fs::create_dir_all(out_dir.join("shaded"))?;
    let jobs: Vec<(usize, SceneKind, usize)> = SceneKind::ALL
        .iter()
        .flat_map(|&k| (0..count_per_kind).map(move |i| (k, i)))
        .enumerate()
        .map(|(g, (k, i))| (g, k, i))
        .collect();
    let pool = cfg.pool()?;
    let rendered: Vec<(SynthEntry, SceneRecord)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(g, kind, i)| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(g as u64);
                let scene = generate_scene(kind, &mut rng)?;
                let id = format!("{}_{i:04}", kind.as_str());
                let (depth, shaded) = render_depth_panorama(&scene.map, &scene.pose, width)?;
                let depth_rel = format!("depth/{id}.png");
                let shaded_rel = format!("shaded/{id}.png");
                depth.save_png(out_dir.join(&depth_rel))?;
                shaded.save_png(out_dir.join(&shaded_rel))?;
                Ok((
                    SynthEntry {
                        scene_id: id.clone(),
                        kind,
                        depth: depth_rel,
                        shaded: shaded_rel,
                        gt_is_intersection: scene.gt_is_intersection,
                        gt_pdot_count: scene.gt_pdot_count(),
                        omnidirectional: scene.omnidirectional,
                    },
                    SceneRecord { scene_id: id, scene },
                ))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let labels: Vec<GroundTruthLabel> = rendered
        .iter()
        .map(|(e, _)| GroundTruthLabel {
            frame_id: e.scene_id.clone(),
            is_intersection: e.gt_is_intersection,
            group: Some(e.kind.as_str().into()),
        })
        .collect();
    let annotations: Vec<FrameAnnotation> = rendered
        .iter()
        .enumerate()
        .map(|(i, (_, r))| FrameAnnotation {
            frame_id: r.scene_id.clone(),
            video_id: "synth".into(),
            frame_index: i as u64,
            fps: crate::dataset::DEFAULT_FPS,
            is_key_intersection: r.scene.gt_is_intersection,
            pdots: if r.scene.omnidirectional {
                PdotSet::Omnidirectional
            } else {
                PdotSet::Yaws(r.scene.gt_pdot_yaws.clone())
            },
        })
        .collect();
    let (entries, scenes): (Vec<SynthEntry>, Vec<SceneRecord>) = rendered.into_iter().unzip();
    write_jsonl(out_dir.join("scenes.jsonl"), &scenes)?;
    write_jsonl(out_dir.join("labels.jsonl"), &labels)?;
    write_annotations(out_dir.join("annotations.jsonl"), &annotations)?;
    let manifest = SynthManifest {
        run_config: cfg.clone(),
        seed: cfg.seed,
        count_per_kind,
        width,
        entries,
    };
    write_json(out_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropEntry {
    pub path: String,
    pub frame_id: String,
    pub view_index: usize,
    pub yaw_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropManifest {
    pub run_config: RunConfig,
    pub ring_overlapping: bool,
    pub entries: Vec<CropEntry>,
    pub skipped: Vec<String>,
}

/// Writes the view ring of every input panorama as `<frame_id>_v<k>.png`.
pub fn cmd_crop(input: &Path, out_dir: &Path, cfg: &RunConfig) -> Result<CropManifest> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let paths = collect_inputs(input)?;
    let pool = cfg.pool()?;
    let per_frame: Vec<std::result::Result<Vec<CropEntry>, String>> = pool.install(|| {
        paths
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let fid = frame_id_of(p);
                let erp = match EquirectImage::load(p) {
                    Ok(e) => e,
                    Err(e) => {
                        log::warn!("skipping {}: {e}", p.display());
                        return Ok(Err(fid));
                    }
                };
                let ring = cfg.ring_for(i)?;
                let crops = crop_ring(&erp, &ring, &fid)?;
                let mut entries = Vec::with_capacity(crops.len());
                for (k, c) in crops.iter().enumerate() {
                    let rel = format!("{fid}_v{k}.png");
                    c.raster.save_png(out_dir.join(&rel))?;
                    entries.push(CropEntry {
                        path: rel,
                        frame_id: fid.clone(),
                        view_index: k,
                        yaw_deg: c.view.center_yaw.to_degrees(),
                    });
                }
                Ok(Ok(entries))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for r in per_frame {
        match r {
            Ok(e) => entries.extend(e),
            Err(f) => skipped.push(f),
        }
    }
    let manifest = CropManifest {
        run_config: cfg.clone(),
        ring_overlapping: cfg.ring_for(0)?.overlapping,
        entries,
        skipped,
    };
    write_json(out_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdotCropEntry {
    pub path: String,
    pub frame_id: String,
    pub label: CropLabel,
    pub origin: CropOrigin,
    pub yaw_deg: f64,
}

/// Consumed by the external trainer: one entry per PNG crop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdotDatasetManifest {
    pub run_config: RunConfig,
    pub seed: u64,
    pub positives: usize,
    pub negatives: usize,
    /// Random-region negatives that could not be placed.
    pub balance_shortfall: usize,
    pub skipped_frames: Vec<String>,
    pub entries: Vec<PdotCropEntry>,
}

/// Builds PDoT training crops under `out_dir/crops/` with a `manifest.json`.
pub fn cmd_build_pdot_dataset(
    anns: &[FrameAnnotation],
    images: &Path,
    out_dir: &Path,
    cfg: &RunConfig,
) -> Result<PdotDatasetManifest> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir.join("crops"))?;
    let params = cfg.crop_params();
    let plan = plan_pdot_dataset(anns, &params, cfg.seed);
    let rel = |i: usize| format!("crops/{}_{i:05}.png", plan.crops[i].frame_id);
    let written = Mutex::new(vec![false; plan.crops.len()]);
    let pool = cfg.pool()?;
    let skipped = pool.install(|| {
        materialize_plan(
            &plan,
            anns,
            &params,
            |a| {
                let p = find_image(images, &a.frame_id)
                    .ok_or_else(|| Error::InvalidImage(format!("no image for frame {:?}", a.frame_id)))?;
                EquirectImage::load(p)
            },
            |i, c| {
                c.crop.raster.save_png(out_dir.join(rel(i)))?;
                written.lock().expect("poisoned")[i] = true;
                Ok(())
            },
        )
    })?;
    let written = written.into_inner().expect("poisoned");
    let entries: Vec<PdotCropEntry> = plan
        .crops
        .iter()
        .enumerate()
        .filter(|(i, _)| written[*i])
        .map(|(i, c)| PdotCropEntry {
            path: rel(i),
            frame_id: c.frame_id.clone(),
            label: c.label,
            origin: c.origin,
            yaw_deg: c.yaw.to_degrees(),
        })
        .collect();
    let positives = entries.iter().filter(|e| e.label == CropLabel::Positive).count();
    let manifest = PdotDatasetManifest {
        run_config: cfg.clone(),
        seed: cfg.seed,
        positives,
        negatives: entries.len() - positives,
        balance_shortfall: plan.shortfall,
        skipped_frames: skipped,
        entries,
    };
    write_json(out_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectEntry {
    #[serde(flatten)]
    pub frame: SoftLabeledFrame,
    /// Image path if one was found for the frame id.
    pub image: Option<String>,
}

/// Consumed by the external trainer's direct (whole-frame) task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectDatasetManifest {
    pub run_config: RunConfig,
    pub seed: u64,
    pub entries: Vec<DirectEntry>,
}

pub fn cmd_build_direct_dataset(
    anns: &[FrameAnnotation],
    images: Option<&Path>,
    out: &Path,
    cfg: &RunConfig,
) -> Result<DirectDatasetManifest> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let frames = build_direct_dataset(anns, cfg.stride, cfg.keep_negative, &mut rng)?;
    let entries = frames
        .into_iter()
        .map(|frame| {
            let image = images
                .and_then(|d| find_image(d, &frame.frame_id))
                .map(|p| p.to_string_lossy().into_owned());
            DirectEntry { frame, image }
        })
        .collect();
    let manifest = DirectDatasetManifest {
        run_config: cfg.clone(),
        seed: cfg.seed,
        entries,
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    write_json(out, &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verdict(id: &str, is: bool) -> FrameVerdict {
        FrameVerdict {
            frame_id: id.into(),
            pdot_count: if is { 3 } else { 2 },
            is_intersection: is,
            decisions: vec![],
            k: 3,
        }
    }

    fn label(id: &str, is: bool, group: &str) -> GroundTruthLabel {
        GroundTruthLabel {
            frame_id: id.into(),
            is_intersection: is,
            group: Some(group.into()),
        }
    }

    #[test]
    fn classifier_specs() {
        assert_eq!("depth".parse::<ClassifierSpec>().unwrap(), ClassifierSpec::Depth { tau: None });
        assert_eq!(
            "depth:4.5".parse::<ClassifierSpec>().unwrap(),
            ClassifierSpec::Depth { tau: Some(4.5) }
        );
        assert_eq!(
            "predictions:a/b.jsonl".parse::<ClassifierSpec>().unwrap(),
            ClassifierSpec::Predictions("a/b.jsonl".into())
        );
        assert!("linear".parse::<ClassifierSpec>().is_err());
        assert!("cnn:x".parse::<ClassifierSpec>().is_err());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = RunConfig {
            views: 16,
            fov_deg: 22.5,
            seed: 7,
            start_yaw: StartYawMode::Random,
            ..RunConfig::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(RunConfig::load(&p).unwrap(), cfg);
        std::fs::write(&p, "views = 8\nk = 9\n").unwrap();
        assert!(RunConfig::load(&p).is_err());
        std::fs::write(&p, "bogus = 1\n").unwrap();
        assert!(RunConfig::load(&p).is_err());
    }

    #[test]
    fn ring_start_modes() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.ring_for(3).unwrap().start_yaw, 0.0);
        let r = RunConfig {
            start_yaw: StartYawMode::Random,
            seed: 1,
            ..RunConfig::default()
        };
        assert_eq!(r.ring_for(3).unwrap(), r.ring_for(3).unwrap());
        assert_ne!(r.ring_for(3).unwrap().start_yaw, r.ring_for(4).unwrap().start_yaw);
    }

    #[test]
    fn eval_eight_of_ten() {
        let verdicts: Vec<FrameVerdict> = (0..10).map(|i| verdict(&format!("f{i}"), i < 5)).collect();
        // two labels disagree with their verdicts
        let labels: Vec<GroundTruthLabel> = (0..10)
            .map(|i| label(&format!("f{i}"), (i < 5) != (i == 0 || i == 9), if i < 5 { "a" } else { "b" }))
            .collect();
        let r = cmd_eval(&verdicts, &labels, "depth", "synthetic").unwrap();
        assert_eq!(r.accuracy(), 0.8);
        assert_eq!(r.overall.correct(), 8);
        assert_eq!(r.groups["a"].accuracy(), Some(0.8));
        assert_eq!(r.overall.false_negative + r.overall.false_positive, 2);
        let table = render_eval_table(&[r]);
        assert!(table.contains("depth (synthetic)"));
        assert!(table.contains("0.800"));
    }

    #[test]
    fn eval_perfect_and_inverted() {
        let verdicts: Vec<FrameVerdict> = (0..100).map(|i| verdict(&format!("f{i}"), i < 50)).collect();
        let good: Vec<GroundTruthLabel> = (0..100).map(|i| label(&format!("f{i}"), i < 50, "g")).collect();
        let bad: Vec<GroundTruthLabel> = (0..100).map(|i| label(&format!("f{i}"), i >= 50, "g")).collect();
        assert_eq!(cmd_eval(&verdicts, &good, "m", "t").unwrap().accuracy(), 1.0);
        assert_eq!(cmd_eval(&verdicts, &bad, "m", "t").unwrap().accuracy(), 0.0);
    }

    #[test]
    fn eval_requires_a_verdict_per_label() {
        let err = cmd_eval(&[verdict("a", true)], &[label("b", true, "g")], "m", "t").unwrap_err();
        assert!(matches!(err, Error::Evaluation(_)));
    }

    #[test]
    fn segment_manifest() {
        let verdicts: Vec<FrameVerdict> = (0..100).map(|i| verdict(&format!("{i}"), (40..50).contains(&i))).collect();
        let m = cmd_segment("walk", &verdicts, &RunConfig::default()).unwrap();
        assert_eq!(m.split_points, vec![44]);
        assert_eq!(m.segments.len(), 2);
    }

    #[test]
    fn identify_empty_dir() {
        let dir = tempfile::tempdir().unwrap();
        let out = cmd_identify(Some(dir.path()), &RunConfig::default()).unwrap();
        assert!(out.verdicts.is_empty());
        assert!(out.skipped.is_empty());
    }
}
