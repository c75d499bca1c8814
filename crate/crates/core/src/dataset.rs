//! Training data from annotated panoramas.
//!
//! PDoT crops: positives at annotated directions of travel (with a small yaw
//! jitter), negatives at the bisectors between adjacent directions, topped up
//! with random-region negatives until the classes balance. Direct crops: whole
//! frames with a soft intersection label from the walking time to the nearest
//! key intersection frame.
//!
//! Annotation file: one JSON object per line,
//! `{"frame_id","video_id","frame_index","fps","is_key_intersection","pdot_yaws_deg":[..]}`
//! or with `"omnidirectional": true` in place of the yaw list.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{inner_yaw_angle, normalize_yaw, yaw_gap};
use crate::raster::EquirectImage;
use crate::sampler::{crop_nfov, PerspectiveCrop, ViewSpec, DEFAULT_FOV_DEG, DEFAULT_OUT_SIZE};

pub const DEFAULT_FPS: f64 = 30.0;
pub const DEFAULT_JITTER_DEG: f64 = 5.0;
/// Adjacent PDoTs closer than this leave no room for a clean negative.
pub const MIN_NEGATIVE_GAP_DEG: f64 = 45.0;
/// Random-region negatives keep at least this far from every PDoT.
pub const EXCLUSION_DEG: f64 = 22.5;
pub const DEFAULT_STRIDE: usize = 10;
pub const DEFAULT_KEEP_NEGATIVE: f64 = 0.2;
const DEDUP_TOL_DEG: f64 = 0.01;
const MAX_ABS_YAW_DEG: f64 = 360.0;
const OMNI_POSITIVES: usize = 8;
const BALANCE_ATTEMPTS_PER_CROP: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum PdotSet {
    /// Sorted radians in [-pi, pi), deduplicated modulo 2 pi.
    Yaws(Vec<f64>),
    Omnidirectional,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameAnnotation {
    pub frame_id: String,
    pub video_id: String,
    pub frame_index: u64,
    pub fps: f64,
    pub is_key_intersection: bool,
    pub pdots: PdotSet,
}

/// On-disk form of [`FrameAnnotation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationRecord {
    pub frame_id: String,
    pub video_id: String,
    pub frame_index: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps: Option<f64>,
    pub is_key_intersection: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pdot_yaws_deg: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omnidirectional: Option<bool>,
}

impl FrameAnnotation {
    pub fn from_record(rec: AnnotationRecord) -> Result<Self> {
        let fps = rec.fps.unwrap_or(DEFAULT_FPS);
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::Annotation(format!("fps {fps} must be positive")));
        }
        let pdots = match (rec.omnidirectional.unwrap_or(false), rec.pdot_yaws_deg) {
            (true, Some(_)) => {
                return Err(Error::Annotation(
                    "omnidirectional frame must not list pdot_yaws_deg".into(),
                ))
            }
            (true, None) => {
                if !rec.is_key_intersection {
                    return Err(Error::Annotation(
                        "omnidirectional frame must be a key intersection".into(),
                    ));
                }
                PdotSet::Omnidirectional
            }
            (false, yaws) => {
                let yaws = dedup_yaws_deg(&yaws.unwrap_or_default())?;
                if !rec.is_key_intersection && !yaws.is_empty() && yaws.len() != 2 {
                    return Err(Error::Annotation(format!(
                        "non-intersection frame has {} PDoTs, expected the forward/backward pair",
                        yaws.len()
                    )));
                }
                PdotSet::Yaws(yaws)
            }
        };
        Ok(Self {
            frame_id: rec.frame_id,
            video_id: rec.video_id,
            frame_index: rec.frame_index,
            fps,
            is_key_intersection: rec.is_key_intersection,
            pdots,
        })
    }

    pub fn to_record(&self) -> AnnotationRecord {
        let (pdot_yaws_deg, omnidirectional) = match &self.pdots {
            PdotSet::Yaws(y) => (Some(y.iter().map(|r| r.to_degrees()).collect()), None),
            PdotSet::Omnidirectional => (None, Some(true)),
        };
        AnnotationRecord {
            frame_id: self.frame_id.clone(),
            video_id: self.video_id.clone(),
            frame_index: self.frame_index,
            fps: Some(self.fps),
            is_key_intersection: self.is_key_intersection,
            pdot_yaws_deg,
            omnidirectional,
        }
    }

    pub fn yaws(&self) -> &[f64] {
        match &self.pdots {
            PdotSet::Yaws(y) => y,
            PdotSet::Omnidirectional => &[],
        }
    }

    pub fn is_omnidirectional(&self) -> bool {
        matches!(self.pdots, PdotSet::Omnidirectional)
    }
}

/// Normalizes degrees to sorted radians, merging yaws within 0.01 deg (modulo 360).
pub fn dedup_yaws_deg(deg: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(deg.len());
    for &d in deg {
        if !d.is_finite() || d.abs() > MAX_ABS_YAW_DEG {
            return Err(Error::Annotation(format!(
                "yaw {d} deg outside [-{MAX_ABS_YAW_DEG}, {MAX_ABS_YAW_DEG}]"
            )));
        }
        out.push(normalize_yaw(d.to_radians()));
    }
    out.sort_by(|a, b| a.total_cmp(b));
    let tol = DEDUP_TOL_DEG.to_radians();
    let mut kept: Vec<f64> = Vec::with_capacity(out.len());
    for y in out {
        if kept.last().is_none_or(|&p| y - p > tol) {
            kept.push(y);
        }
    }
    // wraparound: the last yaw may coincide with the first
    if kept.len() > 1 && kept[0] + TAU - kept[kept.len() - 1] <= tol {
        kept.pop();
    }
    Ok(kept)
}

pub fn parse_annotations(path: impl AsRef<Path>) -> Result<Vec<FrameAnnotation>> {
    let path = path.as_ref();
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |msg: String| Error::Parse {
            path: path.to_owned(),
            line: i + 1,
            msg,
        };
        let rec: AnnotationRecord = serde_json::from_str(&line).map_err(|e| at(e.to_string()))?;
        out.push(FrameAnnotation::from_record(rec).map_err(|e| at(e.to_string()))?);
    }
    Ok(out)
}

pub fn write_annotations(path: impl AsRef<Path>, anns: &[FrameAnnotation]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for a in anns {
        serde_json::to_writer(&mut w, &a.to_record())?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CropLabel {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CropOrigin {
    PdotCentered,
    Midpoint,
    RandomRegion,
}

/// A crop to take: which frame, where, and with what label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedCrop {
    pub frame_id: String,
    pub yaw: f64,
    pub label: CropLabel,
    pub origin: CropOrigin,
}

#[derive(Debug, Clone)]
pub struct LabeledCrop {
    pub crop: PerspectiveCrop,
    pub label: CropLabel,
    pub origin: CropOrigin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropParams {
    pub fov_deg: f64,
    pub out_size: usize,
    pub jitter_deg: f64,
}

impl Default for CropParams {
    fn default() -> Self {
        Self {
            fov_deg: DEFAULT_FOV_DEG,
            out_size: DEFAULT_OUT_SIZE,
            jitter_deg: DEFAULT_JITTER_DEG,
        }
    }
}

/// Jittered yaws of the positive crops for one frame. Omnidirectional frames
/// use the eight ring directions starting at yaw 0.
pub fn positive_yaws<R: Rng + ?Sized>(ann: &FrameAnnotation, jitter_deg: f64, rng: &mut R) -> Vec<f64> {
    let centers: Vec<f64> = match &ann.pdots {
        PdotSet::Yaws(y) => y.clone(),
        PdotSet::Omnidirectional => (0..OMNI_POSITIVES)
            .map(|k| k as f64 * TAU / OMNI_POSITIVES as f64)
            .collect(),
    };
    centers
        .into_iter()
        .map(|c| {
            let j = if jitter_deg > 0.0 {
                rng.gen_range(-jitter_deg..=jitter_deg).to_radians()
            } else {
                0.0
            };
            normalize_yaw(c + j)
        })
        .collect()
}

/// Bisectors of every circularly adjacent PDoT pair whose gap (measured
/// counter-clockwise from one PDoT to the next) is at least 45 deg.
pub fn negative_yaws(ann: &FrameAnnotation) -> Vec<f64> {
    let y = ann.yaws();
    if ann.is_omnidirectional() || y.len() < 2 {
        return Vec::new();
    }
    let min_gap = MIN_NEGATIVE_GAP_DEG.to_radians() - 1e-12;
    (0..y.len())
        .filter_map(|i| {
            let a = y[i];
            let gap = yaw_gap(a, y[(i + 1) % y.len()]);
            (gap >= min_gap).then(|| normalize_yaw(a + gap / 2.0))
        })
        .collect()
}

fn crop_at(erp: &EquirectImage, ann: &FrameAnnotation, yaw: f64, p: &CropParams) -> Result<PerspectiveCrop> {
    let view = ViewSpec::new(yaw, 0.0, p.fov_deg, p.out_size)?;
    crop_nfov(erp, &view, &ann.frame_id)
}

pub fn sample_positives<R: Rng + ?Sized>(
    erp: &EquirectImage,
    ann: &FrameAnnotation,
    params: &CropParams,
    rng: &mut R,
) -> Result<Vec<LabeledCrop>> {
    positive_yaws(ann, params.jitter_deg, rng)
        .into_iter()
        .map(|y| {
            Ok(LabeledCrop {
                crop: crop_at(erp, ann, y, params)?,
                label: CropLabel::Positive,
                origin: CropOrigin::PdotCentered,
            })
        })
        .collect()
}

pub fn sample_negatives(erp: &EquirectImage, ann: &FrameAnnotation, params: &CropParams) -> Result<Vec<LabeledCrop>> {
    negative_yaws(ann)
        .into_iter()
        .map(|y| {
            Ok(LabeledCrop {
                crop: crop_at(erp, ann, y, params)?,
                label: CropLabel::Negative,
                origin: CropOrigin::Midpoint,
            })
        })
        .collect()
}

/// True when `yaw` is at least 22.5 deg from every PDoT of the frame.
pub fn is_eligible_negative(ann: &FrameAnnotation, yaw: f64) -> bool {
    !ann.is_omnidirectional()
        && ann
            .yaws()
            .iter()
            .all(|&p| inner_yaw_angle(yaw, p) >= EXCLUSION_DEG.to_radians())
}

fn has_eligible_region(ann: &FrameAnnotation) -> bool {
    let y = ann.yaws();
    if ann.is_omnidirectional() || y.is_empty() {
        return false;
    }
    if y.len() == 1 {
        return true;
    }
    (0..y.len()).any(|i| yaw_gap(y[i], y[(i + 1) % y.len()]) > 2.0 * EXCLUSION_DEG.to_radians())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BalancePlan {
    /// `(index into the frame list, yaw)` of each added negative.
    pub additions: Vec<(usize, f64)>,
    /// Negatives still missing after the attempt budget ran out.
    pub shortfall: usize,
}

/// Draws random-region negatives until `negatives` reaches `positives`.
///
/// Frames are picked uniformly among those with an eligible region (not
/// omnidirectional, at least one PDoT, some yaw 22.5 deg clear of all PDoTs),
/// and candidate yaws uniformly on the circle. Failure to reach balance within
/// the attempt budget is logged and reported, not raised.
pub fn plan_balance<R: Rng + ?Sized>(
    positives: usize,
    negatives: usize,
    frames: &[FrameAnnotation],
    rng: &mut R,
) -> BalancePlan {
    let deficit = positives.saturating_sub(negatives);
    if deficit == 0 {
        return BalancePlan::default();
    }
    let eligible: Vec<usize> = (0..frames.len()).filter(|&i| has_eligible_region(&frames[i])).collect();
    let mut plan = BalancePlan::default();
    if !eligible.is_empty() {
        let mut budget = deficit * BALANCE_ATTEMPTS_PER_CROP;
        while plan.additions.len() < deficit && budget > 0 {
            budget -= 1;
            let f = eligible[rng.gen_range(0..eligible.len())];
            let yaw = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            if is_eligible_negative(&frames[f], yaw) {
                plan.additions.push((f, yaw));
            }
        }
    }
    plan.shortfall = deficit - plan.additions.len();
    if plan.shortfall > 0 {
        log::warn!(
            "balance: {} random-region negatives could not be placed ({} eligible frames)",
            plan.shortfall,
            eligible.len()
        );
    }
    plan
}

/// Crops the additions of a [`BalancePlan`] from already loaded frames.
pub fn balance_negatives(
    plan: &BalancePlan,
    frames: &[FrameAnnotation],
    images: &[EquirectImage],
    params: &CropParams,
) -> Result<Vec<LabeledCrop>> {
    plan.additions
        .iter()
        .map(|&(f, yaw)| {
            Ok(LabeledCrop {
                crop: crop_at(&images[f], &frames[f], yaw, params)?,
                label: CropLabel::Negative,
                origin: CropOrigin::RandomRegion,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PdotPlan {
    pub crops: Vec<PlannedCrop>,
    pub shortfall: usize,
}

impl PdotPlan {
    pub fn count(&self, label: CropLabel) -> usize {
        self.crops.iter().filter(|c| c.label == label).count()
    }
}

/// Plans every crop of a PDoT dataset. Frame `i` draws its jitter from
/// stream `i` of a generator seeded with `seed`; balancing uses its own stream.
pub fn plan_pdot_dataset(anns: &[FrameAnnotation], params: &CropParams, seed: u64) -> PdotPlan {
    let mut crops = Vec::new();
    for (i, ann) in anns.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        for yaw in positive_yaws(ann, params.jitter_deg, &mut rng) {
            crops.push(PlannedCrop {
                frame_id: ann.frame_id.clone(),
                yaw,
                label: CropLabel::Positive,
                origin: CropOrigin::PdotCentered,
            });
        }
        for yaw in negative_yaws(ann) {
            crops.push(PlannedCrop {
                frame_id: ann.frame_id.clone(),
                yaw,
                label: CropLabel::Negative,
                origin: CropOrigin::Midpoint,
            });
        }
    }
    let pos = crops.iter().filter(|c| c.label == CropLabel::Positive).count();
    let neg = crops.len() - pos;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let balance = plan_balance(pos, neg, anns, &mut rng);
    for &(f, yaw) in &balance.additions {
        crops.push(PlannedCrop {
            frame_id: anns[f].frame_id.clone(),
            yaw,
            label: CropLabel::Negative,
            origin: CropOrigin::RandomRegion,
        });
    }
    PdotPlan {
        crops,
        shortfall: balance.shortfall,
    }
}

/// Crops a plan, loading each referenced frame once. Frames run in parallel;
/// `sink` receives `(index into plan.crops, crop)` and must be thread-safe.
/// Returns the ids of frames whose image could not be loaded; their crops are skipped.
pub fn materialize_plan<L, S>(
    plan: &PdotPlan,
    anns: &[FrameAnnotation],
    params: &CropParams,
    load: L,
    sink: S,
) -> Result<Vec<String>>
where
    L: Fn(&FrameAnnotation) -> Result<EquirectImage> + Sync,
    S: Fn(usize, LabeledCrop) -> Result<()> + Sync,
{
    let by_id: BTreeMap<&str, &FrameAnnotation> = anns.iter().map(|a| (a.frame_id.as_str(), a)).collect();
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, c) in plan.crops.iter().enumerate() {
        groups.entry(c.frame_id.as_str()).or_default().push(i);
    }
    let groups: Vec<(&str, Vec<usize>)> = groups.into_iter().collect();
    let skipped: Vec<Option<String>> = groups
        .par_iter()
        .map(|(fid, idx)| -> Result<Option<String>> {
            let ann = by_id
                .get(fid)
                .ok_or_else(|| Error::Annotation(format!("plan references unknown frame {fid:?}")))?;
            let erp = match load(ann) {
                Ok(e) => e,
                Err(e) => {
                    log::warn!("skipping frame {fid}: {e}");
                    return Ok(Some((*fid).to_owned()));
                }
            };
            for &i in idx {
                let c = &plan.crops[i];
                let crop = crop_at(&erp, ann, c.yaw, params)?;
                sink(
                    i,
                    LabeledCrop {
                        crop,
                        label: c.label,
                        origin: c.origin,
                    },
                )?;
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    Ok(skipped.into_iter().flatten().collect())
}

/// Intersection label from walking time to the nearest key frame: 1 within
/// 0.5 s, 0 from 2 s on, linear in between.
pub fn soft_label(distance_sec: f64) -> Result<f64> {
    if distance_sec.is_nan() || distance_sec < 0.0 {
        return Err(Error::NegativeDistance(distance_sec));
    }
    Ok(if distance_sec <= 0.5 {
        1.0
    } else if distance_sec >= 2.0 {
        0.0
    } else {
        (2.0 - distance_sec) / 1.5
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftLabeledFrame {
    /// The annotated frame id, or `{video_id}_{frame_index:06}` for indices
    /// without an annotation record.
    pub frame_id: String,
    pub video_id: String,
    pub frame_index: u64,
    /// `None` when the video has no key intersection frame.
    pub distance_sec: Option<f64>,
    pub label: f64,
}

/// Samples every `stride`-th frame (from frame 0 to the last annotated index)
/// of each video, labels it with [`soft_label`], and keeps zero-labeled frames
/// with probability `keep_negative`.
pub fn build_direct_dataset<R: Rng + ?Sized>(
    anns: &[FrameAnnotation],
    stride: usize,
    keep_negative: f64,
    rng: &mut R,
) -> Result<Vec<SoftLabeledFrame>> {
    if stride == 0 {
        return Err(Error::Config("stride must be positive".into()));
    }
    if !(0.0..=1.0).contains(&keep_negative) {
        return Err(Error::Config(format!("keep probability {keep_negative} outside [0, 1]")));
    }
    let mut videos: BTreeMap<&str, Vec<&FrameAnnotation>> = BTreeMap::new();
    for a in anns {
        videos.entry(a.video_id.as_str()).or_default().push(a);
    }
    let mut out = Vec::new();
    for (video, frames) in videos {
        let fps = frames[0].fps;
        if let Some(f) = frames.iter().find(|f| f.fps != fps) {
            return Err(Error::Annotation(format!(
                "video {video:?} mixes fps {fps} and {} (frame {:?})",
                f.fps, f.frame_id
            )));
        }
        let ids: BTreeMap<u64, &str> = frames.iter().map(|f| (f.frame_index, f.frame_id.as_str())).collect();
        let keys: Vec<u64> = frames.iter().filter(|f| f.is_key_intersection).map(|f| f.frame_index).collect();
        if keys.is_empty() {
            log::warn!("video {video:?} has no key intersection frame; all samples are negative");
        }
        let last = frames.iter().map(|f| f.frame_index).max().unwrap_or(0);
        for idx in (0..=last).step_by(stride) {
            let distance_sec = keys.iter().map(|&k| idx.abs_diff(k)).min().map(|d| d as f64 / fps);
            let label = match distance_sec {
                Some(d) => soft_label(d)?,
                None => 0.0,
            };
            if label == 0.0 && rng.gen::<f64>() >= keep_negative {
                continue;
            }
            out.push(SoftLabeledFrame {
                frame_id: ids
                    .get(&idx)
                    .map(|s| (*s).to_owned())
                    .unwrap_or_else(|| format!("{video}_{idx:06}")),
                video_id: video.to_owned(),
                frame_index: idx,
                distance_sec,
                label,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{Encoding, Raster};
    use proptest::prelude::*;

    fn ann(yaws_deg: &[f64], key: bool) -> FrameAnnotation {
        FrameAnnotation::from_record(AnnotationRecord {
            frame_id: "f".into(),
            video_id: "v".into(),
            frame_index: 0,
            fps: None,
            is_key_intersection: key,
            pdot_yaws_deg: Some(yaws_deg.to_vec()),
            omnidirectional: None,
        })
        .unwrap()
    }

    fn omni() -> FrameAnnotation {
        FrameAnnotation::from_record(AnnotationRecord {
            frame_id: "o".into(),
            video_id: "v".into(),
            frame_index: 0,
            fps: None,
            is_key_intersection: true,
            pdot_yaws_deg: None,
            omnidirectional: Some(true),
        })
        .unwrap()
    }

    fn deg(v: &[f64]) -> Vec<f64> {
        let mut d: Vec<f64> = v.iter().map(|r| r.to_degrees().rem_euclid(360.0)).collect();
        d.sort_by(|a, b| a.total_cmp(b));
        d
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9)
    }

    #[test]
    fn parse_forms() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.jsonl");
        std::fs::write(
            &p,
            "{\"frame_id\":\"a\",\"video_id\":\"v\",\"frame_index\":0,\"is_key_intersection\":true,\"pdot_yaws_deg\":[0,90,180]}\n\
             {\"frame_id\":\"b\",\"video_id\":\"v\",\"frame_index\":1,\"fps\":25,\"is_key_intersection\":true,\"omnidirectional\":true}\n\
             {\"frame_id\":\"c\",\"video_id\":\"v\",\"frame_index\":2,\"is_key_intersection\":false,\"pdot_yaws_deg\":[0,0.0001,180]}\n",
        )
        .unwrap();
        let a = parse_annotations(&p).unwrap();
        assert_eq!(a[0].yaws().len(), 3);
        assert_eq!(a[0].fps, DEFAULT_FPS);
        assert!(a[1].is_omnidirectional());
        assert_eq!(a[1].fps, 25.0);
        assert_eq!(a[2].yaws().len(), 2);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.jsonl");
        std::fs::write(
            &p,
            "{\"frame_id\":\"a\",\"video_id\":\"v\",\"frame_index\":0,\"is_key_intersection\":true,\"pdot_yaws_deg\":[0]}\n\
             {\"frame_id\":\"b\",\"video_id\":\"v\",\"frame_index\":1,\"is_key_intersection\":true,\"omnidirectional\":true,\"pdot_yaws_deg\":[0]}\n",
        )
        .unwrap();
        assert!(matches!(parse_annotations(&p), Err(Error::Parse { line: 2, .. })));
        std::fs::write(
            &p,
            "{\"frame_id\":\"a\",\"video_id\":\"v\",\"frame_index\":0,\"is_key_intersection\":true,\"pdot_yaws_deg\":[1e9]}\n",
        )
        .unwrap();
        assert!(matches!(parse_annotations(&p), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn non_intersection_needs_two_pdots() {
        let r = AnnotationRecord {
            frame_id: "f".into(),
            video_id: "v".into(),
            frame_index: 0,
            fps: None,
            is_key_intersection: false,
            pdot_yaws_deg: Some(vec![0.0, 90.0, 180.0]),
            omnidirectional: None,
        };
        assert!(FrameAnnotation::from_record(r).is_err());
    }

    #[test]
    fn dedup_wraps_around() {
        assert_eq!(dedup_yaws_deg(&[0.0, 0.0001]).unwrap().len(), 1);
        assert_eq!(dedup_yaws_deg(&[180.0, -180.0]).unwrap().len(), 1);
        assert_eq!(dedup_yaws_deg(&[359.999, 0.0]).unwrap().len(), 1);
        assert_eq!(dedup_yaws_deg(&[0.0, 90.0, 450.0 - 360.0]).unwrap().len(), 2);
    }

    #[test]
    fn record_round_trip() {
        let a = ann(&[0.0, 90.0, 180.0], true);
        assert_eq!(FrameAnnotation::from_record(a.to_record()).unwrap(), a);
        let o = omni();
        assert_eq!(FrameAnnotation::from_record(o.to_record()).unwrap(), o);
    }

    #[test]
    fn x_junction_midpoints() {
        let n = negative_yaws(&ann(&[0.0, 90.0, 180.0, 270.0], true));
        assert!(close(&deg(&n), &[45.0, 135.0, 225.0, 315.0]));
    }

    #[test]
    fn narrow_y_gap_discarded() {
        let n = negative_yaws(&ann(&[0.0, 40.0], true));
        assert!(close(&deg(&n), &[200.0]));
    }

    #[test]
    fn straight_road_midpoints() {
        let n = negative_yaws(&ann(&[0.0, 180.0], false));
        assert!(close(&deg(&n), &[90.0, 270.0]));
    }

    #[test]
    fn positives_count_and_jitter() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = ann(&[0.0, 90.0, 180.0], true);
        let p = positive_yaws(&a, 5.0, &mut rng);
        assert_eq!(p.len(), 3);
        for (y, c) in p.iter().zip(a.yaws()) {
            assert!(inner_yaw_angle(*y, *c) <= 5f64.to_radians() + 1e-12);
        }
        let o = omni();
        assert_eq!(positive_yaws(&o, 5.0, &mut rng).len(), 8);
        assert!(negative_yaws(&o).is_empty());
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(positive_yaws(&a, 5.0, &mut r1), positive_yaws(&a, 5.0, &mut r2));
    }

    #[test]
    fn crops_are_materialized() {
        let erp = EquirectImage::new(Raster::filled(64, 32, 1, Encoding::Intensity, 7.0).unwrap()).unwrap();
        let params = CropParams {
            out_size: 16,
            ..CropParams::default()
        };
        let a = ann(&[0.0, 90.0, 180.0, 270.0], true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pos = sample_positives(&erp, &a, &params, &mut rng).unwrap();
        let neg = sample_negatives(&erp, &a, &params).unwrap();
        assert_eq!((pos.len(), neg.len()), (4, 4));
        assert!(neg.iter().all(|c| c.origin == CropOrigin::Midpoint && c.crop.raster.width() == 16));
    }

    #[test]
    fn balance_counts() {
        let frames: Vec<FrameAnnotation> = (0..10).map(|_| ann(&[0.0, 180.0], false)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let plan = plan_balance(3414, 3274, &frames, &mut rng);
        assert_eq!(plan.additions.len(), 140);
        assert_eq!(plan.shortfall, 0);
        for &(f, y) in &plan.additions {
            assert!(is_eligible_negative(&frames[f], y));
        }
        assert_eq!(plan_balance(10, 10, &frames, &mut rng), BalancePlan::default());
        assert_eq!(plan_balance(5, 9, &frames, &mut rng), BalancePlan::default());
    }

    #[test]
    fn balance_reports_shortfall_without_eligible_frames() {
        let frames = vec![omni()];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let plan = plan_balance(8, 0, &frames, &mut rng);
        assert_eq!(plan.shortfall, 8);
    }

    #[test]
    fn exclusion_radius() {
        let a = ann(&[0.0, 180.0], false);
        assert!(!is_eligible_negative(&a, 10f64.to_radians()));
        assert!(is_eligible_negative(&a, 30f64.to_radians()));
    }

    #[test]
    fn dataset_plan_balances_and_is_reproducible() {
        let frames = vec![ann(&[0.0, 90.0, 180.0, 270.0], true), omni(), ann(&[0.0, 40.0, 200.0], true)];
        let frames: Vec<FrameAnnotation> = frames
            .into_iter()
            .enumerate()
            .map(|(i, mut f)| {
                f.frame_id = format!("f{i}");
                f
            })
            .collect();
        let p = plan_pdot_dataset(&frames, &CropParams::default(), 3);
        assert_eq!(p.count(CropLabel::Positive), 4 + 8 + 3);
        assert_eq!(p.count(CropLabel::Positive), p.count(CropLabel::Negative));
        assert_eq!(p, plan_pdot_dataset(&frames, &CropParams::default(), 3));
    }

    #[test]
    fn soft_label_rule() {
        assert_eq!(soft_label(0.4).unwrap(), 1.0);
        assert_eq!(soft_label(0.5).unwrap(), 1.0);
        assert!((soft_label(1.5).unwrap() - 1.0 / 3.0).abs() < 1e-9);
        assert_eq!(soft_label(2.0).unwrap(), 0.0);
        assert_eq!(soft_label(2.5).unwrap(), 0.0);
        assert!(matches!(soft_label(-0.1), Err(Error::NegativeDistance(_))));
    }

    fn toy_video() -> Vec<FrameAnnotation> {
        (0..=400u64)
            .map(|i| FrameAnnotation {
                frame_id: format!("v_{i}"),
                video_id: "v".into(),
                frame_index: i,
                fps: 30.0,
                is_key_intersection: i == 300,
                pdots: PdotSet::Yaws(Vec::new()),
            })
            .collect()
    }

    #[test]
    fn direct_dataset_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let all = build_direct_dataset(&toy_video(), 10, 1.0, &mut rng).unwrap();
        assert_eq!(all.len(), 41);
        let f310 = all.iter().find(|f| f.frame_index == 310).unwrap();
        assert!((f310.distance_sec.unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(f310.label, 1.0);
        let f360 = all.iter().find(|f| f.frame_index == 360).unwrap();
        assert_eq!(f360.distance_sec, Some(2.0));
        assert_eq!(f360.label, 0.0);

        let some = build_direct_dataset(&toy_video(), 10, 0.2, &mut rng).unwrap();
        let soft = all.iter().filter(|f| f.label > 0.0).count();
        assert_eq!(some.iter().filter(|f| f.label > 0.0).count(), soft);
        assert!(some.len() < all.len());
        let none = build_direct_dataset(&toy_video(), 10, 0.0, &mut rng).unwrap();
        assert_eq!(none.len(), soft);
    }

    #[test]
    fn direct_dataset_without_keys() {
        let mut v = toy_video();
        v.iter_mut().for_each(|f| f.is_key_intersection = false);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = build_direct_dataset(&v, 10, 1.0, &mut rng).unwrap();
        assert!(out.iter().all(|f| f.label == 0.0 && f.distance_sec.is_none()));
    }

    proptest! {
        #[test]
        fn midpoints_clear_of_pdots(yaws in proptest::collection::vec(-180.0f64..180.0, 2..8)) {
            let a = ann(&yaws, true);
            for n in negative_yaws(&a) {
                for &p in a.yaws() {
                    prop_assert!(inner_yaw_angle(n, p) >= EXCLUSION_DEG.to_radians() - 1e-9);
                }
            }
        }

        #[test]
        fn soft_label_monotone(a in 0.0f64..5.0, b in 0.0f64..5.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(soft_label(lo).unwrap() >= soft_label(hi).unwrap());
        }
    }
}
