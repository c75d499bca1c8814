//! Splitting a walk-through video at detected intersections.
//!
//! Per-frame verdicts are first cleaned of short runs, then every remaining
//! run of intersection frames contributes one split point at its center.

use serde::{Deserialize, Serialize};

use crate::aggregate::FrameVerdict;
use crate::error::{Error, Result};

pub const DEFAULT_MIN_RUN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    VideoStart,
    VideoEnd,
    Split(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub video_id: String,
    /// Inclusive.
    pub start_frame: usize,
    /// Inclusive.
    pub end_frame: usize,
    pub bounded_by: (Boundary, Boundary),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Run {
    value: bool,
    start: usize,
    len: usize,
}

fn runs(seq: &[bool]) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::new();
    for (i, &v) in seq.iter().enumerate() {
        match out.last_mut() {
            Some(r) if r.value == v => r.len += 1,
            _ => out.push(Run {
                value: v,
                start: i,
                len: 1,
            }),
        }
    }
    out
}

/// Removes runs shorter than `min_run` by flipping them to their neighbours'
/// value, shortest first (leftmost on ties), until every run is long enough
/// or one run remains. The result is a fixed point, so smoothing is idempotent.
pub fn smooth_bools(seq: &[bool], min_run: usize) -> Result<Vec<bool>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut rs = runs(seq);
    loop {
        if rs.len() <= 1 {
            break;
        }
        let Some((idx, _)) = rs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.len < min_run)
            .min_by_key(|(i, r)| (r.len, *i))
        else {
            break;
        };
        let flipped = !rs[idx].value;
        rs[idx].value = flipped;
        // merge with whichever neighbours now share its value
        let mut merged: Vec<Run> = Vec::with_capacity(rs.len());
        for r in rs {
            match merged.last_mut() {
                Some(m) if m.value == r.value => m.len += r.len,
                _ => merged.push(r),
            }
        }
        rs = merged;
    }
    let mut out = Vec::with_capacity(seq.len());
    for r in rs {
        out.extend(std::iter::repeat_n(r.value, r.len));
    }
    Ok(out)
}

/// [`smooth_bools`] over the intersection flags of a verdict sequence.
pub fn smooth_decisions(seq: &[FrameVerdict], min_run: usize) -> Result<Vec<bool>> {
    let flags: Vec<bool> = seq.iter().map(|v| v.is_intersection).collect();
    smooth_bools(&flags, min_run)
}

/// Center frame (lower on ties) of every maximal run of `true`.
pub fn split_points(seq: &[bool]) -> Vec<usize> {
    runs(seq)
        .into_iter()
        .filter(|r| r.value)
        .map(|r| r.start + (r.len - 1) / 2)
        .collect()
}

/// Segments between consecutive split points. A split frame closes the
/// segment it falls in; the next segment starts on the following frame.
///
/// A split on the very last frame has no frame after it, so it closes the
/// final segment instead of opening an empty one.
pub fn split_segments(video_id: &str, seq: &[bool]) -> Vec<Segment> {
    if seq.is_empty() {
        return Vec::new();
    }
    let last = seq.len() - 1;
    let mut out = Vec::new();
    let mut start = 0;
    let mut left = Boundary::VideoStart;
    for s in split_points(seq) {
        if s == last {
            break;
        }
        out.push(Segment {
            video_id: video_id.to_owned(),
            start_frame: start,
            end_frame: s,
            bounded_by: (left, Boundary::Split(s)),
        });
        start = s + 1;
        left = Boundary::Split(s);
    }
    out.push(Segment {
        video_id: video_id.to_owned(),
        start_frame: start,
        end_frame: last,
        bounded_by: (left, Boundary::VideoEnd),
    });
    out
}
