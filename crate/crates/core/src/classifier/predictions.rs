//! Per-view scores produced outside this crate (e.g. by the CNN trainer).
//!
//! File format: UTF-8, one JSON object per line,
//! `{"frame_id": "...", "view_index": 3, "score": 0.87}`. Blank lines are ignored.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::PdotScore;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub frame_id: String,
    pub view_index: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionTable {
    scores: BTreeMap<(String, usize), PdotScore>,
    pub source: Option<PathBuf>,
    pub model_name: String,
}

impl PredictionTable {
    pub fn new(model_name: impl Into<String>) -> Self {
        Self {
            model_name: model_name.into(),
            ..Self::default()
        }
    }

    pub fn insert(&mut self, rec: PredictionRecord) -> Result<()> {
        let score = PdotScore::new(rec.score)?;
        let key = (rec.frame_id, rec.view_index);
        if self.scores.contains_key(&key) {
            return Err(Error::DuplicatePrediction {
                frame_id: key.0,
                view_index: key.1,
            });
        }
        self.scores.insert(key, score);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn get(&self, frame_id: &str, view_index: usize) -> Option<PdotScore> {
        self.scores.get(&(frame_id.to_owned(), view_index)).copied()
    }

    /// Scores for views `0..n` of one frame, failing on the first missing view.
    pub fn scores_for(&self, frame_id: &str, n: usize) -> Result<Vec<PdotScore>> {
        (0..n)
            .map(|k| {
                self.get(frame_id, k).ok_or_else(|| Error::MissingPrediction {
                    frame_id: frame_id.to_owned(),
                    view_index: k,
                })
            })
            .collect()
    }

    /// Rejects tables that reference a view index outside a ring of `n` views.
    pub fn check_view_count(&self, n: usize) -> Result<()> {
        match self.scores.keys().find(|(_, v)| *v >= n) {
            Some((f, v)) => Err(Error::Config(format!(
                "prediction for frame {f:?} has view_index {v}, ring has {n} views"
            ))),
            None => Ok(()),
        }
    }

    pub fn frame_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.scores.keys().map(|(f, _)| f.clone()).collect();
        ids.dedup();
        ids
    }

    pub fn records(&self) -> impl Iterator<Item = PredictionRecord> + '_ {
        self.scores.iter().map(|((f, v), s)| PredictionRecord {
            frame_id: f.clone(),
            view_index: *v,
            score: s.value(),
        })
    }
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<PredictionTable> {
    let path = path.as_ref();
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut table = PredictionTable::new(
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    );
    table.source = Some(path.to_owned());
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
        let rec: PredictionRecord = serde_json::from_str(&line).map_err(|e| at(e.to_string()))?;
        match table.insert(rec) {
            Ok(()) => {}
            Err(e @ Error::DuplicatePrediction { .. }) => return Err(e),
            Err(e) => return Err(at(e.to_string())),
        }
    }
    log::info!("loaded {} predictions from {}", table.len(), path.display());
    Ok(table)
}

pub fn write_predictions<'a>(
    path: impl AsRef<Path>,
    records: impl IntoIterator<Item = &'a PredictionRecord>,
) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(lines: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("preds.jsonl");
        std::fs::write(&p, lines).unwrap();
        (dir, p)
    }

    #[test]
    fn three_valid_lines() {
        let (_d, p) = write(
            "{\"frame_id\":\"a\",\"view_index\":0,\"score\":0.1}\n\
             {\"frame_id\":\"a\",\"view_index\":1,\"score\":1.0}\n\
             \n\
             {\"frame_id\":\"b\",\"view_index\":0,\"score\":0}\n",
        );
        let t = load_predictions(&p).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.get("a", 1).unwrap().value(), 1.0);
        assert_eq!(t.frame_ids(), vec!["a", "b"]);
        assert!(t.check_view_count(2).is_ok());
        assert!(t.check_view_count(1).is_err());
        assert!(matches!(
            t.scores_for("b", 2),
            Err(Error::MissingPrediction { view_index: 1, .. })
        ));
    }

    #[test]
    fn duplicate_key_names_the_key() {
        let (_d, p) = write(
            "{\"frame_id\":\"f7\",\"view_index\":2,\"score\":0.1}\n\
             {\"frame_id\":\"f7\",\"view_index\":2,\"score\":0.3}\n",
        );
        let err = load_predictions(&p).unwrap_err();
        assert!(matches!(err, Error::DuplicatePrediction { view_index: 2, .. }));
        assert!(err.to_string().contains("f7"));
    }

    #[test]
    fn out_of_range_score() {
        let (_d, p) = write("{\"frame_id\":\"a\",\"view_index\":0,\"score\":1.2}\n");
        let err = load_predictions(&p).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(err.to_string().contains("1.2"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let (_d, p) = write(
            "{\"frame_id\":\"a\",\"view_index\":0,\"score\":0.5}\n\
             {\"frame_id\":\"a\",\"view_index\":\"x\"}\n",
        );
        assert!(matches!(load_predictions(&p), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.jsonl");
        let recs: Vec<PredictionRecord> = (0..16)
            .map(|i| PredictionRecord {
                frame_id: format!("frame{}", i / 8),
                view_index: i % 8,
                score: (i as f64) / 15.0,
            })
            .collect();
        write_predictions(&p, &recs).unwrap();
        let t = load_predictions(&p).unwrap();
        assert_eq!(t.records().collect::<Vec<_>>(), recs);
    }
}
