use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, BinaryMask, RleJson};

/// Tolerance on the sum of known-class scores.
pub const SCORE_SUM_EPS: f64 = 1e-6;

/// A per-frame candidate object produced by an external detector.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub frame: u32,
    pub bbox: BBox,
    pub mask: Option<BinaryMask>,
    /// Confidence per known category.
    pub scores: Vec<f64>,
    pub objectness: Option<f64>,
    pub embedding: Option<Vec<f32>>,
    /// Externally regressed forecasts of this proposal in other frames.
    pub aux: BTreeMap<u32, BBox>,
}

impl Proposal {
    /// Box-only proposal with no scores; mostly useful in tests and synthesis.
    pub fn from_box(frame: u32, bbox: BBox) -> Self {
        Proposal {
            frame,
            bbox,
            mask: None,
            scores: Vec::new(),
            objectness: None,
            embedding: None,
            aux: BTreeMap::new(),
        }
    }
}

impl AsRef<Proposal> for Proposal {
    fn as_ref(&self) -> &Proposal {
        self
    }
}

/// Proposals of one video keyed by frame index, in input order within a frame.
pub type VideoProposals = BTreeMap<u32, Vec<Proposal>>;

/// Proposals of a whole corpus keyed by video name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProposalSet {
    pub videos: BTreeMap<String, VideoProposals>,
}

impl ProposalSet {
    pub fn len(&self) -> usize {
        self.videos.values().flat_map(|v| v.values()).map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn video(&self, name: &str) -> Option<&VideoProposals> {
        self.videos.get(name)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProposalLine {
    video: String,
    frame: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bbox: Option<[f64; 4]>,
    #[serde(default)]
    scores: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    objectness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rle: Option<RleJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    embedding: Option<Vec<f32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    aux: Option<BTreeMap<String, [f64; 4]>>,
}

/// Validation state carried across lines of one file.
struct LineChecker {
    expected_scores: Option<usize>,
    embedding_len: Option<usize>,
}

impl LineChecker {
    fn check(&mut self, line: ProposalLine) -> std::result::Result<(String, Proposal), String> {
        let mask = line.rle.as_ref().map(|r| r.to_mask()).transpose().map_err(|e| format!("rle: {e}"))?;
        let bbox = match (&line.bbox, &mask) {
            (Some(xywh), _) => BBox::from_xywh(*xywh).map_err(|e| e.to_string())?,
            (None, Some(m)) => m.to_box(),
            (None, None) => return Err("proposal has neither bbox nor rle".into()),
        };
        match self.expected_scores {
            Some(n) if n != line.scores.len() => {
                return Err(format!("score vector has length {}, expected {n}", line.scores.len()));
            }
            None => self.expected_scores = Some(line.scores.len()),
            _ => {}
        }
        if let Some(s) = line.scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(format!("class score {s} outside [0,1]"));
        }
        let sum: f64 = line.scores.iter().sum();
        if sum > 1.0 + SCORE_SUM_EPS {
            return Err(format!("class scores sum to {sum} > 1"));
        }
        if let Some(o) = line.objectness {
            if !(0.0..=1.0).contains(&o) {
                return Err(format!("objectness {o} outside [0,1]"));
            }
        }
        if let Some(e) = &line.embedding {
            match self.embedding_len {
                Some(n) if n != e.len() => {
                    return Err(format!("embedding has length {}, expected {n}", e.len()));
                }
                None => self.embedding_len = Some(e.len()),
                _ => {}
            }
            if e.iter().any(|v| !v.is_finite()) {
                return Err("embedding has non-finite values".into());
            }
        }
        let mut aux = BTreeMap::new();
        for (k, xywh) in line.aux.iter().flatten() {
            let f: u32 = k.parse().map_err(|_| format!("aux key {k:?} is not a frame index"))?;
            aux.insert(f, BBox::from_xywh(*xywh).map_err(|e| format!("aux[{k}]: {e}"))?);
        }
        Ok((
            line.video,
            Proposal {
                frame: line.frame,
                bbox,
                mask,
                scores: line.scores,
                objectness: line.objectness,
                embedding: line.embedding,
                aux,
            },
        ))
    }
}

/// Parses proposal JSONL. `expected_scores` pins the score-vector length (the
/// number of known categories); without it the first line sets the length.
pub fn read_proposals(reader: impl BufRead, source: &str, expected_scores: Option<usize>) -> Result<ProposalSet> {
    let mut set = ProposalSet::default();
    let mut checker = LineChecker { expected_scores, embedding_len: None };
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(format!("{source}:{lineno}"), e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ProposalLine =
            serde_json::from_str(&line).map_err(|e| Error::parse(format!("{source}:{lineno}"), e.to_string()))?;
        let (video, p) = checker.check(parsed).map_err(|m| Error::parse(format!("{source}:{lineno}"), m))?;
        set.videos.entry(video).or_default().entry(p.frame).or_default().push(p);
    }
    Ok(set)
}

pub fn load_proposals(path: impl AsRef<Path>, expected_scores: Option<usize>) -> Result<ProposalSet> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_proposals(std::io::BufReader::new(f), &path.display().to_string(), expected_scores)
}

/// Writes proposals as JSONL ordered by (video, frame, position).
pub fn write_proposals(set: &ProposalSet, mut w: impl Write) -> std::io::Result<()> {
    for (video, frames) in &set.videos {
        for props in frames.values() {
            for p in props {
                let line = ProposalLine {
                    video: video.clone(),
                    frame: p.frame,
                    bbox: Some(p.bbox.to_xywh()),
                    scores: p.scores.clone(),
                    objectness: p.objectness,
                    rle: p.mask.as_ref().map(RleJson::from_mask),
                    embedding: p.embedding.clone(),
                    aux: (!p.aux.is_empty())
                        .then(|| p.aux.iter().map(|(f, b)| (f.to_string(), b.to_xywh())).collect()),
                };
                serde_json::to_writer(&mut w, &line)?;
                w.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}
