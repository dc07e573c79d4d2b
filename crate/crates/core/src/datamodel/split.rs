use std::collections::BTreeSet;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::annotations::{Dataset, GtTrack};
use crate::error::{Error, Result};

/// Partition of categories. Unknown is the complement of known and distractor.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CategorySplit {
    pub known: BTreeSet<u64>,
    #[serde(default)]
    pub distractor: BTreeSet<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    Known,
    Unknown,
}

impl FromStr for SplitMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "known" => Ok(SplitMode::Known),
            "unknown" => Ok(SplitMode::Unknown),
            other => Err(Error::config(format!("split mode must be known|unknown, got {other:?}"))),
        }
    }
}

impl std::fmt::Display for SplitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitMode::Known => "known",
            SplitMode::Unknown => "unknown",
        })
    }
}

impl CategorySplit {
    pub fn from_json(text: &str, location: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(location, e.to_string()))
    }

    /// Every category known, none distractor.
    pub fn all_known(dataset: &Dataset) -> Self {
        CategorySplit { known: dataset.categories.keys().copied().collect(), distractor: BTreeSet::new() }
    }

    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        if let Some(id) = self.known.intersection(&self.distractor).next() {
            return Err(Error::config(format!("category {id} is both known and distractor")));
        }
        for id in self.known.iter().chain(&self.distractor) {
            if !dataset.categories.contains_key(id) {
                return Err(Error::config(format!("split references unknown category id {id}")));
            }
        }
        Ok(())
    }

    pub fn unknown(&self, dataset: &Dataset) -> BTreeSet<u64> {
        dataset
            .categories
            .keys()
            .filter(|id| !self.known.contains(id) && !self.distractor.contains(id))
            .copied()
            .collect()
    }
}

pub fn load_split(path: impl AsRef<Path>) -> Result<CategorySplit> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    CategorySplit::from_json(&text, &path.display().to_string())
}

/// Ground truth of one video as seen by the evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalVideo {
    pub name: String,
    pub width: u32,
    pub height: u32,
    /// Annotated frames; predictions elsewhere are ignored.
    pub frames: Vec<u32>,
    /// Tracks being evaluated.
    pub tracks: Vec<GtTrack>,
    /// Distractor-category tracks, used only to discard predictions.
    pub distractors: Vec<GtTrack>,
    /// Tracks of the other partition (known tracks when evaluating unknowns).
    pub other: Vec<GtTrack>,
}

impl EvalVideo {
    pub fn num_gt_detections(&self) -> usize {
        self.tracks.iter().map(|t| t.detections.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GtView {
    pub mode: SplitMode,
    pub videos: Vec<EvalVideo>,
}

impl GtView {
    pub fn num_gt_detections(&self) -> usize {
        self.videos.iter().map(EvalVideo::num_gt_detections).sum()
    }

    pub fn num_tracks(&self) -> usize {
        self.videos.iter().map(|v| v.tracks.len()).sum()
    }
}

/// Splits each video's ground truth into the evaluated partition, the
/// distractors, and the remaining partition.
pub fn apply_split(dataset: &Dataset, split: &CategorySplit, mode: SplitMode) -> Result<GtView> {
    split.validate(dataset)?;
    let videos = dataset
        .videos
        .iter()
        .zip(&dataset.gt_tracks)
        .map(|(v, tracks)| {
            let mut ev = EvalVideo {
                name: v.name.clone(),
                width: v.width,
                height: v.height,
                frames: v.frame_indices(),
                tracks: Vec::new(),
                distractors: Vec::new(),
                other: Vec::new(),
            };
            for t in tracks {
                let known = split.known.contains(&t.category);
                let bucket = if split.distractor.contains(&t.category) {
                    &mut ev.distractors
                } else if known == (mode == SplitMode::Known) {
                    &mut ev.tracks
                } else {
                    &mut ev.other
                };
                bucket.push(t.clone());
            }
            ev
        })
        .collect();
    Ok(GtView { mode, videos })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::annotations::Video;
    use crate::geometry::BBox;
    use std::collections::BTreeMap;

    fn fixture() -> Dataset {
        // 3 known (cat 1), 2 unknown (cat 2), 1 distractor (cat 3)
        let cats = [1, 1, 1, 2, 2, 3];
        let tracks = cats
            .iter()
            .enumerate()
            .map(|(i, &c)| GtTrack {
                id: i as u64 + 1,
                category: c,
                detections: BTreeMap::from([(0, BBox { x1: 0., y1: 0., x2: 1., y2: 1. })]),
            })
            .collect();
        Dataset {
            videos: vec![Video {
                id: 1,
                name: "v".into(),
                width: 10,
                height: 10,
                length: 1,
                frames: vec![super::super::annotations::Frame { image_id: 1, frame_index: 0 }],
            }],
            gt_tracks: vec![tracks],
            categories: BTreeMap::from([(1, "a".into()), (2, "b".into()), (3, "c".into())]),
        }
    }

    fn split() -> CategorySplit {
        CategorySplit { known: [1].into(), distractor: [3].into() }
    }

    #[test]
    fn known_view_has_three_tracks() {
        let view = apply_split(&fixture(), &split(), SplitMode::Known).unwrap();
        assert_eq!(view.videos[0].tracks.len(), 3);
        assert_eq!(view.videos[0].distractors.len(), 1);
        assert_eq!(view.videos[0].other.len(), 2);
    }

    #[test]
    fn views_partition_all_tracks() {
        let ds = fixture();
        let known = apply_split(&ds, &split(), SplitMode::Known).unwrap();
        let unknown = apply_split(&ds, &split(), SplitMode::Unknown).unwrap();
        let ids = |ts: &[GtTrack]| ts.iter().map(|t| t.id).collect::<BTreeSet<_>>();
        let k = ids(&known.videos[0].tracks);
        let u = ids(&unknown.videos[0].tracks);
        let d = ids(&known.videos[0].distractors);
        assert!(k.is_disjoint(&u) && k.is_disjoint(&d) && u.is_disjoint(&d));
        assert_eq!(k.len() + u.len() + d.len(), 6);
        assert!(!u.contains(&6) && !k.contains(&6));
    }

    #[test]
    fn all_known_gives_empty_unknown_view() {
        let ds = fixture();
        let view = apply_split(&ds, &CategorySplit::all_known(&ds), SplitMode::Unknown).unwrap();
        assert_eq!(view.num_tracks(), 0);
    }

    #[test]
    fn invalid_splits_are_config_errors() {
        let ds = fixture();
        let bad = CategorySplit { known: [1, 9].into(), distractor: BTreeSet::new() };
        assert!(apply_split(&ds, &bad, SplitMode::Known).unwrap_err().is_config());
        let overlap = CategorySplit { known: [1].into(), distractor: [1].into() };
        assert!(overlap.validate(&ds).unwrap_err().is_config());
        let parsed = CategorySplit::from_json(r#"{"known":[1],"distractor":[3]}"#, "s").unwrap();
        assert_eq!(parsed, split());
    }
}
