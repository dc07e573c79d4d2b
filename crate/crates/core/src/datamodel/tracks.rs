use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, BinaryMask, RleJson};

#[derive(Debug, Clone, PartialEq)]
pub struct TrackDet {
    pub bbox: BBox,
    pub mask: Option<BinaryMask>,
    pub score: f64,
}

/// A predicted track: one identity over a set of frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub detections: BTreeMap<u32, TrackDet>,
}

impl Track {
    /// Mean of the per-frame scores.
    pub fn score(&self) -> f64 {
        if self.detections.is_empty() {
            return 0.0;
        }
        self.detections.values().map(|d| d.score).sum::<f64>() / self.detections.len() as f64
    }

    pub fn first_frame(&self) -> Option<u32> {
        self.detections.keys().next().copied()
    }

    pub fn last_frame(&self) -> Option<u32> {
        self.detections.keys().next_back().copied()
    }
}

/// Tracks keyed by video name, each list sorted by track id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackSet {
    pub videos: BTreeMap<String, Vec<Track>>,
}

impl TrackSet {
    pub fn num_tracks(&self) -> usize {
        self.videos.values().map(Vec::len).sum()
    }

    pub fn num_detections(&self) -> usize {
        self.videos.values().flatten().map(|t| t.detections.len()).sum()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TrackLine {
    video: String,
    track_id: u64,
    frame: u32,
    bbox: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rle: Option<RleJson>,
    score: f64,
}

pub fn read_tracks(reader: impl BufRead, source: &str) -> Result<TrackSet> {
    let mut by_video: BTreeMap<String, BTreeMap<u64, BTreeMap<u32, TrackDet>>> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let loc = || format!("{source}:{}", i + 1);
        let line = line.map_err(|e| Error::parse(loc(), e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let t: TrackLine = serde_json::from_str(&line).map_err(|e| Error::parse(loc(), e.to_string()))?;
        if !(0.0..=1.0).contains(&t.score) {
            return Err(Error::parse(loc(), format!("score {} outside [0,1]", t.score)));
        }
        let bbox = BBox::from_xywh(t.bbox).map_err(|e| Error::parse(loc(), e.to_string()))?;
        let mask = t.rle.map(|r| r.to_mask()).transpose().map_err(|e| Error::parse(loc(), e.to_string()))?;
        let dets = by_video.entry(t.video).or_default().entry(t.track_id).or_default();
        if dets.insert(t.frame, TrackDet { bbox, mask, score: t.score }).is_some() {
            return Err(Error::parse(loc(), format!("track {} has two detections in frame {}", t.track_id, t.frame)));
        }
    }
    Ok(TrackSet {
        videos: by_video
            .into_iter()
            .map(|(v, tracks)| (v, tracks.into_iter().map(|(id, detections)| Track { id, detections }).collect()))
            .collect(),
    })
}

pub fn load_tracks(path: impl AsRef<Path>) -> Result<TrackSet> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_tracks(std::io::BufReader::new(f), &path.display().to_string())
}

/// Writes tracks as JSONL ordered by (video, track id, frame).
pub fn write_tracks(set: &TrackSet, mut w: impl Write) -> std::io::Result<()> {
    for (video, tracks) in &set.videos {
        let mut sorted: Vec<&Track> = tracks.iter().collect();
        sorted.sort_by_key(|t| t.id);
        for t in sorted {
            for (&frame, d) in &t.detections {
                let line = TrackLine {
                    video: video.clone(),
                    track_id: t.id,
                    frame,
                    bbox: d.bbox.to_xywh(),
                    rle: d.mask.as_ref().map(RleJson::from_mask),
                    score: d.score,
                };
                serde_json::to_writer(&mut w, &line)?;
                w.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}
