use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scoring::ScoringMethod;
use crate::similarity::SimilarityMethod;

/// Where overlap removal sits relative to tracking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapOrder {
    /// Remove overlaps among each frame's proposals, then track.
    #[default]
    NonOverlapFirst,
    /// Track, then remove overlaps among the tracks' detections.
    TrackFirst,
}

impl FromStr for OverlapOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no-t" | "NO->T" => Ok(OverlapOrder::NonOverlapFirst),
            "t-no" | "T->NO" => Ok(OverlapOrder::TrackFirst),
            other => Err(Error::config(format!("unknown overlap order {other:?} (expected no-t or t-no)"))),
        }
    }
}

impl fmt::Display for OverlapOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OverlapOrder::NonOverlapFirst => "no-t",
            OverlapOrder::TrackFirst => "t-no",
        })
    }
}

/// Which frames the tracker visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameSelection {
    /// Annotated frames of the video, with or without proposals.
    #[default]
    Annotated,
    /// Every frame that has proposals.
    All,
}

impl FromStr for FrameSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "annotated" => Ok(FrameSelection::Annotated),
            "all" => Ok(FrameSelection::All),
            other => Err(Error::config(format!("unknown frame selection {other:?}"))),
        }
    }
}

impl fmt::Display for FrameSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameSelection::Annotated => "annotated",
            FrameSelection::All => "all",
        })
    }
}

mod as_str {
    use super::*;

    pub fn serialize<T: fmt::Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> std::result::Result<T, D::Error>
    where
        T: FromStr<Err = Error>,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    #[serde(with = "as_str")]
    pub scoring: ScoringMethod,
    /// Proposals kept per frame after scoring.
    pub top_k: usize,
    #[serde(with = "as_str")]
    pub similarity: SimilarityMethod,
    /// Minimum similarity for a track-proposal match.
    pub gate: f64,
    /// Consecutive unmatched frames a track survives.
    pub keep_alive_frames: usize,
    /// Move keep-alive placeholders forward (flow when available, else Kalman).
    pub propagate_placeholders: bool,
    /// Unmatched proposals below this score do not start tracks.
    pub spawn_threshold: f64,
    pub merge: bool,
    pub merge_threshold: f64,
    /// Endpoint detections compared when merging tracklets.
    pub merge_endpoints: usize,
    #[serde(with = "as_str")]
    pub overlap_order: OverlapOrder,
    #[serde(with = "as_str")]
    pub frames: FrameSelection,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            scoring: ScoringMethod::default(),
            top_k: 100,
            similarity: SimilarityMethod::Mix,
            gate: 0.5,
            keep_alive_frames: 3,
            propagate_placeholders: true,
            spawn_threshold: 0.1,
            merge: true,
            merge_threshold: 0.8,
            merge_endpoints: 3,
            overlap_order: OverlapOrder::NonOverlapFirst,
            frames: FrameSelection::Annotated,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gate > 0.0 && self.gate < 1.0) {
            return Err(Error::config(format!("gate must lie in (0, 1), got {}", self.gate)));
        }
        if self.top_k == 0 {
            return Err(Error::config("top_k must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.spawn_threshold) {
            return Err(Error::config(format!("spawn_threshold must lie in [0, 1], got {}", self.spawn_threshold)));
        }
        if !self.merge_threshold.is_finite() {
            return Err(Error::config("merge_threshold must be finite"));
        }
        if self.merge_endpoints == 0 {
            return Err(Error::config("merge_endpoints must be at least 1"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: TrackerConfig =
            serde_json::from_str(text).map_err(|e| Error::config(format!("tracker config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
