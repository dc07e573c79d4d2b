//! Track formation: assignment, online linking with keep-alive, offline
//! tracklet merging, overlap removal and the composed pipeline.

mod config;
mod hungarian;
mod merge;
mod online;
mod overlap;
mod pipeline;

pub use config::{FrameSelection, OverlapOrder, TrackerConfig};
pub use hungarian::{hungarian_assign, Assignment, TIE_TOLERANCE};
pub use merge::{merge_tracklets, tracklet_similarity};
pub use online::{track_online, ScoredProposal, Tracklet};
pub use overlap::{frame_non_overlap, tracks_non_overlap};
pub use pipeline::{run_owtb, track_video, FlowSource};
