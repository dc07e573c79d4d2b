use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use super::config::{FrameSelection, OverlapOrder, TrackerConfig};
use super::merge::merge_tracklets;
use super::online::{track_online, ScoredProposal, Tracklet};
use super::overlap::{frame_non_overlap, tracks_non_overlap};
use crate::datamodel::{Dataset, ProposalSet, Track, TrackDet, TrackSet, Video, VideoProposals};
use crate::error::{Error, Result, Stage};
use crate::geometry::FlowField;
use crate::par::Executor;
use crate::scoring::select_top_k;
use crate::similarity::{FlowDir, FlowProvider, NoFlow};

/// Where per-video flows come from.
#[derive(Debug, Clone, Default)]
pub enum FlowSource {
    #[default]
    None,
    /// `<root>/<video name>/<frame>.flo`
    Dir(PathBuf),
    Memory(BTreeMap<String, BTreeMap<u32, Arc<FlowField>>>),
}

impl FlowSource {
    pub fn provider(&self, video: &str) -> Box<dyn FlowProvider + '_> {
        match self {
            FlowSource::None => Box::new(NoFlow),
            FlowSource::Dir(root) => Box::new(FlowDir { dir: root.join(video) }),
            FlowSource::Memory(m) => match m.get(video) {
                Some(f) => Box::new(MemoryFlows(f)),
                None => Box::new(NoFlow),
            },
        }
    }
}

struct MemoryFlows<'a>(&'a BTreeMap<u32, Arc<FlowField>>);

impl FlowProvider for MemoryFlows<'_> {
    fn flow(&self, from: u32, to: u32) -> Result<Option<Arc<FlowField>>> {
        self.0.flow(from, to)
    }
}

/// Frame size used for rasterization: the annotated size, or else the
/// smallest canvas holding every proposal.
fn canvas(video: &Video, props: &VideoProposals) -> (u32, u32) {
    if video.width > 0 && video.height > 0 {
        return (video.width, video.height);
    }
    let mut w = 0u32;
    let mut h = 0u32;
    for p in props.values().flatten() {
        match &p.mask {
            Some(m) => {
                w = w.max(m.width());
                h = h.max(m.height());
            }
            None => {
                w = w.max(p.bbox.x2.max(0.0).ceil() as u32);
                h = h.max(p.bbox.y2.max(0.0).ceil() as u32);
            }
        }
    }
    (w.max(1), h.max(1))
}

/// Full per-video pipeline: score and select, optional overlap removal,
/// online tracking, tracklet merging, optional overlap removal.
pub fn track_video(
    video: &Video,
    props: &VideoProposals,
    flows: &dyn FlowProvider,
    cfg: &TrackerConfig,
) -> Result<Vec<Track>> {
    let (width, height) = canvas(video, props);
    let frame_ids: Vec<u32> = match cfg.frames {
        FrameSelection::Annotated => video.frame_indices(),
        FrameSelection::All => props.keys().copied().collect(),
    };
    let empty = Vec::new();
    let mut frames = Vec::with_capacity(frame_ids.len());
    for f in frame_ids {
        let raw = props.get(&f).unwrap_or(&empty);
        let top = select_top_k(raw, cfg.scoring, cfg.top_k).map_err(|e| e.at_stage(Stage::Scoring))?;
        let mut selected: Vec<ScoredProposal> =
            top.into_iter().map(|(i, score)| ScoredProposal { proposal: raw[i].clone(), score }).collect();
        if cfg.overlap_order == OverlapOrder::NonOverlapFirst {
            selected = frame_non_overlap(selected, width, height).map_err(|e| e.at_stage(Stage::Overlap))?;
        }
        frames.push((f, selected));
    }

    let mut tracklets = track_online(&frames, flows, cfg)?;
    if cfg.merge {
        tracklets = merge_tracklets(tracklets, cfg.merge_threshold, cfg.merge_endpoints);
    }
    if cfg.overlap_order == OverlapOrder::TrackFirst {
        tracklets = tracks_non_overlap(tracklets, width, height).map_err(|e| e.at_stage(Stage::Overlap))?;
    }
    Ok(finish(tracklets))
}

/// Renumbers tracks 1.. by (first frame, tracklet id).
fn finish(mut tracklets: Vec<Tracklet>) -> Vec<Track> {
    tracklets.sort_by_key(|t| (t.first_frame(), t.id));
    tracklets
        .into_iter()
        .enumerate()
        .map(|(i, t)| Track {
            id: i as u64 + 1,
            detections: t
                .detections
                .into_iter()
                .map(|(f, d)| (f, TrackDet { bbox: d.proposal.bbox, mask: d.proposal.mask, score: d.score }))
                .collect(),
        })
        .collect()
}

/// Runs the tracker over every video of `dataset`, videos in parallel.
pub fn run_owtb(
    dataset: &Dataset,
    proposals: &ProposalSet,
    flows: &FlowSource,
    cfg: &TrackerConfig,
    exec: &Executor,
) -> Result<TrackSet> {
    cfg.validate()?;
    if let Some(name) = proposals.videos.keys().find(|n| dataset.video_by_name(n).is_none()) {
        return Err(Error::input(format!("proposals reference unknown video {name:?}")));
    }
    let empty = VideoProposals::new();
    let results = exec.try_map(&dataset.videos, |v| {
        let props = proposals.video(&v.name).unwrap_or(&empty);
        let provider = flows.provider(&v.name);
        track_video(v, props, provider.as_ref(), cfg)
            .map(|tracks| (v.name.clone(), tracks))
            .map_err(|e| e.in_video(&v.name))
    })?;
    Ok(TrackSet { videos: results.into_iter().filter(|(_, t)| !t.is_empty()).collect() })
}
