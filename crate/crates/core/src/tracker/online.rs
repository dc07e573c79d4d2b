use std::collections::BTreeMap;

use super::config::TrackerConfig;
use super::hungarian::hungarian_assign;
use crate::datamodel::Proposal;
use crate::error::{Result, Stage};
use crate::geometry::{BBox, FlowField};
use crate::similarity::{compute_similarity, kf_forecast, warp_by_flow, FlowProvider, PairContext};

/// A proposal together with its tracking score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredProposal {
    pub proposal: Proposal,
    pub score: f64,
}

impl AsRef<Proposal> for ScoredProposal {
    fn as_ref(&self) -> &Proposal {
        &self.proposal
    }
}

/// Detections linked under one identity by the online stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracklet {
    pub id: u64,
    pub detections: BTreeMap<u32, ScoredProposal>,
}

impl Tracklet {
    pub fn first_frame(&self) -> u32 {
        *self.detections.keys().next().expect("tracklets are never empty")
    }

    pub fn last_frame(&self) -> u32 {
        *self.detections.keys().next_back().expect("tracklets are never empty")
    }

    /// Arithmetic mean of the detection scores.
    pub fn score(&self) -> f64 {
        self.detections.values().map(|d| d.score).sum::<f64>() / self.detections.len() as f64
    }
}

struct Active {
    tracklet: usize,
    /// Representation matched against the next frame; a placeholder while missed.
    rep: Proposal,
    /// Observed boxes only.
    history: Vec<(u32, BBox)>,
    missed: usize,
}

fn advance_placeholder(a: &mut Active, to: u32, flow: Option<&FlowField>, propagate: bool) -> Result<()> {
    if propagate {
        if let Some(f) = flow {
            let (b, m) = warp_by_flow(&a.rep, f)?;
            a.rep.bbox = b;
            if a.rep.mask.is_some() {
                a.rep.mask = m;
            }
        } else if a.history.len() >= 2 {
            a.rep.bbox = kf_forecast(&a.history, to)?;
        }
    }
    a.rep.frame = to;
    Ok(())
}

/// Online Hungarian tracking with keep-alive.
///
/// `frames` lists the prepared (scored, selected) proposals of each visited
/// frame in increasing frame order. Active tracks are matched to the frame's
/// proposals on `cfg.similarity`; an unmatched track survives as a
/// placeholder for up to `cfg.keep_alive_frames` visited frames without
/// emitting detections. Unmatched proposals scoring at least
/// `cfg.spawn_threshold` start new tracklets. Ids count up from 1.
pub fn track_online(
    frames: &[(u32, Vec<ScoredProposal>)],
    flows: &dyn FlowProvider,
    cfg: &TrackerConfig,
) -> Result<Vec<Tracklet>> {
    let mut tracklets: Vec<Tracklet> = Vec::new();
    let mut active: Vec<Active> = Vec::new();
    let mut prev: Option<u32> = None;

    for (t, props) in frames {
        let t = *t;
        let flow = match prev {
            Some(p) if cfg.similarity.needs_flow() && !active.is_empty() => {
                flows.flow(p, t).map_err(|e| e.at_stage(Stage::Assoc))?
            }
            _ => None,
        };

        let mut row_match = vec![None; active.len()];
        let mut col_taken = vec![false; props.len()];
        if !active.is_empty() && !props.is_empty() {
            let reps: Vec<&Proposal> = active.iter().map(|a| &a.rep).collect();
            let histories: Vec<Vec<(u32, BBox)>> = active.iter().map(|a| a.history.clone()).collect();
            let ctx = PairContext {
                from_frame: prev.unwrap_or(t),
                to_frame: t,
                flow: flow.as_deref(),
                histories: Some(&histories),
            };
            let sims = compute_similarity(cfg.similarity, &reps, props, &ctx).map_err(|e| e.at_stage(Stage::Similarity))?;
            for (i, j) in hungarian_assign(&sims, cfg.gate).matches {
                row_match[i] = Some(j);
                col_taken[j] = true;
            }
        }

        let mut next_active = Vec::with_capacity(active.len());
        for (mut a, m) in active.into_iter().zip(row_match) {
            match m {
                Some(j) => {
                    let det = props[j].clone();
                    a.rep = det.proposal.clone();
                    a.history.push((t, det.proposal.bbox));
                    a.missed = 0;
                    tracklets[a.tracklet].detections.insert(t, det);
                    next_active.push(a);
                }
                None => {
                    a.missed += 1;
                    if a.missed <= cfg.keep_alive_frames {
                        advance_placeholder(&mut a, t, flow.as_deref(), cfg.propagate_placeholders)
                            .map_err(|e| e.at_stage(Stage::Assoc))?;
                        next_active.push(a);
                    }
                }
            }
        }

        for (j, p) in props.iter().enumerate() {
            if col_taken[j] || p.score < cfg.spawn_threshold {
                continue;
            }
            let id = tracklets.len() as u64 + 1;
            next_active.push(Active {
                tracklet: tracklets.len(),
                rep: p.proposal.clone(),
                history: vec![(t, p.proposal.bbox)],
                missed: 0,
            });
            tracklets.push(Tracklet { id, detections: BTreeMap::from([(t, p.clone())]) });
        }
        active = next_active;
        prev = Some(t);
    }
    Ok(tracklets)
}
