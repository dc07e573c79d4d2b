use serde::{Deserialize, Serialize};

use super::RECALL_IOU;
use crate::datamodel::{GtView, Proposal, ProposalSet};
use crate::error::{Result, Stage};
use crate::geometry::{box_iou, BBox};
use crate::par::Executor;
use crate::similarity::{chain_association, compute_similarity, FlowProvider, PairContext, SimilarityMethod};
use crate::tracker::FlowSource;

#[derive(Debug, Clone, PartialEq)]
pub struct AssocBenchConfig {
    pub method: SimilarityMethod,
    /// Distance between paired frames, in annotated-frame steps.
    pub gap: usize,
    /// Propagate through every proposal frame in between instead of jumping.
    pub chain: bool,
    /// Chain hops below this similarity are skipped.
    pub assoc_threshold: Option<f64>,
}

impl Default for AssocBenchConfig {
    fn default() -> Self {
        AssocBenchConfig { method: SimilarityMethod::Mix, gap: 1, chain: false, assoc_threshold: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssocResult {
    pub method: String,
    pub successes: u64,
    pub total: u64,
    /// `None` when no pair was eligible.
    pub accuracy: Option<f64>,
    pub empty: bool,
}

/// Index of the proposal with the highest IoU against `b` (first on ties)
/// when that IoU exceeds the recall threshold.
fn best_cover(props: &[Proposal], b: &BBox) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in props.iter().enumerate() {
        let v = box_iou(&p.bbox, b);
        if v > RECALL_IOU && best.is_none_or(|(_, bv)| v > bv) {
            best = Some((i, v));
        }
    }
    best.map(|b| b.0)
}

/// Top-1 association accuracy over ground-truth pairs `gap` annotated frames
/// apart. A pair is eligible when both of its boxes are covered (IoU > 0.5)
/// by some proposal. The query is the best-covering proposal in the earlier
/// frame; the pair succeeds when the most similar proposal in the later frame
/// covers the paired box.
pub fn assoc_top1_benchmark(
    gt: &GtView,
    proposals: &ProposalSet,
    flows: &FlowSource,
    cfg: &AssocBenchConfig,
    exec: &Executor,
) -> Result<AssocResult> {
    let gap = cfg.gap.max(1);
    let per_video = exec.try_map(&gt.videos, |v| -> Result<(u64, u64)> {
        let Some(props) = proposals.video(&v.name) else { return Ok((0, 0)) };
        let provider = flows.provider(&v.name);
        let frame_props = |f: u32| props.get(&f).map(Vec::as_slice).unwrap_or(&[]);
        let (mut ok, mut total) = (0u64, 0u64);
        for w in v.frames.windows(gap + 1) {
            let (f0, f1) = (w[0], w[gap]);
            let (p0, p1) = (frame_props(f0), frame_props(f1));
            for t in &v.tracks {
                let (Some(b0), Some(b1)) = (t.detections.get(&f0), t.detections.get(&f1)) else { continue };
                let Some(q) = best_cover(p0, b0) else { continue };
                if best_cover(p1, b1).is_none() {
                    continue;
                }
                total += 1;
                let history: Vec<(u32, BBox)> = t
                    .detections
                    .range(..f0)
                    .filter_map(|(&f, b)| best_cover(frame_props(f), b).map(|i| (f, frame_props(f)[i].bbox)))
                    .chain(std::iter::once((f0, p0[q].bbox)))
                    .collect();
                let picked = pick(&p0[q], f0, p1, f1, props, &history, provider.as_ref(), cfg)
                    .map_err(|e| e.at_stage(Stage::Assoc).in_video(&v.name))?;
                if picked.is_some_and(|j| box_iou(&p1[j].bbox, b1) > RECALL_IOU) {
                    ok += 1;
                }
            }
        }
        Ok((ok, total))
    })?;
    let (successes, total) = per_video.iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(AssocResult {
        method: cfg.method.to_string(),
        successes,
        total,
        accuracy: (total > 0).then(|| successes as f64 / total as f64),
        empty: total == 0,
    })
}

#[allow(clippy::too_many_arguments)]
fn pick(
    query: &Proposal,
    f0: u32,
    p1: &[Proposal],
    f1: u32,
    props: &crate::datamodel::VideoProposals,
    history: &[(u32, BBox)],
    flows: &dyn FlowProvider,
    cfg: &AssocBenchConfig,
) -> Result<Option<usize>> {
    let queries = std::slice::from_ref(query);
    if cfg.chain {
        let mut frames: Vec<(u32, &[Proposal])> = vec![(f0, queries)];
        frames.extend(props.range(f0 + 1..f1).map(|(&f, p)| (f, p.as_slice())));
        frames.push((f1, p1));
        let (_, traces) = chain_association(&frames, cfg.method, flows, cfg.assoc_threshold)?;
        return Ok(traces[0].reached());
    }
    let flow = if cfg.method.needs_flow() { flows.flow(f0, f1)? } else { None };
    let histories = [history.to_vec()];
    let ctx = PairContext { from_frame: f0, to_frame: f1, flow: flow.as_deref(), histories: Some(&histories) };
    let sims = compute_similarity(cfg.method, queries, p1, &ctx)?;
    Ok(sims.argmax_row(0).map(|(j, _)| j))
}
