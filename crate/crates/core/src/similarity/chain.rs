use super::{compute_similarity, FlowProvider, PairContext, SimilarityMatrix, SimilarityMethod};
use crate::datamodel::Proposal;
use crate::error::{Error, Result};
use crate::geometry::BBox;

/// What happened to a query in one intermediate or final frame.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainHop {
    /// The query moved to proposal `index` of `frame`.
    Taken { frame: u32, index: usize, similarity: f64 },
    /// The frame was passed over and the carried proposal held unchanged.
    /// `best` is the best available similarity, if the frame had proposals.
    Skipped { frame: u32, best: Option<f64> },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainTrace {
    pub hops: Vec<ChainHop>,
}

impl ChainTrace {
    /// Proposal index reached in the last frame, if any.
    pub fn reached(&self) -> Option<usize> {
        match self.hops.last() {
            Some(ChainHop::Taken { index, .. }) => Some(*index),
            _ => None,
        }
    }
}

/// Propagates each proposal of the first frame through the following frames
/// by repeatedly moving to its most similar proposal.
///
/// With `assoc_threshold`, an intermediate hop whose best similarity is below
/// the threshold is skipped and the carried proposal is held through that
/// frame. The final frame always takes its best match when it has proposals.
/// The returned matrix (first frame x last frame) is admissible only at the
/// reached proposal, valued at the minimum similarity along the chain.
pub fn chain_association<P: AsRef<Proposal>>(
    frames: &[(u32, &[P])],
    method: SimilarityMethod,
    flows: &dyn FlowProvider,
    assoc_threshold: Option<f64>,
) -> Result<(SimilarityMatrix, Vec<ChainTrace>)> {
    if frames.len() < 2 {
        return Err(Error::input("chained association needs at least two frames"));
    }
    let (start_frame, queries) = frames[0];
    let (_, last_items) = frames[frames.len() - 1];
    let mut out = SimilarityMatrix::zeros(queries.len(), last_items.len());
    for i in 0..queries.len() {
        for j in 0..last_items.len() {
            out.set_admissible(i, j, false);
        }
    }

    let mut traces = Vec::with_capacity(queries.len());
    for (qi, query) in queries.iter().enumerate() {
        let mut carried: Proposal = query.as_ref().clone();
        let mut carried_frame = start_frame;
        let mut history: Vec<(u32, BBox)> = vec![(start_frame, carried.bbox)];
        let mut chain_min = 1.0f64;
        let mut trace = ChainTrace::default();

        for (hop, &(frame, items)) in frames.iter().enumerate().skip(1) {
            let is_last = hop == frames.len() - 1;
            if items.is_empty() {
                trace.hops.push(ChainHop::Skipped { frame, best: None });
                carried_frame = frame;
                continue;
            }
            let flow = if method.needs_flow() { flows.flow(carried_frame, frame)? } else { None };
            let ctx = PairContext {
                from_frame: carried_frame,
                to_frame: frame,
                flow: flow.as_deref(),
                histories: Some(std::slice::from_ref(&history)),
            };
            let sims = compute_similarity(method, std::slice::from_ref(&carried), items, &ctx)?;
            let (best_j, best) = sims.argmax_row(0).expect("non-empty frame has an admissible column");
            let below = assoc_threshold.is_some_and(|t| best < t);
            if below && !is_last {
                trace.hops.push(ChainHop::Skipped { frame, best: Some(best) });
                carried_frame = frame;
                continue;
            }
            trace.hops.push(ChainHop::Taken { frame, index: best_j, similarity: best });
            chain_min = chain_min.min(best);
            carried = items[best_j].as_ref().clone();
            carried_frame = frame;
            if history.last().is_none_or(|h| h.0 < frame) {
                history.push((frame, carried.bbox));
            }
        }

        if let Some(j) = trace.reached() {
            out.set(qi, j, chain_min);
            out.set_admissible(qi, j, true);
        }
        traces.push(trace);
    }
    Ok((out, traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::{GeometricKind, NoFlow};

    fn boxed(x: f64) -> Proposal {
        Proposal::from_box(0, BBox { x1: x, y1: 0.0, x2: x + 10.0, y2: 10.0 })
    }

    const BOX_IOU: SimilarityMethod = SimilarityMethod::Geometric(GeometricKind::BoxIou);

    #[test]
    fn single_hop_equals_rowwise_argmax() {
        let a = vec![boxed(0.0), boxed(30.0)];
        let b = vec![boxed(31.0), boxed(2.0), boxed(60.0)];
        let (m, _) = chain_association(&[(0, &a[..]), (1, &b[..])], BOX_IOU, &NoFlow, None).unwrap();
        let base = crate::similarity::sim_geometric(&a, &b, GeometricKind::BoxIou).unwrap();
        for i in 0..2 {
            let (j, v) = base.argmax_row(i).unwrap();
            assert_eq!(m.argmax_row(i), Some((j, v)));
            for k in 0..3 {
                assert_eq!(m.is_admissible(i, k), k == j);
            }
        }
    }

    #[test]
    fn follows_planted_correspondence() {
        // two objects moving +4 per frame, far apart
        let frames: Vec<Vec<Proposal>> =
            (0..3).map(|t| vec![boxed(100.0 - 4.0 * t as f64), boxed(4.0 * t as f64)]).collect();
        let refs: Vec<(u32, &[Proposal])> = frames.iter().enumerate().map(|(t, f)| (t as u32, &f[..])).collect();
        let (m, traces) = chain_association(&refs, BOX_IOU, &NoFlow, None).unwrap();
        assert_eq!(m.argmax_row(0).unwrap().0, 0);
        assert_eq!(m.argmax_row(1).unwrap().0, 1);
        assert_eq!(traces[1].hops.len(), 2);
    }

    #[test]
    fn low_quality_hop_is_skipped_under_threshold() {
        let f0 = vec![boxed(0.0)];
        // best hop IoU = 6/14 < 0.75 in frame 1
        let f1 = vec![boxed(4.0)];
        let f2 = vec![boxed(1.0), boxed(5.0)];
        let frames = [(0, &f0[..]), (1, &f1[..]), (2, &f2[..])];
        let (_, with) = chain_association(&frames, BOX_IOU, &NoFlow, Some(0.75)).unwrap();
        assert!(matches!(with[0].hops[0], ChainHop::Skipped { frame: 1, best: Some(b) } if b < 0.75));
        // carried box unchanged at x=0, so the nearer x=1 candidate wins
        assert_eq!(with[0].reached(), Some(0));
        let (_, without) = chain_association(&frames, BOX_IOU, &NoFlow, None).unwrap();
        assert!(matches!(without[0].hops[0], ChainHop::Taken { frame: 1, index: 0, .. }));
        assert_eq!(without[0].reached(), Some(1));
    }

    #[test]
    fn empty_intermediate_frame_is_skipped() {
        let f0 = vec![boxed(0.0)];
        let empty: Vec<Proposal> = vec![];
        let f2 = vec![boxed(50.0), boxed(1.0)];
        let (m, t) =
            chain_association(&[(0, &f0[..]), (1, &empty[..]), (2, &f2[..])], BOX_IOU, &NoFlow, None).unwrap();
        assert_eq!(t[0].hops[0], ChainHop::Skipped { frame: 1, best: None });
        assert_eq!(m.argmax_row(0).unwrap().0, 1);
    }
}
