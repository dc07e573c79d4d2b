use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::online::{ScoredProposal, Tracklet};
use crate::geometry::box_iou;
use crate::similarity::{embedding_similarity, EmbeddingMetric};

/// Mean pairwise similarity between the last `m` detections of `earlier` and
/// the first `m` of `later`: cosine-mapped embeddings when every endpoint
/// detection carries one of a common length, box IoU otherwise.
pub fn tracklet_similarity(earlier: &Tracklet, later: &Tracklet, m: usize) -> f64 {
    let tail: Vec<&ScoredProposal> = earlier.detections.values().rev().take(m).collect();
    let head: Vec<&ScoredProposal> = later.detections.values().take(m).collect();
    let embs: Option<Vec<&[f32]>> =
        tail.iter().chain(&head).map(|d| d.proposal.embedding.as_deref()).collect();
    let use_emb = embs.as_ref().is_some_and(|e| e.iter().all(|x| x.len() == e[0].len() && !x.is_empty()));
    let mut total = 0.0;
    for a in &tail {
        for b in &head {
            total += if use_emb {
                embedding_similarity(
                    a.proposal.embedding.as_deref().unwrap(),
                    b.proposal.embedding.as_deref().unwrap(),
                    EmbeddingMetric::Cosine,
                )
            } else {
                box_iou(&a.proposal.bbox, &b.proposal.bbox)
            };
        }
    }
    total / (tail.len() * head.len()) as f64
}

#[derive(Debug, PartialEq)]
struct Candidate {
    sim: f64,
    earlier_start: u32,
    earlier_id: u64,
    later_start: u32,
    later_id: u64,
    earlier: usize,
    later: usize,
    versions: (u32, u32),
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // max-heap order: highest similarity, then earliest start, then lowest id
    fn cmp(&self, o: &Self) -> Ordering {
        self.sim
            .total_cmp(&o.sim)
            .then(o.earlier_start.cmp(&self.earlier_start))
            .then(o.earlier_id.cmp(&self.earlier_id))
            .then(o.later_start.cmp(&self.later_start))
            .then(o.later_id.cmp(&self.later_id))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Greedy offline merging of temporally disjoint tracklets.
///
/// Repeatedly joins the pair (earlier ends strictly before later starts) with
/// the highest [`tracklet_similarity`] while it reaches `threshold`. The merged
/// track keeps the earlier tracklet's id. Output is sorted by id.
pub fn merge_tracklets(tracklets: Vec<Tracklet>, threshold: f64, m: usize) -> Vec<Tracklet> {
    let mut slots: Vec<Option<Tracklet>> = tracklets.into_iter().map(Some).collect();
    let mut version = vec![0u32; slots.len()];
    let mut heap = BinaryHeap::new();

    let candidate = |slots: &[Option<Tracklet>], version: &[u32], e: usize, l: usize| -> Option<Candidate> {
        let (a, b) = (slots[e].as_ref()?, slots[l].as_ref()?);
        if a.last_frame() >= b.first_frame() {
            return None;
        }
        let sim = tracklet_similarity(a, b, m);
        (sim >= threshold).then(|| Candidate {
            sim,
            earlier_start: a.first_frame(),
            earlier_id: a.id,
            later_start: b.first_frame(),
            later_id: b.id,
            earlier: e,
            later: l,
            versions: (version[e], version[l]),
        })
    };

    for e in 0..slots.len() {
        for l in 0..slots.len() {
            if e != l {
                heap.extend(candidate(&slots, &version, e, l));
            }
        }
    }

    while let Some(c) = heap.pop() {
        if slots[c.earlier].is_none()
            || slots[c.later].is_none()
            || (version[c.earlier], version[c.later]) != c.versions
        {
            continue;
        }
        let later = slots[c.later].take().unwrap();
        slots[c.earlier].as_mut().unwrap().detections.extend(later.detections);
        version[c.earlier] += 1;
        for o in 0..slots.len() {
            if o != c.earlier {
                heap.extend(candidate(&slots, &version, c.earlier, o));
                heap.extend(candidate(&slots, &version, o, c.earlier));
            }
        }
    }

    let mut out: Vec<Tracklet> = slots.into_iter().flatten().collect();
    out.sort_by_key(|t| t.id);
    out
}
