//! Brute-force reference implementations for small inputs.
//!
//! Slow on purpose: every matching is found by enumerating all partial
//! injections, and all geometry is recomputed from scratch.

use std::collections::BTreeMap;

use crate::datamodel::{EvalVideo, GtTrack, Proposal, SplitMode, Track};
use crate::error::{Error, Result};
use crate::geometry::{mask_to_box, BBox};
use crate::scoring::{compute_score, ScoringMethod};
use crate::similarity::SimilarityMatrix;
use crate::tracker::TIE_TOLERANCE;

pub const MAX_TRACKS: usize = 5;
pub const MAX_FRAMES: usize = 6;

fn iou(a: &BBox, b: &BBox) -> f64 {
    let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = iw * ih;
    let union = (a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

/// Visits every partial injection rows -> cols restricted to `ok`, in
/// lexicographic order of the row-to-column vector with "unmatched" after
/// every column. `visit` gets the assignment and its total summed in row
/// order, and returns false to stop.
fn for_each_injection(
    sim: &SimilarityMatrix,
    ok: &dyn Fn(usize, usize) -> bool,
    visit: &mut dyn FnMut(&[Option<usize>], f64) -> bool,
) {
    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        total: f64,
        sim: &SimilarityMatrix,
        ok: &dyn Fn(usize, usize) -> bool,
        used: &mut [bool],
        cur: &mut Vec<Option<usize>>,
        visit: &mut dyn FnMut(&[Option<usize>], f64) -> bool,
    ) -> bool {
        if i == sim.rows() {
            return visit(cur, total);
        }
        for j in 0..sim.cols() {
            if !used[j] && ok(i, j) {
                used[j] = true;
                cur.push(Some(j));
                let more = go(i + 1, total + sim.get(i, j), sim, ok, used, cur, visit);
                cur.pop();
                used[j] = false;
                if !more {
                    return false;
                }
            }
        }
        cur.push(None);
        let more = go(i + 1, total, sim, ok, used, cur, visit);
        cur.pop();
        more
    }
    go(0, 0.0, sim, ok, &mut vec![false; sim.cols()], &mut Vec::with_capacity(sim.rows()), visit);
}

/// Exhaustive reference for `hungarian_assign`: the lexicographically first
/// assignment whose total is within [`TIE_TOLERANCE`] of the maximum.
pub fn oracle_assignment(sim: &SimilarityMatrix, gate: f64) -> (f64, Vec<(usize, usize)>) {
    let ok = |i: usize, j: usize| {
        let v = sim.get(i, j);
        sim.is_admissible(i, j) && v.is_finite() && v >= gate && v > 0.0
    };
    let mut best = f64::NEG_INFINITY;
    for_each_injection(sim, &ok, &mut |_, t| {
        best = best.max(t);
        true
    });
    let mut pick = (0.0, Vec::new());
    for_each_injection(sim, &ok, &mut |a, t| {
        if t < best - TIE_TOLERANCE {
            return true;
        }
        pick = (t, a.iter().enumerate().filter_map(|(i, j)| j.map(|j| (i, j))).collect());
        false
    });
    pick
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OracleComponents {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub det_re: f64,
    pub det_a: f64,
    pub ass_a: f64,
    pub ass_re: f64,
    pub ass_pr: f64,
    pub owta: f64,
    pub hota: f64,
}

fn best_matching(rows: usize, cols: usize, w: &dyn Fn(usize, usize) -> Option<f64>) -> Vec<(usize, usize)> {
    let mut m = SimilarityMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            match w(i, j) {
                Some(v) => m.set(i, j, v),
                None => m.set_admissible(i, j, false),
            }
        }
    }
    oracle_assignment(&m, 0.0).1
}

/// Reference metrics for one video at one alpha.
pub fn oracle_owta(preds: &[Track], gt: &EvalVideo, mode: SplitMode, remove_other: bool, alpha: f64) -> Result<OracleComponents> {
    if preds.len() > MAX_TRACKS || gt.tracks.len() > MAX_TRACKS || gt.frames.len() > MAX_FRAMES {
        return Err(Error::input(format!(
            "oracle limited to {MAX_TRACKS} tracks per side and {MAX_FRAMES} frames"
        )));
    }
    let mut excluded: Vec<&GtTrack> = gt.distractors.iter().collect();
    if mode == SplitMode::Unknown && remove_other {
        excluded.extend(&gt.other);
    }
    let pbox = |p: usize, f: u32| -> Option<BBox> {
        preds[p].detections.get(&f).map(|d| d.mask.as_ref().map_or(d.bbox, mask_to_box))
    };

    // pass 1: surviving predictions per frame
    let mut alive: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for &f in &gt.frames {
        let present: Vec<usize> = (0..preds.len()).filter(|&p| pbox(p, f).is_some()).collect();
        let mut rows: Vec<BBox> = gt.tracks.iter().filter_map(|t| t.detections.get(&f).copied()).collect();
        let n_gt = rows.len();
        rows.extend(excluded.iter().filter_map(|t| t.detections.get(&f).copied()));
        let pairs = best_matching(rows.len(), present.len(), &|i, j| {
            let v = iou(&rows[i], &pbox(present[j], f).unwrap());
            (v >= alpha).then_some(v)
        });
        let dropped: Vec<usize> = pairs.iter().filter(|(i, _)| *i >= n_gt).map(|&(_, j)| present[j]).collect();
        alive.insert(f, present.into_iter().filter(|p| !dropped.contains(p)).collect());
    }

    let ng = gt.tracks.len();
    let np = preds.len();
    let gcount: Vec<f64> = (0..ng).map(|g| gt.frames.iter().filter(|f| gt.tracks[g].detections.contains_key(f)).count() as f64).collect();
    let pcount: Vec<f64> = (0..np).map(|p| alive.values().filter(|a| a.contains(&p)).count() as f64).collect();
    let admissible = |g: usize, p: usize, f: u32| -> Option<f64> {
        let gb = gt.tracks[g].detections.get(&f)?;
        if !alive[&f].contains(&p) {
            return None;
        }
        let v = iou(gb, &pbox(p, f)?);
        (v >= alpha).then_some(v)
    };
    let mut align = vec![vec![0.0; np]; ng];
    for g in 0..ng {
        for p in 0..np {
            let pm = gt.frames.iter().filter(|&&f| admissible(g, p, f).is_some()).count() as f64;
            align[g][p] = pm / (gcount[g] + pcount[p] - pm);
        }
    }

    // pass 2: per-frame matching
    let mut out = OracleComponents::default();
    let mut mcount = vec![vec![0.0f64; np]; ng];
    for &f in &gt.frames {
        let gs: Vec<usize> = (0..ng).filter(|&g| gt.tracks[g].detections.contains_key(&f)).collect();
        let ps = &alive[&f];
        let pairs = best_matching(gs.len(), ps.len(), &|i, j| {
            admissible(gs[i], ps[j], f).map(|v| align[gs[i]][ps[j]] + 1e-6 * v)
        });
        for &(i, j) in &pairs {
            mcount[gs[i]][ps[j]] += 1.0;
        }
        out.tp += pairs.len() as u64;
        out.fn_ += (gs.len() - pairs.len()) as u64;
        out.fp += (ps.len() - pairs.len()) as u64;
    }
    let (mut a, mut re, mut pr) = (0.0, 0.0, 0.0);
    for g in 0..ng {
        for p in 0..np {
            let mc = mcount[g][p];
            if mc > 0.0 {
                a += mc * mc / (gcount[g] + pcount[p] - mc);
                re += mc * mc / gcount[g];
                pr += mc * mc / pcount[p];
            }
        }
    }
    let div = |x: f64, y: f64| if y > 0.0 { x / y } else { 0.0 };
    let tp = out.tp as f64;
    out.det_re = div(tp, tp + out.fn_ as f64);
    out.det_a = div(tp, tp + out.fn_ as f64 + out.fp as f64);
    out.ass_a = div(a, tp);
    out.ass_re = div(re, tp);
    out.ass_pr = div(pr, tp);
    out.owta = (out.det_re * out.ass_a).sqrt();
    out.hota = (out.det_a * out.ass_a).sqrt();
    Ok(out)
}

/// Reference top-`k` detection recall: the fraction of ground-truth boxes in
/// annotated frames covered (IoU >= 0.5) by one of the `k` best proposals.
pub fn oracle_recall(proposals: &[Proposal], gt: &[BBox], scoring: ScoringMethod, k: usize) -> Result<f64> {
    if gt.is_empty() {
        return Ok(0.0);
    }
    let mut scored: Vec<(usize, f64)> = Vec::new();
    for (i, p) in proposals.iter().enumerate() {
        scored.push((i, compute_score(p, scoring)?));
    }
    // stable sort keeps index order among equal scores
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let top: Vec<&Proposal> = scored.iter().take(k).map(|&(i, _)| &proposals[i]).collect();
    let mut hit = 0usize;
    for g in gt {
        let mut covered = false;
        for p in &top {
            if iou(&p.bbox, g) >= 0.5 {
                covered = true;
            }
        }
        hit += usize::from(covered);
    }
    Ok(hit as f64 / gt.len() as f64)
}
