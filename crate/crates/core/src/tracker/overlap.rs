use std::collections::BTreeMap;

use super::online::{ScoredProposal, Tracklet};
use crate::datamodel::Proposal;
use crate::error::Result;
use crate::geometry::{resolve_overlaps, BBox, BinaryMask, Region};

fn extent(p: &Proposal) -> BBox {
    p.mask.as_ref().map_or(p.bbox, BinaryMask::to_box)
}

/// Shrinks `items` to pixel-disjoint regions by priority.
///
/// Untouched items keep their original box and mask. A box-only item that
/// loses pixels gets the surviving mask and its bounding box. `None` marks an
/// item that lost everything.
fn shrink(items: &[(&Proposal, f64)], width: u32, height: u32) -> Result<Vec<Option<(BBox, Option<BinaryMask>)>>> {
    let unchanged = || items.iter().map(|(p, _)| Some((p.bbox, p.mask.clone()))).collect();
    let extents: Vec<BBox> = items.iter().map(|(p, _)| extent(p)).collect();
    let touching = (0..extents.len())
        .any(|i| (i + 1..extents.len()).any(|j| extents[i].intersection_area(&extents[j]) > 0.0));
    if !touching {
        return Ok(unchanged());
    }

    let regions: Vec<(Region, f64)> = items
        .iter()
        .map(|(p, s)| {
            let r = match &p.mask {
                Some(m) => Region::Mask(m.clone()),
                None => Region::Box(p.bbox),
            };
            (r, *s)
        })
        .collect();
    let resolved = resolve_overlaps(&regions, width, height)?;
    Ok(items
        .iter()
        .zip(resolved)
        .map(|((p, _), r)| {
            let before = match &p.mask {
                Some(m) => m.area(),
                None => BinaryMask::from_box(width, height, &p.bbox).area(),
            };
            if r.area() == before {
                Some((p.bbox, p.mask.clone()))
            } else if r.is_empty() {
                None
            } else {
                Some((r.to_box(), Some(r)))
            }
        })
        .collect())
}

/// Removes overlaps among one frame's proposals, priority = proposal score.
/// Proposals left without pixels are dropped; order is preserved.
pub fn frame_non_overlap(props: Vec<ScoredProposal>, width: u32, height: u32) -> Result<Vec<ScoredProposal>> {
    let items: Vec<(&Proposal, f64)> = props.iter().map(|p| (&p.proposal, p.score)).collect();
    let shrunk = shrink(&items, width, height)?;
    Ok(props
        .into_iter()
        .zip(shrunk)
        .filter_map(|(mut p, s)| {
            let (b, m) = s?;
            p.proposal.bbox = b;
            p.proposal.mask = m;
            Some(p)
        })
        .collect())
}

/// Removes overlaps among tracks frame by frame, priority = the track's mean
/// score before resolution. Emptied detections and tracks are dropped.
pub fn tracks_non_overlap(tracklets: Vec<Tracklet>, width: u32, height: u32) -> Result<Vec<Tracklet>> {
    let priorities: Vec<f64> = tracklets.iter().map(Tracklet::score).collect();
    let mut by_frame: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, t) in tracklets.iter().enumerate() {
        for &f in t.detections.keys() {
            by_frame.entry(f).or_default().push(i);
        }
    }
    let mut tracklets = tracklets;
    for (f, members) in by_frame {
        if members.len() < 2 {
            continue;
        }
        let items: Vec<(&Proposal, f64)> =
            members.iter().map(|&i| (&tracklets[i].detections[&f].proposal, priorities[i])).collect();
        let shrunk = shrink(&items, width, height)?;
        for (i, s) in members.into_iter().zip(shrunk) {
            match s {
                Some((b, m)) => {
                    let d = tracklets[i].detections.get_mut(&f).unwrap();
                    d.proposal.bbox = b;
                    d.proposal.mask = m;
                }
                None => {
                    tracklets[i].detections.remove(&f);
                }
            }
        }
    }
    tracklets.retain(|t| !t.detections.is_empty());
    Ok(tracklets)
}
