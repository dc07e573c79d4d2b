use crate::datamodel::Proposal;
use crate::error::{Error, Result};
use crate::geometry::{BBox, BinaryMask, FlowField};

/// Lower median: element `(n - 1) / 2` of the sorted values.
pub(crate) fn lower_median(values: &mut [f32]) -> f32 {
    let mid = (values.len() - 1) / 2;
    let (_, m, _) = values.select_nth_unstable_by(mid, f32::total_cmp);
    *m
}

/// Warps a proposal into the next frame with a dense flow field.
///
/// The box moves by the per-axis lower median of the flow over its interior
/// (mask pixels when a mask exists, else the box pixels clipped to the image).
/// Mask pixels are forward-splatted by their rounded displacement; pixels
/// leaving the image are dropped. A proposal with no interior pixels yields a
/// zero-area box and an empty mask.
pub fn warp_by_flow(p: &Proposal, flow: &FlowField) -> Result<(BBox, Option<BinaryMask>)> {
    let (w, h) = (flow.width(), flow.height());
    if let Some(m) = &p.mask {
        if m.width() != w || m.height() != h {
            return Err(Error::input(format!(
                "mask {}x{} does not match flow {}x{}",
                m.width(),
                m.height(),
                w,
                h
            )));
        }
    }
    let interior = match &p.mask {
        Some(m) => m.clone(),
        None => BinaryMask::from_box(w, h, &p.bbox),
    };
    let mut us = Vec::with_capacity(interior.area() as usize);
    let mut vs = Vec::with_capacity(interior.area() as usize);
    for (s, e) in interior.intervals() {
        for idx in s..e {
            let [du, dv] = flow.at(idx / h, idx % h);
            us.push(du);
            vs.push(dv);
        }
    }
    if us.is_empty() {
        return Ok((BBox::default(), p.mask.as_ref().map(|_| BinaryMask::empty(w, h))));
    }
    let (mu, mv) = (lower_median(&mut us) as f64, lower_median(&mut vs) as f64);
    let bbox = p.bbox.translate(mu, mv);

    let mask = match &p.mask {
        None => None,
        Some(m) => {
            let mut out = vec![false; (w * h) as usize];
            for (s, e) in m.intervals() {
                for idx in s..e {
                    let (c, r) = (idx / h, idx % h);
                    let [du, dv] = flow.at(c, r);
                    let nc = (c as f64 + du as f64).round();
                    let nr = (r as f64 + dv as f64).round();
                    if nc >= 0.0 && nr >= 0.0 && nc < w as f64 && nr < h as f64 {
                        out[nc as usize * h as usize + nr as usize] = true;
                    }
                }
            }
            Some(BinaryMask::from_column_major(w, h, &out)?)
        }
    };
    Ok((bbox, mask))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxed(x1: f64, y1: f64, x2: f64, y2: f64) -> Proposal {
        Proposal::from_box(0, BBox { x1, y1, x2, y2 })
    }

    #[test]
    fn uniform_flow_shifts_box_and_mask() {
        let mut p = boxed(2.0, 3.0, 6.0, 7.0);
        p.mask = Some(BinaryMask::from_box(20, 10, &p.bbox));
        let (b, m) = warp_by_flow(&p, &FlowField::uniform(20, 10, 5.0, 0.0)).unwrap();
        assert_eq!(b, BBox { x1: 7.0, y1: 3.0, x2: 11.0, y2: 7.0 });
        assert_eq!(m.unwrap(), BinaryMask::from_box(20, 10, &b));
    }

    #[test]
    fn zero_flow_is_identity() {
        let mut p = boxed(1.0, 1.0, 4.0, 3.0);
        p.mask = Some(BinaryMask::from_box(8, 8, &p.bbox));
        let (b, m) = warp_by_flow(&p, &FlowField::zeros(8, 8)).unwrap();
        assert_eq!(b, p.bbox);
        assert_eq!(m, p.mask);
    }

    #[test]
    fn even_split_uses_lower_median() {
        // left half of the box moves +4, right half +6
        let p = boxed(0.0, 0.0, 4.0, 2.0);
        let mut flow = FlowField::zeros(10, 2);
        for r in 0..2 {
            for c in 0..10 {
                flow.set(c, r, [if c < 2 { 4.0 } else { 6.0 }, 0.0]);
            }
        }
        let (b, _) = warp_by_flow(&p, &flow).unwrap();
        assert_eq!(b.x1, 4.0);
    }

    #[test]
    fn box_outside_image_collapses() {
        let p = boxed(50.0, 50.0, 60.0, 60.0);
        let (b, m) = warp_by_flow(&p, &FlowField::uniform(10, 10, 1.0, 1.0)).unwrap();
        assert_eq!(b.area(), 0.0);
        assert!(m.is_none());
    }

    #[test]
    fn mask_dimension_mismatch() {
        let mut p = boxed(0.0, 0.0, 1.0, 1.0);
        p.mask = Some(BinaryMask::empty(3, 3));
        assert!(warp_by_flow(&p, &FlowField::zeros(4, 4)).is_err());
    }

    #[test]
    fn median_helper() {
        assert_eq!(lower_median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(lower_median(&mut [4.0, 6.0, 6.0, 4.0]), 4.0);
    }
}
