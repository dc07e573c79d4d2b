use super::bbox::BBox;
use super::mask::BinaryMask;
use crate::error::{Error, Result};

/// Region taking part in overlap resolution. Boxes are rasterized at frame
/// resolution before pixels are assigned.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Mask(BinaryMask),
    Box(BBox),
}

impl Region {
    fn rasterize(&self, width: u32, height: u32) -> Result<BinaryMask> {
        match self {
            Region::Mask(m) => {
                if m.width() != width || m.height() != height {
                    return Err(Error::input(format!(
                        "mask {}x{} does not match frame {}x{}",
                        m.width(),
                        m.height(),
                        width,
                        height
                    )));
                }
                Ok(m.clone())
            }
            Region::Box(b) => Ok(BinaryMask::from_box(width, height, b)),
        }
    }
}

/// Assigns every pixel to the highest-priority region covering it.
///
/// Ties go to the lower input index. Output `i` is the part of input `i` that
/// survived; outputs are pairwise disjoint and cover the union of the inputs.
pub fn resolve_overlaps(
    items: &[(Region, f64)],
    width: u32,
    height: u32,
) -> Result<Vec<BinaryMask>> {
    if let Some((_, p)) = items.iter().find(|(_, p)| !p.is_finite()) {
        return Err(Error::input(format!("non-finite overlap priority {p}")));
    }
    let masks: Vec<BinaryMask> =
        items.iter().map(|(r, _)| r.rasterize(width, height)).collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[b].1.total_cmp(&items[a].1).then(a.cmp(&b)));

    let mut taken = vec![false; width as usize * height as usize];
    let mut out = vec![BinaryMask::empty(width, height); items.len()];
    for idx in order {
        let mask = &masks[idx];
        let mut kept = vec![false; taken.len()];
        let mut changed = false;
        for (s, e) in mask.intervals() {
            for p in s as usize..e as usize {
                if taken[p] {
                    changed = true;
                } else {
                    taken[p] = true;
                    kept[p] = true;
                }
            }
        }
        out[idx] = if changed {
            BinaryMask::from_column_major(width, height, &kept)?
        } else {
            mask.clone()
        };
    }
    Ok(out)
}
