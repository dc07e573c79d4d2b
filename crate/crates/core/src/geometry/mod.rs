//! Boxes, run-length masks, optical flow fields and pixel-level overlap
//! resolution. Every function here is pure.

mod bbox;
mod flow;
mod mask;
mod overlap;

pub use bbox::{box_iou, giou, BBox};
pub use flow::{FlowField, FLO_MAGIC};
pub use mask::{decode_rle, encode_rle, mask_iou, mask_to_box, BinaryMask, RleCounts, RleJson};
pub use overlap::{resolve_overlaps, Region};
