//! Polar transform and successive-cancellation list decoding.
//!
//! LLRs are natural-log ratios `ln P(0)/P(1)`, clipped to [`LLR_CLIP`].
//! Combined bit indices are level-major: index `level * n + i` addresses bit
//! `i` of the length-`n` polar segment of `level`.

mod engine;
mod kernel;
mod transform;

pub use engine::{genie_leaf_llrs, scl_run, BitPolicy, LevelSource, ListCandidate};
pub use kernel::{binary_entropy_of_llr, checknode, clip_llr, metric_update, varnode, LLR_CLIP};
pub use transform::{polar_transform, polar_transform_in_place};

