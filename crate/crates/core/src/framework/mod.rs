//! Patch scheduling, target context extraction and candidate gathering.
//!
//! A lost block is filled one 2x2 patch at a time. Each patch is described by
//! the usable pixels of the surrounding 6x6 window (its context), and
//! candidate observations are every other 6x6 window of the support area that
//! is usable at the same positions.

mod context;
mod schedule;
mod support;

pub use context::{extract_target, TargetContext, CONTEXT_OFFSETS, N_X, PATCH_OFFSETS};
pub use schedule::{build_schedule, replay_schedule, BlockScheduler, PatchJob};
pub use support::{gather_candidates, CandidateSet, ExpansionMap, FIRST_RING_RADIUS};
