use std::cmp::Ordering;

use serde::Serialize;

use super::context::{offset, CONTEXT_OFFSETS, PATCH_OFFSETS};
use crate::error::{Error, Result};
use crate::raster::{BlockGrid, BlockId, LossMask, PixelState};

/// One 2x2 patch of a lost block awaiting reconstruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PatchJob {
    /// Top-left pixel of the patch; always on the block's 2x2 tiling.
    pub origin: (usize, usize),
    pub block: BlockId,
    /// Original (AVAILABLE) pixels in the 6x6 context.
    pub reliability: u32,
    /// AVAILABLE plus RECONSTRUCTED pixels in the 6x6 context.
    pub usable: u32,
}

impl PatchJob {
    fn rescore(&mut self, mask: &LossMask) {
        let (mut original, mut usable) = (0, 0);
        for &d in &CONTEXT_OFFSETS {
            if let Some((x, y)) = offset(self.origin, d, mask.dims()) {
                match mask.state(x, y) {
                    PixelState::Available => {
                        original += 1;
                        usable += 1;
                    }
                    PixelState::Reconstructed => usable += 1,
                    PixelState::Lost => {}
                }
            }
        }
        self.reliability = original;
        self.usable = usable;
    }

    /// Scheduling priority: higher reliability first, then more usable
    /// context, then raster order.
    fn priority(&self, other: &Self) -> Ordering {
        other
            .reliability
            .cmp(&self.reliability)
            .then(other.usable.cmp(&self.usable))
            .then(self.origin.1.cmp(&other.origin.1))
            .then(self.origin.0.cmp(&other.origin.0))
    }
}

/// Incremental filling order for one block.
///
/// Priorities are recomputed from the mask every time a job is requested, so
/// the caller must mark each returned patch before asking for the next one.
#[derive(Clone, Debug)]
pub struct BlockScheduler {
    pending: Vec<PatchJob>,
}

impl BlockScheduler {
    pub fn new(mask: &LossMask, grid: &BlockGrid, block: BlockId) -> Result<Self> {
        if !grid.contains(block) {
            return Err(Error::BlockOutOfRange { row: block.row, col: block.col });
        }
        if mask.dims() != (grid.width, grid.height) {
            return Err(Error::DimensionMismatch {
                expected: (grid.width, grid.height),
                found: mask.dims(),
            });
        }
        let rect = grid.block_rect(block);
        let mut pending = Vec::with_capacity(64);
        for y in (rect.y0..rect.y1).step_by(2) {
            for x in (rect.x0..rect.x1).step_by(2) {
                let lost = PATCH_OFFSETS
                    .iter()
                    .any(|&(dx, dy)| mask.state(x + dx as usize, y + dy as usize) == PixelState::Lost);
                if lost {
                    pending.push(PatchJob { origin: (x, y), block, reliability: 0, usable: 0 });
                }
            }
        }
        Ok(Self { pending })
    }

    pub fn remaining(&self) -> usize {
        self.pending.len()
    }

    /// Removes and returns the highest-priority pending patch.
    pub fn next(&mut self, mask: &LossMask) -> Option<PatchJob> {
        for job in &mut self.pending {
            job.rescore(mask);
        }
        let best = (0..self.pending.len()).min_by(|&a, &b| self.pending[a].priority(&self.pending[b]))?;
        Some(self.pending.swap_remove(best))
    }
}

/// Marks the LOST pixels of a patch as RECONSTRUCTED.
pub(crate) fn mark_patch(mask: &mut LossMask, origin: (usize, usize)) {
    for (dx, dy) in PATCH_OFFSETS {
        let (x, y) = (origin.0 + dx as usize, origin.1 + dy as usize);
        if mask.state(x, y) == PixelState::Lost {
            mask.set(x, y, PixelState::Reconstructed);
        }
    }
}

/// The complete filling order of a block, obtained by replaying the
/// scheduler against a copy of the mask. The order depends only on pixel
/// states, so it is exactly the order concealment follows.
pub fn build_schedule(mask: &LossMask, grid: &BlockGrid, block: BlockId) -> Result<Vec<PatchJob>> {
    let mut scheduler = BlockScheduler::new(mask, grid, block)?;
    let mut work = mask.clone();
    let mut order = Vec::with_capacity(scheduler.remaining());
    while let Some(job) = scheduler.next(&work) {
        mark_patch(&mut work, job.origin);
        order.push(job);
    }
    Ok(order)
}

/// Replays a schedule on a copy of the mask and returns the final mask.
pub fn replay_schedule(mask: &LossMask, jobs: &[PatchJob]) -> LossMask {
    let mut work = mask.clone();
    for job in jobs {
        mark_patch(&mut work, job.origin);
    }
    work
}
