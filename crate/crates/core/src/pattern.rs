//! Deterministic block-loss patterns.

use crate::error::{Error, Result};
use crate::raster::{BlockGrid, BlockId, LossMask, PixelState};

/// SplitMix64 generator (Steele, Lea & Flood), used for the reproducible
/// random loss pattern. Constants must not change: masks are expected to be
/// identical across implementations for a given seed.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `[0, bound)` via the multiply-shift map
    /// `(next_u64 * bound) >> 64`.
    pub fn below(&mut self, bound: u64) -> u64 {
        ((u128::from(self.next_u64()) * u128::from(bound)) >> 64) as u64
    }
}

/// Loses every block at an odd row and odd column.
///
/// Lost blocks never touch each other, so each one keeps its full 8-block
/// neighbourhood available.
pub fn gen_dispersed_mask(grid: &BlockGrid) -> LossMask {
    let mut mask = LossMask::available(grid.width, grid.height).expect("grid dimensions are non-zero");
    for block in grid.blocks().filter(|b| b.row % 2 == 1 && b.col % 2 == 1) {
        mask.mark_block(grid, block, PixelState::Lost);
    }
    mask
}

/// Loses exactly `round(rate * blocks)` distinct blocks.
///
/// Block indices `0..n` in row-major order are shuffled with a Fisher-Yates
/// pass driven by [`SplitMix64`] seeded with `seed` (for `i` from `n-1` down
/// to 1, swap `i` with `below(i + 1)`); the first `k` shuffled indices are lost.
pub fn gen_random_mask(grid: &BlockGrid, rate: f64, seed: u64) -> Result<LossMask> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidRate(rate));
    }
    let n = grid.len();
    let k = (rate * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = SplitMix64::new(seed);
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        order.swap(i, j);
    }
    let mut mask = LossMask::available(grid.width, grid.height)?;
    for &idx in &order[..k] {
        let block = BlockId::new(idx / grid.cols, idx % grid.cols);
        mask.mark_block(grid, block, PixelState::Lost);
    }
    Ok(mask)
}
