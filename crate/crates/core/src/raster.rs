//! Grayscale rasters, per-pixel loss state and the 16x16 block grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side length of a coded block in pixels.
pub const BLOCK_SIZE: usize = 16;

/// A grayscale image with real-valued samples.
///
/// Samples hold 8-bit source values as `f64`; quantization back to bytes
/// happens only when the image is written out.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    samples: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || samples.len() != width * height {
            return Err(Error::InvalidDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let samples = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, samples)
    }

    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(width, height, bytes.iter().map(|&b| f64::from(b)).collect())
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    #[inline]
    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.samples[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.samples[y * self.width + x] = value;
    }

    /// Samples clamped to `[0, 255]` and rounded half-up.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.samples.iter().map(|&v| quantize(v)).collect()
    }

    /// The image as it would read back after a save/load cycle.
    pub fn quantized(&self) -> ImageBuffer {
        ImageBuffer {
            width: self.width,
            height: self.height,
            samples: self.samples.iter().map(|&v| f64::from(quantize(v))).collect(),
        }
    }

    pub fn crop(&self, rect: Rect) -> ImageBuffer {
        let mut samples = Vec::with_capacity(rect.width() * rect.height());
        for y in rect.y0..rect.y1 {
            let row = y * self.width;
            samples.extend_from_slice(&self.samples[row + rect.x0..row + rect.x1]);
        }
        ImageBuffer {
            width: rect.width(),
            height: rect.height(),
            samples,
        }
    }
}

#[inline]
fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    (v.clamp(0.0, 255.0) + 0.5).floor().min(255.0) as u8
}

/// Availability of a single pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum PixelState {
    Available,
    Lost,
    Reconstructed,
}

impl PixelState {
    /// Usable as context or support data.
    #[inline]
    pub fn is_usable(self) -> bool {
        !matches!(self, PixelState::Lost)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LossMask {
    width: usize,
    height: usize,
    states: Vec<PixelState>,
}

impl LossMask {
    pub fn available(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            states: vec![PixelState::Available; width * height],
        })
    }

    pub fn from_states(width: usize, height: usize, states: Vec<PixelState>) -> Result<Self> {
        if width == 0 || height == 0 || states.len() != width * height {
            return Err(Error::InvalidDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            states,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn states(&self) -> &[PixelState] {
        &self.states
    }

    #[inline]
    pub fn state(&self, x: usize, y: usize) -> PixelState {
        self.states[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, state: PixelState) {
        self.states[y * self.width + x] = state;
    }

    #[inline]
    pub fn is_usable(&self, x: usize, y: usize) -> bool {
        self.state(x, y).is_usable()
    }

    pub fn count(&self, state: PixelState) -> usize {
        self.states.iter().filter(|&&s| s == state).count()
    }

    pub fn mark_block(&mut self, grid: &BlockGrid, block: BlockId, state: PixelState) {
        let r = grid.block_rect(block);
        for y in r.y0..r.y1 {
            for x in r.x0..r.x1 {
                self.set(x, y, state);
            }
        }
    }

    /// Whether any pixel of `rect` is LOST.
    pub fn any_lost(&self, rect: Rect) -> bool {
        (rect.y0..rect.y1).any(|y| (rect.x0..rect.x1).any(|x| self.state(x, y) == PixelState::Lost))
    }

    /// Blocks containing at least one LOST pixel, in raster order.
    pub fn lost_blocks(&self, grid: &BlockGrid) -> Vec<BlockId> {
        grid.blocks()
            .filter(|&b| self.any_lost(grid.block_rect(b)))
            .collect()
    }

    /// Fraction of blocks containing LOST pixels.
    pub fn block_loss_rate(&self, grid: &BlockGrid) -> f64 {
        self.lost_blocks(grid).len() as f64 / grid.len() as f64
    }

    pub fn crop(&self, rect: Rect) -> LossMask {
        let mut states = Vec::with_capacity(rect.width() * rect.height());
        for y in rect.y0..rect.y1 {
            let row = y * self.width;
            states.extend_from_slice(&self.states[row + rect.x0..row + rect.x1]);
        }
        LossMask {
            width: rect.width(),
            height: rect.height(),
            states,
        }
    }

    /// Checks that no LOST pixel lies in the ragged margin outside the block grid.
    pub fn check_against(&self, grid: &BlockGrid) -> Result<()> {
        if self.dims() != (grid.width, grid.height) {
            return Err(Error::DimensionMismatch {
                expected: (grid.width, grid.height),
                found: self.dims(),
            });
        }
        let (bw, bh) = (grid.cols * grid.block_size, grid.rows * grid.block_size);
        for y in 0..self.height {
            for x in 0..self.width {
                if (x >= bw || y >= bh) && self.state(x, y) == PixelState::Lost {
                    return Err(Error::InvalidMask(format!(
                        "pixel ({x}, {y}) lies outside the full-block area"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Half-open pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    #[inline]
    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockId {
    pub row: usize,
    pub col: usize,
}

impl BlockId {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Tiling of an image into full 16x16 blocks. Pixels past the last full
/// block row/column form a ragged margin that is never lost.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockGrid {
    pub block_size: usize,
    pub rows: usize,
    pub cols: usize,
    pub width: usize,
    pub height: usize,
}

impl BlockGrid {
    pub fn for_image(width: usize, height: usize) -> Self {
        Self {
            block_size: BLOCK_SIZE,
            rows: height / BLOCK_SIZE,
            cols: width / BLOCK_SIZE,
            width,
            height,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, block: BlockId) -> bool {
        block.row < self.rows && block.col < self.cols
    }

    pub fn blocks(&self) -> impl Iterator<Item = BlockId> + '_ {
        (0..self.rows).flat_map(move |row| (0..self.cols).map(move |col| BlockId { row, col }))
    }

    pub fn block_rect(&self, block: BlockId) -> Rect {
        let s = self.block_size;
        Rect {
            x0: block.col * s,
            y0: block.row * s,
            x1: (block.col + 1) * s,
            y1: (block.row + 1) * s,
        }
    }

    /// The block plus its 8 neighbours, clipped to the image.
    pub fn support_rect(&self, block: BlockId) -> Rect {
        let s = self.block_size;
        Rect {
            x0: block.col.saturating_sub(1) * s,
            y0: block.row.saturating_sub(1) * s,
            x1: ((block.col + 2) * s).min(self.width),
            y1: ((block.row + 2) * s).min(self.height),
        }
    }

    /// Neighbouring blocks (up to 8) inside the grid.
    pub fn neighbours(&self, block: BlockId) -> impl Iterator<Item = BlockId> + '_ {
        let rows = block.row.saturating_sub(1)..=(block.row + 1).min(self.rows.saturating_sub(1));
        rows.flat_map(move |row| {
            let cols = block.col.saturating_sub(1)..=(block.col + 1).min(self.cols.saturating_sub(1));
            cols.map(move |col| BlockId { row, col })
        })
        .filter(move |&b| b != block)
    }
}

/// Copy of `img` with LOST pixels set to 0, for display.
pub fn apply_mask(img: &ImageBuffer, mask: &LossMask) -> Result<ImageBuffer> {
    if img.dims() != mask.dims() {
        return Err(Error::DimensionMismatch {
            expected: img.dims(),
            found: mask.dims(),
        });
    }
    let mut out = img.clone();
    for (v, s) in out.samples.iter_mut().zip(&mask.states) {
        if *s == PixelState::Lost {
            *v = 0.0;
        }
    }
    Ok(out)
}
