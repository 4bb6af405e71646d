use crate::error::{Error, Result};
use crate::raster::{ImageBuffer, LossMask};

/// Dimensionality of a patch.
pub const N_X: usize = 4;

/// Patch pixel offsets from the patch origin (its top-left pixel), row-major.
pub const PATCH_OFFSETS: [(i32, i32); N_X] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// Offsets of the 32 context pixels: the 6x6 window spanning `-2..=3` in both
/// axes minus the patch itself, row-major.
pub const CONTEXT_OFFSETS: [(i32, i32); 32] = context_offsets();

const fn context_offsets() -> [(i32, i32); 32] {
    let mut out = [(0, 0); 32];
    let mut n = 0;
    let mut dy = -2;
    while dy <= 3 {
        let mut dx = -2;
        while dx <= 3 {
            if !((dx == 0 || dx == 1) && (dy == 0 || dy == 1)) {
                out[n] = (dx, dy);
                n += 1;
            }
            dx += 1;
        }
        dy += 1;
    }
    out
}

#[inline]
pub(crate) fn offset(origin: (usize, usize), d: (i32, i32), dims: (usize, usize)) -> Option<(usize, usize)> {
    let x = origin.0 as i64 + i64::from(d.0);
    let y = origin.1 as i64 + i64::from(d.1);
    (x >= 0 && y >= 0 && (x as usize) < dims.0 && (y as usize) < dims.1).then_some((x as usize, y as usize))
}

/// The patch to estimate together with its available context.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetContext {
    origin: (usize, usize),
    usable: [bool; 32],
    layout: Vec<(i32, i32)>,
    y0: Vec<f64>,
}

impl TargetContext {
    /// Builds a target from an explicit layout, mainly for tests and tools.
    pub fn from_parts(origin: (usize, usize), usable: [bool; 32], y0: Vec<f64>) -> Result<Self> {
        let layout: Vec<_> = CONTEXT_OFFSETS
            .iter()
            .zip(usable)
            .filter_map(|(&o, u)| u.then_some(o))
            .collect();
        if layout.is_empty() {
            return Err(Error::EmptyContext);
        }
        if layout.len() != y0.len() {
            return Err(Error::InvalidDimensions { width: y0.len(), height: layout.len() });
        }
        Ok(Self { origin, usable, layout, y0 })
    }

    /// A target whose first `y0.len()` context offsets are usable.
    pub fn from_context(y0: Vec<f64>) -> Result<Self> {
        let mut usable = [false; 32];
        usable.iter_mut().take(y0.len()).for_each(|u| *u = true);
        Self::from_parts((0, 0), usable, y0)
    }

    #[inline]
    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    /// Usability flag for each of [`CONTEXT_OFFSETS`].
    #[inline]
    pub fn usable(&self) -> &[bool; 32] {
        &self.usable
    }

    /// The usable offsets in row-major order.
    #[inline]
    pub fn layout(&self) -> &[(i32, i32)] {
        &self.layout
    }

    #[inline]
    pub fn y0(&self) -> &[f64] {
        &self.y0
    }

    #[inline]
    pub fn n_y(&self) -> usize {
        self.y0.len()
    }
}

/// Reads the usable context around the patch whose top-left pixel is `origin`.
///
/// A context pixel is usable when it is inside the image and AVAILABLE or
/// RECONSTRUCTED.
pub fn extract_target(img: &ImageBuffer, mask: &LossMask, origin: (usize, usize)) -> Result<TargetContext> {
    let dims = img.dims();
    if mask.dims() != dims {
        return Err(Error::DimensionMismatch { expected: dims, found: mask.dims() });
    }
    let mut usable = [false; 32];
    let mut layout = Vec::with_capacity(32);
    let mut y0 = Vec::with_capacity(32);
    for (i, &d) in CONTEXT_OFFSETS.iter().enumerate() {
        if let Some((x, y)) = offset(origin, d, dims) {
            if mask.is_usable(x, y) {
                usable[i] = true;
                layout.push(d);
                y0.push(img.get(x, y));
            }
        }
    }
    if y0.is_empty() {
        return Err(Error::EmptyContext);
    }
    Ok(TargetContext { origin, usable, layout, y0 })
}
