use super::context::{TargetContext, N_X, PATCH_OFFSETS};
use crate::error::{Error, Result};
use crate::raster::{BlockGrid, BlockId, ImageBuffer, LossMask, PixelState, Rect};

/// Chebyshev radius covered by the first expansion ring. Windows this close
/// are the first ones that can avoid overlapping the patch being estimated.
pub const FIRST_RING_RADIUS: usize = 3;

/// Concentric square rings of candidate window origins around a patch.
///
/// A window origin is the top-left pixel of the candidate's 2x2 patch; its
/// whole 6x6 window must lie inside the support rectangle. Ring 1 holds the
/// origins at Chebyshev distance `1..=3` from the target patch, and ring `k`
/// for `k >= 2` holds distance exactly `k + 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionMap {
    origin: (usize, usize),
    support: Rect,
    // inclusive bounds of valid window origins
    qx: (i64, i64),
    qy: (i64, i64),
    rings: usize,
}

impl ExpansionMap {
    pub fn new(support: Rect, origin: (usize, usize)) -> Self {
        let qx = (support.x0 as i64 + 2, support.x1 as i64 - 4);
        let qy = (support.y0 as i64 + 2, support.y1 as i64 - 4);
        let (px, py) = (origin.0 as i64, origin.1 as i64);
        let rings = if qx.0 > qx.1 || qy.0 > qy.1 {
            0
        } else {
            let reach = [px - qx.0, qx.1 - px, py - qy.0, qy.1 - py]
                .into_iter()
                .max()
                .unwrap_or(0)
                .max(0) as usize;
            match reach {
                0 => 0,
                r if r <= FIRST_RING_RADIUS => 1,
                r => r - (FIRST_RING_RADIUS - 1),
            }
        };
        Self { origin, support, qx, qy, rings }
    }

    /// Support area of the lost `block`: the block and its 8 neighbours.
    pub fn for_block(grid: &BlockGrid, block: BlockId, origin: (usize, usize)) -> Self {
        Self::new(grid.support_rect(block), origin)
    }

    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    pub fn support(&self) -> Rect {
        self.support
    }

    /// Number of rings; ring indices run from 1 to this value.
    pub fn ring_count(&self) -> usize {
        self.rings
    }

    fn band(ring: usize) -> (i64, i64) {
        if ring == 1 {
            (1, FIRST_RING_RADIUS as i64)
        } else {
            let d = (ring + FIRST_RING_RADIUS - 1) as i64;
            (d, d)
        }
    }

    /// Window origins of `ring` in raster order.
    pub fn ring(&self, ring: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        if ring == 0 || ring > self.rings {
            return out;
        }
        let (lo, hi) = Self::band(ring);
        let (px, py) = (self.origin.0 as i64, self.origin.1 as i64);
        let (x_lo, x_hi) = ((px - hi).max(self.qx.0), (px + hi).min(self.qx.1));
        let (y_lo, y_hi) = ((py - hi).max(self.qy.0), (py + hi).min(self.qy.1));
        for y in y_lo..=y_hi {
            let dy = (y - py).abs();
            if dy >= lo {
                out.extend((x_lo..=x_hi).map(|x| (x as usize, y as usize)));
            } else {
                // only the columns at distance lo..=hi qualify on this row
                let left = x_lo..=(px - lo).min(x_hi);
                let right = (px + lo).max(x_lo)..=x_hi;
                out.extend(left.chain(right).map(|x| (x as usize, y as usize)));
            }
        }
        out
    }
}

/// Candidate observations gathered around one target patch.
///
/// Candidates share the target's context layout: `x(j)` holds the 4 patch
/// samples and `y(j)` the samples at the target's usable context offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    n_y: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
    origins: Vec<(usize, usize)>,
    rings_used: usize,
    exhausted: bool,
}

impl CandidateSet {
    /// An empty set for `target`; exhausted immediately if `map` has no rings.
    pub fn new(target: &TargetContext, map: &ExpansionMap) -> Self {
        Self {
            n_y: target.n_y(),
            xs: Vec::new(),
            ys: Vec::new(),
            origins: Vec::new(),
            rings_used: 0,
            exhausted: map.ring_count() == 0,
        }
    }

    /// Builds a set directly from stacked vectors (`xs` is `M x 4`, `ys` is
    /// `M x n_y`, both row-major).
    pub fn from_vectors(n_y: usize, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if n_y == 0 || !xs.len().is_multiple_of(N_X) || ys.len() != (xs.len() / N_X) * n_y {
            return Err(Error::InvalidDimensions { width: n_y, height: xs.len() / N_X.max(1) });
        }
        let m = xs.len() / N_X;
        Ok(Self { n_y, xs, ys, origins: vec![(0, 0); m], rings_used: 0, exhausted: true })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.origins.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    #[inline]
    pub fn n_y(&self) -> usize {
        self.n_y
    }

    #[inline]
    pub fn x(&self, j: usize) -> &[f64] {
        &self.xs[j * N_X..(j + 1) * N_X]
    }

    #[inline]
    pub fn y(&self, j: usize) -> &[f64] {
        &self.ys[j * self.n_y..(j + 1) * self.n_y]
    }

    /// Stacked prototypes, `M x 4` row-major.
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// Stacked contexts, `M x n_y` row-major.
    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Window origins in gathering order.
    pub fn origins(&self) -> &[(usize, usize)] {
        &self.origins
    }

    pub fn rings_used(&self) -> usize {
        self.rings_used
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    /// Appends the candidates of the next ring and returns how many were
    /// added. Fails with [`Error::SupportExhausted`] once every ring is used.
    pub fn expand(
        &mut self,
        img: &ImageBuffer,
        mask: &LossMask,
        target: &TargetContext,
        map: &ExpansionMap,
    ) -> Result<usize> {
        if self.exhausted {
            return Err(Error::SupportExhausted);
        }
        debug_assert_eq!(target.n_y(), self.n_y);
        let support = map.support();
        debug_assert!(support.x1 <= img.width() && support.y1 <= img.height());
        let width = img.width() as isize;
        let lin = |(dx, dy): (i32, i32)| dy as isize * width + dx as isize;
        let patch: Vec<isize> = PATCH_OFFSETS.iter().copied().map(lin).collect();
        let layout: Vec<isize> = target.layout().iter().copied().map(lin).collect();
        let states = mask.states();
        let samples = img.samples();

        let ring = self.rings_used + 1;
        let before = self.len();
        for q in map.ring(ring) {
            let base = (q.1 * img.width() + q.0) as isize;
            let usable = patch
                .iter()
                .chain(&layout)
                .all(|&o| states[(base + o) as usize] != PixelState::Lost);
            if usable {
                self.xs.extend(patch.iter().map(|&o| samples[(base + o) as usize]));
                self.ys.extend(layout.iter().map(|&o| samples[(base + o) as usize]));
                self.origins.push(q);
            }
        }
        self.rings_used = ring;
        if ring >= map.ring_count() {
            self.exhausted = true;
        }
        Ok(self.len() - before)
    }
}

/// Collects every usable window in rings `1..=rings` of `map`.
pub fn gather_candidates(
    img: &ImageBuffer,
    mask: &LossMask,
    target: &TargetContext,
    map: &ExpansionMap,
    rings: usize,
) -> CandidateSet {
    let mut set = CandidateSet::new(target, map);
    for _ in 0..rings {
        if set.expand(img, mask, target, map).is_err() {
            break;
        }
    }
    set
}
