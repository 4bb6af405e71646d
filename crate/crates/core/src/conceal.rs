//! Whole-image concealment driver.
//!
//! Lost blocks are processed in raster order. Each block is concealed on a
//! private copy of its support area (the block plus its 8 neighbours), so a
//! block only ever sees pixels inside that area. Blocks with no other lost
//! block in their neighbourhood cannot influence each other and may run
//! concurrently; blocks that touch are always concealed sequentially so later
//! ones see earlier reconstructions.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{
    brl_estimate, hql_estimate_with, idl_estimate, HqlConfig, Layer, PatchEstimate, DEFAULT_SIGMA2,
};
use crate::framework::{extract_target, gather_candidates, BlockScheduler, ExpansionMap, PATCH_OFFSETS};
use crate::metrics::ConcealmentReport;
use crate::profiles::{flatness, select_with_sigma, LayerDecision, Profile};
use crate::raster::{BlockGrid, BlockId, ImageBuffer, LossMask, PixelState, Rect};

/// Value given to a patch that still has no usable context when scheduled.
pub const DEFERRED_FILL: f64 = 128.0;

/// How each patch is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Method {
    /// Context averaging for every patch.
    Brl,
    /// Isotropic kernel regression over the full support for every patch.
    Idl,
    /// The kernel MMSE pipeline called directly for every patch.
    Hql,
    /// Profile-driven layer switching.
    Scalable(Profile),
}

impl Method {
    pub fn kmmse() -> Self {
        Method::Scalable(Profile::KMMSE)
    }

    pub fn profile(&self) -> Option<&Profile> {
        match self {
            Method::Scalable(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcealOptions {
    pub method: Method,
    pub sigma2: f64,
    /// Conceal support-isolated blocks concurrently. Ignored without the
    /// `parallel` feature. Output is identical either way.
    pub parallel: bool,
}

impl ConcealOptions {
    pub fn new(method: Method) -> Self {
        Self { method, sigma2: DEFAULT_SIGMA2, parallel: false }
    }

    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }
}

/// Per-patch trace of a concealment run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatchRecord {
    pub origin: (usize, usize),
    pub block: BlockId,
    pub layer: Layer,
    pub decision: Option<LayerDecision>,
    pub candidates: usize,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    /// Filled with [`DEFERRED_FILL`] for lack of context.
    pub deferred: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct ConcealOutcome {
    pub image: ImageBuffer,
    /// Final mask: every originally LOST pixel is RECONSTRUCTED.
    pub mask: LossMask,
    pub records: Vec<PatchRecord>,
    pub report: ConcealmentReport,
}

/// Conceals every LOST pixel using profile-driven layer switching.
pub fn conceal_image(img: &ImageBuffer, mask: &LossMask, profile: &Profile) -> Result<(ImageBuffer, ConcealmentReport)> {
    let outcome = conceal_with(img, mask, &ConcealOptions::new(Method::Scalable(*profile)))?;
    Ok((outcome.image, outcome.report))
}

pub fn conceal_with(img: &ImageBuffer, mask: &LossMask, options: &ConcealOptions) -> Result<ConcealOutcome> {
    let start = Instant::now();
    if img.dims() != mask.dims() {
        return Err(Error::DimensionMismatch { expected: img.dims(), found: mask.dims() });
    }
    let grid = BlockGrid::for_image(img.width(), img.height());
    mask.check_against(&grid)?;

    let lost = mask.lost_blocks(&grid);
    let (isolated, coupled): (Vec<BlockId>, Vec<BlockId>) = lost.iter().partition(|&&b| {
        grid.neighbours(b).all(|n| !mask.any_lost(grid.block_rect(n)))
    });

    let mut image = img.clone();
    let mut work_mask = mask.clone();
    let mut results = run_isolated(img, mask, &grid, &isolated, options);
    results.reserve(coupled.len());

    for &block in &coupled {
        let result = conceal_block(&image, &work_mask, &grid, block, options);
        result.apply(&mut image, &mut work_mask);
        results.push(result);
    }
    for result in results.iter().take(isolated.len()) {
        result.apply(&mut image, &mut work_mask);
    }

    // report in raster block order regardless of execution order
    results.sort_by_key(|r| r.block);
    let records: Vec<PatchRecord> = results.into_iter().flat_map(|r| r.records).collect();
    let report = ConcealmentReport::from_records(&records, start.elapsed());
    Ok(ConcealOutcome { image, mask: work_mask, records, report })
}

#[cfg(feature = "parallel")]
fn run_isolated(
    img: &ImageBuffer,
    mask: &LossMask,
    grid: &BlockGrid,
    blocks: &[BlockId],
    options: &ConcealOptions,
) -> Vec<BlockResult> {
    use rayon::prelude::*;
    if options.parallel {
        blocks.par_iter().map(|&b| conceal_block(img, mask, grid, b, options)).collect()
    } else {
        blocks.iter().map(|&b| conceal_block(img, mask, grid, b, options)).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_isolated(
    img: &ImageBuffer,
    mask: &LossMask,
    grid: &BlockGrid,
    blocks: &[BlockId],
    options: &ConcealOptions,
) -> Vec<BlockResult> {
    blocks.iter().map(|&b| conceal_block(img, mask, grid, b, options)).collect()
}

struct BlockResult {
    block: BlockId,
    /// Support area in image coordinates.
    support: Rect,
    /// Concealed copy of the support area.
    image: ImageBuffer,
    mask: LossMask,
    records: Vec<PatchRecord>,
}

impl BlockResult {
    /// Copies the reconstructed pixels of the block back into the image.
    fn apply(&self, image: &mut ImageBuffer, mask: &mut LossMask) {
        let block_rect = BlockGrid::for_image(image.width(), image.height()).block_rect(self.block);
        for y in block_rect.y0..block_rect.y1 {
            for x in block_rect.x0..block_rect.x1 {
                if mask.state(x, y) == PixelState::Lost {
                    let (lx, ly) = (x - self.support.x0, y - self.support.y0);
                    image.set(x, y, self.image.get(lx, ly));
                    mask.set(x, y, self.mask.state(lx, ly));
                }
            }
        }
    }
}

fn conceal_block(
    img: &ImageBuffer,
    mask: &LossMask,
    grid: &BlockGrid,
    block: BlockId,
    options: &ConcealOptions,
) -> BlockResult {
    let support = grid.support_rect(block);
    let mut local = img.crop(support);
    let mut local_mask = mask.crop(support);
    let local_grid = BlockGrid::for_image(local.width(), local.height());
    let local_block = BlockId::new(block.row - support.y0 / grid.block_size, block.col - support.x0 / grid.block_size);
    let local_support = Rect { x0: 0, y0: 0, x1: local.width(), y1: local.height() };

    let mut scheduler = BlockScheduler::new(&local_mask, &local_grid, local_block).expect("block lies inside its support");
    let mut records = Vec::with_capacity(scheduler.remaining());
    while let Some(job) = scheduler.next(&local_mask) {
        let t0 = Instant::now();
        let target = extract_target(&local, &local_mask, job.origin);
        let (values, record) = match target {
            Ok(target) => {
                let map = ExpansionMap::new(local_support, job.origin);
                let (estimate, decision) = estimate_patch(&local, &local_mask, &target, &map, options);
                let record = PatchRecord {
                    origin: job.origin,
                    block,
                    layer: estimate.layer,
                    decision,
                    candidates: estimate.diagnostics.candidates,
                    beta: estimate.diagnostics.beta,
                    alpha: estimate.diagnostics.alpha,
                    deferred: false,
                    elapsed: Duration::ZERO,
                };
                (estimate.values, record)
            }
            Err(_) => {
                let record = PatchRecord {
                    origin: job.origin,
                    block,
                    layer: Layer::Brl,
                    decision: None,
                    candidates: 0,
                    beta: None,
                    alpha: None,
                    deferred: true,
                    elapsed: Duration::ZERO,
                };
                ([DEFERRED_FILL; 4], record)
            }
        };
        for (&(dx, dy), v) in PATCH_OFFSETS.iter().zip(values) {
            let (x, y) = (job.origin.0 + dx as usize, job.origin.1 + dy as usize);
            if local_mask.state(x, y) == PixelState::Lost {
                local.set(x, y, v.clamp(0.0, 255.0));
                local_mask.set(x, y, PixelState::Reconstructed);
            }
        }
        let elapsed = t0.elapsed();
        records.push(PatchRecord {
            origin: (job.origin.0 + support.x0, job.origin.1 + support.y0),
            elapsed,
            ..record
        });
    }
    BlockResult { block, support, image: local, mask: local_mask, records }
}

fn estimate_patch(
    img: &ImageBuffer,
    mask: &LossMask,
    target: &crate::framework::TargetContext,
    map: &ExpansionMap,
    options: &ConcealOptions,
) -> (PatchEstimate, Option<LayerDecision>) {
    let sigma2 = options.sigma2;
    match &options.method {
        Method::Brl => (brl_estimate(target).expect("non-empty context"), None),
        Method::Idl => {
            let set = gather_candidates(img, mask, target, map, usize::MAX);
            let estimate = idl_estimate(target, &set, sigma2).unwrap_or_else(|_| {
                let mut e = brl_estimate(target).expect("non-empty context");
                e.diagnostics.fallback = true;
                e
            });
            (estimate, None)
        }
        Method::Hql => {
            let set = gather_candidates(img, mask, target, map, usize::MAX);
            let config = HqlConfig { sigma2, ..HqlConfig::default() };
            let estimate = hql_estimate_with(target, &set, &config).expect("fallback ladder always yields an estimate");
            (estimate, None)
        }
        Method::Scalable(profile) => {
            let (estimate, decision) = select_with_sigma(img, mask, target, map, profile, sigma2);
            debug_assert_eq!(decision.phi, flatness(target));
            (estimate, Some(decision))
        }
    }
}
