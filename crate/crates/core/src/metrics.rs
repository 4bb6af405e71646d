//! Quality metrics and per-run statistics.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::Serialize;

use crate::conceal::PatchRecord;
use crate::error::{Error, Result};
use crate::estimators::Layer;
use crate::raster::{ImageBuffer, LossMask, PixelState};

const PEAK: f64 = 255.0;

fn check_dims(a: &ImageBuffer, b: &ImageBuffer) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch { expected: a.dims(), found: b.dims() });
    }
    Ok(())
}

fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    }
}

/// Whole-frame PSNR in dB; identical images give `+inf`.
pub fn psnr(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    check_dims(reference, test)?;
    let sse: f64 = reference
        .samples()
        .iter()
        .zip(test.samples())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(psnr_from_mse(sse / reference.samples().len() as f64))
}

/// PSNR restricted to pixels that were not originally AVAILABLE.
pub fn psnr_lost_only(reference: &ImageBuffer, test: &ImageBuffer, mask: &LossMask) -> Result<f64> {
    check_dims(reference, test)?;
    if mask.dims() != reference.dims() {
        return Err(Error::DimensionMismatch { expected: reference.dims(), found: mask.dims() });
    }
    let (mut sse, mut n) = (0.0, 0usize);
    for ((a, b), s) in reference.samples().iter().zip(test.samples()).zip(mask.states()) {
        if *s != PixelState::Available {
            sse += (a - b) * (a - b);
            n += 1;
        }
    }
    if n == 0 {
        return Ok(f64::INFINITY);
    }
    Ok(psnr_from_mse(sse / n as f64))
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
pub fn ssim_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable "valid" filtering: only windows fully inside the image.
fn filter_valid(data: &[f64], width: usize, height: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = width - SSIM_WINDOW + 1;
    let oh = height - SSIM_WINDOW + 1;
    let mut rows = vec![0.0; ow * height];
    for y in 0..height {
        let row = &data[y * width..(y + 1) * width];
        for x in 0..ow {
            rows[y * ow + x] = k.iter().zip(&row[x..x + SSIM_WINDOW]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k.iter().enumerate().map(|(i, a)| a * rows[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03 and L = 255. Windows are restricted to the image interior.
pub fn ssim(reference: &ImageBuffer, test: &ImageBuffer) -> Result<f64> {
    check_dims(reference, test)?;
    let (w, h) = reference.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::ImageTooSmall { width: w, height: h });
    }
    if reference.samples() == test.samples() {
        return Ok(1.0);
    }
    let k = ssim_kernel();
    let a = reference.samples();
    let b = test.samples();
    let aa: Vec<f64> = a.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = b.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = a.iter().zip(b).map(|(p, q)| p * q).collect();
    let mu_a = filter_valid(a, w, h, &k);
    let mu_b = filter_valid(b, w, h, &k);
    let e_aa = filter_valid(&aa, w, h, &k);
    let e_bb = filter_valid(&bb, w, h, &k);
    let e_ab = filter_valid(&ab, w, h, &k);
    let c1 = (SSIM_K1 * PEAK).powi(2);
    let c2 = (SSIM_K2 * PEAK).powi(2);
    let n = mu_a.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = e_aa[i] - ma * ma;
            let vb = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    Ok(total / n as f64)
}

/// Patch counts by the highest layer used.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LayerCounts {
    pub brl: usize,
    pub idl: usize,
    pub hql: usize,
}

impl LayerCounts {
    pub fn from_counts(brl: usize, idl: usize, hql: usize) -> Self {
        Self { brl, idl, hql }
    }

    pub fn get(&self, layer: Layer) -> usize {
        match layer {
            Layer::Brl => self.brl,
            Layer::Idl => self.idl,
            Layer::Hql => self.hql,
        }
    }

    fn bump(&mut self, layer: Layer) {
        match layer {
            Layer::Brl => self.brl += 1,
            Layer::Idl => self.idl += 1,
            Layer::Hql => self.hql += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.brl + self.idl + self.hql
    }
}

impl std::ops::AddAssign for LayerCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.brl += rhs.brl;
        self.idl += rhs.idl;
        self.hql += rhs.hql;
    }
}

/// Statistics of one concealment run. Quality fields are filled in by
/// [`ConcealmentReport::measure`] once a reference is available.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConcealmentReport {
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    pub layer_counts: LayerCounts,
    #[serde(skip)]
    pub patch_times: Vec<Duration>,
    #[serde(skip)]
    pub total_time: Duration,
    pub deferred_fills: usize,
}

impl ConcealmentReport {
    pub fn from_records(records: &[PatchRecord], total_time: Duration) -> Self {
        let mut layer_counts = LayerCounts::default();
        for r in records {
            layer_counts.bump(r.layer);
        }
        Self {
            psnr: None,
            ssim: None,
            layer_counts,
            patch_times: records.iter().map(|r| r.elapsed).collect(),
            total_time,
            deferred_fills: records.iter().filter(|r| r.deferred).count(),
        }
    }

    pub fn patches(&self) -> usize {
        self.layer_counts.total()
    }

    /// Mean per-patch time; zero for an empty run.
    pub fn mean_patch_time(&self) -> Duration {
        if self.patch_times.is_empty() {
            return Duration::ZERO;
        }
        self.patch_times.iter().sum::<Duration>() / self.patch_times.len() as u32
    }

    /// Fills in PSNR and SSIM against `reference`. With `lost_only`, PSNR is
    /// restricted to the pixels lost under `mask`.
    pub fn measure(
        &mut self,
        reference: &ImageBuffer,
        output: &ImageBuffer,
        mask: &LossMask,
        lost_only: bool,
    ) -> Result<()> {
        self.psnr = Some(if lost_only { psnr_lost_only(reference, output, mask)? } else { psnr(reference, output)? });
        self.ssim = Some(ssim(reference, output)?);
        Ok(())
    }
}

/// Layer counts normalized to fractions.
pub fn usage_fractions(report: &ConcealmentReport) -> Result<BTreeMap<Layer, f64>> {
    fractions(&report.layer_counts)
}

pub fn fractions(counts: &LayerCounts) -> Result<BTreeMap<Layer, f64>> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::EmptyReport);
    }
    Ok(Layer::ALL
        .into_iter()
        .map(|l| (l, counts.get(l) as f64 / total as f64))
        .collect())
}
