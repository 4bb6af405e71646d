//! Corrupt, conceal, measure, report.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use skmmse::metrics::fractions;
use skmmse::netpbm::save_ppm;
use skmmse::{
    apply_mask, conceal_with, gen_dispersed_mask, gen_random_mask, load_image, load_mask, save_image, save_mask,
    BlockGrid, ConcealOptions, ImageBuffer, LayerCounts, LossMask, PatchRecord,
};

use crate::config::{MethodKind, MethodRun, PatternSpec, ReportFormat, RunConfig};
use crate::layer_map::emit_layer_map;
use crate::report::{write_csv, write_json, Num, ReportRow, SCHEMA_VERSION};

/// Result of concealing one image with one method.
#[derive(Clone, Debug)]
pub struct Measurement {
    /// Quantized reconstruction, as written to disk.
    pub output: ImageBuffer,
    pub psnr: f64,
    pub ssim: f64,
    pub counts: LayerCounts,
    pub deferred_fills: usize,
    pub patch_time: Duration,
    pub total_time: Duration,
    pub records: Vec<PatchRecord>,
}

impl Measurement {
    pub fn ms_per_patch(&self) -> f64 {
        let n = self.counts.total();
        if n == 0 {
            0.0
        } else {
            self.patch_time.as_secs_f64() * 1e3 / n as f64
        }
    }
}

/// Conceals `original` under `mask` and measures the quantized result.
pub fn conceal_and_measure(
    original: &ImageBuffer,
    mask: &LossMask,
    run: &MethodRun,
    parallel: bool,
    lost_only: bool,
) -> Result<Measurement> {
    let options = ConcealOptions::new(run.method()).parallel(parallel);
    let outcome = conceal_with(original, mask, &options)?;
    let output = outcome.image.quantized();
    let mut report = outcome.report;
    report.measure(original, &output, mask, lost_only)?;
    Ok(Measurement {
        output,
        psnr: report.psnr.unwrap_or(f64::NAN),
        ssim: report.ssim.unwrap_or(f64::NAN),
        counts: report.layer_counts,
        deferred_fills: report.deferred_fills,
        patch_time: report.patch_times.iter().sum(),
        total_time: report.total_time,
        records: outcome.records,
    })
}

/// Builds the loss mask for an image.
pub fn make_mask(pattern: &PatternSpec, width: usize, height: usize, rate: f64, seed: u64) -> Result<LossMask> {
    let grid = BlockGrid::for_image(width, height);
    let mask = match pattern {
        PatternSpec::Dispersed => gen_dispersed_mask(&grid),
        PatternSpec::Random => gen_random_mask(&grid, rate, seed)?,
        PatternSpec::Mask(path) => {
            let mask = load_mask(path).with_context(|| format!("loading mask {}", path.display()))?;
            mask.check_against(&grid)?;
            mask
        }
    };
    Ok(mask)
}

/// Expands directories (their `.pgm`/`.png` files) and glob patterns.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        let text = input.to_string_lossy();
        if input.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(input)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && is_image_path(p))
                .collect();
            files.sort();
            out.extend(files);
        } else if text.contains(['*', '?', '[']) {
            let mut files: Vec<PathBuf> = glob::glob(&text)?.filter_map(Result::ok).collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(input.clone());
        }
    }
    Ok(out)
}

fn is_image_path(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("png"))
}

fn image_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "image".into())
}

#[derive(Debug)]
pub struct BenchmarkOutcome {
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<ReportRow>,
    pub failures: usize,
    pub report_path: PathBuf,
}

impl BenchmarkOutcome {
    pub fn success(&self) -> bool {
        self.failures == 0
    }
}

struct RowContext<'a> {
    config: &'a RunConfig,
    loss_rate: f64,
}

fn base_row(ctx: &RowContext, image: &str, run: &MethodRun) -> ReportRow {
    ReportRow {
        schema_version: SCHEMA_VERSION,
        image: image.to_string(),
        method: run.label(),
        profile: run.profile.map(|p| p.name.to_string()),
        t_phi: run.profile.map(|p| Num(p.t_phi)),
        t_nu: run.profile.map(|p| Num(p.t_nu)),
        pattern: ctx.config.pattern.to_string(),
        seed: ctx.config.seed,
        loss_rate: ctx.loss_rate,
        psnr_scope: if ctx.config.psnr_lost_only { "lost" } else { "frame" },
        psnr: None,
        ssim: None,
        patches: 0,
        brl: 0,
        idl: 0,
        hql: 0,
        brl_fraction: None,
        idl_fraction: None,
        hql_fraction: None,
        deferred_fills: 0,
        ms_per_patch: 0.0,
        total_ms: 0.0,
        time_ratio: None,
        psnr_gain: None,
        status: "ok".into(),
    }
}

fn fill_counts(row: &mut ReportRow, counts: &LayerCounts) {
    row.patches = counts.total();
    row.brl = counts.brl;
    row.idl = counts.idl;
    row.hql = counts.hql;
    if let Ok(f) = fractions(counts) {
        row.brl_fraction = f.get(&skmmse::Layer::Brl).copied();
        row.idl_fraction = f.get(&skmmse::Layer::Idl).copied();
        row.hql_fraction = f.get(&skmmse::Layer::Hql).copied();
    }
}

fn process_image(config: &RunConfig, runs: &[MethodRun], path: &Path, block_parallel: bool) -> Vec<ReportRow> {
    let name = image_name(path);
    let prepared = load_image(path)
        .with_context(|| format!("loading {}", path.display()))
        .and_then(|img| {
            let mask = make_mask(&config.pattern, img.width(), img.height(), config.rate, config.seed)?;
            if mask.dims() != img.dims() {
                bail!("mask is {:?}, image is {:?}", mask.dims(), img.dims());
            }
            Ok((img, mask))
        });
    let (original, mask) = match prepared {
        Ok(v) => v,
        Err(e) => {
            let ctx = RowContext { config, loss_rate: f64::NAN };
            return runs
                .iter()
                .map(|run| ReportRow { status: format!("error: {e:#}"), ..base_row(&ctx, &name, run) })
                .collect();
        }
    };
    let grid = BlockGrid::for_image(original.width(), original.height());
    let ctx = RowContext { config, loss_rate: if grid.is_empty() { 0.0 } else { mask.block_loss_rate(&grid) } };

    let out = &config.out_dir;
    let io = (|| -> Result<()> {
        save_image(&apply_mask(&original, &mask)?, out.join(format!("{name}.corrupted.pgm")))?;
        save_mask(&mask, out.join(format!("{name}.mask.pgm")))?;
        Ok(())
    })();
    if let Err(e) = io {
        return runs
            .iter()
            .map(|run| ReportRow { status: format!("error: {e:#}"), ..base_row(&ctx, &name, run) })
            .collect();
    }

    let single = runs.len() == 1;
    runs.iter()
        .map(|run| {
            let mut row = base_row(&ctx, &name, run);
            let result = conceal_and_measure(&original, &mask, run, block_parallel, config.psnr_lost_only)
                .and_then(|m| {
                    let stem = if single { name.clone() } else { format!("{name}.{}", run.label()) };
                    save_image(&m.output, out.join(format!("{stem}.recon.pgm")))?;
                    if config.layer_map {
                        let rgb = emit_layer_map(&m.output, &mask, &m.records)?;
                        save_ppm(m.output.width(), m.output.height(), &rgb, out.join(format!("{stem}.layers.ppm")))?;
                    }
                    Ok(m)
                });
            match result {
                Ok(m) => {
                    row.psnr = Some(Num(m.psnr));
                    row.ssim = Some(m.ssim);
                    fill_counts(&mut row, &m.counts);
                    row.deferred_fills = m.deferred_fills;
                    row.ms_per_patch = m.ms_per_patch();
                    row.total_ms = m.total_time.as_secs_f64() * 1e3;
                }
                Err(e) => row.status = format!("error: {e:#}"),
            }
            row
        })
        .collect()
}

#[cfg(feature = "parallel")]
fn map_images<F>(paths: &[PathBuf], parallel: bool, f: F) -> Vec<Vec<ReportRow>>
where
    F: Fn(&PathBuf) -> Vec<ReportRow> + Sync + Send,
{
    use rayon::prelude::*;
    if parallel {
        paths.par_iter().map(f).collect()
    } else {
        paths.iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn map_images<F>(paths: &[PathBuf], _parallel: bool, f: F) -> Vec<Vec<ReportRow>>
where
    F: Fn(&PathBuf) -> Vec<ReportRow>,
{
    paths.iter().map(f).collect()
}

/// Sets `time_ratio` and `psnr_gain` against the kmmse row of each group.
fn relate_to_kmmse(rows: &mut [ReportRow], group: impl Fn(&ReportRow) -> &str) {
    let baseline: BTreeMap<String, (f64, f64)> = rows
        .iter()
        .filter(|r| r.is_ok() && r.method == MethodKind::Kmmse.as_str())
        .map(|r| (group(r).to_string(), (r.ms_per_patch, r.psnr.map_or(f64::NAN, |p| p.0))))
        .collect();
    for row in rows.iter_mut().filter(|r| r.is_ok()) {
        if let Some(&(ms, psnr)) = baseline.get(group(row)) {
            if ms > 0.0 {
                row.time_ratio = Some(row.ms_per_patch / ms);
            }
            let gain = row.psnr.map_or(f64::NAN, |p| p.0) - psnr;
            if gain.is_finite() {
                row.psnr_gain = Some(gain);
            }
        }
    }
}

fn aggregate(config: &RunConfig, runs: &[MethodRun], rows: &[ReportRow]) -> Vec<ReportRow> {
    runs.iter()
        .map(|run| {
            let label = run.label();
            let ok: Vec<&ReportRow> = rows.iter().filter(|r| r.method == label && r.is_ok()).collect();
            let ctx = RowContext {
                config,
                loss_rate: mean(ok.iter().map(|r| r.loss_rate)),
            };
            let mut row = base_row(&ctx, "MEAN", run);
            if ok.is_empty() {
                row.status = "error: no successful images".into();
                return row;
            }
            row.psnr = Some(Num(mean(ok.iter().map(|r| r.psnr.map_or(f64::NAN, |p| p.0)))));
            row.ssim = Some(mean(ok.iter().map(|r| r.ssim.unwrap_or(f64::NAN))));
            let mut counts = LayerCounts::default();
            for r in &ok {
                counts += LayerCounts::from_counts(r.brl, r.idl, r.hql);
            }
            fill_counts(&mut row, &counts);
            row.deferred_fills = ok.iter().map(|r| r.deferred_fills).sum();
            let patch_ms: f64 = ok.iter().map(|r| r.ms_per_patch * r.patches as f64).sum();
            row.ms_per_patch = if counts.total() > 0 { patch_ms / counts.total() as f64 } else { 0.0 };
            row.total_ms = ok.iter().map(|r| r.total_ms).sum();
            row
        })
        .collect()
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Runs every configured method over every input image and writes the
/// reconstructions and the report into `config.out_dir`.
pub fn run_benchmark(config: &RunConfig) -> Result<BenchmarkOutcome> {
    let runs = config.runs()?;
    let inputs = expand_inputs(&config.inputs)?;
    if inputs.is_empty() {
        return Err(anyhow!("no inputs"));
    }
    fs::create_dir_all(&config.out_dir).with_context(|| format!("creating {}", config.out_dir.display()))?;

    let parallel = config.parallel && !config.timing_strict;
    let per_image = map_images(&inputs, parallel, |p| process_image(config, &runs, p, parallel));
    let mut rows: Vec<ReportRow> = per_image.into_iter().flatten().collect();
    relate_to_kmmse(&mut rows, |r| r.image.as_str());
    let mut aggregates = aggregate(config, &runs, &rows);
    relate_to_kmmse(&mut aggregates, |r| r.image.as_str());

    let failures = rows.iter().filter(|r| !r.is_ok()).count();
    let report_path = match config.report {
        ReportFormat::Json => {
            let path = config.out_dir.join("report.json");
            write_json(&path, config, &rows, &aggregates)?;
            path
        }
        ReportFormat::Csv => {
            let path = config.out_dir.join("report.csv");
            write_csv(&path, &rows, &aggregates)?;
            path
        }
    };
    Ok(BenchmarkOutcome { rows, aggregates, failures, report_path })
}
