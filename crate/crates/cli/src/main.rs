use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use skmmse::Profile;
use skmmse_cli::{run_benchmark, MethodKind, PatternSpec, ReportFormat, RunConfig};

/// Conceal block losses in grayscale images and report quality and speed.
#[derive(Debug, Parser)]
#[command(name = "skmmse", version)]
struct Args {
    /// Input images (PGM/PNG), directories or glob patterns.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,

    /// Loss pattern: dispersed, random or mask:<path>.
    #[arg(long, default_value = "dispersed")]
    pattern: PatternSpec,

    /// Block loss rate for the random pattern.
    #[arg(long, default_value_t = 0.25)]
    rate: f64,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// brl, idl, hql, kmmse or skmmse. Repeat to compare several methods.
    #[arg(long, default_values = ["skmmse"])]
    method: Vec<MethodKind>,

    /// express, efficient or excellent. Repeat for several profiles.
    #[arg(long)]
    profile: Vec<Profile>,

    /// Flatness threshold of a custom profile.
    #[arg(long)]
    t_phi: Option<f64>,

    /// Normalization threshold of a custom profile.
    #[arg(long)]
    t_nu: Option<f64>,

    #[arg(long, default_value = "out")]
    out_dir: PathBuf,

    #[arg(long, default_value = "json")]
    report: ReportFormat,

    /// Measure PSNR over the lost pixels only.
    #[arg(long)]
    psnr_lost_only: bool,

    /// Also write <name>.layers.ppm.
    #[arg(long)]
    layer_map: bool,

    /// Process images and isolated blocks concurrently.
    #[arg(long)]
    parallel: bool,

    /// Time one image at a time on a single thread.
    #[arg(long)]
    timing_strict: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut profiles = args.profile;
    if args.t_phi.is_some() || args.t_nu.is_some() {
        let t_phi = args.t_phi.unwrap_or(Profile::EFFICIENT.t_phi);
        let t_nu = args.t_nu.unwrap_or(Profile::EFFICIENT.t_nu);
        match Profile::custom(t_phi, t_nu) {
            Ok(p) => profiles.push(p),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    if profiles.is_empty() {
        profiles.push(Profile::EFFICIENT);
    }
    let config = RunConfig {
        inputs: args.input,
        pattern: args.pattern,
        rate: args.rate,
        seed: args.seed,
        methods: args.method,
        profiles,
        out_dir: args.out_dir,
        report: args.report,
        psnr_lost_only: args.psnr_lost_only,
        layer_map: args.layer_map,
        parallel: args.parallel,
        timing_strict: args.timing_strict,
    };

    match run_benchmark(&config) {
        Ok(outcome) => {
            for row in outcome.rows.iter().chain(&outcome.aggregates) {
                let psnr = row.psnr.map_or("-".to_string(), |p| format!("{:.2}", p.0));
                println!(
                    "{:<16} {:<20} psnr {:>7} dB  ssim {:.4}  {:.3} ms/patch  BRL/IDL/HQL {}/{}/{}  {}",
                    row.image,
                    row.method,
                    psnr,
                    row.ssim.unwrap_or(f64::NAN),
                    row.ms_per_patch,
                    row.brl,
                    row.idl,
                    row.hql,
                    row.status
                );
            }
            println!("report: {}", outcome.report_path.display());
            if outcome.success() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
