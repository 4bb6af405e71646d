//! Benchmark harness for the `skmmse` concealment library: corrupts images
//! with a block-loss pattern, conceals them with one or more methods and
//! writes PSNR/SSIM, layer usage and timing reports.

pub mod config;
pub mod harness;
pub mod layer_map;
pub mod report;

pub use config::{MethodKind, MethodRun, PatternSpec, ReportFormat, RunConfig};
pub use harness::{conceal_and_measure, expand_inputs, make_mask, run_benchmark, BenchmarkOutcome, Measurement};
pub use layer_map::emit_layer_map;
pub use report::{ReportRow, SCHEMA_VERSION, TIMING_FIELDS};
