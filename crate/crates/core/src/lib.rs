//! Scalable kernel-based MMSE spatial error concealment.
//!
//! Lost 16x16 blocks of a grayscale image are rebuilt 2x2 patch by 2x2 patch
//! from the surrounding support area. Three estimators of increasing cost are
//! stacked: context averaging (BRL), isotropic kernel regression over a
//! growing support (IDL) and the full kernel MMSE estimator (HQL). A
//! [`Profile`] picks the cheapest layer that is expected to be good enough
//! for each patch.
//!
//! ```no_run
//! use skmmse::{conceal_image, gen_dispersed_mask, load_image, psnr, BlockGrid, Profile};
//!
//! let original = load_image("kodim05.pgm")?;
//! let grid = BlockGrid::for_image(original.width(), original.height());
//! let mask = gen_dispersed_mask(&grid);
//! let (restored, report) = conceal_image(&original, &mask, &Profile::EFFICIENT)?;
//! println!("{:.2} dB, {:?}", psnr(&original, &restored)?, report.layer_counts);
//! # Ok::<(), skmmse::Error>(())
//! ```

pub mod conceal;
pub mod error;
pub mod estimators;
pub mod framework;
pub mod metrics;
pub mod netpbm;
pub mod pattern;
pub mod profiles;
pub mod raster;

pub use conceal::{conceal_image, conceal_with, ConcealOptions, ConcealOutcome, Method, PatchRecord};
pub use error::{Error, Result};
pub use estimators::{Layer, PatchEstimate};
pub use metrics::{psnr, psnr_lost_only, ssim, usage_fractions, ConcealmentReport, LayerCounts};
pub use netpbm::{load_image, load_mask, save_image, save_mask};
pub use pattern::{gen_dispersed_mask, gen_random_mask};
pub use profiles::{flatness, select_and_estimate, LayerDecision, Profile, ProfileName};
pub use raster::{apply_mask, BlockGrid, BlockId, ImageBuffer, LossMask, PixelState, Rect, BLOCK_SIZE};
