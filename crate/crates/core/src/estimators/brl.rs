use super::{Diagnostics, Layer, PatchEstimate};
use crate::error::Result;
use crate::framework::{TargetContext, N_X};

/// Context averaging: every patch pixel takes the mean of `y0`.
pub fn brl_estimate(target: &TargetContext) -> Result<PatchEstimate> {
    let y0 = target.y0();
    let mean = y0.iter().sum::<f64>() / y0.len() as f64;
    Ok(PatchEstimate {
        values: [mean; N_X],
        layer: Layer::Brl,
        diagnostics: Diagnostics::default(),
    })
}
