use super::{Diagnostics, KernelWeights, Layer, PatchEstimate};
use crate::error::{Error, Result};
use crate::framework::{CandidateSet, TargetContext, N_X};

/// Raw weight `exp(-|y_j - y0|^2 / (2 sigma2 N_y))`.
#[inline]
pub fn idl_raw_weight(y0: &[f64], yj: &[f64], sigma2: f64) -> f64 {
    let dist: f64 = y0.iter().zip(yj).map(|(a, b)| (a - b) * (a - b)).sum();
    (-dist / (2.0 * sigma2 * y0.len() as f64)).exp()
}

/// Isotropic kernel weights. `raw_sum` is the normalization factor `nu`;
/// when every raw weight underflows it is 0 and the weights are all 0.
pub fn idl_weights(target: &TargetContext, set: &CandidateSet, sigma2: f64) -> Result<KernelWeights> {
    if set.is_empty() {
        return Err(Error::NoCandidates);
    }
    let y0 = target.y0();
    let mut weights: Vec<f64> = (0..set.len()).map(|j| idl_raw_weight(y0, set.y(j), sigma2)).collect();
    let raw_sum: f64 = weights.iter().sum();
    if raw_sum > 0.0 {
        weights.iter_mut().for_each(|w| *w /= raw_sum);
    }
    Ok(KernelWeights { weights, raw_sum })
}

/// Weighted average of the prototypes under [`idl_weights`].
pub fn idl_estimate(target: &TargetContext, set: &CandidateSet, sigma2: f64) -> Result<PatchEstimate> {
    let kw = idl_weights(target, set, sigma2)?;
    if kw.raw_sum <= 0.0 || !kw.raw_sum.is_finite() {
        return Err(Error::WeightsVanished);
    }
    let mut values = [0.0; N_X];
    for (j, &w) in kw.weights.iter().enumerate() {
        for (v, &x) in values.iter_mut().zip(set.x(j)) {
            *v += w * x;
        }
    }
    Ok(PatchEstimate {
        values,
        layer: Layer::Idl,
        diagnostics: Diagnostics {
            nu: Some(kw.raw_sum),
            candidates: set.len(),
            rings_used: set.rings_used(),
            ..Diagnostics::default()
        },
    })
}
