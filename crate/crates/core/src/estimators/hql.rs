use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{brl_estimate, idl_estimate, Diagnostics, KernelWeights, Layer, PatchEstimate, DEFAULT_SIGMA2};
use crate::error::{Error, Result};
use crate::framework::{CandidateSet, TargetContext, N_X};

/// Candidate values of `beta`: `2^k` for `k = -8..=12`, ascending.
pub const BETA_GRID: [f64; 21] = beta_grid();

const fn beta_grid() -> [f64; 21] {
    let mut out = [0.0; 21];
    let mut v = 1.0 / 256.0;
    let mut i = 0;
    while i < 21 {
        out[i] = v;
        v *= 2.0;
        i += 1;
    }
    out
}

const RIDGE_SCALE: f64 = 1e-6;
const ALPHA_MAX: f64 = 4.0;
const ALPHA_MIN_DENOMINATOR: f64 = 1e-12;

/// Sample covariance of the stacked observations `z_j = (x_j, y_j)`,
/// partitioned into its patch and context blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceBlocks {
    /// 4 x 4
    pub cxx: DMatrix<f64>,
    /// 4 x N_y
    pub cxy: DMatrix<f64>,
    /// N_y x N_y, before regularization
    pub cyy: DMatrix<f64>,
    /// Ridge added to the diagonal of `cyy` by [`Self::cyy_regularized`].
    pub ridge: f64,
}

impl CovarianceBlocks {
    pub fn cyx(&self) -> DMatrix<f64> {
        self.cxy.transpose()
    }

    pub fn cyy_regularized(&self) -> DMatrix<f64> {
        let n = self.cyy.nrows();
        &self.cyy + DMatrix::<f64>::identity(n, n) * self.ridge
    }
}

/// Unbiased sample covariance (divisor `M - 1`). The ridge is
/// `1e-6 * trace(C_YY) / N_y`, or `1e-6` when the trace is zero.
pub fn sample_covariance(set: &CandidateSet) -> Result<CovarianceBlocks> {
    let m = set.len();
    if m < 2 {
        return Err(Error::InsufficientCandidates(m));
    }
    let n_y = set.n_y();
    let d = N_X + n_y;
    let mut z = DMatrix::<f64>::from_fn(m, d, |j, k| if k < N_X { set.x(j)[k] } else { set.y(j)[k - N_X] });
    for mut col in z.column_iter_mut() {
        let mean = col.sum() / m as f64;
        col.add_scalar_mut(-mean);
    }
    let mut c = z.tr_mul(&z) / (m as f64 - 1.0);
    // exact symmetry regardless of the product kernel's summation order
    for i in 0..d {
        for j in 0..i {
            c[(j, i)] = c[(i, j)];
        }
    }
    let cyy = c.view((N_X, N_X), (n_y, n_y)).into_owned();
    let trace = cyy.trace();
    let ridge = if trace > 0.0 { RIDGE_SCALE * trace / n_y as f64 } else { RIDGE_SCALE };
    Ok(CovarianceBlocks {
        cxx: c.view((0, 0), (N_X, N_X)).into_owned(),
        cxy: c.view((0, N_X), (N_X, n_y)).into_owned(),
        cyy,
        ridge,
    })
}

fn cholesky(cyy: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(cyy.clone()).ok_or(Error::SingularCovariance)
}

/// `L^-1 (v - y_j)` for every candidate, one column per candidate.
fn whiten(chol: &Cholesky<f64, Dyn>, set: &CandidateSet) -> Result<DMatrix<f64>> {
    let mut w = DMatrix::from_column_slice(set.n_y(), set.len(), set.ys());
    if !chol.l_dirty().solve_lower_triangular_mut(&mut w) {
        return Err(Error::SingularCovariance);
    }
    Ok(w)
}

fn whiten_vec(chol: &Cholesky<f64, Dyn>, v: &[f64]) -> Result<DVector<f64>> {
    let mut w = DVector::from_column_slice(v);
    if !chol.l_dirty().solve_lower_triangular_mut(&mut w) {
        return Err(Error::SingularCovariance);
    }
    Ok(w)
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Squared Mahalanobis distances `(y0 - y_j)^T C_YY^-1 (y0 - y_j)` under the
/// (already regularized) `cyy`.
pub fn mahalanobis_distances(target: &TargetContext, set: &CandidateSet, cyy: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = cholesky(cyy)?;
    let w = whiten(&chol, set)?;
    let w0 = whiten_vec(&chol, target.y0())?;
    Ok(w.column_iter().map(|c| sq_dist(w0.as_slice(), c.as_slice())).collect())
}

/// Gaussian weights `exp(-d_j / (2 beta))`, normalized in the log domain so
/// that no weight is NaN even when every exponent underflows.
pub fn weights_from_distances(distances: &[f64], beta: f64) -> KernelWeights {
    let scale = -0.5 / beta;
    let max = distances
        .iter()
        .map(|&d| d * scale)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return KernelWeights { weights: vec![0.0; distances.len()], raw_sum: 0.0 };
    }
    let mut weights: Vec<f64> = distances.iter().map(|&d| (d * scale - max).exp()).collect();
    let shifted: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= shifted);
    KernelWeights { weights, raw_sum: max.exp() * shifted }
}

/// Kernel weights with bandwidth `H_YY = beta * C_YY`.
pub fn kernel_weights(
    target: &TargetContext,
    set: &CandidateSet,
    beta: f64,
    cyy: &DMatrix<f64>,
) -> Result<KernelWeights> {
    if set.is_empty() {
        return Err(Error::NoCandidates);
    }
    Ok(weights_from_distances(&mahalanobis_distances(target, set, cyy)?, beta))
}

/// Weighted predictions `(sum w_j x_j, sum w_j y_j)`.
pub fn predict_xy(set: &CandidateSet, weights: &[f64]) -> ([f64; N_X], Vec<f64>) {
    let mut x = [0.0; N_X];
    let mut y = vec![0.0; set.n_y()];
    for (j, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (a, &b) in x.iter_mut().zip(set.x(j)) {
            *a += w * b;
        }
        for (a, &b) in y.iter_mut().zip(set.y(j)) {
            *a += w * b;
        }
    }
    (x, y)
}

fn predict_y(set: &CandidateSet, weights: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; set.n_y()];
    for (j, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (a, &b) in y.iter_mut().zip(set.y(j)) {
            *a += w * b;
        }
    }
    y
}

fn search_beta(y0: &[f64], set: &CandidateSet, distances: &[f64]) -> f64 {
    let mut best = (BETA_GRID[0], f64::INFINITY);
    for &beta in &BETA_GRID {
        let kw = weights_from_distances(distances, beta);
        let err = sq_dist(y0, &predict_y(set, &kw.weights));
        if err < best.1 {
            best = (beta, err);
        }
    }
    best.0
}

/// The grid point minimizing the context prediction error
/// `|y0 - sum w_j(beta) y_j|^2`; ties go to the smaller `beta`.
pub fn optimize_beta(target: &TargetContext, set: &CandidateSet, cyy: &DMatrix<f64>) -> Result<f64> {
    if set.len() < 2 {
        return Err(Error::InsufficientCandidates(set.len()));
    }
    let distances = mahalanobis_distances(target, set, cyy)?;
    Ok(search_beta(target.y0(), set, &distances))
}

/// `G = C_XY C_YY^-1`, 4 x N_y.
fn correction_gain(chol: &Cholesky<f64, Dyn>, cov: &CovarianceBlocks) -> DMatrix<f64> {
    chol.solve(&cov.cyx()).transpose()
}

fn alpha_from_neighbours(
    y0: &[f64],
    set: &CandidateSet,
    beta: f64,
    whitened: &DMatrix<f64>,
    gain: &DMatrix<f64>,
) -> f64 {
    let m = set.len();
    if m < 2 {
        return 0.0;
    }
    let n_y = set.n_y();
    let mut order: Vec<(f64, usize)> = (0..m).map(|j| (sq_dist(y0, set.y(j)), j)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order.truncate((n_y + 1).min(m));

    let (mut num, mut den) = (0.0, 0.0);
    let mut dists = vec![0.0; m];
    let mut residual = vec![0.0; n_y];
    for &(_, i) in &order {
        let wi = whitened.column(i);
        for (j, d) in dists.iter_mut().enumerate() {
            *d = if j == i { f64::INFINITY } else { sq_dist(wi.as_slice(), whitened.column(j).as_slice()) };
        }
        let kw = weights_from_distances(&dists, beta);
        let (x_pred, y_pred) = predict_xy(set, &kw.weights);
        for ((r, &a), &b) in residual.iter_mut().zip(set.y(i)).zip(&y_pred) {
            *r = a - b;
        }
        let xi = set.x(i);
        for row in 0..N_X {
            let c: f64 = gain.row(row).iter().zip(&residual).map(|(g, r)| g * r).sum();
            num += (xi[row] - x_pred[row]) * c;
            den += c * c;
        }
    }
    if den < ALPHA_MIN_DENOMINATOR {
        0.0
    } else {
        (num / den).clamp(0.0, ALPHA_MAX)
    }
}

/// Closed-form least-squares `alpha` over the `N_y + 1` candidates nearest to
/// `y0`, each predicted leave-one-out from the remaining candidates with the
/// given `beta`. Clamped to `[0, 4]`.
pub fn optimize_alpha(
    target: &TargetContext,
    set: &CandidateSet,
    beta: f64,
    cov: &CovarianceBlocks,
) -> Result<f64> {
    if set.len() < 2 {
        return Ok(0.0);
    }
    let chol = cholesky(&cov.cyy_regularized())?;
    let whitened = whiten(&chol, set)?;
    let gain = correction_gain(&chol, cov);
    Ok(alpha_from_neighbours(target.y0(), set, beta, &whitened, &gain))
}

/// Knobs for [`hql_estimate_with`]; `None` means "optimize".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HqlConfig {
    /// Aperture used when falling back to the intermediate layer.
    pub sigma2: f64,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
}

impl Default for HqlConfig {
    fn default() -> Self {
        Self { sigma2: DEFAULT_SIGMA2, beta: None, alpha: None }
    }
}

/// Full kernel MMSE estimate with optimized `alpha` and `beta`.
///
/// Never fails for a non-empty target: with fewer than two candidates or a
/// numerical failure it degrades to IDL, and to BRL when IDL is impossible.
/// The returned layer and `fallback` flag record which path produced it.
pub fn hql_estimate(target: &TargetContext, set: &CandidateSet) -> Result<PatchEstimate> {
    hql_estimate_with(target, set, &HqlConfig::default())
}

pub fn hql_estimate_with(target: &TargetContext, set: &CandidateSet, config: &HqlConfig) -> Result<PatchEstimate> {
    match kmmse(target, set, config) {
        Ok(estimate) => Ok(estimate),
        Err(_) => {
            let mut estimate = idl_estimate(target, set, config.sigma2).or_else(|_| brl_estimate(target))?;
            estimate.diagnostics.fallback = true;
            estimate.diagnostics.candidates = set.len();
            estimate.diagnostics.rings_used = set.rings_used();
            Ok(estimate)
        }
    }
}

fn kmmse(target: &TargetContext, set: &CandidateSet, config: &HqlConfig) -> Result<PatchEstimate> {
    let cov = sample_covariance(set)?;
    let chol = cholesky(&cov.cyy_regularized())?;
    let whitened = whiten(&chol, set)?;
    let w0 = whiten_vec(&chol, target.y0())?;
    let distances: Vec<f64> = whitened
        .column_iter()
        .map(|c| sq_dist(w0.as_slice(), c.as_slice()))
        .collect();

    let y0 = target.y0();
    let beta = config.beta.unwrap_or_else(|| search_beta(y0, set, &distances));
    let kw = weights_from_distances(&distances, beta);
    let (x_pred, y_pred) = predict_xy(set, &kw.weights);
    let gain = correction_gain(&chol, &cov);
    let alpha = config
        .alpha
        .unwrap_or_else(|| alpha_from_neighbours(y0, set, beta, &whitened, &gain));

    let residual: Vec<f64> = y0.iter().zip(&y_pred).map(|(a, b)| a - b).collect();
    let mut values = x_pred;
    for (row, v) in values.iter_mut().enumerate() {
        let c: f64 = gain.row(row).iter().zip(&residual).map(|(g, r)| g * r).sum();
        *v += alpha * c;
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularCovariance);
    }
    Ok(PatchEstimate {
        values,
        layer: Layer::Hql,
        diagnostics: Diagnostics {
            nu: Some(kw.raw_sum),
            candidates: set.len(),
            beta: Some(beta),
            alpha: Some(alpha),
            rings_used: set.rings_used(),
            ..Diagnostics::default()
        },
    })
}
