//! Straight-line reference computations shared by the integration tests.
//! Nothing here calls into the library's numerical code.

#![allow(dead_code)]

use skmmse::framework::CandidateSet;

pub const GRID: [f64; 21] = {
    let mut g = [0.0; 21];
    let mut i = 0;
    while i < 21 {
        g[i] = if i < 8 { 1.0 / (1u64 << (8 - i)) as f64 } else { (1u64 << (i - 8)) as f64 };
        i += 1;
    }
    g
};

pub fn rows(set: &CandidateSet) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let xs = (0..set.len()).map(|j| set.x(j).to_vec()).collect();
    let ys = (0..set.len()).map(|j| set.y(j).to_vec()).collect();
    (xs, ys)
}

pub fn make_set(xs: &[Vec<f64>], ys: &[Vec<f64>]) -> CandidateSet {
    let n_y = ys[0].len();
    CandidateSet::from_vectors(n_y, xs.concat(), ys.concat()).unwrap()
}

/// Textbook covariance `1/(M-1) sum (a_j - mean_a)(b_j - mean_b)`.
pub fn covariance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = a.len() as f64;
    let ma: Vec<f64> = (0..a[0].len()).map(|k| a.iter().map(|r| r[k]).sum::<f64>() / m).collect();
    let mb: Vec<f64> = (0..b[0].len()).map(|k| b.iter().map(|r| r[k]).sum::<f64>() / m).collect();
    let mut out = vec![vec![0.0; b[0].len()]; a[0].len()];
    for (ra, rb) in a.iter().zip(b) {
        for p in 0..ma.len() {
            for q in 0..mb.len() {
                out[p][q] += (ra[p] - ma[p]) * (rb[q] - mb[q]);
            }
        }
    }
    for row in &mut out {
        for v in row {
            *v /= m - 1.0;
        }
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        let d = m[c][c];
        for v in &mut m[c] {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let pivot = m[c].clone();
                for (v, pv) in m[r].iter_mut().zip(pivot) {
                    *v -= f * pv;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn matvec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(v).map(|(p, q)| p * q).sum()).collect()
}

pub fn quad(inv: &[Vec<f64>], d: &[f64]) -> f64 {
    d.iter().zip(matvec(inv, d)).map(|(a, b)| a * b).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}

pub fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// `C_YY` plus the ridge `1e-6 * trace / N_y` (or `1e-6` for zero trace).
pub fn regularized_cyy(ys: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut c = covariance(ys, ys);
    let n = c.len();
    let tr: f64 = (0..n).map(|i| c[i][i]).sum();
    let ridge = if tr > 0.0 { 1e-6 * tr / n as f64 } else { 1e-6 };
    for (i, row) in c.iter_mut().enumerate() {
        row[i] += ridge;
    }
    c
}

/// Normalized `exp(-d / (2 beta))` with the largest exponent shifted to 0.
pub fn weights(dists: &[f64], beta: f64) -> Vec<f64> {
    let e: Vec<f64> = dists.iter().map(|d| -d / (2.0 * beta)).collect();
    let mx = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = e.iter().map(|v| (v - mx).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

pub fn combine(w: &[f64], rows: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; rows[0].len()];
    for (wj, r) in w.iter().zip(rows) {
        for (o, v) in out.iter_mut().zip(r) {
            *o += wj * v;
        }
    }
    out
}

/// Context prediction error of the kernel predictor at `beta`.
pub fn eps_y(y0: &[f64], ys: &[Vec<f64>], inv: &[Vec<f64>], beta: f64) -> f64 {
    let d: Vec<f64> = ys.iter().map(|y| quad(inv, &sub(y0, y))).collect();
    sq(y0, &combine(&weights(&d, beta), ys))
}

/// Leave-one-out residuals `(x_i - x~_i, G (y_i - y~_i))` over the `N_y + 1`
/// candidates closest to `y0`.
pub fn alpha_terms(
    y0: &[f64],
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    beta: f64,
    inv: &[Vec<f64>],
    gain: &[Vec<f64>],
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut order: Vec<usize> = (0..ys.len()).collect();
    order.sort_by(|&a, &b| sq(y0, &ys[a]).total_cmp(&sq(y0, &ys[b])).then(a.cmp(&b)));
    order.truncate((y0.len() + 1).min(ys.len()));
    order
        .into_iter()
        .map(|i| {
            let others: Vec<usize> = (0..ys.len()).filter(|&j| j != i).collect();
            let d: Vec<f64> = others.iter().map(|&j| quad(inv, &sub(&ys[i], &ys[j]))).collect();
            let w = weights(&d, beta);
            let oxs: Vec<Vec<f64>> = others.iter().map(|&j| xs[j].clone()).collect();
            let oys: Vec<Vec<f64>> = others.iter().map(|&j| ys[j].clone()).collect();
            let xt = combine(&w, &oxs);
            let yt = combine(&w, &oys);
            (sub(&xs[i], &xt), matvec(gain, &sub(&ys[i], &yt)))
        })
        .collect()
}

pub fn eps_x(terms: &[(Vec<f64>, Vec<f64>)], alpha: f64) -> f64 {
    terms
        .iter()
        .map(|(r, c)| r.iter().zip(c).map(|(a, b)| (a - alpha * b).powi(2)).sum::<f64>())
        .sum()
}

/// `C_XY C_YY^-1`.
pub fn gain(xs: &[Vec<f64>], ys: &[Vec<f64>], inv: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cxy = covariance(xs, ys);
    cxy.iter()
        .map(|r| (0..inv.len()).map(|c| r.iter().zip(inv).map(|(a, row)| a * row[c]).sum()).collect())
        .collect()
}

/// Full kernel MMSE estimate: covariance, grid search for beta, closed-form
/// alpha over leave-one-out neighbours, corrected prediction.
pub fn hql(y0: &[f64], xs: &[Vec<f64>], ys: &[Vec<f64>]) -> (Vec<f64>, f64, f64) {
    let inv = invert(&regularized_cyy(ys));
    let mut beta = GRID[0];
    let mut best = f64::INFINITY;
    for &b in &GRID {
        let e = eps_y(y0, ys, &inv, b);
        if e < best {
            best = e;
            beta = b;
        }
    }
    let g = gain(xs, ys, &inv);
    let terms = alpha_terms(y0, xs, ys, beta, &inv, &g);
    let num: f64 = terms.iter().map(|(r, c)| r.iter().zip(c).map(|(a, b)| a * b).sum::<f64>()).sum();
    let den: f64 = terms.iter().map(|(_, c)| c.iter().map(|v| v * v).sum::<f64>()).sum();
    let alpha = if den < 1e-12 { 0.0 } else { (num / den).clamp(0.0, 4.0) };
    let d: Vec<f64> = ys.iter().map(|y| quad(&inv, &sub(y0, y))).collect();
    let w = weights(&d, beta);
    let xt = combine(&w, xs);
    let yt = combine(&w, ys);
    let corr = matvec(&g, &sub(y0, &yt));
    (xt.iter().zip(corr).map(|(a, c)| a + alpha * c).collect(), beta, alpha)
}
