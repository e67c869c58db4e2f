//! Prolate matrices `Q_{alpha,N} = (alpha * sinc(alpha * (j - k)))`, their
//! spectra, log-determinants and the Minkowski bound on their lattices.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::projection_entry;
use crate::linalg::{jacobi_eigen, JACOBI_MAX_SWEEPS, JACOBI_TOL};
use crate::precise::{sinc_row, toeplitz_pivots, FixedCtx};

pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ProlateMatrix {
    alpha: f64,
    matrix: DMatrix<f64>,
}

pub fn prolate_matrix(alpha: f64, n: usize) -> Result<ProlateMatrix> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::usage(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if n == 0 {
        return Err(Error::usage("prolate matrix size must be at least 1"));
    }
    let row: Vec<f64> = (0..n).map(|d| projection_entry(alpha, d as i64)).collect();
    let matrix = DMatrix::from_fn(n, n, |i, j| row[(i as i64 - j as i64).unsigned_abs() as usize]);
    Ok(ProlateMatrix { alpha, matrix })
}

impl ProlateMatrix {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `<Q c, c>` for a real vector.
    pub fn quadratic_form(&self, c: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(c);
        (v.transpose() * &self.matrix * &v)[(0, 0)]
    }
}

/// LDL^T pivots of `Q_{alpha,N}` in fixed point, with enough bits that a
/// second run with 64 more bits reproduces the log-determinant.
#[derive(Debug, Clone)]
pub struct PrecisePivots {
    pub ctx: FixedCtx,
    pub pivots: Vec<BigInt>,
    pub log_det: f64,
}

impl PrecisePivots {
    pub fn min_log2(&self) -> f64 {
        self.pivots
            .iter()
            .filter_map(|p| self.ctx.ln(p))
            .fold(f64::INFINITY, f64::min)
            / std::f64::consts::LN_2
    }
}

const MAX_BITS: u32 = 1 << 15;

fn log_det_at(alpha: f64, n: usize, bits: u32) -> Result<(FixedCtx, Vec<BigInt>, f64)> {
    let ctx = FixedCtx::new(bits);
    let row = sinc_row(&ctx, alpha, n);
    let pivots = toeplitz_pivots(&ctx, &row)?;
    let mut total = 0.0;
    for p in &pivots {
        total += ctx
            .ln(p)
            .ok_or_else(|| Error::numerical("non-positive pivot"))?;
    }
    Ok((ctx, pivots, total))
}

pub fn precise_pivots(alpha: f64, n: usize) -> Result<PrecisePivots> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::usage(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mut bits = 96 + 2 * n as u32;
    let mut last_err = String::new();
    while bits <= MAX_BITS {
        match (log_det_at(alpha, n, bits), log_det_at(alpha, n, bits + 64)) {
            (Ok((_, _, a)), Ok((ctx, pivots, b))) => {
                if (a - b).abs() <= 1e-13 * b.abs().max(1.0) {
                    return Ok(PrecisePivots {
                        ctx,
                        pivots,
                        log_det: b,
                    });
                }
                last_err = format!("log-det unstable at {bits} bits ({a} vs {b})");
            }
            (Err(e), _) | (_, Err(e)) => last_err = e.to_string(),
        }
        bits *= 2;
    }
    Err(Error::numerical(format!(
        "determinant of Q(alpha={alpha}, N={n}) unresolved: {last_err}"
    )))
}

/// `ln det Q_{alpha,N}`, accurate even when `det` underflows f64.
pub fn log_det(q: &ProlateMatrix) -> Result<f64> {
    Ok(precise_pivots(q.alpha, q.size())?.log_det)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub alpha: f64,
    #[serde(rename = "N")]
    pub size: usize,
    pub epsilon: f64,
    /// Non-increasing.
    #[serde(skip)]
    pub eigenvalues: Vec<f64>,
    pub log_det: f64,
    pub plunge_index: usize,
    pub plunge_value: f64,
    pub minkowski_bound: f64,
    /// Eigenvalues below this are not resolved by double-precision rotations.
    pub resolution_floor: f64,
    pub unresolved: usize,
    pub jacobi_sweeps: usize,
}

pub fn plunge_index(alpha: f64, n: usize, epsilon: f64) -> usize {
    (alpha * n as f64 * (1.0 + epsilon) + 1e-9).floor() as usize
}

pub fn spectrum(q: &ProlateMatrix, epsilon: f64) -> Result<SpectrumReport> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::usage(format!("epsilon must be positive, got {epsilon}")));
    }
    if (1.0 + epsilon) * q.alpha >= 1.0 {
        return Err(Error::usage(format!(
            "plunge check needs (1 + epsilon) * alpha < 1, got {}",
            (1.0 + epsilon) * q.alpha
        )));
    }
    let n = q.size();
    let eig = jacobi_eigen(&q.matrix, JACOBI_TOL, JACOBI_MAX_SWEEPS)?;
    let pp = precise_pivots(q.alpha, n)?;
    let k = plunge_index(q.alpha, n, epsilon).min(n - 1);
    let floor = 8.0 * n as f64 * f64::EPSILON;
    Ok(SpectrumReport {
        alpha: q.alpha,
        size: n,
        epsilon,
        plunge_index: k,
        plunge_value: eig.values[k],
        unresolved: eig.values.iter().filter(|&&m| m < floor).count(),
        eigenvalues: eig.values,
        log_det: pp.log_det,
        minkowski_bound: minkowski_from_log_det(n, pp.log_det),
        resolution_floor: floor,
        jacobi_sweeps: eig.sweeps,
    })
}

fn minkowski_from_log_det(n: usize, log_det: f64) -> f64 {
    (0.5 * (n as f64).ln() + log_det / (2.0 * n as f64)).exp()
}

/// `sqrt(N) * det(Q)^(1/2N)`, the Minkowski bound on the shortest nonzero
/// vector of the lattice with Gram matrix `Q`.
pub fn minkowski_bound(q: &ProlateMatrix) -> Result<f64> {
    Ok(minkowski_from_log_det(q.size(), log_det(q)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Matrix sizes used in the fit.
    pub window: Vec<usize>,
}

/// Least-squares fit of `ln mu_plunge` against `N`.
pub fn plunge_decay_fit(reports: &[SpectrumReport]) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.plunge_value > r.resolution_floor)
        .map(|r| (r.size as f64, r.plunge_value.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::numerical("fewer than two resolved plunge eigenvalues"));
    }
    let (slope, intercept) = least_squares_line(&pts);
    Ok(DecayFit {
        slope,
        intercept,
        window: reports.iter().map(|r| r.size).collect(),
    })
}

pub fn least_squares_line(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Shared read-mostly store of prolate matrices keyed by `(alpha, N)`.
#[derive(Debug, Default)]
pub struct ProlateCache {
    inner: RwLock<HashMap<(u64, usize), Arc<ProlateMatrix>>>,
}

impl ProlateCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, alpha: f64, n: usize) -> Result<Arc<ProlateMatrix>> {
        let key = (alpha.to_bits(), n);
        if let Some(q) = self.inner.read().expect("cache lock poisoned").get(&key) {
            return Ok(Arc::clone(q));
        }
        let q = Arc::new(prolate_matrix(alpha, n)?);
        let mut w = self.inner.write().expect("cache lock poisoned");
        Ok(Arc::clone(w.entry(key).or_insert(q)))
    }

    pub fn len(&self) -> usize {
        self.inner.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_PI;

    #[test]
    fn two_by_two_entries_and_spectrum() {
        let q = prolate_matrix(0.5, 2).unwrap();
        assert!((q.matrix()[(0, 1)] - FRAC_1_PI).abs() < 1e-16);
        let s = spectrum(&q, 0.1).unwrap();
        assert!((s.eigenvalues[0] - (0.5 + FRAC_1_PI)).abs() < 1e-12);
        assert!((s.eigenvalues[1] - (0.5 - FRAC_1_PI)).abs() < 1e-12);
        let mb = minkowski_bound(&q).unwrap();
        let want = 2f64.sqrt() * ((0.5 + FRAC_1_PI) * (0.5 - FRAC_1_PI)).powf(0.25);
        assert!((mb - want).abs() < 1e-12);
    }

    #[test]
    fn single_entry() {
        let q = prolate_matrix(0.5, 1).unwrap();
        assert_eq!(q.matrix()[(0, 0)], 0.5);
        assert!((minkowski_bound(&q).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(matches!(prolate_matrix(1.0, 3), Err(Error::Usage(_))));
        assert!(matches!(prolate_matrix(0.0, 3), Err(Error::Usage(_))));
        let q = prolate_matrix(0.5, 4).unwrap();
        assert!(matches!(spectrum(&q, 1.5), Err(Error::Usage(_))));
    }

    #[test]
    fn plunge_index_floor() {
        assert_eq!(plunge_index(0.5, 64, 0.1), 35);
        assert_eq!(plunge_index(0.5, 20, 0.1), 11);
    }

    #[test]
    fn cache_shares_instances() {
        let cache = ProlateCache::new();
        let a = cache.get(0.3, 8).unwrap();
        let b = cache.get(0.3, 8).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
    }
}

