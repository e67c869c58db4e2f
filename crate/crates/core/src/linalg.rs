//! Cyclic Jacobi eigensolver for dense real symmetric matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in non-increasing order.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: DMatrix<f64>,
    pub sweeps: usize,
}

pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 50;

fn off_diagonal(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Eigen-decomposition by cyclic Jacobi rotations.
///
/// Stops once the off-diagonal Frobenius norm drops below
/// `tol * max(1, ||A||_F)`.
pub fn jacobi_eigen(a: &DMatrix<f64>, tol: f64, max_sweeps: usize) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::domain("matrix is not square"));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let mut m = a.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    let scale = m.norm().max(1.0);
    let mut v = DMatrix::<f64>::identity(n, n);
    let mut sweeps = 0;
    while off_diagonal(&m) > tol * scale {
        if sweeps == max_sweeps {
            return Err(Error::numerical(format!(
                "Jacobi did not converge in {max_sweeps} sweeps (off-diagonal {:.3e})",
                off_diagonal(&m)
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}
