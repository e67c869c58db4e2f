//! Sampling operators on the Paley-Wiener space: Gram matrices, analysis and
//! synthesis, frame-bound estimates and the sequence-space projection.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, JACOBI_MAX_SWEEPS, JACOBI_TOL};
use crate::quadrature::{panels_for_trig, GaussLegendre, PANEL_ORDER};
use crate::signal::{sinc, Atom, BandlimitedSignal, Scalar, SeparatedSet};

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("bandwidth must be positive, got {omega}")))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")))
    }
}

#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub omega: f64,
    pub points: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

impl GramMatrix {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.points.len();
        writeln!(w, "# gram N={n} omega={}", self.omega)?;
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{:.17e}", self.matrix[(i, j)])).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// `G_jk = <k_{x_j}, k_{x_k}> = omega * sinc(omega * (x_j - x_k))`.
pub fn gram(x: &SeparatedSet, omega: f64) -> Result<GramMatrix> {
    check_omega(omega)?;
    let p = x.points();
    let n = p.len();
    let matrix = DMatrix::from_fn(n, n, |i, j| omega * sinc(omega * (p[i] - p[j])));
    Ok(GramMatrix {
        omega,
        points: p.to_vec(),
        matrix,
    })
}

/// Samples `f(x_k)`.
pub fn analyze(f: &BandlimitedSignal, x: &SeparatedSet) -> Vec<Scalar> {
    x.points().iter().map(|&p| f.eval(p)).collect()
}

/// `sum_k c_k k_{x_k}`.
pub fn synthesize(c: &[Scalar], x: &SeparatedSet, omega: f64) -> Result<BandlimitedSignal> {
    if c.len() != x.len() {
        return Err(Error::domain(format!(
            "{} coefficients for {} points",
            c.len(),
            x.len()
        )));
    }
    let atoms = x
        .points()
        .iter()
        .zip(c)
        .map(|(&center, &coeff)| Atom { center, coeff })
        .collect();
    BandlimitedSignal::new(omega, atoms)
}

/// Finite-dimensional test space spanned by kernels on the Nyquist grid
/// `j / omega`. These kernels are orthogonal, so `||f||^2 = omega * ||c||^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct NyquistModel {
    pub omega: f64,
    pub centers: Vec<f64>,
}

/// Fraction of the sampled span occupied by the test space; the rest is guard.
pub const MODEL_SUPPORT_FRACTION: f64 = 0.25;

impl NyquistModel {
    /// Grid points inside the middle `fraction` of the span of `x`.
    pub fn inner(x: &SeparatedSet, omega: f64, fraction: f64) -> Result<Self> {
        check_omega(omega)?;
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::domain("support fraction must lie in (0, 1]"));
        }
        let (lo, hi) = x.span();
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * fraction * (hi - lo);
        let j0 = ((mid - half) * omega).ceil() as i64;
        let j1 = ((mid + half) * omega).floor() as i64;
        if j1 < j0 {
            return Err(Error::usage("sampling window too short to hold a test space"));
        }
        let centers = (j0..=j1).map(|j| j as f64 / omega).collect();
        Ok(NyquistModel { omega, centers })
    }

    pub fn dim(&self) -> usize {
        self.centers.len()
    }

    /// `E_kj = omega * sinc(omega * x_k - j)`, mapping coefficients to samples.
    pub fn sampling_matrix(&self, points: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(points.len(), self.centers.len(), |k, j| {
            self.omega * sinc(self.omega * (points[k] - self.centers[j]))
        })
    }

    pub fn signal(&self, c: &[Scalar]) -> Result<BandlimitedSignal> {
        let atoms = self
            .centers
            .iter()
            .zip(c)
            .map(|(&center, &coeff)| Atom { center, coeff })
            .collect();
        BandlimitedSignal::new(self.omega, atoms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub model_dim: usize,
}

/// Extremal values of `sum_k |f(x_k)|^2 / ||f||^2` over the test space.
pub fn frame_bounds_on(points: &[f64], model: &NyquistModel) -> Result<FrameBounds> {
    if model.dim() == 0 {
        return Err(Error::usage("empty test space"));
    }
    let e = model.sampling_matrix(points);
    let ete = e.transpose() * &e / model.omega;
    let eig = jacobi_eigen(&ete, JACOBI_TOL, JACOBI_MAX_SWEEPS)?;
    Ok(FrameBounds {
        lower: eig.values.last().copied().unwrap_or(0.0).max(0.0),
        upper: eig.values[0],
        model_dim: model.dim(),
    })
}

/// Frame bounds of `x` for signals of bandwidth `omega` supported well inside
/// the sampled window.
pub fn frame_bounds_estimate(x: &SeparatedSet, omega: f64) -> Result<FrameBounds> {
    let model = NyquistModel::inner(x, omega, MODEL_SUPPORT_FRACTION)?;
    frame_bounds_on(x.points(), &model)
}

/// `c_hat(t) = sum_k c_k exp(-2 pi i k t)`.
pub fn spectrum_eval(c: &[Scalar], t: f64) -> Scalar {
    let w = Scalar::from_polar(1.0, -2.0 * std::f64::consts::PI * t);
    let mut acc = Scalar::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        acc = acc * w + ck;
    }
    acc
}

/// `int_{-w}^{w} |c_hat(t)|^2 dt` by composite Gauss-Legendre.
pub fn band_energy(c: &[Scalar], w: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&w) {
        return Err(Error::domain(format!("half-width must lie in [0, 1/2], got {w}")));
    }
    if w == 0.0 || c.is_empty() {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(PANEL_ORDER);
    let panels = panels_for_trig(2 * c.len(), 2.0 * w);
    Ok(rule.integrate(-w, w, panels, |t| spectrum_eval(c, t).norm_sqr()))
}

/// Result of applying the orthogonal projection onto the sequences with
/// spectrum in `[-alpha/2, alpha/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// `(P c)_j` for `j` on the support window of `c`.
    pub window: Vec<f64>,
    /// `||P c||^2` carried by indices outside the window.
    pub tail_energy: f64,
}

/// `P_alpha(j, k) = alpha * sinc(alpha * (j - k))`.
pub fn projection_entry(alpha: f64, d: i64) -> f64 {
    alpha * sinc(alpha * d as f64)
}

/// Apply the bi-infinite projection to `c` supported on `0..c.len()`.
pub fn projection_apply(c: &[f64], alpha: f64) -> Result<Projection> {
    check_alpha(alpha)?;
    let n = c.len();
    let row: Vec<f64> = (0..n).map(|d| projection_entry(alpha, d as i64)).collect();
    let window: Vec<f64> = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| row[(j as i64 - k as i64).unsigned_abs() as usize] * c[k])
                .sum()
        })
        .collect();
    let total: f64 = window.iter().zip(c).map(|(p, x)| p * x).sum();
    let inside: f64 = window.iter().map(|v| v * v).sum();
    Ok(Projection {
        window,
        tail_energy: (total - inside).max(0.0),
    })
}

/// Best rational `p/q` with `q <= max_den` within `tol` of `x`.
fn rational_period(x: f64, max_den: i64, tol: f64) -> Option<i64> {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor() as i64;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max_den {
            return None;
        }
        if (h2 as f64 / k2 as f64 - x).abs() < tol {
            return Some(k2);
        }
        let frac = v - a as f64;
        if frac.abs() < 1e-300 {
            return Some(k2);
        }
        v = 1.0 / frac;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    None
}

/// Entries `(P^2)(d) = sum_m P(d - m) P(m)` of the composed operator,
/// computed by symmetric partial sums over whole periods of the summand and
/// Richardson extrapolation in the truncation length `K` (the tail expands in
/// odd powers of `1/K`). Independent of the projection
/// property, so it can be used to test it.
pub fn projection_composed_kernel(alpha: f64, max_d: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let period = rational_period(alpha, 500, 1e-14).map(|q| 2 * q).unwrap_or(1);
    let partial = |d: i64, k: i64| -> f64 {
        let mut s = 0.0;
        let mut comp = 0.0;
        for m in -k..=k {
            let term = projection_entry(alpha, d - m) * projection_entry(alpha, m);
            let y = term - comp;
            let t = s + y;
            comp = (t - s) - y;
            s = t;
        }
        s
    };
    let mut out = Vec::with_capacity(max_d + 1);
    for d in 0..=max_d {
        let base = period * ((64 + d as i64) * 20 / period + 1);
        let s1 = partial(d as i64, base);
        let s2 = partial(d as i64, 2 * base);
        let s4 = partial(d as i64, 4 * base);
        let r1 = 2.0 * s2 - s1;
        let r2 = 2.0 * s4 - s2;
        out.push((8.0 * r2 - r1) / 7.0);
    }
    Ok(out)
}
