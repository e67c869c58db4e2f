//! Critical functions: bandlimited functions whose samples on `alpha Z` sit
//! within a small distance of `2 lambda Z`, so their folded samples nearly
//! vanish while their energy stays large.

use num_bigint::BigInt;
use serde::Serialize;

use super::{binomial_certificate, IntegerCertificate};
use crate::error::{Error, Result};
use crate::precise::{sinc_row, to_f64_scaled, FixedCtx};
use crate::signal::{fold_real, sinc, Atom, BandlimitedSignal, Scalar};

#[derive(Debug, Clone)]
pub struct CriticalFunction {
    pub certificate: IntegerCertificate,
    pub lambda: f64,
    /// `g = 2 lambda * alpha * sum_k m_k sinc(x - alpha (k - c))` with the
    /// sample sequence `m` re-centred by `c = (len - 1) / 2`.
    pub signal: BandlimitedSignal,
    pub energy: f64,
    /// Folded-sample norm of `g` on the guarded window.
    pub folded_norm: f64,
    /// `2 lambda * residual`, a bound on the folded norm over all of `alpha Z`.
    pub folded_norm_bound: f64,
    /// Lattice index (after re-centring) of the first window sample.
    pub window_start: i64,
    /// `(P m)_j - m_j` on the window.
    pub deviations: Vec<f64>,
    /// Re-centred sample sequence `m` on the window.
    pub integers: Vec<i128>,
}

impl CriticalFunction {
    pub fn alpha(&self) -> f64 {
        self.certificate.alpha()
    }

    /// Sample locations of the window.
    pub fn sample_points(&self) -> Vec<f64> {
        (0..self.deviations.len())
            .map(|i| self.alpha() * (self.window_start + i as i64) as f64)
            .collect()
    }

    /// `g(x_j) = 2 lambda (m_j + d_j)` on the window.
    pub fn samples(&self) -> Vec<f64> {
        self.integers
            .iter()
            .zip(&self.deviations)
            .map(|(&m, &d)| 2.0 * self.lambda * (m as f64 + d))
            .collect()
    }

    pub fn record(&self) -> super::CertificateRecord {
        let mut r = self.certificate.record();
        r.energy = self.energy;
        r.folded_norm = Some(self.folded_norm);
        r.lambda = Some(self.lambda);
        r
    }
}

pub fn critical_function(cert: &IntegerCertificate, lambda: f64) -> Result<CriticalFunction> {
    let guard = (4 * cert.len()).max(16);
    critical_function_with_guard(cert, lambda, guard)
}

pub fn critical_function_with_guard(cert: &IntegerCertificate, lambda: f64, guard: usize) -> Result<CriticalFunction> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain(format!("threshold must be positive, got {lambda}")));
    }
    if !cert.is_real() {
        return Err(Error::usage("critical functions are built from real certificates"));
    }
    let len = cert.len();
    if guard < len {
        return Err(Error::usage(format!(
            "guard band {guard} shorter than the certificate length {len}"
        )));
    }
    let alpha = cert.alpha();
    let m = cert.sample_sequence();
    let shift = ((len - 1) / 2) as i64;
    let total = len + 2 * guard;
    let l1: f64 = m.iter().map(|&v| (v as f64).abs()).sum();
    let r = cert.residual().max(1e-300);
    let need = (l1 * total as f64).log2().max(0.0) + (1.0 / r).log2().max(0.0);
    let ctx = FixedCtx::new(64 + need.ceil() as u32);
    let row = sinc_row(&ctx, alpha, len + guard);
    let mut deviations = Vec::with_capacity(total);
    let mut integers = Vec::with_capacity(total);
    for idx in 0..total {
        let j = idx as i64 - guard as i64;
        let mut s = BigInt::from(0);
        for (k, &mk) in m.iter().enumerate() {
            if mk != 0 {
                s += &row[(j - k as i64).unsigned_abs() as usize] * mk;
            }
        }
        let mj = if (0..len as i64).contains(&j) { m[j as usize] } else { 0 };
        s -= ctx.from_int(mj);
        deviations.push(to_f64_scaled(&s, ctx.bits() as i64));
        integers.push(mj);
    }
    let scale = 2.0 * lambda;
    let folded_norm = deviations
        .iter()
        .map(|&d| fold_real(scale * d, lambda).powi(2))
        .sum::<f64>()
        .sqrt();
    let atoms: Vec<Atom> = m
        .iter()
        .enumerate()
        .map(|(k, &mk)| Atom {
            center: alpha * (k as i64 - shift) as f64,
            coeff: Scalar::new(scale * alpha * mk as f64, 0.0),
        })
        .collect();
    let signal = BandlimitedSignal::new(1.0, atoms)?;
    let window_start = -(guard as i64) - shift;
    check_samples(alpha, &m, shift, window_start, &integers, &deviations, l1)?;
    Ok(CriticalFunction {
        certificate: cert.clone(),
        lambda,
        signal,
        energy: scale * alpha.sqrt() * cert.sample_norm(),
        folded_norm,
        folded_norm_bound: scale * cert.residual(),
        window_start,
        deviations,
        integers,
    })
}

/// Direct double-precision synthesis must reproduce `P m` on the window, up
/// to the rounding floor of a sum with `||m||_1`-sized terms.
fn check_samples(
    alpha: f64,
    m: &[i128],
    shift: i64,
    window_start: i64,
    integers: &[i128],
    deviations: &[f64],
    l1: f64,
) -> Result<()> {
    let tol = 1e-8 + 64.0 * f64::EPSILON * l1;
    for (i, (&mj, &dj)) in integers.iter().zip(deviations).enumerate() {
        let x = alpha * (window_start + i as i64) as f64;
        let direct: f64 = m
            .iter()
            .enumerate()
            .map(|(k, &mk)| alpha * mk as f64 * sinc(x - alpha * (k as i64 - shift) as f64))
            .sum();
        let precise = mj as f64 + dj;
        if (direct - precise).abs() > tol {
            return Err(Error::numerical(format!(
                "synthesised sample at {x} is {direct}, projection gives {precise}"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessTrial {
    #[serde(rename = "N")]
    pub n: usize,
    pub residual: f64,
    pub folded_norm_bound: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct WitnessSearch {
    pub witness: CriticalFunction,
    pub trials: Vec<WitnessTrial>,
}

/// Walk the binomial orders in `schedule` until the critical function has
/// folded norm below `target` and energy above `floor`.
pub fn instability_witness(
    alpha: f64,
    lambda: f64,
    target: f64,
    floor: f64,
    schedule: &[usize],
) -> Result<WitnessSearch> {
    if alpha == 1.0 {
        return Err(Error::usage(
            "alpha = 1 is the Nyquist lattice; use the 2 sinc witness instead",
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::usage(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(target > 0.0 && floor > 0.0 && lambda > 0.0) {
        return Err(Error::usage("threshold, target and floor must be positive"));
    }
    let mut trials = Vec::new();
    for &n in schedule {
        let cert = binomial_certificate(n, alpha)?;
        let trial = WitnessTrial {
            n,
            residual: cert.residual(),
            folded_norm_bound: 2.0 * lambda * cert.residual(),
            energy: 2.0 * lambda * alpha.sqrt() * cert.sample_norm(),
        };
        let hit = trial.folded_norm_bound < target && trial.energy > floor;
        trials.push(trial);
        if hit {
            let witness = critical_function(&cert, lambda)?;
            return Ok(WitnessSearch { witness, trials });
        }
    }
    let best = trials
        .iter()
        .min_by(|a, b| a.folded_norm_bound.total_cmp(&b.folded_norm_bound));
    Err(Error::Infeasible(match best {
        Some(b) => format!(
            "schedule exhausted: best folded norm {:.3e} at N={} (energy {:.3e}), target {target:.3e}",
            b.folded_norm_bound, b.n, b.energy
        ),
        None => "empty schedule".to_string(),
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct NyquistWitness {
    pub energy: f64,
    pub folded_norm: f64,
    pub window: usize,
}

/// `2 sinc` folded at threshold 1 on the integers: all samples are in `2Z`.
pub fn nyquist_witness(window: usize) -> NyquistWitness {
    let w = window as i64;
    let folded: f64 = (-w..=w)
        .map(|k| fold_real(2.0 * sinc(k as f64), 1.0).powi(2))
        .sum::<f64>()
        .sqrt();
    NyquistWitness {
        energy: 2.0,
        folded_norm: folded,
        window,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_order_samples_near_binomial_row() {
        let cert = binomial_certificate(2, 0.7).unwrap();
        let cf = critical_function(&cert, 0.5).unwrap();
        let pts = cf.sample_points();
        let mid = pts.iter().position(|&x| x == 0.0).unwrap();
        assert_eq!(&cf.integers[mid - 1..=mid + 1], &[1, 2, 1]);
        assert!(cf.folded_norm <= cert.residual() + 1e-15);
    }

    #[test]
    fn energy_matches_signal_norm() {
        let cert = binomial_certificate(6, 0.75).unwrap();
        let cf = critical_function(&cert, 0.5).unwrap();
        assert!((cf.energy - cf.signal.norm()).abs() < 1e-8);
    }

    #[test]
    fn nyquist_folds_to_zero() {
        let w = nyquist_witness(50);
        assert!(w.folded_norm < 1e-12);
        assert_eq!(w.energy, 2.0);
    }

    #[test]
    fn alpha_one_rejected() {
        assert!(matches!(instability_witness(1.0, 0.5, 1e-3, 1.0, &[1]), Err(Error::Usage(_))));
    }

    #[test]
    fn exhausted_schedule_reports_best() {
        match instability_witness(0.7, 0.5, 1e-3, 1.0, &[1, 2, 3]) {
            Err(Error::Infeasible(msg)) => assert!(msg.contains("N=3")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn short_guard_rejected() {
        let cert = binomial_certificate(8, 0.75).unwrap();
        assert!(matches!(critical_function_with_guard(&cert, 0.5, 3), Err(Error::Usage(_))));
    }
}
