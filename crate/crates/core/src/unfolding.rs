//! Recovery of bandlimited signals from folded samples under an a priori
//! energy bound.
//!
//! With `||f|| <= M`, at most `lambda^-2 B M^2` samples can leave
//! `[-lambda, lambda)`. The unfolder searches integer fold counts `a` on that
//! many indices so that `samples + 2 lambda a` is a legitimate sample
//! sequence, then reconstructs by least squares. Stability is governed by the
//! lower frame bound of the set with the folded samples removed.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{frame_bounds_on, NyquistModel, MODEL_SUPPORT_FRACTION};
use crate::signal::{density_report, fold_samples, toral_seq_dist, BandlimitedSignal, DensityReport, FoldedSamples, Scalar, SeparatedSet};

pub const DEFAULT_RESIDUAL_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_FOLD: i64 = 3;
const BEAM_WIDTH: usize = 24;
const EXPANSION: usize = 8;
const NODE_BUDGET: usize = 20_000;
const EXACT_RELATIVE_ERROR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfoldConfig {
    pub lambda: f64,
    pub energy_bound: f64,
    pub omega: f64,
    pub x: SeparatedSet,
    #[serde(default = "default_tolerance")]
    pub residual_tolerance: f64,
    /// Cap on the number of corrected indices; derived from the energy bound when absent.
    #[serde(default)]
    pub max_peaks: Option<usize>,
    /// Largest fold count tried at a single index.
    #[serde(default = "default_max_fold")]
    pub max_fold: i64,
    /// Fraction of the sampled span holding the signal model.
    #[serde(default = "default_support_fraction")]
    pub support_fraction: f64,
    #[serde(default)]
    pub density_radius: Option<f64>,
}

fn default_tolerance() -> f64 {
    DEFAULT_RESIDUAL_TOLERANCE
}

fn default_max_fold() -> i64 {
    DEFAULT_MAX_FOLD
}

fn default_support_fraction() -> f64 {
    MODEL_SUPPORT_FRACTION
}

impl UnfoldConfig {
    pub fn new(x: SeparatedSet, omega: f64, lambda: f64, energy_bound: f64) -> Self {
        UnfoldConfig {
            lambda,
            energy_bound,
            omega,
            x,
            residual_tolerance: DEFAULT_RESIDUAL_TOLERANCE,
            max_peaks: None,
            max_fold: DEFAULT_MAX_FOLD,
            support_fraction: MODEL_SUPPORT_FRACTION,
            density_radius: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::usage(format!("{name} must be positive, got {v}")))
            }
        };
        pos(self.lambda, "lambda")?;
        pos(self.energy_bound, "energy_bound")?;
        pos(self.omega, "omega")?;
        pos(self.residual_tolerance, "residual_tolerance")?;
        if self.max_fold < 1 {
            return Err(Error::usage("max_fold must be at least 1"));
        }
        Ok(())
    }
}

/// Upper bound on the number of folded samples of any `f` with `||f|| <= M`:
/// `floor(lambda^-2 B M^2)`, the largest integer below the real bound.
pub fn peak_budget(cfg: &UnfoldConfig) -> Result<usize> {
    let un = Unfolder::new(cfg)?;
    Ok(un.budget)
}

fn budget_from(lambda: f64, upper: f64, m: f64) -> usize {
    (upper * m * m / (lambda * lambda) + 1e-9).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub recovered: BandlimitedSignal,
    pub fold_counts: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fold_counts_imag: Option<Vec<i64>>,
    /// Indices with a nonzero fold count.
    pub peak_set: Vec<usize>,
    /// `||(I - Pi)(samples + 2 lambda a)||`, distance to the sample range.
    pub residual: f64,
    pub tolerance: f64,
    pub energy: f64,
    /// The recovered signal exceeds the energy bound: another preimage may exist.
    pub ambiguous: bool,
    pub reduced_lower_bound: f64,
    /// `A_{X \ F}^{-1/2}`.
    pub lipschitz_estimate: f64,
    pub model_dim: usize,
    pub window_len: usize,
    pub density: Option<DensityReport>,
    pub warnings: Vec<String>,
}

impl RecoveryReport {
    pub fn peaks_used(&self) -> usize {
        self.peak_set.len()
    }
}

/// Precomputed operators for repeated unfolding on one configuration.
#[derive(Debug, Clone)]
pub struct Unfolder {
    cfg: UnfoldConfig,
    model: NyquistModel,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    /// Diagonal of `I - Pi`.
    diag: Vec<f64>,
    upper_bound: f64,
    budget: usize,
}

/// Sparse fold counts `(index, a_k)` with the remaining range residual.
type Solution = (Vec<(usize, i64)>, DVector<f64>);

struct SearchState<'a> {
    un: &'a Unfolder,
    y: &'a DVector<f64>,
    r0: DVector<f64>,
    tol: f64,
    nodes: usize,
    fallback: Option<Solution>,
}

/// A candidate support with its real least-squares residual.
struct Node {
    support: Vec<usize>,
    score: f64,
    residual: DVector<f64>,
}

impl Unfolder {
    pub fn new(cfg: &UnfoldConfig) -> Result<Self> {
        cfg.validate()?;
        let model = NyquistModel::inner(&cfg.x, cfg.omega, cfg.support_fraction)?;
        let e = model.sampling_matrix(cfg.x.points());
        if e.nrows() < e.ncols() {
            return Err(Error::usage("fewer samples than model dimensions"));
        }
        let fb = frame_bounds_on(cfg.x.points(), &model)?;
        if fb.lower <= 0.0 {
            return Err(Error::usage("sampling set does not determine the signal model"));
        }
        let qr = e.qr();
        let q = qr.q();
        let r = qr.r();
        let diag = (0..q.nrows())
            .map(|k| 1.0 - q.row(k).norm_squared())
            .collect();
        let budget = budget_from(cfg.lambda, fb.upper, cfg.energy_bound);
        Ok(Unfolder {
            cfg: cfg.clone(),
            model,
            q,
            r,
            diag,
            upper_bound: fb.upper,
            budget,
        })
    }

    pub fn model(&self) -> &NyquistModel {
        &self.model
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    pub fn config(&self) -> &UnfoldConfig {
        &self.cfg
    }

    fn complement(&self, z: &DVector<f64>) -> DVector<f64> {
        z - &self.q * (self.q.transpose() * z)
    }

    /// Fold counts for one real channel.
    fn search(&self, y: &DVector<f64>) -> Result<(Solution, bool)> {
        let tol = self.cfg.residual_tolerance * (1.0 + y.norm());
        let max_peaks = self.cfg.max_peaks.unwrap_or(self.budget);
        let mut st = SearchState {
            un: self,
            y,
            r0: self.complement(y),
            tol,
            nodes: 0,
            fallback: None,
        };
        if let Some(found) = st.beam(max_peaks)? {
            return Ok((found, false));
        }
        if let Some(found) = st.fallback {
            return Ok((found, true));
        }
        Err(Error::Infeasible(format!(
            "no fold counts on at most {} indices bring the samples within {:.3e} of the sample range \
             ({} nodes searched); the energy bound is likely violated",
            max_peaks, tol, st.nodes
        )))
    }

    fn coefficients(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let rhs = self.q.transpose() * z;
        self.r
            .solve_upper_triangular(&rhs)
            .ok_or_else(|| Error::numerical("singular least-squares system"))
    }

    fn energy_of(&self, c: &DVector<f64>) -> f64 {
        (self.model.omega * c.norm_squared()).sqrt()
    }

    pub fn unfold(&self, samples: &FoldedSamples) -> Result<RecoveryReport> {
        if samples.values.len() != self.cfg.x.len() {
            return Err(Error::usage(format!(
                "{} samples for a sampling set of {} points",
                samples.values.len(),
                self.cfg.x.len()
            )));
        }
        if samples.lambda != self.cfg.lambda {
            return Err(Error::usage("samples were folded with a different threshold"));
        }
        let two_l = 2.0 * self.cfg.lambda;
        let n = samples.values.len();
        let yr = DVector::from_iterator(n, samples.values.iter().map(|z| z.re));
        let ((ar, rr), amb_r) = self.search(&yr)?;
        let complex = samples.values.iter().any(|z| z.im != 0.0);
        let (ai, ri, amb_i) = if complex {
            let yi = DVector::from_iterator(n, samples.values.iter().map(|z| z.im));
            let ((a, r), amb) = self.search(&yi)?;
            (Some(a), Some(r), amb)
        } else {
            (None, None, false)
        };
        let dense = |a: &[(usize, i64)]| {
            let mut v = vec![0i64; n];
            for &(k, c) in a {
                v[k] = c;
            }
            v
        };
        let counts_r = dense(&ar);
        let counts_i = ai.as_ref().map(|a| dense(a));
        let corrected = |y: Vec<f64>, counts: &[i64]| {
            DVector::from_iterator(n, y.iter().zip(counts).map(|(v, &c)| v + two_l * c as f64))
        };
        let zr = corrected(samples.values.iter().map(|z| z.re).collect(), &counts_r);
        let cr = self.coefficients(&zr)?;
        let ci = match &counts_i {
            Some(ci) => Some(self.coefficients(&corrected(samples.values.iter().map(|z| z.im).collect(), ci))?),
            None => None,
        };
        let coeffs: Vec<Scalar> = (0..cr.len())
            .map(|j| Scalar::new(cr[j], ci.as_ref().map_or(0.0, |c| c[j])))
            .collect();
        let recovered = self.model.signal(&coeffs)?;
        let energy = (self.model.omega * coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
        let residual = match &ri {
            Some(ri) => (rr.norm_squared() + ri.norm_squared()).sqrt(),
            None => rr.norm(),
        };
        let mut peak_set: Vec<usize> = (0..n)
            .filter(|&k| counts_r[k] != 0 || counts_i.as_ref().is_some_and(|c| c[k] != 0))
            .collect();
        peak_set.sort_unstable();
        let reduced = self.cfg.x.without(&peak_set)?;
        let lower = frame_bounds_on(reduced.points(), &self.model)?.lower;
        let mut warnings = Vec::new();
        let ambiguous = amb_r || amb_i || energy > self.cfg.energy_bound * (1.0 + 1e-6);
        if ambiguous {
            warnings.push(format!(
                "recovered energy {energy:.6e} exceeds the bound {:.6e}; the preimage may not be unique",
                self.cfg.energy_bound
            ));
        }
        let density = self.density_check(&reduced, &mut warnings);
        let lipschitz = if lower > 0.0 { lower.powf(-0.5) } else { f64::INFINITY };
        if !lipschitz.is_finite() {
            warnings.push("reduced set has no positive lower frame bound".to_string());
        }
        Ok(RecoveryReport {
            recovered,
            fold_counts: counts_r,
            fold_counts_imag: counts_i,
            peak_set,
            residual,
            tolerance: self.cfg.residual_tolerance * (1.0 + yr.norm()),
            energy,
            ambiguous,
            reduced_lower_bound: lower,
            lipschitz_estimate: lipschitz,
            model_dim: self.model.dim(),
            window_len: n,
            density,
            warnings,
        })
    }

    fn density_check(&self, reduced: &SeparatedSet, warnings: &mut Vec<String>) -> Option<DensityReport> {
        let (lo, hi) = self.cfg.x.span();
        let span = hi - lo;
        let base = (4.0 / self.cfg.omega).min(span / 2.0);
        let rate_x = density_report(&self.cfg.x, base).ok()?.min_count_rate;
        let eps = rate_x - self.cfg.omega;
        if eps <= 0.0 {
            warnings.push(format!(
                "sampling set density {rate_x:.4} does not exceed the bandwidth {}",
                self.cfg.omega
            ));
        }
        let wanted = self.cfg.density_radius.unwrap_or_else(|| {
            let r = if eps > 0.0 {
                2.0 * self.upper_bound * self.cfg.energy_bound.powi(2) / (self.cfg.lambda.powi(2) * eps)
            } else {
                base
            };
            r.max(base)
        });
        let radius = wanted.min(span / 2.0);
        let rep = density_report(reduced, radius).ok()?;
        if !rep.exceeds(self.cfg.omega) {
            warnings.push(format!(
                "density of the set without folded samples is {:.4} at radius {radius:.3}, not above the bandwidth; stability degraded",
                rep.min_count_rate
            ));
        }
        Some(rep)
    }
}

impl SearchState<'_> {
    /// Level-wise beam search over supports of growing size.
    fn beam(&mut self, max_peaks: usize) -> Result<Option<Solution>> {
        if let Some(found) = self.accept(&[], &[])? {
            return Ok(Some(found));
        }
        let mut level = vec![Node {
            support: Vec::new(),
            score: self.r0.norm(),
            residual: self.r0.clone(),
        }];
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        for _ in 0..max_peaks {
            let mut next: Vec<Node> = Vec::new();
            for node in &level {
                for k in self.ranked(node) {
                    let mut support = node.support.clone();
                    support.push(k);
                    support.sort_unstable();
                    if !seen.insert(support.clone()) {
                        continue;
                    }
                    self.nodes += 1;
                    let Some((real, residual)) = self.least_squares(&support) else {
                        continue;
                    };
                    let counts = self.round(&real);
                    if let Some(found) = self.accept(&support, &counts)? {
                        return Ok(Some(found));
                    }
                    next.push(Node {
                        score: residual.norm(),
                        support,
                        residual,
                    });
                }
            }
            if next.is_empty() || self.nodes >= NODE_BUDGET {
                break;
            }
            next.sort_by(|a, b| a.score.total_cmp(&b.score).then_with(|| a.support.cmp(&b.support)));
            next.truncate(BEAM_WIDTH);
            level = next;
        }
        Ok(None)
    }

    /// Indices outside the support ranked by normalized correlation with the residual.
    fn ranked(&self, node: &Node) -> Vec<usize> {
        let mut c: Vec<(f64, usize)> = (0..node.residual.len())
            .filter(|k| !node.support.contains(k) && self.un.diag[*k] > 1e-12)
            .map(|k| (node.residual[k].abs() / self.un.diag[k].sqrt(), k))
            .collect();
        c.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        c.truncate(EXPANSION);
        c.into_iter().map(|(_, k)| k).collect()
    }

    fn columns(&self, support: &[usize]) -> DMatrix<f64> {
        let n = self.r0.len();
        let two_l = 2.0 * self.un.cfg.lambda;
        let mut c = DMatrix::zeros(n, support.len());
        for (j, &k) in support.iter().enumerate() {
            let mut e = DVector::zeros(n);
            e[k] = two_l;
            c.set_column(j, &self.un.complement(&e));
        }
        c
    }

    /// Real fold amounts minimizing `||r0 + C a||` on a support.
    fn least_squares(&self, support: &[usize]) -> Option<(DVector<f64>, DVector<f64>)> {
        let c = self.columns(support);
        let a = c.clone().svd(true, true).solve(&(-&self.r0), 1e-12).ok()?;
        let residual = &self.r0 + &c * &a;
        Some((a, residual))
    }

    fn round(&self, real: &DVector<f64>) -> Vec<i64> {
        let k = self.un.cfg.max_fold as f64;
        real.iter().map(|v| v.round().clamp(-k, k) as i64).collect()
    }

    fn accept(&mut self, support: &[usize], counts: &[i64]) -> Result<Option<Solution>> {
        if counts.contains(&0) {
            return Ok(None);
        }
        let pairs: Vec<(usize, i64)> = support.iter().copied().zip(counts.iter().copied()).collect();
        let mut z = self.y.clone();
        for &(k, v) in &pairs {
            z[k] += 2.0 * self.un.cfg.lambda * v as f64;
        }
        let r = self.un.complement(&z);
        if r.norm() > self.tol {
            return Ok(None);
        }
        let c = self.un.coefficients(&z)?;
        if self.un.energy_of(&c) <= self.un.cfg.energy_bound * (1.0 + 1e-6) {
            return Ok(Some((pairs, r)));
        }
        if self.fallback.is_none() {
            self.fallback = Some((pairs, r));
        }
        Ok(None)
    }
}

pub fn unfold(samples: &FoldedSamples, cfg: &UnfoldConfig) -> Result<RecoveryReport> {
    Unfolder::new(cfg)?.unfold(samples)
}

/// Number of adjacent model atoms carrying a random test signal.
pub const TEST_CLUSTER: usize = 3;

/// A random signal in the model with `||f|| = M u`, `u ~ U(0.6, 1]`, built
/// from Gaussian coefficients on a random run of adjacent atoms.
pub fn random_signal<R: Rng>(model: &NyquistModel, energy_bound: f64, rng: &mut R) -> Result<(BandlimitedSignal, Vec<f64>)> {
    let m = model.dim();
    let width = TEST_CLUSTER.min(m);
    let start = rng.random_range(0..=(m - width));
    let mut c = vec![0.0; m];
    for v in c.iter_mut().skip(start).take(width) {
        *v = rng.sample(StandardNormal);
    }
    let norm = (model.omega * c.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let target = energy_bound * rng.random_range(0.6..=1.0);
    let scale = if norm > 0.0 { target / norm } else { 0.0 };
    c.iter_mut().for_each(|v| *v *= scale);
    let coeffs: Vec<Scalar> = c.iter().map(|&v| Scalar::new(v, 0.0)).collect();
    Ok((model.signal(&coeffs)?, c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Recovered,
    Ambiguous,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub trial: usize,
    pub toral_dist: f64,
    /// `||f_hat - f|| / ||f||`.
    pub l2_error: f64,
    /// `||f_hat - g|| / toral_dist`.
    pub ratio: f64,
    /// `A_{X \ F_h}^{-1/2}` for `h = f_hat - g`, where `F_h` are the indices
    /// at which `h` itself folds.
    pub lipschitz_estimate: f64,
    pub peaks_used: usize,
    pub status: TrialStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityTable {
    pub seed: u64,
    pub rows: Vec<StabilityRow>,
}

impl StabilityTable {
    pub fn exact_fraction(&self) -> f64 {
        let ok = self
            .rows
            .iter()
            .filter(|r| r.status == TrialStatus::Recovered && r.l2_error < EXACT_RELATIVE_ERROR)
            .count();
        ok as f64 / self.rows.len() as f64
    }

    /// Trials reported as recovered whose error is not small.
    pub fn silent_failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status == TrialStatus::Recovered && r.l2_error.is_nan() || r.l2_error >= EXACT_RELATIVE_ERROR)
            .count()
    }

    /// Largest `ratio / lipschitz_estimate` over finite rows.
    pub fn worst_ratio_excess(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.ratio.is_finite() && r.lipschitz_estimate.is_finite())
            .map(|r| r.ratio / r.lipschitz_estimate)
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "trial,toral_dist,l2_error,ratio,lipschitz_estimate,peaks_used,status")?;
        for r in &self.rows {
            let status = match r.status {
                TrialStatus::Recovered => "recovered",
                TrialStatus::Ambiguous => "ambiguous",
                TrialStatus::Failed => "failed",
            };
            writeln!(
                w,
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{},{}",
                r.trial, r.toral_dist, r.l2_error, r.ratio, r.lipschitz_estimate, r.peaks_used, status
            )?;
        }
        Ok(())
    }
}

fn trial(un: &Unfolder, seed: u64, index: usize) -> Result<StabilityRow> {
    let cfg = un.config();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let (f, cf) = random_signal(un.model(), cfg.energy_bound, &mut rng)?;
    let (g, cg) = random_signal(un.model(), cfg.energy_bound, &mut rng)?;
    let mf = fold_samples(&f, &cfg.x, cfg.lambda)?;
    let mg = fold_samples(&g, &cfg.x, cfg.lambda)?;
    let toral = toral_seq_dist(&mf.values, &mg.values, cfg.lambda)?;
    let omega = un.model().omega;
    let f_norm = (omega * cf.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let (status, chat, peaks) = match un.unfold(&mf) {
        Ok(rep) => {
            let c: Vec<f64> = rep.recovered.atoms().iter().map(|a| a.coeff.re).collect();
            let st = if rep.ambiguous { TrialStatus::Ambiguous } else { TrialStatus::Recovered };
            (st, Some(c), rep.peaks_used())
        }
        Err(Error::Infeasible(_)) | Err(Error::Numerical(_)) => (TrialStatus::Failed, None, 0),
        Err(e) => return Err(e),
    };
    let (l2_error, ratio, lipschitz) = match chat {
        Some(ch) => {
            let err = (omega * ch.iter().zip(&cf).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).sqrt();
            let h: Vec<f64> = ch.iter().zip(&cg).map(|(a, b)| a - b).collect();
            let h_norm = (omega * h.iter().map(|v| v * v).sum::<f64>()).sqrt();
            let e = un.model().sampling_matrix(cfg.x.points());
            let hs = e * DVector::from_column_slice(&h);
            let folded: Vec<usize> = (0..hs.len())
                .filter(|&k| !(-cfg.lambda..cfg.lambda).contains(&hs[k]))
                .collect();
            let reduced = cfg.x.without(&folded)?;
            let lower = frame_bounds_on(reduced.points(), un.model())?.lower;
            let lip = if lower > 0.0 { lower.powf(-0.5) } else { f64::INFINITY };
            (err / f_norm, h_norm / toral, lip)
        }
        None => (f64::NAN, f64::NAN, f64::NAN),
    };
    Ok(StabilityRow {
        trial: index,
        toral_dist: toral,
        l2_error,
        ratio,
        lipschitz_estimate: lipschitz,
        peaks_used: peaks,
        status,
    })
}

/// Random pairs in the energy ball: unfold one, compare with the other.
pub fn stability_probe(cfg: &UnfoldConfig, trials: usize, seed: u64) -> Result<StabilityTable> {
    if trials == 0 {
        return Err(Error::usage("stability probe needs at least one trial"));
    }
    let un = Unfolder::new(cfg)?;
    let rows = (0..trials)
        .into_par_iter()
        .map(|i| trial(&un, seed, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityTable { seed, rows })
}
