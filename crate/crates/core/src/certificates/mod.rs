//! Integer certificates of instability.
//!
//! A certificate is a nonzero integer sequence `n` whose spectrum is small on
//! `[-(1-alpha)/2, (1-alpha)/2]`. Its residual `||P_{(1-alpha)Z} n||` bounds how
//! close the lattice `alpha Z` comes to admitting a bandlimited function with
//! integer samples, which is what makes folded sampling unstable.

mod binomial;
mod chebyshev;
mod critical;
mod enumerate;
mod svp;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precise::{complement_sinc_row, FixedCtx};
use crate::quadrature::{panels_for_trig, GaussLegendre, PANEL_ORDER};

pub use binomial::{binomial_bound, binomial_certificate, binomial_coefficients, binomial_residual_integral, MAX_BINOMIAL_ORDER};
pub use chebyshev::{chebyshev_certificate, chebyshev_expand, chebyshev_interval, chebyshev_sup, MAX_CHEBYSHEV_DEGREE};
pub use critical::{critical_function, critical_function_with_guard, instability_witness, nyquist_witness, CriticalFunction, NyquistWitness, WitnessSearch, WitnessTrial};
pub use svp::{svp_certificate, SvpMethod, DEFAULT_LLL_DELTA, MAX_BRUTEFORCE_BOUND, MAX_BRUTEFORCE_DIM, MAX_LLL_DIM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Construction {
    Binomial {
        order: usize,
    },
    Chebyshev {
        degree: usize,
        coeff_bound: i64,
        /// Monomial coefficients, constant term first.
        polynomial: Vec<i64>,
        sup_norm: f64,
    },
    SvpBruteforce {
        dim: usize,
        bound: i64,
    },
    SvpLll {
        dim: usize,
        delta: f64,
    },
    Supplied,
}

impl Construction {
    pub fn label(&self) -> String {
        match self {
            Construction::Binomial { order } => format!("binomial({order})"),
            Construction::Chebyshev { degree, .. } => format!("chebyshev({degree})"),
            Construction::SvpBruteforce { bound, .. } => format!("svp_bruteforce({bound})"),
            Construction::SvpLll { delta, .. } => format!("svp_lll({delta})"),
            Construction::Supplied => "supplied".to_string(),
        }
    }

    /// The size parameter `N` of the construction.
    pub fn order(&self, len: usize) -> usize {
        match self {
            Construction::Binomial { order } => *order,
            Construction::Chebyshev { degree, .. } => *degree,
            Construction::SvpBruteforce { dim, .. } | Construction::SvpLll { dim, .. } => *dim,
            Construction::Supplied => len,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegerCertificate {
    alpha: f64,
    coeffs: Vec<i128>,
    imag: Option<Vec<i128>>,
    residual: f64,
    construction: Construction,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::usage(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

impl IntegerCertificate {
    /// Real certificate; the residual is computed from scratch.
    pub fn new(alpha: f64, coeffs: Vec<i128>, construction: Construction) -> Result<Self> {
        Self::build(alpha, coeffs, None, construction)
    }

    /// Gaussian-integer certificate `re + i im`.
    pub fn gaussian(alpha: f64, re: Vec<i128>, im: Vec<i128>, construction: Construction) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::domain("real and imaginary parts differ in length"));
        }
        Self::build(alpha, re, Some(im), construction)
    }

    fn build(alpha: f64, coeffs: Vec<i128>, imag: Option<Vec<i128>>, construction: Construction) -> Result<Self> {
        check_alpha(alpha)?;
        let nonzero = coeffs.iter().any(|&c| c != 0) || imag.as_ref().is_some_and(|v| v.iter().any(|&c| c != 0));
        if !nonzero {
            return Err(Error::domain("certificate sequence must be nonzero"));
        }
        let mut r2 = residual_quadratic_form(alpha, &coeffs)?.powi(2);
        if let Some(im) = &imag {
            if im.iter().any(|&c| c != 0) {
                r2 += residual_quadratic_form(alpha, im)?.powi(2);
            }
        }
        Ok(IntegerCertificate {
            alpha,
            coeffs,
            imag,
            residual: r2.sqrt(),
            construction,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn imag(&self) -> Option<&[i128]> {
        self.imag.as_deref()
    }

    pub fn is_real(&self) -> bool {
        self.imag.as_ref().is_none_or(|v| v.iter().all(|&c| c == 0))
    }

    /// `||P_{(1-alpha)Z} n||`, equal to the distance from the sample sequence
    /// to the sequences with spectrum in `[-alpha/2, alpha/2]`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn construction(&self) -> &Construction {
        &self.construction
    }

    pub fn order(&self) -> usize {
        self.construction.order(self.coeffs.len())
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Residual recomputed by integrating `|n_hat|^2` over the band.
    pub fn residual_by_band_energy(&self) -> Result<f64> {
        let mut r2 = residual_band_energy(self.alpha, &self.coeffs, self.residual)?.powi(2);
        if let Some(im) = &self.imag {
            if im.iter().any(|&c| c != 0) {
                r2 += residual_band_energy(self.alpha, im, self.residual)?.powi(2);
            }
        }
        Ok(r2.sqrt())
    }

    /// `m_k = (-1)^k n_k`, whose spectrum is concentrated in `[-alpha/2, alpha/2]`.
    pub fn sample_sequence(&self) -> Vec<i128> {
        alternate(&self.coeffs)
    }

    pub fn norm_squared(&self) -> f64 {
        let sq = |v: &[i128]| -> BigInt { v.iter().map(|&c| BigInt::from(c) * c).sum() };
        let mut s = sq(&self.coeffs);
        if let Some(im) = &self.imag {
            s += sq(im);
        }
        crate::precise::to_f64_scaled(&s, 0)
    }

    /// `||P_{alpha Z} m||`, by Pythagoras from the residual.
    pub fn sample_norm(&self) -> f64 {
        (self.norm_squared() - self.residual * self.residual).max(0.0).sqrt()
    }

    /// Zero-padded copy in a window of `len` entries; the residual is unchanged.
    pub fn embedded(&self, len: usize) -> Result<Self> {
        if len < self.coeffs.len() {
            return Err(Error::domain("window shorter than the certificate"));
        }
        let mut out = self.clone();
        out.coeffs.resize(len, 0);
        if let Some(im) = &mut out.imag {
            im.resize(len, 0);
        }
        Ok(out)
    }

    pub fn record(&self) -> CertificateRecord {
        CertificateRecord {
            alpha: self.alpha,
            construction: self.construction.clone(),
            n: self.order(),
            coeffs: self.coeffs.clone(),
            imag: self.imag.clone(),
            residual: self.residual,
            energy: self.alpha.sqrt() * self.sample_norm(),
            folded_norm: None,
            lambda: None,
        }
    }
}

pub(crate) fn alternate(v: &[i128]) -> Vec<i128> {
    v.iter()
        .enumerate()
        .map(|(k, &c)| if k % 2 == 1 { -c } else { c })
        .collect()
}

/// Serialized form of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateRecord {
    pub alpha: f64,
    pub construction: Construction,
    #[serde(rename = "N")]
    pub n: usize,
    pub coeffs: Vec<i128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<i128>>,
    pub residual: f64,
    /// `||f_N||` of the critical function at unit threshold scaling.
    pub energy: f64,
    pub folded_norm: Option<f64>,
    pub lambda: Option<f64>,
}

const MAX_BITS: u32 = 1 << 16;

fn autocorrelation(c: &[i128]) -> Vec<BigInt> {
    let n = c.len();
    (0..n)
        .map(|d| (0..n - d).map(|j| BigInt::from(c[j]) * c[j + d]).sum())
        .collect()
}

fn quadratic_form_at(alpha: f64, acf: &[BigInt], bits: u32) -> f64 {
    let ctx = FixedCtx::new(bits);
    let row = complement_sinc_row(&ctx, alpha, acf.len());
    let mut s = &row[0] * &acf[0];
    for d in 1..acf.len() {
        s += (&row[d] * &acf[d]) << 1;
    }
    ctx.to_f64(&s)
}

/// `||P_{(1-alpha)Z} c||` through `<Q_{1-alpha} c, c>` in fixed point, with the
/// precision raised until two runs 64 bits apart agree.
pub fn residual_quadratic_form(alpha: f64, c: &[i128]) -> Result<f64> {
    check_alpha(alpha)?;
    if c.iter().all(|&v| v == 0) {
        return Ok(0.0);
    }
    let acf = autocorrelation(c);
    let mass: BigInt = acf.iter().map(|a| a.abs()).sum();
    let mut bits = 96 + mass.bits() as u32;
    while bits <= MAX_BITS {
        let a = quadratic_form_at(alpha, &acf, bits);
        let b = quadratic_form_at(alpha, &acf, bits + 64);
        if b > 0.0 && (a - b).abs() <= 1e-14 * b {
            return Ok(b.sqrt());
        }
        bits *= 2;
    }
    Err(Error::numerical("quadratic-form residual did not stabilise"))
}

/// `sqrt(int_{-(1-alpha)/2}^{(1-alpha)/2} |c_hat(t)|^2 dt)` with `c_hat`
/// evaluated in fixed point at Gauss-Legendre nodes. `scale_hint` is the
/// expected size of the result and sets the working precision.
pub fn residual_band_energy(alpha: f64, c: &[i128], scale_hint: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if c.iter().all(|&v| v == 0) {
        return Ok(0.0);
    }
    let w = 0.5 * (1.0 - alpha);
    let l1: f64 = c.iter().map(|&v| (v as f64).abs()).sum();
    let hint = if scale_hint > 0.0 { scale_hint } else { 1.0 };
    let need = (l1 * c.len() as f64 / hint.min(1.0)).log2().max(0.0);
    let bits = 64 + need.ceil() as u32;
    let ctx = FixedCtx::new(bits);
    let coeffs: Vec<BigInt> = c.iter().map(|&v| ctx.from_int(v)).collect();
    let rule = GaussLegendre::new(PANEL_ORDER);
    let nodes = rule.composite(0.0, w, panels_for_trig(c.len(), w));
    let values: Vec<f64> = nodes
        .par_iter()
        .map(|&(t, wt)| {
            let (s, co) = ctx.sin_cos_pi(2.0 * t);
            let (zr, zi) = (co, -s);
            let mut ar = BigInt::zero();
            let mut ai = BigInt::zero();
            for ck in coeffs.iter().rev() {
                let nr = ctx.mul(&ar, &zr) - ctx.mul(&ai, &zi) + ck;
                let ni = ctx.mul(&ar, &zi) + ctx.mul(&ai, &zr);
                ar = nr;
                ai = ni;
            }
            let (fr, fi) = (ctx.to_f64(&ar), ctx.to_f64(&ai));
            wt * (fr * fr + fi * fi)
        })
        .collect();
    let half: f64 = values.iter().sum();
    Ok((2.0 * half).sqrt())
}

/// Which constructions `delta_estimate` tries at each size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstructionKind {
    Binomial,
    Chebyshev { coeff_bound: i64 },
    SvpBruteforce { bound: i64 },
    SvpLll { delta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaPoint {
    #[serde(rename = "N")]
    pub n: usize,
    /// Smallest residual over all windows of at most `N + 1` entries seen so far.
    pub best_residual: f64,
    /// Smallest residual among certificates built at this size.
    pub residual_at_n: f64,
    pub construction: String,
}

/// Build the certificate of a given kind fitting in a window of `n + 1` entries.
pub fn certificate_for(alpha: f64, n: usize, kind: ConstructionKind) -> Result<IntegerCertificate> {
    match kind {
        ConstructionKind::Binomial => binomial_certificate(n, alpha),
        ConstructionKind::Chebyshev { coeff_bound } => chebyshev_certificate((n / 2).max(1), alpha, coeff_bound),
        ConstructionKind::SvpBruteforce { bound } => svp_certificate(alpha, n + 1, SvpMethod::Bruteforce { bound }),
        ConstructionKind::SvpLll { delta } => svp_certificate(alpha, n + 1, SvpMethod::Lll { delta }),
    }
}

/// Best residual per size, made non-increasing by carrying smaller windows
/// forward (a zero-padded certificate keeps its residual).
pub fn delta_estimate(alpha: f64, schedule: &[usize], kinds: &[ConstructionKind]) -> Result<Vec<DeltaPoint>> {
    check_alpha(alpha)?;
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::usage("schedule must be strictly increasing"));
    }
    if schedule.first() == Some(&0) {
        return Err(Error::usage("schedule entries must be at least 1"));
    }
    if kinds.is_empty() {
        return Err(Error::usage("no constructions enabled"));
    }
    let per_n: Vec<(f64, String)> = schedule
        .par_iter()
        .map(|&n| {
            let mut best: Option<(f64, String)> = None;
            for &k in kinds {
                let c = certificate_for(alpha, n, k)?;
                if best.as_ref().is_none_or(|b| c.residual() < b.0) {
                    best = Some((c.residual(), c.construction().label()));
                }
            }
            Ok(best.expect("at least one construction"))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(schedule.len());
    let mut running = f64::INFINITY;
    let mut label = String::new();
    for (&n, (r, l)) in schedule.iter().zip(per_n) {
        if r < running {
            running = r;
            label = l;
        }
        out.push(DeltaPoint {
            n,
            best_residual: running,
            residual_at_n: r,
            construction: label.clone(),
        });
    }
    Ok(out)
}
