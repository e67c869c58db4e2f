//! Shortest vectors of the lattice `Z^N` under the form `<Q_{1-alpha,N} n, n>`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::enumerate::{enumerate, factor};
use super::{check_alpha, residual_quadratic_form, Construction, IntegerCertificate};
use crate::error::{Error, Result};
use crate::precise::{complement_sinc_row, FixedCtx};
use crate::prolate::precise_pivots;

pub const MAX_BRUTEFORCE_DIM: usize = 14;
pub const MAX_BRUTEFORCE_BOUND: i64 = 3;
pub const MAX_LLL_DIM: usize = 512;
pub const DEFAULT_LLL_DELTA: f64 = 0.75;
const REORTHOGONALIZE_EVERY: usize = 32;
const MAX_LLL_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SvpMethod {
    /// Exhaustive search over `[-bound, bound]^N`.
    Bruteforce { bound: i64 },
    /// Shortest vector of an LLL-reduced basis.
    Lll { delta: f64 },
}

fn toeplitz(row: &[BigInt]) -> Vec<Vec<BigInt>> {
    let n = row.len();
    (0..n)
        .map(|i| (0..n).map(|j| row[(i as i64 - j as i64).unsigned_abs() as usize].clone()).collect())
        .collect()
}

pub fn svp_certificate(alpha: f64, n: usize, method: SvpMethod) -> Result<IntegerCertificate> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::usage("lattice dimension must be at least 1"));
    }
    match method {
        SvpMethod::Bruteforce { bound } => bruteforce(alpha, n, bound),
        SvpMethod::Lll { delta } => lll(alpha, n, delta),
    }
}

fn canonical_sign(v: &mut [i128]) {
    if let Some(first) = v.iter().find(|&&c| c != 0) {
        if *first < 0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
}

fn bruteforce(alpha: f64, n: usize, bound: i64) -> Result<IntegerCertificate> {
    if n > MAX_BRUTEFORCE_DIM {
        return Err(Error::usage(format!(
            "bruteforce dimension {n} exceeds {MAX_BRUTEFORCE_DIM}"
        )));
    }
    if !(1..=MAX_BRUTEFORCE_BOUND).contains(&bound) {
        return Err(Error::usage(format!(
            "bruteforce bound must lie in 1..={MAX_BRUTEFORCE_BOUND}, got {bound}"
        )));
    }
    bruteforce_unchecked(alpha, n, bound)
}

/// Exhaustive search without the desk-scale limits, for tests that need a
/// wider box.
pub(crate) fn bruteforce_unchecked(alpha: f64, n: usize, bound: i64) -> Result<IntegerCertificate> {
    let f = factor(|ctx| toeplitz(&complement_sinc_row(ctx, alpha, n)), 256)?;
    let slack = 1.0 + 1e-6;
    let mut best = f64::INFINITY;
    let mut finalists: Vec<(f64, Vec<i64>)> = Vec::new();
    enumerate(&f, bound, (1.0 - alpha) * slack, |x, v| {
        if v <= best * slack {
            best = best.min(v);
            finalists.push((v, x.to_vec()));
            finalists.retain(|(w, _)| *w <= best * slack);
        }
        best * slack
    });
    let mut chosen: Option<(f64, Vec<i128>)> = None;
    for (_, x) in finalists {
        let mut v: Vec<i128> = x.iter().map(|&c| c as i128).collect();
        canonical_sign(&mut v);
        let r = residual_quadratic_form(alpha, &v)?;
        if chosen.as_ref().is_none_or(|c| r < c.0) {
            chosen = Some((r, v));
        }
    }
    let (_, v) = chosen.ok_or_else(|| Error::numerical("enumeration found no lattice vector"))?;
    IntegerCertificate::new(alpha, v, Construction::SvpBruteforce { dim: n, bound })
}

struct Lll {
    ctx: FixedCtx,
    g: Vec<Vec<BigInt>>,
    basis: Vec<Vec<i128>>,
    mu: Vec<Vec<BigInt>>,
    b: Vec<BigInt>,
    half: BigInt,
}

impl Lll {
    fn gso_row(&mut self, k: usize) -> Result<()> {
        for j in 0..k {
            let mut s = self.g[k][j].clone();
            for i in 0..j {
                s -= self.ctx.mul(&self.ctx.mul(&self.mu[j][i], &self.mu[k][i]), &self.b[i]);
            }
            self.mu[k][j] = self.ctx.div(&s, &self.b[j]);
        }
        let mut s = self.g[k][k].clone();
        for j in 0..k {
            s -= self.ctx.mul(&self.ctx.mul(&self.mu[k][j], &self.mu[k][j]), &self.b[j]);
        }
        if !s.is_positive() {
            return Err(Error::numerical(format!(
                "Gram-Schmidt norm {k} not positive at {} bits",
                self.ctx.bits()
            )));
        }
        self.b[k] = s;
        Ok(())
    }

    fn reduce(&mut self, k: usize, l: usize) -> Result<()> {
        if self.mu[k][l].abs() <= self.half {
            return Ok(());
        }
        let q_big: BigInt = (&self.mu[k][l] + &self.half) >> self.ctx.bits();
        let q = q_big
            .to_i128()
            .ok_or_else(|| Error::numerical("size-reduction multiplier overflow"))?;
        let n = self.basis.len();
        for t in 0..n {
            let v = self.basis[l][t]
                .checked_mul(q)
                .and_then(|p| self.basis[k][t].checked_sub(p))
                .ok_or_else(|| Error::numerical("basis entry overflow"))?;
            self.basis[k][t] = v;
        }
        let gkl = self.g[k][l].clone();
        let gll = self.g[l][l].clone();
        for j in 0..n {
            if j != k {
                let v = &self.g[k][j] - &self.g[l][j] * q;
                self.g[k][j] = v.clone();
                self.g[j][k] = v;
            }
        }
        self.g[k][k] = &self.g[k][k] - gkl * (2 * q) + gll * (q * q);
        self.mu[k][l] -= self.ctx.from_int(q);
        for i in 0..l {
            let d = &self.mu[l][i] * q;
            self.mu[k][i] -= d;
        }
        Ok(())
    }

    fn swap(&mut self, k: usize, kmax: usize) {
        self.basis.swap(k, k - 1);
        self.g.swap(k, k - 1);
        for row in self.g.iter_mut() {
            row.swap(k, k - 1);
        }
        for j in 0..k - 1 {
            let t = self.mu[k][j].clone();
            self.mu[k][j] = self.mu[k - 1][j].clone();
            self.mu[k - 1][j] = t;
        }
        let m = self.mu[k][k - 1].clone();
        let bnew = &self.b[k] + self.ctx.mul(&self.ctx.mul(&m, &m), &self.b[k - 1]);
        self.mu[k][k - 1] = self.ctx.div(&self.ctx.mul(&m, &self.b[k - 1]), &bnew);
        self.b[k] = self.ctx.div(&self.ctx.mul(&self.b[k - 1], &self.b[k]), &bnew);
        self.b[k - 1] = bnew;
        for i in (k + 1)..=kmax {
            let t = self.mu[i][k].clone();
            self.mu[i][k] = &self.mu[i][k - 1] - self.ctx.mul(&m, &t);
            self.mu[i][k - 1] = t + self.ctx.mul(&self.mu[k][k - 1], &self.mu[i][k]);
        }
    }
}

fn lll(alpha: f64, n: usize, delta: f64) -> Result<IntegerCertificate> {
    if n > MAX_LLL_DIM {
        return Err(Error::usage(format!("LLL dimension {n} exceeds {MAX_LLL_DIM}")));
    }
    if !(delta > 0.25 && delta < 1.0) {
        return Err(Error::usage(format!("LLL parameter must lie in (1/4, 1), got {delta}")));
    }
    let pp = precise_pivots(1.0 - alpha, n)?;
    let bits = 2 * (-pp.min_log2()).max(0.0).ceil() as u32 + 4 * n as u32 + 128;
    let ctx = FixedCtx::new(bits);
    let g = toeplitz(&complement_sinc_row(&ctx, alpha, n));
    let basis: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1 } else { 0 }).collect())
        .collect();
    let zero = BigInt::from(0);
    let half = ctx.one() >> 1;
    let delta_fx = ctx.from_f64(delta);
    let mut st = Lll {
        mu: vec![vec![zero.clone(); n]; n],
        b: vec![zero; n],
        ctx,
        g,
        basis,
        half,
    };
    st.gso_row(0)?;
    let (mut k, mut kmax, mut swaps, mut steps) = (1usize, 0usize, 0usize, 0usize);
    while k < n {
        steps += 1;
        if steps > MAX_LLL_STEPS {
            return Err(Error::numerical("LLL exceeded its step budget"));
        }
        if k > kmax {
            kmax = k;
            st.gso_row(k)?;
        }
        st.reduce(k, k - 1)?;
        let m2 = st.ctx.mul(&st.mu[k][k - 1], &st.mu[k][k - 1]);
        let lovasz = st.ctx.mul(&(&delta_fx - m2), &st.b[k - 1]);
        if st.b[k] < lovasz {
            st.swap(k, kmax);
            swaps += 1;
            if swaps % REORTHOGONALIZE_EVERY == 0 {
                for i in 0..=kmax {
                    st.gso_row(i)?;
                }
            }
            k = (k - 1).max(1);
        } else {
            for l in (0..k - 1).rev() {
                st.reduce(k, l)?;
            }
            k += 1;
        }
    }
    let best = (0..n)
        .min_by(|&i, &j| st.g[i][i].cmp(&st.g[j][j]))
        .expect("nonempty basis");
    let mut v = st.basis[best].clone();
    canonical_sign(&mut v);
    IntegerCertificate::new(alpha, v, Construction::SvpLll { dim: n, delta })
}
