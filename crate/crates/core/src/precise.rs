//! Binary fixed-point arithmetic on top of `num-bigint`.
//!
//! A value `x` is carried as the integer `round(x * 2^bits)`. Precision is
//! absolute, so callers pick `bits` from the smallest quantity they need to
//! resolve. Only the handful of operations needed by the prolate and
//! certificate code are provided.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct FixedCtx {
    bits: u32,
    one: BigInt,
    pi: BigInt,
}

impl FixedCtx {
    pub fn new(bits: u32) -> Self {
        let one = BigInt::one() << bits;
        let pi = machin_pi(bits);
        FixedCtx { bits, one, pi }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn one(&self) -> BigInt {
        self.one.clone()
    }

    pub fn pi(&self) -> &BigInt {
        &self.pi
    }

    pub fn from_int<T: Into<BigInt>>(&self, v: T) -> BigInt {
        v.into() << self.bits
    }

    /// Exact conversion whenever the f64 has no bits below `2^-bits`.
    pub fn from_f64(&self, x: f64) -> BigInt {
        let (mant, exp) = decompose(x);
        shift_round(mant, exp + self.bits as i64)
    }

    pub fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        shift_round(a * b, -(self.bits as i64))
    }

    pub fn mul_int(&self, a: &BigInt, k: i64) -> BigInt {
        a * k
    }

    pub fn div(&self, a: &BigInt, b: &BigInt) -> BigInt {
        let num: BigInt = a << self.bits;
        round_div(&num, b)
    }

    pub fn div_int(&self, a: &BigInt, k: i64) -> BigInt {
        round_div(a, &BigInt::from(k))
    }

    pub fn sqrt(&self, a: &BigInt) -> BigInt {
        if !a.is_positive() {
            return BigInt::zero();
        }
        let scaled: BigInt = a << self.bits;
        scaled.sqrt()
    }

    pub fn to_f64(&self, a: &BigInt) -> f64 {
        to_f64_scaled(a, self.bits as i64)
    }

    /// Natural logarithm of a strictly positive value, returned in f64.
    pub fn ln(&self, a: &BigInt) -> Option<f64> {
        if !a.is_positive() {
            return None;
        }
        let nb = a.bits() as i64;
        let shift = (nb - 60).max(0);
        let top = (a >> shift as usize).to_f64()?;
        Some(top.ln() + (shift - self.bits as i64) as f64 * std::f64::consts::LN_2)
    }

    /// `(sin x, cos x)` by Taylor series; intended for `|x| <= 4`.
    pub fn sin_cos(&self, x: &BigInt) -> (BigInt, BigInt) {
        let guard = 16;
        let ctx = FixedCtx {
            bits: self.bits + guard,
            one: BigInt::one() << (self.bits + guard),
            pi: BigInt::zero(),
        };
        let xg: BigInt = x << guard;
        let x2 = ctx.mul(&xg, &xg);
        let mut sin = xg.clone();
        let mut cos = ctx.one();
        let mut term_s = xg;
        let mut term_c = ctx.one();
        let mut k: i64 = 1;
        loop {
            term_c = -ctx.div_int(&ctx.mul(&term_c, &x2), (2 * k - 1) * (2 * k));
            term_s = -ctx.div_int(&ctx.mul(&term_s, &x2), (2 * k) * (2 * k + 1));
            if term_c.is_zero() && term_s.is_zero() {
                break;
            }
            cos += &term_c;
            sin += &term_s;
            k += 1;
        }
        (shift_round(sin, -(guard as i64)), shift_round(cos, -(guard as i64)))
    }

    /// `(sin(pi*v), cos(pi*v))` for a dyadic rational `v = numer * 2^exp2`,
    /// with the period reduction done exactly.
    pub fn sin_cos_pi_dyadic(&self, numer: &BigInt, exp2: i64) -> (BigInt, BigInt) {
        if exp2 >= 0 {
            let v: BigInt = numer << exp2 as usize;
            let odd = v.is_odd();
            let c = if odd { -self.one() } else { self.one() };
            return (BigInt::zero(), c);
        }
        let den_bits = (-exp2) as usize;
        let one_d = BigInt::one() << den_bits;
        let two_d: BigInt = &one_d << 1;
        let mut u = numer.mod_floor(&two_d);
        if u > one_d {
            u -= &two_d;
        }
        let half_d: BigInt = &one_d >> 1;
        let (w, flip) = if u > half_d {
            (&one_d - &u, true)
        } else if u < -&half_d {
            (-&one_d - &u, true)
        } else {
            (u, false)
        };
        let wf = shift_round(w, self.bits as i64 + exp2);
        let (s, c) = self.sin_cos(&self.mul(&wf, &self.pi));
        if flip {
            (s, -c)
        } else {
            (s, c)
        }
    }

    /// `(sin(pi*x), cos(pi*x))` for an f64 argument, exactly reduced.
    pub fn sin_cos_pi(&self, x: f64) -> (BigInt, BigInt) {
        let (mant, exp) = decompose(x);
        self.sin_cos_pi_dyadic(&mant, exp)
    }

    /// `sin(pi * alpha * d)` with `alpha * d` reduced exactly.
    pub fn sin_pi_mul(&self, alpha: f64, d: i64) -> BigInt {
        let (mant, exp) = decompose(alpha);
        self.sin_cos_pi_dyadic(&(mant * d), exp).0
    }
}

/// Split a finite f64 into `(m, e)` with `x = m * 2^e` exactly.
pub fn decompose(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp_field == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_field - 1075)
    };
    (BigInt::from(m) * sign, e)
}

fn shift_round(v: BigInt, shift: i64) -> BigInt {
    if shift >= 0 {
        v << shift as usize
    } else {
        let s = (-shift) as usize;
        let half = BigInt::one() << (s - 1);
        (v + half) >> s
    }
}

fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut q, r) = a.div_mod_floor(b);
    let r2: BigInt = r.abs() << 1;
    if r2 >= b.abs() {
        q += 1;
    }
    q
}

/// `a * 2^-scale` as f64.
pub fn to_f64_scaled(a: &BigInt, scale: i64) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let nb = a.bits() as i64;
    let shift = (nb - 63).max(0);
    let top = (a.magnitude() >> shift as usize).to_f64().unwrap_or(0.0);
    let v = ldexp(top, shift - scale);
    if a.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

fn arctan_inv(x: u32, bits: u32) -> BigInt {
    let one = BigInt::one() << bits;
    let x2 = BigInt::from(x) * x;
    let mut term = &one / x;
    let mut sum = term.clone();
    let mut n = 1u64;
    let mut sign = -1i32;
    while !term.is_zero() {
        term = &term / &x2;
        let t = &term / (2 * n + 1);
        if sign < 0 {
            sum -= t;
        } else {
            sum += t;
        }
        sign = -sign;
        n += 1;
    }
    sum
}

fn machin_pi(bits: u32) -> BigInt {
    let g = bits + 32;
    let pi = arctan_inv(5, g) * 16 - arctan_inv(239, g) * 4;
    shift_round(pi, -32)
}

/// First row `alpha * sinc(alpha * d)`, `d = 0..len`, of a prolate matrix.
pub fn sinc_row(ctx: &FixedCtx, alpha: f64, len: usize) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(len);
    for d in 0..len {
        if d == 0 {
            row.push(ctx.from_f64(alpha));
        } else {
            let s = ctx.sin_pi_mul(alpha, d as i64);
            let den = ctx.mul_int(ctx.pi(), d as i64);
            row.push(ctx.div(&s, &den));
        }
    }
    row
}

/// First row of `Q_{1-alpha}` built from `alpha` itself, using
/// `(1-alpha) sinc((1-alpha) d) = (-1)^(d+1) alpha sinc(alpha d)` for `d != 0`.
pub fn complement_sinc_row(ctx: &FixedCtx, alpha: f64, len: usize) -> Vec<BigInt> {
    let mut row = sinc_row(ctx, alpha, len);
    if let Some(first) = row.first_mut() {
        *first = ctx.one() - &*first;
    }
    for (d, v) in row.iter_mut().enumerate().skip(1) {
        if d % 2 == 0 {
            *v = -&*v;
        }
    }
    row
}

/// Pivots of the LDL^T factorisation of the symmetric Toeplitz matrix with
/// first row `row`, via the Levinson-Durbin recursion.
pub fn toeplitz_pivots(ctx: &FixedCtx, row: &[BigInt]) -> Result<Vec<BigInt>> {
    let n = row.len();
    let mut pivots = Vec::with_capacity(n);
    if n == 0 {
        return Ok(pivots);
    }
    if !row[0].is_positive() {
        return Err(Error::numerical("Toeplitz diagonal is not positive"));
    }
    let mut e = row[0].clone();
    pivots.push(e.clone());
    let mut a: Vec<BigInt> = Vec::with_capacity(n);
    for k in 1..n {
        let mut acc = row[k].clone();
        for (j, aj) in a.iter().enumerate() {
            acc -= ctx.mul(aj, &row[k - 1 - j]);
        }
        let rho = ctx.div(&acc, &e);
        let mut next = Vec::with_capacity(k);
        for j in 0..a.len() {
            next.push(&a[j] - ctx.mul(&rho, &a[a.len() - 1 - j]));
        }
        next.push(rho.clone());
        a = next;
        e -= ctx.mul(&rho, &acc);
        if !e.is_positive() {
            return Err(Error::numerical(format!(
                "Toeplitz pivot {k} lost positivity at {} bits",
                ctx.bits()
            )));
        }
        pivots.push(e.clone());
    }
    Ok(pivots)
}

/// Dense LDL^T of a symmetric positive definite matrix given row-major.
/// Returns the unit lower factor and the pivots.
pub fn ldl(ctx: &FixedCtx, a: &[Vec<BigInt>]) -> Result<(Vec<Vec<BigInt>>, Vec<BigInt>)> {
    let n = a.len();
    let mut l = vec![vec![BigInt::zero(); n]; n];
    let mut d = vec![BigInt::zero(); n];
    for j in 0..n {
        let mut dj = a[j][j].clone();
        for k in 0..j {
            dj -= ctx.mul(&ctx.mul(&l[j][k], &l[j][k]), &d[k]);
        }
        if !dj.is_positive() {
            return Err(Error::numerical(format!(
                "LDL pivot {j} lost positivity at {} bits",
                ctx.bits()
            )));
        }
        l[j][j] = ctx.one();
        for i in (j + 1)..n {
            let mut s = a[i][j].clone();
            for k in 0..j {
                s -= ctx.mul(&ctx.mul(&l[i][k], &l[j][k]), &d[k]);
            }
            l[i][j] = ctx.div(&s, &dj);
        }
        d[j] = dj;
    }
    Ok((l, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_matches_f64() {
        let ctx = FixedCtx::new(200);
        assert_eq!(ctx.to_f64(ctx.pi()), std::f64::consts::PI);
    }

    #[test]
    fn from_f64_round_trips() {
        let ctx = FixedCtx::new(1200);
        for &x in &[0.3, -1.25e-7, 12345.678, 1e-300] {
            assert_eq!(ctx.to_f64(&ctx.from_f64(x)), x);
        }
    }

    #[test]
    fn sin_cos_pi_matches_f64() {
        let ctx = FixedCtx::new(160);
        for i in -40..40 {
            let x = i as f64 * 0.137;
            let (s, c) = ctx.sin_cos_pi(x);
            assert!((ctx.to_f64(&s) - (std::f64::consts::PI * x).sin()).abs() < 1e-14);
            assert!((ctx.to_f64(&c) - (std::f64::consts::PI * x).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn sin_pi_mul_is_periodic_exactly() {
        let ctx = FixedCtx::new(128);
        let s = ctx.sin_pi_mul(0.5, 4);
        assert!(s.is_zero());
        let s = ctx.sin_pi_mul(0.5, 1);
        assert_eq!(s, ctx.one());
    }

    #[test]
    fn complement_row_matches_direct_sinc() {
        let ctx = FixedCtx::new(128);
        let row = complement_sinc_row(&ctx, 0.75, 6);
        for (d, v) in row.iter().enumerate() {
            let x = 0.25 * d as f64;
            let want = if d == 0 { 0.25 } else { (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * d as f64) };
            assert!((ctx.to_f64(v) - want).abs() < 1e-15, "d={d}");
        }
    }

    #[test]
    fn ln_of_power_of_two() {
        let ctx = FixedCtx::new(100);
        let v = ctx.one() >> 40;
        let got = ctx.ln(&v).unwrap();
        assert!((got + 40.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn levinson_agrees_with_dense_ldl() {
        let ctx = FixedCtx::new(256);
        let row = sinc_row(&ctx, 0.3, 8);
        let piv = toeplitz_pivots(&ctx, &row).unwrap();
        let dense: Vec<Vec<BigInt>> = (0..8)
            .map(|i| (0..8).map(|j| row[(i as i64 - j as i64).unsigned_abs() as usize].clone()).collect())
            .collect();
        let (_, d) = ldl(&ctx, &dense).unwrap();
        for (a, b) in piv.iter().zip(&d) {
            let (fa, fb) = (ctx.to_f64(a), ctx.to_f64(b));
            assert!((fa - fb).abs() <= 1e-12 * fb.abs());
        }
    }
}
