//! Integer polynomials `p` with small supremum on `[2 cos(pi (1-alpha)), 2]`.
//! Substituting `x = 2 cos(2 pi t)` turns `p` into a symmetric integer
//! sequence whose spectrum is `p(2 cos 2 pi t)`, small on the residual band.

use num_bigint::BigInt;

use super::enumerate::{enumerate, factor};
use super::{check_alpha, Construction, IntegerCertificate};
use crate::error::{Error, Result};

pub const MAX_CHEBYSHEV_DEGREE: usize = 12;
const SUP_GRID: usize = 1024;

/// `[2 cos(pi (1 - alpha)), 2]`.
pub fn chebyshev_interval(alpha: f64) -> (f64, f64) {
    (2.0 * (std::f64::consts::PI * (1.0 - alpha)).cos(), 2.0)
}

fn horner(p: &[i64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
}

/// Supremum of `|p|` on `[a, b]`: dense Chebyshev-node grid, then golden
/// section refinement around the largest grid value.
pub fn chebyshev_sup(p: &[i64], a: f64, b: f64) -> f64 {
    let (idx, best) = sup_on_grid(p, a, b);
    let node = |k: usize| {
        let th = std::f64::consts::PI * k as f64 / SUP_GRID as f64;
        0.5 * (a + b) - 0.5 * (b - a) * th.cos()
    };
    let lo = node(idx.saturating_sub(1));
    let hi = node((idx + 1).min(SUP_GRID));
    let f = |x: f64| horner(p, x).abs();
    let (mut l, mut r) = (lo, hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = r - g * (r - l);
        let m2 = l + g * (r - l);
        if f(m1) < f(m2) {
            l = m1;
        } else {
            r = m2;
        }
    }
    best.max(f(0.5 * (l + r)))
}

fn sup_on_grid(p: &[i64], a: f64, b: f64) -> (usize, f64) {
    let mut best = (0, 0.0);
    for k in 0..=SUP_GRID {
        let th = std::f64::consts::PI * k as f64 / SUP_GRID as f64;
        let x = 0.5 * (a + b) - 0.5 * (b - a) * th.cos();
        let v = horner(p, x).abs();
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

/// Coefficients of `p(z + 1/z)` for `z^(-d)..=z^d`, `d = deg p`.
pub fn chebyshev_expand(p: &[i64]) -> Vec<i128> {
    let d = p.len().saturating_sub(1);
    let mut out = vec![0i128; 2 * d + 1];
    for (i, &c) in p.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mut binom: i128 = 1;
        for j in 0..=i {
            out[d + i - 2 * j] += c as i128 * binom;
            binom = binom * (i - j) as i128 / (j + 1) as i128;
        }
    }
    out
}

/// Monomial Gram matrix `int_a^b x^(i+j) dx` in fixed point.
fn monomial_gram(ctx: &crate::precise::FixedCtx, a: f64, b: f64, n: usize) -> Vec<Vec<BigInt>> {
    let af = ctx.from_f64(a);
    let bf = ctx.from_f64(b);
    let mut apow = af.clone();
    let mut bpow = bf.clone();
    let mut moments = Vec::with_capacity(2 * n);
    for k in 0..2 * n {
        moments.push(ctx.div_int(&(&bpow - &apow), k as i64 + 1));
        apow = ctx.mul(&apow, &af);
        bpow = ctx.mul(&bpow, &bf);
    }
    (0..n)
        .map(|i| (0..n).map(|j| moments[i + j].clone()).collect())
        .collect()
}

/// Integer polynomial of degree at most `degree`, coefficients in
/// `[-coeff_bound, coeff_bound]`, with the least supremum on the interval.
pub fn chebyshev_certificate(degree: usize, alpha: f64, coeff_bound: i64) -> Result<IntegerCertificate> {
    check_alpha(alpha)?;
    if degree == 0 || degree > MAX_CHEBYSHEV_DEGREE {
        return Err(Error::usage(format!(
            "polynomial degree must lie in 1..={MAX_CHEBYSHEV_DEGREE}, got {degree}"
        )));
    }
    if coeff_bound < 1 {
        return Err(Error::usage("coefficient bound must be at least 1"));
    }
    let (a, b) = chebyshev_interval(alpha);
    let n = degree + 1;
    let f = factor(|ctx| monomial_gram(ctx, a, b, n), 128 + 8 * n as u32)?;
    let mut best_sup = f64::INFINITY;
    let mut best: Vec<i64> = Vec::new();
    // seed with every polynomial of degree <= 1 in the box
    for c1 in 0..=coeff_bound {
        for c0 in -coeff_bound..=coeff_bound {
            if c1 == 0 && c0 <= 0 {
                continue;
            }
            let p = vec![c0, c1];
            let s = chebyshev_sup(&p, a, b);
            if s < best_sup {
                best_sup = s;
                best = p;
            }
        }
    }
    let width = b - a;
    let inflate = 1.0 + 1e-3;
    enumerate(&f, coeff_bound, width * best_sup * best_sup * inflate, |x, _| {
        let (_, s) = sup_on_grid(x, a, b);
        if s < best_sup {
            let exact = chebyshev_sup(x, a, b);
            if exact < best_sup {
                best_sup = exact;
                best = x.to_vec();
            }
        }
        width * best_sup * best_sup * inflate
    });
    if best.iter().all(|&c| c == 0) {
        return Err(Error::usage("search found only the zero polynomial; raise the coefficient bound"));
    }
    while best.len() > 1 && *best.last().unwrap() == 0 {
        best.pop();
    }
    let coeffs = chebyshev_expand(&best);
    IntegerCertificate::new(
        alpha,
        coeffs,
        Construction::Chebyshev {
            degree,
            coeff_bound,
            polynomial: best,
            sup_norm: best_sup,
        },
    )
}
