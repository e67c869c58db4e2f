//! Box-constrained Fincke-Pohst enumeration of integer vectors `x` with
//! `x^T A x <= R` for a positive definite `A = L D L^T`.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::precise::{ldl, FixedCtx};

#[derive(Debug, Clone)]
pub(crate) struct Factor {
    /// Unit lower-triangular, row-major.
    pub l: Vec<Vec<f64>>,
    pub d: Vec<f64>,
}

/// Factor a fixed-point matrix, raising precision until every pivot is
/// resolved with at least 64 spare bits, then round the factors to f64.
pub(crate) fn factor<F: Fn(&FixedCtx) -> Vec<Vec<BigInt>>>(build: F, start_bits: u32) -> Result<Factor> {
    let mut bits = start_bits;
    while bits <= 1 << 14 {
        let ctx = FixedCtx::new(bits);
        let a = build(&ctx);
        if let Ok((l, d)) = ldl(&ctx, &a) {
            let min_bits = d.iter().map(|p| p.bits()).min().unwrap_or(0);
            if min_bits > 64 {
                return Ok(Factor {
                    l: l.iter().map(|r| r.iter().map(|v| ctx.to_f64(v)).collect()).collect(),
                    d: d.iter().map(|v| ctx.to_f64(v)).collect(),
                });
            }
        }
        bits *= 2;
    }
    Err(Error::numerical("positive definite factorisation failed at every precision"))
}

/// Visit every nonzero `x` in `[-bound, bound]^n` with `x^T A x <= radius2`,
/// up to sign (the highest nonzero coordinate is positive). `visit` gets the
/// vector and its form value and returns the possibly shrunk radius.
pub(crate) fn enumerate<V: FnMut(&[i64], f64) -> f64>(f: &Factor, bound: i64, radius2: f64, mut visit: V) {
    let n = f.d.len();
    let mut x = vec![0i64; n];
    let mut radius2 = radius2;
    recurse(f, bound, n, &mut x, 0.0, true, &mut radius2, &mut visit);
}

#[allow(clippy::too_many_arguments)]
fn recurse<V: FnMut(&[i64], f64) -> f64>(
    f: &Factor,
    bound: i64,
    level: usize,
    x: &mut [i64],
    acc: f64,
    zero_above: bool,
    radius2: &mut f64,
    visit: &mut V,
) {
    if level == 0 {
        if !zero_above {
            *radius2 = visit(x, acc);
        }
        return;
    }
    let i = level - 1;
    let center: f64 = -x
        .iter()
        .enumerate()
        .skip(i + 1)
        .map(|(j, &xj)| f.l[j][i] * xj as f64)
        .sum::<f64>();
    let rem = *radius2 - acc;
    if rem < 0.0 {
        return;
    }
    let half = (rem / f.d[i]).sqrt();
    let lo_f = (center - half).ceil();
    let hi_f = (center + half).floor();
    let mut lo = if lo_f < -(bound as f64) { -bound } else { lo_f as i64 };
    let hi = if hi_f > bound as f64 { bound } else { hi_f as i64 };
    if zero_above {
        lo = lo.max(0);
    }
    for v in lo..=hi {
        let y = v as f64 - center;
        let next = acc + f.d[i] * y * y;
        if next > *radius2 {
            continue;
        }
        x[i] = v;
        recurse(f, bound, i, x, next, zero_above && v == 0, radius2, visit);
    }
    x[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_points_in_identity_ball() {
        let f = Factor {
            l: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            d: vec![1.0, 1.0],
        };
        let mut seen = Vec::new();
        enumerate(&f, 5, 2.0 + 1e-9, |x, v| {
            seen.push((x.to_vec(), v));
            2.0 + 1e-9
        });
        // (1,0),(0,1),(1,1),(-1,1) up to sign
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn box_clips() {
        let f = Factor {
            l: vec![vec![1.0]],
            d: vec![1e-12],
        };
        let mut count = 0;
        enumerate(&f, 3, 1.0, |_, _| {
            count += 1;
            1.0
        });
        assert_eq!(count, 3);
    }
}
