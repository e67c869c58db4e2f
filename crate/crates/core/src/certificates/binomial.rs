use std::f64::consts::PI;

use super::{check_alpha, Construction, IntegerCertificate};
use crate::error::{Error, Result};
use crate::quadrature::{panels_for_trig, GaussLegendre, PANEL_ORDER};

/// Largest order whose coefficients fit comfortably in `i128`.
pub const MAX_BINOMIAL_ORDER: usize = 120;

/// `n_k = (-1)^(N-k) C(N, N-k)` for `k = 0..=N`, so that
/// `|n_hat(t)| = (2 sin(pi t))^N`.
pub fn binomial_coefficients(order: usize) -> Vec<i128> {
    let mut c = vec![1i128; order + 1];
    for k in 1..=order {
        c[k] = c[k - 1] * (order - k + 1) as i128 / k as i128;
    }
    c.iter()
        .enumerate()
        .map(|(k, &v)| if (order - k) % 2 == 1 { -v } else { v })
        .collect()
}

pub fn binomial_certificate(order: usize, alpha: f64) -> Result<IntegerCertificate> {
    check_alpha(alpha)?;
    if order == 0 || order > MAX_BINOMIAL_ORDER {
        return Err(Error::usage(format!(
            "binomial order must lie in 1..={MAX_BINOMIAL_ORDER}, got {order}"
        )));
    }
    IntegerCertificate::new(alpha, binomial_coefficients(order), Construction::Binomial { order })
}

/// `sqrt(1 - alpha) * (2 sin(pi (1 - alpha) / 2))^N`.
pub fn binomial_bound(order: usize, alpha: f64) -> f64 {
    (1.0 - alpha).sqrt() * (2.0 * (0.5 * PI * (1.0 - alpha)).sin()).powi(order as i32)
}

/// `sqrt(2^(2N+1) int_0^{(1-alpha)/2} sin(pi t)^(2N) dt)` by quadrature of the
/// closed-form spectrum; no cancellation is involved.
pub fn binomial_residual_integral(order: usize, alpha: f64) -> f64 {
    let w = 0.5 * (1.0 - alpha);
    let rule = GaussLegendre::new(PANEL_ORDER);
    let panels = panels_for_trig(2 * order + 2, w);
    let s = rule.integrate(0.0, w, panels, |t| (2.0 * (PI * t).sin()).powi(2 * order as i32));
    (2.0 * s).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_order_coefficients() {
        assert_eq!(binomial_coefficients(2), vec![1, -2, 1]);
        assert_eq!(binomial_coefficients(3), vec![-1, 3, -3, 1]);
    }

    #[test]
    fn first_order_residual_against_integral() {
        let c = binomial_certificate(1, 0.7).unwrap();
        let w: f64 = 0.15;
        let exact = (8.0 * (0.5 * w - (2.0 * PI * w).sin() / (4.0 * PI))).sqrt();
        assert!((c.residual() - exact).abs() < 1e-13);
        assert!(c.residual() <= binomial_bound(1, 0.7));
        assert!((binomial_bound(1, 0.7) - 0.4973).abs() < 1e-4);
    }

    #[test]
    fn order_limits() {
        assert!(binomial_certificate(0, 0.7).is_err());
        assert!(binomial_certificate(MAX_BINOMIAL_ORDER + 1, 0.7).is_err());
        let big = binomial_coefficients(MAX_BINOMIAL_ORDER);
        assert_eq!(big[60].unsigned_abs(), 96614908840363322603893139521372656u128);
    }
}
