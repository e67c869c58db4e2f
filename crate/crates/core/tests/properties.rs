use modfold::certificates::{
    binomial_bound, binomial_certificate, binomial_coefficients, residual_band_energy, residual_quadratic_form,
    IntegerCertificate, Construction,
};
use modfold::frame::{frame_bounds_on, spectrum_eval, NyquistModel};
use modfold::signal::{fold, fold_real, fold_samples, toral_dist, toral_seq_dist};
use modfold::unfolding::{random_signal, Unfolder, UnfoldConfig};
use modfold::{Scalar, SeparatedSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scalar() -> impl Strategy<Value = Scalar> {
    (-1e3..1e3f64, -1e3..1e3f64).prop_map(|(a, b)| Scalar::new(a, b))
}

proptest! {
    #[test]
    fn fold_lands_in_half_open_range(x in -1e6..1e6f64, lambda in 1e-3..1e3f64) {
        let y = fold_real(x, lambda);
        prop_assert!((-lambda..lambda).contains(&y));
    }

    #[test]
    fn fold_is_congruent_to_input(x in -1e4..1e4f64, lambda in 1e-2..1e2f64) {
        let k = (x - fold_real(x, lambda)) / (2.0 * lambda);
        prop_assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn fold_is_idempotent(x in -1e4..1e4f64, lambda in 1e-2..1e2f64) {
        let y = fold_real(x, lambda);
        prop_assert_eq!(fold_real(y, lambda), y);
    }

    #[test]
    fn complex_fold_is_componentwise(z in scalar(), lambda in 1e-2..1e2f64) {
        let w = fold(z, lambda).unwrap();
        prop_assert_eq!(w.re, fold_real(z.re, lambda));
        prop_assert_eq!(w.im, fold_real(z.im, lambda));
    }

    #[test]
    fn toral_metric_axioms(z in scalar(), w in scalar(), v in scalar(), lambda in 0.1..10.0f64, n in -50i64..50, m in -50i64..50) {
        let d = |a, b| toral_dist(a, b, lambda).unwrap();
        let tol = 1e-9 * (1.0 + z.norm() + w.norm() + v.norm());
        prop_assert!((d(z, w) - d(w, z)).abs() <= tol);
        prop_assert!(d(z, z) == 0.0);
        let shift = Scalar::new(2.0 * lambda * n as f64, 2.0 * lambda * m as f64);
        prop_assert!((d(z + shift, w) - d(z, w)).abs() <= tol);
        prop_assert!(d(z, v) <= d(z, w) + d(w, v) + tol);
        prop_assert!(d(z, w) <= (z - w).norm() + tol);
        prop_assert!(d(z, w) <= lambda * std::f64::consts::SQRT_2 + tol);
        let folded = fold(z, lambda).unwrap() - fold(w, lambda).unwrap();
        prop_assert!((d(z, w) - fold(folded, lambda).unwrap().norm()).abs() <= tol);
    }

    #[test]
    fn conditional_additivity(x in -1e3..1e3f64, y in -1e3..1e3f64, lambda in 0.1..10.0f64) {
        let diff = fold_real(x, lambda) - fold_real(y, lambda);
        prop_assume!(diff.abs() < lambda * (1.0 - 1e-9));
        prop_assert!((diff - fold_real(x - y, lambda)).abs() <= 1e-9 * (1.0 + x.abs() + y.abs()));
    }

    #[test]
    fn sequence_distance_below_euclidean(v in prop::collection::vec((scalar(), scalar()), 1..20), lambda in 0.1..10.0f64) {
        let (a, b): (Vec<Scalar>, Vec<Scalar>) = v.into_iter().unzip();
        let euclid = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(toral_seq_dist(&a, &b, lambda).unwrap() <= euclid * (1.0 + 1e-12) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zero_padding_keeps_residual(c in prop::collection::vec(-5i128..=5, 1..12), pad in 0usize..8, alpha in 0.2..0.95f64) {
        prop_assume!(c.iter().any(|&v| v != 0));
        let cert = IntegerCertificate::new(alpha, c.clone(), Construction::Supplied).unwrap();
        let wide = cert.embedded(c.len() + pad).unwrap();
        let direct = residual_quadratic_form(alpha, wide.coeffs()).unwrap();
        prop_assert!((direct - cert.residual()).abs() <= 1e-12 * (1.0 + cert.residual()));
    }

    #[test]
    fn residual_routes_agree(c in prop::collection::vec(-20i128..=20, 1..24), alpha in 0.1..0.99f64) {
        prop_assume!(c.iter().any(|&v| v != 0));
        let q = residual_quadratic_form(alpha, &c).unwrap();
        let b = residual_band_energy(alpha, &c, q).unwrap();
        prop_assert!((q - b).abs() <= 1e-8 * (1.0 + q), "{q} vs {b}");
    }

    #[test]
    fn binomial_spectrum_is_sine_power(n in 1usize..40, t in -0.5..0.5f64) {
        let c: Vec<Scalar> = binomial_coefficients(n).iter().map(|&v| Scalar::new(v as f64, 0.0)).collect();
        let want = (2.0 * (std::f64::consts::PI * t).sin().abs()).powi(n as i32);
        let got = spectrum_eval(&c, t).norm();
        prop_assert!((got - want).abs() <= 1e-12 * 2f64.powi(n as i32));
    }

    #[test]
    fn binomial_residual_within_bound(n in 1usize..=60, pick in 0usize..4) {
        let alpha = [0.7, 0.75, 0.9, 0.99][pick];
        let r = binomial_certificate(n, alpha).unwrap().residual();
        let b = binomial_bound(n, alpha);
        prop_assert!(r <= b * (1.0 + 1e-12), "N={n} alpha={alpha}: {r} > {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frame_sandwich(seed in any::<u64>(), jitter in 0.0..0.2f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = SeparatedSet::jittered(0.5, -96, 95, jitter, &mut rng).unwrap();
        let model = NyquistModel::inner(&x, 1.0, 0.25).unwrap();
        let fb = frame_bounds_on(x.points(), &model).unwrap();
        let (f, _) = random_signal(&model, 1.0, &mut rng).unwrap();
        let energy: f64 = x.points().iter().map(|&p| f.eval(p).norm_sqr()).sum();
        let norm2 = f.norm_squared();
        prop_assert!(fb.lower * norm2 <= energy * (1.0 + 1e-9));
        prop_assert!(energy <= fb.upper * norm2 * (1.0 + 1e-9));
    }

    #[test]
    fn recovered_samples_match_corrected_folds(seed in any::<u64>()) {
        let x = SeparatedSet::uniform(0.5, -96, 95).unwrap();
        let cfg = UnfoldConfig::new(x, 1.0, 0.5, 0.5f64.sqrt());
        let un = Unfolder::new(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, _) = random_signal(un.model(), cfg.energy_bound, &mut rng).unwrap();
        let s = fold_samples(&f, &cfg.x, cfg.lambda).unwrap();
        let rep = un.unfold(&s).unwrap();
        for (k, &p) in cfg.x.points().iter().enumerate() {
            let want = s.values[k].re + 2.0 * cfg.lambda * rep.fold_counts[k] as f64;
            prop_assert!((rep.recovered.eval(p).re - want).abs() <= 1e-6);
        }
        prop_assert!(rep.peaks_used() <= un.budget());
    }

    #[test]
    fn distinct_signals_have_distinct_folds(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = SeparatedSet::jittered(0.6, -96, 95, 0.1, &mut rng).unwrap();
        let model = NyquistModel::inner(&x, 1.0, 0.25).unwrap();
        let (f, _) = random_signal(&model, 1.0, &mut rng).unwrap();
        let (g, _) = random_signal(&model, 1.0, &mut rng).unwrap();
        let a = fold_samples(&f, &x, 0.5).unwrap();
        let b = fold_samples(&g, &x, 0.5).unwrap();
        prop_assert!(toral_seq_dist(&a.values, &b.values, 0.5).unwrap() > 0.0);
    }
}
