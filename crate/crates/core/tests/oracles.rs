//! Reference values from independent computations: brute force, closed
//! forms and dense linear algebra written here rather than taken from the
//! library.

use modfold::certificates::{binomial_certificate, critical_function};
use modfold::frame::NyquistModel;
use modfold::signal::{density_report, fold_samples, sinc, Atom};
use modfold::unfolding::{peak_budget, stability_probe, unfold, UnfoldConfig};
use modfold::{BandlimitedSignal, Error, Scalar, SeparatedSet};
use nalgebra::{DMatrix, DVector};

fn half_lattice() -> SeparatedSet {
    SeparatedSet::uniform(0.5, -128, 127).unwrap()
}

fn scaled_sinc(k: f64) -> BandlimitedSignal {
    BandlimitedSignal::new(1.0, vec![Atom { center: 0.0, coeff: Scalar::new(k, 0.0) }]).unwrap()
}

/// Distance from `z` to the column space of the model sampling matrix,
/// through the normal equations.
fn range_residual(e: &DMatrix<f64>, z: &DVector<f64>) -> f64 {
    let ete = e.transpose() * e;
    let c = ete.cholesky().unwrap().solve(&(e.transpose() * z));
    (z - e * c).norm()
}

#[test]
fn fold_counts_match_brute_force() {
    let x = half_lattice();
    let s = fold_samples(&scaled_sinc(0.9), &x, 0.5).unwrap();
    let model = NyquistModel::inner(&x, 1.0, 0.25).unwrap();
    let e = DMatrix::from_fn(x.len(), model.centers.len(), |k, j| sinc(x.points()[k] - model.centers[j]));
    let y = DVector::from_iterator(x.len(), s.values.iter().map(|v| v.re));
    // five indices with the largest range residual
    let ete = e.transpose() * &e;
    let r0 = &y - &e * ete.cholesky().unwrap().solve(&(e.transpose() * &y));
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| r0[b].abs().total_cmp(&r0[a].abs()));
    idx.truncate(5);
    let mut best = (f64::INFINITY, vec![0i64; 5]);
    for code in 0..5usize.pow(5) {
        let a: Vec<i64> = (0..5).map(|i| (code / 5usize.pow(i as u32) % 5) as i64 - 2).collect();
        let mut z = y.clone();
        for (&k, &v) in idx.iter().zip(&a) {
            z[k] += v as f64;
        }
        let r = range_residual(&e, &z);
        if r < best.0 {
            best = (r, a);
        }
    }
    let cfg = UnfoldConfig::new(x.clone(), 1.0, 0.5, 1.0);
    let rep = unfold(&s, &cfg).unwrap();
    for (&k, &v) in idx.iter().zip(&best.1) {
        assert_eq!(rep.fold_counts[k], v, "index {k}");
    }
    assert_eq!(rep.peaks_used(), best.1.iter().filter(|&&v| v != 0).count());
    let zero = x.points().iter().position(|&p| p == 0.0).unwrap();
    assert_eq!(rep.fold_counts[zero], 1);
    assert!(rep.recovered.difference(&scaled_sinc(0.9)).unwrap().norm() / 0.9 < 1e-6);
}

#[test]
fn sinc_on_integers_folds_to_zero() {
    let x = SeparatedSet::uniform(1.0, -64, 64).unwrap();
    let s = fold_samples(&scaled_sinc(1.0), &x, 0.5).unwrap();
    assert!(s.values.iter().all(|v| v.re == 0.0 && v.im == 0.0));
}

#[test]
fn small_signal_passes_through() {
    let x = half_lattice();
    let f = scaled_sinc(0.3);
    let s = fold_samples(&f, &x, 0.5).unwrap();
    for (k, &p) in x.points().iter().enumerate() {
        assert_eq!(s.values[k].re, f.eval(p).re);
    }
    let rep = unfold(&s, &UnfoldConfig::new(x, 1.0, 0.5, 0.5)).unwrap();
    assert!(rep.peak_set.is_empty());
    assert!(rep.recovered.difference(&f).unwrap().norm() < 1e-8);
}

#[test]
fn peak_budget_examples() {
    let mut cfg = UnfoldConfig::new(half_lattice(), 1.0, 0.5, 0.5);
    assert_eq!(peak_budget(&cfg).unwrap(), 2);
    cfg.energy_bound = 1e-6;
    assert_eq!(peak_budget(&cfg).unwrap(), 0);
    cfg.energy_bound = 1.0;
    cfg.lambda = 10.0;
    assert_eq!(peak_budget(&cfg).unwrap(), 0);
}

#[test]
fn unfolded_probe_matches_linear_frame_bound() {
    // A = B = 2 on 0.5Z, so the inverse has norm 2^-1/2
    let cfg = UnfoldConfig::new(half_lattice(), 1.0, 1.0, 0.5);
    let t = stability_probe(&cfg, 40, 9).unwrap();
    let bound = 0.5f64.sqrt() * 1.05;
    for r in &t.rows {
        assert_eq!(r.peaks_used, 0);
        assert!(r.ratio <= bound, "{r:?}");
    }
}

#[test]
fn large_threshold_is_linear_sampling() {
    let cfg = UnfoldConfig::new(half_lattice(), 1.0, 10.0, 1.0);
    assert_eq!(peak_budget(&cfg).unwrap(), 0);
    let t = stability_probe(&cfg, 20, 4).unwrap();
    assert!(t.rows.iter().all(|r| r.peaks_used == 0 && r.l2_error < 1e-8));
}

#[test]
fn probe_rejects_zero_trials() {
    let cfg = UnfoldConfig::new(half_lattice(), 1.0, 0.5, 0.5);
    assert!(matches!(stability_probe(&cfg, 0, 0), Err(Error::Usage(_))));
}

#[test]
fn critical_function_defeats_small_energy_bound() {
    let alpha = 0.7;
    let g = critical_function(&binomial_certificate(20, alpha).unwrap(), 0.5).unwrap();
    assert!(g.energy > 100.0);
    let x = SeparatedSet::uniform(alpha, -150, 150).unwrap();
    let s = fold_samples(&g.signal, &x, 0.5).unwrap();
    let cfg = UnfoldConfig::new(x, 1.0, 0.5, 1.0);
    match unfold(&s, &cfg) {
        Err(Error::Infeasible(_)) => {}
        Ok(rep) => {
            let err = rep.recovered.difference(&g.signal).unwrap().norm() / g.energy;
            assert!(rep.ambiguous || err > 0.5, "recovered a {} error signal without a flag", err);
        }
        Err(e) => panic!("unexpected error {e}"),
    }
}

#[test]
fn peak_removal_keeps_density() {
    let x = half_lattice();
    let (lambda, m, omega) = (0.5, 0.5f64.sqrt(), 1.0);
    let cfg = UnfoldConfig::new(x.clone(), omega, lambda, m);
    let budget = peak_budget(&cfg).unwrap();
    let eps = 2.0 - omega;
    // window length twice the half-width radius B M^2 / (2 lambda^2 eps'), eps' = eps / 2
    let r = (2.0 * 2.0 * m * m / (lambda * lambda * eps)).max(4.0);
    // worst case: the removed points are adjacent
    let mid = x.len() / 2;
    let removed: Vec<usize> = (mid..mid + budget).collect();
    let rep = density_report(&x.without(&removed).unwrap(), r).unwrap();
    assert!(rep.min_count_rate >= omega + eps / 2.0 - 1e-12, "{rep:?}");
}

#[test]
fn log_det_matches_dense_lu_for_small_sizes() {
    use modfold::prolate::{log_det, prolate_matrix};
    for &alpha in &[0.3, 0.5, 0.7] {
        for n in [2usize, 4, 6, 8] {
            let q = DMatrix::from_fn(n, n, |i, j| {
                let d = i as f64 - j as f64;
                alpha * sinc(alpha * d)
            });
            let dense = q.lu().determinant().ln();
            let hp = log_det(&prolate_matrix(alpha, n).unwrap()).unwrap();
            // dense LU loses relative accuracy as det shrinks
            assert!((dense - hp).abs() < 1e-6 * hp.abs().max(1.0), "alpha={alpha} N={n}: {dense} vs {hp}");
        }
    }
}
