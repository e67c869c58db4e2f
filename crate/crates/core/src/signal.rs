//! Folding, toral distances, sampling sets and bandlimited signals.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Scalar = Complex64;

/// `sin(pi x) / (pi x)` with the removable singularity filled in. Exactly
/// zero at nonzero integers.
pub fn sinc(x: f64) -> f64 {
    let px = std::f64::consts::PI * x;
    if x.abs() < 1e-8 {
        return 1.0 - px * px / 6.0;
    }
    // sin(pi x) = (-1)^n sin(pi (x - n))
    let n = x.round();
    let s = (std::f64::consts::PI * (x - n)).sin();
    let s = if n.rem_euclid(2.0) == 1.0 { -s } else { s };
    s / px
}

fn check_threshold(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("threshold must be finite and positive, got {lambda}")))
    }
}

/// Centered remainder of `x` modulo `2*lambda`, landing in `[-lambda, lambda)`.
pub fn fold_real(x: f64, lambda: f64) -> f64 {
    if (-lambda..lambda).contains(&x) {
        return x;
    }
    let period = 2.0 * lambda;
    let n = (x / period + 0.5).floor();
    let mut r = (-period).mul_add(n, x);
    if r >= lambda {
        r -= period;
    }
    if r < -lambda {
        r = -lambda;
    }
    r
}

/// Componentwise fold of a complex value.
pub fn fold(z: Scalar, lambda: f64) -> Result<Scalar> {
    check_threshold(lambda)?;
    Ok(Scalar::new(fold_real(z.re, lambda), fold_real(z.im, lambda)))
}

pub fn fold_seq(values: &[Scalar], lambda: f64) -> Result<Vec<Scalar>> {
    check_threshold(lambda)?;
    Ok(values
        .iter()
        .map(|z| Scalar::new(fold_real(z.re, lambda), fold_real(z.im, lambda)))
        .collect())
}

/// Distance from `z - w` to the nearest point of `2*lambda*(Z + iZ)`.
pub fn toral_dist(z: Scalar, w: Scalar, lambda: f64) -> Result<f64> {
    Ok(fold(z - w, lambda)?.norm())
}

/// l2 norm of the pointwise toral distances of two equal-length sequences.
pub fn toral_seq_dist(a: &[Scalar], b: &[Scalar], lambda: f64) -> Result<f64> {
    check_threshold(lambda)?;
    if a.len() != b.len() {
        return Err(Error::domain(format!(
            "sequence lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let s: f64 = a
        .iter()
        .zip(b)
        .map(|(z, w)| {
            let d = z - w;
            let f = Scalar::new(fold_real(d.re, lambda), fold_real(d.im, lambda));
            f.norm_sqr()
        })
        .sum();
    Ok(s.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub alpha: f64,
    pub start: i64,
    pub end: i64,
}

/// Finite window of a uniformly discrete set of real sampling points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetRepr", into = "SetRepr")]
pub struct SeparatedSet {
    points: Vec<f64>,
    separation: f64,
    lattice: Option<Lattice>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum SetRepr {
    Lattice { alpha: f64, range: [i64; 2] },
    Points { points: Vec<f64> },
}

impl TryFrom<SetRepr> for SeparatedSet {
    type Error = Error;

    fn try_from(repr: SetRepr) -> Result<Self> {
        match repr {
            SetRepr::Lattice { alpha, range } => SeparatedSet::uniform(alpha, range[0], range[1]),
            SetRepr::Points { points } => SeparatedSet::from_points(points),
        }
    }
}

impl From<SeparatedSet> for SetRepr {
    fn from(x: SeparatedSet) -> Self {
        match x.lattice {
            Some(l) => SetRepr::Lattice {
                alpha: l.alpha,
                range: [l.start, l.end],
            },
            None => SetRepr::Points { points: x.points },
        }
    }
}

impl SeparatedSet {
    /// The points `alpha * k` for `start <= k <= end`.
    pub fn uniform(alpha: f64, start: i64, end: i64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::domain(format!("lattice step must be positive, got {alpha}")));
        }
        if end < start {
            return Err(Error::domain(format!("empty index range [{start}, {end}]")));
        }
        let points = (start..=end).map(|k| alpha * k as f64).collect();
        Ok(SeparatedSet {
            points,
            separation: alpha,
            lattice: Some(Lattice { alpha, start, end }),
        })
    }

    /// Any finite set of distinct finite points; they are sorted.
    pub fn from_points(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("sampling set is empty"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("sampling points must be finite"));
        }
        points.sort_by(|a, b| a.total_cmp(b));
        let separation = points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if separation <= 0.0 {
            return Err(Error::domain("sampling points are not separated (duplicate point)"));
        }
        Ok(SeparatedSet {
            points,
            separation,
            lattice: None,
        })
    }

    /// `alpha * k + u_k` with `u_k ~ U(-jitter, jitter)`.
    pub fn jittered<R: Rng>(alpha: f64, start: i64, end: i64, jitter: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..alpha / 2.0).contains(&jitter) {
            return Err(Error::domain("jitter must lie in [0, alpha/2)"));
        }
        let points = (start..=end)
            .map(|k| alpha * k as f64 + if jitter > 0.0 { rng.random_range(-jitter..jitter) } else { 0.0 })
            .collect();
        SeparatedSet::from_points(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest gap between consecutive points (infinite for a single point).
    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn lattice(&self) -> Option<Lattice> {
        self.lattice
    }

    pub fn span(&self) -> (f64, f64) {
        (self.points[0], self.points[self.points.len() - 1])
    }

    /// The set with the listed indices removed.
    pub fn without(&self, removed: &[usize]) -> Result<Self> {
        let mut keep = vec![true; self.points.len()];
        for &i in removed {
            if i < keep.len() {
                keep[i] = false;
            }
        }
        let pts: Vec<f64> = self
            .points
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(p, _)| *p)
            .collect();
        SeparatedSet::from_points(pts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub radius: f64,
    /// `min_x #(X ∩ [x, x + r]) / r` over windows inside the sampled span.
    pub min_count_rate: f64,
    pub separation: f64,
    /// Left end of a window attaining the minimum.
    pub worst_start: f64,
}

impl DensityReport {
    /// Whether the minimum count rate strictly exceeds the bandwidth.
    pub fn exceeds(&self, omega: f64) -> bool {
        self.min_count_rate > omega
    }
}

pub fn density_report(x: &SeparatedSet, r: f64) -> Result<DensityReport> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {r}")));
    }
    let pts = x.points();
    let (lo, hi) = x.span();
    if r > hi - lo {
        return Err(Error::domain(format!(
            "radius {r} exceeds the sampled span {}",
            hi - lo
        )));
    }
    let count_in = |a: f64, b: f64, open_left: bool| -> usize {
        let start = if open_left {
            pts.partition_point(|&p| p <= a)
        } else {
            pts.partition_point(|&p| p < a)
        };
        let end = pts.partition_point(|&p| p <= b);
        end.saturating_sub(start)
    };
    let mut best = count_in(lo, lo + r, false);
    let mut worst_start = lo;
    for &p in pts {
        if p + r > hi {
            break;
        }
        let c = count_in(p, p + r, true);
        if c < best {
            best = c;
            worst_start = p;
        }
    }
    Ok(DensityReport {
        radius: r,
        min_count_rate: best as f64 / r,
        separation: x.separation(),
        worst_start,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub center: f64,
    pub coeff: Scalar,
}

/// `f(x) = sum_j c_j * omega * sinc(omega * (x - x_j))`, an element of the
/// Paley-Wiener space with spectrum in `[-omega/2, omega/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalRepr", into = "SignalRepr")]
pub struct BandlimitedSignal {
    omega: f64,
    atoms: Vec<Atom>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalRepr {
    omega: f64,
    atoms: Vec<[f64; 3]>,
}

impl TryFrom<SignalRepr> for BandlimitedSignal {
    type Error = Error;

    fn try_from(s: SignalRepr) -> Result<Self> {
        let atoms = s
            .atoms
            .into_iter()
            .map(|[c, re, im]| Atom {
                center: c,
                coeff: Scalar::new(re, im),
            })
            .collect();
        BandlimitedSignal::new(s.omega, atoms)
    }
}

impl From<BandlimitedSignal> for SignalRepr {
    fn from(s: BandlimitedSignal) -> Self {
        SignalRepr {
            omega: s.omega,
            atoms: s
                .atoms
                .iter()
                .map(|a| [a.center, a.coeff.re, a.coeff.im])
                .collect(),
        }
    }
}

impl BandlimitedSignal {
    pub fn new(omega: f64, atoms: Vec<Atom>) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::domain(format!("bandwidth must be positive, got {omega}")));
        }
        if atoms
            .iter()
            .any(|a| !a.center.is_finite() || !a.coeff.re.is_finite() || !a.coeff.im.is_finite())
        {
            return Err(Error::domain("signal atoms must be finite"));
        }
        Ok(BandlimitedSignal { omega, atoms })
    }

    pub fn zero(omega: f64) -> Result<Self> {
        BandlimitedSignal::new(omega, Vec::new())
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// True when every coefficient is real, so the signal is real on the line.
    pub fn is_real(&self) -> bool {
        self.atoms.iter().all(|a| a.coeff.im == 0.0)
    }

    pub fn eval(&self, x: f64) -> Scalar {
        self.atoms
            .iter()
            .map(|a| a.coeff * (self.omega * sinc(self.omega * (x - a.center))))
            .sum()
    }

    pub fn norm_squared(&self) -> f64 {
        let mut s = Scalar::new(0.0, 0.0);
        for a in &self.atoms {
            for b in &self.atoms {
                s += a.coeff.conj() * b.coeff * (self.omega * sinc(self.omega * (a.center - b.center)));
            }
        }
        s.re.max(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scaled(&self, k: f64) -> Self {
        BandlimitedSignal {
            omega: self.omega,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    center: a.center,
                    coeff: a.coeff * k,
                })
                .collect(),
        }
    }

    /// `self - other`; both must share the bandwidth.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.omega != other.omega {
            return Err(Error::domain("signals have different bandwidths"));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().map(|a| Atom {
            center: a.center,
            coeff: -a.coeff,
        }));
        Ok(BandlimitedSignal {
            omega: self.omega,
            atoms,
        })
    }
}

/// Folded samples `fold(f(x_k), lambda)` together with their locations.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedSamples {
    pub lambda: f64,
    pub points: Vec<f64>,
    pub values: Vec<Scalar>,
}

pub fn fold_samples(f: &BandlimitedSignal, x: &SeparatedSet, lambda: f64) -> Result<FoldedSamples> {
    check_threshold(lambda)?;
    let raw: Vec<Scalar> = x.points().iter().map(|&p| f.eval(p)).collect();
    Ok(FoldedSamples {
        lambda,
        points: x.points().to_vec(),
        values: fold_seq(&raw, lambda)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_examples() {
        assert!((fold_real(0.7, 0.5) + 0.3).abs() < 1e-15);
        assert_eq!(fold_real(0.5, 0.5), -0.5);
        assert_eq!(fold_real(-0.5, 0.5), -0.5);
        assert!((fold_real(1.3, 0.5) - 0.3).abs() < 1e-15);
        let z = fold(Scalar::new(0.7, -0.6), 0.5).unwrap();
        assert!((z.re + 0.3).abs() < 1e-15 && (z.im - 0.4).abs() < 1e-15);
    }

    #[test]
    fn fold_rejects_bad_threshold() {
        assert!(matches!(fold(Scalar::new(1.0, 0.0), 0.0), Err(Error::Domain(_))));
        assert!(matches!(fold(Scalar::new(1.0, 0.0), -1.0), Err(Error::Domain(_))));
        assert!(fold(Scalar::new(1.0, 0.0), f64::NAN).is_err());
    }

    #[test]
    fn toral_distance_wraps() {
        let d = toral_dist(Scalar::new(0.45, 0.0), Scalar::new(-0.45, 0.0), 0.5).unwrap();
        assert!((d - 0.1).abs() < 1e-15);
    }

    #[test]
    fn density_of_half_lattice() {
        let x = SeparatedSet::uniform(0.5, -100, 100).unwrap();
        let r = density_report(&x, 10.0).unwrap();
        assert!((r.min_count_rate - 2.0).abs() < 1e-12);
        assert!((r.separation - 0.5).abs() < 1e-15);
    }

    #[test]
    fn punctured_lattice_density_drops() {
        let x = SeparatedSet::uniform(0.5, -20, 20).unwrap();
        let mid = x.points().iter().position(|&p| p == 0.0).unwrap();
        let y = x.without(&[mid]).unwrap();
        let r = density_report(&y, 1.0).unwrap();
        assert!((r.min_count_rate - 1.0).abs() < 1e-12);
        assert!(!r.exceeds(1.0));
    }

    #[test]
    fn duplicate_points_rejected() {
        assert!(SeparatedSet::from_points(vec![0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn set_json_round_trip() {
        let x = SeparatedSet::uniform(0.5, -3, 3).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"alpha":0.5,"range":[-3,3]}"#);
        let y: SeparatedSet = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
        let z: SeparatedSet = serde_json::from_str(r#"{"points":[1.0,0.0]}"#).unwrap();
        assert_eq!(z.points(), &[0.0, 1.0]);
    }

    #[test]
    fn signal_json_round_trip() {
        let f = BandlimitedSignal::new(
            1.0,
            vec![Atom {
                center: 0.5,
                coeff: Scalar::new(1.0, -2.0),
            }],
        )
        .unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"omega":1.0,"atoms":[[0.5,1.0,-2.0]]}"#);
        let g: BandlimitedSignal = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn reproducing_kernel_norm() {
        let f = BandlimitedSignal::new(
            2.0,
            vec![Atom {
                center: 0.0,
                coeff: Scalar::new(1.0, 0.0),
            }],
        )
        .unwrap();
        assert!((f.norm_squared() - 2.0).abs() < 1e-15);
        assert!((f.eval(0.0).re - 2.0).abs() < 1e-15);
    }
}
