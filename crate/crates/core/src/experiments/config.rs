use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{Atom, BandlimitedSignal, Scalar, SeparatedSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    DecayCurve,
    ProlateSpectrum,
    SvpCompare,
    Witness,
    UnfoldDemo,
    DensityScan,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::DecayCurve,
        ExperimentKind::ProlateSpectrum,
        ExperimentKind::SvpCompare,
        ExperimentKind::Witness,
        ExperimentKind::UnfoldDemo,
        ExperimentKind::DensityScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DecayCurve => "decay_curve",
            ExperimentKind::ProlateSpectrum => "prolate_spectrum",
            ExperimentKind::SvpCompare => "svp_compare",
            ExperimentKind::Witness => "witness",
            ExperimentKind::UnfoldDemo => "unfold_demo",
            ExperimentKind::DensityScan => "density_scan",
        }
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One experiment run, read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentConfig {
    DecayCurve(DecayCurve),
    ProlateSpectrum(ProlateSpectrum),
    SvpCompare(SvpCompare),
    Witness(WitnessConfig),
    UnfoldDemo(UnfoldDemo),
    DensityScan(DensityScan),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayCurve {
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_one")]
    pub n_min: usize,
    #[serde(default = "d_thirty")]
    pub n_max: usize,
    #[serde(default = "d_lambda")]
    pub lambda: f64,
    /// Even orders plotted as re-centred critical functions.
    #[serde(default = "d_panels")]
    pub panels: Vec<usize>,
    #[serde(default = "d_panel_points")]
    pub panel_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProlateSpectrum {
    #[serde(default = "d_half")]
    pub alpha: f64,
    #[serde(default = "d_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "d_epsilon")]
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvpCompare {
    #[serde(default = "d_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "d_ten")]
    pub n_max: usize,
    #[serde(default = "d_box")]
    pub bruteforce_bound: i64,
    #[serde(default = "d_delta")]
    pub lll_delta: f64,
    #[serde(default = "d_cheb_bound")]
    pub chebyshev_bound: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessConfig {
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_lambda")]
    pub lambda: f64,
    #[serde(default = "d_target")]
    pub target: f64,
    #[serde(default = "d_floor")]
    pub floor: f64,
    #[serde(default = "d_sixty")]
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnfoldDemo {
    #[serde(default = "d_omega")]
    pub omega: f64,
    #[serde(default = "d_lambda")]
    pub lambda: f64,
    #[serde(default = "d_omega")]
    pub energy_bound: f64,
    #[serde(default = "d_grid")]
    pub x: SeparatedSet,
    /// Uniform perturbation of each point in `(-jitter, jitter)`; lattice sets only.
    #[serde(default)]
    pub jitter: Option<f64>,
    /// Signal to fold and recover; `0.9 sinc` when absent.
    #[serde(default)]
    pub signal: Option<BandlimitedSignal>,
    #[serde(default)]
    pub max_peaks: Option<usize>,
    #[serde(default)]
    pub density_radius: Option<f64>,
    /// Random pairs for the stability probe; none when zero.
    #[serde(default)]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityScan {
    #[serde(default = "d_omega")]
    pub omega: f64,
    #[serde(default = "d_grid")]
    pub x: SeparatedSet,
    #[serde(default)]
    pub jitter: Option<f64>,
    #[serde(default = "d_radii")]
    pub radii: Vec<f64>,
    /// Indices removed before scanning, as after peak removal.
    #[serde(default)]
    pub remove: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn d_alpha() -> f64 {
    0.7
}
fn d_half() -> f64 {
    0.5
}
fn d_lambda() -> f64 {
    0.5
}
fn d_one() -> usize {
    1
}
fn d_ten() -> usize {
    10
}
fn d_thirty() -> usize {
    30
}
fn d_sixty() -> usize {
    60
}
fn d_panels() -> Vec<usize> {
    vec![4, 6, 8]
}
fn d_panel_points() -> usize {
    401
}
fn d_sizes() -> Vec<usize> {
    vec![32, 64, 128]
}
fn d_epsilon() -> f64 {
    0.1
}
fn d_alphas() -> Vec<f64> {
    vec![0.6, 0.7, 0.8]
}
fn d_box() -> i64 {
    3
}
fn d_delta() -> f64 {
    0.75
}
fn d_cheb_bound() -> i64 {
    5
}
fn d_target() -> f64 {
    1e-3
}
fn d_floor() -> f64 {
    1.0
}
fn d_omega() -> f64 {
    1.0
}
fn d_grid() -> SeparatedSet {
    SeparatedSet::uniform(0.5, -128, 127).expect("static grid")
}
fn d_radii() -> Vec<f64> {
    vec![2.0, 4.0, 8.0, 16.0, 32.0]
}

/// Parse a config document. When `kind` is given it must agree with the
/// document, which may omit its own `kind` field.
pub fn parse_config(text: &str, kind: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::usage(format!("config is not valid JSON: {e}")))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::usage("config must be a JSON object"))?;
    if let Some(k) = kind {
        match obj.get("kind") {
            None => {
                obj.insert("kind".into(), serde_json::Value::String(k.name().into()));
            }
            Some(serde_json::Value::String(s)) if s == k.name() => {}
            Some(other) => {
                return Err(Error::usage(format!(
                    "kind: config declares {other} but the subcommand is {k}"
                )))
            }
        }
    }
    let tag = match obj.remove("kind") {
        Some(serde_json::Value::String(s)) => s,
        Some(other) => return Err(Error::usage(format!("kind: expected a string, got {other}"))),
        None => return Err(Error::usage("kind: missing")),
    };
    let kind = ExperimentKind::ALL
        .into_iter()
        .find(|k| k.name() == tag)
        .ok_or_else(|| Error::usage(format!("kind: unknown experiment {tag:?}")))?;
    let cfg = match kind {
        ExperimentKind::DecayCurve => ExperimentConfig::DecayCurve(fields(value)?),
        ExperimentKind::ProlateSpectrum => ExperimentConfig::ProlateSpectrum(fields(value)?),
        ExperimentKind::SvpCompare => ExperimentConfig::SvpCompare(fields(value)?),
        ExperimentKind::Witness => ExperimentConfig::Witness(fields(value)?),
        ExperimentKind::UnfoldDemo => ExperimentConfig::UnfoldDemo(fields(value)?),
        ExperimentKind::DensityScan => ExperimentConfig::DensityScan(fields(value)?),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn fields<T: serde::de::DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::usage(format!("{path}: {}", e.into_inner()))
    })
}

fn field(name: &str, ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::usage(format!("{name}: {}", msg())))
    }
}

fn unit_interval(name: &str, a: f64) -> Result<()> {
    field(name, a > 0.0 && a < 1.0, || format!("must lie in (0, 1), got {a}"))
}

fn positive(name: &str, v: f64) -> Result<()> {
    field(name, v.is_finite() && v > 0.0, || format!("must be positive, got {v}"))
}

impl ExperimentConfig {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            ExperimentConfig::DecayCurve(_) => ExperimentKind::DecayCurve,
            ExperimentConfig::ProlateSpectrum(_) => ExperimentKind::ProlateSpectrum,
            ExperimentConfig::SvpCompare(_) => ExperimentKind::SvpCompare,
            ExperimentConfig::Witness(_) => ExperimentKind::Witness,
            ExperimentConfig::UnfoldDemo(_) => ExperimentKind::UnfoldDemo,
            ExperimentConfig::DensityScan(_) => ExperimentKind::DensityScan,
        }
    }

    /// Seed used by randomized kinds.
    pub fn seed(&self) -> Option<u64> {
        match self {
            ExperimentConfig::UnfoldDemo(c) => Some(c.seed),
            ExperimentConfig::DensityScan(c) => Some(c.seed),
            _ => None,
        }
    }

    /// Returns false for kinds that draw no random numbers.
    pub fn set_seed(&mut self, seed: u64) -> bool {
        match self {
            ExperimentConfig::UnfoldDemo(c) => c.seed = seed,
            ExperimentConfig::DensityScan(c) => c.seed = seed,
            _ => return false,
        }
        true
    }

    /// Schema checks beyond types, run before any computation.
    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::DecayCurve(c) => {
                unit_interval("alpha", c.alpha)?;
                positive("lambda", c.lambda)?;
                field("n_min", c.n_min >= 1, || "must be at least 1".into())?;
                field("n_max", c.n_max >= c.n_min && c.n_max <= crate::certificates::MAX_BINOMIAL_ORDER, || {
                    format!("must lie in [n_min, {}]", crate::certificates::MAX_BINOMIAL_ORDER)
                })?;
                for (i, &n) in c.panels.iter().enumerate() {
                    field(&format!("panels[{i}]"), n >= 2 && n % 2 == 0 && n <= crate::certificates::MAX_BINOMIAL_ORDER, || {
                        format!("panel orders must be even and at least 2, got {n}")
                    })?;
                }
                field("panel_points", c.panel_points >= 2, || "must be at least 2".into())
            }
            ExperimentConfig::ProlateSpectrum(c) => {
                unit_interval("alpha", c.alpha)?;
                positive("epsilon", c.epsilon)?;
                field("epsilon", (1.0 + c.epsilon) * c.alpha < 1.0, || "(1 + epsilon) * alpha must be below 1".into())?;
                field("sizes", !c.sizes.is_empty(), || "must not be empty".into())?;
                for (i, &n) in c.sizes.iter().enumerate() {
                    field(&format!("sizes[{i}]"), (2..=1024).contains(&n), || format!("must lie in [2, 1024], got {n}"))?;
                }
                Ok(())
            }
            ExperimentConfig::SvpCompare(c) => {
                field("alphas", !c.alphas.is_empty(), || "must not be empty".into())?;
                for (i, &a) in c.alphas.iter().enumerate() {
                    unit_interval(&format!("alphas[{i}]"), a)?;
                }
                field("n_max", (1..=crate::certificates::MAX_BRUTEFORCE_DIM).contains(&c.n_max), || {
                    format!("must lie in [1, {}]", crate::certificates::MAX_BRUTEFORCE_DIM)
                })?;
                field("bruteforce_bound", (1..=crate::certificates::MAX_BRUTEFORCE_BOUND).contains(&c.bruteforce_bound), || {
                    format!("must lie in [1, {}]", crate::certificates::MAX_BRUTEFORCE_BOUND)
                })?;
                field("lll_delta", c.lll_delta > 0.25 && c.lll_delta < 1.0, || "must lie in (0.25, 1)".into())?;
                field("chebyshev_bound", c.chebyshev_bound >= 1, || "must be at least 1".into())
            }
            ExperimentConfig::Witness(c) => {
                unit_interval("alpha", c.alpha)?;
                positive("lambda", c.lambda)?;
                positive("target", c.target)?;
                positive("floor", c.floor)?;
                field("n_max", (1..=crate::certificates::MAX_BINOMIAL_ORDER).contains(&c.n_max), || {
                    format!("must lie in [1, {}]", crate::certificates::MAX_BINOMIAL_ORDER)
                })
            }
            ExperimentConfig::UnfoldDemo(c) => {
                positive("omega", c.omega)?;
                positive("lambda", c.lambda)?;
                positive("energy_bound", c.energy_bound)?;
                check_jitter(&c.x, c.jitter)?;
                if let Some(s) = &c.signal {
                    field("signal.omega", s.omega() == c.omega, || "must equal omega".into())?;
                }
                if let Some(r) = c.density_radius {
                    positive("density_radius", r)?;
                }
                Ok(())
            }
            ExperimentConfig::DensityScan(c) => {
                positive("omega", c.omega)?;
                check_jitter(&c.x, c.jitter)?;
                field("radii", !c.radii.is_empty(), || "must not be empty".into())?;
                for (i, &r) in c.radii.iter().enumerate() {
                    positive(&format!("radii[{i}]"), r)?;
                }
                for (i, &k) in c.remove.iter().enumerate() {
                    field(&format!("remove[{i}]"), k < c.x.len(), || format!("index {k} outside the set"))?;
                }
                Ok(())
            }
        }
    }
}

fn check_jitter(x: &SeparatedSet, jitter: Option<f64>) -> Result<()> {
    if let Some(j) = jitter {
        let l = x.lattice();
        field("jitter", l.is_some(), || "needs a lattice set".into())?;
        let step = l.map_or(0.0, |l| l.alpha);
        field("jitter", j >= 0.0 && 2.0 * j < step, || {
            format!("must lie in [0, step/2) = [0, {}), got {j}", step / 2.0)
        })?;
    }
    Ok(())
}

pub(crate) fn default_demo_signal(omega: f64) -> BandlimitedSignal {
    BandlimitedSignal::new(
        omega,
        vec![Atom {
            center: 0.0,
            coeff: Scalar::new(0.9, 0.0),
        }],
    )
    .expect("static signal")
}
