use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::*;
use crate::certificates::{
    binomial_bound, binomial_certificate, chebyshev_certificate, critical_function, instability_witness,
    svp_certificate, SvpMethod,
};
use crate::error::{Error, Result};
use crate::prolate::{plunge_decay_fit, prolate_matrix, spectrum};
use crate::signal::{density_report, fold_real, fold_samples, SeparatedSet};
use crate::unfolding::{stability_probe, Unfolder, UnfoldConfig};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
}

/// Everything about a run that is not a result: the only artifact carrying
/// timestamps and wall-clock times.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub version: String,
    pub timestamp_unix: u64,
    pub outputs: Vec<OutputFile>,
    pub stages: Vec<StageTiming>,
}

pub fn load_config(path: &Path, kind: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_config(&text, kind)
}

/// Stages `run` would execute, without computing anything.
pub fn plan(cfg: &ExperimentConfig) -> Result<Vec<String>> {
    cfg.validate()?;
    Ok(match cfg {
        ExperimentConfig::DecayCurve(c) => {
            let mut v = vec![format!("binomial residuals for N = {}..={} at alpha = {}", c.n_min, c.n_max, c.alpha)];
            v.extend(c.panels.iter().map(|n| format!("critical function panel N = {n}")));
            v
        }
        ExperimentConfig::ProlateSpectrum(c) => {
            let mut v: Vec<String> = c.sizes.iter().map(|n| format!("spectrum of Q(alpha = {}, N = {n})", c.alpha)).collect();
            v.push("plunge decay fit".into());
            v
        }
        ExperimentConfig::SvpCompare(c) => c
            .alphas
            .iter()
            .map(|a| format!("bruteforce, LLL and explicit certificates for alpha = {a}, N = 1..={}", c.n_max))
            .collect(),
        ExperimentConfig::Witness(c) => vec![format!(
            "binomial witness search at alpha = {}, N <= {}, target {:e}",
            c.alpha, c.n_max, c.target
        )],
        ExperimentConfig::UnfoldDemo(c) => {
            let mut v = vec!["fold and unfold demo signal".to_string()];
            if c.trials > 0 {
                v.push(format!("stability probe: {} trials, seed {}", c.trials, c.seed));
            }
            v
        }
        ExperimentConfig::DensityScan(c) => vec![format!("density report at {} radii", c.radii.len())],
    })
}

struct Writer {
    dir: PathBuf,
    outputs: Vec<OutputFile>,
    stages: Vec<StageTiming>,
}

impl Writer {
    fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(path.display().to_string(), e))?;
        self.outputs.push(OutputFile {
            path: name.to_string(),
            bytes: contents.len() as u64,
        });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Serde(e.to_string()))?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f().map_err(|e| context(name, e))?;
        self.stages.push(StageTiming {
            stage: name.to_string(),
            wall_ms: t.elapsed().as_secs_f64() * 1e3,
        });
        Ok(out)
    }
}

fn context(stage: &str, e: Error) -> Error {
    match e {
        Error::Numerical(m) => Error::Numerical(format!("{stage}: {m}")),
        Error::Infeasible(m) => Error::Infeasible(format!("{stage}: {m}")),
        Error::Domain(m) => Error::Domain(format!("{stage}: {m}")),
        Error::Usage(m) => Error::Usage(format!("{stage}: {m}")),
        other => other,
    }
}

/// Run an experiment, writing its artifacts and `manifest.json` into `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out.display().to_string(), e))?;
    let mut w = Writer {
        dir: out.to_path_buf(),
        outputs: Vec::new(),
        stages: Vec::new(),
    };
    match cfg {
        ExperimentConfig::DecayCurve(c) => decay_curve(c, &mut w)?,
        ExperimentConfig::ProlateSpectrum(c) => prolate_spectrum(c, &mut w)?,
        ExperimentConfig::SvpCompare(c) => svp_compare(c, &mut w)?,
        ExperimentConfig::Witness(c) => witness(c, &mut w)?,
        ExperimentConfig::UnfoldDemo(c) => unfold_demo(c, &mut w)?,
        ExperimentConfig::DensityScan(c) => density_scan(c, &mut w)?,
    }
    let manifest = RunManifest {
        kind: cfg.kind(),
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        outputs: w.outputs.clone(),
        stages: w.stages.clone(),
    };
    w.json(MANIFEST_FILE, &manifest)?;
    Ok(manifest)
}

fn decay_curve(c: &DecayCurve, w: &mut Writer) -> Result<()> {
    let rows = w.stage("decay", || {
        (c.n_min..=c.n_max)
            .map(|n| {
                let cert = binomial_certificate(n, c.alpha)?;
                Ok((n, cert.sample_norm(), cert.residual(), binomial_bound(n, c.alpha)))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut csv = String::from("N,sample_norm,residual,bound\n");
    for (n, s, r, b) in rows {
        writeln!(csv, "{n},{s:e},{r:e},{b:e}").unwrap();
    }
    w.write("decay.csv", csv.as_bytes())?;
    for &n in &c.panels {
        let (curve, samples) = w.stage(&format!("panel N={n}"), || {
            let g = critical_function(&binomial_certificate(n, c.alpha)?, c.lambda)?;
            let pts = g.sample_points();
            let half = (n as f64 / 2.0 + 4.0) * c.alpha;
            let mut curve = String::from("x,f\n");
            for i in 0..c.panel_points {
                let x = -half + 2.0 * half * i as f64 / (c.panel_points - 1) as f64;
                writeln!(curve, "{x:e},{:e}", g.signal.eval(x).re).unwrap();
            }
            let mut samples = String::from("x,f,folded,near_integer\n");
            for (x, v) in pts.iter().zip(g.samples()) {
                if x.abs() > half {
                    continue;
                }
                let m = fold_real(v, c.lambda);
                writeln!(samples, "{x:e},{v:e},{m:e},{}", u8::from(m.abs() < 0.5 * c.lambda)).unwrap();
            }
            Ok((curve, samples))
        })?;
        w.write(&format!("panel_N{n}.csv"), curve.as_bytes())?;
        w.write(&format!("panel_N{n}_samples.csv"), samples.as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SpectrumSummary {
    reports: Vec<crate::prolate::SpectrumReport>,
    fit: Option<crate::prolate::DecayFit>,
}

fn prolate_spectrum(c: &ProlateSpectrum, w: &mut Writer) -> Result<()> {
    let mut reports = Vec::new();
    for &n in &c.sizes {
        let rep = w.stage(&format!("spectrum N={n}"), || spectrum(&prolate_matrix(c.alpha, n)?, c.epsilon))?;
        let mut csv = String::from("k,mu_k\n");
        for (k, m) in rep.eigenvalues.iter().enumerate() {
            writeln!(csv, "{k},{m:e}").unwrap();
        }
        w.write(&format!("spectrum_N{n}.csv"), csv.as_bytes())?;
        reports.push(rep);
    }
    let fit = if reports.len() >= 2 {
        Some(w.stage("decay fit", || plunge_decay_fit(&reports))?)
    } else {
        None
    };
    w.json("spectrum.json", &SpectrumSummary { reports, fit })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:e}"))
}

fn svp_compare(c: &SvpCompare, w: &mut Writer) -> Result<()> {
    let mut csv = String::from("alpha,N,bruteforce,lll,binomial,chebyshev,lll_within_factor,bruteforce_le_explicit\n");
    for &a in &c.alphas {
        let rows = w.stage(&format!("svp alpha={a}"), || {
            (1..=c.n_max)
                .map(|n| {
                    let bf = svp_certificate(a, n, SvpMethod::Bruteforce { bound: c.bruteforce_bound })?.residual();
                    let lll = svp_certificate(a, n, SvpMethod::Lll { delta: c.lll_delta })?.residual();
                    let bin = if n >= 2 { Some(binomial_certificate(n - 1, a)?.residual()) } else { None };
                    let deg = (n - 1) / 2;
                    let cheb = if deg >= 1 {
                        Some(chebyshev_certificate(deg, a, c.chebyshev_bound)?.residual())
                    } else {
                        None
                    };
                    Ok((n, bf, lll, bin, cheb))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        for (n, bf, lll, bin, cheb) in rows {
            let factor = lll <= 2f64.powf((n as f64 - 1.0) / 2.0) * bf * (1.0 + 1e-9);
            let le = [bin, cheb].iter().flatten().all(|&e| bf <= e * (1.0 + 1e-9));
            writeln!(
                csv,
                "{a},{n},{bf:e},{lll:e},{},{},{},{}",
                fmt_opt(bin),
                fmt_opt(cheb),
                u8::from(factor),
                u8::from(le)
            )
            .unwrap();
        }
    }
    w.write("svp.csv", csv.as_bytes())
}

#[derive(Serialize)]
struct WitnessOut {
    certificate: crate::certificates::CertificateRecord,
    folded_norm_bound: f64,
    trials: Vec<crate::certificates::WitnessTrial>,
}

fn witness(c: &WitnessConfig, w: &mut Writer) -> Result<()> {
    let schedule: Vec<usize> = (1..=c.n_max).collect();
    let found = w.stage("witness search", || instability_witness(c.alpha, c.lambda, c.target, c.floor, &schedule))?;
    let g = &found.witness;
    w.json(
        "witness.json",
        &WitnessOut {
            certificate: g.record(),
            folded_norm_bound: g.folded_norm_bound,
            trials: found.trials.clone(),
        },
    )?;
    let mut csv = String::from("x,g,folded\n");
    for (x, v) in g.sample_points().iter().zip(g.samples()) {
        writeln!(csv, "{x:e},{v:e},{:e}", fold_real(v, c.lambda)).unwrap();
    }
    w.write("witness_samples.csv", csv.as_bytes())
}

fn sampling_set(x: &SeparatedSet, jitter: Option<f64>, seed: u64) -> Result<SeparatedSet> {
    match (jitter, x.lattice()) {
        (Some(j), Some(l)) if j > 0.0 => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            SeparatedSet::jittered(l.alpha, l.start, l.end, j, &mut rng)
        }
        _ => Ok(x.clone()),
    }
}

#[derive(Serialize)]
struct DemoOut {
    seed: u64,
    relative_error: f64,
    peak_budget: usize,
    report: crate::unfolding::RecoveryReport,
}

fn unfold_demo(c: &UnfoldDemo, w: &mut Writer) -> Result<()> {
    let x = sampling_set(&c.x, c.jitter, c.seed)?;
    let mut cfg = UnfoldConfig::new(x, c.omega, c.lambda, c.energy_bound);
    cfg.max_peaks = c.max_peaks;
    cfg.density_radius = c.density_radius;
    let f = c.signal.clone().unwrap_or_else(|| default_demo_signal(c.omega));
    let out = w.stage("unfold", || {
        let un = Unfolder::new(&cfg)?;
        let s = fold_samples(&f, &cfg.x, cfg.lambda)?;
        let report = un.unfold(&s)?;
        let relative_error = report.recovered.difference(&f)?.norm() / f.norm();
        Ok(DemoOut {
            seed: c.seed,
            relative_error,
            peak_budget: un.budget(),
            report,
        })
    })?;
    w.json("unfold_report.json", &out)?;
    if c.trials > 0 {
        let table = w.stage("stability probe", || stability_probe(&cfg, c.trials, c.seed))?;
        let mut buf = Vec::new();
        table.write_csv(&mut buf).map_err(|e| Error::io("stability.csv", e))?;
        w.write("stability.csv", &buf)?;
    }
    Ok(())
}

fn density_scan(c: &DensityScan, w: &mut Writer) -> Result<()> {
    let x = sampling_set(&c.x, c.jitter, c.seed)?.without(&c.remove)?;
    let rows = w.stage("density", || {
        c.radii
            .iter()
            .map(|&r| density_report(&x, r))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut csv = String::from("radius,min_count_rate,exceeds_omega,worst_start,separation\n");
    for r in rows {
        writeln!(
            csv,
            "{:e},{:e},{},{:e},{:e}",
            r.radius,
            r.min_count_rate,
            u8::from(r.exceeds(c.omega)),
            r.worst_start,
            r.separation
        )
        .unwrap();
    }
    w.write("density.csv", csv.as_bytes())
}
