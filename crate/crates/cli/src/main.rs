use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use modfold::experiments::{load_config, plan, render_plotdata, run, ExperimentKind};
use modfold::Error;

#[derive(Parser)]
#[command(name = "modfold", version, about = "Folded sampling of bandlimited signals: experiments and certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed of randomized experiments.
    #[arg(long)]
    seed: Option<u64>,
    /// Validate the config and print the planned stages.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Binomial certificate residuals against N, with critical-function panels.
    #[command(name = "decay_curve", alias = "decay-curve")]
    DecayCurve(RunArgs),
    /// Prolate matrix spectra, plunge values and Minkowski bounds.
    #[command(name = "prolate_spectrum", alias = "prolate-spectrum")]
    ProlateSpectrum(RunArgs),
    /// Brute-force and LLL certificates against explicit constructions.
    #[command(name = "svp_compare", alias = "svp-compare")]
    SvpCompare(RunArgs),
    /// Search for a high-energy function with nearly vanishing folded samples.
    Witness(RunArgs),
    /// Fold and recover a signal under an energy bound, with an optional stability probe.
    #[command(name = "unfold_demo", alias = "unfold-demo")]
    UnfoldDemo(RunArgs),
    /// Lower density of a sampling set over a range of window lengths.
    #[command(name = "density_scan", alias = "density-scan")]
    DensityScan(RunArgs),
    /// Convert an experiment CSV into plot data.
    Plotdata {
        #[arg(long)]
        csv: PathBuf,
        /// Output file; defaults to the CSV path with a `.plot.json` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(kind: ExperimentKind, args: &RunArgs) -> anyhow::Result<()> {
    let mut cfg = load_config(&args.config, Some(kind))?;
    if let Some(seed) = args.seed {
        if !cfg.set_seed(seed) {
            eprintln!("note: {kind} draws no random numbers; --seed ignored");
        }
    }
    if args.dry_run {
        println!("{kind}: config {} is valid", args.config.display());
        for (i, s) in plan(&cfg)?.iter().enumerate() {
            println!("  stage {}: {s}", i + 1);
        }
        println!("  outputs -> {}", args.out.display());
        return Ok(());
    }
    let manifest = run(&cfg, &args.out)?;
    for o in &manifest.outputs {
        println!("{}", args.out.join(&o.path).display());
    }
    println!("{}", args.out.join(modfold::experiments::MANIFEST_FILE).display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::DecayCurve(a) => execute(ExperimentKind::DecayCurve, a),
        Command::ProlateSpectrum(a) => execute(ExperimentKind::ProlateSpectrum, a),
        Command::SvpCompare(a) => execute(ExperimentKind::SvpCompare, a),
        Command::Witness(a) => execute(ExperimentKind::Witness, a),
        Command::UnfoldDemo(a) => execute(ExperimentKind::UnfoldDemo, a),
        Command::DensityScan(a) => execute(ExperimentKind::DensityScan, a),
        Command::Plotdata { csv, out } => plotdata(csv, out.clone()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map_or(1, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

fn plotdata(csv: &Path, out: Option<PathBuf>) -> anyhow::Result<()> {
    let data = render_plotdata(csv)?;
    let out = out.unwrap_or_else(|| csv.with_extension("plot.json"));
    let text = serde_json::to_string_pretty(&data).context("serializing plot data")?;
    std::fs::write(&out, text + "\n").map_err(|e| Error::Io {
        path: out.display().to_string(),
        source: e,
    })?;
    println!("{}", out.display());
    Ok(())
}
