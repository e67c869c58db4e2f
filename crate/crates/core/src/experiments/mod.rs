//! Experiment pipelines behind the command-line front end. Each kind reads
//! one JSON config and writes CSV/JSON artifacts plus a run manifest.

mod config;
mod plotdata;
mod run;

pub use config::{
    parse_config, DecayCurve, DensityScan, ExperimentConfig, ExperimentKind, ProlateSpectrum, SvpCompare,
    UnfoldDemo, WitnessConfig,
};
pub use plotdata::{render_plotdata, PlotData, Series};
pub use run::{load_config, plan, run, OutputFile, RunManifest, StageTiming, MANIFEST_FILE};
