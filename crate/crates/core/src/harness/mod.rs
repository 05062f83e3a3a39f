//! Experiment orchestration: per-artist sweeps over time step and rolling
//! step, single-shot baselines, model comparison and figure tables.

pub mod compare;
pub mod config;
pub mod figures;
pub mod sweep;

pub use compare::{run_compare, CompareReport, COLUMNS, METRICS};
pub use config::{ExperimentConfig, ModelKind, RunSettings, StepRange};
pub use figures::{emit_figures, figure_csv};
pub use sweep::{load_sweep, run_cell, run_sweep, sweep_artists, ArtistData, SweepResult};
