//! Forecasting spatiotemporal chaos of the multi-scale Lorenz96 model with
//! parallel next-generation reservoir computers (NG-RCs).
//!
//! The pipeline: integrate the Lorenz96 equations ([`lorenz96`]), build local
//! spatiotemporal polynomial features ([`features`]), fit linear readouts by
//! ridge regression ([`ridge`]), run closed-loop forecasts and score them
//! ([`forecast`]), and orchestrate sweeps and complexity accounting
//! ([`harness`]). File persistence and CSV emission live in [`io`].

pub mod config;
pub mod features;
pub mod forecast;
pub mod harness;
pub mod io;
pub mod lorenz96;
pub mod ridge;

pub use config::RunConfig;
pub use features::{DesignMatrix, FeatureConfig, FeatureVector};
pub use forecast::{ForecastResult, Horizon, NrmseSeries};
pub use harness::{ComplexityEntry, ExperimentPreset, PresetName, SweepResult};
pub use lorenz96::{ModelParams, SimState, TrajectoryGrid};
pub use ridge::{ReadoutMode, ReadoutWeights, RidgeConfig};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical blow-up at step {step} (t = {t} MTU)")]
    NumericalBlowup { step: usize, t: f64 },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("rank-deficient normal matrix at alpha = 0; use alpha > 0")]
    RankDeficient,

    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    #[error("incompatible configuration: field `{field}` differs ({detail})")]
    Incompatible { field: String, detail: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
