//! Warm-up, closed-loop autonomous forecasting, and NRMSE / prediction
//! horizon scoring. Everything here operates in normalized units.

use nalgebra::DMatrix;

use crate::features::fill_features;
use crate::ridge::ReadoutWeights;
use crate::{Error, Result};

/// Amplitude (normalized units) beyond which a closed-loop forecast is
/// considered diverged and truncated.
pub const DIVERGENCE_THRESHOLD: f64 = 1e3;

/// NRMSE threshold defining the prediction horizon.
pub const HORIZON_THRESHOLD: f64 = 0.3;

/// Closed-loop forecast output. `predicted` has one column per produced step
/// and may be shorter than requested if the forecast diverged.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub predicted: DMatrix<f64>,
    pub diverged_at: Option<usize>,
}

/// Forecast paired with its ground truth for scoring and export.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    /// L x N_steps, normalized units.
    pub predicted: DMatrix<f64>,
    /// Ground truth over the same steps (truncated alongside the forecast).
    pub truth: DMatrix<f64>,
    pub dt_save: f64,
    pub diverged_at: Option<usize>,
}

/// Per-step NRMSE values; entry `s` corresponds to forecast time `s * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct NrmseSeries {
    pub values: Vec<f64>,
    pub dt_save: f64,
}

impl NrmseSeries {
    pub fn duration(&self) -> f64 {
        self.values.len() as f64 * self.dt_save
    }
}

/// Prediction horizon: time of the first NRMSE sample at or above the
/// threshold. `censored` marks a series that never crossed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    pub time: f64,
    pub censored: bool,
}

fn check_weights(w: &ReadoutWeights, history: &DMatrix<f64>) -> Result<()> {
    if history.ncols() != w.cfg.k {
        return Err(Error::InvalidInput(format!(
            "history has {} columns but k = {}",
            history.ncols(),
            w.cfg.k
        )));
    }
    match w.mode {
        crate::ridge::ReadoutMode::PerLocation if w.weights.nrows() != history.nrows() => {
            Err(Error::InvalidInput(format!(
                "{} readout rows but {} locations",
                w.weights.nrows(),
                history.nrows()
            )))
        }
        _ => Ok(()),
    }
}

/// One open-loop step: predict the next field from the last k saved states
/// (L x k, newest column last).
pub fn one_step_predict(w: &ReadoutWeights, history: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_weights(w, history)?;
    let l_n = history.nrows();
    let mut features = vec![0.0; w.cfg.d_total()];
    let mut out = vec![0.0; l_n];
    for l in 0..l_n {
        fill_features(history.as_view(), l, &w.cfg, &mut features);
        out[l] = w
            .row(l)
            .iter()
            .zip(&features)
            .map(|(wi, fi)| wi * fi)
            .sum();
    }
    Ok(out)
}

/// Iterate one-step predictions, feeding each output field back into the
/// history window. Divergence truncates the forecast at the offending step.
pub fn closed_loop_forecast(
    w: &ReadoutWeights,
    warmup: &DMatrix<f64>,
    n_steps: usize,
) -> Result<Forecast> {
    check_weights(w, warmup)?;
    let l_n = warmup.nrows();
    let mut history = warmup.clone();
    let mut predicted = DMatrix::zeros(l_n, n_steps);
    let mut diverged_at = None;

    for step in 0..n_steps {
        let next = one_step_predict(w, &history)?;
        if next
            .iter()
            .any(|v| !v.is_finite() || v.abs() > DIVERGENCE_THRESHOLD)
        {
            diverged_at = Some(step);
            predicted = predicted.columns(0, step).into_owned();
            break;
        }
        predicted.column_mut(step).copy_from_slice(&next);
        // shift the history window left and append the new field
        if w.cfg.k > 1 {
            for col in 0..w.cfg.k - 1 {
                let src = history.column(col + 1).into_owned();
                history.column_mut(col).copy_from(&src);
            }
        }
        history.column_mut(w.cfg.k - 1).copy_from_slice(&next);
    }
    Ok(Forecast {
        predicted,
        diverged_at,
    })
}

/// Per-step NRMSE over locations: sqrt(mean_l (truth - pred)^2).
pub fn nrmse(truth: &DMatrix<f64>, pred: &DMatrix<f64>, dt_save: f64) -> Result<NrmseSeries> {
    if truth.shape() != pred.shape() {
        return Err(Error::InvalidInput(format!(
            "shape mismatch: truth {:?} vs prediction {:?}",
            truth.shape(),
            pred.shape()
        )));
    }
    let l_n = truth.nrows() as f64;
    let values = (0..truth.ncols())
        .map(|m| {
            let sq: f64 = truth
                .column(m)
                .iter()
                .zip(pred.column(m).iter())
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            (sq / l_n).sqrt()
        })
        .collect();
    Ok(NrmseSeries { values, dt_save })
}

/// First time the series reaches `threshold` (>= comparison, no
/// interpolation); censored at the series duration if never crossed.
pub fn prediction_horizon(series: &NrmseSeries, threshold: f64) -> Result<Horizon> {
    if series.values.is_empty() {
        return Err(Error::InvalidInput("empty NRMSE series".into()));
    }
    if threshold <= 0.0 {
        return Err(Error::InvalidInput("threshold must be positive".into()));
    }
    for (idx, &v) in series.values.iter().enumerate() {
        if v >= threshold {
            return Ok(Horizon {
                time: idx as f64 * series.dt_save,
                censored: false,
            });
        }
    }
    Ok(Horizon {
        time: series.duration(),
        censored: true,
    })
}

/// Run a closed-loop forecast against ground truth and score it.
///
/// A forecast that diverges before crossing the NRMSE threshold reports the
/// truncation time as its (non-censored) horizon.
pub fn evaluate_forecast(
    w: &ReadoutWeights,
    warmup: &DMatrix<f64>,
    truth: &DMatrix<f64>,
    dt_save: f64,
    threshold: f64,
) -> Result<(ForecastResult, NrmseSeries, Horizon)> {
    let n_steps = truth.ncols();
    let forecast = closed_loop_forecast(w, warmup, n_steps)?;
    let produced = forecast.predicted.ncols();
    let truth_cut = truth.columns(0, produced).into_owned();
    let series = nrmse(&truth_cut, &forecast.predicted, dt_save)?;
    let horizon = if produced == 0 {
        Horizon {
            time: 0.0,
            censored: forecast.diverged_at.is_none(),
        }
    } else {
        let h = prediction_horizon(&series, threshold)?;
        if h.censored && forecast.diverged_at.is_some() {
            Horizon {
                time: series.duration(),
                censored: false,
            }
        } else {
            h
        }
    };
    Ok((
        ForecastResult {
            predicted: forecast.predicted,
            truth: truth_cut,
            dt_save,
            diverged_at: forecast.diverged_at,
        },
        series,
        horizon,
    ))
}
