//! Train on one window, then run the parallel readouts autonomously: each
//! location's prediction feeds its neighbours' stencils at the next step.
//! Prints the NRMSE curve and the prediction horizon (NRMSE = 0.3 crossing).
//!
//!     cargo run --release --example closed_loop_forecast

use ngrc::forecast::{evaluate_forecast, HORIZON_THRESHOLD};
use ngrc::harness::{ExperimentPreset, Harness, PresetName};
use ngrc::ridge::ReadoutMode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let preset = ExperimentPreset::get(PresetName::Flat);
    let lyapunov = preset.lyapunov_time.unwrap();
    let grid = preset.generate(120.0)?;
    let harness = Harness::new(&grid, preset);

    let (system, window) = harness.accumulate(ReadoutMode::Shared, 10.0, 0)?;
    let weights = system.solve(1e-5)?;

    let (warmup_range, truth_range) = harness.test_window(0)?;
    assert!(warmup_range.start >= window.end, "test data must be unseen");
    let warmup = grid
        .slice_cols(warmup_range.start, warmup_range.len())?
        .normalize_with(weights.norm_mean, weights.norm_std);
    let truth = grid
        .slice_cols(truth_range.start, truth_range.len())?
        .normalize_with(weights.norm_mean, weights.norm_std);

    let (result, series, horizon) = evaluate_forecast(
        &weights,
        &warmup.data,
        &truth.data,
        grid.dt_save,
        HORIZON_THRESHOLD,
    )?;
    println!(
        "forecast {} steps; diverged: {:?}",
        result.predicted.ncols(),
        result.diverged_at
    );
    for (s, v) in series.values.iter().enumerate().step_by(50) {
        println!("  t = {:5.2} MTU   NRMSE = {v:.4}", (s + 1) as f64 * series.dt_save);
    }
    println!(
        "prediction horizon: {:.2} MTU = {:.2} Lyapunov times{}",
        horizon.time,
        horizon.time / lyapunov,
        if horizon.censored { " (censored at window end)" } else { "" }
    );
    Ok(())
}
