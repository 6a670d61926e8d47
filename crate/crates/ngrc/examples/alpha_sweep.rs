//! Grid-search the ridge parameter: the normal equations are accumulated once
//! per training window and re-solved per alpha, so adding grid points is
//! nearly free.
//!
//!     cargo run --release --example alpha_sweep

use ngrc::harness::{ExperimentPreset, Harness, PresetName};
use ngrc::ridge::ReadoutMode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let preset = ExperimentPreset::get(PresetName::Flat);
    let grid = preset.generate(250.0)?;
    let mut harness = Harness::new(&grid, preset);
    harness.n_train_sets = 4;
    harness.n_ics = 5;

    let alphas: Vec<f64> = (0..7).map(|i| 10f64.powi(i - 7)).collect();
    let sweep = harness.sweep_alpha(ReadoutMode::PerLocation, 10.0, &alphas)?;
    println!("alpha        mean horizon (MTU)   std-of-mean   censored");
    for cell in &sweep.cells {
        match &cell.failed {
            Some(err) => println!("{:<12.0e} failed: {err}", cell.axis),
            None => println!(
                "{:<12.0e} {:<20.4} {:<13.4} {}/{}",
                cell.axis,
                cell.mean,
                cell.std_of_mean,
                cell.n_censored,
                cell.horizons.len()
            ),
        }
    }
    println!("best alpha: {:?}", sweep.best_axis);
    Ok(())
}
