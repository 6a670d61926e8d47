//! Train per-location and shared readouts on the same window and compare
//! them: row count, training residual, and the weight-similarity coefficient
//! of the per-location rows.
//!
//!     cargo run --release --example train_readouts

use std::path::Path;

use ngrc::harness::{ExperimentPreset, Harness, PresetName};
use ngrc::io::write_weights;
use ngrc::ridge::{weight_correlation, ReadoutMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let preset = ExperimentPreset::get(PresetName::Flat);
    let grid = preset.generate(120.0)?;
    let harness = Harness::new(&grid, preset);

    let alpha = 2e-5;
    let t_train = 20.0;
    for mode in [ReadoutMode::PerLocation, ReadoutMode::Shared] {
        let (system, window) = harness.accumulate(mode, t_train, 0)?;
        let weights = system.solve(alpha)?;
        println!(
            "{mode}: {} readout row(s) x {} features, trained on samples {window:?} (alpha = {alpha:.0e})",
            weights.weights.nrows(),
            weights.weights.ncols(),
        );
        if mode == ReadoutMode::PerLocation {
            println!("  weight-similarity coefficient C = {:.4}", weight_correlation(&weights)?);
        }
        let name = format!("weights-{mode}.ngrw");
        write_weights(Path::new(&name), &weights)?;
        println!("  wrote {name}");
    }
    Ok(())
}
