//! The model is translation-invariant, so independently trained per-location
//! readouts should converge to the same weights. Watch the weight-similarity
//! coefficient C approach 1 as the training window grows.
//!
//!     cargo run --release --example symmetry_discovery

use ngrc::harness::{ExperimentPreset, Harness, PresetName};
use ngrc::ridge::{weight_correlation, ReadoutMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let preset = ExperimentPreset::get(PresetName::Flat);
    let grid = preset.generate(300.0)?;
    let harness = Harness::new(&grid, preset);

    println!("t_train (MTU)   weight-similarity C");
    for t_train in [2.0, 5.0, 10.0, 20.0, 60.0] {
        let (system, _) = harness.accumulate(ReadoutMode::PerLocation, t_train, 0)?;
        let weights = system.solve(2e-5)?;
        println!("{t_train:<15} {:.4}", weight_correlation(&weights)?);
    }
    Ok(())
}
