//! Mean prediction horizon versus training time, contrasting per-location
//! readouts with a single shared readout. The shared readout pools all L
//! locations' data, so it reaches its plateau with far shorter observations.
//!
//!     cargo run --release --example training_time_sweep

use ngrc::harness::{AlphaPolicy, ExperimentPreset, Harness, PresetName};
use ngrc::ridge::ReadoutMode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let preset = ExperimentPreset::get(PresetName::Flat);
    let lyapunov = preset.lyapunov_time.unwrap();
    let grid = preset.generate(300.0)?;
    let mut harness = Harness::new(&grid, preset);
    harness.n_train_sets = 4;
    harness.n_ics = 5;

    let policy = AlphaPolicy::OptimizedInSample(vec![1e-7, 1e-6, 1e-5, 1e-4, 1e-3]);
    for mode in [ReadoutMode::PerLocation, ReadoutMode::Shared] {
        let t_grid = [1.0, 2.0, 5.0, 10.0, 20.0];
        let sweep = harness.sweep_train_time(mode, &t_grid, &policy)?;
        println!("{mode}:");
        println!("  t_train (MTU)   mean horizon (Lyapunov times)   std-of-mean");
        for cell in &sweep.cells {
            match &cell.failed {
                Some(err) => println!("  {:<15} failed: {err}", cell.axis),
                None => println!(
                    "  {:<15} {:<31.3} {:.3}",
                    cell.axis,
                    cell.mean / lyapunov,
                    cell.std_of_mean / lyapunov
                ),
            }
        }
    }
    Ok(())
}
