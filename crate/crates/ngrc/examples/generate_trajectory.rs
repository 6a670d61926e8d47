//! Integrate the flat (single-scale) preset and persist the recording both as
//! the binary trajectory format and as CSV.
//!
//!     cargo run --release --example generate_trajectory

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use ngrc::harness::{ExperimentPreset, PresetName};
use ngrc::io::{write_trajectory, write_trajectory_csv};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let preset = ExperimentPreset::get(PresetName::Flat);
    let t_record = 100.0;
    println!(
        "integrating {} locations for {t_record} MTU (h = {}, save every {} MTU)...",
        preset.params.l, preset.h_internal, preset.dt_save
    );
    let grid = preset.generate(t_record)?;
    let (mean, std) = grid.stats();
    println!(
        "recorded {} x {} samples; mean = {mean:.4}, std = {std:.4}",
        grid.n_locations(),
        grid.n_samples()
    );

    write_trajectory(Path::new("flat.l96t"), &grid)?;
    let mut csv = BufWriter::new(File::create("flat.csv")?);
    write_trajectory_csv(&mut csv, &grid)?;
    println!("wrote flat.l96t and flat.csv");
    Ok(())
}
