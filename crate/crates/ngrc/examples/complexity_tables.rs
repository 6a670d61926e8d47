//! Print the built-in training-cost comparison tables (cost = units x M x
//! d_total^2) with speedups relative to the shared-readout NG-RC row.
//!
//!     cargo run --example complexity_tables

use std::io::stdout;

use ngrc::harness::{complexity_report, complexity_table_flat, complexity_table_small};
use ngrc::io::write_complexity_csv;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (name, entries) in [
        ("three-scale system, L = J = I = 8", complexity_table_small()),
        ("single-scale system, L = 40", complexity_table_flat()),
    ] {
        println!("# {name}");
        let rows = complexity_report(&entries, "ours-shared")?;
        write_complexity_csv(&mut stdout(), &rows)?;
        println!();
    }
    Ok(())
}
