//! File persistence: binary trajectory and weight formats plus CSV export.
//!
//! All floating-point persistence is IEEE-754 binary64, little-endian.
//!
//! Trajectory format: magic "L96T", version u32, L u64, M_total u64,
//! dt_save f64, t0 f64, norm_mean f64, norm_std f64, normalized u8,
//! then row-major (location-major) f64 data.
//!
//! Weight format: magic "NGRW", version u32, mode u8 (0 = independent,
//! 1 = shared), rows u64, d_total u64, k u64, n_nn u64, c f64, alpha f64,
//! norm_mean f64, norm_std f64, then row-major f64 weights.

use nalgebra::DMatrix;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::features::FeatureConfig;
use crate::forecast::NrmseSeries;
use crate::harness::{ComplexityRow, SweepResult};
use crate::lorenz96::TrajectoryGrid;
use crate::ridge::{ReadoutMode, ReadoutWeights};
use crate::{Error, Result};

const TRAJECTORY_MAGIC: &[u8; 4] = b"L96T";
const WEIGHTS_MAGIC: &[u8; 4] = b"NGRW";
const FORMAT_VERSION: u32 = 1;

fn write_u32(w: &mut impl Write, v: u32) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn write_u64(w: &mut impl Write, v: u64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn write_f64(w: &mut impl Write, v: f64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn read_exact<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    Ok(u32::from_le_bytes(read_exact::<4>(r)?))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    Ok(u64::from_le_bytes(read_exact::<8>(r)?))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(read_exact::<8>(r)?))
}

fn check_magic(r: &mut impl Read, expected: &[u8; 4], what: &str) -> Result<()> {
    let magic = read_exact::<4>(r)?;
    if &magic != expected {
        return Err(Error::Format(format!(
            "bad magic bytes for {what} file: expected {expected:?}, found {magic:?}"
        )));
    }
    let version = read_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported {what} format version {version}"
        )));
    }
    Ok(())
}

pub fn write_trajectory(path: &Path, grid: &TrajectoryGrid) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(TRAJECTORY_MAGIC)?;
    write_u32(&mut w, FORMAT_VERSION)?;
    write_u64(&mut w, grid.n_locations() as u64)?;
    write_u64(&mut w, grid.n_samples() as u64)?;
    write_f64(&mut w, grid.dt_save)?;
    write_f64(&mut w, grid.t0)?;
    write_f64(&mut w, grid.norm_mean)?;
    write_f64(&mut w, grid.norm_std)?;
    w.write_all(&[grid.normalized as u8])?;
    for l in 0..grid.n_locations() {
        for m in 0..grid.n_samples() {
            write_f64(&mut w, grid.data[(l, m)])?;
        }
    }
    Ok(w.flush()?)
}

pub fn read_trajectory(path: &Path) -> Result<TrajectoryGrid> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    check_magic(&mut r, TRAJECTORY_MAGIC, "trajectory")?;
    let l_n = read_u64(&mut r)? as usize;
    let m_n = read_u64(&mut r)? as usize;
    let dt_save = read_f64(&mut r)?;
    let t0 = read_f64(&mut r)?;
    let norm_mean = read_f64(&mut r)?;
    let norm_std = read_f64(&mut r)?;
    let normalized = read_exact::<1>(&mut r)?[0] != 0;
    let mut data = DMatrix::zeros(l_n, m_n);
    for l in 0..l_n {
        for m in 0..m_n {
            data[(l, m)] = read_f64(&mut r)?;
        }
    }
    Ok(TrajectoryGrid {
        data,
        dt_save,
        t0,
        norm_mean,
        norm_std,
        normalized,
    })
}

pub fn write_weights(path: &Path, weights: &ReadoutWeights) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(WEIGHTS_MAGIC)?;
    write_u32(&mut w, FORMAT_VERSION)?;
    w.write_all(&[match weights.mode {
        ReadoutMode::PerLocation => 0u8,
        ReadoutMode::Shared => 1u8,
    }])?;
    write_u64(&mut w, weights.weights.nrows() as u64)?;
    write_u64(&mut w, weights.weights.ncols() as u64)?;
    write_u64(&mut w, weights.cfg.k as u64)?;
    write_u64(&mut w, weights.cfg.n_nn as u64)?;
    write_f64(&mut w, weights.cfg.c)?;
    write_f64(&mut w, weights.alpha)?;
    write_f64(&mut w, weights.norm_mean)?;
    write_f64(&mut w, weights.norm_std)?;
    for r in 0..weights.weights.nrows() {
        for c in 0..weights.weights.ncols() {
            write_f64(&mut w, weights.weights[(r, c)])?;
        }
    }
    Ok(w.flush()?)
}

pub fn read_weights(path: &Path) -> Result<ReadoutWeights> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    check_magic(&mut r, WEIGHTS_MAGIC, "weights")?;
    let mode = match read_exact::<1>(&mut r)?[0] {
        0 => ReadoutMode::PerLocation,
        1 => ReadoutMode::Shared,
        other => return Err(Error::Format(format!("unknown mode tag {other}"))),
    };
    let rows = read_u64(&mut r)? as usize;
    let d_total = read_u64(&mut r)? as usize;
    let k = read_u64(&mut r)? as usize;
    let n_nn = read_u64(&mut r)? as usize;
    let c = read_f64(&mut r)?;
    let alpha = read_f64(&mut r)?;
    let norm_mean = read_f64(&mut r)?;
    let norm_std = read_f64(&mut r)?;
    let cfg = FeatureConfig { k, n_nn, c };
    if cfg.d_total() != d_total {
        return Err(Error::Format(format!(
            "d_total = {d_total} inconsistent with k = {k}, n_nn = {n_nn}"
        )));
    }
    let mut weights = DMatrix::zeros(rows, d_total);
    for row in 0..rows {
        for col in 0..d_total {
            weights[(row, col)] = read_f64(&mut r)?;
        }
    }
    Ok(ReadoutWeights {
        mode,
        weights,
        cfg,
        alpha,
        norm_mean,
        norm_std,
    })
}

/// CSV with header `t,x_1,...,x_L`, one row per time sample.
pub fn write_trajectory_csv(out: &mut impl Write, grid: &TrajectoryGrid) -> Result<()> {
    write!(out, "t")?;
    for l in 1..=grid.n_locations() {
        write!(out, ",x_{l}")?;
    }
    writeln!(out)?;
    for m in 0..grid.n_samples() {
        write!(out, "{}", grid.t0 + m as f64 * grid.dt_save)?;
        for l in 0..grid.n_locations() {
            write!(out, ",{}", grid.data[(l, m)])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// CSV with header `t,nrmse`.
pub fn write_nrmse_csv(out: &mut impl Write, series: &NrmseSeries, t0: f64) -> Result<()> {
    writeln!(out, "t,nrmse")?;
    for (i, v) in series.values.iter().enumerate() {
        writeln!(out, "{},{v}", t0 + i as f64 * series.dt_save)?;
    }
    Ok(())
}

/// CSV export of the weight rows for inspection.
pub fn write_weights_csv(out: &mut impl Write, weights: &ReadoutWeights) -> Result<()> {
    write!(out, "row")?;
    for c in 0..weights.weights.ncols() {
        write!(out, ",w_{c}")?;
    }
    writeln!(out)?;
    for r in 0..weights.weights.nrows() {
        write!(out, "{r}")?;
        for c in 0..weights.weights.ncols() {
            write!(out, ",{}", weights.weights[(r, c)])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// CSV with header `axis,mean,std_of_mean,n`, one row per sweep cell.
pub fn write_sweep_csv(out: &mut impl Write, sweep: &SweepResult) -> Result<()> {
    writeln!(out, "axis,mean,std_of_mean,n")?;
    for cell in &sweep.cells {
        if cell.failed.is_some() {
            writeln!(out, "{},failed,failed,0", cell.axis)?;
        } else {
            writeln!(
                out,
                "{},{},{},{}",
                cell.axis,
                cell.mean,
                cell.std_of_mean,
                cell.horizons.len()
            )?;
        }
    }
    Ok(())
}

/// Raw per-trial horizons behind a sweep.
pub fn write_sweep_samples_csv(out: &mut impl Write, sweep: &SweepResult) -> Result<()> {
    writeln!(out, "axis,sample,horizon")?;
    for cell in &sweep.cells {
        for (i, h) in cell.horizons.iter().enumerate() {
            writeln!(out, "{},{i},{h}", cell.axis)?;
        }
    }
    Ok(())
}

/// CSV matching the complexity comparison table columns.
pub fn write_complexity_csv(out: &mut impl Write, rows: &[ComplexityRow]) -> Result<()> {
    writeln!(out, "label,model,m,d_total,n_in,n_out,n_units,cost,speedup")?;
    for row in rows {
        let e = &row.entry;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            e.label, e.model, e.m, e.d_total, e.n_in, e.n_out, e.n_units, row.cost, row.speedup
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{complexity_report, complexity_table_small};
    use nalgebra::DMatrix;
    use tempfile::tempdir;

    fn sample_grid() -> TrajectoryGrid {
        let data = DMatrix::from_fn(3, 5, |r, c| (r as f64 + 1.0) * 0.25 - c as f64 * 1.5);
        let mut g = TrajectoryGrid::new(data, 0.01, 2.0);
        g.norm_mean = 0.5;
        g.norm_std = 2.5;
        g.normalized = true;
        g
    }

    #[test]
    fn trajectory_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("grid.l96t");
        let grid = sample_grid();
        write_trajectory(&path, &grid).unwrap();
        let back = read_trajectory(&path).unwrap();
        assert_eq!(grid, back);
    }

    #[test]
    fn weights_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("w.ngrw");
        let cfg = FeatureConfig::new(2, 1);
        let w = ReadoutWeights {
            mode: ReadoutMode::Shared,
            weights: DMatrix::from_fn(1, cfg.d_total(), |_, c| (c as f64).sin()),
            cfg,
            alpha: 1e-3,
            norm_mean: 0.1,
            norm_std: 1.7,
        };
        write_weights(&path, &w).unwrap();
        assert_eq!(read_weights(&path).unwrap(), w);
    }

    #[test]
    fn corrupt_magic_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.ngrw");
        std::fs::write(&path, b"XXXX\x01\x00\x00\x00garbage").unwrap();
        assert!(matches!(read_weights(&path), Err(Error::Format(_))));
        assert!(matches!(read_trajectory(&path), Err(Error::Format(_))));
    }

    #[test]
    fn csv_headers_are_frozen() {
        let grid = sample_grid();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &grid).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x_1,x_2,x_3\n"));

        let mut buf = Vec::new();
        let series = NrmseSeries {
            values: vec![0.1, 0.2],
            dt_save: 0.01,
        };
        write_nrmse_csv(&mut buf, &series, 0.0).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,nrmse\n"));

        let rows = complexity_report(&complexity_table_small(), "ours-shared").unwrap();
        let mut buf = Vec::new();
        write_complexity_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("label,model,m,d_total,n_in,n_out,n_units,cost,speedup\n"));
    }
}
