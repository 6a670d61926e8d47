//! NG-RC feature vectors built from a local spatiotemporal stencil.
//!
//! Canonical ordering (frozen; weight files depend on it):
//!
//! | block     | entries                                                        |
//! |-----------|----------------------------------------------------------------|
//! | constant  | 1 entry, value `c`                                             |
//! | linear    | for tap `tau = 0..k` (0 = newest), for offset `-N_nn..=+N_nn` (left to right): `x_{l+offset}(t_{m-tau})` |
//! | quadratic | `lin[i] * lin[j]` for `i <= j`, row-major upper triangle        |

use nalgebra::{DMatrix, DMatrixView};
use serde::{Deserialize, Serialize};

use crate::lorenz96::TrajectoryGrid;
use crate::{Error, Result};

/// Stencil geometry and the constant feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Time taps (current plus k-1 previous samples).
    pub k: usize,
    /// Nearest neighbors per side; stencil width N_in = 2*N_nn + 1.
    pub n_nn: usize,
    /// Constant feature value.
    pub c: f64,
}

impl FeatureConfig {
    pub fn new(k: usize, n_nn: usize) -> Self {
        Self { k, n_nn, c: 1.0 }
    }

    pub fn n_in(&self) -> usize {
        2 * self.n_nn + 1
    }

    pub fn d_lin(&self) -> usize {
        self.k * self.n_in()
    }

    pub fn d_nonlin(&self) -> usize {
        let d = self.d_lin();
        d * (d + 1) / 2
    }

    pub fn d_total(&self) -> usize {
        1 + self.d_lin() + self.d_nonlin()
    }

    pub fn validate(&self, n_locations: usize) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidInput("k must be >= 1".into()));
        }
        if self.n_in() > n_locations {
            return Err(Error::InvalidInput(format!(
                "stencil width {} exceeds L = {n_locations}",
                self.n_in()
            )));
        }
        Ok(())
    }
}

/// (d_lin, d_nonlin, d_total) for a config.
pub fn feature_dims(cfg: &FeatureConfig) -> (usize, usize, usize) {
    (cfg.d_lin(), cfg.d_nonlin(), cfg.d_total())
}

/// One feature column in the canonical ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

/// d_total x M matrix, one feature column per training instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub columns: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn n_columns(&self) -> usize {
        self.columns.ncols()
    }
}

/// Fill `out` (length d_total) with features for location `l` from a window
/// of the field: `window` is L x k with the newest sample in the last column.
pub fn fill_features(window: DMatrixView<f64>, l: usize, cfg: &FeatureConfig, out: &mut [f64]) {
    let l_n = window.nrows();
    let k = cfg.k;
    debug_assert_eq!(window.ncols(), k);
    debug_assert_eq!(out.len(), cfg.d_total());

    out[0] = cfg.c;
    let mut idx = 1;
    for tau in 0..k {
        let col = k - 1 - tau;
        for off in -(cfg.n_nn as isize)..=(cfg.n_nn as isize) {
            let loc = ((l as isize + off).rem_euclid(l_n as isize)) as usize;
            out[idx] = window[(loc, col)];
            idx += 1;
        }
    }
    let d_lin = cfg.d_lin();
    let (lin, quad) = out[1..].split_at_mut(d_lin);
    let mut q = 0;
    for i in 0..d_lin {
        for j in i..d_lin {
            quad[q] = lin[i] * lin[j];
            q += 1;
        }
    }
}

fn check_history(grid: &TrajectoryGrid, m: usize, cfg: &FeatureConfig) -> Result<()> {
    cfg.validate(grid.n_locations())?;
    if m + 1 < cfg.k {
        return Err(Error::InvalidWindow(format!(
            "time index {m} has fewer than k = {} samples of history",
            cfg.k
        )));
    }
    if m >= grid.n_samples() {
        return Err(Error::InvalidWindow(format!(
            "time index {m} out of range ({} samples)",
            grid.n_samples()
        )));
    }
    Ok(())
}

/// Linear taps for location `l` at time index `m`: time-major (newest tap
/// first), space left-to-right inside each tap, cyclic wrap in space.
pub fn linear_features(
    grid: &TrajectoryGrid,
    l: usize,
    m: usize,
    cfg: &FeatureConfig,
) -> Result<Vec<f64>> {
    check_history(grid, m, cfg)?;
    let window = grid.data.view((0, m + 1 - cfg.k), (grid.n_locations(), cfg.k));
    let l_n = grid.n_locations();
    let mut out = Vec::with_capacity(cfg.d_lin());
    for tau in 0..cfg.k {
        let col = cfg.k - 1 - tau;
        for off in -(cfg.n_nn as isize)..=(cfg.n_nn as isize) {
            let loc = ((l as isize + off).rem_euclid(l_n as isize)) as usize;
            out.push(window[(loc, col)]);
        }
    }
    Ok(out)
}

/// Full feature vector: constant, linear taps, then unique quadratic
/// monomials of the linear taps.
pub fn total_features(
    grid: &TrajectoryGrid,
    l: usize,
    m: usize,
    cfg: &FeatureConfig,
) -> Result<FeatureVector> {
    check_history(grid, m, cfg)?;
    let window = grid.data.view((0, m + 1 - cfg.k), (grid.n_locations(), cfg.k));
    let mut values = vec![0.0; cfg.d_total()];
    fill_features(window, l, cfg, &mut values);
    Ok(FeatureVector { values })
}

/// Feature columns for location `l` over time indices `m_start ..= m_end`.
pub fn design_matrix(
    grid: &TrajectoryGrid,
    l: usize,
    cfg: &FeatureConfig,
    m_start: usize,
    m_end: usize,
) -> Result<DesignMatrix> {
    check_history(grid, m_start, cfg)?;
    if m_end < m_start {
        return Err(Error::InvalidWindow(format!(
            "empty range [{m_start}, {m_end}]"
        )));
    }
    if m_end >= grid.n_samples() {
        return Err(Error::InvalidWindow(format!(
            "m_end = {m_end} out of range ({} samples)",
            grid.n_samples()
        )));
    }
    let d_total = cfg.d_total();
    let n_cols = m_end - m_start + 1;
    let mut columns = DMatrix::zeros(d_total, n_cols);
    for (col, m) in (m_start..=m_end).enumerate() {
        let window = grid.data.view((0, m + 1 - cfg.k), (grid.n_locations(), cfg.k));
        fill_features(
            window,
            l,
            cfg,
            columns.column_mut(col).as_mut_slice(),
        );
    }
    Ok(DesignMatrix { columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn grid_from_rows(rows: usize, cols: usize, entries: &[f64]) -> TrajectoryGrid {
        TrajectoryGrid::new(DMatrix::from_row_slice(rows, cols, entries), 0.01, 0.0)
    }

    #[test]
    fn dims_match_reference_configuration() {
        assert_eq!(feature_dims(&FeatureConfig::new(3, 2)), (15, 120, 136));
        assert_eq!(feature_dims(&FeatureConfig::new(1, 0)), (1, 1, 3));
        assert_eq!(feature_dims(&FeatureConfig::new(2, 1)), (6, 21, 28));
    }

    #[test]
    fn linear_single_tap() {
        let grid = grid_from_rows(4, 2, &[1.0, 5.0, 2.0, 6.0, 3.0, 7.0, 4.0, 8.0]);
        let cfg = FeatureConfig::new(1, 0);
        assert_eq!(linear_features(&grid, 2, 1, &cfg).unwrap(), vec![7.0]);
    }

    #[test]
    fn linear_stencil_with_wrap() {
        // L=3, t_{m-1} = [1,2,3], t_m = [4,5,6], l=0, k=2, N_nn=1.
        let grid = grid_from_rows(3, 2, &[1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        let cfg = FeatureConfig::new(2, 1);
        let lin = linear_features(&grid, 0, 1, &cfg).unwrap();
        assert_eq!(lin, vec![6.0, 4.0, 5.0, 3.0, 1.0, 2.0]);
    }

    #[test]
    fn insufficient_history_rejected() {
        let grid = grid_from_rows(3, 2, &[1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        let cfg = FeatureConfig::new(2, 1);
        assert!(matches!(
            linear_features(&grid, 0, 0, &cfg),
            Err(Error::InvalidWindow(_))
        ));
    }

    #[test]
    fn total_features_single_lin() {
        // lin = [2] with c = 1 -> [1, 2, 4]
        let grid = grid_from_rows(4, 1, &[9.0, 9.0, 2.0, 9.0]);
        let cfg = FeatureConfig::new(1, 0);
        let f = total_features(&grid, 2, 0, &cfg).unwrap();
        assert_eq!(f.values, vec![1.0, 2.0, 4.0]);
    }

    #[test]
    fn total_features_two_lin() {
        // newest tap first: t_{m-1} = 2, t_m = 1 gives lin = [1, 2];
        // quadratics (0,0), (0,1), (1,1) = 1, 2, 4
        let grid = grid_from_rows(2, 2, &[2.0, 1.0, 2.0, 1.0]);
        let cfg = FeatureConfig::new(2, 0);
        let f = total_features(&grid, 0, 1, &cfg).unwrap();
        assert_eq!(f.values, vec![1.0, 1.0, 2.0, 1.0, 2.0, 4.0]);
    }

    #[test]
    fn total_features_length_136() {
        let grid = grid_from_rows(6, 3, &(0..18).map(|v| v as f64).collect::<Vec<_>>());
        let cfg = FeatureConfig::new(3, 2);
        let f = total_features(&grid, 1, 2, &cfg).unwrap();
        assert_eq!(f.values.len(), 136);
        assert_eq!(f.values[0], 1.0);
    }

    #[test]
    fn quadratic_block_enumerates_all_pairs_once() {
        // Encode tap i as prime p_i; every product p_i*p_j (i <= j) must
        // appear exactly once in the quadratic block.
        let primes = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0];
        let grid = grid_from_rows(3, 2, &[2.0, 7.0, 3.0, 11.0, 5.0, 13.0]);
        let cfg = FeatureConfig::new(2, 1);
        let f = total_features(&grid, 1, 1, &cfg).unwrap();
        let quad = &f.values[1 + cfg.d_lin()..];
        assert_eq!(quad.len(), 21);
        let lin = &f.values[1..1 + cfg.d_lin()];
        let mut expected: Vec<f64> = Vec::new();
        for i in 0..6 {
            for j in i..6 {
                expected.push(lin[i] * lin[j]);
            }
        }
        assert_eq!(quad, expected.as_slice());
        // all products distinct because the inputs are distinct primes
        let mut sorted: Vec<f64> = quad.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        assert_eq!(sorted.len(), 21);
        assert!(primes.iter().all(|p| lin.contains(p)));
    }

    #[test]
    fn design_matrix_single_column() {
        let grid = grid_from_rows(3, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let cfg = FeatureConfig::new(2, 1);
        let dm = design_matrix(&grid, 1, &cfg, 1, 1).unwrap();
        assert_eq!(dm.n_columns(), 1);
        let f = total_features(&grid, 1, 1, &cfg).unwrap();
        assert_eq!(dm.columns.column(0).as_slice(), f.values.as_slice());
    }

    #[test]
    fn design_matrix_rejects_bad_ranges() {
        let grid = grid_from_rows(3, 3, &[1.0; 9]);
        let cfg = FeatureConfig::new(2, 1);
        assert!(design_matrix(&grid, 0, &cfg, 2, 1).is_err());
        assert!(design_matrix(&grid, 0, &cfg, 1, 5).is_err());
        assert!(design_matrix(&grid, 0, &cfg, 0, 2).is_err());
    }

    fn shift_grid(grid: &TrajectoryGrid, s: usize) -> TrajectoryGrid {
        let l_n = grid.n_locations();
        let data = DMatrix::from_fn(l_n, grid.n_samples(), |r, c| grid.data[((r + s) % l_n, c)]);
        TrajectoryGrid::new(data, grid.dt_save, grid.t0)
    }

    proptest! {
        #[test]
        fn translational_equivariance(seed in 0u64..1000, s in 0usize..8, l in 0usize..8) {
            let mut v = seed;
            let mut next = || {
                v = v.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (v >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
            };
            let data = DMatrix::from_fn(8, 4, |_, _| next());
            let grid = TrajectoryGrid::new(data, 0.01, 0.0);
            let cfg = FeatureConfig::new(3, 2);
            let shifted = shift_grid(&grid, s);
            let a = total_features(&shifted, l, 3, &cfg).unwrap();
            let b = total_features(&grid, (l + s) % 8, 3, &cfg).unwrap();
            prop_assert_eq!(a.values, b.values);
        }

        #[test]
        fn scaling_homogeneity(lambda in 0.1f64..10.0, l in 0usize..5) {
            let data = DMatrix::from_fn(5, 3, |r, c| (r as f64 - 2.0) * (c as f64 + 0.5));
            let grid = TrajectoryGrid::new(data.clone(), 0.01, 0.0);
            let scaled = TrajectoryGrid::new(data * lambda, 0.01, 0.0);
            let cfg = FeatureConfig::new(2, 1);
            let f = total_features(&grid, l, 2, &cfg).unwrap();
            let g = total_features(&scaled, l, 2, &cfg).unwrap();
            let d_lin = cfg.d_lin();
            for i in 0..d_lin {
                prop_assert!((g.values[1 + i] - lambda * f.values[1 + i]).abs() < 1e-9);
            }
            for i in 1 + d_lin..cfg.d_total() {
                prop_assert!((g.values[i] - lambda * lambda * f.values[i]).abs() < 1e-9);
            }
        }
    }
}
