//! Ridge-regression readout training: per-location readouts W_l, the single
//! symmetry-respecting shared W, and the weight-similarity coefficient C.
//!
//! The normal equations are accumulated streamingly as a d_total x d_total
//! Gram matrix plus a cross term, so memory stays O(d_total^2) even for the
//! concatenated shared-mode problem, and the Gram can be reused across alpha
//! values.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::features::{design_matrix, DesignMatrix, FeatureConfig};
use crate::lorenz96::TrajectoryGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgeConfig {
    /// Tikhonov regularization parameter.
    pub alpha: f64,
}

impl RidgeConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha < 0.0 || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("alpha = {alpha} must be >= 0")));
        }
        Ok(Self { alpha })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReadoutMode {
    /// L independent readouts, one row per location.
    #[serde(rename = "independent")]
    PerLocation,
    /// One shared readout trained on concatenated location data.
    #[serde(rename = "shared")]
    Shared,
}

impl std::str::FromStr for ReadoutMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "independent" => Ok(ReadoutMode::PerLocation),
            "shared" => Ok(ReadoutMode::Shared),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected `independent` or `shared`)"
            ))),
        }
    }
}

impl std::fmt::Display for ReadoutMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReadoutMode::PerLocation => "independent",
            ReadoutMode::Shared => "shared",
        })
    }
}

/// Trained readout(s) plus everything needed to apply them to new data.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutWeights {
    pub mode: ReadoutMode,
    /// PerLocation: L x d_total. Shared: 1 x d_total.
    pub weights: DMatrix<f64>,
    pub cfg: FeatureConfig,
    pub alpha: f64,
    pub norm_mean: f64,
    pub norm_std: f64,
}

impl ReadoutWeights {
    /// Readout row for location `l` (the single row in shared mode).
    pub fn row(
        &self,
        l: usize,
    ) -> nalgebra::MatrixView<'_, f64, nalgebra::U1, nalgebra::Dyn, nalgebra::U1, nalgebra::Dyn>
    {
        match self.mode {
            ReadoutMode::PerLocation => self.weights.row(l),
            ReadoutMode::Shared => self.weights.row(0),
        }
    }
}

/// Normal-equation accumulator: gram = O * O^T, cross = O * y^T.
#[derive(Debug, Clone)]
pub struct GramSystem {
    pub gram: DMatrix<f64>,
    pub cross: DVector<f64>,
    pub n_columns: usize,
}

impl GramSystem {
    pub fn new(d: usize) -> Self {
        Self {
            gram: DMatrix::zeros(d, d),
            cross: DVector::zeros(d),
            n_columns: 0,
        }
    }

    /// Fold `n` feature columns with their targets into the accumulator.
    pub fn accumulate(&mut self, columns: &DMatrix<f64>, targets: &DVector<f64>) {
        debug_assert_eq!(columns.ncols(), targets.len());
        let transposed = columns.transpose();
        self.gram.gemm(1.0, columns, &transposed, 1.0);
        self.cross.gemv(1.0, columns, targets, 1.0);
        self.n_columns += columns.ncols();
    }

    /// Merge another accumulator (same dimensions) into this one.
    pub fn merge(&mut self, other: &GramSystem) {
        self.gram += &other.gram;
        self.cross += &other.cross;
        self.n_columns += other.n_columns;
    }

    /// Solve (gram + alpha * I) w = cross for the readout row.
    pub fn solve(&self, alpha: f64) -> Result<DVector<f64>> {
        let d = self.gram.nrows();
        let mut a = self.gram.clone();
        for i in 0..d {
            a[(i, i)] += alpha;
        }
        if let Some(chol) = Cholesky::new(a.clone()) {
            if alpha == 0.0 {
                // Cholesky can numerically succeed on a singular Gram when
                // the system happens to be consistent; a collapsed pivot
                // still betrays the rank deficiency.
                let l = chol.l();
                let max_pivot = (0..d).map(|i| l[(i, i)]).fold(0.0_f64, f64::max);
                let min_pivot = (0..d).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
                // a collapsed pivot sits near sqrt(machine eps) relative to
                // the largest one; treat gram condition beyond ~1e12 as
                // rank-deficient
                if !(min_pivot > 1e-6 * max_pivot) {
                    return Err(Error::RankDeficient);
                }
            }
            let w = chol.solve(&self.cross);
            if !w.iter().all(|v| v.is_finite()) {
                return Err(Error::RankDeficient);
            }
            return Ok(w);
        }
        if alpha == 0.0 {
            return Err(Error::RankDeficient);
        }
        // symmetric eigendecomposition fallback for ill-conditioned systems
        let eig = a.symmetric_eigen();
        let tol = 1e-14 * eig.eigenvalues.amax().max(1.0);
        let ut_b = eig.eigenvectors.transpose() * &self.cross;
        let scaled = DVector::from_fn(d, |i, _| {
            if eig.eigenvalues[i].abs() > tol {
                ut_b[i] / eig.eigenvalues[i]
            } else {
                0.0
            }
        });
        Ok(&eig.eigenvectors * scaled)
    }
}

/// Minimize ||W O - y||^2 + alpha ||W||^2 for a single readout row.
pub fn ridge_solve(o: &DesignMatrix, targets: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if o.n_columns() == 0 {
        return Err(Error::InvalidWindow("design matrix has no columns".into()));
    }
    if o.n_columns() != targets.len() {
        return Err(Error::InvalidInput(format!(
            "{} design columns but {} targets",
            o.n_columns(),
            targets.len()
        )));
    }
    let mut sys = GramSystem::new(o.columns.nrows());
    sys.accumulate(&o.columns, &DVector::from_column_slice(targets));
    Ok(sys.solve(alpha)?.as_slice().to_vec())
}

/// Accumulated normal equations for a training window, reusable across
/// alpha values.
#[derive(Debug, Clone)]
pub struct TrainedSystem {
    pub mode: ReadoutMode,
    pub systems: Vec<GramSystem>,
    pub cfg: FeatureConfig,
    pub norm_mean: f64,
    pub norm_std: f64,
}

impl TrainedSystem {
    pub fn solve(&self, alpha: f64) -> Result<ReadoutWeights> {
        let d = self.cfg.d_total();
        let mut weights = DMatrix::zeros(self.systems.len(), d);
        for (l, sys) in self.systems.iter().enumerate() {
            let w = sys.solve(alpha).map_err(|e| match e {
                Error::RankDeficient => Error::RankDeficient,
                other => Error::InvalidInput(format!("location {l}: {other}")),
            })?;
            if !w.iter().all(|v| v.is_finite()) {
                return Err(Error::DegenerateWeights(format!(
                    "non-finite weights at location {l}"
                )));
            }
            weights.row_mut(l).copy_from_slice(w.as_slice());
        }
        Ok(ReadoutWeights {
            mode: self.mode,
            weights,
            cfg: self.cfg,
            alpha,
            norm_mean: self.norm_mean,
            norm_std: self.norm_std,
        })
    }
}

const GRAM_CHUNK: usize = 1024;

fn location_system(
    grid: &TrajectoryGrid,
    l: usize,
    cfg: &FeatureConfig,
    window: &Range<usize>,
) -> Result<GramSystem> {
    // training pairs: feature at m, target at m + 1
    let m_first = window.start + cfg.k - 1;
    let m_last = window.end - 2;
    let mut sys = GramSystem::new(cfg.d_total());
    let mut m = m_first;
    while m <= m_last {
        let chunk_end = (m + GRAM_CHUNK - 1).min(m_last);
        let dm = design_matrix(grid, l, cfg, m, chunk_end)?;
        let targets =
            DVector::from_fn(chunk_end - m + 1, |idx, _| grid.data[(l, m + idx + 1)]);
        sys.accumulate(&dm.columns, &targets);
        m = chunk_end + 1;
    }
    Ok(sys)
}

fn check_window(grid: &TrajectoryGrid, cfg: &FeatureConfig, window: &Range<usize>) -> Result<()> {
    cfg.validate(grid.n_locations())?;
    if window.end > grid.n_samples() || window.start >= window.end {
        return Err(Error::InvalidWindow(format!(
            "window {window:?} outside grid of {} samples",
            grid.n_samples()
        )));
    }
    if window.len() < cfg.k + 1 {
        return Err(Error::InvalidWindow(format!(
            "window of {} samples yields no training pairs (need >= k + 1 = {})",
            window.len(),
            cfg.k + 1
        )));
    }
    Ok(())
}

/// Accumulate per-location normal equations over `window` (sample indices
/// into `grid`). Locations are processed in parallel; the result is ordered
/// by location and bit-reproducible.
pub fn accumulate_independent(
    grid: &TrajectoryGrid,
    cfg: &FeatureConfig,
    window: Range<usize>,
) -> Result<TrainedSystem> {
    check_window(grid, cfg, &window)?;
    let systems: Vec<GramSystem> = (0..grid.n_locations())
        .into_par_iter()
        .map(|l| location_system(grid, l, cfg, &window))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainedSystem {
        mode: ReadoutMode::PerLocation,
        systems,
        cfg: *cfg,
        norm_mean: grid.norm_mean,
        norm_std: grid.norm_std,
    })
}

/// Accumulate the shared (symmetry-respecting) normal equations: all L
/// location design matrices concatenated. Partial sums are reduced in fixed
/// location order.
pub fn accumulate_shared(
    grid: &TrajectoryGrid,
    cfg: &FeatureConfig,
    window: Range<usize>,
) -> Result<TrainedSystem> {
    check_window(grid, cfg, &window)?;
    let partials: Vec<GramSystem> = (0..grid.n_locations())
        .into_par_iter()
        .map(|l| location_system(grid, l, cfg, &window))
        .collect::<Result<Vec<_>>>()?;
    let mut total = GramSystem::new(cfg.d_total());
    for part in &partials {
        total.merge(part);
    }
    Ok(TrainedSystem {
        mode: ReadoutMode::Shared,
        systems: vec![total],
        cfg: *cfg,
        norm_mean: grid.norm_mean,
        norm_std: grid.norm_std,
    })
}

/// Train L independent readouts on a normalized grid window.
pub fn train_independent(
    grid: &TrajectoryGrid,
    cfg: &FeatureConfig,
    ridge: &RidgeConfig,
    window: Range<usize>,
) -> Result<ReadoutWeights> {
    accumulate_independent(grid, cfg, window)?.solve(ridge.alpha)
}

/// Train one shared readout on the concatenation of all location data.
pub fn train_shared(
    grid: &TrajectoryGrid,
    cfg: &FeatureConfig,
    ridge: &RidgeConfig,
    window: Range<usize>,
) -> Result<ReadoutWeights> {
    accumulate_shared(grid, cfg, window)?.solve(ridge.alpha)
}

/// Correlation coefficient C of the per-location readout rows:
/// C = 1/(L(L-1)) * sum_l sum_{l' != l} (W_l . W_l') / ||W_l||^2.
///
/// The normalization by ||W_l||^2 (not ||W_l|| ||W_l'||) is deliberate; the
/// coefficient is asymmetric under rescaling of individual rows.
pub fn weight_correlation(w: &ReadoutWeights) -> Result<f64> {
    if w.mode != ReadoutMode::PerLocation {
        return Err(Error::InvalidInput(
            "weight correlation requires per-location readouts".into(),
        ));
    }
    let l_n = w.weights.nrows();
    if l_n < 2 {
        return Err(Error::InvalidInput("need L >= 2 readout rows".into()));
    }
    let mut total = 0.0;
    for l in 0..l_n {
        let wl = w.weights.row(l);
        let norm_sq = wl.dot(&wl);
        if norm_sq == 0.0 {
            return Err(Error::DegenerateWeights(format!("zero-norm row {l}")));
        }
        for lp in 0..l_n {
            if lp != l {
                total += wl.dot(&w.weights.row(lp)) / norm_sq;
            }
        }
    }
    Ok(total / (l_n * (l_n - 1)) as f64)
}
