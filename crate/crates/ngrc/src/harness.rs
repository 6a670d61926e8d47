//! Experiment orchestration: presets, deterministic window selection from a
//! long recording, alpha and training-time sweeps with multi-seed statistics,
//! and training-complexity accounting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::features::FeatureConfig;
use crate::forecast::{evaluate_forecast, Horizon, HORIZON_THRESHOLD};
use crate::lorenz96::{default_init, simulate, ModelParams, TrajectoryGrid};
use crate::ridge::{accumulate_independent, accumulate_shared, ReadoutMode, TrainedSystem};
use crate::{Error, Result};

/// Fixed seed for the deterministic shuffle of candidate windows.
const WINDOW_SHUFFLE_SEED: u64 = 0x4c39_36_52_43;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetName {
    /// Three-scale model, L=36, J=I=10, F=20.
    Main,
    /// Three-scale model, L=J=I=8.
    Small,
    /// Single-scale model, L=40, F=8.
    Flat,
}

impl std::str::FromStr for PresetName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "main" => Ok(PresetName::Main),
            "small" => Ok(PresetName::Small),
            "flat" => Ok(PresetName::Flat),
            other => Err(Error::Config(format!("unknown preset `{other}`"))),
        }
    }
}

impl std::fmt::Display for PresetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PresetName::Main => "main",
            PresetName::Small => "small",
            PresetName::Flat => "flat",
        };
        f.write_str(s)
    }
}

/// A frozen experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub name: PresetName,
    pub params: ModelParams,
    pub feature: FeatureConfig,
    pub h_internal: f64,
    pub dt_save: f64,
    pub t_transient: f64,
    /// Default recording length in MTU.
    pub t_record: f64,
    /// Test window length in MTU.
    pub t_test: f64,
    /// Lyapunov time in MTU, when horizons are reported in Lyapunov units.
    pub lyapunov_time: Option<f64>,
}

impl ExperimentPreset {
    pub fn get(name: PresetName) -> Self {
        let common = |params: ModelParams, t_record: f64, lyapunov_time: Option<f64>| Self {
            name,
            params,
            feature: FeatureConfig::new(3, 2),
            h_internal: 0.001,
            dt_save: 0.01,
            t_transient: 10.0,
            t_record,
            t_test: 5.0,
            lyapunov_time,
        };
        match name {
            PresetName::Main => common(ModelParams::three_scale(36, 10, 10, 20.0), 2100.0, None),
            PresetName::Small => common(ModelParams::three_scale(8, 8, 8, 20.0), 2100.0, None),
            PresetName::Flat => {
                common(ModelParams::flat(40, 8.0), 2100.0, Some(1.0 / 1.68))
            }
        }
    }

    /// Generate a recording of `t_record` MTU with the preset's integrator
    /// settings, starting from the canonical initial condition.
    pub fn generate(&self, t_record: f64) -> Result<TrajectoryGrid> {
        let init = default_init(&self.params);
        simulate(
            &self.params,
            &init,
            self.t_transient,
            t_record,
            self.h_internal,
            self.dt_save,
        )
    }

    /// Convert a horizon in MTU to the preset's reporting unit (Lyapunov
    /// times when defined, MTU otherwise).
    pub fn horizon_units(&self, mtu: f64) -> f64 {
        match self.lyapunov_time {
            Some(lt) => mtu / lt,
            None => mtu,
        }
    }
}

/// Outcome of a single trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub horizon: Horizon,
    pub train_seed: u64,
    pub ic_seed: u64,
}

/// One point of a sweep: the axis value and the statistics over all
/// (training set, initial condition) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub axis: f64,
    /// Horizon samples in MTU, ordered by (train_seed, ic_seed).
    pub horizons: Vec<f64>,
    pub n_censored: usize,
    pub mean: f64,
    pub std_of_mean: f64,
    /// Set when every trial of this cell failed.
    pub failed: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    /// Axis value with the highest mean horizon (ties broken toward larger
    /// axis values).
    pub best_axis: Option<f64>,
}

impl SweepResult {
    fn from_cells(cells: Vec<SweepCell>) -> Self {
        let mut best: Option<(f64, f64)> = None;
        for cell in cells.iter().filter(|c| c.failed.is_none()) {
            let better = match best {
                None => true,
                Some((_, m)) => cell.mean > m || (cell.mean == m),
            };
            if better {
                best = Some((cell.axis, cell.mean));
            }
        }
        SweepResult {
            cells,
            best_axis: best.map(|(a, _)| a),
        }
    }
}

/// Sample mean and standard deviation of the mean (sample std with n-1
/// denominator, divided by sqrt(n)).
pub fn summarize(samples: &[f64]) -> Result<(f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, var.sqrt() / (n as f64).sqrt()))
}

/// How alpha is chosen per training-time sweep point.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaPolicy {
    Fixed(f64),
    /// Grid-search alpha per point and report the best cell's own trials.
    OptimizedInSample(Vec<f64>),
    /// Grid-search alpha on the first half of the initial conditions and
    /// report the held-out second half.
    OptimizedHeldOut(Vec<f64>),
}

/// Deterministic trial runner over one long (unnormalized) recording.
pub struct Harness<'g> {
    pub grid: &'g TrajectoryGrid,
    pub preset: ExperimentPreset,
    pub n_train_sets: usize,
    pub n_ics: usize,
}

impl<'g> Harness<'g> {
    pub fn new(grid: &'g TrajectoryGrid, preset: ExperimentPreset) -> Self {
        Self {
            grid,
            preset,
            n_train_sets: 10,
            n_ics: 10,
        }
    }

    fn n_test_steps(&self) -> usize {
        (self.preset.t_test / self.grid.dt_save).round() as usize
    }

    /// Samples reserved at the end of the recording for test windows.
    fn test_pool_start(&self) -> usize {
        let test_len = self.preset.feature.k + self.n_test_steps();
        self.grid
            .n_samples()
            .saturating_sub(self.n_ics * test_len)
    }

    fn shuffled(&self, count: usize, salt: u64) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..count).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(WINDOW_SHUFFLE_SEED ^ salt);
        idx.shuffle(&mut rng);
        idx
    }

    /// Sample range of the training window for a given training time and
    /// seed: disjoint slices of the training pool in deterministic shuffled
    /// order.
    pub fn training_window(&self, t_train: f64, train_seed: u64) -> Result<Range<usize>> {
        let m = (t_train / self.grid.dt_save).round() as usize;
        if m == 0 {
            return Err(Error::InvalidWindow(format!(
                "t_train = {t_train} yields no training points"
            )));
        }
        let window_len = m + self.preset.feature.k;
        let pool = self.test_pool_start();
        let n_candidates = pool / window_len;
        if n_candidates == 0 {
            return Err(Error::InvalidWindow(format!(
                "training pool of {pool} samples cannot fit a window of {window_len}"
            )));
        }
        let order = self.shuffled(n_candidates, 0x7261_494e);
        let slot = order[(train_seed as usize) % n_candidates];
        let start = slot * window_len;
        Ok(start..start + window_len)
    }

    /// Sample ranges of the warm-up and truth windows for an initial
    /// condition seed, drawn from the reserved test pool.
    pub fn test_window(&self, ic_seed: u64) -> Result<(Range<usize>, Range<usize>)> {
        let k = self.preset.feature.k;
        let test_len = k + self.n_test_steps();
        let pool_start = self.test_pool_start();
        let n_candidates = (self.grid.n_samples() - pool_start) / test_len;
        if n_candidates == 0 {
            return Err(Error::InvalidWindow(
                "recording too short for a test window".into(),
            ));
        }
        let order = self.shuffled(n_candidates, 0x7465_5354);
        let slot = order[(ic_seed as usize) % n_candidates];
        let start = pool_start + slot * test_len;
        Ok((start..start + k, start + k..start + test_len))
    }

    /// Accumulate normal equations for one training window; the expensive
    /// part, reusable across alpha values.
    pub fn accumulate(
        &self,
        mode: ReadoutMode,
        t_train: f64,
        train_seed: u64,
    ) -> Result<(TrainedSystem, Range<usize>)> {
        let window = self.training_window(t_train, train_seed)?;
        let train_grid = self
            .grid
            .slice_cols(window.start, window.len())?
            .normalize()?;
        let all = 0..train_grid.n_samples();
        let sys = match mode {
            ReadoutMode::PerLocation => accumulate_independent(&train_grid, &self.preset.feature, all)?,
            ReadoutMode::Shared => accumulate_shared(&train_grid, &self.preset.feature, all)?,
        };
        Ok((sys, window))
    }

    /// Forecast one test window with trained weights, returning the horizon.
    pub fn forecast_horizon(
        &self,
        weights: &crate::ridge::ReadoutWeights,
        train_window: &Range<usize>,
        ic_seed: u64,
    ) -> Result<Horizon> {
        let (warmup_range, truth_range) = self.test_window(ic_seed)?;
        if warmup_range.start < train_window.end && train_window.start < truth_range.end {
            return Err(Error::InvalidWindow(format!(
                "training window {train_window:?} overlaps test window {:?}",
                warmup_range.start..truth_range.end
            )));
        }
        let warmup = self
            .grid
            .slice_cols(warmup_range.start, warmup_range.len())?
            .normalize_with(weights.norm_mean, weights.norm_std);
        let truth = self
            .grid
            .slice_cols(truth_range.start, truth_range.len())?
            .normalize_with(weights.norm_mean, weights.norm_std);
        let (_, _, horizon) = evaluate_forecast(
            weights,
            &warmup.data,
            &truth.data,
            self.grid.dt_save,
            HORIZON_THRESHOLD,
        )?;
        Ok(horizon)
    }

    /// Train on one window and forecast one test window.
    pub fn run_trial(
        &self,
        mode: ReadoutMode,
        alpha: f64,
        t_train: f64,
        train_seed: u64,
        ic_seed: u64,
    ) -> Result<Horizon> {
        let (sys, window) = self.accumulate(mode, t_train, train_seed)?;
        let weights = sys.solve(alpha)?;
        self.forecast_horizon(&weights, &window, ic_seed)
    }

    /// All (train_seed, ic_seed) horizons for fixed alpha and t_train,
    /// ordered by (train_seed, ic_seed).
    pub fn run_all_trials(
        &self,
        mode: ReadoutMode,
        alpha: f64,
        t_train: f64,
    ) -> Result<Vec<TrialOutcome>> {
        let per_train: Vec<Result<Vec<TrialOutcome>>> = (0..self.n_train_sets as u64)
            .into_par_iter()
            .map(|train_seed| {
                let (sys, window) = self.accumulate(mode, t_train, train_seed)?;
                let weights = sys.solve(alpha)?;
                (0..self.n_ics as u64)
                    .map(|ic_seed| {
                        Ok(TrialOutcome {
                            horizon: self.forecast_horizon(&weights, &window, ic_seed)?,
                            train_seed,
                            ic_seed,
                        })
                    })
                    .collect()
            })
            .collect();
        let mut out = Vec::with_capacity(self.n_train_sets * self.n_ics);
        for group in per_train {
            out.extend(group?);
        }
        Ok(out)
    }

    fn cell_from_outcomes(&self, axis: f64, outcomes: &[TrialOutcome]) -> SweepCell {
        let horizons: Vec<f64> = outcomes.iter().map(|o| o.horizon.time).collect();
        let n_censored = outcomes.iter().filter(|o| o.horizon.censored).count();
        let (mean, std_of_mean) = summarize(&horizons).unwrap_or((f64::NAN, f64::NAN));
        SweepCell {
            axis,
            horizons,
            n_censored,
            mean,
            std_of_mean,
            failed: None,
        }
    }

    fn failed_cell(axis: f64, err: &Error) -> SweepCell {
        SweepCell {
            axis,
            horizons: vec![],
            n_censored: 0,
            mean: f64::NAN,
            std_of_mean: f64::NAN,
            failed: Some(err.to_string()),
        }
    }

    /// Grid search over alpha at fixed training time. The normal equations
    /// are accumulated once per training set and re-solved per alpha.
    pub fn sweep_alpha(
        &self,
        mode: ReadoutMode,
        t_train: f64,
        alpha_grid: &[f64],
    ) -> Result<SweepResult> {
        if alpha_grid.is_empty() || alpha_grid.iter().any(|&a| a <= 0.0) {
            return Err(Error::InvalidInput(
                "alpha grid must be non-empty and positive".into(),
            ));
        }
        // per (train_seed, alpha, ic_seed) horizons
        let per_train: Vec<Result<Vec<Vec<TrialOutcome>>>> = (0..self.n_train_sets as u64)
            .into_par_iter()
            .map(|train_seed| {
                let (sys, window) = self.accumulate(mode, t_train, train_seed)?;
                alpha_grid
                    .iter()
                    .map(|&alpha| {
                        let weights = sys.solve(alpha)?;
                        (0..self.n_ics as u64)
                            .map(|ic_seed| {
                                Ok(TrialOutcome {
                                    horizon: self.forecast_horizon(&weights, &window, ic_seed)?,
                                    train_seed,
                                    ic_seed,
                                })
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let mut cells = Vec::with_capacity(alpha_grid.len());
        for (ai, &alpha) in alpha_grid.iter().enumerate() {
            let mut outcomes = Vec::with_capacity(self.n_train_sets * self.n_ics);
            let mut first_err = None;
            for group in &per_train {
                match group {
                    Ok(per_alpha) => outcomes.extend(per_alpha[ai].iter().copied()),
                    Err(e) => first_err = Some(e),
                }
            }
            cells.push(match first_err {
                Some(e) if outcomes.is_empty() => Self::failed_cell(alpha, e),
                _ => self.cell_from_outcomes(alpha, &outcomes),
            });
        }
        Ok(SweepResult::from_cells(cells))
    }

    /// Mean horizon versus training time.
    pub fn sweep_train_time(
        &self,
        mode: ReadoutMode,
        t_train_grid: &[f64],
        alpha_policy: &AlphaPolicy,
    ) -> Result<SweepResult> {
        if t_train_grid.is_empty() {
            return Err(Error::InvalidInput("empty t_train grid".into()));
        }
        if t_train_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "t_train grid must be sorted ascending".into(),
            ));
        }
        let mut cells = Vec::with_capacity(t_train_grid.len());
        for &t_train in t_train_grid {
            let cell = match alpha_policy {
                AlphaPolicy::Fixed(alpha) => match self.run_all_trials(mode, *alpha, t_train) {
                    Ok(outcomes) => self.cell_from_outcomes(t_train, &outcomes),
                    Err(e) => Self::failed_cell(t_train, &e),
                },
                AlphaPolicy::OptimizedInSample(grid) => {
                    match self.sweep_alpha(mode, t_train, grid) {
                        Ok(sweep) => match sweep.best_axis {
                            Some(best) => {
                                let best_cell = sweep
                                    .cells
                                    .into_iter()
                                    .find(|c| c.axis == best)
                                    .expect("best axis comes from the cell list");
                                SweepCell {
                                    axis: t_train,
                                    ..best_cell
                                }
                            }
                            None => Self::failed_cell(
                                t_train,
                                &Error::InvalidInput("all alpha cells failed".into()),
                            ),
                        },
                        Err(e) => Self::failed_cell(t_train, &e),
                    }
                }
                AlphaPolicy::OptimizedHeldOut(grid) => {
                    match self.optimized_held_out(mode, t_train, grid) {
                        Ok(cell) => cell,
                        Err(e) => Self::failed_cell(t_train, &e),
                    }
                }
            };
            cells.push(cell);
        }
        Ok(SweepResult::from_cells(cells))
    }

    /// Select alpha on the first half of the initial conditions, report the
    /// held-out second half.
    fn optimized_held_out(
        &self,
        mode: ReadoutMode,
        t_train: f64,
        grid: &[f64],
    ) -> Result<SweepCell> {
        let sweep = self.sweep_alpha(mode, t_train, grid)?;
        let half = self.n_ics / 2;
        if half == 0 {
            return Err(Error::InvalidInput("need at least 2 initial conditions".into()));
        }
        let split = |cell: &SweepCell| {
            // horizons ordered by (train_seed, ic_seed)
            let mut select = Vec::new();
            let mut report = Vec::new();
            for (i, &h) in cell.horizons.iter().enumerate() {
                if i % self.n_ics < half {
                    select.push(h);
                } else {
                    report.push(h);
                }
            }
            (select, report)
        };
        let mut best: Option<(f64, f64, Vec<f64>)> = None;
        for cell in sweep.cells.iter().filter(|c| c.failed.is_none()) {
            let (select, report) = split(cell);
            let (sel_mean, _) = summarize(&select)?;
            let better = best.as_ref().map_or(true, |(_, m, _)| sel_mean >= *m);
            if better {
                best = Some((cell.axis, sel_mean, report));
            }
        }
        let (_, _, report) =
            best.ok_or_else(|| Error::InvalidInput("all alpha cells failed".into()))?;
        let (mean, std_of_mean) = summarize(&report)?;
        Ok(SweepCell {
            axis: t_train,
            horizons: report,
            n_censored: 0,
            mean,
            std_of_mean,
            failed: None,
        })
    }
}

/// One row of the training-complexity comparison. `m` is the effective
/// number of training points (already multiplied by L for concatenated
/// shared-mode training).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityEntry {
    pub label: String,
    pub model: String,
    pub m: f64,
    pub d_total: f64,
    pub n_in: usize,
    pub n_out: usize,
    /// Parallel units trained (1 when not applicable).
    pub n_units: f64,
}

impl ComplexityEntry {
    pub fn new(label: &str, model: &str, m: f64, d_total: f64, n_in: usize, n_out: usize, n_units: f64) -> Self {
        Self {
            label: label.into(),
            model: model.into(),
            m,
            d_total,
            n_in,
            n_out,
            n_units,
        }
    }

    /// Training cost n_units * M * d_total^2.
    pub fn cost(&self) -> f64 {
        self.n_units * self.m * self.d_total * self.d_total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub entry: ComplexityEntry,
    pub cost: f64,
    pub speedup: f64,
}

/// Compute costs and speedups relative to the entry named `reference_label`.
pub fn complexity_report(
    entries: &[ComplexityEntry],
    reference_label: &str,
) -> Result<Vec<ComplexityRow>> {
    let reference = entries
        .iter()
        .find(|e| e.label == reference_label)
        .ok_or_else(|| {
            Error::InvalidInput(format!("reference entry `{reference_label}` not found"))
        })?;
    let ref_cost = reference.cost();
    if ref_cost == 0.0 {
        return Err(Error::InvalidInput("reference entry has zero cost".into()));
    }
    Ok(entries
        .iter()
        .map(|e| ComplexityRow {
            entry: e.clone(),
            cost: e.cost(),
            speedup: e.cost() / ref_cost,
        })
        .collect())
}

/// Built-in comparison table for the L=J=I=8 system.
pub fn complexity_table_small() -> Vec<ComplexityEntry> {
    vec![
        ComplexityEntry::new("ours-shared", "NG-RC", 400.0 * 8.0, 136.0, 5, 1, 1.0),
        ComplexityEntry::new("ours-independent", "NG-RC", 4000.0, 136.0, 5, 1, 8.0),
        ComplexityEntry::new("chattopadhyay", "RC", 500_000.0, 5000.0, 8, 8, 1.0),
        ComplexityEntry::new("pyle", "NG-RC", 500_000.0, 495.0, 8, 8, 1.0),
    ]
}

/// Built-in comparison table for the L=40, J=I=0 system.
pub fn complexity_table_flat() -> Vec<ComplexityEntry> {
    vec![
        ComplexityEntry::new("ours-shared", "NG-RC", 100.0 * 40.0, 136.0, 5, 1, 1.0),
        ComplexityEntry::new("ours-independent", "NG-RC", 6000.0, 136.0, 5, 1, 40.0),
        ComplexityEntry::new("vlachas", "RC", 100_000.0, 3000.0, 10, 2, 20.0),
        ComplexityEntry::new("platt", "RC", 40_000.0, 720.0, 6, 2, 20.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn summarize_examples() {
        assert_eq!(summarize(&[1.0, 1.0, 1.0, 1.0]).unwrap(), (1.0, 0.0));
        assert_eq!(summarize(&[0.0, 2.0]).unwrap(), (1.0, 1.0));
        let (mean, som) = summarize(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(mean, 2.0);
        assert!((som - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!(summarize(&[1.0]).is_err());
    }

    #[test]
    fn complexity_speedups_match_tables() {
        let report = complexity_report(&complexity_table_small(), "ours-shared").unwrap();
        assert!((report[0].speedup - 1.0).abs() < 1e-12);
        assert!((report[1].speedup - 10.0).abs() < 1e-12);
        assert!((report[2].speedup / 2.1e5 - 1.0).abs() < 0.05);
        assert!((report[3].speedup / 2.1e3 - 1.0).abs() < 0.05);

        let report = complexity_report(&complexity_table_flat(), "ours-shared").unwrap();
        assert!((report[1].speedup - 60.0).abs() < 1e-12);
        assert!((report[2].speedup / 2.4e5 - 1.0).abs() < 0.05);
        assert!((report[3].speedup / 5.6e3 - 1.0).abs() < 0.05);
    }

    #[test]
    fn complexity_reference_missing() {
        assert!(complexity_report(&complexity_table_small(), "nope").is_err());
    }

    fn synthetic_harness_grid(samples: usize) -> TrajectoryGrid {
        // smooth traveling wave, cheap stand-in for a real recording
        let data = DMatrix::from_fn(8, samples, |l, m| {
            (0.05 * m as f64 + l as f64 * 0.7).sin() + 0.3 * (0.11 * m as f64).cos()
        });
        TrajectoryGrid::new(data, 0.01, 0.0)
    }

    fn flat8_preset() -> ExperimentPreset {
        let mut p = ExperimentPreset::get(PresetName::Flat);
        p.params = ModelParams::flat(8, 8.0);
        p.feature = FeatureConfig::new(2, 1);
        p.t_test = 0.5;
        p
    }

    #[test]
    fn windows_are_disjoint_and_deterministic() {
        let grid = synthetic_harness_grid(4000);
        let h = Harness::new(&grid, flat8_preset());
        let mut seen: Vec<Range<usize>> = Vec::new();
        for seed in 0..h.n_train_sets as u64 {
            let w = h.training_window(2.0, seed).unwrap();
            assert_eq!(w, h.training_window(2.0, seed).unwrap());
            for prev in &seen {
                assert!(w.end <= prev.start || prev.end <= w.start);
            }
            seen.push(w);
        }
        let test_start = seen.iter().map(|w| w.end).max().unwrap();
        for ic in 0..h.n_ics as u64 {
            let (warm, truth) = h.test_window(ic).unwrap();
            assert!(warm.start >= test_start);
            assert_eq!(warm.end, truth.start);
        }
    }

    #[test]
    fn trial_on_learnable_signal() {
        // a smooth quasi-periodic field is easy to fit; the horizon should
        // cover a decent part of the test window
        let grid = synthetic_harness_grid(4000);
        let h = Harness::new(&grid, flat8_preset());
        let horizon = h
            .run_trial(ReadoutMode::PerLocation, 1e-8, 2.0, 0, 0)
            .unwrap();
        assert!(horizon.time > 0.1, "horizon {horizon:?}");
    }

    #[test]
    fn too_short_t_train_rejected() {
        let grid = synthetic_harness_grid(4000);
        let h = Harness::new(&grid, flat8_preset());
        assert!(matches!(
            h.run_trial(ReadoutMode::PerLocation, 1e-6, 0.001, 0, 0),
            Err(Error::InvalidWindow(_))
        ));
    }

    #[test]
    fn sweep_alpha_single_cell_matches_trials() {
        let grid = synthetic_harness_grid(3000);
        let mut h = Harness::new(&grid, flat8_preset());
        h.n_train_sets = 2;
        h.n_ics = 2;
        let sweep = h.sweep_alpha(ReadoutMode::Shared, 1.0, &[1e-6]).unwrap();
        assert_eq!(sweep.cells.len(), 1);
        let outcomes = h.run_all_trials(ReadoutMode::Shared, 1e-6, 1.0).unwrap();
        let horizons: Vec<f64> = outcomes.iter().map(|o| o.horizon.time).collect();
        assert_eq!(sweep.cells[0].horizons, horizons);
        assert_eq!(sweep.best_axis, Some(1e-6));
    }

    #[test]
    fn sweep_reproducible() {
        let grid = synthetic_harness_grid(3000);
        let mut h = Harness::new(&grid, flat8_preset());
        h.n_train_sets = 2;
        h.n_ics = 2;
        let a = h.sweep_alpha(ReadoutMode::PerLocation, 1.0, &[1e-6, 1e-3]).unwrap();
        let b = h.sweep_alpha(ReadoutMode::PerLocation, 1.0, &[1e-6, 1e-3]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn train_time_grid_must_be_sorted() {
        let grid = synthetic_harness_grid(3000);
        let h = Harness::new(&grid, flat8_preset());
        assert!(h
            .sweep_train_time(
                ReadoutMode::Shared,
                &[2.0, 1.0],
                &AlphaPolicy::Fixed(1e-6)
            )
            .is_err());
    }

    #[test]
    fn presets_are_frozen() {
        let main = ExperimentPreset::get(PresetName::Main);
        assert_eq!(main.params.l, 36);
        assert_eq!(main.params.j, 10);
        assert_eq!(main.params.i, 10);
        assert_eq!(main.params.forcing, 20.0);
        assert_eq!(main.feature.k, 3);
        assert_eq!(main.feature.n_nn, 2);
        let small = ExperimentPreset::get(PresetName::Small);
        assert_eq!((small.params.l, small.params.j, small.params.i), (8, 8, 8));
        let flat = ExperimentPreset::get(PresetName::Flat);
        assert_eq!((flat.params.l, flat.params.j, flat.params.i), (40, 0, 0));
        assert_eq!(flat.params.forcing, 8.0);
        assert_eq!(flat.lyapunov_time, Some(1.0 / 1.68));
    }
}
