//! Multi-scale Lorenz96 model: one macroscopic ring `x_l`, optionally driven
//! by a fine ring `y_{j,l}` per site and a finest ring `z_{i,j,l}` per fine
//! site, integrated with fixed-step classical RK4.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Amplitudes above this are treated as numerical blow-up; the attractor
/// lives at O(10).
pub const BLOWUP_THRESHOLD: f64 = 1e6;

/// Dimensions and constants of the extended Lorenz96 equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Macroscopic sites on the latitude ring.
    pub l: usize,
    /// Fine sites per macroscopic site (0 disables the y scale).
    pub j: usize,
    /// Finest sites per fine site (0 disables the z scale).
    pub i: usize,
    /// Large-scale forcing F.
    pub forcing: f64,
    /// Coupling strength h between scales.
    pub coupling: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub g: f64,
}

impl ModelParams {
    /// Single-scale model (no fine variables).
    pub fn flat(l: usize, forcing: f64) -> Self {
        Self {
            l,
            j: 0,
            i: 0,
            forcing,
            coupling: 0.0,
            b: 1.0,
            c: 1.0,
            d: 1.0,
            e: 1.0,
            g: 1.0,
        }
    }

    /// Three-scale model with the standard b = c = d = e = g scale constants.
    pub fn three_scale(l: usize, j: usize, i: usize, forcing: f64) -> Self {
        Self {
            l,
            j,
            i,
            forcing,
            coupling: 1.0,
            b: 10.0,
            c: 10.0,
            d: 10.0,
            e: 10.0,
            g: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 4 {
            return Err(Error::InvalidInput(format!(
                "L = {} but the x stencil needs L >= 4",
                self.l
            )));
        }
        if self.i > 0 && self.j == 0 {
            return Err(Error::InvalidInput("I > 0 requires J > 0".into()));
        }
        if self.j > 0 && self.j < 4 {
            return Err(Error::InvalidInput(format!(
                "J = {} but the y stencil needs J >= 4",
                self.j
            )));
        }
        if self.i > 0 && self.i < 4 {
            return Err(Error::InvalidInput(format!(
                "I = {} but the z stencil needs I >= 4",
                self.i
            )));
        }
        if self.j > 0 && (self.b == 0.0 || self.c == 0.0) {
            return Err(Error::InvalidInput("b, c must be nonzero when J > 0".into()));
        }
        if self.i > 0 && (self.d == 0.0 || self.e == 0.0 || self.g == 0.0) {
            return Err(Error::InvalidInput(
                "d, e, g must be nonzero when I > 0".into(),
            ));
        }
        Ok(())
    }

    /// Total variable count L + LJ + LJI.
    pub fn n_vars(&self) -> usize {
        self.l + self.l * self.j + self.l * self.j * self.i
    }
}

/// Full model state: x is length L, y is length L*J (index `l*J + j`), z is
/// length L*J*I (index `(l*J + j)*I + i`). y and z are empty when the scale
/// is disabled.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl SimState {
    pub fn zeros(params: &ModelParams) -> Self {
        Self {
            x: vec![0.0; params.l],
            y: vec![0.0; params.l * params.j],
            z: vec![0.0; params.l * params.j * params.i],
        }
    }

    pub fn matches(&self, params: &ModelParams) -> bool {
        self.x.len() == params.l
            && self.y.len() == params.l * params.j
            && self.z.len() == params.l * params.j * params.i
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().all(|v| v.is_finite())
            && self.y.iter().all(|v| v.is_finite())
            && self.z.iter().all(|v| v.is_finite())
    }

    fn max_abs(&self) -> f64 {
        self.x
            .iter()
            .chain(&self.y)
            .chain(&self.z)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// self + scale * other, elementwise.
    fn add_scaled(&self, other: &SimState, scale: f64) -> SimState {
        let comb = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(ai, bi)| ai + scale * bi)
                .collect::<Vec<_>>()
        };
        SimState {
            x: comb(&self.x, &other.x),
            y: comb(&self.y, &other.y),
            z: comb(&self.z, &other.z),
        }
    }
}

#[inline]
fn wrap(idx: isize, n: usize) -> usize {
    let n = n as isize;
    (((idx % n) + n) % n) as usize
}

///// Canonical initial condition: x_1 = F + 0.01 and every other x_l = F, with
/// the fine fields at zero except for a small seed in the first slot of each
/// ring. The seeds are required: a y-ring that is uniform in j stays uniform
/// forever (the advection term cancels identically and the couplings through
/// x are j-symmetric, so no asymmetry can enter from outside the ring), which
/// would pin the fast scales to the transversally unstable slaved manifold
/// instead of their turbulent attractor. The same argument applies to each
/// z-ring in i. Seed magnitude is irrelevant past the transient because the
/// manifold is strongly unstable.
pub fn default_init(params: &ModelParams) -> SimState {
    let mut state = SimState::zeros(params);
    for v in state.x.iter_mut() {
        *v = params.forcing;
    }
    state.x[0] += 0.01;
    if params.j > 0 {
        for l in 0..params.l {
            state.y[l * params.j] = 0.01;
        }
    }
    if params.i > 0 {
        for jl in 0..params.l * params.j {
            state.z[jl * params.i] = 0.01;
        }
    }
    state
}

/// Right-hand side of the extended Lorenz96 equations at `state`.
pub fn derivative(state: &SimState, params: &ModelParams) -> Result<SimState> {
    if !state.matches(params) {
        return Err(Error::InvalidInput(
            "state dimensions do not match params".into(),
        ));
    }
    let (l_n, j_n, i_n) = (params.l, params.j, params.i);
    let mut out = SimState::zeros(params);

    // x_l' = x_{l-1}(x_{l+1} - x_{l-2}) - x_l + F - (hc/b) S_{y_l}
    for l in 0..l_n {
        let xm1 = state.x[wrap(l as isize - 1, l_n)];
        let xp1 = state.x[wrap(l as isize + 1, l_n)];
        let xm2 = state.x[wrap(l as isize - 2, l_n)];
        let mut dx = xm1 * (xp1 - xm2) - state.x[l] + params.forcing;
        if j_n > 0 {
            let s_y: f64 = state.y[l * j_n..(l + 1) * j_n].iter().sum();
            dx -= params.coupling * params.c / params.b * s_y;
        }
        out.x[l] = dx;
    }

    // y_{j,l}' = -cb y_{j+1,l}(y_{j+2,l} - y_{j-1,l}) - c y_{j,l}
    //           + (hc/b) x_l - (he/d) S_{z_{j,l}}
    for l in 0..l_n {
        let base = l * j_n;
        for j in 0..j_n {
            let yp1 = state.y[base + wrap(j as isize + 1, j_n)];
            let yp2 = state.y[base + wrap(j as isize + 2, j_n)];
            let ym1 = state.y[base + wrap(j as isize - 1, j_n)];
            let mut dy = -params.c * params.b * yp1 * (yp2 - ym1) - params.c * state.y[base + j]
                + params.coupling * params.c / params.b * state.x[l];
            if i_n > 0 {
                let zbase = (base + j) * i_n;
                let s_z: f64 = state.z[zbase..zbase + i_n].iter().sum();
                dy -= params.coupling * params.e / params.d * s_z;
            }
            out.y[base + j] = dy;
        }
    }

    // z_{i,j,l}' = ed z_{i-1,j,l}(z_{i+1,j,l} - z_{i-2,j,l}) - ge z_{i,j,l}
    //             + (he/d) y_{j,l}
    for jl in 0..l_n * j_n {
        let zbase = jl * i_n;
        for i in 0..i_n {
            let zm1 = state.z[zbase + wrap(i as isize - 1, i_n)];
            let zp1 = state.z[zbase + wrap(i as isize + 1, i_n)];
            let zm2 = state.z[zbase + wrap(i as isize - 2, i_n)];
            out.z[zbase + i] = params.e * params.d * zm1 * (zp1 - zm2)
                - params.g * params.e * state.z[zbase + i]
                + params.coupling * params.e / params.d * state.y[jl];
        }
    }

    Ok(out)
}

/// One classical RK4 update with step `h_step`.
pub fn rk4_step(state: &SimState, params: &ModelParams, h_step: f64) -> Result<SimState> {
    if h_step <= 0.0 {
        return Err(Error::InvalidInput("h_step must be positive".into()));
    }
    let k1 = derivative(state, params)?;
    let k2 = derivative(&state.add_scaled(&k1, h_step / 2.0), params)?;
    let k3 = derivative(&state.add_scaled(&k2, h_step / 2.0), params)?;
    let k4 = derivative(&state.add_scaled(&k3, h_step), params)?;

    let mut next = state.clone();
    let n = |a: &mut Vec<f64>, k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| {
        for (idx, v) in a.iter_mut().enumerate() {
            *v += h_step / 6.0 * (k1[idx] + 2.0 * k2[idx] + 2.0 * k3[idx] + k4[idx]);
        }
    };
    n(&mut next.x, &k1.x, &k2.x, &k3.x, &k4.x);
    n(&mut next.y, &k1.y, &k2.y, &k3.y, &k4.y);
    n(&mut next.z, &k1.z, &k2.z, &k3.z, &k4.z);

    if !next.is_finite() || next.max_abs() > BLOWUP_THRESHOLD {
        return Err(Error::NumericalBlowup { step: 0, t: 0.0 });
    }
    Ok(next)
}

/// Saved macroscopic field: L locations by M_total time samples, column per
/// sample, plus the normalization statistics applied to it (if any).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryGrid {
    pub data: DMatrix<f64>,
    /// Saving step in MTU.
    pub dt_save: f64,
    /// Time of the first column.
    pub t0: f64,
    pub norm_mean: f64,
    pub norm_std: f64,
    pub normalized: bool,
}

impl TrajectoryGrid {
    pub fn new(data: DMatrix<f64>, dt_save: f64, t0: f64) -> Self {
        Self {
            data,
            dt_save,
            t0,
            norm_mean: 0.0,
            norm_std: 1.0,
            normalized: false,
        }
    }

    pub fn n_locations(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.data.ncols()
    }

    /// Global mean and population standard deviation over all entries.
    pub fn stats(&self) -> (f64, f64) {
        let n = (self.data.nrows() * self.data.ncols()) as f64;
        let mean = self.data.iter().sum::<f64>() / n;
        let var = self.data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    /// Normalize to zero mean and unit standard deviation with statistics
    /// computed from this grid.
    pub fn normalize(&self) -> Result<TrajectoryGrid> {
        if self.normalized {
            return Err(Error::InvalidInput("grid is already normalized".into()));
        }
        let (mean, std) = self.stats();
        if std == 0.0 || !std.is_finite() {
            return Err(Error::DegenerateData(
                "zero variance: cannot normalize a constant grid".into(),
            ));
        }
        Ok(self.normalize_with(mean, std))
    }

    /// Normalize with externally supplied statistics (e.g. the training
    /// interval's statistics applied to test data).
    pub fn normalize_with(&self, mean: f64, std: f64) -> TrajectoryGrid {
        TrajectoryGrid {
            data: self.data.map(|v| (v - mean) / std),
            dt_save: self.dt_save,
            t0: self.t0,
            norm_mean: mean,
            norm_std: std,
            normalized: true,
        }
    }

    /// Invert a previous normalization.
    pub fn denormalize(&self) -> TrajectoryGrid {
        TrajectoryGrid {
            data: self.data.map(|v| v * self.norm_std + self.norm_mean),
            dt_save: self.dt_save,
            t0: self.t0,
            norm_mean: 0.0,
            norm_std: 1.0,
            normalized: false,
        }
    }

    /// Sub-grid of columns `[start, start + len)` with adjusted start time.
    pub fn slice_cols(&self, start: usize, len: usize) -> Result<TrajectoryGrid> {
        if start + len > self.n_samples() {
            return Err(Error::InvalidWindow(format!(
                "slice [{start}, {}) exceeds {} samples",
                start + len,
                self.n_samples()
            )));
        }
        Ok(TrajectoryGrid {
            data: self.data.columns(start, len).into_owned(),
            dt_save: self.dt_save,
            t0: self.t0 + start as f64 * self.dt_save,
            norm_mean: self.norm_mean,
            norm_std: self.norm_std,
            normalized: self.normalized,
        })
    }
}

/// Integrate `t_transient` MTU (discarded), then record x every `dt_save`
/// for `t_record` MTU. The first recorded column is the post-transient state.
pub fn simulate(
    params: &ModelParams,
    init: &SimState,
    t_transient: f64,
    t_record: f64,
    h_internal: f64,
    dt_save: f64,
) -> Result<TrajectoryGrid> {
    params.validate()?;
    if !init.matches(params) {
        return Err(Error::InvalidInput(
            "initial state dimensions do not match params".into(),
        ));
    }
    if h_internal <= 0.0 || dt_save <= 0.0 {
        return Err(Error::InvalidInput("steps must be positive".into()));
    }
    let substeps = dt_save / h_internal;
    if (substeps - substeps.round()).abs() > 1e-9 * substeps {
        return Err(Error::InvalidInput(format!(
            "dt_save = {dt_save} is not an integer multiple of h_internal = {h_internal}"
        )));
    }
    let substeps = substeps.round() as usize;
    let n_transient = (t_transient / h_internal).round() as usize;
    let n_save = (t_record / dt_save).round() as usize;

    let mut state = init.clone();
    let mut step = 0usize;
    let advance = |state: &SimState, step: &mut usize| -> Result<SimState> {
        let next = rk4_step(state, params, h_internal).map_err(|e| match e {
            Error::NumericalBlowup { .. } => Error::NumericalBlowup {
                step: *step,
                t: *step as f64 * h_internal,
            },
            other => other,
        })?;
        *step += 1;
        Ok(next)
    };

    for _ in 0..n_transient {
        state = advance(&state, &mut step)?;
    }

    let mut data = DMatrix::zeros(params.l, n_save);
    for m in 0..n_save {
        data.column_mut(m).copy_from_slice(&state.x);
        if m + 1 < n_save {
            for _ in 0..substeps {
                state = advance(&state, &mut step)?;
            }
        }
    }
    Ok(TrajectoryGrid::new(data, dt_save, 0.0))
}
