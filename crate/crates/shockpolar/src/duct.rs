//! Free-boundary transonic shock in a straight duct, in Lagrangian coordinates.
//!
//! The duct is `-1 <= xi <= 1`, `0 <= eta <= eta0` with `eta0 = rho0 u0`. A
//! uniform supersonic stream enters at `xi = -1` and meets a shock front
//! `xi = psi(eta)` anchored at `psi(0) = t`. Behind the front the pressure
//! solves the divergence-form elliptic equation with zero-flux walls, the
//! exit pressure as Dirichlet data and, on the front, the pressure of a
//! straight shock with the local front slope.
//!
//! The subsonic region is mapped to the unit square via
//! `xi = psi(eta) + s (1 - psi(eta))` and iterated by Picard sweeps:
//!
//! 1. freeze the coefficients from the current `p`, `w`;
//! 2. solve the five-point system for `p`;
//! 3. integrate `w` up each column from one wall, where `w = 0`;
//! 4. move the front with `psi' = [u w] / [p]`, under-relaxed.
//!
//! Density and speed follow from the entropy carried along each `eta` line
//! and the Bernoulli constant. The integration wall alternates between
//! sweeps; the value reached at the opposite wall measures how far the
//! iterate is from a genuine solution.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gas::{self, FlowState, GasConstants};
use crate::lagrangian::{self, EllipticityError, MatrixW};
use crate::polar::{self, PolarError, UpstreamState};
use crate::stencil::{self, CoefficientField, Grid, StencilError};

pub use crate::stencil::assemble_linear_system;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DuctError {
    #[error("invalid duct problem: {0}")]
    InvalidProblem(String),
    #[error("exit pressure {p_exit} does not exceed the sonic pressure {p_sonic}")]
    ExitNotSubsonic { p_exit: f64, p_sonic: f64 },
    #[error("entropy condition lost on the front at row {row}: [p] = {jump}")]
    EntropyLoss { row: usize, jump: f64 },
    #[error("ellipticity lost at node ({i}, {j}): M = {mach}")]
    EllipticityLost { i: usize, j: usize, mach: f64 },
    #[error("non-physical state at node ({i}, {j}): {reason}")]
    NonPhysical { i: usize, j: usize, reason: String },
    #[error("linear solve failed at iteration {iter}: {source}")]
    Linear { iter: usize, source: StencilError },
    #[error(transparent)]
    Polar(#[from] PolarError),
}

/// Sinusoidal perturbation `a sin(k pi eta / eta0)` of the initial front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialFront {
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_mode")]
    pub mode: u32,
}

fn default_mode() -> u32 {
    2
}

impl Default for InitialFront {
    fn default() -> Self {
        Self {
            amplitude: 0.0,
            mode: default_mode(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuctProblem {
    pub up: UpstreamState,
    pub p_exit: f64,
    #[serde(default)]
    pub front_anchor_xi: f64,
    #[serde(default = "default_cells")]
    pub nx: usize,
    #[serde(default = "default_cells")]
    pub ny: usize,
    #[serde(default = "default_omega")]
    pub omega_relax: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol_front: f64,
    #[serde(default = "default_tol")]
    pub tol_field: f64,
    #[serde(default)]
    pub initial_front: InitialFront,
}

fn default_cells() -> usize {
    64
}
fn default_omega() -> f64 {
    0.5
}
fn default_max_iters() -> usize {
    500
}
fn default_tol() -> f64 {
    1e-8
}

impl DuctProblem {
    /// Problem with the default grid, relaxation and tolerances.
    pub fn new(up: UpstreamState, p_exit: f64) -> Self {
        Self {
            up,
            p_exit,
            front_anchor_xi: 0.0,
            nx: default_cells(),
            ny: default_cells(),
            omega_relax: default_omega(),
            max_iters: default_max_iters(),
            tol_front: default_tol(),
            tol_field: default_tol(),
            initial_front: InitialFront::default(),
        }
    }

    pub fn validate(&self, gas: &GasConstants) -> Result<(), DuctError> {
        let bad = |msg: String| Err(DuctError::InvalidProblem(msg));
        self.up.validate(gas)?;
        if self.up.theta0 != 0.0 {
            return bad(format!(
                "upstream must be aligned with the duct, theta0 = {}",
                self.up.theta0
            ));
        }
        if self.nx < 8 || self.ny < 8 {
            return bad(format!("grid {}x{} is smaller than 8x8", self.nx, self.ny));
        }
        if !(self.omega_relax > 0.0 && self.omega_relax <= 1.0) {
            return bad(format!("omega_relax = {} outside (0, 1]", self.omega_relax));
        }
        let t = self.front_anchor_xi;
        if !(t > -1.0 && t < 1.0) {
            return bad(format!("front anchor {t} outside (-1, 1)"));
        }
        if !(t.abs() + self.initial_front.amplitude.abs() < 1.0) {
            return bad("initial front leaves the duct".to_string());
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive".to_string());
        }
        if !(self.tol_front > 0.0 && self.tol_field > 0.0) {
            return bad("tolerances must be positive".to_string());
        }
        let cp = polar::critical_points(&self.up, gas)?;
        if !(self.p_exit > cp.p_sonic) {
            return Err(DuctError::ExitNotSubsonic {
                p_exit: self.p_exit,
                p_sonic: cp.p_sonic,
            });
        }
        Ok(())
    }

    pub fn eta0(&self) -> f64 {
        lagrangian::duct_mass_flux(&self.up)
    }

    /// Computational grid on `(s, eta)` in `[0, 1] x [0, eta0]`.
    pub fn grid(&self) -> Grid {
        Grid::new(self.nx, self.ny, 1.0, self.eta0())
    }

    fn eta(&self, j: usize) -> f64 {
        self.eta0() * j as f64 / (self.ny - 1) as f64
    }

    fn s(&self, i: usize) -> f64 {
        i as f64 / (self.nx - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DuctStatus {
    Converged,
    FrontExitedDomain,
    MaxIters,
}

impl DuctStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DuctStatus::Converged => "converged",
            DuctStatus::FrontExitedDomain => "front-exited-domain",
            DuctStatus::MaxIters => "max-iters",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wall {
    Bottom,
    Top,
}

/// Front position `psi(eta)` and slope `psi'(eta)` at the grid rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontShape {
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
}

/// Iterate of the Picard loop; fields are indexed `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DuctState {
    pub front: FrontShape,
    pub p: Vec<f64>,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub wall: Wall,
    pub field_change: f64,
    pub front_change: f64,
    pub pde_residual: f64,
    /// `max |w|` on the wall opposite to the integration start.
    pub wall_mismatch: f64,
    /// Mean of `psi - t`; its sign is the drift direction.
    pub front_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuctResult {
    pub status: DuctStatus,
    pub nx: usize,
    pub ny: usize,
    pub eta0: f64,
    pub p_plus: f64,
    pub p_field: Vec<f64>,
    pub w_field: Vec<f64>,
    pub front: Vec<f64>,
    pub front_slope: Vec<f64>,
    pub iters: usize,
    pub history: Vec<IterationRecord>,
}

impl DuctResult {
    pub fn state(&self) -> DuctState {
        DuctState {
            front: FrontShape {
                psi: self.front.clone(),
                dpsi: self.front_slope.clone(),
            },
            p: self.p_field.clone(),
            w: self.w_field.clone(),
        }
    }

    pub fn max_pressure_deviation(&self) -> f64 {
        self.p_field.iter().map(|p| (p - self.p_plus).abs()).fold(0.0, f64::max)
    }

    pub fn max_front_deviation(&self, anchor: f64) -> f64 {
        self.front.iter().map(|x| (x - anchor).abs()).fold(0.0, f64::max)
    }
}

/// Downstream data at one front row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontSample {
    pub p: f64,
    pub u: f64,
    pub w: f64,
}

/// Pressure behind a straight shock whose front has Lagrangian slope `dpsi`.
pub fn front_pressure(up: &UpstreamState, gas: &GasConstants, dpsi: f64) -> f64 {
    let g = gas.gamma;
    let m = up.mach(gas);
    let slope = lagrangian::duct_mass_flux(up) * dpsi;
    let sin2 = 1.0 / (1.0 + slope * slope);
    up.p0 * (1.0 + 2.0 * g / (g + 1.0) * (m * m * sin2 - 1.0))
}

fn hugoniot_density(up: &UpstreamState, gas: &GasConstants, p: f64) -> f64 {
    let g = gas.gamma;
    up.rho0 * ((g + 1.0) * p + (g - 1.0) * up.p0) / ((g - 1.0) * p + (g + 1.0) * up.p0)
}

/// Integrates `psi' = [u w] / [p]` from `psi(0) = anchor` and blends the
/// result with the previous front by `omega`.
pub fn front_update(
    samples: &[FrontSample],
    up: &UpstreamState,
    anchor: f64,
    deta: f64,
    omega: f64,
    previous: &FrontShape,
) -> Result<FrontShape, DuctError> {
    let n = samples.len();
    if previous.psi.len() != n || previous.dpsi.len() != n || n == 0 {
        return Err(DuctError::InvalidProblem(format!(
            "front has {} rows, previous shape {}",
            n,
            previous.psi.len()
        )));
    }
    let mut slope = Vec::with_capacity(n);
    for (row, s) in samples.iter().enumerate() {
        let jump = s.p - up.p0;
        if !(jump > 0.0) {
            return Err(DuctError::EntropyLoss { row, jump });
        }
        slope.push(s.u * s.w / jump);
    }
    let mut psi = vec![anchor; n];
    for j in 1..n {
        psi[j] = psi[j - 1] + 0.5 * deta * (slope[j - 1] + slope[j]);
    }
    let blend = |old: &[f64], new: &[f64]| -> Vec<f64> {
        old.iter()
            .zip(new)
            .map(|(a, b)| (1.0 - omega) * a + omega * b)
            .collect()
    };
    Ok(FrontShape {
        psi: blend(&previous.psi, &psi),
        dpsi: blend(&previous.dpsi, &slope),
    })
}

/// Flat front through the anchor with uniform normal-shock data.
pub fn uniform_state(problem: &DuctProblem, gas: &GasConstants) -> DuctState {
    let p_plus = polar::normal_shock_pressure(&problem.up, gas);
    let n = problem.nx * problem.ny;
    DuctState {
        front: FrontShape {
            psi: vec![problem.front_anchor_xi; problem.ny],
            dpsi: vec![0.0; problem.ny],
        },
        p: vec![p_plus; n],
        w: vec![0.0; n],
    }
}

/// Perturbed front and a pressure field blending front and exit values.
pub fn initial_state(problem: &DuctProblem, gas: &GasConstants) -> DuctState {
    let eta0 = problem.eta0();
    let InitialFront { amplitude, mode } = problem.initial_front;
    let k = mode as f64 * std::f64::consts::PI / eta0;
    let (mut psi, mut dpsi) = (Vec::with_capacity(problem.ny), Vec::with_capacity(problem.ny));
    for j in 0..problem.ny {
        let eta = problem.eta(j);
        psi.push(problem.front_anchor_xi + amplitude * (k * eta).sin());
        dpsi.push(amplitude * k * (k * eta).cos());
    }
    let mut p = vec![0.0; problem.nx * problem.ny];
    for j in 0..problem.ny {
        let p_front = front_pressure(&problem.up, gas, dpsi[j]);
        for i in 0..problem.nx {
            let s = problem.s(i);
            p[j * problem.nx + i] = (1.0 - s) * p_front + s * problem.p_exit;
        }
    }
    DuctState {
        front: FrontShape { psi, dpsi },
        p,
        w: vec![0.0; problem.nx * problem.ny],
    }
}

/// Frozen per-node quantities of one sweep.
struct Frozen {
    w_mats: Vec<MatrixW>,
    coeffs: CoefficientField,
    front_p: Vec<f64>,
    entropy: Vec<f64>,
}

/// Density and speed from row entropy and the Bernoulli constant.
fn recover_state(p: f64, w: f64, entropy: f64, b0: f64, gas: &GasConstants) -> Option<FlowState> {
    let g = gas.gamma;
    let rho = (p / entropy).powf(1.0 / g);
    let q2 = 2.0 * (b0 - g * p / ((g - 1.0) * rho));
    if !(q2 > 0.0 && rho > 0.0) {
        return None;
    }
    let u = (q2 / (1.0 + w * w)).sqrt();
    Some(FlowState { p, u, v: u * w, rho })
}

fn freeze(problem: &DuctProblem, gas: &GasConstants, state: &DuctState) -> Result<Frozen, DuctError> {
    let (nx, ny) = (problem.nx, problem.ny);
    let up = &problem.up;
    let b0 = gas::bernoulli(&up.flow_state(), gas);

    let mut front_p = Vec::with_capacity(ny);
    let mut entropy = Vec::with_capacity(ny);
    for (row, &dpsi) in state.front.dpsi.iter().enumerate() {
        let p = front_pressure(up, gas, dpsi);
        if !(p > up.p0) {
            return Err(DuctError::EntropyLoss { row, jump: p - up.p0 });
        }
        entropy.push(p / hugoniot_density(up, gas, p).powf(gas.gamma));
        front_p.push(p);
    }

    let n = nx * ny;
    let mut w_mats = Vec::with_capacity(n);
    let mut coeffs = CoefficientField {
        a11: Vec::with_capacity(n),
        a12: Vec::with_capacity(n),
        a22: Vec::with_capacity(n),
    };
    for (j, &row_entropy) in entropy.iter().enumerate().take(ny) {
        let len = 1.0 - state.front.psi[j];
        for i in 0..nx {
            let k = j * nx + i;
            let s =
                recover_state(state.p[k], state.w[k], row_entropy, b0, gas).ok_or_else(|| DuctError::NonPhysical {
                    i,
                    j,
                    reason: format!("no real speed for p = {}", state.p[k]),
                })?;
            let c = lagrangian::coefficients(&s, gas).map_err(|e| match e {
                EllipticityError::NotSubsonic(mach) => DuctError::EllipticityLost { i, j, mach },
                EllipticityError::State(err) => DuctError::NonPhysical {
                    i,
                    j,
                    reason: err.to_string(),
                },
            })?;
            let a = lagrangian::divergence_tensor(&c);
            let sigma = state.front.dpsi[j] * (1.0 - problem.s(i));
            coeffs
                .a11
                .push((a[0][0] - 2.0 * sigma * a[0][1] + sigma * sigma * a[1][1]) / len);
            coeffs.a12.push(a[0][1] - sigma * a[1][1]);
            coeffs.a22.push(len * a[1][1]);
            w_mats.push(lagrangian::matrix_w(&c));
        }
    }
    Ok(Frozen {
        w_mats,
        coeffs,
        front_p,
        entropy,
    })
}

/// Integrates `dw/deta` along each column from `wall`, where `w = 0`.
///
/// Returns the field and `max |w|` reached on the opposite wall.
fn recover_w(problem: &DuctProblem, state: &DuctState, w_mats: &[MatrixW], p: &[f64], wall: Wall) -> (Vec<f64>, f64) {
    let grid = problem.grid();
    let (nx, ny) = (problem.nx, problem.ny);
    let mut slope = vec![0.0; nx * ny];
    for j in 0..ny {
        let len = 1.0 - state.front.psi[j];
        for i in 0..nx {
            let k = j * nx + i;
            let sigma = state.front.dpsi[j] * (1.0 - problem.s(i));
            let p_s = grid.d_s(p, i, j);
            let p_xi = p_s / len;
            let p_eta = grid.d_eta(p, i, j) - sigma * p_xi;
            let (w_xi, w_eta) = w_mats[k].apply(p_xi, p_eta);
            slope[k] = w_eta + sigma * w_xi;
        }
    }
    let mut w = vec![0.0; nx * ny];
    let h = grid.heta;
    let mut mismatch = 0.0f64;
    for i in 0..nx {
        match wall {
            Wall::Bottom => {
                for j in 1..ny {
                    let (a, b) = ((j - 1) * nx + i, j * nx + i);
                    w[b] = w[a] + 0.5 * h * (slope[a] + slope[b]);
                }
                mismatch = mismatch.max(w[(ny - 1) * nx + i].abs());
            }
            Wall::Top => {
                for j in (0..ny - 1).rev() {
                    let (a, b) = ((j + 1) * nx + i, j * nx + i);
                    w[b] = w[a] - 0.5 * h * (slope[a] + slope[b]);
                }
                mismatch = mismatch.max(w[i].abs());
            }
        }
    }
    (w, mismatch)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Max over nodes of the operator residual divided by the cell area.
fn pde_residual(
    grid: &Grid,
    coeffs: &CoefficientField,
    p: &[f64],
    skip_dirichlet_columns: bool,
) -> Result<f64, StencilError> {
    let r = stencil::apply_operator(grid, coeffs, p)?;
    let mut worst = 0.0f64;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if skip_dirichlet_columns && (i == 0 || i == grid.nx - 1) {
                continue;
            }
            worst = worst.max(r[grid.idx(i, j)].abs() / grid.cell_area(i, j));
        }
    }
    Ok(worst)
}

/// One full Picard sweep.
pub fn picard_step(
    problem: &DuctProblem,
    gas: &GasConstants,
    state: &DuctState,
    iter: usize,
    wall: Wall,
) -> Result<(DuctState, IterationRecord), DuctError> {
    let (nx, ny) = (problem.nx, problem.ny);
    let grid = problem.grid();
    let frozen = freeze(problem, gas, state)?;

    let mut dirichlet = vec![None; nx * ny];
    for j in 0..ny {
        dirichlet[j * nx] = Some(frozen.front_p[j]);
        dirichlet[j * nx + nx - 1] = Some(problem.p_exit);
    }
    let linear_err = |source| DuctError::Linear { iter, source };
    let system = stencil::assemble_linear_system(&grid, &frozen.coeffs, &state.p, &dirichlet).map_err(linear_err)?;
    let p = system.solve().map_err(linear_err)?;
    let (w, wall_mismatch) = recover_w(problem, state, &frozen.w_mats, &p, wall);

    let b0 = gas::bernoulli(&problem.up.flow_state(), gas);
    let mut samples = Vec::with_capacity(ny);
    for j in 0..ny {
        let k = j * nx;
        let s = recover_state(p[k], w[k], frozen.entropy[j], b0, gas).ok_or_else(|| DuctError::NonPhysical {
            i: 0,
            j,
            reason: format!("no real speed behind the front, p = {}", p[k]),
        })?;
        samples.push(FrontSample {
            p: p[k],
            u: s.u,
            w: w[k],
        });
    }
    let front = front_update(
        &samples,
        &problem.up,
        problem.front_anchor_xi,
        grid.heta,
        problem.omega_relax,
        &state.front,
    )?;

    let p_plus = polar::normal_shock_pressure(&problem.up, gas);
    let pde = pde_residual(&grid, &frozen.coeffs, &p, true).map_err(linear_err)?;
    let offset = front.psi.iter().map(|x| x - problem.front_anchor_xi).sum::<f64>() / ny as f64;
    let record = IterationRecord {
        iter,
        wall,
        field_change: max_abs_diff(&p, &state.p).max(max_abs_diff(&w, &state.w)) / p_plus,
        front_change: max_abs_diff(&front.psi, &state.front.psi),
        pde_residual: pde,
        wall_mismatch,
        front_offset: offset,
    };
    Ok((DuctState { front, p, w }, record))
}

fn front_inside(front: &FrontShape) -> bool {
    front.psi.iter().all(|x| x.is_finite() && *x > -1.0 && *x < 1.0)
}

/// Runs the Picard loop from [`initial_state`].
pub fn solve_duct(problem: &DuctProblem, gas: &GasConstants) -> Result<DuctResult, DuctError> {
    problem.validate(gas)?;
    solve_duct_from(problem, gas, initial_state(problem, gas))
}

/// Runs the Picard loop from a given iterate.
pub fn solve_duct_from(
    problem: &DuctProblem,
    gas: &GasConstants,
    mut state: DuctState,
) -> Result<DuctResult, DuctError> {
    problem.validate(gas)?;
    let mut history = Vec::new();
    let mut status = DuctStatus::MaxIters;
    for iter in 1..=problem.max_iters {
        let wall = if iter % 2 == 1 { Wall::Bottom } else { Wall::Top };
        let (next, record) = picard_step(problem, gas, &state, iter, wall)?;
        history.push(record);
        state = next;
        if !front_inside(&state.front) {
            status = DuctStatus::FrontExitedDomain;
            break;
        }
        if record.field_change <= problem.tol_field && record.front_change <= problem.tol_front {
            status = DuctStatus::Converged;
            break;
        }
    }
    Ok(DuctResult {
        status,
        nx: problem.nx,
        ny: problem.ny,
        eta0: problem.eta0(),
        p_plus: polar::normal_shock_pressure(&problem.up, gas),
        iters: history.len(),
        history,
        p_field: state.p,
        w_field: state.w,
        front: state.front.psi,
        front_slope: state.front.dpsi,
    })
}

/// Residuals of a duct result against the discrete problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Interior residual of the elliptic equation per unit cell area.
    pub pde: f64,
    /// Conormal flux through the walls.
    pub wall_flux: f64,
    /// `max |w|` on both walls.
    pub wall_w: f64,
    pub exit_dirichlet: f64,
    pub front_dirichlet: f64,
    /// Max-norm Rankine–Hugoniot defect along the front.
    pub front_rankine_hugoniot: f64,
}

/// Evaluates all residuals; states that cannot be evaluated count as infinite.
pub fn residual_report(result: &DuctResult, problem: &DuctProblem, gas: &GasConstants) -> ResidualReport {
    let (nx, ny) = (result.nx, result.ny);
    let state = result.state();
    let grid = problem.grid();
    let up = &problem.up;

    let exit_dirichlet = (0..ny)
        .map(|j| (result.p_field[j * nx + nx - 1] - problem.p_exit).abs())
        .fold(0.0, f64::max);
    let front_dirichlet = (0..ny)
        .map(|j| (result.p_field[j * nx] - front_pressure(up, gas, result.front_slope[j])).abs())
        .fold(0.0, f64::max);
    let wall_w = (0..nx)
        .map(|i| result.w_field[i].abs().max(result.w_field[(ny - 1) * nx + i].abs()))
        .fold(0.0, f64::max);

    let (pde, wall_flux) = match freeze(problem, gas, &state) {
        Ok(frozen) => {
            let pde = pde_residual(&grid, &frozen.coeffs, &result.p_field, true).unwrap_or(f64::INFINITY);
            let mut flux = 0.0f64;
            for j in [0, ny - 1] {
                for i in 0..nx {
                    let k = j * nx + i;
                    let f = frozen.coeffs.a12[k] * grid.d_s(&result.p_field, i, j)
                        + frozen.coeffs.a22[k] * grid.d_eta(&result.p_field, i, j);
                    flux = flux.max(f.abs());
                }
            }
            (pde, flux)
        }
        Err(_) => (f64::INFINITY, f64::INFINITY),
    };

    let b0 = gas::bernoulli(&up.flow_state(), gas);
    let upstream = up.flow_state();
    let mut front_rh = 0.0f64;
    for j in 0..ny {
        let k = j * nx;
        let p = result.p_field[k];
        let entropy = p / hugoniot_density(up, gas, p).powf(gas.gamma);
        let defect = match recover_state(p, result.w_field[k], entropy, b0, gas) {
            Some(down) => {
                let slope = result.eta0 * result.front_slope[j];
                polar::max_norm(&polar::rh_residual(&upstream, &down, slope, gas))
            }
            None => f64::INFINITY,
        };
        front_rh = front_rh.max(defect);
    }

    ResidualReport {
        pde,
        wall_flux,
        wall_w,
        exit_dirichlet,
        front_dirichlet,
        front_rankine_hugoniot: front_rh,
    }
}
