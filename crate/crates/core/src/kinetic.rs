//! One-dimensional kinetic model with local alignment,
//!
//! `f_t + xi f_x + d_xi[((v - xi) + (u_f - xi) / eps) f] = 0`,
//!
//! where `u_f` is the local mean velocity of `f` and `v(x, t)` a prescribed
//! carrier velocity. As `eps -> 0` the density concentrates on `xi = u_f` and
//! the moments follow the pressureless Euler equations with drag toward `v`.
//!
//! Phase space is `Nx` periodic cells in `x` times `Nxi` cells on
//! `[-Xi, Xi]`. A step is Strang split: half an `x`-transport, a full
//! velocity-space step, half an `x`-transport. The `x` transport is a
//! conservative second-order upwind scheme per velocity column whose slopes
//! are limited only to keep face values non-negative. The velocity step is
//! either an explicit conservative flux scheme (needs `dt` of order `eps`) or
//! the exact affine flow of the drift, deposited onto the velocity
//! grid with linear weights so that mass and momentum are exact.
//!
//! A cold column on a velocity grid carries the variance `w (1 - w) dxi^2` of
//! the two cells bracketing its mean, which oscillates in `x` and acts as a
//! spurious pressure. The exact scheme therefore lifts every column to the
//! uniform floor `dxi^2 / 4`, leaving only a smooth `O(dxi^2)` pressure.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{PensError, Result};
use crate::euler::{euler_flux_divergence, velocity_from_momentum, EulerState};
use crate::grid::{stable_sum, Grid, ScalarField, VectorField};

/// Largest admissible mass fraction in the two outermost velocity cells.
pub const BOUNDARY_MASS_TOLERANCE: f64 = 1e-8;

/// Prescribed carrier velocity `v(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Background {
    Constant(f64),
    /// `amplitude * sin(2 pi mode x / L + phase)`.
    Sine { amplitude: f64, mode: u32, phase: f64 },
    /// Frozen samples on the `x` grid.
    Samples(Vec<f64>),
}

impl Background {
    pub fn eval(&self, grid: &Grid, i: usize) -> f64 {
        match self {
            Background::Constant(c) => *c,
            Background::Sine { amplitude, mode, phase } => {
                let x = grid.position(i)[0];
                amplitude * (2.0 * PI * *mode as f64 * x / grid.length() + phase).sin()
            }
            Background::Samples(s) => s[i],
        }
    }

    pub fn max_abs(&self, grid: &Grid) -> f64 {
        (0..grid.n()).map(|i| self.eval(grid, i).abs()).fold(0.0, f64::max)
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        if let Background::Samples(s) = self {
            if s.len() != grid.n() {
                return Err(PensError::InvalidArgument(format!(
                    "background has {} samples for {} cells",
                    s.len(),
                    grid.n()
                )));
            }
        }
        Ok(())
    }
}

/// Velocity-space discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityGrid {
    pub n: usize,
    pub xi_max: f64,
}

impl VelocityGrid {
    pub fn new(n: usize, xi_max: f64) -> Result<Self> {
        if n < 4 {
            return Err(PensError::InvalidArgument(format!("need at least 4 velocity cells, got {n}")));
        }
        if !(xi_max > 0.0 && xi_max.is_finite()) {
            return Err(PensError::InvalidArgument(format!("velocity cutoff must be positive, got {xi_max}")));
        }
        Ok(Self { n, xi_max })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.xi_max / self.n as f64
    }

    /// Cell center `xi_j`.
    pub fn center(&self, j: usize) -> f64 {
        -self.xi_max + (j as f64 + 0.5) * self.spacing()
    }
}

/// How the velocity-space step is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentScheme {
    Explicit,
    Exact,
}

/// Phase-space density `f(x_i, xi_j)` stored x-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    pub grid: Grid,
    pub vgrid: VelocityGrid,
    f: Vec<f64>,
    pub epsilon: f64,
    pub background: Background,
    pub t: f64,
}

/// Per-cell moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub rho: Vec<f64>,
    pub momentum: Vec<f64>,
    /// `int (xi - u)^2 f dxi / rho`, zero where `rho` is below the floor.
    pub variance: Vec<f64>,
}

impl Moments {
    pub fn velocity(&self, floor: f64) -> Vec<f64> {
        self.rho
            .iter()
            .zip(&self.momentum)
            .map(|(r, m)| if *r > floor { m / r } else { 0.0 })
            .collect()
    }
}

const RHO_FLOOR: f64 = 1e-12;

impl KineticState {
    pub fn new(grid: Grid, vgrid: VelocityGrid, f: Vec<f64>, epsilon: f64, background: Background) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(PensError::InvalidGrid("kinetic model needs a 1-d spatial grid".into()));
        }
        if f.len() != grid.n() * vgrid.n {
            return Err(PensError::InvalidArgument(format!(
                "expected {} phase-space samples, got {}",
                grid.n() * vgrid.n,
                f.len()
            )));
        }
        if let Some(i) = f.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(PensError::InvalidArgument(format!(
                "phase-space density must be finite and non-negative, got {} at {i}",
                f[i]
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(PensError::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        background.check(&grid)?;
        Ok(Self {
            grid,
            vgrid,
            f,
            epsilon,
            background,
            t: 0.0,
        })
    }

    /// Local Maxwellians `rho0(x) N(xi; u0(x), width^2)`, normalized on the
    /// velocity grid so the discrete moments match `rho0` and `rho0 u0`.
    pub fn from_moments(
        grid: Grid,
        vgrid: VelocityGrid,
        rho0: &[f64],
        u0: &[f64],
        width: f64,
        epsilon: f64,
        background: Background,
    ) -> Result<Self> {
        if rho0.len() != grid.n() || u0.len() != grid.n() {
            return Err(PensError::InvalidArgument("moment arrays must match the x grid".into()));
        }
        let dxi = vgrid.spacing();
        let mut f = vec![0.0; grid.n() * vgrid.n];
        for i in 0..grid.n() {
            let col = &mut f[i * vgrid.n..(i + 1) * vgrid.n];
            if width > 0.0 {
                for (j, c) in col.iter_mut().enumerate() {
                    let z = (vgrid.center(j) - u0[i]) / width;
                    *c = (-0.5 * z * z).exp();
                }
            }
            let mass = stable_sum(col.iter().copied()) * dxi;
            if !(mass > 0.0) {
                // width below grid resolution: deposit a cold column
                deposit_linear(col, &vgrid, u0[i], 1.0 / dxi);
            } else {
                for c in col.iter_mut() {
                    *c /= mass;
                }
                // shift the mean to u0 exactly by a small linear correction
                let mean = stable_sum(col.iter().enumerate().map(|(j, c)| c * vgrid.center(j))) * dxi;
                let mut shifted = vec![0.0; vgrid.n];
                for (j, c) in col.iter().enumerate() {
                    deposit_linear(&mut shifted, &vgrid, vgrid.center(j) + u0[i] - mean, *c);
                }
                col.copy_from_slice(&shifted);
            }
            for c in col.iter_mut() {
                *c *= rho0[i];
            }
        }
        Self::new(grid, vgrid, f, epsilon, background)
    }

    pub fn data(&self) -> &[f64] {
        &self.f
    }

    fn column(&self, i: usize) -> &[f64] {
        &self.f[i * self.vgrid.n..(i + 1) * self.vgrid.n]
    }

    /// `int int f dx dxi`
    pub fn mass(&self) -> f64 {
        stable_sum(self.f.iter().copied()) * self.vgrid.spacing() * self.grid.spacing()
    }

    pub fn moments(&self) -> Moments {
        let dxi = self.vgrid.spacing();
        let n = self.grid.n();
        let mut rho = vec![0.0; n];
        let mut mom = vec![0.0; n];
        let mut var = vec![0.0; n];
        for i in 0..n {
            let col = self.column(i);
            rho[i] = stable_sum(col.iter().copied()) * dxi;
            mom[i] = stable_sum(col.iter().enumerate().map(|(j, c)| c * self.vgrid.center(j))) * dxi;
            if rho[i] > RHO_FLOOR {
                let u = mom[i] / rho[i];
                let second = stable_sum(
                    col.iter()
                        .enumerate()
                        .map(|(j, c)| c * (self.vgrid.center(j) - u).powi(2)),
                ) * dxi;
                var[i] = second / rho[i];
            }
        }
        Moments {
            rho,
            momentum: mom,
            variance: var,
        }
    }

    /// Fraction of the mass in the outermost velocity cell on either side.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let nv = self.vgrid.n;
        let edge = stable_sum((0..self.grid.n()).flat_map(|i| [self.f[i * nv], self.f[i * nv + nv - 1]]));
        let total = stable_sum(self.f.iter().copied());
        if total > 0.0 {
            edge / total
        } else {
            0.0
        }
    }
}

/// `int int (xi - u(x))^2 f dxi dx`
pub fn kinetic_temperature(state: &KineticState) -> f64 {
    let m = state.moments();
    stable_sum(m.rho.iter().zip(&m.variance).map(|(r, v)| r * v)) * state.grid.spacing()
}

/// Kinetic temperature in excess of the grid floor `dxi^2 / 4` per unit
/// mass, `int rho (var - dxi^2/4)^+ dx`. A column concentrated on one or two
/// neighbouring velocity cells scores zero.
pub fn monokinetic_deviation(state: &KineticState) -> f64 {
    let m = state.moments();
    let floor = grid_temperature(&state.vgrid);
    let terms = m.rho.iter().zip(&m.variance).map(|(r, v)| r * (v - floor).max(0.0));
    stable_sum(terms) * state.grid.spacing()
}

/// Variance carried by a cold column on the velocity grid.
pub fn grid_temperature(vgrid: &VelocityGrid) -> f64 {
    0.25 * vgrid.spacing().powi(2)
}

/// Adds `mass / dxi`-density at `xi` to the two nearest cell centers.
fn deposit_linear(col: &mut [f64], vgrid: &VelocityGrid, xi: f64, amount: f64) {
    let n = vgrid.n;
    let s = (xi + vgrid.xi_max) / vgrid.spacing() - 0.5;
    if s <= 0.0 {
        col[0] += amount;
    } else if s >= (n - 1) as f64 {
        col[n - 1] += amount;
    } else {
        let j = s.floor() as usize;
        let w = s - j as f64;
        col[j] += (1.0 - w) * amount;
        col[j + 1] += w * amount;
    }
}

/// Time-step restrictions of one kinetic step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticLimits {
    /// `h / Xi`
    pub transport: f64,
    /// Explicit velocity-space limit (infinite for the exact scheme).
    pub alignment: f64,
}

pub fn kinetic_limits(state: &KineticState, scheme: AlignmentScheme) -> KineticLimits {
    let transport = state.grid.spacing() / state.vgrid.xi_max;
    let alignment = match scheme {
        AlignmentScheme::Exact => f64::INFINITY,
        AlignmentScheme::Explicit => {
            let vmax = state.background.max_abs(&state.grid);
            let k = 1.0 + 1.0 / state.epsilon;
            let amax = vmax + state.vgrid.xi_max + (state.vgrid.xi_max + state.vgrid.xi_max) / state.epsilon;
            (state.vgrid.spacing() / amax).min(state.epsilon).min(0.5 / k)
        }
    };
    KineticLimits { transport, alignment }
}

/// One Strang-split step.
pub fn kinetic_step(state: &KineticState, dt: f64, scheme: AlignmentScheme) -> Result<KineticState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(PensError::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let lim = kinetic_limits(state, scheme);
    if dt > lim.transport * (1.0 + 1e-12) {
        return Err(PensError::CflViolation { dt, limit: lim.transport });
    }
    if dt > lim.alignment * (1.0 + 1e-12) {
        return Err(PensError::CflViolation { dt, limit: lim.alignment });
    }
    let mut out = state.clone();
    out.f = transport_x(state, 0.5 * dt);
    out.f = match scheme {
        AlignmentScheme::Explicit => velocity_upwind(&out, dt),
        AlignmentScheme::Exact => velocity_exact(&out, dt),
    };
    out.f = transport_x(&out, 0.5 * dt);
    out.t = state.t + dt;
    let frac = out.boundary_mass_fraction();
    if frac > BOUNDARY_MASS_TOLERANCE {
        return Err(PensError::VelocityBoundary { fraction: frac });
    }
    Ok(out)
}

/// The velocity-space substep alone, for a time `dt`.
pub fn alignment_step(state: &KineticState, dt: f64, scheme: AlignmentScheme) -> Result<KineticState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(PensError::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let lim = kinetic_limits(state, scheme);
    if dt > lim.alignment * (1.0 + 1e-12) {
        return Err(PensError::CflViolation { dt, limit: lim.alignment });
    }
    let mut out = state.clone();
    out.f = match scheme {
        AlignmentScheme::Explicit => velocity_upwind(state, dt),
        AlignmentScheme::Exact => velocity_exact(state, dt),
    };
    out.t = state.t + dt;
    Ok(out)
}

/// Positivity-limited second-order upwind transport `f_t + xi f_x = 0` per column.
fn transport_x(state: &KineticState, dt: f64) -> Vec<f64> {
    let nx = state.grid.n();
    let nv = state.vgrid.n;
    let h = state.grid.spacing();
    let f = &state.f;
    let columns: Vec<Vec<f64>> = (0..nv)
        .into_par_iter()
        .map(|j| {
            let c = state.vgrid.center(j);
            let nu = c * dt / h;
            let q: Vec<f64> = (0..nx).map(|i| f[i * nv + j]).collect();
            let slope: Vec<f64> = (0..nx)
                .map(|i| {
                    let l = q[(i + nx - 1) % nx];
                    let r = q[(i + 1) % nx];
                    (0.5 * (r - l)).clamp(-2.0 * q[i], 2.0 * q[i])
                })
                .collect();
            // flux through the right face of cell i
            let flux: Vec<f64> = (0..nx)
                .map(|i| {
                    if c >= 0.0 {
                        c * (q[i] + 0.5 * (1.0 - nu) * slope[i])
                    } else {
                        let r = (i + 1) % nx;
                        c * (q[r] - 0.5 * (1.0 + nu) * slope[r])
                    }
                })
                .collect();
            (0..nx)
                .map(|i| q[i] - dt / h * (flux[i] - flux[(i + nx - 1) % nx]))
                .collect()
        })
        .collect();
    let mut out = vec![0.0; nx * nv];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            out[i * nv + j] = *v;
        }
    }
    out
}

/// Donor-cell transport in `xi` with the drift evaluated at cell centers,
/// `F_{j+1/2} = a_j^+ f_j - a_{j+1}^- f_{j+1}`, and zero flux through `+-Xi`.
/// The fluxes sum to `sum_j a_j f_j`, so an affine drift moves the mean by
/// exactly `v - u`.
fn velocity_upwind(state: &KineticState, dt: f64) -> Vec<f64> {
    let nv = state.vgrid.n;
    let dxi = state.vgrid.spacing();
    let eps = state.epsilon;
    let m = state.moments();
    let u = m.velocity(RHO_FLOOR);
    state
        .f
        .par_chunks(nv)
        .enumerate()
        .flat_map_iter(|(i, col)| {
            let v = state.background.eval(&state.grid, i);
            let a: Vec<f64> = (0..nv)
                .map(|j| {
                    let xi = state.vgrid.center(j);
                    (v - xi) + (u[i] - xi) / eps
                })
                .collect();
            let fluxes: Vec<f64> = (0..=nv)
                .map(|k| {
                    if k == 0 || k == nv {
                        0.0
                    } else {
                        a[k - 1].max(0.0) * col[k - 1] + a[k].min(0.0) * col[k]
                    }
                })
                .collect();
            (0..nv)
                .map(|j| col[j] - dt / dxi * (fluxes[j + 1] - fluxes[j]))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Exact drift flow: `u -> v + (u - v) e^{-dt}` and
/// `xi - u -> (xi - u) e^{-(1 + 1/eps) dt}`, deposited with linear weights and
/// lifted to the grid floor.
fn velocity_exact(state: &KineticState, dt: f64) -> Vec<f64> {
    let nv = state.vgrid.n;
    let dxi = state.vgrid.spacing();
    let contraction = (-(1.0 + 1.0 / state.epsilon) * dt).exp();
    let relax = (-dt).exp();
    state
        .f
        .par_chunks(nv)
        .enumerate()
        .flat_map_iter(|(i, col)| {
            let rho = stable_sum(col.iter().copied()) * dxi;
            let mut out = vec![0.0; nv];
            if rho <= RHO_FLOOR {
                out.copy_from_slice(col);
                return out;
            }
            let u0 = stable_sum(col.iter().enumerate().map(|(j, c)| c * state.vgrid.center(j))) * dxi / rho;
            let v = state.background.eval(&state.grid, i);
            let u1 = v + (u0 - v) * relax;
            for (j, &c) in col.iter().enumerate() {
                if c != 0.0 {
                    let xi = u1 + (state.vgrid.center(j) - u0) * contraction;
                    deposit_linear(&mut out, &state.vgrid, xi, c);
                }
            }
            lift_variance(&mut out, &state.vgrid, rho, u1);
            out
        })
        .collect()
}

/// Raises a column's variance to the uniform floor `dxi^2 / 4` with one
/// discrete diffusion step, which keeps mass and mean exactly.
fn lift_variance(col: &mut [f64], vgrid: &VelocityGrid, rho: f64, u: f64) {
    let dxi = vgrid.spacing();
    let floor = grid_temperature(vgrid);
    let var = stable_sum(col.iter().enumerate().map(|(j, c)| c * (vgrid.center(j) - u).powi(2))) * dxi / rho;
    if var >= floor {
        return;
    }
    let a = (floor - var) / (2.0 * dxi * dxi);
    let n = col.len();
    let old = col.to_vec();
    for j in 0..n {
        let l = if j > 0 { old[j - 1] } else { 0.0 };
        let r = if j + 1 < n { old[j + 1] } else { 0.0 };
        col[j] = old[j] + a * (l - 2.0 * old[j] + r);
    }
}

/// Pressureless Euler with drag toward a prescribed `v`, on the kinetic `x` grid.
#[derive(Debug, Clone)]
pub struct EulerDrag {
    pub state: EulerState,
    pub background: Background,
    pub theta: f64,
    pub t: f64,
}

impl EulerDrag {
    pub fn new(grid: Grid, rho0: &[f64], u0: &[f64], background: Background, theta: f64) -> Result<Self> {
        let rho = ScalarField::from_vec(grid, rho0.to_vec())?;
        let u = VectorField::from_components(vec![ScalarField::from_vec(grid, u0.to_vec())?])?;
        Ok(Self {
            state: EulerState::from_velocity(rho, &u)?,
            background,
            theta,
            t: 0.0,
        })
    }

    fn tendency(&self, s: &EulerState) -> Result<(ScalarField, VectorField)> {
        let (drho, mut dm) = euler_flux_divergence(s, self.theta, RHO_FLOOR)?;
        let u = velocity_from_momentum(&s.rho, &s.momentum, RHO_FLOOR)?;
        let grid = *s.rho.grid();
        let r = s.rho.data();
        let uc = u.component(0).data();
        let d = &mut dm.components_mut()[0];
        for (i, x) in d.data_mut().iter_mut().enumerate() {
            *x += r[i] * (self.background.eval(&grid, i) - uc[i]);
        }
        Ok((drho, dm))
    }

    /// One SSP-RK3 step.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let s0 = self.state.clone();
        let combine = |a: f64, x: &EulerState, b: f64, y: &EulerState, c: f64, k: &(ScalarField, VectorField)| {
            let mut rho = x.rho.map(|v| a * v);
            rho.axpy(b, &y.rho);
            rho.axpy(c, &k.0);
            let mut m = x.momentum.clone();
            m.scale(a);
            m.axpy(b, &y.momentum);
            m.axpy(c, &k.1);
            EulerState { rho, momentum: m }
        };
        let k1 = self.tendency(&s0)?;
        let s1 = combine(1.0, &s0, 0.0, &s0, dt, &k1);
        let k2 = self.tendency(&s1)?;
        let s2 = combine(0.75, &s0, 0.25, &s1, 0.25 * dt, &k2);
        let k3 = self.tendency(&s2)?;
        self.state = combine(1.0 / 3.0, &s0, 2.0 / 3.0, &s2, 2.0 / 3.0 * dt, &k3);
        self.state.check_finite()?;
        self.t += dt;
        Ok(())
    }

    pub fn velocity(&self) -> Vec<f64> {
        velocity_from_momentum(&self.state.rho, &self.state.momentum, RHO_FLOOR)
            .expect("positive floor")
            .component(0)
            .data()
            .to_vec()
    }
}

/// L2-in-`x` differences of density and velocity at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitError {
    pub t: f64,
    pub rho: f64,
    pub u: f64,
}

/// Compares kinetic moments against an Euler solution on the same grid.
pub fn limit_comparison(kinetic: &KineticState, euler: &EulerDrag) -> Result<LimitError> {
    kinetic.grid.check_same(euler.state.rho.grid())?;
    let m = kinetic.moments();
    let uk = m.velocity(RHO_FLOOR);
    let ue = euler.velocity();
    let h = kinetic.grid.spacing();
    let l2 = |a: &[f64], b: &[f64]| (stable_sum(a.iter().zip(b).map(|(x, y)| (x - y).powi(2))) * h).sqrt();
    Ok(LimitError {
        t: kinetic.t,
        rho: l2(&m.rho, euler.state.rho.data()),
        u: l2(&uk, &ue),
    })
}

/// Kinetic experiment parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticSetup {
    pub nx: usize,
    pub nxi: usize,
    pub length: f64,
    pub rho_amplitude: f64,
    pub u_amplitude: f64,
    pub v_amplitude: f64,
    pub width: f64,
    /// Fraction of the transport limit `h / Xi` used as time step.
    pub cfl: f64,
    pub t_end: f64,
    pub output_times: Vec<f64>,
    pub scheme: AlignmentScheme,
    pub theta: f64,
}

impl Default for KineticSetup {
    fn default() -> Self {
        Self {
            nx: 128,
            nxi: 128,
            length: 1.0,
            rho_amplitude: 0.1,
            u_amplitude: 0.1,
            v_amplitude: 0.1,
            width: 0.1,
            cfl: 0.8,
            t_end: 1.0,
            output_times: vec![0.25, 0.5, 0.75, 1.0],
            scheme: AlignmentScheme::Exact,
            theta: 1.3,
        }
    }
}

/// Results of one kinetic run and its matched Euler run.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticRun {
    pub epsilon: f64,
    pub final_state: KineticState,
    pub mass0: f64,
    pub mass_end: f64,
    pub euler_mass0: f64,
    pub deviation_end: f64,
    pub temperature_end: f64,
    pub errors: Vec<LimitError>,
}

impl KineticSetup {
    pub fn cutoff(&self) -> f64 {
        5.0 * (self.u_amplitude.abs() + self.v_amplitude.abs() + self.width)
    }

    /// Largest `t_end / n` below `cfl * h / Xi`.
    pub fn time_step(&self) -> f64 {
        let limit = self.cfl * self.length / self.nx as f64 / self.cutoff();
        self.t_end / (self.t_end / limit).ceil()
    }

    fn initial(&self) -> Result<(Grid, Vec<f64>, Vec<f64>, Background)> {
        let grid = Grid::new(1, self.nx, self.length)?;
        let k = 2.0 * PI / self.length;
        let rho0: Vec<f64> = (0..self.nx)
            .map(|i| 1.0 + self.rho_amplitude * (k * grid.position(i)[0]).sin())
            .collect();
        let u0: Vec<f64> = (0..self.nx)
            .map(|i| self.u_amplitude * (k * grid.position(i)[0]).cos())
            .collect();
        let bg = Background::Sine {
            amplitude: self.v_amplitude,
            mode: 1,
            phase: 0.25 * PI,
        };
        Ok((grid, rho0, u0, bg))
    }

    pub fn run(&self, epsilon: f64) -> Result<KineticRun> {
        let (grid, rho0, u0, bg) = self.initial()?;
        let vgrid = VelocityGrid::new(self.nxi, self.cutoff())?;
        let mut kin = KineticState::from_moments(grid, vgrid, &rho0, &u0, self.width, epsilon, bg.clone())?;
        let m0 = kin.moments();
        let u_matched = m0.velocity(RHO_FLOOR);
        let mut eul = EulerDrag::new(grid, &m0.rho, &u_matched, bg, self.theta)?;
        let mass0 = kin.mass();
        let euler_mass0 = eul.state.mass();
        let dt = self.time_step();
        let steps = (self.t_end / dt).round() as usize;
        let mut errors = Vec::new();
        let mut next_out = 0;
        for n in 1..=steps {
            kin = kinetic_step(&kin, dt, self.scheme)?;
            eul.step(dt)?;
            let t = n as f64 * dt;
            while next_out < self.output_times.len() && t >= self.output_times[next_out] - 1e-9 {
                errors.push(limit_comparison(&kin, &eul)?);
                next_out += 1;
            }
        }
        Ok(KineticRun {
            final_state: kin.clone(),
            epsilon,
            mass0,
            mass_end: kin.mass(),
            euler_mass0,
            deviation_end: monokinetic_deviation(&kin),
            temperature_end: kinetic_temperature(&kin),
            errors,
        })
    }
}
