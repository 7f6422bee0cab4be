//! Time integration of the coupled system.
//!
//! One step is a single SSP-RK3 (Shu–Osher) pass over both phases. The
//! carrier velocity is advanced in integrating-factor form so viscosity is
//! exact, and the drag exchange is evaluated stage by stage from one array, so
//! the momentum leaving the particles is the momentum entering the fluid.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{PensError, Result};
use crate::euler::{euler_flux_divergence, velocity_from_momentum, EulerState};
use crate::grid::{stable_sum, Grid, ScalarField, VectorField};
use crate::ns::{apply_heat_factor, tendency_from_velocity, NsState};
use crate::spectral::{dealias_in_place, leray_project_in_place, SpectralField, Transform};

/// Full unknown `(rho, rho u, v)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub euler: EulerState,
    pub ns: NsState,
    pub t: f64,
}

impl FluidState {
    pub fn new(euler: EulerState, ns: NsState, t: f64) -> Result<Self> {
        euler.rho.grid().check_same(ns.vhat[0].grid())?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(PensError::InvalidArgument(format!("invalid time {t}")));
        }
        Ok(Self { euler, ns, t })
    }

    pub fn grid(&self) -> &Grid {
        self.euler.rho.grid()
    }

    /// Total momentum of both phases.
    pub fn momentum(&self) -> Vec<f64> {
        let mut m = self.euler.momentum.integral();
        for (a, b) in m.iter_mut().zip(self.ns.momentum()) {
            *a += b;
        }
        m
    }
}

/// Step-size policy and run length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    /// Diagnostics are recorded every this many steps.
    pub output_every: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            dt_max: 0.05,
            t_end: 1.0,
            output_every: 10,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(PensError::InvalidArgument(format!(
                "cfl must lie in (0, 1), got {}",
                self.cfl
            )));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(PensError::InvalidArgument(format!(
                "dt_max must be positive, got {}",
                self.dt_max
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(PensError::InvalidArgument(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if self.output_every == 0 {
            return Err(PensError::InvalidArgument("output cadence must be at least 1".into()));
        }
        Ok(())
    }
}

/// How the drag exchange enters a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DragScheme {
    Off,
    /// Evaluated at every Runge–Kutta stage.
    Explicit,
    /// Exact per-cell relaxation over half steps around the transport step.
    Exact,
}

/// Which phases are advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    Coupled,
    /// Particles only; `v` is held fixed.
    EulerOnly,
    /// Carrier fluid only; the Euler state is held fixed.
    NsOnly,
}

/// `(-rho (u - v), rho (u - v))`, the second being the exact negation of the first.
pub fn drag_exchange(
    rho: &ScalarField,
    u: &VectorField,
    v: &VectorField,
) -> Result<(VectorField, VectorField)> {
    rho.grid().check_same(u.grid())?;
    rho.grid().check_same(v.grid())?;
    let grid = *rho.grid();
    let mut to_euler = Vec::with_capacity(grid.dim());
    let mut to_ns = Vec::with_capacity(grid.dim());
    for (uc, vc) in u.components().iter().zip(v.components()) {
        let f: Vec<f64> = rho
            .data()
            .par_iter()
            .zip(uc.data())
            .zip(vc.data())
            .map(|((r, a), b)| r * (a - b))
            .collect();
        to_euler.push(ScalarField::from_vec(grid, f.iter().map(|x| -x).collect())?);
        to_ns.push(ScalarField::from_vec(grid, f)?);
    }
    Ok((
        VectorField::from_components(to_euler)?,
        VectorField::from_components(to_ns)?,
    ))
}

struct Tendency {
    drho: Option<ScalarField>,
    dm: Option<VectorField>,
    dv: Option<Vec<SpectralField>>,
}

/// Outcome of one step.
#[derive(Debug, Clone)]
pub struct Stepped {
    pub state: FluidState,
    /// Cells whose density fell below zero and was clipped.
    pub clipped: usize,
}

/// Integrator for the coupled system on one grid.
#[derive(Debug, Clone)]
pub struct Coupler {
    transform: Transform,
    pub theta: f64,
    pub rho_floor: f64,
    pub drag: DragScheme,
    pub mode: PhaseMode,
}

impl Coupler {
    pub fn new(grid: Grid, theta: f64, rho_floor: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&theta) {
            return Err(PensError::InvalidArgument(format!(
                "limiter parameter must lie in [1, 2], got {theta}"
            )));
        }
        if !(rho_floor > 0.0) {
            return Err(PensError::InvalidArgument(format!(
                "density floor must be positive, got {rho_floor}"
            )));
        }
        Ok(Self {
            transform: Transform::new(grid),
            theta,
            rho_floor,
            drag: DragScheme::Explicit,
            mode: PhaseMode::Coupled,
        })
    }

    pub fn with_drag(mut self, drag: DragScheme) -> Self {
        self.drag = drag;
        self
    }

    pub fn with_mode(mut self, mode: PhaseMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn grid(&self) -> &Grid {
        self.transform.grid()
    }

    fn drag_active(&self) -> bool {
        self.mode == PhaseMode::Coupled && self.drag != DragScheme::Off
    }

    /// Particle velocity with the configured density floor.
    pub fn particle_velocity(&self, euler: &EulerState) -> Result<VectorField> {
        velocity_from_momentum(&euler.rho, &euler.momentum, self.rho_floor)
    }

    /// `cfl * h / max(|u|, |v|)`, capped by `dt_max`.
    pub fn cfl_dt(&self, state: &FluidState, control: &StepControl) -> Result<f64> {
        let u = self.particle_velocity(&state.euler)?;
        let v = state.ns.velocity(&self.transform);
        let speed = u.max_magnitude().max(v.max_magnitude()).max(1e-300);
        Ok((control.cfl * state.grid().spacing() / speed).min(control.dt_max))
    }

    fn tendency(&self, euler: &EulerState, vhat: &[SpectralField], t: f64, stage: usize) -> Result<Tendency> {
        let diverged = |e: PensError| PensError::Diverged {
            t,
            stage,
            detail: e.to_string(),
        };
        euler.check_finite().map_err(diverged)?;
        let grid = *self.grid();
        let advance_euler = self.mode != PhaseMode::NsOnly;
        let advance_ns = self.mode != PhaseMode::EulerOnly;
        let explicit_drag = self.drag_active() && self.drag == DragScheme::Explicit;

        let v = (advance_ns || explicit_drag).then(|| self.transform.inverse_vector(vhat));
        if let Some(v) = &v {
            v.check_finite("carrier velocity").map_err(diverged)?;
        }
        let (drag_e, drag_n) = if explicit_drag {
            let u = self.particle_velocity(euler)?;
            let (a, b) = drag_exchange(&euler.rho, &u, v.as_ref().expect("velocity computed"))?;
            (Some(a), Some(b))
        } else {
            (None, None)
        };

        let (drho, dm) = if advance_euler {
            let (drho, mut dm) = euler_flux_divergence(euler, self.theta, self.rho_floor).map_err(diverged)?;
            if let Some(s) = &drag_e {
                dm.axpy(1.0, s);
            }
            (Some(drho), Some(dm))
        } else {
            (None, None)
        };
        let dv = if advance_ns {
            let zero;
            let src = match &drag_n {
                Some(s) => s,
                None => {
                    zero = VectorField::zeros(grid);
                    &zero
                }
            };
            Some(tendency_from_velocity(&self.transform, v.as_ref().expect("velocity computed"), src).map_err(diverged)?)
        } else {
            None
        };
        Ok(Tendency { drho, dm, dv })
    }

    /// Advances `state` by `dt`, which must not exceed the CFL step.
    pub fn step(&self, state: &FluidState, dt: f64, control: &StepControl) -> Result<Stepped> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(PensError::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let limit = self.cfl_dt(state, control)?;
        if dt > limit * (1.0 + 1e-12) {
            return Err(PensError::CflViolation { dt, limit });
        }
        let exact = self.drag_active() && self.drag == DragScheme::Exact;
        let start = if exact {
            self.exact_drag(state, 0.5 * dt)?
        } else {
            state.clone()
        };
        let mut next = self.ssp_rk3(&start, dt)?;
        if exact {
            next = self.exact_drag(&next, 0.5 * dt)?;
        }
        let clipped = clip_negative_density(&mut next.euler);
        next.euler.check_finite().map_err(|e| PensError::Diverged {
            t: state.t + dt,
            stage: 3,
            detail: e.to_string(),
        })?;
        Ok(Stepped { state: next, clipped })
    }

    fn ssp_rk3(&self, s0: &FluidState, dt: f64) -> Result<FluidState> {
        let mu = s0.ns.mu;
        let t0 = s0.t;
        let e0 = &s0.euler;
        let v0 = &s0.ns.vhat;
        let heat = |v: &[SpectralField], tau: f64| -> Vec<SpectralField> {
            let mut out = v.to_vec();
            for c in &mut out {
                apply_heat_factor(c, mu, tau);
            }
            out
        };

        // stage 1
        let k1 = self.tendency(e0, v0, t0, 1)?;
        let e1 = euler_combine(e0, &[], &k1, dt);
        let w0 = match &k1.dv {
            Some(dv) => spectral_combine(v0, 1.0, &[], dv, dt),
            None => v0.clone(),
        };
        let v1 = if k1.dv.is_some() { heat(&w0, dt) } else { w0.clone() };

        // stage 2
        let k2 = self.tendency(&e1, &v1, t0 + dt, 2)?;
        let e2 = euler_combine(e0, &[(0.75, e0), (0.25, &e1)], &k2, 0.25 * dt);
        let v2 = match &k2.dv {
            Some(dv) => {
                let a = heat(v0, 0.5 * dt);
                let b = heat(&w0, 0.5 * dt);
                let c = heat(dv, -0.5 * dt);
                spectral_combine(&a, 0.75, &[(0.25, &b)], &c, 0.25 * dt)
            }
            None => v0.clone(),
        };

        // stage 3
        let k3 = self.tendency(&e2, &v2, t0 + 0.5 * dt, 3)?;
        let e3 = euler_combine(e0, &[(1.0 / 3.0, e0), (2.0 / 3.0, &e2)], &k3, 2.0 / 3.0 * dt);
        let v3 = match &k3.dv {
            Some(dv) => {
                let inner = heat(&spectral_combine(&v2, 1.0, &[], dv, dt), 0.5 * dt);
                spectral_combine(&heat(v0, dt), 1.0 / 3.0, &[(2.0 / 3.0, &inner)], dv, 0.0)
            }
            None => v0.clone(),
        };

        FluidState::new(e3, NsState { vhat: v3, mu }, t0 + dt)
    }

    /// Per-cell exact solution of `(rho u)' = -rho (u - v)`, `v' = rho (u - v)`
    /// over `tau`, with the carrier increment projected (mean kept).
    fn exact_drag(&self, state: &FluidState, tau: f64) -> Result<FluidState> {
        let u = self.particle_velocity(&state.euler)?;
        let v = state.ns.velocity(&self.transform);
        let rho = state.euler.rho.data();
        let mut out = state.clone();
        for axis in 0..self.grid().dim() {
            let ua = u.component(axis).data();
            let va = v.component(axis).data();
            let x: Vec<f64> = rho
                .par_iter()
                .zip(ua)
                .zip(va)
                .map(|((&r, &a), &b)| {
                    let rate = 1.0 + r;
                    r * (a - b) * (-(-rate * tau).exp_m1()) / rate
                })
                .collect();
            let m = out.euler.momentum.components_mut()[axis].data_mut();
            m.par_iter_mut().zip(&x).for_each(|(mv, xv)| *mv -= xv);
            let mean = stable_sum(x.iter().copied()) / x.len() as f64;
            let mut xhat = self.transform.forward_unchecked(&x);
            dealias_in_place(&mut xhat);
            xhat.data_mut()[0] = Complex64::new(mean, 0.0);
            out.ns.vhat[axis].axpy(1.0, &xhat);
        }
        let mean: Vec<Complex64> = out.ns.vhat.iter().map(|c| c.mean()).collect();
        leray_project_in_place(&mut out.ns.vhat);
        for (c, m) in out.ns.vhat.iter_mut().zip(mean) {
            c.data_mut()[0] = m;
        }
        Ok(out)
    }
}

/// `base_scale * sum(w_i * x_i) + h * k`, where an empty list means `x = base`.
fn euler_combine(base: &EulerState, terms: &[(f64, &EulerState)], k: &Tendency, h: f64) -> EulerState {
    let (drho, dm) = match (&k.drho, &k.dm) {
        (Some(a), Some(b)) => (a, b),
        _ => return base.clone(),
    };
    let mut rho = ScalarField::zeros(*base.rho.grid());
    let mut m = VectorField::zeros(*base.rho.grid());
    if terms.is_empty() {
        rho = base.rho.clone();
        m = base.momentum.clone();
    } else {
        for (w, x) in terms {
            rho.axpy(*w, &x.rho);
            m.axpy(*w, &x.momentum);
        }
    }
    rho.axpy(h, drho);
    m.axpy(h, dm);
    EulerState { rho, momentum: m }
}

/// `a * base + sum(w_i x_i) + h * k` componentwise.
fn spectral_combine(
    base: &[SpectralField],
    a: f64,
    terms: &[(f64, &Vec<SpectralField>)],
    k: &[SpectralField],
    h: f64,
) -> Vec<SpectralField> {
    base.iter()
        .enumerate()
        .map(|(c, b)| {
            let mut out = b.clone();
            if a != 1.0 {
                out.scale(a);
            }
            for (w, x) in terms {
                out.axpy(*w, &x[c]);
            }
            if h != 0.0 {
                out.axpy(h, &k[c]);
            }
            out
        })
        .collect()
}

fn clip_negative_density(euler: &mut EulerState) -> usize {
    let mut count = 0;
    let rho = euler.rho.data_mut();
    for (i, r) in rho.iter_mut().enumerate() {
        if *r < 0.0 {
            *r = 0.0;
            count += 1;
            for c in euler.momentum.components_mut() {
                c.data_mut()[i] = 0.0;
            }
        }
    }
    count
}
