//! Pressureless Euler phase: conservative central-upwind finite-volume
//! fluxes for density and momentum.
//!
//! The flux Jacobian of the pressureless system has the single (repeated)
//! eigenvalue `u_a` along axis `a`, so the local one-sided speeds collapse to
//! `max(|u_a^-|, |u_a^+|)` and the central-upwind flux reduces to a
//! local Lax-Friedrichs form on limited piecewise-linear reconstructions.

use rayon::prelude::*;

use crate::error::{PensError, Result};
use crate::grid::{ScalarField, VectorField};

pub const DEFAULT_THETA: f64 = 1.3;

/// Density and momentum of the dispersed phase.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerState {
    pub rho: ScalarField,
    pub momentum: VectorField,
}

impl EulerState {
    pub fn new(rho: ScalarField, momentum: VectorField) -> Result<Self> {
        rho.grid().check_same(momentum.grid())?;
        Ok(Self { rho, momentum })
    }

    /// Builds the state from density and velocity.
    pub fn from_velocity(rho: ScalarField, velocity: &VectorField) -> Result<Self> {
        rho.grid().check_same(velocity.grid())?;
        let comps = velocity
            .components()
            .iter()
            .map(|u| {
                let data = rho.data().iter().zip(u.data()).map(|(r, v)| r * v).collect();
                ScalarField::from_vec(*rho.grid(), data).expect("same grid")
            })
            .collect();
        Ok(Self {
            rho,
            momentum: VectorField::from_components(comps)?,
        })
    }

    pub fn check_finite(&self) -> Result<()> {
        self.rho.check_finite("rho")?;
        self.momentum.check_finite("momentum")
    }

    pub fn mass(&self) -> f64 {
        self.rho.integral()
    }
}

/// `u = m / max(rho, floor)`; vacuum cells with zero momentum give zero velocity.
pub fn velocity_from_momentum(
    rho: &ScalarField,
    momentum: &VectorField,
    rho_floor: f64,
) -> Result<VectorField> {
    if !(rho_floor > 0.0) {
        return Err(PensError::InvalidArgument(format!(
            "density floor must be positive, got {rho_floor}"
        )));
    }
    rho.grid().check_same(momentum.grid())?;
    let comps = momentum
        .components()
        .iter()
        .map(|m| {
            let data = rho
                .data()
                .iter()
                .zip(m.data())
                .map(|(&r, &mv)| mv / r.max(rho_floor))
                .collect();
            ScalarField::from_vec(*rho.grid(), data).expect("same grid")
        })
        .collect();
    VectorField::from_components(comps)
}

/// Generalized minmod of three slopes.
#[inline]
fn minmod3(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

/// Limited cell slope (per cell, in value units) along `axis`.
#[inline]
fn limited_slope(values: &[f64], grid: &crate::grid::Grid, i: usize, axis: usize, theta: f64) -> f64 {
    let l = values[grid.shift(i, axis, -1)];
    let c = values[i];
    let r = values[grid.shift(i, axis, 1)];
    minmod3(theta * (c - l), 0.5 * (r - l), theta * (r - c))
}

/// Reconstructed interface values along one axis.
///
/// Entry `i` of both fields refers to the interface between cell `i` and its
/// `+1` neighbour: `left` is extrapolated from cell `i`, `right` from `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interfaces {
    pub left: ScalarField,
    pub right: ScalarField,
}

/// Piecewise-linear reconstruction with the generalized minmod limiter,
/// `theta` in `[1, 2]`.
pub fn minmod_reconstruct(values: &ScalarField, axis: usize, theta: f64) -> Result<Interfaces> {
    check_theta(theta)?;
    let grid = *values.grid();
    if axis >= grid.dim() {
        return Err(PensError::InvalidArgument(format!(
            "axis {axis} out of range for a {}-d grid",
            grid.dim()
        )));
    }
    let v = values.data();
    let slopes: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| limited_slope(v, &grid, i, axis, theta))
        .collect();
    let left = (0..grid.len()).map(|i| v[i] + 0.5 * slopes[i]).collect();
    let right = (0..grid.len())
        .map(|i| {
            let j = grid.shift(i, axis, 1);
            v[j] - 0.5 * slopes[j]
        })
        .collect();
    Ok(Interfaces {
        left: ScalarField::from_vec(grid, left)?,
        right: ScalarField::from_vec(grid, right)?,
    })
}

fn check_theta(theta: f64) -> Result<()> {
    if (1.0..=2.0).contains(&theta) {
        Ok(())
    } else {
        Err(PensError::InvalidArgument(format!(
            "limiter parameter must lie in [1, 2], got {theta}"
        )))
    }
}

/// Face speeds above this multiple of the largest cell speed are replaced by
/// the cell velocity, so a CFL number up to 0.45 keeps density nonnegative.
const FACE_SPEED_CAP: f64 = 1.1;

fn max_cell_speed(state: &EulerState, rho_floor: f64) -> f64 {
    let rho = state.rho.data();
    let comps = state.momentum.components();
    (0..rho.len())
        .into_par_iter()
        .map(|i| {
            let r = rho[i].max(rho_floor);
            comps.iter().map(|c| (c.data()[i] / r).powi(2)).sum::<f64>().sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

/// Near vacuum, independently limited `rho` and `m` can give face velocities
/// far above any cell velocity. Such faces take the velocity of their cell.
#[allow(clippy::too_many_arguments)]
fn cap_face_speed(face: &mut [f64; 4], q: &[f64], w: usize, cell: usize, nv: usize, axis: usize, cap: f64, rho_floor: f64) {
    let r = face[0].max(rho_floor);
    let speed_sq: f64 = (1..nv).map(|v| (face[v] / r).powi(2)).sum();
    if speed_sq.sqrt() <= cap && (face[1 + axis] / r).abs() <= cap {
        return;
    }
    let rc = q[cell].max(rho_floor);
    for v in 1..nv {
        face[v] = face[0] * q[v * w + cell] / rc;
    }
}

/// Advective tendencies `(-div(rho u), -div(rho u (x) u))`.
pub fn euler_flux_divergence(
    state: &EulerState,
    theta: f64,
    rho_floor: f64,
) -> Result<(ScalarField, VectorField)> {
    check_theta(theta)?;
    if !(rho_floor > 0.0) {
        return Err(PensError::InvalidArgument(format!(
            "density floor must be positive, got {rho_floor}"
        )));
    }
    state.check_finite()?;
    let grid = *state.rho.grid();
    let d = grid.dim();
    let len = grid.len();
    let h = grid.spacing();

    let speed_cap = FACE_SPEED_CAP * max_cell_speed(state, rho_floor);

    // conserved variables: rho, m_0..m_{d-1}
    let vars: Vec<&[f64]> = std::iter::once(state.rho.data())
        .chain(state.momentum.components().iter().map(|c| c.data()))
        .collect();
    let nv = vars.len();
    let n = grid.n();
    let mut tendency: Vec<Vec<f64>> = vec![vec![0.0; len]; nv];

    for axis in 0..d {
        let stride = grid.stride(axis);
        let block = n * stride;
        let lines = len / n;
        // one periodic line along `axis` per entry, values interleaved by variable
        let line_tendencies: Vec<Vec<f64>> = (0..lines)
            .into_par_iter()
            .map(|l| {
                let start = (l / stride) * block + l % stride;
                // q: one ghost cell per side; slope: one trailing ghost; flux: one leading ghost
                let w = n + 2;
                let mut q = vec![0.0; nv * w];
                let mut slope = vec![0.0; nv * (n + 1)];
                let mut flux = vec![0.0; nv * (n + 1)];
                for (v, var) in vars.iter().enumerate() {
                    let line = &mut q[v * w..(v + 1) * w];
                    for k in 0..n {
                        line[k + 1] = var[start + k * stride];
                    }
                    line[0] = line[n];
                    line[n + 1] = line[1];
                    let s = &mut slope[v * (n + 1)..(v + 1) * (n + 1)];
                    for k in 0..n {
                        let (lo, c, hi) = (line[k], line[k + 1], line[k + 2]);
                        s[k] = minmod3(theta * (c - lo), 0.5 * (hi - lo), theta * (hi - c));
                    }
                    s[n] = s[0];
                }
                for k in 0..n {
                    let mut left = [0.0; 4];
                    let mut right = [0.0; 4];
                    for v in 0..nv {
                        left[v] = q[v * w + k + 1] + 0.5 * slope[v * (n + 1) + k];
                        right[v] = q[v * w + k + 2] - 0.5 * slope[v * (n + 1) + k + 1];
                    }
                    // cells k and k + 1 of the line sit at q offsets k + 1 and k + 2
                    cap_face_speed(&mut left, &q, w, k + 1, nv, axis, speed_cap, rho_floor);
                    cap_face_speed(&mut right, &q, w, k + 2, nv, axis, speed_cap, rho_floor);
                    let ul = left[1 + axis] / left[0].max(rho_floor);
                    let ur = right[1 + axis] / right[0].max(rho_floor);
                    let a = ul.abs().max(ur.abs());
                    for v in 0..nv {
                        flux[v * (n + 1) + k + 1] =
                            0.5 * (left[v] * ul + right[v] * ur) - 0.5 * a * (right[v] - left[v]);
                    }
                }
                let mut diff = vec![0.0; nv * n];
                for v in 0..nv {
                    let f = &mut flux[v * (n + 1)..(v + 1) * (n + 1)];
                    f[0] = f[n];
                    for k in 0..n {
                        diff[v * n + k] = (f[k + 1] - f[k]) / h;
                    }
                }
                diff
            })
            .collect();
        for (l, diff) in line_tendencies.iter().enumerate() {
            let start = (l / stride) * block + l % stride;
            for (v, t) in tendency.iter_mut().enumerate() {
                for k in 0..n {
                    t[start + k * stride] -= diff[v * n + k];
                }
            }
        }
    }

    let mut fields = tendency
        .into_iter()
        .map(|t| ScalarField::from_vec(grid, t).expect("length matches grid"));
    let drho = fields.next().expect("density tendency");
    let dm = VectorField::from_components(fields.collect())?;
    Ok((drho, dm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    #[test]
    fn velocity_recovery() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let rho = ScalarField::from_vec(g, vec![1.0, 0.0, 2e-10, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let m = VectorField::from_components(vec![ScalarField::from_vec(
            g,
            vec![0.1, 0.0, 3e-10, 0.0, 0.0, 0.0, 0.0, 0.0],
        )
        .unwrap()])
        .unwrap();
        let u = velocity_from_momentum(&rho, &m, 1e-10).unwrap();
        assert_eq!(u.component(0).data()[0], 0.1);
        assert_eq!(u.component(0).data()[1], 0.0);
        assert!((u.component(0).data()[2] - 1.5).abs() < 1e-12);
        assert!(velocity_from_momentum(&rho, &m, 0.0).is_err());
        assert!(velocity_from_momentum(&rho, &m, -1.0).is_err());
    }

    #[test]
    fn reconstruction_is_exact_for_linear_data_and_flat_at_extrema() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let lin = ScalarField::from_fn(g, |x| 2.0 * x[0]);
        let faces = minmod_reconstruct(&lin, 0, 1.3).unwrap();
        let h = g.spacing();
        // interior faces (periodic wrap creates a jump at the ends)
        for i in 1..14 {
            let exact = 2.0 * (i as f64 + 0.5) * h;
            assert!((faces.left.data()[i] - exact).abs() < 1e-14);
            assert!((faces.right.data()[i] - exact).abs() < 1e-14);
        }
        let bump = ScalarField::from_vec(g, {
            let mut v = vec![0.0; 16];
            v[5] = 1.0;
            v
        })
        .unwrap();
        let faces = minmod_reconstruct(&bump, 0, 2.0).unwrap();
        assert_eq!(faces.left.data()[5], 1.0);
        assert_eq!(faces.right.data()[4], 1.0);
        assert!(minmod_reconstruct(&bump, 0, 2.5).is_err());
        assert!(minmod_reconstruct(&bump, 1, 1.5).is_err());
    }

    #[test]
    fn stationary_uniform_state_has_zero_tendency() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let state = EulerState::new(ScalarField::constant(g, 1.3), VectorField::zeros(g)).unwrap();
        let (dr, dm) = euler_flux_divergence(&state, DEFAULT_THETA, 1e-10).unwrap();
        assert!(dr.data().iter().all(|&v| v == 0.0));
        assert!(dm.components().iter().all(|c| c.data().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn flux_divergence_telescopes() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let rho = ScalarField::from_fn(g, |x| 1.0 + 0.3 * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos());
        let u = VectorField::from_fn(g, |x| {
            [0.2 * (2.0 * PI * x[1]).sin(), -0.1 * (2.0 * PI * (x[0] + x[1])).cos(), 0.0]
        });
        let state = EulerState::from_velocity(rho, &u).unwrap();
        let (dr, dm) = euler_flux_divergence(&state, DEFAULT_THETA, 1e-10).unwrap();
        let scale = dr.max_abs() * g.volume();
        assert!(dr.integral().abs() <= 1e-13 * scale);
        for c in dm.components() {
            assert!(c.integral().abs() <= 1e-13 * c.max_abs().max(1e-300) * g.volume());
        }
    }

    #[test]
    fn non_finite_state_is_rejected() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let mut rho = ScalarField::constant(g, 1.0);
        rho.data_mut()[3] = f64::INFINITY;
        let state = EulerState::new(rho, VectorField::zeros(g)).unwrap();
        assert!(matches!(
            euler_flux_divergence(&state, 1.3, 1e-10),
            Err(PensError::NonFinite { index: 3, .. })
        ));
    }
}
