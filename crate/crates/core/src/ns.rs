//! Incompressible Navier–Stokes phase in spectral form.
//!
//! The velocity is stored as Leray-projected Fourier coefficients. Viscosity
//! is integrated exactly by the factor `exp(-mu |k|^2 dt)`; the advection term
//! `-div(v (x) v)` is evaluated pseudo-spectrally with 2/3-rule dealiasing of
//! the products, and the drag source is dealiased and projected except for its
//! mean mode, which carries the exchanged momentum unchanged.

use num_complex::Complex64;

use crate::error::{PensError, Result};
use crate::grid::{stable_sum, ScalarField, VectorField};
use crate::spectral::{
    dealias_in_place, divergence, leray_project_in_place, partial, wavenumber_sq, SpectralField,
    Transform,
};

/// Spectral velocity of the carrier phase and its viscosity.
#[derive(Debug, Clone, PartialEq)]
pub struct NsState {
    pub vhat: Vec<SpectralField>,
    pub mu: f64,
}

impl NsState {
    pub fn new(vhat: Vec<SpectralField>, mu: f64) -> Result<Self> {
        check_mu(mu)?;
        if vhat.is_empty() || vhat.len() != vhat[0].grid().dim() {
            return Err(PensError::InvalidArgument(
                "velocity needs one spectral component per dimension".into(),
            ));
        }
        Ok(Self { vhat, mu })
    }

    /// Transforms and Leray-projects a physical velocity field.
    pub fn from_velocity(transform: &Transform, v: &VectorField, mu: f64) -> Result<Self> {
        let mut vhat = transform.forward_vector(v)?;
        leray_project_in_place(&mut vhat);
        Self::new(vhat, mu)
    }

    pub fn velocity(&self, transform: &Transform) -> VectorField {
        transform.inverse_vector(&self.vhat)
    }

    /// Largest spectral divergence magnitude `|k . v_k|` over all modes.
    pub fn max_divergence(&self) -> f64 {
        divergence(&self.vhat)
            .data()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Total momentum `int v dx`, read from the mean mode.
    pub fn momentum(&self) -> Vec<f64> {
        let vol = self.vhat[0].grid().volume();
        self.vhat.iter().map(|c| c.mean().re * vol).collect()
    }

    /// `||v||_{L2}^2`
    pub fn l2_norm_sq(&self) -> f64 {
        self.vhat.iter().map(SpectralField::l2_norm_sq).sum()
    }

    /// `||grad v||_{L2}^2`
    pub fn gradient_norm_sq(&self) -> f64 {
        self.vhat
            .iter()
            .map(|c| {
                let g = *c.grid();
                c.weighted_sum(|i| wavenumber_sq(&g, i))
            })
            .sum()
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(PensError::InvalidArgument(format!(
            "viscosity must be positive and finite, got {mu}"
        )))
    }
}

/// Dealiased `-div(v (x) v)` in spectral space, not projected.
pub fn advection_term(transform: &Transform, v: &VectorField) -> Vec<SpectralField> {
    let d = v.dim();
    let comps = v.components();
    let mut out: Vec<SpectralField> = (0..d)
        .map(|_| SpectralField::zeros(*transform.grid()))
        .collect();
    for a in 0..d {
        for b in a..d {
            let prod: Vec<f64> = comps[a]
                .data()
                .iter()
                .zip(comps[b].data())
                .map(|(x, y)| x * y)
                .collect();
            let mut phat = transform.forward_unchecked(&prod);
            dealias_in_place(&mut phat);
            out[a].axpy(-1.0, &partial(&phat, b));
            if a != b {
                out[b].axpy(-1.0, &partial(&phat, a));
            }
        }
    }
    out
}

/// `P[-(v.grad)v + drag]` with the drag's mean mode kept unprojected.
pub fn ns_tendency(
    transform: &Transform,
    vhat: &[SpectralField],
    drag_source: &VectorField,
) -> Result<Vec<SpectralField>> {
    let v = transform.inverse_vector(vhat);
    tendency_from_velocity(transform, &v, drag_source)
}

/// Same as [`ns_tendency`] when the physical velocity is already at hand.
pub(crate) fn tendency_from_velocity(
    transform: &Transform,
    v: &VectorField,
    drag_source: &VectorField,
) -> Result<Vec<SpectralField>> {
    drag_source.check_finite("drag source")?;
    transform.grid().check_same(drag_source.grid())?;
    let mut out = advection_term(transform, v);
    let mut means = Vec::with_capacity(out.len());
    for (o, f) in out.iter_mut().zip(drag_source.components()) {
        let mut fhat = transform.forward_unchecked(f.data());
        dealias_in_place(&mut fhat);
        o.axpy(1.0, &fhat);
        means.push(stable_sum(f.data().iter().copied()) / f.data().len() as f64);
    }
    leray_project_in_place(&mut out);
    for (o, m) in out.iter_mut().zip(means) {
        o.data_mut()[0] = Complex64::new(m, 0.0);
    }
    Ok(out)
}

/// Multiplies every mode by `exp(-mu |k|^2 dt)`; `dt` may be negative.
pub(crate) fn apply_heat_factor(s: &mut SpectralField, mu: f64, dt: f64) {
    if dt == 0.0 {
        return;
    }
    let g = *s.grid();
    s.apply_real_symbol(|i| (-mu * wavenumber_sq(&g, i) * dt).exp());
}

/// Exact viscous step of length `dt >= 0`.
pub fn viscous_integrating_factor(
    vhat: &[SpectralField],
    mu: f64,
    dt: f64,
) -> Result<Vec<SpectralField>> {
    check_mu(mu)?;
    if !(dt >= 0.0) {
        return Err(PensError::InvalidArgument(format!(
            "viscous step needs dt >= 0, got {dt}"
        )));
    }
    let mut out = vhat.to_vec();
    for c in &mut out {
        apply_heat_factor(c, mu, dt);
    }
    Ok(out)
}

/// Pressure from `-lap p = div[(v.grad)v - drag]`, zero mean.
pub fn pressure_diagnostic(
    transform: &Transform,
    vhat: &[SpectralField],
    drag_source: &VectorField,
) -> Result<ScalarField> {
    drag_source.check_finite("drag source")?;
    let v = transform.inverse_vector(vhat);
    let mut rhs = advection_term(transform, &v);
    for (r, f) in rhs.iter_mut().zip(drag_source.components()) {
        // rhs currently holds -div(v v); flip to div(v v) - drag
        r.scale(-1.0);
        r.axpy(-1.0, &transform.forward(f)?);
    }
    let mut phat = divergence(&rhs);
    let g = *transform.grid();
    phat.data_mut()[0] = Complex64::new(0.0, 0.0);
    phat.apply_real_symbol(|i| {
        let k2 = wavenumber_sq(&g, i);
        if k2 > 0.0 {
            1.0 / k2
        } else {
            0.0
        }
    });
    Ok(transform.inverse(&phat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn taylor_green(g: Grid) -> VectorField {
        VectorField::from_fn(g, |x| [x[0].cos() * x[1].sin(), -x[0].sin() * x[1].cos(), 0.0])
    }

    #[test]
    fn taylor_green_tendency_vanishes() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let t = Transform::new(g);
        let ns = NsState::from_velocity(&t, &taylor_green(g), 1.0).unwrap();
        let tend = ns_tendency(&t, &ns.vhat, &VectorField::zeros(g)).unwrap();
        for c in &tend {
            assert!(c.l2_norm() < 1e-12, "{}", c.l2_norm());
        }
    }

    #[test]
    fn taylor_green_pressure() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let t = Transform::new(g);
        let ns = NsState::from_velocity(&t, &taylor_green(g), 1.0).unwrap();
        let p = pressure_diagnostic(&t, &ns.vhat, &VectorField::zeros(g)).unwrap();
        for (i, &pv) in p.data().iter().enumerate() {
            let x = g.position(i);
            let exact = -((2.0 * x[0]).cos() + (2.0 * x[1]).cos()) / 4.0;
            assert!((pv - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn gradient_drag_is_projected_away_but_sets_pressure() {
        let g = Grid::new(3, 16, 2.0).unwrap();
        let t = Transform::new(g);
        let k = PI;
        let phi = |x: [f64; 3]| (k * x[0]).sin() * (k * x[1]).cos() + 0.3 * (k * x[2]).cos();
        let drag = VectorField::from_fn(g, |x| {
            [
                k * (k * x[0]).cos() * (k * x[1]).cos(),
                -k * (k * x[0]).sin() * (k * x[1]).sin(),
                -0.3 * k * (k * x[2]).sin(),
            ]
        });
        let zero = vec![SpectralField::zeros(g); 3];
        let tend = ns_tendency(&t, &zero, &drag).unwrap();
        for c in &tend {
            assert!(c.l2_norm() < 1e-12);
        }
        let p = pressure_diagnostic(&t, &zero, &drag).unwrap();
        for (i, &pv) in p.data().iter().enumerate() {
            assert!((pv - phi(g.position(i))).abs() < 1e-12);
        }
    }

    #[test]
    fn drag_mean_passes_through_exactly() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let t = Transform::new(g);
        let drag = VectorField::from_fn(g, |x| [0.25 + (2.0 * PI * x[1]).sin(), -0.5, 0.0]);
        let zero = vec![SpectralField::zeros(g); 2];
        let tend = ns_tendency(&t, &zero, &drag).unwrap();
        assert_eq!(tend[0].mean(), Complex64::new(0.25, 0.0));
        assert_eq!(tend[1].mean(), Complex64::new(-0.5, 0.0));
    }

    #[test]
    fn integrating_factor_semigroup_and_mean() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let t = Transform::new(g);
        let v = VectorField::from_fn(g, |x| {
            [1.0 + (2.0 * PI * x[1]).sin(), (2.0 * PI * 3.0 * x[0]).cos(), 0.0]
        });
        let ns = NsState::from_velocity(&t, &v, 0.7).unwrap();
        let full = viscous_integrating_factor(&ns.vhat, 0.7, 0.02).unwrap();
        let half = viscous_integrating_factor(&ns.vhat, 0.7, 0.01).unwrap();
        let half2 = viscous_integrating_factor(&half, 0.7, 0.01).unwrap();
        for (a, b) in full.iter().zip(&half2) {
            for (x, y) in a.data().iter().zip(b.data()) {
                assert!((x - y).norm() < 1e-14);
            }
        }
        assert_eq!(full[0].mean(), ns.vhat[0].mean());
        assert_eq!(viscous_integrating_factor(&ns.vhat, 0.7, 0.0).unwrap(), ns.vhat);
        assert!(viscous_integrating_factor(&ns.vhat, 0.7, -1.0).is_err());
    }
}
