//! Heat-equation reference solutions: isotropic Gaussians in closed form, the
//! exact spectral heat semigroup on the periodic grid, and the polynomial
//! decay bound `C (||v0||_2^2 + ||v0||_1^2) / (1 + t)^(d/2)`.

use std::f64::consts::PI;

use crate::error::{PensError, Result};
use crate::grid::{Grid, ScalarField};
use crate::spectral::{wavenumber_sq, Transform};

/// `A exp(-|x - x0|^2 / (2 sigma^2))` in `d` dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProfile {
    pub amplitude: f64,
    pub center: [f64; 3],
    pub variance: f64,
    pub dim: usize,
}

impl GaussianProfile {
    pub fn new(amplitude: f64, center: [f64; 3], variance: f64, dim: usize) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(PensError::InvalidArgument(format!(
                "Gaussian variance must be positive, got {variance}"
            )));
        }
        if !(1..=3).contains(&dim) {
            return Err(PensError::InvalidArgument(format!("dimension {dim} outside 1..=3")));
        }
        if !amplitude.is_finite() {
            return Err(PensError::InvalidArgument("amplitude must be finite".into()));
        }
        Ok(Self {
            amplitude,
            center,
            variance,
            dim,
        })
    }

    fn half_d(&self) -> f64 {
        self.dim as f64 / 2.0
    }

    pub fn l1_norm(&self) -> f64 {
        self.amplitude.abs() * (2.0 * PI * self.variance).powf(self.half_d())
    }

    /// `||V(t)||_{L2}^2` of the heat evolution in the whole space.
    pub fn l2_norm_sq(&self, t: f64) -> f64 {
        let s2 = self.variance;
        self.amplitude.powi(2) * (PI * s2).powf(self.half_d()) * (s2 / (s2 + 2.0 * t)).powf(self.half_d())
    }

    /// Samples the profile on a grid at time `t`, using the nearest periodic
    /// image of the center.
    pub fn sample(&self, grid: Grid, t: f64) -> ScalarField {
        ScalarField::from_fn(grid, |x| {
            let mut y = [0.0; 3];
            for a in 0..self.dim {
                y[a] = self.center[a] + grid.wrap_displacement(x[a] - self.center[a]);
            }
            gaussian_heat_exact(self, t, y)
        })
    }

    /// Heat solution on the torus: the closed form summed over periodic images
    /// up to `images` box lengths away on every axis.
    pub fn sample_periodic(&self, grid: Grid, t: f64, images: usize) -> ScalarField {
        let l = grid.length();
        let span = 2 * images + 1;
        let combos = span.pow(self.dim as u32);
        ScalarField::from_fn(grid, |x| {
            let mut base = [0.0; 3];
            for a in 0..self.dim {
                base[a] = self.center[a] + grid.wrap_displacement(x[a] - self.center[a]);
            }
            let terms = (0..combos).map(|c| {
                let mut y = base;
                let mut rest = c;
                for ya in y.iter_mut().take(self.dim) {
                    *ya += ((rest % span) as f64 - images as f64) * l;
                    rest /= span;
                }
                gaussian_heat_exact(self, t, y)
            });
            crate::grid::stable_sum(terms)
        })
    }
}

/// Whole-space heat solution at `(t, x)`: amplitude `A (s^2/(s^2+2t))^(d/2)`,
/// variance `s^2 + 2t`.
pub fn gaussian_heat_exact(profile: &GaussianProfile, t: f64, x: [f64; 3]) -> f64 {
    let var = profile.variance + 2.0 * t;
    let r2: f64 = (0..profile.dim).map(|a| (x[a] - profile.center[a]).powi(2)).sum();
    profile.amplitude * (profile.variance / var).powf(profile.half_d()) * (-r2 / (2.0 * var)).exp()
}

/// `C (l2^2 + l1^2) / (1 + t)^(d/2)`
pub fn heat_decay_bound(t: f64, d: usize, l1: f64, l2: f64, c: f64) -> f64 {
    c * (l2 * l2 + l1 * l1) / (1.0 + t).powf(d as f64 / 2.0)
}

/// Smallest `C` for which the Gaussian's `L2^2` trajectory stays below the
/// bound at every time in `times`.
pub fn calibrate_decay_constant(profile: &GaussianProfile, times: &[f64]) -> f64 {
    let l1 = profile.l1_norm();
    let l2 = profile.l2_norm_sq(0.0).sqrt();
    times
        .iter()
        .map(|&t| profile.l2_norm_sq(t) / heat_decay_bound(t, profile.dim, l1, l2, 1.0))
        .fold(0.0, f64::max)
}

/// `(t, ||V(t)||_{L2}^2)` at the given times.
pub fn gaussian_l2_series(profile: &GaussianProfile, times: &[f64]) -> Vec<(f64, f64)> {
    times.iter().map(|&t| (t, profile.l2_norm_sq(t))).collect()
}

/// `n` logarithmically spaced times on `[t0, t1]`.
pub fn log_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![t0];
    }
    let (a, b) = (t0.ln(), t1.ln());
    let mut out: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    out[0] = t0;
    out[n - 1] = t1;
    out
}

/// Exact heat flow on the periodic grid: each mode times `exp(-|k|^2 t)`.
pub fn spectral_heat_evolve(transform: &Transform, v0: &ScalarField, t: f64) -> Result<ScalarField> {
    if !(t >= 0.0) {
        return Err(PensError::InvalidArgument(format!("heat time must be non-negative, got {t}")));
    }
    let mut s = transform.forward(v0)?;
    let g = *transform.grid();
    s.apply_real_symbol(|i| (-wavenumber_sq(&g, i) * t).exp());
    Ok(transform.inverse(&s))
}

/// Spectral energy below and above the Fourier-splitting radius
/// `r(t) = (d / (2 (1 + t)))^(1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingPartition {
    pub radius: f64,
    pub low: f64,
    pub high: f64,
}

pub fn fourier_splitting(transform: &Transform, field: &ScalarField, t: f64) -> Result<SplittingPartition> {
    let g = *transform.grid();
    let radius = (g.dim() as f64 / (2.0 * (1.0 + t))).sqrt();
    let s = transform.forward(field)?;
    let r2 = radius * radius;
    let low = s.weighted_sum(|i| if wavenumber_sq(&g, i) <= r2 { 1.0 } else { 0.0 });
    let high = s.weighted_sum(|i| if wavenumber_sq(&g, i) > r2 { 1.0 } else { 0.0 });
    Ok(SplittingPartition { radius, low, high })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let p = GaussianProfile::new(2.0, [0.0; 3], 0.5, 3).unwrap();
        assert_eq!(gaussian_heat_exact(&p, 0.0, [0.3, 0.0, 0.0]), 2.0 * (-0.09f64).exp());
        let ratio = p.l2_norm_sq(0.25) / p.l2_norm_sq(0.0);
        assert!((ratio - 2f64.powf(-1.5)).abs() < 1e-15);
        let b0 = heat_decay_bound(0.0, 3, 1.0, 2.0, 0.5);
        assert_eq!(b0, 2.5);
        assert!((heat_decay_bound(3.0, 3, 1.0, 2.0, 0.5) - b0 / 8.0).abs() < 1e-15);
        assert!(GaussianProfile::new(1.0, [0.0; 3], 0.0, 1).is_err());
    }
}
