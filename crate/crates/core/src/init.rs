//! Initial data built from a [`RunConfig`].

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{InitialKind, RunConfig};
use crate::coupler::FluidState;
use crate::error::{PensError, Result};
use crate::euler::EulerState;
use crate::grid::{Grid, ScalarField, VectorField};
use crate::ns::NsState;
use crate::spectral::Transform;

pub fn grid_of(config: &RunConfig) -> Result<Grid> {
    Grid::new(config.grid.dim, config.grid.n, config.grid.length)
}

fn center(grid: &Grid) -> [f64; 3] {
    let c = 0.5 * grid.length();
    let mut out = [0.0; 3];
    for o in out.iter_mut().take(grid.dim()) {
        *o = c;
    }
    out
}

/// Physical `(rho, u, v)` before the carrier velocity is projected.
pub fn initial_fields(config: &RunConfig, grid: Grid) -> Result<(ScalarField, VectorField, VectorField)> {
    let ic = &config.initial;
    let d = grid.dim();
    let (a_rho, a_u, a_v) = (
        ic.amplitude * ic.rho_weight,
        ic.amplitude * ic.u_weight,
        ic.amplitude * ic.v_weight,
    );
    let rho_mean = ic.rho_mean;
    match ic.kind {
        InitialKind::Gaussian => {
            let c = center(&grid);
            let s = ic.width;
            let bump = move |x: [f64; 3]| {
                let mut y = [0.0; 3];
                for a in 0..d {
                    y[a] = grid.wrap_displacement(x[a] - c[a]) / s;
                }
                (y, (-0.5 * (y[0] * y[0] + y[1] * y[1] + y[2] * y[2])).exp())
            };
            let rho = ScalarField::from_fn(grid, |x| rho_mean + a_rho * bump(x).1);
            let u = VectorField::from_fn(grid, |x| {
                let (y, g) = bump(x);
                [-a_u * y[0] * g, -a_u * y[1] * g, -a_u * y[2] * g]
            });
            let v = VectorField::from_fn(grid, |x| {
                let (y, g) = bump(x);
                match d {
                    1 => [0.0; 3],
                    2 => [-a_v * y[1] * g, a_v * y[0] * g, 0.0],
                    _ => [
                        -a_v * y[1] * g,
                        a_v * (y[0] - 0.5 * y[2]) * g,
                        0.5 * a_v * y[1] * g,
                    ],
                }
            });
            Ok((rho, u, v))
        }
        InitialKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(ic.seed);
            let phi = random_field(grid, ic.modes, &mut rng);
            let rho = phi.map(|p| rho_mean + a_rho * p);
            let u = VectorField::from_components((0..d).map(|_| random_field(grid, ic.modes, &mut rng).map(|p| a_u * p)).collect())?;
            let v = VectorField::from_components((0..d).map(|_| random_field(grid, ic.modes, &mut rng)).collect())?;
            Ok((rho, u, v))
        }
        InitialKind::TaylorGreen => {
            if d < 2 {
                return Err(PensError::InvalidArgument("Taylor-Green data needs dim >= 2".into()));
            }
            let k = 2.0 * PI / grid.length();
            let tg = move |x: [f64; 3], amp: f64| {
                [
                    amp * (k * x[0]).cos() * (k * x[1]).sin(),
                    -amp * (k * x[0]).sin() * (k * x[1]).cos(),
                    0.0,
                ]
            };
            Ok((
                ScalarField::constant(grid, rho_mean),
                VectorField::from_fn(grid, |x| tg(x, a_u)),
                VectorField::from_fn(grid, |x| tg(x, a_v)),
            ))
        }
        InitialKind::Uniform => Ok((
            ScalarField::constant(grid, rho_mean),
            VectorField::from_fn(grid, |_| [a_u, 0.0, 0.0]),
            VectorField::from_fn(grid, |_| [a_v, 0.0, 0.0]),
        )),
        InitialKind::Wave => {
            let k = 2.0 * PI / grid.length();
            Ok((
                ScalarField::from_fn(grid, |x| rho_mean + a_rho * (k * x[0]).sin()),
                VectorField::from_fn(grid, |x| [a_u * (k * x[0]).cos(), 0.0, 0.0]),
                VectorField::from_fn(grid, |x| {
                    if d > 1 {
                        [0.0, a_v * (k * x[0] + 0.25 * PI).sin(), 0.0]
                    } else {
                        [0.0; 3]
                    }
                }),
            ))
        }
    }
}

/// Sum of low Fourier modes with uniform random coefficients and `1/|k|`
/// decay, scaled to unit maximum.
fn random_field(grid: Grid, modes: usize, rng: &mut ChaCha8Rng) -> ScalarField {
    let d = grid.dim();
    let m = modes as i64;
    let base = 2.0 * PI / grid.length();
    let mut terms = Vec::new();
    let side = (2 * m + 1) as usize;
    for flat in 0..side.pow(d as u32) {
        let mut k = [0i64; 3];
        let mut rest = flat;
        for ka in k.iter_mut().take(d) {
            *ka = (rest % side) as i64 - m;
            rest /= side;
        }
        if k == [0; 3] {
            continue;
        }
        let norm = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
        let (c, s): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        terms.push((k, c / norm, s / norm));
    }
    let f = ScalarField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(k, c, s)| {
                let phase = base * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]);
                c * phase.cos() + s * phase.sin()
            })
            .sum()
    });
    let peak = f.max_abs();
    if peak > 0.0 {
        f.map(|p| p / peak)
    } else {
        f
    }
}

/// Initial state with the carrier velocity Leray-projected.
pub fn initial_state(config: &RunConfig, transform: &Transform) -> Result<FluidState> {
    let grid = *transform.grid();
    let (rho, u, v) = initial_fields(config, grid)?;
    let mut ns = NsState::from_velocity(transform, &v, config.physics.mu)?;
    if config.initial.kind == InitialKind::Random {
        let peak = ns.velocity(transform).max_magnitude();
        let target = config.initial.amplitude * config.initial.v_weight;
        let scale = if peak > 0.0 { target / peak } else { 0.0 };
        for c in &mut ns.vhat {
            c.scale(scale);
        }
    }
    FluidState::new(EulerState::from_velocity(rho, &u)?, ns, 0.0)
}

/// `count` sample points spiralling out to two widths from the box center.
pub fn probe_points(config: &RunConfig) -> Vec<[f64; 3]> {
    let n = config.output.probe_points;
    let d = config.grid.dim;
    let c = 0.5 * config.grid.length;
    let reach = match config.initial.kind {
        InitialKind::Gaussian => 2.0 * config.initial.width,
        _ => 0.25 * config.grid.length,
    };
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let frac = (k as f64 + 0.5) / n as f64;
            let r = reach * frac;
            let phi = golden * k as f64;
            let z = 1.0 - 2.0 * frac;
            let mut p = [0.0; 3];
            match d {
                1 => p[0] = c + r * if k % 2 == 0 { 1.0 } else { -1.0 },
                2 => {
                    p[0] = c + r * phi.cos();
                    p[1] = c + r * phi.sin();
                }
                _ => {
                    let ring = (1.0 - z * z).sqrt();
                    p[0] = c + r * ring * phi.cos();
                    p[1] = c + r * ring * phi.sin();
                    p[2] = c + r * z;
                }
            }
            p
        })
        .collect()
}
