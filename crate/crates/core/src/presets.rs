//! Named run configurations.

use std::f64::consts::PI;

use crate::config::{InitialKind, Phase, RunConfig};
use crate::coupler::DragScheme;
use crate::kinetic::AlignmentScheme;

pub const PRESET_NAMES: &[&str] = &[
    "conservation",
    "heat-decay",
    "taylor-green",
    "euler-characteristics",
    "kinetic-limit",
    "determinism",
];

pub fn preset(name: &str) -> Option<RunConfig> {
    let mut c = RunConfig::default();
    match name {
        // 3D Gaussian small data on a box much wider than the bump.
        "conservation" => {
            c.phase = Phase::Coupled;
            c.grid.dim = 3;
            c.grid.n = 64;
            c.grid.length = 50.0;
            c.initial.kind = InitialKind::Gaussian;
            c.initial.amplitude = 0.05;
            c.initial.width = 3.0;
            c.physics.mu = 1.0;
            c.physics.drag = DragScheme::Explicit;
            c.time.cfl = 0.4;
            c.time.dt_max = 0.1;
            c.time.t_end = 40.0;
            c.output.diagnostics_every = 5;
            c.output.weighted_orders = vec![0, 1, 2];
            c.output.weighted_exponents = vec![0.0, 0.5];
            c.output.probe_points = 10;
            c.output.probe_radius = 3;
            c.fit.v_window = (5.0, 35.0);
            c.fit.u_window = (5.0, 35.0);
            c.fit.energy_weight = 1.0;
            c.fit.energy_from = 5.0;
        }
        "heat-decay" => {
            c.phase = Phase::Heat;
            c.grid.dim = 3;
            c.grid.n = 64;
            c.grid.length = 20.0;
            c.initial.width = 1.0;
            c.fit.v_window = (10.0, 1000.0);
            c.time.t_end = 1.0;
        }
        "taylor-green" => {
            c.phase = Phase::Coupled;
            c.grid.dim = 2;
            c.grid.n = 64;
            c.grid.length = 2.0 * PI;
            c.initial.kind = InitialKind::TaylorGreen;
            c.initial.amplitude = 1.0;
            c.initial.rho_weight = 0.0;
            c.initial.u_weight = 0.0;
            c.initial.v_weight = 1.0;
            c.physics.mu = 1.0;
            c.physics.drag = DragScheme::Off;
            c.time.cfl = 0.5;
            c.time.dt_max = 1e-3;
            c.time.t_end = 1.0;
            c.output.diagnostics_every = 100;
        }
        "euler-characteristics" => {
            c.phase = Phase::EulerOnly;
            c.grid.dim = 1;
            c.grid.n = 512;
            c.grid.length = 1.0;
            c.initial.kind = InitialKind::Wave;
            c.initial.amplitude = 0.01;
            c.initial.v_weight = 0.0;
            c.physics.drag = DragScheme::Off;
            c.physics.theta = 2.0;
            c.time.cfl = 0.4;
            c.time.dt_max = 1.0;
            c.time.t_end = 2.0;
            c.output.diagnostics_every = 1000;
            c.study.resolutions = vec![256, 512, 1024];
        }
        "kinetic-limit" => {
            c.phase = Phase::Kinetic;
            c.grid.dim = 1;
            c.grid.n = 128;
            c.grid.length = 1.0;
            c.initial.kind = InitialKind::Wave;
            c.initial.amplitude = 0.1;
            c.physics.theta = 1.3;
            c.time.cfl = 0.8;
            c.time.t_end = 1.0;
            c.kinetic.nxi = 128;
            c.kinetic.epsilons = vec![0.2, 0.1, 0.05];
            c.kinetic.width = 0.1;
            c.kinetic.scheme = AlignmentScheme::Exact;
        }
        "determinism" => {
            c.phase = Phase::Coupled;
            c.grid.dim = 2;
            c.grid.n = 32;
            c.grid.length = 10.0;
            c.initial.kind = InitialKind::Random;
            c.initial.amplitude = 0.05;
            c.initial.modes = 3;
            c.initial.seed = 7;
            c.physics.drag = DragScheme::Explicit;
            c.time.dt_max = 0.05;
            c.time.t_end = 2.0;
            c.output.diagnostics_every = 4;
            c.output.probe_points = 4;
        }
        _ => return None,
    }
    Some(c)
}
