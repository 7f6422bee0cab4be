//! Drivers that turn a [`RunConfig`] into time series.

use std::path::{Path, PathBuf};

use crate::config::{Phase, RunConfig};
use crate::coupler::{Coupler, FluidState, StepControl};
use crate::diagnostics::{
    record_header, DensityComparison, DiagnosticsConfig, DiagnosticsRecord, EnergySample, Tracker,
};
use crate::error::{PensError, Result};
use crate::grid::{Grid, ScalarField};
use crate::heat::{gaussian_l2_series, log_times, spectral_heat_evolve, GaussianProfile};
use crate::init::{grid_of, initial_state, probe_points};
use crate::io::{Snapshot, Table};
use crate::kinetic::{KineticRun, KineticSetup};
use crate::spectral::Transform;

/// Everything a fluid run produced, including the partial history of a run
/// that failed part way.
#[derive(Debug)]
pub struct FluidRun {
    pub header: Vec<String>,
    pub records: Vec<DiagnosticsRecord>,
    /// One sample per step, starting at `t = 0`.
    pub energy: Vec<EnergySample>,
    pub steps: usize,
    pub initial: FluidState,
    pub last: FluidState,
    /// Empty unless probe points were configured and the run finished.
    pub probe: Vec<DensityComparison>,
    pub snapshots: Vec<PathBuf>,
    pub failure: Option<PensError>,
}

impl FluidRun {
    pub fn series(&self, column: &str) -> Option<Vec<(f64, f64)>> {
        let i = self.header.iter().position(|h| h == column)?;
        Some(self.records.iter().map(|r| (r.t, r.values()[i])).collect())
    }
}

pub fn diagnostics_config(config: &RunConfig) -> DiagnosticsConfig {
    DiagnosticsConfig {
        sobolev_s: config.output.sobolev_s,
        weighted_orders: config.output.weighted_orders.clone(),
        weighted_exponents: config.output.weighted_exponents.clone(),
        probe_points: probe_points(config),
        probe_radius: config.output.probe_radius,
    }
}

pub fn coupler_for(config: &RunConfig) -> Result<Coupler> {
    let mode = config.phase.fluid_mode().ok_or_else(|| {
        PensError::InvalidArgument(format!("phase {:?} is not a fluid phase", config.phase))
    })?;
    Ok(Coupler::new(grid_of(config)?, config.physics.theta, config.physics.rho_floor)?
        .with_drag(config.physics.drag)
        .with_mode(mode))
}

/// Integrates a coupled, Euler-only or NS-only configuration to `t_end`.
///
/// Diagnostics are recorded every `diagnostics_every` steps and at the final
/// time. With `snapshot_dir` set and `snapshot_every > 0`, snapshots are
/// written at the same kind of cadence. A failing step ends the run early
/// and is reported in [`FluidRun::failure`].
pub fn run_fluid(config: &RunConfig, snapshot_dir: Option<&Path>) -> Result<FluidRun> {
    config.validate()?;
    let coupler = coupler_for(config)?;
    let transform = coupler.transform();
    let initial = initial_state(config, transform)?;
    let diag = diagnostics_config(config);
    let header = record_header(config.grid.dim, &diag);
    let mut tracker = Tracker::new(&initial, diag, config.physics.rho_floor)?;
    let control = StepControl {
        cfl: config.time.cfl,
        dt_max: config.time.dt_max,
        t_end: config.time.t_end,
        output_every: config.output.diagnostics_every,
    };
    control.validate()?;

    let mut snapshots = Vec::new();
    let mut snap = |state: &FluidState, step: usize| -> Result<()> {
        if let (Some(dir), true) = (snapshot_dir, config.output.snapshot_every > 0) {
            let path = dir.join(format!("snapshot_{step:07}.bin"));
            Snapshot::from_state(transform, state).save(&path)?;
            snapshots.push(path);
        }
        Ok(())
    };

    let (u, terms) = tracker.observe(transform, &initial, 0)?;
    let mut records = vec![tracker.record(transform, &initial, 0, &u, terms)?];
    let mut failure = snap(&initial, 0).err();

    let t_end = config.time.t_end;
    let tiny = 1e-12 * t_end.max(1.0);
    let mut state = initial.clone();
    let mut step = 0;
    while failure.is_none() && t_end - state.t > tiny {
        let outcome = (|| -> Result<()> {
            let dt = coupler.cfl_dt(&state, &control)?.min(t_end - state.t);
            let next = coupler.step(&state, dt, &control)?;
            step += 1;
            let done = t_end - next.state.t <= tiny;
            let (u, terms) = tracker.observe(transform, &next.state, next.clipped)?;
            if step % control.output_every == 0 || done {
                records.push(tracker.record(transform, &next.state, step, &u, terms)?);
            }
            state = next.state;
            if config.output.snapshot_every > 0 && (step % config.output.snapshot_every == 0 || done) {
                snap(&state, step)?;
            }
            Ok(())
        })();
        if let Err(e) = outcome {
            failure = Some(e);
            break;
        }
    }

    let probe = match (tracker.probe(), &failure) {
        (Some(p), None) => p.compare(&state.euler.rho)?,
        _ => Vec::new(),
    };
    Ok(FluidRun {
        header,
        records,
        energy: tracker.energy_samples().to_vec(),
        steps: step,
        initial,
        last: state,
        probe,
        snapshots,
        failure,
    })
}

pub fn kinetic_setup(config: &RunConfig) -> KineticSetup {
    let ic = &config.initial;
    let t_end = config.time.t_end;
    KineticSetup {
        nx: config.grid.n,
        nxi: config.kinetic.nxi,
        length: config.grid.length,
        rho_amplitude: ic.amplitude * ic.rho_weight,
        u_amplitude: ic.amplitude * ic.u_weight,
        v_amplitude: ic.amplitude * ic.v_weight,
        width: config.kinetic.width,
        cfl: config.time.cfl,
        t_end,
        output_times: (1..=4).map(|q| 0.25 * q as f64 * t_end).collect(),
        scheme: config.kinetic.scheme,
        theta: config.physics.theta,
    }
}

/// One kinetic run per configured `epsilon`, in configuration order.
pub fn run_kinetic(config: &RunConfig) -> Result<Vec<KineticRun>> {
    config.validate()?;
    if config.phase != Phase::Kinetic || config.grid.dim != 1 {
        return Err(PensError::InvalidArgument(
            "kinetic runs need phase = kinetic and dim = 1".into(),
        ));
    }
    let setup = kinetic_setup(config);
    config.kinetic.epsilons.iter().map(|&eps| setup.run(eps)).collect()
}

/// One row per `epsilon`: final deviation, temperature, mass drift and the
/// moment errors at every output time.
pub fn kinetic_table(runs: &[KineticRun]) -> Table {
    let mut header: Vec<String> = ["epsilon", "deviation", "temperature", "mass_drift"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if let Some(r) = runs.first() {
        for e in &r.errors {
            header.push(format!("rho_error_t{}", e.t));
            header.push(format!("u_error_t{}", e.t));
        }
    }
    let rows = runs
        .iter()
        .map(|r| {
            let mut row = vec![
                r.epsilon,
                r.deviation_end,
                r.temperature_end,
                (r.mass_end - r.mass0).abs() / r.mass0,
            ];
            for e in &r.errors {
                row.extend([e.rho, e.u]);
            }
            row
        })
        .collect();
    Table { header, rows }
}

/// Heat-kernel decay study and spectral evolver check.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatStudy {
    /// `(d, t, ||V(t)||^2)` for `d = 1, 2, 3`.
    pub series: Vec<(usize, Vec<(f64, f64)>)>,
    /// Relative L2 difference between the spectral evolver and the
    /// whole-space Gaussian at `t = sigma^2`.
    pub evolver_error: f64,
    /// Same comparison against the image-summed periodic Gaussian.
    pub periodic_error: f64,
}

/// Gaussian of width `initial.width` centred in the configured box.
pub fn heat_profile(config: &RunConfig, dim: usize) -> Result<GaussianProfile> {
    let c = 0.5 * config.grid.length;
    let mut center = [0.0; 3];
    for x in center.iter_mut().take(dim) {
        *x = c;
    }
    GaussianProfile::new(1.0, center, config.initial.width.powi(2), dim)
}

pub fn run_heat(config: &RunConfig) -> Result<HeatStudy> {
    config.validate()?;
    let (t0, t1) = config.fit.v_window;
    let times = log_times(t0, t1, 200);
    let series = (1..=3)
        .map(|d| Ok((d, gaussian_l2_series(&heat_profile(config, d)?, &times))))
        .collect::<Result<Vec<_>>>()?;
    let grid = grid_of(config)?;
    let profile = heat_profile(config, grid.dim())?;
    let t = profile.variance;
    let (evolver_error, periodic_error) = evolver_errors(grid, &profile, t)?;
    Ok(HeatStudy {
        series,
        evolver_error,
        periodic_error,
    })
}

/// Relative L2 errors of the spectral evolver against the whole-space and the
/// image-summed solution at time `t`.
pub fn evolver_errors(grid: Grid, profile: &GaussianProfile, t: f64) -> Result<(f64, f64)> {
    let transform = Transform::new(grid);
    let v0 = profile.sample(grid, 0.0);
    let vt = spectral_heat_evolve(&transform, &v0, t)?;
    let rel = |exact: &ScalarField| {
        let mut diff = vt.clone();
        diff.axpy(-1.0, exact);
        diff.l2_norm() / exact.l2_norm()
    };
    let v0_periodic = profile.sample_periodic(grid, 0.0, 3);
    let vt_periodic = spectral_heat_evolve(&transform, &v0_periodic, t)?;
    let mut diff = vt_periodic;
    let exact_periodic = profile.sample_periodic(grid, t, 3);
    diff.axpy(-1.0, &exact_periodic);
    Ok((rel(&profile.sample(grid, t)), diff.l2_norm() / exact_periodic.l2_norm()))
}

pub fn heat_table(study: &HeatStudy) -> Table {
    let header = vec!["t".into(), "l2sq_d1".into(), "l2sq_d2".into(), "l2sq_d3".into()];
    let n = study.series.first().map_or(0, |s| s.1.len());
    let rows = (0..n)
        .map(|i| {
            let mut row = vec![study.series[0].1[i].0];
            row.extend(study.series.iter().map(|(_, s)| s[i].1));
            row
        })
        .collect();
    Table { header, rows }
}

/// Final states of a refinement study over `study.resolutions`.
pub fn run_refinement(config: &RunConfig) -> Result<Vec<(usize, FluidRun)>> {
    if config.study.resolutions.is_empty() {
        return Err(PensError::InvalidArgument("study.resolutions is empty".into()));
    }
    config
        .study
        .resolutions
        .iter()
        .map(|&n| {
            let mut c = config.clone();
            c.grid.n = n;
            let mut run = run_fluid(&c, None)?;
            match run.failure.take() {
                Some(e) => Err(e),
                None => Ok((n, run)),
            }
        })
        .collect()
}
