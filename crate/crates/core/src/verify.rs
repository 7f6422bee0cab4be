//! Pass/fail checks computed from run outputs, one family per preset.

use std::f64::consts::PI;

use crate::config::{InitialKind, RunConfig};
use crate::coupler::FluidState;
use crate::diagnostics::fit_decay;
use crate::error::{PensError, Result};
use crate::grid::{stable_sum, VectorField};
use crate::io::timeseries_csv;
use crate::kinetic::KineticRun;
use crate::presets::preset;
use crate::run::{evolver_errors, heat_profile, run_fluid, run_heat, run_kinetic, run_refinement, FluidRun};
use crate::spectral::Transform;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(criterion: u8, name: &str, passed: bool, detail: String) -> Self {
        Self {
            criterion,
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{mark}] {} ({}): {}", self.criterion, self.name, self.detail)
    }
}

fn failed_run(criterion: u8, name: &str, run: &FluidRun) -> Option<Check> {
    run.failure.as_ref().map(|e| {
        Check::new(
            criterion,
            name,
            false,
            format!("run stopped after {} steps at t = {}: {e}", run.steps, run.last.t),
        )
    })
}

/// `int |rho u| + |v|` summed over components, the scale for momentum drift.
pub fn momentum_scale(transform: &Transform, state: &FluidState) -> f64 {
    let v = state.ns.velocity(transform);
    let abs_sum = |f: &VectorField| {
        f.components()
            .iter()
            .map(|c| stable_sum(c.data().iter().map(|x| x.abs())) * c.grid().cell_volume())
            .sum::<f64>()
    };
    abs_sum(&state.euler.momentum) + abs_sum(&v)
}

/// Mass and total momentum drift over every record.
pub fn conservation(run: &FluidRun) -> Check {
    const NAME: &str = "conservation";
    if let Some(c) = failed_run(1, NAME, run) {
        return c;
    }
    let first = &run.records[0];
    let transform = Transform::new(*run.initial.grid());
    let scale = momentum_scale(&transform, &run.initial).max(f64::MIN_POSITIVE);
    let mut mass = 0.0f64;
    let mut mom = 0.0f64;
    for r in &run.records {
        mass = mass.max((r.mass - first.mass).abs() / first.mass);
        let d: f64 = r
            .momentum
            .iter()
            .zip(&first.momentum)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        mom = mom.max(d / scale);
    }
    Check::new(
        1,
        NAME,
        mass <= 1e-12 && mom <= 1e-10,
        format!("max relative mass drift {mass:.3e} (tol 1e-12), max momentum drift {mom:.3e} of int|rho u|+|v| (tol 1e-10)"),
    )
}

/// Per-step energy monotonicity and the balance residual.
pub fn energy_dissipation(run: &FluidRun) -> Check {
    const NAME: &str = "energy dissipation";
    if let Some(c) = failed_run(2, NAME, run) {
        return c;
    }
    let e0 = run.energy[0].energy;
    let rise = run
        .energy
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(f64::NEG_INFINITY, f64::max);
    let r_max = run.records.iter().map(|r| r.balance_residual).fold(f64::NEG_INFINITY, f64::max);
    let r_min = run.records.iter().map(|r| r.balance_residual).fold(f64::INFINITY, f64::min);
    Check::new(
        2,
        NAME,
        rise <= 1e-10 * e0 && r_max <= 1e-3 * e0,
        format!(
            "largest per-step rise {:.3e} E0 (tol 1e-10), max R {:.3e} E0 (tol 1e-3), numerical dissipation min R {:.3e} E0",
            rise / e0,
            r_max / e0,
            r_min / e0
        ),
    )
}

fn squared_series(run: &FluidRun, column: &str) -> Result<Vec<(f64, f64)>> {
    run.series(column)
        .map(|s| s.into_iter().map(|(t, x)| (t, x * x)).collect())
        .ok_or_else(|| PensError::InvalidArgument(format!("run has no column {column}; add 0 to output.weighted_exponents")))
}

/// Decay exponents of `||v||^2`, `||u||^2` and the weighted energy.
pub fn coupled_decay(config: &RunConfig, run: &FluidRun) -> Check {
    const NAME: &str = "coupled decay";
    if let Some(c) = failed_run(6, NAME, run) {
        return c;
    }
    let fits = (|| -> Result<(f64, f64)> {
        let v = fit_decay("|v|^2", &squared_series(run, "w_v_k0_r0")?, config.fit.v_window)?;
        let u = fit_decay("|u|^2", &squared_series(run, "w_u_k0_r0")?, config.fit.u_window)?;
        Ok((v.alpha, u.alpha))
    })();
    let (av, au) = match fits {
        Ok(f) => f,
        Err(e) => return Check::new(6, NAME, false, e.to_string()),
    };
    let r = config.fit.energy_weight;
    let mut running_min = f64::INFINITY;
    let mut worst = 0.0f64;
    for s in run.energy.iter().filter(|s| s.t >= config.fit.energy_from) {
        let w = (1.0 + s.t).powf(r) * s.energy;
        running_min = running_min.min(w);
        worst = worst.max(w / running_min - 1.0);
    }
    Check::new(
        6,
        NAME,
        av >= 1.0 && au >= 1.0 && worst <= 0.05,
        format!(
            "alpha(|v|^2) {av:.3} on {:?}, alpha(|u|^2) {au:.3} on {:?} (need >= 1.0), largest rise of (1+t)^{r} E after t = {} is {:.2}% (tol 5%)",
            config.fit.v_window,
            config.fit.u_window,
            config.fit.energy_from,
            100.0 * worst
        ),
    )
}

/// Density floor and the characteristic density prediction.
pub fn density_bounds(config: &RunConfig, run: &FluidRun) -> Check {
    const NAME: &str = "density bounds";
    if let Some(c) = failed_run(7, NAME, run) {
        return c;
    }
    let rho0_min = run.initial.euler.rho.min();
    let rho_min = run.records.iter().map(|r| r.rho_min).fold(f64::INFINITY, f64::min);
    let tol = 5e-3 * config.initial.rho_mean;
    let worst = run
        .probe
        .iter()
        .map(|p| (p.predicted - p.computed).abs())
        .fold(0.0, f64::max);
    let enough = run.probe.len() >= config.output.probe_points && !run.probe.is_empty();
    Check::new(
        7,
        NAME,
        rho_min >= 0.5 * rho0_min && enough && worst <= tol,
        format!(
            "min rho {rho_min:.6} vs 0.5 min rho0 {:.6}; characteristic prediction off by at most {worst:.3e} at {} points (tol {tol:.1e})",
            0.5 * rho0_min,
            run.probe.len()
        ),
    )
}

/// Every Sobolev-table entry stays within three times its initial value.
pub fn uniform_boundedness(config: &RunConfig, run: &FluidRun) -> Check {
    const NAME: &str = "uniform boundedness";
    if let Some(c) = failed_run(8, NAME, run) {
        return c;
    }
    let s = config.output.sobolev_s;
    let labels = [format!("H{s}_rho"), format!("H{}_u", s + 2), format!("H{}_v", s + 1), format!("X{s}")];
    let mut parts = Vec::new();
    let mut ok = true;
    for l in &labels {
        let Some(series) = run.series(l) else {
            return Check::new(8, NAME, false, format!("missing column {l}"));
        };
        let x0 = series[0].1;
        let sup = series.iter().map(|p| p.1).fold(0.0, f64::max);
        let ratio = if x0 > 0.0 { sup / x0 } else if sup == 0.0 { 0.0 } else { f64::INFINITY };
        ok &= ratio <= 3.0;
        parts.push(format!("{l} {ratio:.3}"));
    }
    Check::new(8, NAME, ok, format!("sup/initial: {} (tol 3)", parts.join(", ")))
}

/// Criteria 1, 2, 6, 7 and 8 from one fluid run.
pub fn fluid_checks(config: &RunConfig, run: &FluidRun) -> Vec<Check> {
    vec![
        conservation(run),
        energy_dissipation(run),
        coupled_decay(config, run),
        density_bounds(config, run),
        uniform_boundedness(config, run),
    ]
}

/// Heat-kernel decay fits and the spectral evolver against the whole-space
/// Gaussian.
pub fn heat_decay(config: &RunConfig) -> Result<Vec<Check>> {
    let study = run_heat(config)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (d, series) in &study.series {
        let fit = fit_decay("|V|^2", series, config.fit.v_window)?;
        let target = *d as f64 / 2.0;
        let rel = (fit.alpha - target).abs() / target;
        ok &= rel <= 0.02;
        parts.push(format!("d={d} alpha {:.4} ({:.2}% off)", fit.alpha, 100.0 * rel));
    }
    let fit_check = Check::new(
        3,
        "heat decay fit",
        ok,
        format!("{} on {:?} (tol 2%)", parts.join(", "), config.fit.v_window),
    );
    let sigma = config.initial.width;
    let ratio = config.grid.length / sigma;
    let evolver = Check::new(
        3,
        "heat evolver",
        ratio >= 20.0 && study.evolver_error <= 1e-8,
        format!(
            "L = {ratio:.1} sigma, t = sigma^2: relative L2 error {:.3e} vs whole-space Gaussian (tol 1e-8), {:.3e} vs periodic images",
            study.evolver_error, study.periodic_error
        ),
    );
    Ok(vec![fit_check, evolver])
}

/// Evolver error on a wider box, reported next to the failing check.
pub fn heat_evolver_on(config: &RunConfig, length: f64) -> Result<f64> {
    let mut c = config.clone();
    c.grid.length = length;
    c.grid.n = (config.grid.n as f64 * length / config.grid.length).round() as usize;
    let grid = crate::init::grid_of(&c)?;
    let profile = heat_profile(&c, grid.dim())?;
    Ok(evolver_errors(grid, &profile, profile.variance)?.0)
}

/// Relative L2 error of the carrier velocity against the decaying vortex.
pub fn taylor_green(config: &RunConfig, run: &FluidRun) -> Check {
    const NAME: &str = "Taylor-Green";
    if let Some(c) = failed_run(4, NAME, run) {
        return c;
    }
    if config.initial.kind != InitialKind::TaylorGreen {
        return Check::new(4, NAME, false, "configuration is not Taylor-Green data".into());
    }
    let transform = Transform::new(*run.last.grid());
    let v = run.last.ns.velocity(&transform);
    let k = 2.0 * PI / config.grid.length;
    let amp = config.initial.amplitude * config.initial.v_weight * (-2.0 * config.physics.mu * k * k * run.last.t).exp();
    let exact = VectorField::from_fn(*v.grid(), |x| {
        [
            amp * (k * x[0]).cos() * (k * x[1]).sin(),
            -amp * (k * x[0]).sin() * (k * x[1]).cos(),
            0.0,
        ]
    });
    let mut diff = v;
    diff.axpy(-1.0, &exact);
    let rel = diff.l2_norm() / exact.l2_norm();
    Check::new(
        4,
        NAME,
        rel <= 1e-10,
        format!("relative L2 error {rel:.3e} at t = {} after {} steps (tol 1e-10)", run.last.t, run.steps),
    )
}

/// Exact smooth solution of 1D pressureless Euler with
/// `rho0 = m + a sin(kx)`, `u0 = b cos(kx)` before the first crossing.
pub fn characteristic_solution(rho_mean: f64, a: f64, b: f64, k: f64, t: f64, x: f64) -> (f64, f64) {
    let u0 = |y: f64| b * (k * y).cos();
    let du0 = |y: f64| -b * k * (k * y).sin();
    let mut y = x - u0(x) * t;
    for _ in 0..50 {
        let g = y + u0(y) * t - x;
        let step = g / (1.0 + du0(y) * t);
        y -= step;
        if step.abs() < 1e-16 * (1.0 + y.abs()) {
            break;
        }
    }
    ((rho_mean + a * (k * y).sin()) / (1.0 + du0(y) * t), u0(y))
}

/// L-infinity errors in `(rho, u)` of a 1D wave run against characteristics.
pub fn characteristic_errors(config: &RunConfig, run: &FluidRun) -> Result<(f64, f64)> {
    let ic = &config.initial;
    if config.grid.dim != 1 || ic.kind != InitialKind::Wave {
        return Err(PensError::InvalidArgument("characteristic oracle needs 1D wave data".into()));
    }
    let grid = *run.last.grid();
    let k = 2.0 * PI / grid.length();
    let u = crate::euler::velocity_from_momentum(&run.last.euler.rho, &run.last.euler.momentum, config.physics.rho_floor)?;
    let mut er = 0.0f64;
    let mut eu = 0.0f64;
    for i in 0..grid.len() {
        let x = grid.position(i)[0];
        let (r, v) = characteristic_solution(ic.rho_mean, ic.amplitude * ic.rho_weight, ic.amplitude * ic.u_weight, k, run.last.t, x);
        er = er.max((run.last.euler.rho.data()[i] - r).abs());
        eu = eu.max((u.component(0).data()[i] - v).abs());
    }
    Ok((er, eu))
}

/// Least-squares slope of `-log(error)` against `log(N)`.
pub fn observed_order(points: &[(usize, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    -sxy / sxx
}

/// Refinement study against the characteristic solution.
pub fn euler_characteristics(config: &RunConfig) -> Result<Check> {
    let runs = run_refinement(config)?;
    let mut errs = Vec::new();
    for (n, run) in &runs {
        let (er, eu) = characteristic_errors(config, run)?;
        errs.push((*n, er.max(eu)));
    }
    let order = observed_order(&errs);
    let at = |n: usize| errs.iter().find(|e| e.0 == n).map(|e| e.1);
    let target = at(config.grid.n);
    let passed = order >= 1.8 && target.is_some_and(|e| e <= 1e-3);
    let listing: Vec<String> = errs.iter().map(|(n, e)| format!("N={n}: {e:.3e}")).collect();
    Ok(Check::new(
        5,
        "Euler characteristics",
        passed,
        format!(
            "L-inf errors {} (tol 1e-3 at N={}), observed order {order:.3} (need >= 1.8)",
            listing.join(", "),
            config.grid.n
        ),
    ))
}

/// Monotone decrease of the monokinetic deviation and of the moment error as
/// `epsilon` shrinks, and the per-halving ratio band.
pub fn kinetic_limit(runs: &[KineticRun]) -> Vec<Check> {
    let mut sorted: Vec<&KineticRun> = runs.iter().collect();
    sorted.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let dev: Vec<f64> = sorted.iter().map(|r| r.deviation_end).collect();
    let err: Vec<(f64, f64)> = sorted
        .iter()
        .map(|r| r.errors.last().map_or((f64::NAN, f64::NAN), |e| (e.rho, e.u)))
        .collect();
    let ratios: Vec<f64> = dev.windows(2).map(|w| w[1] / w[0]).collect();
    let monotone = dev.windows(2).all(|w| w[1] < w[0]);
    let in_band = ratios.iter().all(|r| (0.3..=0.7).contains(r));
    let err_monotone = err.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1);
    let eps: Vec<String> = sorted.iter().map(|r| r.epsilon.to_string()).collect();
    vec![
        Check::new(
            9,
            "kinetic deviation",
            monotone && in_band,
            format!(
                "eps {}: deviation {}; ratios {} (need monotone and in [0.3, 0.7])",
                eps.join("/"),
                dev.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(" / "),
                ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
            ),
        ),
        Check::new(
            9,
            "kinetic moment error",
            err_monotone,
            format!(
                "L2 moment error at t_end (rho/u): {}",
                err.iter().map(|(a, b)| format!("{a:.3e}/{b:.3e}")).collect::<Vec<_>>().join(", ")
            ),
        ),
    ]
}

/// CSV bytes of a fluid run, the unit compared for determinism.
pub fn run_csv(config: &RunConfig) -> Result<Vec<u8>> {
    let mut run = run_fluid(config, None)?;
    if let Some(e) = run.failure.take() {
        return Err(e);
    }
    timeseries_csv(&run.header, &run.records)
}

/// Two runs on one thread and one on `threads` threads must give identical
/// CSV bytes.
pub fn determinism(config: &RunConfig, threads: usize) -> Result<Check> {
    let pool = |n: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| PensError::InvalidArgument(format!("thread pool: {e}")))
    };
    let single = pool(1)?;
    let many = pool(threads)?;
    let a = single.install(|| run_csv(config))?;
    let b = single.install(|| run_csv(config))?;
    let c = many.install(|| run_csv(config))?;
    let rows = a.iter().filter(|&&b| b == b'\n').count().saturating_sub(1);
    Ok(Check::new(
        10,
        "determinism",
        a == b && a == c,
        format!(
            "{rows} CSV rows; repeat run {}, {threads}-thread run {}",
            if a == b { "identical" } else { "differs" },
            if a == c { "identical" } else { "differs" }
        ),
    ))
}

/// Runs a named preset and its checks.
pub fn check_preset(name: &str) -> Result<Vec<Check>> {
    let config = preset(name).ok_or_else(|| PensError::InvalidArgument(format!("unknown preset {name}")))?;
    check_config(name, &config)
}

/// Checks for `config` using the criteria of preset `name`.
pub fn check_config(name: &str, config: &RunConfig) -> Result<Vec<Check>> {
    match name {
        "conservation" => {
            let run = run_fluid(config, None)?;
            Ok(fluid_checks(config, &run))
        }
        "heat-decay" => heat_decay(config),
        "taylor-green" => Ok(vec![taylor_green(config, &run_fluid(config, None)?)]),
        "euler-characteristics" => Ok(vec![euler_characteristics(config)?]),
        "kinetic-limit" => Ok(kinetic_limit(&run_kinetic(config)?)),
        "determinism" => Ok(vec![determinism(config, 4)?]),
        _ => Err(PensError::InvalidArgument(format!("unknown preset {name}"))),
    }
}
