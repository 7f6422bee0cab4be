//! Run configuration: a plain `key = value` format with `[section]` headers.
//!
//! ```text
//! # comment
//! [grid]
//! dim = 3
//! n = 64
//! length = 50
//! ```
//!
//! Keys are fixed per section, lists are comma separated, and every numeric
//! value is range checked. [`RunConfig::dump`] writes every key in canonical
//! order, so `parse(dump(c))` dumps to the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::coupler::{DragScheme, PhaseMode};
use crate::error::{ConfigError, PensError, Result};
use crate::kinetic::AlignmentScheme;

/// What a run integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Coupled,
    EulerOnly,
    NsOnly,
    Kinetic,
    /// Analytic heat-kernel series plus the spectral heat evolver.
    Heat,
}

impl Phase {
    pub fn fluid_mode(self) -> Option<PhaseMode> {
        match self {
            Phase::Coupled => Some(PhaseMode::Coupled),
            Phase::EulerOnly => Some(PhaseMode::EulerOnly),
            Phase::NsOnly => Some(PhaseMode::NsOnly),
            Phase::Kinetic | Phase::Heat => None,
        }
    }
}

/// Shape of the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    /// Gaussian bump in `rho`, converging radial `u`, swirling `v`.
    Gaussian,
    /// Random low-mode perturbations drawn from `seed`.
    Random,
    TaylorGreen,
    Uniform,
    /// Single sine/cosine waves along the first axis.
    Wave,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    pub kind: InitialKind,
    pub rho_mean: f64,
    /// Overall smallness scale of the perturbation.
    pub amplitude: f64,
    pub rho_weight: f64,
    pub u_weight: f64,
    pub v_weight: f64,
    /// Gaussian standard deviation.
    pub width: f64,
    /// Highest wavenumber index of the random modes.
    pub modes: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsConfig {
    pub mu: f64,
    pub drag: DragScheme,
    pub theta: f64,
    pub rho_floor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    /// Full diagnostic record every this many steps.
    pub diagnostics_every: usize,
    /// Snapshot every this many steps; 0 disables snapshots.
    pub snapshot_every: usize,
    pub sobolev_s: u32,
    pub weighted_orders: Vec<u32>,
    pub weighted_exponents: Vec<f64>,
    pub probe_points: usize,
    pub probe_radius: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub v_window: (f64, f64),
    pub u_window: (f64, f64),
    /// Exponent `r` in the weighted energy `(1 + t)^r E(t)`.
    pub energy_weight: f64,
    /// Time after which the weighted energy is checked.
    pub energy_from: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KineticConfig {
    pub nxi: usize,
    pub epsilons: Vec<f64>,
    pub width: f64,
    pub scheme: AlignmentScheme,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    /// Grid sizes of a refinement study; empty for a single run.
    pub resolutions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub phase: Phase,
    pub grid: GridConfig,
    pub initial: InitialConfig,
    pub physics: PhysicsConfig,
    pub time: TimeConfig,
    pub output: OutputConfig,
    pub fit: FitConfig,
    pub kinetic: KineticConfig,
    pub study: StudyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            phase: Phase::Coupled,
            grid: GridConfig {
                dim: 2,
                n: 32,
                length: 1.0,
            },
            initial: InitialConfig {
                kind: InitialKind::Gaussian,
                rho_mean: 1.0,
                amplitude: 0.05,
                rho_weight: 1.0,
                u_weight: 1.0,
                v_weight: 1.0,
                width: 0.1,
                modes: 2,
                seed: 0,
            },
            physics: PhysicsConfig {
                mu: 1.0,
                drag: DragScheme::Explicit,
                theta: 1.3,
                rho_floor: 1e-10,
            },
            time: TimeConfig {
                cfl: 0.4,
                dt_max: 0.05,
                t_end: 1.0,
            },
            output: OutputConfig {
                diagnostics_every: 10,
                snapshot_every: 0,
                sobolev_s: 2,
                weighted_orders: vec![0, 1, 2],
                weighted_exponents: vec![0.5],
                probe_points: 0,
                probe_radius: 3,
            },
            fit: FitConfig {
                v_window: (5.0, 35.0),
                u_window: (5.0, 35.0),
                energy_weight: 1.0,
                energy_from: 5.0,
            },
            kinetic: KineticConfig {
                nxi: 128,
                epsilons: vec![0.2, 0.1, 0.05],
                width: 0.1,
                scheme: AlignmentScheme::Exact,
            },
            study: StudyConfig { resolutions: Vec::new() },
        }
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("run", &["phase"]),
    ("grid", &["dim", "n", "length"]),
    (
        "initial",
        &["kind", "rho_mean", "amplitude", "rho_weight", "u_weight", "v_weight", "width", "modes", "seed"],
    ),
    ("physics", &["mu", "drag", "theta", "rho_floor"]),
    ("time", &["cfl", "dt_max", "t_end"]),
    (
        "output",
        &[
            "diagnostics_every",
            "snapshot_every",
            "sobolev_s",
            "weighted_orders",
            "weighted_exponents",
            "probe_points",
            "probe_radius",
        ],
    ),
    ("fit", &["v_window", "u_window", "energy_weight", "energy_from"]),
    ("kinetic", &["nxi", "epsilons", "width", "scheme"]),
    ("study", &["resolutions"]),
];

const REQUIRED: &[&str] = &["grid.dim", "grid.n", "grid.length", "time.t_end"];

fn is_known(key: &str) -> bool {
    key.split_once('.')
        .is_some_and(|(s, k)| SECTIONS.iter().any(|(sec, keys)| *sec == s && keys.contains(&k)))
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("expected a number, got {v:?}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a finite number, got {v:?}"))
    }
}

fn parse_usize(v: &str) -> std::result::Result<usize, String> {
    v.parse().map_err(|_| format!("expected a non-negative integer, got {v:?}"))
}

fn parse_list<T>(v: &str, item: fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| item(s.trim())).collect()
}

fn parse_window(v: &str) -> std::result::Result<(f64, f64), String> {
    match parse_list(v, parse_f64)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(format!("expected two comma-separated times, got {v:?}")),
    }
}

fn choice<T: Copy>(v: &str, options: &[(&str, T)]) -> std::result::Result<T, String> {
    options.iter().find(|(name, _)| *name == v).map(|(_, t)| *t).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        format!("expected one of {}, got {v:?}", names.join(", "))
    })
}

const PHASES: &[(&str, Phase)] = &[
    ("coupled", Phase::Coupled),
    ("euler-only", Phase::EulerOnly),
    ("ns-only", Phase::NsOnly),
    ("kinetic", Phase::Kinetic),
    ("heat", Phase::Heat),
];
const KINDS: &[(&str, InitialKind)] = &[
    ("gaussian", InitialKind::Gaussian),
    ("random", InitialKind::Random),
    ("taylor-green", InitialKind::TaylorGreen),
    ("uniform", InitialKind::Uniform),
    ("wave", InitialKind::Wave),
];
const DRAGS: &[(&str, DragScheme)] = &[
    ("off", DragScheme::Off),
    ("explicit", DragScheme::Explicit),
    ("exact", DragScheme::Exact),
];
const SCHEMES: &[(&str, AlignmentScheme)] = &[("explicit", AlignmentScheme::Explicit), ("exact", AlignmentScheme::Exact)];

fn name_of<T: PartialEq>(options: &[(&'static str, T)], value: &T) -> &'static str {
    options.iter().find(|(_, t)| t == value).map(|(n, _)| *n).expect("every variant is named")
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        match key {
            "run.phase" => self.phase = choice(v, PHASES)?,
            "grid.dim" => self.grid.dim = parse_usize(v)?,
            "grid.n" => self.grid.n = parse_usize(v)?,
            "grid.length" => self.grid.length = parse_f64(v)?,
            "initial.kind" => self.initial.kind = choice(v, KINDS)?,
            "initial.rho_mean" => self.initial.rho_mean = parse_f64(v)?,
            "initial.amplitude" => self.initial.amplitude = parse_f64(v)?,
            "initial.rho_weight" => self.initial.rho_weight = parse_f64(v)?,
            "initial.u_weight" => self.initial.u_weight = parse_f64(v)?,
            "initial.v_weight" => self.initial.v_weight = parse_f64(v)?,
            "initial.width" => self.initial.width = parse_f64(v)?,
            "initial.modes" => self.initial.modes = parse_usize(v)?,
            "initial.seed" => self.initial.seed = v.parse().map_err(|_| format!("expected an unsigned integer, got {v:?}"))?,
            "physics.mu" => self.physics.mu = parse_f64(v)?,
            "physics.drag" => self.physics.drag = choice(v, DRAGS)?,
            "physics.theta" => self.physics.theta = parse_f64(v)?,
            "physics.rho_floor" => self.physics.rho_floor = parse_f64(v)?,
            "time.cfl" => self.time.cfl = parse_f64(v)?,
            "time.dt_max" => self.time.dt_max = parse_f64(v)?,
            "time.t_end" => self.time.t_end = parse_f64(v)?,
            "output.diagnostics_every" => self.output.diagnostics_every = parse_usize(v)?,
            "output.snapshot_every" => self.output.snapshot_every = parse_usize(v)?,
            "output.sobolev_s" => {
                self.output.sobolev_s = v.parse().map_err(|_| format!("expected a non-negative integer, got {v:?}"))?
            }
            "output.weighted_orders" => {
                self.output.weighted_orders =
                    parse_list(v, |s| s.parse::<u32>().map_err(|_| format!("expected a derivative order, got {s:?}")))?
            }
            "output.weighted_exponents" => self.output.weighted_exponents = parse_list(v, parse_f64)?,
            "output.probe_points" => self.output.probe_points = parse_usize(v)?,
            "output.probe_radius" => self.output.probe_radius = parse_usize(v)?,
            "fit.v_window" => self.fit.v_window = parse_window(v)?,
            "fit.u_window" => self.fit.u_window = parse_window(v)?,
            "fit.energy_weight" => self.fit.energy_weight = parse_f64(v)?,
            "fit.energy_from" => self.fit.energy_from = parse_f64(v)?,
            "kinetic.nxi" => self.kinetic.nxi = parse_usize(v)?,
            "kinetic.epsilons" => self.kinetic.epsilons = parse_list(v, parse_f64)?,
            "kinetic.width" => self.kinetic.width = parse_f64(v)?,
            "kinetic.scheme" => self.kinetic.scheme = choice(v, SCHEMES)?,
            "study.resolutions" => self.study.resolutions = parse_list(v, parse_usize)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        match key {
            "run.phase" => name_of(PHASES, &self.phase).into(),
            "grid.dim" => self.grid.dim.to_string(),
            "grid.n" => self.grid.n.to_string(),
            "grid.length" => self.grid.length.to_string(),
            "initial.kind" => name_of(KINDS, &self.initial.kind).into(),
            "initial.rho_mean" => self.initial.rho_mean.to_string(),
            "initial.amplitude" => self.initial.amplitude.to_string(),
            "initial.rho_weight" => self.initial.rho_weight.to_string(),
            "initial.u_weight" => self.initial.u_weight.to_string(),
            "initial.v_weight" => self.initial.v_weight.to_string(),
            "initial.width" => self.initial.width.to_string(),
            "initial.modes" => self.initial.modes.to_string(),
            "initial.seed" => self.initial.seed.to_string(),
            "physics.mu" => self.physics.mu.to_string(),
            "physics.drag" => name_of(DRAGS, &self.physics.drag).into(),
            "physics.theta" => self.physics.theta.to_string(),
            "physics.rho_floor" => self.physics.rho_floor.to_string(),
            "time.cfl" => self.time.cfl.to_string(),
            "time.dt_max" => self.time.dt_max.to_string(),
            "time.t_end" => self.time.t_end.to_string(),
            "output.diagnostics_every" => self.output.diagnostics_every.to_string(),
            "output.snapshot_every" => self.output.snapshot_every.to_string(),
            "output.sobolev_s" => self.output.sobolev_s.to_string(),
            "output.weighted_orders" => join(&self.output.weighted_orders),
            "output.weighted_exponents" => join(&self.output.weighted_exponents),
            "output.probe_points" => self.output.probe_points.to_string(),
            "output.probe_radius" => self.output.probe_radius.to_string(),
            "fit.v_window" => join(&[self.fit.v_window.0, self.fit.v_window.1]),
            "fit.u_window" => join(&[self.fit.u_window.0, self.fit.u_window.1]),
            "fit.energy_weight" => self.fit.energy_weight.to_string(),
            "fit.energy_from" => self.fit.energy_from.to_string(),
            "kinetic.nxi" => self.kinetic.nxi.to_string(),
            "kinetic.epsilons" => join(&self.kinetic.epsilons),
            "kinetic.width" => self.kinetic.width.to_string(),
            "kinetic.scheme" => name_of(SCHEMES, &self.kinetic.scheme).into(),
            "study.resolutions" => join(&self.study.resolutions),
            _ => unreachable!("{key} is not a configuration key"),
        }
    }

    /// Every key with its canonical value, sections in fixed order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, (section, keys)) in SECTIONS.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{section}]");
            for key in keys.iter() {
                let _ = writeln!(out, "{key} = {}", self.get(&format!("{section}.{key}")));
            }
        }
        out
    }

    /// Range and consistency checks; `lines` maps keys to source lines.
    fn check(&self, lines: &BTreeMap<String, usize>) -> Vec<ConfigError> {
        let mut errors = Vec::new();
        let mut bad = |key: &str, message: String| {
            errors.push(ConfigError {
                line: lines.get(key).copied().unwrap_or(0),
                key: key.to_string(),
                message,
            })
        };
        let positive = |x: f64| x > 0.0;
        let g = &self.grid;
        if !(1..=3).contains(&g.dim) {
            bad("grid.dim", format!("must lie in [1, 3], got {}", g.dim));
        }
        if !(g.n >= 8 && g.n <= 1024 && g.n.is_power_of_two()) {
            bad("grid.n", format!("must be a power of two in [8, 1024], got {}", g.n));
        }
        if !positive(g.length) {
            bad("grid.length", format!("must lie in (0, inf), got {}", g.length));
        }
        let ic = &self.initial;
        if !positive(ic.rho_mean) {
            bad("initial.rho_mean", format!("must lie in (0, inf), got {}", ic.rho_mean));
        }
        if !(0.0..=1.0).contains(&ic.amplitude) {
            bad("initial.amplitude", format!("must lie in [0, 1], got {}", ic.amplitude));
        }
        for (key, w) in [
            ("initial.rho_weight", ic.rho_weight),
            ("initial.u_weight", ic.u_weight),
            ("initial.v_weight", ic.v_weight),
        ] {
            if !(-10.0..=10.0).contains(&w) {
                bad(key, format!("must lie in [-10, 10], got {w}"));
            }
        }
        if ic.kind == InitialKind::Gaussian && ic.amplitude * ic.rho_weight.abs() >= ic.rho_mean {
            bad("initial.amplitude", "the density bump would reach vacuum".into());
        }
        if !positive(ic.width) {
            bad("initial.width", format!("must lie in (0, inf), got {}", ic.width));
        }
        if !(1..=8).contains(&ic.modes) {
            bad("initial.modes", format!("must lie in [1, 8], got {}", ic.modes));
        }
        if ic.kind == InitialKind::TaylorGreen && g.dim < 2 {
            bad("initial.kind", "taylor-green needs dim >= 2".into());
        }
        let p = &self.physics;
        if !positive(p.mu) {
            bad("physics.mu", format!("must lie in (0, inf), got {}", p.mu));
        }
        if !(1.0..=2.0).contains(&p.theta) {
            bad("physics.theta", format!("must lie in [1, 2], got {}", p.theta));
        }
        if !(p.rho_floor > 0.0 && p.rho_floor < 1.0) {
            bad("physics.rho_floor", format!("must lie in (0, 1), got {}", p.rho_floor));
        }
        let t = &self.time;
        if !(t.cfl > 0.0 && t.cfl <= 1.0) {
            bad("time.cfl", format!("must lie in (0, 1], got {}", t.cfl));
        }
        if !positive(t.dt_max) {
            bad("time.dt_max", format!("must lie in (0, inf), got {}", t.dt_max));
        }
        if !positive(t.t_end) {
            bad("time.t_end", format!("must lie in (0, inf), got {}", t.t_end));
        }
        let o = &self.output;
        if o.diagnostics_every == 0 {
            bad("output.diagnostics_every", "must lie in [1, inf), got 0".into());
        }
        if o.sobolev_s > 6 {
            bad("output.sobolev_s", format!("must lie in [0, 6], got {}", o.sobolev_s));
        }
        if o.weighted_orders.iter().any(|k| *k > 8) {
            bad("output.weighted_orders", "orders must lie in [0, 8]".into());
        }
        if o.weighted_exponents.iter().any(|r| !(0.0..=10.0).contains(r)) {
            bad("output.weighted_exponents", "exponents must lie in [0, 10]".into());
        }
        if o.probe_points > 64 {
            bad("output.probe_points", format!("must lie in [0, 64], got {}", o.probe_points));
        }
        if !(1..=8).contains(&o.probe_radius) {
            bad("output.probe_radius", format!("must lie in [1, 8], got {}", o.probe_radius));
        }
        for (key, (a, b)) in [("fit.v_window", self.fit.v_window), ("fit.u_window", self.fit.u_window)] {
            if !(a >= 0.0 && b > a) {
                bad(key, format!("needs 0 <= t0 < t1, got {a}, {b}"));
            }
        }
        if !(0.0..=10.0).contains(&self.fit.energy_weight) {
            bad("fit.energy_weight", format!("must lie in [0, 10], got {}", self.fit.energy_weight));
        }
        if self.fit.energy_from < 0.0 {
            bad("fit.energy_from", format!("must lie in [0, inf), got {}", self.fit.energy_from));
        }
        let k = &self.kinetic;
        if !(k.nxi >= 4 && k.nxi <= 4096) {
            bad("kinetic.nxi", format!("must lie in [4, 4096], got {}", k.nxi));
        }
        if k.epsilons.is_empty() || k.epsilons.iter().any(|e| !(*e > 0.0)) {
            bad("kinetic.epsilons", "needs at least one value, all in (0, inf)".into());
        }
        if k.width < 0.0 {
            bad("kinetic.width", format!("must lie in [0, inf), got {}", k.width));
        }
        if self.phase == Phase::Kinetic && g.dim != 1 {
            bad("grid.dim", "the kinetic phase is one-dimensional".into());
        }
        if self
            .study
            .resolutions
            .iter()
            .any(|n| !(*n >= 8 && *n <= 4096 && n.is_power_of_two()))
        {
            bad("study.resolutions", "each entry must be a power of two in [8, 4096]".into());
        }
        errors
    }

    pub fn validate(&self) -> Result<()> {
        let errors = self.check(&BTreeMap::new());
        if errors.is_empty() {
            Ok(())
        } else {
            Err(PensError::Config(errors))
        }
    }

    /// Applies `section.key=value` overrides and revalidates.
    pub fn with_overrides<S: AsRef<str>>(mut self, overrides: &[S]) -> Result<Self> {
        let mut errors = Vec::new();
        for o in overrides {
            let o = o.as_ref();
            let Some((key, value)) = o.split_once('=') else {
                errors.push(ConfigError {
                    line: 0,
                    key: o.to_string(),
                    message: "expected section.key=value".into(),
                });
                continue;
            };
            let key = key.trim();
            if !is_known(key) {
                errors.push(ConfigError {
                    line: 0,
                    key: key.to_string(),
                    message: "unknown key".into(),
                });
            } else if let Err(message) = self.set(key, value.trim()) {
                errors.push(ConfigError {
                    line: 0,
                    key: key.to_string(),
                    message,
                });
            }
        }
        errors.extend(self.check(&BTreeMap::new()));
        if errors.is_empty() {
            Ok(self)
        } else {
            Err(PensError::Config(errors))
        }
    }
}

/// Parses and validates a configuration, reporting every problem at once.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut errors = Vec::new();
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if SECTIONS.iter().any(|(s, _)| *s == name) {
                section = Some(name.to_string());
            } else {
                errors.push(ConfigError {
                    line,
                    key: format!("[{name}]"),
                    message: "unknown section".into(),
                });
                section = None;
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(ConfigError {
                line,
                key: content.to_string(),
                message: "expected key = value".into(),
            });
            continue;
        };
        let Some(sec) = &section else {
            errors.push(ConfigError {
                line,
                key: key.trim().to_string(),
                message: "key outside a known section".into(),
            });
            continue;
        };
        let full = format!("{sec}.{}", key.trim());
        if !is_known(&full) {
            errors.push(ConfigError {
                line,
                key: full,
                message: "unknown key".into(),
            });
            continue;
        }
        if let Some((first, _)) = entries.get(&full) {
            errors.push(ConfigError {
                line,
                key: full.clone(),
                message: format!("duplicate key, first set on line {first}, again on line {line}"),
            });
            continue;
        }
        entries.insert(full, (line, value.trim().to_string()));
    }

    for key in REQUIRED {
        if !entries.contains_key(*key) {
            errors.push(ConfigError {
                line: 0,
                key: key.to_string(),
                message: "missing required key".into(),
            });
        }
    }

    let mut config = RunConfig::default();
    let mut lines = BTreeMap::new();
    for (key, (line, value)) in &entries {
        lines.insert(key.clone(), *line);
        if let Err(message) = config.set(key, value) {
            errors.push(ConfigError {
                line: *line,
                key: key.clone(),
                message,
            });
        }
    }
    if errors.is_empty() {
        errors.extend(config.check(&lines));
    }
    if errors.is_empty() {
        Ok(config)
    } else {
        errors.sort_by_key(|e| e.line);
        Err(PensError::Config(errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_key_round_trips() {
        let c = RunConfig::default();
        let text = c.dump();
        let parsed = parse_config(&text).unwrap();
        assert_eq!(parsed, c);
        for (section, keys) in SECTIONS {
            for key in keys.iter() {
                assert!(is_known(&format!("{section}.{key}")));
            }
        }
    }
}
