//! Conserved and dissipated quantities, norm tables, decay fits and
//! density tracking along backward characteristics.

use rayon::prelude::*;

use crate::coupler::FluidState;
use crate::error::{PensError, Result};
use crate::grid::{stable_sum, Grid, ScalarField, VectorField};
use crate::spectral::{seminorm_spectral, sobolev_norm_spectral, Transform};

/// Energy `E = 1/2 int rho |u|^2 + 1/2 int |v|^2` and dissipation
/// `D = int |grad v|^2 + int rho |u - v|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    pub energy: f64,
    pub dissipation: f64,
}

pub fn energy(transform: &Transform, state: &FluidState, rho_floor: f64) -> Result<EnergyTerms> {
    let u = crate::euler::velocity_from_momentum(&state.euler.rho, &state.euler.momentum, rho_floor)?;
    let v = state.ns.velocity(transform);
    Ok(energy_from_fields(state, &u, &v))
}

pub(crate) fn energy_from_fields(state: &FluidState, u: &VectorField, v: &VectorField) -> EnergyTerms {
    let grid = state.grid();
    let rho = state.euler.rho.data();
    let d = grid.dim();
    let per_cell: Vec<(f64, f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (mut uu, mut vv, mut w) = (0.0, 0.0, 0.0);
            for a in 0..d {
                let ua = u.components()[a].data()[i];
                let va = v.components()[a].data()[i];
                uu += ua * ua;
                vv += va * va;
                w += (ua - va) * (ua - va);
            }
            (rho[i] * uu, vv, rho[i] * w)
        })
        .collect();
    let hd = grid.cell_volume();
    let kin_u = stable_sum(per_cell.iter().map(|c| c.0)) * hd;
    let kin_v = stable_sum(per_cell.iter().map(|c| c.1)) * hd;
    let drag = stable_sum(per_cell.iter().map(|c| c.2)) * hd;
    EnergyTerms {
        energy: 0.5 * kin_u + 0.5 * kin_v,
        dissipation: state.ns.gradient_norm_sq() + drag,
    }
}

/// Integral over `[t1, t2]` of the quadratic through three samples.
fn quadratic_tail((t0, d0): (f64, f64), (t1, d1): (f64, f64), (t2, d2): (f64, f64)) -> f64 {
    let (h1, h2) = (t1 - t0, t2 - t1);
    h2 * (d2 * (2.0 * h2 + 3.0 * h1) / (6.0 * (h1 + h2)) + d1 * (h2 + 3.0 * h1) / (6.0 * h1)
        - d0 * h2 * h2 / (6.0 * h1 * (h1 + h2)))
}

/// Integral over `[t0, t1]` of the quadratic through three samples.
fn quadratic_head(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    quadratic_tail((-c.0, c.1), (-b.0, b.1), (-a.0, a.1))
}

/// `E(t_n) + int_0^{t_n} D - E(t_0)` over `(t, E, D)` samples. `int D` uses
/// the piecewise quadratic rule (third order), or the trapezoid rule when
/// only two samples exist.
pub fn energy_balance_residual(history: &[(f64, f64, f64)]) -> Result<f64> {
    if history.len() < 2 {
        return Err(PensError::InvalidArgument(
            "energy balance needs at least two records".into(),
        ));
    }
    let mut balance = EnergyBalance::default();
    for &(t, e, d) in history {
        balance.push(t, e, d)?;
    }
    Ok(balance.residual())
}

/// Running version of [`energy_balance_residual`].
#[derive(Debug, Clone, Default)]
pub struct EnergyBalance {
    e0: f64,
    samples: usize,
    /// Last two `(t, D)` samples, oldest first.
    window: [(f64, f64); 2],
    last_e: f64,
    increments: Vec<f64>,
}

impl EnergyBalance {
    pub fn push(&mut self, t: f64, e: f64, d: f64) -> Result<()> {
        let [older, prev] = self.window;
        if self.samples > 0 && !(t > prev.0) {
            return Err(PensError::InvalidArgument(format!(
                "record times must increase, found {} then {t}",
                prev.0
            )));
        }
        match self.samples {
            0 => self.e0 = e,
            1 => self.increments.push(0.5 * (t - prev.0) * (prev.1 + d)),
            _ => {
                if self.samples == 2 {
                    self.increments[0] = quadratic_head(older, prev, (t, d));
                }
                self.increments.push(quadratic_tail(older, prev, (t, d)));
            }
        }
        self.window = [prev, (t, d)];
        self.last_e = e;
        self.samples += 1;
        Ok(())
    }

    pub fn dissipated(&self) -> f64 {
        stable_sum(self.increments.iter().copied())
    }

    pub fn residual(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.last_e + self.dissipated() - self.e0
        }
    }
}

/// Result of a log–log power-law fit `value ~ C (1 + t)^(-alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub field: String,
    pub window: (f64, f64),
    pub alpha: f64,
    pub constant: f64,
    /// Root-mean-square residual of the regression in log space.
    pub residual: f64,
    pub samples: usize,
}

/// Least-squares fit of `log(value)` against `log(1 + t)` on `[t0, t1]`.
pub fn fit_decay(field: &str, series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let (t0, t1) = window;
    if !(t0 > 0.0 && t1 > t0) {
        return Err(PensError::Fit(format!("window [{t0}, {t1}] must satisfy 0 < t0 < t1")));
    }
    let (first, last) = match (series.first(), series.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(PensError::Fit("empty series".into())),
    };
    if t0 < first || t1 > last {
        return Err(PensError::Fit(format!(
            "window [{t0}, {t1}] outside series range [{first}, {last}]"
        )));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= t0 && *t <= t1)
        .copied()
        .collect();
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(PensError::Fit(format!("non-positive value {v} at t = {t}")));
    }
    if pts.len() < 2 {
        return Err(PensError::Fit(format!(
            "window [{t0}, {t1}] holds {} samples, need at least 2",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|(t, _)| t.ln_1p()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let mx = stable_sum(xs.iter().copied()) / n;
    let my = stable_sum(ys.iter().copied()) / n;
    let sxx = stable_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    let sxy = stable_sum(xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)));
    if !(sxx > 0.0) {
        return Err(PensError::Fit("window samples share one time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss = stable_sum(xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)));
    Ok(DecayFit {
        field: field.to_string(),
        window,
        alpha: -slope,
        constant: intercept.exp(),
        residual: (ss / n).sqrt(),
        samples: pts.len(),
    })
}

/// One named scalar of a norm table.
#[derive(Debug, Clone, PartialEq)]
pub struct NormEntry {
    pub label: String,
    pub value: f64,
}

/// Fields a norm table can refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackedField {
    /// `rho` minus its mean.
    RhoFluctuation,
    U,
    V,
}

impl TrackedField {
    pub fn label(&self) -> &'static str {
        match self {
            TrackedField::RhoFluctuation => "rho",
            TrackedField::U => "u",
            TrackedField::V => "v",
        }
    }
}

/// Spectra of the tracked fields of one state.
pub struct FieldSpectra {
    rho: Vec<crate::spectral::SpectralField>,
    u: Vec<crate::spectral::SpectralField>,
    v: Vec<crate::spectral::SpectralField>,
}

impl FieldSpectra {
    pub fn new(transform: &Transform, state: &FluidState, u: &VectorField) -> Result<Self> {
        let mut rho = transform.forward(&state.euler.rho)?;
        rho.data_mut()[0] = num_complex::Complex64::new(0.0, 0.0);
        Ok(Self {
            rho: vec![rho],
            u: transform.forward_vector(u)?,
            v: state.ns.vhat.clone(),
        })
    }

    fn get(&self, f: TrackedField) -> &[crate::spectral::SpectralField] {
        match f {
            TrackedField::RhoFluctuation => &self.rho,
            TrackedField::U => &self.u,
            TrackedField::V => &self.v,
        }
    }

    /// Inhomogeneous `H^order` norm.
    pub fn sobolev(&self, f: TrackedField, order: u32) -> f64 {
        self.get(f)
            .iter()
            .map(|c| sobolev_norm_spectral(c, order as i32).expect("order is non-negative").powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `||grad^k f||_{L2}`
    pub fn seminorm(&self, f: TrackedField, k: u32) -> f64 {
        self.get(f)
            .iter()
            .map(|c| seminorm_spectral(c, k).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// `(H^s(rho - mean), H^{s+2}(u), H^{s+1}(v))` and the sum of their squares.
pub fn sobolev_table(spectra: &FieldSpectra, s: u32) -> Vec<NormEntry> {
    let entries = [
        (TrackedField::RhoFluctuation, s),
        (TrackedField::U, s + 2),
        (TrackedField::V, s + 1),
    ];
    let mut out: Vec<NormEntry> = entries
        .iter()
        .map(|&(f, k)| NormEntry {
            label: format!("H{k}_{}", f.label()),
            value: spectra.sobolev(f, k),
        })
        .collect();
    let x = out.iter().map(|e| e.value * e.value).sum();
    out.push(NormEntry {
        label: format!("X{s}"),
        value: x,
    });
    out
}

/// Entries `(1 + t)^r ||grad^k f||_{L2}` for `f` in `{u, v}`.
pub fn weighted_norm_table(spectra: &FieldSpectra, t: f64, orders: &[u32], exponents: &[f64]) -> Vec<NormEntry> {
    let mut out = Vec::new();
    for f in [TrackedField::U, TrackedField::V] {
        for &k in orders {
            let base = spectra.seminorm(f, k);
            for &r in exponents {
                out.push(NormEntry {
                    label: format!("w_{}_k{k}_r{r}", f.label()),
                    value: (1.0 + t).powf(r) * base,
                });
            }
        }
    }
    out
}

/// Second-order central divergence of a grid vector field.
pub fn central_divergence(u: &VectorField) -> ScalarField {
    let grid = *u.grid();
    let h = grid.spacing();
    let data = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            (0..grid.dim())
                .map(|a| {
                    let c = u.components()[a].data();
                    (c[grid.shift(i, a, 1)] - c[grid.shift(i, a, -1)]) / (2.0 * h)
                })
                .sum()
        })
        .collect();
    ScalarField::from_vec(grid, data).expect("length matches grid")
}

/// Local copy of `(u, div u)` on a cube of cells around one sample point.
#[derive(Debug, Clone)]
struct Patch {
    values: Vec<[f64; 4]>,
}

#[derive(Debug, Clone)]
struct Frame {
    t: f64,
    patches: Vec<Patch>,
}

/// Backward-characteristics density predictor at fixed sample points.
///
/// At each recorded time the velocity and its divergence are copied on a
/// cube of `2R + 1` cells per axis around every sample point. Tracing back
/// from a sample uses Heun steps between recorded times with multilinear
/// interpolation in space, accumulating `int div u` with the trapezoid rule.
#[derive(Debug, Clone)]
pub struct CharacteristicProbe {
    grid: Grid,
    rho0: ScalarField,
    centers: Vec<usize>,
    radius: usize,
    frames: Vec<Frame>,
}

/// Predicted versus computed density at one sample point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityComparison {
    pub position: [f64; 3],
    pub predicted: f64,
    pub computed: f64,
    /// Foot of the characteristic at `t = 0`.
    pub foot: [f64; 3],
}

impl CharacteristicProbe {
    /// Sample points are snapped to the nearest grid node.
    pub fn new(rho0: &ScalarField, points: &[[f64; 3]], radius: usize) -> Result<Self> {
        let grid = *rho0.grid();
        if radius == 0 || 2 * radius + 1 > grid.n() {
            return Err(PensError::InvalidArgument(format!(
                "probe radius {radius} does not fit a grid of {} points",
                grid.n()
            )));
        }
        let h = grid.spacing();
        let centers = points
            .iter()
            .map(|p| {
                (0..grid.dim()).fold(0usize, |idx, a| {
                    let c = (p[a] / h).round().rem_euclid(grid.n() as f64) as usize;
                    idx * grid.n() + c
                })
            })
            .collect();
        Ok(Self {
            grid,
            rho0: rho0.clone(),
            centers,
            radius,
            frames: Vec::new(),
        })
    }

    pub fn sample_positions(&self) -> Vec<[f64; 3]> {
        self.centers.iter().map(|&c| self.grid.position(c)).collect()
    }

    fn side(&self) -> usize {
        2 * self.radius + 1
    }

    fn patch_len(&self) -> usize {
        self.side().pow(self.grid.dim() as u32)
    }

    /// Grid index of local patch cell `local` around `center`.
    fn global_index(&self, center: usize, local: usize) -> usize {
        let side = self.side();
        let mut rest = local;
        let mut idx = center;
        for a in (0..self.grid.dim()).rev() {
            let off = (rest % side) as isize - self.radius as isize;
            rest /= side;
            idx = self.grid.shift(idx, a, off);
        }
        idx
    }

    /// Stores the local velocity history at time `t`; times must increase.
    pub fn record(&mut self, t: f64, u: &VectorField) -> Result<()> {
        self.grid.check_same(u.grid())?;
        if let Some(f) = self.frames.last() {
            if !(t > f.t) {
                return Err(PensError::InvalidArgument(format!(
                    "probe frames must advance in time, got {t} after {}",
                    f.t
                )));
            }
        }
        let div = central_divergence(u);
        let patches = self
            .centers
            .iter()
            .map(|&c| Patch {
                values: (0..self.patch_len())
                    .map(|l| {
                        let g = self.global_index(c, l);
                        let mut v = [0.0; 4];
                        for a in 0..self.grid.dim() {
                            v[a] = u.components()[a].data()[g];
                        }
                        v[3] = div.data()[g];
                        v
                    })
                    .collect(),
            })
            .collect();
        self.frames.push(Frame { t, patches });
        Ok(())
    }

    pub fn frames(&self) -> usize {
        self.frames.len()
    }

    /// Multilinear interpolation of `(u, div u)` at displacement `r` from the
    /// patch center.
    fn sample(&self, patch: &Patch, r: [f64; 3]) -> Result<[f64; 4]> {
        let d = self.grid.dim();
        let h = self.grid.spacing();
        let side = self.side();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..d {
            let s = r[a] / h + self.radius as f64;
            if !(s >= 0.0 && s <= (side - 1) as f64) {
                return Err(PensError::InvalidArgument(format!(
                    "characteristic left the probe window (displacement {:.3e} on axis {a}); increase the probe radius",
                    r[a]
                )));
            }
            let b = (s.floor() as usize).min(side - 2);
            base[a] = b;
            frac[a] = s - b as f64;
        }
        let mut out = [0.0; 4];
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = 0;
            for a in 0..d {
                let bit = (corner >> a) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                idx = idx * side + base[a] + bit;
            }
            for q in 0..4 {
                out[q] += w * patch.values[idx][q];
            }
        }
        Ok(out)
    }

    /// Traces back from every sample at the last recorded time and compares
    /// `rho0(foot) exp(-int div u)` with the supplied grid density.
    pub fn compare(&self, rho: &ScalarField) -> Result<Vec<DensityComparison>> {
        self.grid.check_same(rho.grid())?;
        if self.frames.is_empty() {
            return Err(PensError::InvalidArgument("probe has no recorded frames".into()));
        }
        let d = self.grid.dim();
        let mut out = Vec::with_capacity(self.centers.len());
        for (p, &c) in self.centers.iter().enumerate() {
            let x = self.grid.position(c);
            let mut r = [0.0; 3];
            let mut integral = 0.0;
            for k in (1..self.frames.len()).rev() {
                let (hi, lo) = (&self.frames[k], &self.frames[k - 1]);
                let dt = hi.t - lo.t;
                let a = self.sample(&hi.patches[p], r)?;
                let mut pred = r;
                for q in 0..d {
                    pred[q] -= dt * a[q];
                }
                let b = self.sample(&lo.patches[p], pred)?;
                for q in 0..d {
                    r[q] -= 0.5 * dt * (a[q] + b[q]);
                }
                let b = self.sample(&lo.patches[p], r)?;
                integral += 0.5 * dt * (a[3] + b[3]);
            }
            let mut foot = [0.0; 3];
            for q in 0..d {
                foot[q] = x[q] + r[q];
            }
            out.push(DensityComparison {
                position: x,
                predicted: self.rho0.interpolate(foot) * (-integral).exp(),
                computed: rho.data()[c],
                foot,
            });
        }
        Ok(out)
    }
}

/// One row of the diagnostics time series.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: usize,
    pub mass: f64,
    pub momentum: Vec<f64>,
    pub energy: f64,
    pub dissipation: f64,
    pub balance_residual: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// `min rho0 * exp(-int max(div u)^+)`.
    pub rho_lower_bound: f64,
    /// Cumulative count of clipped negative densities.
    pub clipped: usize,
    pub sobolev: Vec<NormEntry>,
    pub weighted: Vec<NormEntry>,
}

fn scalar_columns(dim: usize) -> Vec<String> {
    let mut h: Vec<String> = ["t", "step", "mass"].iter().map(|s| s.to_string()).collect();
    h.extend((0..dim).map(|a| format!("momentum_{a}")));
    h.extend(
        [
            "energy",
            "dissipation",
            "balance_residual",
            "rho_min",
            "rho_max",
            "rho_lower_bound",
            "clipped",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    h
}

/// Column names of every record produced with `config` in `dim` dimensions.
pub fn record_header(dim: usize, config: &DiagnosticsConfig) -> Vec<String> {
    let s = config.sobolev_s;
    let mut h = scalar_columns(dim);
    h.extend([format!("H{s}_rho"), format!("H{}_u", s + 2), format!("H{}_v", s + 1), format!("X{s}")]);
    for f in ["u", "v"] {
        for k in &config.weighted_orders {
            for r in &config.weighted_exponents {
                h.push(format!("w_{f}_k{k}_r{r}"));
            }
        }
    }
    h
}

impl DiagnosticsRecord {
    /// Column names in output order.
    pub fn header(&self) -> Vec<String> {
        let mut h = scalar_columns(self.momentum.len());
        h.extend(self.sobolev.iter().map(|e| e.label.clone()));
        h.extend(self.weighted.iter().map(|e| e.label.clone()));
        h
    }

    /// Values matching [`Self::header`].
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.t, self.step as f64, self.mass];
        v.extend(&self.momentum);
        v.extend([
            self.energy,
            self.dissipation,
            self.balance_residual,
            self.rho_min,
            self.rho_max,
            self.rho_lower_bound,
            self.clipped as f64,
        ]);
        v.extend(self.sobolev.iter().map(|e| e.value));
        v.extend(self.weighted.iter().map(|e| e.value));
        v
    }

    pub fn column(&self, name: &str) -> Option<f64> {
        self.header().iter().position(|h| h == name).map(|i| self.values()[i])
    }
}

/// Settings for the per-run diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    pub sobolev_s: u32,
    pub weighted_orders: Vec<u32>,
    pub weighted_exponents: Vec<f64>,
    pub probe_points: Vec<[f64; 3]>,
    pub probe_radius: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            sobolev_s: 2,
            weighted_orders: vec![0, 1, 2],
            weighted_exponents: vec![0.5],
            probe_points: Vec::new(),
            probe_radius: 3,
        }
    }
}

/// Energy sample taken after every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
}

/// Accumulates diagnostics over a run.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: DiagnosticsConfig,
    rho_floor: f64,
    rho0_min: f64,
    balance: EnergyBalance,
    energy: Vec<EnergySample>,
    compression: Vec<f64>,
    last_compression: Option<(f64, f64)>,
    clipped: usize,
    probe: Option<CharacteristicProbe>,
}

impl Tracker {
    pub fn new(state0: &FluidState, config: DiagnosticsConfig, rho_floor: f64) -> Result<Self> {
        let probe = if config.probe_points.is_empty() {
            None
        } else {
            Some(CharacteristicProbe::new(&state0.euler.rho, &config.probe_points, config.probe_radius)?)
        };
        Ok(Self {
            rho0_min: state0.euler.rho.min(),
            config,
            rho_floor,
            balance: EnergyBalance::default(),
            energy: Vec::new(),
            compression: Vec::new(),
            last_compression: None,
            clipped: 0,
            probe,
        })
    }

    /// Per-step update of the energy balance, compression integral and probe.
    pub fn observe(&mut self, transform: &Transform, state: &FluidState, clipped: usize) -> Result<(VectorField, EnergyTerms)> {
        let u = crate::euler::velocity_from_momentum(&state.euler.rho, &state.euler.momentum, self.rho_floor)?;
        let v = state.ns.velocity(transform);
        let terms = energy_from_fields(state, &u, &v);
        self.balance.push(state.t, terms.energy, terms.dissipation)?;
        self.energy.push(EnergySample {
            t: state.t,
            energy: terms.energy,
            dissipation: terms.dissipation,
        });
        let c = central_divergence(&u).max().max(0.0);
        if let Some((tp, cp)) = self.last_compression {
            self.compression.push(0.5 * (state.t - tp) * (c + cp));
        }
        self.last_compression = Some((state.t, c));
        self.clipped += clipped;
        if let Some(p) = &mut self.probe {
            p.record(state.t, &u)?;
        }
        Ok((u, terms))
    }

    /// Full record; call right after [`Self::observe`] for the same state.
    pub fn record(
        &mut self,
        transform: &Transform,
        state: &FluidState,
        step: usize,
        u: &VectorField,
        terms: EnergyTerms,
    ) -> Result<DiagnosticsRecord> {
        let spectra = FieldSpectra::new(transform, state, u)?;
        let lower = self.rho0_min * (-stable_sum(self.compression.iter().copied())).exp();
        Ok(DiagnosticsRecord {
            t: state.t,
            step,
            mass: state.euler.mass(),
            momentum: state.momentum(),
            energy: terms.energy,
            dissipation: terms.dissipation,
            balance_residual: self.balance.residual(),
            rho_min: state.euler.rho.min(),
            rho_max: state.euler.rho.max(),
            rho_lower_bound: lower,
            clipped: self.clipped,
            sobolev: sobolev_table(&spectra, self.config.sobolev_s),
            weighted: weighted_norm_table(
                &spectra,
                state.t,
                &self.config.weighted_orders,
                &self.config.weighted_exponents,
            ),
        })
    }

    pub fn energy_samples(&self) -> &[EnergySample] {
        &self.energy
    }

    pub fn probe(&self) -> Option<&CharacteristicProbe> {
        self.probe.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_power_law() {
        let series: Vec<(f64, f64)> = (0..50).map(|i| {
            let t = 0.5 * i as f64;
            (t, 7.0 / (1.0 + t).powi(2))
        }).collect();
        let fit = fit_decay("E", &series, (1.0, 20.0)).unwrap();
        assert!((fit.alpha - 2.0).abs() < 1e-12);
        assert!((fit.constant - 7.0).abs() < 1e-10);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let series = vec![(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)];
        match fit_decay("E", &series, (1.0, 3.0)) {
            Err(PensError::Fit(msg)) => assert!(msg.contains("t = 2")),
            other => panic!("{other:?}"),
        }
        assert!(fit_decay("E", &[(1.0, 1.0), (2.0, 1.0)], (0.5, 2.0)).is_err());
        assert!(fit_decay("E", &[(1.0, 1.0), (2.0, 1.0)], (2.0, 1.0)).is_err());
    }

    #[test]
    fn balance_residual_quadrature() {
        // E = exp(-t), D = exp(-t): residual is the quadrature error only
        let h: Vec<(f64, f64, f64)> = (0..=100)
            .map(|i| {
                let t = 0.01 * i as f64;
                (t, (-t).exp(), (-t).exp())
            })
            .collect();
        let r = energy_balance_residual(&h).unwrap();
        assert!(r.abs() < 1e-7, "{r}");
        // quadratic D on uneven steps is integrated exactly
        let times = [0.0, 0.1, 0.35, 0.4, 0.9, 1.0];
        let q: Vec<(f64, f64, f64)> = times
            .iter()
            .map(|&t| (t, -(t + t * t / 2.0 - t * t * t / 3.0), 1.0 + t - t * t))
            .collect();
        assert!(energy_balance_residual(&q).unwrap().abs() < 1e-15);
        // two samples fall back to the trapezoid rule
        let two = energy_balance_residual(&q[..2]).unwrap();
        assert!((two - (q[1].1 + 0.05 * (q[0].2 + q[1].2))).abs() < 1e-15);
        assert!(energy_balance_residual(&h[..1]).is_err());
        let mut bad = h.clone();
        bad.swap(3, 4);
        assert!(energy_balance_residual(&bad).is_err());
        let mut running = EnergyBalance::default();
        for &(t, e, d) in &h {
            running.push(t, e, d).unwrap();
        }
        assert!((running.residual() - r).abs() < 1e-15);
    }
}
