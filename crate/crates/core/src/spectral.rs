//! Forward/inverse Fourier transforms on the periodic grid and the spectral
//! operators built on them: differentiation, Leray projection, 2/3-rule
//! dealiasing and discrete Sobolev norms.
//!
//! Coefficients use half-spectrum storage: every axis but the last holds all
//! `n` wavenumbers, the last holds `0..=n/2`. The forward transform carries the
//! `1/n^d` factor, so `c_0` is the mean and `L^d * sum_k |c_k|^2` equals the
//! grid L2 norm squared (Plancherel with cell-volume weights).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{PensError, Result};
use crate::grid::{stable_sum, Grid, ScalarField, VectorField};

/// Fourier coefficients of a real field, half-spectrum layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    data: Vec<Complex64>,
}

/// Number of stored coefficients for a grid.
pub fn spectral_len(grid: &Grid) -> usize {
    grid.len() / grid.n() * (grid.n() / 2 + 1)
}

/// Integer wavevector of a flat half-spectrum index (unused axes are zero).
/// Full axes are signed, `n/2` is reported as `+n/2`.
#[inline]
pub fn mode_index(grid: &Grid, index: usize) -> [i64; 3] {
    let n = grid.n();
    let m = n / 2 + 1;
    let d = grid.dim();
    let mut k = [0i64; 3];
    k[d - 1] = (index % m) as i64;
    let mut rest = index / m;
    for axis in (0..d - 1).rev() {
        let i = rest % n;
        rest /= n;
        k[axis] = if i <= n / 2 { i as i64 } else { i as i64 - n as i64 };
    }
    k
}

/// Physical wavenumber `2 pi k / L` of an integer mode.
#[inline]
pub fn wavenumber(grid: &Grid, k: i64) -> f64 {
    2.0 * PI * k as f64 / grid.length()
}

/// `|2 pi k / L|^2` for a flat half-spectrum index.
#[inline]
pub fn wavenumber_sq(grid: &Grid, index: usize) -> f64 {
    let k = mode_index(grid, index);
    (0..grid.dim()).map(|a| wavenumber(grid, k[a]).powi(2)).sum()
}

/// Plancherel multiplicity of a stored coefficient: interior last-axis
/// modes stand for themselves and their conjugate partner.
#[inline]
fn plancherel_weight(grid: &Grid, index: usize) -> f64 {
    let m = grid.n() / 2 + 1;
    let last = index % m;
    if last == 0 || last == m - 1 {
        1.0
    } else {
        2.0
    }
}

fn has_nyquist(grid: &Grid, k: &[i64; 3]) -> bool {
    k[..grid.dim()]
        .iter()
        .any(|ka| ka.unsigned_abs() as usize == grid.n() / 2)
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            data: vec![Complex64::new(0.0, 0.0); spectral_len(&grid)],
        }
    }

    pub fn from_vec(grid: Grid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != spectral_len(&grid) {
            return Err(PensError::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                spectral_len(&grid),
                data.len()
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Coefficient of the mean mode.
    pub fn mean(&self) -> Complex64 {
        self.data[0]
    }

    /// Flat index of an integer wavevector with non-negative last component.
    pub fn index_of(&self, k: [i64; 3]) -> Option<usize> {
        let n = self.grid.n() as i64;
        let d = self.grid.dim();
        let m = n / 2 + 1;
        if k[d - 1] < 0 || k[d - 1] >= m {
            return None;
        }
        let mut idx = 0i64;
        for &ka in k.iter().take(d - 1) {
            if ka.abs() > n / 2 {
                return None;
            }
            idx = idx * n + ka.rem_euclid(n);
        }
        Some((idx * m + k[d - 1]) as usize)
    }

    /// `sum_k w_k |c_k|^2 * L^d`, the physical L2 norm squared.
    pub fn l2_norm_sq(&self) -> f64 {
        self.weighted_sum(|_| 1.0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `L^d * sum_k w_k * mult(k) * |c_k|^2` with a per-mode multiplier.
    pub fn weighted_sum(&self, mult: impl Fn(usize) -> f64) -> f64 {
        let grid = &self.grid;
        let s = stable_sum(
            self.data
                .iter()
                .enumerate()
                .map(|(i, c)| plancherel_weight(grid, i) * mult(i) * c.norm_sqr()),
        );
        s * grid.volume()
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.data {
            *c *= a;
        }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        debug_assert_eq!(self.grid, other.grid);
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += o * a;
        }
    }

    /// Multiplies each coefficient by a real per-mode factor.
    pub fn apply_real_symbol(&mut self, symbol: impl Fn(usize) -> f64 + Sync) {
        self.data
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, c)| *c *= symbol(i));
    }
}

/// FFT plans for one grid. Cheap to clone; safe to share across threads.
#[derive(Clone)]
pub struct Transform {
    grid: Grid,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("grid", &self.grid).finish()
    }
}

impl Transform {
    pub fn new(grid: Grid) -> Self {
        let n = grid.n();
        let mut real = RealFftPlanner::<f64>::new();
        let mut cplx = FftPlanner::<f64>::new();
        Self {
            grid,
            r2c: real.plan_fft_forward(n),
            c2r: real.plan_fft_inverse(n),
            fwd: cplx.plan_fft_forward(n),
            inv: cplx.plan_fft_inverse(n),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Forward transform with `1/n^d` normalization.
    pub fn forward(&self, field: &ScalarField) -> Result<SpectralField> {
        self.grid.check_same(field.grid())?;
        field.check_finite("forward transform input")?;
        Ok(self.forward_unchecked(field.data()))
    }

    pub(crate) fn forward_unchecked(&self, samples: &[f64]) -> SpectralField {
        let grid = self.grid;
        let n = grid.n();
        let m = n / 2 + 1;
        let scale = 1.0 / grid.len() as f64;
        let mut data = vec![Complex64::new(0.0, 0.0); spectral_len(&grid)];
        let r2c = &self.r2c;
        data.par_chunks_mut(m)
            .zip(samples.par_chunks(n))
            .for_each_init(
                || (vec![0.0; n], r2c.make_scratch_vec()),
                |(line, scratch), (out, input)| {
                    line.copy_from_slice(input);
                    r2c.process_with_scratch(line, out, scratch)
                        .expect("buffer sizes match the plan");
                    for c in out.iter_mut() {
                        *c *= scale;
                    }
                },
            );
        for axis in 0..grid.dim() - 1 {
            self.complex_pass(&mut data, axis, &self.fwd);
        }
        SpectralField { grid, data }
    }

    /// Inverse transform (no scaling; undoes [`Transform::forward`]).
    pub fn inverse(&self, spec: &SpectralField) -> ScalarField {
        debug_assert_eq!(&self.grid, spec.grid());
        let grid = self.grid;
        let n = grid.n();
        let m = n / 2 + 1;
        let mut data = spec.data.clone();
        for axis in 0..grid.dim() - 1 {
            self.complex_pass(&mut data, axis, &self.inv);
        }
        let mut out = vec![0.0; grid.len()];
        let c2r = &self.c2r;
        out.par_chunks_mut(n)
            .zip(data.par_chunks_mut(m))
            .for_each_init(
                || c2r.make_scratch_vec(),
                |scratch, (line, input)| {
                    // a real line needs real DC and Nyquist coefficients
                    input[0].im = 0.0;
                    input[m - 1].im = 0.0;
                    c2r.process_with_scratch(input, line, scratch)
                        .expect("buffer sizes match the plan");
                },
            );
        ScalarField::from_vec(grid, out).expect("length matches grid")
    }

    pub fn forward_vector(&self, field: &VectorField) -> Result<Vec<SpectralField>> {
        field
            .components()
            .iter()
            .map(|c| self.forward(c))
            .collect()
    }

    pub fn inverse_vector(&self, spec: &[SpectralField]) -> VectorField {
        VectorField::from_components(spec.iter().map(|s| self.inverse(s)).collect())
            .expect("components share the transform grid")
    }

    /// In-place complex FFT along a non-last axis of the half-spectrum array.
    /// Lines are gathered into contiguous buffers, transformed, and scattered
    /// back; every phase is data-parallel over disjoint outputs.
    fn complex_pass(&self, data: &mut [Complex64], axis: usize, plan: &Arc<dyn Fft<f64>>) {
        let grid = &self.grid;
        let n = grid.n();
        let m = n / 2 + 1;
        let stride = grid.n().pow((grid.dim() - 2 - axis) as u32) * m;
        let lines = data.len() / n;
        let mut buf = vec![Complex64::new(0.0, 0.0); data.len()];
        {
            let src = &*data;
            buf.par_chunks_mut(n).enumerate().for_each(|(l, line)| {
                let (o, j) = (l / stride, l % stride);
                let base = o * n * stride + j;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = src[base + i * stride];
                }
            });
        }
        debug_assert_eq!(buf.len() / n, lines);
        buf.par_chunks_mut(n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()],
            |scratch, line| plan.process_with_scratch(line, scratch),
        );
        let src = &buf;
        data.par_chunks_mut(stride).enumerate().for_each(|(r, row)| {
            let (o, i) = (r / n, r % n);
            for (j, v) in row.iter_mut().enumerate() {
                *v = src[(o * stride + j) * n + i];
            }
        });
    }
}

/// Spectral gradient: coefficient at `k` times `i 2 pi k_a / L` on each axis.
/// Modes with a Nyquist component on any axis are zeroed so derivatives stay
/// real and the gradient stays parallel to `k`.
pub fn gradient(s: &SpectralField) -> Vec<SpectralField> {
    (0..s.grid.dim()).map(|a| partial(s, a)).collect()
}

/// Spectral derivative along one axis.
pub fn partial(s: &SpectralField, axis: usize) -> SpectralField {
    let grid = s.grid;
    let data = s
        .data
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let k = mode_index(&grid, i);
            if has_nyquist(&grid, &k) {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, wavenumber(&grid, k[axis]))
            }
        })
        .collect();
    SpectralField { grid, data }
}

/// Spectral divergence of a vector of coefficient fields.
pub fn divergence(v: &[SpectralField]) -> SpectralField {
    let grid = v[0].grid;
    let mut out = SpectralField::zeros(grid);
    for (axis, comp) in v.iter().enumerate() {
        out.axpy(1.0, &partial(comp, axis));
    }
    out
}

/// Laplacian symbol `-|2 pi k / L|^2`.
pub fn laplacian(s: &SpectralField) -> SpectralField {
    let mut out = s.clone();
    let grid = s.grid;
    out.apply_real_symbol(|i| -wavenumber_sq(&grid, i));
    out
}

/// Leray projection `P(k) = I - k k^T / |k|^2` per mode. The mean and
/// Nyquist modes, where the discrete gradient vanishes, are left untouched.
pub fn leray_project(v: &[SpectralField]) -> Vec<SpectralField> {
    let mut out = v.to_vec();
    leray_project_in_place(&mut out);
    out
}

pub fn leray_project_in_place(v: &mut [SpectralField]) {
    let grid = v[0].grid;
    let d = grid.dim();
    let len = v[0].data.len();
    let projected: Vec<[Complex64; 3]> = {
        let comps: Vec<&[Complex64]> = v.iter().map(|s| s.data.as_slice()).collect();
        (0..len)
            .into_par_iter()
            .map(|idx| {
                let mut c = [Complex64::new(0.0, 0.0); 3];
                for a in 0..d {
                    c[a] = comps[a][idx];
                }
                let kv = mode_index(&grid, idx);
                if idx == 0 || has_nyquist(&grid, &kv) {
                    return c;
                }
                let mut kvec = [0.0; 3];
                let mut k2 = 0.0;
                for a in 0..d {
                    kvec[a] = wavenumber(&grid, kv[a]);
                    k2 += kvec[a] * kvec[a];
                }
                let mut dot = Complex64::new(0.0, 0.0);
                for a in 0..d {
                    dot += c[a] * kvec[a];
                }
                let factor = dot / k2;
                for a in 0..d {
                    c[a] -= factor * kvec[a];
                }
                c
            })
            .collect()
    };
    for (a, comp) in v.iter_mut().enumerate() {
        for (dst, p) in comp.data.iter_mut().zip(&projected) {
            *dst = p[a];
        }
    }
}

/// Zeroes every coefficient with some `|k_a| > n/3` (2/3 rule).
pub fn dealias(s: &SpectralField) -> SpectralField {
    let mut out = s.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(s: &mut SpectralField) {
    let grid = s.grid;
    let n = grid.n() as i64;
    let d = grid.dim();
    s.data.par_iter_mut().enumerate().for_each(|(i, c)| {
        let k = mode_index(&grid, i);
        if (0..d).any(|a| 3 * k[a].abs() > n) {
            *c = Complex64::new(0.0, 0.0);
        }
    });
}

/// `(sum_k w_k (1 + |2 pi k/L|^2)^order |c_k|^2 L^d)^(1/2)`.
pub fn sobolev_norm_spectral(s: &SpectralField, order: i32) -> Result<f64> {
    if order < 0 {
        return Err(PensError::InvalidArgument(format!(
            "Sobolev order must be non-negative, got {order}"
        )));
    }
    let grid = s.grid;
    Ok(s
        .weighted_sum(|i| (1.0 + wavenumber_sq(&grid, i)).powi(order))
        .sqrt())
}

/// Homogeneous seminorm `||grad^k f||_{L2}` computed spectrally.
pub fn seminorm_spectral(s: &SpectralField, order: u32) -> f64 {
    let grid = s.grid;
    s.weighted_sum(|i| wavenumber_sq(&grid, i).powi(order as i32))
        .sqrt()
}

/// Discrete `H^order` norm of a scalar field.
pub fn sobolev_norm(t: &Transform, field: &ScalarField, order: i32) -> Result<f64> {
    sobolev_norm_spectral(&t.forward(field)?, order)
}

/// Discrete `H^order` norm of a vector field (root-sum-square of components).
pub fn sobolev_norm_vector(t: &Transform, field: &VectorField, order: i32) -> Result<f64> {
    let mut sq = 0.0;
    for c in field.components() {
        sq += sobolev_norm(t, c, order)?.powi(2);
    }
    Ok(sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::from_vec(grid, data).unwrap()
    }

    #[test]
    fn constant_field_has_only_the_mean_mode() {
        for d in 1..=3 {
            let g = Grid::new(d, 8, 3.0).unwrap();
            let t = Transform::new(g);
            let s = t.forward(&ScalarField::constant(g, 2.5)).unwrap();
            assert!((s.mean() - Complex64::new(2.5, 0.0)).norm() < 1e-14);
            let rest: f64 = s.data()[1..].iter().map(|c| c.norm()).sum();
            assert!(rest < 1e-13, "d={d}: {rest}");
        }
    }

    #[test]
    fn single_sine_mode_gives_two_conjugate_coefficients() {
        let g = Grid::new(2, 16, 2.0).unwrap();
        let t = Transform::new(g);
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0] / 2.0).sin());
        let s = t.forward(&f).unwrap();
        let plus = s.index_of([1, 0, 0]).unwrap();
        let minus = s.index_of([-1, 0, 0]).unwrap();
        assert!((s.data()[plus] - Complex64::new(0.0, -0.5)).norm() < 1e-14);
        assert!((s.data()[minus] - Complex64::new(0.0, 0.5)).norm() < 1e-14);
        let others: f64 = s
            .data()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != plus && *i != minus)
            .map(|(_, c)| c.norm())
            .sum();
        assert!(others < 1e-13);
    }

    #[test]
    fn round_trip_and_plancherel_on_random_fields() {
        for d in 1..=3 {
            let g = Grid::new(d, 16, 1.7).unwrap();
            let t = Transform::new(g);
            let f = random_field(g, 7 + d as u64);
            let s = t.forward(&f).unwrap();
            let back = t.inverse(&s);
            let err = f
                .data()
                .iter()
                .zip(back.data())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-12 * f.max_abs(), "d={d} err={err}");
            let rel = (s.l2_norm() - f.l2_norm()).abs() / f.l2_norm();
            assert!(rel < 1e-12, "d={d} plancherel {rel}");
        }
    }

    #[test]
    fn forward_rejects_non_finite_input() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let mut f = ScalarField::zeros(g);
        f.data_mut()[5] = f64::NAN;
        match Transform::new(g).forward(&f) {
            Err(PensError::NonFinite { index, .. }) => assert_eq!(index, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gradient_of_resolved_sine_is_the_cosine() {
        let l = 3.0;
        let g = Grid::new(2, 16, l).unwrap();
        let t = Transform::new(g);
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0] / l).sin());
        let grad = gradient(&t.forward(&f).unwrap());
        let gx = t.inverse(&grad[0]);
        let gy = t.inverse(&grad[1]);
        for i in 0..g.len() {
            let x = g.position(i);
            let exact = 2.0 * PI / l * (2.0 * PI * x[0] / l).cos();
            assert!((gx.data()[i] - exact).abs() < 1e-12);
            assert!(gy.data()[i].abs() < 1e-12);
        }
        let zero = gradient(&t.forward(&ScalarField::constant(g, 4.0)).unwrap());
        assert!(zero.iter().all(|c| c.data().iter().all(|v| v.norm() == 0.0)));
    }

    #[test]
    fn gradient_twice_matches_laplacian_symbol() {
        let g = Grid::new(3, 8, 2.0).unwrap();
        let t = Transform::new(g);
        let s = dealias(&t.forward(&random_field(g, 3)).unwrap());
        let lap = laplacian(&s);
        let grad = gradient(&s);
        let twice = divergence(&grad);
        let err = lap
            .data()
            .iter()
            .zip(twice.data())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let scale = lap.data().iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * scale, "{err}");
    }

    #[test]
    fn leray_projection_of_single_mode() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        let mut v = vec![SpectralField::zeros(g); 3];
        let idx = v[0].index_of([1, 1, 0]).unwrap();
        v[0].data_mut()[idx] = Complex64::new(1.0, 0.0);
        let p = leray_project(&v);
        assert!((p[0].data()[idx] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((p[1].data()[idx] - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert_eq!(p[2].data()[idx], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn leray_kills_gradients_keeps_mean_and_is_idempotent() {
        let g = Grid::new(3, 8, 2.0).unwrap();
        let t = Transform::new(g);
        let phi = t.forward(&random_field(g, 11)).unwrap();
        let mut grad = gradient(&phi);
        for c in &mut grad {
            c.data_mut()[0] = Complex64::new(0.3, 0.0);
        }
        let p = leray_project(&grad);
        for c in &p {
            assert_eq!(c.data()[0], Complex64::new(0.3, 0.0));
            let rest = c.data()[1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(rest < 1e-13, "{rest}");
        }

        let v: Vec<_> = (0..3)
            .map(|a| t.forward(&random_field(g, 20 + a)).unwrap())
            .collect();
        let once = leray_project(&v);
        let twice = leray_project(&once);
        let div = divergence(&once);
        let scale = once[0].data().iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(div.data().iter().all(|c| c.norm() < 1e-12 * scale.max(1.0)));
        for (a, b) in once.iter().zip(&twice) {
            for (x, y) in a.data().iter().zip(b.data()) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dealias_removes_high_modes_only() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let t = Transform::new(g);
        let low = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).cos());
        let s = t.forward(&low).unwrap();
        let diff = dealias(&s)
            .data()
            .iter()
            .zip(s.data())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-15);
        let high = ScalarField::from_fn(g, |x| (2.0 * PI * 8.0 * x[0]).cos());
        let sh = dealias(&t.forward(&high).unwrap());
        assert!(sh.data().iter().all(|c| c.norm() == 0.0));
        let r = t.forward(&random_field(g, 5)).unwrap();
        assert!(dealias(&r).l2_norm() <= r.l2_norm());
    }

    #[test]
    fn sobolev_norms_of_a_sine() {
        let l = 2.5;
        let g = Grid::new(1, 32, l).unwrap();
        let t = Transform::new(g);
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0] / l).sin());
        let h0 = sobolev_norm(&t, &f, 0).unwrap();
        assert!((h0 - (l / 2.0).sqrt()).abs() < 1e-12);
        assert!((h0 - f.l2_norm()).abs() < 1e-12);
        let h1 = sobolev_norm(&t, &f, 1).unwrap();
        let expected = (l / 2.0) * (1.0 + (2.0 * PI / l).powi(2));
        assert!((h1 * h1 - expected).abs() < 1e-11 * expected);
        assert!(sobolev_norm(&t, &f, -1).is_err());
        assert_eq!(sobolev_norm(&t, &ScalarField::zeros(g), 3).unwrap(), 0.0);
    }
}
