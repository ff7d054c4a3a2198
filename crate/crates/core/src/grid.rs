//! Uniform grids, the unscaled Fourier transform `u^(xi) = ∫ u(x) e^{-i x xi} dx`,
//! weighted mixed norms, amalgam norms and empirical checks of the weighted
//! Young, sampling and amalgam convolution inequalities.

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::coeffs::{CoefficientArray, IndexSet};
use crate::error::{Error, Result};
use crate::fft::{fft_nd, ravel, unravel};
use crate::gabor::LatticeSpec;
use crate::par_map;
use crate::weights::WeightFunction;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Outermost-shell magnitude allowed relative to the maximum.
pub const ADEQUACY_TOL: f64 = 1e-10;
pub const DEFAULT_R: f64 = 12.0;
pub const DEFAULT_H: f64 = 1.0 / 64.0;

fn nodes_per_axis(h: f64, r: f64) -> Result<usize> {
    if !(h > 0.0 && r > 0.0) {
        return Err(Error::InvalidParameter(format!("need h > 0 and R > 0, got h={h}, R={r}")));
    }
    let n = (2.0 * r / h).round();
    if (n * h - 2.0 * r).abs() > 1e-9 * r || n < 2.0 || n as usize % 2 != 0 {
        return Err(Error::InvalidParameter(format!("2R/h must be an even integer, got {}", 2.0 * r / h)));
    }
    Ok(n as usize)
}

/// Complex samples on `[-R, R)^d` with spacing `h`, node `j` at `-R + j h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub d: usize,
    pub h: f64,
    pub r: f64,
    pub n: usize,
    pub values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(d: usize, h: f64, r: f64, values: Vec<Complex64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let n = nodes_per_axis(h, r)?;
        if values.len() != n.pow(d as u32) {
            return Err(Error::InvalidParameter(format!("expected {} samples, got {}", n.pow(d as u32), values.len())));
        }
        Ok(Self { d, h, r, n, values })
    }

    pub fn zeros(d: usize, h: f64, r: f64) -> Result<Self> {
        let n = nodes_per_axis(h, r)?;
        Self::new(d, h, r, vec![ZERO; n.pow(d as u32)])
    }

    pub fn from_fn(d: usize, h: f64, r: f64, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let mut out = Self::zeros(d, h, r)?;
        let mut x = vec![0.0; d];
        for i in 0..out.values.len() {
            out.point_into(i, &mut x);
            out.values[i] = f(&x);
        }
        Ok(out)
    }

    pub fn from_real_fn(d: usize, h: f64, r: f64, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::from_fn(d, h, r, |x| Complex64::new(f(x), 0.0))
    }

    pub fn zeros_like(&self) -> Self {
        Self { values: vec![ZERO; self.values.len()], ..self.clone() }
    }

    pub fn with_values(&self, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self { values, ..self.clone() }
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.n; self.d]
    }

    pub fn coord(&self, j: usize) -> f64 {
        -self.r + j as f64 * self.h
    }

    pub fn point_into(&self, flat: usize, out: &mut [f64]) {
        let mut f = flat;
        for slot in out.iter_mut().rev() {
            *slot = self.coord(f % self.n);
            f /= self.n;
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.d];
        self.point_into(flat, &mut x);
        x
    }

    pub fn cell(&self) -> f64 {
        self.h.powi(self.d as i32)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n && self.h == other.h && self.r == other.r
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(d={}, h={}, R={}) vs (d={}, h={}, R={})",
                self.d, self.h, self.r, other.d, other.h, other.r
            )))
        }
    }

    /// `h^d Σ f conj(g)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum::<Complex64>() * self.cell()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest magnitude on nodes touching the boundary of the box.
    pub fn boundary_max(&self) -> f64 {
        let shape = self.shape();
        let mut idx = vec![0; self.d];
        let mut m: f64 = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            unravel(i, &shape, &mut idx);
            if idx.iter().any(|&j| j == 0 || j == self.n - 1) {
                m = m.max(v.norm());
            }
        }
        m
    }

    pub fn is_adequate(&self) -> bool {
        self.boundary_max() <= ADEQUACY_TOL * self.max_abs()
    }

    pub fn scale(&self, a: Complex64) -> Self {
        self.with_values(self.values.iter().map(|v| v * a).collect())
    }

    /// `a self + b other` on a shared grid.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(u, v)| u * a + v * b).collect()))
    }

    /// Relative L² distance `|self - other| / |other|` (0 when both vanish).
    pub fn rel_error(&self, reference: &Self) -> f64 {
        let diff: f64 = self.values.iter().zip(&reference.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        let base: f64 = reference.values.iter().map(|v| v.norm_sqr()).sum();
        if base == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (diff / base).sqrt()
        }
    }

    /// Grid of the transform: spacing `pi/R`, half-extent `pi/h`, same node count.
    pub fn dual_grid(&self) -> (f64, f64) {
        (std::f64::consts::PI / self.r, std::f64::consts::PI / self.h)
    }

    fn checkerboard(&self, values: &mut [Complex64], extra: usize) {
        let shape = self.shape();
        let mut idx = vec![0; self.d];
        for (i, v) in values.iter_mut().enumerate() {
            unravel(i, &shape, &mut idx);
            let parity: usize = idx.iter().map(|&j| j + extra).sum();
            if parity % 2 == 1 {
                *v = -*v;
            }
        }
    }

    /// `u^(xi_m) = h^d Σ_j u_j e^{-i x_j xi_m}` on the dual grid, evaluated
    /// with one FFT. The warning flag reports an inadequate truncation.
    pub fn fourier_transform(&self) -> FourierResult {
        let mut data = self.values.clone();
        self.checkerboard(&mut data, 0);
        fft_nd(&mut data, &self.shape(), FftDirection::Forward);
        self.checkerboard(&mut data, self.n / 2);
        let cell = self.cell();
        for v in data.iter_mut() {
            *v *= cell;
        }
        let (hd, rd) = self.dual_grid();
        FourierResult {
            transform: SampledFunction { d: self.d, h: hd, r: rd, n: self.n, values: data },
            truncation_warning: !self.is_adequate(),
        }
    }

    /// Inverse of [`Self::fourier_transform`]; `self` lives on a dual grid
    /// and the result on the primal grid `(h, R) = (pi/R', pi/h')`.
    pub fn inverse_fourier_transform(&self) -> SampledFunction {
        let mut data = self.values.clone();
        self.checkerboard(&mut data, 0);
        fft_nd(&mut data, &self.shape(), FftDirection::Inverse);
        self.checkerboard(&mut data, self.n / 2);
        let (h, r) = (std::f64::consts::PI / self.r, std::f64::consts::PI / self.h);
        let scale = (h * self.n as f64).powi(-(self.d as i32));
        for v in data.iter_mut() {
            *v *= scale;
        }
        SampledFunction { d: self.d, h, r, n: self.n, values: data }
    }

    /// `f^(order)` by spectral differentiation (d = 1). Fourier modes below
    /// `1e-15` of the peak are dropped so that roundoff is not amplified.
    pub fn spectral_derivative(&self, order: u32) -> Result<Self> {
        if self.d != 1 {
            return Err(Error::InvalidParameter("spectral differentiation is implemented for d = 1".into()));
        }
        if order == 0 {
            return Ok(self.clone());
        }
        let mut ft = self.fourier_transform().transform;
        let floor = 1e-15 * ft.max_abs();
        for m in 0..ft.n {
            let xi = ft.coord(m);
            let v = &mut ft.values[m];
            *v = if v.norm() < floor { ZERO } else { *v * Complex64::new(0.0, xi).powu(order) };
        }
        Ok(ft.inverse_fourier_transform())
    }
}

#[derive(Clone, Debug)]
pub struct FourierResult {
    pub transform: SampledFunction,
    pub truncation_warning: bool,
}

/// Samples over the phase-space box `[-R_x, R_x)^d × [-R_xi, R_xi)^d`,
/// row-major with the `x` axes first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePlaneFunction {
    pub d: usize,
    pub hx: f64,
    pub rx: f64,
    pub hxi: f64,
    pub rxi: f64,
    pub nx: usize,
    pub nxi: usize,
    pub values: Vec<Complex64>,
}

impl PhasePlaneFunction {
    pub fn zeros(d: usize, hx: f64, rx: f64, hxi: f64, rxi: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let nx = nodes_per_axis(hx, rx)?;
        let nxi = nodes_per_axis(hxi, rxi)?;
        Ok(Self { d, hx, rx, hxi, rxi, nx, nxi, values: vec![ZERO; (nx * nxi).pow(d as u32)] })
    }

    /// Same spacing and extent on both halves of phase space.
    pub fn square(d: usize, h: f64, r: f64, f: impl Fn(&[f64], &[f64]) -> Complex64 + Sync) -> Result<Self> {
        Self::from_fn(d, h, r, h, r, f)
    }

    pub fn from_fn(
        d: usize,
        hx: f64,
        rx: f64,
        hxi: f64,
        rxi: f64,
        f: impl Fn(&[f64], &[f64]) -> Complex64 + Sync,
    ) -> Result<Self> {
        let mut out = Self::zeros(d, hx, rx, hxi, rxi)?;
        let cols = out.cols();
        let rows = par_map(out.rows(), |row| {
            let x = out.x_point(row);
            (0..cols).map(|col| f(&x, &out.xi_point(col))).collect::<Vec<_>>()
        });
        out.values = rows.into_iter().flatten().collect();
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.nx.pow(self.d as u32)
    }

    pub fn cols(&self) -> usize {
        self.nxi.pow(self.d as u32)
    }

    pub fn shape(&self) -> Vec<usize> {
        let mut s = vec![self.nx; self.d];
        s.extend(vec![self.nxi; self.d]);
        s
    }

    pub fn x_point(&self, row: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        let mut f = row;
        for slot in out.iter_mut().rev() {
            *slot = -self.rx + (f % self.nx) as f64 * self.hx;
            f /= self.nx;
        }
        out
    }

    pub fn xi_point(&self, col: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        let mut f = col;
        for slot in out.iter_mut().rev() {
            *slot = -self.rxi + (f % self.nxi) as f64 * self.hxi;
            f /= self.nxi;
        }
        out
    }

    /// `|(x, xi)|` for the node at `(row, col)`.
    pub fn radius(&self, row: usize, col: usize) -> f64 {
        let x = self.x_point(row);
        let xi = self.xi_point(col);
        x.iter().chain(&xi).map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.cols() + col]
    }

    pub fn cell(&self) -> (f64, f64) {
        (self.hx.powi(self.d as i32), self.hxi.powi(self.d as i32))
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.d == other.d
            && self.hx == other.hx
            && self.rx == other.rx
            && self.hxi == other.hxi
            && self.rxi == other.rxi
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch("phase-plane grids differ".into()))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn boundary_max(&self) -> f64 {
        let shape = self.shape();
        let mut idx = vec![0; shape.len()];
        let mut m: f64 = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            unravel(i, &shape, &mut idx);
            if idx.iter().zip(&shape).any(|(&j, &n)| j == 0 || j == n - 1) {
                m = m.max(v.norm());
            }
        }
        m
    }

    pub fn is_adequate(&self) -> bool {
        self.boundary_max() <= ADEQUACY_TOL * self.max_abs()
    }

    pub fn grid_info(&self) -> GridInfo {
        GridInfo { h: self.hx, r: self.rx }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixedNormSpec {
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub weight: WeightFunction,
}

impl MixedNormSpec {
    pub fn new(p: f64, q: f64, lambda: f64, weight: WeightFunction) -> Result<Self> {
        if !(p >= 1.0) || !(q >= 1.0) {
            return Err(Error::InvalidParameter(format!("need p, q in [1, inf], got p={p}, q={q}")));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be finite".into()));
        }
        Ok(Self { p, q, lambda, weight })
    }

    pub fn with(&self, p: f64, q: f64, lambda: f64) -> Self {
        Self { p, q, lambda, weight: self.weight.clone() }
    }

    fn log_weight(&self, radius: f64) -> Result<f64> {
        if self.lambda == 0.0 {
            return Ok(0.0);
        }
        Ok(self.lambda * self.weight.eval(radius)?)
    }
}

/// `ln Σ exp(v)` over the finite entries of `v`; `-inf` when empty.
pub(crate) fn log_sum_exp(v: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let m = v.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + v.into_iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Mixed norm of a `rows × cols` table given `ln(|F| m)` per entry: inner
/// `p`-sum over rows (measure `cell_x` each), outer `q`-sum over columns.
fn mixed_from_logs(log_terms: &[f64], rows: usize, cols: usize, p: f64, q: f64, cell_x: f64, cell_xi: f64) -> f64 {
    let inner: Vec<f64> = par_map(cols, |col| {
        let column = (0..rows).map(|row| log_terms[row * cols + col]);
        if p.is_infinite() {
            column.fold(f64::NEG_INFINITY, f64::max)
        } else {
            (log_sum_exp(column.map(|v| p * v)) + cell_x.ln()) / p
        }
    });
    let log_norm = if q.is_infinite() {
        inner.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        (log_sum_exp(inner.iter().map(|v| q * v)) + cell_xi.ln()) / q
    };
    log_norm.exp()
}

fn ln_abs(z: Complex64) -> f64 {
    let a = z.norm();
    if a == 0.0 {
        f64::NEG_INFINITY
    } else {
        a.ln()
    }
}

/// Riemann-sum evaluation of `|F|_{L^{p,q}_{m_lambda}}` with
/// `m_lambda(z) = exp(lambda omega(|z|))`; inner norm over `x`, outer over
/// `xi`. Returns `+inf` when the value leaves the float range.
pub fn mixed_norm(f: &PhasePlaneFunction, spec: &MixedNormSpec) -> Result<f64> {
    let (rows, cols) = (f.rows(), f.cols());
    let logs: Vec<Result<Vec<f64>>> = par_map(rows, |row| {
        (0..cols).map(|col| Ok(ln_abs(f.get(row, col)) + spec.log_weight(f.radius(row, col))?)).collect()
    });
    let logs: Vec<f64> = logs.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    let (cx, cxi) = f.cell();
    Ok(mixed_from_logs(&logs, rows, cols, spec.p, spec.q, cx, cxi))
}

/// Sequence of unit-cube maxima `a_{kn}` over half-open cubes
/// `(k, n) + [0,1)^{2d}`.
#[derive(Clone, Debug)]
pub struct CubeMaxima {
    pub d: usize,
    /// Integer cube corners per axis group: `-R_x .. R_x - 1`, `-R_xi .. R_xi - 1`.
    pub kx: usize,
    pub kxi: usize,
    pub rx: i64,
    pub rxi: i64,
    pub values: Vec<f64>,
}

impl CubeMaxima {
    pub fn rows(&self) -> usize {
        self.kx.pow(self.d as u32)
    }

    pub fn cols(&self) -> usize {
        self.kxi.pow(self.d as u32)
    }

    /// Integer corner `(k, n)` of the cube at `(row, col)`.
    pub fn corner(&self, row: usize, col: usize) -> Vec<i64> {
        let mut out = vec![0; 2 * self.d];
        let (mut r, mut c) = (row, col);
        for a in (0..self.d).rev() {
            out[a] = (r % self.kx) as i64 - self.rx;
            r /= self.kx;
            out[self.d + a] = (c % self.kxi) as i64 - self.rxi;
            c /= self.kxi;
        }
        out
    }
}

fn unit_steps(h: f64, r: f64) -> Result<(usize, i64)> {
    let per = (1.0 / h).round();
    if (per * h - 1.0).abs() > 1e-12 || per < 1.0 {
        return Err(Error::Alignment(format!("spacing {h} does not divide 1")));
    }
    if (r - r.round()).abs() > 1e-12 {
        return Err(Error::Alignment(format!("half-extent {r} is not an integer")));
    }
    Ok((per as usize, r.round() as i64))
}

pub fn cube_maxima(f: &PhasePlaneFunction) -> Result<CubeMaxima> {
    let (px, rx) = unit_steps(f.hx, f.rx)?;
    let (pxi, rxi) = unit_steps(f.hxi, f.rxi)?;
    let d = f.d;
    let (kx, kxi) = (2 * rx as usize, 2 * rxi as usize);
    let mut out = CubeMaxima { d, kx, kxi, rx, rxi, values: vec![0.0; (kx * kxi).pow(d as u32)] };
    let shape = f.shape();
    let cube_shape: Vec<usize> = (0..2 * d).map(|a| if a < d { kx } else { kxi }).collect();
    let mut idx = vec![0; 2 * d];
    let mut cidx = vec![0; 2 * d];
    for (i, v) in f.values.iter().enumerate() {
        unravel(i, &shape, &mut idx);
        for a in 0..2 * d {
            cidx[a] = idx[a] / if a < d { px } else { pxi };
        }
        let c = ravel(&cidx, &cube_shape);
        out.values[c] = out.values[c].max(v.norm());
    }
    Ok(out)
}

/// `|F|_{W(L^{p,q}_{m_lambda})} = |a|_{l^{p,q}_{m_lambda}}` with
/// `m_lambda(k, n) = exp(lambda omega(|(k, n)|))`.
pub fn amalgam_norm(f: &PhasePlaneFunction, spec: &MixedNormSpec) -> Result<f64> {
    let cubes = cube_maxima(f)?;
    sequence_norm_cubes(&cubes, spec)
}

fn sequence_norm_cubes(cubes: &CubeMaxima, spec: &MixedNormSpec) -> Result<f64> {
    let (rows, cols) = (cubes.rows(), cubes.cols());
    let mut logs = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        for col in 0..cols {
            let a = cubes.values[row * cols + col];
            let corner = cubes.corner(row, col);
            let radius = corner.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
            logs.push(if a == 0.0 { f64::NEG_INFINITY } else { a.ln() } + spec.log_weight(radius)?);
        }
    }
    Ok(mixed_from_logs(&logs, rows, cols, spec.p, spec.q, 1.0, 1.0))
}

/// `(F * G)(z) = ∫ F(z - w) G(w) dw` on the common grid, by zero-padded FFT.
pub fn convolve(f: &PhasePlaneFunction, g: &PhasePlaneFunction) -> Result<PhasePlaneFunction> {
    f.check_same_grid(g)?;
    let shape = f.shape();
    let padded: Vec<usize> = shape.iter().map(|&n| 2 * n).collect();
    let total: usize = padded.iter().product();
    let embed = |src: &PhasePlaneFunction| {
        let mut buf = vec![ZERO; total];
        let mut idx = vec![0; shape.len()];
        for (i, v) in src.values.iter().enumerate() {
            unravel(i, &shape, &mut idx);
            buf[ravel(&idx, &padded)] = *v;
        }
        fft_nd(&mut buf, &padded, FftDirection::Forward);
        buf
    };
    let fa = embed(f);
    let ga = embed(g);
    let mut prod: Vec<Complex64> = fa.iter().zip(&ga).map(|(a, b)| a * b).collect();
    fft_nd(&mut prod, &padded, FftDirection::Inverse);
    let (cx, cxi) = f.cell();
    let scale = cx * cxi / total as f64;
    let mut out = f.clone();
    let mut idx = vec![0; shape.len()];
    for i in 0..out.values.len() {
        unravel(i, &shape, &mut idx);
        for (j, &n) in idx.iter_mut().zip(&shape) {
            *j += n / 2;
        }
        out.values[i] = prod[ravel(&idx, &padded)] * scale;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub h: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

/// Both sides of an inequality with an unspecified constant, and their ratio.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub grid: GridInfo,
}

impl InequalityReport {
    fn from_sides(lhs: f64, rhs: f64, grid: GridInfo) -> Self {
        let constant = lhs / rhs;
        let diagnostic = if !lhs.is_finite() || !rhs.is_finite() {
            Some("norm overflow: the weighted function does not decay on this grid".to_string())
        } else if rhs == 0.0 {
            Some("right-hand side vanishes".to_string())
        } else {
            None
        };
        let pass = diagnostic.is_none() && constant.is_finite();
        Self { lhs, rhs, constant, pass, diagnostic, grid }
    }
}

fn certified_l(w: &WeightFunction) -> Result<f64> {
    w.l().ok_or_else(|| Error::Precondition("weight has no certified (alpha) constant L".into()))
}

/// Exponents `(mu, nu)` on the right of the weighted Young inequality.
pub fn young_exponents(lambda: f64, l: f64) -> (f64, f64) {
    if lambda >= 0.0 {
        (lambda * l, lambda * l)
    } else {
        (lambda / l, lambda.abs())
    }
}

/// `|F*G|_{L^{p,q}_{m_lambda}}` against
/// `|F|_{L^{p,q}_{m_mu}} |G|_{L^1_{m_nu}}`.
pub fn verify_young(f: &PhasePlaneFunction, g: &PhasePlaneFunction, spec: &MixedNormSpec) -> Result<InequalityReport> {
    let l = certified_l(&spec.weight)?;
    let (mu, nu) = young_exponents(spec.lambda, l);
    let conv = convolve(f, g)?;
    let lhs = mixed_norm(&conv, spec)?;
    let rf = mixed_norm(f, &spec.with(spec.p, spec.q, mu))?;
    let rg = mixed_norm(g, &spec.with(1.0, 1.0, nu))?;
    Ok(InequalityReport::from_sides(lhs, rf * rg, f.grid_info()))
}

/// `|F*G|_{W(L^inf_{m_lambda})}` against
/// `|F|_{L^inf_{m_{lambda L}}} |G|_{L^1_{m_{lambda L^2}}}`; `lambda = 0` is
/// accepted as the classical limit.
pub fn verify_amalgam_conv(
    f: &PhasePlaneFunction,
    g: &PhasePlaneFunction,
    lambda: f64,
    weight: &WeightFunction,
) -> Result<InequalityReport> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("amalgam convolution needs lambda >= 0, got {lambda}")));
    }
    let l = certified_l(weight)?;
    let inf = f64::INFINITY;
    let spec = MixedNormSpec::new(inf, inf, lambda, weight.clone())?;
    let lhs = amalgam_norm(&convolve(f, g)?, &spec)?;
    let rf = mixed_norm(f, &spec.with(inf, inf, lambda * l))?;
    let rg = mixed_norm(g, &spec.with(1.0, 1.0, lambda * l * l))?;
    Ok(InequalityReport::from_sides(lhs, rf * rg, f.grid_info()))
}

#[derive(Clone, Debug)]
pub struct LatticeSamples {
    pub coefficients: CoefficientArray,
    /// Some lattice point fell between grid nodes and was rounded.
    pub nearest_node: bool,
}

fn node_index(coord: f64, h: f64, r: f64, n: usize) -> Result<(usize, bool)> {
    let pos = (coord + r) / h;
    let j = pos.round();
    if j < 0.0 || j > (n - 1) as f64 {
        return Err(Error::LatticeExtent(format!("point {coord} outside [-{r}, {r})")));
    }
    Ok((j as usize, (pos - j).abs() > 1e-9))
}

/// Samples `F(alpha k, beta n)` for `|k|_inf <= K`, `|n|_inf <= N`.
pub fn restrict_to_lattice(f: &PhasePlaneFunction, lattice: &LatticeSpec) -> Result<LatticeSamples> {
    if lattice.d != f.d {
        return Err(Error::GridMismatch(format!("lattice d={} vs grid d={}", lattice.d, f.d)));
    }
    let index = lattice.index_set();
    let d = f.d;
    let mut nearest = false;
    let mut values = Vec::with_capacity(index.len());
    for i in 0..index.len() {
        let pt = index.point(i);
        let (mut row, mut col) = (0, 0);
        for a in 0..d {
            let (jx, fx) = node_index(pt[a], f.hx, f.rx, f.nx)?;
            let (jxi, fxi) = node_index(pt[d + a], f.hxi, f.rxi, f.nxi)?;
            nearest |= fx || fxi;
            row = row * f.nx + jx;
            col = col * f.nxi + jxi;
        }
        values.push(f.get(row, col));
    }
    Ok(LatticeSamples { coefficients: CoefficientArray::new(index, values)?, nearest_node: nearest })
}

/// `|c|_{l^{p,q}_{m~_lambda}}` with `m~_lambda(k, n) = m_lambda(alpha k, beta n)`;
/// inner sum over `k`, outer over `n`.
pub fn lattice_sequence_norm(c: &CoefficientArray, spec: &MixedNormSpec) -> Result<f64> {
    let IndexSet::Lattice { d, k_max, n_max, .. } = c.index else {
        return Err(Error::InvalidParameter("lattice-indexed coefficients required".into()));
    };
    let rows = (2 * k_max + 1).pow(d as u32);
    let cols = (2 * n_max + 1).pow(d as u32);
    let mut logs = Vec::with_capacity(rows * cols);
    for (i, v) in c.values.iter().enumerate() {
        let radius = c.index.point(i).iter().map(|x| x * x).sum::<f64>().sqrt();
        logs.push(ln_abs(*v) + spec.log_weight(radius)?);
    }
    Ok(mixed_from_logs(&logs, rows, cols, spec.p, spec.q, 1.0, 1.0))
}

/// Sampled `l^{p,q}_{m~_lambda}` norm against `|F|_{W(L^{p,q}_{m_{lambda L}})}`.
pub fn verify_sampling(f: &PhasePlaneFunction, lattice: &LatticeSpec, spec: &MixedNormSpec) -> Result<InequalityReport> {
    let l = certified_l(&spec.weight)?;
    let samples = restrict_to_lattice(f, lattice)?;
    let lhs = lattice_sequence_norm(&samples.coefficients, spec)?;
    let lam = if spec.lambda >= 0.0 { spec.lambda * l } else { spec.lambda / l };
    let rhs = amalgam_norm(f, &spec.with(spec.p, spec.q, lam))?;
    let mut report = InequalityReport::from_sides(lhs, rhs, f.grid_info());
    if samples.nearest_node {
        report.diagnostic = Some("lattice sampled at nearest grid nodes".into());
    }
    Ok(report)
}

/// Random phase-space Gaussian mixture `Σ c_j exp(-|z - z_j|^2 / (2 s_j^2))`
/// with one to three terms, centres in `[-1.5, 1.5]^{2d}`, widths in
/// `[0.4, 1]` and unit-modulus complex amplitudes.
pub fn random_gaussian_mixture<R: Rng>(rng: &mut R, d: usize, h: f64, r: f64) -> Result<PhasePlaneFunction> {
    let terms = rng.random_range(1..=3);
    let comps: Vec<(Vec<f64>, f64, Complex64)> = (0..terms)
        .map(|_| {
            let centre = (0..2 * d).map(|_| rng.random_range(-1.5..1.5)).collect();
            let width = rng.random_range(0.4..1.0);
            let amp = Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..std::f64::consts::TAU));
            (centre, width, amp)
        })
        .collect();
    PhasePlaneFunction::square(d, h, r, |x, xi| {
        comps
            .iter()
            .map(|(c, s, a)| {
                let d2: f64 = x.iter().chain(xi).zip(c).map(|(u, v)| (u - v) * (u - v)).sum();
                a * (-d2 / (2.0 * s * s)).exp()
            })
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn gauss1() -> SampledFunction {
        SampledFunction::from_real_fn(1, DEFAULT_H, DEFAULT_R, |x| (-x[0] * x[0]).exp()).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SampledFunction::zeros(1, 0.3, 1.0).is_err());
        assert!(SampledFunction::zeros(0, 0.5, 1.0).is_err());
        assert_eq!(SampledFunction::zeros(1, DEFAULT_H, DEFAULT_R).unwrap().n, 1536);
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let ft = gauss1().fourier_transform();
        assert!(!ft.truncation_warning);
        let t = ft.transform;
        let mut worst: f64 = 0.0;
        for m in 0..t.n {
            let xi = t.coord(m);
            if xi.abs() <= 5.0 {
                let exact = PI.sqrt() * (-xi * xi / 4.0).exp();
                worst = worst.max((t.values[m] - c(exact)).norm() / exact);
            }
        }
        assert!(worst <= 1e-8, "{worst}");
    }

    #[test]
    fn shifted_gaussian_picks_up_phase() {
        let f = SampledFunction::from_real_fn(1, DEFAULT_H, DEFAULT_R, |x| (-(x[0] - 1.5).powi(2)).exp()).unwrap();
        let t = f.fourier_transform().transform;
        for m in (0..t.n).step_by(37) {
            let xi = t.coord(m);
            let exact = Complex64::from_polar(PI.sqrt() * (-xi * xi / 4.0).exp(), -1.5 * xi);
            assert!((t.values[m] - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_convention() {
        let f = SampledFunction::from_fn(1, DEFAULT_H, DEFAULT_R, |x| {
            Complex64::new((-x[0] * x[0]).exp(), x[0] * (-0.5 * x[0] * x[0]).exp())
        })
        .unwrap();
        let t = f.fourier_transform().transform;
        let lhs = t.l2_norm().powi(2);
        let rhs = 2.0 * PI * f.l2_norm().powi(2);
        assert!((lhs / rhs - 1.0).abs() < 1e-8);
    }

    #[test]
    fn transform_is_linear_and_invertible() {
        let f = gauss1();
        let g = SampledFunction::from_fn(1, DEFAULT_H, DEFAULT_R, |x| Complex64::new(0.0, (-(x[0] + 1.0).powi(2)).exp())).unwrap();
        let (a, b) = (Complex64::new(2.0, -1.0), Complex64::new(0.5, 3.0));
        let lhs = f.combine(a, &g, b).unwrap().fourier_transform().transform;
        let rhs = f.fourier_transform().transform.combine(a, &g.fourier_transform().transform, b).unwrap();
        for (u, v) in lhs.values.iter().zip(&rhs.values) {
            assert!((u - v).norm() <= 1e-14 * (1.0 + u.norm()));
        }
        let back = lhs.inverse_fourier_transform();
        assert!(back.same_grid(&f));
        assert!(back.rel_error(&f.combine(a, &g, b).unwrap()) < 1e-13);
    }

    #[test]
    fn transform_in_two_dimensions() {
        let f = SampledFunction::from_real_fn(2, 0.125, 8.0, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp()).unwrap();
        let t = f.fourier_transform().transform;
        for i in (0..t.values.len()).step_by(97) {
            let xi = t.point(i);
            let exact = PI / 2f64.sqrt() * (-xi[0] * xi[0] / 4.0 - xi[1] * xi[1] / 8.0).exp();
            assert!((t.values[i] - c(exact)).norm() < 1e-10);
        }
    }

    #[test]
    fn spectral_derivative_of_gaussian() {
        let f = gauss1();
        let d2 = f.spectral_derivative(2).unwrap();
        for j in (0..f.n).step_by(41) {
            let x = f.coord(j);
            let exact = (4.0 * x * x - 2.0) * (-x * x).exp();
            assert!((d2.values[j] - c(exact)).norm() < 1e-10, "{x}");
        }
    }

    fn indicator(h: f64, r: f64) -> PhasePlaneFunction {
        PhasePlaneFunction::square(1, h, r, |x, xi| {
            c(if (0.0..1.0).contains(&x[0]) && (0.0..1.0).contains(&xi[0]) { 1.0 } else { 0.0 })
        })
        .unwrap()
    }

    fn spec(p: f64, q: f64, lambda: f64) -> MixedNormSpec {
        MixedNormSpec::new(p, q, lambda, WeightFunction::log_power(1.0).unwrap()).unwrap()
    }

    #[test]
    fn mixed_norm_examples() {
        let ind = indicator(1.0 / 16.0, 4.0);
        assert!((mixed_norm(&ind, &spec(2.0, 2.0, 0.0)).unwrap() - 1.0).abs() < 1e-12);

        let g = PhasePlaneFunction::square(1, 1.0 / 32.0, 8.0, |x, xi| c((-(x[0] * x[0] + xi[0] * xi[0])).exp())).unwrap();
        assert!((mixed_norm(&g, &spec(1.0, 1.0, 0.0)).unwrap() - PI).abs() < 1e-6);

        let plain = (g.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.hx * g.hxi).sqrt();
        assert!((mixed_norm(&g, &spec(2.0, 2.0, 0.0)).unwrap() / plain - 1.0).abs() < 1e-13);
    }

    #[test]
    fn mixed_norm_orders_inner_and_outer() {
        // F(x, xi) = a(x) b(xi) separates: |F|_{p,q} = |a|_p |b|_q.
        let f = PhasePlaneFunction::square(1, 0.125, 4.0, |x, xi| c((-x[0].abs()).exp() * (-(xi[0] * xi[0])).exp())).unwrap();
        let a_inf = 1.0;
        let b1: f64 = (0..64).map(|j| (-(-4.0 + j as f64 * 0.125f64).powi(2)).exp() * 0.125).sum();
        let v = mixed_norm(&f, &spec(f64::INFINITY, 1.0, 0.0)).unwrap();
        assert!((v - a_inf * b1).abs() < 1e-12);
    }

    #[test]
    fn mixed_norm_overflow_sentinel() {
        let f = PhasePlaneFunction::square(1, 0.5, 4.0, |_, _| c(1.0)).unwrap();
        assert_eq!(mixed_norm(&f, &spec(1.0, 1.0, 400.0)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn amalgam_examples() {
        let ind = indicator(1.0 / 16.0, 4.0);
        let inf = f64::INFINITY;
        assert_eq!(amalgam_norm(&ind, &spec(inf, inf, 0.0)).unwrap(), 1.0);
        let cubes = cube_maxima(&ind).unwrap();
        assert_eq!(cubes.values.iter().filter(|&&v| v > 0.0).count(), 1);

        // F = 1, lambda = -1, p = q = 1: direct partial-sum oracle.
        let one = PhasePlaneFunction::square(1, 0.25, 3.0, |_, _| c(1.0)).unwrap();
        let oracle: f64 = (-3..3)
            .flat_map(|k| (-3..3).map(move |n| 1.0 / (1.0 + ((k * k + n * n) as f64).sqrt())))
            .sum();
        assert!((amalgam_norm(&one, &spec(1.0, 1.0, -1.0)).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn amalgam_matches_brute_force_scan() {
        let g = PhasePlaneFunction::square(1, 0.125, 6.0, |x, xi| c((-(x[0] * x[0] + xi[0] * xi[0])).exp())).unwrap();
        let inf = f64::INFINITY;
        let got = amalgam_norm(&g, &spec(inf, inf, 1.0)).unwrap();
        let mut best: f64 = 0.0;
        for k in -6i32..6 {
            for n in -6i32..6 {
                let mut a: f64 = 0.0;
                for row in 0..g.nx {
                    for col in 0..g.nxi {
                        let (x, xi) = (g.x_point(row)[0], g.xi_point(col)[0]);
                        if x >= k as f64 && x < (k + 1) as f64 && xi >= n as f64 && xi < (n + 1) as f64 {
                            a = a.max(g.get(row, col).norm());
                        }
                    }
                }
                best = best.max(a * (1.0 + ((k * k + n * n) as f64).sqrt()));
            }
        }
        assert!((got - best).abs() < 1e-14);
        assert!(got >= mixed_norm(&g, &spec(inf, inf, 0.0)).unwrap());
    }

    #[test]
    fn amalgam_requires_alignment() {
        let f = PhasePlaneFunction::square(1, 0.3, 1.5, |_, _| c(1.0)).unwrap();
        assert!(matches!(amalgam_norm(&f, &spec(1.0, 1.0, 0.0)), Err(Error::Alignment(_))));
    }

    fn direct_convolution(f: &PhasePlaneFunction, g: &PhasePlaneFunction) -> Vec<Complex64> {
        let (nx, nxi) = (f.nx as i64, f.nxi as i64);
        let mut out = vec![ZERO; f.values.len()];
        for i in 0..nx {
            for j in 0..nxi {
                let mut acc = ZERO;
                for a in 0..nx {
                    for b in 0..nxi {
                        let (u, v) = (i - a + nx / 2, j - b + nxi / 2);
                        if (0..nx).contains(&u) && (0..nxi).contains(&v) {
                            acc += f.values[(u * nxi + v) as usize] * g.values[(a * nxi + b) as usize];
                        }
                    }
                }
                out[(i * nxi + j) as usize] = acc * f.hx * f.hxi;
            }
        }
        out
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let ind = indicator(0.25, 4.0);
        assert_eq!(ind.nx, 32);
        let fast = convolve(&ind, &ind).unwrap();
        let slow = direct_convolution(&ind, &ind);
        for (u, v) in fast.values.iter().zip(&slow) {
            assert!((u - v).norm() < 1e-12);
        }
        // The discrete tent of half-open unit indicators peaks at 1 - h.
        let row = ((1.0 - 0.25 + 4.0) / 0.25) as usize;
        assert!((fast.get(row, row).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_convolution_closed_form() {
        // e^{-|z|^2/a} * e^{-|z|^2/b} = (pi a b/(a+b)) e^{-|z|^2/(a+b)} in 2 dims.
        let (a, b) = (1.0, 0.5);
        let h = 1.0 / 16.0;
        let f = PhasePlaneFunction::square(1, h, 8.0, |x, xi| c((-(x[0] * x[0] + xi[0] * xi[0]) / a).exp())).unwrap();
        let g = PhasePlaneFunction::square(1, h, 8.0, |x, xi| c((-(x[0] * x[0] + xi[0] * xi[0]) / b).exp())).unwrap();
        let fg = convolve(&f, &g).unwrap();
        let gf = convolve(&g, &f).unwrap();
        let peak = PI * a * b / (a + b);
        let mut worst: f64 = 0.0;
        let mut asym: f64 = 0.0;
        for row in 0..fg.nx {
            for col in 0..fg.nxi {
                let r2 = fg.radius(row, col).powi(2);
                let exact = peak * (-r2 / (a + b)).exp();
                if exact > 1e-3 * peak {
                    worst = worst.max((fg.get(row, col).re - exact).abs() / exact);
                }
                asym = asym.max((fg.get(row, col) - gf.get(row, col)).norm());
            }
        }
        assert!(worst < 1e-6, "{worst}");
        assert!(asym <= 1e-10 * peak);
    }

    #[test]
    fn convolution_with_narrow_gaussian_is_near_identity() {
        let h = 1.0 / 32.0;
        let eps: f64 = 0.02;
        let f = PhasePlaneFunction::square(1, h, 6.0, |x, xi| c((-(x[0] * x[0] + 0.5 * xi[0] * xi[0])).exp())).unwrap();
        let g = PhasePlaneFunction::square(1, h, 6.0, |x, xi| {
            c((-(x[0] * x[0] + xi[0] * xi[0]) / eps).exp() / (PI * eps))
        })
        .unwrap();
        let fg = convolve(&f, &g).unwrap();
        let err = fg.values.iter().zip(&f.values).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        // Smoothing error is about (eps/4) |Laplacian F| <= 0.75 eps.
        assert!(err <= eps, "{err}");
    }

    #[test]
    fn convolution_rejects_grid_mismatch() {
        let a = indicator(0.25, 4.0);
        let b = indicator(0.125, 4.0);
        assert!(matches!(convolve(&a, &b), Err(Error::GridMismatch(_))));
    }

    fn certified() -> WeightFunction {
        let mut w = WeightFunction::log_power(1.0).unwrap();
        w.certify_alpha(&crate::weights::default_grid(1e6)).unwrap();
        w
    }

    fn gaussian_pair(h: f64) -> (PhasePlaneFunction, PhasePlaneFunction) {
        let f = PhasePlaneFunction::square(1, h, 8.0, |x, xi| c((-((x[0] - 0.5).powi(2) + xi[0] * xi[0])).exp())).unwrap();
        let g = PhasePlaneFunction::square(1, h, 8.0, |x, xi| c((-(2.0 * x[0] * x[0] + (xi[0] + 0.5).powi(2))).exp())).unwrap();
        (f, g)
    }

    #[test]
    fn young_examples() {
        let w = certified();
        let (f, g) = gaussian_pair(0.125);
        let classical = verify_young(&f, &g, &MixedNormSpec::new(1.0, 1.0, 0.0, w.clone()).unwrap()).unwrap();
        assert!(classical.pass && classical.constant <= 1.0 + 1e-6);
        for lambda in [1.0, -1.0] {
            let r = verify_young(&f, &g, &MixedNormSpec::new(2.0, 2.0, lambda, w.clone()).unwrap()).unwrap();
            assert!(r.pass && r.constant.is_finite() && r.constant > 0.0);
        }
        assert_eq!(young_exponents(-1.0, 1.0), (-1.0, 1.0));
    }

    #[test]
    fn young_requires_certified_l() {
        let (f, g) = gaussian_pair(0.25);
        let spec = MixedNormSpec::new(1.0, 1.0, 0.0, WeightFunction::log_power(1.0).unwrap()).unwrap();
        assert!(matches!(verify_young(&f, &g, &spec), Err(Error::Precondition(_))));
    }

    #[test]
    fn amalgam_convolution_examples() {
        let w = certified();
        let (f, g) = gaussian_pair(0.125);
        let r1 = verify_amalgam_conv(&f, &g, 1.0, &w).unwrap();
        assert!(r1.pass);
        let r0 = verify_amalgam_conv(&f, &g, 0.0, &w).unwrap();
        let small = verify_amalgam_conv(&f, &g, 1e-3, &w).unwrap();
        assert!((small.constant / r0.constant - 1.0).abs() < 0.1);
        assert!(verify_amalgam_conv(&f, &g, -1.0, &w).is_err());
    }

    #[test]
    fn amalgam_convolution_of_compact_cubes() {
        let w = certified();
        let ind = indicator(0.125, 4.0);
        let conv = convolve(&ind, &ind).unwrap();
        let cubes = cube_maxima(&conv).unwrap();
        let inf = f64::INFINITY;
        let lhs = amalgam_norm(&conv, &MixedNormSpec::new(inf, inf, 1.0, w.clone()).unwrap()).unwrap();
        let scan = (0..cubes.rows())
            .flat_map(|row| (0..cubes.cols()).map(move |col| (row, col)))
            .map(|(row, col)| {
                let k = cubes.corner(row, col);
                cubes.values[row * cubes.cols() + col] * (1.0 + ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt())
            })
            .fold(0.0, f64::max);
        assert!((lhs - scan).abs() < 1e-12);
        assert!(verify_amalgam_conv(&ind, &ind, 1.0, &w).unwrap().pass);
    }

    #[test]
    fn restriction_examples() {
        let ind = indicator(0.125, 4.0);
        let lat = LatticeSpec::new(1.0, 1.0, 1, 3, 3).unwrap();
        let s = restrict_to_lattice(&ind, &lat).unwrap();
        assert!(!s.nearest_node);
        assert_eq!(s.coefficients.values.iter().filter(|v| v.norm() > 0.0).count(), 1);
        assert_eq!(s.coefficients.get(&[0, 0]).unwrap(), c(1.0));

        let too_far = LatticeSpec::new(1.0, 1.0, 1, 5, 3).unwrap();
        assert!(matches!(restrict_to_lattice(&ind, &too_far), Err(Error::LatticeExtent(_))));

        let off = LatticeSpec::new(0.3, 1.0, 1, 2, 2).unwrap();
        assert!(restrict_to_lattice(&ind, &off).unwrap().nearest_node);
    }

    #[test]
    fn sampling_norm_grows_with_density() {
        let w = certified();
        let (f, _) = gaussian_pair(0.125);
        let s = MixedNormSpec::new(1.0, 1.0, 0.0, w.clone()).unwrap();
        let coarse = restrict_to_lattice(&f, &LatticeSpec::new(1.0, 1.0, 1, 6, 6).unwrap()).unwrap();
        let fine = restrict_to_lattice(&f, &LatticeSpec::new(0.5, 0.5, 1, 12, 12).unwrap()).unwrap();
        assert_eq!(fine.coefficients.values.len(), 25 * 25);
        let a = lattice_sequence_norm(&coarse.coefficients, &s).unwrap();
        let b = lattice_sequence_norm(&fine.coefficients, &s).unwrap();
        assert!(b > a);
        let inf = f64::INFINITY;
        let r = verify_sampling(&f, &LatticeSpec::new(1.0, 1.0, 1, 6, 6).unwrap(), &s.with(inf, inf, 1.0)).unwrap();
        assert!(r.pass && r.constant <= 1.0 + 1e-12);
    }
}
