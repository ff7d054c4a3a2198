//! Short-time Fourier transform, Gabor analysis and synthesis on a lattice
//! `alpha0 Z^d × beta0 Z^d`, the frame operator, frame bound estimates and
//! the canonical dual window.
//!
//! Conventions: `Pi(x, xi) f(y) = e^{i y xi} f(y - x)` and
//! `V_phi f(x, xi) = ∫ f(y) conj(phi(y - x)) e^{-i y xi} dy`. Translations
//! move samples by whole grid nodes and fill with zeros; lattice points
//! between nodes are rounded to the nearest node and flagged.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cg::{conjugate_gradient, CgOptions, LinearOperator};
use crate::coeffs::{CoefficientArray, IndexSet};
use crate::error::{Error, Result};
use crate::fft::unravel;
use crate::grid::SampledFunction;
use crate::komatsu::hermite::hermite_function;
use crate::par_map;
use crate::weights::WeightFunction;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const DEFAULT_TRUNCATION: usize = 32;
pub const DEFAULT_CG_TOL: f64 = 1e-9;
/// Dimension of the Hermite subspace used to refine frame bounds.
pub const GALERKIN_DIM: usize = 40;
const POWER_ROUNDS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub alpha0: f64,
    pub beta0: f64,
    pub d: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
}

impl LatticeSpec {
    pub fn new(alpha0: f64, beta0: f64, d: usize, k: usize, n: usize) -> Result<Self> {
        let spec = Self { alpha0, beta0, d, k, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) || !(self.beta0 > 0.0 && self.beta0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lattice needs alpha0 > 0 and beta0 > 0, got ({}, {})",
                self.alpha0, self.beta0
            )));
        }
        if self.d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        Ok(())
    }

    /// Gaussian windows generate frames only for `alpha0 beta0 < 2 pi`.
    pub fn no_frame_guarantee(&self) -> bool {
        self.alpha0 * self.beta0 >= std::f64::consts::TAU * (1.0 - 1e-12)
    }

    pub fn index_set(&self) -> IndexSet {
        IndexSet::Lattice { alpha: self.alpha0, beta: self.beta0, d: self.d, k_max: self.k, n_max: self.n }
    }

    pub fn with_truncation(&self, k: usize, n: usize) -> Self {
        Self { k, n, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Gaussian,
    Samples,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SystemFlags {
    pub no_frame_guarantee: bool,
    /// Some `alpha0 k` is not a grid node and was rounded.
    pub off_grid_shift: bool,
    /// `K alpha0 > R` or `N beta0 > pi/h`.
    pub lattice_exceeds_grid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub a_est: f64,
    pub b_est: f64,
    pub failure_suspected: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualWindow {
    pub window: SampledFunction,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
struct Plan {
    /// Node shift of `alpha0 k` for `k = -K..=K`.
    shifts: Vec<i64>,
    /// `e^{-i y_j beta0 n}`, rows `n = -N..=N`, columns `j`.
    fwd: Vec<Complex64>,
    /// `e^{+i y_j beta0 n}`, rows `j`, columns `n`.
    inv: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct GaborSystem {
    pub lattice: LatticeSpec,
    pub window: SampledFunction,
    pub kind: WindowKind,
    pub dual: Option<DualWindow>,
    pub frame_bounds: Option<FrameBounds>,
    pub flags: SystemFlags,
    plan: Plan,
}

impl GaborSystem {
    pub fn new(lattice: LatticeSpec, window: SampledFunction, kind: WindowKind) -> Result<Self> {
        lattice.validate()?;
        if lattice.d != window.d {
            return Err(Error::GridMismatch(format!("lattice d={} vs window d={}", lattice.d, window.d)));
        }
        let (h, r, n) = (window.h, window.r, window.n);
        let mut flags = SystemFlags {
            no_frame_guarantee: lattice.no_frame_guarantee(),
            ..SystemFlags::default()
        };
        let shifts: Vec<i64> = (-(lattice.k as i64)..=lattice.k as i64)
            .map(|k| {
                let pos = lattice.alpha0 * k as f64 / h;
                if (pos - pos.round()).abs() > 1e-9 {
                    flags.off_grid_shift = true;
                }
                pos.round() as i64
            })
            .collect();
        let xi_limit = std::f64::consts::PI / h;
        flags.lattice_exceeds_grid = lattice.k as f64 * lattice.alpha0 > r || lattice.n as f64 * lattice.beta0 > xi_limit;
        let rows = 2 * lattice.n + 1;
        let mut fwd = vec![ZERO; rows * n];
        let mut inv = vec![ZERO; n * rows];
        for (m, nn) in (-(lattice.n as i64)..=lattice.n as i64).enumerate() {
            for j in 0..n {
                let e = Complex64::from_polar(1.0, -window.coord(j) * lattice.beta0 * nn as f64);
                fwd[m * n + j] = e;
                inv[j * rows + m] = e.conj();
            }
        }
        Ok(Self { lattice, window, kind, dual: None, frame_bounds: None, flags, plan: Plan { shifts, fwd, inv } })
    }

    /// System with the window `e^{-|x|^2}` on `[-R, R)^d`.
    pub fn gaussian(lattice: LatticeSpec, h: f64, r: f64) -> Result<Self> {
        let window = SampledFunction::from_real_fn(lattice.d, h, r, |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp())?;
        Self::new(lattice, window, WindowKind::Gaussian)
    }

    /// Frames are suspect when the bound estimate collapses or a Gaussian
    /// window sits at or beyond critical density.
    pub fn frame_failure_suspected(&self) -> bool {
        let gaussian_critical = self.kind == WindowKind::Gaussian && self.flags.no_frame_guarantee;
        let collapsed = self.frame_bounds.as_ref().map(|b| b.failure_suspected).unwrap_or(false);
        gaussian_critical || collapsed
    }

    fn check_grid(&self, f: &SampledFunction) -> Result<()> {
        self.window.check_same_grid(f)
    }

    fn k_count(&self) -> usize {
        (2 * self.lattice.k + 1).pow(self.lattice.d as u32)
    }

    fn n_count(&self) -> usize {
        (2 * self.lattice.n + 1).pow(self.lattice.d as u32)
    }

    /// Per-axis node shifts for the flat k index.
    fn shift_of(&self, kflat: usize) -> Vec<i64> {
        let width = 2 * self.lattice.k + 1;
        let mut out = vec![0; self.lattice.d];
        let mut f = kflat;
        for slot in out.iter_mut().rev() {
            *slot = self.plan.shifts[f % width];
            f /= width;
        }
        out
    }

    /// Values of `T_{alpha0 k} w` as `(flat index, value)` pairs.
    fn shifted(&self, w: &SampledFunction, shift: &[i64]) -> Vec<Complex64> {
        translate(w, shift)
    }

    /// `c_{kn} = V_phi f(alpha0 k, beta0 n)` with `phi` the system window.
    pub fn analysis(&self, f: &SampledFunction) -> Result<CoefficientArray> {
        self.analysis_with(f, &self.window)
    }

    pub fn analysis_with(&self, f: &SampledFunction, window: &SampledFunction) -> Result<CoefficientArray> {
        self.check_grid(f)?;
        self.check_grid(window)?;
        let cell = f.cell();
        let rows: Vec<Vec<Complex64>> = par_map(self.k_count(), |kflat| {
            let tw = self.shifted(window, &self.shift_of(kflat));
            let prod: Vec<Complex64> = f.values.iter().zip(&tw).map(|(a, b)| a * b.conj()).collect();
            let mut out = self.contract(prod, true);
            for v in out.iter_mut() {
                *v *= cell;
            }
            out
        });
        CoefficientArray::new(self.lattice.index_set(), rows.into_iter().flatten().collect())
    }

    /// Applies the modulation tables along every axis: grid -> frequency
    /// index (`forward`) or frequency index -> grid.
    fn contract(&self, mut data: Vec<Complex64>, forward: bool) -> Vec<Complex64> {
        let d = self.lattice.d;
        let n = self.window.n;
        let m = 2 * self.lattice.n + 1;
        let (from, to, mat) = if forward { (n, m, &self.plan.fwd) } else { (m, n, &self.plan.inv) };
        let mut shape = vec![from; d];
        for axis in 0..d {
            let outer: usize = shape[..axis].iter().product();
            let inner: usize = shape[axis + 1..].iter().product();
            let mut out = vec![ZERO; outer * to * inner];
            for o in 0..outer {
                for r in 0..to {
                    let row = &mat[r * from..(r + 1) * from];
                    if inner == 1 {
                        let src = &data[o * from..(o + 1) * from];
                        out[o * to + r] = row.iter().zip(src).map(|(a, b)| a * b).sum();
                    } else {
                        for i in 0..inner {
                            let mut acc = ZERO;
                            for (c, w) in row.iter().enumerate() {
                                acc += w * data[(o * from + c) * inner + i];
                            }
                            out[(o * to + r) * inner + i] = acc;
                        }
                    }
                }
            }
            data = out;
            shape[axis] = to;
        }
        data
    }

    /// `(D_psi c)(y) = Σ c_{kn} e^{i y beta0 n} psi(y - alpha0 k)`.
    pub fn synthesis(&self, c: &CoefficientArray, psi: &SampledFunction) -> Result<SampledFunction> {
        self.check_grid(psi)?;
        if c.index != self.lattice.index_set() {
            return Err(Error::GridMismatch("coefficient index set does not match the lattice".into()));
        }
        let per_k = self.n_count();
        let k_count = self.k_count();
        // Fixed chunking keeps the summation order independent of threads.
        const CHUNK: usize = 8;
        let chunks = k_count.div_ceil(CHUNK);
        let partial: Vec<Vec<Complex64>> = par_map(chunks, |ci| {
            let mut acc = vec![ZERO; psi.values.len()];
            for kflat in ci * CHUNK..((ci + 1) * CHUNK).min(k_count) {
                let ck = &c.values[kflat * per_k..(kflat + 1) * per_k];
                if ck.iter().all(|v| *v == ZERO) {
                    continue;
                }
                let wave = self.contract(ck.to_vec(), false);
                let tw = self.shifted(psi, &self.shift_of(kflat));
                for ((a, w), t) in acc.iter_mut().zip(&wave).zip(&tw) {
                    *a += w * t;
                }
            }
            acc
        });
        let mut out = vec![ZERO; psi.values.len()];
        for p in partial {
            for (o, v) in out.iter_mut().zip(&p) {
                *o += v;
            }
        }
        Ok(psi.with_values(out))
    }

    /// `S f = D_phi C_phi f`.
    pub fn frame_operator_apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.synthesis(&self.analysis(f)?, &self.window)
    }

    pub fn operator(&self) -> FrameOperator<'_> {
        FrameOperator { sys: self }
    }

    /// Rayleigh-quotient bounds over seeded trials, refined by power and
    /// inverse iteration on the Galerkin matrix of `S` over the first
    /// Hermite functions.
    pub fn estimate_frame_bounds(&mut self, trials: usize, seed: u64) -> Result<FrameBounds> {
        let bounds = estimate_bounds(&self.operator(), &self.window, trials, seed)?;
        self.frame_bounds = Some(bounds.clone());
        Ok(bounds)
    }

    /// `psi0 = S^{-1} phi0` by conjugate gradients. The iteration budget is
    /// `ceil(10 B/A)`; CG also stops after three steps without a 10% gain and
    /// returns the best iterate with its residual.
    pub fn canonical_dual(&mut self, cg_tol: f64) -> Result<DualWindow> {
        let bounds = self
            .frame_bounds
            .clone()
            .ok_or_else(|| Error::Precondition("frame bounds must be estimated before the dual".into()))?;
        if !(bounds.a_est > 0.0) || bounds.failure_suspected {
            return Err(Error::Precondition(format!("lower frame bound estimate {} is not positive", bounds.a_est)));
        }
        let kappa = bounds.b_est / bounds.a_est;
        let opts = CgOptions { tol: cg_tol, max_iter: ((10.0 * kappa).ceil() as usize).max(10), stall_limit: 3 };
        let out = conjugate_gradient(&self.operator(), &self.window.values, &opts);
        let dual = DualWindow {
            window: self.window.with_values(out.x),
            residual: out.residual,
            iterations: out.iterations,
            converged: out.converged,
        };
        self.dual = Some(dual.clone());
        Ok(dual)
    }

    /// Cosine similarity between `phi0` and the canonical dual of `psi0`
    /// computed from `psi0`'s own frame operator.
    pub fn duality_symmetry(&self, cg_tol: f64, trials: usize, seed: u64) -> Result<f64> {
        let dual = self.dual.as_ref().ok_or_else(|| Error::Precondition("dual window not computed".into()))?;
        let mut sys = GaborSystem::new(self.lattice.clone(), dual.window.clone(), WindowKind::Samples)?;
        sys.estimate_frame_bounds(trials, seed)?;
        let back = sys.canonical_dual(cg_tol)?;
        Ok(cosine_similarity(&back.window, &self.window))
    }

    /// `D_psi0 C_phi0 f` compared with `f`.
    pub fn roundtrip(&self, f: &SampledFunction) -> Result<RoundtripReport> {
        let dual = self.dual.as_ref().ok_or_else(|| Error::Precondition("dual window not computed".into()))?;
        let coefficients = self.analysis(f)?;
        let rebuilt = self.synthesis(&coefficients, &dual.window)?;
        Ok(RoundtripReport { rel_error: rebuilt.rel_error(f), coefficients })
    }
}

pub struct FrameOperator<'a> {
    sys: &'a GaborSystem,
}

impl LinearOperator for FrameOperator<'_> {
    fn dim(&self) -> usize {
        self.sys.window.values.len()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let f = self.sys.window.with_values(x.to_vec());
        self.sys.frame_operator_apply(&f).expect("grid shared by construction").values
    }
}

/// Samples of `w(y - s h)` with zero fill, `s` given per axis in nodes.
fn translate(w: &SampledFunction, shift: &[i64]) -> Vec<Complex64> {
    let n = w.n as i64;
    if w.d == 1 {
        let s = shift[0];
        return (0..n)
            .map(|j| {
                let src = j - s;
                if (0..n).contains(&src) {
                    w.values[src as usize]
                } else {
                    ZERO
                }
            })
            .collect();
    }
    let shape = w.shape();
    let mut idx = vec![0; w.d];
    (0..w.values.len())
        .map(|i| {
            unravel(i, &shape, &mut idx);
            let mut src = 0usize;
            for (a, &j) in idx.iter().enumerate() {
                let s = j as i64 - shift[a];
                if !(0..n).contains(&s) {
                    return ZERO;
                }
                src = src * w.n + s as usize;
            }
            w.values[src]
        })
        .collect()
}

pub fn cosine_similarity(a: &SampledFunction, b: &SampledFunction) -> f64 {
    a.inner(b).norm() / (a.l2_norm() * b.l2_norm())
}

#[derive(Clone, Debug)]
pub struct ShiftResult {
    pub function: SampledFunction,
    pub nearest_node: bool,
    /// Mass above `1e-10` of the peak was pushed off the grid.
    pub truncated: bool,
}

/// `M_xi T_x f`, with `x` rounded to the nearest node when needed.
pub fn time_frequency_shift(f: &SampledFunction, x: &[f64], xi: &[f64]) -> Result<ShiftResult> {
    if x.len() != f.d || xi.len() != f.d {
        return Err(Error::InvalidParameter("shift vectors must have length d".into()));
    }
    let mut nearest = false;
    let shift: Vec<i64> = x
        .iter()
        .map(|&v| {
            let pos = v / f.h;
            nearest |= (pos - pos.round()).abs() > 1e-9;
            pos.round() as i64
        })
        .collect();
    let moved = translate(f, &shift);
    let kept: f64 = moved.iter().map(|v| v.norm_sqr()).sum();
    let total: f64 = f.values.iter().map(|v| v.norm_sqr()).sum();
    let truncated = total - kept > 1e-20 * total.max(f64::MIN_POSITIVE);
    let mut y = vec![0.0; f.d];
    let values = moved
        .iter()
        .enumerate()
        .map(|(i, v)| {
            f.point_into(i, &mut y);
            let phase: f64 = y.iter().zip(xi).map(|(a, b)| a * b).sum();
            v * Complex64::from_polar(1.0, phase)
        })
        .collect();
    Ok(ShiftResult { function: f.with_values(values), nearest_node: nearest, truncated })
}

#[derive(Clone, Debug)]
pub struct StftResult {
    pub values: Vec<Complex64>,
    pub nearest_node: bool,
}

/// `V_phi f(x, xi) = h^d Σ_j f_j conj(phi(y_j - x)) e^{-i y_j xi}` at each
/// requested point; `x` is rounded to the nearest node when needed.
pub fn stft(f: &SampledFunction, phi: &SampledFunction, points: &[(Vec<f64>, Vec<f64>)]) -> Result<StftResult> {
    f.check_same_grid(phi)?;
    let limit = std::f64::consts::PI / f.h;
    for (x, xi) in points {
        if x.len() != f.d || xi.len() != f.d {
            return Err(Error::InvalidParameter("STFT points must have length d".into()));
        }
        if let Some(&bad) = xi.iter().find(|v| v.abs() > limit) {
            return Err(Error::FrequencyRange { xi: bad, limit });
        }
    }
    let cell = f.cell();
    let results: Vec<(Complex64, bool)> = par_map(points.len(), |p| {
        let (x, xi) = &points[p];
        let mut nearest = false;
        let shift: Vec<i64> = x
            .iter()
            .map(|&v| {
                let pos = v / f.h;
                nearest |= (pos - pos.round()).abs() > 1e-9;
                pos.round() as i64
            })
            .collect();
        let tw = translate(phi, &shift);
        let mut y = vec![0.0; f.d];
        let mut acc = ZERO;
        for (i, (a, b)) in f.values.iter().zip(&tw).enumerate() {
            if *b == ZERO {
                continue;
            }
            f.point_into(i, &mut y);
            let phase: f64 = y.iter().zip(xi).map(|(u, v)| u * v).sum();
            acc += a * b.conj() * Complex64::from_polar(1.0, -phase);
        }
        (acc * cell, nearest)
    });
    Ok(StftResult {
        nearest_node: results.iter().any(|r| r.1),
        values: results.into_iter().map(|r| r.0).collect(),
    })
}

/// Seeded trial functions: Hermite functions followed by random Gaussian
/// mixtures with random modulations.
pub fn trial_functions(template: &SampledFunction, trials: usize, seed: u64) -> Result<Vec<SampledFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = template.d;
    let hermites = (trials / 2).min(10);
    let mut out = Vec::with_capacity(trials);
    for m in 0..hermites {
        let mut gamma = vec![0; d];
        gamma[0] = m;
        out.push(hermite_function(&gamma, template)?);
    }
    for _ in hermites..trials {
        let terms = rng.random_range(1..=3);
        let comps: Vec<(Vec<f64>, Vec<f64>, f64, Complex64)> = (0..terms)
            .map(|_| {
                let centre = (0..d).map(|_| rng.random_range(-4.0..4.0)).collect();
                let freq = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
                let width = rng.random_range(0.5..2.0);
                let amp = Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..std::f64::consts::TAU));
                (centre, freq, width, amp)
            })
            .collect();
        out.push(SampledFunction::from_fn(d, template.h, template.r, |x| {
            comps
                .iter()
                .map(|(c, w, s, a)| {
                    let d2: f64 = x.iter().zip(c).map(|(u, v)| (u - v) * (u - v)).sum();
                    let phase: f64 = x.iter().zip(w).map(|(u, v)| u * v).sum();
                    a * Complex64::from_polar((-d2 / (2.0 * s * s)).exp(), phase)
                })
                .sum()
        })?);
    }
    Ok(out)
}

/// Galerkin basis: Hermite functions with total degree below a bound,
/// at most [`GALERKIN_DIM`] of them.
fn galerkin_basis(template: &SampledFunction) -> Result<Vec<SampledFunction>> {
    let d = template.d;
    let mut gammas: Vec<Vec<usize>> = Vec::new();
    let mut total = 0usize;
    while gammas.len() < GALERKIN_DIM {
        let before = gammas.len();
        let mut idx = vec![0usize; d];
        let shape = vec![total + 1; d];
        for flat in 0..(total + 1).pow(d as u32) {
            unravel(flat, &shape, &mut idx);
            if idx.iter().sum::<usize>() == total && gammas.len() < GALERKIN_DIM {
                gammas.push(idx.clone());
            }
        }
        total += 1;
        if gammas.len() == before && total > GALERKIN_DIM {
            break;
        }
    }
    gammas.iter().map(|g| hermite_function(g, template)).collect()
}

fn rayleigh<A: LinearOperator + ?Sized>(op: &A, f: &SampledFunction) -> f64 {
    let sf = f.with_values(op.apply(&f.values));
    sf.inner(f).re / f.inner(f).re
}

/// Frame bound estimates for any positive operator on the grid of `template`.
pub fn estimate_bounds<A: LinearOperator + ?Sized>(
    op: &A,
    template: &SampledFunction,
    trials: usize,
    seed: u64,
) -> Result<FrameBounds> {
    if trials < 10 {
        return Err(Error::InvalidParameter(format!("need at least 10 trials, got {trials}")));
    }
    let trial_set = trial_functions(template, trials, seed)?;
    let quotients: Vec<f64> = trial_set.iter().map(|f| rayleigh(op, f)).collect();

    let basis = galerkin_basis(template)?;
    let m = basis.len();
    let images: Vec<Vec<Complex64>> = basis.iter().map(|b| op.apply(&b.values)).collect();
    let mut g = DMatrix::<Complex64>::zeros(m, m);
    for j in 0..m {
        let sb = template.with_values(images[j].clone());
        for i in 0..m {
            g[(i, j)] = sb.inner(&basis[i]);
        }
    }
    let g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);

    let project = |f: &SampledFunction| -> DVector<Complex64> {
        let v = DVector::from_iterator(m, basis.iter().map(|b| f.inner(b)));
        if v.norm() > 0.0 {
            v.normalize()
        } else {
            DVector::from_fn(m, |i, _| if i == 0 { Complex64::new(1.0, 0.0) } else { ZERO })
        }
    };
    let quotient = |v: &DVector<Complex64>| (v.adjoint() * &g * v)[(0, 0)].re / v.norm_squared();
    let argmax = (0..quotients.len()).fold(0, |b, i| if quotients[i] > quotients[b] { i } else { b });
    let argmin = (0..quotients.len()).fold(0, |b, i| if quotients[i] < quotients[b] { i } else { b });

    let mut v = project(&trial_set[argmax]);
    let mut top = quotient(&v);
    for _ in 0..POWER_ROUNDS {
        let w = &g * &v;
        if w.norm() == 0.0 {
            break;
        }
        v = w.normalize();
        top = top.max(quotient(&v));
    }

    let mut bottom = f64::INFINITY;
    let mut u = project(&trial_set[argmin]);
    let lu = g.clone().lu();
    for _ in 0..POWER_ROUNDS {
        match lu.solve(&u) {
            Some(w) if w.norm().is_finite() && w.norm() > 0.0 => {
                u = w.normalize();
                bottom = bottom.min(quotient(&u));
            }
            _ => {
                bottom = 0.0;
                break;
            }
        }
    }

    let a_est = quotients.iter().copied().fold(bottom, f64::min);
    let b_est = quotients.iter().copied().fold(top, f64::max);
    Ok(FrameBounds { a_est, b_est, failure_suspected: a_est < 1e-8 })
}

#[derive(Clone, Debug)]
pub struct RoundtripReport {
    pub rel_error: f64,
    pub coefficients: CoefficientArray,
}

/// Least-squares line `y = slope x + intercept` with coefficient of
/// determination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    LinearFit { slope, intercept, r2: 1.0 - ss_res / syy, points: xs.len() }
}

/// `y ≈ c0 + c1 x1 + c2 x2` by least squares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableFit {
    pub intercept: f64,
    pub slope_x: f64,
    pub slope_xi: f64,
    pub r2: f64,
}

fn separable_fit(x1: &[f64], x2: &[f64], ys: &[f64]) -> Option<SeparableFit> {
    let n = ys.len();
    let a = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => x1[i],
        _ => x2[i],
    });
    let b = DVector::from_column_slice(ys);
    let sol = (a.transpose() * &a).lu().solve(&(a.transpose() * &b))?;
    let my = ys.iter().sum::<f64>() / n as f64;
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let res = (&a * &sol - &b).norm_squared();
    Some(SeparableFit { intercept: sol[0], slope_x: sol[1], slope_xi: sol[2], r2: 1.0 - res / syy })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayRow {
    pub lambda: f64,
    pub sup: f64,
    pub sup_half: f64,
    pub finite: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayProfile {
    pub rows: Vec<DecayRow>,
    /// `log|c_sigma|` against `omega(|sigma|)`.
    pub fit_omega: Option<LinearFit>,
    /// `log|c_sigma|` against `|sigma|^2`.
    pub fit_gaussian: Option<LinearFit>,
    /// `log|c_sigma|` against `|x|^2` and `|xi|^2` separately.
    pub fit_separable: Option<SeparableFit>,
    /// Coefficients below this magnitude are left out of the fits.
    pub noise_floor: f64,
}

/// Relative magnitude below which coefficients count as roundoff.
pub const NOISE_FLOOR: f64 = 1e-13;
/// Growth of the sup between truncation `K/2` and `K` counted as divergence.
pub const GROWTH_TOL: f64 = 0.1;

fn log_sup(c: &CoefficientArray, omega: &WeightFunction, lambda: f64) -> f64 {
    (0..c.values.len())
        .filter_map(|i| {
            let a = c.values[i].norm();
            (a > 0.0).then(|| {
                let r = c.index.point(i).iter().map(|v| v * v).sum::<f64>().sqrt();
                a.ln() + lambda * omega.eval_unchecked(r)
            })
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Per `lambda`: `sup |c_sigma| e^{lambda omega(|sigma|)}` at full and half
/// truncation, flagged divergent when the sup grows by more than 10%; plus
/// decay fits of `log|c_sigma|`.
pub fn decay_profile(c: &CoefficientArray, omega: &WeightFunction, ladder: &[f64]) -> DecayProfile {
    let half = c.truncate(c.index.max_radius() / 2);
    let rows = ladder
        .iter()
        .map(|&lambda| {
            let full = log_sup(c, omega, lambda);
            let halfv = log_sup(&half, omega, lambda);
            let finite = full == f64::NEG_INFINITY || full - halfv <= (1.0 + GROWTH_TOL).ln();
            DecayRow { lambda, sup: full.exp(), sup_half: halfv.exp(), finite }
        })
        .collect();

    let floor = NOISE_FLOOR * c.max_abs();
    let d = match c.index {
        IndexSet::Lattice { d, .. } => d,
        IndexSet::MultiIndex { d, .. } => d,
    };
    let (mut om, mut sq, mut xs, mut xis, mut ys) = (vec![], vec![], vec![], vec![], vec![]);
    for (i, v) in c.values.iter().enumerate() {
        let a = v.norm();
        if a > floor && a > 0.0 {
            let p = c.index.point(i);
            let x2: f64 = p[..d].iter().map(|u| u * u).sum();
            let xi2: f64 = p[d..].iter().map(|u| u * u).sum();
            om.push(omega.eval_unchecked((x2 + xi2).sqrt()));
            sq.push(x2 + xi2);
            xs.push(x2);
            xis.push(xi2);
            ys.push(a.ln());
        }
    }
    let enough = ys.len() >= 3;
    DecayProfile {
        rows,
        fit_omega: enough.then(|| linear_fit(&om, &ys)),
        fit_gaussian: enough.then(|| linear_fit(&sq, &ys)),
        fit_separable: if enough && matches!(c.index, IndexSet::Lattice { .. }) { separable_fit(&xs, &xis, &ys) } else { None },
        noise_floor: floor,
    }
}
