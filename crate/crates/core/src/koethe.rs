//! Köthe matrices `a_{sigma,k}` on lattices and multi-index sets, the
//! echelon norms of `lambda^1(A)` and `lambda^inf(A)`, `c_0(A)` membership and
//! the Grothendieck–Pietsch summability test.
//!
//! Entries are evaluated as logarithms. Infinite sums are cut into sup-norm
//! shells and judged by the ratio of successive shell contributions.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coeffs::{CoefficientArray, IndexSet};
use crate::error::{Error, Result};
use crate::gabor::LatticeSpec;
use crate::grid::log_sum_exp;
use crate::par_map;
use crate::weights::WeightFunction;

/// Shell ratio below which contributions count as geometrically decaying.
pub const R_MAX: f64 = 0.9;
/// Shell radii `1, 2, 4, ..., 256`.
pub const DEFAULT_RADII: [usize; 9] = [1, 2, 4, 8, 16, 32, 64, 128, 256];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KoetheIndex {
    /// `sigma = (alpha k, beta n)`, integer coordinates in `Z^{2d}`.
    Lattice2d { alpha: f64, beta: f64, d: usize },
    /// `gamma` in `N_0^d`.
    MultiIndex { d: usize },
}

impl KoetheIndex {
    pub fn from_lattice(l: &LatticeSpec) -> Self {
        KoetheIndex::Lattice2d { alpha: l.alpha0, beta: l.beta0, d: l.d }
    }

    /// Number of integer coordinates.
    pub fn rank(&self) -> usize {
        match *self {
            KoetheIndex::Lattice2d { d, .. } => 2 * d,
            KoetheIndex::MultiIndex { d } => d,
        }
    }

    /// Euclidean size `|sigma|` of a lattice point, or `|gamma| = Σ gamma_j`.
    pub fn size(&self, idx: &[i64]) -> f64 {
        match *self {
            KoetheIndex::Lattice2d { alpha, beta, d } => idx
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let s = v as f64 * if i < d { alpha } else { beta };
                    s * s
                })
                .sum::<f64>()
                .sqrt(),
            KoetheIndex::MultiIndex { .. } => idx.iter().map(|&v| v as f64).sum(),
        }
    }

    fn matches(&self, set: &IndexSet) -> bool {
        match (self, set) {
            (KoetheIndex::Lattice2d { alpha, beta, d }, IndexSet::Lattice { alpha: a2, beta: b2, d: d2, .. }) => {
                alpha == a2 && beta == b2 && d == d2
            }
            (KoetheIndex::MultiIndex { d }, IndexSet::MultiIndex { d: d2, .. }) => d == d2,
            _ => false,
        }
    }

    /// Every index with sup-norm radius in `(inner, outer]` (or `[0, outer]`
    /// when `inner` is `None`).
    pub fn shell(&self, inner: Option<usize>, outer: usize) -> Vec<Vec<i64>> {
        let rank = self.rank();
        let (lo, width) = match self {
            KoetheIndex::Lattice2d { .. } => (-(outer as i64), 2 * outer + 1),
            KoetheIndex::MultiIndex { .. } => (0, outer + 1),
        };
        let count = width.pow(rank as u32);
        let mut out = Vec::new();
        let mut idx = vec![0i64; rank];
        for flat in 0..count {
            let mut f = flat;
            for slot in idx.iter_mut().rev() {
                *slot = (f % width) as i64 + lo;
                f /= width;
            }
            let r = idx.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0);
            if inner.is_none_or(|i| r > i) {
                out.push(idx.clone());
            }
        }
        out
    }
}

pub type LogEntry = Arc<dyn Fn(&[i64], u32) -> f64 + Send + Sync>;

/// `(sigma, k) -> log a_{sigma,k}`.
#[derive(Clone)]
pub struct KoetheMatrix {
    pub name: String,
    pub index: KoetheIndex,
    log_entry: LogEntry,
}

impl std::fmt::Debug for KoetheMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KoetheMatrix").field("name", &self.name).field("index", &self.index).finish()
    }
}

impl KoetheMatrix {
    pub fn new(name: impl Into<String>, index: KoetheIndex, log_entry: impl Fn(&[i64], u32) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), index, log_entry: Arc::new(log_entry) }
    }

    /// `a_{sigma,k} = exp(k omega(|sigma|))`.
    pub fn from_weight(omega: &WeightFunction, lattice: &LatticeSpec) -> Self {
        let index = KoetheIndex::from_lattice(lattice);
        let w = omega.clone();
        let ix = index.clone();
        Self::new("weight", index, move |s, k| k as f64 * w.eval_unchecked(ix.size(s)))
    }

    /// `a_{sigma,k} = e^k`, constant in `sigma`.
    pub fn constant(index: KoetheIndex) -> Self {
        Self::new("constant", index, |_, k| k as f64)
    }

    /// `a_{sigma,k} = (1 + |sigma|)^k`.
    pub fn polynomial(index: KoetheIndex) -> Self {
        let ix = index.clone();
        Self::new("polynomial", index, move |s, k| k as f64 * ix.size(s).ln_1p())
    }

    /// `a_{sigma,k} = ((1 + |sigma|) e^{c_j})^k` with `c_j` alternating
    /// between 0 and 1 over dyadic shells `2^{j-1} < |sigma|_inf <= 2^j`.
    /// Its shell contributions oscillate log-periodically.
    pub fn oscillatory(index: KoetheIndex) -> Self {
        let ix = index.clone();
        Self::new("oscillatory", index, move |s, k| {
            let r = s.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
            let j = if r == 0 { 0 } else { 64 - (r - 1).leading_zeros() as u64 };
            k as f64 * (ix.size(s).ln_1p() + (j % 2) as f64)
        })
    }

    pub fn log_entry(&self, idx: &[i64], k: u32) -> f64 {
        (self.log_entry)(idx, k)
    }

    pub fn entry(&self, idx: &[i64], k: u32) -> f64 {
        self.log_entry(idx, k).exp()
    }

    /// Positivity and monotonicity in `k` at `samples` random indices with
    /// `|sigma|_inf <= radius` and `k < k_max`.
    pub fn spot_check(&self, samples: usize, radius: i64, k_max: u32, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lo = match self.index {
            KoetheIndex::Lattice2d { .. } => -radius,
            KoetheIndex::MultiIndex { .. } => 0,
        };
        (0..samples).all(|_| {
            let idx: Vec<i64> = (0..self.index.rank()).map(|_| rng.random_range(lo..=radius)).collect();
            let k = rng.random_range(0..k_max);
            let (a, b) = (self.log_entry(&idx, k), self.log_entry(&idx, k + 1));
            a.is_finite() && b.is_finite() && a <= b + 1e-12 * b.abs().max(1.0)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    One,
    Inf,
}

fn check_compatible(c: &CoefficientArray, a: &KoetheMatrix) -> Result<()> {
    if a.index.matches(&c.index) {
        Ok(())
    } else {
        Err(Error::GridMismatch("coefficient index set and matrix index set differ".into()))
    }
}

/// `Σ |c_sigma| a_{sigma,k}` or `sup |c_sigma| a_{sigma,k}` over the box of `c`;
/// `+inf` once the value leaves the float range.
pub fn lambda_norm(c: &CoefficientArray, a: &KoetheMatrix, k: u32, p: NormKind) -> Result<f64> {
    check_compatible(c, a)?;
    let logs = (0..c.values.len()).filter_map(|i| {
        let v = c.values[i].norm();
        (v > 0.0).then(|| v.ln() + a.log_entry(&c.index.index(i), k))
    });
    let log_norm = match p {
        NormKind::Inf => logs.fold(f64::NEG_INFINITY, f64::max),
        NormKind::One => log_sum_exp(logs.collect::<Vec<_>>()),
    };
    Ok(log_norm.exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GpVerdict {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Shell {
    pub radius: usize,
    /// Partial sum over `|sigma|_inf <= radius`.
    pub sum: f64,
    /// This shell's contribution.
    pub contribution: f64,
    /// Contribution over the previous shell's.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GpReport {
    pub k: u32,
    pub m: u32,
    pub shells: Vec<Shell>,
    pub verdict: GpVerdict,
    /// `last contribution / (1 - ratio)` for convergent series.
    pub tail: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GpTest {
    pub matrix: String,
    pub k: u32,
    pub m_found: Option<u32>,
    pub reports: Vec<GpReport>,
}

/// Shell contributions `ln Σ_{shell} exp(f(sigma))`.
fn shell_logs(index: &KoetheIndex, radii: &[usize], f: &(dyn Fn(&[i64]) -> f64 + Sync)) -> Vec<f64> {
    let shells: Vec<(Option<usize>, usize)> =
        radii.iter().enumerate().map(|(i, &r)| (if i == 0 { None } else { Some(radii[i - 1]) }, r)).collect();
    par_map(shells.len(), |i| {
        let (inner, outer) = shells[i];
        let logs: Vec<f64> = index.shell(inner, outer).iter().map(|s| f(s)).collect();
        log_sum_exp(logs)
    })
}

fn classify(contributions: &[f64]) -> (GpVerdict, Option<f64>) {
    let ratios: Vec<f64> = contributions.windows(2).map(|w| w[1] / w[0]).collect();
    let last = &ratios[ratios.len().saturating_sub(3)..];
    if !last.is_empty() && last.iter().all(|&r| r <= R_MAX) {
        let rho = *last.last().expect("non-empty");
        let tail = contributions.last().expect("non-empty") / (1.0 - rho);
        (GpVerdict::Convergent, Some(tail))
    } else if !last.is_empty() && last.iter().all(|&r| r >= 1.0) {
        (GpVerdict::Divergent, None)
    } else {
        (GpVerdict::Inconclusive, None)
    }
}

fn build_report(k: u32, m: u32, radii: &[usize], logs: &[f64]) -> GpReport {
    let contributions: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
    let mut running = f64::NEG_INFINITY;
    let shells = radii
        .iter()
        .zip(logs)
        .enumerate()
        .map(|(i, (&radius, &l))| {
            running = log_sum_exp([running, l]);
            Shell {
                radius,
                sum: running.exp(),
                contribution: l.exp(),
                ratio: (i > 0).then(|| (l - logs[i - 1]).exp()),
            }
        })
        .collect();
    let (verdict, tail) = classify(&contributions);
    GpReport { k, m, shells, verdict, tail }
}

/// Partial sums of `Σ a_{sigma,k} / a_{sigma,m}` on growing sup-norm boxes for
/// each candidate `m`; `m_found` is the first candidate judged convergent.
pub fn gp_test(a: &KoetheMatrix, k: u32, m_candidates: &[u32], radii: &[usize]) -> Result<GpTest> {
    if radii.len() < 3 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("need at least three strictly increasing radii".into()));
    }
    let reports: Vec<GpReport> = m_candidates
        .iter()
        .map(|&m| {
            let f = |s: &[i64]| a.log_entry(s, k) - a.log_entry(s, m);
            build_report(k, m, radii, &shell_logs(&a.index, radii, &f))
        })
        .collect();
    let m_found = reports.iter().find(|r| r.verdict == GpVerdict::Convergent).map(|r| r.m);
    Ok(GpTest { matrix: a.name.clone(), k, m_found, reports })
}

/// Partial sums of `Σ e^{-(m-k) a} (1 + |sigma|)^{-b (m-k)}`, the comparison
/// series dominating `Σ e^{(k-m) omega(|sigma|)}` when
/// `omega(t) >= a + b log(1+t)`.
pub fn comparison_partial_sums(index: &KoetheIndex, k: u32, m: u32, a: f64, b: f64, radii: &[usize]) -> Vec<f64> {
    let gap = m as f64 - k as f64;
    let ix = index.clone();
    let f = move |s: &[i64]| -gap * a - b * gap * ix.size(s).ln_1p();
    let logs = shell_logs(index, radii, &f);
    let mut running = f64::NEG_INFINITY;
    logs.iter()
        .map(|&l| {
            running = log_sum_exp([running, l]);
            running.exp()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct C0Row {
    pub k: u32,
    pub outer_max: f64,
    pub half_max: f64,
    pub pass: bool,
}

/// Per `k`: `max |c_sigma| a_{sigma,k}` on the outermost shell against the
/// half-radius shell; passes on a tenfold decay.
pub fn c0_membership(c: &CoefficientArray, a: &KoetheMatrix, k_ladder: &[u32]) -> Result<Vec<C0Row>> {
    check_compatible(c, a)?;
    let r = c.index.max_radius();
    let half = r / 2;
    Ok(k_ladder
        .iter()
        .map(|&k| {
            let mut outer: f64 = f64::NEG_INFINITY;
            let mut inner: f64 = f64::NEG_INFINITY;
            for (i, v) in c.values.iter().enumerate() {
                let rad = c.index.radius(i);
                if (rad != r && rad != half) || v.norm() == 0.0 {
                    continue;
                }
                let l = v.norm().ln() + a.log_entry(&c.index.index(i), k);
                if rad == r {
                    outer = outer.max(l);
                }
                if rad == half {
                    inner = inner.max(l);
                }
            }
            let (outer_max, half_max) = (outer.exp(), inner.exp());
            C0Row { k, outer_max, half_max, pass: outer_max <= half_max / 10.0 }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightNuclearityReport {
    pub applicable: bool,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// `m - k = ceil(2d/b) + 1`.
    pub m_offset: Option<u32>,
    pub reports: Vec<GpReport>,
    pub nuclear: Option<bool>,
    pub note: String,
}

/// Certifies condition (gamma) for `omega`, then runs the summability test
/// on `exp(k omega(|sigma|))` for `k = 1, 2, 3` at `m = k + ceil(2d/b) + 1`.
pub fn nuclearity_verdict_weight(omega: &WeightFunction, lattice: &LatticeSpec, t_grid: &[f64], radii: &[usize]) -> Result<WeightNuclearityReport> {
    let mut w = omega.clone();
    let (a, b) = match w.certify_gamma(t_grid) {
        Ok(ab) => ab,
        Err(Error::ConditionFailure(msg)) => {
            return Ok(WeightNuclearityReport {
                applicable: false,
                a: None,
                b: None,
                m_offset: None,
                reports: vec![],
                nuclear: None,
                note: format!("criterion inapplicable: {msg}"),
            })
        }
        Err(e) => return Err(e),
    };
    let offset = ((2 * lattice.d) as f64 / b - 1e-9).ceil().max(0.0) as u32 + 1;
    let matrix = KoetheMatrix::from_weight(&w, lattice);
    let mut reports = Vec::new();
    for k in 1..=3 {
        let t = gp_test(&matrix, k, &[k + offset], radii)?;
        reports.extend(t.reports);
    }
    let nuclear = reports.iter().all(|r| r.verdict == GpVerdict::Convergent);
    let note = if nuclear {
        "all tested k convergent".to_string()
    } else {
        "some k not confirmed convergent on the tested radii".to_string()
    };
    Ok(WeightNuclearityReport { applicable: true, a: Some(a), b: Some(b), m_offset: Some(offset), reports, nuclear: Some(nuclear), note })
}
