//! Weight functions `omega`, grid-relative checks of their structural
//! conditions, and the Young conjugate of `phi(t) = omega(e^t)`.
//!
//! Every certificate produced here is relative to the grid it was computed
//! on; the grid's hash travels with the certificate.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::Verdict;

/// Log-spaced nodes per decade used by [`default_grid`].
pub const NODES_PER_DECADE: usize = 512;
pub const DEFAULT_DOMAIN_CAP: f64 = 1e6;
/// Threshold below which a tail ratio counts as "reached zero".
pub const LITTLE_O_EPS: f64 = 1e-2;
const ALPHA_L_CAP: f64 = 1e6;
const GAMMA_B_MAX: f64 = 64.0;
const GAMMA_B_MIN: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightFamily {
    /// `omega(t) = log(1+t)^beta`
    LogPower { beta: f64 },
    /// `omega(t) = t^(1/s)`
    GevreyRoot { s: f64 },
    /// Piecewise-linear interpolant of monotone `(t, omega)` samples.
    Custom { samples: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaCertificate {
    pub l: f64,
    pub grid_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaCertificate {
    pub a: f64,
    pub b: f64,
    pub grid_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    pub family: WeightFamily,
    pub domain_cap: f64,
    /// Condition (alpha) constant, once certified.
    pub alpha: Option<AlphaCertificate>,
    /// Condition (gamma) constants, once certified.
    pub gamma: Option<GammaCertificate>,
}

#[derive(Deserialize)]
struct WeightDoc {
    #[serde(flatten)]
    family: WeightFamily,
    domain_cap: Option<f64>,
}

impl WeightFunction {
    pub fn log_power(beta: f64) -> Result<Self> {
        Self::new(WeightFamily::LogPower { beta }, None)
    }

    pub fn gevrey_root(s: f64) -> Result<Self> {
        Self::new(WeightFamily::GevreyRoot { s }, None)
    }

    pub fn custom(samples: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(WeightFamily::Custom { samples }, None)
    }

    /// Tabulates `f` on `grid` and wraps it as a custom weight.
    pub fn tabulate(grid: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::custom(grid.iter().map(|&t| [t, f(t)]).collect())
    }

    pub fn new(family: WeightFamily, domain_cap: Option<f64>) -> Result<Self> {
        let natural_cap = match &family {
            WeightFamily::LogPower { beta } => {
                if !(*beta > 0.0) {
                    return Err(Error::InvalidParameter(format!("log_power beta must be > 0, got {beta}")));
                }
                DEFAULT_DOMAIN_CAP
            }
            WeightFamily::GevreyRoot { s } => {
                if !(*s > 1.0) {
                    return Err(Error::InvalidParameter(format!("gevrey_root s must be > 1, got {s}")));
                }
                DEFAULT_DOMAIN_CAP
            }
            WeightFamily::Custom { samples } => {
                validate_samples(samples)?;
                samples[samples.len() - 1][0]
            }
        };
        let domain_cap = domain_cap.unwrap_or(natural_cap);
        if !(domain_cap > 0.0) {
            return Err(Error::InvalidParameter(format!("domain_cap must be > 0, got {domain_cap}")));
        }
        if let WeightFamily::Custom { samples } = &family {
            if domain_cap > samples[samples.len() - 1][0] {
                return Err(Error::InvalidParameter("domain_cap beyond the last custom sample".into()));
            }
        }
        Ok(Self { family, domain_cap, alpha: None, gamma: None })
    }

    pub fn with_domain_cap(mut self, cap: f64) -> Result<Self> {
        let rebuilt = Self::new(self.family.clone(), Some(cap))?;
        self.domain_cap = rebuilt.domain_cap;
        self.alpha = None;
        self.gamma = None;
        Ok(self)
    }

    /// Parses `{"family": "log_power", "beta": 2.0}` style documents.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: WeightDoc = serde_json::from_str(text)?;
        Self::new(doc.family, doc.domain_cap)
    }

    pub fn from_value(value: &serde_json::Value) -> Result<Self> {
        let doc: WeightDoc = serde_json::from_value(value.clone())?;
        Self::new(doc.family, doc.domain_cap)
    }

    /// `omega(t)`; vector arguments are passed as their Euclidean norm.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || t > self.domain_cap {
            return Err(Error::Domain { value: t, cap: self.domain_cap });
        }
        Ok(self.eval_unchecked(t))
    }

    /// `omega(t)` without the domain check; callers guarantee `0 <= t`.
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        match &self.family {
            WeightFamily::LogPower { beta } => t.ln_1p().powf(*beta),
            WeightFamily::GevreyRoot { s } => t.powf(1.0 / s),
            WeightFamily::Custom { samples } => interpolate(samples, t),
        }
    }

    pub fn l(&self) -> Option<f64> {
        self.alpha.as_ref().map(|c| c.l)
    }

    /// Smallest `L >= 1` with `omega(2t) <= L (omega(t) + 1)` on the grid,
    /// located by bisection on `[1, 1e6]`.
    pub fn certify_alpha(&mut self, t_grid: &[f64]) -> Result<f64> {
        let pairs: Vec<(f64, f64)> = t_grid
            .iter()
            .filter(|&&t| t >= 0.0 && 2.0 * t <= self.domain_cap)
            .map(|&t| (self.eval_unchecked(2.0 * t), self.eval_unchecked(t)))
            .collect();
        if pairs.is_empty() {
            return Err(Error::InvalidParameter("t_grid has no node in [0, cap/2]".into()));
        }
        let holds = |l: f64| pairs.iter().all(|&(w2, w1)| w2 <= l * (w1 + 1.0) * (1.0 + 1e-14));
        let l = if holds(1.0) {
            1.0
        } else if !holds(ALPHA_L_CAP) {
            return Err(Error::ConditionFailure(format!(
                "condition (alpha): no L <= {ALPHA_L_CAP:e} satisfies omega(2t) <= L(omega(t)+1) on the grid"
            )));
        } else {
            let (mut lo, mut hi) = (1.0, ALPHA_L_CAP);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if holds(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-13 * hi {
                    break;
                }
            }
            hi
        };
        self.alpha = Some(AlphaCertificate { l, grid_hash: grid_hash(t_grid) });
        Ok(l)
    }

    /// Largest `b` (searched on `(0, 64]`) for which the minimizer of
    /// `omega(t) - b log(1+t)` stays out of the final decade of the grid,
    /// together with `a = min_t (omega(t) - b log(1+t))`.
    pub fn certify_gamma(&mut self, t_grid: &[f64]) -> Result<(f64, f64)> {
        let nodes: Vec<(f64, f64)> = t_grid
            .iter()
            .filter(|&&t| t >= 0.0 && t <= self.domain_cap)
            .map(|&t| (t, self.eval_unchecked(t)))
            .collect();
        let t_max = nodes.iter().map(|n| n.0).fold(0.0, f64::max);
        if nodes.len() < 3 || t_max <= 0.0 {
            return Err(Error::InvalidParameter("t_grid too small for the (gamma) search".into()));
        }
        let tail_start = t_max / 10.0;
        let argmin = |b: f64| -> (f64, f64) {
            let mut best = (f64::INFINITY, 0.0);
            for &(t, w) in &nodes {
                let v = w - b * t.ln_1p();
                if best.0.is_infinite() || v < best.0 - 1e-12 * (1.0 + best.0.abs()) {
                    best = (v, t);
                }
            }
            best
        };
        let feasible = |b: f64| argmin(b).1 < tail_start;
        let b = if feasible(GAMMA_B_MAX) {
            GAMMA_B_MAX
        } else {
            let (mut lo, mut hi) = (0.0, GAMMA_B_MAX);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if feasible(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        if b < GAMMA_B_MIN {
            return Err(Error::ConditionFailure(format!(
                "condition (gamma): no b >= {GAMMA_B_MIN} keeps omega(t) - b log(1+t) bounded below on the grid"
            )));
        }
        let a = argmin(b).0;
        self.gamma = Some(GammaCertificate { a, b, grid_hash: grid_hash(t_grid) });
        Ok((a, b))
    }
}

fn validate_samples(samples: &[[f64; 2]]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter("custom weight needs at least two samples".into()));
    }
    if samples[0][0] != 0.0 {
        return Err(Error::InvalidParameter("custom weight samples must start at t = 0".into()));
    }
    if samples[0][1] < 0.0 {
        return Err(Error::InvalidParameter("custom weight must satisfy omega(0) >= 0".into()));
    }
    for w in samples.windows(2) {
        if !(w[1][0] > w[0][0]) {
            return Err(Error::InvalidParameter("custom weight abscissae must be strictly increasing".into()));
        }
        if w[1][1] < w[0][1] {
            return Err(Error::InvalidParameter(format!(
                "custom weight is not monotone at t = {}",
                w[1][0]
            )));
        }
    }
    if samples.iter().any(|s| !s[0].is_finite() || !s[1].is_finite()) {
        return Err(Error::InvalidParameter("custom weight samples must be finite".into()));
    }
    Ok(())
}

fn interpolate(samples: &[[f64; 2]], t: f64) -> f64 {
    let i = samples.partition_point(|s| s[0] <= t);
    if i == 0 {
        return samples[0][1];
    }
    if i == samples.len() {
        return samples[samples.len() - 1][1];
    }
    let [t0, w0] = samples[i - 1];
    let [t1, w1] = samples[i];
    w0 + (w1 - w0) * (t - t0) / (t1 - t0)
}

/// `per_decade` log-spaced nodes on `[t_min, t_max]`, endpoints included.
pub fn log_grid(t_min: f64, t_max: f64, per_decade: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min);
    let decades = (t_max / t_min).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let (l0, l1) = (t_min.ln(), t_max.ln());
    (0..=n).map(|i| (l0 + (l1 - l0) * i as f64 / n as f64).exp()).collect()
}

/// `{0}` followed by a 512-per-decade log grid on `[1e-3, cap]`.
pub fn default_grid(cap: f64) -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend(log_grid(1e-3, cap, NODES_PER_DECADE));
    g
}

pub fn grid_hash(grid: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for t in grid {
        hasher.update(t.to_le_bytes());
    }
    hasher.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailReport {
    pub verdict: Verdict,
    pub tail_ratio: f64,
    /// `(t, ratio)` samples from the final decade of the grid.
    pub trace: Vec<(f64, f64)>,
}

/// Decides whether a tail trace tends to zero: `Pass` if it decreases
/// monotonically to below `eps`, `Fail` if it ends at or above `eps` without
/// decreasing, `Inconclusive` otherwise.
pub fn tail_verdict(ratios: &[f64], eps: f64) -> Verdict {
    let (Some(&first), Some(&last)) = (ratios.first(), ratios.last()) else {
        return Verdict::Inconclusive;
    };
    let monotone = ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-300);
    if last < eps && monotone {
        Verdict::Pass
    } else if last >= eps && last >= first * (1.0 - 1e-9) {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    }
}

fn tail_report(points: Vec<(f64, f64)>, eps: f64) -> TailReport {
    let t_max = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let tail: Vec<(f64, f64)> = points.into_iter().filter(|p| p.0 >= t_max / 10.0).collect();
    let ratios: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let verdict = tail_verdict(&ratios, eps);
    let stride = (tail.len() / 64).max(1);
    let mut trace: Vec<(f64, f64)> = tail.iter().copied().step_by(stride).collect();
    if let Some(&last) = tail.last() {
        if trace.last() != Some(&last) {
            trace.push(last);
        }
    }
    TailReport { verdict, tail_ratio: ratios.last().copied().unwrap_or(f64::NAN), trace }
}

/// Grid-relative test of `omega(t) = o(t)`.
pub fn check_little_o(w: &WeightFunction, t_grid: &[f64]) -> TailReport {
    let points = t_grid
        .iter()
        .filter(|&&t| t > 0.0 && t <= w.domain_cap)
        .map(|&t| (t, w.eval_unchecked(t) / t))
        .collect();
    tail_report(points, LITTLE_O_EPS)
}

/// Grid-relative test of `omega1(t) = o(omega2(t))`; nodes where
/// `omega2 < 1e-12` are skipped.
pub fn compare_weights(w1: &WeightFunction, w2: &WeightFunction, t_grid: &[f64]) -> TailReport {
    let cap = w1.domain_cap.min(w2.domain_cap);
    let points = t_grid
        .iter()
        .filter(|&&t| t >= 0.0 && t <= cap)
        .filter_map(|&t| {
            let d = w2.eval_unchecked(t);
            (d >= 1e-12).then(|| (t, w1.eval_unchecked(t) / d))
        })
        .collect();
    tail_report(points, LITTLE_O_EPS)
}

/// Discrete convexity of `phi(t) = omega(e^t)` on a uniform `t` grid:
/// every second difference must be `>= -tol`.
pub fn check_delta_convexity(w: &WeightFunction, t_nodes: usize, tol: f64) -> Verdict {
    let t_max = w.domain_cap.ln();
    if t_max <= 0.0 || t_nodes < 3 {
        return Verdict::Inconclusive;
    }
    let phi: Vec<f64> = (0..t_nodes)
        .map(|i| w.eval_unchecked((t_max * i as f64 / (t_nodes - 1) as f64).exp().min(w.domain_cap)))
        .collect();
    let convex = phi.windows(3).all(|v| v[0] - 2.0 * v[1] + v[2] >= -tol * (1.0 + v[1].abs()));
    if convex {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct YoungConjugateTable {
    pub s_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub argmax_t: Vec<f64>,
    /// The maximizer sat on the right end of the `t` range.
    pub cap_limited: Vec<bool>,
}

impl YoungConjugateTable {
    /// Checks monotonicity, convexity (slopes non-decreasing) and
    /// monotonicity of `values/s`, skipping cap-limited entries.
    pub fn invariants_hold(&self, tol: f64) -> bool {
        let pts: Vec<(f64, f64)> = self
            .s_grid
            .iter()
            .zip(&self.values)
            .zip(&self.cap_limited)
            .filter(|(_, &c)| !c)
            .map(|((&s, &v), _)| (s, v))
            .collect();
        let slack = |v: f64| tol * (1.0 + v.abs());
        let monotone = pts.windows(2).all(|p| p[1].1 >= p[0].1 - slack(p[0].1));
        let convex = pts.windows(3).all(|p| {
            let d1 = (p[1].1 - p[0].1) / (p[1].0 - p[0].0);
            let d2 = (p[2].1 - p[1].1) / (p[2].0 - p[1].0);
            d2 >= d1 - slack(d1)
        });
        let ratio: Vec<f64> = pts.iter().filter(|p| p.0 > 0.0).map(|p| p.1 / p.0).collect();
        let ratio_monotone = ratio.windows(2).all(|r| r[1] >= r[0] - slack(r[0]));
        monotone && convex && ratio_monotone
    }

    /// Columns `s,phi_star,argmax_t`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,phi_star,argmax_t\n");
        for ((s, v), t) in self.s_grid.iter().zip(&self.values).zip(&self.argmax_t) {
            out.push_str(&format!("{},{},{}\n", crate::io::fmt17(*s), crate::io::fmt17(*v), crate::io::fmt17(*t)));
        }
        out
    }

    /// `(phi*)*(t) = max_s (t s - phi*(s))` over the non-cap-limited entries.
    pub fn biconjugate(&self, t: f64) -> f64 {
        self.s_grid
            .iter()
            .zip(&self.values)
            .zip(&self.cap_limited)
            .filter(|(_, &c)| !c)
            .map(|((&s, &v), _)| t * s - v)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

const CONJ_REFINE_PASSES: usize = 3;
const CONJ_REFINE_SPLIT: usize = 10;

/// `phi*(s) = sup_{t >= 0} (t s - omega(e^t))`, maximized on a log-spaced
/// `t` grid over `[0, log(cap)]` and refined three times around the
/// maximizer, each pass ten times finer.
pub fn young_conjugate(w: &WeightFunction, s_grid: &[f64]) -> Result<YoungConjugateTable> {
    let t_max = w.domain_cap.ln();
    if !(t_max > 0.0) {
        return Err(Error::InvalidParameter("young_conjugate needs domain_cap > 1".into()));
    }
    if s_grid.iter().any(|&s| !(s >= 0.0)) {
        return Err(Error::InvalidParameter("s_grid must be non-negative".into()));
    }
    let phi = |t: f64| w.eval_unchecked(t.exp().min(w.domain_cap));
    let mut t_nodes = vec![0.0];
    t_nodes.extend(log_grid(1e-4, t_max, NODES_PER_DECADE / 2));
    let phi_nodes: Vec<f64> = t_nodes.iter().map(|&t| phi(t)).collect();
    let last = t_nodes.len() - 1;

    let mut table = YoungConjugateTable {
        s_grid: s_grid.to_vec(),
        values: Vec::with_capacity(s_grid.len()),
        argmax_t: Vec::with_capacity(s_grid.len()),
        cap_limited: Vec::with_capacity(s_grid.len()),
    };
    for &s in s_grid {
        let (mut best_i, mut best_v) = (0, f64::NEG_INFINITY);
        for (i, (&t, &p)) in t_nodes.iter().zip(&phi_nodes).enumerate() {
            let v = t * s - p;
            if v > best_v {
                best_v = v;
                best_i = i;
            }
        }
        let mut best_t = t_nodes[best_i];
        let mut lo = t_nodes[best_i.saturating_sub(1)];
        let mut hi = t_nodes[(best_i + 1).min(last)];
        for _ in 0..CONJ_REFINE_PASSES {
            let n = 2 * CONJ_REFINE_SPLIT;
            let step = (hi - lo) / n as f64;
            if step <= 0.0 {
                break;
            }
            for j in 0..=n {
                let t = lo + step * j as f64;
                let v = t * s - phi(t);
                if v > best_v {
                    best_v = v;
                    best_t = t;
                }
            }
            lo = (best_t - step).max(0.0);
            hi = (best_t + step).min(t_max);
        }
        table.values.push(best_v);
        table.argmax_t.push(best_t);
        table.cap_limited.push(best_i == last);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let w = WeightFunction::log_power(1.0).unwrap();
        assert_eq!(w.eval(0.0).unwrap(), 0.0);
        let w2 = WeightFunction::log_power(2.0).unwrap();
        assert!((w2.eval(std::f64::consts::E - 1.0).unwrap() - 1.0).abs() < 1e-14);
        let g = WeightFunction::gevrey_root(2.0).unwrap();
        assert!((g.eval(4.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn eval_domain_errors() {
        let w = WeightFunction::log_power(1.0).unwrap();
        assert!(matches!(w.eval(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(w.eval(2e6), Err(Error::Domain { .. })));
    }

    #[test]
    fn custom_rejects_non_monotone_samples() {
        assert!(WeightFunction::custom(vec![[0.0, 0.0], [1.0, 2.0], [2.0, 1.0]]).is_err());
        assert!(WeightFunction::custom(vec![[1.0, 0.0], [2.0, 1.0]]).is_err());
        let w = WeightFunction::custom(vec![[0.0, 0.0], [2.0, 1.0]]).unwrap();
        assert!((w.eval(1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn json_documents() {
        let w = WeightFunction::from_json(r#"{"family": "log_power", "beta": 2.0}"#).unwrap();
        assert_eq!(w.family, WeightFamily::LogPower { beta: 2.0 });
        let c = WeightFunction::from_json(r#"{"family": "custom", "samples": [[0, 0], [1, 1]]}"#).unwrap();
        assert_eq!(c.domain_cap, 1.0);
        assert!(WeightFunction::from_json(r#"{"family": "log_power"}"#).is_err());
    }

    #[test]
    fn alpha_for_log_power_is_one() {
        let mut w = WeightFunction::log_power(1.0).unwrap();
        assert_eq!(w.certify_alpha(&default_grid(1e6)).unwrap(), 1.0);
        assert!(w.alpha.as_ref().unwrap().grid_hash.len() == 16);
    }

    #[test]
    fn alpha_for_identity_tends_to_two() {
        // sup 2t/(t+1) over the grid; brute force oracle on the same nodes.
        let grid = default_grid(1e6);
        let mut w = WeightFunction::tabulate(&grid, |t| t).unwrap();
        let l = w.certify_alpha(&grid).unwrap();
        let oracle = grid.iter().filter(|&&t| 2.0 * t <= 1e6).map(|&t| 2.0 * t / (t + 1.0)).fold(1.0, f64::max);
        assert!((l - oracle).abs() < 1e-9, "{l} vs {oracle}");
        assert!(l > 1.99 && l < 2.0);
    }

    #[test]
    fn alpha_for_log_squared_is_finite() {
        let grid = default_grid(1e6);
        let mut w = WeightFunction::log_power(2.0).unwrap();
        let l = w.certify_alpha(&grid).unwrap();
        let oracle = grid
            .iter()
            .filter(|&&t| 2.0 * t <= 1e6)
            .map(|&t| (2.0 * t).ln_1p().powi(2) / (t.ln_1p().powi(2) + 1.0))
            .fold(1.0, f64::max);
        assert!((l - oracle).abs() < 1e-9 * oracle);
    }

    #[test]
    fn alpha_failure_is_reported() {
        // Powers satisfy the doubling bound; exponential growth does not.
        let grid = default_grid(1e4);
        let mut w = WeightFunction::tabulate(&grid, |t| (t / 100.0).exp_m1()).unwrap();
        assert!(matches!(w.certify_alpha(&grid), Err(Error::ConditionFailure(_))));
        let mut cube = WeightFunction::tabulate(&grid, |t| t.powi(3)).unwrap();
        assert!(cube.certify_alpha(&grid).unwrap() <= 8.0 * (1.0 + 1e-3));
    }

    #[test]
    fn gamma_examples() {
        let grid = default_grid(1e6);
        let mut w = WeightFunction::log_power(1.0).unwrap();
        let (a, b) = w.certify_gamma(&grid).unwrap();
        assert!(a.abs() < 1e-9 && (b - 1.0).abs() < 1e-9, "a={a} b={b}");

        let mut g = WeightFunction::gevrey_root(2.0).unwrap();
        let (a, b) = g.certify_gamma(&grid).unwrap();
        assert!(b >= 1.0);
        // Independent oracle for b = 1: grid minimum of sqrt(t) - log(1+t).
        let a1 = grid.iter().map(|&t| t.sqrt() - t.ln_1p()).fold(f64::INFINITY, f64::min);
        assert!(a1.is_finite() && a1 > -1.0);
        assert!(a.is_finite());
    }

    #[test]
    fn gamma_fails_for_iterated_log_as_grid_extends() {
        let mut previous = f64::INFINITY;
        for cap in [1e6, 1e50, 1e300] {
            let mut grid = vec![0.0];
            grid.extend(log_grid(1e-3, cap, 64));
            let mut w = WeightFunction::tabulate(&grid, |t| t.ln_1p().ln_1p()).unwrap();
            match w.certify_gamma(&grid) {
                Ok((_, b)) => {
                    assert!(b < previous);
                    previous = b;
                }
                Err(Error::ConditionFailure(_)) => {
                    assert_eq!(cap, 1e300);
                    previous = 0.0;
                }
                Err(e) => panic!("{e}"),
            }
        }
        assert_eq!(previous, 0.0);
    }

    #[test]
    fn gamma_fails_for_zero_weight() {
        let mut w = WeightFunction::custom(vec![[0.0, 0.0], [1e6, 0.0]]).unwrap();
        assert!(matches!(w.certify_gamma(&default_grid(1e6)), Err(Error::ConditionFailure(_))));
    }

    #[test]
    fn little_o_examples() {
        let grid = default_grid(1e6);
        let r = check_little_o(&WeightFunction::log_power(1.0).unwrap(), &grid);
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.tail_ratio - 1e6f64.ln_1p() / 1e6).abs() < 1e-12);
        let half = WeightFunction::tabulate(&grid, |t| t / 2.0).unwrap();
        assert_eq!(check_little_o(&half, &grid).verdict, Verdict::Fail);
        let g = check_little_o(&WeightFunction::gevrey_root(2.0).unwrap(), &grid);
        assert_eq!(g.verdict, Verdict::Pass);
        assert!((g.tail_ratio - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn little_o_can_be_inconclusive() {
        // ratio decreasing but still above eps at the cap
        let grid = default_grid(1e3);
        let w = WeightFunction::gevrey_root(2.0).unwrap().with_domain_cap(1e3).unwrap();
        assert_eq!(check_little_o(&w, &grid).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn compare_examples() {
        let grid = default_grid(1e8);
        let l1 = WeightFunction::log_power(1.0).unwrap().with_domain_cap(1e8).unwrap();
        let g2 = WeightFunction::gevrey_root(2.0).unwrap().with_domain_cap(1e8).unwrap();
        let l2 = WeightFunction::log_power(2.0).unwrap().with_domain_cap(1e8).unwrap();
        assert_eq!(compare_weights(&l1, &g2, &grid).verdict, Verdict::Pass);
        assert_eq!(compare_weights(&l1, &l1, &grid).verdict, Verdict::Fail);
        assert_eq!(compare_weights(&l2, &l1, &grid).verdict, Verdict::Fail);
    }

    #[test]
    fn conjugate_at_zero_is_minus_omega_one() {
        for w in [WeightFunction::log_power(1.0).unwrap(), WeightFunction::gevrey_root(3.0).unwrap()] {
            let table = young_conjugate(&w, &[0.0]).unwrap();
            assert!((table.values[0] + w.eval(1.0).unwrap()).abs() < 1e-14);
            assert_eq!(table.argmax_t[0], 0.0);
        }
    }

    #[test]
    fn conjugate_flags_cap_limited_entries() {
        // phi(t) = log(1+e^t) has slope < 1, so s = 2 runs to the cap.
        let w = WeightFunction::log_power(1.0).unwrap();
        let table = young_conjugate(&w, &[0.5, 2.0]).unwrap();
        assert_eq!(table.cap_limited, vec![false, true]);
    }

    #[test]
    fn conjugate_csv_header() {
        let w = WeightFunction::gevrey_root(2.0).unwrap();
        let csv = young_conjugate(&w, &[1.0, 2.0]).unwrap().to_csv();
        assert!(csv.starts_with("s,phi_star,argmax_t\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn delta_convexity() {
        assert_eq!(check_delta_convexity(&WeightFunction::log_power(1.0).unwrap(), 400, 1e-12), Verdict::Pass);
        let grid = default_grid(1e6);
        let concave = WeightFunction::tabulate(&grid, |t| t.ln_1p().sqrt()).unwrap();
        assert_eq!(check_delta_convexity(&concave, 400, 1e-12), Verdict::Fail);
    }
}
