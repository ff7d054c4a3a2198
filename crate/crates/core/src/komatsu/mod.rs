//! Weight sequences `(M_p)`, their associated function
//! `M(t) = sup_{p >= 1} log(t^p M_0 / M_p)`, finite renderings of the
//! conditions (M1), (M2)', the mixed growth condition on
//! `s^{s/2} M_p / M_{s+p}` and the shift condition
//! `M(t) + log t <= M(Ht) + H`, and the nuclearity verdict built on them.
//!
//! Everything is evaluated on `log M_p` and `u = log t`, so that sequences
//! such as `e^{p^3}` stay in range up to `p = 10^4`.

pub mod hermite;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coeffs::{CoefficientArray, IndexSet};
use crate::error::{Error, Result};
use crate::gabor::linear_fit;
use crate::grid::SampledFunction;
use crate::{par_map, Verdict};

pub use hermite::{hermite_coefficients, hermite_function, hermite_synthesis};

pub const DEFAULT_P_MAX: usize = 10_000;
/// Share of cap-limited nodes tolerated by [`associated_function`].
pub const CAP_SHARE: f64 = 0.05;
pub const M1_SLACK: f64 = 1e-12;
pub const SHIFT_SLACK: f64 = 1e-9;
/// Margin added to the fitted slope of `log(M_{p+1}/M_p)`.
pub const M2_DELTA: f64 = 0.1;
/// Relative change of `B` between `P/2` and `P` counted as stable.
pub const B_STABILITY: f64 = 0.01;
pub const DEFAULT_H_CANDIDATES: [f64; 10] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0];
pub const DEFAULT_C_LADDER: [f64; 4] = [1.0, 0.5, 0.25, 0.125];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MpFamily {
    /// `M_p = (p!)^s`.
    FactorialPower { s: f64 },
    /// `M_p = exp(c p^r)`.
    ExpPoly { c: f64, r: f64 },
    /// Tabulated `log M_p`, `p = 0, 1, ...`.
    Custom {
        #[serde(rename = "logM")]
        log_m: Vec<f64>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct MpSequence {
    pub name: String,
    pub family: MpFamily,
    pub p_max: usize,
    #[serde(skip)]
    log_m: Vec<f64>,
}

impl MpSequence {
    pub fn new(family: MpFamily, p_max: Option<usize>) -> Result<Self> {
        let (name, log_m) = match &family {
            MpFamily::FactorialPower { s } => {
                if !(s.is_finite() && *s > 0.0) {
                    return Err(Error::InvalidParameter(format!("factorial power needs s > 0, got {s}")));
                }
                let p_max = p_max.unwrap_or(DEFAULT_P_MAX);
                let mut acc = 0.0;
                let table = (0..=p_max)
                    .map(|p| {
                        if p > 0 {
                            acc += (p as f64).ln();
                        }
                        s * acc
                    })
                    .collect();
                (format!("factorial_power(s={s})"), table)
            }
            MpFamily::ExpPoly { c, r } => {
                if !(c.is_finite() && r.is_finite() && *c > 0.0 && *r > 0.0) {
                    return Err(Error::InvalidParameter(format!("exp_poly needs c, r > 0, got c={c}, r={r}")));
                }
                let p_max = p_max.unwrap_or(DEFAULT_P_MAX);
                (format!("exp_poly(c={c},r={r})"), (0..=p_max).map(|p| c * (p as f64).powf(*r)).collect())
            }
            MpFamily::Custom { log_m } => {
                if log_m.len() < 3 || log_m.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("custom logM needs at least 3 finite entries".into()));
                }
                let n = p_max.map_or(log_m.len(), |p| (p + 1).min(log_m.len()));
                ("custom".to_string(), log_m[..n].to_vec())
            }
        };
        let p_max = log_m.len() - 1;
        Ok(Self { name, family, p_max, log_m })
    }

    pub fn factorial_power(s: f64) -> Result<Self> {
        Self::new(MpFamily::FactorialPower { s }, None)
    }

    pub fn exp_poly(c: f64, r: f64) -> Result<Self> {
        Self::new(MpFamily::ExpPoly { c, r }, None)
    }

    pub fn custom(log_m: Vec<f64>) -> Result<Self> {
        Self::new(MpFamily::Custom { log_m }, None)
    }

    /// `{"family": ..., ..., "p_max": optional}`.
    pub fn from_value(value: &serde_json::Value) -> Result<Self> {
        let family: MpFamily = serde_json::from_value(value.clone())?;
        let p_max = value.get("p_max").and_then(|v| v.as_u64()).map(|v| v as usize);
        Self::new(family, p_max)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(&serde_json::from_str(text)?)
    }

    pub fn log_m(&self, p: usize) -> f64 {
        self.log_m[p]
    }

    pub fn log_table(&self) -> &[f64] {
        &self.log_m
    }

    /// `log M_p / p` strictly increasing over the last decade of indices,
    /// the finite stand-in for `M_p^{1/p} -> inf`.
    pub fn growth_proxy(&self) -> bool {
        let start = (self.p_max / 10).max(1);
        let q: Vec<f64> = (start..=self.p_max).map(|p| self.log_m[p] / p as f64).collect();
        q.len() >= 2 && q.windows(2).all(|w| w[1] > w[0])
    }

    /// `(M(e^u), argmax p)` by brute force over `1 <= p <= p_max`.
    pub fn associated_at(&self, u: f64) -> (f64, usize) {
        let l0 = self.log_m[0];
        let mut best = (f64::NEG_INFINITY, 1);
        for p in 1..=self.p_max {
            let v = p as f64 * u + l0 - self.log_m[p];
            if v > best.0 {
                best = (v, p);
            }
        }
        best
    }

    /// `u = log(M_{p+1}/M_p)`, the value of `log t` at which the maximizer
    /// of `M` moves past `p`.
    pub fn log_ratio(&self, p: usize) -> f64 {
        self.log_m[p + 1] - self.log_m[p]
    }
}

/// `M(t)` on a grid of `u = log t`.
#[derive(Clone, Debug, Serialize)]
pub struct AssociatedFunction {
    #[serde(skip)]
    pub parent: MpSequence,
    pub log_t: Vec<f64>,
    pub values: Vec<f64>,
    pub argmax_p: Vec<usize>,
    pub cap_limited: Vec<bool>,
}

/// Log-t grid: step `0.02` on `[0, min(20, u_max)]`, then geometric with
/// factor `1.01`, up to `u_max = log(M_{q+1}/M_q)` with `q = p_max/4`.
pub fn default_log_t_grid(mp: &MpSequence) -> Vec<f64> {
    let q = (mp.p_max / 4).max(1).min(mp.p_max - 1);
    let u_max = mp.log_ratio(q).max(1.0);
    let mut grid = Vec::new();
    let uniform_end = u_max.min(20.0);
    let steps = (uniform_end / 0.02).round() as usize;
    for i in 0..=steps {
        grid.push(uniform_end * i as f64 / steps.max(1) as f64);
    }
    let mut u = uniform_end * 1.01;
    while u < u_max {
        grid.push(u);
        u *= 1.01;
    }
    if *grid.last().expect("non-empty") < u_max {
        grid.push(u_max);
    }
    grid
}

/// Brute-force `M` with argmax tracking on `log_t`; errors when more than
/// 5% of the nodes have their maximizer at `p_max`.
pub fn associated_function(mp: &MpSequence, log_t: &[f64]) -> Result<AssociatedFunction> {
    let pairs = par_map(log_t.len(), |i| mp.associated_at(log_t[i]));
    let cap_limited: Vec<bool> = pairs.iter().map(|&(_, p)| p == mp.p_max).collect();
    let capped = cap_limited.iter().filter(|&&c| c).count();
    if capped as f64 > CAP_SHARE * log_t.len() as f64 {
        return Err(Error::CapLimited(format!(
            "{capped} of {} nodes have their maximizer at p_max = {}; increase p_max",
            log_t.len(),
            mp.p_max
        )));
    }
    Ok(AssociatedFunction {
        parent: mp.clone(),
        log_t: log_t.to_vec(),
        values: pairs.iter().map(|p| p.0).collect(),
        argmax_p: pairs.iter().map(|p| p.1).collect(),
        cap_limited,
    })
}

impl AssociatedFunction {
    /// Monotone values and maximizers, convexity in `log t`.
    pub fn invariants_hold(&self) -> bool {
        let n = self.values.len();
        let tol = |a: f64, b: f64| 1e-12 * a.abs().max(b.abs()).max(1.0);
        let monotone = (1..n).all(|i| {
            self.values[i] >= self.values[i - 1] - tol(self.values[i], self.values[i - 1])
                && self.argmax_p[i] >= self.argmax_p[i - 1]
        });
        let convex = (2..n).all(|i| {
            let s1 = (self.values[i - 1] - self.values[i - 2]) / (self.log_t[i - 1] - self.log_t[i - 2]);
            let s2 = (self.values[i] - self.values[i - 1]) / (self.log_t[i] - self.log_t[i - 1]);
            s2 >= s1 - 1e-9 * s1.abs().max(s2.abs()).max(1.0)
        });
        monotone && convex
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("log_t,M,argmax_p,cap_limited\n");
        for i in 0..self.values.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                crate::io::fmt17(self.log_t[i]),
                crate::io::fmt17(self.values[i]),
                self.argmax_p[i],
                self.cap_limited[i]
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    M1,
    M2prime,
    Cond12,
    Cond43,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub holds: Verdict,
    pub witness: BTreeMap<String, f64>,
    pub evidence: Vec<f64>,
    pub note: String,
}

impl ConditionReport {
    fn new(condition: Condition, holds: Verdict, note: impl Into<String>) -> Self {
        Self { condition, holds, witness: BTreeMap::new(), evidence: vec![], note: note.into() }
    }
}

fn check_order(p: usize, limit: usize) -> Result<()> {
    if p == 0 || p > limit {
        return Err(Error::Precondition(format!("P = {p} must lie in [1, {limit}]")));
    }
    Ok(())
}

/// Log-convexity `2 log M_p <= log M_{p-1} + log M_{p+1}` for `1 <= p <= P`.
/// The evidence trace holds the excess at each `p`.
pub fn check_m1(mp: &MpSequence, p_top: usize) -> Result<ConditionReport> {
    check_order(p_top, mp.p_max - 1)?;
    let excess: Vec<f64> = (1..=p_top).map(|p| 2.0 * mp.log_m[p] - mp.log_m[p - 1] - mp.log_m[p + 1]).collect();
    let first_bad = excess.iter().enumerate().find(|(i, &e)| {
        let p = i + 1;
        e > M1_SLACK * mp.log_m[p].abs().max(1.0)
    });
    let mut r = match first_bad {
        Some((i, _)) => ConditionReport::new(Condition::M1, Verdict::Fail, format!("violated at p = {}", i + 1)),
        None => ConditionReport::new(Condition::M1, Verdict::Pass, format!("log-convex for p <= {p_top}")),
    };
    r.witness.insert("P".into(), p_top as f64);
    if let Some((i, _)) = first_bad {
        r.witness.insert("p_violation".into(), (i + 1) as f64);
    }
    r.evidence = excess;
    Ok(r)
}

/// Linear-growth test on `r_p = log(M_{p+1}/M_p)`, `p <= P`.
///
/// Fits `r_p ~ a + b p` on `[P/2, P]`, sets `H = e^{b + 0.1}` and
/// `A = exp(max_p (r_p - log H p))`. Fails when `r_p / p` increases over the
/// last ten indices; holds when the residual `r_p - log H p` is
/// non-increasing there.
pub fn check_m2prime(mp: &MpSequence, p_top: usize) -> Result<ConditionReport> {
    check_order(p_top, mp.p_max - 1)?;
    if p_top < 20 {
        return Err(Error::Precondition("P must be at least 20".into()));
    }
    let r: Vec<f64> = (0..=p_top).map(|p| mp.log_ratio(p)).collect();
    let lo = p_top / 2;
    let ps: Vec<f64> = (lo..=p_top).map(|p| p as f64).collect();
    let fit = linear_fit(&ps, &r[lo..]);
    let log_h = fit.slope.max(0.0) + M2_DELTA;
    let residual: Vec<f64> = r.iter().enumerate().map(|(p, v)| v - log_h * p as f64).collect();
    let tail = p_top - 10..=p_top;
    let ratio_growing = tail.clone().skip(1).all(|p| r[p] / p as f64 > r[p - 1] / (p - 1) as f64);
    let residual_falling = tail.skip(1).all(|p| residual[p] <= residual[p - 1] + 1e-12 * residual[p - 1].abs().max(1.0));
    let max_res = residual.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut rep = if ratio_growing {
        ConditionReport::new(Condition::M2prime, Verdict::Fail, "log(M_{p+1}/M_p)/p increases over the last indices")
    } else if residual_falling {
        ConditionReport::new(Condition::M2prime, Verdict::Pass, "log(M_{p+1}/M_p) grows at most linearly")
    } else {
        ConditionReport::new(Condition::M2prime, Verdict::Inconclusive, "neither growth test fired")
    };
    if rep.holds == Verdict::Pass {
        rep.witness.insert("H".into(), log_h.exp());
        rep.witness.insert("A".into(), max_res.exp());
    }
    rep.witness.insert("slope".into(), fit.slope);
    rep.witness.insert("P".into(), p_top as f64);
    rep.evidence = residual;
    Ok(rep)
}

/// `log B` required at truncations `P` and `P/2` for every `C` in the ladder.
fn b_required(mp: &MpSequence, p_top: usize, log_h: f64, log_c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let half = p_top / 2;
    let rows = par_map(p_top + 1, |s| {
        let sf = s as f64;
        let base_s = if s == 0 { 0.0 } else { 0.5 * sf * sf.ln() };
        let mut full = vec![f64::NEG_INFINITY; log_c.len()];
        let mut halfv = vec![f64::NEG_INFINITY; log_c.len()];
        for p in 0..=p_top {
            let base = base_s + mp.log_m[p] - mp.log_m[s + p] - (s + p) as f64 * log_h;
            for (j, lc) in log_c.iter().enumerate() {
                let v = base - sf * lc;
                full[j] = full[j].max(v);
                if s <= half && p <= half {
                    halfv[j] = halfv[j].max(v);
                }
            }
        }
        (full, halfv)
    });
    let mut full = vec![f64::NEG_INFINITY; log_c.len()];
    let mut halfv = full.clone();
    for (f, h) in rows {
        for j in 0..log_c.len() {
            full[j] = full[j].max(f[j]);
            halfv[j] = halfv[j].max(h[j]);
        }
    }
    (full, halfv)
}

/// Sweep of `s^{s/2} M_p <= B C^s H^{s+p} M_{s+p}` over `s, p <= P`: an `H`
/// passes when, for every `C` in the ladder, the required `B` changes by less
/// than 1% between truncations `P/2` and `P`.
pub fn check_12l(mp: &MpSequence, p_top: usize, h_candidates: &[f64], c_ladder: &[f64]) -> Result<ConditionReport> {
    check_order(p_top, mp.p_max / 2)?;
    if h_candidates.iter().any(|&h| !(h > 1.0)) || c_ladder.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::InvalidParameter("H candidates must exceed 1 and C values be positive".into()));
    }
    let log_c: Vec<f64> = c_ladder.iter().map(|c| c.ln()).collect();
    let mut evidence = Vec::new();
    for &h in h_candidates {
        let (full, half) = b_required(mp, p_top, h.ln(), &log_c);
        let stable = full.iter().zip(&half).all(|(f, hv)| f.is_finite() && (f - hv).abs() < (1.0 + B_STABILITY).ln());
        evidence.push(full.iter().zip(&half).map(|(f, hv)| f - hv).fold(0.0, f64::max));
        if stable {
            let mut r = ConditionReport::new(Condition::Cond12, Verdict::Pass, format!("B stable at P = {p_top} for H = {h}"));
            r.witness.insert("H".into(), h);
            for (c, f) in c_ladder.iter().zip(&full) {
                r.witness.insert(format!("B[C={c}]"), f.exp());
            }
            r.evidence = evidence;
            return Ok(r);
        }
    }
    let mut r = ConditionReport::new(Condition::Cond12, Verdict::Inconclusive, "required B still growing at P for every H");
    r.evidence = evidence;
    Ok(r)
}

/// `M(t) + log t <= M(Ht) + H` on the grid of `m`, per `H`; nodes where
/// either side has its maximizer at `p_max` are excluded.
pub fn check_43(m: &AssociatedFunction, h_candidates: &[f64]) -> Result<ConditionReport> {
    if h_candidates.is_empty() || h_candidates.iter().any(|&h| !(h > 1.0)) {
        return Err(Error::InvalidParameter("H candidates must exceed 1".into()));
    }
    let mp = &m.parent;
    let n = m.log_t.len();
    let mut last_trace = Vec::new();
    let mut excluded = 0;
    for &h in h_candidates {
        let lh = h.ln();
        let shifted = par_map(n, |i| mp.associated_at(m.log_t[i] + lh));
        let trace: Vec<f64> = (0..n)
            .map(|i| {
                if m.cap_limited[i] || shifted[i].1 == mp.p_max {
                    f64::NAN
                } else {
                    m.values[i] + m.log_t[i] - shifted[i].0 - h
                }
            })
            .collect();
        excluded = trace.iter().filter(|v| v.is_nan()).count();
        let scale = |i: usize| SHIFT_SLACK * m.values[i].abs().max(1.0);
        if trace.iter().enumerate().all(|(i, v)| v.is_nan() || *v <= scale(i)) && excluded < n {
            let mut r = ConditionReport::new(Condition::Cond43, Verdict::Pass, format!("{excluded} cap-limited nodes excluded"));
            r.witness.insert("H".into(), h);
            r.evidence = trace;
            return Ok(r);
        }
        last_trace = trace;
    }
    let argmax = last_trace
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let holds = if argmax * 10 >= 9 * n { Verdict::Fail } else { Verdict::Inconclusive };
    let mut r = ConditionReport::new(
        Condition::Cond43,
        holds,
        format!("no H passes; largest residual at node {argmax} of {n}; {excluded} cap-limited nodes excluded"),
    );
    r.evidence = last_trace;
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct NuclearityReport {
    pub sequence: String,
    pub applicable: bool,
    pub growth_proxy: bool,
    pub nuclear: Option<bool>,
    pub consistent: bool,
    pub preconditions: Vec<ConditionReport>,
    pub m2prime: Option<ConditionReport>,
    pub cond43: Option<ConditionReport>,
    pub note: String,
}

/// Truncation used by the verdict for (M1) and (M2)'.
pub fn default_p(mp: &MpSequence) -> usize {
    (mp.p_max - 1).min(1000)
}

/// Truncation used by the verdict for the mixed growth condition.
pub fn default_p_12(mp: &MpSequence) -> usize {
    (mp.p_max / 2).min(1000)
}

/// Preconditions (growth proxy, (M1), mixed growth), then the (M2)' verdict
/// cross-checked against the shift condition on `M`.
pub fn nuclearity_verdict(mp: &MpSequence) -> Result<NuclearityReport> {
    let mut report = NuclearityReport {
        sequence: mp.name.clone(),
        applicable: false,
        growth_proxy: mp.growth_proxy(),
        nuclear: None,
        consistent: true,
        preconditions: vec![],
        m2prime: None,
        cond43: None,
        note: String::new(),
    };
    if !report.growth_proxy {
        report.note = "theorem inapplicable: log M_p / p is not increasing".into();
        return Ok(report);
    }
    let m1 = check_m1(mp, default_p(mp))?;
    let m1_ok = m1.holds == Verdict::Pass;
    report.preconditions.push(m1);
    if !m1_ok {
        report.note = "theorem inapplicable: (M1) fails".into();
        return Ok(report);
    }
    let c12 = check_12l(mp, default_p_12(mp), &DEFAULT_H_CANDIDATES, &DEFAULT_C_LADDER)?;
    let c12_ok = c12.holds == Verdict::Pass;
    report.preconditions.push(c12);
    if !c12_ok {
        report.note = "theorem inapplicable: mixed growth condition not confirmed".into();
        return Ok(report);
    }
    report.applicable = true;
    let m2 = check_m2prime(mp, default_p(mp))?;
    let m = associated_function(mp, &default_log_t_grid(mp))?;
    let c43 = check_43(&m, &DEFAULT_H_CANDIDATES)?;
    report.consistent = !matches!((m2.holds, c43.holds), (Verdict::Pass, Verdict::Fail) | (Verdict::Fail, Verdict::Pass));
    report.nuclear = match m2.holds {
        Verdict::Pass => Some(true),
        Verdict::Fail => Some(false),
        Verdict::Inconclusive => None,
    };
    report.note = if !report.consistent {
        "internal inconsistency: (M2)' and shift-condition verdicts disagree".into()
    } else if report.nuclear.is_none() {
        "(M2)' inconclusive".into()
    } else {
        "coherent verdict".into()
    };
    report.m2prime = Some(m2);
    report.cond43 = Some(c43);
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HermiteDecayRow {
    pub k: u32,
    pub sup: f64,
    pub sup_half: f64,
    pub finite: bool,
}

/// `log a*_{gamma,k} = max(M(k |gamma|^{1/2}), 0)` with `|gamma| = Σ gamma_j`.
pub fn log_hermite_weight(mp: &MpSequence, gamma: &[i64], k: u32) -> f64 {
    let len: i64 = gamma.iter().sum();
    if len == 0 || k == 0 {
        return 0.0;
    }
    let u = (k as f64).ln() + 0.5 * (len as f64).ln();
    mp.associated_at(u).0.max(0.0)
}

/// Per `k`: `sup |xi_gamma| a*_{gamma,k}` over the full box and over the
/// half box; finite when the full sup exceeds the half sup by at most 10%.
pub fn hermite_decay_check(xi: &CoefficientArray, mp: &MpSequence, k_ladder: &[u32]) -> Result<Vec<HermiteDecayRow>> {
    let IndexSet::MultiIndex { gamma_max, .. } = xi.index else {
        return Err(Error::InvalidParameter("multi-index coefficients required".into()));
    };
    let half = gamma_max / 2;
    let mut cache: BTreeMap<(i64, u32), f64> = BTreeMap::new();
    Ok(k_ladder
        .iter()
        .map(|&k| {
            let (mut full, mut halfv) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (i, v) in xi.values.iter().enumerate() {
                if v.norm() == 0.0 {
                    continue;
                }
                let g = xi.index.index(i);
                let len: i64 = g.iter().sum();
                let w = *cache.entry((len, k)).or_insert_with(|| log_hermite_weight(mp, &g, k));
                let l = v.norm().ln() + w;
                full = full.max(l);
                if xi.index.radius(i) <= half {
                    halfv = halfv.max(l);
                }
            }
            let finite = full == f64::NEG_INFINITY || full - halfv <= (1.0 + crate::gabor::GROWTH_TOL).ln();
            HermiteDecayRow { k, sup: full.exp(), sup_half: halfv.exp(), finite }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeminormReport {
    pub j: f64,
    pub value: f64,
    /// Largest term of total order `n`, per `n`.
    pub per_order: Vec<f64>,
    /// `(alpha, beta)` of the largest term.
    pub argmax: (usize, usize),
    pub stabilized: bool,
}

pub const MAX_SEMINORM_ORDER: usize = 12;

/// `max_{alpha + beta <= order_cap} j^{alpha+beta} / M_{alpha+beta}
/// ||x^alpha f^{(beta)}||_2` with spectral derivatives; stabilized when the
/// largest term sits below the top order and the last order's terms shrink.
pub fn seminorm_smp(f: &SampledFunction, mp: &MpSequence, j: f64, order_cap: usize) -> Result<SeminormReport> {
    if f.d != 1 {
        return Err(Error::Precondition("seminorm is implemented for d = 1".into()));
    }
    if order_cap > MAX_SEMINORM_ORDER || order_cap > mp.p_max {
        return Err(Error::Precondition(format!("order cap {order_cap} exceeds {MAX_SEMINORM_ORDER}")));
    }
    if !(j > 0.0) {
        return Err(Error::InvalidParameter(format!("j must be positive, got {j}")));
    }
    let derivs: Vec<SampledFunction> = (0..=order_cap).map(|b| f.spectral_derivative(b as u32)).collect::<Result<_>>()?;
    let xs: Vec<f64> = (0..f.n).map(|i| f.coord(i)).collect();
    let mut per_order = Vec::with_capacity(order_cap + 1);
    let mut best = (f64::NEG_INFINITY, (0, 0));
    for n in 0..=order_cap {
        let scale = n as f64 * j.ln() - mp.log_m(n);
        let mut top = f64::NEG_INFINITY;
        for beta in 0..=n {
            let alpha = n - beta;
            let g = &derivs[beta];
            let sq: f64 = xs.iter().zip(&g.values).map(|(x, v)| (x.powi(alpha as i32) * v.norm()).powi(2)).sum::<f64>() * f.h;
            let term = (sq.sqrt().ln() + scale).exp();
            if term > best.0 {
                best = (term, (alpha, beta));
            }
            top = top.max(term);
        }
        per_order.push(top);
    }
    let stabilized = order_cap >= 2
        && best.1 .0 + best.1 .1 < order_cap
        && per_order[order_cap] < per_order[order_cap - 1];
    Ok(SeminormReport { j, value: best.0, per_order, argmax: best.1, stabilized })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{DEFAULT_H, DEFAULT_R};
    use num_complex::Complex64;

    fn fp(s: f64) -> MpSequence {
        MpSequence::factorial_power(s).unwrap()
    }

    fn ep(r: f64) -> MpSequence {
        MpSequence::exp_poly(1.0, r).unwrap()
    }

    #[test]
    fn sequence_json() {
        let a = MpSequence::from_json(r#"{"family":"factorial_power","s":2.0}"#).unwrap();
        assert_eq!(a.family, MpFamily::FactorialPower { s: 2.0 });
        assert_eq!(a.p_max, DEFAULT_P_MAX);
        let b = MpSequence::from_json(r#"{"family":"exp_poly","c":1.0,"r":3.0,"p_max":500}"#).unwrap();
        assert_eq!(b.p_max, 500);
        assert_eq!(b.log_m(2), 8.0);
        let c = MpSequence::from_json(r#"{"family":"custom","logM":[0.0,0.0,1.0,3.0]}"#).unwrap();
        assert_eq!(c.p_max, 3);
        assert!(MpSequence::from_json(r#"{"family":"nope"}"#).is_err());
        assert!(MpSequence::factorial_power(-1.0).is_err());
    }

    #[test]
    fn factorial_table_matches_direct_product() {
        let s = fp(1.0);
        let direct: f64 = (1..=20).map(|i| i as f64).product::<f64>().ln();
        assert!((s.log_m(20) - direct).abs() < 1e-12);
        assert!(s.growth_proxy() && ep(2.0).growth_proxy());
        assert!(!MpSequence::custom(vec![0.0; 50]).unwrap().growth_proxy());
    }

    #[test]
    fn associated_function_examples() {
        let s = fp(1.0);
        let (m1, p1) = s.associated_at(0.0);
        assert_eq!((m1, p1), (0.0, 1));
        // Independent scan with the factorial computed by a running product.
        let mut best = f64::NEG_INFINITY;
        let mut fact = 1.0f64;
        for p in 1..=170 {
            fact *= p as f64;
            best = best.max(p as f64 - fact.ln());
        }
        let (me, _) = s.associated_at(1.0);
        assert!((me - best).abs() < 1e-12);
        // Over p >= 1 the maximizer at t = e is p = 2.
        assert!((me - (2.0 - 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn associated_function_invariants() {
        for mp in [fp(2.0), ep(2.0), ep(3.0)] {
            let m = associated_function(&mp, &default_log_t_grid(&mp)).unwrap();
            assert!(m.invariants_hold(), "{}", mp.name);
            assert!(!m.cap_limited.iter().any(|&c| c));
        }
        let small = MpSequence::new(MpFamily::FactorialPower { s: 1.0 }, Some(20)).unwrap();
        let grid: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        assert!(matches!(associated_function(&small, &grid), Err(Error::CapLimited(_))));
    }

    #[test]
    fn m1_examples() {
        assert_eq!(check_m1(&fp(2.0), 1000).unwrap().holds, Verdict::Pass);
        assert_eq!(check_m1(&ep(3.0), 1000).unwrap().holds, Verdict::Pass);
        let bad = MpSequence::custom(vec![0.0, 0.0, 10f64.ln(), 11f64.ln(), 20.0]).unwrap();
        let r = check_m1(&bad, 3).unwrap();
        assert_eq!(r.holds, Verdict::Fail);
        assert_eq!(r.witness["p_violation"], 2.0);
        assert!(check_m1(&bad, 4).is_err());
    }

    #[test]
    fn m2prime_examples() {
        for s in [1.5, 2.0, 3.0] {
            assert_eq!(check_m2prime(&fp(s), 1000).unwrap().holds, Verdict::Pass);
        }
        let r = check_m2prime(&ep(2.0), 1000).unwrap();
        assert_eq!(r.holds, Verdict::Pass);
        assert!((r.witness["H"].ln() - 2.1).abs() < 1e-9);
        assert_eq!(check_m2prime(&ep(3.0), 1000).unwrap().holds, Verdict::Fail);
    }

    #[test]
    fn cond12_examples() {
        for mp in [fp(2.0), fp(1.0)] {
            let r = check_12l(&mp, 400, &DEFAULT_H_CANDIDATES, &DEFAULT_C_LADDER).unwrap();
            assert_eq!(r.holds, Verdict::Pass, "{}", mp.name);
            assert!(r.witness.contains_key("H"));
        }
        let ones = MpSequence::custom(vec![0.0; 801]).unwrap();
        assert!(!ones.growth_proxy());
        assert!(!nuclearity_verdict(&ones).unwrap().applicable);
    }

    #[test]
    fn cond43_examples() {
        let m = associated_function(&ep(2.0), &default_log_t_grid(&ep(2.0))).unwrap();
        let r = check_43(&m, &DEFAULT_H_CANDIDATES).unwrap();
        assert_eq!(r.holds, Verdict::Pass);
        let m3 = associated_function(&ep(3.0), &default_log_t_grid(&ep(3.0))).unwrap();
        assert_eq!(check_43(&m3, &DEFAULT_H_CANDIDATES).unwrap().holds, Verdict::Fail);

        let mut shifted = m.clone();
        shifted.values.iter_mut().for_each(|v| *v += 5.0);
        shifted.parent.log_m.iter_mut().skip(1).for_each(|v| *v -= 5.0);
        let a = check_43(&m, &[8.0]).unwrap();
        let b = check_43(&shifted, &[8.0]).unwrap();
        for (x, y) in a.evidence.iter().zip(&b.evidence) {
            assert!((x - y).abs() < 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn nuclearity_examples() {
        for s in [1.5, 2.0, 3.0] {
            let r = nuclearity_verdict(&fp(s)).unwrap();
            assert_eq!(r.nuclear, Some(true), "s = {s}: {}", r.note);
            assert!(r.consistent);
        }
        let r2 = nuclearity_verdict(&ep(2.0)).unwrap();
        assert_eq!((r2.nuclear, r2.consistent), (Some(true), true));
        let r3 = nuclearity_verdict(&ep(3.0)).unwrap();
        assert_eq!((r3.nuclear, r3.consistent), (Some(false), true));

        let mut table: Vec<f64> = fp(2.0).log_table()[..200].to_vec();
        table[2] += 5.0;
        let bad = nuclearity_verdict(&MpSequence::custom(table).unwrap()).unwrap();
        assert!(!bad.applicable && bad.nuclear.is_none());
    }

    fn phi0() -> SampledFunction {
        SampledFunction::from_real_fn(1, DEFAULT_H, DEFAULT_R, |x| (-x[0] * x[0]).exp()).unwrap()
    }

    #[test]
    fn hermite_decay_examples() {
        let mp = fp(2.0);
        let xi = hermite_coefficients(&phi0(), 40).unwrap();
        assert!(hermite_decay_check(&xi, &mp, &[1, 2, 3]).unwrap().iter().all(|r| r.finite));

        let set = IndexSet::MultiIndex { d: 1, gamma_max: 40 };
        let e = CoefficientArray::unit(set.clone(), &[9]).unwrap();
        for row in hermite_decay_check(&e, &mp, &[1, 2, 3]).unwrap() {
            assert!(row.finite);
            assert!((row.sup.ln() - log_hermite_weight(&mp, &[9], row.k)).abs() < 1e-12);
        }

        let synth = CoefficientArray::from_fn(set, |g| Complex64::new((-log_hermite_weight(&mp, g, 2)).exp(), 0.0));
        let flags: Vec<bool> = hermite_decay_check(&synth, &mp, &[1, 2, 3, 4]).unwrap().iter().map(|r| r.finite).collect();
        assert_eq!(flags, vec![true, true, false, false]);
    }

    #[test]
    fn seminorm_examples() {
        let mp = fp(2.0);
        let f = phi0();
        let r1 = seminorm_smp(&f, &mp, 1.0, 12).unwrap();
        assert!(r1.value.is_finite() && r1.stabilized);
        let norm = (std::f64::consts::PI / 2.0).powf(0.25);
        assert!((r1.per_order[0] - norm).abs() < 1e-10);
        let r2 = seminorm_smp(&f, &mp, 2.0, 12).unwrap();
        assert!(r2.value >= r1.value);
        assert!(seminorm_smp(&f, &mp, 1.0, 13).is_err());
    }
}
