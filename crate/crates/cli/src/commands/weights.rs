use serde::Deserialize;
use serde_json::{json, Value};
use tfnuclear::weights::{check_little_o, default_grid, young_conjugate};
use tfnuclear::{Error, Verdict, WeightFunction};

use super::exit_for;
use crate::config::{default_weight, parse, to_value, CliError, CliResult, Context, Outcome};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    #[serde(default = "default_weight")]
    weight: Value,
    /// Right end of the certification grid; the weight's domain cap by default.
    t_max: Option<f64>,
    #[serde(default = "s_max")]
    s_max: f64,
    #[serde(default = "s_points")]
    s_points: usize,
}

fn s_max() -> f64 {
    20.0
}

fn s_points() -> usize {
    201
}

/// Certificate or the reason it could not be issued; other errors abort.
fn certificate<T>(r: tfnuclear::Result<T>, ok: impl FnOnce(T) -> Value) -> CliResult<(bool, Value)> {
    match r {
        Ok(v) => Ok((true, ok(v))),
        Err(Error::ConditionFailure(m)) => Ok((false, json!({"certified": false, "reason": m}))),
        Err(e) => Err(e.into()),
    }
}

pub fn check(params: &Value, _ctx: &Context) -> CliResult<Outcome> {
    let cfg: Config = parse(params)?;
    let mut w = WeightFunction::from_value(&cfg.weight).map_err(|e| CliError::Config(format!("weight: {e}")))?;
    if cfg.s_points < 2 || !(cfg.s_max > 0.0) {
        return Err(CliError::Config("need s_points >= 2 and s_max > 0".into()));
    }
    let grid = default_grid(cfg.t_max.unwrap_or(w.domain_cap).min(w.domain_cap));

    let (alpha_ok, alpha) = certificate(w.certify_alpha(&grid), |l| json!({"certified": true, "L": l}))?;
    let (gamma_ok, gamma) = certificate(w.certify_gamma(&grid), |(a, b)| json!({"certified": true, "a": a, "b": b}))?;
    let tail = check_little_o(&w, &grid);
    let s_grid: Vec<f64> = (0..cfg.s_points).map(|i| cfg.s_max * i as f64 / (cfg.s_points - 1) as f64).collect();
    let table = young_conjugate(&w, &s_grid)?;
    let conj_ok = table.invariants_hold(1e-9);

    let mut failures = vec![];
    if !alpha_ok {
        failures.push("alpha");
    }
    if !gamma_ok {
        failures.push("gamma");
    }
    if tail.verdict == Verdict::Fail {
        failures.push("beta");
    }
    if !conj_ok {
        failures.push("conjugate_invariants");
    }
    let code = exit_for(failures.len(), usize::from(tail.verdict == Verdict::Inconclusive));
    let summary = if failures.is_empty() && tail.verdict == Verdict::Pass {
        "all conditions certified".to_string()
    } else if failures.is_empty() {
        "little-o condition inconclusive".to_string()
    } else {
        format!("failed: {}", failures.join(", "))
    };
    let result = json!({
        "weight": to_value(&w.family),
        "domain_cap": w.domain_cap,
        "alpha": alpha,
        "gamma": gamma,
        "beta": to_value(&tail),
        "conjugate": {
            "points": s_grid.len(),
            "cap_limited": table.cap_limited.iter().filter(|&&c| c).count(),
            "invariants_hold": conj_ok,
        },
        "failures": failures,
    });
    Ok(Outcome { code, summary, result, files: vec![("conjugate.csv".into(), table.to_csv())] })
}
