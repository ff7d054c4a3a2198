use serde::Deserialize;
use serde_json::{json, Value};
use tfnuclear::koethe::{gp_test, GpVerdict, KoetheIndex, KoetheMatrix, DEFAULT_RADII};
use tfnuclear::weights::default_grid;
use tfnuclear::{Error, LatticeSpec, WeightFunction};

use super::exit_for;
use crate::config::{default_weight, parse, to_value, CliError, CliResult, Context, Outcome, EXIT_FAILURE};

fn weight_matrix() -> String {
    "weight".into()
}

fn index() -> KoetheIndex {
    KoetheIndex::Lattice2d { alpha: 1.0, beta: 1.0, d: 1 }
}

fn ks() -> Vec<u32> {
    vec![1, 2, 3]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    /// `weight`, `constant`, `polynomial` or `oscillatory`.
    #[serde(default = "weight_matrix")]
    matrix: String,
    #[serde(default = "default_weight")]
    weight: Value,
    #[serde(default = "index")]
    index: KoetheIndex,
    #[serde(default = "ks")]
    k: Vec<u32>,
    /// Candidates for `m`; `k+1..=k+6` per `k` by default.
    m_candidates: Option<Vec<u32>>,
    radii: Option<Vec<usize>>,
}

pub fn gp(params: &Value, _ctx: &Context) -> CliResult<Outcome> {
    let cfg: Config = parse(params)?;
    let a = match cfg.matrix.as_str() {
        "weight" => {
            let KoetheIndex::Lattice2d { alpha, beta, d } = cfg.index else {
                return Err(CliError::Config("the weight matrix needs a lattice2d index".into()));
            };
            let mut omega = WeightFunction::from_value(&cfg.weight).map_err(|e| CliError::Config(format!("weight: {e}")))?;
            match omega.certify_gamma(&default_grid(omega.domain_cap)) {
                Ok(_) => {}
                Err(Error::ConditionFailure(m)) => {
                    let result = json!({"matrix": "weight", "message": format!("weight fails (gamma): {m}")});
                    return Ok(Outcome { code: EXIT_FAILURE, summary: "weight fails (gamma)".into(), result, files: vec![] });
                }
                Err(e) => return Err(e.into()),
            }
            KoetheMatrix::from_weight(&omega, &LatticeSpec::new(alpha, beta, d, 1, 1)?)
        }
        "constant" => KoetheMatrix::constant(cfg.index.clone()),
        "polynomial" => KoetheMatrix::polynomial(cfg.index.clone()),
        "oscillatory" => KoetheMatrix::oscillatory(cfg.index.clone()),
        other => return Err(CliError::Config(format!("unknown matrix {other:?}"))),
    };
    if cfg.k.is_empty() {
        return Err(CliError::Config("\"k\" must not be empty".into()));
    }
    let radii = cfg.radii.clone().unwrap_or_else(|| DEFAULT_RADII.to_vec());

    let mut tests = vec![];
    let (mut failures, mut inconclusive) = (0, 0);
    let mut csv = String::from("k,m,radius,sum,contribution,ratio,verdict\n");
    for &k in &cfg.k {
        let ms = cfg.m_candidates.clone().unwrap_or_else(|| (k + 1..=k + 6).collect());
        let t = gp_test(&a, k, &ms, &radii)?;
        if t.m_found.is_none() {
            if t.reports.iter().any(|r| r.verdict == GpVerdict::Inconclusive) {
                inconclusive += 1;
            } else {
                failures += 1;
            }
        }
        for r in &t.reports {
            for s in &r.shells {
                let ratio = s.ratio.map(tfnuclear::io::fmt17).unwrap_or_default();
                csv.push_str(&format!(
                    "{},{},{},{},{},{ratio},{}\n",
                    r.k,
                    r.m,
                    s.radius,
                    tfnuclear::io::fmt17(s.sum),
                    tfnuclear::io::fmt17(s.contribution),
                    to_value(&r.verdict).as_str().unwrap_or_default()
                ));
            }
        }
        tests.push(t);
    }
    let found: Vec<String> = tests
        .iter()
        .map(|t| format!("k={}: {}", t.k, t.m_found.map_or("none".to_string(), |m| format!("m={m}"))))
        .collect();
    let result = json!({ "matrix": a.name, "index": to_value(&cfg.index), "radii": radii, "tests": to_value(&tests) });
    Ok(Outcome {
        code: exit_for(failures, inconclusive),
        summary: format!("convergent m: {}", found.join(", ")),
        result,
        files: vec![("gp.csv".into(), csv)],
    })
}
