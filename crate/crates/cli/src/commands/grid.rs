use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};
use tfnuclear::grid::{random_gaussian_mixture, verify_amalgam_conv, verify_sampling, verify_young, InequalityReport, MixedNormSpec};
use tfnuclear::io::fmt17;
use tfnuclear::weights::default_grid;
use tfnuclear::WeightFunction;

use crate::config::{default_weight, one, parse, CliError, CliResult, Context, LatticeCfg, Outcome, EXIT_FAILURE, EXIT_OK};

fn grid() -> GridSpec {
    GridSpec { h: 0.125, r: 10.0 }
}

fn pairs() -> usize {
    20
}

fn lambdas() -> Vec<f64> {
    vec![-1.0, 0.0, 1.0]
}

fn lattice() -> LatticeCfg {
    LatticeCfg::with_truncation(8)
}

fn yes() -> bool {
    true
}

/// Phase-plane grid; coarser than the time-domain default because every
/// function lives on `2d` axes.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    h: f64,
    #[serde(rename = "R")]
    r: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    #[serde(default = "grid")]
    grid: GridSpec,
    #[serde(default = "pairs")]
    pairs: usize,
    #[serde(default = "lambdas")]
    lambdas: Vec<f64>,
    #[serde(default = "one")]
    p: f64,
    #[serde(default = "one")]
    q: f64,
    #[serde(default = "default_weight")]
    weight: Value,
    /// Lattice for the sampling inequality.
    #[serde(default = "lattice")]
    lattice: LatticeCfg,
    #[serde(default = "yes")]
    amalgam: bool,
    #[serde(default = "yes")]
    sampling: bool,
}

pub fn young(params: &Value, ctx: &Context) -> CliResult<Outcome> {
    let cfg: Config = parse(params)?;
    let lattice = cfg.lattice.spec()?;
    let mut omega = WeightFunction::from_value(&cfg.weight).map_err(|e| CliError::Config(format!("weight: {e}")))?;
    omega.certify_alpha(&default_grid(omega.domain_cap))?;
    for &lambda in &cfg.lambdas {
        MixedNormSpec::new(cfg.p, cfg.q, lambda, omega.clone())?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut csv = String::from("pair,lambda,inequality,lhs,rhs,constant,pass\n");
    let mut rows = vec![];
    let mut worst: Vec<(f64, &str, f64)> = vec![];
    let mut failures = 0usize;
    for pair in 0..cfg.pairs {
        let mut local = ChaCha8Rng::seed_from_u64(rng.random());
        let f = random_gaussian_mixture(&mut local, lattice.d, cfg.grid.h, cfg.grid.r)?;
        let g = random_gaussian_mixture(&mut local, lattice.d, cfg.grid.h, cfg.grid.r)?;
        for &lambda in &cfg.lambdas {
            let spec = MixedNormSpec::new(cfg.p, cfg.q, lambda, omega.clone())?;
            let mut reports: Vec<(&str, InequalityReport)> = vec![("young", verify_young(&f, &g, &spec)?)];
            if cfg.amalgam && lambda >= 0.0 {
                reports.push(("amalgam", verify_amalgam_conv(&f, &g, lambda, &omega)?));
            }
            if cfg.sampling {
                reports.push(("sampling", verify_sampling(&f, &lattice, &spec)?));
            }
            for (name, r) in reports {
                failures += usize::from(!r.pass);
                csv.push_str(&format!(
                    "{pair},{},{name},{},{},{},{}\n",
                    fmt17(lambda),
                    fmt17(r.lhs),
                    fmt17(r.rhs),
                    fmt17(r.constant),
                    r.pass
                ));
                match worst.iter_mut().find(|w| w.0 == lambda && w.1 == name) {
                    Some(w) => w.2 = w.2.max(r.constant),
                    None => worst.push((lambda, name, r.constant)),
                }
                rows.push(json!({"pair": pair, "lambda": lambda, "inequality": name, "report": r}));
            }
        }
    }
    let max_constants: Vec<Value> = worst
        .iter()
        .map(|(lambda, name, c)| json!({"lambda": lambda, "inequality": name, "max_constant": c}))
        .collect();
    let result = json!({
        "L": omega.l(),
        "p": cfg.p,
        "q": cfg.q,
        "pairs": cfg.pairs,
        "failures": failures,
        "max_constants": max_constants,
        "rows": rows,
    });
    let summary = format!("{} checks, {failures} failed", rows_len(&result));
    Ok(Outcome {
        code: if failures == 0 { EXIT_OK } else { EXIT_FAILURE },
        summary,
        result,
        files: vec![("young.csv".into(), csv)],
    })
}

fn rows_len(result: &Value) -> usize {
    result["rows"].as_array().map_or(0, Vec::len)
}
