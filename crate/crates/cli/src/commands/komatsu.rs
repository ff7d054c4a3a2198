use serde::Deserialize;
use serde_json::{json, Value};
use tfnuclear::komatsu::{
    associated_function, default_log_t_grid, hermite_coefficients, hermite_decay_check, nuclearity_verdict, seminorm_smp,
    MpSequence, MAX_SEMINORM_ORDER,
};
use tfnuclear::SampledFunction;

use super::{exit_for, test_function};
use crate::config::{
    one_usize, parse, to_value, CliError, CliResult, Context, GridCfg, Outcome, EXIT_FAILURE, EXIT_INCONCLUSIVE, EXIT_INCONSISTENT,
    EXIT_OK,
};

fn default_sequence() -> Value {
    json!({"family": "factorial_power", "s": 2.0})
}

fn gaussian() -> String {
    "gaussian".into()
}

fn gamma_max() -> usize {
    40
}

fn k_ladder() -> Vec<u32> {
    vec![1, 2, 4, 8]
}

fn seminorm_j() -> Vec<f64> {
    vec![1.0, 2.0]
}

fn order_cap() -> usize {
    MAX_SEMINORM_ORDER
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VerdictConfig {
    #[serde(default = "default_sequence")]
    sequence: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HermiteConfig {
    #[serde(default = "gaussian")]
    function: String,
    #[serde(default)]
    grid: GridCfg,
    #[serde(default = "one_usize")]
    d: usize,
    #[serde(default = "gamma_max")]
    gamma_max: usize,
    #[serde(default = "default_sequence")]
    sequence: Value,
    #[serde(default = "k_ladder")]
    k: Vec<u32>,
    /// Seminorm parameters `j`; seminorms are computed for `d = 1` only.
    #[serde(default = "seminorm_j")]
    seminorm_j: Vec<f64>,
    #[serde(default = "order_cap")]
    order_cap: usize,
}

fn sequence(v: &Value) -> CliResult<MpSequence> {
    MpSequence::from_value(v).map_err(|e| CliError::Config(format!("sequence: {e}")))
}

pub fn verdict(params: &Value, _ctx: &Context) -> CliResult<Outcome> {
    let cfg: VerdictConfig = parse(params)?;
    let mp = sequence(&cfg.sequence)?;
    let report = nuclearity_verdict(&mp)?;
    let mut files = vec![];
    if report.growth_proxy {
        let m = associated_function(&mp, &default_log_t_grid(&mp))?;
        files.push(("associated.csv".to_string(), m.to_csv()));
    }
    let (code, summary) = if !report.applicable {
        (EXIT_FAILURE, report.note.clone())
    } else if !report.consistent {
        (EXIT_INCONSISTENT, report.note.clone())
    } else {
        match report.nuclear {
            Some(n) => (EXIT_OK, format!("nuclear={n}")),
            None => (EXIT_INCONCLUSIVE, report.note.clone()),
        }
    };
    Ok(Outcome { code, summary, result: to_value(&report), files })
}

pub fn hermite(params: &Value, ctx: &Context) -> CliResult<Outcome> {
    let cfg: HermiteConfig = parse(params)?;
    if cfg.order_cap > MAX_SEMINORM_ORDER {
        return Err(CliError::Config(format!("order_cap must be <= {MAX_SEMINORM_ORDER}")));
    }
    let mp = sequence(&cfg.sequence)?;
    let template = SampledFunction::zeros(cfg.d, cfg.grid.h, cfg.grid.r)?;
    let f = test_function(&cfg.function, &template, ctx)?;
    let xi = hermite_coefficients(&f, cfg.gamma_max)?;
    let rows = hermite_decay_check(&xi, &mp, &cfg.k)?;
    let seminorms = if cfg.d == 1 {
        cfg.seminorm_j
            .iter()
            .map(|&j| seminorm_smp(&f, &mp, j, cfg.order_cap.min(mp.p_max)))
            .collect::<tfnuclear::Result<Vec<_>>>()?
    } else {
        vec![]
    };
    let divergent = rows.iter().filter(|r| !r.finite).count();
    let unstable = seminorms.iter().filter(|s| !s.stabilized).count();
    let summary = format!(
        "{} of {} k finite; {} of {} seminorms stabilized",
        rows.len() - divergent,
        rows.len(),
        seminorms.len() - unstable,
        seminorms.len()
    );
    let result = json!({
        "sequence": mp.name,
        "function": cfg.function,
        "gamma_max": cfg.gamma_max,
        "decay": to_value(&rows),
        "seminorms": to_value(&seminorms),
    });
    Ok(Outcome { code: exit_for(divergent, unstable), summary, result, files: vec![("hermite.csv".into(), xi.to_csv(None))] })
}
