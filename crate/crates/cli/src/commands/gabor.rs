use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tfnuclear::gabor::{decay_profile, DecayProfile, DualWindow, WindowKind, DEFAULT_CG_TOL};
use tfnuclear::io::{fmt17, load_sampled, save_sampled};
use tfnuclear::{GaborSystem, SampledFunction, WeightFunction};

use super::test_function;
use crate::config::{default_weight, parse, to_value, CliError, CliResult, Context, GridCfg, LatticeCfg, Outcome, EXIT_FAILURE, EXIT_OK};

fn gaussian() -> String {
    "gaussian".into()
}

fn cg_tol() -> f64 {
    DEFAULT_CG_TOL
}

fn trials() -> usize {
    20
}

fn functions() -> Vec<String> {
    vec!["hermite:3".into()]
}

fn tol() -> f64 {
    1e-4
}

fn ladder() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0, 8.0]
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RoundtripConfig {
    #[serde(default)]
    lattice: LatticeCfg,
    #[serde(default)]
    grid: GridCfg,
    /// `"gaussian"` or the path of a sampled window file.
    #[serde(default = "gaussian")]
    window: String,
    #[serde(default = "cg_tol")]
    cg_tol: f64,
    #[serde(default = "trials")]
    trials: usize,
    #[serde(default = "functions")]
    functions: Vec<String>,
    /// Largest accepted relative reconstruction error.
    #[serde(default = "tol")]
    tol: f64,
    #[serde(default = "default_weight")]
    weight: Value,
    #[serde(default = "ladder")]
    ladder: Vec<f64>,
    #[serde(default = "yes")]
    cache: bool,
    /// Dual-window cache; `<out>/cache` by default.
    cache_dir: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecayConfig {
    #[serde(default)]
    lattice: LatticeCfg,
    #[serde(default)]
    grid: GridCfg,
    #[serde(default = "gaussian")]
    window: String,
    #[serde(default = "gaussian")]
    function: String,
    #[serde(default = "default_weight")]
    weight: Value,
    #[serde(default = "ladder")]
    ladder: Vec<f64>,
}

fn system(lattice: &LatticeCfg, grid: &GridCfg, window: &str, ctx: &Context) -> CliResult<GaborSystem> {
    let spec = lattice.spec()?;
    if window == "gaussian" {
        return Ok(GaborSystem::gaussian(spec, grid.h, grid.r)?);
    }
    let path = ctx.resolve(window);
    let w = load_sampled(&path).map_err(|e| CliError::Config(format!("window {}: {e}", path.display())))?;
    let template = SampledFunction::zeros(spec.d, grid.h, grid.r)?;
    template
        .check_same_grid(&w)
        .map_err(|e| CliError::Config(format!("window {}: {e}", path.display())))?;
    Ok(GaborSystem::new(spec, w, WindowKind::Samples)?)
}

fn weight(v: &Value) -> CliResult<WeightFunction> {
    WeightFunction::from_value(v).map_err(|e| CliError::Config(format!("weight: {e}")))
}

#[derive(Serialize, Deserialize)]
struct DualMeta {
    residual: f64,
    iterations: usize,
    converged: bool,
}

/// Content hash of everything the canonical dual depends on.
fn dual_key(sys: &GaborSystem, cg_tol: f64) -> CliResult<String> {
    let w = &sys.window;
    let mut hasher = Sha256::new();
    hasher.update((w.d as u64).to_le_bytes());
    hasher.update(w.h.to_bits().to_le_bytes());
    hasher.update(w.r.to_bits().to_le_bytes());
    for v in &w.values {
        hasher.update(v.re.to_bits().to_le_bytes());
        hasher.update(v.im.to_bits().to_le_bytes());
    }
    hasher.update(tfnuclear::json::to_string(&sys.lattice)?.as_bytes());
    hasher.update(cg_tol.to_bits().to_le_bytes());
    Ok(hasher.finalize().iter().take(16).map(|b| format!("{b:02x}")).collect())
}

fn load_cached(dir: &Path, key: &str, sys: &GaborSystem) -> Option<DualWindow> {
    let window = load_sampled(&dir.join(format!("dual-{key}.smpf"))).ok()?;
    let meta: DualMeta = serde_json::from_str(&fs::read_to_string(dir.join(format!("dual-{key}.json"))).ok()?).ok()?;
    sys.window.same_grid(&window).then_some(DualWindow {
        window,
        residual: meta.residual,
        iterations: meta.iterations,
        converged: meta.converged,
    })
}

fn store_cached(dir: &Path, key: &str, dual: &DualWindow) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cache dir {}: {e}", dir.display())))?;
    save_sampled(&dual.window, &dir.join(format!("dual-{key}.smpf")))?;
    let meta = DualMeta { residual: dual.residual, iterations: dual.iterations, converged: dual.converged };
    fs::write(dir.join(format!("dual-{key}.json")), tfnuclear::json::to_string(&meta)?)
        .map_err(|e| CliError::Config(format!("cache dir {}: {e}", dir.display())))
}

fn decay_csv(p: &DecayProfile) -> String {
    let mut out = String::from("lambda,sup,sup_half,finite\n");
    for r in &p.rows {
        out.push_str(&format!("{},{},{},{}\n", fmt17(r.lambda), fmt17(r.sup), fmt17(r.sup_half), r.finite));
    }
    out
}

pub fn roundtrip(params: &Value, ctx: &Context) -> CliResult<Outcome> {
    let cfg: RoundtripConfig = parse(params)?;
    if cfg.functions.is_empty() {
        return Err(CliError::Config("\"functions\" must not be empty".into()));
    }
    let omega = weight(&cfg.weight)?;
    let mut sys = system(&cfg.lattice, &cfg.grid, &cfg.window, ctx)?;
    let functions = cfg
        .functions
        .iter()
        .map(|s| test_function(s, &sys.window, ctx))
        .collect::<CliResult<Vec<_>>>()?;

    let bounds = sys.estimate_frame_bounds(cfg.trials, ctx.seed)?;
    if sys.frame_failure_suspected() {
        let result = json!({
            "message": "frame failure suspected",
            "frame_bounds": to_value(&bounds),
            "flags": to_value(&sys.flags),
        });
        return Ok(Outcome { code: EXIT_FAILURE, summary: "frame failure suspected".into(), result, files: vec![] });
    }

    let key = dual_key(&sys, cfg.cg_tol)?;
    let dir: PathBuf = cfg.cache_dir.as_deref().map(|d| ctx.resolve(d)).unwrap_or_else(|| ctx.out.join("cache"));
    let cached = if cfg.cache { load_cached(&dir, &key, &sys) } else { None };
    let dual = match cached {
        Some(d) => {
            eprintln!("dual window: cache hit {key}");
            sys.dual = Some(d.clone());
            d
        }
        None => {
            let d = sys.canonical_dual(cfg.cg_tol)?;
            if cfg.cache {
                store_cached(&dir, &key, &d)?;
            }
            d
        }
    };

    let mut rows = vec![];
    let mut files = vec![];
    let mut worst = 0.0f64;
    for (i, (name, f)) in cfg.functions.iter().zip(&functions).enumerate() {
        let rep = sys.roundtrip(f)?;
        let profile = decay_profile(&rep.coefficients, &omega, &cfg.ladder);
        worst = worst.max(rep.rel_error);
        let csv = rep.coefficients.to_csv(Some(&omega));
        files.push((if i == 0 { "coefficients.csv".to_string() } else { format!("coefficients_{i}.csv") }, csv));
        files.push((if i == 0 { "decay.csv".to_string() } else { format!("decay_{i}.csv") }, decay_csv(&profile)));
        rows.push(json!({
            "function": name,
            "rel_error": rep.rel_error,
            "pass": rep.rel_error <= cfg.tol,
            "decay": to_value(&profile),
        }));
    }
    let ok = worst <= cfg.tol;
    let result = json!({
        "frame_bounds": to_value(&bounds),
        "flags": to_value(&sys.flags),
        "dual": {"key": key, "residual": dual.residual, "iterations": dual.iterations, "converged": dual.converged},
        "tol": cfg.tol,
        "max_rel_error": worst,
        "functions": rows,
    });
    let summary = format!("max rel_error {worst:.3e} (tol {:.1e})", cfg.tol);
    Ok(Outcome { code: if ok { EXIT_OK } else { EXIT_FAILURE }, summary, result, files })
}

pub fn decay(params: &Value, ctx: &Context) -> CliResult<Outcome> {
    let cfg: DecayConfig = parse(params)?;
    let omega = weight(&cfg.weight)?;
    let sys = system(&cfg.lattice, &cfg.grid, &cfg.window, ctx)?;
    let f = test_function(&cfg.function, &sys.window, ctx)?;
    let c = sys.analysis(&f)?;
    let profile = decay_profile(&c, &omega, &cfg.ladder);
    let divergent: Vec<f64> = profile.rows.iter().filter(|r| !r.finite).map(|r| r.lambda).collect();
    let summary = if divergent.is_empty() {
        format!("weighted sup finite for all {} lambdas", profile.rows.len())
    } else {
        format!("weighted sup grows with truncation for lambda in {divergent:?}")
    };
    let result = json!({
        "function": cfg.function,
        "flags": to_value(&sys.flags),
        "divergent_lambdas": divergent,
        "profile": to_value(&profile),
    });
    let files = vec![("coefficients.csv".into(), c.to_csv(Some(&omega))), ("decay.csv".into(), decay_csv(&profile))];
    Ok(Outcome { code: if divergent.is_empty() { EXIT_OK } else { EXIT_FAILURE }, summary, result, files })
}
