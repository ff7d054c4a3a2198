//! Browser bindings: a Gabor coefficient heatmap, the Young conjugate of a
//! weight and the associated function of a Komatsu sequence with its
//! nuclearity verdict. Each export wraps a plain Rust function so the logic
//! is testable off the browser.

use tfnuclear::komatsu::{associated_function, default_log_t_grid, nuclearity_verdict, MpFamily, MpSequence};
use tfnuclear::weights::young_conjugate;
use tfnuclear::{Complex64, GaborSystem, LatticeSpec, SampledFunction, WeightFunction};
use wasm_bindgen::prelude::*;

/// Time grid for the heatmap; coarse enough to redraw on every slider move.
const DEMO_H: f64 = 1.0 / 16.0;
const DEMO_R: f64 = 12.0;
/// Sequence length for the Komatsu panel.
const DEMO_P_MAX: usize = 2000;
const MAX_TRUNCATION: usize = 40;

fn signal(kind: &str, param: f64) -> Result<SampledFunction, String> {
    let g = |x: f64, a: f64| (-0.5 * (x - a) * (x - a)).exp();
    let f = match kind {
        "shifted" => SampledFunction::from_real_fn(1, DEMO_H, DEMO_R, |x| g(x[0], param)),
        "modulated" => SampledFunction::from_fn(1, DEMO_H, DEMO_R, |x| Complex64::from_polar(g(x[0], 0.0), param * x[0])),
        "pair" => SampledFunction::from_real_fn(1, DEMO_H, DEMO_R, |x| g(x[0], param) + g(x[0], -param)),
        "chirp" => SampledFunction::from_fn(1, DEMO_H, DEMO_R, |x| {
            Complex64::from_polar((-x[0] * x[0] / 18.0).exp(), 0.5 * param * x[0] * x[0])
        }),
        "hermite" => {
            let n = param.round().clamp(0.0, 40.0) as usize;
            let template = SampledFunction::zeros(1, DEMO_H, DEMO_R).map_err(|e| e.to_string())?;
            tfnuclear::komatsu::hermite_function(&[n], &template)
        }
        other => return Err(format!("unknown signal {other:?}")),
    };
    f.map_err(|e| e.to_string())
}

/// `|<f, M_{beta n} T_{alpha k} phi>|` for `|k| <= K`, `|n| <= N` with a
/// Gaussian window; row `k + K`, column `n + N`, row-major.
pub fn coefficient_grid(kind: &str, param: f64, alpha: f64, beta: f64, k: usize, n: usize) -> Result<Vec<f64>, String> {
    if k > MAX_TRUNCATION || n > MAX_TRUNCATION {
        return Err(format!("truncation above {MAX_TRUNCATION}"));
    }
    let lattice = LatticeSpec::new(alpha, beta, 1, k, n).map_err(|e| e.to_string())?;
    let sys = GaborSystem::gaussian(lattice, DEMO_H, DEMO_R).map_err(|e| e.to_string())?;
    let c = sys.analysis(&signal(kind, param)?).map_err(|e| e.to_string())?;
    let cols = 2 * n + 1;
    let mut out = vec![0.0; (2 * k + 1) * cols];
    for (i, v) in c.values.iter().enumerate() {
        let idx = c.index.index(i);
        let (row, col) = ((idx[0] + k as i64) as usize, (idx[1] + n as i64) as usize);
        out[row * cols + col] = v.norm();
    }
    Ok(out)
}

/// `phi*(s)` on `points` nodes of `[0, s_max]` for `log_power` (`param` is
/// the exponent) or `gevrey_root` (`param` is `s`).
pub fn conjugate_curve(family: &str, param: f64, s_max: f64, points: usize) -> Result<Vec<f64>, String> {
    let w = match family {
        "log_power" => WeightFunction::log_power(param),
        "gevrey_root" => WeightFunction::gevrey_root(param),
        other => return Err(format!("unknown weight family {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    if points < 2 || !(s_max > 0.0) {
        return Err("need at least two points and s_max > 0".into());
    }
    let s: Vec<f64> = (0..points).map(|i| s_max * i as f64 / (points - 1) as f64).collect();
    Ok(young_conjugate(&w, &s).map_err(|e| e.to_string())?.values)
}

/// Associated function on its default `log t` grid plus the verdict.
#[wasm_bindgen]
pub struct KomatsuView {
    log_t: Vec<f64>,
    m: Vec<f64>,
    verdict: String,
}

#[wasm_bindgen]
impl KomatsuView {
    #[wasm_bindgen(getter)]
    pub fn log_t(&self) -> Vec<f64> {
        self.log_t.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn m(&self) -> Vec<f64> {
        self.m.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn verdict(&self) -> String {
        self.verdict.clone()
    }
}

/// `factorial_power` uses `a` as `s`; `exp_poly` uses `a` as `c` and `b` as `r`.
pub fn komatsu_view(family: &str, a: f64, b: f64) -> Result<KomatsuView, String> {
    let fam = match family {
        "factorial_power" => MpFamily::FactorialPower { s: a },
        "exp_poly" => MpFamily::ExpPoly { c: a, r: b },
        other => return Err(format!("unknown sequence family {other:?}")),
    };
    let mp = MpSequence::new(fam, Some(DEMO_P_MAX)).map_err(|e| e.to_string())?;
    let report = nuclearity_verdict(&mp).map_err(|e| e.to_string())?;
    let verdict = match (report.applicable, report.nuclear) {
        (false, _) => format!("inapplicable: {}", report.note),
        (true, Some(true)) => "nuclear".to_string(),
        (true, Some(false)) => "not nuclear".to_string(),
        (true, None) => format!("inconclusive: {}", report.note),
    };
    let m = associated_function(&mp, &default_log_t_grid(&mp)).map_err(|e| e.to_string())?;
    Ok(KomatsuView { log_t: m.log_t, m: m.values, verdict })
}

#[wasm_bindgen]
pub fn stft_magnitudes(kind: &str, param: f64, alpha: f64, beta: f64, k: usize, n: usize) -> Result<Vec<f64>, JsError> {
    coefficient_grid(kind, param, alpha, beta, k, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn young_conjugate_curve(family: &str, param: f64, s_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    conjugate_curve(family, param, s_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn komatsu_associated(family: &str, a: f64, b: f64) -> Result<KomatsuView, JsError> {
    komatsu_view(family, a, b).map_err(|e| JsError::new(&e))
}
