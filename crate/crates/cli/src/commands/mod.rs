pub mod gabor;
pub mod grid;
pub mod koethe;
pub mod komatsu;
pub mod weights;

use serde_json::Value;
use tfnuclear::komatsu::hermite_function;
use tfnuclear::{Complex64, SampledFunction};

use crate::config::{CliError, CliResult, Context, Outcome};

pub type Command = fn(&Value, &Context) -> CliResult<Outcome>;

fn number(spec: &str, arg: &str) -> CliResult<f64> {
    arg.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Config(format!("bad number in test function {spec:?}")))
}

/// Test functions by name on the grid of `template`:
/// `gaussian` is `e^{-|x|^2/2}`, `hermite:n` (or `hermite:n1,n2,...`) a
/// Hermite function, `shifted:a` the Gaussian moved by `a` along the first
/// axis, `modulated:w` the Gaussian times `e^{i w x_1}`, and `file:path` a
/// sampled function on disk.
pub fn test_function(spec: &str, template: &SampledFunction, ctx: &Context) -> CliResult<SampledFunction> {
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let gauss = |x: &[f64], a: f64| {
        let s: f64 = x.iter().enumerate().map(|(i, v)| if i == 0 { (v - a) * (v - a) } else { v * v }).sum();
        (-0.5 * s).exp()
    };
    let (d, h, r) = (template.d, template.h, template.r);
    let f = match name {
        "gaussian" if arg.is_empty() => SampledFunction::from_real_fn(d, h, r, |x| gauss(x, 0.0))?,
        "shifted" => {
            let a = number(spec, arg)?;
            SampledFunction::from_real_fn(d, h, r, |x| gauss(x, a))?
        }
        "modulated" => {
            let w = number(spec, arg)?;
            SampledFunction::from_fn(d, h, r, |x| Complex64::from_polar(gauss(x, 0.0), w * x[0]))?
        }
        "hermite" => {
            let mut gamma = arg
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::Config(format!("bad multi-index in {spec:?}")))?;
            if gamma.len() == 1 {
                gamma.resize(d, 0);
            }
            hermite_function(&gamma, template)?
        }
        "file" => {
            let path = ctx.resolve(arg);
            let f = tfnuclear::io::load_sampled(&path)
                .map_err(|e| CliError::Config(format!("cannot load {}: {e}", path.display())))?;
            template.check_same_grid(&f)?;
            f
        }
        _ => return Err(CliError::Config(format!("unknown test function {spec:?}"))),
    };
    Ok(f)
}

/// Verdict counts mapped onto the exit contract: any failure wins over any
/// inconclusive result.
pub fn exit_for(failures: usize, inconclusive: usize) -> u8 {
    use crate::config::{EXIT_FAILURE, EXIT_INCONCLUSIVE, EXIT_OK};
    if failures > 0 {
        EXIT_FAILURE
    } else if inconclusive > 0 {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}
