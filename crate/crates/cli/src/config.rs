//! Config loading, the exit-code contract, golden `expect` blocks and report
//! writing.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use tfnuclear::LatticeSpec;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;
pub const EXIT_INCONSISTENT: u8 = 4;

/// Relative tolerance for numeric equality in `expect` blocks.
const EXPECT_REL_TOL: f64 = 1e-9;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Failure(String),
    Inconclusive(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Failure(_) => EXIT_FAILURE,
            CliError::Inconclusive(_) => EXIT_INCONCLUSIVE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Failure(m) => write!(f, "condition failure: {m}"),
            CliError::Inconclusive(m) => write!(f, "inconclusive: {m}"),
        }
    }
}

impl From<tfnuclear::Error> for CliError {
    fn from(e: tfnuclear::Error) -> Self {
        use tfnuclear::Error as E;
        match e {
            E::ConditionFailure(_) | E::Precondition(_) => CliError::Failure(e.to_string()),
            E::CapLimited(_) => CliError::Inconclusive(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub struct Context {
    /// Directory that relative paths in the config resolve against.
    pub base: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
}

impl Context {
    pub fn new(config: Option<&Path>, out: &Path, seed: u64) -> Self {
        let base = config
            .and_then(|p| p.parent())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Self { base, out: out.to_path_buf(), seed }
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

/// What a command hands back: its natural exit code, a one-line summary, the
/// result object and any CSV tables to write beside the report.
pub struct Outcome {
    pub code: u8,
    pub summary: String,
    pub result: Value,
    pub files: Vec<(String, String)>,
}

/// Reads the config file (or `{}`), strips `seed` and `expect`, and settles
/// the seed: the flag wins over the config, which wins over 0.
pub fn load(path: Option<&Path>, seed_flag: Option<u64>) -> CliResult<(Value, Option<Value>, u64)> {
    let mut value = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str::<Value>(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => Value::Object(Map::new()),
    };
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
    let expect = obj.remove("expect");
    let seed_cfg = match obj.remove("seed") {
        None => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| CliError::Config("\"seed\" must be a non-negative integer".into()))?),
    };
    if let Some(e) = &expect {
        if !e.is_object() {
            return Err(CliError::Config("\"expect\" must be an object of JSON pointers".into()));
        }
    }
    Ok((value, expect, seed_flag.or(seed_cfg).unwrap_or(0)))
}

/// Deserializes command parameters, rejecting unknown keys.
pub fn parse<T: DeserializeOwned>(params: &Value) -> CliResult<T> {
    serde_json::from_value(params.clone()).map_err(|e| CliError::Config(e.to_string()))
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

#[derive(Debug)]
struct Mismatch {
    pointer: String,
    expected: Value,
    actual: Option<Value>,
}

fn numbers_match(actual: f64, expected: f64) -> bool {
    actual == expected || (actual - expected).abs() <= EXPECT_REL_TOL * expected.abs().max(1.0)
}

/// `{"le": x}`, `{"ge": x}`, `{"lt": x}`, `{"gt": x}` (any combination)
/// compare numerically; anything else must match exactly, numbers up to a
/// relative `1e-9`.
fn matches(actual: &Value, expected: &Value) -> bool {
    if let Some(bounds) = expected.as_object() {
        let ops = ["le", "ge", "lt", "gt"];
        if !bounds.is_empty() && bounds.keys().all(|k| ops.contains(&k.as_str())) {
            let Some(a) = actual.as_f64() else { return false };
            return bounds.iter().all(|(op, b)| {
                let Some(b) = b.as_f64() else { return false };
                match op.as_str() {
                    "le" => a <= b,
                    "ge" => a >= b,
                    "lt" => a < b,
                    _ => a > b,
                }
            });
        }
    }
    match (actual, expected) {
        (Value::Number(a), Value::Number(e)) => numbers_match(a.as_f64().unwrap_or(f64::NAN), e.as_f64().unwrap_or(f64::NAN)),
        (Value::Array(a), Value::Array(e)) => a.len() == e.len() && a.iter().zip(e).all(|(x, y)| matches(x, y)),
        (Value::Object(a), Value::Object(e)) => a.len() == e.len() && e.iter().all(|(k, v)| a.get(k).is_some_and(|x| matches(x, v))),
        _ => actual == expected,
    }
}

fn check_expect(result: &Value, expect: &Value) -> Vec<Mismatch> {
    let mut out = vec![];
    for (key, expected) in expect.as_object().into_iter().flatten() {
        let pointer = if key.starts_with('/') { key.clone() } else { format!("/{key}") };
        let actual = result.pointer(&pointer).cloned();
        if !actual.as_ref().is_some_and(|a| matches(a, expected)) {
            out.push(Mismatch { pointer, expected: expected.clone(), actual });
        }
    }
    out
}

/// Applies the golden-file block, writes the report and tables, prints the
/// summary and returns the final exit code. An internal inconsistency is
/// never masked by a matching `expect` block.
pub fn finish(command: &str, ctx: &Context, params: Value, expect: Option<Value>, outcome: Outcome) -> CliResult<u8> {
    let mut code = outcome.code;
    let mut report = json!({
        "command": command,
        "seed": ctx.seed,
        "config": params,
        "summary": outcome.summary,
        "result": outcome.result,
    });
    if let Some(expect) = &expect {
        let mismatches = check_expect(&report["result"], expect);
        if code != EXIT_INCONSISTENT {
            code = if mismatches.is_empty() { EXIT_OK } else { EXIT_FAILURE };
        }
        report["expect"] = json!({
            "checked": expect.as_object().map_or(0, |m| m.len()),
            "mismatches": mismatches
                .iter()
                .map(|m| json!({"pointer": m.pointer, "expected": m.expected, "actual": m.actual}))
                .collect::<Vec<_>>(),
        });
        for m in &mismatches {
            eprintln!("expect mismatch at {}: expected {}, got {}", m.pointer, m.expected, m.actual.as_ref().unwrap_or(&Value::Null));
        }
    }
    report["exit_code"] = json!(code);

    fs::create_dir_all(&ctx.out).map_err(|e| CliError::Config(format!("cannot create {}: {e}", ctx.out.display())))?;
    let write = |name: &str, body: &str| {
        let path = ctx.out.join(name);
        fs::write(&path, body).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    };
    write("report.json", &tfnuclear::json::to_string(&report).map_err(CliError::from)?)?;
    for (name, body) in &outcome.files {
        write(name, body)?;
    }
    println!("{command}: {} (exit {code})", outcome.summary);
    Ok(code)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeCfg {
    #[serde(default = "one")]
    pub alpha0: f64,
    #[serde(default = "one")]
    pub beta0: f64,
    #[serde(default = "one_usize")]
    pub d: usize,
    #[serde(rename = "K", default = "default_truncation")]
    pub k: usize,
    #[serde(rename = "N", default = "default_truncation")]
    pub n: usize,
}

impl Default for LatticeCfg {
    fn default() -> Self {
        Self { alpha0: 1.0, beta0: 1.0, d: 1, k: default_truncation(), n: default_truncation() }
    }
}

impl LatticeCfg {
    pub fn with_truncation(k: usize) -> Self {
        Self { k, n: k, ..Self::default() }
    }

    pub fn spec(&self) -> CliResult<LatticeSpec> {
        Ok(LatticeSpec::new(self.alpha0, self.beta0, self.d, self.k, self.n)?)
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(rename = "R", default = "default_r")]
    pub r: f64,
}

impl Default for GridCfg {
    fn default() -> Self {
        Self { h: default_h(), r: default_r() }
    }
}

pub fn one() -> f64 {
    1.0
}

pub fn one_usize() -> usize {
    1
}

fn default_truncation() -> usize {
    tfnuclear::gabor::DEFAULT_TRUNCATION
}

fn default_h() -> f64 {
    tfnuclear::grid::DEFAULT_H
}

fn default_r() -> f64 {
    tfnuclear::grid::DEFAULT_R
}

pub fn default_weight() -> Value {
    json!({"family": "log_power", "beta": 1.0})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_and_tolerant_numbers() {
        assert!(matches(&json!(1e-5), &json!({"le": 1e-4})));
        assert!(!matches(&json!(1e-3), &json!({"le": 1e-4})));
        assert!(matches(&json!(4.0), &json!(4)));
        assert!(matches(&json!(1.0 + 1e-12), &json!(1.0)));
        assert!(!matches(&json!("divergent"), &json!("convergent")));
        assert!(!matches(&json!(null), &json!({"ge": 0})));
    }

    #[test]
    fn expect_keys_are_pointers() {
        let result = json!({"tests": [{"m_found": 4}], "nuclear": true});
        assert!(check_expect(&result, &json!({"/tests/0/m_found": 4, "nuclear": true})).is_empty());
        let miss = check_expect(&result, &json!({"/tests/1/m_found": 5}));
        assert_eq!(miss.len(), 1);
        assert!(miss[0].actual.is_none());
    }

    #[test]
    fn seed_flag_overrides_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"seed": 7, "expect": {"a": 1}, "x": 2}"#).unwrap();
        let (params, expect, seed) = load(Some(&path), None).unwrap();
        assert_eq!(seed, 7);
        assert!(expect.is_some());
        assert_eq!(params, json!({"x": 2}));
        assert_eq!(load(Some(&path), Some(3)).unwrap().2, 3);
    }

    #[test]
    fn malformed_config_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, "{ not json").unwrap();
        assert_eq!(load(Some(&path), None).unwrap_err().exit_code(), EXIT_CONFIG);
        assert_eq!(load(Some(&dir.path().join("missing.json")), None).unwrap_err().exit_code(), EXIT_CONFIG);
    }
}
