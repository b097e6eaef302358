//! Run configuration: JSON text checked against a per-experiment parameter
//! table, with every problem reported against the line it came from.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::divergence::GsFunction;
use crate::numerics::MonotoneFunction;
use crate::orlicz::OrliczFunction;
use crate::rotation::{AlphaDescriptor, CirclePoint, RotationSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Norm,
    Average,
    Levelset,
    Witness,
    Decompose,
    Criterion,
    Construct,
    ExampleSeries,
    WeakScan,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Norm,
        Experiment::Average,
        Experiment::Levelset,
        Experiment::Witness,
        Experiment::Decompose,
        Experiment::Criterion,
        Experiment::Construct,
        Experiment::ExampleSeries,
        Experiment::WeakScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Norm => "norm",
            Experiment::Average => "average",
            Experiment::Levelset => "levelset",
            Experiment::Witness => "witness",
            Experiment::Decompose => "decompose",
            Experiment::Criterion => "criterion",
            Experiment::Construct => "construct",
            Experiment::ExampleSeries => "example-series",
            Experiment::WeakScan => "weak-scan",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Experiment::Norm => "Luxemburg norm of f for an Orlicz function",
            Experiment::Average => "running ergodic averages along a sequence at one point",
            Experiment::Levelset => "level set {max_n A_n f >= lambda} on a grid, with the weak bound",
            Experiment::Witness => "finite witness subsequence with a certified arc",
            Experiment::Decompose => "disjoint decomposition of a level set",
            Experiment::Criterion => "perturbation criterion series for generated block sizes",
            Experiment::Construct => "staged divergent block sequence for g_s",
            Experiment::ExampleSeries => "criterion series of the g_s family and membership",
            Experiment::WeakScan => "empirical weak Orlicz constant over prefix families",
        }
    }

    /// Default function when the config names none.
    pub fn default_function(self) -> &'static str {
        match self {
            Experiment::Norm => "const:1",
            Experiment::Construct | Experiment::ExampleSeries => "gs:0.5",
            _ => "power:0.5",
        }
    }

    pub fn params(self) -> &'static [ParamSpec] {
        macro_rules! spec {
            ($name:expr, $kind:expr, $default:expr, $help:expr) => {
                ParamSpec {
                    name: $name,
                    kind: $kind,
                    default: $default,
                    help: $help,
                }
            };
        }
        use Kind::*;
        const SEED: ParamSpec = spec!("seed", Int { min: 0 }, Dflt::Num(0.0), "generator seed");
        match self {
            Experiment::Norm => &[
                spec!("phi", Phi, Dflt::Text("power:2"), "Orlicz function"),
                spec!("tol", Positive, Dflt::Num(1e-8), "relative norm tolerance"),
                SEED,
            ],
            Experiment::Average => &[
                spec!("seq", Seq, Dflt::Text("prefix:1000"), "sequence"),
                spec!("x", Point, Dflt::Text("0.25"), "starting point"),
                spec!("rows", Int { min: 1 }, Dflt::Num(100.0), "CSV rows (evenly spaced prefixes)"),
                SEED,
            ],
            Experiment::Levelset => &[
                spec!("seq", Seq, Dflt::Text("prefix:1"), "sequence"),
                spec!("lambda", Positive, Dflt::Num(2.0), "level λ > 0"),
                spec!("grid_cells", Int { min: 1000 }, Dflt::Num(100_000.0), "grid resolution"),
                spec!("tol", Unit, Dflt::Num(1e-10), "M_λ bisection tolerance"),
                SEED,
            ],
            Experiment::Witness => &[
                spec!("lambda", Positive, Dflt::Num(2.0), "level λ > 0"),
                spec!("arc_start", Point, Dflt::Text("0"), "target arc start"),
                spec!("arc_length", UnitClosed, Dflt::Num(1.0), "target arc length in (0, 1]"),
                spec!("delta", Positive, Dflt::Num(0.1), "allowed uncertified measure"),
                spec!("epsilon", Positive, Dflt::Num(1e-3), "left cut ε"),
                spec!("eta", Positive, Dflt::Num(1e-2), "Riemann slack η"),
                spec!("beta_prox", Positive, Dflt::Num(1e-3), "proximity β"),
                spec!("n_start", Int { min: 0 }, Dflt::Num(1.0), "first admissible time"),
                spec!("min_r", Int { min: 1 }, Dflt::Num(1.0), "lower bound on pieces r"),
                spec!("max_scan", Int { min: 1 }, Dflt::Num(1e8), "entry-time scan budget"),
                spec!("max_cells", Int { min: 1 }, Dflt::Num(16384.0), "certification cell cap"),
                SEED,
            ],
            Experiment::Decompose => &[
                spec!("seq", Seq, Dflt::Text("prefix:2"), "sequence"),
                spec!("lambda", Positive, Dflt::Num(2.0), "level λ > 0"),
                spec!("grid_cells", Int { min: 1000 }, Dflt::Num(100_000.0), "grid resolution"),
                SEED,
            ],
            Experiment::Criterion => &[
                spec!("phi", Phi, Dflt::Text("power:2"), "Orlicz function"),
                spec!("l", Text, Dflt::Text("2^k"), "block length expression in k"),
                spec!("d", Text, Dflt::Text("2"), "perturbation size expression in k and l_k"),
                spec!("K", Int { min: 2 }, Dflt::Num(40.0), "number of stages"),
                spec!("bound", Positive, Dflt::Num(10.0), "Reinhold ratio bound"),
                SEED,
            ],
            Experiment::Construct => &[
                spec!("s", Positive, Dflt::Num(0.5), "family exponent for s_k, c_k"),
                spec!("K", Int { min: 16 }, Dflt::Num(18.0), "last stage (≥ 16)"),
                spec!("tol", Unit, Dflt::Num(1e-8), "a_k bisection tolerance"),
                spec!("max_total_elements", Int { min: 1 }, Dflt::Num(1e7), "element budget"),
                spec!("max_scan", Int { min: 1 }, Dflt::Num(1e8), "entry-time scan budget"),
                spec!("max_cells", Int { min: 1 }, Dflt::Num(256.0), "certification cell cap"),
                spec!("beta_prox", Positive, Dflt::Num(1e-3), "proximity β"),
                spec!("sample_count", Int { min: 1 }, Dflt::Num(100.0), "stage check samples"),
                SEED,
            ],
            Experiment::ExampleSeries => &[
                spec!("s", Positive, Dflt::Num(0.5), "family exponent s > 0"),
                spec!("p", NonNeg, Dflt::Num(1.0), "log exponent p ≥ 0"),
                spec!("K", Int { min: 16 }, Dflt::Num(100_000.0), "last index (≥ 16)"),
                spec!("rows", Int { min: 1 }, Dflt::Num(200.0), "CSV rows"),
                SEED,
            ],
            Experiment::WeakScan => &[
                spec!("phi", Phi, Dflt::Text("power:1"), "Orlicz function"),
                spec!("N", Int { min: 1 }, Dflt::Num(10.0), "family: prefixes of length 1..=N"),
                spec!("lambda_min", Positive, Dflt::Num(1.2), "smallest λ"),
                spec!("lambda_max", Positive, Dflt::Num(20.0), "largest λ"),
                spec!("lambda_count", Int { min: 1 }, Dflt::Num(10.0), "log-spaced λ values"),
                spec!("grid_cells", Int { min: 1000 }, Dflt::Num(20_000.0), "grid resolution"),
                SEED,
            ],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment '{s}' (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Positive,
    NonNeg,
    /// `(0, 1)`
    Unit,
    /// `(0, 1]`
    UnitClosed,
    Int { min: i64 },
    Text,
    Phi,
    Seq,
    Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dflt {
    Num(f64),
    Text(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Dflt,
    pub help: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Num(f64),
    Text(String),
}

/// The decreasing functions a config can name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionSpec {
    Const(f64),
    /// `x^{-c}`
    Power(f64),
    OneMinusX,
    Gs(f64),
}

impl FunctionSpec {
    pub fn build(&self) -> Result<MonotoneFunction, String> {
        Ok(match *self {
            FunctionSpec::Const(c) => MonotoneFunction::constant(c),
            FunctionSpec::Power(c) => MonotoneFunction::power(c),
            FunctionSpec::OneMinusX => MonotoneFunction::one_minus_x(),
            FunctionSpec::Gs(s) => GsFunction::new(s).map_err(|e| e.to_string())?.to_monotone(),
        })
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Const(c) => write!(f, "const:{c}"),
            FunctionSpec::Power(c) => write!(f, "power:{c}"),
            FunctionSpec::OneMinusX => f.write_str("oneminusx"),
            FunctionSpec::Gs(s) => write!(f, "gs:{s}"),
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "oneminusx" {
            return Ok(FunctionSpec::OneMinusX);
        }
        let (head, arg) = s
            .split_once(':')
            .ok_or_else(|| format!("expected const:c, power:c, oneminusx or gs:s, got '{s}'"))?;
        let v: f64 = arg.trim().parse().map_err(|_| format!("bad number '{arg}' in '{s}'"))?;
        match head {
            "const" if v.is_finite() && v >= 0.0 => Ok(FunctionSpec::Const(v)),
            "const" => Err(format!("const:c needs a finite c ≥ 0, got {v}")),
            "power" if (0.0..1.0).contains(&v) => Ok(FunctionSpec::Power(v)),
            "power" => Err(format!("power:c needs 0 ≤ c < 1 for an integrable x^-c, got {v}")),
            "gs" if v > 0.0 && v <= 4.0 => Ok(FunctionSpec::Gs(v)),
            "gs" => Err(format!("gs:s needs 0 < s ≤ 4, got {v}")),
            _ => Err(format!("unknown function family '{head}'")),
        }
    }
}

impl Serialize for FunctionSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `prefix:N` (times `1..=N`), `list:a,b,...` or a block sequence literal.
pub fn parse_sequence(text: &str) -> Result<Vec<u64>, String> {
    let t = text.trim();
    if let Some(n) = t.strip_prefix("prefix:") {
        let n: u64 = n.trim().parse().map_err(|_| format!("bad prefix length '{n}'"))?;
        if n == 0 || n > 10_000_000 {
            return Err(format!("prefix length must lie in 1..=10^7, got {n}"));
        }
        return Ok((1..=n).collect());
    }
    if let Some(items) = t.strip_prefix("list:") {
        let mut out = items
            .split(',')
            .map(|x| x.trim().parse::<u64>().map_err(|_| format!("bad time '{x}'")))
            .collect::<Result<Vec<_>, _>>()?;
        out.sort_unstable();
        out.dedup();
        if out.is_empty() {
            return Err("empty list".into());
        }
        return Ok(out);
    }
    let seq: crate::blockseq::PerturbedBlockSequence = t.parse().map_err(|e: crate::blockseq::BlockSeqError| e.to_string())?;
    Ok(seq.iter().map(|(n, _)| n).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub system: String,
    pub function: FunctionSpec,
    pub parameters: BTreeMap<String, ParamValue>,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn num(&self, name: &str) -> f64 {
        match self.parameters.get(name) {
            Some(ParamValue::Num(v)) => *v,
            _ => panic!("numeric parameter '{name}' missing after validation"),
        }
    }

    pub fn int(&self, name: &str) -> u64 {
        self.num(name) as u64
    }

    pub fn text(&self, name: &str) -> &str {
        match self.parameters.get(name) {
            Some(ParamValue::Text(v)) => v,
            _ => panic!("text parameter '{name}' missing after validation"),
        }
    }

    pub fn system(&self) -> RotationSystem {
        RotationSystem::parse(&self.system).expect("validated descriptor")
    }

    pub fn seed(&self) -> u64 {
        self.int("seed")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub line: usize,
    pub path: String,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}: {}", self.line, self.path, self.message)
    }
}

const TOP_KEYS: [&str; 5] = ["experiment", "system", "function", "parameters", "output_dir"];

/// 1-based line of the first `"key"` at or after byte `from`.
fn line_of(text: &str, key: &str, from: usize) -> usize {
    let needle = format!("\"{key}\"");
    let pos = text[from.min(text.len())..].find(&needle).map(|p| p + from).unwrap_or(0);
    text[..pos].matches('\n').count() + 1
}

fn check_param(spec: &ParamSpec, v: &Value, experiment: Experiment) -> Result<ParamValue, String> {
    let num = |v: &Value| v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| format!("expected a number, got {v}"));
    let text = |v: &Value| v.as_str().map(str::to_string).ok_or_else(|| format!("expected a string, got {v}"));
    let pre = |cond: &str| format!("{experiment} precondition {} {cond}", spec.name);
    match spec.kind {
        Kind::Positive => {
            let x = num(v)?;
            if x > 0.0 {
                Ok(ParamValue::Num(x))
            } else {
                Err(format!("must be > 0 ({}), got {x}", pre("> 0")))
            }
        }
        Kind::NonNeg => {
            let x = num(v)?;
            if x >= 0.0 {
                Ok(ParamValue::Num(x))
            } else {
                Err(format!("must be ≥ 0 ({}), got {x}", pre("≥ 0")))
            }
        }
        Kind::Unit => {
            let x = num(v)?;
            if x > 0.0 && x < 1.0 {
                Ok(ParamValue::Num(x))
            } else {
                Err(format!("must lie in (0, 1) ({}), got {x}", pre("∈ (0, 1)")))
            }
        }
        Kind::UnitClosed => {
            let x = num(v)?;
            if x > 0.0 && x <= 1.0 {
                Ok(ParamValue::Num(x))
            } else {
                Err(format!("must lie in (0, 1] ({}), got {x}", pre("∈ (0, 1]")))
            }
        }
        Kind::Int { min } => {
            let x = num(v)?;
            if x.fract() != 0.0 || x > 9.0e15 {
                Err(format!("expected an integer, got {x}"))
            } else if x < min as f64 {
                Err(format!("must be ≥ {min} ({}), got {x}", pre(&format!("≥ {min}"))))
            } else {
                Ok(ParamValue::Num(x))
            }
        }
        Kind::Text => Ok(ParamValue::Text(text(v)?)),
        Kind::Phi => {
            let t = text(v)?;
            OrliczFunction::from_str(&t).map_err(|e| e.to_string())?;
            Ok(ParamValue::Text(t))
        }
        Kind::Seq => {
            let t = text(v)?;
            parse_sequence(&t)?;
            Ok(ParamValue::Text(t))
        }
        Kind::Point => {
            let t = match v {
                Value::Number(n) => n.to_string(),
                _ => text(v)?,
            };
            CirclePoint::from_decimal(&t).map_err(|e| e.to_string())?;
            Ok(ParamValue::Text(t))
        }
    }
}

/// Parses and checks a config; nothing is executed.
pub fn validate(text: &str) -> Result<RunConfig, Vec<ValidationError>> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        vec![ValidationError {
            line: e.line(),
            path: "config".into(),
            message: format!("{e}"),
        }]
    })?;
    let Value::Object(obj) = root else {
        return Err(vec![ValidationError {
            line: 1,
            path: "config".into(),
            message: "expected a JSON object".into(),
        }]);
    };
    let mut errors = Vec::new();
    let mut err = |key: &str, path: &str, message: String, from: usize| {
        errors.push(ValidationError {
            line: line_of(text, key, from),
            path: path.to_string(),
            message,
        })
    };
    for key in obj.keys() {
        if !TOP_KEYS.contains(&key.as_str()) {
            err(key, key, format!("unknown key (allowed: {})", TOP_KEYS.join(", ")), 0);
        }
    }

    let experiment = match obj.get("experiment") {
        None => {
            err("experiment", "experiment", "required".into(), 0);
            None
        }
        Some(Value::String(s)) => match s.parse::<Experiment>() {
            Ok(e) => Some(e),
            Err(m) => {
                err("experiment", "experiment", m, 0);
                None
            }
        },
        Some(v) => {
            err("experiment", "experiment", format!("expected a string, got {v}"), 0);
            None
        }
    };

    let system = match obj.get("system") {
        None => Some(AlphaDescriptor::GoldenRatio.to_string()),
        Some(Value::String(s)) => match s.parse::<AlphaDescriptor>() {
            Ok(d) => Some(d.to_string()),
            Err(e) => {
                err("system", "system", e.to_string(), 0);
                None
            }
        },
        Some(v) => {
            err("system", "system", format!("expected a string, got {v}"), 0);
            None
        }
    };

    let function_text = match obj.get("function") {
        None => experiment.map(|e| e.default_function().to_string()),
        Some(Value::String(s)) => Some(s.clone()),
        Some(v) => {
            err("function", "function", format!("expected a string, got {v}"), 0);
            None
        }
    };
    let function = function_text.and_then(|t| match t.parse::<FunctionSpec>() {
        Ok(f) => Some(f),
        Err(m) => {
            err("function", "function", m, 0);
            None
        }
    });

    let output_dir = match obj.get("output_dir") {
        None => Some(PathBuf::from("output")),
        Some(Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
        Some(v) => {
            err("output_dir", "output_dir", format!("expected a nonempty path string, got {v}"), 0);
            None
        }
    };

    let mut parameters = BTreeMap::new();
    let params_at = text.find("\"parameters\"").unwrap_or(0);
    let given = match obj.get("parameters") {
        None => Some(serde_json::Map::new()),
        Some(Value::Object(m)) => Some(m.clone()),
        Some(v) => {
            err("parameters", "parameters", format!("expected an object, got {v}"), 0);
            None
        }
    };
    if let (Some(e), Some(given)) = (experiment, given) {
        let specs = e.params();
        for key in given.keys() {
            if !specs.iter().any(|s| s.name == key) {
                let names: Vec<_> = specs.iter().map(|s| s.name).collect();
                err(
                    key,
                    &format!("parameters.{key}"),
                    format!("unknown parameter for {e} (allowed: {})", names.join(", ")),
                    params_at,
                );
            }
        }
        for spec in specs {
            let value = match given.get(spec.name) {
                Some(v) => check_param(spec, v, e),
                None => Ok(match spec.default {
                    Dflt::Num(x) => ParamValue::Num(x),
                    Dflt::Text(t) => ParamValue::Text(t.to_string()),
                }),
            };
            match value {
                Ok(v) => {
                    parameters.insert(spec.name.to_string(), v);
                }
                Err(m) => err(spec.name, &format!("parameters.{}", spec.name), m, params_at),
            }
        }
        if e == Experiment::WeakScan {
            if let (Some(ParamValue::Num(lo)), Some(ParamValue::Num(hi))) =
                (parameters.get("lambda_min"), parameters.get("lambda_max"))
            {
                if lo > hi {
                    err(
                        "lambda_max",
                        "parameters.lambda_max",
                        format!("must be ≥ lambda_min ({lo}), got {hi}"),
                        params_at,
                    );
                }
            }
        }
    }

    if !errors.is_empty() {
        errors.sort_by_key(|e| e.line);
        return Err(errors);
    }
    Ok(RunConfig {
        experiment: experiment.expect("checked"),
        system: system.expect("checked"),
        function: function.expect("checked"),
        parameters,
        output_dir: output_dir.expect("checked"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_experiment() {
        let errs = validate("{\n  \"system\": \"golden\"\n}").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].to_string(), "line 1: experiment: required");
    }

    #[test]
    fn negative_lambda_cites_precondition() {
        let text = "{\n  \"experiment\": \"levelset\",\n  \"parameters\": {\n    \"lambda\": -1\n  }\n}";
        let errs = validate(text).unwrap_err();
        assert_eq!(errs.len(), 1);
        let msg = errs[0].to_string();
        assert!(msg.starts_with("line 4: parameters.lambda:"), "{msg}");
        assert!(msg.contains("levelset precondition lambda > 0"), "{msg}");
    }

    #[test]
    fn defaults_are_echoed() {
        let cfg = validate(r#"{"experiment": "witness", "system": "golden"}"#).unwrap();
        assert_eq!(cfg.function, FunctionSpec::Power(0.5));
        assert_eq!(cfg.num("lambda"), 2.0);
        assert_eq!(cfg.int("max_cells"), 16384);
        assert_eq!(cfg.text("arc_start"), "0");
        assert_eq!(cfg.parameters.len(), Experiment::Witness.params().len());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = "{\n \"experiment\": \"norm\",\n \"colour\": 1,\n \"parameters\": {\"p\": 2}\n}";
        let errs = validate(text).unwrap_err();
        let lines: Vec<_> = errs.iter().map(|e| (e.line, e.path.as_str())).collect();
        assert_eq!(lines, vec![(3, "colour"), (4, "parameters.p")]);
    }

    #[test]
    fn syntax_errors_have_lines() {
        let errs = validate("{\n \"experiment\": \"norm\",\n}").unwrap_err();
        assert_eq!(errs[0].line, 3);
    }

    #[test]
    fn functions_and_sequences() {
        assert_eq!("power:0.5".parse::<FunctionSpec>().unwrap(), FunctionSpec::Power(0.5));
        assert!("power:1".parse::<FunctionSpec>().is_err());
        assert_eq!("gs:1".parse::<FunctionSpec>().unwrap().to_string(), "gs:1");
        assert_eq!(parse_sequence("prefix:3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_sequence("list:5, 2,5").unwrap(), vec![2, 5]);
        assert_eq!(parse_sequence("B:3,2; D:{7}").unwrap(), vec![3, 4, 7]);
        assert!(parse_sequence("prefix:0").is_err());
    }
}
