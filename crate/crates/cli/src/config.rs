//! Flat `key = value` experiment configuration.
//!
//! Every experiment has a fixed key set with defaults. A config file and
//! command-line overrides may change values but not introduce keys. Values
//! are normalised by type (`2^-3` and `0.125` are the same value), and the
//! normalised map, minus the keys that only affect where and how fast a run
//! happens, is hashed to identify the run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use inertial_core::sde::{LangevinScheme, Model};
use inertial_core::Exec;
use sha2::{Digest, Sha256};

use crate::error::RunError;
use crate::field::FieldSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentKind {
    ConvergeWeakPde,
    ConvergeStrongMc,
    ConvergeWeakMc,
    Longtime2d,
    OracleCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::ConvergeWeakPde,
        ExperimentKind::ConvergeStrongMc,
        ExperimentKind::ConvergeWeakMc,
        ExperimentKind::Longtime2d,
        ExperimentKind::OracleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ConvergeWeakPde => "converge-weak-pde",
            ExperimentKind::ConvergeStrongMc => "converge-strong-mc",
            ExperimentKind::ConvergeWeakMc => "converge-weak-mc",
            ExperimentKind::Longtime2d => "longtime-2d",
            ExperimentKind::OracleCheck => "oracle-check",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy)]
enum KeyType {
    Real,
    PositiveReal,
    RealList,
    Count,
    CountOrZero,
    Seed,
    Bool,
    Text,
    Choice(&'static [&'static str]),
    Range,
    Models,
}

struct KeySpec {
    key: &'static str,
    ty: KeyType,
    /// Default per experiment, in [`ExperimentKind::ALL`] order; `None` when
    /// the experiment does not use the key.
    defaults: [Option<&'static str>; 5],
    hashed: bool,
}

const DYADIC_EPS: &str = "2^-3,2^-4,2^-5,2^-6,2^-7";
const ALL_MODELS: &str = "langevin,corrected,naive,ode,kifer";
const FIELDS: &[&str] = &["zero", "constant", "sin-x", "sin-x-sin-t", "vortex"];

const fn all(v: &'static str) -> [Option<&'static str>; 5] {
    [Some(v); 5]
}

const fn only(i: usize, v: &'static str) -> [Option<&'static str>; 5] {
    let mut d = [None; 5];
    d[i] = Some(v);
    d
}

const PDE: usize = 0;
const STRONG: usize = 1;
const WEAK: usize = 2;
const LONG: usize = 3;
const ORACLE: usize = 4;

const KEYS: &[KeySpec] = &[
    KeySpec {
        key: "field",
        ty: KeyType::Choice(FIELDS),
        defaults: [Some("sin-x-sin-t"), Some("sin-x-sin-t"), Some("sin-x-sin-t"), Some("vortex"), None],
        hashed: true,
    },
    KeySpec {
        key: "field.c",
        ty: KeyType::Real,
        defaults: [Some("1"), Some("1"), Some("1"), Some("1"), None],
        hashed: true,
    },
    KeySpec {
        key: "eps",
        ty: KeyType::RealList,
        defaults: [Some(DYADIC_EPS), Some(DYADIC_EPS), Some(DYADIC_EPS), Some("2^-4"), Some("0.25,0.1")],
        hashed: true,
    },
    KeySpec {
        key: "t_final",
        ty: KeyType::PositiveReal,
        defaults: [Some("1"), Some("1"), Some("1"), Some("50"), Some("1")],
        hashed: true,
    },
    KeySpec { key: "seed", ty: KeyType::Seed, defaults: all("1"), hashed: true },
    KeySpec {
        key: "paths",
        ty: KeyType::Count,
        defaults: [None, Some("100000"), Some("100000"), Some("200000"), Some("100000")],
        hashed: true,
    },
    KeySpec { key: "out", ty: KeyType::Text, defaults: all("out"), hashed: false },
    KeySpec { key: "exec", ty: KeyType::Choice(&["parallel", "sequential"]), defaults: all("parallel"), hashed: false },
    KeySpec { key: "threads", ty: KeyType::CountOrZero, defaults: all("0"), hashed: false },
    KeySpec { key: "no_correction", ty: KeyType::Bool, defaults: only(PDE, "false"), hashed: true },
    KeySpec { key: "modes", ty: KeyType::Count, defaults: only(PDE, "6"), hashed: true },
    KeySpec { key: "fpk.nx", ty: KeyType::Count, defaults: only(PDE, "512"), hashed: true },
    KeySpec { key: "fpk.m", ty: KeyType::Count, defaults: only(PDE, "512"), hashed: true },
    KeySpec { key: "fpk.v_cutoff", ty: KeyType::PositiveReal, defaults: only(PDE, "8"), hashed: true },
    KeySpec { key: "fpk.dt_scale", ty: KeyType::PositiveReal, defaults: only(PDE, "2^-7"), hashed: true },
    KeySpec {
        key: "addiff.n",
        ty: KeyType::Count,
        defaults: [Some("4096"), None, None, Some("128"), None],
        hashed: true,
    },
    KeySpec {
        key: "addiff.dt",
        ty: KeyType::PositiveReal,
        defaults: [Some("2^-7"), None, None, Some("2^-7"), None],
        hashed: true,
    },
    KeySpec {
        key: "mc.scheme",
        ty: KeyType::Choice(&["expou", "em"]),
        defaults: [None, Some("expou"), Some("expou"), Some("expou"), None],
        hashed: true,
    },
    KeySpec {
        key: "mc.dt_scale",
        ty: KeyType::PositiveReal,
        defaults: [None, Some("2^-4"), Some("2^-4"), Some("2^-4"), Some("2^-4")],
        hashed: true,
    },
    KeySpec {
        key: "mc.models",
        ty: KeyType::Models,
        defaults: [None, Some(ALL_MODELS), Some(ALL_MODELS), Some("langevin,corrected,naive,kifer"), None],
        hashed: true,
    },
    KeySpec { key: "weak.k", ty: KeyType::Count, defaults: only(WEAK, "1"), hashed: true },
    KeySpec { key: "dim", ty: KeyType::Count, defaults: only(ORACLE, "2"), hashed: true },
    KeySpec { key: "check.modes", ty: KeyType::Count, defaults: only(PDE, "3"), hashed: true },
    KeySpec {
        key: "check.corrected_slope",
        ty: KeyType::Range,
        defaults: [Some("1.7..2.3"), Some("0.7..1.3"), None, None, None],
        hashed: true,
    },
    KeySpec {
        key: "check.naive_slope",
        ty: KeyType::Range,
        defaults: [Some("0.7..1.3"), Some("0.7..1.3"), Some("0.7..1.3"), None, None],
        hashed: true,
    },
    KeySpec { key: "check.ode_slope", ty: KeyType::Range, defaults: only(STRONG, "0.35..0.65"), hashed: true },
    KeySpec { key: "check.kifer_ratio", ty: KeyType::PositiveReal, defaults: only(STRONG, "2"), hashed: true },
    KeySpec {
        key: "check.se_factor",
        ty: KeyType::PositiveReal,
        defaults: [None, Some("3"), None, None, Some("3")],
        hashed: true,
    },
    KeySpec { key: "check.zero_tol", ty: KeyType::PositiveReal, defaults: only(PDE, "1e-6"), hashed: true },
    KeySpec { key: "check.naive_linf", ty: KeyType::PositiveReal, defaults: only(LONG, "1e-5"), hashed: true },
    KeySpec { key: "check.corrected_linf", ty: KeyType::PositiveReal, defaults: only(LONG, "1e-2"), hashed: true },
    KeySpec { key: "check.naive_fraction", ty: KeyType::PositiveReal, defaults: only(LONG, "0.1"), hashed: true },
    KeySpec { key: "check.max_min", ty: KeyType::PositiveReal, defaults: only(LONG, "1.5"), hashed: true },
    KeySpec { key: "check.order_factor", ty: KeyType::PositiveReal, defaults: only(LONG, "10"), hashed: true },
];

fn spec_for(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.key == key)
}

fn bad(key: &str, msg: impl fmt::Display) -> RunError {
    RunError::Config(format!("{key}: {msg}"))
}

/// Parses a real number, accepting `b^e` powers such as `2^-3`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = match s.split_once('^') {
        Some((b, e)) => b.trim().parse::<f64>().ok()?.powf(e.trim().parse::<f64>().ok()?),
        None => s.parse::<f64>().ok()?,
    };
    v.is_finite().then_some(v)
}

fn render_real(v: f64) -> String {
    format!("{v:?}")
}

/// A closed interval `lo..hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

fn parse_range(s: &str) -> Option<Range> {
    let (a, b) = s.split_once("..")?;
    let r = Range { lo: parse_real(a)?, hi: parse_real(b)? };
    (r.lo <= r.hi).then_some(r)
}

fn parse_models(s: &str) -> Option<Vec<Model>> {
    let mut out = Vec::new();
    for name in s.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m = Model::from_name(name)?;
        if out.contains(&m) {
            return None;
        }
        out.push(m);
    }
    Some(out)
}

/// Type-checks `raw` and returns its normal form.
fn normalise(spec: &KeySpec, raw: &str) -> Result<String, RunError> {
    let raw = raw.trim();
    let key = spec.key;
    Ok(match spec.ty {
        KeyType::Real => render_real(parse_real(raw).ok_or_else(|| bad(key, format!("not a number: {raw:?}")))?),
        KeyType::PositiveReal => {
            let v = parse_real(raw).ok_or_else(|| bad(key, format!("not a number: {raw:?}")))?;
            if v <= 0.0 {
                return Err(bad(key, format!("must be positive, got {v}")));
            }
            render_real(v)
        }
        KeyType::RealList => {
            let mut vals = Vec::new();
            for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let v = parse_real(item).ok_or_else(|| bad(key, format!("not a number: {item:?}")))?;
                if !(v > 0.0 && v <= 1.0) {
                    return Err(bad(key, format!("values must lie in (0, 1], got {v}")));
                }
                vals.push(v);
            }
            if vals.is_empty() {
                return Err(bad(key, "list is empty"));
            }
            vals.sort_by(|a, b| b.total_cmp(a));
            if vals.windows(2).any(|w| w[0] == w[1]) {
                return Err(bad(key, "duplicate values"));
            }
            vals.into_iter().map(render_real).collect::<Vec<_>>().join(",")
        }
        KeyType::Count | KeyType::CountOrZero => {
            let v: usize = raw.parse().map_err(|_| bad(key, format!("not a count: {raw:?}")))?;
            if v == 0 && matches!(spec.ty, KeyType::Count) {
                return Err(bad(key, "must be positive"));
            }
            v.to_string()
        }
        KeyType::Seed => raw.parse::<u64>().map_err(|_| bad(key, format!("not a seed: {raw:?}")))?.to_string(),
        KeyType::Bool => match raw {
            "true" | "yes" | "1" => "true".into(),
            "false" | "no" | "0" => "false".into(),
            _ => return Err(bad(key, format!("not a boolean: {raw:?}"))),
        },
        KeyType::Text => {
            if raw.is_empty() {
                return Err(bad(key, "empty value"));
            }
            raw.to_string()
        }
        KeyType::Choice(options) => {
            if !options.contains(&raw) {
                return Err(bad(key, format!("expected one of {}, got {raw:?}", options.join("|"))));
            }
            raw.to_string()
        }
        KeyType::Range => {
            let r = parse_range(raw).ok_or_else(|| bad(key, format!("expected lo..hi, got {raw:?}")))?;
            format!("{}..{}", render_real(r.lo), render_real(r.hi))
        }
        KeyType::Models => {
            let ms = parse_models(raw).ok_or_else(|| bad(key, format!("expected distinct names from {ALL_MODELS}")))?;
            ms.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")
        }
    })
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, RunError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| RunError::Config(format!("line {}: expected key = value", n + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(RunError::Config(format!("line {}: empty key", n + 1)));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(RunError::Config(format!("line {}: duplicate key {k}", n + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// A fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    kind: ExperimentKind,
    values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Defaults for `kind`.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let values = KEYS
            .iter()
            .filter_map(|s| s.defaults[kind.index()].map(|d| (s.key.to_string(), d.to_string())))
            .map(|(k, d)| {
                let n = normalise(spec_for(&k).unwrap(), &d).expect("defaults are valid");
                (k, n)
            })
            .collect();
        ExperimentConfig { kind, values }
    }

    /// Defaults, then the entries of `file_text`, then `overrides` in order.
    ///
    /// A file may name its experiment with `experiment = ...`; it must agree
    /// with `kind`.
    pub fn resolve(
        kind: ExperimentKind,
        file_text: Option<&str>,
        overrides: &[(String, String)],
    ) -> Result<Self, RunError> {
        let mut cfg = Self::defaults(kind);
        if let Some(text) = file_text {
            for (k, v) in parse_config_text(text)? {
                if k == "experiment" {
                    if v != kind.name() {
                        return Err(RunError::Config(format!("config file is for experiment {v}, not {kind}")));
                    }
                    continue;
                }
                cfg.set(&k, &v)?;
            }
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key; the key must belong to this experiment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), RunError> {
        let spec = spec_for(key).ok_or_else(|| RunError::Config(format!("unknown key {key}")))?;
        if spec.defaults[self.kind.index()].is_none() {
            return Err(RunError::Config(format!("key {key} is not used by {}", self.kind)));
        }
        let v = normalise(spec, value)?;
        self.values.insert(key.to_string(), v);
        Ok(())
    }

    /// Cross-key checks.
    fn validate(&self) -> Result<(), RunError> {
        let field = self.field()?;
        let dim_ok = match self.kind {
            ExperimentKind::ConvergeWeakPde => field.dim() == 1,
            ExperimentKind::Longtime2d => field.dim() == 2,
            _ => true,
        };
        if !dim_ok {
            return Err(RunError::Config(format!("field {} has the wrong dimension for {}", field.name(), self.kind)));
        }
        match self.kind {
            ExperimentKind::ConvergeWeakPde => {
                let (n, nx) = (self.count("addiff.n")?, self.count("fpk.nx")?);
                if n % nx != 0 {
                    return Err(RunError::Config(format!(
                        "addiff.n ({n}) must be a multiple of fpk.nx ({nx}) to compare densities"
                    )));
                }
            }
            ExperimentKind::ConvergeStrongMc | ExperimentKind::ConvergeWeakMc => {
                if !self.models()?.contains(&Model::Langevin) {
                    return Err(RunError::Config("mc.models must include langevin".into()));
                }
                if self.count("paths")? < 2 {
                    return Err(RunError::Config("paths must be at least 2".into()));
                }
            }
            ExperimentKind::Longtime2d => {
                if self.eps()?.len() != 1 {
                    return Err(RunError::Config("longtime-2d takes exactly one eps".into()));
                }
            }
            ExperimentKind::OracleCheck => {
                if !(1..=3).contains(&self.count("dim")?) {
                    return Err(RunError::Config("dim must be 1, 2 or 3".into()));
                }
                if self.count("paths")? < 2 {
                    return Err(RunError::Config("paths must be at least 2".into()));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> ExperimentKind {
        self.kind
    }

    /// Normalised value of `key`, if the experiment uses it.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn raw(&self, key: &str) -> Result<&str, RunError> {
        self.get(key).ok_or_else(|| RunError::Config(format!("key {key} is not used by {}", self.kind)))
    }

    pub fn real(&self, key: &str) -> Result<f64, RunError> {
        parse_real(self.raw(key)?).ok_or_else(|| bad(key, "not a number"))
    }

    pub fn count(&self, key: &str) -> Result<usize, RunError> {
        self.raw(key)?.parse().map_err(|_| bad(key, "not a count"))
    }

    pub fn flag(&self, key: &str) -> Result<bool, RunError> {
        Ok(self.raw(key)? == "true")
    }

    pub fn range(&self, key: &str) -> Result<Range, RunError> {
        parse_range(self.raw(key)?).ok_or_else(|| bad(key, "not a range"))
    }

    /// ε values, largest first.
    pub fn eps(&self) -> Result<Vec<f64>, RunError> {
        self.raw("eps")?.split(',').map(|s| parse_real(s).ok_or_else(|| bad("eps", "not a number"))).collect()
    }

    pub fn seed(&self) -> u64 {
        self.raw("seed").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.get("out").unwrap_or("out"))
    }

    pub fn exec(&self) -> Exec {
        match self.get("exec") {
            Some("sequential") => Exec::Sequential,
            _ => Exec::Parallel,
        }
    }

    /// Worker threads; 0 leaves the choice to the thread pool.
    pub fn threads(&self) -> usize {
        self.count("threads").unwrap_or(0)
    }

    pub fn field(&self) -> Result<FieldSpec, RunError> {
        match self.get("field") {
            None => Ok(FieldSpec::Zero),
            Some(name) => FieldSpec::from_name(name, self.real("field.c").unwrap_or(1.0)),
        }
    }

    pub fn models(&self) -> Result<Vec<Model>, RunError> {
        parse_models(self.raw("mc.models")?).ok_or_else(|| bad("mc.models", "invalid model list"))
    }

    pub fn scheme(&self) -> Result<LangevinScheme, RunError> {
        LangevinScheme::from_name(self.raw("mc.scheme")?).ok_or_else(|| bad("mc.scheme", "unknown scheme"))
    }

    /// The normalised entries that identify a run, in key order.
    pub fn canonical(&self) -> BTreeMap<&str, &str> {
        self.values
            .iter()
            .filter(|(k, _)| spec_for(k).is_some_and(|s| s.hashed))
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect()
    }

    /// All entries, including output location and execution settings.
    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// Hex sha256 of `experiment=...` followed by the canonical `key=value`
    /// lines.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("experiment={}\n", self.kind));
        for (k, v) in self.canonical() {
            h.update(format!("{k}={v}\n"));
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The configuration as a config file.
    pub fn to_text(&self) -> String {
        let mut s = format!("experiment = {}\n", self.kind);
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}
