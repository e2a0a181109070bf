//! Artifacts, acceptance checks and the files they are written to.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use inertial_core::io::fmt_f64;
use inertial_core::stats::{ErrorReport, LogLogFit};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::RunError;

/// Version string written into every artifact.
pub const ARTIFACT_VERSION: &str = concat!("inertial/", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The inputs needed for the check were not produced by this run.
    Skipped,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        }
    }
}

/// One acceptance threshold and how the run fared against it.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::from_bool(ok), detail: detail.into() }
    }

    pub fn skipped(name: impl Into<String>, why: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Skipped, detail: why.into() }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.status.label(), self.name, self.detail)
    }
}

/// A CSV file body (header row first) plus metadata specific to the file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub metadata: Vec<(String, String)>,
    pub body: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, body: String) -> Self {
        Artifact { name: name.into(), metadata: Vec::new(), body }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.push((key.to_string(), value.into()));
        self
    }
}

/// Renders any `io::Write`-based CSV writer into a string.
pub fn render(f: impl FnOnce(&mut Vec<u8>) -> inertial_core::Result<()>) -> Result<String, RunError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV writers emit UTF-8"))
}

/// Everything an experiment produces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOutput {
    pub reports: Vec<ErrorReport>,
    pub fits: Vec<(String, LogLogFit)>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
    /// Set when a solver failed part-way.
    pub failure: Option<inertial_core::Error>,
}

impl ExperimentOutput {
    /// Fits every report whose unflagged points are all positive and number
    /// at least three.
    pub fn fit_reports(&mut self) -> Result<(), RunError> {
        for r in &self.reports {
            let kept: Vec<f64> = r.points.iter().filter(|p| !p.noise_dominated).map(|p| p.error).collect();
            if kept.len() >= 3 && kept.iter().all(|e| *e > 0.0) {
                self.fits.push((r.label(), r.fit()?));
            }
        }
        Ok(())
    }

    pub fn fit(&self, label: &str) -> Option<&LogLogFit> {
        self.fits.iter().find(|(l, _)| l == label).map(|(_, f)| f)
    }

    pub fn report(&self, model_a: &str, model_b: &str, metric: &str, k: Option<u32>) -> Option<&ErrorReport> {
        self.reports.iter().find(|r| r.model_a == model_a && r.model_b == model_b && r.metric == metric && r.phi_k == k)
    }
}

/// Outcome of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub config_hash: String,
    pub output: ExperimentOutput,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn checks(&self) -> &[Check] {
        &self.output.checks
    }

    /// True when no check failed.
    pub fn passed(&self) -> bool {
        self.output.checks.iter().all(|c| c.status != Status::Fail)
    }

    /// 0 when every threshold was met, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.output.checks.iter().find(|c| c.name == name)
    }
}

fn metadata_line(cfg: &ExperimentConfig, extra: &[(String, String)], partial: bool) -> String {
    let mut fields = vec![
        ("experiment".to_string(), cfg.kind().name().to_string()),
        ("config_hash".to_string(), cfg.hash()),
        ("seed".to_string(), cfg.seed().to_string()),
        ("version".to_string(), ARTIFACT_VERSION.to_string()),
    ];
    if partial {
        fields.push(("status".to_string(), "partial".to_string()));
    }
    fields.extend(extra.iter().cloned());
    let body: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("# {}\n", body.join(" "))
}

/// `model_a, model_b, metric, phi_k, slope, intercept, r_squared, n_points`
pub fn slopes_csv(out: &ExperimentOutput) -> String {
    let mut s = String::from("model_a,model_b,metric,phi_k,slope,intercept,r_squared,n_points\n");
    for r in &out.reports {
        if let Some(f) = out.fit(&r.label()) {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.model_a,
                r.model_b,
                r.metric,
                r.phi_k.map(|k| k.to_string()).unwrap_or_default(),
                fmt_f64(f.slope),
                fmt_f64(f.intercept),
                fmt_f64(f.r_squared),
                f.n_points
            ));
        }
    }
    s
}

/// Errors of every report, one row per point.
pub fn errors_csv(out: &ExperimentOutput) -> Result<String, RunError> {
    render(|w| {
        use std::io::Write;
        writeln!(w, "{}", inertial_core::io::ERROR_COLUMNS)?;
        for r in &out.reports {
            inertial_core::io::write_error_rows(w, r)?;
        }
        Ok(())
    })
}

fn meta_jsonl(cfg: &ExperimentConfig, out: &ExperimentOutput) -> String {
    let config: serde_json::Map<String, Value> =
        cfg.canonical().into_iter().map(|(k, v)| (k.to_string(), Value::from(v))).collect();
    let mut lines = vec![json!({
        "record": "run",
        "experiment": cfg.kind().name(),
        "config_hash": cfg.hash(),
        "seed": cfg.seed(),
        "version": ARTIFACT_VERSION,
        "config": config,
    })];
    for (label, f) in &out.fits {
        lines.push(json!({
            "record": "fit",
            "series": label,
            "slope": f.slope,
            "intercept": f.intercept,
            "r_squared": f.r_squared,
            "n_points": f.n_points,
        }));
    }
    for c in &out.checks {
        lines.push(json!({
            "record": "check",
            "name": c.name,
            "status": c.status.label(),
            "detail": c.detail,
        }));
    }
    lines.push(json!({
        "record": "summary",
        "passed": out.checks.iter().all(|c| c.status != Status::Fail),
        "partial": out.failure.is_some(),
    }));
    lines.iter().map(|l| format!("{l}\n")).collect()
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|source| RunError::Io { path: path.display().to_string(), source })
}

/// Writes every artifact, `errors.csv`/`slopes.csv` when there are error
/// reports, and `meta.jsonl` into the configured output directory.
pub fn write_all(cfg: &ExperimentConfig, out: &ExperimentOutput) -> Result<Vec<PathBuf>, RunError> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).map_err(|source| RunError::Io { path: dir.display().to_string(), source })?;
    let partial = out.failure.is_some();
    let mut files = Vec::new();
    let mut emit = |name: &str, extra: &[(String, String)], body: &str| -> Result<(), RunError> {
        let path = dir.join(name);
        write_file(&path, &format!("{}{}", metadata_line(cfg, extra, partial), body))?;
        files.push(path);
        Ok(())
    };
    if !out.reports.is_empty() {
        emit("errors.csv", &[], &errors_csv(out)?)?;
        emit("slopes.csv", &[], &slopes_csv(out))?;
    }
    for a in &out.artifacts {
        emit(&a.name, &a.metadata, &a.body)?;
    }
    let meta = dir.join("meta.jsonl");
    write_file(&meta, &meta_jsonl(cfg, out))?;
    files.push(meta);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentKind;
    use inertial_core::stats::ErrorPoint;

    fn sample_output() -> ExperimentOutput {
        let mut r = ErrorReport::new("x", "naive", "langevin", "strong_p1", None);
        for (e, v) in [(0.5, 1.0), (0.25, 0.5), (0.125, 0.25)] {
            r.push(ErrorPoint { eps: e, error: v, stderr: Some(0.01), noise_dominated: false }).unwrap();
        }
        let mut out = ExperimentOutput { reports: vec![r], ..Default::default() };
        out.fit_reports().unwrap();
        out.checks.push(Check::new("slope", true, "1.0"));
        out.artifacts.push(Artifact::new("extra.csv", "a,b\n1,2\n".into()).with_meta("eps", "0.5"));
        out
    }

    #[test]
    fn slope_rows_follow_reports() {
        let out = sample_output();
        let s = slopes_csv(&out);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 2);
        let cells: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(cells[..4], ["naive", "langevin", "strong_p1", ""]);
        assert!((cells[4].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cells[7], "3");
        let e = errors_csv(&out).unwrap();
        assert_eq!(e.lines().count(), 4);
    }

    #[test]
    fn files_carry_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::resolve(
            ExperimentKind::ConvergeStrongMc,
            None,
            &[("out".into(), dir.path().display().to_string())],
        )
        .unwrap();
        let files = write_all(&cfg, &sample_output()).unwrap();
        let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["errors.csv", "slopes.csv", "extra.csv", "meta.jsonl"]);
        for f in &files[..3] {
            let text = fs::read_to_string(f).unwrap();
            let first = text.lines().next().unwrap();
            assert!(first.starts_with("# experiment=converge-strong-mc config_hash="), "{first}");
            assert!(first.contains(&format!("config_hash={}", cfg.hash())));
            assert!(first.contains(" seed=1 version=inertial/"));
        }
        let extra = fs::read_to_string(&files[2]).unwrap();
        assert!(extra.lines().next().unwrap().ends_with(" eps=0.5"));
        let meta = fs::read_to_string(&files[3]).unwrap();
        let records: Vec<Value> = meta.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(records[0]["record"], "run");
        assert_eq!(records[0]["config"]["paths"], "100000");
        assert!(records[0]["config"].get("out").is_none());
        assert_eq!(records.last().unwrap()["passed"], true);
    }

    #[test]
    fn exit_codes() {
        let mut out = sample_output();
        let mut o = RunOutcome { config_hash: String::new(), output: out.clone(), files: vec![] };
        assert_eq!(o.exit_code(), 0);
        out.checks.push(Check::skipped("other", "n/a"));
        o.output = out.clone();
        assert_eq!(o.exit_code(), 0);
        out.checks.push(Check::new("bad", false, "x"));
        o.output = out;
        assert_eq!(o.exit_code(), 2);
        assert!(!o.passed());
        assert_eq!(o.check("bad").unwrap().to_string(), "FAIL bad: x");
    }
}
