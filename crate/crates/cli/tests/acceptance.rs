//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line for
//! its criterion and then asserts it. The line goes straight to the stderr
//! handle, which the test harness does not capture.

use std::cell::Cell;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;

use inertial_cli::experiments::run_experiment;
use inertial_cli::output::{Check, ExperimentOutput, Status};
use inertial_cli::{run, ExperimentConfig, ExperimentKind};
use inertial_core::addiff::{step_1d, AdvDiffSettings, DensityField2D, DensityLine, Grid1D, Stepper2D};
use inertial_core::flowfield::CallbackField;
use inertial_core::fpk1d::{KineticStepper, PhaseDensity, PhaseGrid};
use inertial_core::sde::Drift;
use inertial_core::{Eps, Exec};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

fn report(criterion: &str, ok: bool, detail: &str) {
    let line = format!("{} {criterion}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "{criterion}: {detail}");
}

fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn config(kind: ExperimentKind, pairs: &[(&str, &str)]) -> ExperimentConfig {
    ExperimentConfig::resolve(kind, None, &kv(pairs)).expect("valid configuration")
}

/// Summarises the named checks of one run as a single criterion line.
fn report_checks(criterion: &str, out: &ExperimentOutput, names: &[&str]) {
    let picked: Vec<&Check> = names
        .iter()
        .map(|n| out.checks.iter().find(|c| c.name == *n).unwrap_or_else(|| panic!("no check {n}")))
        .collect();
    let ok = picked.iter().all(|c| c.status == Status::Pass);
    let detail: Vec<String> = picked.iter().map(|c| format!("[{c}]")).collect();
    report(criterion, ok, &detail.join(" "));
}

#[test]
fn oracle_exactness() {
    let cfg = config(ExperimentKind::OracleCheck, &[("eps", "0.25,0.1"), ("t_final", "1"), ("paths", "100000")]);
    let out = run_experiment(&cfg).unwrap();
    let names: Vec<&str> = out.checks.iter().map(|c| c.name.as_str()).collect();
    report_checks("oracle exactness", &out, &names);
}

/// Both drifts come out of one run; the naive solve is the same computation
/// as a run with `no_correction`.
fn pde_weak_run() -> &'static ExperimentOutput {
    static OUT: OnceLock<ExperimentOutput> = OnceLock::new();
    OUT.get_or_init(|| {
        let cfg = config(
            ExperimentKind::ConvergeWeakPde,
            &[
                ("field", "sin-x-sin-t"),
                ("t_final", "1"),
                ("eps", "2^-3,2^-4,2^-5,2^-6,2^-7"),
                ("fpk.nx", "512"),
                ("fpk.m", "512"),
                ("fpk.dt_scale", "2^-7"),
                ("addiff.n", "4096"),
                ("addiff.dt", "2^-7"),
                ("modes", "6"),
                ("check.modes", "3"),
            ],
        );
        let out = run_experiment(&cfg).unwrap();
        assert!(out.failure.is_none());
        out
    })
}

#[test]
fn weak_rate_pde_corrected() {
    report_checks("weak rate O(eps^2), PDE route", pde_weak_run(), &["weak-pde corrected slope"]);
}

#[test]
fn weak_rate_pde_naive() {
    report_checks("naive weak rate O(eps), PDE route", pde_weak_run(), &["weak-pde naive slope"]);
}

#[test]
fn strong_rates() {
    let cfg = config(
        ExperimentKind::ConvergeStrongMc,
        &[("paths", "100000"), ("t_final", "1"), ("eps", "2^-3,2^-4,2^-5,2^-6,2^-7")],
    );
    let out = run_experiment(&cfg).unwrap();
    report_checks(
        "strong rates",
        &out,
        &[
            "strong corrected slope",
            "strong ode slope",
            "strong naive slope",
            "strong kifer within factor of corrected",
        ],
    );
}

/// `b = a sin(kx + φ) cos(ωt)` with consistent derivatives.
fn wave_1d(a: f64, k: f64, phi: f64, w: f64) -> CallbackField<1> {
    CallbackField::new(
        "wave",
        move |x, t| [a * (k * x[0] + phi).sin() * (w * t).cos()],
        move |x, t| [-a * w * (k * x[0] + phi).sin() * (w * t).sin()],
        move |x, t| [[a * k * (k * x[0] + phi).cos() * (w * t).cos()]],
    )
}

/// `b = (a sin(k x₂ + φ), a cos(k x₁)) cos(ωt)`, divergence-free.
fn wave_2d(a: f64, k: f64, phi: f64, w: f64) -> CallbackField<2> {
    CallbackField::new(
        "wave2",
        move |x, t| {
            let c = (w * t).cos();
            [a * (k * x[1] + phi).sin() * c, a * (k * x[0]).cos() * c]
        },
        move |x, t| {
            let s = -w * (w * t).sin();
            [a * (k * x[1] + phi).sin() * s, a * (k * x[0]).cos() * s]
        },
        move |x, t| {
            let c = (w * t).cos();
            [[0.0, a * k * (k * x[1] + phi).cos() * c], [-a * k * (k * x[0]).sin() * c, 0.0]]
        },
    )
}

fn field_params() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.0f64..3.0, 1u32..4, 0.0f64..6.3, 0.0f64..4.0).prop_map(|(a, k, p, w)| (a, f64::from(k), p, w))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn conservation_suite() {
    let runner = || TestRunner::new(Config::with_cases(24));
    let cases = Cell::new(0usize);

    let fpk_step = Cell::new(0.0f64);
    runner()
        .run(&(field_params(), 0.01f64..1.0, 1e-3f64..0.05, 0.0f64..0.9), |((a, k, p, w), e, dt, amp)| {
            let grid = PhaseGrid::new(32, 16, 8.0, dt).unwrap();
            let mut rho = PhaseDensity::from_fn(grid, |x, v| (1.0 + amp * (x + 0.3 * v).sin()) * (-0.5 * v * v).exp());
            let field = wave_1d(a, k, p, w);
            let mut stepper = KineticStepper::new(grid, Eps::new(e).unwrap(), Exec::Sequential);
            cases.set(cases.get() + 1);
            for _ in 0..5 {
                let m0 = rho.mass();
                stepper.step(&mut rho, &field).unwrap();
                let d = rel(rho.mass(), m0);
                fpk_step.set(fpk_step.get().max(d));
                prop_assert!(d <= 1e-12, "kinetic step drift {d:e}");
            }
            Ok(())
        })
        .unwrap_or_else(|e| report("conservation suite", false, &e.to_string()));

    let fpk_long = Cell::new(0.0f64);
    TestRunner::new(Config::with_cases(3))
        .run(&(field_params(), 0.02f64..0.5), |((a, k, p, w), e)| {
            let grid = PhaseGrid::new(16, 8, 6.0, 0.01).unwrap();
            let mut rho = PhaseDensity::from_fn(grid, |x, v| (1.0 + 0.5 * x.cos()) * (-0.5 * v * v).exp());
            let m0 = rho.mass();
            let field = wave_1d(a, k, p, w);
            let mut stepper = KineticStepper::new(grid, Eps::new(e).unwrap(), Exec::Sequential);
            for _ in 0..10_000 {
                stepper.step(&mut rho, &field).unwrap();
            }
            cases.set(cases.get() + 1);
            let d = rel(rho.mass(), m0);
            fpk_long.set(fpk_long.get().max(d));
            prop_assert!(d <= 1e-9, "kinetic drift over 1e4 steps {d:e}");
            Ok(())
        })
        .unwrap_or_else(|e| report("conservation suite", false, &e.to_string()));

    let line = Cell::new(0.0f64);
    runner()
        .run(
            &(field_params(), 0.005f64..1.0, 1e-4f64..0.1, 0.0f64..10.0, 0.0f64..0.9),
            |((a, k, p, w), e, dt, t, amp)| {
                let mut u = DensityLine::from_fn(Grid1D::new(128).unwrap(), |x| 1.0 + amp * (2.0 * x).cos());
                u.time = t;
                let s = AdvDiffSettings::new(Eps::new(e).unwrap(), dt, Drift::Corrected).unwrap();
                let next = step_1d(&u, &wave_1d(a, k, p, w), &s).unwrap();
                cases.set(cases.get() + 1);
                let d = rel(next.mass(), u.mass());
                line.set(line.get().max(d));
                prop_assert!(d <= 1e-11, "1D step drift {d:e}");
                Ok(())
            },
        )
        .unwrap_or_else(|e| report("conservation suite", false, &e.to_string()));

    let plane = Cell::new(0.0f64);
    runner()
        .run(
            &(field_params(), 0.01f64..1.0, 1e-4f64..0.1, 0.0f64..10.0, any::<bool>()),
            |((a, k, p, w), e, dt, t, naive)| {
                let mut u = DensityField2D::from_fn(32, |x, y| 1.0 + 0.5 * (x + 2.0 * y).sin()).unwrap();
                u.time = t;
                let m0 = u.mass();
                let drift = if naive { Drift::Naive } else { Drift::Corrected };
                let s = AdvDiffSettings::new(Eps::new(e).unwrap(), dt, drift).unwrap();
                Stepper2D::new(&s, 32, Exec::Sequential).unwrap().step(&mut u, &wave_2d(a, k, p, w)).unwrap();
                cases.set(cases.get() + 1);
                let d = rel(u.mass(), m0);
                plane.set(plane.get().max(d));
                prop_assert!(d <= 1e-11, "2D step drift {d:e}");
                Ok(())
            },
        )
        .unwrap_or_else(|e| report("conservation suite", false, &e.to_string()));

    report(
        "conservation suite",
        true,
        &format!(
            "kinetic per step {:.1e} (limit 1e-12), over 1e4 steps {:.1e} (limit 1e-9), \
             advection-diffusion per step 1D {:.1e} / 2D {:.1e} (limit 1e-11); {} random cases",
            fpk_step.get(),
            fpk_long.get(),
            line.get(),
            plane.get(),
            cases.get()
        ),
    );
}

#[test]
fn stationarity_dichotomy() {
    let cfg = config(
        ExperimentKind::Longtime2d,
        &[("field", "vortex"), ("eps", "2^-4"), ("addiff.n", "128"), ("t_final", "50"), ("paths", "200000")],
    );
    let out = run_experiment(&cfg).unwrap();
    report_checks(
        "stationarity dichotomy",
        &out,
        &[
            "longtime naive flat",
            "longtime corrected non-uniform",
            "longtime langevin closer to corrected than to constant",
        ],
    );
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn small_configs() -> Vec<(ExperimentKind, Vec<(&'static str, &'static str)>)> {
    vec![
        (
            ExperimentKind::ConvergeWeakPde,
            vec![
                ("fpk.nx", "32"),
                ("fpk.m", "16"),
                ("fpk.dt_scale", "2^-3"),
                ("addiff.n", "128"),
                ("addiff.dt", "2^-4"),
                ("eps", "2^-2,2^-3,2^-4"),
                ("t_final", "0.5"),
            ],
        ),
        (ExperimentKind::ConvergeStrongMc, vec![("paths", "3000"), ("eps", "2^-2,2^-3,2^-4")]),
        (ExperimentKind::ConvergeWeakMc, vec![("paths", "3000"), ("eps", "2^-2,2^-3,2^-4")]),
        (
            ExperimentKind::Longtime2d,
            vec![("paths", "3000"), ("t_final", "2"), ("addiff.n", "16"), ("addiff.dt", "2^-4"), ("eps", "2^-2")],
        ),
        (ExperimentKind::OracleCheck, vec![("paths", "3000")]),
    ]
}

#[test]
fn deterministic_reproducibility() {
    let root = tempfile::tempdir().unwrap();
    let modes: [(&str, &str, &str); 4] =
        [("seq", "sequential", "0"), ("par1", "parallel", "1"), ("par3", "parallel", "3"), ("again", "parallel", "3")];
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for (kind, pairs) in small_configs() {
        let mut runs = Vec::new();
        for (tag, exec, threads) in modes {
            let dir = root.path().join(format!("{kind}-{tag}"));
            let dir_text = dir.display().to_string();
            let mut all = pairs.clone();
            all.extend([("exec", exec), ("threads", threads), ("out", dir_text.as_str())]);
            run(&config(kind, &all)).unwrap();
            runs.push((tag, read_dir(&dir)));
        }
        let (_, base) = &runs[0];
        for (tag, files) in &runs[1..] {
            compared += files.len();
            if files != base {
                mismatches.push(format!("{kind} {tag}"));
            }
        }
    }
    let ok = mismatches.is_empty();
    let detail = if ok {
        format!("{compared} files byte-identical across sequential, 1 and 3 workers and a repeat")
    } else {
        format!("differences in {}", mismatches.join(", "))
    };
    report("deterministic reproducibility", ok, &detail);
}
