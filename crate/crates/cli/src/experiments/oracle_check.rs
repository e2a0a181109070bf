//! Monte-Carlo estimates of the free-particle moments against their closed
//! forms.

use std::fmt::Write as _;

use inertial_core::io::fmt_f64;
use inertial_core::oracle::{free_pathwise_position, free_strong_error_sq, ou_p_moment, ou_pw_cross, ou_sigma_sq};
use inertial_core::sde::{simulate_free_paths, FreePathSample};
use inertial_core::stats::mean_and_se;
use inertial_core::Eps;

use crate::config::ExperimentConfig;
use crate::error::RunError;
use crate::output::{Artifact, Check, ExperimentOutput};

/// Largest per-path gap between the simulated position and the closed-form
/// path built from the same `(V₀, W, P)`.
const PATHWISE_TOL: f64 = 1e-10;

struct Row {
    eps: f64,
    t: f64,
    quantity: &'static str,
    estimate: f64,
    stderr: f64,
    exact: f64,
    pass: bool,
}

fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rows_for<const D: usize>(cfg: &ExperimentConfig, e: f64, t: f64, k: f64) -> Result<Vec<Row>, RunError> {
    let eps = Eps::new(e)?;
    let dt = cfg.real("mc.dt_scale")? * e;
    let paths: Vec<FreePathSample<D>> =
        simulate_free_paths::<D>(eps, t, dt, cfg.count("paths")?, cfg.seed(), cfg.exec())?;
    let sample = |f: &dyn Fn(&FreePathSample<D>) -> f64| -> (f64, f64) {
        let xs: Vec<f64> = paths.iter().map(f).collect();
        mean_and_se(&xs)
    };
    let mut rows = Vec::new();
    let mut push = |quantity, (estimate, stderr): (f64, f64), exact: f64| {
        rows.push(Row { eps: e, t, quantity, estimate, stderr, exact, pass: (estimate - exact).abs() <= k * stderr });
    };
    push("pw", sample(&|s| dot(&s.p, &s.w)), ou_pw_cross(eps, t, D)?);
    push("var_p", sample(&|s| dot(&s.p, &s.p) / D as f64), ou_sigma_sq(eps, t)?);
    push("p4", sample(&|s| dot(&s.p, &s.p).powi(2)), ou_p_moment(eps, t, D, 4.0)?);
    push(
        "strong_sq",
        sample(&|s| {
            let d: [f64; D] = std::array::from_fn(|i| s.x[i] - s.z[i]);
            dot(&d, &d)
        }),
        free_strong_error_sq(eps, t, D)?,
    );
    let mut worst = 0.0f64;
    for s in &paths {
        let x = free_pathwise_position(eps, t, &s.v0, &s.w, &s.p)?;
        for (a, b) in x.iter().zip(&s.x) {
            worst = worst.max((a - b).abs());
        }
    }
    rows.push(Row {
        eps: e,
        t,
        quantity: "pathwise_max",
        estimate: worst,
        stderr: 0.0,
        exact: 0.0,
        pass: worst <= PATHWISE_TOL,
    });
    Ok(rows)
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let k = cfg.real("check.se_factor")?;
    let t_final = cfg.real("t_final")?;
    let mut rows = Vec::new();
    for e in cfg.eps()? {
        for t in [0.0, t_final] {
            rows.extend(match cfg.count("dim")? {
                1 => rows_for::<1>(cfg, e, t, k)?,
                2 => rows_for::<2>(cfg, e, t, k)?,
                3 => rows_for::<3>(cfg, e, t, k)?,
                d => return Err(RunError::Config(format!("dim must be 1, 2 or 3, got {d}"))),
            });
        }
    }

    let mut out = ExperimentOutput::default();
    let mut table = String::from("eps,t,quantity,estimate,stderr,exact,pass\n");
    for r in &rows {
        writeln!(
            table,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.eps),
            fmt_f64(r.t),
            r.quantity,
            fmt_f64(r.estimate),
            fmt_f64(r.stderr),
            fmt_f64(r.exact),
            r.pass
        )
        .expect("string write");
    }
    out.artifacts.push(Artifact::new("oracle.csv", table));

    for q in ["pw", "var_p", "p4", "strong_sq", "pathwise_max"] {
        let mine: Vec<&Row> = rows.iter().filter(|r| r.quantity == q && r.t > 0.0).collect();
        let detail: Vec<String> = mine
            .iter()
            .map(|r| {
                if q == "pathwise_max" {
                    format!("eps {}: {:.1e}", r.eps, r.estimate)
                } else {
                    format!("eps {}: {:.3} SE", r.eps, (r.estimate - r.exact).abs() / r.stderr)
                }
            })
            .collect();
        let limit = if q == "pathwise_max" { format!("limit {PATHWISE_TOL:.0e}") } else { format!("limit {k} SE") };
        out.checks.push(Check::new(
            format!("oracle {q}"),
            mine.iter().all(|r| r.pass),
            format!("{} ({limit})", detail.join(", ")),
        ));
    }
    let zero = rows.iter().filter(|r| r.t == 0.0).all(|r| r.estimate == 0.0 && r.exact == 0.0 && r.stderr == 0.0);
    out.checks.push(Check::new("oracle t=0 rows exactly zero", zero, "estimate, stderr and closed form"));
    Ok(out)
}
