//! Long-time 2D densities: PDE solutions of both diffusion models, KDEs of
//! the simulated particle models, and all pairwise distances between them.

use std::fmt::Write as _;

use inertial_core::addiff::{run_to_time_2d, AdvDiffSettings, DensityField2D};
use inertial_core::io::{fmt_f64, write_field_csv};
use inertial_core::sde::{simulate_coupled, Drift, EnsembleSpec, InitialPosition, InitialVelocity, Model, StepConfig};
use inertial_core::stats::{density_distance, kde_2d, Bandwidth, Norm};
use inertial_core::{Eps, Error, TWO_PI};

use crate::config::ExperimentConfig;
use crate::error::RunError;
use crate::output::{render, Artifact, Check, ExperimentOutput};

const CONSTANT: &str = "constant";

struct Named {
    name: String,
    density: DensityField2D,
}

fn distance(set: &[Named], a: &str, b: &str, norm: Norm) -> Option<f64> {
    let find = |n: &str| set.iter().find(|d| d.name == n);
    density_distance(&find(a)?.density, &find(b)?.density, norm).ok()
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let field = cfg.field()?.build_2d()?;
    let e = cfg.eps()?[0];
    let eps = Eps::new(e)?;
    let t = cfg.real("t_final")?;
    let n = cfg.count("addiff.n")?;
    let exec = cfg.exec();
    let mut out = ExperimentOutput::default();
    let mut set = vec![Named { name: CONSTANT.into(), density: DensityField2D::uniform(n, 1.0 / (TWO_PI * TWO_PI))? }];

    for (drift, name) in [(Drift::Corrected, "pde_corrected"), (Drift::Naive, "pde_naive")] {
        let settings = AdvDiffSettings::new(eps, cfg.real("addiff.dt")?, drift)?;
        match run_to_time_2d(&set[0].density, field.as_ref(), &settings, exec, t, &[]) {
            Ok((u, _)) => set.push(Named { name: name.into(), density: u }),
            Err(err) => {
                out.failure = Some(err);
                break;
            }
        }
    }

    if out.failure.is_none() {
        let spec = EnsembleSpec::<2> {
            step: StepConfig::new(cfg.scheme()?, cfg.real("mc.dt_scale")? * e, eps)?,
            n_paths: cfg.count("paths")?,
            t_final: t,
            x0: InitialPosition::Uniform,
            v0_law: InitialVelocity::StdNormal,
            base_seed: cfg.seed(),
            exec,
        };
        for ens in simulate_coupled(&cfg.models()?, field.as_ref(), &spec)? {
            let name = format!("kde_{}", ens.model.name());
            match kde_2d(&ens.positions, n, Bandwidth::Silverman, exec) {
                Ok(est) => {
                    let body = render(|w| write_field_csv(w, &est.density))?;
                    out.artifacts.push(Artifact::new(format!("density_{name}.csv"), body).with_meta(
                        "bandwidth",
                        format!("{},{}", fmt_f64(est.bandwidth[0]), fmt_f64(est.bandwidth[1])),
                    ));
                    set.push(Named { name, density: est.density });
                }
                // a linearised model may leave the torus numerically
                Err(Error::Domain(msg)) => out.checks.push(Check::skipped(format!("longtime {name}"), msg)),
                Err(err) => return Err(err.into()),
            }
        }
    }

    for d in set.iter().filter(|d| d.name.starts_with("pde_")) {
        let body = render(|w| write_field_csv(w, &d.density))?;
        out.artifacts.push(Artifact::new(format!("density_{}.csv", d.name), body));
    }
    let mut table = String::from("a,b,norm,distance\n");
    for (i, a) in set.iter().enumerate() {
        for b in &set[i + 1..] {
            for (norm, label) in [(Norm::L2, "l2"), (Norm::LInf, "linf")] {
                let d = density_distance(&a.density, &b.density, norm)?;
                writeln!(table, "{},{},{label},{}", a.name, b.name, fmt_f64(d)).expect("string write");
            }
        }
    }
    out.artifacts.push(Artifact::new("distances.csv", table));
    add_checks(cfg, &set, &mut out)?;
    Ok(out)
}

fn add_checks(cfg: &ExperimentConfig, set: &[Named], out: &mut ExperimentOutput) -> Result<(), RunError> {
    let pending = |name: &str| Check::skipped(name, "inputs not available");
    let lang = format!("kde_{}", Model::Langevin.name());
    let kde_corr = format!("kde_{}", Model::Corrected.name());

    let name = "longtime naive flat";
    out.checks.push(match distance(set, "pde_naive", CONSTANT, Norm::LInf) {
        Some(d) => {
            let tol = cfg.real("check.naive_linf")?;
            Check::new(name, d <= tol, format!("Linf to constant {d:.3e} (limit {tol:.1e})"))
        }
        None => pending(name),
    });

    let name = "longtime corrected non-uniform";
    out.checks.push(match distance(set, "pde_corrected", CONSTANT, Norm::LInf) {
        Some(d) => {
            let lo = cfg.real("check.corrected_linf")?;
            Check::new(name, d >= lo, format!("Linf to constant {d:.3e} (at least {lo:.1e})"))
        }
        None => pending(name),
    });

    let name = "longtime naive fraction of corrected";
    out.checks.push(
        match (distance(set, "pde_naive", CONSTANT, Norm::L2), distance(set, "pde_corrected", CONSTANT, Norm::L2)) {
            (Some(n), Some(c)) => {
                let f = cfg.real("check.naive_fraction")?;
                Check::new(name, n <= f * c, format!("L2 to constant {n:.3e} vs {c:.3e} (fraction {f})"))
            }
            _ => pending(name),
        },
    );

    let name = "longtime langevin closer to corrected than to constant";
    out.checks.push(
        match (distance(set, &lang, "pde_corrected", Norm::L2), distance(set, &lang, CONSTANT, Norm::L2)) {
            (Some(c), Some(k)) => Check::new(name, c < k, format!("L2 {c:.3e} vs {k:.3e}")),
            _ => pending(name),
        },
    );

    let name = "longtime langevin max/min";
    out.checks.push(match set.iter().find(|d| d.name == lang) {
        Some(d) => {
            let r = d.density.max() / d.density.min();
            let lo = cfg.real("check.max_min")?;
            Check::new(name, r > lo, format!("ratio {r:.3} (above {lo})"))
        }
        None => pending(name),
    });

    let name = "longtime pde and kde errors of the same order";
    out.checks.push(
        match (distance(set, &lang, "pde_corrected", Norm::L2), distance(set, &lang, &kde_corr, Norm::L2)) {
            (Some(a), Some(b)) => {
                let f = cfg.real("check.order_factor")?;
                let r = a / b;
                Check::new(name, r >= 1.0 / f && r <= f, format!("L2 {a:.3e} vs {b:.3e}, ratio {r:.3} (within {f}x)"))
            }
            _ => Check::skipped(name, "langevin or corrected estimate missing"),
        },
    );
    Ok(())
}
