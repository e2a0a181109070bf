//! Weak error of the diffusion approximations against the kinetic equation,
//! measured on Fourier modes of the spatial density.

use inertial_core::addiff::{run_to_time_1d, AdvDiffSettings, DensityLine, Grid1D};
use inertial_core::fpk1d::{init_maxwellian, marginal_x, run_to_time, PhaseGrid};
use inertial_core::io::{write_line_csv, write_marginal_csv};
use inertial_core::sde::Drift;
use inertial_core::stats::{pde_weak_error, ErrorPoint, ErrorReport};
use inertial_core::{Eps, FlowField, TWO_PI};

use super::slope_band;
use crate::config::ExperimentConfig;
use crate::error::RunError;
use crate::output::{render, Artifact, Check, ExperimentOutput};

const KINETIC: &str = "kinetic";
const METRIC: &str = "weak_cos";

fn drift_name(d: Drift) -> &'static str {
    match d {
        Drift::Corrected => "corrected",
        Drift::Naive => "naive",
    }
}

struct Solved {
    g: DensityLine,
    us: Vec<DensityLine>,
}

fn solve_one(
    cfg: &ExperimentConfig,
    field: &dyn FlowField<1>,
    e: f64,
    drifts: &[Drift],
) -> Result<Solved, inertial_core::Error> {
    let exec = cfg.exec();
    let eps = Eps::new(e)?;
    let t = cfg.real("t_final").expect("validated");
    let nx = cfg.count("fpk.nx").expect("validated");
    let grid = PhaseGrid::new(
        nx,
        cfg.count("fpk.m").expect("validated"),
        cfg.real("fpk.v_cutoff").expect("validated"),
        cfg.real("fpk.dt_scale").expect("validated") * e.sqrt(),
    )?;
    let rho = run_to_time(&init_maxwellian(grid), field, eps, t, exec)?;
    let g = marginal_x(&rho)?;

    let line = Grid1D::new(cfg.count("addiff.n").expect("validated"))?;
    let u0 = DensityLine::uniform(line, 1.0 / TWO_PI);
    let mut us = Vec::with_capacity(drifts.len());
    for &d in drifts {
        let settings = AdvDiffSettings::new(eps, cfg.real("addiff.dt").expect("validated"), d)?;
        let (u, _) = run_to_time_1d(&u0, field, &settings, t, &[])?;
        us.push(u.coarsen(nx)?);
    }
    Ok(Solved { g, us })
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let field_spec = cfg.field()?;
    let field = field_spec.build_1d()?;
    let drifts: Vec<Drift> =
        if cfg.flag("no_correction")? { vec![Drift::Naive] } else { vec![Drift::Corrected, Drift::Naive] };
    let modes = u32::try_from(cfg.count("modes")?).map_err(|_| RunError::Config("modes too large".into()))?;
    let mut out = ExperimentOutput::default();
    for &d in &drifts {
        for k in 1..=modes {
            out.reports.push(ErrorReport::new(cfg.kind().name(), drift_name(d), KINETIC, METRIC, Some(k)));
        }
    }

    for (i, &e) in cfg.eps()?.iter().enumerate() {
        let solved = match solve_one(cfg, field.as_ref(), e, &drifts) {
            Ok(s) => s,
            Err(err) => {
                out.failure = Some(err);
                break;
            }
        };
        let eps_text = format!("{e:?}");
        out.artifacts.push(
            Artifact::new(format!("density_g_{i}.csv"), render(|w| write_marginal_csv(w, &solved.g))?)
                .with_meta("eps", eps_text.clone()),
        );
        for (d, u) in drifts.iter().zip(&solved.us) {
            out.artifacts.push(
                Artifact::new(format!("density_u_{}_{i}.csv", drift_name(*d)), render(|w| write_line_csv(w, u))?)
                    .with_meta("eps", eps_text.clone()),
            );
            for k in 1..=modes {
                let error = pde_weak_error(u, &solved.g, k)?;
                let r = out
                    .reports
                    .iter_mut()
                    .find(|r| r.model_a == drift_name(*d) && r.phi_k == Some(k))
                    .expect("report exists");
                r.push(ErrorPoint { eps: e, error, stderr: None, noise_dominated: false })?;
            }
        }
    }
    out.fit_reports()?;
    add_checks(cfg, &drifts, &mut out, field_spec.is_zero())?;
    Ok(out)
}

fn add_checks(
    cfg: &ExperimentConfig,
    drifts: &[Drift],
    out: &mut ExperimentOutput,
    zero: bool,
) -> Result<(), RunError> {
    if zero {
        let tol = cfg.real("check.zero_tol")?;
        let worst = out.reports.iter().flat_map(|r| &r.points).map(|p| p.error).fold(0.0, f64::max);
        out.checks.push(Check::new(
            "weak-pde zero-field agreement",
            worst <= tol,
            format!("largest error {worst:.3e} (limit {tol:.1e})"),
        ));
        return Ok(());
    }
    let checked = u32::try_from(cfg.count("check.modes")?.min(cfg.count("modes")?)).unwrap_or(u32::MAX);
    for &d in drifts {
        let key = match d {
            Drift::Corrected => "check.corrected_slope",
            Drift::Naive => "check.naive_slope",
        };
        let band = cfg.range(key)?;
        let series: Vec<(String, String)> = (1..=checked)
            .map(|k| (format!("k={k}"), format!("{}-vs-{KINETIC} {METRIC} k={k}", drift_name(d))))
            .collect();
        out.checks.push(slope_band(out, &format!("weak-pde {} slope", drift_name(d)), &series, band));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentKind;
    use crate::output::Status;

    fn small(extra: &[(&str, &str)]) -> ExperimentConfig {
        let mut o: Vec<(String, String)> = [
            ("fpk.nx", "32"),
            ("fpk.m", "16"),
            ("fpk.dt_scale", "2^-3"),
            ("addiff.n", "128"),
            ("addiff.dt", "2^-4"),
            ("eps", "2^-2,2^-3,2^-4"),
            ("t_final", "0.5"),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        o.extend(extra.iter().map(|(k, v)| (k.to_string(), v.to_string())));
        ExperimentConfig::resolve(ExperimentKind::ConvergeWeakPde, None, &o).unwrap()
    }

    #[test]
    fn zero_field_densities_agree() {
        let out = run(&small(&[("field", "zero")])).unwrap();
        assert!(out.failure.is_none());
        assert_eq!(out.reports.len(), 12);
        assert!(out.reports.iter().all(|r| r.points.len() == 3));
        assert_eq!(out.checks.len(), 1);
        assert_eq!(out.checks[0].status, Status::Pass, "{}", out.checks[0]);
        // g, u_corrected, u_naive per eps
        assert_eq!(out.artifacts.len(), 9);
        assert!(out.artifacts[0].body.starts_with("j,x,g\n"));
    }

    #[test]
    fn no_correction_runs_the_naive_model_only() {
        let out = run(&small(&[("no_correction", "true"), ("modes", "2")])).unwrap();
        assert_eq!(out.reports.len(), 2);
        assert!(out.reports.iter().all(|r| r.model_a == "naive" && r.model_b == KINETIC));
        assert_eq!(out.checks.len(), 1);
        assert_eq!(out.checks[0].name, "weak-pde naive slope");
        assert_eq!(out.artifacts.len(), 6);
    }

    #[test]
    fn errors_are_positive_and_fitted() {
        let out = run(&small(&[("modes", "2")])).unwrap();
        for r in &out.reports {
            assert!(r.points.iter().all(|p| p.error > 0.0 && p.error < 0.1), "{r:?}");
        }
        assert_eq!(out.fits.len(), 4);
        assert_eq!(out.checks.len(), 2);
    }
}
