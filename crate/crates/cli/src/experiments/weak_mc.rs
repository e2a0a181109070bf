//! Weak error `|E cos(kX) - E cos(kZ)|` of each approximation against
//! coupled Langevin paths, with points below two standard errors flagged.

use inertial_core::sde::{Model, ParticleEnsemble};
use inertial_core::stats::{weak_error_phi, ErrorPoint, ErrorReport};
use inertial_core::FlowField;

use super::{for_each_coupled, slope_band};
use crate::config::ExperimentConfig;
use crate::error::RunError;
use crate::output::{Check, ExperimentOutput};

const METRIC: &str = "weak_cos";

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let field = cfg.field()?;
    if field.dim() == 2 {
        run_dim::<2>(cfg, field.build_2d()?.as_ref())
    } else {
        run_dim::<1>(cfg, field.build_1d()?.as_ref())
    }
}

fn run_dim<const D: usize>(cfg: &ExperimentConfig, field: &dyn FlowField<D>) -> Result<ExperimentOutput, RunError> {
    let k = u32::try_from(cfg.count("weak.k")?).map_err(|_| RunError::Config("weak.k too large".into()))?;
    // the Langevin-against-itself pair is a sanity check of the estimator
    let models = cfg.models()?;
    let mut out = ExperimentOutput::default();
    for m in &models {
        out.reports.push(ErrorReport::new(cfg.kind().name(), m.name(), "langevin", METRIC, Some(k)));
    }
    for_each_coupled::<D>(cfg, field, |e, ens: &[ParticleEnsemble<D>]| {
        let lang = ens.iter().find(|x| x.model == Model::Langevin).expect("langevin is simulated");
        for (x, r) in ens.iter().zip(out.reports.iter_mut()) {
            let w = weak_error_phi(x, lang, k)?;
            r.push(ErrorPoint { eps: e, error: w.value, stderr: Some(w.se), noise_dominated: w.noise_dominated })?;
        }
        Ok(())
    })?;
    out.fit_reports()?;
    add_checks(cfg, &mut out, k)?;
    Ok(out)
}

fn add_checks(cfg: &ExperimentConfig, out: &mut ExperimentOutput, k: u32) -> Result<(), RunError> {
    let naive = out.report("naive", "langevin", METRIC, Some(k)).cloned();
    let corrected = out.report("corrected", "langevin", METRIC, Some(k)).cloned();

    const SLOPE: &str = "weak-mc naive slope";
    match &naive {
        None => out.checks.push(Check::skipped(SLOPE, "naive not simulated")),
        Some(r) if r.points.iter().filter(|p| !p.noise_dominated).count() < 3 => {
            out.checks.push(Check::skipped(SLOPE, "fewer than three resolvable points"))
        }
        Some(r) => {
            let band = cfg.range("check.naive_slope")?;
            let c = slope_band(out, SLOPE, &[(format!("k={k}"), r.label())], band);
            out.checks.push(c);
        }
    }

    const ORDER: &str = "weak-mc corrected not above naive";
    match (&corrected, &naive) {
        (Some(c), Some(n)) => {
            let mut ok = true;
            let mut compared = 0;
            for (a, b) in c.points.iter().zip(&n.points).filter(|(_, b)| !b.noise_dominated) {
                ok &= a.error <= b.error;
                compared += 1;
            }
            out.checks.push(if compared == 0 {
                Check::skipped(ORDER, "no resolvable naive point")
            } else {
                Check::new(ORDER, ok, format!("{compared} resolvable eps compared"))
            });
        }
        _ => out.checks.push(Check::skipped(ORDER, "corrected or naive not simulated")),
    }

    let same = out.report("langevin", "langevin", METRIC, Some(k)).expect("langevin is simulated");
    let ok = same.points.iter().all(|p| p.error.abs() <= p.stderr.unwrap_or(0.0));
    let worst = same.points.iter().map(|p| p.error).fold(0.0, f64::max);
    out.checks.push(Check::new("weak-mc identical pair", ok, format!("largest |difference| {worst:e}")));
    Ok(())
}
