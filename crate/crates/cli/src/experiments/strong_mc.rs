//! Strong (path-wise) error of each approximation against coupled Langevin
//! paths.

use inertial_core::oracle::free_strong_error_sq;
use inertial_core::sde::{Model, ParticleEnsemble};
use inertial_core::stats::{strong_error_p, ErrorPoint, ErrorReport, Estimate};
use inertial_core::{Eps, FlowField};

use super::{for_each_coupled, slope_band};
use crate::config::ExperimentConfig;
use crate::error::RunError;
use crate::output::{Check, ExperimentOutput};

const ORDERS: [u32; 2] = [1, 2];

fn label(m: Model, p: u32) -> String {
    format!("{}-vs-langevin strong_p{p}", m.name())
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let field = cfg.field()?;
    if field.dim() == 2 {
        run_dim::<2>(cfg, field.build_2d()?.as_ref(), field.is_zero())
    } else {
        run_dim::<1>(cfg, field.build_1d()?.as_ref(), field.is_zero())
    }
}

/// `(ε, estimate, closed form)` for the corrected model when `b ≡ 0`.
type OracleRow = (f64, Estimate, f64);

fn run_dim<const D: usize>(
    cfg: &ExperimentConfig,
    field: &dyn FlowField<D>,
    zero: bool,
) -> Result<ExperimentOutput, RunError> {
    let others: Vec<Model> = cfg.models()?.into_iter().filter(|m| *m != Model::Langevin).collect();
    let mut out = ExperimentOutput::default();
    for &m in &others {
        for p in ORDERS {
            out.reports.push(ErrorReport::new(cfg.kind().name(), m.name(), "langevin", format!("strong_p{p}"), None));
        }
    }
    let t = cfg.real("t_final")?;
    let mut oracle: Vec<OracleRow> = Vec::new();
    for_each_coupled::<D>(cfg, field, |e, ens: &[ParticleEnsemble<D>]| {
        let lang = ens.iter().find(|x| x.model == Model::Langevin).expect("langevin is simulated");
        for x in ens.iter().filter(|x| x.model != Model::Langevin) {
            for (j, p) in ORDERS.into_iter().enumerate() {
                let est = strong_error_p(x, lang, f64::from(p))?;
                let idx = others.iter().position(|m| *m == x.model).expect("model requested") * ORDERS.len() + j;
                out.reports[idx].push(ErrorPoint {
                    eps: e,
                    error: est.value,
                    stderr: Some(est.se),
                    noise_dominated: false,
                })?;
                if zero && x.model == Model::Corrected && p == 2 {
                    oracle.push((e, est, free_strong_error_sq(Eps::new(e)?, t, D)?));
                }
            }
        }
        Ok(())
    })?;
    out.fit_reports()?;

    for (m, key) in [
        (Model::Corrected, "check.corrected_slope"),
        (Model::Naive, "check.naive_slope"),
        (Model::Ode, "check.ode_slope"),
    ] {
        let name = format!("strong {} slope", m.name());
        if others.contains(&m) {
            let band = cfg.range(key)?;
            out.checks.push(slope_band(&out, &name, &[("p=1".into(), label(m, 1))], band));
        } else {
            out.checks.push(Check::skipped(name, format!("{} not simulated", m.name())));
        }
    }
    out.checks.push(kifer_check(cfg, &out)?);
    if zero {
        let k = cfg.real("check.se_factor")?;
        let mut ok = true;
        let parts: Vec<String> = oracle
            .iter()
            .map(|(e, est, exact)| {
                let z = (est.value - exact).abs() / est.se;
                ok &= (est.value - exact).abs() <= k * est.se;
                format!("eps {e}: {:.5e} vs {exact:.5e} ({z:.2} SE)", est.value)
            })
            .collect();
        out.checks.push(if oracle.is_empty() {
            Check::skipped("strong oracle agreement", "corrected not simulated")
        } else {
            Check::new("strong oracle agreement", ok, format!("{} (limit {k} SE)", parts.join("; ")))
        });
    }
    Ok(out)
}

fn kifer_check(cfg: &ExperimentConfig, out: &ExperimentOutput) -> Result<Check, RunError> {
    const NAME: &str = "strong kifer within factor of corrected";
    let (Some(kif), Some(cor)) =
        (out.report("kifer", "langevin", "strong_p1", None), out.report("corrected", "langevin", "strong_p1", None))
    else {
        return Ok(Check::skipped(NAME, "kifer or corrected not simulated"));
    };
    let factor = cfg.real("check.kifer_ratio")?;
    let mut ok = true;
    let parts: Vec<String> = kif
        .points
        .iter()
        .zip(&cor.points)
        .map(|(a, b)| {
            ok &= a.error <= factor * b.error;
            format!("eps {}: {:.3}", a.eps, a.error / b.error)
        })
        .collect();
    Ok(Check::new(NAME, ok, format!("ratios {} (limit {factor})", parts.join(", "))))
}
