//! One module per experiment; [`run_experiment`] dispatches on the kind.

mod longtime;
mod oracle_check;
mod strong_mc;
mod weak_mc;
mod weak_pde;

use inertial_core::sde::{
    simulate_coupled, EnsembleSpec, InitialPosition, InitialVelocity, ParticleEnsemble, StepConfig,
};
use inertial_core::{Eps, FlowField};

use crate::config::{ExperimentConfig, ExperimentKind, Range};
use crate::error::RunError;
use crate::output::{Check, ExperimentOutput};

/// Runs the experiment without writing anything.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    match cfg.kind() {
        ExperimentKind::ConvergeWeakPde => weak_pde::run(cfg),
        ExperimentKind::ConvergeStrongMc => strong_mc::run(cfg),
        ExperimentKind::ConvergeWeakMc => weak_mc::run(cfg),
        ExperimentKind::Longtime2d => longtime::run(cfg),
        ExperimentKind::OracleCheck => oracle_check::run(cfg),
    }
}

/// Passes when every listed fit exists and its slope lies in `band`.
/// `series` pairs a short tag for the detail text with a report label.
fn slope_band(out: &ExperimentOutput, name: &str, series: &[(String, String)], band: Range) -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for (tag, label) in series {
        match out.fit(label) {
            Some(f) => {
                ok &= band.contains(f.slope);
                parts.push(format!("{tag} {:.3}", f.slope));
            }
            None => {
                ok = false;
                parts.push(format!("{tag} not fitted"));
            }
        }
    }
    Check::new(name, ok, format!("{} (band {band})", parts.join(", ")))
}

/// Simulates the configured models, coupled, at each ε (largest first) from
/// a uniform start with a Maxwellian velocity around the flow.
fn for_each_coupled<const D: usize>(
    cfg: &ExperimentConfig,
    field: &dyn FlowField<D>,
    mut visit: impl FnMut(f64, &[ParticleEnsemble<D>]) -> Result<(), RunError>,
) -> Result<(), RunError> {
    let models = cfg.models()?;
    let scheme = cfg.scheme()?;
    let dt_scale = cfg.real("mc.dt_scale")?;
    for e in cfg.eps()? {
        let spec = EnsembleSpec::<D> {
            step: StepConfig::new(scheme, dt_scale * e, Eps::new(e)?)?,
            n_paths: cfg.count("paths")?,
            t_final: cfg.real("t_final")?,
            x0: InitialPosition::Uniform,
            v0_law: InitialVelocity::StdNormal,
            base_seed: cfg.seed(),
            exec: cfg.exec(),
        };
        let ens = simulate_coupled(&models, field, &spec)?;
        visit(e, &ens)?;
    }
    Ok(())
}
