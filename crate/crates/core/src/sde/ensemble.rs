use std::fmt;

use super::noise::NoiseStream;
use super::step::{
    advance_fluctuation, rk4_step, step_diffusion, step_langevin_em, step_langevin_expou, DiffusionState, Drift,
    ExpOuTransition, KiferState, LangevinScheme, LangevinState, StepConfig,
};
use crate::{Error, Exec, FlowField, Result, TorusPoint};

/// The process a path follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    Langevin,
    Corrected,
    Naive,
    Ode,
    Kifer,
}

impl Model {
    pub const ALL: [Model; 5] = [Model::Langevin, Model::Corrected, Model::Naive, Model::Ode, Model::Kifer];

    pub fn name(self) -> &'static str {
        match self {
            Model::Langevin => "langevin",
            Model::Corrected => "corrected",
            Model::Naive => "naive",
            Model::Ode => "ode",
            Model::Kifer => "kifer",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Model::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn has_velocity(self) -> bool {
        self == Model::Langevin
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialPosition<const D: usize> {
    Fixed(TorusPoint<D>),
    /// Uniform on the torus, drawn from the path's noise stream.
    Uniform,
}

/// Law of `Ṽ₀ = V₀ - b(X₀, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialVelocity {
    Zero,
    StdNormal,
}

/// Everything that determines an ensemble besides the model and field.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleSpec<const D: usize> {
    pub step: StepConfig,
    pub n_paths: usize,
    pub t_final: f64,
    pub x0: InitialPosition<D>,
    pub v0_law: InitialVelocity,
    pub base_seed: u64,
    pub exec: Exec,
}

impl<const D: usize> EnsembleSpec<D> {
    /// Number of steps and the step actually taken: `dt` is shortened so that
    /// an integer number of steps lands on `t_final`.
    pub fn time_grid(&self) -> (usize, f64) {
        if self.t_final == 0.0 {
            return (0, self.step.dt);
        }
        let n = ((self.t_final / self.step.dt) - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }

    fn validate(&self) -> Result<()> {
        self.step.validate()?;
        if self.n_paths == 0 {
            return Err(Error::Config("ensemble needs at least one path".into()));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::Config(format!("final time must be >= 0, got {}", self.t_final)));
        }
        Ok(())
    }
}

/// Final states of all paths of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble<const D: usize> {
    pub model: Model,
    pub positions: Vec<[f64; D]>,
    /// Present for the Langevin model only.
    pub velocities: Option<Vec<[f64; D]>>,
    pub base_seed: u64,
    pub time: f64,
}

impl<const D: usize> ParticleEnsemble<D> {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Errors unless `other` was driven by the same noise streams.
    pub fn check_coupled(&self, other: &Self) -> Result<()> {
        if self.base_seed != other.base_seed || self.len() != other.len() {
            return Err(Error::Usage(format!(
                "ensembles are not coupled: {} (seed {}, {} paths) vs {} (seed {}, {} paths)",
                self.model,
                self.base_seed,
                self.len(),
                other.model,
                other.base_seed,
                other.len()
            )));
        }
        Ok(())
    }
}

/// Simulates one model.
pub fn simulate_ensemble<const D: usize, F: FlowField<D> + ?Sized>(
    model: Model,
    field: &F,
    spec: &EnsembleSpec<D>,
) -> Result<ParticleEnsemble<D>> {
    Ok(simulate_coupled(&[model], field, spec)?.remove(0))
}

/// Simulates several models path by path on shared noise.
///
/// Path `i` reads `NoiseStream(base_seed, i)` in a fixed layout (initial
/// position if uniform, `D` normals for `Ṽ₀`, then `2D` normals per step)
/// regardless of which models are requested, so simulating models together
/// or one at a time gives identical results.
pub fn simulate_coupled<const D: usize, F: FlowField<D> + ?Sized>(
    models: &[Model],
    field: &F,
    spec: &EnsembleSpec<D>,
) -> Result<Vec<ParticleEnsemble<D>>> {
    spec.validate()?;
    if models.is_empty() {
        return Err(Error::Usage("no models requested".into()));
    }
    let (n_steps, dt) = spec.time_grid();
    let step = if n_steps > 0 { spec.step.with_dt(dt)? } else { spec.step };
    let plan = PathPlan::new(models, field, &step, n_steps, spec);

    let finals = spec.exec.map_range(spec.n_paths, |i| plan.run(field, i as u64));

    let mut out: Vec<ParticleEnsemble<D>> = models
        .iter()
        .map(|&m| ParticleEnsemble {
            model: m,
            positions: Vec::with_capacity(spec.n_paths),
            velocities: m.has_velocity().then(|| Vec::with_capacity(spec.n_paths)),
            base_seed: spec.base_seed,
            time: spec.t_final,
        })
        .collect();
    for path in finals {
        for (ens, state) in out.iter_mut().zip(path) {
            ens.positions.push(state.x);
            if let Some(v) = ens.velocities.as_mut() {
                v.push(state.v);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy)]
struct FinalState<const D: usize> {
    x: [f64; D],
    v: [f64; D],
}

/// Per-ensemble constants shared by every path.
struct PathPlan<const D: usize> {
    models: Vec<Model>,
    step: StepConfig,
    transition: ExpOuTransition,
    n_steps: usize,
    x0: InitialPosition<D>,
    v0_law: InitialVelocity,
    seed: u64,
    /// `(X̄ₙ, Dₓb(X̄ₙ, tₙ))` for a fixed start; the averaged path is then
    /// the same for every sample.
    mean_path: Option<Vec<MeanPoint<D>>>,
}

type MeanPoint<const D: usize> = ([f64; D], [[f64; D]; D]);

impl<const D: usize> PathPlan<D> {
    fn new<F: FlowField<D> + ?Sized>(
        models: &[Model],
        field: &F,
        step: &StepConfig,
        n_steps: usize,
        spec: &EnsembleSpec<D>,
    ) -> Self {
        let needs_mean = models.iter().any(|m| matches!(m, Model::Ode | Model::Kifer));
        let mean_path = match spec.x0 {
            InitialPosition::Fixed(p) if needs_mean => {
                let mut x = *p.coords();
                let mut t = 0.0;
                let mut path = Vec::with_capacity(n_steps + 1);
                for _ in 0..=n_steps {
                    path.push((x, field.jacobian(&x, t)));
                    x = super::step::wrap(rk4_step(field, &x, t, step.dt));
                    t += step.dt;
                }
                Some(path)
            }
            _ => None,
        };
        PathPlan {
            models: models.to_vec(),
            step: *step,
            transition: ExpOuTransition::new(step.dt, step.eps),
            n_steps,
            x0: spec.x0,
            v0_law: spec.v0_law,
            seed: spec.base_seed,
            mean_path,
        }
    }

    fn run<F: FlowField<D> + ?Sized>(&self, field: &F, index: u64) -> Vec<FinalState<D>> {
        let mut noise = NoiseStream::new(self.seed, index);
        let x0 = match self.x0 {
            InitialPosition::Fixed(p) => p,
            InitialPosition::Uniform => TorusPoint::wrap_finite(std::array::from_fn(|_| noise.uniform_angle())),
        };
        let v_tilde: [f64; D] = noise.normals();
        let b0 = field.velocity(x0.coords(), 0.0);
        let v0 = std::array::from_fn(|i| match self.v0_law {
            InitialVelocity::Zero => b0[i],
            InitialVelocity::StdNormal => b0[i] + v_tilde[i],
        });

        let want = |m: Model| self.models.contains(&m);
        let mut langevin = want(Model::Langevin).then_some(LangevinState { x: x0, v: v0, t: 0.0 });
        let mut corrected = want(Model::Corrected).then_some(DiffusionState { z: x0, t: 0.0 });
        let mut naive = want(Model::Naive).then_some(DiffusionState { z: x0, t: 0.0 });
        let mut ode = want(Model::Ode).then_some(DiffusionState { z: x0, t: 0.0 });
        let mut kifer = want(Model::Kifer).then_some(KiferState::start(x0));

        let step = &self.step;
        let eps = step.eps;
        for n in 0..self.n_steps {
            let z1: [f64; D] = noise.normals();
            let z2: [f64; D] = noise.normals();
            let dw = self.transition.brownian(&z1);
            if let Some(s) = langevin.as_mut() {
                *s = match step.scheme {
                    LangevinScheme::ExponentialOu => step_langevin_expou(s, field, &self.transition, &z1, &z2),
                    LangevinScheme::EulerMaruyama => {
                        step_langevin_em(s, field, step, &dw).expect("step size validated with the ensemble spec")
                    }
                };
            }
            if let Some(s) = corrected.as_mut() {
                *s = step_diffusion(s, field, step, Drift::Corrected, &dw);
            }
            if let Some(s) = naive.as_mut() {
                *s = step_diffusion(s, field, step, Drift::Naive, &dw);
            }
            match &self.mean_path {
                Some(path) => {
                    if let Some(s) = kifer.as_mut() {
                        let (xbar, jac) = &path[n];
                        let r = advance_fluctuation(&s.r, jac, step.dt, &dw);
                        debug_assert!(xbar == s.xbar.coords());
                        *s = KiferState { xbar: TorusPoint::wrap_finite(path[n + 1].0), r, t: s.t + step.dt };
                    }
                }
                None => {
                    if let Some(s) = ode.as_mut() {
                        *s = super::step::step_averaged_ode(s, field, step);
                    }
                    if let Some(s) = kifer.as_mut() {
                        *s = super::step::step_kifer(s, field, step, &dw);
                    }
                }
            }
        }
        if let (Some(path), Some(s)) = (&self.mean_path, ode.as_mut()) {
            s.z = TorusPoint::wrap_finite(path[self.n_steps].0);
        }

        self.models
            .iter()
            .map(|m| match m {
                Model::Langevin => {
                    let s = langevin.as_ref().unwrap();
                    FinalState { x: *s.x.coords(), v: s.v }
                }
                Model::Corrected => position_only(corrected.as_ref().unwrap().z),
                Model::Naive => position_only(naive.as_ref().unwrap().z),
                Model::Ode => position_only(ode.as_ref().unwrap().z),
                Model::Kifer => position_only(kifer.as_ref().unwrap().position(eps)),
            })
            .collect()
    }
}

fn position_only<const D: usize>(p: TorusPoint<D>) -> FinalState<D> {
    FinalState { x: *p.coords(), v: [f64::NAN; D] }
}
