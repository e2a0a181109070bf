//! Path-wise simulation of the Langevin system and its approximations.
//!
//! | model        | equation                                           | scheme |
//! |--------------|----------------------------------------------------|--------|
//! | `Langevin`   | `dX = V dt`, `dV = (b - V)/ε dt + √(2/ε) dW`        | exponential OU (frozen `b`) or Euler–Maruyama |
//! | `Corrected`  | `dZ = (b - ε𝒯b) dt + √(2ε) dW`                      | Euler–Maruyama |
//! | `Naive`      | `dZ = b dt + √(2ε) dW`                              | Euler–Maruyama |
//! | `Ode`        | `dX̄/dt = b`                                        | RK4 |
//! | `Kifer`      | `X̄ + √(2ε) R`, `dR = Dₓb(X̄) R dt + dW`              | RK4 + Euler–Maruyama |
//!
//! Every model of a coupled run reads the same Brownian increments from a
//! per-path [`NoiseStream`], so differences between models are strong
//! (path-wise) differences.

mod ensemble;
mod free;
mod noise;
mod step;

pub use ensemble::{
    simulate_coupled, simulate_ensemble, EnsembleSpec, InitialPosition, InitialVelocity, Model, ParticleEnsemble,
};
pub use free::{simulate_free_paths, FreePathSample};
pub use noise::NoiseStream;
pub use step::{
    rk4_step, step_averaged_ode, step_diffusion, step_kifer, step_langevin_em, step_langevin_expou, DiffusionState,
    Drift, ExpOuTransition, KiferState, LangevinScheme, LangevinState, StepConfig,
};
