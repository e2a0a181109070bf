//! Inertial-particle Langevin dynamics on the flat torus `[0, 2π)ⁿ` and the
//! diffusion approximations that replace it in the small relaxation-time
//! (averaging) regime.
//!
//! The crate is organised around the objects that appear in a numerical study
//! of those approximations:
//!
//! * [`flowfield`]: background velocity fields `b(x, t)` with analytic
//!   derivatives, and the acceleration-corrected drift `b - ε(∂ₜb + (Dₓb) b)`.
//! * [`sde`]: path-wise simulation of the Langevin system and of the
//!   corrected, naive, averaged-ODE and linearised (Kifer) approximations,
//!   all driven by one shared Brownian stream per path.
//! * [`oracle`]: closed forms for the force-free (`b ≡ 0`) problem.
//! * [`fpk1d`]: Strang-split solver for the 1D kinetic Fokker-Planck equation.
//! * [`addiff`]: implicit upwind solver for the advection-diffusion equation,
//!   in 1D and (by dimensional splitting) 2D.
//! * [`stats`]: strong/weak error estimators, log-log slope fitting, periodic
//!   kernel density estimation and grid norms.
//! * [`io`]: CSV export of ensembles and densities.
//!
//! Data-parallel loops go through [`Exec`]; with the `parallel` feature
//! (default) they run on rayon, otherwise sequentially. Results are identical
//! either way.

pub mod addiff;
mod error;
mod exec;
pub mod flowfield;
pub mod fpk1d;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod sde;
pub mod stats;

pub use error::{Error, Result};
pub use exec::Exec;
pub use flowfield::{Eps, FlowField, TorusPoint, TWO_PI};
