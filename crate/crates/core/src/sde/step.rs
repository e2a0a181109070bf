use crate::flowfield::{wrap_array, TorusPoint};
use crate::{Eps, Error, FlowField, Result};

/// Time integrator for the Langevin velocity equation.
///
/// The approximating models have fixed integrators (Euler–Maruyama for the
/// diffusions, RK4 for the averaged ODE).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LangevinScheme {
    /// Exact OU transition with `b` frozen over the step; no stiffness limit.
    ExponentialOu,
    /// Explicit Euler–Maruyama; requires `dt ≤ ε/10`.
    EulerMaruyama,
}

impl LangevinScheme {
    pub fn name(self) -> &'static str {
        match self {
            LangevinScheme::ExponentialOu => "exponential-ou",
            LangevinScheme::EulerMaruyama => "euler-maruyama",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "exponential-ou" | "expou" => Some(LangevinScheme::ExponentialOu),
            "euler-maruyama" | "em" => Some(LangevinScheme::EulerMaruyama),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub scheme: LangevinScheme,
    pub dt: f64,
    pub eps: Eps,
}

impl StepConfig {
    pub fn new(scheme: LangevinScheme, dt: f64, eps: Eps) -> Result<Self> {
        let cfg = StepConfig { scheme, dt, eps };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {}", self.dt)));
        }
        if self.scheme == LangevinScheme::EulerMaruyama {
            check_em_step(self.dt, self.eps)?;
        }
        Ok(())
    }

    /// The same configuration with a different time step.
    pub fn with_dt(self, dt: f64) -> Result<Self> {
        StepConfig::new(self.scheme, dt, self.eps)
    }
}

fn check_em_step(dt: f64, eps: Eps) -> Result<()> {
    // small relative slack so that dt = ε/10 computed in floating point passes
    if dt > eps.value() / 10.0 * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "Euler-Maruyama on the Langevin system needs dt <= eps/10 (dt = {dt}, eps = {eps})"
        )));
    }
    Ok(())
}

/// `(X, V)` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinState<const D: usize> {
    pub x: TorusPoint<D>,
    pub v: [f64; D],
    pub t: f64,
}

/// Position of a first-order model (corrected, naive, averaged ODE).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionState<const D: usize> {
    pub z: TorusPoint<D>,
    pub t: f64,
}

/// Averaged path `X̄` and linearised fluctuation `R`; `R` lives in `ℝᴰ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KiferState<const D: usize> {
    pub xbar: TorusPoint<D>,
    pub r: [f64; D],
    pub t: f64,
}

impl<const D: usize> KiferState<D> {
    pub fn start(x0: TorusPoint<D>) -> Self {
        KiferState { xbar: x0, r: [0.0; D], t: 0.0 }
    }

    /// Observable position `X̄ + √(2ε) R`, wrapped onto the torus.
    ///
    /// `R` is driven by a standard Brownian motion; the factor `√2` matches
    /// the noise `√(2ε) dW` of the diffusion approximations.
    pub fn position(&self, eps: Eps) -> TorusPoint<D> {
        let s = (2.0 * eps.value()).sqrt();
        let xb = self.xbar.coords();
        TorusPoint::wrap_finite(std::array::from_fn(|i| xb[i] + s * self.r[i]))
    }
}

/// Drift of a diffusion approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Drift {
    /// `b - ε𝒯b`
    Corrected,
    /// `b`
    Naive,
}

/// One explicit Euler–Maruyama step of the Langevin system.
///
/// `x' = x + v dt`, `v' = v + (b(x,t) - v) dt/ε + √(2/ε) dW`.
pub fn step_langevin_em<const D: usize, F: FlowField<D> + ?Sized>(
    s: &LangevinState<D>,
    field: &F,
    cfg: &StepConfig,
    dw: &[f64; D],
) -> Result<LangevinState<D>> {
    check_em_step(cfg.dt, cfg.eps)?;
    let (dt, eps) = (cfg.dt, cfg.eps.value());
    let x = s.x.coords();
    let b = field.velocity(x, s.t);
    let noise = (2.0 / eps).sqrt();
    let xn = std::array::from_fn(|i| x[i] + s.v[i] * dt);
    let vn = std::array::from_fn(|i| s.v[i] + (b[i] - s.v[i]) * dt / eps + noise * dw[i]);
    Ok(LangevinState { x: TorusPoint::wrap_finite(xn), v: vn, t: s.t + dt })
}

/// Coefficients of the exact OU transition over one step of length `dt`.
///
/// With `ṽ = v - b` and `dṽ = -ṽ/ε ds + √(2/ε) dW`, the pair
/// `(∫ṽ ds, ṽ(dt))` is Gaussian given `ṽ(0)`. Writing `a = e^{-dt/ε}` and
/// `I = ∫₀^dt e^{-(dt-s)/ε} dW_s`:
///
/// ```text
/// ṽ(dt)   = a ṽ(0) + √(2/ε) I
/// ∫ṽ ds   = ε(1 - a) ṽ(0) + √(2ε) (ΔW - I)
/// Var ΔW = dt,  Var I = ε(1 - a²)/2,  Cov(ΔW, I) = ε(1 - a)
/// ```
///
/// `(ΔW, I)` is drawn from two standard normals per component by a Cholesky
/// factorisation, so `ΔW` can be shared with the diffusion models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpOuTransition {
    pub dt: f64,
    pub eps: f64,
    /// `e^{-dt/ε}`
    pub decay: f64,
    /// `ε(1 - e^{-dt/ε})`
    pub drift_gain: f64,
    sqrt_dt: f64,
    ou_from_z1: f64,
    ou_from_z2: f64,
    sqrt_2eps: f64,
    sqrt_2_over_eps: f64,
}

impl ExpOuTransition {
    pub fn new(dt: f64, eps: Eps) -> Self {
        let e = eps.value();
        let r = dt / e;
        let one_minus_decay = -(-r).exp_m1();
        let cov = e * one_minus_decay;
        let sqrt_dt = dt.sqrt();
        let cond_var = (e * one_minus_decay * conditional_factor(r, one_minus_decay)).max(0.0);
        ExpOuTransition {
            dt,
            eps: e,
            decay: (-r).exp(),
            drift_gain: e * one_minus_decay,
            sqrt_dt,
            ou_from_z1: cov / sqrt_dt,
            ou_from_z2: cond_var.sqrt(),
            sqrt_2eps: (2.0 * e).sqrt(),
            sqrt_2_over_eps: (2.0 / e).sqrt(),
        }
    }

    /// Brownian increment `ΔW` for standard normals `z1`.
    #[inline]
    pub fn brownian<const D: usize>(&self, z1: &[f64; D]) -> [f64; D] {
        std::array::from_fn(|i| self.sqrt_dt * z1[i])
    }

    /// Weighted increment `I = ∫ e^{-(dt-s)/ε} dW_s` jointly with `ΔW`.
    #[inline]
    pub fn ou_integral<const D: usize>(&self, z1: &[f64; D], z2: &[f64; D]) -> [f64; D] {
        std::array::from_fn(|i| self.ou_from_z1 * z1[i] + self.ou_from_z2 * z2[i])
    }

    /// `Var I`, `Cov(ΔW, I)` and `Var ΔW` per component.
    pub fn covariance(&self) -> (f64, f64, f64) {
        let var_i = self.ou_from_z1 * self.ou_from_z1 + self.ou_from_z2 * self.ou_from_z2;
        (var_i, self.ou_from_z1 * self.sqrt_dt, self.dt)
    }
}

/// `1 - (1-a)/2 - (1-a)/r` with `1 - a = -expm1(-r)`; cancels badly for small
/// `r`, where the Taylor series `Σ_{k≥2} (-1)^{k+1} (1-k) r^k / (2 (k+1)!)`
/// is used instead.
fn conditional_factor(r: f64, one_minus_decay: f64) -> f64 {
    if r < 0.5 {
        let mut term = r / 2.0; // r^k / (k+1)! at k = 1
        let mut sum = 0.0;
        for k in 2..=20 {
            term *= r / (k as f64 + 1.0);
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            sum += sign * (1.0 - k as f64) / 2.0 * term;
        }
        sum
    } else {
        1.0 - one_minus_decay / 2.0 - one_minus_decay / r
    }
}

/// One exponential-OU step of the Langevin system from standard normals
/// `(z1, z2)`, with `b` frozen at `(x, t)`.
///
/// The Brownian increment of the step is `√dt·z1`.
pub fn step_langevin_expou<const D: usize, F: FlowField<D> + ?Sized>(
    s: &LangevinState<D>,
    field: &F,
    tr: &ExpOuTransition,
    z1: &[f64; D],
    z2: &[f64; D],
) -> LangevinState<D> {
    let x = s.x.coords();
    let b = field.velocity(x, s.t);
    let mut xn = [0.0; D];
    let mut vn = [0.0; D];
    for i in 0..D {
        let dw = tr.sqrt_dt * z1[i];
        let ou = tr.ou_from_z1 * z1[i] + tr.ou_from_z2 * z2[i];
        let vt = s.v[i] - b[i];
        xn[i] = x[i] + b[i] * tr.dt + vt * tr.drift_gain + tr.sqrt_2eps * (dw - ou);
        vn[i] = b[i] + vt * tr.decay + tr.sqrt_2_over_eps * ou;
    }
    LangevinState { x: TorusPoint::wrap_finite(xn), v: vn, t: s.t + tr.dt }
}

/// One Euler–Maruyama step of `dZ = drift dt + √(2ε) dW`.
pub fn step_diffusion<const D: usize, F: FlowField<D> + ?Sized>(
    s: &DiffusionState<D>,
    field: &F,
    cfg: &StepConfig,
    drift: Drift,
    dw: &[f64; D],
) -> DiffusionState<D> {
    let eps = cfg.eps.value();
    let z = s.z.coords();
    let a = match drift {
        Drift::Corrected => field.corrected_drift_at(z, s.t, eps),
        Drift::Naive => field.velocity(z, s.t),
    };
    let noise = (2.0 * eps).sqrt();
    let zn = std::array::from_fn(|i| z[i] + a[i] * cfg.dt + noise * dw[i]);
    DiffusionState { z: TorusPoint::wrap_finite(zn), t: s.t + cfg.dt }
}

/// Classical RK4 step of `ẋ = b(x, t)` on raw (unwrapped) coordinates.
pub fn rk4_step<const D: usize, F: FlowField<D> + ?Sized>(field: &F, x: &[f64; D], t: f64, dt: f64) -> [f64; D] {
    let shift = |base: &[f64; D], k: &[f64; D], h: f64| -> [f64; D] { std::array::from_fn(|i| base[i] + h * k[i]) };
    let k1 = field.velocity(x, t);
    let k2 = field.velocity(&shift(x, &k1, dt / 2.0), t + dt / 2.0);
    let k3 = field.velocity(&shift(x, &k2, dt / 2.0), t + dt / 2.0);
    let k4 = field.velocity(&shift(x, &k3, dt), t + dt);
    std::array::from_fn(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// One RK4 step of the averaged ODE `dX̄/dt = b(X̄, t)`.
pub fn step_averaged_ode<const D: usize, F: FlowField<D> + ?Sized>(
    s: &DiffusionState<D>,
    field: &F,
    cfg: &StepConfig,
) -> DiffusionState<D> {
    DiffusionState { z: TorusPoint::wrap_finite(rk4_step(field, s.z.coords(), s.t, cfg.dt)), t: s.t + cfg.dt }
}

/// One step of the linearised approximation: `R' = R + Dₓb(X̄, t) R dt + dW`
/// and an RK4 step for `X̄`.
pub fn step_kifer<const D: usize, F: FlowField<D> + ?Sized>(
    s: &KiferState<D>,
    field: &F,
    cfg: &StepConfig,
    dw: &[f64; D],
) -> KiferState<D> {
    let jac = field.jacobian(s.xbar.coords(), s.t);
    KiferState {
        xbar: TorusPoint::wrap_finite(rk4_step(field, s.xbar.coords(), s.t, cfg.dt)),
        r: advance_fluctuation(&s.r, &jac, cfg.dt, dw),
        t: s.t + cfg.dt,
    }
}

#[inline]
pub(crate) fn advance_fluctuation<const D: usize>(
    r: &[f64; D],
    jac: &[[f64; D]; D],
    dt: f64,
    dw: &[f64; D],
) -> [f64; D] {
    std::array::from_fn(|i| {
        let jr: f64 = (0..D).map(|j| jac[i][j] * r[j]).sum();
        r[i] + jr * dt + dw[i]
    })
}

#[inline]
pub(crate) fn wrap<const D: usize>(x: [f64; D]) -> [f64; D] {
    wrap_array(x)
}
