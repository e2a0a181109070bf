//! Background velocity fields on the torus.
//!
//! A field supplies `b(x, t)`, its time derivative and its spatial Jacobian in
//! closed form. From these the material acceleration `𝒯b = ∂ₜb + (Dₓb) b` and
//! the corrected drift `F = b - ε𝒯b` follow without numerical differentiation.

use std::f64::consts::PI;
use std::fmt;

use crate::{Error, Result};

/// Period of every spatial coordinate.
pub const TWO_PI: f64 = 2.0 * PI;

/// Reduces one coordinate into `[0, 2π)`.
#[inline]
pub fn wrap_coord(x: f64) -> f64 {
    let r = x.rem_euclid(TWO_PI);
    // rem_euclid rounds tiny negative inputs up to exactly 2π
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

#[inline]
pub(crate) fn wrap_array<const D: usize>(mut x: [f64; D]) -> [f64; D] {
    for c in &mut x {
        *c = wrap_coord(*c);
    }
    x
}

/// A point of `𝕋ᴰ = [0, 2π)ᴰ`. Coordinates are always reduced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint<const D: usize>([f64; D]);

impl<const D: usize> TorusPoint<D> {
    pub const ORIGIN: Self = TorusPoint([0.0; D]);

    /// Wraps raw coordinates onto the torus, rejecting non-finite input.
    pub fn new(raw: [f64; D]) -> Result<Self> {
        if let Some(bad) = raw.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite torus coordinate {bad}")));
        }
        Ok(TorusPoint(wrap_array(raw)))
    }

    /// Wraps finite coordinates; callers guarantee finiteness.
    #[inline]
    pub(crate) fn wrap_finite(raw: [f64; D]) -> Self {
        TorusPoint(wrap_array(raw))
    }

    #[inline]
    pub fn coords(&self) -> &[f64; D] {
        &self.0
    }
}

impl<const D: usize> From<TorusPoint<D>> for [f64; D] {
    fn from(p: TorusPoint<D>) -> Self {
        p.0
    }
}

/// Reduces each coordinate modulo 2π into `[0, 2π)`.
pub fn wrap_torus<const D: usize>(raw: [f64; D]) -> Result<TorusPoint<D>> {
    TorusPoint::new(raw)
}

/// The dimensionless relaxation time ε. The noise/friction ratio μ is fixed at 1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Eps(f64);

impl Eps {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Eps(value))
        } else {
            Err(Error::Domain(format!("ε must be positive and finite, got {value}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn mu(self) -> f64 {
        1.0
    }
}

impl fmt::Display for Eps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A smooth, 2π-periodic velocity field `b: 𝕋ᴰ × [0, ∞) → ℝᴰ`.
///
/// Implementations must be pure: evaluations may happen concurrently from
/// many workers.
pub trait FlowField<const D: usize>: Send + Sync {
    /// `b(x, t)`.
    fn velocity(&self, x: &[f64; D], t: f64) -> [f64; D];

    /// `∂ₜb(x, t)`.
    fn time_derivative(&self, x: &[f64; D], t: f64) -> [f64; D];

    /// `Dₓb(x, t)` with `jac[i][j] = ∂bᵢ/∂xⱼ`.
    fn jacobian(&self, x: &[f64; D], t: f64) -> [[f64; D]; D];

    fn name(&self) -> &str {
        "custom"
    }

    /// True when `b` does not depend on `t`.
    fn is_autonomous(&self) -> bool {
        false
    }

    /// `∂ₜb + (Dₓb) b` at a raw coordinate.
    fn material_acceleration_at(&self, x: &[f64; D], t: f64) -> [f64; D] {
        let b = self.velocity(x, t);
        let jac = self.jacobian(x, t);
        let mut acc = self.time_derivative(x, t);
        for (i, a) in acc.iter_mut().enumerate() {
            *a += (0..D).map(|j| jac[i][j] * b[j]).sum::<f64>();
        }
        acc
    }

    /// `b - ε(∂ₜb + (Dₓb) b)` at a raw coordinate.
    fn corrected_drift_at(&self, x: &[f64; D], t: f64, eps: f64) -> [f64; D] {
        let mut b = self.velocity(x, t);
        let acc = self.material_acceleration_at(x, t);
        for (bi, ai) in b.iter_mut().zip(acc) {
            *bi -= eps * ai;
        }
        b
    }
}

/// The material acceleration `∂ₜb + (Dₓb) b` of the background flow.
pub fn material_acceleration<const D: usize, F: FlowField<D> + ?Sized>(
    field: &F,
    x: &TorusPoint<D>,
    t: f64,
) -> [f64; D] {
    field.material_acceleration_at(x.coords(), t)
}

/// The acceleration-corrected drift `b - ε𝒯b`.
pub fn corrected_drift<const D: usize, F: FlowField<D> + ?Sized>(
    field: &F,
    eps: Eps,
    x: &TorusPoint<D>,
    t: f64,
) -> [f64; D] {
    field.corrected_drift_at(x.coords(), t, eps.value())
}

/// `b ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl<const D: usize> FlowField<D> for ZeroField {
    fn velocity(&self, _: &[f64; D], _: f64) -> [f64; D] {
        [0.0; D]
    }
    fn time_derivative(&self, _: &[f64; D], _: f64) -> [f64; D] {
        [0.0; D]
    }
    fn jacobian(&self, _: &[f64; D], _: f64) -> [[f64; D]; D] {
        [[0.0; D]; D]
    }
    fn name(&self) -> &str {
        "zero"
    }
    fn is_autonomous(&self) -> bool {
        true
    }
}

/// `b ≡ c`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantField<const D: usize>(pub [f64; D]);

impl<const D: usize> FlowField<D> for ConstantField<D> {
    fn velocity(&self, _: &[f64; D], _: f64) -> [f64; D] {
        self.0
    }
    fn time_derivative(&self, _: &[f64; D], _: f64) -> [f64; D] {
        [0.0; D]
    }
    fn jacobian(&self, _: &[f64; D], _: f64) -> [[f64; D]; D] {
        [[0.0; D]; D]
    }
    fn name(&self) -> &str {
        "constant"
    }
    fn is_autonomous(&self) -> bool {
        true
    }
}

/// `b(x, t) = sin x · sin t` on 𝕋¹.
#[derive(Debug, Clone, Copy, Default)]
pub struct SinXSinT;

impl FlowField<1> for SinXSinT {
    fn velocity(&self, x: &[f64; 1], t: f64) -> [f64; 1] {
        [x[0].sin() * t.sin()]
    }
    fn time_derivative(&self, x: &[f64; 1], t: f64) -> [f64; 1] {
        [x[0].sin() * t.cos()]
    }
    fn jacobian(&self, x: &[f64; 1], t: f64) -> [[f64; 1]; 1] {
        [[x[0].cos() * t.sin()]]
    }
    fn name(&self) -> &str {
        "sinxsint"
    }
    // One sin/cos pair for x and one for t instead of three separate calls.
    fn corrected_drift_at(&self, x: &[f64; 1], t: f64, eps: f64) -> [f64; 1] {
        let (sx, cx) = x[0].sin_cos();
        let (st, ct) = t.sin_cos();
        [sx * st - eps * (sx * ct + cx * sx * st * st)]
    }
}

/// The autonomous field `b(x) = sin x` on 𝕋¹.
#[derive(Debug, Clone, Copy, Default)]
pub struct SinX;

impl FlowField<1> for SinX {
    fn velocity(&self, x: &[f64; 1], _: f64) -> [f64; 1] {
        [x[0].sin()]
    }
    fn time_derivative(&self, _: &[f64; 1], _: f64) -> [f64; 1] {
        [0.0]
    }
    fn jacobian(&self, x: &[f64; 1], _: f64) -> [[f64; 1]; 1] {
        [[x[0].cos()]]
    }
    fn name(&self) -> &str {
        "sinx"
    }
    fn is_autonomous(&self) -> bool {
        true
    }
}

/// The divergence-free cellular flow `b(x) = (sin x₂, sin x₁)` on 𝕋².
#[derive(Debug, Clone, Copy, Default)]
pub struct Vortex2d;

impl FlowField<2> for Vortex2d {
    fn velocity(&self, x: &[f64; 2], _: f64) -> [f64; 2] {
        [x[1].sin(), x[0].sin()]
    }
    fn time_derivative(&self, _: &[f64; 2], _: f64) -> [f64; 2] {
        [0.0, 0.0]
    }
    fn jacobian(&self, x: &[f64; 2], _: f64) -> [[f64; 2]; 2] {
        [[0.0, x[1].cos()], [x[0].cos(), 0.0]]
    }
    fn name(&self) -> &str {
        "vortex2d"
    }
    fn is_autonomous(&self) -> bool {
        true
    }
    fn corrected_drift_at(&self, x: &[f64; 2], _: f64, eps: f64) -> [f64; 2] {
        let (s1, c1) = x[0].sin_cos();
        let (s2, c2) = x[1].sin_cos();
        [s2 - eps * c2 * s1, s1 - eps * c1 * s2]
    }
}

type VelocityFn<const D: usize> = dyn Fn(&[f64; D], f64) -> [f64; D] + Send + Sync;
type JacobianFn<const D: usize> = dyn Fn(&[f64; D], f64) -> [[f64; D]; D] + Send + Sync;

/// A user field given as the triple `(b, ∂ₜb, Dₓb)`.
///
/// Consistency of the three callbacks is the caller's responsibility; see
/// [`max_derivative_mismatch`] for a finite-difference check.
pub struct CallbackField<const D: usize> {
    name: String,
    velocity: Box<VelocityFn<D>>,
    time_derivative: Box<VelocityFn<D>>,
    jacobian: Box<JacobianFn<D>>,
    autonomous: bool,
}

impl<const D: usize> CallbackField<D> {
    pub fn new(
        name: impl Into<String>,
        velocity: impl Fn(&[f64; D], f64) -> [f64; D] + Send + Sync + 'static,
        time_derivative: impl Fn(&[f64; D], f64) -> [f64; D] + Send + Sync + 'static,
        jacobian: impl Fn(&[f64; D], f64) -> [[f64; D]; D] + Send + Sync + 'static,
    ) -> Self {
        CallbackField {
            name: name.into(),
            velocity: Box::new(velocity),
            time_derivative: Box::new(time_derivative),
            jacobian: Box::new(jacobian),
            autonomous: false,
        }
    }

    pub fn autonomous(mut self) -> Self {
        self.autonomous = true;
        self
    }
}

impl<const D: usize> FlowField<D> for CallbackField<D> {
    fn velocity(&self, x: &[f64; D], t: f64) -> [f64; D] {
        (self.velocity)(x, t)
    }
    fn time_derivative(&self, x: &[f64; D], t: f64) -> [f64; D] {
        (self.time_derivative)(x, t)
    }
    fn jacobian(&self, x: &[f64; D], t: f64) -> [[f64; D]; D] {
        (self.jacobian)(x, t)
    }
    fn name(&self) -> &str {
        &self.name
    }
    fn is_autonomous(&self) -> bool {
        self.autonomous
    }
}

/// Largest deviation between the analytic derivatives of `field` and central
/// differences of its velocity with step `h`, at one point.
pub fn max_derivative_mismatch<const D: usize, F: FlowField<D> + ?Sized>(
    field: &F,
    x: &[f64; D],
    t: f64,
    h: f64,
) -> f64 {
    let plus = field.velocity(x, t + h);
    let minus = field.velocity(x, t - h);
    let dt = field.time_derivative(x, t);
    let mut worst = (0..D).map(|i| ((plus[i] - minus[i]) / (2.0 * h) - dt[i]).abs()).fold(0.0, f64::max);

    let jac = field.jacobian(x, t);
    for j in 0..D {
        let (mut xp, mut xm) = (*x, *x);
        xp[j] += h;
        xm[j] -= h;
        let bp = field.velocity(&xp, t);
        let bm = field.velocity(&xm, t);
        for i in 0..D {
            worst = worst.max(((bp[i] - bm[i]) / (2.0 * h) - jac[i][j]).abs());
        }
    }
    worst
}
