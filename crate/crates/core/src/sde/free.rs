use super::noise::NoiseStream;
use super::step::ExpOuTransition;
use crate::{Eps, Error, Exec, Result};

/// One path of the Langevin system with `b ≡ 0`, started at the origin with
/// `V₀ ~ N(0, I)`, together with the Brownian quantities driving it.
///
/// Positions are kept on the real line (not wrapped) so they can be compared
/// with closed-form expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreePathSample<const D: usize> {
    pub v0: [f64; D],
    /// `W_t`
    pub w: [f64; D],
    /// `P_t = ∫₀ᵗ e^{-(t-s)/ε} dW_s`
    pub p: [f64; D],
    /// Langevin position `X_t`
    pub x: [f64; D],
    /// Velocity `V_t`
    pub v: [f64; D],
    /// Diffusion position `Z_t = √(2ε) W_t` (corrected and naive coincide)
    pub z: [f64; D],
}

/// Simulates `n_paths` free paths to time `t` with the exponential scheme.
///
/// The scheme is exact for `b ≡ 0`, so any `dt` gives the exact law; the
/// step only changes how many normals are consumed. Path `i` reads the same
/// stream as path `i` of a coupled ensemble with a fixed start.
pub fn simulate_free_paths<const D: usize>(
    eps: Eps,
    t: f64,
    dt: f64,
    n_paths: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<FreePathSample<D>>> {
    if !(t.is_finite() && t >= 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("free paths need t >= 0 and dt > 0 (t={t}, dt={dt})")));
    }
    let n_steps = if t == 0.0 { 0 } else { ((t / dt) - 1e-9).ceil().max(1.0) as usize };
    let tr = ExpOuTransition::new(if n_steps == 0 { dt } else { t / n_steps as f64 }, eps);
    let e = eps.value();
    let sqrt_2eps = (2.0 * e).sqrt();
    let sqrt_2_over_eps = (2.0 / e).sqrt();

    Ok(exec.map_range(n_paths, |i| {
        let mut noise = NoiseStream::new(seed, i as u64);
        let v0: [f64; D] = noise.normals();
        let mut w = [0.0; D];
        let mut p = [0.0; D];
        let mut x = [0.0; D];
        let mut v = v0;
        for _ in 0..n_steps {
            let z1: [f64; D] = noise.normals();
            let z2: [f64; D] = noise.normals();
            let dw = tr.brownian(&z1);
            let ou = tr.ou_integral(&z1, &z2);
            for k in 0..D {
                x[k] += tr.drift_gain * v[k] + sqrt_2eps * (dw[k] - ou[k]);
                v[k] = tr.decay * v[k] + sqrt_2_over_eps * ou[k];
                w[k] += dw[k];
                p[k] = tr.decay * p[k] + ou[k];
            }
        }
        FreePathSample { v0, w, p, x, v, z: std::array::from_fn(|k| sqrt_2eps * w[k]) }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::ZeroField;
    use crate::sde::{
        simulate_coupled, EnsembleSpec, InitialPosition, InitialVelocity, LangevinScheme, Model, StepConfig,
    };
    use crate::{TorusPoint, TWO_PI};

    #[test]
    fn pathwise_identity_holds() {
        let e = 0.1;
        let t = 0.7;
        for dt in [0.7, 0.01] {
            let paths = simulate_free_paths::<2>(Eps::new(e).unwrap(), t, dt, 50, 3, Exec::Sequential).unwrap();
            let g = e * (1.0 - (-t / e).exp());
            for s in &paths {
                for k in 0..2 {
                    let want = g * s.v0[k] + (2.0 * e).sqrt() * (s.w[k] - s.p[k]);
                    assert!((s.x[k] - want).abs() < 1e-12, "{} vs {want}", s.x[k]);
                    let v_want = (-t / e).exp() * s.v0[k] + (2.0 / e).sqrt() * s.p[k];
                    assert!((s.v[k] - v_want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn agrees_with_the_general_ensemble() {
        let eps = Eps::new(0.25).unwrap();
        let spec = EnsembleSpec::<1> {
            step: StepConfig::new(LangevinScheme::ExponentialOu, 0.05, eps).unwrap(),
            n_paths: 40,
            t_final: 1.0,
            x0: InitialPosition::Fixed(TorusPoint::ORIGIN),
            v0_law: InitialVelocity::StdNormal,
            base_seed: 11,
            exec: Exec::default(),
        };
        let ens = simulate_coupled(&[Model::Langevin, Model::Naive], &ZeroField, &spec).unwrap();
        let free = simulate_free_paths::<1>(eps, 1.0, 0.05, 40, 11, Exec::default()).unwrap();
        for (i, s) in free.iter().enumerate() {
            let wrapped = s.x[0].rem_euclid(TWO_PI);
            let got = ens[0].positions[i][0];
            let d = (wrapped - got).abs();
            assert!(d.min(TWO_PI - d) < 1e-12);
            assert!((ens[0].velocities.as_ref().unwrap()[i][0] - s.v[0]).abs() < 1e-12);
            let zw = s.z[0].rem_euclid(TWO_PI);
            let dz = (zw - ens[1].positions[i][0]).abs();
            assert!(dz.min(TWO_PI - dz) < 1e-12);
        }
    }

    #[test]
    fn zero_horizon_is_the_start() {
        let s = simulate_free_paths::<1>(Eps::new(0.1).unwrap(), 0.0, 0.1, 2, 1, Exec::default()).unwrap();
        assert_eq!(s[0].x, [0.0]);
        assert_eq!(s[0].v, s[0].v0);
    }
}
