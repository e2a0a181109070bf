//! Closed forms for the force-free case `b ≡ 0`.
//!
//! With `P_t = ∫₀ᵗ e^{-(t-s)/ε} dW_s` (a Gaussian process, independent across
//! components) the Langevin position is
//! `X_t = ε(1 - e^{-t/ε}) V₀ + √(2ε)(W_t - P_t)` while both diffusion
//! approximations reduce to `Z_t = √(2ε) W_t`.

use statrs::function::gamma::ln_gamma;

use crate::{Eps, Error, Result};

/// Moments of `P_t` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuMoments {
    pub eps: Eps,
    pub t: f64,
    pub dim: usize,
    /// Variance of each component of `P_t`.
    pub sigma_sq: f64,
    /// `E P_t · W_t`
    pub ew_cross: f64,
}

impl OuMoments {
    pub fn new(eps: Eps, t: f64, dim: usize) -> Result<Self> {
        check_time(t)?;
        check_dim(dim)?;
        Ok(OuMoments { eps, t, dim, sigma_sq: ou_sigma_sq(eps, t)?, ew_cross: ou_pw_cross(eps, t, dim)? })
    }

    /// `E|P_t|^p`
    pub fn p_moment(&self, p: f64) -> Result<f64> {
        ou_p_moment(self.eps, self.t, self.dim, p)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    Ok(())
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("dimension must be >= 1".into()));
    }
    Ok(())
}

/// `1 - e^{-x}` without cancellation, with the `x = ∞` limit.
fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// `Var P_t = (ε/2)(1 - e^{-2t/ε})` per component.
pub fn ou_sigma_sq(eps: Eps, t: f64) -> Result<f64> {
    check_time(t)?;
    let e = eps.value();
    Ok(e / 2.0 * one_minus_exp_neg(2.0 * t / e))
}

/// `E P_t · W_t = εn(1 - e^{-t/ε})`
pub fn ou_pw_cross(eps: Eps, t: f64, n: usize) -> Result<f64> {
    check_time(t)?;
    check_dim(n)?;
    let e = eps.value();
    Ok(e * n as f64 * one_minus_exp_neg(t / e))
}

/// `E|P_t|^p = σ_t^p 2^{p/2} Γ((n+p)/2) / Γ(n/2)` (chi-distribution moment).
pub fn ou_p_moment(eps: Eps, t: f64, n: usize, p: f64) -> Result<f64> {
    check_dim(n)?;
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::Domain(format!("moment order must be >= 1, got {p}")));
    }
    let sigma_sq = ou_sigma_sq(eps, t)?;
    Ok(sigma_sq.powf(p / 2.0) * chi_moment_factor(n, p))
}

/// `E|N(0, I_n)|^p = 2^{p/2} Γ((n+p)/2) / Γ(n/2)`
pub fn chi_moment_factor(n: usize, p: f64) -> f64 {
    let n = n as f64;
    (p / 2.0 * std::f64::consts::LN_2 + ln_gamma((n + p) / 2.0) - ln_gamma(n / 2.0)).exp()
}

/// `E|X_t - Z_t|² = nε²[(1 - e^{-t/ε})² + (1 - e^{-2t/ε})]` for `V₀ ~ N(0, I)`.
pub fn free_strong_error_sq(eps: Eps, t: f64, n: usize) -> Result<f64> {
    check_time(t)?;
    check_dim(n)?;
    let e = eps.value();
    let g = one_minus_exp_neg(t / e);
    Ok(n as f64 * e * e * (g * g + one_minus_exp_neg(2.0 * t / e)))
}

/// `X_t = ε(1 - e^{-t/ε}) V₀ + √(2ε)(W_t - P_t)`
pub fn free_pathwise_position<const D: usize>(
    eps: Eps,
    t: f64,
    v0: &[f64; D],
    w: &[f64; D],
    p: &[f64; D],
) -> Result<[f64; D]> {
    check_time(t)?;
    let e = eps.value();
    let g = e * one_minus_exp_neg(t / e);
    let s = (2.0 * e).sqrt();
    Ok(std::array::from_fn(|i| g * v0[i] + s * (w[i] - p[i])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::{simulate_free_paths, NoiseStream};
    use crate::stats::mean_and_se;
    use crate::Exec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn eps(v: f64) -> Eps {
        Eps::new(v).unwrap()
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(ou_sigma_sq(eps(0.3), 0.0).unwrap(), 0.0);
        assert_relative_eq!(ou_sigma_sq(eps(1.0), 1e6).unwrap(), 0.5);
        assert_relative_eq!(ou_sigma_sq(eps(1.0), f64::INFINITY).unwrap(), 0.5);
        let v = ou_sigma_sq(eps(0.1), 0.1).unwrap();
        assert_relative_eq!(v, 0.05 * (1.0 - (-2.0f64).exp()), max_relative = 1e-15);
        assert!((v - 0.0432332).abs() < 1e-7);
        assert!(ou_sigma_sq(eps(0.1), -1.0).is_err());
    }

    #[test]
    fn sigma_matches_simulated_ou() {
        // dP = -P/ε dt + dW sampled exactly in one step
        let (e, t) = (0.1, 0.1);
        let want = ou_sigma_sq(eps(e), t).unwrap();
        let paths = simulate_free_paths::<1>(eps(e), t, t, 1_000_000, 8, Exec::default()).unwrap();
        let sq: Vec<f64> = paths.iter().map(|s| s.p[0] * s.p[0]).collect();
        let (m, _) = mean_and_se(&sq);
        assert!((m / want - 1.0).abs() < 0.01, "{m} vs {want}");
    }

    #[test]
    fn cross_examples() {
        assert_eq!(ou_pw_cross(eps(0.1), 0.0, 3).unwrap(), 0.0);
        assert_relative_eq!(ou_pw_cross(eps(0.25), 1e9, 2).unwrap(), 0.5);
        let v = ou_pw_cross(eps(0.1), 0.1, 1).unwrap();
        assert!((v - 0.0632121).abs() < 1e-7);
        assert!(ou_pw_cross(eps(0.1), 0.1, 0).is_err());

        let paths = simulate_free_paths::<1>(eps(0.1), 0.1, 0.01, 200_000, 4, Exec::default()).unwrap();
        let pw: Vec<f64> = paths.iter().map(|s| s.p[0] * s.w[0]).collect();
        let (m, se) = mean_and_se(&pw);
        assert!((m - v).abs() < 3.0 * se, "{m} ± {se} vs {v}");
    }

    #[test]
    fn moment_examples() {
        let e = eps(0.2);
        let t = 0.3;
        let s2 = ou_sigma_sq(e, t).unwrap();
        assert_relative_eq!(ou_p_moment(e, t, 1, 2.0).unwrap(), s2, max_relative = 1e-13);
        assert_relative_eq!(ou_p_moment(e, t, 1, 4.0).unwrap(), 3.0 * s2 * s2, max_relative = 1e-13);
        assert!(ou_p_moment(e, t, 1, 0.5).is_err());

        // n = 2, σ = 1: 2^{3/2} Γ(5/2) / Γ(1) = 3√(2π)/2
        let want = 3.0 * (2.0 * std::f64::consts::PI).sqrt() / 2.0;
        assert_relative_eq!(chi_moment_factor(2, 3.0), want, max_relative = 1e-12);
        let mut acc = Vec::with_capacity(1_000_000);
        let mut s = NoiseStream::new(17, 0);
        for _ in 0..1_000_000 {
            let [a, b]: [f64; 2] = s.normals();
            acc.push((a * a + b * b).powf(1.5));
        }
        let (m, _) = mean_and_se(&acc);
        assert!((m / want - 1.0).abs() < 0.02, "{m} vs {want}");
    }

    #[test]
    fn strong_error_examples() {
        assert_eq!(free_strong_error_sq(eps(0.1), 0.0, 1).unwrap(), 0.0);
        let e = 0.3;
        assert_relative_eq!(free_strong_error_sq(eps(e), 1e9, 3).unwrap(), 2.0 * 3.0 * e * e, max_relative = 1e-14);
        let v = free_strong_error_sq(eps(0.1), 1.0, 1).unwrap();
        let direct = 0.01 * ((1.0 - (-10.0f64).exp()).powi(2) + (1.0 - (-20.0f64).exp()));
        assert_relative_eq!(v, direct, max_relative = 1e-14);
        assert!((v - 0.019999092).abs() < 1e-9);
    }

    #[test]
    fn pathwise_examples() {
        let e = eps(0.2);
        assert_eq!(free_pathwise_position(e, 1.0, &[0.0], &[0.0], &[0.0]).unwrap(), [0.0]);
        let far = free_pathwise_position(e, 1e9, &[1.5, -2.0], &[0.0; 2], &[0.0; 2]).unwrap();
        assert_relative_eq!(far[0], 0.3);
        assert_relative_eq!(far[1], -0.4);
    }

    #[test]
    fn simulated_positions_follow_pathwise_formula() {
        for dt in [0.05, 0.0123] {
            let paths = simulate_free_paths::<2>(eps(0.1), 1.0, dt, 500, 2, Exec::default()).unwrap();
            for s in &paths {
                let want = free_pathwise_position(eps(0.1), 1.0, &s.v0, &s.w, &s.p).unwrap();
                for (x, w) in s.x.iter().zip(&want) {
                    assert!((x - w).abs() <= 1e-10);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn sigma_monotone_and_bounded(e in 1e-3f64..2.0, t1 in 0.0f64..5.0, dt in 0.0f64..5.0) {
            let a = ou_sigma_sq(eps(e), t1).unwrap();
            let b = ou_sigma_sq(eps(e), t1 + dt).unwrap();
            prop_assert!(a <= b);
            prop_assert!(b <= e / 2.0);
            prop_assert!(a >= 0.0);
        }

        #[test]
        fn cross_in_range(e in 1e-3f64..2.0, t in 0.0f64..5.0, n in 1usize..5) {
            let c = ou_pw_cross(eps(e), t, n).unwrap();
            prop_assert!((0.0..=e * n as f64).contains(&c));
        }

        #[test]
        fn strong_error_scaled_bounds(e in 1e-3f64..2.0, t in 0.0f64..50.0, n in 1usize..5) {
            let r = free_strong_error_sq(eps(e), t, n).unwrap() / (e * e);
            prop_assert!(r >= 0.0 && r <= 2.0 * n as f64 * (1.0 + 1e-14));
        }

        #[test]
        fn second_moment_is_chi_square_mean(e in 1e-3f64..2.0, t in 0.0f64..5.0, n in 1usize..6) {
            let m2 = ou_p_moment(eps(e), t, n, 2.0).unwrap();
            let s2 = ou_sigma_sq(eps(e), t).unwrap();
            prop_assert!((m2 - n as f64 * s2).abs() <= 1e-13 * (1.0 + m2));
        }
    }
}
