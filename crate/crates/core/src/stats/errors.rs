use std::collections::BTreeMap;

use super::summation::{mean_and_se, pairwise_sum};
use crate::addiff::DensityLine;
use crate::sde::ParticleEnsemble;
use crate::{Error, Result, TWO_PI};

/// Shortest distance between two angles on the circle.
pub fn torus_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % TWO_PI;
    d.min(TWO_PI - d)
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

/// A weak-error estimate; `noise_dominated` when `value ≤ 2·se`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakEstimate {
    pub value: f64,
    pub se: f64,
    pub noise_dominated: bool,
}

/// `E d(X, Z)^p` over coupled paths, with `d` the geodesic distance on the
/// torus.
pub fn strong_error_p<const D: usize>(a: &ParticleEnsemble<D>, b: &ParticleEnsemble<D>, p: f64) -> Result<Estimate> {
    a.check_coupled(b)?;
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::Usage(format!("strong error order must be >= 1, got {p}")));
    }
    let samples: Vec<f64> = a
        .positions
        .iter()
        .zip(&b.positions)
        .map(|(x, z)| {
            let d2: f64 = (0..D).map(|i| torus_distance(x[i], z[i]).powi(2)).sum();
            if p == 2.0 {
                d2
            } else {
                d2.sqrt().powf(p)
            }
        })
        .collect();
    let (value, se) = mean_and_se(&samples);
    Ok(Estimate { value, se })
}

/// `|E cos(k X₁) - E cos(k Z₁)|` from paired samples of coupled ensembles.
pub fn weak_error_phi<const D: usize>(
    a: &ParticleEnsemble<D>,
    b: &ParticleEnsemble<D>,
    k: u32,
) -> Result<WeakEstimate> {
    a.check_coupled(b)?;
    let kf = f64::from(k);
    let diffs: Vec<f64> =
        a.positions.iter().zip(&b.positions).map(|(x, z)| (kf * x[0]).cos() - (kf * z[0]).cos()).collect();
    let (mean, se) = mean_and_se(&diffs);
    let se = if se.is_nan() { 0.0 } else { se };
    let value = mean.abs();
    Ok(WeakEstimate { value, se, noise_dominated: value <= 2.0 * se })
}

/// `|Σⱼ (uⱼ - gⱼ) cos(k xⱼ) δx|`
pub fn pde_weak_error(u: &DensityLine, g: &DensityLine, k: u32) -> Result<f64> {
    if u.grid != g.grid {
        return Err(Error::Usage(format!(
            "densities live on different grids ({} vs {} cells)",
            u.grid.n(),
            g.grid.n()
        )));
    }
    let kf = f64::from(k);
    let terms: Vec<f64> =
        u.values.iter().zip(&g.values).enumerate().map(|(j, (a, b))| (a - b) * (kf * u.grid.center(j)).cos()).collect();
    Ok((pairwise_sum(&terms) * u.grid.dx()).abs())
}

/// Least-squares line through `(log ε, log error)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 3 {
        return Err(Error::Usage(format!("slope fit needs >= 3 points, got {}", points.len())));
    }
    if let Some(&(e, v)) = points.iter().find(|(e, v)| !(*e > 0.0 && *v > 0.0)) {
        return Err(Error::Usage(format!("slope fit needs positive values, got ({e}, {v})")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Usage("slope fit needs at least two distinct eps values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LogLogFit { slope, intercept, r_squared, n_points: points.len() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPoint {
    pub eps: f64,
    pub error: f64,
    pub stderr: Option<f64>,
    pub noise_dominated: bool,
}

/// One error-versus-ε series.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub experiment: String,
    pub model_a: String,
    pub model_b: String,
    /// What was measured, e.g. `strong_p1` or `weak_cos`.
    pub metric: String,
    pub phi_k: Option<u32>,
    pub points: Vec<ErrorPoint>,
    pub metadata: BTreeMap<String, String>,
}

impl ErrorReport {
    pub fn new(
        experiment: impl Into<String>,
        model_a: impl Into<String>,
        model_b: impl Into<String>,
        metric: impl Into<String>,
        phi_k: Option<u32>,
    ) -> Self {
        ErrorReport {
            experiment: experiment.into(),
            model_a: model_a.into(),
            model_b: model_b.into(),
            metric: metric.into(),
            phi_k,
            points: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    /// Appends a point; ε must decrease strictly along the series.
    pub fn push(&mut self, point: ErrorPoint) -> Result<()> {
        if let Some(last) = self.points.last() {
            if point.eps >= last.eps {
                return Err(Error::Usage(format!(
                    "eps must decrease along a series ({} after {})",
                    point.eps, last.eps
                )));
            }
        }
        if !(point.error.is_finite() && point.error >= 0.0) {
            return Err(Error::Numerical(format!(
                "error at eps = {} is not a finite nonnegative number: {}",
                point.eps, point.error
            )));
        }
        self.points.push(point);
        Ok(())
    }

    /// Slope over the points not flagged as noise-dominated.
    pub fn fit(&self) -> Result<LogLogFit> {
        let pts: Vec<(f64, f64)> =
            self.points.iter().filter(|p| !p.noise_dominated).map(|p| (p.eps, p.error)).collect();
        fit_loglog_slope(&pts)
    }

    /// A short label such as `corrected-vs-langevin weak_cos k=2`.
    pub fn label(&self) -> String {
        let mut s = format!("{}-vs-{} {}", self.model_a, self.model_b, self.metric);
        if let Some(k) = self.phi_k {
            s.push_str(&format!(" k={k}"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addiff::Grid1D;
    use crate::flowfield::ZeroField;
    use crate::oracle::free_strong_error_sq;
    use crate::sde::{
        simulate_coupled, EnsembleSpec, InitialPosition, InitialVelocity, LangevinScheme, Model, StepConfig,
    };
    use crate::{Eps, Exec, TorusPoint};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ens(model: Model, xs: Vec<[f64; 1]>) -> ParticleEnsemble<1> {
        ParticleEnsemble { model, positions: xs, velocities: None, base_seed: 0, time: 1.0 }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(torus_distance(0.1, 0.1), 0.0);
        assert!((torus_distance(0.1, TWO_PI - 0.1) - 0.2).abs() < 1e-15);
        assert!((torus_distance(0.0, PI) - PI).abs() < 1e-15);
    }

    #[test]
    fn strong_error_examples() {
        let a = ens(Model::Langevin, vec![[0.3], [1.0], [6.0]]);
        assert_eq!(strong_error_p(&a, &a, 1.0).unwrap().value, 0.0);

        let x = ens(Model::Langevin, vec![[0.0], [1.0]]);
        let z = ens(Model::Corrected, vec![[PI], [1.0 + PI]]);
        for p in [1.0, 2.0, 3.0] {
            let e = strong_error_p(&x, &z, p).unwrap();
            assert!((e.value - PI.powf(p)).abs() < 1e-12);
        }

        let mut other = z.clone();
        other.base_seed = 1;
        assert!(matches!(strong_error_p(&x, &other, 1.0), Err(Error::Usage(_))));
        assert!(strong_error_p(&x, &z, 0.5).is_err());
    }

    #[test]
    fn strong_error_matches_oracle() {
        let e = Eps::new(0.1).unwrap();
        let spec = EnsembleSpec::<1> {
            step: StepConfig::new(LangevinScheme::ExponentialOu, 1.0, e).unwrap(),
            n_paths: 100_000,
            t_final: 1.0,
            x0: InitialPosition::Fixed(TorusPoint::ORIGIN),
            v0_law: InitialVelocity::StdNormal,
            base_seed: 21,
            exec: Exec::default(),
        };
        let out = simulate_coupled(&[Model::Langevin, Model::Corrected], &ZeroField, &spec).unwrap();
        let est = strong_error_p(&out[0], &out[1], 2.0).unwrap();
        let want = free_strong_error_sq(e, 1.0, 1).unwrap();
        assert!((est.value - want).abs() <= 3.0 * est.se, "{} ± {} vs {want}", est.value, est.se);
    }

    #[test]
    fn weak_error_examples() {
        let a = ens(Model::Langevin, vec![[0.3], [1.0]]);
        let w = weak_error_phi(&a, &a, 1).unwrap();
        assert_eq!(w.value, 0.0);
        assert!(w.noise_dominated);

        // evenly spaced points have E cos x = 0 exactly in the limit
        let m = 1000;
        let uniform = ens(Model::Langevin, (0..m).map(|i| [(i as f64 + 0.5) * TWO_PI / m as f64]).collect());
        let point = ens(Model::Naive, vec![[0.0]; m]);
        let w = weak_error_phi(&uniform, &point, 1).unwrap();
        assert!((w.value - 1.0).abs() < 1e-12);
        assert!(!w.noise_dominated);
    }

    #[test]
    fn pde_weak_error_examples() {
        let g = Grid1D::new(64).unwrap();
        let u = DensityLine::from_fn(g, |x| 1.0 + x.sin());
        assert_eq!(pde_weak_error(&u, &u, 1).unwrap(), 0.0);
        let delta = 0.01;
        for k in 1..=4u32 {
            let v = DensityLine::from_fn(g, |x| 1.0 + x.sin() + delta * (f64::from(k) * x).cos());
            assert!((pde_weak_error(&v, &u, k).unwrap() - delta * PI).abs() < 1e-14);
            let off = pde_weak_error(&v, &u, k + 1).unwrap();
            assert!(off < 1e-12, "k={k}: {off}");
        }
        let h = DensityLine::uniform(Grid1D::new(32).unwrap(), 1.0);
        assert!(matches!(pde_weak_error(&u, &h, 1), Err(Error::Usage(_))));
    }

    #[test]
    fn fit_examples() {
        let pts: Vec<(f64, f64)> = [0.5, 0.25, 0.125].iter().map(|&e| (e, e * e)).collect();
        let f = fit_loglog_slope(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);

        let pts: Vec<(f64, f64)> = [0.5, 0.25, 0.125].iter().map(|&e| (e, 3.0 * e)).collect();
        let f = fit_loglog_slope(&pts).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);

        assert!(fit_loglog_slope(&[(0.5, 1.0), (0.25, 0.0), (0.1, 1.0)]).is_err());
        assert!(fit_loglog_slope(&[(0.5, 1.0), (0.25, 0.5)]).is_err());
    }

    #[test]
    fn report_excludes_flagged_points() {
        let mut r = ErrorReport::new("demo", "naive", "langevin", "weak_cos", Some(1));
        for (i, e) in [0.5, 0.25, 0.125, 0.0625].iter().enumerate() {
            r.push(ErrorPoint {
                eps: *e,
                error: if i == 3 { 1.0 } else { e * e },
                stderr: Some(0.0),
                noise_dominated: i == 3,
            })
            .unwrap();
        }
        assert!((r.fit().unwrap().slope - 2.0).abs() < 1e-12);
        assert_eq!(r.label(), "naive-vs-langevin weak_cos k=1");
        let bad = ErrorPoint { eps: 0.1, error: 1.0, stderr: None, noise_dominated: false };
        assert!(r.push(bad).is_err());
    }

    proptest! {
        #[test]
        fn strong_error_symmetric_and_triangle(
            xs in proptest::collection::vec((0.0f64..TWO_PI, 0.0f64..TWO_PI, 0.0f64..TWO_PI), 1..40)
        ) {
            let a = ens(Model::Langevin, xs.iter().map(|t| [t.0]).collect());
            let b = ens(Model::Corrected, xs.iter().map(|t| [t.1]).collect());
            let c = ens(Model::Naive, xs.iter().map(|t| [t.2]).collect());
            let ab = strong_error_p(&a, &b, 1.0).unwrap().value;
            let ba = strong_error_p(&b, &a, 1.0).unwrap().value;
            let bc = strong_error_p(&b, &c, 1.0).unwrap().value;
            let ac = strong_error_p(&a, &c, 1.0).unwrap().value;
            prop_assert!((ab - ba).abs() <= 1e-15);
            prop_assert!(ac <= ab + bc + 1e-12);
        }

        #[test]
        fn fit_scale_invariance(s in 1e-6f64..1e6, p in 0.2f64..3.0, c in 0.01f64..10.0) {
            let base: Vec<(f64, f64)> = [0.5f64, 0.3, 0.1, 0.05]
                .iter()
                .map(|&e| (e, c * e.powf(p) * (1.0 + 0.1 * e)))
                .collect();
            let scaled: Vec<(f64, f64)> = base.iter().map(|&(e, v)| (e, s * v)).collect();
            let a = fit_loglog_slope(&base).unwrap();
            let b = fit_loglog_slope(&scaled).unwrap();
            prop_assert!((a.slope - b.slope).abs() <= 1e-10);
            prop_assert!((b.intercept - a.intercept - s.ln()).abs() <= 1e-9);
        }

        #[test]
        fn pde_weak_error_is_linear(c in -3.0f64..3.0, k in 1u32..5) {
            let g = Grid1D::new(32).unwrap();
            let zero = DensityLine::uniform(g, 0.0);
            let d = DensityLine::from_fn(g, |x| (2.0 * x).cos() + 0.3 * x.sin() + (x * x).cos());
            let scaled = DensityLine { values: d.values.iter().map(|v| c * v).collect(), ..d.clone() };
            let a = pde_weak_error(&scaled, &zero, k).unwrap();
            let b = pde_weak_error(&d, &zero, k).unwrap();
            prop_assert!((a - c.abs() * b).abs() <= 1e-12);
        }
    }
}
