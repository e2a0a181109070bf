//! Flows for which different approximations must produce the same paths
//! when driven by the same noise.

use inertial_core::flowfield::{ConstantField, ZeroField};
use inertial_core::sde::{
    simulate_coupled, EnsembleSpec, InitialPosition, InitialVelocity, LangevinScheme, Model, StepConfig,
};
use inertial_core::stats::{strong_error_p, torus_distance};
use inertial_core::{Eps, Exec, FlowField};
use proptest::prelude::*;

fn spec<const D: usize>(e: f64, seed: u64, n: usize) -> EnsembleSpec<D> {
    EnsembleSpec {
        step: StepConfig::new(LangevinScheme::ExponentialOu, e / 8.0, Eps::new(e).unwrap()).unwrap(),
        n_paths: n,
        t_final: 0.6,
        x0: InitialPosition::Uniform,
        v0_law: InitialVelocity::StdNormal,
        base_seed: seed,
        exec: Exec::Sequential,
    }
}

fn max_gap<const D: usize>(a: &[[f64; D]], b: &[[f64; D]]) -> f64 {
    a.iter().zip(b).flat_map(|(x, z)| (0..D).map(move |i| torus_distance(x[i], z[i]))).fold(0.0, f64::max)
}

fn models_at<const D: usize, F: FlowField<D>>(field: &F, e: f64, seed: u64) -> Vec<Vec<[f64; D]>> {
    simulate_coupled(&[Model::Corrected, Model::Naive, Model::Kifer, Model::Ode], field, &spec::<D>(e, seed, 64))
        .unwrap()
        .into_iter()
        .map(|x| x.positions)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// A constant flow has no material derivative and no gradient, so the
    /// correction vanishes and the fluctuation of the Kifer model is plain
    /// Brownian motion.
    #[test]
    fn constant_flow_collapses_the_diffusions(
        c in prop::array::uniform2(-2.0f64..2.0),
        e in 0.02f64..1.0,
        seed in any::<u64>(),
    ) {
        let m = models_at::<2, _>(&ConstantField(c), e, seed);
        prop_assert!(max_gap(&m[0], &m[1]) < 1e-9);
        prop_assert!(max_gap(&m[0], &m[2]) < 1e-9);
    }

    /// Without a flow the averaged model does not move at all.
    #[test]
    fn zero_flow_keeps_the_ode_fixed(e in 0.02f64..1.0, seed in any::<u64>()) {
        let moving = models_at::<1, _>(&ZeroField, e, seed);
        let start = simulate_coupled(&[Model::Ode], &ZeroField, &EnsembleSpec { t_final: 0.0, ..spec::<1>(e, seed, 64) })
            .unwrap();
        prop_assert_eq!(&moving[3], &start[0].positions);
    }
}

#[test]
fn strong_error_is_symmetric_and_vanishes_on_the_diagonal() {
    let ens = simulate_coupled(&[Model::Langevin, Model::Corrected], &ZeroField, &spec::<1>(0.25, 3, 500)).unwrap();
    let ab = strong_error_p(&ens[0], &ens[1], 1.0).unwrap();
    let ba = strong_error_p(&ens[1], &ens[0], 1.0).unwrap();
    assert_eq!(ab, ba);
    assert!(ab.value > 0.0);
    assert_eq!(strong_error_p(&ens[0], &ens[0], 2.0).unwrap().value, 0.0);
}
