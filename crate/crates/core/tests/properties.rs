mod common;

use proptest::prelude::*;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn saturation_closed_forms(beta in 0.05f64..2.0, r in 0.1f64..5.0, frac in -0.98f64..0.98) {
        prop_assert!(saturation_quadrature_gap(beta, r, frac) <= 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order(x1 in -1.0f64..1.0, x2 in -1.0f64..1.0, u in -1.0f64..1.0) {
        let ratio = rk4_order_ratio([x1, x2], u);
        prop_assert!(ratio >= 14.0, "ratio {}", ratio);
    }

    #[test]
    fn interval_integrals_are_additive(seed in any::<u64>(), split in 1usize..200) {
        prop_assert!(additivity_gap(seed, split) <= 1e-12);
    }

    #[test]
    fn first_regression_has_full_rank(seed in any::<u64>()) {
        let (rank, cols) = case1_first_rank(seed);
        prop_assert_eq!(rank, cols);
    }

    #[test]
    fn optimum_nearly_solves_the_regression(seed in any::<u64>()) {
        prop_assert!(optimum_relative_residual(seed) <= 1e-3);
    }

    #[test]
    fn rollout_cost_never_decreases(
        x1 in -0.5f64..0.5,
        x2 in -0.5f64..0.5,
        p in proptest::array::uniform5(-0.2f64..0.2),
    ) {
        prop_assert!(rollout_is_monotone([x1, x2], p));
    }

    #[test]
    fn converged_weights_do_not_depend_on_the_behaviour_policy(a in any::<u64>(), b in any::<u64>()) {
        prop_assert!(off_policy_spread(a, b) <= 0.05);
    }
}

#[test]
fn converged_residuals_are_spread_evenly() {
    use dapi::api::{run_api, sample_residuals, ApiOptions};
    let set = case1_samples(1);
    let trace = run_api(&set, &case1_theta0(), &ApiOptions::default()).unwrap();
    let n = trace.steps.len();
    let prev = if n >= 2 {
        &trace.steps[n - 2].theta
    } else {
        &trace.initial
    };
    let sigma = sample_residuals(&set, &prev.actor, trace.final_theta()).unwrap();
    let rms = sigma.norm() / (sigma.len() as f64).sqrt();
    assert!(
        sigma.amax() <= 10.0 * rms,
        "max {} rms {}",
        sigma.amax(),
        rms
    );
}
