use fbp_core::basis::{trial_deriv, trial_eval};
use fbp_core::driver::snapshot;
use fbp_core::fracmem::{history_sum, history_weights, FractionalWeights, HistoryCache};
use fbp_core::verify::study::convergence_order;
use fbp_core::{Problem, SolverConfig, Stepper};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trial_functions_meet_boundary_conditions(i in 0usize..120) {
        prop_assert!(trial_eval(i, 1.0).abs() < 1e-12);
        prop_assert!(trial_deriv(i, -1.0).abs() < 1e-11);
    }

    #[test]
    fn weights_are_positive_and_decreasing(alpha in 0.01f64..0.99, steps in 1usize..400) {
        let w = FractionalWeights::new(alpha, 1.0 / steps as f64, steps, false).unwrap();
        prop_assert!(w.a_prime().iter().all(|x| *x > 0.0));
        prop_assert!(w.a_prime().windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn history_of_constant_telescopes(alpha in 0.01f64..0.99, n in 1usize..300, value in -5.0f64..5.0) {
        let w = FractionalWeights::new(alpha, 1.0 / n as f64, n, false).unwrap();
        let mut cache = HistoryCache::new();
        for _ in 0..n {
            cache.push(vec![value, 2.0 * value]);
        }
        let hw = history_weights(n, &w).unwrap();
        let s = history_sum(&mut cache, &hw, 2).unwrap();
        let want = value * (w.a_prime()[0] - w.a_prime()[n]);
        prop_assert!((s[0] - want).abs() <= 1e-13 * (1.0 + want.abs()));
        prop_assert!((s[1] - 2.0 * want).abs() <= 1e-13 * (1.0 + want.abs()));
    }

    #[test]
    fn order_is_invariant_under_scaling(e1 in 1e-8f64..1.0, ratio in 1.01f64..100.0, scale in 1e-3f64..1e3) {
        let a = convergence_order(e1, e1 / ratio, 100, 200).unwrap();
        let b = convergence_order(e1 * scale, e1 / ratio * scale, 100, 200).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn config_text_round_trips(alpha in 0.05f64..0.95, steps in 1usize..5000, degree in 3usize..60, d1 in 1e-3f64..1.0) {
        let cfg = SolverConfig { alpha, steps, degree, d1, ..SolverConfig::default() };
        let back = SolverConfig::parse(&cfg.to_text()).unwrap();
        prop_assert_eq!(back.hash(), cfg.hash());
        prop_assert_eq!(back.alpha, alpha);
        prop_assert_eq!(back.d1, d1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn snapshot_text_round_trips(steps in 1usize..6, degree in 3usize..9, alpha in 0.1f64..0.9) {
        let cfg = SolverConfig { steps: 8, degree, alpha, grid_cells: 20, ..SolverConfig::default() };
        let mut stepper = Stepper::new(Problem::from_config(&cfg).unwrap()).unwrap();
        for _ in 0..steps {
            stepper.step().unwrap();
        }
        let text = snapshot::to_text(stepper.state(), &cfg.hash());
        let (hash, state) = snapshot::from_text(&text).unwrap();
        prop_assert_eq!(hash, cfg.hash());
        prop_assert_eq!(&state, stepper.state());
    }
}
