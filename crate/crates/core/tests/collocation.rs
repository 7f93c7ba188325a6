//! Spatial accuracy of the collocation solve on a smooth, non-polynomial
//! radial profile.

use std::sync::Arc;

use fbp_core::parabolic::{solve_step, ParabolicStepInputs, StepScheme};
use fbp_core::TrialBasis;

const A2: f64 = 0.25;

fn u(r: f64) -> f64 {
    1.0 / (A2 + r * r) - 1.0 / (A2 + 1.0)
}

fn du(r: f64) -> f64 {
    -2.0 * r / (A2 + r * r).powi(2)
}

fn lap(r: f64) -> f64 {
    (2.0 * r * r - 6.0 * A2) / (A2 + r * r).powi(3)
}

/// Max error on a uniform grid after solving `(I - a Lap - b rho d/drho) v = rhs`
/// with `rhs` manufactured from `u`.
fn solve_error(degree: usize) -> f64 {
    let basis = Arc::new(TrialBasis::new(degree).unwrap());
    let zeros = vec![0.0; degree + 1];
    let mut inputs = ParabolicStepInputs {
        step: 0,
        scheme: StepScheme::Start,
        t_star: 0.05,
        diffusion: 0.3,
        a_prime_0: 1.0,
        r_next: 0.8,
        v1_n: 0.4,
        v1_prev: 0.4,
        current: &zeros,
        previous: &zeros,
        source_n: &zeros,
        source_prev: &zeros,
        history: &zeros,
    };
    let (dw, aw) = (inputs.diffusion_weight(), inputs.advection_weight());
    let rhs: Vec<f64> = basis
        .rho_nodes()
        .iter()
        .map(|&r| u(r) - dw * lap(r) - aw * r * du(r))
        .collect();
    inputs.current = &rhs;
    let sol = solve_step(&inputs, &basis).unwrap();
    assert!(sol.residual < 1e-10, "residual {}", sol.residual);
    (0..=1000)
        .map(|k| {
            let r = k as f64 / 1000.0;
            (sol.field.value_at(r) - u(r)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn error_decays_spectrally() {
    let errs: Vec<f64> = [10, 20, 40].iter().map(|&n| solve_error(n)).collect();
    assert!(errs[0] < 1e-3, "{errs:?}");
    assert!(errs[1] < errs[0] * 1e-3, "{errs:?}");
    assert!(errs[2] < 1e-12, "{errs:?}");
}

#[test]
fn high_degree_stays_at_round_off() {
    for n in [80, 100] {
        let e = solve_error(n);
        assert!(e < 1e-11, "N={n}: {e:e}");
    }
}
