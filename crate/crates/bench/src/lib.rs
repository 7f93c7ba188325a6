//! Fixtures shared by the criterion benchmarks.

use fbp_core::SolverConfig;

/// Manufactured-solution configuration with `steps` time steps and
/// spectral degree `degree`.
pub fn mms_config(steps: usize, degree: usize) -> SolverConfig {
    SolverConfig {
        steps,
        degree,
        ..SolverConfig::default()
    }
}

/// Template-model configuration used for whole-run timings.
pub fn template_config(steps: usize) -> SolverConfig {
    SolverConfig {
        steps,
        ..SolverConfig::full_template()
    }
}
