//! Manufactured solutions, error norms, convergence and stability studies.

pub mod exact;
pub mod forcing;
pub mod norms;
pub mod oracle;
pub mod study;

pub use exact::{Example1Exact, ExactSolution, RestingSolution};
pub use forcing::{forcing_from_exact, ManufacturedForcing};
pub use norms::{deviation, error_norms, Deviation, ErrorReport, ErrorTracker, FieldSampler};
pub use oracle::{gauss_jacobi, rl_frac_deriv_oracle, FracDerivOracle};
pub use study::{
    convergence_order, reproduce_tables, run_convergence_study, stability_csv, stability_experiment,
    stability_sweep, ConvergenceStudy, StabilityReport, Tables, Vary,
};
