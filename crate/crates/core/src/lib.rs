//! Front-fixing solver for a time-fractional free-boundary model of
//! avascular tumor growth.
//!
//! The tumor occupies a sphere of radius `R(t)`. After mapping to the fixed
//! interval `rho in [0, 1]` the nutrient `c` and drug `w` obey fractional
//! diffusion equations (Legendre collocation in space, L1-type memory in
//! time), the cell densities `p`, `q`, `d` are carried along
//! characteristics of the transported velocity, and the radius follows
//! from the total volume source.
//!
//! ```no_run
//! use fbp_core::{run_simulation, Problem, SolverConfig};
//!
//! let mut cfg = SolverConfig::full_template();
//! cfg.steps = 200;
//! let out = run_simulation(Problem::from_config(&cfg)?)?;
//! println!("final radius {}", out.trajectory.last().unwrap().radius);
//! # Ok::<(), fbp_core::FbpError>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basis;
pub mod driver;
pub mod error;
pub mod fracmem;
pub mod kinetics;
pub mod parabolic;
pub mod transport;
pub mod verify;

pub use basis::{SpectralField, TrialBasis};
pub use driver::{
    run_simulation, BoundarySupply, InitialData, ModelName, Problem, RunOutput, RunStats, Snapshot, SolverConfig,
    Startup, Stepper, TumorState,
};
pub use error::{FbpError, Result};
pub use kinetics::{Forcing, KineticsModel, PointState, RateFunctions, TemplateConstants};
pub use transport::NodalField;
