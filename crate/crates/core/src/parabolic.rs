//! One implicit collocation step of a fractional reaction–diffusion field.
//!
//! The collocated operator at the Gauss nodes is
//!
//! ```text
//! L u = u - kappa (D / R_{n+1}^2) Lap_s u - t* (2 (2 v_n(1) - v_{n-1}(1)) rho / (3 R_{n+1})) u'
//! ```
//!
//! with `kappa = a'_0`, and the right-hand side combines the two previous
//! levels, the fractional history and the extrapolated reaction terms. The
//! start step replaces the two-level combination by a one-level implicit
//! step (`kappa = t* a_0`, advection weight `t* v_0(1) / R_1`).

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::basis::{SpectralField, TrialBasis};
use crate::error::{FbpError, Result};

use std::sync::Arc;

/// Condition estimates above this are logged.
pub const CONDITION_WARN: f64 = 1e12;
/// Accepted collocation residual relative to `||b||_inf`.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepScheme {
    /// Two-level combination `(4/3) u_n - (1/3) u_{n-1}` with weights `a'_k`.
    TwoLevel,
    /// One-level implicit step used to leave `t_0`.
    Start,
}

/// Everything a single field step needs, with all nodal vectors given at
/// the collocation points.
#[derive(Debug, Clone)]
pub struct ParabolicStepInputs<'a> {
    pub step: usize,
    pub scheme: StepScheme,
    pub t_star: f64,
    pub diffusion: f64,
    pub a_prime_0: f64,
    pub r_next: f64,
    pub v1_n: f64,
    pub v1_prev: f64,
    /// Homogenized field at `t_n`.
    pub current: &'a [f64],
    /// Homogenized field at `t_{n-1}`.
    pub previous: &'a [f64],
    /// Explicit source (`-f + forcing`) at `t_n`.
    pub source_n: &'a [f64],
    /// Explicit source at `t_{n-1}`.
    pub source_prev: &'a [f64],
    /// Weighted history sum `sum_k (a'_k - a'_{k+1}) U_{n-k}`.
    pub history: &'a [f64],
}

impl ParabolicStepInputs<'_> {
    /// Coefficient of `Lap_s u` in the operator.
    pub fn diffusion_weight(&self) -> f64 {
        let kappa = match self.scheme {
            StepScheme::TwoLevel => self.a_prime_0,
            StepScheme::Start => 1.5 * self.a_prime_0,
        };
        kappa * self.diffusion / (self.r_next * self.r_next)
    }

    /// Coefficient of `rho u'` in the operator.
    pub fn advection_weight(&self) -> f64 {
        match self.scheme {
            StepScheme::TwoLevel => {
                self.t_star * 2.0 * (2.0 * self.v1_n - self.v1_prev) / (3.0 * self.r_next)
            }
            StepScheme::Start => self.t_star * self.v1_n / self.r_next,
        }
    }
}

/// Entry `(i, j)` is the operator applied to trial function `j` at node `i`.
pub fn assemble_matrix(inputs: &ParabolicStepInputs<'_>, basis: &TrialBasis) -> DMatrix<f64> {
    let dw = inputs.diffusion_weight();
    let aw = inputs.advection_weight();
    let m = basis.len();
    let rho = basis.rho_nodes();
    let (vals, der, lap) = (basis.values(), basis.d_rho(), basis.laplacian());
    DMatrix::from_fn(m, m, |i, j| vals[(i, j)] - dw * lap[(i, j)] - aw * rho[i] * der[(i, j)])
}

pub fn assemble_rhs(inputs: &ParabolicStepInputs<'_>) -> Vec<f64> {
    let ts = inputs.t_star;
    (0..inputs.current.len())
        .map(|i| match inputs.scheme {
            StepScheme::TwoLevel => {
                inputs.current[i] - (inputs.previous[i] - inputs.current[i]) / 3.0 - inputs.history[i]
                    + 2.0 / 3.0 * (2.0 * ts * inputs.source_n[i] - ts * inputs.source_prev[i])
            }
            StepScheme::Start => inputs.current[i] - inputs.history[i] + ts * inputs.source_n[i],
        })
        .collect()
}

/// Result of one accepted step.
#[derive(Debug, Clone)]
pub struct StepSolution {
    pub field: SpectralField,
    /// `||A x - b||_inf`.
    pub residual: f64,
    /// 1-norm condition estimate of the collocation matrix.
    pub condition: f64,
}

pub fn solve_step(inputs: &ParabolicStepInputs<'_>, basis: &Arc<TrialBasis>) -> Result<StepSolution> {
    let a = assemble_matrix(inputs, basis);
    let b = DVector::from_vec(assemble_rhs(inputs));
    let singular = || FbpError::SingularSystem {
        step: inputs.step,
        radius: inputs.r_next,
        t_star: inputs.t_star,
        degree: basis.degree(),
    };
    let lu = a.clone().lu();
    let x = lu.solve(&b).ok_or_else(singular)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(singular());
    }
    let condition = lu
        .try_inverse()
        .map(|inv| one_norm(&a) * one_norm(&inv))
        .unwrap_or(f64::INFINITY);
    if condition > CONDITION_WARN {
        warn!(
            "collocation matrix at step {} is ill-conditioned (estimate {condition:e})",
            inputs.step
        );
    }
    let residual = (&a * &x - &b).amax();
    let scale = b.amax();
    if residual > RESIDUAL_TOL * scale {
        return Err(FbpError::Residual {
            step: inputs.step,
            residual,
            condition,
        });
    }
    let field = SpectralField::new(basis.clone(), x.as_slice().to_vec())?;
    Ok(StepSolution {
        field,
        residual,
        condition,
    })
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
