//! Forcing terms that make an [`ExactSolution`] solve the model equations.

use std::sync::Arc;

use crate::driver::SolverConfig;
use crate::error::Result;
use crate::kinetics::{Forcing, KineticsModel};

use super::exact::ExactSolution;
use super::oracle::FracDerivOracle;

/// Residuals of the six evolution equations on an exact solution:
///
/// ```text
/// f_c = c_t - D^a[D1 Lap(c) / R^2] - (v(1) rho / R) c_rho + f(c, p, q)
/// f_w = w_t - D^a[D2 Lap(w) / R^2] - (v(1) rho / R) w_rho + g(c, w, p, q)
/// f_u = u_t + nu u_rho - (g_ij u_j)_u                 for u = p, q, d
/// f_v = div(v) / R - h
/// ```
///
/// with `nu = (v - rho v(1)) / R`.
pub struct ManufacturedForcing {
    exact: Arc<dyn ExactSolution>,
    model: KineticsModel,
    oracle: FracDerivOracle,
    diffusion: [f64; 2],
}

impl ManufacturedForcing {
    /// `model` is used without any forcing it may carry.
    pub fn new(exact: Arc<dyn ExactSolution>, model: KineticsModel, config: &SolverConfig) -> Result<Self> {
        Ok(ManufacturedForcing {
            exact,
            model: model.without_forcing(),
            oracle: FracDerivOracle::new(config.alpha, config.quad_order)?,
            diffusion: [config.d1, config.d2],
        })
    }

    /// `D^a [D Lap(u) / R^2]` at `(rho, t)` for `u = c` (`k = 0`) or `w`.
    pub fn fractional_term(&self, k: usize, rho: f64, t: f64) -> f64 {
        let e = &self.exact;
        let dk = self.diffusion[k];
        let du = |s: f64| {
            let r = e.radius(s);
            let lap = e.laplacians(rho, s)[k];
            let lap_rate = e.laplacian_rates(rho, s)[k];
            dk * (lap_rate / (r * r) - 2.0 * lap * e.radius_rate(s) / (r * r * r))
        };
        self.oracle.derivative(du, t)
    }

    fn parabolic(&self, k: usize, rho: f64, t: f64) -> f64 {
        let e = &self.exact;
        let s = e.state(rho, t);
        let dt = e.time_derivatives(rho, t);
        let dr = e.rho_derivatives(rho, t);
        let adv = e.velocity(1.0, t) * rho / e.radius(t);
        if k == 0 {
            dt.c - self.fractional_term(0, rho, t) - adv * dr.c + self.model.f_consumption(s.c, s.p, s.q)
        } else {
            dt.w - self.fractional_term(1, rho, t) - adv * dr.w + self.model.g_consumption(s.c, s.w, s.p, s.q)
        }
    }
}

impl Forcing for ManufacturedForcing {
    fn c(&self, rho: f64, t: f64) -> f64 {
        self.parabolic(0, rho, t)
    }

    fn w(&self, rho: f64, t: f64) -> f64 {
        self.parabolic(1, rho, t)
    }

    fn pqd(&self, rho: f64, t: f64) -> [f64; 3] {
        let e = &self.exact;
        let s = e.state(rho, t);
        let dt = e.time_derivatives(rho, t);
        let dr = e.rho_derivatives(rho, t);
        let nu = (e.velocity(rho, t) - rho * e.velocity(1.0, t)) / e.radius(t);
        let g = self.model.transfer(&s);
        [
            dt.p + nu * dr.p - g[0],
            dt.q + nu * dr.q - g[1],
            dt.d + nu * dr.d - g[2],
        ]
    }

    fn v(&self, rho: f64, t: f64) -> f64 {
        let e = &self.exact;
        e.velocity_divergence(rho, t) / e.radius(t) - self.model.h_rate(&e.state(rho, t))
    }
}

/// Forcing of `model` for which `exact` is a solution.
pub fn forcing_from_exact(
    exact: Arc<dyn ExactSolution>,
    model: KineticsModel,
    config: &SolverConfig,
) -> Result<ManufacturedForcing> {
    ManufacturedForcing::new(exact, model, config)
}
