//! Closed-form solutions used for manufactured-solution runs.

use crate::kinetics::PointState;

/// An exact solution of the forced system together with every derivative
/// the forcing needs.
pub trait ExactSolution: Send + Sync {
    fn state(&self, rho: f64, t: f64) -> PointState;
    fn time_derivatives(&self, rho: f64, t: f64) -> PointState;
    fn rho_derivatives(&self, rho: f64, t: f64) -> PointState;
    /// `(1/rho^2) d/drho (rho^2 d/drho)` of `c` and `w`.
    fn laplacians(&self, rho: f64, t: f64) -> [f64; 2];
    /// Time derivatives of [`ExactSolution::laplacians`].
    fn laplacian_rates(&self, rho: f64, t: f64) -> [f64; 2];
    fn radius(&self, t: f64) -> f64;
    fn radius_rate(&self, t: f64) -> f64;
    fn velocity(&self, rho: f64, t: f64) -> f64;
    /// `(1/rho^2) d/drho (rho^2 v)`.
    fn velocity_divergence(&self, rho: f64, t: f64) -> f64;
}

/// The manufactured test solution, completed by `R(t) = (t + 1)/2` and
/// `v(rho, t) = rho^2 / 2`:
///
/// ```text
/// c = 4t (2 rho + 1)(rho - 1)^2      w = -8t (rho^2 - 1)
/// p = -e^t ((2 rho - 1)^2 + 1)       q = -t ((2 rho - 1)^2 - 1)
/// d = e^t ((2 rho - 1)^2 + 1) + t ((2 rho - 1)^2 - 1) + 1
/// ```
///
/// so that `p + q + d = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Example1Exact;

impl Example1Exact {
    fn psi(rho: f64) -> f64 {
        let s = 2.0 * rho - 1.0;
        s * s + 1.0
    }
}

impl ExactSolution for Example1Exact {
    fn state(&self, rho: f64, t: f64) -> PointState {
        let et = t.exp();
        let psi = Self::psi(rho);
        PointState {
            c: 4.0 * t * (2.0 * rho + 1.0) * (rho - 1.0) * (rho - 1.0),
            w: -8.0 * t * (rho * rho - 1.0),
            p: -et * psi,
            q: -t * (psi - 2.0),
            d: et * psi + t * (psi - 2.0) + 1.0,
        }
    }

    fn time_derivatives(&self, rho: f64, t: f64) -> PointState {
        let et = t.exp();
        let psi = Self::psi(rho);
        PointState {
            c: 4.0 * (2.0 * rho + 1.0) * (rho - 1.0) * (rho - 1.0),
            w: -8.0 * (rho * rho - 1.0),
            p: -et * psi,
            q: -(psi - 2.0),
            d: et * psi + (psi - 2.0),
        }
    }

    fn rho_derivatives(&self, rho: f64, t: f64) -> PointState {
        let et = t.exp();
        let dpsi = 4.0 * (2.0 * rho - 1.0);
        PointState {
            c: 24.0 * t * (rho * rho - rho),
            w: -16.0 * t * rho,
            p: -et * dpsi,
            q: -t * dpsi,
            d: (et + t) * dpsi,
        }
    }

    fn laplacians(&self, rho: f64, t: f64) -> [f64; 2] {
        [4.0 * t * (24.0 * rho - 18.0), -48.0 * t]
    }

    fn laplacian_rates(&self, rho: f64, _t: f64) -> [f64; 2] {
        [4.0 * (24.0 * rho - 18.0), -48.0]
    }

    fn radius(&self, t: f64) -> f64 {
        0.5 * (t + 1.0)
    }

    fn radius_rate(&self, _t: f64) -> f64 {
        0.5
    }

    fn velocity(&self, rho: f64, _t: f64) -> f64 {
        0.5 * rho * rho
    }

    fn velocity_divergence(&self, rho: f64, _t: f64) -> f64 {
        2.0 * rho
    }
}

/// Everything zero, constant radius.
#[derive(Debug, Clone, Copy)]
pub struct RestingSolution {
    pub radius: f64,
}

impl ExactSolution for RestingSolution {
    fn state(&self, _: f64, _: f64) -> PointState {
        PointState::default()
    }
    fn time_derivatives(&self, _: f64, _: f64) -> PointState {
        PointState::default()
    }
    fn rho_derivatives(&self, _: f64, _: f64) -> PointState {
        PointState::default()
    }
    fn laplacians(&self, _: f64, _: f64) -> [f64; 2] {
        [0.0; 2]
    }
    fn laplacian_rates(&self, _: f64, _: f64) -> [f64; 2] {
        [0.0; 2]
    }
    fn radius(&self, _: f64) -> f64 {
        self.radius
    }
    fn radius_rate(&self, _: f64) -> f64 {
        0.0
    }
    fn velocity(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn velocity_divergence(&self, _: f64, _: f64) -> f64 {
        0.0
    }
}
