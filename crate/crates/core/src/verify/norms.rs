//! Error and deviation norms over trajectories.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::basis::{gauss_rule, TrialBasis};
use crate::driver::Snapshot;
use crate::error::Result;

use super::exact::ExactSolution;

/// Points of the uniform grid on which maximum errors are taken.
pub const ERROR_GRID_POINTS: usize = 1001;
/// Composite Gauss rule for L2 norms: panels and points per panel.
pub const L2_PANELS: usize = 200;
pub const L2_POINTS_PER_PANEL: usize = 5;

pub const FIELDS: [&str; 5] = ["c", "w", "p", "q", "d"];

/// Errors per field in the order of [`FIELDS`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorReport {
    /// Max over the uniform grid and all observed time levels.
    pub max: [f64; 5],
    /// Max over time levels of `|R_n - R(t_n)|`.
    pub radius: f64,
    /// Unweighted L2 norm on `[0, 1]` at the last observed level.
    pub l2_final: [f64; 5],
    /// L2 norm of the `rho`-derivative error of `c` and `w` at the last level.
    pub grad_l2_final: [f64; 2],
    pub levels_observed: usize,
    pub grid_points: usize,
}

/// Precomputed sample points and trial-function tables for one basis.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    basis: Arc<TrialBasis>,
    grid: Vec<f64>,
    grid_values: DMatrix<f64>,
    quad_points: Vec<f64>,
    quad_weights: Vec<f64>,
    quad_values: DMatrix<f64>,
    quad_derivs: DMatrix<f64>,
}

impl FieldSampler {
    pub fn new(basis: Arc<TrialBasis>) -> Result<Self> {
        let grid: Vec<f64> = (0..ERROR_GRID_POINTS)
            .map(|k| k as f64 / (ERROR_GRID_POINTS - 1) as f64)
            .collect();
        let rule = gauss_rule(L2_POINTS_PER_PANEL - 1)?;
        let h = 1.0 / L2_PANELS as f64;
        let mut quad_points = Vec::with_capacity(L2_PANELS * L2_POINTS_PER_PANEL);
        let mut quad_weights = Vec::with_capacity(quad_points.capacity());
        for panel in 0..L2_PANELS {
            let a = panel as f64 * h;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                quad_points.push(a + 0.5 * h * (1.0 + x));
                quad_weights.push(0.5 * h * w);
            }
        }
        let m = basis.len();
        let table = |pts: &[f64], deriv: bool| {
            let mut out = DMatrix::zeros(pts.len(), m);
            for (j, &rho) in pts.iter().enumerate() {
                let s = basis.sample(rho);
                let row = if deriv { s.d_rho } else { s.values };
                for i in 0..m {
                    out[(j, i)] = row[i];
                }
            }
            out
        };
        Ok(FieldSampler {
            grid_values: table(&grid, false),
            quad_values: table(&quad_points, false),
            quad_derivs: table(&quad_points, true),
            basis,
            grid,
            quad_points,
            quad_weights,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn quad_points(&self) -> &[f64] {
        &self.quad_points
    }

    /// Composite-Gauss `int_0^1 f^2` from values at [`Self::quad_points`].
    pub fn l2(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(&self.quad_weights)
            .map(|(v, w)| w * v * v)
            .sum::<f64>()
            .sqrt()
    }

    fn apply(m: &DMatrix<f64>, coeffs: &[f64], lift: f64) -> Vec<f64> {
        (m * DVector::from_column_slice(coeffs)).iter().map(|v| v + lift).collect()
    }

    fn check(&self, snap: &Snapshot) {
        assert_eq!(
            snap.c.basis().degree(),
            self.basis.degree(),
            "snapshot degree differs from sampler degree"
        );
    }

    /// All five fields on the uniform grid.
    pub fn on_grid(&self, snap: &Snapshot) -> [Vec<f64>; 5] {
        self.check(snap);
        [
            Self::apply(&self.grid_values, snap.c.coeffs(), snap.c_lift),
            Self::apply(&self.grid_values, snap.w.coeffs(), snap.w_lift),
            self.grid.iter().map(|&r| snap.p.eval(r)).collect(),
            self.grid.iter().map(|&r| snap.q.eval(r)).collect(),
            self.grid.iter().map(|&r| snap.d.eval(r)).collect(),
        ]
    }

    /// All five fields at the L2 quadrature points.
    pub fn at_quad(&self, snap: &Snapshot) -> [Vec<f64>; 5] {
        self.check(snap);
        let pts = &self.quad_points;
        [
            Self::apply(&self.quad_values, snap.c.coeffs(), snap.c_lift),
            Self::apply(&self.quad_values, snap.w.coeffs(), snap.w_lift),
            pts.iter().map(|&r| snap.p.eval(r)).collect(),
            pts.iter().map(|&r| snap.q.eval(r)).collect(),
            pts.iter().map(|&r| snap.d.eval(r)).collect(),
        ]
    }

    /// `d/drho` of `c` and `w` at the L2 quadrature points.
    pub fn gradients_at_quad(&self, snap: &Snapshot) -> [Vec<f64>; 2] {
        self.check(snap);
        [
            Self::apply(&self.quad_derivs, snap.c.coeffs(), 0.0),
            Self::apply(&self.quad_derivs, snap.w.coeffs(), 0.0),
        ]
    }
}

fn exact_components(exact: &dyn ExactSolution, rho: f64, t: f64) -> [f64; 5] {
    let s = exact.state(rho, t);
    [s.c, s.w, s.p, s.q, s.d]
}

/// Accumulates an [`ErrorReport`] one time level at a time.
pub struct ErrorTracker {
    sampler: FieldSampler,
    exact: Arc<dyn ExactSolution>,
    report: ErrorReport,
    last: Option<Snapshot>,
}

impl ErrorTracker {
    pub fn new(basis: Arc<TrialBasis>, exact: Arc<dyn ExactSolution>) -> Result<Self> {
        Ok(ErrorTracker {
            sampler: FieldSampler::new(basis)?,
            exact,
            report: ErrorReport {
                grid_points: ERROR_GRID_POINTS,
                ..Default::default()
            },
            last: None,
        })
    }

    /// Folds one level into the maxima; the last level observed provides
    /// the final-time norms.
    pub fn observe(&mut self, snap: &Snapshot) {
        let t = snap.time;
        let vals = self.sampler.on_grid(snap);
        for (j, &rho) in self.sampler.grid.iter().enumerate() {
            let ex = exact_components(self.exact.as_ref(), rho, t);
            for k in 0..5 {
                let e = (vals[k][j] - ex[k]).abs();
                if e > self.report.max[k] || e.is_nan() {
                    self.report.max[k] = e;
                }
            }
        }
        self.report.radius = self.report.radius.max((snap.radius - self.exact.radius(t)).abs());
        self.report.levels_observed += 1;
        self.last = Some(snap.clone());
    }

    fn final_norms(&mut self) {
        let Some(snap) = self.last.take() else {
            return;
        };
        let snap = &snap;
        let t = snap.time;
        let quad = self.sampler.at_quad(snap);
        let grads = self.sampler.gradients_at_quad(snap);
        let pts = self.sampler.quad_points();
        for k in 0..5 {
            let diff: Vec<f64> = pts
                .iter()
                .enumerate()
                .map(|(j, &rho)| quad[k][j] - exact_components(self.exact.as_ref(), rho, t)[k])
                .collect();
            self.report.l2_final[k] = self.sampler.l2(&diff);
        }
        for k in 0..2 {
            let diff: Vec<f64> = pts
                .iter()
                .enumerate()
                .map(|(j, &rho)| {
                    let dr = self.exact.rho_derivatives(rho, t);
                    grads[k][j] - if k == 0 { dr.c } else { dr.w }
                })
                .collect();
            self.report.grad_l2_final[k] = self.sampler.l2(&diff);
        }
    }

    pub fn into_report(mut self) -> ErrorReport {
        self.final_norms();
        self.report
    }
}

/// Error norms of a recorded trajectory against an exact solution.
pub fn error_norms(trajectory: &[Snapshot], exact: Arc<dyn ExactSolution>) -> Result<ErrorReport> {
    let Some(first) = trajectory.first() else {
        return Ok(ErrorReport {
            grid_points: ERROR_GRID_POINTS,
            ..Default::default()
        });
    };
    let mut tracker = ErrorTracker::new(first.c.basis().clone(), exact)?;
    for snap in trajectory {
        tracker.observe(snap);
    }
    Ok(tracker.into_report())
}

/// Distance between two runs at one level: sup-norm over `(p, q, d)` on the
/// uniform grid together with `|R_a - R_b|`, and the L2 norm of the
/// gradient difference of `c` and `w`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Deviation {
    pub densities_and_radius: f64,
    pub gradient: [f64; 2],
}

impl Deviation {
    pub fn combined(&self) -> f64 {
        self.densities_and_radius.max(self.gradient[0]).max(self.gradient[1])
    }

    pub fn max(self, other: Deviation) -> Deviation {
        Deviation {
            densities_and_radius: self.densities_and_radius.max(other.densities_and_radius),
            gradient: [
                self.gradient[0].max(other.gradient[0]),
                self.gradient[1].max(other.gradient[1]),
            ],
        }
    }
}

pub fn deviation(sampler: &FieldSampler, a: &Snapshot, b: &Snapshot) -> Deviation {
    let (ga, gb) = (sampler.on_grid(a), sampler.on_grid(b));
    let mut sup = (a.radius - b.radius).abs();
    for k in 2..5 {
        for (x, y) in ga[k].iter().zip(&gb[k]) {
            sup = sup.max((x - y).abs());
        }
    }
    let (da, db) = (sampler.gradients_at_quad(a), sampler.gradients_at_quad(b));
    let grad = |k: usize| {
        let diff: Vec<f64> = da[k].iter().zip(&db[k]).map(|(x, y)| x - y).collect();
        sampler.l2(&diff)
    };
    Deviation {
        densities_and_radius: sup,
        gradient: [grad(0), grad(1)],
    }
}
