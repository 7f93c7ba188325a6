//! Velocity reconstruction, characteristic back-tracing, the two-level
//! update of the cell densities and the free-boundary radius update.
//!
//! `p`, `q`, `d` live on a uniform grid `rho_j = j / N_h` and are evaluated
//! off-grid through a not-a-knot cubic spline.

mod spline;

pub use spline::CubicSpline;

use crate::kinetics::{KineticsModel, PointState};

/// A density field stored on the uniform transport grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    spline: CubicSpline,
}

impl NodalField {
    pub fn new(values: Vec<f64>) -> Self {
        NodalField {
            spline: CubicSpline::new(values),
        }
    }

    pub fn from_fn(cells: usize, f: impl Fn(f64) -> f64) -> Self {
        Self::new(grid_nodes(cells).into_iter().map(f).collect())
    }

    pub fn values(&self) -> &[f64] {
        self.spline.values()
    }

    pub fn cells(&self) -> usize {
        self.spline.cells()
    }

    pub fn eval(&self, rho: f64) -> f64 {
        self.spline.eval(rho)
    }

    pub fn spline(&self) -> &CubicSpline {
        &self.spline
    }
}

/// `rho_j = j / cells`, `j = 0..=cells`.
pub fn grid_nodes(cells: usize) -> Vec<f64> {
    (0..=cells).map(|j| j as f64 / cells as f64).collect()
}

/// Velocity samples on the transport grid at one time level.
#[derive(Debug, Clone)]
pub struct VelocityField {
    samples: CubicSpline,
    radius: f64,
    moment: f64,
}

impl VelocityField {
    pub fn samples(&self) -> &[f64] {
        self.samples.values()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `v(1, t)`, the boundary speed.
    pub fn boundary(&self) -> f64 {
        self.samples.values()[self.samples.cells()]
    }

    /// `int_0^1 rho^2 h drho`.
    pub fn moment(&self) -> f64 {
        self.moment
    }

    pub fn v(&self, rho: f64) -> f64 {
        self.samples.eval(rho)
    }

    /// Transported speed `(v(rho) - rho v(1)) / R`.
    pub fn nu(&self, rho: f64) -> f64 {
        (self.samples.eval(rho) - rho * self.boundary()) / self.radius
    }
}

/// Solves `(1/rho^2) d/drho (rho^2 v / R) = h` with `v(0) = 0` by
/// integrating `rho^2 h` cell by cell.
pub fn velocity_from_h(h_values: &[f64], radius: f64) -> VelocityField {
    assert!(radius > 0.0, "radius must be positive");
    let h = CubicSpline::new(h_values.to_vec());
    let cum = h.cumulative_moment2();
    let cells = h.cells();
    let v: Vec<f64> = cum
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            if j == 0 {
                0.0
            } else {
                let rho = j as f64 / cells as f64;
                radius * m / (rho * rho)
            }
        })
        .collect();
    VelocityField {
        samples: CubicSpline::new(v),
        radius,
        moment: cum[cells],
    }
}

pub fn nu_eval(vf: &VelocityField, rho: f64) -> f64 {
    vf.nu(rho)
}

/// Characteristic feet of one grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Foot {
    /// Forward-difference estimate of the position at `t_n`.
    pub mid: f64,
    /// Midpoint-rule estimate of the position at `t_{n-1}`.
    pub back: f64,
    /// How many of the two points had to be clamped into `[0, 1]`.
    pub clamped: u32,
}

/// `mid = rho - t* nu(rho)`, `back = rho - 2 t* nu(mid)`, both clamped.
pub fn trace_back<F: Fn(f64) -> f64>(rho: f64, nu: F, t_star: f64) -> Foot {
    let mut clamped = 0;
    let mut clamp = |x: f64| {
        if (0.0..=1.0).contains(&x) {
            x
        } else {
            clamped += 1;
            x.clamp(0.0, 1.0)
        }
    };
    let mid = clamp(rho - t_star * nu(rho));
    let back = clamp(rho - 2.0 * t_star * nu(mid));
    Foot { mid, back, clamped }
}

/// `R_{n+1} = R_{n-1} exp(span * int_0^1 rho^2 h)`, where `span` is `2 t*`
/// for the midpoint update and `t*` for the first step.
pub fn radius_advance(r_prev: f64, h_values: &[f64], span: f64) -> f64 {
    let moment = CubicSpline::new(h_values.to_vec())
        .cumulative_moment2()
        .last()
        .copied()
        .unwrap_or(0.0);
    r_prev * (span * moment).exp()
}

/// Same update with a precomputed moment.
pub fn radius_from_moment(r_prev: f64, moment: f64, span: f64) -> f64 {
    r_prev * (span * moment).exp()
}

/// Time-level data for one density update.
pub struct TransportInputs<'a> {
    pub model: &'a KineticsModel,
    pub velocity: &'a VelocityField,
    /// `(p, q, d)` at `t_n`.
    pub current: [&'a NodalField; 3],
    /// `(p, q, d)` at `t_{n-1}`; `None` selects the forward-Euler start.
    pub previous: Option<[&'a NodalField; 3]>,
    /// `(c, w)` at `t_n` for arbitrary `rho`.
    pub nutrients: &'a (dyn Fn(f64) -> (f64, f64) + Sync),
    pub t_n: f64,
    pub t_star: f64,
}

#[derive(Debug, Clone)]
pub struct TransportOutput {
    pub fields: [Vec<f64>; 3],
    pub clamped: u64,
    pub evaluations: u64,
}

/// Advances `p`, `q`, `d` to `t_{n+1}`.
///
/// Two-level: `u_{n+1}(rho) = u_{n-1}(back) + 2 t* G(mid, t_n)`.
/// Start (no `t_{n-1}` data): `u_1(rho) = u_0(mid) + t* G(mid, t_0)`.
pub fn advance_pqd(input: &TransportInputs<'_>) -> TransportOutput {
    let cells = input.current[0].cells();
    let nodes = grid_nodes(cells);
    let forcing = input.model.forcing();
    let mut fields = [
        Vec::with_capacity(cells + 1),
        Vec::with_capacity(cells + 1),
        Vec::with_capacity(cells + 1),
    ];
    let mut clamped = 0u64;
    let nu = |r: f64| input.velocity.nu(r);
    for &rho in &nodes {
        let foot = trace_back(rho, nu, input.t_star);
        clamped += foot.clamped as u64;
        let (c, w) = (input.nutrients)(foot.mid);
        let s = PointState::new(
            c,
            w,
            input.current[0].eval(foot.mid),
            input.current[1].eval(foot.mid),
            input.current[2].eval(foot.mid),
        );
        let mut rate = input.model.transfer(&s);
        if let Some(f) = forcing {
            let extra = f.pqd(foot.mid, input.t_n);
            for k in 0..3 {
                rate[k] += extra[k];
            }
        }
        match input.previous {
            Some(prev) => {
                for k in 0..3 {
                    fields[k].push(prev[k].eval(foot.back) + 2.0 * input.t_star * rate[k]);
                }
            }
            None => {
                let start = [s.p, s.q, s.d];
                for k in 0..3 {
                    fields[k].push(start[k] + input.t_star * rate[k]);
                }
            }
        }
    }
    TransportOutput {
        fields,
        clamped,
        evaluations: 2 * nodes.len() as u64,
    }
}
