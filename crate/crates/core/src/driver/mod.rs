//! Time stepping of the coupled system, configuration, persistence and
//! trajectory output.

pub mod config;
pub mod output;
pub mod snapshot;

use std::sync::Arc;
use std::time::{Duration, Instant};

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};

use crate::basis::{SpectralField, TrialBasis};
use crate::error::{FbpError, Result};
use crate::fracmem::{history_sum, history_weights, FractionalWeights, HistoryCache};
use crate::kinetics::{KineticsModel, PointState, RateFunctions};
use crate::parabolic::{solve_step, ParabolicStepInputs, StepScheme, StepSolution};
use crate::transport::{advance_pqd, grid_nodes, radius_from_moment, velocity_from_h, NodalField, TransportInputs, VelocityField};
use crate::verify::exact::{Example1Exact, ExactSolution};
use crate::verify::forcing::ManufacturedForcing;

pub use config::{ModelName, SolverConfig, Startup};

/// Fraction of clamped characteristic feet above which a run is flagged.
pub const CLAMP_WARN_FRACTION: f64 = 1e-3;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Initial radius and cell densities. The nutrient and drug start at their
/// boundary supply, so their homogenized parts vanish at `t = 0`.
#[derive(Clone)]
pub struct InitialData {
    pub radius: f64,
    pub p: ScalarFn,
    pub q: ScalarFn,
    pub d: ScalarFn,
}

/// Boundary values `c(1, t)`, `w(1, t)` and their time derivatives.
#[derive(Clone)]
pub struct BoundarySupply {
    pub c: ScalarFn,
    pub c_rate: ScalarFn,
    pub w: ScalarFn,
    pub w_rate: ScalarFn,
}

impl BoundarySupply {
    pub fn constant(c: f64, w: f64) -> Self {
        BoundarySupply {
            c: Arc::new(move |_| c),
            c_rate: Arc::new(|_| 0.0),
            w: Arc::new(move |_| w),
            w_rate: Arc::new(|_| 0.0),
        }
    }
}

/// A fully specified run.
#[derive(Clone)]
pub struct Problem {
    pub config: SolverConfig,
    pub model: KineticsModel,
    pub initial: InitialData,
    pub supply: BoundarySupply,
}

impl Problem {
    /// Builds the model named in the configuration. `example-1` comes with
    /// the forcing of its exact solution.
    pub fn from_config(config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        match config.model {
            ModelName::Example1 => {
                let exact: Arc<dyn ExactSolution> = Arc::new(Example1Exact);
                Self::manufactured(config, KineticsModel::example_1(), exact)
            }
            ModelName::FullTemplate => {
                let rates = RateFunctions::saturating(config.rates);
                let model = KineticsModel::full_template(rates, config.k_r, config.n_total)?;
                let profile = |center: f64, edge: f64| -> ScalarFn {
                    Arc::new(move |rho: f64| center + (edge - center) * rho * rho)
                };
                let p = profile(config.p0_center, config.p0_edge);
                let q = profile(config.q0_center, config.q0_edge);
                let (pp, qq, n) = (p.clone(), q.clone(), config.n_total);
                Ok(Problem {
                    config: config.clone(),
                    model,
                    initial: InitialData {
                        radius: config.r0,
                        p,
                        q,
                        d: Arc::new(move |rho| n - pp(rho) - qq(rho)),
                    },
                    supply: BoundarySupply::constant(config.c_bar, config.w_bar),
                })
            }
        }
    }

    /// Forces `model` so that `exact` solves the system; initial data,
    /// radius and boundary supply are read off the exact solution.
    pub fn manufactured(
        config: &SolverConfig,
        model: KineticsModel,
        exact: Arc<dyn ExactSolution>,
    ) -> Result<Self> {
        config.validate()?;
        let r0 = exact.radius(0.0);
        if (config.r0 - r0).abs() > 1e-14 * r0 {
            return Err(FbpError::Config(format!(
                "r0 = {} does not match the exact initial radius {r0}",
                config.r0
            )));
        }
        let forcing = ManufacturedForcing::new(exact.clone(), model.clone(), config)?;
        let (e0, e1, e2) = (exact.clone(), exact.clone(), exact.clone());
        let (b0, b1, b2, b3) = (exact.clone(), exact.clone(), exact.clone(), exact);
        Ok(Problem {
            config: config.clone(),
            model: model.with_forcing(Arc::new(forcing)),
            initial: InitialData {
                radius: r0,
                p: Arc::new(move |rho| e0.state(rho, 0.0).p),
                q: Arc::new(move |rho| e1.state(rho, 0.0).q),
                d: Arc::new(move |rho| e2.state(rho, 0.0).d),
            },
            supply: BoundarySupply {
                c: Arc::new(move |t| b0.state(1.0, t).c),
                c_rate: Arc::new(move |t| b1.time_derivatives(1.0, t).c),
                w: Arc::new(move |t| b2.state(1.0, t).w),
                w_rate: Arc::new(move |t| b3.time_derivatives(1.0, t).w),
            },
        })
    }
}

/// Complete solver state at `t_n`; enough to continue bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct TumorState {
    pub step: usize,
    pub radius: f64,
    pub radius_prev: f64,
    /// Spectral coefficients of the homogenized nutrient and drug.
    pub c: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub w: Vec<f64>,
    pub w_prev: Vec<f64>,
    /// Densities at the transport grid nodes.
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub d: Vec<f64>,
    pub p_prev: Vec<f64>,
    pub q_prev: Vec<f64>,
    pub d_prev: Vec<f64>,
    /// Velocity samples at `t_{n-1}` (empty at `t_0`).
    pub velocity_prev: Vec<f64>,
    /// Explicit nodal sources of the nutrient and drug at `t_{n-1}`.
    pub source_c_prev: Vec<f64>,
    pub source_w_prev: Vec<f64>,
    pub history_c: HistoryCache,
    pub history_w: HistoryCache,
}

/// Counters and timings of a run.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub steps: usize,
    pub clamped: u64,
    pub foot_evaluations: u64,
    pub max_condition: f64,
    pub max_residual: f64,
    pub history_reads: u64,
    pub transport_time: Duration,
    pub parabolic_time: Duration,
    pub history_time: Duration,
}

impl RunStats {
    pub fn clamp_fraction(&self) -> f64 {
        if self.foot_evaluations == 0 {
            0.0
        } else {
            self.clamped as f64 / self.foot_evaluations as f64
        }
    }
}

/// Fields at one time level in evaluable form.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub radius: f64,
    /// Homogenized nutrient and drug; add `c_lift`/`w_lift` for the
    /// physical fields.
    pub c: SpectralField,
    pub w: SpectralField,
    pub c_lift: f64,
    pub w_lift: f64,
    pub p: NodalField,
    pub q: NodalField,
    pub d: NodalField,
    pub velocity: Vec<f64>,
}

impl Snapshot {
    pub fn c_at(&self, rho: f64) -> f64 {
        self.c.value_at(rho) + self.c_lift
    }

    pub fn w_at(&self, rho: f64) -> f64 {
        self.w.value_at(rho) + self.w_lift
    }

    pub fn densities_at(&self, rho: f64) -> [f64; 3] {
        [self.p.eval(rho), self.q.eval(rho), self.d.eval(rho)]
    }
}

/// Marches a [`Problem`] from `t_0` to `t_final`.
pub struct Stepper {
    problem: Problem,
    basis: Arc<TrialBasis>,
    weights: FractionalWeights,
    grid: Vec<f64>,
    /// Trial functions at the transport grid nodes.
    grid_trial: DMatrix<f64>,
    state: TumorState,
    stats: RunStats,
}

impl Stepper {
    pub fn new(problem: Problem) -> Result<Self> {
        problem.config.validate()?;
        let cfg = &problem.config;
        let grid = grid_nodes(cfg.grid_cells);
        let sample = |f: &ScalarFn| grid.iter().map(|&r| f(r)).collect::<Vec<_>>();
        let (p, q, d) = (
            sample(&problem.initial.p),
            sample(&problem.initial.q),
            sample(&problem.initial.d),
        );
        let m = cfg.degree + 1;
        let state = TumorState {
            step: 0,
            radius: problem.initial.radius,
            radius_prev: problem.initial.radius,
            c: vec![0.0; m],
            c_prev: vec![0.0; m],
            w: vec![0.0; m],
            w_prev: vec![0.0; m],
            p_prev: p.clone(),
            q_prev: q.clone(),
            d_prev: d.clone(),
            p,
            q,
            d,
            velocity_prev: Vec::new(),
            source_c_prev: vec![0.0; m],
            source_w_prev: vec![0.0; m],
            history_c: HistoryCache::new(),
            history_w: HistoryCache::new(),
        };
        Self::with_state(problem, state)
    }

    /// Continues from a saved state.
    pub fn resume(problem: Problem, state: TumorState) -> Result<Self> {
        problem.config.validate()?;
        let cfg = &problem.config;
        let m = cfg.degree + 1;
        let g = cfg.grid_cells + 1;
        let coeff_ok = [&state.c, &state.c_prev, &state.w, &state.w_prev, &state.source_c_prev, &state.source_w_prev]
            .iter()
            .all(|v| v.len() == m);
        let grid_ok = [&state.p, &state.q, &state.d, &state.p_prev, &state.q_prev, &state.d_prev]
            .iter()
            .all(|v| v.len() == g);
        let hist_ok = state.history_c.len() == state.step
            && state.history_w.len() == state.step
            && state.history_c.entries().iter().chain(state.history_w.entries()).all(|e| e.len() == m);
        if !(coeff_ok && grid_ok && hist_ok) || state.step > cfg.steps {
            return Err(FbpError::Precondition(
                "saved state does not match the configured degree, grid or step count".into(),
            ));
        }
        Self::with_state(problem, state)
    }

    fn with_state(problem: Problem, state: TumorState) -> Result<Self> {
        let cfg = &problem.config;
        let basis = Arc::new(TrialBasis::new(cfg.degree)?);
        let weights = FractionalWeights::new(cfg.alpha, cfg.t_star(), cfg.steps, cfg.strict_aprime_n_zero)?;
        let grid = grid_nodes(cfg.grid_cells);
        let m = basis.len();
        let mut grid_trial = DMatrix::zeros(grid.len(), m);
        for (j, &rho) in grid.iter().enumerate() {
            let s = basis.sample(rho);
            for i in 0..m {
                grid_trial[(j, i)] = s.values[i];
            }
        }
        Ok(Stepper {
            problem,
            basis,
            weights,
            grid,
            grid_trial,
            state,
            stats: RunStats::default(),
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn config(&self) -> &SolverConfig {
        &self.problem.config
    }

    pub fn basis(&self) -> &Arc<TrialBasis> {
        &self.basis
    }

    pub fn state(&self) -> &TumorState {
        &self.state
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn time(&self) -> f64 {
        self.state.step as f64 * self.weights.t_star()
    }

    pub fn is_finished(&self) -> bool {
        self.state.step >= self.problem.config.steps
    }

    fn on_grid(&self, coeffs: &[f64], lift: f64) -> Vec<f64> {
        let v = &self.grid_trial * DVector::from_column_slice(coeffs);
        v.iter().map(|x| x + lift).collect()
    }

    /// `h` (plus velocity forcing) at the grid nodes and the resulting
    /// velocity at `t_n`.
    fn velocity_now(&self, c_grid: &[f64], w_grid: &[f64], t_n: f64) -> VelocityField {
        let s = &self.state;
        let forcing = self.problem.model.forcing();
        let h: Vec<f64> = self
            .grid
            .iter()
            .enumerate()
            .map(|(j, &rho)| {
                let pt = PointState::new(c_grid[j], w_grid[j], s.p[j], s.q[j], s.d[j]);
                self.problem.model.h_rate(&pt) + forcing.map_or(0.0, |f| f.v(rho, t_n))
            })
            .collect();
        velocity_from_h(&h, s.radius)
    }

    pub fn snapshot(&self) -> Snapshot {
        let t = self.time();
        let s = &self.state;
        let (c_lift, w_lift) = ((self.problem.supply.c)(t), (self.problem.supply.w)(t));
        let c_grid = self.on_grid(&s.c, c_lift);
        let w_grid = self.on_grid(&s.w, w_lift);
        let vf = self.velocity_now(&c_grid, &w_grid, t);
        Snapshot {
            step: s.step,
            time: t,
            radius: s.radius,
            c: SpectralField::new(self.basis.clone(), s.c.clone()).expect("length checked"),
            w: SpectralField::new(self.basis.clone(), s.w.clone()).expect("length checked"),
            c_lift,
            w_lift,
            p: NodalField::new(s.p.clone()),
            q: NodalField::new(s.q.clone()),
            d: NodalField::new(s.d.clone()),
            velocity: vf.samples().to_vec(),
        }
    }

    /// Advances one step `t_n -> t_{n+1}`.
    pub fn step(&mut self) -> Result<()> {
        let n = self.state.step;
        if self.is_finished() {
            return Err(FbpError::Precondition(format!("run already reached step {n}")));
        }
        let cfg = self.problem.config.clone();
        let ts = self.weights.t_star();
        let t_n = n as f64 * ts;
        let supply = &self.problem.supply;
        let (c_lift, w_lift) = ((supply.c)(t_n), (supply.w)(t_n));
        let model = &self.problem.model;
        let forcing = model.forcing();

        let t0 = Instant::now();
        let c_grid = self.on_grid(&self.state.c, c_lift);
        let w_grid = self.on_grid(&self.state.w, w_lift);
        let vf = self.velocity_now(&c_grid, &w_grid, t_n);
        let r_next = if n == 0 {
            radius_from_moment(self.state.radius, vf.moment(), ts)
        } else {
            radius_from_moment(self.state.radius_prev, vf.moment(), 2.0 * ts)
        };
        if !(r_next.is_finite() && r_next > 0.0) {
            return Err(FbpError::NonFinite { step: n, field: "R" });
        }

        let c_field = SpectralField::new(self.basis.clone(), self.state.c.clone())?;
        let w_field = SpectralField::new(self.basis.clone(), self.state.w.clone())?;
        let nutrients = |rho: f64| (c_field.value_at(rho) + c_lift, w_field.value_at(rho) + w_lift);
        let cur = [
            NodalField::new(self.state.p.clone()),
            NodalField::new(self.state.q.clone()),
            NodalField::new(self.state.d.clone()),
        ];
        let prev = [
            NodalField::new(self.state.p_prev.clone()),
            NodalField::new(self.state.q_prev.clone()),
            NodalField::new(self.state.d_prev.clone()),
        ];
        let transport = advance_pqd(&TransportInputs {
            model,
            velocity: &vf,
            current: [&cur[0], &cur[1], &cur[2]],
            previous: if n == 0 { None } else { Some([&prev[0], &prev[1], &prev[2]]) },
            nutrients: &nutrients,
            t_n,
            t_star: ts,
        });
        for (k, name) in ["p", "q", "d"].iter().enumerate() {
            if transport.fields[k].iter().any(|v| !v.is_finite()) {
                return Err(FbpError::NonFinite { step: n, field: name });
            }
        }
        self.stats.clamped += transport.clamped;
        self.stats.foot_evaluations += transport.evaluations;
        self.stats.transport_time += t0.elapsed();

        // Explicit sources at the collocation nodes.
        let t1 = Instant::now();
        let rho_nodes = self.basis.rho_nodes();
        let c_nodes = c_field.at_nodes();
        let w_nodes = w_field.at_nodes();
        let (c_rate, w_rate) = ((supply.c_rate)(t_n), (supply.w_rate)(t_n));
        let mut source_c = Vec::with_capacity(rho_nodes.len());
        let mut source_w = Vec::with_capacity(rho_nodes.len());
        for (i, &rho) in rho_nodes.iter().enumerate() {
            let (c, w) = (c_nodes[i] + c_lift, w_nodes[i] + w_lift);
            let (p, q) = (cur[0].eval(rho), cur[1].eval(rho));
            let (fc, fw) = forcing.map_or((0.0, 0.0), |f| (f.c(rho, t_n), f.w(rho, t_n)));
            source_c.push(-model.f_consumption(c, p, q) + fc - c_rate);
            source_w.push(-model.g_consumption(c, w, p, q) + fw - w_rate);
        }

        let th = Instant::now();
        let hw = history_weights(n, &self.weights)?;
        let nodes = self.basis.len();
        let hist_c = history_sum(&mut self.state.history_c, &hw, nodes)?;
        let hist_w = history_sum(&mut self.state.history_w, &hw, nodes)?;
        self.stats.history_reads = self.state.history_c.reads() + self.state.history_w.reads();
        self.stats.history_time += th.elapsed();

        let scheme = if n == 0 && cfg.startup == Startup::Implicit {
            StepScheme::Start
        } else {
            StepScheme::TwoLevel
        };
        let v1_n = vf.boundary();
        let first = n == 0;
        let v1_prev = if first { v1_n } else { *self.state.velocity_prev.last().unwrap_or(&v1_n) };
        let c_prev_nodes = if first { c_nodes.clone() } else { mat_vec(self.basis.values(), &self.state.c_prev) };
        let w_prev_nodes = if first { w_nodes.clone() } else { mat_vec(self.basis.values(), &self.state.w_prev) };
        let src_c_prev = if first { source_c.clone() } else { self.state.source_c_prev.clone() };
        let src_w_prev = if first { source_w.clone() } else { self.state.source_w_prev.clone() };
        let a0 = self.weights.a_prime()[0];
        let inputs = |diffusion, current, previous, source_n, source_prev, history| ParabolicStepInputs {
            step: n,
            scheme,
            t_star: ts,
            diffusion,
            a_prime_0: a0,
            r_next,
            v1_n,
            v1_prev,
            current,
            previous,
            source_n,
            source_prev,
            history,
        };
        let in_c = inputs(cfg.d1, &c_nodes, &c_prev_nodes, &source_c, &src_c_prev, &hist_c);
        let in_w = inputs(cfg.d2, &w_nodes, &w_prev_nodes, &source_w, &src_w_prev, &hist_w);
        let basis = &self.basis;
        let (sol_c, sol_w) = rayon::join(|| solve_step(&in_c, basis), || solve_step(&in_w, basis));
        let (sol_c, sol_w): (StepSolution, StepSolution) = (sol_c?, sol_w?);
        for (sol, name) in [(&sol_c, "c"), (&sol_w, "w")] {
            if sol.field.coeffs().iter().any(|v| !v.is_finite()) {
                return Err(FbpError::NonFinite { step: n, field: name });
            }
            self.stats.max_condition = self.stats.max_condition.max(sol.condition);
            self.stats.max_residual = self.stats.max_residual.max(sol.residual);
        }
        let scale = |d: f64, v: Vec<f64>| -> Vec<f64> {
            let k = d / (r_next * r_next);
            v.into_iter().map(|x| k * x).collect()
        };
        self.state.history_c.push(scale(cfg.d1, sol_c.field.laplacian_at_nodes()));
        self.state.history_w.push(scale(cfg.d2, sol_w.field.laplacian_at_nodes()));
        self.stats.parabolic_time += t1.elapsed();

        let [p_new, q_new, d_new] = transport.fields;
        let s = &mut self.state;
        s.step = n + 1;
        s.radius_prev = s.radius;
        s.radius = r_next;
        s.c_prev = std::mem::replace(&mut s.c, sol_c.field.coeffs().to_vec());
        s.w_prev = std::mem::replace(&mut s.w, sol_w.field.coeffs().to_vec());
        s.p_prev = std::mem::replace(&mut s.p, p_new);
        s.q_prev = std::mem::replace(&mut s.q, q_new);
        s.d_prev = std::mem::replace(&mut s.d, d_new);
        s.velocity_prev = vf.samples().to_vec();
        s.source_c_prev = source_c;
        s.source_w_prev = source_w;
        self.stats.steps += 1;
        debug!("step {} -> t = {:.6}, R = {:.6}", n, (n + 1) as f64 * ts, r_next);
        Ok(())
    }

    /// Steps to the end, calling `observe` at `t_0` and after every step.
    pub fn run_with<F>(&mut self, mut observe: F) -> Result<()>
    where
        F: FnMut(&Stepper) -> Result<()>,
    {
        observe(self)?;
        while !self.is_finished() {
            self.step()?;
            observe(self)?;
        }
        if self.stats.clamp_fraction() > CLAMP_WARN_FRACTION {
            warn!(
                "{:.3}% of characteristic feet left [0, 1] and were clamped",
                100.0 * self.stats.clamp_fraction()
            );
        }
        Ok(())
    }
}

fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(x)).as_slice().to_vec()
}

/// A finished run: recorded snapshots plus counters.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Vec<Snapshot>,
    pub stats: RunStats,
    pub final_state: TumorState,
}

/// Runs `problem` to completion, recording every `output_stride`-th level
/// and the final one.
pub fn run_simulation(problem: Problem) -> Result<RunOutput> {
    let stride = problem.config.output_stride;
    let steps = problem.config.steps;
    let mut stepper = Stepper::new(problem)?;
    let mut trajectory = Vec::new();
    stepper.run_with(|s| {
        let n = s.state().step;
        if n % stride == 0 || n == steps {
            trajectory.push(s.snapshot());
        }
        Ok(())
    })?;
    Ok(RunOutput {
        trajectory,
        stats: stepper.stats().clone(),
        final_state: stepper.state().clone(),
    })
}
