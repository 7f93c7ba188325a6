//! Convergence studies, the stability experiment and table output.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::driver::{ModelName, Problem, RunStats, SolverConfig, Stepper};
use crate::error::{FbpError, Result};
use crate::kinetics::ConstantPerturbation;

use super::exact::{Example1Exact, ExactSolution};
use super::norms::{deviation, Deviation, ErrorReport, ErrorTracker, FieldSampler, FIELDS};

/// `ln(e2 / e1) / ln(n1 / n2)`.
pub fn convergence_order(e1: f64, e2: f64, n1: usize, n2: usize) -> Result<f64> {
    if !(e1 > 0.0 && e2 > 0.0) {
        return Err(FbpError::Precondition(format!(
            "convergence order needs positive errors, got {e1:e} and {e2:e}"
        )));
    }
    if n1 == 0 || n2 == 0 || n1 == n2 {
        return Err(FbpError::Precondition(format!(
            "convergence order needs distinct positive levels, got {n1} and {n2}"
        )));
    }
    Ok((e2 / e1).ln() / (n1 as f64 / n2 as f64).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vary {
    /// Refine the number of time steps `M`.
    Time,
    /// Refine the spectral degree `N`.
    Space,
}

impl Vary {
    fn label(&self) -> &'static str {
        match self {
            Vary::Time => "M",
            Vary::Space => "N",
        }
    }
}

impl FromStr for Vary {
    type Err = FbpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(Vary::Time),
            "space" => Ok(Vary::Space),
            other => Err(FbpError::Config(format!("--vary must be `time` or `space`, got `{other}`"))),
        }
    }
}

/// The exact solution attached to a manufactured model.
pub fn exact_for(config: &SolverConfig) -> Result<Arc<dyn ExactSolution>> {
    match config.model {
        ModelName::Example1 => Ok(Arc::new(Example1Exact)),
        ModelName::FullTemplate => Err(FbpError::Config(
            "error studies need a model with a known exact solution (model = example-1)".into(),
        )),
    }
}

/// Runs `problem` and measures it against `exact` at every level.
pub fn measure_run(problem: Problem, exact: Arc<dyn ExactSolution>) -> Result<(ErrorReport, RunStats)> {
    let mut stepper = Stepper::new(problem)?;
    let mut tracker = ErrorTracker::new(stepper.basis().clone(), exact)?;
    stepper.run_with(|s| {
        tracker.observe(&s.snapshot());
        Ok(())
    })?;
    Ok((tracker.into_report(), stepper.stats().clone()))
}

/// Error report of the manufactured problem described by `config`.
pub fn measure_config(config: &SolverConfig) -> Result<ErrorReport> {
    let exact = exact_for(config)?;
    let problem = Problem::from_config(config)?;
    Ok(measure_run(problem, exact)?.0)
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub vary: Vary,
    pub alpha: f64,
    pub levels: Vec<usize>,
    pub reports: Vec<ErrorReport>,
}

impl ConvergenceStudy {
    /// Orders between consecutive levels, per field.
    pub fn orders(&self) -> Result<Vec<[f64; 5]>> {
        self.levels
            .windows(2)
            .zip(self.reports.windows(2))
            .map(|(lv, rp)| {
                let mut out = [0.0; 5];
                for k in 0..5 {
                    out[k] = convergence_order(rp[0].max[k], rp[1].max[k], lv[0], lv[1])?;
                }
                Ok(out)
            })
            .collect()
    }

    /// Rows are fields, columns are levels.
    pub fn error_csv(&self) -> String {
        let label = self.vary.label();
        let mut out = String::from("field");
        for l in &self.levels {
            let _ = write!(out, ",{label}={l}");
        }
        out.push('\n');
        for (k, name) in FIELDS.iter().enumerate() {
            out.push_str(name);
            for r in &self.reports {
                let _ = write!(out, ",{:e}", r.max[k]);
            }
            out.push('\n');
        }
        out
    }

    /// One row per consecutive pair of levels plus the reference `2 - alpha/2`.
    pub fn order_csv(&self) -> Result<String> {
        let label = self.vary.label();
        let mut out = String::from("levels");
        for name in FIELDS {
            let _ = write!(out, ",{name}");
        }
        out.push_str(",2-alpha/2\n");
        let reference = 2.0 - self.alpha / 2.0;
        for (pair, orders) in self.levels.windows(2).zip(self.orders()?) {
            let _ = write!(out, "{label}={}-{}", pair[0], pair[1]);
            for o in orders {
                let _ = write!(out, ",{o:.4}");
            }
            let _ = writeln!(out, ",{reference:.4}");
        }
        Ok(out)
    }
}

/// Runs the manufactured problem of `base` at every level (concurrently)
/// and collects the error reports in level order.
pub fn run_convergence_study(base: &SolverConfig, vary: Vary, levels: &[usize]) -> Result<ConvergenceStudy> {
    if levels.is_empty() {
        return Err(FbpError::Config("a convergence study needs at least one level".into()));
    }
    let configs: Vec<SolverConfig> = levels
        .iter()
        .map(|&l| {
            let mut cfg = base.clone();
            match vary {
                Vary::Time => cfg.steps = l,
                Vary::Space => cfg.degree = l,
            }
            cfg
        })
        .collect();
    let reports = configs
        .par_iter()
        .map(measure_config)
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy {
        vary,
        alpha: base.alpha,
        levels: levels.to_vec(),
        reports,
    })
}

/// Largest deviation between an unperturbed and an `epsilon`-perturbed run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub epsilon: f64,
    pub deviation: Deviation,
}

/// Runs `config` with and without a constant perturbation `epsilon` added
/// to all six equations, in lockstep, and records the largest deviation.
pub fn stability_experiment(config: &SolverConfig, epsilon: f64) -> Result<StabilityReport> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(FbpError::Config(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let base = Problem::from_config(config)?;
    let mut perturbed = base.clone();
    let forcing = base.model.forcing().cloned();
    perturbed.model = base
        .model
        .clone()
        .with_forcing(Arc::new(ConstantPerturbation { base: forcing, epsilon }));
    let mut a = Stepper::new(base)?;
    let mut b = Stepper::new(perturbed)?;
    let sampler = FieldSampler::new(a.basis().clone())?;
    let mut worst = deviation(&sampler, &a.snapshot(), &b.snapshot());
    while !a.is_finished() {
        a.step()?;
        b.step()?;
        worst = worst.max(deviation(&sampler, &a.snapshot(), &b.snapshot()));
    }
    Ok(StabilityReport {
        epsilon,
        deviation: worst,
    })
}

/// One experiment per `epsilon`, run concurrently.
pub fn stability_sweep(config: &SolverConfig, epsilons: &[f64]) -> Result<Vec<StabilityReport>> {
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0)) {
        return Err(FbpError::Config(format!("epsilon must be > 0, got {e}")));
    }
    epsilons
        .par_iter()
        .map(|&e| stability_experiment(config, e))
        .collect()
}

/// `ratio` on row `i` is `deviation(eps_{i-1}) / deviation(eps_i)`.
pub fn stability_csv(reports: &[StabilityReport]) -> String {
    let mut out = String::from("epsilon,dev_pqdR,dev_grad_c,dev_grad_w,deviation,ratio\n");
    for (i, r) in reports.iter().enumerate() {
        let d = &r.deviation;
        let ratio = if i == 0 {
            String::new()
        } else {
            format!("{:.4}", reports[i - 1].deviation.combined() / d.combined())
        };
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{ratio}",
            r.epsilon,
            d.densities_and_radius,
            d.gradient[0],
            d.gradient[1],
            d.combined()
        );
    }
    out
}

/// Time-step levels of the reference time-error table.
pub const TIME_TABLE_LEVELS: [usize; 6] = [100, 1000, 2000, 3000, 4000, 5000];
/// Degrees of the reference space-error table.
pub const SPACE_TABLE_LEVELS: [usize; 5] = [10, 20, 40, 80, 100];

/// Time and space studies in the layout of the reference tables.
#[derive(Debug, Clone)]
pub struct Tables {
    pub time: ConvergenceStudy,
    pub space: ConvergenceStudy,
}

/// Time study with `N = 20` and space study with `M = 200` on top of `base`.
pub fn reproduce_tables(base: &SolverConfig) -> Result<Tables> {
    let mut time_cfg = base.clone();
    time_cfg.degree = 20;
    let mut space_cfg = base.clone();
    space_cfg.steps = 200;
    let (time, space) = rayon::join(
        || run_convergence_study(&time_cfg, Vary::Time, &TIME_TABLE_LEVELS),
        || run_convergence_study(&space_cfg, Vary::Space, &SPACE_TABLE_LEVELS),
    );
    Ok(Tables {
        time: time?,
        space: space?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn orders_from_reference_errors() {
        assert_abs_diff_eq!(convergence_order(3.50646e-5, 9.31974e-6, 1000, 2000).unwrap(), 1.9116, epsilon = 1e-4);
        assert_abs_diff_eq!(convergence_order(4.54002e-6, 2.02089e-6, 2000, 3000).unwrap(), 1.9962, epsilon = 1e-4);
        assert_eq!(convergence_order(1e-3, 1e-3, 10, 20).unwrap(), 0.0);
    }

    #[test]
    fn order_rejects_bad_input() {
        assert!(convergence_order(0.0, 1e-3, 10, 20).is_err());
        assert!(convergence_order(1e-3, -1.0, 10, 20).is_err());
        assert!(convergence_order(1e-3, 1e-4, 10, 10).is_err());
    }

    #[test]
    fn order_is_scale_invariant() {
        let a = convergence_order(2e-3, 3e-4, 100, 300).unwrap();
        let b = convergence_order(2e-3 * 7.5, 3e-4 * 7.5, 100, 300).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-13);
    }
}
