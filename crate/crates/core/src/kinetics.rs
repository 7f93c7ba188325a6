//! Rate functions of the cell-population model and the assembly of the
//! transfer matrix `g_ij`, the volume source `h` and the consumption terms.

use std::fmt;
use std::sync::Arc;

use crate::error::{FbpError, Result};

/// Local values of the five unknowns at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointState {
    pub c: f64,
    pub w: f64,
    pub p: f64,
    pub q: f64,
    pub d: f64,
}

impl PointState {
    pub fn new(c: f64, w: f64, p: f64, q: f64, d: f64) -> Self {
        PointState { c, w, p, q, d }
    }

    pub fn densities(&self) -> [f64; 3] {
        [self.p, self.q, self.d]
    }
}

pub type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Scalar rate functions of the full model. The first group depends on the
/// nutrient `c`, `g1`/`g2` and `k3`/`k4` on the drug `w`.
#[derive(Clone)]
pub struct RateFunctions {
    /// Mitosis rate.
    pub k_b: RateFn,
    /// Proliferative -> quiescent transfer.
    pub k_q: RateFn,
    /// Proliferative death.
    pub k_a: RateFn,
    /// Quiescent -> proliferative transfer.
    pub k_p: RateFn,
    /// Quiescent death.
    pub k_d: RateFn,
    /// Drug kill rate of proliferative cells.
    pub g1: RateFn,
    /// Drug kill rate of quiescent cells.
    pub g2: RateFn,
    pub k1: RateFn,
    pub k2: RateFn,
    pub k3: RateFn,
    pub k4: RateFn,
}

/// Constants of the built-in saturating parameterization of the full model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemplateConstants {
    pub k_b: f64,
    pub k_q: f64,
    pub k_a: f64,
    pub k_p: f64,
    pub k_d: f64,
    pub g1: f64,
    pub g2: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
}

impl Default for TemplateConstants {
    fn default() -> Self {
        TemplateConstants {
            k_b: 1.0,
            k_q: 0.4,
            k_a: 0.2,
            k_p: 0.5,
            k_d: 0.3,
            g1: 0.3,
            g2: 0.1,
            k1: 0.2,
            k2: 0.05,
            k3: 0.1,
            k4: 0.02,
        }
    }
}

impl RateFunctions {
    /// Smooth, nonnegative rates: growth-type rates saturate as
    /// `k c / (1 + c)`, starvation-type rates decay as `k / (1 + c)`, drug
    /// and consumption rates are linear.
    pub fn saturating(k: TemplateConstants) -> Self {
        fn grow(rate: f64) -> RateFn {
            Arc::new(move |c: f64| rate * c / (1.0 + c))
        }
        fn starve(rate: f64) -> RateFn {
            Arc::new(move |c: f64| rate / (1.0 + c))
        }
        fn linear(rate: f64) -> RateFn {
            Arc::new(move |x: f64| rate * x)
        }
        RateFunctions {
            k_b: grow(k.k_b),
            k_q: starve(k.k_q),
            k_a: starve(k.k_a),
            k_p: grow(k.k_p),
            k_d: starve(k.k_d),
            g1: linear(k.g1),
            g2: linear(k.g2),
            k1: linear(k.k1),
            k2: linear(k.k2),
            k3: linear(k.k3),
            k4: linear(k.k4),
        }
    }

    /// Every rate identically zero.
    pub fn zero() -> Self {
        let z: RateFn = Arc::new(|_| 0.0);
        RateFunctions {
            k_b: z.clone(),
            k_q: z.clone(),
            k_a: z.clone(),
            k_p: z.clone(),
            k_d: z.clone(),
            g1: z.clone(),
            g2: z.clone(),
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z,
        }
    }
}

/// External source terms added to the six evolution equations
/// (manufactured-solution forcing or stability perturbations).
pub trait Forcing: Send + Sync {
    fn c(&self, rho: f64, t: f64) -> f64;
    fn w(&self, rho: f64, t: f64) -> f64;
    /// Sources of the `p`, `q`, `d` equations.
    fn pqd(&self, rho: f64, t: f64) -> [f64; 3];
    /// Source of the velocity equation.
    fn v(&self, rho: f64, t: f64) -> f64;
}

/// Adds a constant `epsilon` to every equation on top of an optional base
/// forcing.
pub struct ConstantPerturbation {
    pub base: Option<Arc<dyn Forcing>>,
    pub epsilon: f64,
}

impl Forcing for ConstantPerturbation {
    fn c(&self, rho: f64, t: f64) -> f64 {
        self.base.as_ref().map_or(0.0, |b| b.c(rho, t)) + self.epsilon
    }

    fn w(&self, rho: f64, t: f64) -> f64 {
        self.base.as_ref().map_or(0.0, |b| b.w(rho, t)) + self.epsilon
    }

    fn pqd(&self, rho: f64, t: f64) -> [f64; 3] {
        let mut out = self.base.as_ref().map_or([0.0; 3], |b| b.pqd(rho, t));
        for v in &mut out {
            *v += self.epsilon;
        }
        out
    }

    fn v(&self, rho: f64, t: f64) -> f64 {
        self.base.as_ref().map_or(0.0, |b| b.v(rho, t)) + self.epsilon
    }
}

#[derive(Clone)]
enum Kinetics {
    FullTemplate {
        rates: RateFunctions,
        k_r: f64,
        n_total: f64,
    },
    Example1,
}

/// A reaction model plus optional forcing.
#[derive(Clone)]
pub struct KineticsModel {
    kinetics: Kinetics,
    forcing: Option<Arc<dyn Forcing>>,
}

impl fmt::Debug for KineticsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KineticsModel")
            .field("name", &self.name())
            .field("forced", &self.forcing.is_some())
            .finish()
    }
}

impl KineticsModel {
    pub const FULL_TEMPLATE: &'static str = "full-template";
    pub const EXAMPLE_1: &'static str = "example-1";

    pub fn full_template(rates: RateFunctions, k_r: f64, n_total: f64) -> Result<Self> {
        if !(k_r >= 0.0) {
            return Err(FbpError::Config(format!("k_r must be >= 0, got {k_r}")));
        }
        if !(n_total > 0.0) {
            return Err(FbpError::Config(format!("n_total must be > 0, got {n_total}")));
        }
        Ok(KineticsModel {
            kinetics: Kinetics::FullTemplate {
                rates,
                k_r,
                n_total,
            },
            forcing: None,
        })
    }

    /// The manufactured test model: rows `(q p + c/2 q + p d)`,
    /// `(p + 2p q)`, `(p + p q)`, source `(2p - d)/2`, and consumption with
    /// the sign of a source (`f = -(c/16 + 12p/88)`).
    pub fn example_1() -> Self {
        KineticsModel {
            kinetics: Kinetics::Example1,
            forcing: None,
        }
    }

    pub fn with_forcing(mut self, forcing: Arc<dyn Forcing>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn without_forcing(mut self) -> Self {
        self.forcing = None;
        self
    }

    pub fn forcing(&self) -> Option<&Arc<dyn Forcing>> {
        self.forcing.as_ref()
    }

    pub fn name(&self) -> &'static str {
        match self.kinetics {
            Kinetics::FullTemplate { .. } => Self::FULL_TEMPLATE,
            Kinetics::Example1 => Self::EXAMPLE_1,
        }
    }

    /// Total cell density `N`.
    pub fn n_total(&self) -> f64 {
        match &self.kinetics {
            Kinetics::FullTemplate { n_total, .. } => *n_total,
            Kinetics::Example1 => 1.0,
        }
    }

    /// Transfer matrix, row `i` multiplying `(p, q, d)` in equation `i`.
    pub fn assemble_g(&self, s: &PointState) -> [[f64; 3]; 3] {
        match &self.kinetics {
            Kinetics::FullTemplate {
                rates,
                k_r,
                n_total,
            } => {
                let kb = (rates.k_b)(s.c);
                let kq = (rates.k_q)(s.c);
                let ka = (rates.k_a)(s.c);
                let kp = (rates.k_p)(s.c);
                let kd = (rates.k_d)(s.c);
                let g1 = (rates.g1)(s.w);
                let g2 = (rates.g2)(s.w);
                let h = (kb * s.p - k_r * s.d) / n_total;
                [
                    [kb - kq - ka - g1 - h, kp, 0.0],
                    [kq, -(kp + kd + g2) - h, 0.0],
                    [ka + g1, kd + g2, -k_r - h],
                ]
            }
            Kinetics::Example1 => [[s.q, 0.5 * s.c, s.p], [1.0, 2.0 * s.p, 0.0], [1.0, s.p, 0.0]],
        }
    }

    /// `g * (p, q, d)`.
    pub fn transfer(&self, s: &PointState) -> [f64; 3] {
        let g = self.assemble_g(s);
        let x = s.densities();
        [
            g[0][0] * x[0] + g[0][1] * x[1] + g[0][2] * x[2],
            g[1][0] * x[0] + g[1][1] * x[1] + g[1][2] * x[2],
            g[2][0] * x[0] + g[2][1] * x[1] + g[2][2] * x[2],
        ]
    }

    /// Volume source rate `h`.
    pub fn h_rate(&self, s: &PointState) -> f64 {
        match &self.kinetics {
            Kinetics::FullTemplate {
                rates,
                k_r,
                n_total,
            } => ((rates.k_b)(s.c) * s.p - k_r * s.d) / n_total,
            Kinetics::Example1 => (2.0 * s.p - s.d) / 2.0,
        }
    }

    /// Nutrient consumption `f(c, p, q)`; enters the nutrient equation with a
    /// minus sign.
    pub fn f_consumption(&self, c: f64, p: f64, q: f64) -> f64 {
        match &self.kinetics {
            Kinetics::FullTemplate { rates, .. } => (rates.k1)(c) * p + (rates.k2)(c) * q,
            Kinetics::Example1 => -(c / 16.0 + 12.0 * p / 88.0),
        }
    }

    /// Drug consumption. The template uses `k3(w) p + k4(w) q`; the test
    /// model couples it to the nutrient instead (`-(3c/115 + 12p/188)`).
    pub fn g_consumption(&self, c: f64, w: f64, p: f64, q: f64) -> f64 {
        match &self.kinetics {
            Kinetics::FullTemplate { rates, .. } => (rates.k3)(w) * p + (rates.k4)(w) * q,
            Kinetics::Example1 => -(3.0 * c / 115.0 + 12.0 * p / 188.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn template() -> KineticsModel {
        KineticsModel::full_template(RateFunctions::saturating(TemplateConstants::default()), 0.4, 2.0)
            .unwrap()
    }

    #[test]
    fn zero_birth_and_removal() {
        let mut rates = RateFunctions::saturating(TemplateConstants::default());
        rates.k_b = Arc::new(|_| 0.0);
        let m = KineticsModel::full_template(rates.clone(), 0.0, 1.0).unwrap();
        let s = PointState::new(0.7, 0.2, 0.3, 0.5, 0.2);
        let g = m.assemble_g(&s);
        let expected = -(rates.k_q)(0.7) - (rates.k_a)(0.7) - (rates.g1)(0.2);
        assert_abs_diff_eq!(g[0][0], expected, epsilon = 1e-15);
        assert_eq!(m.h_rate(&s), 0.0);
    }

    #[test]
    fn example_one_matrix() {
        let m = KineticsModel::example_1();
        let s = PointState::new(1.0, 0.0, 2.0, 3.0, 4.0);
        assert_eq!(
            m.assemble_g(&s),
            [[3.0, 0.5, 2.0], [1.0, 4.0, 0.0], [1.0, 2.0, 0.0]]
        );
        assert_eq!(m.h_rate(&s), 0.0);
        assert_eq!(m.h_rate(&PointState::default()), 0.0);
    }

    #[test]
    fn h_balanced_template() {
        let mut rates = RateFunctions::zero();
        rates.k_b = Arc::new(|_| 1.0);
        let m = KineticsModel::full_template(rates, 1.0, 1.0).unwrap();
        assert_eq!(m.h_rate(&PointState::new(0.3, 0.1, 0.4, 0.2, 0.4)), 0.0);
    }

    #[test]
    fn consumption_terms() {
        let m = KineticsModel::example_1();
        assert_abs_diff_eq!(m.f_consumption(16.0, 88.0 / 12.0, 0.0), -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.g_consumption(115.0 / 3.0, 9.0, 188.0 / 12.0, 0.0), -2.0, epsilon = 1e-14);
        let t = template();
        assert_eq!(t.f_consumption(0.8, 0.0, 0.0), 0.0);
        assert_eq!(t.g_consumption(0.5, 0.8, 0.0, 0.0), 0.0);
        let a = t.f_consumption(0.8, 0.3, 0.4);
        let b = t.f_consumption(0.8, 0.6, 0.8);
        assert_abs_diff_eq!(b, 2.0 * a, epsilon = 1e-15);
    }

    #[test]
    fn invalid_template_constants() {
        assert!(KineticsModel::full_template(RateFunctions::zero(), -1.0, 1.0).is_err());
        assert!(KineticsModel::full_template(RateFunctions::zero(), 0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn column_sums(c in 0.0f64..5.0, w in 0.0f64..5.0, p in 0.0f64..3.0,
                       q in 0.0f64..3.0, d in 0.0f64..3.0) {
            let m = template();
            let s = PointState::new(c, w, p, q, d);
            let g = m.assemble_g(&s);
            let h = m.h_rate(&s);
            let kb = c / (1.0 + c);
            prop_assert!((g[0][0] + g[1][0] + g[2][0] - (kb - h)).abs() < 1e-13);
            prop_assert!((g[0][1] + g[1][1] + g[2][1] + h).abs() < 1e-13);
            prop_assert!((g[0][2] + g[1][2] + g[2][2] - (-0.4 - h)).abs() < 1e-13);
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        prop_assert!(g[i][j] >= 0.0);
                    }
                }
            }
        }

        #[test]
        fn sum_rate_vanishes_on_constraint(c in 0.0f64..5.0, w in 0.0f64..5.0,
                                           fp in 0.0f64..1.0, fq in 0.0f64..1.0) {
            let m = template();
            let n = m.n_total();
            let p = n * fp * 0.5;
            let q = (n - p) * fq;
            let d = n - p - q;
            let s = PointState::new(c, w, p, q, d);
            let r = m.transfer(&s);
            prop_assert!((r[0] + r[1] + r[2]).abs() <= 1e-14 * (1.0 + n));
        }
    }
}
