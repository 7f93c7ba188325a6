//! Fractional derivative oracle, independent of the solver's L1 weights.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{FbpError, Result};

/// Gauss–Jacobi rule for the weight `(1 - x)^a (1 + x)^b` on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussJacobi {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Golub–Welsch: eigen-decomposition of the Jacobi matrix of the monic
/// Jacobi recurrence. `n` nodes, exact for polynomials of degree `2n - 1`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<GaussJacobi> {
    if n == 0 || !(a > -1.0 && b > -1.0) {
        return Err(FbpError::Precondition(format!(
            "Gauss-Jacobi rule needs n >= 1 and a, b > -1 (got n = {n}, a = {a}, b = {b})"
        )));
    }
    let ab = a + b;
    let diag = |k: usize| {
        if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            let s = 2.0 * k as f64 + ab;
            (b * b - a * a) / (s * (s + 2.0))
        }
    };
    let offdiag = |k: usize| {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let num = 4.0 * kf * (kf + a) * (kf + b) * (kf + ab);
        (num / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
    };
    let mut j = DMatrix::zeros(n, n);
    for k in 0..n {
        j[(k, k)] = diag(k);
        if k + 1 < n {
            let e = offdiag(k + 1);
            j[(k, k + 1)] = e;
            j[(k + 1, k)] = e;
        }
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(GaussJacobi {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Evaluates `(1/Gamma(1-alpha)) int_0^t u'(s) (t - s)^{-alpha} ds` with a
/// fixed Gauss–Jacobi rule. For `u(0) = 0` this is the Riemann–Liouville
/// derivative of order `alpha`.
#[derive(Debug, Clone)]
pub struct FracDerivOracle {
    alpha: f64,
    rule: GaussJacobi,
    scale: f64,
}

impl FracDerivOracle {
    pub fn new(alpha: f64, quad_order: usize) -> Result<Self> {
        if quad_order < 2 {
            return Err(FbpError::Precondition(format!(
                "oracle quadrature order must be >= 2, got {quad_order}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(FbpError::Precondition(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(FracDerivOracle {
            alpha,
            rule: gauss_jacobi(quad_order, -alpha, 0.0)?,
            scale: 1.0 / gamma(1.0 - alpha),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `du` is the time derivative of the function being differentiated.
    pub fn derivative<F: Fn(f64) -> f64>(&self, du: F, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let half = 0.5 * t;
        let sum: f64 = self
            .rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .map(|(&x, &w)| w * du(half * (1.0 + x)))
            .sum();
        self.scale * half.powf(1.0 - self.alpha) * sum
    }
}

/// One-shot form of [`FracDerivOracle::derivative`]; `du` is `u'` and
/// `u(0) = 0` is assumed.
pub fn rl_frac_deriv_oracle<F: Fn(f64) -> f64>(du: F, t: f64, alpha: f64, quad_order: usize) -> Result<f64> {
    Ok(FracDerivOracle::new(alpha, quad_order)?.derivative(du, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_case_matches_gauss() {
        let gj = gauss_jacobi(5, 0.0, 0.0).unwrap();
        let g = crate::basis::gauss_rule(4).unwrap();
        for k in 0..5 {
            assert_relative_eq!(gj.nodes[k], g.nodes[k], epsilon = 1e-14);
            assert_relative_eq!(gj.weights[k], g.weights[k], epsilon = 1e-14);
        }
    }

    #[test]
    fn jacobi_moments() {
        // int_{-1}^1 (1-x)^a x^k dx against the rule; moments from the beta function.
        let a = -0.3;
        let gj = gauss_jacobi(6, a, 0.0).unwrap();
        let total: f64 = gj.weights.iter().sum();
        assert_relative_eq!(total, 2f64.powf(a + 1.0) / (a + 1.0), max_relative = 1e-13);
        // int (1-x)^a (1-x)^3 = 2^{a+4}/(a+4)
        let m3: f64 = gj.nodes.iter().zip(&gj.weights).map(|(x, w)| w * (1.0 - x).powi(3)).sum();
        assert_relative_eq!(m3, 2f64.powf(a + 4.0) / (a + 4.0), max_relative = 1e-13);
    }

    #[test]
    fn power_rule() {
        for alpha in [0.1, 0.5, 0.9] {
            let d1 = rl_frac_deriv_oracle(|_| 1.0, 0.7, alpha, 8).unwrap();
            assert_relative_eq!(d1, 0.7f64.powf(1.0 - alpha) / gamma(2.0 - alpha), max_relative = 1e-12);
        }
    }

    #[test]
    fn near_first_derivative() {
        let t: f64 = 0.8;
        let d = rl_frac_deriv_oracle(|s| 2.0 * s, t, 1.0 - 1e-6, 16).unwrap();
        assert_relative_eq!(d, 2.0 * t, max_relative = 1e-4);
    }

    #[test]
    fn rejects_low_order() {
        assert!(rl_frac_deriv_oracle(|_| 1.0, 1.0, 0.5, 1).is_err());
        assert_eq!(rl_frac_deriv_oracle(|_| 1.0, 0.0, 0.5, 4).unwrap(), 0.0);
    }
}
