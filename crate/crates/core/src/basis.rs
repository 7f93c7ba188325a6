//! Legendre machinery on the reference interval `[-1, 1]` and the
//! boundary-adapted trial basis used for the nutrient and drug fields.
//!
//! The physical coordinate is `rho in [0, 1]`, mapped by `x = 2 rho - 1`.
//! Every chain-rule factor of 2 lives in this module; callers only ever see
//! `rho`-derivatives.
//!
//! Trial function `i` is
//!
//! ```text
//! p_i(x) = L_i(x) - (2i+3)/(i+2)^2 L_{i+1}(x) - ((i+1)/(i+2))^2 L_{i+2}(x)
//! ```
//!
//! which vanishes at `x = 1` (`rho = 1`) and has zero slope at `x = -1`
//! (`rho = 0`), so any expansion in this basis satisfies the Dirichlet and
//! symmetry conditions identically.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{FbpError, Result};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// `L_n(x)` by the three-term recurrence.
pub fn legendre_eval(n: usize, x: f64) -> f64 {
    legendre_pair(n, x).0
}

/// Returns `(L_n(x), L_{n-1}(x))`; for `n = 0` the second entry is 0.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut prev, mut cur) = (1.0, x);
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `L_n'(x)`, valid on the closed interval including the endpoints.
pub fn legendre_deriv(n: usize, x: f64) -> f64 {
    let table = LegendreTable::new(n, x);
    table.d1[n]
}

/// `L_n''(x)`.
pub fn legendre_second_deriv(n: usize, x: f64) -> f64 {
    let table = LegendreTable::new(n, x);
    table.d2[n]
}

/// Values and first two derivatives of `L_0..=L_max` at one point.
///
/// Derivatives use `L'_{n+1} = L'_{n-1} + (2n+1) L_n` (and the same for the
/// second derivative), which stays finite at `x = +-1`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl LegendreTable {
    pub fn new(max_degree: usize, x: f64) -> Self {
        let len = max_degree + 1;
        let mut values = vec![0.0; len];
        let mut d1 = vec![0.0; len];
        let mut d2 = vec![0.0; len];
        values[0] = 1.0;
        if len > 1 {
            values[1] = x;
            d1[1] = 1.0;
        }
        for n in 1..max_degree {
            let nf = n as f64;
            values[n + 1] = ((2.0 * nf + 1.0) * x * values[n] - nf * values[n - 1]) / (nf + 1.0);
            d1[n + 1] = d1[n - 1] + (2.0 * nf + 1.0) * values[n];
            d2[n + 1] = d2[n - 1] + (2.0 * nf + 1.0) * d1[n];
        }
        LegendreTable { values, d1, d2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    Gauss,
    GaussLobatto,
}

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: QuadratureKind,
}

impl QuadratureRule {
    /// Integral of `f` over `[-1, 1]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integral of `f` over `[a, b]` by the affine map.
    pub fn integrate_on<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * self.integrate(|x| f(mid + half * x))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Legendre rule with `n + 1` nodes (the zeros of `L_{n+1}`), exact for
/// polynomials of degree `<= 2n + 1`.
pub fn gauss_rule(n: usize) -> Result<QuadratureRule> {
    let m = n + 1;
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    // Roots come in +-pairs; compute the non-negative half and mirror.
    for k in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut converged = false;
        let mut step = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITER {
            let (l, lm1) = legendre_pair(m, x);
            let dl = m as f64 * (x * l - lm1) / (x * x - 1.0);
            step = l / dl;
            x -= step;
            if step.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(FbpError::Quadrature {
                rule: "gauss",
                order: n,
                node: k,
                last_step: step,
            });
        }
        if 2 * k + 1 == m {
            x = 0.0;
        }
        let (l, lm1) = legendre_pair(m, x);
        let dl = m as f64 * (x * l - lm1) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dl * dl);
        nodes[k] = -x;
        nodes[m - 1 - k] = x;
        weights[k] = w;
        weights[m - 1 - k] = w;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        kind: QuadratureKind::Gauss,
    })
}

/// Gauss–Lobatto–Legendre rule with `n + 1` nodes including both endpoints,
/// exact for polynomials of degree `<= 2n - 1`.
pub fn lobatto_rule(n: usize) -> Result<QuadratureRule> {
    if n < 1 {
        return Err(FbpError::Precondition(
            "Gauss-Lobatto rule needs at least two nodes (N >= 1)".into(),
        ));
    }
    let m = n + 1;
    let nf = n as f64;
    let endpoint_weight = 2.0 / (nf * (nf + 1.0));
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    weights[0] = endpoint_weight;
    weights[n] = endpoint_weight;
    // Interior nodes are the zeros of L_n'; index k counts from x = 1 down.
    for k in 1..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * k as f64 / nf).cos();
        let mut converged = false;
        let mut step = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITER {
            let (l, lm1) = legendre_pair(n, x);
            let dl = nf * (x * l - lm1) / (x * x - 1.0);
            let d2l = (2.0 * x * dl - nf * (nf + 1.0) * l) / (1.0 - x * x);
            step = dl / d2l;
            x -= step;
            if step.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(FbpError::Quadrature {
                rule: "gauss-lobatto",
                order: n,
                node: k,
                last_step: step,
            });
        }
        if 2 * k == n {
            x = 0.0;
        }
        let l = legendre_eval(n, x);
        let w = endpoint_weight / (l * l);
        nodes[n - k] = x;
        nodes[k] = -x;
        weights[n - k] = w;
        weights[k] = w;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        kind: QuadratureKind::GaussLobatto,
    })
}

/// Combination coefficients `(beta_i, gamma_i)` with
/// `p_i = L_i - beta_i L_{i+1} - gamma_i L_{i+2}`.
#[inline]
fn trial_coefficients(i: usize) -> (f64, f64) {
    let i = i as f64;
    let beta = (2.0 * i + 3.0) / ((i + 2.0) * (i + 2.0));
    let r = (i + 1.0) / (i + 2.0);
    (beta, r * r)
}

/// Value of trial function `i` at reference coordinate `x`.
pub fn trial_eval(i: usize, x: f64) -> f64 {
    let t = LegendreTable::new(i + 2, x);
    let (b, g) = trial_coefficients(i);
    t.values[i] - b * t.values[i + 1] - g * t.values[i + 2]
}

/// `d p_i / dx`.
pub fn trial_deriv(i: usize, x: f64) -> f64 {
    let t = LegendreTable::new(i + 2, x);
    let (b, g) = trial_coefficients(i);
    t.d1[i] - b * t.d1[i + 1] - g * t.d1[i + 2]
}

/// `d^2 p_i / dx^2`.
pub fn trial_second_deriv(i: usize, x: f64) -> f64 {
    let t = LegendreTable::new(i + 2, x);
    let (b, g) = trial_coefficients(i);
    t.d2[i] - b * t.d2[i + 1] - g * t.d2[i + 2]
}

/// Maps `rho in [0, 1]` to `x in [-1, 1]`.
#[inline]
pub fn rho_to_x(rho: f64) -> f64 {
    2.0 * rho - 1.0
}

#[inline]
pub fn x_to_rho(x: f64) -> f64 {
    0.5 * (x + 1.0)
}

/// Trial values and `rho`-derivatives of `p_0..=p_N` at one physical point.
#[derive(Debug, Clone)]
pub struct TrialSample {
    pub values: Vec<f64>,
    pub d_rho: Vec<f64>,
    pub d2_rho: Vec<f64>,
}

/// The degree-`N` trial basis with its Gauss collocation nodes and cached
/// collocation matrices (built once, reused every time step).
#[derive(Debug, Clone)]
pub struct TrialBasis {
    degree: usize,
    rule: QuadratureRule,
    rho_nodes: Vec<f64>,
    values: DMatrix<f64>,
    d_rho: DMatrix<f64>,
    laplacian: DMatrix<f64>,
}

impl TrialBasis {
    pub fn new(degree: usize) -> Result<Self> {
        let rule = gauss_rule(degree)?;
        let rho_nodes: Vec<f64> = rule.nodes.iter().map(|&x| x_to_rho(x)).collect();
        let m = degree + 1;
        let mut values = DMatrix::zeros(m, m);
        let mut d_rho = DMatrix::zeros(m, m);
        let mut laplacian = DMatrix::zeros(m, m);
        for (i, &rho) in rho_nodes.iter().enumerate() {
            let s = sample_trial(degree, rho);
            for j in 0..m {
                values[(i, j)] = s.values[j];
                d_rho[(i, j)] = s.d_rho[j];
                laplacian[(i, j)] = s.d2_rho[j] + 2.0 * s.d_rho[j] / rho;
            }
        }
        Ok(TrialBasis {
            degree,
            rule,
            rho_nodes,
            values,
            d_rho,
            laplacian,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The Gauss rule whose nodes are the collocation points.
    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Collocation points in physical coordinates.
    pub fn rho_nodes(&self) -> &[f64] {
        &self.rho_nodes
    }

    /// `values[(i, j)] = p_j(rho_i)`.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// `d_rho[(i, j)] = d p_j / d rho at rho_i`.
    pub fn d_rho(&self) -> &DMatrix<f64> {
        &self.d_rho
    }

    /// `laplacian[(i, j)] = (p_j'' + 2 p_j' / rho)(rho_i)`.
    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    pub fn sample(&self, rho: f64) -> TrialSample {
        sample_trial(self.degree, rho)
    }
}

fn sample_trial(degree: usize, rho: f64) -> TrialSample {
    let x = rho_to_x(rho);
    let t = LegendreTable::new(degree + 2, x);
    let m = degree + 1;
    let mut values = Vec::with_capacity(m);
    let mut d_rho = Vec::with_capacity(m);
    let mut d2_rho = Vec::with_capacity(m);
    for i in 0..m {
        let (b, g) = trial_coefficients(i);
        values.push(t.values[i] - b * t.values[i + 1] - g * t.values[i + 2]);
        d_rho.push(2.0 * (t.d1[i] - b * t.d1[i + 1] - g * t.d1[i + 2]));
        d2_rho.push(4.0 * (t.d2[i] - b * t.d2[i + 1] - g * t.d2[i + 2]));
    }
    TrialSample {
        values,
        d_rho,
        d2_rho,
    }
}

/// A field expanded in the trial basis: `u(rho) = sum_j coeffs[j] p_j(rho)`.
#[derive(Debug, Clone)]
pub struct SpectralField {
    basis: Arc<TrialBasis>,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn new(basis: Arc<TrialBasis>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(FbpError::Precondition(format!(
                "coefficient vector has length {}, basis expects {}",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(SpectralField { basis, coeffs })
    }

    pub fn zeros(basis: Arc<TrialBasis>) -> Self {
        let coeffs = vec![0.0; basis.len()];
        SpectralField { basis, coeffs }
    }

    pub fn basis(&self) -> &Arc<TrialBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value_at(&self, rho: f64) -> f64 {
        let s = self.basis.sample(rho);
        dot(&s.values, &self.coeffs)
    }

    pub fn deriv_at(&self, rho: f64) -> f64 {
        let s = self.basis.sample(rho);
        dot(&s.d_rho, &self.coeffs)
    }

    /// Values at the collocation nodes from the cached matrix.
    pub fn at_nodes(&self) -> Vec<f64> {
        mat_vec(self.basis.values(), &self.coeffs)
    }

    /// Spherical Laplacian at the collocation nodes.
    pub fn laplacian_at_nodes(&self) -> Vec<f64> {
        mat_vec(self.basis.laplacian(), &self.coeffs)
    }
}

/// Pointwise evaluation of the expansion at arbitrary `rho` points.
pub fn field_eval(field: &SpectralField, rho_points: &[f64]) -> Vec<f64> {
    rho_points.iter().map(|&r| field.value_at(r)).collect()
}

/// `u'' + (2/rho) u'` at each point. Points must lie in `(0, 1]`.
pub fn spherical_laplacian_eval(field: &SpectralField, rho_points: &[f64]) -> Result<Vec<f64>> {
    rho_points
        .iter()
        .map(|&rho| {
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(FbpError::Precondition(format!(
                    "spherical Laplacian needs rho in (0, 1], got {rho}"
                )));
            }
            let s = field.basis.sample(rho);
            Ok(dot(&s.d2_rho, &field.coeffs) + 2.0 * dot(&s.d_rho, &field.coeffs) / rho)
        })
        .collect()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}
