//! L1 weights for the Riemann–Liouville derivative and the history
//! convolution over cached diffusion terms.

use statrs::function::gamma::gamma;

use crate::error::{FbpError, Result};

/// Raw L1 weight `a_k = ((k+1)^{1-a} - k^{1-a}) / (t*^a Gamma(2-a))`.
pub fn a_coeff(k: usize, t_star: f64, alpha: f64) -> f64 {
    increment(k, alpha) / (t_star.powf(alpha) * gamma(2.0 - alpha))
}

/// Scheme-scaled weight `a'_k = (2 t* / 3) a_k`.
pub fn a_prime_coeff(k: usize, t_star: f64, alpha: f64) -> f64 {
    2.0 * t_star.powf(1.0 - alpha) * increment(k, alpha) / (3.0 * gamma(2.0 - alpha))
}

#[inline]
fn increment(k: usize, alpha: f64) -> f64 {
    let e = 1.0 - alpha;
    let k = k as f64;
    (k + 1.0).powf(e) - k.powf(e)
}

/// Precomputed `a_k` and `a'_k` for one run.
#[derive(Debug, Clone)]
pub struct FractionalWeights {
    alpha: f64,
    t_star: f64,
    a: Vec<f64>,
    a_prime: Vec<f64>,
    /// Treat `a'_n` as literally zero inside a length-`n` history sum.
    strict_aprime_n_zero: bool,
}

impl FractionalWeights {
    /// Weights `a_0..a_{steps-1}` and `a'_0..=a'_{steps}`.
    pub fn new(alpha: f64, t_star: f64, steps: usize, strict_aprime_n_zero: bool) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(FbpError::Precondition(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(t_star > 0.0) {
            return Err(FbpError::Precondition(format!("time step must be positive, got {t_star}")));
        }
        let g = gamma(2.0 - alpha);
        let a_scale = 1.0 / (t_star.powf(alpha) * g);
        let ap_scale = 2.0 * t_star.powf(1.0 - alpha) / (3.0 * g);
        let inc: Vec<f64> = (0..=steps).map(|k| increment(k, alpha)).collect();
        Ok(FractionalWeights {
            alpha,
            t_star,
            a: inc[..steps.max(1)].iter().map(|v| v * a_scale).collect(),
            a_prime: inc.iter().map(|v| v * ap_scale).collect(),
            strict_aprime_n_zero,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn a_prime(&self) -> &[f64] {
        &self.a_prime
    }

    pub fn strict_aprime_n_zero(&self) -> bool {
        self.strict_aprime_n_zero
    }
}

/// `(a'_k - a'_{k+1})` for `k = 0..n`.
///
/// By default `a'_n` takes its formula value; with the strict flag the last
/// difference becomes `a'_{n-1} - 0`.
pub fn history_weights(n: usize, weights: &FractionalWeights) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let ap = &weights.a_prime;
    if n >= ap.len() {
        return Err(FbpError::Precondition(format!(
            "history of length {n} exceeds precomputed weights ({})",
            ap.len() - 1
        )));
    }
    let mut out: Vec<f64> = (0..n).map(|k| ap[k] - ap[k + 1]).collect();
    if weights.strict_aprime_n_zero {
        out[n - 1] = ap[n - 1];
    }
    Ok(out)
}

/// Append-only cache of `(D / R_k^2) Laplacian(c_k)` at the collocation
/// nodes; entry `i` belongs to time level `t_{i+1}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HistoryCache {
    entries: Vec<Vec<f64>>,
    reads: u64,
}

impl HistoryCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<Vec<f64>>) -> Self {
        HistoryCache { entries, reads: 0 }
    }

    /// Restores a cache together with its read counter.
    pub fn from_parts(entries: Vec<Vec<f64>>, reads: u64) -> Self {
        HistoryCache { entries, reads }
    }

    pub fn push(&mut self, values: Vec<f64>) {
        self.entries.push(values);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    /// Number of cached vectors consumed by [`history_sum`] so far.
    pub fn reads(&self) -> u64 {
        self.reads
    }
}

/// `sum_k weights[k] * cache[t_{n-k}]` with `n = cache.len()`, accumulated
/// with compensated summation per node.
pub fn history_sum(cache: &mut HistoryCache, weights: &[f64], nodes: usize) -> Result<Vec<f64>> {
    let n = cache.len();
    if weights.len() != n {
        return Err(FbpError::Precondition(format!(
            "history sum got {} weights for {} cached steps",
            weights.len(),
            n
        )));
    }
    let mut acc = vec![KahanSum::default(); nodes];
    for (k, &wk) in weights.iter().enumerate() {
        let entry = &cache.entries[n - 1 - k];
        if entry.len() != nodes {
            return Err(FbpError::Precondition(format!(
                "cached entry has {} nodes, expected {nodes}",
                entry.len()
            )));
        }
        for (a, &v) in acc.iter_mut().zip(entry) {
            a.add(wk * v);
        }
    }
    cache.reads += n as u64;
    Ok(acc.into_iter().map(|a| a.total()).collect())
}

/// Kahan–Babuska (Neumaier) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}
