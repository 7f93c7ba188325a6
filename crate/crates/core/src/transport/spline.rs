//! Not-a-knot cubic spline on a uniform grid over `[0, 1]`.

/// Interpolant through `values` at `rho_j = j / cells`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    h: f64,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    /// Needs at least two nodes. With three nodes the not-a-knot spline is
    /// the interpolating quadratic; with two it is linear.
    pub fn new(values: Vec<f64>) -> Self {
        assert!(values.len() >= 2, "spline needs at least two nodes");
        let n = values.len() - 1;
        let h = 1.0 / n as f64;
        let second = second_derivatives(&values, h);
        CubicSpline { h, values, second }
    }

    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.cells();
        let s = x / self.h;
        let i = (s.floor() as isize).clamp(0, n as isize - 1) as usize;
        (i, x - i as f64 * self.h)
    }

    /// Value at `x`, clamped into `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let (i, dx) = self.locate(x);
        if dx == 0.0 {
            return self.values[i];
        }
        if x == 1.0 {
            return self.values[self.cells()];
        }
        let h = self.h;
        let a = h - dx;
        let (mi, mj) = (self.second[i], self.second[i + 1]);
        (mi * a * a * a + mj * dx * dx * dx) / (6.0 * h)
            + (self.values[i] - mi * h * h / 6.0) * a / h
            + (self.values[i + 1] - mj * h * h / 6.0) * dx / h
    }

    /// First derivative at `x`.
    pub fn deriv(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let (i, dx) = self.locate(x);
        let h = self.h;
        let a = h - dx;
        let (mi, mj) = (self.second[i], self.second[i + 1]);
        (-mi * a * a + mj * dx * dx) / (2.0 * h) + (self.values[i + 1] - self.values[i]) / h
            - (mj - mi) * h / 6.0
    }

    /// `int_0^{rho_j} s^2 S(s) ds` for every node `j`, exact for the
    /// piecewise cubic (three-point Gauss per cell).
    pub fn cumulative_moment2(&self) -> Vec<f64> {
        const G: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
        const W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let n = self.cells();
        let mut out = Vec::with_capacity(n + 1);
        out.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let a = i as f64 * self.h;
            let mid = a + 0.5 * self.h;
            let mut cell = 0.0;
            for k in 0..3 {
                let s = mid + 0.5 * self.h * G[k];
                cell += W[k] * s * s * self.eval(s);
            }
            acc += 0.5 * self.h * cell;
            out.push(acc);
        }
        out
    }
}

fn second_derivatives(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len() - 1;
    let mut m = vec![0.0; n + 1];
    if n == 1 {
        return m;
    }
    let rhs = |i: usize| 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h);
    if n == 2 {
        let v = rhs(1) / 6.0;
        return vec![v; 3];
    }
    // Not-a-knot at rho_1 and rho_{n-1} folds the end rows into 6 M = r.
    m[1] = rhs(1) / 6.0;
    m[n - 1] = rhs(n - 1) / 6.0;
    if n > 3 {
        // Thomas algorithm on rows 2..=n-2 with M_1, M_{n-1} known.
        let len = n - 3;
        let mut diag = vec![4.0; len];
        let mut r: Vec<f64> = (2..=n - 2).map(rhs).collect();
        r[0] -= m[1];
        r[len - 1] -= m[n - 1];
        for k in 1..len {
            let factor = 1.0 / diag[k - 1];
            diag[k] -= factor;
            r[k] -= factor * r[k - 1];
        }
        let mut sol = vec![0.0; len];
        sol[len - 1] = r[len - 1] / diag[len - 1];
        for k in (0..len - 1).rev() {
            sol[k] = (r[k] - sol[k + 1]) / diag[k];
        }
        m[2..=n - 2].copy_from_slice(&sol);
    }
    m[0] = 2.0 * m[1] - m[2];
    m[n] = 2.0 * m[n - 1] - m[n - 2];
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample(cells: usize, f: impl Fn(f64) -> f64) -> CubicSpline {
        CubicSpline::new((0..=cells).map(|j| f(j as f64 / cells as f64)).collect())
    }

    #[test]
    fn reproduces_nodes() {
        let s = sample(17, |x| (3.0 * x).sin());
        for j in 0..=17 {
            let x = j as f64 / 17.0;
            assert_abs_diff_eq!(s.eval(x), (3.0 * x).sin(), epsilon = 1e-15);
        }
    }

    #[test]
    fn exact_for_cubics() {
        let f = |x: f64| 2.0 * x * x * x - 3.0 * x * x + 0.5 * x - 1.0;
        let df = |x: f64| 6.0 * x * x - 6.0 * x + 0.5;
        for cells in [3usize, 4, 5, 12, 200] {
            let s = sample(cells, f);
            for k in 0..=97 {
                let x = k as f64 / 97.0;
                assert_abs_diff_eq!(s.eval(x), f(x), epsilon = 1e-12);
                assert_abs_diff_eq!(s.deriv(x), df(x), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn small_grids() {
        let quad = sample(2, |x| x * x);
        assert_abs_diff_eq!(quad.eval(0.3), 0.09, epsilon = 1e-15);
        let lin = sample(1, |x| 1.0 + 2.0 * x);
        assert_abs_diff_eq!(lin.eval(0.25), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn converges_fourth_order() {
        let f = |x: f64| (2.0 * x).exp();
        let err = |cells| {
            let s = sample(cells, f);
            (0..=1000)
                .map(|k| {
                    let x = k as f64 / 1000.0;
                    (s.eval(x) - f(x)).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(20) / err(40);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn moment_of_linear() {
        // int_0^x s^2 * s ds = x^4 / 4
        let s = sample(10, |x| x);
        let m = s.cumulative_moment2();
        for (j, v) in m.iter().enumerate() {
            let x = j as f64 / 10.0;
            assert_abs_diff_eq!(*v, x.powi(4) / 4.0, epsilon = 1e-15);
        }
    }
}
