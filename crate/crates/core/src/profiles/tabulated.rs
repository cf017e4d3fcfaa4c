//! Tabulated monotone or localized profiles with cubic Hermite interpolation
//! and analytic exponential tails.

use serde::{Deserialize, Serialize};

/// `value(x) ~ limit + (anchor value - limit) e^{-rate |x - anchor|}` beyond the table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub limit: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedProfile {
    xs: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
    left: Tail,
    right: Tail,
}

impl TabulatedProfile {
    /// `xs` must be strictly increasing with at least two entries.
    pub fn new(xs: Vec<f64>, values: Vec<f64>, derivs: Vec<f64>, left: Tail, right: Tail) -> Self {
        assert!(xs.len() >= 2 && xs.len() == values.len() && xs.len() == derivs.len());
        debug_assert!(xs.windows(2).all(|w| w[1] > w[0]));
        Self { xs, values, derivs, left, right }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_tail(&self) -> Tail {
        self.left
    }

    pub fn right_tail(&self) -> Tail {
        self.right
    }

    pub fn support(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().expect("nonempty"))
    }

    /// Returns `(value, derivative)` at `x`.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len();
        if x <= self.xs[0] {
            let e = (self.left.rate * (x - self.xs[0])).exp();
            let a = self.values[0] - self.left.limit;
            return (self.left.limit + a * e, self.left.rate * a * e);
        }
        if x >= self.xs[n - 1] {
            let e = (-self.right.rate * (x - self.xs[n - 1])).exp();
            let a = self.values[n - 1] - self.right.limit;
            return (self.right.limit + a * e, -self.right.rate * a * e);
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.derivs[i] * h, self.derivs[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let dv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (v, dv)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubics_and_tails() {
        let xs: Vec<f64> = (0..11).map(|i| i as f64 * 0.3).collect();
        let f = |x: f64| x * x * x - 2.0 * x;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let p = TabulatedProfile::new(
            xs.clone(),
            xs.iter().map(|&x| f(x)).collect(),
            xs.iter().map(|&x| df(x)).collect(),
            Tail { limit: 0.0, rate: 1.0 },
            Tail { limit: 30.0, rate: 2.0 },
        );
        for x in [0.05, 0.71, 1.5, 2.99] {
            let (v, d) = p.eval_with_derivative(x);
            assert!((v - f(x)).abs() < 1e-12 && (d - df(x)).abs() < 1e-11);
        }
        let last = f(3.0);
        assert!((p.eval(4.0) - (30.0 + (last - 30.0) * (-2.0f64).exp())).abs() < 1e-12);
    }
}
