//! Dense real polynomials in the monomial basis, with the handful of
//! operations the profile and nonlinearity code needs.

use serde::{Deserialize, Serialize};

/// `coeffs[k]` multiplies `s^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut p = Self { coeffs: coeffs.into() };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(&c) if c == 0.0) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect::<Vec<_>>(),
        )
    }

    pub fn nth_derivative(&self, order: u32) -> Polynomial {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Polynomial {
        let mut c = vec![0.0];
        c.extend(self.coeffs.iter().enumerate().map(|(k, &a)| a / (k as f64 + 1.0)));
        Polynomial::new(c)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect::<Vec<_>>())
    }

    pub fn scale(&self, a: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| a * c).collect::<Vec<_>>())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    /// `p(a + b s)` expanded in `s`.
    pub fn compose_affine(&self, a: f64, b: f64) -> Polynomial {
        let lin = Polynomial::new(vec![a, b]);
        let mut out = Polynomial::zero();
        let mut power = Polynomial::new(vec![1.0]);
        for &c in &self.coeffs {
            out = out.add(&power.scale(c));
            power = power.mul(&lin);
        }
        out
    }

    /// Synthetic division by `(s - r)`; the remainder is returned second.
    pub fn deflate(&self, r: f64) -> (Polynomial, f64) {
        if self.coeffs.is_empty() {
            return (Polynomial::zero(), 0.0);
        }
        let n = self.coeffs.len();
        let mut q = vec![0.0; n.saturating_sub(1)];
        let mut acc = 0.0;
        for k in (0..n).rev() {
            acc = acc * r + self.coeffs[k];
            if k > 0 {
                q[k - 1] = acc;
            }
        }
        (Polynomial::new(q), acc)
    }

    /// Real roots in `[a, b]` located by sign changes on a uniform scan and
    /// refined by bisection. Roots of even multiplicity are invisible here.
    pub fn roots_in(&self, a: f64, b: f64, scan: usize) -> Vec<f64> {
        let mut roots = Vec::new();
        if self.degree().unwrap_or(0) == 0 || !(b > a) {
            return roots;
        }
        let h = (b - a) / scan as f64;
        let mut x0 = a;
        let mut f0 = self.eval(x0);
        if f0 == 0.0 {
            roots.push(x0);
        }
        for i in 1..=scan {
            let x1 = if i == scan { b } else { a + i as f64 * h };
            let f1 = self.eval(x1);
            if f1 == 0.0 {
                roots.push(x1);
            } else if f0 != 0.0 && f0.signum() != f1.signum() {
                roots.push(self.bisect(x0, x1));
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }

    fn bisect(&self, mut lo: f64, mut hi: f64) -> f64 {
        let flo = self.eval(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = self.eval(mid);
            if fm == 0.0 {
                return mid;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Cauchy bound: every real root lies in `[-R, R]`.
    pub fn root_bound(&self) -> f64 {
        let Some(deg) = self.degree() else { return 0.0 };
        if deg == 0 {
            return 0.0;
        }
        let lead = self.coeffs[deg].abs();
        1.0 + self.coeffs[..deg].iter().map(|c| c.abs() / lead).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn deflation_recovers_factor() {
        // (s - 1)(s + 2)(s - 3) = s^3 - 2 s^2 - 5 s + 6
        let p = Polynomial::new(vec![6.0, -5.0, -2.0, 1.0]);
        let (q, rem) = p.deflate(3.0);
        assert!(rem.abs() < 1e-14);
        assert_eq!(q.coeffs(), &[-2.0, 1.0, 1.0]);
        let roots = p.roots_in(-p.root_bound(), p.root_bound(), 1000);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((r - e).abs() < 1e-12);
        }
    }

    #[test]
    fn antiderivative_then_derivative() {
        let p = Polynomial::new(vec![1.0, -2.0, 0.5, 3.0]);
        assert_eq!(p.antiderivative().derivative(), p);
        assert_eq!(p.antiderivative().eval(0.0), 0.0);
    }

    proptest! {
        #[test]
        fn affine_composition_matches_evaluation(
            c in proptest::collection::vec(-3.0f64..3.0, 1..6),
            a in -2.0f64..2.0, b in -2.0f64..2.0, s in -2.0f64..2.0,
        ) {
            let p = Polynomial::new(c);
            let q = p.compose_affine(a, b);
            let lhs = q.eval(s);
            let rhs = p.eval(a + b * s);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        }
    }
}
