//! Polynomial nonlinearities `f(u) = sum a_k u^k` of degree 2 to 5.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::poly::Polynomial;

/// Sign in front of `f` inside the flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `u_t + (u_xx - f(u))_x = 0`
    Defocusing,
    /// `u_t + (u_xx + f(u))_x = 0`
    Focusing,
}

impl Convention {
    /// Factor `sigma` with `u_t + (u_xx + sigma f(u))_x = 0`.
    pub fn sign(self) -> f64 {
        match self {
            Convention::Defocusing => -1.0,
            Convention::Focusing => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NonlinearityRepr", into = "NonlinearityRepr")]
pub struct Nonlinearity {
    poly: Polynomial,
    convention: Convention,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NonlinearityRepr {
    /// `coefficients[k]` multiplies `u^k`.
    coefficients: Vec<f64>,
    convention: Convention,
}

impl TryFrom<NonlinearityRepr> for Nonlinearity {
    type Error = crate::error::Error;
    fn try_from(r: NonlinearityRepr) -> Result<Self> {
        Nonlinearity::new(r.coefficients, r.convention)
    }
}

impl From<Nonlinearity> for NonlinearityRepr {
    fn from(n: Nonlinearity) -> Self {
        NonlinearityRepr { coefficients: n.poly.coeffs().to_vec(), convention: n.convention }
    }
}

impl Nonlinearity {
    /// `coefficients[k]` multiplies `u^k`; the degree must lie in `2..=5`.
    pub fn new(coefficients: impl Into<Vec<f64>>, convention: Convention) -> Result<Self> {
        let coefficients = coefficients.into();
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(invalid("nonlinearity coefficients must be finite"));
        }
        let poly = Polynomial::new(coefficients);
        match poly.degree() {
            Some(d) if (2..=5).contains(&d) => Ok(Self { poly, convention }),
            d => Err(invalid(format!("nonlinearity degree must be between 2 and 5, got {d:?}"))),
        }
    }

    pub(crate) fn from_poly(poly: Polynomial, convention: Convention) -> Result<Self> {
        Self::new(poly.coeffs().to_vec(), convention)
    }

    /// Defocusing cubic `f(u) = u^3`.
    pub fn cubic() -> Self {
        Self::new(vec![0.0, 0.0, 0.0, 1.0], Convention::Defocusing).expect("valid")
    }

    /// Focusing Gardner nonlinearity `u^2 - beta u^3`.
    pub fn gardner(beta: f64) -> Self {
        Self::new(vec![0.0, 0.0, 1.0, -beta], Convention::Focusing).expect("valid")
    }

    /// Pure power `u^p`.
    pub fn power(p: usize, convention: Convention) -> Result<Self> {
        let mut c = vec![0.0; p + 1];
        c[p] = 1.0;
        Self::new(c, convention)
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn with_convention(&self, convention: Convention) -> Self {
        Self { poly: self.poly.clone(), convention }
    }

    pub fn degree(&self) -> usize {
        self.poly.degree().expect("degree checked at construction")
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.poly.coeff(k)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.poly.eval(s)
    }

    /// `f^(order)(s)` computed from the exact coefficient recursion.
    pub fn derivative(&self, s: f64, order: u32) -> f64 {
        let mut acc = 0.0;
        for k in (order as usize..self.poly.coeffs().len()).rev() {
            let falling: f64 = (0..order as usize).map(|i| (k - i) as f64).product();
            acc = acc * s + falling * self.poly.coeff(k);
        }
        acc
    }

    /// `int_0^s f`.
    pub fn antiderivative(&self, s: f64) -> f64 {
        self.poly.antiderivative().eval(s)
    }

    /// Flux contribution `sigma f(u)`.
    pub fn signed(&self, s: f64) -> f64 {
        self.convention.sign() * self.eval(s)
    }

    /// Pure power `p` with unit coefficient, if that is what this is.
    pub fn as_pure_power(&self) -> Option<usize> {
        let d = self.degree();
        let pure = self.poly.coeffs()[..d].iter().all(|&c| c == 0.0) && self.poly.coeff(d) == 1.0;
        pure.then_some(d)
    }

    /// `beta` if this is exactly `u^2 - beta u^3` with `beta > 0`.
    pub fn as_gardner(&self) -> Option<f64> {
        let c = self.poly.coeffs();
        let shape = c.len() == 4 && c[0] == 0.0 && c[1] == 0.0 && c[2] == 1.0 && c[3] < 0.0;
        shape.then(|| -c[3])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_quartic_source() {
        // f = s^4 - 4 b s^3 + 6 b^2 s^2
        let b = 0.7;
        let f = Nonlinearity::new(vec![0.0, 0.0, 6.0 * b * b, -4.0 * b, 1.0], Convention::Defocusing).unwrap();
        assert!(f.derivative(b, 1).abs() > 0.0);
        assert!((f.derivative(b, 2) - (12.0 * b * b - 24.0 * b * b + 12.0 * b * b)).abs() < 1e-14);
        assert!(f.derivative(b, 3).abs() < 1e-14);
        assert_eq!(f.derivative(b, 4), 24.0);
        assert_eq!(f.derivative(b, 5), 0.0);
    }

    #[test]
    fn degree_bounds_enforced() {
        assert!(Nonlinearity::new(vec![0.0, 1.0], Convention::Focusing).is_err());
        assert!(Nonlinearity::new(vec![0.0; 7].into_iter().chain([1.0]).collect::<Vec<_>>(), Convention::Focusing).is_err());
        assert!(Nonlinearity::power(5, Convention::Focusing).is_ok());
    }

    #[test]
    fn recognizers() {
        assert_eq!(Nonlinearity::gardner(0.3).as_gardner(), Some(0.3));
        assert_eq!(Nonlinearity::cubic().as_pure_power(), Some(3));
        assert_eq!(Nonlinearity::gardner(0.3).as_pure_power(), None);
    }

    #[test]
    fn json_round_trip() {
        let f = Nonlinearity::gardner(0.5);
        let s = serde_json::to_string(&f).unwrap();
        let g: Nonlinearity = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
        assert!(serde_json::from_str::<Nonlinearity>(r#"{"coefficients":[0,1],"convention":"focusing"}"#).is_err());
    }
}
