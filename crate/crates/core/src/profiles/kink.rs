//! Kinks: the closed-form cubic kink and quadrature-built generalized kinks.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::ode::{self, OdeOptions};
use crate::poly::Polynomial;
use crate::profiles::tabulated::{TabulatedProfile, Tail};

/// `sqrt(c) tanh(sqrt(c) s / sqrt(2))`.
pub fn value(c: f64, s: f64) -> f64 {
    c.sqrt() * (c.sqrt() * s / std::f64::consts::SQRT_2).tanh()
}

/// `d^order/ds^order` of [`value`], through the polynomial-in-tanh recursion.
pub fn derivative(c: f64, s: f64, order: u32) -> f64 {
    let a = c.sqrt() / std::f64::consts::SQRT_2;
    let t = (a * s).tanh();
    let one_minus = Polynomial::new(vec![a, 0.0, -a]);
    let mut p = Polynomial::new(vec![0.0, c.sqrt()]);
    for _ in 0..order {
        p = one_minus.mul(&p.derivative());
    }
    p.eval(t)
}

/// `E[phi_c] = (2 sqrt 2 / 3) c^{3/2}`.
pub fn energy(c: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 / 3.0 * c.powf(1.5)
}

/// `M[phi_c] = sqrt(2c)`.
pub fn mass(c: f64) -> f64 {
    (2.0 * c).sqrt()
}

/// Evaluates `sqrt(c) tanh(sqrt(c) (x + x0) / sqrt(2))`.
pub fn eval_kink(c: f64, x0: f64, x: f64) -> Result<f64> {
    check_c(c)?;
    Ok(value(c, x + x0))
}

/// Derivative of [`eval_kink`] in `x`.
pub fn eval_kink_derivative(c: f64, x0: f64, x: f64, order: u32) -> Result<f64> {
    check_c(c)?;
    Ok(derivative(c, x + x0, order))
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("kink scaling must be positive, got {c}")))
    }
}

/// Increasing heteroclinic profile `phi(x + x0)` connecting `limits.0` to `limits.1`.
#[derive(Debug, Clone, Serialize)]
pub struct KinkProfile {
    pub c: f64,
    pub x0: f64,
    pub limits: (f64, f64),
    /// Exponential rates of approach at `-inf` and `+inf`.
    pub tail_rates: (f64, f64),
    pub samples: Option<TabulatedProfile>,
    /// `phi'' = -g(phi)` and `phi' = (phi - phi_-)(phi_+ - phi) sqrt(H(phi))`;
    /// present for tabulated profiles.
    #[serde(skip)]
    g: Option<(Polynomial, Polynomial)>,
}

impl KinkProfile {
    pub fn closed_form(c: f64, x0: f64) -> Result<Self> {
        check_c(c)?;
        let r = (2.0 * c).sqrt();
        Ok(Self { c, x0, limits: (-c.sqrt(), c.sqrt()), tail_rates: (r, r), samples: None, g: None })
    }

    pub fn with_shift(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.samples {
            None => value(self.c, x + self.x0),
            Some(tab) => tab.eval(x + self.x0),
        }
    }

    /// Derivatives up to order 2 for tabulated profiles, any order in closed form.
    pub fn derivative(&self, x: f64, order: u32) -> Result<f64> {
        match (&self.samples, &self.g) {
            (None, _) => Ok(derivative(self.c, x + self.x0, order)),
            (Some(tab), Some((g, h))) => {
                let v = tab.eval(x + self.x0);
                let (lo, hi) = self.limits;
                match order {
                    0 => Ok(v),
                    1 => Ok(((v - lo) * (hi - v)).max(0.0) * h.eval(v).max(0.0).sqrt()),
                    2 => Ok(-g.eval(v)),
                    _ => Err(invalid("tabulated kinks expose derivatives up to order 2")),
                }
            }
            (Some(_), None) => unreachable!("tabulated kinks always carry g"),
        }
    }
}

/// Builds the increasing kink of `u_t + (u_xx - f(u))_x = 0` moving with speed `c`
/// to the left and leaving `phi_minus` at `-inf`.
pub fn solve_generalized_kink(f: &Nonlinearity, c: f64, phi_minus: f64) -> Result<KinkProfile> {
    check_c(c)?;
    let fp = f.polynomial();
    let k = c * phi_minus - f.eval(phi_minus);
    // g(s) = c s - f(s) - K, F = int_{phi_minus}^s g.
    let g = Polynomial::new(vec![-k, c]).add(&fp.scale(-1.0));
    let big_g = g.antiderivative();
    let big_f = big_g.add(&Polynomial::new(vec![-big_g.eval(phi_minus)]));

    let (g1, _) = g.deflate(phi_minus);
    let bound = g1.root_bound().max(phi_minus.abs()) + 1.0;
    let candidates: Vec<f64> = g1
        .roots_in(phi_minus, phi_minus + 2.0 * bound, 20_000)
        .into_iter()
        .filter(|&r| r > phi_minus)
        .collect();
    if candidates.is_empty() {
        return Err(Error::NoBracket(format!(
            "c s - f(s) takes the value {k:.6e} at no point above phi_minus = {phi_minus}"
        )));
    }
    let mut phi_plus = None;
    for &r in &candidates {
        let scale = (0..=200)
            .map(|i| big_f.eval(phi_minus + (r - phi_minus) * i as f64 / 200.0).abs())
            .fold(0.0, f64::max);
        if big_f.eval(r).abs() <= 1e-8 * scale.max(f64::MIN_POSITIVE) {
            phi_plus = Some(r);
            break;
        }
    }
    let phi_plus = phi_plus.ok_or_else(|| Error::Hypothesis {
        hypothesis: 'c',
        detail: format!(
            "no root of c s - f(s) = {k:.6e} above {phi_minus} also zeroes F (candidates {candidates:?})"
        ),
    })?;

    // Hypothesis (d): F < 0 strictly between the limits.
    let neg_2f = big_f.scale(-2.0);
    let (h, _) = neg_2f.deflate(phi_minus);
    let (h, _) = h.deflate(phi_minus);
    let (h, _) = h.deflate(phi_plus);
    let (h, _) = h.deflate(phi_plus);
    let width = phi_plus - phi_minus;
    let samples = 10_000;
    for i in 1..samples {
        let s = phi_minus + width * i as f64 / samples as f64;
        let direct = big_f.eval(s);
        let factored = h.eval(s);
        if factored <= 0.0 || direct >= 0.0 && direct.abs() > 1e-12 * width.powi(4) {
            return Err(Error::Hypothesis {
                hypothesis: 'd',
                detail: format!("F(s) = {direct:.3e} is not negative at s = {s}"),
            });
        }
    }
    let f2_minus = g.derivative().eval(phi_minus);
    let f2_plus = g.derivative().eval(phi_plus);
    if f2_minus > 0.0 || f2_plus > 0.0 {
        return Err(Error::Hypothesis {
            hypothesis: 'd',
            detail: format!("F'' at the limits is ({f2_minus:.3e}, {f2_plus:.3e}); F is not negative near them"),
        });
    }
    // Hypothesis (e): f'(phi_pm) > c.
    for (name, s) in [("phi_minus", phi_minus), ("phi_plus", phi_plus)] {
        let d = f.derivative(s, 1);
        if !(d > c) {
            return Err(Error::Hypothesis {
                hypothesis: 'e',
                detail: format!("f'({name}) = {d} does not exceed c = {c}"),
            });
        }
    }

    let rate = |s: f64| (f.derivative(s, 1) - c).sqrt();
    let (gm, gp) = (rate(phi_minus), rate(phi_plus));
    let slope = |p: f64| (p - phi_minus) * (phi_plus - p) * h.eval(p).max(0.0).sqrt();
    let cutoff = 1e-12 * width.max(1.0);
    let opts = OdeOptions { rtol: 1e-13, atol: 1e-15, max_step: 0.01 / gm.max(gp), max_steps: 2_000_000 };
    let mid = 0.5 * (phi_minus + phi_plus);
    let horizon = 200.0 / gm.min(gp);
    let right = ode::integrate(|_, y: &[f64; 1]| [slope(y[0])], 0.0, [mid], horizon, opts, |_, y| {
        phi_plus - y[0] < cutoff
    })?;
    let left = ode::integrate(|_, y: &[f64; 1]| [slope(y[0])], 0.0, [mid], -horizon, opts, |_, y| {
        y[0] - phi_minus < cutoff
    })?;
    let mut pts: Vec<(f64, f64)> = left.iter().rev().map(|(t, y)| (*t, y[0])).collect();
    pts.extend(right.iter().skip(1).map(|(t, y)| (*t, y[0])));
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let values: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let derivs = values.iter().map(|&v| slope(v)).collect();
    let tab = TabulatedProfile::new(
        xs,
        values,
        derivs,
        Tail { limit: phi_minus, rate: gm },
        Tail { limit: phi_plus, rate: gp },
    );
    Ok(KinkProfile {
        c,
        x0: 0.0,
        limits: (phi_minus, phi_plus),
        tail_rates: (gm, gp),
        samples: Some(tab),
        g: Some((g, h)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Convention;
    use proptest::prelude::*;

    #[test]
    fn closed_form_examples() {
        assert_eq!(eval_kink(1.0, 0.0, 0.0).unwrap(), 0.0);
        assert!((eval_kink(1.0, 0.0, 60.0).unwrap() - 1.0).abs() < 1e-15);
        let v = eval_kink(4.0, 0.0, 0.5).unwrap();
        assert!((v - 2.0 * (1.0 / 2f64.sqrt()).tanh()).abs() < 1e-15);
        assert!((v - 1.2177187300278276).abs() < 1e-14);
        assert!(eval_kink(0.0, 0.0, 1.0).is_err());
        assert!(eval_kink(-1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn derivative_recursion_against_explicit_formulas() {
        let c: f64 = 0.7;
        let a = (c / 2.0).sqrt();
        for s in [-2.0, -0.3, 0.0, 0.8, 3.0] {
            let sech2 = 1.0 / (a * s).cosh().powi(2);
            let t = (a * s).tanh();
            assert!((derivative(c, s, 1) - c.sqrt() * a * sech2).abs() < 1e-14);
            assert!((derivative(c, s, 2) + 2.0 * c.sqrt() * a * a * sech2 * t).abs() < 1e-14);
            // phi'' = phi^3 - c phi
            let p = value(c, s);
            assert!((derivative(c, s, 2) - (p.powi(3) - c * p)).abs() < 1e-14);
        }
    }

    #[test]
    fn cubic_generalized_kink_matches_closed_form() {
        let f = Nonlinearity::cubic();
        for c in [1.0, 0.3] {
            let k = solve_generalized_kink(&f, c, -c.sqrt()).unwrap();
            assert!((k.limits.0 + c.sqrt()).abs() < 1e-14);
            assert!((k.limits.1 - c.sqrt()).abs() < 1e-12);
            assert!((k.tail_rates.1 - (2.0 * c).sqrt()).abs() < 1e-10);
            let mut err: f64 = 0.0;
            let mut prev = f64::NEG_INFINITY;
            for i in -400..=400 {
                let x = i as f64 * 0.1 / c.sqrt();
                let v = k.eval(x);
                assert!(v > prev || (v - prev).abs() < 1e-15);
                prev = v;
                err = err.max((v - value(c, x)).abs());
                let d = k.derivative(x, 1).unwrap();
                err = err.max((d - derivative(c, x, 1)).abs());
            }
            assert!(err < 1e-9, "c = {c}: max deviation {err:e}");
        }
    }

    #[test]
    fn hypothesis_e_holds_for_cubic() {
        let f = Nonlinearity::cubic();
        assert!(f.derivative(1.0, 1) > 1.0 && f.derivative(-1.0, 1) > 1.0);
    }

    #[test]
    fn failures_are_reported_distinctly() {
        let f = Nonlinearity::cubic();
        // Starting off the kink limit: the chord hits a root where F != 0.
        match solve_generalized_kink(&f, 1.0, -0.5) {
            Err(Error::Hypothesis { hypothesis, .. }) => assert!(hypothesis == 'c' || hypothesis == 'd'),
            other => panic!("expected hypothesis failure, got {other:?}"),
        }
        // Focusing-like sign: f = -s^3 has no second level crossing.
        let g = Nonlinearity::new(vec![0.0, 0.0, 0.0, -1.0], Convention::Defocusing).unwrap();
        assert!(matches!(solve_generalized_kink(&g, 1.0, -1.0), Err(Error::NoBracket(_))));
    }

    #[test]
    fn quintic_source_kink_exists() {
        // f(s) = s^3 + s^5 has the symmetric kink between -a and a with c = a^2 + a^4.
        let f = Nonlinearity::new(vec![0.0, 0.0, 0.0, 1.0, 0.0, 1.0], Convention::Defocusing).unwrap();
        let a: f64 = 0.8;
        let c = a * a + a.powi(4);
        let k = solve_generalized_kink(&f, c, -a).unwrap();
        assert!((k.limits.1 - a).abs() < 1e-10);
        assert!(k.eval(0.0).abs() < 1e-12);
        assert!((k.eval(5.0) + k.eval(-5.0)).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn closed_form_is_increasing_and_bounded(c in 0.01f64..5.0, x in -20.0f64..20.0) {
            let v = eval_kink(c, 0.0, x).unwrap();
            prop_assert!(v.abs() <= c.sqrt());
            prop_assert!(eval_kink_derivative(c, 0.0, x, 1).unwrap() >= 0.0);
        }
    }
}
