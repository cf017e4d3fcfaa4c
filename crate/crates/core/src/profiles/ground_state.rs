//! Positive even solitary waves of `Q'' - cQ + f(Q) = 0` by quadrature.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::ode::{self, OdeOptions};
use crate::poly::Polynomial;
use crate::profiles::tabulated::{TabulatedProfile, Tail};

#[derive(Debug, Clone, Serialize)]
pub struct GroundState {
    pub c: f64,
    /// Peak value `Q(0)`.
    pub amplitude: f64,
    /// Decay rate of the tails.
    pub tail_rate: f64,
    samples: TabulatedProfile,
    #[serde(skip)]
    f: Nonlinearity,
    /// `Q'^2 = Q^2 P(Q)`.
    #[serde(skip)]
    pot: Polynomial,
}

impl GroundState {
    pub fn eval(&self, s: f64) -> f64 {
        self.samples.eval(s.abs())
    }

    pub fn derivative(&self, s: f64, order: u32) -> Result<f64> {
        let (v, mut d) = self.samples.eval_with_derivative(s.abs());
        // The first integral is exact away from the turning point at the peak.
        let p = self.pot.eval(v);
        if p > 1e-6 * self.c {
            d = -v * p.sqrt();
        }
        match order {
            0 => Ok(v),
            1 => Ok(if s < 0.0 { -d } else { d }),
            2 => Ok(self.c * v - self.f.eval(v)),
            3 => {
                let d1 = if s < 0.0 { -d } else { d };
                Ok((self.c - self.f.derivative(v, 1)) * d1)
            }
            _ => Err(invalid("ground states expose derivatives up to order 3")),
        }
    }

    pub fn samples(&self) -> &TabulatedProfile {
        &self.samples
    }
}

/// `P(Q) = c - 2 G(Q) / Q^2` with `G = int_0^Q f`, so that `Q'^2 = Q^2 P(Q)`.
fn reduced_potential(f: &Nonlinearity, c: f64) -> Result<Polynomial> {
    let p = f.polynomial();
    if p.coeff(0) != 0.0 {
        return Err(invalid("ground states need f(0) = 0"));
    }
    let coeffs: Vec<f64> = (0..p.degree().unwrap_or(0))
        .map(|m| {
            let k = m + 1;
            let v = -2.0 * p.coeff(k) / (k as f64 + 1.0);
            if m == 0 { c + v } else { v }
        })
        .collect();
    Ok(Polynomial::new(coeffs))
}

/// Closed-form soliton of the pure power `f(s) = s^p`:
/// `(c (p+1)/2)^{1/(p-1)} sech^{2/(p-1)}((p-1) sqrt(c) s / 2)`.
pub fn pure_power_value(p: usize, c: f64, s: f64) -> f64 {
    let pm = p as f64 - 1.0;
    let amp = (c * (p as f64 + 1.0) / 2.0).powf(1.0 / pm);
    amp * (1.0 / (0.5 * pm * c.sqrt() * s).cosh()).powf(2.0 / pm)
}

/// Derivative in `s` of [`pure_power_value`].
pub fn pure_power_derivative(p: usize, c: f64, s: f64) -> f64 {
    let pm = p as f64 - 1.0;
    let a = 0.5 * pm * c.sqrt() * s;
    -c.sqrt() * a.tanh() * pure_power_value(p, c, s)
}

/// Positive, even, decaying solution of `Q'' - cQ + f(Q) = 0`, built from the
/// first integral `Q'^2 = c Q^2 - 2 int_0^Q f`.
pub fn solve_ground_state(f: &Nonlinearity, c: f64) -> Result<GroundState> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("soliton speed must be positive, got {c}")));
    }
    let pot = reduced_potential(f, c)?;
    let rate2 = pot.eval(0.0);
    if !(rate2 > 0.0) {
        return Err(Error::NoSoliton(format!("linear part leaves no exponential decay (P(0) = {rate2})")));
    }
    let bound = pot.root_bound();
    let q_max = *pot
        .roots_in(0.0, bound * (1.0 + 1e-12) + 1e-12, 50_000)
        .iter()
        .find(|&&r| r > 0.0)
        .ok_or_else(|| Error::NoSoliton(format!("c Q^2 - 2 int_0^Q f has no positive zero for c = {c}")))?;
    let slope_at_max = pot.derivative().eval(q_max);
    if !(slope_at_max < 0.0) {
        return Err(Error::NoSoliton(format!("degenerate turning point at Q = {q_max} (P' = {slope_at_max})")));
    }
    let tail_rate = rate2.sqrt();
    let opts = OdeOptions { rtol: 1e-13, atol: 1e-16 * q_max, max_step: 0.01 / tail_rate, max_steps: 2_000_000 };

    // Near the peak the first-order form is singular; use Q'' = cQ - f(Q).
    let top = ode::integrate(
        |_, y: &[f64; 2]| [y[1], c * y[0] - f.eval(y[0])],
        0.0,
        [q_max, 0.0],
        1e6 / tail_rate,
        opts,
        |_, y| y[0] <= 0.9 * q_max,
    )?;
    let &(s1, y1) = top.last().expect("nonempty");
    let slope = |q: f64| -q * pot.eval(q).max(0.0).sqrt();
    let cutoff = 1e-13 * q_max;
    let rest = ode::integrate(
        |_, y: &[f64; 1]| [slope(y[0])],
        s1,
        [y1[0]],
        s1 + 1e6 / tail_rate,
        opts,
        |_, y| y[0] < cutoff,
    )?;

    let mut xs: Vec<f64> = Vec::new();
    let mut vals = Vec::new();
    let mut ders = Vec::new();
    for (s, y) in &top {
        xs.push(*s);
        vals.push(y[0]);
        ders.push(y[1]);
    }
    for (s, y) in rest.iter().skip(1) {
        xs.push(*s);
        vals.push(y[0]);
        ders.push(slope(y[0]));
    }
    let samples = TabulatedProfile::new(
        xs,
        vals,
        ders,
        Tail { limit: q_max, rate: 0.0 },
        Tail { limit: 0.0, rate: tail_rate },
    );
    Ok(GroundState { c, amplitude: q_max, tail_rate, samples, f: f.clone(), pot })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Convention;
    use crate::profiles::gardner;

    fn max_err(gs: &GroundState, exact: impl Fn(f64) -> f64, range: f64) -> f64 {
        (-1000..=1000)
            .map(|i| {
                let s = i as f64 * range / 1000.0;
                (gs.eval(s) - exact(s)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn gardner_quadrature_matches_closed_form() {
        for (beta, c) in [(1.0, 0.05), (1.0, 0.2), (0.5, 0.3)] {
            let gs = solve_ground_state(&Nonlinearity::gardner(beta), c).unwrap();
            assert!((gs.amplitude - 3.0 * c / (1.0 + gardner::rho(c, beta))).abs() < 1e-13);
            let err = max_err(&gs, |s| gardner::value(c, beta, s), 40.0 / c.sqrt());
            assert!(err < 1e-9 * gs.amplitude, "beta {beta} c {c}: {err:e}");
            let d = gs.derivative(1.3, 1).unwrap();
            assert!((d - gardner::derivative(c, beta, 1.3, 1)).abs() < 1e-9 * gs.amplitude);
        }
    }

    #[test]
    fn quadratic_power_gives_kdv_soliton() {
        let f = Nonlinearity::power(2, Convention::Focusing).unwrap();
        for c in [0.25, 1.0] {
            let gs = solve_ground_state(&f, c).unwrap();
            let err = max_err(&gs, |s: f64| 1.5 * c / (0.5 * c.sqrt() * s).cosh().powi(2), 30.0 / c.sqrt());
            assert!(err < 1e-9, "{err:e}");
        }
    }

    #[test]
    fn quartic_power_exists_for_all_speeds() {
        let f = Nonlinearity::power(4, Convention::Focusing).unwrap();
        for c in [0.01, 1.0, 50.0] {
            let gs = solve_ground_state(&f, c).unwrap();
            assert!((gs.amplitude - (2.5 * c).powf(1.0 / 3.0)).abs() < 1e-12 * gs.amplitude);
            let err = max_err(&gs, |s| pure_power_value(4, c, s), 20.0 / c.sqrt());
            assert!(err < 1e-9 * gs.amplitude, "c {c}: {err:e}");
        }
    }

    #[test]
    fn pure_power_derivative_consistent() {
        let h = 1e-6;
        for s in [-1.0, 0.2, 2.5] {
            let fd = (pure_power_value(4, 0.7, s + h) - pure_power_value(4, 0.7, s - h)) / (2.0 * h);
            assert!((fd - pure_power_derivative(4, 0.7, s)).abs() < 1e-8);
        }
    }

    #[test]
    fn no_soliton_cases() {
        // Gardner above the critical speed.
        assert!(matches!(solve_ground_state(&Nonlinearity::gardner(1.0), 0.3), Err(Error::NoSoliton(_))));
        // Defocusing-type sign: f = -s^2 gives no turning point.
        let f = Nonlinearity::new(vec![0.0, 0.0, -1.0], Convention::Focusing).unwrap();
        assert!(matches!(solve_ground_state(&f, 1.0), Err(Error::NoSoliton(_))));
        assert!(solve_ground_state(&Nonlinearity::gardner(1.0), -1.0).is_err());
    }
}
