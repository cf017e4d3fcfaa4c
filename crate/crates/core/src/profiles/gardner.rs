//! Gardner solitons, the even 2-kink, and the soliton identity checks.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::Grid;
use crate::profiles::kink;

/// Largest admissible fraction of the critical speed `2/(9 beta)`.
pub const CRITICAL_FRACTION: f64 = 1.0 - 1e-6;

/// Critical speed `2/(9 beta)` above which no localized soliton exists.
pub fn critical_speed(beta: f64) -> f64 {
    2.0 / (9.0 * beta)
}

pub fn check_parameters(c: f64, beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    if !(c > 0.0) {
        return Err(invalid(format!("soliton speed must be positive, got {c}")));
    }
    if c > CRITICAL_FRACTION * critical_speed(beta) {
        return Err(invalid(format!(
            "soliton speed {c} is not below 2/(9 beta) = {} (accepted up to a factor {CRITICAL_FRACTION})",
            critical_speed(beta)
        )));
    }
    Ok(())
}

/// `rho = (1 - 9 beta c / 2)^{1/2}`.
pub fn rho(c: f64, beta: f64) -> f64 {
    (1.0 - 4.5 * beta * c).sqrt()
}

/// `Q_{c,beta}(s) = 3c / (1 + rho cosh(sqrt(c) s))`, written to avoid overflow.
pub fn value(c: f64, beta: f64, s: f64) -> f64 {
    let r = rho(c, beta);
    let a = c.sqrt() * s.abs();
    if a > 40.0 {
        let e = (-a).exp();
        return 3.0 * c * 2.0 * e / (2.0 * e + r * (1.0 + e * e));
    }
    3.0 * c / (1.0 + r * a.cosh())
}

/// `d^order Q / ds^order` for `order <= 4`.
pub fn derivative(c: f64, beta: f64, s: f64, order: u32) -> f64 {
    let q = value(c, beta, s);
    let q1 = || {
        let r = rho(c, beta);
        let a = c.sqrt() * s;
        if a.abs() > 40.0 {
            // -3 c rho sqrt(c) sinh / (1 + rho cosh)^2 with cosh ~ sinh ~ e^{|a|}/2
            let e = (-a.abs()).exp();
            let den = 2.0 * e + r * (1.0 + e * e);
            return -a.signum() * 3.0 * c * r * c.sqrt() * 2.0 * e * (1.0 - e * e) / (den * den);
        }
        let d = 1.0 + r * a.cosh();
        -3.0 * c * r * c.sqrt() * a.sinh() / (d * d)
    };
    match order {
        0 => q,
        1 => q1(),
        2 => c * q - q * q + beta * q * q * q,
        3 => (c - 2.0 * q + 3.0 * beta * q * q) * q1(),
        4 => {
            let d1 = q1();
            let d2 = c * q - q * q + beta * q * q * q;
            (c - 2.0 * q + 3.0 * beta * q * q) * d2 + (-2.0 + 6.0 * beta * q) * d1 * d1
        }
        _ => panic!("Gardner soliton derivatives are provided up to order 4"),
    }
}

/// `partial_c Q_{c,beta}(s)` from the closed-form scaling identity.
pub fn dc(c: f64, beta: f64, s: f64) -> f64 {
    let r2 = 1.0 - 4.5 * beta * c;
    let q = value(c, beta, s);
    let q1 = derivative(c, beta, s, 1);
    ((1.0 + 9.0 * beta * c / (4.0 * r2)) * q - 3.0 * beta / (4.0 * r2) * q * q + 0.5 * s * q1) / c
}

/// `partial_c (1/2) int Q^2 = 9 sqrt(c) / (2 - 9 beta c)`.
pub fn weinstein_derivative(c: f64, beta: f64) -> f64 {
    9.0 * c.sqrt() / (2.0 - 9.0 * beta * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GardnerSoliton {
    pub c: f64,
    pub beta: f64,
    /// Profile is `Q(x + x0)`, so the center sits at `-x0`.
    pub x0: f64,
    pub rho: f64,
}

impl GardnerSoliton {
    pub fn new(c: f64, beta: f64, x0: f64) -> Result<Self> {
        check_parameters(c, beta)?;
        Ok(Self { c, beta, x0, rho: rho(c, beta) })
    }

    pub fn centered_at(c: f64, beta: f64, center: f64) -> Result<Self> {
        Self::new(c, beta, -center)
    }

    pub fn center(&self) -> f64 {
        -self.x0
    }

    pub fn eval(&self, x: f64) -> f64 {
        value(self.c, self.beta, x + self.x0)
    }

    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        derivative(self.c, self.beta, x + self.x0, order)
    }

    pub fn amplitude(&self) -> f64 {
        3.0 * self.c / (1.0 + self.rho)
    }
}

pub fn eval_gardner_soliton(c: f64, beta: f64, x0: f64, x: f64) -> Result<f64> {
    Ok(GardnerSoliton::new(c, beta, x0)?.eval(x))
}

/// Constants of the even 2-kink: background `b`, speed `c_tilde`, half-width `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvenTwoKink {
    pub beta: f64,
    pub c: f64,
    pub b: f64,
    pub c_tilde: f64,
    pub x0: f64,
}

impl EvenTwoKink {
    pub fn new(beta: f64, c: f64) -> Result<Self> {
        check_parameters(c, beta)?;
        let b = background(beta);
        let c_tilde = 1.0 / (3.0 * beta) - c;
        let x0 = (3.0 * (beta * c).sqrt() / std::f64::consts::SQRT_2).atanh() / c.sqrt();
        Ok(Self { beta, c, b, c_tilde, x0 })
    }

    /// `b - [phi_{c/2}(x + c~ t + shift + 2 x0) - phi_{c/2}(x + c~ t + shift)]`.
    pub fn eval(&self, shift: f64, t: f64, x: f64) -> f64 {
        let s = x + self.c_tilde * t + shift;
        self.b - (kink::value(0.5 * self.c, s + 2.0 * self.x0) - kink::value(0.5 * self.c, s))
    }

    /// The same profile written as `b - sqrt(beta) Q_{c,beta}(x + c~ t + shift + x0)`.
    pub fn eval_via_soliton(&self, shift: f64, t: f64, x: f64) -> f64 {
        let s = x + self.c_tilde * t + shift;
        self.b - self.beta.sqrt() * value(self.c, self.beta, s + self.x0)
    }
}

/// Even background `b = 1 / (3 sqrt(beta))`.
pub fn background(beta: f64) -> f64 {
    1.0 / (3.0 * beta.sqrt())
}

pub fn eval_even_two_kink(beta: f64, c: f64, shift: f64, t: f64, x: f64) -> Result<f64> {
    Ok(EvenTwoKink::new(beta, c)?.eval(shift, t, x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub name: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub c: f64,
    pub beta: f64,
    pub points: usize,
    pub domain: f64,
    pub residuals: Vec<IdentityResidual>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.name == name).map(|r| r.residual)
    }
}

/// Domain used by [`gardner_identities_report`], in units of `1/sqrt(c)`.
pub const IDENTITY_DOMAIN_FACTOR: f64 = 60.0;

/// Integrals `int Q^k` for `k = 1..=4` on the given grid (soliton centered at 0).
pub fn power_integrals(grid: &Grid, c: f64, beta: f64) -> [f64; 4] {
    let q = grid.sample(|x| value(c, beta, x));
    let mut out = [0.0; 4];
    for (k, o) in out.iter_mut().enumerate() {
        *o = grid.integrate(&q.iter().map(|v| v.powi(k as i32 + 1)).collect::<Vec<_>>());
    }
    out
}

/// Residuals of the basic, integral, energy and Weinstein identities of the
/// Gardner soliton, computed on an independent `points`-point grid with
/// spectral derivatives.
pub fn gardner_identities_report(c: f64, beta: f64, points: usize) -> Result<IdentityReport> {
    check_parameters(c, beta)?;
    let domain = IDENTITY_DOMAIN_FACTOR / c.sqrt();
    let grid = Grid::new(points, domain)?;
    let q = grid.sample(|x| value(c, beta, x));
    let q1 = grid.derivative(&q, 1);
    let q2 = grid.derivative(&q, 2);
    let sup = |v: Vec<f64>| v.into_iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let elliptic = sup(q.iter().zip(&q2).map(|(&q, &d2)| d2 - (c * q - q * q + beta * q * q * q)).collect());
    let first_integral = sup(
        q.iter()
            .zip(&q1)
            .map(|(&q, &d1)| d1 * d1 - (c * q * q - 2.0 / 3.0 * q.powi(3) + 0.5 * beta * q.powi(4)))
            .collect(),
    );
    let [i1, i2, i3, i4] = power_integrals(&grid, c, beta);
    let integral_cubic = (beta * i3 - (-c * i1 + i2)).abs();
    let integral_quartic = (beta * i4 - (-4.0 / 3.0 * c * i2 + 10.0 / 9.0 * i3)).abs();
    let linear = (i1 - (1.5 * beta * i2 + 6.0 * c.sqrt())).abs();
    let kinetic = grid.integrate(&q1.iter().map(|d| d * d).collect::<Vec<_>>());
    let e_beta = 0.5 * kinetic - i3 / 3.0 + 0.25 * beta * i4;
    let energy = (e_beta - (2.0 / (3.0 * beta) * c.powf(1.5) - i2 / (9.0 * beta))).abs();
    let half_mass = |cc: f64| 0.5 * power_integrals(&grid, cc, beta)[1];
    let h = 1e-4 * c;
    let centered = |h: f64| (half_mass(c + h) - half_mass(c - h)) / (2.0 * h);
    let richardson = (4.0 * centered(0.5 * h) - centered(h)) / 3.0;
    let weinstein = (richardson - weinstein_derivative(c, beta)).abs();
    let residuals = [
        ("elliptic_equation", elliptic),
        ("first_integral", first_integral),
        ("cubic_integral", integral_cubic),
        ("quartic_integral", integral_quartic),
        ("linear_integral", linear),
        ("energy", energy),
        ("weinstein_derivative", weinstein),
    ]
    .into_iter()
    .map(|(n, r)| IdentityResidual { name: n.to_string(), residual: r })
    .collect();
    Ok(IdentityReport { c, beta, points, domain, residuals })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeinsteinCheck {
    pub value: f64,
    pub positive: bool,
}

/// Closed-form `partial_c (1/2) int Q^2` and its sign.
pub fn weinstein_check(c: f64, beta: f64) -> Result<WeinsteinCheck> {
    check_parameters(c, beta)?;
    let value = weinstein_derivative(c, beta);
    Ok(WeinsteinCheck { value, positive: value > 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn peak_and_domain() {
        let (c, beta) = (0.1, 1.0);
        let q = GardnerSoliton::new(c, beta, 1.3).unwrap();
        assert!((q.eval(-1.3) - 3.0 * c / (1.0 + rho(c, beta))).abs() < 1e-15);
        assert!(eval_gardner_soliton(2.0 / 9.0, 1.0, 0.0, 0.0).is_err());
        assert!(eval_gardner_soliton(0.3, 1.0, 0.0, 0.0).is_err());
        assert!(eval_gardner_soliton(0.1, 0.0, 0.0, 0.0).is_err());
        assert!(GardnerSoliton::new(CRITICAL_FRACTION * 2.0 / 9.0 * 0.999_999_9, 1.0, 0.0).is_ok());
    }

    #[test]
    fn kdv_limit() {
        let c: f64 = 0.4;
        for s in [-3.0, 0.0, 1.7] {
            let kdv = 1.5 * c / (0.5 * c.sqrt() * s).cosh().powi(2);
            assert!((value(c, 1e-14, s) - kdv).abs() < 1e-12);
        }
    }

    #[test]
    fn tail_rate_and_overflow_branch() {
        let (c, beta): (f64, f64) = (0.09, 2.0);
        let ratio = value(c, beta, 101.0) / value(c, beta, 100.0);
        assert!((ratio.ln() + c.sqrt()).abs() < 1e-10);
        let s = 39.99 / c.sqrt();
        let t = 40.01 / c.sqrt();
        let lhs = value(c, beta, s) * (c.sqrt() * (t - s)).exp().recip();
        assert!((lhs / value(c, beta, t) - 1.0).abs() < 1e-6);
        assert!(value(c, beta, 1e4).is_finite() && derivative(c, beta, -1e4, 1).is_finite());
    }

    #[test]
    fn derivatives_against_finite_differences() {
        let (c, beta) = (0.15, 0.8);
        let h = 1e-4;
        for s in [-4.0, -0.5, 0.3, 2.0] {
            for order in 1..=4 {
                let fd = (derivative(c, beta, s + h, order - 1) - derivative(c, beta, s - h, order - 1)) / (2.0 * h);
                assert!((fd - derivative(c, beta, s, order)).abs() < 1e-8, "order {order} at {s}");
            }
            let fdc = (value(c + h * 0.1, beta, s) - value(c - h * 0.1, beta, s)) / (0.2 * h);
            assert!((fdc - dc(c, beta, s)).abs() < 1e-7);
        }
    }

    #[test]
    fn two_kink_representations_agree() {
        let grid = Grid::new(2048, 200.0).unwrap();
        for (beta, c) in [(1.0, 0.05), (1.0, 0.2), (0.5, 0.3), (0.25, 0.8)] {
            let tk = EvenTwoKink::new(beta, c).unwrap();
            let mut err: f64 = 0.0;
            for &x in grid.x() {
                err = err.max((tk.eval(0.7, 1.5, x) - tk.eval_via_soliton(0.7, 1.5, x)).abs());
            }
            assert!(err < 1e-12, "(beta, c) = ({beta}, {c}): {err:e}");
            assert!((tk.eval(0.0, 0.0, 1e3) - tk.b).abs() < 1e-14);
            assert!((tk.eval(0.0, 0.0, -1e3) - tk.b).abs() < 1e-14);
        }
    }

    #[test]
    fn identities_hold_at_reference_points() {
        for (beta, c) in [(1.0, 0.05), (1.0, 0.1), (0.5, 0.3)] {
            let rep = gardner_identities_report(c, beta, 2048).unwrap();
            assert_eq!(rep.residuals.len(), 7);
            assert!(rep.max_residual() < 1e-8, "{rep:?}");
        }
    }

    #[test]
    fn weinstein_values() {
        let w = weinstein_check(0.1, 1.0).unwrap();
        assert!((w.value - 9.0 * 0.1f64.sqrt() / 1.1).abs() < 1e-15 && w.positive);
        let near = weinstein_check(0.999_998_9 * 2.0 / 9.0, 1.0).unwrap();
        assert!(near.value > 1e5);
        assert!(weinstein_check(0.3, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn soliton_is_positive_even_and_below_peak(
            beta in 0.05f64..5.0, frac in 0.01f64..0.99, s in -50.0f64..50.0,
        ) {
            let c = frac * critical_speed(beta);
            let q = GardnerSoliton::new(c, beta, 0.0).unwrap();
            let v = q.eval(s);
            prop_assert!(v > 0.0);
            prop_assert!((v - q.eval(-s)).abs() <= 1e-15 * q.amplitude());
            prop_assert!(v <= q.amplitude() * (1.0 + 1e-15));
            prop_assert!(q.rho > 0.0 && q.rho <= 1.0);
            // first-integral identity pointwise
            let d1 = q.derivative(s, 1);
            let rhs = c * v * v - 2.0 / 3.0 * v.powi(3) + 0.5 * beta * v.powi(4);
            prop_assert!((d1 * d1 - rhs).abs() <= 1e-12 * c * c * c);
        }
    }
}
