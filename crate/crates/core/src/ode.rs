//! Adaptive Dormand–Prince 5(4) integration for small ODE systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed |step|.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, max_step: 0.05, max_steps: 1_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (a, k) in terms {
        for i in 0..D {
            out[i] += h * a * k[i];
        }
    }
    out
}

/// Integrates `y' = rhs(t, y)` from `t0` in the direction of `t_end` until
/// `t_end` is reached or `stop(t, y)` returns true. Returns every accepted
/// step including the initial point.
pub fn integrate<const D: usize>(
    rhs: impl Fn(f64, &[f64; D]) -> [f64; D],
    t0: f64,
    y0: [f64; D],
    t_end: f64,
    opts: OdeOptions,
    stop: impl Fn(f64, &[f64; D]) -> bool,
) -> Result<Vec<(f64, [f64; D])>> {
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut out = vec![(t, y)];
    let mut h = opts.max_step.min((t_end - t0).abs()).max(f64::MIN_POSITIVE) * 0.1;
    let mut k1 = rhs(t, &y);
    for _ in 0..opts.max_steps {
        if (t_end - t) * dir <= 0.0 || stop(t, &y) {
            return Ok(out);
        }
        h = h.min(opts.max_step).min((t_end - t).abs());
        let hs = h * dir;
        let k2 = rhs(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(t + C5 * hs, &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = rhs(
            t + hs,
            &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = rhs(t + hs, &y_new);
        let mut err: f64 = 0.0;
        for i in 0..D {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            return Err(Error::Numerical(format!("non-finite ODE state at t = {t}")));
        }
        if err <= 1.0 {
            t += hs;
            y = y_new;
            k1 = k7;
            out.push((t, y));
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::Numerical(format!("ODE step size underflow at t = {t}")));
        }
    }
    Err(Error::Numerical("ODE integration exceeded the step budget".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let traj = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            2.0 * std::f64::consts::PI,
            OdeOptions::default(),
            |_, _| false,
        )
        .unwrap();
        let (t, y) = traj.last().unwrap();
        assert!((t - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
    }

    #[test]
    fn backward_integration_and_stop() {
        let traj = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], -10.0, OdeOptions::default(), |_, y| y[0] < 0.5)
            .unwrap();
        let (t, y) = traj.last().unwrap();
        assert!(y[0] < 0.5 && *t < -(2.0f64.ln()) + 1e-12);
        assert!((y[0] - t.exp()).abs() < 1e-12);
    }
}
