//! Maps between the defocusing kink equations and focusing soliton equations,
//! and the derived nonlinearity of a defocusing source around a background.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Background, Field};
use crate::nonlinearity::{Convention, Nonlinearity};
use crate::poly::Polynomial;
use crate::profiles::{gardner, kink};

/// Miura map `(3/2)c + [(3/sqrt 2) v_x - (3/2) v^2](t, x - 3ct)`: mKdV to
/// focusing KdV `u_t + (u_xx + u^2)_x = 0`.
pub fn miura(v: &Field, c: f64, t: f64) -> Result<Field> {
    if !(c > 0.0) {
        return Err(invalid(format!("Miura scaling must be positive, got {c}")));
    }
    let vx = v.derivative(1);
    let w: Vec<f64> = v
        .values()
        .iter()
        .zip(&vx)
        .map(|(&u, &ux)| 1.5 * c + 3.0 / std::f64::consts::SQRT_2 * ux - 1.5 * u * u)
        .collect();
    let shifted = v.grid().shift(&w, -3.0 * c * t);
    Field::decaying(v.grid(), shifted)
}

/// Gardner map `v - (3/2) sqrt(2 beta) v_x - (3/2) beta v^2`: Gardner to focusing KdV.
pub fn gardner_transform(v: &Field, beta: f64) -> Result<Field> {
    if !(beta > 0.0) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    let vx = v.derivative(1);
    let a = 1.5 * (2.0 * beta).sqrt();
    let w = v.values().iter().zip(&vx).map(|(&u, &ux)| u - a * ux - 1.5 * beta * u * u).collect();
    Field::new(v.grid().clone(), w, v.background())
}

/// Sign choice in `u = +-(b - sqrt(beta) v(t, x + t/(3 beta)))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvenBranch {
    /// `u = b - sqrt(beta) v`
    Upper,
    /// `u = -b + sqrt(beta) v`
    Lower,
}

impl EvenBranch {
    fn sign(self) -> f64 {
        match self {
            EvenBranch::Upper => 1.0,
            EvenBranch::Lower => -1.0,
        }
    }
}

/// Gardner solution `v` to the mKdV solution `u` over the constant background `+-b`.
pub fn even_background_map(v: &Field, beta: f64, t: f64, branch: EvenBranch) -> Result<Field> {
    if !(beta > 0.0) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    if v.background() != Background::ZERO {
        return Err(Error::BackgroundMismatch("the Gardner field must be decaying".into()));
    }
    let b = gardner::background(beta);
    let s = branch.sign();
    let moved = v.grid().shift(v.values(), t / (3.0 * beta));
    let u = moved.iter().map(|&w| s * (b - beta.sqrt() * w)).collect();
    Field::new(v.grid().clone(), u, Background::Constant { value: s * b })
}

/// Inverse of [`even_background_map`] at the same time.
pub fn even_background_unmap(u: &Field, beta: f64, t: f64, branch: EvenBranch) -> Result<Field> {
    if !(beta > 0.0) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    let b = gardner::background(beta);
    let s = branch.sign();
    match u.background() {
        Background::Constant { value } if (value - s * b).abs() <= 1e-12 * b => {}
        other => {
            return Err(Error::BackgroundMismatch(format!("expected constant background {}, got {other:?}", s * b)))
        }
    }
    let w: Vec<f64> = u.values().iter().map(|&v| (b - s * v) / beta.sqrt()).collect();
    Field::decaying(u.grid(), u.grid().shift(&w, -t / (3.0 * beta)))
}

/// Frame data of the odd decomposition `u(t,x) = phi_c(x - kink_center) + sqrt(beta) w(t, x + 3ct)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OddFrame {
    pub beta: f64,
    pub c: f64,
    pub t: f64,
    /// Kink center in the lab frame.
    pub kink_center: f64,
}

impl OddFrame {
    pub fn new(beta: f64, t: f64, kink_center: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(invalid(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { beta, c: 1.0 / (9.0 * beta), t, kink_center })
    }

    /// Offset `y - x = 3ct`.
    pub fn frame_offset(&self) -> f64 {
        3.0 * self.c * self.t
    }

    /// Kink center in the perturbation frame.
    pub fn kink_center_y(&self) -> f64 {
        self.kink_center + self.frame_offset()
    }
}

/// Splits a field over the kink `phi_c`, `c = 1/(9 beta)`, into the frame perturbation `w`.
pub fn odd_decompose(u: &Field, beta: f64, t: f64) -> Result<(Field, OddFrame)> {
    let Background::Kink { c, center } = u.background() else {
        return Err(Error::BackgroundMismatch(format!("expected a kink background, got {:?}", u.background())));
    };
    let frame = OddFrame::new(beta, t, center)?;
    if (c - frame.c).abs() > 1e-12 * frame.c {
        return Err(Error::BackgroundMismatch(format!(
            "kink limits +-{} do not match +-sqrt(1/(9 beta)) = +-{}",
            c.sqrt(),
            frame.c.sqrt()
        )));
    }
    let sb = beta.sqrt();
    let w: Vec<f64> = u.decaying_part().iter().map(|d| d / sb).collect();
    let moved = u.grid().shift(&w, -frame.frame_offset());
    Ok((Field::decaying(u.grid(), moved)?, frame))
}

/// Inverse of [`odd_decompose`].
pub fn odd_compose(w: &Field, frame: &OddFrame) -> Result<Field> {
    if w.background() != Background::ZERO {
        return Err(Error::BackgroundMismatch("the perturbation must be decaying".into()));
    }
    let sb = frame.beta.sqrt();
    let moved = w.grid().shift(w.values(), frame.frame_offset());
    let values = moved
        .iter()
        .zip(w.grid().x())
        .map(|(&d, &x)| kink::value(frame.c, x - frame.kink_center) + sb * d)
        .collect();
    Field::new(w.grid().clone(), values, Background::Kink { c: frame.c, center: frame.kink_center })
}

/// Right-hand side `3[(phi^2 - c) w + sqrt(beta)(phi + sqrt c) w^2]_y - (r / sqrt beta) phi'`
/// of the perturbation equation, with `phi = phi_c(y - kink_center_y)`.
pub fn odd_source(w: &Field, beta: f64, kink_center_y: f64, kink_rate: f64) -> Result<Vec<f64>> {
    if !(beta > 0.0) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    let c = 1.0 / (9.0 * beta);
    let (sc, sb) = (c.sqrt(), beta.sqrt());
    let grid = w.grid();
    let inner: Vec<f64> = w
        .values()
        .iter()
        .zip(grid.x())
        .map(|(&v, &y)| {
            let phi = kink::value(c, y - kink_center_y);
            3.0 * ((phi * phi - c) * v + sb * (phi + sc) * v * v)
        })
        .collect();
    let mut out = grid.derivative(&inner, 1);
    if kink_rate != 0.0 {
        for (o, &y) in out.iter_mut().zip(grid.x()) {
            *o -= kink_rate / sb * kink::derivative(c, y - kink_center_y, 1);
        }
    }
    Ok(out)
}

/// `Q_{2c}(y - p) - 3 sqrt(beta) phi_c(y - p) w + (3/2) sqrt(2 beta) w_y - (3/2) beta w^2`
/// with `p` the kink center in the perturbation frame; a focusing KdV solution.
pub fn kdv_map_odd(w: &Field, beta: f64, kink_center_y: f64) -> Result<Field> {
    if !(beta > 0.0) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    let c = 1.0 / (9.0 * beta);
    let wy = w.derivative(1);
    let a = 1.5 * (2.0 * beta).sqrt();
    let values = w
        .values()
        .iter()
        .zip(&wy)
        .zip(w.grid().x())
        .map(|((&v, &vy), &y)| {
            let s = y - kink_center_y;
            let phi = kink::value(c, s);
            let q = 3.0 * (c - phi * phi);
            q - 3.0 * beta.sqrt() * phi * v + a * vy - 1.5 * beta * v * v
        })
        .collect();
    Field::decaying(w.grid(), values)
}

/// Which real root of `b1^{k0-1} = -k0! / f^{(k0)}(b0)` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `k0 = 2`: the unique `b1`; `k0 = 3`: the positive root; `k0 = 4`: the real cube root.
    #[default]
    Principal,
    /// `k0 = 2`: `-b1` (leading coefficient becomes `-1`); `k0 = 3`: the negative root.
    Alternate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedNonlinearity {
    pub b0: f64,
    pub k0: u32,
    pub b1: f64,
    /// Focusing nonlinearity `-(1/b1)[f(b0 + b1 s) - f(b0) - b1 f'(b0) s]`.
    pub f_tilde: Nonlinearity,
    /// `f'(b0)`, the speed of the frame shift.
    pub shift_speed: f64,
}

/// Sum of absolute values of the terms in `f^(order)(s)`; sets the scale for
/// deciding whether a derivative vanishes.
fn derivative_scale(f: &Nonlinearity, s: f64, order: u32) -> f64 {
    let p = f.polynomial();
    (order as usize..p.coeffs().len())
        .map(|k| {
            let falling: f64 = (0..order as usize).map(|i| (k - i) as f64).product();
            falling * p.coeff(k).abs() * s.abs().powi((k - order as usize) as i32)
        })
        .sum()
}

/// Builds `b1`, `f~` and the shift speed for the defocusing source `f` around `b0`.
pub fn derived_nonlinearity(f: &Nonlinearity, b0: f64, branch: Branch) -> Result<DerivedNonlinearity> {
    if !b0.is_finite() {
        return Err(invalid("b0 must be finite"));
    }
    let mut k0 = None;
    for k in 2..=4u32 {
        let d = f.derivative(b0, k);
        if d.abs() > 1e-10 * derivative_scale(f, b0, k).max(f64::MIN_POSITIVE) {
            k0 = Some((k, d));
            break;
        }
    }
    let Some((k0, dk)) = k0 else {
        return Err(Error::Unsupported(format!(
            "f'', f''' and f'''' all vanish at b0 = {b0}; no admissible leading order"
        )));
    };
    let factorial = [1.0, 1.0, 2.0, 6.0, 24.0][k0 as usize];
    let rhs = -factorial / dk;
    let b1 = match (k0, branch) {
        (2, Branch::Principal) => rhs,
        (2, Branch::Alternate) => -rhs,
        (3, _) if rhs <= 0.0 => {
            return Err(Error::Hypothesis {
                hypothesis: 'b',
                detail: format!("k0 = 3 needs f'''(b0) < 0, got {dk}"),
            })
        }
        (3, Branch::Principal) => rhs.sqrt(),
        (3, Branch::Alternate) => -rhs.sqrt(),
        (4, _) => rhs.cbrt(),
        _ => unreachable!(),
    };
    let expanded = f.polynomial().compose_affine(b0, b1);
    let mut coeffs: Vec<f64> = expanded.coeffs().iter().map(|a| -a / b1).collect();
    coeffs.resize(6, 0.0);
    // Orders below k0 vanish identically (constant and linear parts are removed
    // by construction, the rest by the choice of k0); the order-k0 coefficient
    // is +-1 by the choice of b1. Snap the rounding residue.
    for c in coeffs.iter_mut().take(k0 as usize) {
        *c = 0.0;
    }
    let lead = coeffs[k0 as usize];
    if (lead.abs() - 1.0).abs() > 1e-9 {
        return Err(Error::Numerical(format!("leading coefficient {lead} is not +-1")));
    }
    coeffs[k0 as usize] = lead.signum();
    let f_tilde = Nonlinearity::from_poly(Polynomial::new(coeffs), Convention::Focusing)?;
    Ok(DerivedNonlinearity { b0, k0, b1, f_tilde, shift_speed: f.derivative(b0, 1) })
}

/// Transform-check record: residual series of one diagram edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformCheck {
    pub transform: String,
    pub initial_datum: String,
    pub horizon: f64,
    /// `(t, L2 distance)` pairs.
    pub residuals: Vec<(f64, f64)>,
}

impl TransformCheck {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }
}
