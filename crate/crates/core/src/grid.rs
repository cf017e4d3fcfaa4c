//! Periodic grids, Fourier differentiation and sampled fields.
//!
//! All spectral work in the crate goes through [`Grid`]: the FFT plans are
//! built once per grid and shared by cheap clones. Fields carry a
//! [`Background`] so that only their decaying part is ever differentiated or
//! shifted spectrally; a kink has a net jump and is handled analytically.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::profiles::kink;

struct GridInner {
    n: usize,
    length: f64,
    x: Vec<f64>,
    k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid on `[-length/2, length/2)`.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.inner.n)
            .field("length", &self.inner.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.inner.n == other.inner.n && self.inner.length == other.inner.length
    }
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(invalid(format!("grid size must be even and >= 4, got {n}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(invalid(format!("grid length must be positive, got {length}")));
        }
        let dx = length / n as f64;
        let x = (0..n).map(|i| -0.5 * length + i as f64 * dx).collect();
        let k = (0..n)
            .map(|i| {
                let m = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
                2.0 * PI * m / length
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner { n, length, x, k, fwd, inv }),
        })
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn dx(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    pub fn x(&self) -> &[f64] {
        &self.inner.x
    }

    /// Angular wavenumbers in FFT order. The Nyquist entry is `+pi/dx`.
    pub fn k(&self) -> &[f64] {
        &self.inner.k
    }

    pub fn k_max(&self) -> f64 {
        PI / self.dx()
    }

    pub fn is_power_of_two(&self) -> bool {
        self.inner.n.is_power_of_two()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.inner.x.iter().map(|&x| f(x)).collect()
    }

    /// Trapezoidal rule on the periodic box (spectrally accurate for smooth decaying data).
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.dx() * values.iter().sum::<f64>()
    }

    pub fn inner_product(&self, a: &[f64], b: &[f64]) -> f64 {
        self.dx() * a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>()
    }

    pub fn l2_norm(&self, values: &[f64]) -> f64 {
        self.inner_product(values, values).sqrt()
    }

    /// `(int z^2 + int z_x^2)^(1/2)` for periodic (decaying) data.
    pub fn h1_norm(&self, values: &[f64]) -> f64 {
        let dz = self.derivative(values, 1);
        (self.inner_product(values, values) + self.inner_product(&dz, &dz)).sqrt()
    }

    pub fn fft(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.n(), "sample count does not match grid");
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.inner.fwd.process(&mut buf);
        buf
    }

    pub fn fft_in_place(&self, buf: &mut [Complex64]) {
        self.inner.fwd.process(buf);
    }

    /// Normalized inverse transform; returns the real part.
    pub fn ifft(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inner.inv.process(&mut buf);
        let scale = 1.0 / self.n() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    pub fn ifft_in_place(&self, buf: &mut [Complex64]) {
        self.inner.inv.process(buf);
        let scale = 1.0 / self.n() as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
    }

    /// Spectral derivative of the given order. The Nyquist mode is dropped for
    /// odd orders so that real data stays real.
    pub fn derivative(&self, values: &[f64], order: u32) -> Vec<f64> {
        if order == 0 {
            return values.to_vec();
        }
        let mut hat = self.fft(values);
        let nyq = self.n() / 2;
        for (i, (c, &k)) in hat.iter_mut().zip(self.k()).enumerate() {
            if order % 2 == 1 && i == nyq {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            *c *= Complex64::new(0.0, k).powu(order);
        }
        self.ifft(hat)
    }

    /// Returns samples of `g(x) = f(x + delta)` by Fourier interpolation.
    pub fn shift(&self, values: &[f64], delta: f64) -> Vec<f64> {
        if delta == 0.0 {
            return values.to_vec();
        }
        let mut hat = self.fft(values);
        let nyq = self.n() / 2;
        for (i, (c, &k)) in hat.iter_mut().zip(self.k()).enumerate() {
            if i == nyq {
                *c *= (k * delta).cos();
            } else {
                *c *= Complex64::from_polar(1.0, k * delta);
            }
        }
        self.ifft(hat)
    }

    /// Mask keeping modes with `|k| <= fraction * k_max` (2/3 rule for `fraction = 2/3`).
    pub fn dealias_mask(&self, fraction: f64) -> Vec<bool> {
        let cut = fraction * self.k_max();
        self.k().iter().map(|k| k.abs() <= cut * (1.0 + 1e-12)).collect()
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Far-field reference a sampled field is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Background {
    /// Constant state `b` at both ends.
    Constant { value: f64 },
    /// Kink `sqrt(c) tanh(sqrt(c) (x - center) / sqrt(2))`.
    Kink { c: f64, center: f64 },
}

impl Background {
    pub const ZERO: Background = Background::Constant { value: 0.0 };

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Background::Constant { value } => value,
            Background::Kink { c, center } => kink::value(c, x - center),
        }
    }

    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        match *self {
            Background::Constant { .. } => 0.0,
            Background::Kink { c, center } => kink::derivative(c, x - center, order),
        }
    }

    /// Limits at `-inf` and `+inf`.
    pub fn limits(&self) -> (f64, f64) {
        match *self {
            Background::Constant { value } => (value, value),
            Background::Kink { c, .. } => (-c.sqrt(), c.sqrt()),
        }
    }

    /// Background of `x -> u(x + delta)`.
    pub fn shifted(&self, delta: f64) -> Background {
        match *self {
            Background::Constant { value } => Background::Constant { value },
            Background::Kink { c, center } => Background::Kink { c, center: center - delta },
        }
    }
}

/// A real function sampled on a grid together with its far-field background.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    background: Background,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>, background: Background) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {}",
                values.len(),
                grid.n()
            )));
        }
        if let Background::Kink { c, .. } = background {
            if !(c > 0.0) {
                return Err(invalid("kink background needs c > 0"));
            }
        }
        Ok(Self { grid, values, background })
    }

    pub fn from_fn(grid: &Grid, background: Background, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.sample(f);
        Self { grid: grid.clone(), values, background }
    }

    /// Decaying samples on a zero background.
    pub fn decaying(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid.clone(), values, Background::ZERO)
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.n()], background: Background::ZERO }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn background(&self) -> Background {
        self.background
    }

    pub fn background_values(&self) -> Vec<f64> {
        self.grid.sample(|x| self.background.value(x))
    }

    /// `u - background`, the part that lives in H^1.
    pub fn decaying_part(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(self.grid.x())
            .map(|(&u, &x)| u - self.background.value(x))
            .collect()
    }

    /// x-derivative of the given order: analytic on the background, spectral on the rest.
    pub fn derivative(&self, order: u32) -> Vec<f64> {
        let mut d = self.grid.derivative(&self.decaying_part(), order);
        if matches!(self.background, Background::Kink { .. }) {
            for (di, &x) in d.iter_mut().zip(self.grid.x()) {
                *di += self.background.derivative(x, order);
            }
        }
        d
    }

    /// The field `x -> u(x + delta)`.
    pub fn shifted(&self, delta: f64) -> Field {
        let bg = self.background.shifted(delta);
        let dec = self.grid.shift(&self.decaying_part(), delta);
        let values = dec
            .iter()
            .zip(self.grid.x())
            .map(|(&d, &x)| d + bg.value(x))
            .collect();
        Field { grid: self.grid.clone(), values, background: bg }
    }

    /// Shift by a whole number of cells; exact rotation of the samples.
    pub fn rotated(&self, cells: isize) -> Field {
        let n = self.grid.n() as isize;
        let values = (0..n)
            .map(|i| {
                let j = (i + cells).rem_euclid(n) as usize;
                let xi = self.grid.x()[i as usize];
                let xj = self.grid.x()[j];
                self.values[j] - self.background.value(xj) + self.background.shifted(cells as f64 * self.grid.dx()).value(xi)
            })
            .collect();
        Field {
            grid: self.grid.clone(),
            values,
            background: self.background.shifted(cells as f64 * self.grid.dx()),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn h1_norm_decaying(&self) -> f64 {
        self.grid.h1_norm(&self.decaying_part())
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Field> {
        Field::new(self.grid.clone(), values, self.background)
    }

    pub fn with_background(mut self, background: Background) -> Field {
        self.background = background;
        self
    }
}
