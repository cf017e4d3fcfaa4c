//! Pseudo-spectral time stepping for the gKdV family on periodic grids.
//!
//! The third-derivative term is integrated exactly in Fourier space and the
//! remaining terms with classical RK4 in the twisted variables (Lawson's
//! integrating-factor RK4), which is fourth order in time.

use std::io::{Read, Write};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Background, Field, Grid};
use crate::nonlinearity::Nonlinearity;
use crate::profiles::kink;

/// Right-hand side family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Equation {
    /// `u_t + (u_xx + sigma f(u))_x = 0` with the sign taken from the nonlinearity's convention.
    Plain { nonlinearity: Nonlinearity },
    /// Perturbation `w` of the kink `phi_c(y - p(t))`, `c = 1/(9 beta)`, in the frame
    /// where the Gardner part is `w_t + (w_yy + w^2 - beta w^3)_y`:
    ///
    /// `w_t + (w_yy + w^2 - beta w^3)_y = 3[(phi^2 - c) w + sqrt(beta)(phi + sqrt c) w^2]_y - (r / sqrt beta) phi'`
    ///
    /// with `p(t) = kink_center + (2c - r) t` and `r = kink_rate`.
    KinkPerturbation {
        beta: f64,
        /// Kink center in this frame at `t = 0`.
        kink_center: f64,
        /// Modulation velocity of the kink shift; zero in forward runs.
        #[serde(default)]
        kink_rate: f64,
    },
}

impl Equation {
    pub fn plain(nonlinearity: Nonlinearity) -> Self {
        Equation::Plain { nonlinearity }
    }

    pub fn kink_perturbation(beta: f64, kink_center: f64) -> Self {
        Equation::KinkPerturbation { beta, kink_center, kink_rate: 0.0 }
    }

    /// Kink center at time `t` (kink-perturbation mode).
    pub fn kink_center_at(&self, t: f64) -> Option<f64> {
        match *self {
            Equation::Plain { .. } => None,
            Equation::KinkPerturbation { beta, kink_center, kink_rate } => {
                let c = 1.0 / (9.0 * beta);
                Some(kink_center + (2.0 * c - kink_rate) * t)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let Equation::KinkPerturbation { beta, kink_center, kink_rate } = *self {
            if !(beta > 0.0 && beta.is_finite() && kink_center.is_finite() && kink_rate.is_finite()) {
                return Err(invalid("kink perturbation needs beta > 0 and finite kink data"));
            }
        }
        Ok(())
    }

    /// Flux `F(t, y, w)` with `w_t + w_yyy + F_y = source`.
    fn flux(&self, t: f64, x: &[f64], u: &[f64], out: &mut [f64]) {
        match self {
            Equation::Plain { nonlinearity } => {
                for (o, &v) in out.iter_mut().zip(u) {
                    *o = nonlinearity.signed(v);
                }
            }
            &Equation::KinkPerturbation { beta, .. } => {
                let c = 1.0 / (9.0 * beta);
                let (sc, sb) = (c.sqrt(), beta.sqrt());
                let p = self.kink_center_at(t).expect("kink mode");
                for ((o, &w), &y) in out.iter_mut().zip(u).zip(x) {
                    let phi = kink::value(c, y - p);
                    *o = w * w - beta * w * w * w - 3.0 * (phi * phi - c) * w - 3.0 * sb * (phi + sc) * w * w;
                }
            }
        }
    }

    /// `partial F / partial w`, used for the stability bound and residuals.
    fn flux_derivative(&self, t: f64, y: f64, w: f64) -> f64 {
        match self {
            Equation::Plain { nonlinearity } => nonlinearity.convention().sign() * nonlinearity.derivative(w, 1),
            &Equation::KinkPerturbation { beta, .. } => {
                let c = 1.0 / (9.0 * beta);
                let phi = kink::value(c, y - self.kink_center_at(t).expect("kink mode"));
                2.0 * w - 3.0 * beta * w * w - 3.0 * (phi * phi - c) - 6.0 * beta.sqrt() * (phi + c.sqrt()) * w
            }
        }
    }

    /// Explicit forcing term, present only for a modulated kink.
    fn source(&self, t: f64, y: f64) -> f64 {
        match *self {
            Equation::KinkPerturbation { beta, kink_rate, .. } if kink_rate != 0.0 => {
                let c = 1.0 / (9.0 * beta);
                let p = self.kink_center_at(t).expect("kink mode");
                -kink_rate / beta.sqrt() * kink::derivative(c, y - p, 1)
            }
            _ => 0.0,
        }
    }

    fn has_source(&self) -> bool {
        matches!(*self, Equation::KinkPerturbation { kink_rate, .. } if kink_rate != 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    /// Zero the top third of the spectrum in the nonlinear term.
    TwoThirds,
    None,
}

#[derive(Debug, Clone)]
pub struct EvolutionSpec {
    pub equation: Equation,
    pub grid: Grid,
    /// Signed time step; negative values run the flow backwards.
    pub dt: f64,
    /// Duration of the run (positive).
    pub horizon: f64,
    pub t0: f64,
    /// Snapshots are stored every this many steps (the last step is always stored).
    pub output_every: usize,
    pub dealias: Dealias,
    /// Abort when the sup norm exceeds this multiple of the initial sup norm.
    pub blowup_factor: f64,
}

/// Safety factor in `|dt| <= CFL / (k_max |F'(u)|)`; RK4 is stable on the
/// imaginary axis up to `2 sqrt 2`.
pub const STABILITY_CONSTANT: f64 = 2.8;

impl EvolutionSpec {
    pub fn new(equation: Equation, grid: Grid, dt: f64, horizon: f64) -> Result<Self> {
        equation.validate()?;
        if !grid.is_power_of_two() {
            return Err(invalid(format!("grid size {} is not a power of two", grid.n())));
        }
        if !(dt != 0.0 && dt.is_finite()) {
            return Err(invalid(format!("time step must be nonzero and finite, got {dt}")));
        }
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon must be nonnegative, got {horizon}")));
        }
        Ok(Self {
            equation,
            grid,
            dt,
            horizon,
            t0: 0.0,
            output_every: 1,
            dealias: Dealias::TwoThirds,
            blowup_factor: 50.0,
        })
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn with_output_every(mut self, steps: usize) -> Self {
        self.output_every = steps.max(1);
        self
    }

    /// Store snapshots at (approximately) this time spacing.
    pub fn with_output_interval(self, interval: f64) -> Self {
        let steps = (interval / self.dt.abs()).round().max(1.0) as usize;
        self.with_output_every(steps)
    }

    pub fn with_dealias(mut self, dealias: Dealias) -> Self {
        self.dealias = dealias;
        self
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt.abs() - 1e-9).ceil().max(0.0) as usize
    }

    /// Largest stable `|dt|` for the given initial data.
    pub fn stability_bound(&self, initial: &[f64]) -> f64 {
        let kmax = match self.dealias {
            Dealias::TwoThirds => 2.0 / 3.0 * self.grid.k_max(),
            Dealias::None => self.grid.k_max(),
        };
        let slope = self
            .grid
            .x()
            .iter()
            .zip(initial)
            .map(|(&y, &w)| self.equation.flux_derivative(self.t0, y, w).abs())
            .fold(0.0, f64::max);
        if slope == 0.0 {
            f64::INFINITY
        } else {
            STABILITY_CONSTANT / (kmax * slope)
        }
    }
}

pub type Trajectory = Vec<(f64, Field)>;

struct Stepper<'a> {
    spec: &'a EvolutionSpec,
    grid: &'a Grid,
    /// `e^{i k^3 dt}` and `e^{i k^3 dt/2}`.
    e_full: Vec<Complex64>,
    e_half: Vec<Complex64>,
    /// `-i k` times the dealiasing mask.
    dflux: Vec<Complex64>,
    mask: Vec<bool>,
    real: Vec<f64>,
    flux: Vec<f64>,
    buf: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a EvolutionSpec) -> Self {
        let grid = &spec.grid;
        let n = grid.n();
        let mask = match spec.dealias {
            Dealias::TwoThirds => grid.dealias_mask(2.0 / 3.0),
            Dealias::None => {
                let mut m = vec![true; n];
                m[n / 2] = false;
                m
            }
        };
        let phase = |h: f64| grid.k().iter().map(|&k| Complex64::from_polar(1.0, k * k * k * h)).collect();
        let dflux = grid
            .k()
            .iter()
            .zip(&mask)
            .map(|(&k, &m)| if m { Complex64::new(0.0, -k) } else { Complex64::new(0.0, 0.0) })
            .collect();
        Self {
            spec,
            grid,
            e_full: phase(spec.dt),
            e_half: phase(0.5 * spec.dt),
            dflux,
            mask,
            real: vec![0.0; n],
            flux: vec![0.0; n],
            buf: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Fourier transform of the non-dispersive right-hand side at `(t, u_hat)`.
    fn rhs(&mut self, t: f64, u_hat: &[Complex64], out: &mut [Complex64]) {
        self.buf.copy_from_slice(u_hat);
        self.grid.ifft_in_place(&mut self.buf);
        for (r, c) in self.real.iter_mut().zip(&self.buf) {
            *r = c.re;
        }
        self.spec.equation.flux(t, self.grid.x(), &self.real, &mut self.flux);
        for (b, &f) in self.buf.iter_mut().zip(&self.flux) {
            *b = Complex64::new(f, 0.0);
        }
        self.grid.fft_in_place(&mut self.buf);
        for ((o, b), d) in out.iter_mut().zip(&self.buf).zip(&self.dflux) {
            *o = b * d;
        }
        if self.spec.equation.has_source() {
            for (b, &y) in self.buf.iter_mut().zip(self.grid.x()) {
                *b = Complex64::new(self.spec.equation.source(t, y), 0.0);
            }
            self.grid.fft_in_place(&mut self.buf);
            for ((o, b), &m) in out.iter_mut().zip(&self.buf).zip(&self.mask) {
                if m {
                    *o += b;
                }
            }
        }
    }

    fn step(&mut self, t: f64, u: &mut [Complex64]) {
        let n = u.len();
        let dt = self.spec.dt;
        let zero = Complex64::new(0.0, 0.0);
        let mut k1 = vec![zero; n];
        let mut k2 = vec![zero; n];
        let mut k3 = vec![zero; n];
        let mut k4 = vec![zero; n];
        let mut stage = vec![zero; n];
        self.rhs(t, u, &mut k1);
        for i in 0..n {
            stage[i] = self.e_half[i] * (u[i] + 0.5 * dt * k1[i]);
        }
        self.rhs(t + 0.5 * dt, &stage, &mut k2);
        for i in 0..n {
            stage[i] = self.e_half[i] * u[i] + 0.5 * dt * k2[i];
        }
        self.rhs(t + 0.5 * dt, &stage, &mut k3);
        for i in 0..n {
            stage[i] = self.e_full[i] * u[i] + dt * self.e_half[i] * k3[i];
        }
        self.rhs(t + dt, &stage, &mut k4);
        for i in 0..n {
            u[i] = self.e_full[i] * u[i]
                + dt / 6.0 * (self.e_full[i] * k1[i] + 2.0 * self.e_half[i] * (k2[i] + k3[i]) + k4[i]);
        }
    }
}

fn check_initial(initial: &Field, spec: &EvolutionSpec) -> Result<()> {
    initial.grid().same_as(&spec.grid)?;
    match (initial.background(), &spec.equation) {
        (Background::Kink { .. }, _) => Err(Error::BackgroundMismatch(
            "kinks are not periodic; evolve the perturbation in kink-perturbation mode".into(),
        )),
        (Background::Constant { value }, Equation::KinkPerturbation { .. }) if value != 0.0 => Err(
            Error::BackgroundMismatch("kink-perturbation mode expects a decaying perturbation".into()),
        ),
        _ => Ok(()),
    }
}

/// Evolves `initial` and returns snapshots every `output_every` steps
/// (including the initial and final states). The observer sees every stored
/// snapshot; returning an error aborts the run.
pub fn evolve_with(
    initial: &Field,
    spec: &EvolutionSpec,
    mut observer: impl FnMut(f64, &Field) -> Result<()>,
) -> Result<Trajectory> {
    check_initial(initial, spec)?;
    let bound = spec.stability_bound(initial.values());
    if spec.dt.abs() > bound {
        return Err(Error::UnstableTimeStep { dt: spec.dt, bound });
    }
    let grid = &spec.grid;
    let background = initial.background();
    let sup0 = initial.sup_norm();
    let threshold = spec.blowup_factor * sup0.max(f64::MIN_POSITIVE);
    let mut stepper = Stepper::new(spec);
    let mut u_hat = grid.fft(initial.values());
    let mut traj = Vec::new();
    let mut t = spec.t0;
    observer(t, initial)?;
    traj.push((t, initial.clone()));
    let steps = spec.steps();
    let mut warned = false;
    for s in 1..=steps {
        stepper.step(t, &mut u_hat);
        t = spec.t0 + s as f64 * spec.dt;
        let store = s % spec.output_every == 0 || s == steps;
        let check = store || s % 16 == 0;
        if check {
            let values = grid.ifft(u_hat.clone());
            let sup = values.iter().fold(0.0_f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) });
            if !(sup <= threshold) {
                return Err(Error::BlowUp { t, sup, threshold });
            }
            if store {
                if !warned {
                    let frac = aliased_energy_fraction(&u_hat, &stepper.mask);
                    if frac > 1e-12 {
                        log::warn!("{:.2e} of the spectral energy sits in dealiased modes at t = {t}", frac);
                        warned = true;
                    }
                }
                let field = Field::new(grid.clone(), values, background)?;
                observer(t, &field)?;
                traj.push((t, field));
            }
        }
    }
    Ok(traj)
}

pub fn evolve(initial: &Field, spec: &EvolutionSpec) -> Result<Trajectory> {
    evolve_with(initial, spec, |_, _| Ok(()))
}

fn aliased_energy_fraction(u_hat: &[Complex64], mask: &[bool]) -> f64 {
    let (mut hi, mut total) = (0.0, 0.0);
    for (c, &m) in u_hat.iter().zip(mask).skip(1) {
        let e = c.norm_sqr();
        total += e;
        if !m {
            hi += e;
        }
    }
    if total == 0.0 { 0.0 } else { hi / total }
}

/// Pointwise residual `u_t + u_xxx + (F)_x - source` at interior snapshots,
/// with a centered three-point (possibly nonuniform) stencil in time.
/// Returns `(t, L2 norm)` pairs.
pub fn pde_residual(trajectory: &[(f64, Field)], equation: &Equation) -> Result<Vec<(f64, f64)>> {
    if trajectory.len() < 3 {
        return Err(invalid("the residual needs at least three snapshots"));
    }
    let grid = trajectory[0].1.grid().clone();
    for (_, f) in trajectory {
        f.grid().same_as(&grid)?;
    }
    let mut out = Vec::with_capacity(trajectory.len() - 2);
    for w in trajectory.windows(3) {
        let (t0, a) = (&w[0].0, &w[0].1);
        let (t1, b) = (&w[1].0, &w[1].1);
        let (t2, c) = (&w[2].0, &w[2].1);
        let (h0, h1) = (t1 - t0, t2 - t1);
        let (ca, cb, cc) = (-h1 / (h0 * (h0 + h1)), (h1 - h0) / (h0 * h1), h0 / (h1 * (h0 + h1)));
        let ux = b.derivative(1);
        let uxxx = b.derivative(3);
        let mut res = vec![0.0; grid.n()];
        for i in 0..grid.n() {
            let y = grid.x()[i];
            let u = b.values()[i];
            let ut = ca * a.values()[i] + cb * u + cc * c.values()[i];
            let fx = match equation {
                Equation::Plain { .. } => equation.flux_derivative(*t1, y, u) * ux[i],
                Equation::KinkPerturbation { .. } => 0.0,
            };
            res[i] = ut + uxxx[i] + fx - equation.source(*t1, y);
        }
        if let Equation::KinkPerturbation { .. } = equation {
            let mut flux = vec![0.0; grid.n()];
            equation.flux(*t1, grid.x(), b.values(), &mut flux);
            let fx = grid.derivative(&flux, 1);
            res.iter_mut().zip(&fx).for_each(|(r, f)| *r += f);
        }
        out.push((*t1, grid.l2_norm(&res)));
    }
    Ok(out)
}

/// Empirical convergence orders from errors at successively refined steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    /// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`.
    pub orders: Vec<f64>,
}

impl ConvergenceReport {
    pub fn from_errors(steps: Vec<f64>, errors: Vec<f64>) -> Self {
        let orders = steps
            .windows(2)
            .zip(errors.windows(2))
            .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
            .collect();
        Self { steps, errors, orders }
    }

    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Runs the same problem with each time step in `dts` and measures the H^1
/// distance of the final state to `exact(T)`.
pub fn temporal_convergence(
    initial: &Field,
    base: &EvolutionSpec,
    dts: &[f64],
    exact: impl Fn(f64) -> Vec<f64>,
) -> Result<ConvergenceReport> {
    let mut errors = Vec::with_capacity(dts.len());
    for &dt in dts {
        let mut spec = base.clone();
        spec.dt = dt;
        spec.output_every = usize::MAX;
        let traj = evolve(initial, &spec)?;
        let (t, last) = traj.last().expect("at least the initial state");
        let diff: Vec<f64> = last.values().iter().zip(exact(*t)).map(|(a, b)| a - b).collect();
        errors.push(spec.grid.h1_norm(&diff));
    }
    Ok(ConvergenceReport::from_errors(dts.to_vec(), errors))
}

/// Spatial study: for each grid size, build the data with `initial`, run with
/// `base`'s time step and report the H^1 error against `exact`.
pub fn spatial_convergence(
    sizes: &[usize],
    length: f64,
    base: &EvolutionSpec,
    initial: impl Fn(&Grid) -> Result<Field>,
    exact: impl Fn(&Grid, f64) -> Vec<f64>,
) -> Result<ConvergenceReport> {
    let mut errors = Vec::with_capacity(sizes.len());
    let mut hs = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let grid = Grid::new(n, length)?;
        let mut spec = base.clone();
        spec.grid = grid.clone();
        spec.output_every = usize::MAX;
        let traj = evolve(&initial(&grid)?, &spec)?;
        let (t, last) = traj.last().expect("nonempty");
        let diff: Vec<f64> = last.values().iter().zip(exact(&grid, *t)).map(|(a, b)| a - b).collect();
        errors.push(grid.h1_norm(&diff));
        hs.push(grid.dx());
    }
    Ok(ConvergenceReport::from_errors(hs, errors))
}

/// Writes rows `t, u_0, ..., u_{N-1}` with a header.
pub fn write_trajectory_csv<W: Write>(writer: W, trajectory: &[(f64, Field)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if let Some((_, f)) = trajectory.first() {
        let mut header = vec!["t".to_string()];
        header.extend((0..f.grid().n()).map(|i| format!("u{i}")));
        w.write_record(&header)?;
    }
    for (t, f) in trajectory {
        let mut row = vec![t.to_string()];
        row.extend(f.values().iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Binary frame magic.
pub const FRAME_MAGIC: [u8; 8] = *b"MKFRAME1";

/// Frame layout, little endian: magic (8 bytes), N (u64), L (f64), t (f64),
/// then N f64 samples. Frames may be concatenated.
pub fn write_frame<W: Write>(mut writer: W, t: f64, field: &Field) -> Result<()> {
    writer.write_all(&FRAME_MAGIC)?;
    writer.write_all(&(field.grid().n() as u64).to_le_bytes())?;
    writer.write_all(&field.grid().length().to_le_bytes())?;
    writer.write_all(&t.to_le_bytes())?;
    for v in field.values() {
        writer.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads one frame; returns `None` at a clean end of stream.
pub fn read_frame<R: Read>(mut reader: R) -> Result<Option<(f64, Grid, Vec<f64>)>> {
    let mut magic = [0u8; 8];
    match reader.read_exact(&mut magic) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    if magic != FRAME_MAGIC {
        return Err(invalid("not a trajectory frame"));
    }
    let mut b8 = [0u8; 8];
    reader.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    reader.read_exact(&mut b8)?;
    let length = f64::from_le_bytes(b8);
    reader.read_exact(&mut b8)?;
    let t = f64::from_le_bytes(b8);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        reader.read_exact(&mut b8)?;
        values.push(f64::from_le_bytes(b8));
    }
    Ok(Some((t, Grid::new(n, length)?, values)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Convention;
    use crate::profiles::gardner;

    fn gardner_setup(n: usize, dt: f64, horizon: f64) -> (Field, EvolutionSpec, f64, f64) {
        let (beta, c) = (1.0, 0.1);
        let grid = Grid::new(n, 120.0).unwrap();
        let init = Field::decaying(&grid, grid.sample(|x| gardner::value(c, beta, x))).unwrap();
        let spec = EvolutionSpec::new(Equation::plain(Nonlinearity::gardner(beta)), grid, dt, horizon).unwrap();
        (init, spec, c, beta)
    }

    #[test]
    fn zero_data_stays_zero() {
        let grid = Grid::new(64, 20.0).unwrap();
        let spec = EvolutionSpec::new(Equation::plain(Nonlinearity::cubic()), grid.clone(), 0.01, 1.0).unwrap();
        let traj = evolve(&Field::zeros(&grid), &spec).unwrap();
        assert!(traj.iter().all(|(_, f)| f.values().iter().all(|&v| v == 0.0)));
        assert!((traj.last().unwrap().0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn soliton_translates() {
        let (init, spec, c, beta) = gardner_setup(512, 0.01, 5.0);
        let traj = evolve(&init, &spec).unwrap();
        let (t, last) = traj.last().unwrap();
        let exact = spec.grid.sample(|x| gardner::value(c, beta, x - c * t));
        let diff: Vec<f64> = last.values().iter().zip(&exact).map(|(a, b)| a - b).collect();
        assert!(spec.grid.h1_norm(&diff) < 1e-8, "{}", spec.grid.h1_norm(&diff));
    }

    #[test]
    fn rejects_unstable_and_bad_specs() {
        let (init, mut spec, _, _) = gardner_setup(512, 0.01, 1.0);
        spec.dt = 50.0;
        assert!(matches!(evolve(&init, &spec), Err(Error::UnstableTimeStep { .. })));
        let grid = Grid::new(96, 10.0).unwrap();
        assert!(EvolutionSpec::new(Equation::plain(Nonlinearity::cubic()), grid, 0.1, 1.0).is_err());
    }

    #[test]
    fn blow_up_is_detected() {
        // A mass-rich bump steepens into a taller soliton; a tight threshold flags it.
        let grid = Grid::new(256, 60.0).unwrap();
        let f = Nonlinearity::power(2, Convention::Focusing).unwrap();
        let init = Field::decaying(&grid, grid.sample(|x| 2.0 * (-x * x / 4.0).exp())).unwrap();
        let mut spec = EvolutionSpec::new(Equation::plain(f), grid, 1e-3, 5.0).unwrap();
        spec.blowup_factor = 1.05;
        assert!(matches!(evolve(&init, &spec), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn residual_of_exact_traveling_kink_is_small() {
        let grid = Grid::new(256, 80.0).unwrap();
        let c = 0.5;
        let h = 1e-3;
        let traj: Vec<(f64, Field)> = (0..3)
            .map(|i| {
                let t = i as f64 * h;
                let bg = Background::Kink { c, center: -c * t };
                (t, Field::from_fn(&grid, bg, |x| kink::value(c, x + c * t)))
            })
            .collect();
        let res = pde_residual(&traj, &Equation::plain(Nonlinearity::cubic())).unwrap();
        assert_eq!(res.len(), 1);
        assert!(res[0].1 < 1e-6, "{}", res[0].1);
        // negative control
        let junk: Vec<(f64, Field)> = (0..3)
            .map(|i| (i as f64 * h, Field::from_fn(&grid, Background::ZERO, |x| (-(x - i as f64 * 0.1).powi(2)).exp())))
            .collect();
        let r = pde_residual(&junk, &Equation::plain(Nonlinearity::cubic())).unwrap();
        assert!(r[0].1 > 1.0);
    }

    #[test]
    fn frames_round_trip() {
        let grid = Grid::new(16, 3.0).unwrap();
        let f = Field::from_fn(&grid, Background::ZERO, |x| x.sin());
        let mut buf = Vec::new();
        write_frame(&mut buf, 0.5, &f).unwrap();
        write_frame(&mut buf, 1.5, &f).unwrap();
        let mut r = buf.as_slice();
        let (t, g, v) = read_frame(&mut r).unwrap().unwrap();
        assert_eq!((t, g.n(), g.length()), (0.5, 16, 3.0));
        assert_eq!(v, f.values());
        assert!(read_frame(&mut r).unwrap().is_some());
        assert!(read_frame(&mut r).unwrap().is_none());
    }
}
