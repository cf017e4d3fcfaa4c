//! Modulation fits: kink + Gardner solitons + residual `z` made unique by
//! orthogonality, plus the energy expansion and soliton interaction checks.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::diagnostics::energy_mass;
use crate::error::{invalid, Error, Result};
use crate::grid::{Field, Grid};
use crate::profiles::multikink::{MultiKinkConfig, Parity};
use crate::profiles::{gardner, ground_state, kink};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationOptions {
    /// Stop once every orthogonality residual is below this.
    pub tol: f64,
    pub max_iterations: usize,
    /// Modulate the soliton scalings as well as their positions.
    pub refit_scalings: bool,
}

impl Default for ModulationOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iterations: 50, refit_scalings: true }
    }
}

/// Lab-frame parameters of the reference profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationGuess {
    pub soliton_centers: Vec<f64>,
    pub scalings: Vec<f64>,
    /// Kink center (odd parity only).
    pub kink_center: Option<f64>,
}

impl ModulationGuess {
    /// Unperturbed object positions of `config` at time `t`.
    pub fn from_config(config: &MultiKinkConfig, t: f64) -> Self {
        Self {
            soliton_centers: config.soliton_centers(t),
            scalings: config.scalings.clone(),
            kink_center: (config.parity == Parity::Odd).then(|| config.kink_center(t)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationState {
    pub soliton_centers: Vec<f64>,
    pub scalings: Vec<f64>,
    pub kink_center: Option<f64>,
    /// `u` minus the reference profile.
    pub z: Vec<f64>,
    pub iterations: usize,
    /// Orthogonality integrals at the solution, solitons first (`Q'`, then `Q` when
    /// scalings are fitted), kink last.
    pub orthogonality: Vec<f64>,
    pub z_h1: f64,
}

impl ModulationState {
    pub fn max_orthogonality(&self) -> f64 {
        self.orthogonality.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Object centers left to right: solitons, then the kink.
    pub fn centers(&self) -> Vec<f64> {
        let mut v = self.soliton_centers.clone();
        v.extend(self.kink_center);
        v
    }

    pub fn as_guess(&self) -> ModulationGuess {
        ModulationGuess {
            soliton_centers: self.soliton_centers.clone(),
            scalings: self.scalings.clone(),
            kink_center: self.kink_center,
        }
    }
}

/// Sign of the soliton sum in the reference profile and its constant part.
fn reference_shape(config: &MultiKinkConfig) -> (f64, f64) {
    match config.parity {
        Parity::Even => (-1.0, config.background_level()),
        Parity::Odd => (1.0, 0.0),
    }
}

/// Reference profile at the given parameters sampled on `grid`.
pub fn reference_profile(grid: &Grid, config: &MultiKinkConfig, params: &ModulationGuess) -> Vec<f64> {
    let (sign, base) = reference_shape(config);
    let sb = sign * config.beta.sqrt();
    let ck = config.kink_scaling();
    grid.x()
        .iter()
        .map(|&x| {
            let mut v = base;
            for (&c, &x0) in params.scalings.iter().zip(&params.soliton_centers) {
                v += sb * gardner::value(c, config.beta, x - x0);
            }
            if let Some(xk) = params.kink_center {
                v += kink::value(ck, x - xk);
            }
            v
        })
        .collect()
}

/// One row per unknown: the field direction `dz/dp` and the test functions it pairs with.
struct Linearization {
    residuals: Vec<f64>,
    jacobian: DMatrix<f64>,
}

fn linearize(grid: &Grid, u: &[f64], config: &MultiKinkConfig, p: &ModulationGuess, refit: bool) -> (Vec<f64>, Linearization) {
    let (sign, _) = reference_shape(config);
    let beta = config.beta;
    let sb = sign * beta.sqrt();
    let reference = reference_profile(grid, config, p);
    let z: Vec<f64> = u.iter().zip(&reference).map(|(a, b)| a - b).collect();

    // test functions h, their x-derivatives, dz/dp and dh/dp for each unknown
    struct Unknown {
        dz: Vec<f64>,
        // (equation index, dh/dp)
        dh: Vec<(usize, Vec<f64>)>,
    }
    let mut tests: Vec<Vec<f64>> = Vec::new();
    let mut unknowns: Vec<Unknown> = Vec::new();
    for (&c, &x0) in p.scalings.iter().zip(&p.soliton_centers) {
        let q = grid.sample(|x| gardner::value(c, beta, x - x0));
        let q1 = grid.sample(|x| gardner::derivative(c, beta, x - x0, 1));
        let q2 = grid.sample(|x| gardner::derivative(c, beta, x - x0, 2));
        let qc = grid.sample(|x| gardner::dc(c, beta, x - x0));
        let qc1 = grid.derivative(&qc, 1);
        let e_shape = tests.len();
        tests.push(q1.clone());
        let e_mass = refit.then(|| {
            tests.push(q.clone());
            tests.len() - 1
        });
        let mut dh_x = vec![(e_shape, q2.iter().map(|v| -v).collect())];
        if let Some(e) = e_mass {
            dh_x.push((e, q1.iter().map(|v| -v).collect()));
        }
        unknowns.push(Unknown { dz: q1.iter().map(|v| sb * v).collect(), dh: dh_x });
        if refit {
            let mut dh_c = vec![(e_shape, qc1)];
            if let Some(e) = e_mass {
                dh_c.push((e, qc.clone()));
            }
            unknowns.push(Unknown { dz: qc.iter().map(|v| -sb * v).collect(), dh: dh_c });
        }
    }
    if let Some(xk) = p.kink_center {
        let ck = config.kink_scaling();
        let k1 = grid.sample(|x| kink::derivative(ck, x - xk, 1));
        let k2 = grid.sample(|x| kink::derivative(ck, x - xk, 2));
        let e = tests.len();
        tests.push(k1.clone());
        unknowns.push(Unknown { dz: k1, dh: vec![(e, k2.iter().map(|v| -v).collect())] });
    }

    let residuals: Vec<f64> = tests.iter().map(|h| grid.inner_product(&z, h)).collect();
    let m = tests.len();
    let mut jacobian = DMatrix::zeros(m, unknowns.len());
    for (k, un) in unknowns.iter().enumerate() {
        for (i, h) in tests.iter().enumerate() {
            jacobian[(i, k)] = grid.inner_product(&un.dz, h);
        }
        for (i, dh) in &un.dh {
            jacobian[(*i, k)] += grid.inner_product(&z, dh);
        }
    }
    (z, Linearization { residuals, jacobian })
}

fn apply_step(p: &ModulationGuess, step: &DVector<f64>, scale: f64, refit: bool) -> ModulationGuess {
    let mut q = p.clone();
    let mut k = 0;
    for j in 0..q.scalings.len() {
        q.soliton_centers[j] += scale * step[k];
        k += 1;
        if refit {
            q.scalings[j] += scale * step[k];
            k += 1;
        }
    }
    if let Some(xk) = q.kink_center.as_mut() {
        *xk += scale * step[k];
    }
    q
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Newton solve of the orthogonality conditions starting from `guess`.
pub fn fit_modulation(
    u: &Field,
    config: &MultiKinkConfig,
    guess: &ModulationGuess,
    opts: ModulationOptions,
) -> Result<ModulationState> {
    if guess.scalings.len() != guess.soliton_centers.len() {
        return Err(invalid("guess has mismatched scalings and centers"));
    }
    if guess.kink_center.is_some() != (config.parity == Parity::Odd) {
        return Err(invalid("a kink center is required exactly for odd parity"));
    }
    let grid = u.grid();
    let crit = gardner::critical_speed(config.beta);
    let mut p = guess.clone();
    let (mut z, mut lin) = linearize(grid, u.values(), config, &p, opts.refit_scalings);
    let mut res = max_abs(&lin.residuals);
    for it in 0..=opts.max_iterations {
        if res <= opts.tol {
            return Ok(ModulationState {
                soliton_centers: p.soliton_centers,
                scalings: p.scalings,
                kink_center: p.kink_center,
                z_h1: grid.h1_norm(&z),
                z,
                iterations: it,
                orthogonality: lin.residuals,
            });
        }
        if it == opts.max_iterations {
            break;
        }
        let rhs = -DVector::from_vec(lin.residuals.clone());
        let Some(step) = lin.jacobian.clone().lu().solve(&rhs) else {
            return Err(Error::OutOfTube { iterations: it, residual: res });
        };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let q = apply_step(&p, &step, scale, opts.refit_scalings);
            if q.scalings.iter().all(|&c| c > 0.0 && c < crit) {
                let (z_new, lin_new) = linearize(grid, u.values(), config, &q, opts.refit_scalings);
                let r_new = max_abs(&lin_new.residuals);
                if r_new < res || r_new <= opts.tol {
                    p = q;
                    z = z_new;
                    lin = lin_new;
                    res = r_new;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            // stagnation at round-off: accept if close enough, otherwise leave the tube
            if res <= 1e3 * opts.tol {
                log::debug!("modulation stagnated at residual {res:e}");
                return Ok(ModulationState {
                    soliton_centers: p.soliton_centers,
                    scalings: p.scalings,
                    kink_center: p.kink_center,
                    z_h1: grid.h1_norm(&z),
                    z,
                    iterations: it,
                    orthogonality: lin.residuals,
                });
            }
            return Err(Error::OutOfTube { iterations: it, residual: res });
        }
    }
    Err(Error::OutOfTube { iterations: opts.max_iterations, residual: res })
}

/// `R = sqrt(beta) sum Q_{c_j}(x - x_j)` sampled on `grid`.
fn soliton_field(grid: &Grid, beta: f64, centers: &[f64], scalings: &[f64]) -> Vec<f64> {
    let sb = beta.sqrt();
    grid.sample(|x| scalings.iter().zip(centers).map(|(&c, &x0)| sb * gardner::value(c, beta, x - x0)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionResidual {
    /// `|| R_xx - 2cR + 3 sqrt(c) R^2 - R^3 + sqrt(beta) sum (2c - c_j) Q_j ||_{H^1}`.
    pub profile_h1: f64,
    /// `(1/2) int R_x^2 + c int R^2 - sqrt(c) int R^3 + (1/4) int R^4 - (2/3) sum c_j^{3/2}`.
    pub energy_defect: f64,
}

/// Interaction defects of decoupled Gardner solitons with `c = 1/(9 beta)`.
pub fn interaction_residual(grid: &Grid, beta: f64, centers: &[f64], scalings: &[f64]) -> Result<InteractionResidual> {
    if centers.len() != scalings.len() {
        return Err(invalid("centers and scalings differ in length"));
    }
    for &c in scalings {
        gardner::check_parameters(c, beta)?;
    }
    let c = 1.0 / (9.0 * beta);
    let sc = c.sqrt();
    let r = soliton_field(grid, beta, centers, scalings);
    let rx = grid.derivative(&r, 1);
    let rxx = grid.derivative(&r, 2);
    let linear = grid.sample(|x| {
        scalings.iter().zip(centers).map(|(&cj, &x0)| beta.sqrt() * (2.0 * c - cj) * gardner::value(cj, beta, x - x0)).sum()
    });
    let defect: Vec<f64> = (0..grid.n())
        .map(|i| rxx[i] - 2.0 * c * r[i] + 3.0 * sc * r[i] * r[i] - r[i].powi(3) + linear[i])
        .collect();
    let energy = 0.5 * grid.inner_product(&rx, &rx)
        + grid.integrate(&r.iter().map(|v| c * v * v - sc * v.powi(3) + 0.25 * v.powi(4)).collect::<Vec<_>>());
    let target: f64 = scalings.iter().map(|cj| 2.0 / 3.0 * cj.powf(1.5)).sum();
    Ok(InteractionResidual { profile_h1: grid.h1_norm(&defect), energy_defect: energy - target })
}

/// Quadratic part of the energy around the fitted profile:
/// `(1/2) int (z_x^2 + 2c z^2 - 3 (c - phi^2) z^2 - 6 sqrt(c) R z^2 + 3 R^2 z^2)`,
/// with `phi^2 = c` in the even case.
pub fn quadratic_energy(grid: &Grid, beta: f64, state: &ModulationState) -> f64 {
    let c = 1.0 / (9.0 * beta);
    let sc = c.sqrt();
    let r = soliton_field(grid, beta, &state.soliton_centers, &state.scalings);
    let zx = grid.derivative(&state.z, 1);
    let integrand: Vec<f64> = grid
        .x()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let phi2 = state.kink_center.map_or(c, |xk| kink::value(c, x - xk).powi(2));
            let z2 = state.z[i] * state.z[i];
            zx[i] * zx[i] + (2.0 * c - 3.0 * (c - phi2) - 6.0 * sc * r[i] + 3.0 * r[i] * r[i]) * z2
        })
        .collect();
    0.5 * grid.integrate(&integrand)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCheck {
    pub energy: f64,
    /// `E[phi_c]` (zero in the even case).
    pub kink_energy: f64,
    /// `(2/3) sum c_j^{3/2}` at the fitted scalings.
    pub soliton_energy: f64,
    pub quadratic: f64,
    pub defect: f64,
    pub z_h1: f64,
}

/// `E[u] - E[phi_c] - (2/3) sum c_j^{3/2} - F` with the energy built on `c = 1/(9 beta)`.
pub fn energy_expansion_check(u: &Field, state: &ModulationState, beta: f64) -> Result<ExpansionCheck> {
    let c = 1.0 / (9.0 * beta);
    let energy = energy_mass(u, c)?.energy;
    let kink_energy = if state.kink_center.is_some() { kink::energy(c) } else { 0.0 };
    let soliton_energy: f64 = state.scalings.iter().map(|cj| 2.0 / 3.0 * cj.powf(1.5)).sum();
    let quadratic = quadratic_energy(u.grid(), beta, state);
    Ok(ExpansionCheck {
        energy,
        kink_energy,
        soliton_energy,
        quadratic,
        defect: energy - kink_energy - soliton_energy - quadratic,
        z_h1: state.z_h1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRow {
    pub t: f64,
    pub centers: Vec<f64>,
    pub scalings: Vec<f64>,
    pub z_h1: f64,
}

impl TrackRow {
    pub fn from_state(t: f64, state: &ModulationState) -> Self {
        Self { t, centers: state.centers(), scalings: state.scalings.clone(), z_h1: state.z_h1 }
    }
}

/// Time series of fitted parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModulationTrack {
    pub rows: Vec<TrackRow>,
}

impl ModulationTrack {
    pub fn push(&mut self, t: f64, state: &ModulationState) {
        self.rows.push(TrackRow::from_state(t, state));
    }

    pub fn sup_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z_h1).fold(0.0, f64::max)
    }

    /// `max_t sum_j |c_j(t) - c_j(0)|`.
    pub fn max_scaling_drift(&self) -> f64 {
        let Some(first) = self.rows.first() else { return 0.0 };
        self.rows
            .iter()
            .map(|r| r.scalings.iter().zip(&first.scalings).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `t, x_1..x_N, c_1..c_M, z_h1`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let (n, m) = self.rows.first().map_or((0, 0), |r| (r.centers.len(), r.scalings.len()));
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|j| format!("x_{j}")));
        header.extend((1..=m).map(|j| format!("c_{j}")));
        header.push("z_h1".into());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut row = vec![r.t.to_string()];
            row.extend(r.centers.iter().map(|v| v.to_string()));
            row.extend(r.scalings.iter().map(|v| v.to_string()));
            row.push(r.z_h1.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Soliton profiles `Q_c` with closed forms for `Q`, `Q'` and `dQ/dc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SolitonFamily {
    /// `Q'' = cQ - Q^2 + beta Q^3`.
    Gardner { beta: f64 },
    /// `Q'' = cQ - Q^p`.
    PurePower { p: usize },
}

impl SolitonFamily {
    pub fn value(&self, c: f64, s: f64) -> f64 {
        match *self {
            SolitonFamily::Gardner { beta } => gardner::value(c, beta, s),
            SolitonFamily::PurePower { p } => ground_state::pure_power_value(p, c, s),
        }
    }

    pub fn slope(&self, c: f64, s: f64) -> f64 {
        match *self {
            SolitonFamily::Gardner { beta } => gardner::derivative(c, beta, s, 1),
            SolitonFamily::PurePower { p } => ground_state::pure_power_derivative(p, c, s),
        }
    }

    /// `dQ_c / dc` at fixed `s`.
    pub fn dc(&self, c: f64, s: f64) -> f64 {
        match *self {
            SolitonFamily::Gardner { beta } => gardner::dc(c, beta, s),
            SolitonFamily::PurePower { p } => {
                self.value(c, s) / ((p as f64 - 1.0) * c) + 0.5 * s * self.slope(c, s) / c
            }
        }
    }

    fn admissible(&self, c: f64) -> bool {
        match *self {
            SolitonFamily::Gardner { beta } => c > 0.0 && c < gardner::critical_speed(beta),
            SolitonFamily::PurePower { .. } => c > 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonFit {
    pub centers: Vec<f64>,
    pub scalings: Vec<f64>,
    /// `|| v - sum Q_{c_j}(x - x_j) ||_{H^1}` at the fit.
    pub defect_h1: f64,
    pub iterations: usize,
}

/// Least-squares fit of `sum_j Q_{c_j}(x - x_j)` to `v` (Gauss-Newton in `L^2`).
pub fn fit_soliton_sum(v: &Field, family: SolitonFamily, centers: &[f64], scalings: &[f64]) -> Result<SolitonFit> {
    if centers.len() != scalings.len() || centers.is_empty() {
        return Err(invalid("need matching, nonempty centers and scalings"));
    }
    let grid = v.grid();
    let n = centers.len();
    let mut xs = centers.to_vec();
    let mut cs = scalings.to_vec();
    let residual = |xs: &[f64], cs: &[f64]| -> Vec<f64> {
        let mut r = v.values().to_vec();
        for (&x0, &c) in xs.iter().zip(cs) {
            for (ri, &x) in r.iter_mut().zip(grid.x()) {
                *ri -= family.value(c, x - x0);
            }
        }
        r
    };
    let mut r = residual(&xs, &cs);
    let mut cost = grid.inner_product(&r, &r);
    let mut damping = 1e-8;
    for it in 0..200 {
        let cols: Vec<Vec<f64>> = (0..n)
            .flat_map(|j| {
                let (x0, c) = (xs[j], cs[j]);
                [grid.sample(|x| family.slope(c, x - x0)), grid.sample(|x| -family.dc(c, x - x0))]
            })
            .collect();
        let jtj = DMatrix::from_fn(2 * n, 2 * n, |a, b| grid.inner_product(&cols[a], &cols[b]));
        let jtr = DVector::from_fn(2 * n, |a, _| -grid.inner_product(&cols[a], &r));
        let mut improved = false;
        for _ in 0..30 {
            let mut m = jtj.clone();
            for a in 0..2 * n {
                m[(a, a)] *= 1.0 + damping;
            }
            let Some(step) = m.lu().solve(&jtr) else { break };
            let xn: Vec<f64> = (0..n).map(|j| xs[j] + step[2 * j]).collect();
            let cn: Vec<f64> = (0..n).map(|j| cs[j] + step[2 * j + 1]).collect();
            if cn.iter().all(|&c| family.admissible(c)) {
                let rn = residual(&xn, &cn);
                let cn_cost = grid.inner_product(&rn, &rn);
                if cn_cost <= cost {
                    let small = step.amax() < 1e-12;
                    xs = xn;
                    cs = cn;
                    r = rn;
                    cost = cn_cost;
                    damping = (damping * 0.1).max(1e-12);
                    improved = !small;
                    if small {
                        return Ok(SolitonFit { defect_h1: grid.h1_norm(&r), centers: xs, scalings: cs, iterations: it + 1 });
                    }
                    break;
                }
            }
            damping *= 10.0;
        }
        if !improved {
            return Ok(SolitonFit { defect_h1: grid.h1_norm(&r), centers: xs, scalings: cs, iterations: it + 1 });
        }
    }
    Err(Error::OutOfTube { iterations: 200, residual: cost.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::multikink::build_multikink_profile;

    fn odd_setup() -> (Grid, MultiKinkConfig) {
        let grid = Grid::new(1024, 160.0).unwrap();
        let cfg = MultiKinkConfig::odd(0.25, vec![0.3, 0.6], vec![-40.0, -10.0], 25.0, 30.0).unwrap();
        (grid, cfg)
    }

    #[test]
    fn exact_profile_is_a_fixed_point() {
        let (grid, cfg) = odd_setup();
        let u = build_multikink_profile(&cfg, &grid, 0.0).unwrap();
        let guess = ModulationGuess::from_config(&cfg, 0.0);
        let st = fit_modulation(&u, &cfg, &guess, ModulationOptions::default()).unwrap();
        assert!(st.z_h1 < 1e-12, "{}", st.z_h1);
        for (a, b) in st.centers().iter().zip(cfg.object_positions()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn recovers_perturbed_parameters() {
        let (grid, cfg) = odd_setup();
        let truth = ModulationGuess { soliton_centers: vec![-39.7, -10.2], scalings: vec![0.31, 0.59], kink_center: Some(25.1) };
        let u = Field::from_fn(&grid, crate::Background::Kink { c: cfg.kink_scaling(), center: 25.1 }, |_| 0.0)
            .with_values(reference_profile(&grid, &cfg, &truth))
            .unwrap();
        let st = fit_modulation(&u, &cfg, &ModulationGuess::from_config(&cfg, 0.0), ModulationOptions::default()).unwrap();
        assert!(st.max_orthogonality() < 1e-10);
        for (a, b) in st.scalings.iter().zip(&truth.scalings) {
            assert!((a - b).abs() < 1e-9, "{a} {b}");
        }
        assert!((st.kink_center.unwrap() - 25.1).abs() < 1e-9);
    }

    #[test]
    fn translation_equivariance_and_idempotence() {
        let (grid, cfg) = odd_setup();
        let base = build_multikink_profile(&cfg, &grid, 0.0).unwrap();
        let bump = grid.sample(|x| 0.02 * (-(x + 25.0).powi(2) / 4.0).exp());
        let u = base.with_values(base.values().iter().zip(&bump).map(|(a, b)| a + b).collect()).unwrap();
        let guess = ModulationGuess::from_config(&cfg, 0.0);
        let st = fit_modulation(&u, &cfg, &guess, ModulationOptions::default()).unwrap();
        assert!(st.max_orthogonality() < 1e-10);
        let again = fit_modulation(&u, &cfg, &st.as_guess(), ModulationOptions::default()).unwrap();
        for (a, b) in again.centers().iter().zip(st.centers()) {
            assert!((a - b).abs() < 1e-12);
        }
        let cells = 8;
        let delta = cells as f64 * grid.dx();
        let shifted = u.rotated(-(cells as isize));
        let mut g2 = guess.clone();
        g2.soliton_centers.iter_mut().for_each(|x| *x += delta);
        g2.kink_center = g2.kink_center.map(|x| x + delta);
        let st2 = fit_modulation(&shifted, &cfg, &g2, ModulationOptions::default()).unwrap();
        for (a, b) in st2.centers().iter().zip(st.centers()) {
            assert!((a - b - delta).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn even_fit_with_and_without_scalings() {
        let grid = Grid::new(1024, 300.0).unwrap();
        let cfg = MultiKinkConfig::even(1.0, vec![0.05, 0.12], vec![-30.0, 0.0], 30.0).unwrap();
        let base = build_multikink_profile(&cfg, &grid, 0.0).unwrap();
        let u = base.with_values(base.values().iter().zip(grid.x()).map(|(v, x)| v + 1e-3 * (-(x + 10.0f64).powi(2)).exp()).collect()).unwrap();
        let guess = ModulationGuess::from_config(&cfg, 0.0);
        for refit in [true, false] {
            let opts = ModulationOptions { refit_scalings: refit, ..Default::default() };
            let st = fit_modulation(&u, &cfg, &guess, opts).unwrap();
            assert_eq!(st.orthogonality.len(), if refit { 4 } else { 2 });
            assert!(st.max_orthogonality() < 1e-10);
            assert!(st.z_h1 < 1e-2);
        }
    }

    #[test]
    fn far_guess_leaves_tube() {
        let (grid, cfg) = odd_setup();
        let u = Field::from_fn(&grid, crate::Background::Kink { c: cfg.kink_scaling(), center: 25.0 }, |x| {
            kink::value(cfg.kink_scaling(), x - 25.0) + (-(x / 3.0).powi(2)).exp()
        });
        let guess = ModulationGuess::from_config(&cfg, 0.0);
        let opts = ModulationOptions { max_iterations: 3, ..Default::default() };
        assert!(matches!(fit_modulation(&u, &cfg, &guess, opts), Err(Error::OutOfTube { .. })));
    }

    #[test]
    fn single_soliton_interaction_is_quadrature_exact() {
        let beta = 1.0;
        let grid = Grid::new(2048, 400.0).unwrap();
        let r = interaction_residual(&grid, beta, &[0.0], &[0.1]).unwrap();
        assert!(r.profile_h1 < 1e-10, "{}", r.profile_h1);
        assert!(r.energy_defect.abs() < 1e-12);
    }

    #[test]
    fn interaction_decays_with_separation() {
        let beta = 1.0;
        let grid = Grid::new(2048, 600.0).unwrap();
        let at = |l: f64| interaction_residual(&grid, beta, &[-l / 2.0, l / 2.0], &[0.05, 0.12]).unwrap();
        let (a, b) = (at(30.0), at(60.0));
        assert!(b.profile_h1 < 0.1 * a.profile_h1);
        assert!(b.energy_defect.abs() < 0.1 * a.energy_defect.abs());
    }

    #[test]
    fn expansion_defect_is_small_without_perturbation() {
        let (grid, cfg) = odd_setup();
        let u = build_multikink_profile(&cfg, &grid, 0.0).unwrap();
        let st = fit_modulation(&u, &cfg, &ModulationGuess::from_config(&cfg, 0.0), ModulationOptions::default()).unwrap();
        let e = energy_expansion_check(&u, &st, cfg.beta).unwrap();
        assert!(e.defect.abs() < 1e-6, "{e:?}");
        assert!(e.quadratic.abs() < 1e-20);
    }

    #[test]
    fn soliton_sum_fit_recovers_parameters() {
        let grid = Grid::new(1024, 200.0).unwrap();
        for family in [SolitonFamily::Gardner { beta: 0.1 }, SolitonFamily::PurePower { p: 4 }] {
            let v = Field::decaying(&grid, grid.sample(|x| family.value(0.25, x + 30.0) + family.value(1.0, x - 20.0))).unwrap();
            let fit = fit_soliton_sum(&v, family, &[-29.0, 21.0], &[0.3, 0.9]).unwrap();
            assert!(fit.defect_h1 < 1e-9, "{family:?} {fit:?}");
            assert!((fit.scalings[1] - 1.0).abs() < 1e-9 && (fit.centers[0] + 30.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pure_power_scaling_derivative() {
        let f = SolitonFamily::PurePower { p: 4 };
        let h = 1e-5;
        for s in [-2.0, 0.0, 0.7, 3.0] {
            let fd = (f.value(0.5 + h, s) - f.value(0.5 - h, s)) / (2.0 * h);
            assert!((fd - f.dc(0.5, s)).abs() < 1e-8);
        }
    }

    #[test]
    fn track_csv_columns() {
        let st = ModulationState {
            soliton_centers: vec![1.0, 2.0],
            scalings: vec![0.1, 0.2],
            kink_center: Some(3.0),
            z: vec![],
            iterations: 0,
            orthogonality: vec![],
            z_h1: 0.5,
        };
        let mut track = ModulationTrack::default();
        track.push(0.0, &st);
        let mut buf = Vec::new();
        track.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,x_1,x_2,x_3,c_1,c_2,z_h1\n0,1,2,3,0.1,0.2,0.5\n"));
    }
}
