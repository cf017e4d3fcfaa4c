//! Conserved quantities, weighted masses and residual norms.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{Field, Grid};
use crate::nonlinearity::Nonlinearity;
use crate::profiles::multikink::{build_multikink_profile, MultiKinkConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyMass {
    pub energy: f64,
    /// `None` when `u^2 - c` does not vanish at both ends.
    pub mass: Option<f64>,
}

/// `E = (1/2) int u_x^2 + (1/4) int (u^2 - c)^2` and `M = (1/2) int (c - u^2)`.
pub fn energy_mass(u: &Field, c: f64) -> Result<EnergyMass> {
    if !(c >= 0.0) {
        return Err(invalid(format!("background scaling must be nonnegative, got {c}")));
    }
    let grid = u.grid();
    let ux = u.derivative(1);
    let kinetic = 0.5 * grid.inner_product(&ux, &ux);
    let pot: f64 = grid.integrate(&u.values().iter().map(|v| (v * v - c).powi(2)).collect::<Vec<_>>());
    let (l, r) = u.background().limits();
    let tol = 1e-10 * c.max(1e-300);
    let consistent = (l * l - c).abs() <= tol && (r * r - c).abs() <= tol;
    let mass = consistent.then(|| 0.5 * grid.integrate(&u.values().iter().map(|v| c - v * v).collect::<Vec<_>>()));
    if !consistent {
        log::debug!("mass undefined: background limits ({l}, {r}) do not square to c = {c}");
    }
    Ok(EnergyMass { energy: kinetic + 0.25 * pot, mass })
}

/// Hamiltonian of `u_t + (u_xx + sigma f(u))_x = 0`: `(1/2) int u_x^2 - sigma int F(u)`
/// with `F' = f`, `F(0) = 0`.
pub fn gkdv_energy(v: &Field, f: &Nonlinearity) -> f64 {
    let grid = v.grid();
    let vx = v.derivative(1);
    let sigma = f.convention().sign();
    let pot = grid.integrate(&v.values().iter().map(|&s| f.antiderivative(s)).collect::<Vec<_>>());
    0.5 * grid.inner_product(&vx, &vx) - sigma * pot
}

/// `(1/2) int v^2`.
pub fn l2_mass(v: &Field) -> f64 {
    0.5 * v.grid().inner_product(v.values(), v.values())
}

/// Gardner energy `E_beta` and mass `(1/2) int v^2`.
pub fn gardner_energy_mass(v: &Field, beta: f64) -> (f64, f64) {
    (gkdv_energy(v, &Nonlinearity::gardner(beta)), l2_mass(v))
}

/// Weight `psi(x) = (2/pi) arctan(exp(sqrt(sigma0) x / 2))`, the primitive of
/// `m sech(sqrt(sigma0) x / 2)` with unit mass, and the moving cuts between
/// consecutive objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFamily {
    pub sigma0: f64,
    /// `m = sqrt(sigma0) / (2 pi)`.
    pub m: f64,
    /// Initial positions of the objects, left to right.
    pub positions: Vec<f64>,
    /// Their speeds in the frame of the weights.
    pub speeds: Vec<f64>,
}

impl WeightFamily {
    pub fn new(sigma0: f64, positions: Vec<f64>, speeds: Vec<f64>) -> Result<Self> {
        if !(sigma0 > 0.0 && sigma0.is_finite()) {
            return Err(invalid(format!("sigma0 must be positive, got {sigma0}")));
        }
        if positions.len() != speeds.len() {
            return Err(invalid("positions and speeds differ in length"));
        }
        Ok(Self { sigma0, m: sigma0.sqrt() / (2.0 * PI), positions, speeds })
    }

    /// Weights in the soliton frame built from a configuration's initial data.
    pub fn from_config(config: &MultiKinkConfig) -> Result<Self> {
        Self::new(config.sigma0(), config.object_positions(), config.object_speeds())
    }

    pub fn psi(&self, x: f64) -> f64 {
        2.0 / PI * (0.5 * self.sigma0.sqrt() * x).exp().atan()
    }

    /// `psi^(order)` for `order <= 3`.
    pub fn psi_derivative(&self, x: f64, order: u32) -> f64 {
        let a = 0.5 * self.sigma0.sqrt();
        let sech = 1.0 / (a * x).cosh();
        match order {
            0 => self.psi(x),
            1 => self.m * sech,
            2 => -self.m * a * sech * (a * x).tanh(),
            3 => self.m * a * a * (sech - 2.0 * sech * sech * sech),
            _ => panic!("weight derivatives are provided up to order 3"),
        }
    }

    /// Number of cuts (objects minus one).
    pub fn cuts(&self) -> usize {
        self.positions.len().saturating_sub(1)
    }

    /// Cut `j` (0-based) at time `t`: midpoint of objects `j` and `j+1`.
    pub fn center(&self, j: usize, t: f64) -> f64 {
        0.5 * (self.positions[j] + self.positions[j + 1] + (self.speeds[j] + self.speeds[j + 1]) * t)
    }

    /// `c(t, x) = c_1 + sum_j (c_{j+1} - c_j) psi(x - sigma_j(t))`.
    pub fn speed_profile(&self, t: f64, x: f64) -> f64 {
        let mut v = self.speeds[0];
        for j in 0..self.cuts() {
            v += (self.speeds[j + 1] - self.speeds[j]) * self.psi(x - self.center(j, t));
        }
        v
    }
}

/// `M_j = (1/2) int w^2 (1 - psi(y - sigma_j(t)))` for cut `j` (0-based).
pub fn modified_mass(w: &Field, j: usize, weights: &WeightFamily, t: f64) -> Result<f64> {
    if j >= weights.cuts() {
        return Err(invalid(format!("cut index {j} out of range ({} cuts)", weights.cuts())));
    }
    let grid = w.grid();
    let s = weights.center(j, t);
    let integrand: Vec<f64> =
        w.values().iter().zip(grid.x()).map(|(&v, &y)| v * v * (1.0 - weights.psi(y - s))).collect();
    Ok(0.5 * grid.integrate(&integrand))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutAudit {
    pub cut: usize,
    /// `min_t (M_j(t) - M_j(0))`.
    pub min_change: f64,
    pub t_at_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityAudit {
    pub cuts: Vec<CutAudit>,
    /// `e^{-sigma0 L}`.
    pub bound_scale: f64,
    /// Smallest `K` with `min change >= -K e^{-sigma0 L}` for every cut.
    pub fitted_k: f64,
}

impl MonotonicityAudit {
    pub fn worst_change(&self) -> f64 {
        self.cuts.iter().map(|c| c.min_change).fold(0.0, f64::min)
    }
}

/// Tracks `M_j(t) - M_j(0)` along a trajectory in the soliton frame.
pub fn monotonicity_audit(
    trajectory: &[(f64, Field)],
    weights: &WeightFamily,
    separation: f64,
) -> Result<MonotonicityAudit> {
    let Some((t0, first)) = trajectory.first() else {
        return Err(invalid("empty trajectory"));
    };
    let bound_scale = (-weights.sigma0 * separation).exp();
    let mut cuts = Vec::with_capacity(weights.cuts());
    for j in 0..weights.cuts() {
        let m0 = modified_mass(first, j, weights, *t0)?;
        let mut audit = CutAudit { cut: j, min_change: 0.0, t_at_min: *t0 };
        for (t, f) in trajectory {
            let d = modified_mass(f, j, weights, *t)? - m0;
            if d < audit.min_change {
                audit.min_change = d;
                audit.t_at_min = *t;
            }
        }
        cuts.push(audit);
    }
    let fitted_k = cuts.iter().map(|c| (-c.min_change).max(0.0) / bound_scale).fold(0.0, f64::max);
    Ok(MonotonicityAudit { cuts, bound_scale, fitted_k })
}

/// `(int_{x > lower} z^2 + z_x^2)^(1/2)` with the derivative taken on the whole grid.
pub fn h1_norm_windowed(grid: &Grid, z: &[f64], lower: f64) -> f64 {
    let dz = grid.derivative(z, 1);
    let s: f64 = grid
        .x()
        .iter()
        .zip(z.iter().zip(&dz))
        .filter(|(&x, _)| x > lower)
        .map(|(_, (a, b))| a * a + b * b)
        .sum();
    (grid.dx() * s).sqrt()
}

/// `z = u - reference profile` with the given soliton scalings and current
/// object centers (solitons, then the kink for odd parity).
pub fn residual_field(u: &Field, config: &MultiKinkConfig, scalings: &[f64], centers: &[f64]) -> Result<Vec<f64>> {
    let mut cfg = config.clone();
    let n = scalings.len();
    if centers.len() != config.object_count() || n != config.scalings.len() {
        return Err(invalid("parameter counts do not match the configuration"));
    }
    cfg.scalings = scalings.to_vec();
    cfg.positions = centers[..n].to_vec();
    if let Some(&k) = centers.get(n) {
        cfg.kink_position = k;
    }
    let reference = build_multikink_profile(&cfg, u.grid(), 0.0)?;
    Ok(u.values().iter().zip(reference.values()).map(|(a, b)| a - b).collect())
}

/// `||z||_{H^1}` for [`residual_field`].
pub fn h1_residual(u: &Field, config: &MultiKinkConfig, scalings: &[f64], centers: &[f64]) -> Result<f64> {
    let z = residual_field(u, config, scalings, centers)?;
    Ok(u.grid().h1_norm(&z))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub mass: Option<f64>,
    pub gardner_energy: f64,
    pub modified_masses: Vec<f64>,
    pub left_masses: Vec<f64>,
    pub h1_residual: f64,
    pub windowed_h1: f64,
}

/// `d_j = beta sum_{k <= j} M[Q_{c_k, beta}]`, computed by quadrature on `grid`.
pub fn left_mass_sums(grid: &Grid, beta: f64, scalings: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    scalings
        .iter()
        .map(|&c| {
            let q = grid.sample(|x| crate::profiles::gardner::value(c, beta, x));
            acc += beta * 0.5 * grid.inner_product(&q, &q);
            acc
        })
        .collect()
}

pub fn write_records_csv<W: Write>(writer: W, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let cuts = records.first().map_or(0, |r| r.modified_masses.len());
    let lefts = records.first().map_or(0, |r| r.left_masses.len());
    let mut header: Vec<String> = ["t", "energy", "mass", "gardner_energy"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=cuts).map(|j| format!("M_{j}")));
    header.extend((1..=lefts).map(|j| format!("d_{j}")));
    header.push("h1_residual".into());
    header.push("windowed_h1".into());
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.t.to_string(),
            r.energy.to_string(),
            r.mass.map_or_else(|| "nan".to_string(), |m| m.to_string()),
            r.gardner_energy.to_string(),
        ];
        row.extend(r.modified_masses.iter().map(|v| v.to_string()));
        row.extend(r.left_masses.iter().map(|v| v.to_string()));
        row.push(r.h1_residual.to_string());
        row.push(r.windowed_h1.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub min: f64,
    pub max: f64,
    /// `max |x(t) - x(0)| / max(|x(0)|, tiny)`.
    pub relative_drift: f64,
}

impl SeriesStats {
    pub fn of(values: &[f64]) -> Option<Self> {
        let first = *values.first()?;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let drift = values.iter().map(|v| (v - first).abs()).fold(0.0, f64::max);
        Some(Self { min, max, relative_drift: drift / first.abs().max(f64::MIN_POSITIVE) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub energy: Option<SeriesStats>,
    pub gardner_energy: Option<SeriesStats>,
    pub h1_residual: Option<SeriesStats>,
    pub modified_masses: Vec<SeriesStats>,
}

impl DiagnosticsSummary {
    pub fn from_records(records: &[DiagnosticsRecord]) -> Self {
        let col = |f: &dyn Fn(&DiagnosticsRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
        let cuts = records.first().map_or(0, |r| r.modified_masses.len());
        Self {
            energy: SeriesStats::of(&col(&|r| r.energy)),
            gardner_energy: SeriesStats::of(&col(&|r| r.gardner_energy)),
            h1_residual: SeriesStats::of(&col(&|r| r.h1_residual)),
            modified_masses: (0..cuts).filter_map(|j| SeriesStats::of(&col(&|r| r.modified_masses[j]))).collect(),
        }
    }
}
