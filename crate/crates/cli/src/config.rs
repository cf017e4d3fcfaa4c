//! JSON scenario files. Every parameter block has defaults matching the
//! acceptance settings; a file only needs to name the fields it changes.

use std::path::Path;

use multikink::profiles::multikink::Parity;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::perturbation::PerturbationShape;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    Identities(IdentitiesParams),
    TransformCheck(TransformParams),
    Solver(SolverParams),
    EvenStability(StabilityParams),
    OddStability(StabilityParams),
    Modulation(ModulationParams),
    Collision(CollisionParams),
    Coercivity(CoercivityParams),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Identities(_) => "identities",
            Scenario::TransformCheck(_) => "transform-check",
            Scenario::Solver(_) => "solver",
            Scenario::EvenStability(_) => "even-stability",
            Scenario::OddStability(_) => "odd-stability",
            Scenario::Modulation(_) => "modulation",
            Scenario::Collision(_) => "collision",
            Scenario::Coercivity(_) => "coercivity",
        }
    }
}

pub fn load(path: &Path) -> Result<ScenarioFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let file: ScenarioFile =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            file.schema_version
        )));
    }
    Ok(file)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitiesParams {
    /// `(beta, c)` pairs.
    pub points: Vec<(f64, f64)>,
    pub quadrature_points: usize,
    pub tolerance: f64,
    pub max_seconds: f64,
}

impl Default for IdentitiesParams {
    fn default() -> Self {
        Self { points: vec![(1.0, 0.05), (1.0, 0.1), (0.5, 0.3)], quadrature_points: 2048, tolerance: 1e-8, max_seconds: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformParams {
    pub beta: f64,
    /// Gardner soliton scaling used as the base datum.
    pub soliton_scaling: f64,
    /// H^1 size of the bump added for the perturbed datum.
    pub perturbation: f64,
    pub grid: GridSpec,
    pub dt: f64,
    pub horizon: f64,
    pub output_interval: f64,
    pub tolerance: f64,
    pub two_kink_tolerance: f64,
}

impl Default for TransformParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            soliton_scaling: 0.1,
            perturbation: 0.01,
            grid: GridSpec { n: 1024, length: 160.0 },
            dt: 1e-3,
            horizon: 1.0,
            output_interval: 0.1,
            tolerance: 1e-5,
            two_kink_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    pub beta: f64,
    pub c: f64,
    pub grid: GridSpec,
    pub dt: f64,
    pub horizon: f64,
    /// Steps of the temporal refinement study.
    pub convergence_dts: Vec<f64>,
    pub translation_tolerance: f64,
    pub drift_tolerance: f64,
    pub min_order: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            c: 0.1,
            grid: GridSpec { n: 2048, length: 160.0 },
            dt: 1e-3,
            horizon: 10.0,
            convergence_dts: vec![0.4, 0.2, 0.1],
            translation_tolerance: 1e-6,
            drift_tolerance: 1e-8,
            min_order: 3.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityParams {
    pub beta: f64,
    pub scalings: Vec<f64>,
    /// Distance between consecutive objects at `t = 0`.
    pub separation: f64,
    pub alphas: Vec<f64>,
    pub shape: PerturbationShape,
    pub seed: u64,
    pub grid: GridSpec,
    pub dt: f64,
    pub horizon: f64,
    pub output_interval: f64,
    /// Largest allowed max/min ratio of the fitted constant across `alphas`.
    pub ratio_tolerance: f64,
    /// `K` in `min_t (M_j(t) - M_j(0)) >= -K e^{-sigma0 L}` (odd parity).
    pub audit_factor: f64,
    pub refit_scalings: bool,
    /// Wall-clock budget per perturbation size.
    pub max_run_seconds: f64,
}

impl StabilityParams {
    pub fn for_parity(parity: Parity) -> Self {
        let mut p = Self::default();
        if parity == Parity::Odd {
            p.grid = GridSpec { n: 1024, length: 256.0 };
        }
        p
    }
}

impl Default for StabilityParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            scalings: vec![0.05, 0.12],
            separation: 30.0,
            alphas: vec![0.02, 0.01, 0.005],
            shape: PerturbationShape::default(),
            seed: 0,
            grid: GridSpec { n: 1024, length: 320.0 },
            dt: 0.01,
            horizon: 50.0,
            output_interval: 0.5,
            ratio_tolerance: 2.0,
            audit_factor: 10.0,
            refit_scalings: true,
            max_run_seconds: 300.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModulationParams {
    pub beta: f64,
    pub scalings: Vec<f64>,
    pub separation: f64,
    pub alphas: Vec<f64>,
    pub shape: PerturbationShape,
    pub seed: u64,
    pub grid: GridSpec,
    /// Separations for the interaction decay fit.
    pub separations: Vec<f64>,
    pub orthogonality_tolerance: f64,
    /// Accepted range of the observed expansion exponent.
    pub exponent_range: (f64, f64),
    /// Required decay rate as a multiple of `sigma0`.
    pub rate_factor: f64,
}

impl Default for ModulationParams {
    fn default() -> Self {
        Self {
            beta: 0.25,
            scalings: vec![0.3, 0.6],
            separation: 40.0,
            alphas: vec![0.04, 0.02, 0.01],
            shape: PerturbationShape::default(),
            seed: 0,
            grid: GridSpec { n: 2048, length: 256.0 },
            separations: vec![15.0, 20.0, 25.0, 30.0, 35.0],
            orthogonality_tolerance: 1e-10,
            exponent_range: (2.5, 3.5),
            rate_factor: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollisionParams {
    /// Background of the quartic source `s^4 - 4 b0 s^3 + 6 b0^2 s^2`.
    pub quartic_b0: f64,
    /// `beta` of the integrable control, reached from the cubic source at `b0 = 1/(3 sqrt beta)`.
    pub beta: f64,
    /// Slow then fast scaling.
    pub scalings: (f64, f64),
    pub separation: f64,
    pub grid: GridSpec,
    pub dt: f64,
    pub horizon: f64,
    /// Inelastic defect must exceed this multiple of the noise floor.
    pub inelastic_factor: f64,
    /// Integrable defect must stay below this multiple of the noise floor.
    pub elastic_factor: f64,
    /// Wall-clock budget per collision run.
    pub max_run_seconds: f64,
}

impl Default for CollisionParams {
    fn default() -> Self {
        Self {
            quartic_b0: 1.0,
            beta: 0.1,
            scalings: (0.25, 1.0),
            separation: 40.0,
            grid: GridSpec { n: 4096, length: 400.0 },
            dt: 0.005,
            horizon: 150.0,
            inelastic_factor: 10.0,
            elastic_factor: 2.0,
            max_run_seconds: 600.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoercivityParams {
    pub beta: f64,
    pub scalings: Vec<f64>,
    pub separation: f64,
    /// Grid of the single-kink form.
    pub kink_grid: GridSpec,
    /// Grid of the multi-object form.
    pub full_grid: GridSpec,
    pub widths: Vec<f64>,
    /// Largest relative change of the estimate between the two widest cutoffs.
    pub plateau_tolerance: f64,
    pub zero_mode_tolerance: f64,
}

impl Default for CoercivityParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            scalings: vec![0.05, 0.12],
            separation: 30.0,
            kink_grid: GridSpec { n: 512, length: 120.0 },
            full_grid: GridSpec { n: 1024, length: 240.0 },
            widths: vec![5.0, 10.0, 20.0, 40.0],
            plateau_tolerance: 0.1,
            zero_mode_tolerance: 1e-6,
        }
    }
}
