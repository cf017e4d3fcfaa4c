//! Discretized quadratic forms around kinks and Gardner solitons and their
//! smallest eigenvalues on constrained subspaces, relative to the `H^1` norm.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::diagnostics::WeightFamily;
use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::modulation::ModulationState;
use crate::profiles::{gardner, kink};

/// Even cutoff: 1 on `[0, 1]`, `e^{-s}` from `s = 3/2` on, quintic blend between.
pub fn localization_weight(s: f64) -> f64 {
    let s = s.abs();
    if s <= 1.0 {
        1.0
    } else if s >= 1.5 {
        (-s).exp()
    } else {
        let t = 2.0 * (s - 1.0);
        let h = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
        1.0 - (1.0 - (-s).exp()) * h
    }
}

/// Kink plus Gardner solitons to its left, `c = 1/(9 beta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OddGeometry {
    pub beta: f64,
    pub scalings: Vec<f64>,
    pub soliton_centers: Vec<f64>,
    pub kink_center: f64,
}

impl OddGeometry {
    pub fn from_state(beta: f64, state: &ModulationState) -> Result<Self> {
        let kink_center = state.kink_center.ok_or_else(|| invalid("state has no kink"))?;
        Ok(Self { beta, scalings: state.scalings.clone(), soliton_centers: state.soliton_centers.clone(), kink_center })
    }

    pub fn kink_scaling(&self) -> f64 {
        1.0 / (9.0 * self.beta)
    }

    /// Weights whose speed profile rises from `c_1` on the left to `2c` at the kink.
    pub fn weights(&self) -> Result<WeightFamily> {
        let mut speeds = self.scalings.clone();
        speeds.push(2.0 * self.kink_scaling());
        let gap = speeds.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if !(gap > 0.0) {
            return Err(invalid("scalings must increase towards 2c"));
        }
        let mut positions = self.soliton_centers.clone();
        positions.push(self.kink_center);
        WeightFamily::new(0.5 * gap, positions, speeds)
    }

    fn object_centers(&self) -> Vec<f64> {
        let mut v = self.soliton_centers.clone();
        v.push(self.kink_center);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum FormKind {
    /// `(1/2) int (z_x^2 + 2c z^2 - 3 (c - phi_c^2) z^2)`.
    Zhidkov { c: f64, center: f64 },
    /// `int (z_x^2 - (2Q - 3 beta Q^2) z^2 + c z^2)`.
    Soliton { c: f64, beta: f64, center: f64 },
    /// Quadratic energy `F` around kink plus solitons.
    Energy(OddGeometry),
    /// `F` with `2c z^2` replaced by `c(x) z^2`.
    Modified(OddGeometry),
}

impl FormKind {
    pub fn name(&self) -> &'static str {
        match self {
            FormKind::Zhidkov { .. } => "zhidkov",
            FormKind::Soliton { .. } => "soliton",
            FormKind::Energy(_) => "energy",
            FormKind::Modified(_) => "modified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFormSpec {
    #[serde(flatten)]
    pub form: FormKind,
    /// Cutoff width `B`: single-object forms are weighted by `Phi_B` in both the
    /// form and the norm; multi-object forms are measured against
    /// `int max_j Phi_{B,j} (z_x^2 + z^2)`, which equals the sum over objects
    /// up to the overlap of the tails. `None` means the plain `H^1` norm.
    #[serde(default)]
    pub localization: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `int z phi_c' = 0`.
    KinkTranslation,
    /// `int z Q_j' = 0`.
    SolitonTranslation(usize),
    /// `int z Q_j = 0`.
    SolitonMass(usize),
}

impl QuadraticFormSpec {
    pub fn new(form: FormKind) -> Self {
        Self { form, localization: None }
    }

    pub fn localized(mut self, b: Option<f64>) -> Self {
        self.localization = b;
        self
    }

    /// The orthogonality conditions of the modulation decomposition for this form.
    pub fn natural_constraints(&self) -> Vec<Constraint> {
        match &self.form {
            FormKind::Zhidkov { .. } => vec![Constraint::KinkTranslation],
            FormKind::Soliton { .. } => vec![Constraint::SolitonTranslation(0), Constraint::SolitonMass(0)],
            FormKind::Energy(g) | FormKind::Modified(g) => {
                let mut v: Vec<_> = (0..g.scalings.len())
                    .flat_map(|j| [Constraint::SolitonTranslation(j), Constraint::SolitonMass(j)])
                    .collect();
                v.push(Constraint::KinkTranslation);
                v
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(b) = self.localization {
            if !(b > 0.0 && b.is_finite()) {
                return Err(invalid(format!("localization width must be positive, got {b}")));
            }
        }
        match &self.form {
            FormKind::Zhidkov { c, .. } if !(*c > 0.0) => Err(invalid("kink scaling must be positive")),
            FormKind::Soliton { c, beta, .. } => gardner::check_parameters(*c, *beta),
            FormKind::Energy(g) | FormKind::Modified(g) => {
                if g.scalings.len() != g.soliton_centers.len() {
                    return Err(invalid("scalings and centers differ in length"));
                }
                g.scalings.iter().try_for_each(|&c| gardner::check_parameters(c, g.beta))
            }
            _ => Ok(()),
        }
    }

    fn cutoff(&self, x: f64, center: f64) -> f64 {
        self.localization.map_or(1.0, |b| localization_weight((x - center) / b))
    }

    /// Pointwise coefficients `(g, V, w)` of `int g z_x^2 + V z^2` and of the norm
    /// `int w (z_x^2 + z^2)`.
    fn densities(&self, grid: &Grid) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        self.validate()?;
        let n = grid.n();
        let (mut g, mut v, mut w) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        match &self.form {
            FormKind::Zhidkov { c, center } => {
                for (i, &x) in grid.x().iter().enumerate() {
                    let phi = kink::value(*c, x - center);
                    let p = self.cutoff(x, *center);
                    g[i] = 0.5 * p;
                    v[i] = 0.5 * p * (2.0 * c - 3.0 * (c - phi * phi));
                    w[i] = p;
                }
            }
            FormKind::Soliton { c, beta, center } => {
                for (i, &x) in grid.x().iter().enumerate() {
                    let q = gardner::value(*c, *beta, x - center);
                    let p = self.cutoff(x, *center);
                    g[i] = p;
                    v[i] = p * (c - 2.0 * q + 3.0 * beta * q * q);
                    w[i] = p;
                }
            }
            FormKind::Energy(geo) | FormKind::Modified(geo) => {
                let c = geo.kink_scaling();
                let sc = c.sqrt();
                let weights = matches!(self.form, FormKind::Modified(_)).then(|| geo.weights()).transpose()?;
                let centers = geo.object_centers();
                for (i, &x) in grid.x().iter().enumerate() {
                    let phi = kink::value(c, x - geo.kink_center);
                    let r: f64 = geo
                        .scalings
                        .iter()
                        .zip(&geo.soliton_centers)
                        .map(|(&cj, &xj)| geo.beta.sqrt() * gardner::value(cj, geo.beta, x - xj))
                        .sum();
                    let speed = weights.as_ref().map_or(2.0 * c, |wf| wf.speed_profile(0.0, x));
                    g[i] = 0.5;
                    v[i] = 0.5 * (speed - 3.0 * (c - phi * phi) - 6.0 * sc * r + 3.0 * r * r);
                    w[i] = match self.localization {
                        Some(_) => centers.iter().map(|&xc| self.cutoff(x, xc)).fold(0.0, f64::max),
                        None => 1.0,
                    };
                }
            }
        }
        Ok((g, v, w))
    }

    /// Constraint direction sampled on `grid`.
    pub fn constraint_vector(&self, grid: &Grid, constraint: Constraint) -> Result<Vec<f64>> {
        let soliton = |j: usize| -> Result<(f64, f64, f64)> {
            match &self.form {
                FormKind::Soliton { c, beta, center } if j == 0 => Ok((*c, *beta, *center)),
                FormKind::Energy(g) | FormKind::Modified(g) if j < g.scalings.len() => {
                    Ok((g.scalings[j], g.beta, g.soliton_centers[j]))
                }
                _ => Err(invalid(format!("no soliton {j} in this form"))),
            }
        };
        match constraint {
            Constraint::KinkTranslation => {
                let (c, center) = match &self.form {
                    FormKind::Zhidkov { c, center } => (*c, *center),
                    FormKind::Energy(g) | FormKind::Modified(g) => (g.kink_scaling(), g.kink_center),
                    FormKind::Soliton { .. } => return Err(invalid("no kink in this form")),
                };
                Ok(grid.sample(|x| kink::derivative(c, x - center, 1)))
            }
            Constraint::SolitonTranslation(j) => {
                let (c, beta, x0) = soliton(j)?;
                Ok(grid.sample(|x| gardner::derivative(c, beta, x - x0, 1)))
            }
            Constraint::SolitonMass(j) => {
                let (c, beta, x0) = soliton(j)?;
                Ok(grid.sample(|x| gardner::value(c, beta, x - x0)))
            }
        }
    }
}

/// Real spectral first-derivative matrix consistent with [`Grid::derivative`].
pub fn differentiation_matrix(grid: &Grid) -> DMatrix<f64> {
    let n = grid.n();
    let mut e = vec![0.0; n];
    e[0] = 1.0;
    let col = grid.derivative(&e, 1);
    // circulant: D[i][j] = col[(i - j) mod n]
    DMatrix::from_fn(n, n, |i, j| col[(i + n - j) % n])
}

/// Dense form matrix `A` (`q(z) = z^T A z`) and norm Gram matrix `N`.
#[derive(Debug, Clone)]
pub struct FormMatrices {
    pub form: DMatrix<f64>,
    pub norm: DMatrix<f64>,
}

impl FormMatrices {
    pub fn assemble(grid: &Grid, spec: &QuadraticFormSpec) -> Result<Self> {
        let (g, v, w) = spec.densities(grid)?;
        let d = differentiation_matrix(grid);
        let dx = grid.dx();
        let weighted = |weights: &[f64], diag: &[f64]| {
            let mut wd = d.clone();
            for (i, mut row) in wd.row_iter_mut().enumerate() {
                row *= weights[i];
            }
            let mut m = d.transpose() * wd;
            for i in 0..grid.n() {
                m[(i, i)] += diag[i];
            }
            m *= dx;
            symmetrize(&mut m);
            m
        };
        Ok(Self { form: weighted(&g, &v), norm: weighted(&w, &w) })
    }

    /// `z^T A z`.
    pub fn evaluate(&self, z: &[f64]) -> f64 {
        let z = DVector::from_column_slice(z);
        (z.transpose() * &self.form * &z)[(0, 0)]
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
}

/// `M <- H M H` for the reflector `H = I - tau v v^T` (symmetric `M`).
fn reflect_both(m: &mut DMatrix<f64>, v: &DVector<f64>, tau: f64) {
    let p = (&*m * v) * tau;
    let k = 0.5 * tau * v.dot(&p);
    let q = p - v * k;
    m.ger(-1.0, v, &q, 1.0);
    m.ger(-1.0, &q, v, 1.0);
}

/// Restricts `A` and `N` to the Euclidean orthogonal complement of the
/// constraint columns with Householder reflectors.
fn restrict(mut a: DMatrix<f64>, mut nm: DMatrix<f64>, mut cons: DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let m = cons.ncols();
    for i in 0..m {
        let mut v = DVector::zeros(n);
        for r in i..n {
            v[r] = cons[(r, i)];
        }
        let norm = v.norm();
        if norm < 1e-14 * cons.column(i).norm().max(1e-300) || norm == 0.0 {
            return Err(invalid("constraint directions are linearly dependent"));
        }
        v[i] += norm.copysign(v[i]);
        let tau = 2.0 / v.norm_squared();
        reflect_both(&mut a, &v, tau);
        reflect_both(&mut nm, &v, tau);
        for j in i..m {
            let col = cons.column(j).clone_owned();
            let s = tau * v.dot(&col);
            cons.column_mut(j).axpy(-s, &v, 1.0);
        }
    }
    let k = n - m;
    Ok((a.view((m, m), (k, k)).clone_owned(), nm.view((m, m), (k, k)).clone_owned()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityEstimate {
    pub form: String,
    pub localization: Option<f64>,
    pub constraints: Vec<Constraint>,
    /// Smallest generalized eigenvalue of the form against the norm on the constrained subspace.
    pub lambda_min: f64,
    /// Lowest few eigenvalues, ascending.
    pub lowest: Vec<f64>,
}

impl CoercivityEstimate {
    /// Key `form|B|constraints` used in JSON reports.
    pub fn key(&self) -> String {
        let b = self.localization.map_or_else(|| "none".to_string(), |b| b.to_string());
        let cons: Vec<String> = self.constraints.iter().map(|c| format!("{c:?}")).collect();
        format!("{}|{}|{}", self.form, b, cons.join(","))
    }
}

/// Smallest eigenvalue of `q(z) / ||z||^2` over `z` orthogonal to `constraints`.
pub fn coercivity_estimate(grid: &Grid, spec: &QuadraticFormSpec, constraints: &[Constraint]) -> Result<CoercivityEstimate> {
    let mats = FormMatrices::assemble(grid, spec)?;
    let n = grid.n();
    let mut cons = DMatrix::zeros(n, constraints.len());
    for (j, &c) in constraints.iter().enumerate() {
        cons.set_column(j, &DVector::from_vec(spec.constraint_vector(grid, c)?));
    }
    let (a, nm) = restrict(mats.form, mats.norm, cons)?;
    let chol = nm.cholesky().ok_or_else(|| Error::Numerical("norm matrix is not positive definite".into()))?;
    let l = chol.l();
    let x = l.solve_lower_triangular(&a).ok_or_else(|| Error::Numerical("singular norm factor".into()))?;
    let mut c = l.solve_lower_triangular(&x.transpose()).ok_or_else(|| Error::Numerical("singular norm factor".into()))?;
    symmetrize(&mut c);
    let mut eig: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(CoercivityEstimate {
        form: spec.form.name().to_string(),
        localization: spec.localization,
        constraints: constraints.to_vec(),
        lambda_min: eig[0],
        lowest: eig.iter().take(4).copied().collect(),
    })
}

/// Estimates for each cutoff width in `widths`.
pub fn scan_localization(
    grid: &Grid,
    form: &FormKind,
    constraints: &[Constraint],
    widths: &[f64],
) -> Result<Vec<CoercivityEstimate>> {
    widths
        .iter()
        .map(|&b| coercivity_estimate(grid, &QuadraticFormSpec { form: form.clone(), localization: Some(b) }, constraints))
        .collect()
}

/// Relative change of `lambda_min` between the last two entries of a scan.
pub fn plateau_change(scan: &[CoercivityEstimate]) -> Option<f64> {
    let [.., a, b] = scan else { return None };
    Some((b.lambda_min - a.lambda_min).abs() / b.lambda_min.abs().max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zhidkov(c: f64) -> QuadraticFormSpec {
        QuadraticFormSpec::new(FormKind::Zhidkov { c, center: 0.0 })
    }

    #[test]
    fn differentiation_matrix_matches_fft() {
        let grid = Grid::new(64, 20.0).unwrap();
        let f = grid.sample(|x| (-(x * x) / 4.0).exp());
        let d = differentiation_matrix(&grid);
        let df = &d * DVector::from_vec(f.clone());
        let spectral = grid.derivative(&f, 1);
        for i in 0..64 {
            assert!((df[i] - spectral[i]).abs() < 1e-12);
        }
        assert!((&d + d.transpose()).amax() < 1e-12);
    }

    #[test]
    fn zhidkov_zero_mode_and_positivity() {
        let grid = Grid::new(256, 60.0).unwrap();
        let free = coercivity_estimate(&grid, &zhidkov(0.5), &[]).unwrap();
        assert!(free.lambda_min.abs() < 1e-6, "{:?}", free.lowest);
        let constrained = coercivity_estimate(&grid, &zhidkov(0.5), &[Constraint::KinkTranslation]).unwrap();
        assert!(constrained.lambda_min > 1e-2, "{:?}", constrained.lowest);
        assert!(constrained.lambda_min >= free.lambda_min);
    }

    #[test]
    fn soliton_form_needs_both_constraints() {
        let grid = Grid::new(256, 80.0).unwrap();
        let spec = QuadraticFormSpec::new(FormKind::Soliton { c: 0.1, beta: 1.0, center: 0.0 });
        let none = coercivity_estimate(&grid, &spec, &[]).unwrap();
        let one = coercivity_estimate(&grid, &spec, &[Constraint::SolitonTranslation(0)]).unwrap();
        let both = coercivity_estimate(&grid, &spec, &spec.natural_constraints()).unwrap();
        assert!(none.lambda_min < 0.0);
        assert!(none.lambda_min <= one.lambda_min + 1e-12 && one.lambda_min <= both.lambda_min + 1e-12);
        assert!(both.lambda_min > 0.0);
    }

    #[test]
    fn two_routes_agree() {
        let grid = Grid::new(128, 60.0).unwrap();
        let geo = OddGeometry { beta: 1.0, scalings: vec![0.05, 0.12], soliton_centers: vec![-20.0, 0.0], kink_center: 15.0 };
        let spec = QuadraticFormSpec::new(FormKind::Energy(geo.clone()));
        let m = FormMatrices::assemble(&grid, &spec).unwrap();
        let z = grid.sample(|x| (0.3 * x).sin() * (-(x / 8.0).powi(2)).exp());
        let state = ModulationState {
            soliton_centers: geo.soliton_centers.clone(),
            scalings: geo.scalings.clone(),
            kink_center: Some(geo.kink_center),
            z: z.clone(),
            iterations: 0,
            orthogonality: vec![],
            z_h1: 0.0,
        };
        let quad = crate::modulation::quadratic_energy(&grid, geo.beta, &state);
        assert!((m.evaluate(&z) - quad).abs() < 1e-13 * quad.abs().max(1.0));
        assert!((m.form.clone() - m.form.transpose()).amax() == 0.0);
    }

    #[test]
    fn restricted_eigenvalues_ignore_constraint_directions() {
        let grid = Grid::new(64, 20.0).unwrap();
        let spec = zhidkov(1.0);
        let cons = [Constraint::KinkTranslation];
        let est = coercivity_estimate(&grid, &spec, &cons).unwrap();
        // direct check: the Rayleigh quotient at the constrained minimizer is lambda_min
        let mats = FormMatrices::assemble(&grid, &spec).unwrap();
        let g = DVector::from_vec(spec.constraint_vector(&grid, cons[0]).unwrap());
        let mut best = f64::INFINITY;
        for k in 1..6 {
            let z = DVector::from_vec(grid.sample(|x| (k as f64 * x / 3.0).cos() * (-(x * x) / 8.0).exp()));
            let z = &z - &g * (g.dot(&z) / g.dot(&g));
            let q = (z.transpose() * &mats.form * &z)[(0, 0)] / (z.transpose() * &mats.norm * &z)[(0, 0)];
            best = best.min(q);
        }
        assert!(est.lambda_min <= best + 1e-12);
    }

    #[test]
    fn json_keys() {
        let spec: QuadraticFormSpec = serde_json::from_str(r#"{"form":"zhidkov","c":0.5,"center":0.0,"localization":10}"#).unwrap();
        assert_eq!(spec.localization, Some(10.0));
        let est = CoercivityEstimate {
            form: "zhidkov".into(),
            localization: Some(10.0),
            constraints: vec![Constraint::KinkTranslation],
            lambda_min: 0.1,
            lowest: vec![0.1],
        };
        assert_eq!(est.key(), "zhidkov|10|KinkTranslation");
    }

    proptest! {
        #[test]
        fn cutoff_bounds(s in 0.0f64..30.0) {
            let p = localization_weight(s);
            prop_assert!(p >= (-s).exp() * (1.0 - 1e-12));
            prop_assert!(p <= 3.0 * (-s).exp() + 1e-12);
            prop_assert!(localization_weight(s + 1e-3) <= p + 1e-15);
            prop_assert_eq!(p, localization_weight(-s));
        }
    }

    #[test]
    fn cutoff_is_c2() {
        let h = 1e-5;
        let d2 = |s: f64| (localization_weight(s + h) - 2.0 * localization_weight(s) + localization_weight(s - h)) / (h * h);
        for s0 in [1.0, 1.5] {
            let jump = |d: f64| (d2(s0 + d) - d2(s0 - d)).abs();
            // a discontinuous second derivative would leave a jump that does not shrink
            assert!(jump(1e-3) < 0.2 * jump(1e-2) + 1e-4, "{} {}", jump(1e-3), jump(1e-2));
        }
    }
}
