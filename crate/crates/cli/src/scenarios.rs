//! Scenario runners. Each returns a [`ScenarioReport`] and writes its
//! artifacts (CSV, JSON) into the scenario directory when one is given.

use std::collections::BTreeMap;
use std::time::Instant;

use multikink::coercivity::{
    coercivity_estimate, plateau_change, scan_localization, CoercivityEstimate, Constraint, FormKind,
    OddGeometry, QuadraticFormSpec,
};
use multikink::diagnostics::{
    energy_mass, gardner_energy_mass, h1_norm_windowed, left_mass_sums, monotonicity_audit, write_records_csv,
    DiagnosticsRecord, DiagnosticsSummary, WeightFamily,
};
use multikink::modulation::{
    energy_expansion_check, fit_modulation, fit_soliton_sum, interaction_residual, ExpansionCheck,
    ModulationGuess, ModulationOptions, ModulationState, ModulationTrack, SolitonFamily,
};
use multikink::nonlinearity::{Convention, Nonlinearity};
use multikink::profiles::gardner::{self, gardner_identities_report, EvenTwoKink};
use multikink::profiles::multikink::{build_multikink_profile, MultiKinkConfig, Parity};
use multikink::solver::{evolve, evolve_with, temporal_convergence, Equation, EvolutionSpec};
use multikink::transforms::{
    derived_nonlinearity, even_background_map, even_background_unmap, gardner_transform, kdv_map_odd, miura,
    odd_compose, odd_decompose, Branch, EvenBranch, OddFrame, TransformCheck,
};
use multikink::{Field, Grid};
use serde::Serialize;

use crate::config::{
    CoercivityParams, CollisionParams, GridSpec, IdentitiesParams, ModulationParams, Scenario, SolverParams,
    StabilityParams, TransformParams,
};
use crate::error::CliError;
use crate::perturbation::perturb;
use crate::report::{Artifacts, Check, ScenarioReport};

/// Runs `scenario`, stamps the elapsed time and writes `summary.json`.
pub fn run(scenario: &Scenario, artifacts: &Artifacts) -> Result<ScenarioReport, CliError> {
    let start = Instant::now();
    let mut report = match scenario {
        Scenario::Identities(p) => identities(p, artifacts)?,
        Scenario::TransformCheck(p) => transforms(p, artifacts)?,
        Scenario::Solver(p) => solver(p, artifacts)?,
        Scenario::EvenStability(p) => stability(Parity::Even, p, artifacts)?,
        Scenario::OddStability(p) => stability(Parity::Odd, p, artifacts)?,
        Scenario::Modulation(p) => modulation(p, artifacts)?,
        Scenario::Collision(p) => collision(p, artifacts)?,
        Scenario::Coercivity(p) => coercivity(p, artifacts)?,
    };
    report.elapsed_seconds = start.elapsed().as_secs_f64();
    artifacts.summary(&report)?;
    Ok(report)
}

fn grid(spec: GridSpec) -> Result<Grid, CliError> {
    Ok(Grid::new(spec.n, spec.length)?)
}

fn write_json<T: Serialize>(artifacts: &Artifacts, name: &str, value: &T) -> Result<(), CliError> {
    artifacts.file(name, |w| Ok(serde_json::to_writer_pretty(w, value)?))
}

fn l2_distance(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    grid.l2_norm(&d)
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Objects spaced by `separation` and centered at the origin, solitons first.
fn odd_or_even_config(parity: Parity, beta: f64, scalings: &[f64], separation: f64) -> Result<MultiKinkConfig, CliError> {
    let count = scalings.len() + usize::from(parity == Parity::Odd);
    let mid = 0.5 * (count as f64 - 1.0);
    let mut pos: Vec<f64> = (0..count).map(|k| (k as f64 - mid) * separation).collect();
    Ok(match parity {
        Parity::Even => MultiKinkConfig::even(beta, scalings.to_vec(), pos, separation)?,
        Parity::Odd => {
            let kink = pos.pop().expect("at least the kink");
            MultiKinkConfig::odd(beta, scalings.to_vec(), pos, kink, separation)?
        }
    })
}

fn identities(p: &IdentitiesParams, artifacts: &Artifacts) -> Result<ScenarioReport, CliError> {
    let start = Instant::now();
    let mut report = ScenarioReport::new("identities");
    let mut rows = Vec::new();
    for &(beta, c) in &p.points {
        let r = gardner_identities_report(c, beta, p.quadrature_points)?;
        report.check(Check::below(format!("identities beta={beta} c={c}"), r.max_residual(), p.tolerance));
        for res in &r.residuals {
            report.metric(format!("beta={beta} c={c} {}", res.name), res.residual);
        }
        rows.push(r);
    }
    report.check(Check::below("runtime seconds", start.elapsed().as_secs_f64(), p.max_seconds));
    write_json(artifacts, "identities.json", &rows)?;
    Ok(report)
}

/// Snapshots of a run, stored at the spec's output interval.
fn run_plain(initial: &Field, f: Nonlinearity, grid: &Grid, dt: f64, horizon: f64, every: f64) -> Result<Vec<(f64, Field)>, CliError> {
    let spec = EvolutionSpec::new(Equation::plain(f), grid.clone(), dt, horizon)?.with_output_interval(every);
    Ok(evolve(initial, &spec)?)
}

fn edge(name: &str, datum: &str, horizon: f64, residuals: Vec<(f64, f64)>) -> TransformCheck {
    TransformCheck { transform: name.into(), initial_datum: datum.into(), horizon, residuals }
}

fn transforms(p: &TransformParams, artifacts: &Artifacts) -> Result<ScenarioReport, CliError> {
    let mut report = ScenarioReport::new("transform-check");
    let grid = grid(p.grid)?;
    let beta = p.beta;
    let cs = p.soliton_scaling;
    gardner::check_parameters(cs, beta)?;
    let kdv = Nonlinearity::power(2, Convention::Focusing)?;
    let ck = 1.0 / (9.0 * beta);
    let (t_end, every) = (p.horizon, p.output_interval);

    let soliton = |x0: f64| grid.sample(|x| gardner::value(cs, beta, x - x0));
    let bump = |x0: f64| -> Vec<f64> {
        let b = grid.sample(|x| (-((x - x0) / 2.0).powi(2)).exp());
        let s = p.perturbation / grid.h1_norm(&b);
        b.iter().map(|v| v * s).collect()
    };
    let plus = |a: Vec<f64>, b: Vec<f64>| -> Vec<f64> { a.iter().zip(&b).map(|(x, y)| x + y).collect() };

    let mut checks = Vec::new();
    // Decaying Gardner data centered in the box; odd data sits left of the kink at 0.
    let data = [("soliton", soliton(0.0), soliton(-20.0)), ("soliton+bump", plus(soliton(0.0), bump(5.0)), plus(soliton(-20.0), bump(-15.0)))];
    for (label, v0, w0) in data {
        let v0 = Field::decaying(&grid, v0)?;
        let gardner_run = run_plain(&v0, Nonlinearity::gardner(beta), &grid, p.dt, t_end, every)?;

        let g0 = gardner_transform(&v0, beta)?;
        let kdv_run = run_plain(&g0, kdv.clone(), &grid, p.dt, t_end, every)?;
        let mut res = Vec::new();
        for ((t, v), (_, k)) in gardner_run.iter().zip(&kdv_run) {
            res.push((*t, l2_distance(&grid, gardner_transform(v, beta)?.values(), k.values())));
        }
        checks.push(edge("gardner-to-kdv", label, t_end, res));

        let u0 = even_background_map(&v0, beta, 0.0, EvenBranch::Upper)?;
        let mkdv_run = run_plain(&u0, Nonlinearity::cubic(), &grid, p.dt, t_end, every)?;
        let mut res = Vec::new();
        for ((t, v), (_, u)) in gardner_run.iter().zip(&mkdv_run) {
            res.push((*t, l2_distance(&grid, even_background_unmap(u, beta, *t, EvenBranch::Upper)?.values(), v.values())));
        }
        checks.push(edge("even-background", label, t_end, res));

        // Odd side: kink at the origin, perturbation w evolved in its own frame.
        let w0 = Field::decaying(&grid, w0)?;
        let kink0 = 0.0;
        let spec = EvolutionSpec::new(Equation::kink_perturbation(beta, kink0), grid.clone(), p.dt, t_end)?
            .with_output_interval(every);
        let w_run = evolve(&w0, &spec)?;
        let u_start = odd_compose(&w0, &OddFrame::new(beta, 0.0, kink0)?)?;
        let m0 = miura(&u_start, ck, 0.0)?;
        let kdv_odd = run_plain(&m0, kdv.clone(), &grid, p.dt, t_end, every)?;
        let (mut res_m, mut res_k) = (Vec::new(), Vec::new());
        for ((t, w), (_, k)) in w_run.iter().zip(&kdv_odd) {
            let frame = OddFrame::new(beta, *t, kink0 - ck * t)?;
            let u = odd_compose(w, &frame)?;
            res_m.push((*t, l2_distance(&grid, miura(&u, ck, *t)?.values(), k.values())));
            let py = spec.equation.kink_center_at(*t).expect("kink mode");
            res_k.push((*t, l2_distance(&grid, kdv_map_odd(w, beta, py)?.values(), k.values())));
        }
        checks.push(edge("miura", label, t_end, res_m));
        checks.push(edge("odd-to-kdv", label, t_end, res_k));

        // Round trip of the odd decomposition at the final time.
        let (t, w) = w_run.last().expect("nonempty");
        let u = odd_compose(w, &OddFrame::new(beta, *t, kink0 - ck * t)?)?;
        let (w_back, _) = odd_decompose(&u, beta, *t)?;
        report.metric(format!("odd round trip {label}"), l2_distance(&grid, w_back.values(), w.values()));
    }
    for c in &checks {
        report.check(Check::below(format!("{} [{}] sup_t L2", c.transform, c.initial_datum), c.max_residual(), p.tolerance));
    }

    let tk = EvenTwoKink::new(beta, cs)?;
    let mut worst = 0.0_f64;
    for t in [0.0, 0.5 * t_end, t_end] {
        for &x in grid.x() {
            worst = worst.max((tk.eval(1.0, t, x) - tk.eval_via_soliton(1.0, t, x)).abs());
        }
    }
    report.check(Check::below("two-kink representations sup", worst, p.two_kink_tolerance));
    write_json(artifacts, "transform_checks.json", &checks)?;
    Ok(report)
}

fn solver(p: &SolverParams, artifacts: &Artifacts) -> Result<ScenarioReport, CliError> {
    let mut report = ScenarioReport::new("solver");
    let grid = grid(p.grid)?;
    let (beta, c) = (p.beta, p.c);
    gardner::check_parameters(c, beta)?;
    let exact = |t: f64| grid.sample(|x| gardner::value(c, beta, x - c * t));
    let v0 = Field::decaying(&grid, exact(0.0))?;
    let spec = EvolutionSpec::new(Equation::plain(Nonlinearity::gardner(beta)), grid.clone(), p.dt, p.horizon)?
        .with_output_interval(p.horizon / 10.0);
    let traj = evolve(&v0, &spec)?;
    let mut translation = 0.0_f64;
    let (e0, m0) = gardner_energy_mass(&v0, beta);
    let (mut de, mut dm) = (0.0_f64, 0.0_f64);
    for (t, v) in &traj {
        let d: Vec<f64> = v.values().iter().zip(exact(*t)).map(|(a, b)| a - b).collect();
        translation = translation.max(grid.h1_norm(&d));
        let (e, m) = gardner_energy_mass(v, beta);
        de = de.max(((e - e0) / e0).abs());
        dm = dm.max(((m - m0) / m0).abs());
    }
    report.check(Check::below("soliton translation sup_t H1 error", translation, p.translation_tolerance));
    report.check(Check::below("relative energy drift", de, p.drift_tolerance));
    report.check(Check::below("relative mass drift", dm, p.drift_tolerance));
    // Temporal errors are measured against a run with a much finer step on the
    // same grid, so the fixed spatial error does not enter the observed order.
    let finest = p.convergence_dts.iter().copied().fold(f64::INFINITY, f64::min);
    let mut fine = spec.clone();
    fine.dt = finest / 8.0;
    fine.output_every = usize::MAX;
    let reference = evolve(&v0, &fine)?.pop().expect("nonempty").1.into_values();
    let conv = temporal_convergence(&v0, &spec, &p.convergence_dts, |_| reference.clone())?;
    for (h, e) in conv.steps.iter().zip(&conv.errors) {
        report.metric(format!("H1 error at dt={h}"), *e);
    }
    report.check(Check::above("temporal order (min over refinements)", conv.min_order(), p.min_order));
    write_json(artifacts, "convergence.json", &conv)?;
    Ok(report)
}

/// One perturbed stability run.
struct StabilityRun {
    track: ModulationTrack,
    records: Vec<DiagnosticsRecord>,
    /// Snapshots of the soliton-frame field (`v` even, `w` odd).
    frames: Vec<(f64, Field)>,
}

fn stability_run(
    config: &MultiKinkConfig,
    initial: &Field,
    grid: &Grid,
    p: &StabilityParams,
) -> Result<StabilityRun, CliError> {
    let beta = config.beta;
    let c = config.kink_scaling();
    let opts = ModulationOptions { refit_scalings: p.refit_scalings, ..Default::default() };
    let weights = WeightFamily::from_config(config)?;
    let mut guess = ModulationGuess::from_config(config, 0.0);
    let mut track = ModulationTrack::default();
    let mut records = Vec::new();
    let mut frames = Vec::new();
    let mut observe = |t: f64, u: &Field, frame: &Field| -> multikink::Result<()> {
        let state = fit_modulation(u, config, &guess, opts)?;
        guess = state.as_guess();
        track.push(t, &state);
        let lower = state.centers().first().copied().unwrap_or(0.0) - 0.5 * config.separation;
        records.push(DiagnosticsRecord {
            t,
            energy: energy_mass(u, c)?.energy,
            mass: energy_mass(u, c)?.mass,
            gardner_energy: gardner_energy_mass(frame, beta).0,
            modified_masses: (0..weights.cuts())
                .map(|j| multikink::diagnostics::modified_mass(frame, j, &weights, t))
                .collect::<multikink::Result<_>>()?,
            left_masses: left_mass_sums(grid, beta, &state.scalings),
            h1_residual: state.z_h1,
            windowed_h1: h1_norm_windowed(grid, &state.z, lower),
        });
        frames.push((t, frame.clone()));
        Ok(())
    };
    match config.parity {
        Parity::Even => {
            let spec = EvolutionSpec::new(Equation::plain(Nonlinearity::cubic()), grid.clone(), p.dt, p.horizon)?
                .with_output_interval(p.output_interval);
            evolve_with(initial, &spec, |t, u| {
                let v = even_background_unmap(u, beta, t, EvenBranch::Upper)?;
                observe(t, u, &v)
            })?;
        }
        Parity::Odd => {
            let (w0, frame0) = odd_decompose(initial, beta, 0.0)?;
            let spec = EvolutionSpec::new(
                Equation::kink_perturbation(beta, frame0.kink_center_y()),
                grid.clone(),
                p.dt,
                p.horizon,
            )?
            .with_output_interval(p.output_interval);
            evolve_with(&w0, &spec, |t, w| {
                let u = odd_compose(w, &OddFrame::new(beta, t, frame0.kink_center - c * t)?)?;
                observe(t, &u, w)
            })?;
        }
    }
    Ok(StabilityRun { track, records, frames })
}

fn stability(parity: Parity, p: &StabilityParams, artifacts: &Artifacts) -> Result<ScenarioReport, CliError> {
    let name = match parity {
        Parity::Even => "even-stability",
        Parity::Odd => "odd-stability",
    };
    let mut report = ScenarioReport::new(name);
    if p.alphas.len() < 2 {
        return Err(CliError::Config("stability needs at least two perturbation sizes".into()));
    }
    let grid = grid(p.grid)?;
    let config = odd_or_even_config(parity, p.beta, &p.scalings, p.separation)?;
    let scale = (-config.sigma0() * config.separation).exp();
    report.metric("sigma0", config.sigma0());
    report.metric("exp(-sigma0 L)", scale);
    let mut constants = Vec::new();
    for &alpha in &p.alphas {
        let pert = perturb(&config, &grid, &p.shape, alpha, p.seed)?;
        let base = build_multikink_profile(&pert.config, &grid, 0.0)?;
        let values: Vec<f64> = base.values().iter().zip(&pert.additive).map(|(a, b)| a + b).collect();
        let initial = base.with_values(values)?;
        let started = Instant::now();
        let run = stability_run(&pert.config, &initial, &grid, p)?;
        report.check(Check::below(format!("alpha={alpha} runtime seconds"), started.elapsed().as_secs_f64(), p.max_run_seconds));
        let sup = run.track.sup_z();
        let a0 = sup / (alpha + scale);
        constants.push(a0);
        report.metric(format!("alpha={alpha} sup_t ||z||_H1"), sup);
        report.metric(format!("alpha={alpha} A0"), a0);
        let z0 = run.track.rows.first().map_or(0.0, |r| r.z_h1);
        let k = run
            .track
            .rows
            .iter()
            .map(|r| {
                let drift: f64 = r.scalings.iter().zip(&run.track.rows[0].scalings).map(|(a, b)| (a - b).abs()).sum();
                drift / (r.z_h1 * r.z_h1 + z0 * z0 + scale)
            })
            .fold(0.0, f64::max);
        report.metric(format!("alpha={alpha} scaling drift constant"), k);
        let summary = DiagnosticsSummary::from_records(&run.records);
        if let Some(e) = summary.energy {
            report.metric(format!("alpha={alpha} energy relative drift"), e.relative_drift);
        }
        let weights = WeightFamily::from_config(&pert.config)?;
        let audit = monotonicity_audit(&run.frames, &weights, config.separation)?;
        report.metric(format!("alpha={alpha} modified mass fitted K"), audit.fitted_k);
        if parity == Parity::Odd {
            for cut in &audit.cuts {
                report.check(Check::above(
                    format!("alpha={alpha} cut {} min_t (M(t) - M(0))", cut.cut + 1),
                    cut.min_change,
                    -p.audit_factor * scale,
                ));
            }
        }
        let tag = format!("alpha_{alpha}");
        artifacts.file(&format!("modulation_track_{tag}.csv"), |w| Ok(run.track.write_csv(w)?))?;
        artifacts.file(&format!("diagnostics_{tag}.csv"), |w| Ok(write_records_csv(w, &run.records)?))?;
        write_json(artifacts, &format!("monotonicity_{tag}.json"), &audit)?;
    }
    let max = constants.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = constants.iter().copied().fold(f64::INFINITY, f64::min);
    report.check(Check::below("A0 max/min ratio", max / min, p.ratio_tolerance));
    Ok(report)
}

#[derive(Serialize)]
struct ExpansionRow {
    alpha: f64,
    orthogonality: f64,
    check: ExpansionCheck,
}

fn modulation(p: &ModulationParams, artifacts: &Artifacts) -> Result<ScenarioReport, CliError> {
    let mut report = ScenarioReport::new("modulation");
    if p.alphas.len() < 2 || p.separations.len() < 2 {
        return Err(CliError::Config("need at least two perturbation sizes and two separations".into()));
    }
    let grid = grid(p.grid)?;
    let config = odd_or_even_config(Parity::Odd, p.beta, &p.scalings, p.separation)?;
    let mut rows = Vec::new();
    for &alpha in &p.alphas {
        let pert = perturb(&config, &grid, &p.shape, alpha, p.seed)?;
        let base = build_multikink_profile(&pert.config, &grid, 0.0)?;
        let values: Vec<f64> = base.values().iter().zip(&pert.additive).map(|(a, b)| a + b).collect();
        let u = base.with_values(values)?;
        let opts = ModulationOptions { tol: 0.1 * p.orthogonality_tolerance, ..Default::default() };
        let state: ModulationState = fit_modulation(&u, &config, &ModulationGuess::from_config(&config, 0.0), opts)?;
        report.check(Check::below(format!("alpha={alpha} max orthogonality"), state.max_orthogonality(), p.orthogonality_tolerance));
        let check = energy_expansion_check(&u, &state, p.beta)?;
        report.metric(format!("alpha={alpha} expansion defect"), check.defect);
        report.metric(format!("alpha={alpha} ||z||_H1"), check.z_h1);
        rows.push(ExpansionRow { alpha, orthogonality: state.max_orthogonality(), check });
    }
    let (lo, hi) = p.exponent_range;
    for w in rows.windows(2) {
        let exponent = (w[0].check.defect.abs() / w[1].check.defect.abs()).ln() / (w[0].alpha / w[1].alpha).ln();
        report.check(Check::within(format!("expansion exponent alpha={}..{}", w[0].alpha, w[1].alpha), exponent, lo, hi));
    }

    let sigma0 = config.sigma0();
    report.metric("sigma0", sigma0);
    let mut profile = Vec::new();
    let mut energy = Vec::new();
    let mut rows_csv = Vec::new();
    for &s in &p.separations {
        let centers = [-0.5 * s, 0.5 * s];
        let r = interaction_residual(&grid, p.beta, &centers, &p.scalings)?;
        rows_csv.push([s, r.profile_h1, r.energy_defect]);
        profile.push(r.profile_h1.ln());
        energy.push(r.energy_defect.abs().ln());
    }
    let rate_p = -slope(&p.separations, &profile);
    let rate_e = -slope(&p.separations, &energy);
    report.check(Check::above("interaction profile decay rate", rate_p, p.rate_factor * sigma0));
    report.check(Check::above("interaction energy decay rate", rate_e, p.rate_factor * sigma0));
    write_json(artifacts, "expansion.json", &rows)?;
    artifacts.file("interaction.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["separation", "profile_h1", "energy_defect"])?;
        for row in &rows_csv {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
struct CollisionOutcome {
    label: String,
    family: SolitonFamily,
    initial_centers: [f64; 2],
    fitted_centers: Vec<f64>,
    fitted_scalings: Vec<f64>,
    defect_h1: f64,
    seconds: f64,
}

fn collide(
    label: &str,
    p: &CollisionParams,
    grid: &Grid,
    f: Nonlinearity,
    family: SolitonFamily,
    centers: [f64; 2],
) -> Result<CollisionOutcome, CliError> {
    let started = Instant::now();
    let (cs, cf) = p.scalings;
    let v0 = grid.sample(|x| family.value(cs, x - centers[0]) + family.value(cf, x - centers[1]));
    let v0 = Field::decaying(grid, v0)?;
    let spec = EvolutionSpec::new(Equation::plain(f), grid.clone(), p.dt, p.horizon)?.with_output_every(usize::MAX);
    let traj = evolve(&v0, &spec)?;
    let (t, v) = traj.last().expect("nonempty");
    let guess = [centers[0] + cs * t, centers[1] + cf * t];
    let fit = fit_soliton_sum(v, family, &guess, &[cs, cf])?;
    Ok(CollisionOutcome {
        label: label.into(),
        family,
        initial_centers: centers,
        fitted_centers: fit.centers,
        fitted_scalings: fit.scalings,
        defect_h1: fit.defect_h1,
        seconds: started.elapsed().as_secs_f64(),
    })
}

fn collision(p: &CollisionParams, artifacts: &Artifacts) -> Result<ScenarioReport, CliError> {
    let mut report = ScenarioReport::new("collision");
    let grid = grid(p.grid)?;
    let b = p.quartic_b0;
    let quartic = Nonlinearity::new(vec![0.0, 0.0, 6.0 * b * b, -4.0 * b, 1.0], Convention::Defocusing)?;
    let dq = derived_nonlinearity(&quartic, b, Branch::Principal)?;
    let power = dq
        .f_tilde
        .as_pure_power()
        .ok_or_else(|| CliError::Config(format!("quartic source did not reduce to a pure power: {:?}", dq.f_tilde)))?;
    let dc = derived_nonlinearity(&Nonlinearity::cubic(), gardner::background(p.beta), Branch::Principal)?;
    let beta = dc
        .f_tilde
        .as_gardner()
        .ok_or_else(|| CliError::Config(format!("cubic source did not reduce to Gardner: {:?}", dc.f_tilde)))?;
    report.metric("derived power", power as f64);
    report.metric("derived beta", beta);

    // Fast soliton starts `separation` behind the slow one and overtakes it;
    // the control keeps the fast one ahead so nothing collides.
    let slow = -0.5 * grid.length() + 50.0 + p.separation;
    let behind = [slow, slow - p.separation];
    let ahead = [slow - p.separation, slow];
    let pure = collide("pure-power collision", p, &grid, dq.f_tilde.clone(), SolitonFamily::PurePower { p: power }, behind)?;
    let integrable = collide("gardner collision", p, &grid, dc.f_tilde.clone(), SolitonFamily::Gardner { beta }, behind)?;
    let control = collide("gardner control", p, &grid, dc.f_tilde.clone(), SolitonFamily::Gardner { beta }, ahead)?;
    for run in [&pure, &integrable, &control] {
        report.check(Check::below(format!("{} runtime seconds", run.label), run.seconds, p.max_run_seconds));
    }
    let floor = control.defect_h1;
    report.metric("noise floor", floor);
    report.metric("pure-power defect", pure.defect_h1);
    report.metric("gardner defect", integrable.defect_h1);
    report.check(Check::above("pure-power defect / floor", pure.defect_h1 / floor, p.inelastic_factor));
    report.check(Check::below("gardner defect / floor", integrable.defect_h1 / floor, p.elastic_factor));
    write_json(artifacts, "collision.json", &[pure, integrable, control])?;
    Ok(report)
}

fn coercivity(p: &CoercivityParams, artifacts: &Artifacts) -> Result<ScenarioReport, CliError> {
    let mut report = ScenarioReport::new("coercivity");
    let mut all: BTreeMap<String, CoercivityEstimate> = BTreeMap::new();
    let c = 1.0 / (9.0 * p.beta);

    let kink_grid = grid(p.kink_grid)?;
    let zhidkov = FormKind::Zhidkov { c, center: 0.0 };
    let free = coercivity_estimate(&kink_grid, &QuadraticFormSpec::new(zhidkov.clone()), &[])?;
    report.check(Check::below("zhidkov unconstrained |lambda_min|", free.lambda_min.abs(), p.zero_mode_tolerance));
    let cons = [Constraint::KinkTranslation];
    let plain = coercivity_estimate(&kink_grid, &QuadraticFormSpec::new(zhidkov.clone()), &cons)?;
    report.check(Check::above("zhidkov constrained lambda_min", plain.lambda_min, f64::MIN_POSITIVE));
    let scan = scan_localization(&kink_grid, &zhidkov, &cons, &p.widths)?;
    scan_checks(&mut report, "zhidkov", &scan, p.plateau_tolerance);
    for e in [free, plain].into_iter().chain(scan) {
        all.insert(e.key(), e);
    }

    let full_grid = grid(p.full_grid)?;
    let config = odd_or_even_config(Parity::Odd, p.beta, &p.scalings, p.separation)?;
    let geometry = OddGeometry {
        beta: p.beta,
        scalings: config.scalings.clone(),
        soliton_centers: config.positions.clone(),
        kink_center: config.kink_position,
    };
    let modified = FormKind::Modified(geometry.clone());
    let spec = QuadraticFormSpec::new(modified.clone());
    let cons = spec.natural_constraints();
    let plain = coercivity_estimate(&full_grid, &spec, &cons)?;
    report.check(Check::above("modified form constrained lambda_min", plain.lambda_min, f64::MIN_POSITIVE));
    let scan = scan_localization(&full_grid, &modified, &cons, &p.widths)?;
    scan_checks(&mut report, "modified form", &scan, p.plateau_tolerance);
    let energy = coercivity_estimate(&full_grid, &QuadraticFormSpec::new(FormKind::Energy(geometry)), &cons)?;
    report.metric("energy form constrained lambda_min", energy.lambda_min);
    for e in [plain, energy].into_iter().chain(scan) {
        all.insert(e.key(), e);
    }

    for (j, &cj) in p.scalings.iter().enumerate() {
        let form = FormKind::Soliton { c: cj, beta: p.beta, center: 0.0 };
        let spec = QuadraticFormSpec::new(form.clone());
        let cons = spec.natural_constraints();
        let e = coercivity_estimate(&full_grid, &spec, &cons)?;
        report.metric(format!("soliton {} constrained lambda_min", j + 1), e.lambda_min);
        for s in scan_localization(&full_grid, &form, &cons, &p.widths)? {
            report.metric(format!("soliton {} lambda_min B={}", j + 1, s.localization.unwrap_or(0.0)), s.lambda_min);
            all.insert(format!("{}#{}", s.key(), j + 1), s);
        }
        all.insert(format!("{}#{}", e.key(), j + 1), e);
    }
    write_json(artifacts, "coercivity.json", &all)?;
    Ok(report)
}

fn scan_checks(report: &mut ScenarioReport, label: &str, scan: &[CoercivityEstimate], tolerance: f64) {
    for e in scan {
        let b = e.localization.unwrap_or(0.0);
        report.check(Check::above(format!("{label} lambda_min B={b}"), e.lambda_min, f64::MIN_POSITIVE));
    }
    let change = plateau_change(scan).unwrap_or(f64::NAN);
    report.check(Check::below(format!("{label} plateau change (two widest B)"), change, tolerance));
}

/// Applies command-line overrides to every matching field of a scenario.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid_n: Option<usize>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, scenario: &mut Scenario) {
        let g = |spec: &mut GridSpec| {
            if let Some(n) = self.grid_n {
                spec.n = n;
            }
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        match scenario {
            Scenario::Identities(p) => {
                if let Some(n) = self.grid_n {
                    p.quadrature_points = n;
                }
            }
            Scenario::TransformCheck(p) => {
                g(&mut p.grid);
                set(&mut p.dt, self.dt);
                set(&mut p.horizon, self.horizon);
            }
            Scenario::Solver(p) => {
                g(&mut p.grid);
                set(&mut p.dt, self.dt);
                set(&mut p.horizon, self.horizon);
            }
            Scenario::EvenStability(p) | Scenario::OddStability(p) => {
                g(&mut p.grid);
                set(&mut p.dt, self.dt);
                set(&mut p.horizon, self.horizon);
                if let Some(s) = self.seed {
                    p.seed = s;
                }
            }
            Scenario::Modulation(p) => {
                g(&mut p.grid);
                if let Some(s) = self.seed {
                    p.seed = s;
                }
            }
            Scenario::Collision(p) => {
                g(&mut p.grid);
                set(&mut p.dt, self.dt);
                set(&mut p.horizon, self.horizon);
            }
            Scenario::Coercivity(p) => {
                g(&mut p.full_grid);
                g(&mut p.kink_grid);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        let xs = [1.0, 2.0, 3.0];
        let ys = [5.0, 3.0, 1.0];
        assert!((slope(&xs, &ys) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn configs_are_centered() {
        let cfg = odd_or_even_config(Parity::Odd, 1.0, &[0.05, 0.12], 30.0).unwrap();
        assert_eq!(cfg.object_positions(), vec![-30.0, 0.0, 30.0]);
        let cfg = odd_or_even_config(Parity::Even, 1.0, &[0.05, 0.12], 30.0).unwrap();
        assert_eq!(cfg.object_positions(), vec![-15.0, 15.0]);
    }

    #[test]
    fn overrides_touch_only_given_fields() {
        let mut s = Scenario::Collision(CollisionParams::default());
        Overrides { dt: Some(0.001), ..Default::default() }.apply(&mut s);
        let Scenario::Collision(p) = s else { panic!() };
        assert_eq!(p.dt, 0.001);
        assert_eq!(p.horizon, CollisionParams::default().horizon);
    }
}
