use multikink::diagnostics::energy_mass;
use multikink::modulation::{fit_modulation, ModulationGuess, ModulationOptions};
use multikink::nonlinearity::Nonlinearity;
use multikink::profiles::multikink::{build_multikink_profile, MultiKinkConfig};
use multikink::solver::{evolve, pde_residual, read_frame, write_frame, Equation, EvolutionSpec};
use multikink::transforms::{odd_compose, odd_decompose, OddFrame};
use multikink::Grid;

#[test]
fn even_multikink_stays_near_its_modulated_profile() {
    let grid = Grid::new(1024, 320.0).unwrap();
    let cfg = MultiKinkConfig::even(1.0, vec![0.05, 0.12], vec![-15.0, 15.0], 30.0).unwrap();
    let u0 = build_multikink_profile(&cfg, &grid, 0.0).unwrap();
    let spec = EvolutionSpec::new(Equation::plain(Nonlinearity::cubic()), grid.clone(), 0.01, 10.0)
        .unwrap()
        .with_output_interval(5.0);
    let traj = evolve(&u0, &spec).unwrap();
    let c = cfg.kink_scaling();
    let e0 = energy_mass(&u0, c).unwrap();
    let mut guess = ModulationGuess::from_config(&cfg, 0.0);
    for (t, u) in &traj {
        let state = fit_modulation(u, &cfg, &guess, ModulationOptions::default()).unwrap();
        // Interaction leaves a residual of the size of the soliton overlap only.
        assert!(state.z_h1 < 5e-3, "t = {t}: ||z|| = {}", state.z_h1);
        for (x, x_pred) in state.soliton_centers.iter().zip(cfg.soliton_centers(*t)) {
            assert!((x - x_pred).abs() < 0.1, "t = {t}: center {x} vs {x_pred}");
        }
        let em = energy_mass(u, c).unwrap();
        assert!((em.energy - e0.energy).abs() < 1e-9 * e0.energy.abs());
        assert!((em.mass.unwrap() - e0.mass.unwrap()).abs() < 1e-9 * e0.mass.unwrap().abs());
        guess = state.as_guess();
    }
}

#[test]
fn odd_perturbation_flow_reconstructs_an_mkdv_solution() {
    let beta = 1.0;
    let grid = Grid::new(1024, 256.0).unwrap();
    let cfg = MultiKinkConfig::odd(beta, vec![0.05, 0.12], vec![-30.0, 0.0], 30.0, 30.0).unwrap();
    let u0 = build_multikink_profile(&cfg, &grid, 0.0).unwrap();
    let (w0, frame) = odd_decompose(&u0, beta, 0.0).unwrap();
    let spec = EvolutionSpec::new(Equation::kink_perturbation(beta, frame.kink_center_y()), grid.clone(), 0.01, 2.0)
        .unwrap()
        .with_output_every(10);
    let w = evolve(&w0, &spec).unwrap();
    let c = cfg.kink_scaling();
    let lab: Vec<_> = w
        .iter()
        .map(|(t, wt)| (*t, odd_compose(wt, &OddFrame::new(beta, *t, frame.kink_center - c * t).unwrap()).unwrap()))
        .collect();
    // Three-point time differences of snapshots 0.1 apart: O(dt^2) truncation.
    let res = pde_residual(&lab, &Equation::plain(Nonlinearity::cubic())).unwrap();
    let worst = res.iter().map(|r| r.1).fold(0.0, f64::max);
    assert!(worst < 1e-4, "mKdV residual {worst}");
    let (_, last) = lab.last().unwrap();
    let state = fit_modulation(last, &cfg, &ModulationGuess::from_config(&cfg, 2.0), ModulationOptions::default()).unwrap();
    assert!((state.kink_center.unwrap() - cfg.kink_center(2.0)).abs() < 0.05);
    assert!(state.z_h1 < 5e-3);
}

#[test]
fn frames_round_trip_through_files() {
    let grid = Grid::new(64, 20.0).unwrap();
    let cfg = MultiKinkConfig::odd(1.0, vec![0.1], vec![-5.0], 5.0, 10.0).unwrap();
    let u = build_multikink_profile(&cfg, &grid, 0.0).unwrap();
    let mut file = tempfile::tempfile().unwrap();
    write_frame(&mut file, 1.5, &u).unwrap();
    use std::io::{Seek, SeekFrom};
    file.seek(SeekFrom::Start(0)).unwrap();
    let (t, g, values) = read_frame(&mut file).unwrap().unwrap();
    assert_eq!(t, 1.5);
    assert_eq!(g.n(), 64);
    assert_eq!(values, u.values());
    assert!(read_frame(&mut file).unwrap().is_none());
}
