use spgs::grid::GridSpec;
use spgs::minimize::{
    self, asymmetry, centroid, find_ground_state, mountain_pass_crosscheck, shells_decay, Init,
    SolverConfig, Status,
};
use spgs::potential::Potential;

fn grid() -> GridSpec {
    GridSpec::staggered(3.0, 24).unwrap()
}

#[test]
fn mountain_pass_level_matches_nehari_level() {
    let g = grid();
    let v = Potential::constant(1.0).unwrap();
    let cfg = SolverConfig::new(4.0);
    let few = mountain_pass_crosscheck(&v, &cfg, &g, 10, 1).unwrap();
    let many = mountain_pass_crosscheck(&v, &cfg, &g, 40, 1).unwrap();
    assert!(few.c_ray_random >= few.c_nehari);
    assert!((few.c_ray - few.c_nehari).abs() <= 1e-9 * few.c_nehari);
    assert!(many.c_ray_random <= few.c_ray_random);
    assert!(many.c_ray >= many.c_nehari - 1e-9 * many.c_nehari);
}

#[test]
fn converged_state_is_localized_and_round() {
    let g = grid();
    let run = find_ground_state(
        &Potential::constant(1.0).unwrap(),
        &SolverConfig::new(4.0),
        &g,
    )
    .unwrap();
    assert_eq!(run.status, Status::Converged);
    assert!(shells_decay(&run.annulus_profile, g.half_width()));
    assert!(asymmetry(&run.u) < 5e-2);
}

#[test]
fn off_centre_start_stays_localized() {
    let g = GridSpec::staggered(4.0, 32).unwrap();
    let v = Potential::constant(1.0).unwrap();
    let mut cfg = SolverConfig::new(4.0);
    let centred = find_ground_state(&v, &cfg, &g).unwrap();
    cfg.init = Init::GaussianBlob {
        center: [2.0, 0.0, 0.0],
        width: 0.7,
        amplitude: 1.0,
    };
    let run = find_ground_state(&v, &cfg, &g).unwrap();
    assert_eq!(run.status, Status::Converged);
    // The spike is about one cell wide, so the lattice pins it near where
    // it forms; the pull of the walls through its e^{-r} tail is weaker.
    // What must hold is that no mass escapes. At h = 0.25 the level still
    // depends on where the spike sits relative to the nodes by a few percent.
    let end = centroid(&run.u);
    assert!(end[0].abs() < 2.5 && end[1].abs() < 1e-6 && end[2].abs() < 1e-6);
    let leak = spgs::grid::boundary_mass_fraction(&run.u);
    assert!(leak < 1e-3, "{leak}");
    assert!(
        (run.c_estimate - centred.c_estimate).abs() <= 0.1 * centred.c_estimate,
        "{} vs {}",
        run.c_estimate,
        centred.c_estimate
    );
}

#[test]
fn constant_level_increases_with_lambda() {
    let g = grid();
    let cfg = SolverConfig::new(4.0);
    let c1 = minimize::ground_level_constant(1.0, &cfg, &g).unwrap();
    let c2 = minimize::ground_level_constant(2.0, &cfg, &g).unwrap();
    assert!(c1 < c2);
    assert!(minimize::ground_level_constant(0.0, &cfg, &g).is_err());
}
