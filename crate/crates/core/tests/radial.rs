use spgs::minimize::{SolverConfig, Status};
use spgs::potential::Potential;
use spgs::radial_oracle::{
    radial_ground_state, radial_solve_phi, RadialGrid, RadialProfile, DEFAULT_R_MAX, TAIL_TOLERANCE,
};

#[test]
fn potential_is_positive_and_non_increasing() {
    let grid = RadialGrid::new(10.0, 500).unwrap();
    let u = RadialProfile::from_fn(grid, |r| (1.0 + r * r).recip() * (3.0 * r).cos()).unwrap();
    let phi = radial_solve_phi(&u);
    assert!(phi.values().iter().all(|&v| v > 0.0));
    assert!(phi.values().windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn radial_levels_refine_and_order() {
    let cfg = SolverConfig::new(4.0);
    let one = Potential::constant(1.0).unwrap();
    let coarse = radial_ground_state(&one, 4.0, DEFAULT_R_MAX, 1024, &cfg).unwrap();
    let fine = radial_ground_state(&one, 4.0, DEFAULT_R_MAX, 2048, &cfg).unwrap();
    assert_eq!(fine.status, Status::Converged);
    assert!(fine.tail_fraction < TAIL_TOLERANCE);
    assert!((coarse.c_radial - fine.c_radial).abs() <= 5e-3 * fine.c_radial);
    assert!((fine.breakdown.i - fine.breakdown.j).abs() <= 1e-9 * fine.c_radial);

    let two = radial_ground_state(
        &Potential::constant(2.0).unwrap(),
        4.0,
        DEFAULT_R_MAX,
        2048,
        &cfg,
    )
    .unwrap();
    assert!(fine.c_radial < two.c_radial);

    let dipped = radial_ground_state(
        &Potential::coulomb(1.0, 0.05, 1.0).unwrap(),
        4.0,
        DEFAULT_R_MAX,
        2048,
        &cfg,
    )
    .unwrap();
    assert!(dipped.c_radial < fine.c_radial);
}
