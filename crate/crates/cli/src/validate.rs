//! Invariant suite over seeded random fields: Poisson solver, action,
//! and Nehari projection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spgs::functional::Functional;
use spgs::grid::{GridSpec, ScalarField};
use spgs::nehari::{fiber_root, on_manifold, ray_max_check};
use spgs::poisson::{self, double_integral_oracle, KERNEL_CONSTANT};
use spgs::potential::{self, Potential};
use spgs::sampling;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub detail: f64,
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Runs every check; `trials` random fields per family, drawn from `seed`.
pub fn run_suite(
    grid: &GridSpec,
    potential: &Potential,
    seed: u64,
    trials: usize,
) -> spgs::Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let fields: Vec<ScalarField> = (0..trials)
        .map(|_| sampling::random_field(grid, &mut rng))
        .collect();

    // Poisson: quadratic scaling, sign, discrete residual.
    let (mut scaling, mut sign, mut residual) = (0.0f64, 0.0f64, 0.0f64);
    for u in &fields {
        let phi = poisson::solve_phi(u).phi;
        let phi2 = poisson::solve_phi(&u.scaled(2.0)).phi;
        let top = phi.max_abs();
        for (a, b) in phi.values().iter().zip(phi2.values()) {
            scaling = scaling.max((b - 4.0 * a).abs() / (4.0 * top));
        }
        sign = sign.max(-phi.min() / phi.max());
        residual = residual.max(poisson::relative_residual(u, &phi));
    }
    checks.push(Check {
        name: "poisson_quadratic_scaling",
        passed: scaling <= 1e-12,
        detail: scaling,
    });
    checks.push(Check {
        name: "poisson_nonnegative",
        passed: sign <= 1e-10,
        detail: sign,
    });
    checks.push(Check {
        name: "poisson_residual",
        passed: residual <= 1e-8,
        detail: residual,
    });

    // Nonlocal energy against the direct double integral, small grid.
    let small = GridSpec::staggered(grid.half_width(), 16)?;
    let mut oracle_gap = 0.0f64;
    for _ in 0..5 {
        let u = sampling::random_field(&small, &mut rng);
        let phi = poisson::solve_phi(&u).phi;
        let b = poisson::nonlocal_energy(&u, &phi);
        let reference = KERNEL_CONSTANT * double_integral_oracle(&u, None)?;
        oracle_gap = oracle_gap.max(relative(b, reference));
    }
    checks.push(Check {
        name: "poisson_double_integral",
        passed: oracle_gap <= 0.02,
        detail: oracle_gap,
    });

    // Gaussian closed form φ(0) = ½.
    let centred = GridSpec::new(10.0, 48, false)?;
    let gauss = ScalarField::from_fn(centred, |[x, y, z]| (-(x * x + y * y + z * z) / 2.0).exp())?;
    let phi0 = poisson::solve_phi(&gauss).phi.values()
        [centred.origin_node().expect("even unstaggered grid")];
    let gauss_gap = (phi0 - 0.5).abs();
    checks.push(Check {
        name: "poisson_gaussian_origin",
        passed: gauss_gap <= 1e-3,
        detail: gauss_gap,
    });

    // Action: gradient, identity, projection.
    let mut gradient = 0.0f64;
    let mut identity = 0.0f64;
    let mut i_equals_j = 0.0f64;
    let mut manifold = true;
    let mut ray = true;
    let mut reprojection = 0.0f64;
    for (k, p) in [3.5, 4.0, 4.5].into_iter().enumerate() {
        let functional = Functional::new(potential, grid, p)?;
        for pair in fields.chunks_exact(2).skip(k).step_by(3) {
            let (u, v) = (&pair[0], &pair[1]);
            let eps = 1e-4;
            let plus = functional.breakdown(&u.combine(1.0, v, eps)?)?.i;
            let minus = functional.breakdown(&u.combine(1.0, v, -eps)?)?.i;
            let fd = (plus - minus) / (2.0 * eps);
            let exact = functional.residual(u)?.field.dot(v)?;
            gradient = gradient.max(relative(fd, exact));
        }
        for u in &fields {
            let bd = functional.breakdown(u)?;
            identity = identity.max((bd.i - bd.j - bd.g / (p + 1.0)).abs() / bd.magnitude());
            let projected = functional.project(u)?;
            let pb = projected.evaluation.breakdown;
            manifold &= on_manifold(&pb, 1e-10);
            i_equals_j = i_equals_j.max((pb.i - pb.j).abs() / pb.i.abs());
            ray &= ray_max_check(&functional, u, &projected.scaling, 21)?;
            let again = functional.project(&projected.field)?;
            reprojection = reprojection.max((again.scaling.t_bar - 1.0).abs());
        }
    }
    checks.push(Check {
        name: "action_gradient",
        passed: gradient <= 1e-6,
        detail: gradient,
    });
    checks.push(Check {
        name: "action_identity",
        passed: identity <= 1e-12,
        detail: identity,
    });
    checks.push(Check {
        name: "nehari_on_manifold",
        passed: manifold,
        detail: f64::from(u8::from(manifold)),
    });
    checks.push(Check {
        name: "nehari_i_equals_j",
        passed: i_equals_j <= 1e-9,
        detail: i_equals_j,
    });
    checks.push(Check {
        name: "nehari_ray_maximum",
        passed: ray,
        detail: f64::from(u8::from(ray)),
    });
    checks.push(Check {
        name: "nehari_reprojection",
        passed: reprojection <= 1e-10,
        detail: reprojection,
    });

    // t̄² solves 1 + s = s^{3/2} for (A₁, B, C) = (1, 1, 1), p = 4.
    let synthetic = fiber_root(1.0, 1.0, 1.0, 4.0)?.t_bar;
    let synthetic_gap = (synthetic * synthetic - 2.147_899_035_704_787).abs();
    checks.push(Check {
        name: "nehari_synthetic_root",
        passed: synthetic_gap <= 1e-9,
        detail: synthetic_gap,
    });

    let unit = potential::coercivity_check(&Potential::constant(1.0)?, grid, trials, seed)?;
    let unit_gap = (unit.estimate - 1.0).abs();
    checks.push(Check {
        name: "coercivity_unit_potential",
        passed: unit_gap <= 1e-10,
        detail: unit_gap,
    });

    Ok(checks)
}
