//! Ordering experiments on the ground level: monotonicity in a constant
//! potential, the strict inequality against the limit problem, and the
//! mountain-pass characterization.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{find_ground_state, SolverConfig};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::grid::GridSpec;
use crate::nehari::fiber_root;
use crate::potential::Potential;
use crate::sampling;

/// `c(λ)` for the constant potential `V ≡ λ`.
pub fn ground_level_constant(lambda: f64, cfg: &SolverConfig, grid: &GridSpec) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument {
            name: "lambda",
            reason: format!("must be positive, got {lambda}"),
        });
    }
    Ok(find_ground_state(&Potential::constant(lambda)?, cfg, grid)?.c_estimate)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VinfComparison {
    pub c: f64,
    pub c_inf: f64,
    /// `max(|c_n − c_refined|, |c_inf,n − c_inf,refined|)`.
    pub refinement_delta: f64,
    /// Three times the refinement delta.
    pub margin: f64,
    /// `c < c_inf − margin`.
    pub strict: bool,
}

/// Compares `c(V)` with `c(V_∞)`; the margin comes from repeating both runs
/// on [`GridSpec::refined`].
pub fn compare_with_vinf(
    potential: &Potential,
    cfg: &SolverConfig,
    grid: &GridSpec,
) -> Result<VinfComparison> {
    let vinf = potential.v_infinity().value;
    let limit = Potential::constant(vinf)?;
    let fine = grid.refined();
    let level = |v: &Potential, g: &GridSpec| -> Result<f64> {
        Ok(find_ground_state(v, cfg, g)?.c_estimate)
    };
    let c = level(potential, grid)?;
    let c_inf = level(&limit, grid)?;
    let c_fine = level(potential, &fine)?;
    let c_inf_fine = level(&limit, &fine)?;
    let refinement_delta = (c - c_fine).abs().max((c_inf - c_inf_fine).abs());
    let margin = 3.0 * refinement_delta;
    Ok(VinfComparison {
        c,
        c_inf,
        refinement_delta,
        margin,
        strict: c < c_inf - margin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MountainPass {
    pub c_nehari: f64,
    /// Minimum ray maximum over the random fields and the minimizer.
    pub c_ray: f64,
    /// Same, random fields only.
    pub c_ray_random: f64,
}

/// `c = inf_{u≠0} max_{t≥0} I(tu)` checked against the descent minimum.
pub fn mountain_pass_crosscheck(
    potential: &Potential,
    cfg: &SolverConfig,
    grid: &GridSpec,
    trials: usize,
    seed: u64,
) -> Result<MountainPass> {
    if trials < 10 {
        return Err(Error::InvalidArgument {
            name: "trials",
            reason: format!("need at least 10 trials, got {trials}"),
        });
    }
    let ground = find_ground_state(potential, cfg, grid)?;
    let functional = Functional::new(potential, grid, cfg.p)?;
    let ray_max = |u: &crate::grid::ScalarField| -> Result<f64> {
        let bd = functional.breakdown(u)?;
        let root = fiber_root(bd.a1, bd.b, bd.c, bd.p)?;
        Ok(bd.along_ray(root.t_bar).i)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c_ray_random = f64::INFINITY;
    for _ in 0..trials {
        c_ray_random = c_ray_random.min(ray_max(&sampling::random_field(grid, &mut rng))?);
    }
    let at_minimizer = ray_max(&ground.u)?;
    Ok(MountainPass {
        c_nehari: ground.c_estimate,
        c_ray: c_ray_random.min(at_minimizer),
        c_ray_random,
    })
}
