//! The Nehari manifold `N = {u ≠ 0 : G(u) = 0}` and the fibering scaling.
//!
//! Along a ray `t ↦ tu`, `G(tu) = t²(A₁ + sB − s^{(p−1)/2} C)` with `s = t²`.
//! The bracket `q(s) = A₁ + sB − s^γ C`, `γ = (p−1)/2 ∈ (1, 2)`, is concave,
//! positive at 0 when `A₁ > 0` and tends to −∞, so it has exactly one
//! positive root.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::functional::{EnergyBreakdown, Evaluation, Exponent, Functional};
use crate::grid::{self, GridSpec, ScalarField};
use crate::potential::Potential;
use crate::sampling;

/// Relative tolerance on `s = t²`.
pub const ROOT_TOLERANCE: f64 = 1e-13;

const MAX_ROOT_ITERATIONS: usize = 200;

/// Tolerance of the manifold invariant `|G| ≤ tol·(|A₁| + B + C)`.
pub const MANIFOLD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberRoot {
    pub t_bar: f64,
    /// Sign-change interval in `t` found by doubling in `s` from 1.
    pub bracket: (f64, f64),
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberScaling {
    pub t_bar: f64,
    /// Breakdown of `t̄·u`.
    pub scaled_breakdown: EnergyBreakdown,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// The unique `t̄ > 0` with `A₁ + t̄²B = t̄^{p−1}C`.
pub fn fiber_root(a1: f64, b: f64, c: f64, p: f64) -> Result<FiberRoot> {
    Exponent::new(p)?;
    if c <= 0.0 {
        return Err(Error::ZeroField);
    }
    if a1 <= 0.0 {
        return Err(Error::NonCoercive { a1 });
    }
    let gamma = 0.5 * (p - 1.0);
    let q = |s: f64| a1 + s * b - s.powf(gamma) * c;
    let dq = |s: f64| b - gamma * s.powf(gamma - 1.0) * c;

    let (mut lo, mut hi) = (1.0, 1.0);
    let at_one = q(1.0);
    if at_one == 0.0 {
        return Ok(FiberRoot {
            t_bar: 1.0,
            bracket: (1.0, 1.0),
            iterations: 0,
        });
    }
    if at_one > 0.0 {
        hi = 2.0;
        while q(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::ZeroField);
            }
        }
    } else {
        lo = 0.5;
        while q(lo) <= 0.0 {
            hi = lo;
            lo *= 0.5;
            if lo == 0.0 {
                return Err(Error::NonCoercive { a1 });
            }
        }
    }
    let bracket = (lo.sqrt(), hi.sqrt());

    // Newton from the right end descends monotonically on a concave q;
    // bisection takes over whenever a step leaves the bracket.
    let mut s = hi;
    let mut iterations = 0;
    while iterations < MAX_ROOT_ITERATIONS {
        iterations += 1;
        let value = q(s);
        if value == 0.0 {
            break;
        }
        if value > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let slope = dq(s);
        let newton = s - value / slope;
        let next = if slope != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let converged = (next - s).abs() <= ROOT_TOLERANCE * next || hi - lo <= ROOT_TOLERANCE * hi;
        s = next;
        if converged {
            break;
        }
    }
    Ok(FiberRoot {
        t_bar: s.sqrt(),
        bracket,
        iterations,
    })
}

/// Projection from a known breakdown; the scaled breakdown comes from ray
/// algebra.
pub fn project_breakdown(bd: &EnergyBreakdown) -> Result<FiberScaling> {
    let root = fiber_root(bd.a1, bd.b, bd.c, bd.p)?;
    Ok(FiberScaling {
        t_bar: root.t_bar,
        scaled_breakdown: bd.along_ray(root.t_bar),
        bracket: root.bracket,
        iterations: root.iterations,
    })
}

/// `t̄u` with its fresh evaluation (own Poisson solve, no homogeneity
/// assumed).
#[derive(Debug, Clone)]
pub struct Projected {
    pub field: ScalarField,
    pub scaling: FiberScaling,
    pub evaluation: Evaluation,
}

impl Functional {
    pub fn project(&self, u: &ScalarField) -> Result<Projected> {
        let bd = self.breakdown(u)?;
        self.project_from(u, &bd)
    }

    /// Projection of `u` given its already computed breakdown.
    pub fn project_from(&self, u: &ScalarField, bd: &EnergyBreakdown) -> Result<Projected> {
        let root = fiber_root(bd.a1, bd.b, bd.c, bd.p)?;
        let field = u.scaled(root.t_bar);
        let evaluation = self.evaluate(&field)?;
        Ok(Projected {
            field,
            scaling: FiberScaling {
                t_bar: root.t_bar,
                scaled_breakdown: evaluation.breakdown,
                bracket: root.bracket,
                iterations: root.iterations,
            },
            evaluation,
        })
    }
}

pub fn nehari_project(u: &ScalarField, potential: &Potential, p: f64) -> Result<FiberScaling> {
    Ok(Functional::new(potential, u.grid(), p)?.project(u)?.scaling)
}

/// Whether `bd` satisfies `|G| ≤ tol·(|A₁| + B + C)`.
pub fn on_manifold(bd: &EnergyBreakdown, tol: f64) -> bool {
    bd.g.abs() <= tol * bd.magnitude()
}

/// Checks `I(tu) ≤ I(t̄u) + 1e−12·|I(t̄u)|` on `samples` log-spaced
/// `t ∈ [t̄/10, 10t̄]`, every value a fresh evaluation. An odd sample count
/// puts `t̄` itself in the middle. Sampling resolution bounds how far off
/// a wrong `t̄` must be to be detected.
pub fn ray_max_check(
    functional: &Functional,
    u: &ScalarField,
    fs: &FiberScaling,
    samples: usize,
) -> Result<bool> {
    let reference = functional.breakdown(&u.scaled(fs.t_bar))?.i;
    let allowance = 1e-12 * reference.abs();
    let m = samples.max(2);
    for k in 0..m {
        let exponent = (2 * k) as f64 / (m - 1) as f64 - 1.0;
        let t = fs.t_bar * 10f64.powf(exponent);
        let value = functional.breakdown(&u.scaled(t))?.i;
        if value > reference + allowance {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Minimum of `‖t̄u‖_{p+1}` over `trials` projected random fields: an
/// empirical floor for the Nehari manifold, never a certified one.
pub fn manifold_floor_check(
    potential: &Potential,
    grid: &GridSpec,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials < 10 {
        return Err(Error::InvalidArgument {
            name: "trials",
            reason: format!("need at least 10 trials, got {trials}"),
        });
    }
    let functional = Functional::new(potential, grid, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut floor = f64::INFINITY;
    for _ in 0..trials {
        let u = sampling::random_field(grid, &mut rng);
        let bd = functional.breakdown(&u)?;
        let root = fiber_root(bd.a1, bd.b, bd.c, bd.p)?;
        let norm = root.t_bar * grid::lp_integral(&u, p + 1.0)?.powf(1.0 / (p + 1.0));
        floor = floor.min(norm);
    }
    Ok(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (f(lo) > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn synthetic_roots() {
        let root = fiber_root(1.0, 1.0, 1.0, 4.0).unwrap();
        let oracle = bisect(|t| t * t * t - t * t - 1.0, 1.0, 2.0);
        assert!((root.t_bar - oracle).abs() < 1e-12);
        assert!((root.t_bar - 1.465_571_2).abs() < 1e-7);
        assert!(root.bracket.0 <= root.t_bar && root.t_bar <= root.bracket.1);

        let closed = fiber_root(1.0, 0.0, 1.0, 4.0).unwrap();
        assert!((closed.t_bar - 1.0).abs() < 1e-12);
        let closed = fiber_root(8.0, 0.0, 1.0, 4.0).unwrap();
        assert!((closed.t_bar - 2.0).abs() < 1e-12);
    }

    #[test]
    fn root_errors() {
        assert!(matches!(
            fiber_root(1.0, 1.0, 0.0, 4.0),
            Err(Error::ZeroField)
        ));
        assert!(matches!(
            fiber_root(0.0, 0.0, 0.0, 4.0),
            Err(Error::ZeroField)
        ));
        assert!(matches!(
            fiber_root(-1.0, 1.0, 1.0, 4.0),
            Err(Error::NonCoercive { .. })
        ));
        assert!(matches!(
            fiber_root(1.0, 1.0, 1.0, 5.0),
            Err(Error::ExponentOutOfRange(_))
        ));
    }

    #[test]
    fn roots_over_wide_ranges() {
        for &(a1, b, c) in &[
            (1e-6, 0.5, 1.0),
            (1e6, 1e-8, 1e-3),
            (3.0, 0.0, 1e4),
            (1.0, 1e-8, 1e-8),
        ] {
            for p in [3.01, 3.5, 4.0, 4.99] {
                let root = fiber_root(a1, b, c, p).unwrap();
                let t = root.t_bar;
                let g = t * t * a1 + t.powi(4) * b - t.powf(p + 1.0) * c;
                let size = t * t * a1 + t.powi(4) * b + t.powf(p + 1.0) * c;
                assert!(g.abs() <= 1e-12 * size, "{a1} {b} {c} {p}");
            }
        }
    }

    #[test]
    fn projection_is_ray_invariant() {
        let g = GridSpec::staggered(6.0, 16).unwrap();
        let f = Functional::new(&Potential::constant(1.0).unwrap(), &g, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = sampling::random_field(&g, &mut rng);
        let base = f.project(&u).unwrap();
        assert!(on_manifold(
            &base.scaling.scaled_breakdown,
            MANIFOLD_TOLERANCE
        ));
        for c in [0.1, 3.0, 17.0] {
            let scaled = f.project(&u.scaled(c)).unwrap();
            assert!((scaled.scaling.t_bar * c / base.scaling.t_bar - 1.0).abs() < 1e-10);
        }
        let again = f.project(&base.field).unwrap();
        assert!((again.scaling.t_bar - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ray_maximum_detects_a_wrong_scaling() {
        let g = GridSpec::staggered(5.0, 12).unwrap();
        let f = Functional::new(&Potential::constant(1.0).unwrap(), &g, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = sampling::random_field(&g, &mut rng);
        let fs = f.project(&u).unwrap().scaling;
        assert!(ray_max_check(&f, &u, &fs, 21).unwrap());
        let wrong = FiberScaling {
            t_bar: 1.01 * fs.t_bar,
            ..fs
        };
        assert!(!ray_max_check(&f, &u, &wrong, 401).unwrap());
    }

    #[test]
    fn single_sign_change() {
        let g = GridSpec::staggered(6.0, 12).unwrap();
        let f = Functional::new(&Potential::coulomb(1.0, 0.05, 1.0).unwrap(), &g, 3.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let bd = f.breakdown(&sampling::random_field(&g, &mut rng)).unwrap();
            let root = fiber_root(bd.a1, bd.b, bd.c, bd.p).unwrap();
            let s_max = 4.0 * root.bracket.1 * root.bracket.1;
            let gamma = 0.5 * (bd.p - 1.0);
            let signs: Vec<bool> = (0..64)
                .map(|k| {
                    let s = s_max * 10f64.powf(-6.0 * (63 - k) as f64 / 63.0);
                    bd.a1 + s * bd.b - s.powf(gamma) * bd.c > 0.0
                })
                .collect();
            let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
            assert_eq!(changes, 1);
            assert!(signs[0] && !signs[63]);
        }
    }

    #[test]
    fn scaling_depends_smoothly_on_the_field() {
        let g = GridSpec::staggered(6.0, 12).unwrap();
        let f = Functional::new(&Potential::constant(1.0).unwrap(), &g, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u = sampling::random_field(&g, &mut rng);
        let w = sampling::random_field(&g, &mut rng);
        let t0 = f.project(&u).unwrap().scaling.t_bar;
        let mut ratios = Vec::new();
        for eps in [1e-2, 1e-3, 1e-4] {
            let du = w.scaled(eps);
            let t = f
                .project(&u.combine(1.0, &du, 1.0).unwrap())
                .unwrap()
                .scaling
                .t_bar;
            ratios.push((t - t0).abs() / du.l2_norm());
        }
        let k = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(k.is_finite() && k < 1e3);
        assert!((ratios[1] - ratios[2]).abs() < 0.05 * ratios[2]);
    }

    #[test]
    fn floor_is_positive_and_stable() {
        let g = GridSpec::staggered(6.0, 12).unwrap();
        let v = Potential::constant(1.0).unwrap();
        let a = manifold_floor_check(&v, &g, 4.0, 10, 1).unwrap();
        let b = manifold_floor_check(&v, &g, 4.0, 20, 1).unwrap();
        assert!(a > 0.0 && b > 0.0 && b <= a && a < 2.0 * b);
        assert!(manifold_floor_check(&v, &g, 4.0, 9, 1).is_err());
        let singular = Potential::coulomb(1.0, 0.05, 1.0).unwrap();
        assert!(manifold_floor_check(&singular, &g, 4.0, 10, 1).unwrap() > 0.0);
    }
}
