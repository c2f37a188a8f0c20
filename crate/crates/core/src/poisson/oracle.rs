//! Direct double sum of the Coulomb interaction with the continuum kernel,
//! independent of the lattice Green function.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// Largest grid accepted by [`double_integral_oracle`] (`O(N²)` cost).
pub const ORACLE_MAX_POINTS: usize = 24;

/// `c₀ = ∫_{[−½,½]³} dξ/|ξ|`, the mean of `1/|ξ|` over the unit cell.
///
/// Splitting the cube into six pyramids with apex at the origin reduces it
/// to `c₀ = ¾ ∫∫_{[−1,1]²} (1 + a² + b²)^{−1/2} da db`, and the inner
/// integral is `2 asinh(1/√(1 + a²))`, leaving a smooth 1-D integrand for
/// composite Simpson.
pub fn self_cell_constant() -> f64 {
    static C0: OnceLock<f64> = OnceLock::new();
    *C0.get_or_init(|| {
        let intervals = 4000;
        let step = 1.0 / intervals as f64;
        let f = |a: f64| (1.0 / (1.0 + a * a).sqrt()).asinh();
        let mut sum = f(0.0) + f(1.0);
        for k in 1..intervals {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(k as f64 * step);
        }
        // 2 asinh(..) integrated over a ∈ [−1, 1] is 4 ∫₀¹ f
        0.75 * 4.0 * sum * step / 3.0
    })
}

/// `h⁶ Σ_{x∈Ω} Σ_{y≠x} u²(x)u²(y)/|x − y| + h⁵ c₀ Σ_{x∈Ω} u⁴(x)`.
///
/// `Ω` is `{|x| ≤ radius}` or the whole grid for `None`. The diagonal term
/// replaces the excluded self-pair by the exact cell integral of `1/|ξ|`
/// against a locally constant density. Relates to the solver through
/// `∫_Ω φ_u u² ≈ double_integral_oracle(u, Ω) / (4π)`.
pub fn double_integral_oracle(u: &ScalarField, region_radius: Option<f64>) -> Result<f64> {
    let grid = u.grid();
    if grid.points() > ORACLE_MAX_POINTS {
        return Err(Error::OracleTooLarge {
            n: grid.points(),
            max: ORACLE_MAX_POINTS,
        });
    }
    let h = grid.spacing();
    let nodes: Vec<([f64; 3], f64)> = u
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (grid.position(i), v * v))
        .collect();

    let in_region = |p: &[f64; 3]| match region_radius {
        None => true,
        Some(r) => (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() <= r,
    };

    let mut pair_sum = 0.0;
    let mut self_sum = 0.0;
    for (i, (x, rho_x)) in nodes.iter().enumerate() {
        if !in_region(x) {
            continue;
        }
        let mut row = 0.0;
        for (j, (y, rho_y)) in nodes.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
            row += rho_y / d;
        }
        pair_sum += rho_x * row;
        self_sum += rho_x * rho_x;
    }
    Ok(h.powi(6) * pair_sum + h.powi(5) * self_cell_constant() * self_sum)
}
