//! Localization and symmetry diagnostics of a computed state.

use crate::grid::{self, ScalarField};

/// `ρ(A_r) = ∫_{A_r} |∇u|² + u² + φu²` over `A_r = {r ≤ |x| ≤ r + 1}` for
/// `r = 0, 1, …, ⌊L⌋ − 1`.
pub fn annulus_mass_profile(u: &ScalarField, phi: &ScalarField) -> Vec<(usize, f64)> {
    let grid = u.grid();
    let gradient = grid::gradient_squared(u);
    let values: Vec<f64> = gradient
        .values()
        .iter()
        .zip(u.values())
        .zip(phi.values())
        .map(|((g, v), f)| g + v * v + f * v * v)
        .collect();
    let density = ScalarField::new(*grid, values).expect("density of finite fields is finite");
    let shells = grid.half_width().floor() as usize;
    (0..shells)
        .map(|r| {
            let mass = grid::annulus_integral(&density, r as f64)
                .expect("shells up to ⌊L⌋ fit inside the box");
            (r, mass)
        })
        .collect()
}

/// `ρ(A_r)/ρ(A_{r−1})` for every shell with `r > L/2`. A vanishing
/// previous shell gives ratio 0 when the current one vanishes too.
pub fn shell_decay_ratios(profile: &[(usize, f64)], half_width: f64) -> Vec<(usize, f64)> {
    profile
        .windows(2)
        .filter(|w| w[1].0 as f64 > half_width / 2.0)
        .map(|w| {
            let ratio = if w[0].1 == 0.0 {
                if w[1].1 == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                w[1].1 / w[0].1
            };
            (w[1].0, ratio)
        })
        .collect()
}

/// Whether every shell beyond `L/2` holds less than half of the previous one.
pub fn shells_decay(profile: &[(usize, f64)], half_width: f64) -> bool {
    shell_decay_ratios(profile, half_width)
        .iter()
        .all(|&(_, ratio)| ratio < 0.5)
}

/// Centre of `u²`.
pub fn centroid(u: &ScalarField) -> [f64; 3] {
    let grid = u.grid();
    let mut weight = 0.0;
    let mut sum = [0.0; 3];
    for (i, v) in u.values().iter().enumerate() {
        let w = v * v;
        let x = grid.position(i);
        weight += w;
        for axis in 0..3 {
            sum[axis] += w * x[axis];
        }
    }
    if weight == 0.0 {
        return [0.0; 3];
    }
    sum.map(|s| s / weight)
}

/// Spherical average of `u` about its centroid, sampled back on the grid.
///
/// Nodes are binned by distance in shells of width `h/4`; each bin gives the
/// point (mean distance, mean value), and nodes take the piecewise-linear
/// interpolant through those points.
pub fn radialize(u: &ScalarField) -> ScalarField {
    let grid = u.grid();
    let center = centroid(u);
    let distance = |i: usize| {
        let x = grid.position(i);
        ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2) + (x[2] - center[2]).powi(2))
            .sqrt()
    };
    let width = grid.spacing() / 4.0;
    let radii: Vec<f64> = (0..grid.len()).map(distance).collect();
    let bins = (radii.iter().cloned().fold(0.0, f64::max) / width) as usize + 1;
    let mut acc = vec![(0.0, 0.0, 0usize); bins];
    for (r, v) in radii.iter().zip(u.values()) {
        let slot = &mut acc[(r / width) as usize];
        slot.0 += r;
        slot.1 += v;
        slot.2 += 1;
    }
    let knots: Vec<(f64, f64)> = acc
        .into_iter()
        .filter(|a| a.2 > 0)
        .map(|(r, v, k)| (r / k as f64, v / k as f64))
        .collect();

    let values = radii
        .iter()
        .map(|&r| {
            let pos = knots.partition_point(|k| k.0 <= r);
            if pos == 0 {
                knots[0].1
            } else if pos == knots.len() {
                knots[pos - 1].1
            } else {
                let (r0, v0) = knots[pos - 1];
                let (r1, v1) = knots[pos];
                v0 + (v1 - v0) * (r - r0) / (r1 - r0)
            }
        })
        .collect();
    ScalarField::new(*grid, values).expect("interpolated values are finite")
}

/// `‖u − radialize(u)‖₂ / ‖u‖₂`.
pub fn asymmetry(u: &ScalarField) -> f64 {
    let norm = u.l2_norm();
    if norm == 0.0 {
        return 0.0;
    }
    let radial = radialize(u);
    u.combine(1.0, &radial, -1.0).expect("same grid").l2_norm() / norm
}
