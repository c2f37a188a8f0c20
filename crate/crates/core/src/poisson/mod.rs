//! Free-space Poisson solve `−Δφ = u²` and the nonlocal energy `∫φ_u u²`.
//!
//! `φ` is the discrete free-space solution
//!
//! ```text
//! φ(x_i) = h² Σ_m G(i − m) u²(x_m)
//! ```
//!
//! with `G` the lattice Green function of the sixth-order Laplacian
//! ([`green`]). Far from the source `h² G(i − m) ≈ h³ / (4π|x_i − x_m|)`, the
//! continuum Coulomb kernel with normalization `1/(4π)`; near it `G` carries
//! the exact self-cell and near-neighbour weights, so `−Δ_h φ = u²` holds
//! to rounding on every node whose stencil stays in the box.

mod convolve;
pub mod green;
mod oracle;

use std::f64::consts::PI;

use crate::grid::{self, stencil, ScalarField};

pub use convolve::FreeSpaceConvolver;
pub use oracle::{double_integral_oracle, self_cell_constant, ORACLE_MAX_POINTS};

/// Normalization of the Green kernel `1/(4π|x − y|)`.
pub const KERNEL_CONSTANT: f64 = 1.0 / (4.0 * PI);

/// Default relative tolerance on the interior Poisson residual.
pub const TOL_POISSON: f64 = 1e-8;

/// Grids up to this many points per axis are solved by direct summation.
pub const DIRECT_MAX_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// `O(N²)` summation over all source nodes.
    Direct,
    /// Zero-padded FFT convolution with the same kernel.
    ZeroPaddedFft,
}

#[derive(Debug, Clone)]
pub struct NonlocalSolve {
    pub phi: ScalarField,
    pub method: SolveMethod,
    pub kernel_constant: f64,
}

/// `φ_u`, picking the method by grid size.
pub fn solve_phi(u: &ScalarField) -> NonlocalSolve {
    let method = if u.grid().points() <= DIRECT_MAX_POINTS {
        SolveMethod::Direct
    } else {
        SolveMethod::ZeroPaddedFft
    };
    solve_phi_with(u, method)
}

pub fn solve_phi_with(u: &ScalarField, method: SolveMethod) -> NonlocalSolve {
    let grid = *u.grid();
    let n = grid.points();
    let density: Vec<f64> = u.values().iter().map(|v| v * v).collect();
    let raw = if density.iter().all(|&v| v == 0.0) {
        vec![0.0; density.len()]
    } else {
        match method {
            SolveMethod::Direct => convolve::direct_convolve(n, &density),
            SolveMethod::ZeroPaddedFft => FreeSpaceConvolver::shared(n).convolve(&density),
        }
    };
    let h2 = grid.spacing() * grid.spacing();
    let phi = ScalarField::from_raw(grid, raw.into_iter().map(|v| v * h2).collect());
    NonlocalSolve {
        phi,
        method,
        kernel_constant: KERNEL_CONSTANT,
    }
}

/// `B = ∫φ u²`. `phi` must be `solve_phi(u).phi`; debug builds check the
/// grids agree.
pub fn nonlocal_energy(u: &ScalarField, phi: &ScalarField) -> f64 {
    debug_assert_eq!(u.grid(), phi.grid());
    let sum: f64 = u
        .values()
        .iter()
        .zip(phi.values())
        .map(|(v, p)| p * v * v)
        .sum();
    u.grid().cell_volume() * sum
}

/// `∫_Ω φ u²` with `Ω = {|x| ≤ radius}`.
pub fn nonlocal_energy_within(u: &ScalarField, phi: &ScalarField, radius: f64) -> f64 {
    debug_assert_eq!(u.grid(), phi.grid());
    let grid = u.grid();
    let sum: f64 = u
        .values()
        .iter()
        .zip(phi.values())
        .enumerate()
        .filter(|(i, _)| grid.radius(*i) <= radius)
        .map(|(_, (v, p))| p * v * v)
        .sum();
    grid.cell_volume() * sum
}

/// Interior nodes: the Laplacian stencil does not reach outside the box.
pub fn is_interior(grid: &grid::GridSpec, index: usize) -> bool {
    let n = grid.points();
    grid.unravel(index)
        .iter()
        .all(|&i| i >= stencil::RADIUS && i + stencil::RADIUS < n)
}

/// `‖−Δ_h φ − u²‖₂ / ‖u²‖₂` over interior nodes (0 when `u ≡ 0` there).
pub fn relative_residual(u: &ScalarField, phi: &ScalarField) -> f64 {
    let grid = u.grid();
    let lap = grid::laplacian(phi);
    let mut residual = 0.0;
    let mut source = 0.0;
    for (i, (v, l)) in u.values().iter().zip(lap.values()).enumerate() {
        if !is_interior(grid, i) {
            continue;
        }
        let rho = v * v;
        residual += (-l - rho).powi(2);
        source += rho * rho;
    }
    if source == 0.0 {
        residual.sqrt()
    } else {
        (residual / source).sqrt()
    }
}

/// Dirichlet seminorm `‖φ‖_{D^{1,2}} = (∫|∇φ|²)^{1/2}`. Summation by parts
/// over the whole lattice gives `∫|∇φ|² = ∫φ u²` exactly for the discrete
/// free-space solution.
pub fn dirichlet_seminorm(u: &ScalarField, phi: &ScalarField) -> f64 {
    nonlocal_energy(u, phi).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn gaussian(grid: GridSpec, center: [f64; 3], width: f64) -> ScalarField {
        ScalarField::from_fn(grid, |[x, y, z]| {
            let d2 = (x - center[0]).powi(2) + (y - center[1]).powi(2) + (z - center[2]).powi(2);
            (-d2 / (width * width)).exp()
        })
        .unwrap()
    }

    #[test]
    fn zero_field_gives_zero_potential() {
        let g = GridSpec::staggered(4.0, 16).unwrap();
        let solve = solve_phi(&ScalarField::zeros(g));
        assert!(solve.phi.values().iter().all(|&v| v == 0.0));
        assert_eq!(nonlocal_energy(&ScalarField::zeros(g), &solve.phi), 0.0);
        assert_eq!(solve.kernel_constant, KERNEL_CONSTANT);
    }

    #[test]
    fn quadratic_in_u() {
        let g = GridSpec::staggered(5.0, 16).unwrap();
        let u = gaussian(g, [0.3, -0.5, 0.1], 1.3);
        let phi = solve_phi(&u).phi;
        let phi2 = solve_phi(&u.scaled(2.0)).phi;
        for (a, b) in phi.values().iter().zip(phi2.values()) {
            assert!((b - 4.0 * a).abs() <= 1e-12 * b.abs());
        }
        let e = nonlocal_energy(&u, &phi);
        let e2 = nonlocal_energy(&u.scaled(2.0), &phi2);
        assert!((e2 - 16.0 * e).abs() <= 1e-10 * e2);
    }

    #[test]
    fn direct_and_fft_agree() {
        let g = GridSpec::staggered(4.0, 12).unwrap();
        let u = gaussian(g, [0.5, 0.0, -0.7], 1.1);
        let a = solve_phi_with(&u, SolveMethod::Direct).phi;
        let b = solve_phi_with(&u, SolveMethod::ZeroPaddedFft).phi;
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-8 * x.abs());
        }
    }

    #[test]
    fn residual_and_positivity() {
        let g = GridSpec::staggered(6.0, 24).unwrap();
        let u = gaussian(g, [1.0, 0.0, 0.5], 1.5);
        let phi = solve_phi(&u).phi;
        assert!(relative_residual(&u, &phi) < TOL_POISSON);
        assert!(phi.min() >= -1e-10 * phi.max());
    }

    #[test]
    fn gaussian_charge_potential_at_origin() {
        // u = exp(-|x|²/2): φ(r) = (√π/4) erf(r)/r, φ(0) = 1/2.
        let g = GridSpec::new(10.0, 48, false).unwrap();
        let u =
            ScalarField::from_fn(g, |[x, y, z]| (-(x * x + y * y + z * z) / 2.0).exp()).unwrap();
        let phi = solve_phi(&u).phi;
        let origin = g.origin_node().unwrap();
        assert!(
            (phi.values()[origin] - 0.5).abs() < 1e-3,
            "{}",
            phi.values()[origin]
        );
    }
}
