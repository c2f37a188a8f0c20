//! Sixth-order centered finite-difference stencils.
//!
//! The second-derivative stencil defines the discrete Laplacian used by every
//! energy, residual and Poisson computation in the crate. Its free-space
//! lattice Green function (see [`crate::poisson`]) inverts it exactly, so the
//! whole discretization is one self-consistent operator.

/// Second-derivative weights `[c0, c1, c2, c3]` for offsets `0, ±1, ±2, ±3`,
/// in units of `1/h²`.
pub const SECOND_DERIVATIVE: [f64; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];

/// First-derivative weights for offsets `+1, +2, +3` (antisymmetric), in
/// units of `1/h`.
pub const FIRST_DERIVATIVE: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];

/// Stencil half-width.
pub const RADIUS: usize = 3;

/// Fourier symbol of the one-dimensional `−d²/dx²` stencil at unit spacing.
///
/// `s(θ) = θ² + O(θ⁸)`, strictly positive for `θ ∈ (0, π]`.
pub fn symbol(theta: f64) -> f64 {
    let [c0, c1, c2, c3] = SECOND_DERIVATIVE;
    -(c0 + 2.0 * (c1 * theta.cos() + c2 * (2.0 * theta).cos() + c3 * (3.0 * theta).cos()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_annihilate_constants_and_reproduce_quadratics() {
        let [c0, c1, c2, c3] = SECOND_DERIVATIVE;
        assert!((c0 + 2.0 * (c1 + c2 + c3)).abs() < 1e-15);
        // d²/dx² x² = 2
        let second_moment = 2.0 * (c1 + 4.0 * c2 + 9.0 * c3);
        assert!((second_moment - 2.0).abs() < 1e-14);
        // x⁴, x⁶ moments vanish for sixth order
        assert!((c1 + 16.0 * c2 + 81.0 * c3).abs() < 1e-14);
        assert!((c1 + 64.0 * c2 + 729.0 * c3).abs() < 1e-13);
    }

    #[test]
    fn first_derivative_is_exact_on_low_powers() {
        let [d1, d2, d3] = FIRST_DERIVATIVE;
        assert!((2.0 * (d1 + 2.0 * d2 + 3.0 * d3) - 1.0).abs() < 1e-15);
        assert!((d1 + 8.0 * d2 + 27.0 * d3).abs() < 1e-15);
        assert!((d1 + 32.0 * d2 + 243.0 * d3).abs() < 1e-14);
    }

    #[test]
    fn symbol_positive_off_zero() {
        assert!(symbol(0.0).abs() < 1e-15);
        for k in 1..=1000 {
            let theta = std::f64::consts::PI * k as f64 / 1000.0;
            assert!(symbol(theta) > 0.0, "theta = {theta}");
        }
        let small = 1e-2;
        assert!((symbol(small) - small * small).abs() < 1e-13);
    }
}
