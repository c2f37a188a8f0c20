//! Seeded random test fields shared by the coercivity gate, the Nehari
//! floor check and the test suites.
//!
//! A field is a sum of one to three Gaussian bumps
//! `a_j exp(−|x − c_j|²/w_j²) (1 + b_j cos(k_j·(x − c_j) + θ_j))` with
//!
//! * widths `w_j` log-uniform in `[2.5h, L/4]` (collapsed to `L/4` when the
//!   grid is too coarse), so every bump is resolved;
//! * centres uniform in the ball of radius `L/6`;
//! * `a_1 ∈ [0.5, 1.5]`, later amplitudes of random sign with `|a_j| ≤ a_1`;
//! * modulation `|b_j| ≤ ½` and wavenumber `|k_j| ≤ 1/w_j`, so the envelope
//!   stays positive and the bump stays smooth on its own scale.

use std::f64::consts::PI;

use rand::Rng;

use crate::grid::{GridSpec, ScalarField};

#[derive(Debug, Clone, Copy)]
struct Bump {
    amplitude: f64,
    center: [f64; 3],
    width: f64,
    modulation: f64,
    wavevector: [f64; 3],
    phase: f64,
}

impl Bump {
    fn eval(&self, x: [f64; 3]) -> f64 {
        let d = [
            x[0] - self.center[0],
            x[1] - self.center[1],
            x[2] - self.center[2],
        ];
        let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let kx = self.wavevector[0] * d[0] + self.wavevector[1] * d[1] + self.wavevector[2] * d[2];
        self.amplitude
            * (-d2 / (self.width * self.width)).exp()
            * (1.0 + self.modulation * (kx + self.phase).cos())
    }
}

/// Range of Gaussian widths used on `grid`.
pub fn width_range(grid: &GridSpec) -> (f64, f64) {
    let hi = grid.half_width() / 4.0;
    let lo = (2.5 * grid.spacing()).min(hi);
    (lo, hi)
}

fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi = rng.gen_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

fn draw_bump<R: Rng + ?Sized>(grid: &GridSpec, rng: &mut R, amplitude: f64) -> Bump {
    let (lo, hi) = width_range(grid);
    let width = if hi > lo {
        (rng.gen_range(lo.ln()..hi.ln())).exp()
    } else {
        hi
    };
    let dir = unit_vector(rng);
    let reach = grid.half_width() / 6.0 * rng.gen::<f64>().cbrt();
    let kdir = unit_vector(rng);
    let k = rng.gen_range(0.0..1.0) / width;
    Bump {
        amplitude,
        center: [reach * dir[0], reach * dir[1], reach * dir[2]],
        width,
        modulation: rng.gen_range(-0.5..=0.5),
        wavevector: [k * kdir[0], k * kdir[1], k * kdir[2]],
        phase: rng.gen_range(0.0..2.0 * PI),
    }
}

/// One draw from the family described in the module docs.
pub fn random_field<R: Rng + ?Sized>(grid: &GridSpec, rng: &mut R) -> ScalarField {
    let count = rng.gen_range(1..=3);
    let lead = rng.gen_range(0.5..1.5);
    let mut bumps = vec![draw_bump(grid, rng, lead)];
    for _ in 1..count {
        let a = rng.gen_range(-lead..lead);
        bumps.push(draw_bump(grid, rng, a));
    }
    ScalarField::from_fn(*grid, |x| bumps.iter().map(|b| b.eval(x)).sum())
        .expect("bounded smooth field is finite")
}

/// A single centred positive Gaussian of the given width.
pub fn gaussian(grid: &GridSpec, width: f64) -> ScalarField {
    ScalarField::from_fn(*grid, |[x, y, z]| {
        (-(x * x + y * y + z * z) / (width * width)).exp()
    })
    .expect("gaussian is finite")
}
