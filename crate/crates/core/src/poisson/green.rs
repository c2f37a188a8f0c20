//! Free-space lattice Green function of the sixth-order discrete Laplacian.
//!
//! `G(m) = (2π)⁻³ ∫ e^{ik·m} / Σᵢ s(kᵢ) dk` on `ℤ³`, with `s` the stencil
//! symbol, so that `−Δ₁ G = δ₀` exactly. Because the symbol is separable,
//!
//! ```text
//! G(m) = ∫₀^∞ g_t(m₁) g_t(m₂) g_t(m₃) dt,   g_t(j) = (2π)⁻¹ ∫ cos(kj) e^{−t s(k)} dk.
//! ```
//!
//! The continuum heat kernel `H_t(j) = (4πt)^{−1/2} e^{−j²/4t}` integrates to
//! `1/(4π|m|)`, so for `m ≠ 0` we evaluate
//!
//! ```text
//! G(m) = 1/(4π|m|) + ∫₀^∞ [Π g_t(mᵢ) − Π H_t(mᵢ)] dt
//! ```
//!
//! whose integrand decays like `t^{−9/2}` (the symbol matches `k²` to
//! `O(k⁸)`), with a trapezoid rule in `σ = ln t`. `g_t` comes from an FFT of
//! the sampled `e^{−t s(k)}`. The origin value follows from the stencil
//! equation at `m = 0`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use realfft::RealFftPlanner;

use crate::grid::stencil;

const SAMPLES: usize = 16384;
const SIGMA_MIN: f64 = -15.0;
const SIGMA_MAX: f64 = 14.0;
const SIGMA_STEP: f64 = 0.1;

/// Values of `G` on offsets `0..extent` in each axis (the table is even in
/// every component).
#[derive(Debug)]
pub struct LatticeGreen {
    extent: usize,
    values: Vec<f64>,
}

impl LatticeGreen {
    /// Shared table covering at least `extent` offsets per axis.
    pub fn shared(extent: usize) -> Arc<LatticeGreen> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<LatticeGreen>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(table) = cache.lock().unwrap().get(&extent) {
            return Arc::clone(table);
        }
        let table = Arc::new(Self::compute(extent));
        cache.lock().unwrap().entry(extent).or_insert(table).clone()
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    /// `G(a, b, c)` for signed offsets.
    #[inline]
    pub fn at(&self, a: isize, b: isize, c: isize) -> f64 {
        let (a, b, c) = (a.unsigned_abs(), b.unsigned_abs(), c.unsigned_abs());
        self.values[a + self.extent * (b + self.extent * c)]
    }

    fn compute(extent: usize) -> Self {
        assert!(extent >= 4, "lattice Green table needs at least 4 offsets");
        let mut values = vec![0.0; extent * extent * extent];
        let step_count = ((SIGMA_MAX - SIGMA_MIN) / SIGMA_STEP).round() as usize;

        let mut planner = RealFftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(SAMPLES);
        let symbol: Vec<f64> = (0..SAMPLES)
            .map(|j| stencil::symbol(2.0 * PI * j as f64 / SAMPLES as f64))
            .collect();
        let mut input = fft.make_input_vec();
        let mut spectrum = fft.make_output_vec();
        let mut lattice = vec![0.0; extent];
        let mut continuum = vec![0.0; extent];

        for step in 0..=step_count {
            let sigma = SIGMA_MIN + step as f64 * SIGMA_STEP;
            let t = sigma.exp();
            for (x, s) in input.iter_mut().zip(&symbol) {
                *x = (-t * s).exp();
            }
            fft.process(&mut input, &mut spectrum)
                .expect("buffer sizes match the plan");
            for j in 0..extent {
                lattice[j] = spectrum[j].re / SAMPLES as f64;
                continuum[j] = (-((j * j) as f64) / (4.0 * t)).exp() / (4.0 * PI * t).sqrt();
            }
            let weight = SIGMA_STEP * t;
            for c in 0..extent {
                for b in 0..extent {
                    let lb = lattice[b] * lattice[c];
                    let cb = continuum[b] * continuum[c];
                    let row = extent * (b + extent * c);
                    for a in 0..extent {
                        values[row + a] += weight * (lattice[a] * lb - continuum[a] * cb);
                    }
                }
            }
        }

        for c in 0..extent {
            for b in 0..extent {
                for a in 0..extent {
                    let r2 = (a * a + b * b + c * c) as f64;
                    if r2 > 0.0 {
                        values[a + extent * (b + extent * c)] += 1.0 / (4.0 * PI * r2.sqrt());
                    }
                }
            }
        }

        let [c0, c1, c2, c3] = stencil::SECOND_DERIVATIVE;
        let axis_sum = c1 * values[1] + c2 * values[2] + c3 * values[3];
        values[0] = -(1.0 + 6.0 * axis_sum) / (3.0 * c0);

        Self { extent, values }
    }
}
