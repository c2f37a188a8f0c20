//! Aperiodic convolution with the lattice Green function by zero padding to
//! `2n` per axis. Real-to-complex along x, complex FFTs along y and z; lines
//! that only ever hold padding are skipped.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::green::LatticeGreen;

pub struct FreeSpaceConvolver {
    n: usize,
    padded: usize,
    half: usize,
    kernel_hat: Vec<f64>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FreeSpaceConvolver {
    pub fn shared(n: usize) -> Arc<FreeSpaceConvolver> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<FreeSpaceConvolver>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(c) = cache.lock().unwrap().get(&n) {
            return Arc::clone(c);
        }
        let built = Arc::new(Self::new(n));
        cache.lock().unwrap().entry(n).or_insert(built).clone()
    }

    fn new(n: usize) -> Self {
        let padded = 2 * n;
        let half = padded / 2 + 1;
        let mut real_planner = RealFftPlanner::<f64>::new();
        let mut planner = FftPlanner::<f64>::new();
        let mut conv = Self {
            n,
            padded,
            half,
            kernel_hat: Vec::new(),
            r2c: real_planner.plan_fft_forward(padded),
            c2r: real_planner.plan_fft_inverse(padded),
            forward: planner.plan_fft_forward(padded),
            inverse: planner.plan_fft_inverse(padded),
        };

        // Wrapped kernel: offset j ↦ min(j, P − j) per axis, so the table
        // needs offsets 0..=n.
        let green = LatticeGreen::shared(n + 1);
        let p = padded;
        let wrap = |j: usize| -> isize { j.min(p - j) as isize };
        let mut kernel = vec![0.0; p * p * p];
        for z in 0..p {
            for y in 0..p {
                for x in 0..p {
                    kernel[x + p * (y + p * z)] = green.at(wrap(x), wrap(y), wrap(z));
                }
            }
        }
        let spectrum = conv.forward_transform(&kernel, p);
        // The wrapped kernel is even, so its transform is real.
        conv.kernel_hat = spectrum.iter().map(|c| c.re).collect();
        conv
    }

    /// Transform of a `P³` real array whose nonzero entries lie in
    /// `[0, extent)³`.
    fn forward_transform(&self, data: &[f64], extent: usize) -> Vec<Complex<f64>> {
        let (p, half) = (self.padded, self.half);
        let mut spec = vec![Complex::new(0.0, 0.0); half * p * p];
        let mut line = self.r2c.make_input_vec();
        let mut out = self.r2c.make_output_vec();
        for z in 0..extent {
            for y in 0..extent {
                let row = p * (y + p * z);
                line.copy_from_slice(&data[row..row + p]);
                self.r2c.process(&mut line, &mut out).expect("plan sizes");
                let dst = half * (y + p * z);
                spec[dst..dst + half].copy_from_slice(&out);
            }
        }
        let mut column = vec![Complex::new(0.0, 0.0); p];
        for z in 0..extent {
            for kx in 0..half {
                for (y, c) in column.iter_mut().enumerate() {
                    *c = spec[kx + half * (y + p * z)];
                }
                self.forward.process(&mut column);
                for (y, c) in column.iter().enumerate() {
                    spec[kx + half * (y + p * z)] = *c;
                }
            }
        }
        for ky in 0..p {
            for kx in 0..half {
                for (z, c) in column.iter_mut().enumerate() {
                    *c = spec[kx + half * (ky + p * z)];
                }
                self.forward.process(&mut column);
                for (z, c) in column.iter().enumerate() {
                    spec[kx + half * (ky + p * z)] = *c;
                }
            }
        }
        spec
    }

    /// `out(i) = Σ_m G(i − m) data(m)` for `i, m` in the `n³` box.
    pub fn convolve(&self, data: &[f64]) -> Vec<f64> {
        let (n, p, half) = (self.n, self.padded, self.half);
        assert_eq!(data.len(), n * n * n);
        let mut spec = vec![Complex::new(0.0, 0.0); half * p * p];

        let mut line = self.r2c.make_input_vec();
        let mut out = self.r2c.make_output_vec();
        for z in 0..n {
            for y in 0..n {
                let src = n * (y + n * z);
                line[..n].copy_from_slice(&data[src..src + n]);
                line[n..].iter_mut().for_each(|v| *v = 0.0);
                self.r2c.process(&mut line, &mut out).expect("plan sizes");
                let dst = half * (y + p * z);
                spec[dst..dst + half].copy_from_slice(&out);
            }
        }

        let mut column = vec![Complex::new(0.0, 0.0); p];
        for z in 0..n {
            for kx in 0..half {
                for (y, c) in column.iter_mut().enumerate() {
                    *c = spec[kx + half * (y + p * z)];
                }
                self.forward.process(&mut column);
                for (y, c) in column.iter().enumerate() {
                    spec[kx + half * (y + p * z)] = *c;
                }
            }
        }

        for ky in 0..p {
            for kx in 0..half {
                for (z, c) in column.iter_mut().enumerate() {
                    *c = spec[kx + half * (ky + p * z)];
                }
                self.forward.process(&mut column);
                for (z, c) in column.iter_mut().enumerate() {
                    *c *= self.kernel_hat[kx + half * (ky + p * z)];
                }
                self.inverse.process(&mut column);
                for (z, c) in column.iter().enumerate().take(n) {
                    spec[kx + half * (ky + p * z)] = *c;
                }
            }
        }

        for z in 0..n {
            for kx in 0..half {
                for (y, c) in column.iter_mut().enumerate() {
                    *c = spec[kx + half * (y + p * z)];
                }
                self.inverse.process(&mut column);
                for (y, c) in column.iter().enumerate().take(n) {
                    spec[kx + half * (y + p * z)] = *c;
                }
            }
        }

        let scale = 1.0 / (p * p * p) as f64;
        let mut result = vec![0.0; n * n * n];
        let mut freq = self.c2r.make_input_vec();
        let mut real = self.c2r.make_output_vec();
        for z in 0..n {
            for y in 0..n {
                let src = half * (y + p * z);
                freq.copy_from_slice(&spec[src..src + half]);
                freq[0].im = 0.0;
                freq[half - 1].im = 0.0;
                self.c2r.process(&mut freq, &mut real).expect("plan sizes");
                let dst = n * (y + n * z);
                for (r, v) in result[dst..dst + n].iter_mut().zip(&real) {
                    *r = v * scale;
                }
            }
        }
        result
    }
}

/// Reference `O(N²)` evaluation of the same discrete convolution.
pub fn direct_convolve(n: usize, data: &[f64]) -> Vec<f64> {
    assert_eq!(data.len(), n * n * n);
    let green = LatticeGreen::shared(n);
    let sources: Vec<(isize, isize, isize, f64)> = data
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, &v)| {
            (
                (i % n) as isize,
                ((i / n) % n) as isize,
                (i / (n * n)) as isize,
                v,
            )
        })
        .collect();
    (0..n * n * n)
        .map(|i| {
            let (x, y, z) = (
                (i % n) as isize,
                ((i / n) % n) as isize,
                (i / (n * n)) as isize,
            );
            sources
                .iter()
                .map(|&(a, b, c, v)| green.at(x - a, y - b, z - c) * v)
                .sum()
        })
        .collect()
}
