//! The reduced action
//!
//! ```text
//! I(u) = ½A₁ + ¼B − C/(p+1),   A₁ = ∫|∇u|² + Vu²,  B = ∫φ_u u²,  C = ∫|u|^{p+1},
//! ```
//!
//! the Nehari function `G = A₁ + B − C = ⟨I′(u), u⟩`, the auxiliary
//! `J = (½ − 1/(p+1))A₁ + (¼ − 1/(p+1))B`, and the Euler–Lagrange residual.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustdct::{DctPlanner, Dst1};

use crate::error::{Error, Result};
use crate::grid::{self, abs_pow, stencil, GridSpec, ScalarField};
use crate::poisson;
use crate::potential::Potential;

/// Nonlinearity exponent, `3 < p < 5`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p > 3.0 && p < 5.0 {
            Ok(Self(p))
        } else {
            Err(Error::ExponentOutOfRange(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub a1: f64,
    pub b: f64,
    pub c: f64,
    pub p: f64,
    pub i: f64,
    pub g: f64,
    pub j: f64,
}

impl EnergyBreakdown {
    pub fn from_parts(a1: f64, b: f64, c: f64, p: Exponent) -> Self {
        let p = p.value();
        let q = 1.0 / (p + 1.0);
        Self {
            a1,
            b,
            c,
            p,
            i: 0.5 * a1 + 0.25 * b - q * c,
            g: a1 + b - c,
            j: (0.5 - q) * a1 + (0.25 - q) * b,
        }
    }

    /// Breakdown of `t·u` from that of `u`, by homogeneity.
    pub fn along_ray(&self, t: f64) -> Self {
        let t2 = t * t;
        Self::from_parts(
            t2 * self.a1,
            t2 * t2 * self.b,
            abs_pow(t, self.p + 1.0) * self.c,
            Exponent(self.p),
        )
    }

    /// `|A₁| + B + C`, the natural size against which `G` is measured.
    pub fn magnitude(&self) -> f64 {
        self.a1.abs() + self.b + self.c
    }
}

/// Euler–Lagrange residual `r = −Δ_h u + Vu + φ_u u − |u|^{p−1}u` and its
/// L² norm.
#[derive(Debug, Clone)]
pub struct Residual {
    pub field: ScalarField,
    pub norm: f64,
}

/// Everything one evaluation of `I` produces.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub breakdown: EnergyBreakdown,
    pub phi: ScalarField,
}

/// `I` with the potential sampled once for a fixed grid.
#[derive(Debug, Clone)]
pub struct Functional {
    potential: ScalarField,
    p: Exponent,
}

impl Functional {
    pub fn new(potential: &Potential, grid: &GridSpec, p: f64) -> Result<Self> {
        let p = Exponent::new(p)?;
        Ok(Self {
            potential: potential.sample(grid)?,
            p,
        })
    }

    pub fn from_sampled(potential: ScalarField, p: f64) -> Result<Self> {
        Ok(Self {
            potential,
            p: Exponent::new(p)?,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.potential.grid()
    }

    pub fn potential(&self) -> &ScalarField {
        &self.potential
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn evaluate(&self, u: &ScalarField) -> Result<Evaluation> {
        u.check_same_grid(&self.potential)?;
        let phi = poisson::solve_phi(u).phi;
        let h3 = u.grid().cell_volume();
        let weighted: f64 = u
            .values()
            .iter()
            .zip(self.potential.values())
            .map(|(a, v)| v * a * a)
            .sum();
        let a1 = grid::dirichlet_energy(u) + h3 * weighted;
        let b = poisson::nonlocal_energy(u, &phi);
        let c = grid::lp_integral(u, self.p.value() + 1.0)?;
        Ok(Evaluation {
            breakdown: EnergyBreakdown::from_parts(a1, b, c, self.p),
            phi,
        })
    }

    pub fn breakdown(&self, u: &ScalarField) -> Result<EnergyBreakdown> {
        Ok(self.evaluate(u)?.breakdown)
    }

    /// Residual at `u`, reusing `phi = φ_u` from [`Self::evaluate`].
    pub fn residual_with(&self, u: &ScalarField, phi: &ScalarField) -> Result<Residual> {
        u.check_same_grid(&self.potential)?;
        u.check_same_grid(phi)?;
        let p = self.p.value();
        let lap = grid::laplacian(u);
        let values: Vec<f64> = u
            .values()
            .iter()
            .zip(lap.values())
            .zip(self.potential.values().iter().zip(phi.values()))
            .map(|((&a, &l), (&v, &f))| {
                let nonlinear = a.signum() * abs_pow(a, p);
                -l + (v + f) * a - nonlinear
            })
            .collect();
        let field = ScalarField::from_raw(*u.grid(), values);
        let norm = field.l2_norm();
        Ok(Residual { field, norm })
    }

    /// `I(u₁) − I(u₀)` without the cancellation of subtracting two
    /// evaluated actions.
    ///
    /// With `w = u₁ − u₀` and `s = u₁ + u₀`, the quadratic terms are
    /// `⟨w, −Δ_h s⟩`, `⟨w, Vs⟩` and `⟨ws, φ₀ + φ₁⟩` (symmetry of `Δ_h` and of
    /// the Poisson kernel), and each `|u₁|^q − |u₀|^q` goes through
    /// `expm1`/`ln_1p`. The error is then relative to the difference rather
    /// than to `I`, which keeps descent tests meaningful near convergence.
    pub fn action_difference(
        &self,
        u0: &ScalarField,
        phi0: &ScalarField,
        u1: &ScalarField,
        phi1: &ScalarField,
    ) -> Result<f64> {
        u0.check_same_grid(u1)?;
        u0.check_same_grid(phi0)?;
        u0.check_same_grid(phi1)?;
        u0.check_same_grid(&self.potential)?;
        let q = self.p.value() + 1.0;
        let sum = u0.combine(1.0, u1, 1.0)?;
        let lap = grid::laplacian(&sum);
        let mut quadratic = 0.0;
        let mut power = 0.0;
        for i in 0..u0.values().len() {
            let a = u0.values()[i];
            let b = u1.values()[i];
            let w = b - a;
            let s = sum.values()[i];
            let local = -lap.values()[i] + self.potential.values()[i] * s;
            quadratic += w * (0.5 * local + 0.25 * (phi0.values()[i] + phi1.values()[i]) * s);
            power += if a != 0.0 && a.signum() == b.signum() {
                abs_pow(a, q) * (q * (w / a).ln_1p()).exp_m1()
            } else {
                abs_pow(b, q) - abs_pow(a, q)
            };
        }
        Ok(u0.grid().cell_volume() * (quadratic - power / q))
    }

    pub fn residual(&self, u: &ScalarField) -> Result<Residual> {
        let phi = poisson::solve_phi(u).phi;
        self.residual_with(u, &phi)
    }
}

pub fn energy_breakdown(u: &ScalarField, potential: &Potential, p: f64) -> Result<EnergyBreakdown> {
    Functional::new(potential, u.grid(), p)?.breakdown(u)
}

pub fn el_residual(u: &ScalarField, potential: &Potential, p: f64) -> Result<Residual> {
    Functional::new(potential, u.grid(), p)?.residual(u)
}

type PlanCache = Mutex<HashMap<usize, Arc<dyn Dst1<f64>>>>;

fn dst_plan(n: usize) -> Arc<dyn Dst1<f64>> {
    static PLANS: OnceLock<PlanCache> = OnceLock::new();
    let mut plans = PLANS
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    plans
        .entry(n)
        .or_insert_with(|| DctPlanner::new().plan_dst1(n))
        .clone()
}

/// DST-I along every axis of an `n³` block, in place (unnormalized).
fn dst3(n: usize, data: &mut [f64]) {
    let plan = dst_plan(n);
    let mut line = vec![0.0; n];
    let mut scratch = vec![0.0; plan.get_scratch_len()];
    for stride in [1, n, n * n] {
        for start in 0..data.len() {
            // first element of each line along this axis
            if (start / stride) % n != 0 {
                continue;
            }
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = data[start + k * stride];
            }
            // the FFT-backed DST-I reads two scratch slots it never writes
            scratch.fill(0.0);
            plan.process_dst1_with_scratch(&mut line, &mut scratch);
            for (k, value) in line.iter().enumerate() {
                data[start + k * stride] = *value;
            }
        }
    }
}

/// Eigenvalues of the sine-diagonalized `−Δ_h` along one axis.
pub fn sine_mode_eigenvalues(grid: &GridSpec) -> Vec<f64> {
    let n = grid.points();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    (1..=n)
        .map(|k| stencil::symbol(std::f64::consts::PI * k as f64 / (n + 1) as f64) * inv_h2)
        .collect()
}

/// Sobolev preconditioner `(−Δ_h + 1)^{−1} r`.
///
/// `−Δ_h` here is the sixth-order operator with odd reflection at the box
/// faces, which the sine transform diagonalizes with eigenvalues
/// `Σ_axes s(πk/(n+1))/h²`. It agrees with the zero-extended operator away
/// from the faces and is symmetric positive definite.
pub fn precondition(r: &ScalarField) -> ScalarField {
    let grid = *r.grid();
    let n = grid.points();
    let mut data = r.values().to_vec();
    if data.iter().all(|&v| v == 0.0) {
        return ScalarField::from_raw(grid, data);
    }
    dst3(n, &mut data);
    let mu = sine_mode_eigenvalues(&grid);
    let normalization = (2.0 / (n + 1) as f64).powi(3);
    for (index, value) in data.iter_mut().enumerate() {
        let [a, b, c] = grid.unravel(index);
        *value *= normalization / (mu[a] + mu[b] + mu[c] + 1.0);
    }
    dst3(n, &mut data);
    ScalarField::from_raw(grid, data)
}
