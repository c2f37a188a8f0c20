//! Independent radial solver for radially symmetric potentials.
//!
//! Nothing here touches the 3-D discretization. Nodes sit at cell centres
//! `r_j = (j + ½)Δr`, `Δr = r_max/n_r`; integrals are `4π Σ f(r_j) r_j² Δr`;
//! `−Δu` is a finite-volume flux difference with zero flux through `r = 0`
//! (the symmetry condition `u′(0) = 0`) and `u(r_max) = 0` on the outer
//! face. The potential comes from Newton's shell theorem,
//!
//! ```text
//! φ(r) = (1/r) ∫₀^r s² u² ds + ∫_r^{r_max} s u² ds,
//! ```
//!
//! discretized with the same midpoint weights, which makes the discrete
//! kernel `1/max(r, s)` symmetric, so the residual is the exact gradient of
//! the discrete action. Descent acceptance uses the same cancellation-free
//! action difference as the 3-D solver.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::functional::{EnergyBreakdown, Exponent};
use crate::minimize::{format_real, Init, SolverConfig, Status};
use crate::nehari::fiber_root;
use crate::potential::Potential;

/// Default outer radius.
pub const DEFAULT_R_MAX: f64 = 30.0;

/// Tail beyond `r_max − 1` allowed in a converged profile, as a fraction of
/// `∫u²`.
pub const TAIL_TOLERANCE: f64 = 1e-10;

const STEP_GROWTH: f64 = 1.5;
const STEP_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    n_r: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, n_r: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidArgument {
                name: "r_max",
                reason: format!("must be positive, got {r_max}"),
            });
        }
        if n_r < 2 {
            return Err(Error::InvalidArgument {
                name: "n_r",
                reason: format!("need at least 2 nodes, got {n_r}"),
            });
        }
        Ok(Self { r_max, n_r })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.n_r
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dr(&self) -> f64 {
        self.r_max / self.n_r as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dr()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_r).map(|j| self.node(j)).collect()
    }

    /// Shell volumes `4π r_j² Δr`.
    fn weights(&self) -> Vec<f64> {
        let dr = self.dr();
        self.nodes().iter().map(|r| 4.0 * PI * r * r * dr).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldLength {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// `4π ∫ f g r² dr`.
    pub fn dot(&self, other: &RadialProfile) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// `φ_u` from the shell theorem (see the module docs).
pub fn radial_solve_phi(u: &RadialProfile) -> RadialProfile {
    let grid = *u.grid();
    let dr = grid.dr();
    let r = grid.nodes();
    let n = grid.len();
    // inner[j] = Σ_{k≤j} s_k² ρ_k Δr,  outer[j] = Σ_{k>j} s_k ρ_k Δr
    let mut inner = vec![0.0; n];
    let mut acc = 0.0;
    for j in 0..n {
        acc += r[j] * r[j] * u.values[j] * u.values[j] * dr;
        inner[j] = acc;
    }
    let mut outer = vec![0.0; n];
    let mut acc = 0.0;
    for j in (0..n).rev() {
        outer[j] = acc;
        acc += r[j] * u.values[j] * u.values[j] * dr;
    }
    let values = (0..n).map(|j| inner[j] / r[j] + outer[j]).collect();
    RadialProfile { grid, values }
}

/// `φ_u(0) = ∫₀^{r_max} s u² ds`.
pub fn phi_at_origin(u: &RadialProfile) -> f64 {
    let dr = u.grid.dr();
    u.grid
        .nodes()
        .iter()
        .zip(&u.values)
        .map(|(r, v)| r * v * v * dr)
        .sum()
}

/// Finite-volume `−Δ` in flux form: `(S u)_j / (r_j² Δr)`.
#[derive(Debug, Clone)]
struct FluxOperator {
    /// `diag[j]`, `off[j]` couples `j` and `j + 1`.
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl FluxOperator {
    fn new(grid: &RadialGrid) -> Self {
        let n = grid.len();
        let dr = grid.dr();
        let face = |j: usize| (j as f64 * dr).powi(2) / dr;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for j in 0..n {
            // face j sits at r = jΔr; face 0 carries no flux
            diag[j] = face(j) + face(j + 1);
            if j + 1 < n {
                off[j] = -face(j + 1);
            }
        }
        // u(r_max) = 0 on the outer face, half a cell from the last node
        diag[n - 1] += face(n);
        Self { diag, off }
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        (0..n)
            .map(|j| {
                let mut v = self.diag[j] * u[j];
                if j > 0 {
                    v += self.off[j - 1] * u[j - 1];
                }
                if j + 1 < n {
                    v += self.off[j] * u[j + 1];
                }
                v
            })
            .collect()
    }

    /// Solves `(S + diag(shift)) x = rhs` (Thomas algorithm; the matrix is
    /// symmetric positive definite and diagonally dominant).
    fn solve_shifted(&self, shift: &[f64], rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut denom = self.diag[0] + shift[0];
        c[0] = if n > 1 { self.off[0] / denom } else { 0.0 };
        d[0] = rhs[0] / denom;
        for j in 1..n {
            denom = self.diag[j] + shift[j] - self.off[j - 1] * c[j - 1];
            if j + 1 < n {
                c[j] = self.off[j] / denom;
            }
            d[j] = (rhs[j] - self.off[j - 1] * d[j - 1]) / denom;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for j in (0..n - 1).rev() {
            x[j] = d[j] - c[j] * x[j + 1];
        }
        x
    }
}

#[derive(Debug, Clone)]
struct RadialFunctional {
    grid: RadialGrid,
    potential: Vec<f64>,
    p: Exponent,
    flux: FluxOperator,
}

struct RadialState {
    u: RadialProfile,
    phi: RadialProfile,
    breakdown: EnergyBreakdown,
}

impl RadialFunctional {
    fn new(potential: &Potential, grid: RadialGrid, p: f64) -> Result<Self> {
        let p = Exponent::new(p)?;
        if !potential.is_radial() {
            return Err(Error::InvalidArgument {
                name: "potential",
                reason: "radial solver needs a radially symmetric analytic potential".into(),
            });
        }
        let values = grid
            .nodes()
            .iter()
            .map(|&r| {
                potential
                    .eval([r, 0.0, 0.0])
                    .expect("radial potentials are analytic")
            })
            .collect();
        Ok(Self {
            grid,
            potential: values,
            p,
            flux: FluxOperator::new(&grid),
        })
    }

    fn evaluate(&self, u: RadialProfile) -> RadialState {
        let phi = radial_solve_phi(&u);
        let weights = self.grid.weights();
        let q = self.p.value() + 1.0;
        let su = self.flux.apply(&u.values);
        let mut a1 = 4.0 * PI * u.values.iter().zip(&su).map(|(a, b)| a * b).sum::<f64>();
        let mut b = 0.0;
        let mut c = 0.0;
        for j in 0..self.grid.len() {
            let v = u.values[j];
            a1 += weights[j] * self.potential[j] * v * v;
            b += weights[j] * phi.values[j] * v * v;
            c += weights[j]
                * if v == 0.0 {
                    0.0
                } else {
                    (q * v.abs().ln()).exp()
                };
        }
        RadialState {
            breakdown: EnergyBreakdown::from_parts(a1, b, c, self.p),
            u,
            phi,
        }
    }

    fn project(&self, u: RadialProfile) -> Result<RadialState> {
        let bd = self.evaluate(u.clone()).breakdown;
        let root = fiber_root(bd.a1, bd.b, bd.c, bd.p)?;
        Ok(self.evaluate(u.scaled(root.t_bar)))
    }

    /// `I(u₁) − I(u₀)` from symmetric differences, as in
    /// [`crate::functional::Functional::action_difference`].
    fn action_difference(&self, s0: &RadialState, s1: &RadialState) -> f64 {
        let q = self.p.value() + 1.0;
        let weights = self.grid.weights();
        let sum: Vec<f64> =
            s0.u.values
                .iter()
                .zip(&s1.u.values)
                .map(|(a, b)| a + b)
                .collect();
        let s_sum = self.flux.apply(&sum);
        let mut total = 0.0;
        for j in 0..self.grid.len() {
            let a = s0.u.values[j];
            let b = s1.u.values[j];
            let w = b - a;
            let quadratic = 0.5 * 4.0 * PI * s_sum[j]
                + weights[j]
                    * sum[j]
                    * (0.5 * self.potential[j] + 0.25 * (s0.phi.values[j] + s1.phi.values[j]));
            let power = if a != 0.0 && a.signum() == b.signum() {
                (q * a.abs().ln()).exp() * (q * (w / a).ln_1p()).exp_m1()
            } else {
                let pow = |v: f64| {
                    if v == 0.0 {
                        0.0
                    } else {
                        (q * v.abs().ln()).exp()
                    }
                };
                pow(b) - pow(a)
            };
            total += w * quadratic - weights[j] * power / q;
        }
        total
    }

    fn residual(&self, state: &RadialState) -> RadialProfile {
        let p = self.p.value();
        let su = self.flux.apply(&state.u.values);
        let dr = self.grid.dr();
        let values = (0..self.grid.len())
            .map(|j| {
                let r = self.grid.node(j);
                let v = state.u.values[j];
                let nonlinear = if v == 0.0 {
                    0.0
                } else {
                    v.signum() * (p * v.abs().ln()).exp()
                };
                su[j] / (r * r * dr) + (self.potential[j] + state.phi.values[j]) * v - nonlinear
            })
            .collect();
        RadialProfile {
            grid: self.grid,
            values,
        }
    }

    /// `(−Δ + 1)^{−1} r` in the same flux discretization.
    fn precondition(&self, r: &RadialProfile) -> RadialProfile {
        let dr = self.grid.dr();
        let mass: Vec<f64> = self.grid.nodes().iter().map(|x| x * x * dr).collect();
        let rhs: Vec<f64> = r.values.iter().zip(&mass).map(|(a, m)| a * m).collect();
        RadialProfile {
            grid: self.grid,
            values: self.flux.solve_shifted(&mass, &rhs),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RadialGroundState {
    pub u: RadialProfile,
    pub phi: RadialProfile,
    pub breakdown: EnergyBreakdown,
    pub c_radial: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub status: Status,
    /// Share of `∫u²` beyond `r_max − 1`.
    pub tail_fraction: f64,
}

fn initial_profile(grid: RadialGrid, init: &Init) -> Result<RadialProfile> {
    match init {
        Init::Default => {
            let width = grid.r_max() / 6.0;
            RadialProfile::from_fn(grid, |r| (-r * r / (width * width)).exp())
        }
        Init::GaussianBlob {
            center,
            width,
            amplitude,
        } => {
            if center.iter().any(|&c| c != 0.0) {
                return Err(Error::InvalidArgument {
                    name: "init",
                    reason: "radial start must be centred at the origin".into(),
                });
            }
            RadialProfile::from_fn(grid, |r| amplitude * (-r * r / (width * width)).exp())
        }
        Init::Field(_) => Err(Error::InvalidArgument {
            name: "init",
            reason: "3-D field starts do not apply to the radial solver".into(),
        }),
    }
}

/// Same Nehari-projected Sobolev descent as the 3-D solver, in radial
/// variables.
pub fn radial_ground_state(
    potential: &Potential,
    p: f64,
    r_max: f64,
    n_r: usize,
    cfg: &SolverConfig,
) -> Result<RadialGroundState> {
    let grid = RadialGrid::new(r_max, n_r)?;
    let functional = RadialFunctional::new(potential, grid, p)?;
    let mut state = functional.project(initial_profile(grid, &cfg.init)?)?;
    let mut residual = functional.residual(&state);
    let mut step = cfg.step;
    let mut iterations = 0;
    let mut status = Status::MaxIters;
    while iterations < cfg.max_iters {
        if residual.l2_norm() <= cfg.tol_residual * state.u.l2_norm() {
            status = Status::Converged;
            break;
        }
        iterations += 1;
        let direction = functional.precondition(&residual);
        state = loop {
            let trial: Vec<f64> = state
                .u
                .values
                .iter()
                .zip(&direction.values)
                .map(|(a, d)| a - step * d)
                .collect();
            let trial = RadialProfile {
                grid,
                values: trial,
            };
            if let Ok(next) = functional.project(trial) {
                if functional.action_difference(&state, &next) < 0.0 {
                    break next;
                }
            }
            step *= 0.5;
            if step < STEP_FLOOR * cfg.step {
                return Err(Error::NoDescent {
                    iteration: iterations,
                    step,
                });
            }
        };
        residual = functional.residual(&state);
        step *= STEP_GROWTH;
    }
    if residual.l2_norm() <= cfg.tol_residual * state.u.l2_norm() {
        status = Status::Converged;
    }
    let weights = grid.weights();
    let total: f64 = state
        .u
        .values
        .iter()
        .zip(&weights)
        .map(|(v, w)| w * v * v)
        .sum();
    let tail: f64 = state
        .u
        .values
        .iter()
        .zip(&weights)
        .enumerate()
        .filter(|(j, _)| grid.node(*j) > r_max - 1.0)
        .map(|(_, (v, w))| w * v * v)
        .sum();
    Ok(RadialGroundState {
        c_radial: state.breakdown.i,
        breakdown: state.breakdown,
        residual_norm: residual.l2_norm(),
        iterations,
        status,
        tail_fraction: tail / total,
        u: state.u,
        phi: state.phi,
    })
}

/// CSV with header `r,u,phi`.
pub fn write_profile_csv<W: Write>(
    u: &RadialProfile,
    phi: &RadialProfile,
    mut out: W,
) -> Result<()> {
    writeln!(out, "r,u,phi")?;
    for (j, (a, f)) in u.values.iter().zip(&phi.values).enumerate() {
        let (r, a, f) = (
            format_real(u.grid.node(j)),
            format_real(*a),
            format_real(*f),
        );
        writeln!(out, "{r},{a},{f}")?;
    }
    Ok(())
}
