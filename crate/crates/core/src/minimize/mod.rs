//! Ground states by Nehari-projected Sobolev gradient descent.
//!
//! Each iteration takes the Euler–Lagrange residual `r`, preconditions it
//! with `(−Δ_h + 1)^{−1}`, steps against it, and projects the trial back
//! onto the Nehari manifold. The step halves until the projected action
//! drops and grows after every accepted step. The drop is measured with
//! [`Functional::action_difference`], since near convergence it falls below
//! the rounding noise of `I` itself.

mod diagnostics;
mod experiments;
mod trace;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::functional::{self, EnergyBreakdown, Exponent, Functional};
use crate::grid::{GridSpec, ScalarField};
use crate::nehari::Projected;
use crate::potential::{self, CoercivityEstimate, Potential};
use crate::sampling;

pub use diagnostics::{
    annulus_mass_profile, asymmetry, centroid, radialize, shell_decay_ratios, shells_decay,
};
pub use experiments::{
    compare_with_vinf, ground_level_constant, mountain_pass_crosscheck, MountainPass,
    VinfComparison,
};
pub use trace::{format_real, write_trace_csv, TraceRow, TRACE_HEADER};

/// Random fields drawn by the coercivity gate.
pub const COERCIVITY_TRIALS: usize = 32;

/// Step growth after an accepted step.
const STEP_GROWTH: f64 = 1.5;

/// Backtracking gives up below `STEP_FLOOR · cfg.step`.
const STEP_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// Centred Gaussian of width `L/6` with `∫u² = 1`.
    Default,
    GaussianBlob {
        center: [f64; 3],
        width: f64,
        amplitude: f64,
    },
    Field(ScalarField),
}

impl Init {
    pub fn field(&self, grid: &GridSpec) -> Result<ScalarField> {
        match self {
            Self::Default => {
                let blob = sampling::gaussian(grid, grid.half_width() / 6.0);
                let norm = blob.l2_norm();
                Ok(if norm > 0.0 {
                    blob.scaled(1.0 / norm)
                } else {
                    blob
                })
            }
            Self::GaussianBlob {
                center,
                width,
                amplitude,
            } => {
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::InvalidArgument {
                        name: "width",
                        reason: format!("blob width must be positive, got {width}"),
                    });
                }
                ScalarField::from_fn(*grid, |[x, y, z]| {
                    let d2 =
                        (x - center[0]).powi(2) + (y - center[1]).powi(2) + (z - center[2]).powi(2);
                    amplitude * (-d2 / (width * width)).exp()
                })
            }
            Self::Field(field) => {
                if field.grid() != grid {
                    return Err(Error::GridMismatch);
                }
                Ok(field.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub p: f64,
    /// Initial descent step.
    pub step: f64,
    /// Stop when `‖r‖₂ ≤ tol_residual · ‖u‖₂`.
    pub tol_residual: f64,
    pub max_iters: usize,
    pub init: Init,
    pub seed: u64,
    /// Number of starts; all but the first are seeded random fields.
    pub starts: usize,
    /// Run even if the coercivity gate fails.
    pub override_coercivity: bool,
}

impl SolverConfig {
    pub fn new(p: f64) -> Self {
        Self {
            p,
            step: 1.0,
            tol_residual: 1e-7,
            max_iters: 2000,
            init: Init::Default,
            seed: 0,
            starts: 1,
            override_coercivity: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Exponent::new(self.p)?;
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidArgument {
                name: "step",
                reason: format!("must be positive, got {}", self.step),
            });
        }
        if !(self.tol_residual.is_finite() && self.tol_residual > 0.0) {
            return Err(Error::InvalidArgument {
                name: "tol",
                reason: format!("must be positive, got {}", self.tol_residual),
            });
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument {
                name: "max_iters",
                reason: "must be at least 1".into(),
            });
        }
        if self.starts == 0 {
            return Err(Error::InvalidArgument {
                name: "starts",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    /// Iteration budget exhausted; the result is the best iterate so far.
    MaxIters,
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub u: ScalarField,
    pub phi: ScalarField,
    pub breakdown: EnergyBreakdown,
    pub c_estimate: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub status: Status,
    pub trace: Vec<TraceRow>,
    /// `(r, ρ(A_r))` at the final iterate, `r = 0..⌊L⌋−1`.
    pub annulus_profile: Vec<(usize, f64)>,
    /// Gate result; `None` when overridden.
    pub coercivity: Option<CoercivityEstimate>,
}

/// Runs the coercivity gate; an error unless it passes or is overridden.
pub fn coercivity_gate(
    potential: &Potential,
    grid: &GridSpec,
    cfg: &SolverConfig,
) -> Result<Option<CoercivityEstimate>> {
    if cfg.override_coercivity {
        return Ok(None);
    }
    let estimate = potential::coercivity_check(potential, grid, COERCIVITY_TRIALS, cfg.seed)?;
    if estimate.ok {
        Ok(Some(estimate))
    } else {
        Err(Error::CoercivityGate {
            estimate: estimate.estimate,
        })
    }
}

pub fn find_ground_state(
    potential: &Potential,
    cfg: &SolverConfig,
    grid: &GridSpec,
) -> Result<GroundStateResult> {
    cfg.validate()?;
    let coercivity = coercivity_gate(potential, grid, cfg)?;
    let functional = Functional::new(potential, grid, cfg.p)?;

    let mut best = descend(&functional, cfg.init.field(grid)?, cfg)?;
    if cfg.starts > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 1..cfg.starts {
            let start = sampling::random_field(grid, &mut rng);
            let run = descend(&functional, start, cfg)?;
            if run.c_estimate < best.c_estimate {
                best = run;
            }
        }
    }
    best.coercivity = coercivity;
    Ok(best)
}

fn row(iter: usize, bd: &EnergyBreakdown, residual: f64, step: f64) -> TraceRow {
    TraceRow {
        iter,
        i: bd.i,
        g: bd.g,
        a1: bd.a1,
        b: bd.b,
        c: bd.c,
        residual_l2: residual,
        step,
    }
}

/// One descent run from `start`.
pub fn descend(
    functional: &Functional,
    start: ScalarField,
    cfg: &SolverConfig,
) -> Result<GroundStateResult> {
    let mut state: Projected = functional.project(&start)?;
    let mut residual = functional.residual_with(&state.field, &state.evaluation.phi)?;
    let mut step = cfg.step;
    let mut trace = vec![row(0, &state.evaluation.breakdown, residual.norm, step)];
    let mut status = Status::MaxIters;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        if residual.norm <= cfg.tol_residual * state.field.l2_norm() {
            status = Status::Converged;
            break;
        }
        iterations += 1;
        let direction = functional::precondition(&residual.field);
        let accepted = loop {
            let trial = state.field.combine(1.0, &direction, -step)?;
            if let Ok(next) = functional.project(&trial) {
                let change = functional.action_difference(
                    &state.field,
                    &state.evaluation.phi,
                    &next.field,
                    &next.evaluation.phi,
                )?;
                if change < 0.0 {
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
        state = accepted;
        residual = functional.residual_with(&state.field, &state.evaluation.phi)?;
        trace.push(row(
            iterations,
            &state.evaluation.breakdown,
            residual.norm,
            step,
        ));
        step *= STEP_GROWTH;
    }
    if status == Status::MaxIters && residual.norm <= cfg.tol_residual * state.field.l2_norm() {
        status = Status::Converged;
    }

    let annulus_profile = annulus_mass_profile(&state.field, &state.evaluation.phi);
    let breakdown = state.evaluation.breakdown;
    Ok(GroundStateResult {
        u: state.field,
        phi: state.evaluation.phi,
        breakdown,
        c_estimate: breakdown.i,
        residual_norm: residual.norm,
        iterations,
        status,
        trace,
        annulus_profile,
        coercivity: None,
    })
}
