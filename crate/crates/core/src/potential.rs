//! External potentials `V`: constants, attractive Coulomb-type singularities
//! `V₁ − λ|x|^{−α}`, bounded-below bases minus a decaying perturbation, and
//! tabulated fields. Plus the admissibility gate (coercivity of the
//! quadratic form) and the value at infinity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{self, GridSpec, ScalarField};
use crate::sampling;

/// Singularity exponent `α`; only 1 and 2 are admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Singularity {
    Coulomb,
    InverseSquare,
}

impl Singularity {
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if alpha == 1.0 {
            Ok(Self::Coulomb)
        } else if alpha == 2.0 {
            Ok(Self::InverseSquare)
        } else {
            Err(Error::InvalidArgument {
                name: "alpha",
                reason: format!("singularity exponent must be 1 or 2, got {alpha}"),
            })
        }
    }

    pub fn alpha(self) -> f64 {
        match self {
            Self::Coulomb => 1.0,
            Self::InverseSquare => 2.0,
        }
    }

    #[inline]
    fn eval(self, r: f64) -> f64 {
        match self {
            Self::Coulomb => 1.0 / r,
            Self::InverseSquare => 1.0 / (r * r),
        }
    }
}

/// Decaying profile `V₂ ≥ 0` subtracted from the base of a composite
/// potential.
#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    /// `amplitude · exp(−|x|²/width²)`
    Gaussian { amplitude: f64, width: f64 },
    /// `|x|^{−α}`
    InversePower(Singularity),
    /// Sampled profile on a fixed grid.
    Field(ScalarField),
}

impl Perturbation {
    fn eval(&self, r2: f64) -> Option<f64> {
        match self {
            Self::Gaussian { amplitude, width } => Some(amplitude * (-r2 / (width * width)).exp()),
            Self::InversePower(s) => Some(s.eval(r2.sqrt())),
            Self::Field(_) => None,
        }
    }

    fn sample(&self, grid: &GridSpec) -> Result<ScalarField> {
        match self {
            Self::Field(profile) if profile.grid() == grid => Ok(profile.clone()),
            Self::Field(_) => Err(Error::GridMismatch),
            analytic => ScalarField::from_fn(*grid, |[x, y, z]| {
                analytic
                    .eval(x * x + y * y + z * z)
                    .expect("analytic profile")
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Constant {
        v1: f64,
    },
    /// `V₁ − λ|x|^{−α}`
    CoulombSingular {
        v1: f64,
        lambda: f64,
        singularity: Singularity,
    },
    /// `base − λ·V₂`
    Composite {
        base: Box<Potential>,
        lambda: f64,
        perturbation: Perturbation,
    },
    Tabulated {
        table: ScalarField,
    },
}

/// `V_∞`; `approximate` is set when it comes from finite data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VInfinity {
    pub value: f64,
    pub approximate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityEstimate {
    /// Minimum Rayleigh quotient `(∫|∇u|² + Vu²) / ‖u‖²_{H¹}` over the sample.
    pub estimate: f64,
    pub ok: bool,
}

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument {
            name,
            reason: format!("must be finite, got {value}"),
        })
    }
}

fn check_coupling(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument {
            name: "lambda",
            reason: format!("coupling must be finite and >= 0, got {lambda}"),
        })
    }
}

impl Potential {
    pub fn constant(v1: f64) -> Result<Self> {
        check_finite("V1", v1)?;
        Ok(Self::Constant { v1 })
    }

    pub fn coulomb(v1: f64, lambda: f64, alpha: f64) -> Result<Self> {
        check_finite("V1", v1)?;
        check_coupling(lambda)?;
        Ok(Self::CoulombSingular {
            v1,
            lambda,
            singularity: Singularity::from_alpha(alpha)?,
        })
    }

    pub fn composite(base: Potential, lambda: f64, perturbation: Perturbation) -> Result<Self> {
        check_coupling(lambda)?;
        if let Perturbation::Gaussian { amplitude, width } = perturbation {
            check_finite("amplitude", amplitude)?;
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::InvalidArgument {
                    name: "width",
                    reason: format!("must be positive, got {width}"),
                });
            }
        }
        Ok(Self::Composite {
            base: Box::new(base),
            lambda,
            perturbation,
        })
    }

    pub fn tabulated(table: ScalarField) -> Self {
        Self::Tabulated { table }
    }

    /// Whether evaluation needs a grid without a node at the origin.
    pub fn is_singular(&self) -> bool {
        match self {
            Self::Constant { .. } | Self::Tabulated { .. } => false,
            Self::CoulombSingular { lambda, .. } => *lambda > 0.0,
            Self::Composite {
                base,
                lambda,
                perturbation,
            } => {
                base.is_singular()
                    || (*lambda > 0.0 && matches!(perturbation, Perturbation::InversePower(_)))
            }
        }
    }

    /// Whether `V` depends on `|x|` only (and can be evaluated off-grid).
    pub fn is_radial(&self) -> bool {
        match self {
            Self::Constant { .. } | Self::CoulombSingular { .. } => true,
            Self::Composite {
                base, perturbation, ..
            } => base.is_radial() && !matches!(perturbation, Perturbation::Field(_)),
            Self::Tabulated { .. } => false,
        }
    }

    /// Pointwise value for analytic kinds; `None` for sampled data.
    pub fn eval(&self, x: [f64; 3]) -> Option<f64> {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        match self {
            Self::Constant { v1 } => Some(*v1),
            Self::CoulombSingular {
                v1,
                lambda,
                singularity,
            } => Some(if *lambda == 0.0 {
                *v1
            } else {
                v1 - lambda * singularity.eval(r2.sqrt())
            }),
            Self::Composite {
                base,
                lambda,
                perturbation,
            } => {
                let b = base.eval(x)?;
                if *lambda == 0.0 {
                    return Some(b);
                }
                Some(b - lambda * perturbation.eval(r2)?)
            }
            Self::Tabulated { .. } => None,
        }
    }

    /// Nodewise values of `V` on `grid`, no smoothing.
    pub fn sample(&self, grid: &GridSpec) -> Result<ScalarField> {
        if self.is_singular() && !grid.is_staggered() {
            return Err(Error::SingularOnUnstaggered);
        }
        match self {
            Self::Tabulated { table } => {
                if table.grid() != grid {
                    return Err(Error::GridMismatch);
                }
                Ok(table.clone())
            }
            Self::Composite {
                base,
                lambda,
                perturbation,
            } => {
                let base = base.sample(grid)?;
                if *lambda == 0.0 {
                    return Ok(base);
                }
                base.combine(1.0, &perturbation.sample(grid)?, -lambda)
            }
            _ => ScalarField::from_fn(*grid, |x| {
                self.eval(x)
                    .expect("analytic potential evaluates everywhere")
            }),
        }
    }

    /// `V_∞ = liminf_{|x|→∞} V(x)`.
    ///
    /// Analytic kinds decay to their constant part. A table has no limit, so
    /// the mean over the outermost node layer stands in, flagged approximate.
    pub fn v_infinity(&self) -> VInfinity {
        match self {
            Self::Constant { v1 } | Self::CoulombSingular { v1, .. } => VInfinity {
                value: *v1,
                approximate: false,
            },
            Self::Composite { base, .. } => base.v_infinity(),
            Self::Tabulated { table } => {
                let grid = table.grid();
                let (sum, count) = table
                    .values()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| grid.on_boundary_layer(*i))
                    .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
                VInfinity {
                    value: sum / count as f64,
                    approximate: true,
                }
            }
        }
    }
}

/// `(∫|∇u|² + ∫Vu²) / (∫|∇u|² + ∫u²)` with `V` already sampled.
pub fn rayleigh_quotient(u: &ScalarField, v: &ScalarField) -> Result<f64> {
    u.check_same_grid(v)?;
    let kinetic = grid::dirichlet_energy(u);
    let h3 = u.grid().cell_volume();
    let weighted: f64 = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, w)| w * a * a)
        .sum::<f64>()
        * h3;
    let mass: f64 = u.values().iter().map(|a| a * a).sum::<f64>() * h3;
    Ok((kinetic + weighted) / (kinetic + mass))
}

/// Minimum Rayleigh quotient over `trials` seeded random test fields from
/// [`sampling::random_field`]. A negative estimate means the quadratic form
/// is not coercive at this coupling.
pub fn coercivity_check(
    potential: &Potential,
    grid: &GridSpec,
    trials: usize,
    seed: u64,
) -> Result<CoercivityEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument {
            name: "trials",
            reason: "need at least one trial".into(),
        });
    }
    let v = potential.sample(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut estimate = f64::INFINITY;
    for _ in 0..trials {
        let u = sampling::random_field(grid, &mut rng);
        estimate = estimate.min(rayleigh_quotient(&u, &v)?);
    }
    Ok(CoercivityEstimate {
        estimate,
        ok: estimate > 0.0,
    })
}
