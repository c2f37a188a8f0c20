//! Truncated-box discretization of ℝ³.
//!
//! The box `[−L, L]³` carries `n` nodes per axis at spacing `h = 2L/n`. On a
//! staggered grid the nodes sit at cell centres `−L + (i + ½)h`, so the grid
//! is symmetric about the origin and no node touches it; an unstaggered grid
//! uses `−L + i·h` and has a node exactly at the origin when `n` is even.
//!
//! Integrals use the midpoint rule `h³ Σ`. Derivatives use the sixth-order
//! stencil in [`stencil`] with fields extended by zero outside the box.

mod dump;
pub mod stencil;

use crate::error::{Error, Result};

pub use dump::{read_dump, write_dump, DUMP_MAGIC};

/// Smallest admissible number of points per axis.
pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    points: usize,
    staggered: bool,
}

impl GridSpec {
    pub fn new(half_width: f64, points: usize, staggered: bool) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        if points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points per axis, got {points}"
            )));
        }
        if staggered && points % 2 == 1 {
            // an odd count puts the middle cell centre on the origin
            return Err(Error::InvalidGrid(format!(
                "staggered grids need an even point count, got {points}"
            )));
        }
        Ok(Self {
            half_width,
            points,
            staggered,
        })
    }

    /// Staggered grid, the default layout.
    pub fn staggered(half_width: f64, points: usize) -> Result<Self> {
        Self::new(half_width, points, true)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn is_staggered(&self) -> bool {
        self.staggered
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// Total node count `n³`.
    pub fn len(&self) -> usize {
        self.points * self.points * self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `i` along any axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        let offset = if self.staggered { 0.5 } else { 0.0 };
        -self.half_width + (i as f64 + offset) * self.spacing()
    }

    /// Linear index, x fastest.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.points * (iy + self.points * iz)
    }

    #[inline]
    pub fn unravel(&self, index: usize) -> [usize; 3] {
        let n = self.points;
        [index % n, (index / n) % n, index / (n * n)]
    }

    pub fn position(&self, index: usize) -> [f64; 3] {
        let [ix, iy, iz] = self.unravel(index);
        [self.coord(ix), self.coord(iy), self.coord(iz)]
    }

    pub fn radius(&self, index: usize) -> f64 {
        let [x, y, z] = self.position(index);
        (x * x + y * y + z * z).sqrt()
    }

    /// Node sitting exactly at the origin, if any.
    pub fn origin_node(&self) -> Option<usize> {
        if self.staggered || !self.points.is_multiple_of(2) {
            return None;
        }
        let mid = self.points / 2;
        Some(self.index(mid, mid, mid))
    }

    /// Smallest node distance to the origin.
    pub fn min_radius(&self) -> f64 {
        (0..self.points)
            .map(|i| self.coord(i).abs())
            .fold(f64::INFINITY, f64::min)
            * 3f64.sqrt()
    }

    /// Same box with about 1.5× the points per axis (rounded up to even);
    /// used for refinement estimates, e.g. 32 → 48.
    pub fn refined(&self) -> Self {
        let mut points = self.points + self.points.div_ceil(2);
        if points % 2 == 1 {
            points += 1;
        }
        Self { points, ..*self }
    }

    /// Whether the node lies in the outermost layer of the box.
    pub fn on_boundary_layer(&self, index: usize) -> bool {
        let last = self.points - 1;
        self.unravel(index).iter().any(|&i| i == 0 || i == last)
    }
}

/// A real field sampled on the nodes of a grid, x-fastest ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
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

    /// Internal constructor for values produced by finite arithmetic on
    /// finite inputs.
    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        assert!(value.is_finite());
        Self::from_raw(grid, vec![value; grid.len()])
    }

    /// Samples `f` at every node. Fails if `f` returns a non-finite value.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| v * factor).collect())
    }

    /// Nodewise map; the closure must keep values finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self::from_raw(self.grid, values))
    }

    /// Nodewise product.
    pub fn product(&self, other: &ScalarField) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x * y)
            .collect();
        Ok(Self::from_raw(self.grid, values))
    }

    /// L² inner product `h³ Σ f g`.
    pub fn dot(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x * y)
            .sum();
        Ok(self.grid.cell_volume() * sum)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// `h³ Σ f`.
pub fn integrate(f: &ScalarField) -> f64 {
    f.grid.cell_volume() * f.values.iter().sum::<f64>()
}

/// Discrete Laplacian `Δ_h u`, zero extension outside the box.
pub fn laplacian(u: &ScalarField) -> ScalarField {
    let grid = u.grid;
    let n = grid.points;
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let [c0, c1, c2, c3] = stencil::SECOND_DERIVATIVE;
    let weights = [c1, c2, c3];
    let src = &u.values;
    let mut out: Vec<f64> = src.iter().map(|v| 3.0 * c0 * v).collect();
    for axis in 0..3 {
        let stride = n.pow(axis);
        for (index, acc) in out.iter_mut().enumerate() {
            let a = (index / stride) % n;
            let mut sum = 0.0;
            for (d, w) in (1..=stencil::RADIUS).zip(weights) {
                let mut pair = 0.0;
                if a + d < n {
                    pair += src[index + d * stride];
                }
                if a >= d {
                    pair += src[index - d * stride];
                }
                sum += w * pair;
            }
            *acc += sum;
        }
    }
    for v in &mut out {
        *v *= inv_h2;
    }
    ScalarField::from_raw(grid, out)
}

/// Discretization of `∫|∇u|²`, realized as the quadratic form
/// `h³ ⟨u, −Δ_h u⟩` of the sixth-order Laplacian. Positive for every
/// nonzero field.
pub fn dirichlet_energy(u: &ScalarField) -> f64 {
    let lap = laplacian(u);
    let sum: f64 = u.values.iter().zip(&lap.values).map(|(a, b)| a * b).sum();
    -u.grid.cell_volume() * sum
}

/// Pointwise `|∇_h u|²` from sixth-order centered first differences.
pub fn gradient_squared(u: &ScalarField) -> ScalarField {
    let grid = u.grid;
    let n = grid.points;
    let inv_h = 1.0 / grid.spacing();
    let src = &u.values;
    let mut out = vec![0.0; src.len()];
    for axis in 0..3 {
        let stride = n.pow(axis);
        for (index, acc) in out.iter_mut().enumerate() {
            let a = (index / stride) % n;
            let mut derivative = 0.0;
            for (d, w) in (1..=stencil::RADIUS).zip(stencil::FIRST_DERIVATIVE) {
                let forward = if a + d < n {
                    src[index + d * stride]
                } else {
                    0.0
                };
                let backward = if a >= d { src[index - d * stride] } else { 0.0 };
                derivative += w * (forward - backward);
            }
            derivative *= inv_h;
            *acc += derivative * derivative;
        }
    }
    ScalarField::from_raw(grid, out)
}

/// `|u|^s` with zeros short-circuited, so non-integer powers never see `ln 0`.
#[inline]
pub(crate) fn abs_pow(value: f64, s: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else {
        (s * value.abs().ln()).exp()
    }
}

/// `∫|u|^s` for `s ≥ 1`.
pub fn lp_integral(u: &ScalarField, s: f64) -> Result<f64> {
    if !(s >= 1.0 && s.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "s",
            reason: format!("exponent must be >= 1, got {s}"),
        });
    }
    let sum: f64 = u.values.iter().map(|&v| abs_pow(v, s)).sum();
    Ok(u.grid.cell_volume() * sum)
}

/// `h³ Σ f` over nodes with `r ≤ |x| ≤ r + 1`.
pub fn annulus_integral(f: &ScalarField, r: f64) -> Result<f64> {
    let grid = f.grid;
    let corner = grid.half_width * 3f64.sqrt();
    if r.is_nan() || r < 0.0 {
        return Err(Error::InvalidArgument {
            name: "r",
            reason: format!("inner radius must be non-negative, got {r}"),
        });
    }
    if r + 1.0 > corner {
        return Err(Error::InvalidArgument {
            name: "r",
            reason: format!(
                "annulus [{r}, {}] extends past the box corner {corner}",
                r + 1.0
            ),
        });
    }
    let sum: f64 = f
        .values
        .iter()
        .enumerate()
        .filter(|&(i, _)| {
            let radius = grid.radius(i);
            radius >= r && radius <= r + 1.0
        })
        .map(|(_, v)| v)
        .sum();
    Ok(grid.cell_volume() * sum)
}

/// Fraction of `∫u²` carried by the outermost node layer.
pub fn boundary_mass_fraction(u: &ScalarField) -> f64 {
    let grid = u.grid;
    let mut total = 0.0;
    let mut shell = 0.0;
    for (i, v) in u.values.iter().enumerate() {
        let w = v * v;
        total += w;
        if grid.on_boundary_layer(i) {
            shell += w;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        shell / total
    }
}
