//! Sampled Lagrangians, their lower semicontinuous convex envelope `f**`,
//! the contact set `{f = f**}` and the decomposition witnesses consumed by
//! the construction.

mod builtin;
mod dump;
mod hull;
mod table;
mod witness;

pub use builtin::Builtin;
pub use dump::write_envelope_csv;
pub use hull::biconjugate;
pub use table::{parse_table, read_table};
pub use witness::{
    caratheodory_witness, check_simplex, check_witness, contact_set, simplex_witness, subgradient_at,
};

use thiserror::Error;

use crate::geometry::{ConvexPolygon, GridIndex};

/// Gradient-space vector. In one dimension the second slot is zero.
pub type Vector = [f64; 2];

pub const TOL_HULL: f64 = 1e-9;
pub const TOL_CONTACT: f64 = 1e-7;
pub const TOL_WITNESS: f64 = 1e-8;
pub const WEIGHT_FLOOR: f64 = 1e-10;
/// Relative singular-value cutoff for the affine rank of witness points.
pub const RANK_CUTOFF: f64 = 1e-9;
/// Grid half-width needed around the simplex radius, as a multiple of it.
pub const SEARCH_FACTOR: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvelopeError {
    #[error("invalid samples: {0}")]
    InvalidSamples(String),
    #[error("finite sample at node {node} has value {value} below the declared minorant {bound}")]
    MinorantViolated { node: usize, value: f64, bound: f64 },
    #[error("degenerate samples: {0}")]
    DegenerateSamples(String),
    #[error("point ({}, {}) lies outside the envelope domain", .0[0], .0[1])]
    OutOfDomain(Vector),
    #[error("no Carathéodory witness at ({}, {}): {reason}", .point[0], .point[1])]
    NoWitness { point: Vector, reason: String },
    #[error("no contact simplex encloses the ball of radius {radius}: {reason}")]
    NoSimplex { radius: f64, reason: String },
    #[error("gradient ({}, {}) lies outside the sampled region", .0[0], .0[1])]
    GradientOutOfDomain(Vector),
}

/// Growth bound declared for the finite values of `f`.
#[derive(Clone, Debug, PartialEq)]
pub enum Minorant {
    /// `f(ζ) >= c1 |ζ| + c2` with `c1 > 0`.
    Linear { c1: f64, c2: f64 },
    /// `f(ζ) >= a |ζ|² + b` with `a > 0`.
    Quadratic { a: f64, b: f64 },
    /// `f(ζ) >= φ(|ζ|)`, `φ` piecewise linear through `(t, φ(t))` knots with
    /// increasing `t`, extended by the end slopes.
    Table(Vec<(f64, f64)>),
}

impl Minorant {
    pub fn quadratic(a: f64, b: f64) -> Self {
        Minorant::Quadratic { a, b }
    }

    pub fn validate(&self) -> Result<(), EnvelopeError> {
        let bad = |m: &str| Err(EnvelopeError::InvalidSamples(m.to_string()));
        match self {
            Minorant::Linear { c1, c2 } if !(*c1 > 0.0) || !c2.is_finite() => {
                bad("linear minorant needs c1 > 0 and finite c2")
            }
            Minorant::Quadratic { a, b } if !(*a > 0.0) || !b.is_finite() => {
                bad("quadratic minorant needs a > 0 and finite b")
            }
            Minorant::Table(knots) => {
                if knots.len() < 2 {
                    return bad("minorant table needs at least two knots");
                }
                if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite())
                    || knots.windows(2).any(|w| w[1].0 <= w[0].0)
                {
                    return bad("minorant table must have finite knots with increasing t");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_superlinear(&self) -> bool {
        !matches!(self, Minorant::Linear { .. })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Minorant::Linear { c1, c2 } => c1 * t + c2,
            Minorant::Quadratic { a, b } => a * t * t + b,
            Minorant::Table(k) => {
                let n = k.len();
                let seg = if t <= k[0].0 {
                    0
                } else if t >= k[n - 1].0 {
                    n - 2
                } else {
                    k.partition_point(|p| p.0 <= t) - 1
                };
                let (t0, v0) = k[seg];
                let (t1, v1) = k[seg + 1];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

/// `f` sampled on a rectilinear grid; `+∞` is stored as `f64::INFINITY`.
#[derive(Clone, Debug)]
pub struct SampledLagrangian {
    axes: Vec<Vec<f64>>,
    values: Vec<f64>,
    minorant: Minorant,
    exact: Option<Builtin>,
}

impl SampledLagrangian {
    /// Builds from per-axis coordinates and values ordered with the first
    /// axis varying fastest.
    pub fn new(
        axes: Vec<Vec<f64>>,
        values: Vec<f64>,
        minorant: Minorant,
        exact: Option<Builtin>,
    ) -> Result<Self, EnvelopeError> {
        let dim = axes.len();
        if !(1..=2).contains(&dim) {
            return Err(EnvelopeError::InvalidSamples(format!("dimension {dim} not in {{1, 2}}")));
        }
        for (d, ax) in axes.iter().enumerate() {
            if ax.len() < 2 {
                return Err(EnvelopeError::InvalidSamples(format!("axis {d} has fewer than 2 samples")));
            }
            if ax.iter().any(|c| !c.is_finite()) || ax.windows(2).any(|w| w[1] <= w[0]) {
                return Err(EnvelopeError::InvalidSamples(format!(
                    "axis {d} coordinates must be finite and strictly increasing"
                )));
            }
        }
        let count: usize = axes.iter().map(Vec::len).product();
        if values.len() != count {
            return Err(EnvelopeError::InvalidSamples(format!(
                "expected {count} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(EnvelopeError::InvalidSamples("values must be real or +inf".into()));
        }
        if let Some(b) = exact {
            if b.dim() != dim {
                return Err(EnvelopeError::InvalidSamples(format!(
                    "builtin {b} is {}-dimensional, grid is {dim}-dimensional",
                    b.dim()
                )));
            }
        }
        minorant.validate()?;
        let f = Self { axes, values, minorant, exact };
        let finite = f.values.iter().filter(|v| v.is_finite()).count();
        if finite < dim + 2 {
            return Err(EnvelopeError::DegenerateSamples(format!(
                "{finite} finite samples, need at least {}",
                dim + 2
            )));
        }
        for i in 0..count {
            let v = f.values[i];
            if v.is_finite() {
                let bound = f.minorant.eval(crate::geometry::norm(f.node(i)));
                if v < bound - 1e-12 * v.abs().max(1.0) {
                    return Err(EnvelopeError::MinorantViolated { node: i, value: v, bound });
                }
            }
        }
        Ok(f)
    }

    /// Uniform grid `lo + (hi − lo)·i/(m − 1)` filled by a closure.
    pub fn from_fn(
        bounds: &[(f64, f64)],
        resolution: &[usize],
        minorant: Minorant,
        exact: Option<Builtin>,
        f: impl Fn(Vector) -> f64,
    ) -> Result<Self, EnvelopeError> {
        if bounds.len() != resolution.len() {
            return Err(EnvelopeError::InvalidSamples("bounds and resolution disagree".into()));
        }
        let axes: Vec<Vec<f64>> = bounds
            .iter()
            .zip(resolution)
            .map(|(&(lo, hi), &m)| {
                if m < 2 {
                    return Vec::new();
                }
                (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect()
            })
            .collect();
        let count: usize = axes.iter().map(Vec::len).product();
        let mut values = Vec::with_capacity(count);
        for i in 0..count {
            values.push(f(node_of(&axes, i)));
        }
        Self::new(axes, values, minorant, exact)
    }

    pub fn from_builtin(b: Builtin) -> Result<Self, EnvelopeError> {
        let (bounds, res) = b.default_grid();
        Self::from_builtin_grid(b, &bounds, &res)
    }

    pub fn from_builtin_grid(
        b: Builtin,
        bounds: &[(f64, f64)],
        resolution: &[usize],
    ) -> Result<Self, EnvelopeError> {
        if bounds.len() != b.dim() {
            return Err(EnvelopeError::InvalidSamples(format!(
                "builtin {b} needs a {}-dimensional grid",
                b.dim()
            )));
        }
        Self::from_fn(bounds, resolution, b.minorant(), Some(b), |x| b.eval(x))
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn minorant(&self) -> &Minorant {
        &self.minorant
    }

    pub fn exact(&self) -> Option<Builtin> {
        self.exact
    }

    pub fn node(&self, i: usize) -> Vector {
        node_of(&self.axes, i)
    }

    /// Copy with every finite value multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            axes: self.axes.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
            minorant: match &self.minorant {
                Minorant::Linear { c1, c2 } => Minorant::Linear { c1: c1 * s, c2: c2 * s },
                Minorant::Quadratic { a, b } => Minorant::Quadratic { a: a * s, b: b * s },
                Minorant::Table(k) => Minorant::Table(k.iter().map(|(t, v)| (*t, v * s)).collect()),
            },
            exact: None,
        }
    }

    /// Copy with new values on the same grid; the exact tag is dropped.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, EnvelopeError> {
        Self::new(self.axes.clone(), values, self.minorant.clone(), None)
    }

    /// Grid node located exactly (up to 1e-12 relative) at `x`.
    pub fn node_at(&self, x: Vector) -> Option<usize> {
        let mut idx = 0;
        let mut stride = 1;
        for (d, ax) in self.axes.iter().enumerate() {
            let c = x[d];
            let j = ax.partition_point(|&a| a < c);
            let tol = 1e-12 * (ax[0].abs().max(ax[ax.len() - 1].abs())).max(1.0);
            let hit = [j.checked_sub(1), Some(j)]
                .into_iter()
                .flatten()
                .filter(|&k| k < ax.len())
                .find(|&k| (ax[k] - c).abs() <= tol)?;
            idx += hit * stride;
            stride *= ax.len();
        }
        if self.dim() == 1 && x[1] != 0.0 {
            return None;
        }
        Some(idx)
    }

    /// Whether `x` lies in the closed sampling box.
    pub fn in_grid(&self, x: Vector) -> bool {
        self.axes.iter().enumerate().all(|(d, ax)| x[d] >= ax[0] && x[d] <= ax[ax.len() - 1])
    }

    /// `f(x)` for an arbitrary gradient: the closed form when tagged,
    /// the sample at grid nodes, otherwise the largest value among the
    /// corners of the grid cell holding `x`.
    pub fn eval(&self, x: Vector) -> Result<f64, EnvelopeError> {
        if let Some(b) = self.exact {
            return Ok(b.eval(x));
        }
        if let Some(i) = self.node_at(x) {
            return Ok(self.values[i]);
        }
        if !self.in_grid(x) {
            return Err(EnvelopeError::GradientOutOfDomain(x));
        }
        let mut ranges = Vec::new();
        for (d, ax) in self.axes.iter().enumerate() {
            let j = ax.partition_point(|&a| a <= x[d]).clamp(1, ax.len() - 1);
            ranges.push((j - 1, j));
        }
        let m0 = self.axes[0].len();
        let mut worst = f64::NEG_INFINITY;
        let ys: Vec<usize> = if self.dim() == 2 { vec![ranges[1].0, ranges[1].1] } else { vec![0] };
        for jy in ys {
            for jx in [ranges[0].0, ranges[0].1] {
                worst = worst.max(self.values[jx + m0 * jy]);
            }
        }
        Ok(worst)
    }
}

fn node_of(axes: &[Vec<f64>], mut i: usize) -> Vector {
    let mut x = [0.0; 2];
    for (d, ax) in axes.iter().enumerate() {
        x[d] = ax[i % ax.len()];
        i /= ax.len();
    }
    x
}

/// Lower hull triangle (2D) or segment (1D) with its affine plane.
#[derive(Clone, Debug)]
pub struct Facet {
    pub gradient: Vector,
    pub offset: f64,
    /// Sample-node indices of the facet corners.
    pub vertices: Vec<usize>,
    /// Projection onto gradient space (a unit-height strip in 1D).
    pub cell: ConvexPolygon,
    /// Index of the maximal coplanar face containing this facet.
    pub face: usize,
}

/// Maximal union of coplanar adjacent facets.
#[derive(Clone, Debug)]
pub struct Face {
    pub facets: Vec<usize>,
    /// Sorted sample-node indices of all facet corners.
    pub vertices: Vec<usize>,
    pub gradient: Vector,
    pub offset: f64,
}

/// `f**` as the lower convex hull of the lifted finite samples.
#[derive(Clone, Debug)]
pub struct ConvexEnvelope {
    pub(crate) dim: usize,
    pub(crate) facets: Vec<Facet>,
    pub(crate) faces: Vec<Face>,
    pub(crate) hull_vertices: Vec<usize>,
    pub(crate) domain: ConvexPolygon,
    pub(crate) index: GridIndex,
    pub(crate) nodes: Vec<Vector>,
    pub(crate) values: Vec<f64>,
    pub(crate) node_values: Vec<f64>,
    pub(crate) exact: Option<Builtin>,
}

impl ConvexEnvelope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Sorted sample-node indices of lower-hull vertices.
    pub fn hull_vertices(&self) -> &[usize] {
        &self.hull_vertices
    }

    /// Convex hull of the finite sample coordinates (strip-embedded in 1D).
    pub fn domain(&self) -> &ConvexPolygon {
        &self.domain
    }

    pub fn exact(&self) -> Option<Builtin> {
        self.exact
    }

    pub fn node(&self, i: usize) -> Vector {
        self.nodes[i]
    }

    pub fn sample_value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Envelope values at every sample node (`+∞` outside the domain).
    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    /// Smallest facet index whose closed cell contains `x`.
    pub fn locate(&self, x: Vector) -> Option<usize> {
        if self.dim == 1 {
            let t = x[0];
            let tol = 1e-12 * t.abs().max(1.0);
            return self.facets.iter().position(|f| {
                let a = self.nodes[f.vertices[0]][0];
                let b = self.nodes[f.vertices[1]][0];
                t >= a - tol && t <= b + tol
            });
        }
        self.index
            .at_point(x)
            .iter()
            .copied()
            .filter(|&i| self.facets[i].cell.contains(x))
            .min()
    }

    pub fn contains(&self, x: Vector) -> bool {
        self.locate(x).is_some()
    }

    /// `f**(x)` from the hull; errors outside the domain.
    pub fn value(&self, x: Vector) -> Result<f64, EnvelopeError> {
        let i = self.locate(x).ok_or(EnvelopeError::OutOfDomain(x))?;
        let f = &self.facets[i];
        Ok(crate::geometry::dot(f.gradient, x) + f.offset)
    }

    /// `f**(x)` from the hull inside the domain, from the closed form
    /// outside it when one is attached.
    pub fn eval(&self, x: Vector) -> Result<f64, EnvelopeError> {
        match self.value(x) {
            Ok(v) => Ok(v),
            Err(_) if self.exact.is_some() => Ok(self.exact.unwrap().exact_envelope(x)),
            Err(_) => Err(EnvelopeError::GradientOutOfDomain(x)),
        }
    }
}

/// Per-node contact flags `f <= f** + tol_contact·max(1, |f**|)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactMask {
    pub mask: Vec<bool>,
    pub tolerance: f64,
    pub exact: Option<Builtin>,
}

impl ContactMask {
    pub fn is_contact(&self, node: usize) -> bool {
        self.mask[node]
    }

    /// Closed-form contact predicate, when the Lagrangian carries one.
    pub fn predicate(&self, x: Vector) -> Option<bool> {
        self.exact.map(|b| b.exact_contact(x))
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }
}

pub(crate) fn is_contact_value(f: f64, fss: f64, tol: f64) -> bool {
    f.is_finite() && fss.is_finite() && f <= fss + tol * fss.abs().max(1.0)
}

/// Decomposition `ξ = Σ α_i ξ_i` along a face of the envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct CaratheodoryWitness {
    pub point: Vector,
    pub contact: bool,
    pub k: usize,
    pub points: Vec<Vector>,
    pub weights: Vec<f64>,
    /// Values `f(ξ_i)`.
    pub values: Vec<f64>,
    pub subgradient: Vector,
    /// `f**(ξ)`.
    pub envelope_value: f64,
}

impl CaratheodoryWitness {
    pub fn contact(point: Vector, value: f64, subgradient: Vector) -> Self {
        Self {
            point,
            contact: true,
            k: 0,
            points: Vec::new(),
            weights: Vec::new(),
            values: Vec::new(),
            subgradient,
            envelope_value: value,
        }
    }
}

/// Contact points whose convex hull contains the closed ball `B̄(0, R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexWitness {
    pub radius: f64,
    pub points: Vec<Vector>,
    pub values: Vec<f64>,
}

impl SimplexWitness {
    pub fn max_norm(&self) -> f64 {
        self.points.iter().map(|p| crate::geometry::norm(*p)).fold(0.0, f64::max)
    }
}
