//! Box meshes, continuous piecewise-affine functions and their energies.

mod dump;
mod energy;
mod flux;
mod overlay;

pub use dump::{write_cells_csv, write_nodes_csv};
pub use energy::{energy, CellEnergy, EnergyError, EnergyReport, Integrand, SampledIntegrand};
pub use flux::{boundary_flux, gradient_integral};
pub use overlay::{min_overlay_pieces, pointwise_min_overlay, PatchFunction, Piece};

use std::sync::Arc;

use thiserror::Error;

use crate::envelope::Vector;
use crate::geometry::{dot, ConvexPolygon};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("bad resolution: {0}")]
    BadResolution(String),
    #[error("bad bounds: {0}")]
    BadBounds(String),
    #[error("unknown expression `{0}`")]
    UnknownExpression(String),
    #[error("patch support escapes cell {0}")]
    SupportEscapesCell(usize),
    #[error("{0}")]
    Invalid(String),
}

/// Simplicial mesh of an axis-aligned box. Intervals in 1D, triangles in 2D.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialMesh {
    dim: usize,
    coords: Vec<Vector>,
    cells: Vec<usize>,
    boundary: Vec<bool>,
    bounds: Vec<(f64, f64)>,
    conforming: bool,
}

impl SimplicialMesh {
    /// Assembles a mesh from raw parts. Cells are listed with stride
    /// `dim + 1`; 2D cells are reordered counter-clockwise.
    pub fn from_parts(
        dim: usize,
        coords: Vec<Vector>,
        mut cells: Vec<usize>,
        boundary: Vec<bool>,
        bounds: Vec<(f64, f64)>,
        conforming: bool,
    ) -> Result<Self, MeshError> {
        let k = dim + 1;
        if !(1..=2).contains(&dim) || cells.len() % k != 0 || boundary.len() != coords.len() {
            return Err(MeshError::Invalid("inconsistent mesh parts".into()));
        }
        if cells.iter().any(|&i| i >= coords.len()) {
            return Err(MeshError::Invalid("cell references a missing node".into()));
        }
        for c in cells.chunks_mut(k) {
            if dim == 2 && crate::geometry::orientation(coords[c[0]], coords[c[1]], coords[c[2]]) < 0.0 {
                c.swap(1, 2);
            }
            if dim == 1 && coords[c[1]][0] < coords[c[0]][0] {
                c.swap(0, 1);
            }
        }
        Ok(Self { dim, coords, cells, boundary, bounds, conforming })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn node(&self, i: usize) -> Vector {
        self.coords[i]
    }

    pub fn coords(&self) -> &[Vector] {
        &self.coords
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.cells[c * k..(c + 1) * k]
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// False for overlay refinements that carry hanging nodes.
    pub fn is_conforming(&self) -> bool {
        self.conforming
    }

    /// `λ(Ω)` of the box.
    pub fn domain_measure(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }

    /// Cell as a polygon (a unit-height strip in 1D).
    pub fn cell_polygon(&self, c: usize) -> ConvexPolygon {
        let v = self.cell(c);
        if self.dim == 1 {
            ConvexPolygon::interval(self.coords[v[0]][0], self.coords[v[1]][0])
        } else {
            ConvexPolygon::new(v.iter().map(|&i| self.coords[i]).collect())
        }
    }

    pub fn cell_measure(&self, c: usize) -> f64 {
        let v = self.cell(c);
        if self.dim == 1 {
            self.coords[v[1]][0] - self.coords[v[0]][0]
        } else {
            0.5 * crate::geometry::orientation(self.coords[v[0]], self.coords[v[1]], self.coords[v[2]])
        }
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_measure(c)).sum()
    }

    /// Gradient of the affine interpolant of `values` on cell `c`.
    pub fn cell_gradient(&self, c: usize, values: &[f64]) -> Vector {
        let v = self.cell(c);
        if self.dim == 1 {
            let (a, b) = (v[0], v[1]);
            return [(values[b] - values[a]) / (self.coords[b][0] - self.coords[a][0]), 0.0];
        }
        let (p0, p1, p2) = (self.coords[v[0]], self.coords[v[1]], self.coords[v[2]]);
        let (d1, d2) = ([p1[0] - p0[0], p1[1] - p0[1]], [p2[0] - p0[0], p2[1] - p0[1]]);
        let (z1, z2) = (values[v[1]] - values[v[0]], values[v[2]] - values[v[0]]);
        let det = d1[0] * d2[1] - d1[1] * d2[0];
        [(z1 * d2[1] - z2 * d1[1]) / det, (d1[0] * z2 - d2[0] * z1) / det]
    }
}

/// Uniform mesh of the box; 2D squares are split along the diagonal from
/// lower-left to upper-right.
pub fn build_box_mesh(bounds: &[(f64, f64)], resolution: &[usize]) -> Result<SimplicialMesh, MeshError> {
    let dim = bounds.len();
    if !(1..=2).contains(&dim) || resolution.len() != dim {
        return Err(MeshError::BadResolution(format!(
            "need one resolution per axis of a 1D or 2D box, got {} for {dim} axes",
            resolution.len()
        )));
    }
    if let Some(r) = resolution.iter().find(|&&r| r == 0) {
        return Err(MeshError::BadResolution(format!("resolution {r} must be at least 1")));
    }
    if bounds.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
        return Err(MeshError::BadBounds("each axis needs finite lo < hi".into()));
    }
    let ticks: Vec<Vec<f64>> = bounds
        .iter()
        .zip(resolution)
        .map(|(&(lo, hi), &r)| {
            (0..=r).map(|i| if i == r { hi } else { lo + (hi - lo) * i as f64 / r as f64 }).collect()
        })
        .collect();
    if dim == 1 {
        let coords: Vec<Vector> = ticks[0].iter().map(|&x| [x, 0.0]).collect();
        let n = coords.len();
        let boundary = (0..n).map(|i| i == 0 || i == n - 1).collect();
        let cells = (0..n - 1).flat_map(|i| [i, i + 1]).collect();
        return SimplicialMesh::from_parts(1, coords, cells, boundary, bounds.to_vec(), true);
    }
    let (nx, ny) = (resolution[0], resolution[1]);
    let id = |i: usize, j: usize| i + (nx + 1) * j;
    let mut coords = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut boundary = Vec::with_capacity(coords.capacity());
    for j in 0..=ny {
        for i in 0..=nx {
            coords.push([ticks[0][i], ticks[1][j]]);
            boundary.push(i == 0 || j == 0 || i == nx || j == ny);
        }
    }
    let mut cells = Vec::with_capacity(6 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            cells.extend_from_slice(&[a, b, c, a, c, d]);
        }
    }
    SimplicialMesh::from_parts(2, coords, cells, boundary, bounds.to_vec(), true)
}

/// Continuous piecewise-affine function with per-cell constant gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct PwaFunction {
    mesh: Arc<SimplicialMesh>,
    values: Vec<f64>,
    gradients: Vec<Vector>,
}

impl PwaFunction {
    pub fn new(mesh: Arc<SimplicialMesh>, values: Vec<f64>) -> Result<Self, MeshError> {
        if values.len() != mesh.num_nodes() || values.iter().any(|v| !v.is_finite()) {
            return Err(MeshError::Invalid("need one finite value per node".into()));
        }
        let gradients = (0..mesh.num_cells()).map(|c| mesh.cell_gradient(c, &values)).collect();
        Ok(Self { mesh, values, gradients })
    }

    /// Uses declared gradients instead of recomputing them from the values.
    pub fn with_gradients(
        mesh: Arc<SimplicialMesh>,
        values: Vec<f64>,
        gradients: Vec<Vector>,
    ) -> Result<Self, MeshError> {
        if values.len() != mesh.num_nodes() || gradients.len() != mesh.num_cells() {
            return Err(MeshError::Invalid("values or gradients have the wrong length".into()));
        }
        Ok(Self { mesh, values, gradients })
    }

    pub fn mesh(&self) -> &SimplicialMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<SimplicialMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gradients(&self) -> &[Vector] {
        &self.gradients
    }

    pub fn gradient(&self, c: usize) -> Vector {
        self.gradients[c]
    }

    /// Constant `b` with `u = ∇u·x + b` on cell `c`.
    pub fn cell_offset(&self, c: usize) -> f64 {
        let v0 = self.mesh.cell(c)[0];
        self.values[v0] - dot(self.gradients[c], self.mesh.node(v0))
    }

    /// Value at `x` using the smallest-index cell that contains it.
    pub fn eval(&self, x: Vector) -> Option<f64> {
        (0..self.mesh.num_cells())
            .find(|&c| self.mesh.cell_polygon(c).contains(self.embed(x)))
            .map(|c| dot(self.gradients[c], x) + self.cell_offset(c))
    }

    fn embed(&self, x: Vector) -> Vector {
        if self.mesh.dim == 1 {
            [x[0], 0.5]
        } else {
            x
        }
    }

    /// `max_T |∇u|_T|`.
    pub fn gradient_sup(&self) -> f64 {
        self.gradients.iter().map(|g| crate::geometry::norm(*g)).fold(0.0, f64::max)
    }
}

/// Boundary datum `φ`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expression {
    Affine { constant: f64, gradient: Vector },
    Zero,
    /// `amplitude · Π_d sin(π (x_d − lo_d)/(hi_d − lo_d))`, zero on the box boundary.
    SineBump { amplitude: f64 },
}

impl Expression {
    /// Resolves a builtin expression name.
    pub fn builtin(name: &str, amplitude: f64) -> Result<Self, MeshError> {
        match name {
            "zero" => Ok(Expression::Zero),
            "sine_bump" => Ok(Expression::SineBump { amplitude }),
            _ => Err(MeshError::UnknownExpression(name.to_string())),
        }
    }

    pub fn eval(&self, x: Vector, bounds: &[(f64, f64)]) -> f64 {
        match self {
            Expression::Affine { constant, gradient } => constant + dot(*gradient, x),
            Expression::Zero => 0.0,
            Expression::SineBump { amplitude } => {
                let mut v = *amplitude;
                for (d, (lo, hi)) in bounds.iter().enumerate() {
                    v *= (std::f64::consts::PI * (x[d] - lo) / (hi - lo)).sin();
                }
                v
            }
        }
    }

    pub fn affine_gradient(&self) -> Option<Vector> {
        match self {
            Expression::Affine { gradient, .. } => Some(*gradient),
            Expression::Zero => Some([0.0, 0.0]),
            Expression::SineBump { .. } => None,
        }
    }
}

/// Nodal interpolant; affine data keeps its gradient exactly on every cell.
pub fn interpolate(mesh: &Arc<SimplicialMesh>, phi: &Expression) -> Result<PwaFunction, MeshError> {
    let mut values: Vec<f64> = mesh.coords.iter().map(|x| phi.eval(*x, &mesh.bounds)).collect();
    if let Expression::SineBump { .. } = phi {
        for (v, b) in values.iter_mut().zip(&mesh.boundary) {
            if *b {
                *v = 0.0;
            }
        }
    }
    match phi.affine_gradient() {
        Some(g) => {
            let g = if mesh.dim == 1 { [g[0], 0.0] } else { g };
            PwaFunction::with_gradients(mesh.clone(), values, vec![g; mesh.num_cells()])
        }
        None => PwaFunction::new(mesh.clone(), values),
    }
}
