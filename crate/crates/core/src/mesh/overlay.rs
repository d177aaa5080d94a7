//! Exact pointwise minimum of a pwa function with a polyhedral patch.

use std::collections::HashMap;
use std::sync::Arc;

use super::{MeshError, PwaFunction, SimplicialMesh};
use crate::envelope::Vector;
use crate::geometry::{dot, sub, ConvexPolygon, HalfPlane};

/// Affine function `grad · x + offset` restricted to a convex polygon.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub polygon: ConvexPolygon,
    pub grad: Vector,
    pub offset: f64,
}

impl Piece {
    pub fn eval(&self, x: Vector) -> f64 {
        dot(self.grad, x) + self.offset
    }

    pub fn area(&self) -> f64 {
        self.polygon.area()
    }
}

/// `ω` as affine pieces tiling a convex support; `+∞` outside it.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchFunction {
    pub pieces: Vec<Piece>,
    pub support: ConvexPolygon,
}

impl PatchFunction {
    /// Smallest value among pieces containing `x`, `+∞` off the support.
    pub fn eval(&self, x: Vector) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.polygon.contains(x))
            .map(|p| p.eval(x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Pieces of `min(u, ω)` on `cell`, with `u = ug · x + uc` there.
pub fn min_overlay_pieces(cell: &ConvexPolygon, ug: Vector, uc: f64, patch: &PatchFunction) -> Vec<Piece> {
    let mut out: Vec<Piece> = cell
        .subtract(&patch.support)
        .into_iter()
        .map(|polygon| Piece { polygon, grad: ug, offset: uc })
        .collect();
    for p in &patch.pieces {
        let poly = p.polygon.intersect(cell);
        if poly.is_empty() {
            continue;
        }
        let below = HalfPlane::new(sub(p.grad, ug), uc - p.offset);
        let low = poly.clip(&below);
        let high = poly.clip(&below.complement());
        if !low.is_empty() {
            out.push(Piece { polygon: low, grad: p.grad, offset: p.offset });
        }
        if !high.is_empty() {
            out.push(Piece { polygon: high, grad: ug, offset: uc });
        }
    }
    out
}

/// `min(u, ω)` on the overlay refinement of the cell holding the support.
///
/// The refined mesh keeps every original node (with its value) and may
/// carry hanging nodes on the patched cell's edges.
pub fn pointwise_min_overlay(u: &PwaFunction, patch: &PatchFunction) -> Result<PwaFunction, MeshError> {
    let mesh = u.mesh();
    let cell = (0..mesh.num_cells())
        .find(|&c| mesh.cell_polygon(c).contains_polygon(&patch.support))
        .ok_or_else(|| {
            let c = patch.support.centroid();
            let probe = if mesh.dim() == 1 { [c[0], 0.5] } else { c };
            MeshError::SupportEscapesCell(
                (0..mesh.num_cells()).find(|&k| mesh.cell_polygon(k).contains(probe)).unwrap_or(usize::MAX),
            )
        })?;
    let pieces = min_overlay_pieces(&mesh.cell_polygon(cell), u.gradient(cell), u.cell_offset(cell), patch);

    let dim = mesh.dim();
    let mut coords = mesh.coords().to_vec();
    let mut values = u.values().to_vec();
    let mut boundary = mesh.boundary_mask().to_vec();
    let mut lookup: HashMap<(u64, u64), usize> =
        coords.iter().enumerate().map(|(i, p)| ((p[0].to_bits(), p[1].to_bits()), i)).collect();
    let bounds = mesh.bounds().to_vec();
    let on_box = |p: Vector| bounds.iter().enumerate().any(|(d, (lo, hi))| p[d] == *lo || p[d] == *hi);
    let mut node = |p: Vector, v: f64, coords: &mut Vec<Vector>, values: &mut Vec<f64>| -> usize {
        *lookup.entry((p[0].to_bits(), p[1].to_bits())).or_insert_with(|| {
            coords.push(p);
            values.push(v);
            boundary.push(on_box(p));
            coords.len() - 1
        })
    };

    let mut cells = Vec::new();
    let mut grads = Vec::new();
    for c in 0..mesh.num_cells() {
        if c != cell {
            cells.extend_from_slice(mesh.cell(c));
            grads.push(u.gradient(c));
        }
    }
    for p in &pieces {
        if dim == 1 {
            let bb = p.polygon.bbox();
            let (a, b) = ([bb.lo[0], 0.0], [bb.hi[0], 0.0]);
            let ia = node(a, p.eval(a), &mut coords, &mut values);
            let ib = node(b, p.eval(b), &mut coords, &mut values);
            cells.extend_from_slice(&[ia, ib]);
            grads.push(p.grad);
        } else {
            for t in p.polygon.triangles() {
                for q in t {
                    let i = node(q, p.eval(q), &mut coords, &mut values);
                    cells.push(i);
                }
                grads.push(p.grad);
            }
        }
    }
    let refined = SimplicialMesh::from_parts(dim, coords, cells, boundary, bounds.clone(), false)?;
    PwaFunction::with_gradients(Arc::new(refined), values, grads)
}
