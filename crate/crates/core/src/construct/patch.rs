//! Single cone and tube patches over an affine piece of `u`.

use super::cellina::{cellina_fill, CellinaFill};
use super::template::PieceTag;
use super::ConstructError;
use crate::envelope::Vector;
use crate::geometry::{add, dot, norm, scale, sub, ConvexPolygon, HalfPlane};
use crate::mesh::{Piece, PatchFunction, PwaFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PatchKind {
    /// `ξ` interior to a full-dimensional face.
    Cone,
    /// `ξ` on a segment of contact points, `k < N`.
    Tube,
    /// 1D exact sawtooth on a whole region.
    Laminate,
}

impl PatchKind {
    pub fn name(self) -> &'static str {
        match self {
            PatchKind::Cone => "cone",
            PatchKind::Tube => "tube",
            PatchKind::Laminate => "laminate",
        }
    }
}

/// Orthonormal frame; frame coordinates are `y = (e1·x, e2·x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub e1: Vector,
    pub e2: Vector,
}

impl Frame {
    pub const IDENTITY: Frame = Frame { e1: [1.0, 0.0], e2: [0.0, 1.0] };

    /// Frame whose first axis is `d`.
    pub fn along(d: Vector) -> Result<Frame, ConstructError> {
        let n = norm(d);
        if !(n > 0.0) || !n.is_finite() {
            return Err(ConstructError::FrameDegenerate(format!("direction ({}, {})", d[0], d[1])));
        }
        let e1 = scale(d, 1.0 / n);
        Ok(Frame { e1, e2: [-e1[1], e1[0]] })
    }

    pub fn to_frame(&self, x: Vector) -> Vector {
        [dot(self.e1, x), dot(self.e2, x)]
    }

    pub fn to_world(&self, y: Vector) -> Vector {
        add(scale(self.e1, y[0]), scale(self.e2, y[1]))
    }

    pub fn polygon_to_world(&self, p: &ConvexPolygon) -> ConvexPolygon {
        if *self == Frame::IDENTITY {
            return p.clone();
        }
        p.linear_map(self.e1, self.e2)
    }
}

/// Everything needed to place one patch.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchSpec {
    pub kind: PatchKind,
    pub anchor: Vector,
    pub scale: f64,
    pub xi: Vector,
    /// Witness points `ξ_i`.
    pub points: Vec<Vector>,
    /// Simplex points `ζ_j` (tube only).
    pub zetas: Vec<Vector>,
    pub gamma: f64,
    pub s_eta: f64,
    pub rho: f64,
    pub cellina_rounds: usize,
}

/// Unscaled patch in frame coordinates: each piece carries `(ω̃ - u)/s`
/// as a function of `y = F^T (x - x0) / s`.
#[derive(Clone, Debug)]
pub(crate) struct Shape {
    pub dim: usize,
    pub frame: Frame,
    pub support: ConvexPolygon,
    pub core: ConvexPolygon,
    pub hull: ConvexPolygon,
    pub pieces: Vec<(Piece, PieceTag)>,
}

/// Cone over `w(y) = max_i d_i·y` with `d_i = ξ_i - ξ`; support `{w ≤ 1}`.
pub(crate) fn cone_shape(dim: usize, xi: Vector, points: &[Vector]) -> Result<Shape, ConstructError> {
    let d: Vec<Vector> = points.iter().map(|p| sub(*p, xi)).collect();
    if d.len() != dim + 1 {
        return Err(ConstructError::Invalid(format!("cone needs {} witness points, got {}", dim + 1, d.len())));
    }
    let mut pieces = Vec::new();
    let (support, hull) = if dim == 1 {
        let (lo, hi) = if d[0][0] < d[1][0] { (d[0][0], d[1][0]) } else { (d[1][0], d[0][0]) };
        if !(lo < 0.0 && hi > 0.0) {
            return Err(ConstructError::FrameDegenerate("witness does not straddle ξ".to_string()));
        }
        pieces.push((Piece { polygon: ConvexPolygon::interval(1.0 / lo, 0.0), grad: [lo, 0.0], offset: -0.5 }, PieceTag::Core));
        pieces.push((Piece { polygon: ConvexPolygon::interval(0.0, 1.0 / hi), grad: [hi, 0.0], offset: -0.5 }, PieceTag::Core));
        (ConvexPolygon::interval(1.0 / lo, 1.0 / hi), ConvexPolygon::interval(0.5 / lo, 0.5 / hi))
    } else {
        let hps: Vec<HalfPlane> = d.iter().map(|di| HalfPlane::new(*di, 1.0)).collect();
        let reach = d.iter().map(|v| norm(*v)).fold(f64::INFINITY, f64::min);
        let b = 1e3 / reach.max(1e-300);
        let support = ConvexPolygon::from_box([-b, -b], [b, b]).clip_all(hps.iter());
        if support.is_empty() || support.vertices().iter().any(|v| v[0].abs() >= b || v[1].abs() >= b) {
            return Err(ConstructError::FrameDegenerate("witness points do not surround ξ".to_string()));
        }
        for (i, di) in d.iter().enumerate() {
            let cut: Vec<HalfPlane> = d
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != i)
                .map(|(_, dl)| HalfPlane::new(sub(*dl, *di), 0.0))
                .collect();
            let poly = support.clip_all(cut.iter());
            if !poly.is_empty() {
                pieces.push((Piece { polygon: poly, grad: *di, offset: -0.5 }, PieceTag::Core));
            }
        }
        let hull = support.homothety([0.0, 0.0], 0.5);
        (support, hull)
    };
    Ok(Shape { dim, frame: Frame::IDENTITY, core: support.clone(), support, hull, pieces })
}

/// Frame and signed slopes `c1 < 0 < c2` for a collinear pair around `ξ`.
pub(crate) fn tube_frame(xi: Vector, points: &[Vector]) -> Result<(Frame, f64, f64), ConstructError> {
    if points.len() != 2 {
        return Err(ConstructError::Invalid(format!("tube needs 2 witness points, got {}", points.len())));
    }
    let frame = Frame::along(sub(points[1], points[0]))?;
    let c: Vec<f64> = points.iter().map(|p| dot(frame.e1, sub(*p, xi))).collect();
    let off = points.iter().map(|p| dot(frame.e2, sub(*p, xi)).abs()).fold(0.0, f64::max);
    let span = (c[1] - c[0]).abs();
    if !(c[0] < 0.0 && c[1] > 0.0) || off > 1e-9 * span.max(1.0) {
        return Err(ConstructError::FrameDegenerate("ξ is not inside the witness segment".to_string()));
    }
    Ok((frame, c[0], c[1]))
}

/// One end of the tube in local coordinates: apex at the origin, base on
/// `y2 = σ` with `σ = ±1`.
#[derive(Clone, Debug)]
pub(crate) struct CapLocal {
    pub sigma: f64,
    pub pieces: Vec<(Piece, PieceTag)>,
    pub fill: CellinaFill,
}

pub(crate) fn tube_cap(
    sigma: f64,
    c1: f64,
    c2: f64,
    gamma: f64,
    directions: &[Vector],
    rho: f64,
    rounds: usize,
) -> Result<CapLocal, ConstructError> {
    let (b1, b2) = (gamma / c1, gamma / c2);
    let a = ConvexPolygon::new(vec![[0.0, 0.0], [b1, sigma], [b2, sigma]]);
    let strip = [HalfPlane::new([-1.0, 0.0], -0.5 * b1), HalfPlane::new([1.0, 0.0], 0.5 * b2)];
    let a_e = a.clip_all(strip.iter());
    let g = [0.0, sigma * gamma];
    let fill = cellina_fill(&a_e, 2, g, 0.0, directions, rho, rounds)?;
    let shift = -0.5 * gamma;
    let mut pieces = Vec::new();
    for p in &fill.pieces {
        pieces.push((Piece { offset: p.offset + shift, ..p.clone() }, PieceTag::Cap));
    }
    for r in &fill.residual {
        pieces.push((Piece { polygon: r.clone(), grad: g, offset: shift }, PieceTag::CapResidual));
    }
    for rest in a.subtract(&a_e) {
        pieces.push((Piece { polygon: rest, grad: g, offset: shift }, PieceTag::Cap));
    }
    let (lo, hi) = if sigma > 0.0 { (0.0, 1.0) } else { (-1.0, 0.0) };
    for (x0, x1, c) in [(b1, 0.0, c1), (0.0, b2, c2)] {
        for part in ConvexPolygon::from_box([x0, lo], [x1, hi]).subtract(&a) {
            pieces.push((Piece { polygon: part, grad: [c, 0.0], offset: shift }, PieceTag::Cap));
        }
    }
    Ok(CapLocal { sigma, pieces, fill })
}

fn translate(p: &Piece, t: Vector) -> Piece {
    Piece {
        polygon: p.polygon.homothety(t, 1.0),
        grad: p.grad,
        offset: p.offset - dot(p.grad, t),
    }
}

/// Full tube `Q = (γ/c1, γ/c2) × (-S, S)` with caps placed at `|y2| = S - 1`.
pub(crate) fn tube_shape(frame: Frame, c1: f64, c2: f64, gamma: f64, s_eta: f64, caps: &[CapLocal]) -> Shape {
    let (b1, b2) = (gamma / c1, gamma / c2);
    let l = s_eta - 1.0;
    let shift = -0.5 * gamma;
    let mut pieces = vec![
        (Piece { polygon: ConvexPolygon::from_box([b1, -l], [0.0, l]), grad: [c1, 0.0], offset: shift }, PieceTag::Core),
        (Piece { polygon: ConvexPolygon::from_box([0.0, -l], [b2, l]), grad: [c2, 0.0], offset: shift }, PieceTag::Core),
    ];
    for cap in caps {
        let t = [0.0, cap.sigma * l];
        pieces.extend(cap.pieces.iter().map(|(p, tag)| (translate(p, t), *tag)));
    }
    Shape {
        dim: 2,
        frame,
        support: ConvexPolygon::from_box([b1, -s_eta], [b2, s_eta]),
        core: ConvexPolygon::from_box([b1, -l], [b2, l]),
        hull: ConvexPolygon::from_box([0.5 * b1, -s_eta], [0.5 * b2, s_eta]),
        pieces,
    }
}

/// World image of a frame polygon under `x = x0 + s F y`.
pub(crate) fn place(dim: usize, frame: &Frame, poly: &ConvexPolygon, x0: Vector, s: f64) -> ConvexPolygon {
    if dim == 1 {
        let b = poly.bbox();
        return ConvexPolygon::interval(x0[0] + s * b.lo[0], x0[0] + s * b.hi[0]);
    }
    frame.polygon_to_world(poly).homothety(x0, s)
}

/// World gradient of `ω̃` on a shape piece.
pub(crate) fn world_gradient(frame: &Frame, xi: Vector, g: Vector) -> Vector {
    add(xi, frame.to_world(g))
}

fn placed(shape: &Shape, xi: Vector, u0: f64, x0: Vector, s: f64) -> PatchFunction {
    let x0 = if shape.dim == 1 { [x0[0], 0.0] } else { x0 };
    let pieces = shape
        .pieces
        .iter()
        .map(|(p, _)| {
            let gw = shape.frame.to_world(p.grad);
            Piece {
                polygon: place(shape.dim, &shape.frame, &p.polygon, x0, s),
                grad: add(xi, gw),
                offset: u0 - dot(xi, x0) - dot(gw, x0) + s * p.offset,
            }
        })
        .collect();
    PatchFunction { pieces, support: place(shape.dim, &shape.frame, &shape.support, x0, s) }
}

/// Largest `s` with `x0 + s F·support ⊆ cell`.
pub fn admissible_scale(
    u: &PwaFunction,
    cell: usize,
    anchor: Vector,
    support: &ConvexPolygon,
    frame: &Frame,
) -> Result<f64, ConstructError> {
    let mesh = u.mesh();
    let dim = mesh.dim();
    let poly = mesh.cell_polygon(cell);
    let x0 = if dim == 1 { [anchor[0], 0.5] } else { anchor };
    let world = if dim == 1 { support.clone() } else { frame.polygon_to_world(support) };
    let mut s = f64::INFINITY;
    for hp in poly.halfplanes() {
        if dim == 1 && hp.normal[0] == 0.0 {
            continue;
        }
        let slack = hp.offset - dot(hp.normal, x0);
        if !(slack > 0.0) {
            return Err(ConstructError::NoRoom(format!("anchor lies on or outside cell {cell}")));
        }
        let h = if dim == 1 {
            let b = world.bbox();
            hp.normal[0] * if hp.normal[0] > 0.0 { b.hi[0] } else { b.lo[0] }
        } else {
            world.support(hp.normal)
        };
        if h > 0.0 {
            s = s.min(slack / h);
        }
    }
    if !s.is_finite() || !(s > 0.0) {
        return Err(ConstructError::NoRoom(format!("support is unbounded or degenerate in cell {cell}")));
    }
    Ok(s)
}

fn anchor_check(u: &PwaFunction, cell: usize, anchor: Vector) -> Result<(ConvexPolygon, Vector, f64), ConstructError> {
    let mesh = u.mesh();
    if cell >= mesh.num_cells() {
        return Err(ConstructError::Invalid(format!("cell {cell} out of range")));
    }
    let poly = mesh.cell_polygon(cell);
    let probe = if mesh.dim() == 1 { [anchor[0], 0.5] } else { anchor };
    let inside = poly.halfplanes().iter().all(|hp| {
        (mesh.dim() == 1 && hp.normal[0] == 0.0) || hp.eval(probe) < 0.0
    });
    if !inside {
        return Err(ConstructError::AnchorOnBoundary(anchor));
    }
    let ug = u.gradient(cell);
    let u0 = dot(ug, [anchor[0], if mesh.dim() == 1 { 0.0 } else { anchor[1] }]) + u.cell_offset(cell);
    Ok((poly, ug, u0))
}

fn check_room(poly: &ConvexPolygon, patch: &PatchFunction, cell: usize) -> Result<(), ConstructError> {
    if poly.contains_polygon(&patch.support) {
        Ok(())
    } else {
        Err(ConstructError::NoRoom(format!("support leaves cell {cell}")))
    }
}

/// `ω̃ = u(x0) + ξ·(x - x0) + max_i (ξ_i - ξ)·(x - x0) - s/2` on
/// `{max_i (ξ_i - ξ)·(x - x0) ≤ s}`.
pub fn build_patch_cone(u: &PwaFunction, cell: usize, spec: &PatchSpec) -> Result<PatchFunction, ConstructError> {
    let (poly, _, u0) = anchor_check(u, cell, spec.anchor)?;
    let shape = cone_shape(u.mesh().dim(), spec.xi, &spec.points)?;
    let patch = placed(&shape, spec.xi, u0, spec.anchor, spec.scale);
    check_room(&poly, &patch, cell)?;
    Ok(patch)
}

/// `ω̃ = u(x0) + ξ·(x - x0) + s w̄((x - x0)/s) - sγ/2` on the tube `Q_s`.
pub fn build_patch_tube(u: &PwaFunction, cell: usize, spec: &PatchSpec) -> Result<PatchFunction, ConstructError> {
    if u.mesh().dim() != 2 {
        return Err(ConstructError::Invalid("tubes need N = 2".to_string()));
    }
    let (poly, _, u0) = anchor_check(u, cell, spec.anchor)?;
    let (frame, c1, c2) = tube_frame(spec.xi, &spec.points)?;
    if !(spec.gamma > 0.0 && spec.gamma < 1.0) {
        return Err(ConstructError::SlopeTooLarge(spec.gamma));
    }
    let dirs: Vec<Vector> = spec.zetas.iter().map(|z| frame.to_frame(sub(*z, spec.xi))).collect();
    let caps = [
        tube_cap(1.0, c1, c2, spec.gamma, &dirs, spec.rho, spec.cellina_rounds)?,
        tube_cap(-1.0, c1, c2, spec.gamma, &dirs, spec.rho, spec.cellina_rounds)?,
    ];
    let shape = tube_shape(frame, c1, c2, spec.gamma, spec.s_eta, &caps);
    let patch = placed(&shape, spec.xi, u0, spec.anchor, spec.scale);
    check_room(&poly, &patch, cell)?;
    Ok(patch)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::{build_box_mesh, interpolate, Expression};

    fn zero(dim: usize, res: usize) -> PwaFunction {
        let bounds = vec![(0.0, 1.0); dim];
        let mesh = Arc::new(build_box_mesh(&bounds, &vec![res; dim]).unwrap());
        interpolate(&mesh, &Expression::Zero).unwrap()
    }

    fn spec(kind: PatchKind, anchor: Vector, s: f64, points: Vec<Vector>) -> PatchSpec {
        PatchSpec {
            kind,
            anchor,
            scale: s,
            xi: [0.0, 0.0],
            points,
            zetas: vec![[2.0, -1.2], [0.0, 2.2], [-2.0, -1.2]],
            gamma: 0.5,
            s_eta: 2.0,
            rho: 0.3,
            cellina_rounds: 12,
        }
    }

    #[test]
    fn one_dimensional_cone_is_a_tent() {
        let u = zero(1, 4);
        let (x0, s) = (0.375, 0.1);
        let p = build_patch_cone(&u, 1, &spec(PatchKind::Cone, [x0, 0.0], s, vec![[1.0, 0.0], [-1.0, 0.0]])).unwrap();
        let b = p.support.bbox();
        assert!((b.lo[0] - (x0 - s)).abs() < 1e-15 && (b.hi[0] - (x0 + s)).abs() < 1e-15);
        for t in [-1.0, -0.6, -0.2, 0.0, 0.3, 0.9, 1.0] {
            let x = [x0 + t * s, 0.5];
            assert!((p.eval(x) - (t.abs() * s - s / 2.0)).abs() < 1e-15, "t = {t}");
        }
    }

    #[test]
    fn scale_fits_the_cell() {
        let u = zero(1, 4);
        let support = ConvexPolygon::interval(-1.0, 1.0);
        let s = admissible_scale(&u, 0, [0.125, 0.0], &support, &Frame::IDENTITY).unwrap();
        assert_eq!(s, 0.125);
        assert!(matches!(
            admissible_scale(&u, 0, [0.25, 0.0], &support, &Frame::IDENTITY),
            Err(ConstructError::NoRoom(_))
        ));
    }

    #[test]
    fn cone_margins_in_two_dimensions() {
        let u = zero(2, 2);
        let pts = vec![[1.0, 0.0], [-0.5, 0.8], [-0.5, -0.8]];
        let sp = spec(PatchKind::Cone, [0.3, 0.15], 0.05, pts.clone());
        let p = build_patch_cone(&u, 0, &sp).unwrap();
        for v in p.support.vertices() {
            assert!((p.eval(*v) - 0.025).abs() < 1e-14);
        }
        assert!((p.eval(sp.anchor) + 0.025).abs() < 1e-15);
        for q in &p.pieces {
            assert!(pts.iter().any(|g| *g == q.grad));
        }
        let area: f64 = p.pieces.iter().map(|q| q.polygon.area()).sum();
        assert!((area - p.support.area()).abs() < 1e-15);
    }

    #[test]
    fn tube_geometry_for_the_radial_well() {
        let u = zero(2, 2);
        let sp = spec(PatchKind::Tube, [0.4, 0.1], 0.02, vec![[1.0, 0.0], [-1.0, 0.0]]);
        let p = build_patch_tube(&u, 0, &sp).unwrap();
        let b = p.support.bbox();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-14;
        assert!(close(b.lo[0], 0.39) && close(b.hi[0], 0.41) && close(b.lo[1], 0.06) && close(b.hi[1], 0.14));
        let margin = sp.scale * sp.gamma / 2.0;
        for v in p.support.vertices() {
            assert!(p.eval(*v) >= margin - 1e-14);
        }
        let inner = ConvexPolygon::from_box([0.4 - 0.01 / 3.0, 0.1 - 0.04 / 3.0], [0.4 + 0.01 / 3.0, 0.1 + 0.04 / 3.0]);
        for v in inner.vertices() {
            assert!(p.eval(*v) < 0.0);
        }
        assert!(matches!(
            build_patch_tube(&u, 0, &PatchSpec { points: vec![[1.0, 0.0], [1.0, 1.0]], ..sp.clone() }),
            Err(ConstructError::FrameDegenerate(_))
        ));
    }
}
