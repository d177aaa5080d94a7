//! Filling a convex set by homothets on which the profile's gradients lie
//! in a prescribed finite set.

use super::ConstructError;
use crate::envelope::Vector;
use crate::geometry::{convex_hull, dot, norm, overlap_area, scale, sub, ConvexPolygon, HalfPlane};
use crate::mesh::Piece;

/// `center + radius · P` where `P = {z : max_j (d_j - g)·z ≤ 1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homothet {
    pub center: Vector,
    pub radius: f64,
}

/// Result of a fill: `w̄ = w̃ - r + max_j d_j·(x - y)` on each homothet,
/// `w̄ = w̃` on the residual.
#[derive(Clone, Debug)]
pub struct CellinaFill {
    pub dim: usize,
    pub domain: ConvexPolygon,
    /// Gradient `g` of `w̃ = g·x + c`.
    pub slope: Vector,
    pub constant: f64,
    pub directions: Vec<Vector>,
    pub shape: ConvexPolygon,
    pub homothets: Vec<Homothet>,
    /// Pieces of `w̄` on the homothets, gradients in `directions`.
    pub pieces: Vec<Piece>,
    pub residual: Vec<ConvexPolygon>,
    pub residual_measure: f64,
}

impl CellinaFill {
    fn w_tilde(&self, x: Vector) -> f64 {
        dot(self.slope, x) + self.constant
    }

    pub fn polygon(&self, h: &Homothet) -> ConvexPolygon {
        self.shape.homothety(h.center, h.radius)
    }

    /// `w̄(x)` for `x` in the domain.
    pub fn eval(&self, x: Vector) -> f64 {
        for h in &self.homothets {
            if self.polygon(h).contains(x) {
                let z = sub(x, h.center);
                let m = self.directions.iter().map(|d| dot(*d, z)).fold(f64::NEG_INFINITY, f64::max);
                return self.w_tilde(h.center) - h.radius + m;
            }
        }
        self.w_tilde(x)
    }

    /// Homothet pieces followed by residual pieces carrying `w̃`.
    pub fn all_pieces(&self) -> Vec<Piece> {
        let mut out = self.pieces.clone();
        out.extend(self.residual.iter().map(|p| Piece {
            polygon: p.clone(),
            grad: self.slope,
            offset: self.constant,
        }));
        out
    }
}

fn shifted(directions: &[Vector], g: Vector) -> Vec<Vector> {
    directions.iter().map(|d| sub(*d, g)).collect()
}

fn shape_2d(directions: &[Vector], g: Vector) -> Result<ConvexPolygon, ConstructError> {
    let e = shifted(directions, g);
    let hull = convex_hull(&e);
    let reach = e.iter().map(|p| norm(*p)).fold(0.0, f64::max);
    let margin = hull
        .halfplanes()
        .iter()
        .map(|hp| -hp.eval([0.0, 0.0]) / norm(hp.normal))
        .fold(f64::INFINITY, f64::min);
    if hull.is_empty() || !(margin > 1e-12 * reach) {
        return Err(ConstructError::Invalid(
            "directions do not surround the cap slope".to_string(),
        ));
    }
    let b = 2.0 / margin;
    let bx = ConvexPolygon::from_box([-b, -b], [b, b]);
    let hps: Vec<HalfPlane> = e.iter().map(|d| HalfPlane::new(*d, 1.0)).collect();
    Ok(bx.clip_all(hps.iter()))
}

fn homothet_pieces(
    shape: &ConvexPolygon,
    h: &Homothet,
    directions: &[Vector],
    wy: f64,
) -> Vec<Piece> {
    let d_poly = shape.homothety(h.center, h.radius);
    let mut out = Vec::with_capacity(directions.len());
    for (j, dj) in directions.iter().enumerate() {
        let hps: Vec<HalfPlane> = directions
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != j)
            .map(|(_, dl)| {
                let n = sub(*dl, *dj);
                HalfPlane::new(n, dot(n, h.center))
            })
            .collect();
        let poly = d_poly.clip_all(hps.iter());
        if !poly.is_empty() {
            out.push(Piece { polygon: poly, grad: *dj, offset: wy - h.radius - dot(*dj, h.center) });
        }
    }
    out
}

fn fill_1d(
    domain: &ConvexPolygon,
    slope: Vector,
    constant: f64,
    directions: &[Vector],
) -> Result<CellinaFill, ConstructError> {
    let g = slope[0];
    let lo_d = directions.iter().map(|d| d[0]).fold(f64::INFINITY, f64::min);
    let hi_d = directions.iter().map(|d| d[0]).fold(f64::NEG_INFINITY, f64::max);
    if !(lo_d - g < 0.0 && hi_d - g > 0.0) {
        return Err(ConstructError::Invalid("directions do not surround the cap slope".to_string()));
    }
    let (p0, p1) = (1.0 / (lo_d - g), 1.0 / (hi_d - g));
    let bb = domain.bbox();
    let (a, b) = (bb.lo[0], bb.hi[0]);
    let len = b - a;
    let mut m = 1usize;
    while len / (m as f64 * (p1 - p0)) > 0.5 {
        m *= 2;
    }
    let h = len / m as f64;
    let r = h / (p1 - p0);
    let shape = ConvexPolygon::interval(p0, p1);
    let dirs = vec![[lo_d, 0.0], [hi_d, 0.0]];
    let mut homothets = Vec::with_capacity(m);
    let mut pieces = Vec::with_capacity(2 * m);
    for i in 0..m {
        let left = a + h * i as f64;
        let right = if i + 1 == m { b } else { a + h * (i + 1) as f64 };
        let y = left - r * p0;
        let wy = g * y + constant;
        homothets.push(Homothet { center: [y, 0.0], radius: r });
        pieces.push(Piece { polygon: ConvexPolygon::interval(left, y), grad: dirs[0], offset: wy - r - lo_d * y });
        pieces.push(Piece { polygon: ConvexPolygon::interval(y, right), grad: dirs[1], offset: wy - r - hi_d * y });
    }
    Ok(CellinaFill {
        dim: 1,
        domain: domain.clone(),
        slope,
        constant,
        directions: dirs,
        shape,
        homothets,
        pieces,
        residual: Vec::new(),
        residual_measure: 0.0,
    })
}

/// Fills `domain` with disjoint homothets of the polar shape until the
/// uncovered measure is at most `rho · λ(domain)`.
///
/// `w̃ = slope·x + constant` must satisfy `|slope| < 1`, and `0` must be
/// interior to `conv{d_j - slope}`. Radii never exceed `1/2`, so
/// `w̃ - 1/2 ≤ w̄ ≤ w̃`. In 1D the fill is an exact sawtooth.
pub fn cellina_fill(
    domain: &ConvexPolygon,
    dim: usize,
    slope: Vector,
    constant: f64,
    directions: &[Vector],
    rho: f64,
    max_rounds: usize,
) -> Result<CellinaFill, ConstructError> {
    if !(norm(slope) < 1.0) {
        return Err(ConstructError::SlopeTooLarge(norm(slope)));
    }
    if domain.is_empty() {
        return Err(ConstructError::Invalid("empty fill domain".to_string()));
    }
    if dim == 1 && rho < 1.0 {
        return fill_1d(domain, slope, constant, directions);
    }
    let shape = if dim == 1 {
        ConvexPolygon::interval(-1.0, 1.0)
    } else {
        shape_2d(directions, slope)?
    };
    let total = domain.area();
    let mut fill = CellinaFill {
        dim,
        domain: domain.clone(),
        slope,
        constant,
        directions: directions.to_vec(),
        shape: shape.clone(),
        homothets: Vec::new(),
        pieces: Vec::new(),
        residual: vec![domain.clone()],
        residual_measure: total,
    };
    if rho >= 1.0 {
        return Ok(fill);
    }
    let db = domain.bbox();
    let pb = shape.bbox();
    let r0 = 0.5f64.min((db.width() / pb.width()).min(db.height() / pb.height()));
    for round in 0..max_rounds {
        if fill.residual_measure <= rho * total {
            return Ok(fill.finish());
        }
        let r = r0 / 2f64.powi(round as i32);
        let (hx, hy) = (pb.width() * r / 2.0, pb.height() * r / 2.0);
        let (dw, dh) = (pb.width() * r, pb.height() * r);
        let mut next = Vec::with_capacity(fill.residual.len());
        for piece in std::mem::take(&mut fill.residual) {
            let b = piece.bbox();
            if b.width() < dw || b.height() < dh {
                next.push(piece);
                continue;
            }
            let i0 = ((b.lo[0] - db.lo[0]) / hx).ceil() as i64;
            let i1 = ((b.hi[0] - dw - db.lo[0]) / hx).floor() as i64;
            let j0 = ((b.lo[1] - db.lo[1]) / hy).ceil() as i64;
            let j1 = ((b.hi[1] - dh - db.lo[1]) / hy).floor() as i64;
            let mut local: Vec<ConvexPolygon> = Vec::new();
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let ll = [db.lo[0] + hx * i as f64, db.lo[1] + hy * j as f64];
                    let center = sub(ll, scale(pb.lo, r));
                    let poly = shape.homothety(center, r);
                    if !piece.contains_polygon(&poly) {
                        continue;
                    }
                    let area = poly.area();
                    if local.iter().any(|q| overlap_area(&poly, q) > 1e-9 * area) {
                        continue;
                    }
                    fill.homothets.push(Homothet { center, radius: r });
                    local.push(poly);
                }
            }
            let mut parts = vec![piece];
            for q in &local {
                parts = parts.into_iter().flat_map(|p| p.subtract(q)).collect();
            }
            next.extend(parts);
        }
        fill.residual = next;
        fill.residual_measure = fill.residual.iter().map(ConvexPolygon::area).sum();
    }
    if fill.residual_measure > rho * total {
        return Err(ConstructError::ResidualUnreachable {
            residual: fill.residual_measure / total,
            target: rho,
        });
    }
    Ok(fill.finish())
}

impl CellinaFill {
    fn finish(mut self) -> Self {
        let mut pieces = Vec::new();
        for h in &self.homothets {
            let wy = dot(self.slope, h.center) + self.constant;
            pieces.extend(homothet_pieces(&self.shape, h, &self.directions, wy));
        }
        self.pieces = pieces;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_bounds(fill: &CellinaFill) {
        for piece in &fill.pieces {
            for v in piece.polygon.vertices() {
                let wt = dot(fill.slope, *v) + fill.constant;
                let wb = piece.eval(*v);
                assert!(wb <= wt + 1e-12 && wb >= wt - 0.5 - 1e-12);
            }
        }
        for h in &fill.homothets {
            let wy = dot(fill.slope, h.center) + fill.constant;
            for v in fill.polygon(h).vertices() {
                let z = sub(*v, h.center);
                let m = fill.directions.iter().map(|d| dot(*d, z)).fold(f64::NEG_INFINITY, f64::max);
                let wt = dot(fill.slope, *v) + fill.constant;
                assert!((wy - h.radius + m - wt).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interval_is_tiled_exactly() {
        let fill = cellina_fill(&ConvexPolygon::interval(0.0, 3.0), 1, [0.0, 0.0], 0.2, &[[1.0, 0.0], [-1.0, 0.0]], 0.0, 4)
            .unwrap();
        assert_eq!(fill.residual_measure, 0.0);
        let len: f64 = fill.pieces.iter().map(Piece::area).sum();
        assert_eq!(len, 3.0);
        assert!(fill.homothets.iter().all(|h| h.radius <= 0.5));
        check_bounds(&fill);
    }

    #[test]
    fn full_residual_is_allowed() {
        let a = ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]]);
        let fill = cellina_fill(&a, 2, [0.0, 0.5], 0.0, &[[2.0, -1.0], [0.0, 2.0], [-2.0, -1.0]], 1.0, 4).unwrap();
        assert!(fill.homothets.is_empty());
        assert_eq!(fill.residual, vec![a.clone()]);
        assert_eq!(fill.eval([0.5, 0.5]), 0.25);
    }

    #[test]
    fn trapezoid_reaches_the_residual_target() {
        let a = ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.75, 0.5], [0.25, 0.5]]);
        let dirs = [[2.0, -1.2], [0.0, 2.2], [-2.0, -1.2]];
        let fill = cellina_fill(&a, 2, [0.0, 0.3], 0.1, &dirs, 0.05, 16).unwrap();
        assert!(fill.residual_measure <= 0.05 * a.area());
        let covered: f64 = fill.homothets.iter().map(|h| fill.polygon(h).area()).sum();
        assert!((covered + fill.residual_measure - a.area()).abs() < 1e-10);
        let pieces: f64 = fill.pieces.iter().map(Piece::area).sum();
        assert!((pieces - covered).abs() < 1e-10);
        for p in &fill.pieces {
            assert!(dirs.contains(&p.grad));
        }
        check_bounds(&fill);
    }

    #[test]
    fn steep_caps_are_rejected() {
        let a = ConvexPolygon::from_box([0.0, 0.0], [1.0, 1.0]);
        assert!(matches!(
            cellina_fill(&a, 2, [0.0, 1.0], 0.0, &[[2.0, -1.0], [0.0, 2.0], [-2.0, -1.0]], 0.1, 4),
            Err(ConstructError::SlopeTooLarge(_))
        ));
    }
}
