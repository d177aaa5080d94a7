//! Exact boundary and volume integrals of pwa differences.

use super::{MeshError, Piece};
use crate::envelope::Vector;
use crate::geometry::{add, dot, scale, sub, ConvexPolygon};

/// Parameter range of `p + t (q − p)`, `t ∈ [0, 1]`, inside `poly`.
fn clip_segment(p: Vector, q: Vector, poly: &ConvexPolygon) -> Option<(f64, f64)> {
    let d = sub(q, p);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for hp in poly.halfplanes() {
        let num = hp.offset - dot(hp.normal, p);
        let den = dot(hp.normal, d);
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
        } else if den > 0.0 {
            t1 = t1.min(num / den);
        } else {
            t0 = t0.max(num / den);
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

fn piece_at<'a>(pieces: &'a [Piece], x: Vector) -> Option<&'a Piece> {
    pieces.iter().find(|p| p.polygon.contains(x))
}

/// `∫_{∂region} (u − w) a·ν dH¹` with `u`, `w` given by affine pieces.
pub fn boundary_flux(u: &[Piece], w: &[Piece], a: Vector, region: &ConvexPolygon) -> Result<f64, MeshError> {
    let vs = region.vertices();
    let mut total = 0.0;
    for e in 0..vs.len() {
        let (p, q) = (vs[e], vs[(e + 1) % vs.len()]);
        let d = sub(q, p);
        let an = dot(a, [d[1], -d[0]]);
        if an == 0.0 {
            continue;
        }
        let mut ts = vec![0.0, 1.0];
        for piece in u.iter().chain(w) {
            if let Some((t0, t1)) = clip_segment(p, q, &piece.polygon) {
                ts.extend([t0, t1].into_iter().filter(|t| *t > 0.0 && *t < 1.0));
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14);
        for k in 0..ts.len() - 1 {
            let (ta, tb) = (ts[k], ts[k + 1]);
            let mid = add(p, scale(d, 0.5 * (ta + tb)));
            let pu = piece_at(u, mid).ok_or_else(|| MeshError::Invalid("u undefined on the boundary".into()))?;
            let pw = piece_at(w, mid).ok_or_else(|| MeshError::Invalid("w undefined on the boundary".into()))?;
            let (xa, xb) = (add(p, scale(d, ta)), add(p, scale(d, tb)));
            let diff = (pu.eval(xa) - pw.eval(xa)) + (pu.eval(xb) - pw.eval(xb));
            total += an * (tb - ta) * 0.5 * diff;
        }
    }
    Ok(total)
}

/// `∫_region a·(∇u − ∇w) dx`.
pub fn gradient_integral(u: &[Piece], w: &[Piece], a: Vector, region: &ConvexPolygon) -> f64 {
    let part = |ps: &[Piece]| -> f64 {
        ps.iter().map(|p| p.polygon.intersect(region).area() * dot(a, p.grad)).sum()
    };
    part(u) - part(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_functions_have_no_flux() {
        let sq = ConvexPolygon::from_box([0.0, 0.0], [1.0, 1.0]);
        let u = vec![Piece { polygon: sq.clone(), grad: [1.0, 2.0], offset: 0.5 }];
        assert_eq!(boundary_flux(&u, &u, [0.3, 0.7], &sq).unwrap(), 0.0);
        let w = vec![Piece { polygon: sq.clone(), grad: [0.0, 0.0], offset: 0.0 }];
        assert_eq!(boundary_flux(&u, &w, [0.0, 0.0], &sq).unwrap(), 0.0);
    }

    #[test]
    fn divergence_theorem_for_affine_difference() {
        let sq = ConvexPolygon::from_box([0.0, 0.0], [2.0, 1.0]);
        let u = vec![Piece { polygon: sq.clone(), grad: [1.0, -2.0], offset: 0.25 }];
        let w = vec![
            Piece { polygon: ConvexPolygon::from_box([0.0, 0.0], [1.0, 1.0]), grad: [0.0, 0.0], offset: 0.0 },
            Piece { polygon: ConvexPolygon::from_box([1.0, 0.0], [2.0, 1.0]), grad: [3.0, 0.0], offset: -3.0 },
        ];
        let a = [0.4, -0.9];
        let lhs = gradient_integral(&u, &w, a, &sq);
        let rhs = boundary_flux(&u, &w, a, &sq).unwrap();
        assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }
}
