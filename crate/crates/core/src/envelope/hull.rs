//! Lower convex hull of the lifted finite samples.
//!
//! 1D: monotone chain. 2D: incremental 3D hull, visibility by the exact sign
//! of `orient3d`, lower faces selected by the exact sign of their projected
//! orientation.

use std::collections::{HashMap, HashSet};

use robust::{orient3d, Coord3D};

use super::{ConvexEnvelope, EnvelopeError, Face, Facet, SampledLagrangian, Vector};
use crate::geometry::{convex_hull, orientation, ConvexPolygon, GridIndex};

type P3 = [f64; 3];

fn o3(a: P3, b: P3, c: P3, d: P3) -> f64 {
    let k = |p: P3| Coord3D { x: p[0], y: p[1], z: p[2] };
    orient3d(k(a), k(b), k(c), k(d))
}

fn xy(p: P3) -> [f64; 2] {
    [p[0], p[1]]
}

fn collinear3(a: P3, b: P3, c: P3) -> bool {
    let pr = |p: P3, i: usize, j: usize| [p[i], p[j]];
    orientation(pr(a, 0, 1), pr(b, 0, 1), pr(c, 0, 1)) == 0.0
        && orientation(pr(a, 0, 2), pr(b, 0, 2), pr(c, 0, 2)) == 0.0
        && orientation(pr(a, 1, 2), pr(b, 1, 2), pr(c, 1, 2)) == 0.0
}

/// Plane `z = g·x + b` through three lifted points with independent projections.
fn plane(a: P3, b: P3, c: P3) -> (Vector, f64) {
    let d1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let d2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let det = d1[0] * d2[1] - d1[1] * d2[0];
    let gx = (d1[2] * d2[1] - d2[2] * d1[1]) / det;
    let gy = (d1[0] * d2[2] - d2[0] * d1[2]) / det;
    let cx = (a[0] + b[0] + c[0]) / 3.0;
    let cy = (a[1] + b[1] + c[1]) / 3.0;
    let cz = (a[2] + b[2] + c[2]) / 3.0;
    ([gx, gy], cz - gx * cx - gy * cy)
}

/// Builds `f**` from the finite samples of `f`.
pub fn biconjugate(f: &SampledLagrangian) -> Result<ConvexEnvelope, EnvelopeError> {
    let nodes: Vec<Vector> = (0..f.len()).map(|i| f.node(i)).collect();
    let finite: Vec<usize> = (0..f.len()).filter(|&i| f.value(i).is_finite()).collect();
    let (facets, faces, domain) = if f.dim() == 1 {
        lower_chain(f, &nodes, &finite)?
    } else {
        lower_hull_2d(f, &nodes, &finite)?
    };
    let mut hull_vertices: Vec<usize> = facets.iter().flat_map(|t| t.vertices.iter().copied()).collect();
    hull_vertices.sort_unstable();
    hull_vertices.dedup();

    let bbox = domain.bbox();
    let side = ((facets.len() as f64).sqrt().ceil() as usize).clamp(1, 256);
    let mut index = GridIndex::new(bbox, side, side);
    for (i, t) in facets.iter().enumerate() {
        index.insert(i, &t.cell.bbox());
    }
    let mut env = ConvexEnvelope {
        dim: f.dim(),
        facets,
        faces,
        hull_vertices,
        domain,
        index,
        nodes,
        values: f.values().to_vec(),
        node_values: Vec::new(),
        exact: f.exact(),
    };
    env.node_values = (0..f.len())
        .map(|i| match env.value(env.nodes[i]) {
            Ok(v) => v.min(f.value(i)),
            Err(_) => f64::INFINITY,
        })
        .collect();
    Ok(env)
}

fn lower_chain(
    f: &SampledLagrangian,
    nodes: &[Vector],
    finite: &[usize],
) -> Result<(Vec<Facet>, Vec<Face>, ConvexPolygon), EnvelopeError> {
    let lift = |i: usize| [nodes[i][0], f.value(i)];
    let mut chain: Vec<usize> = Vec::new();
    for &i in finite {
        while chain.len() >= 2
            && orientation(lift(chain[chain.len() - 2]), lift(chain[chain.len() - 1]), lift(i)) <= 0.0
        {
            chain.pop();
        }
        chain.push(i);
    }
    if chain.len() < 2 {
        return Err(EnvelopeError::DegenerateSamples("fewer than two distinct finite samples".into()));
    }
    let mut facets = Vec::new();
    let mut faces = Vec::new();
    for (k, w) in chain.windows(2).enumerate() {
        let (a, b) = (lift(w[0]), lift(w[1]));
        let g = (b[1] - a[1]) / (b[0] - a[0]);
        let offset = if a[1].abs() <= b[1].abs() { a[1] - g * a[0] } else { b[1] - g * b[0] };
        facets.push(Facet {
            gradient: [g, 0.0],
            offset,
            vertices: vec![w[0], w[1]],
            cell: ConvexPolygon::interval(a[0], b[0]),
            face: k,
        });
        faces.push(Face { facets: vec![k], vertices: vec![w[0], w[1]], gradient: [g, 0.0], offset });
    }
    let lo = nodes[chain[0]][0];
    let hi = nodes[*chain.last().unwrap()][0];
    Ok((facets, faces, ConvexPolygon::interval(lo, hi)))
}

fn lower_hull_2d(
    f: &SampledLagrangian,
    nodes: &[Vector],
    finite: &[usize],
) -> Result<(Vec<Facet>, Vec<Face>, ConvexPolygon), EnvelopeError> {
    let pts: Vec<P3> = finite.iter().map(|&i| [nodes[i][0], nodes[i][1], f.value(i)]).collect();
    let n = pts.len();
    let xy_pts: Vec<[f64; 2]> = pts.iter().map(|p| xy(*p)).collect();
    let domain = convex_hull(&xy_pts);
    if domain.len() < 3 {
        return Err(EnvelopeError::DegenerateSamples(
            "finite samples are collinear in gradient space".into(),
        ));
    }

    let i2 = (2..n).find(|&j| !collinear3(pts[0], pts[1], pts[j]));
    let i3 = i2.and_then(|i2| (2..n).find(|&j| o3(pts[0], pts[1], pts[i2], pts[j]) != 0.0));

    let lower: Vec<[usize; 3]> = match (i2, i3) {
        (Some(i2), Some(i3)) => incremental(&pts, [0, 1, i2, i3]),
        _ => coplanar_fan(&xy_pts, &domain),
    };

    let mut tris: Vec<[usize; 3]> = lower;
    tris.sort_by_key(|t| {
        let mut s = t.map(|i| finite[i]);
        s.sort_unstable();
        s
    });

    // Coplanar adjacent triangles are merged into faces.
    let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, tri) in tris.iter().enumerate() {
        for e in 0..3 {
            edge_owner.insert((tri[e], tri[(e + 1) % 3]), t);
        }
    }
    let mut parent: Vec<usize> = (0..tris.len()).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for (t, tri) in tris.iter().enumerate() {
        for e in 0..3 {
            let (u, v) = (tri[e], tri[(e + 1) % 3]);
            if let Some(&nb) = edge_owner.get(&(v, u)) {
                let other = tris[nb].iter().copied().find(|&w| w != u && w != v).unwrap();
                if o3(pts[tri[0]], pts[tri[1]], pts[tri[2]], pts[other]) == 0.0 {
                    let (a, b) = (root(&mut parent, t), root(&mut parent, nb));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }

    let mut face_of_root: HashMap<usize, usize> = HashMap::new();
    let mut faces: Vec<Face> = Vec::new();
    let mut facets: Vec<Facet> = Vec::with_capacity(tris.len());
    for (t, tri) in tris.iter().enumerate() {
        let r = root(&mut parent, t);
        let face = *face_of_root.entry(r).or_insert_with(|| {
            let (g, b) = plane(pts[tri[0]], pts[tri[1]], pts[tri[2]]);
            faces.push(Face { facets: Vec::new(), vertices: Vec::new(), gradient: g, offset: b });
            faces.len() - 1
        });
        faces[face].facets.push(t);
        faces[face].vertices.extend(tri.iter().map(|&i| finite[i]));
        facets.push(Facet {
            gradient: faces[face].gradient,
            offset: faces[face].offset,
            vertices: tri.iter().map(|&i| finite[i]).collect(),
            cell: ConvexPolygon::new(tri.iter().map(|&i| xy_pts[i]).collect()),
            face,
        });
    }
    for fc in &mut faces {
        fc.vertices.sort_unstable();
        fc.vertices.dedup();
    }
    Ok((facets, faces, domain))
}

/// All samples on one non-vertical plane: fan triangulation of their hull.
fn coplanar_fan(xy_pts: &[[f64; 2]], domain: &ConvexPolygon) -> Vec<[usize; 3]> {
    let lookup: HashMap<(u64, u64), usize> =
        xy_pts.iter().enumerate().map(|(i, p)| ((p[0].to_bits(), p[1].to_bits()), i)).collect();
    let ids: Vec<usize> =
        domain.vertices().iter().map(|p| lookup[&(p[0].to_bits(), p[1].to_bits())]).collect();
    (1..ids.len() - 1).map(|i| [ids[0], ids[i], ids[i + 1]]).collect()
}

/// Full 3D hull; returns lower faces, counter-clockwise in projection.
fn incremental(pts: &[P3], seed: [usize; 4]) -> Vec<[usize; 3]> {
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for skip in 0..4 {
        let tri: Vec<usize> = (0..4).filter(|&j| j != skip).map(|j| seed[j]).collect();
        let opp = pts[seed[skip]];
        let (a, b, c) = (tri[0], tri[1], tri[2]);
        if o3(pts[a], pts[b], pts[c], opp) > 0.0 {
            faces.push([a, b, c]);
        } else {
            faces.push([a, c, b]);
        }
    }
    let mut visible_edges: HashSet<(usize, usize)> = HashSet::new();
    let mut horizon: Vec<(usize, usize)> = Vec::new();
    for p in 0..pts.len() {
        if seed.contains(&p) {
            continue;
        }
        let q = pts[p];
        visible_edges.clear();
        let mut any = false;
        for fc in &faces {
            if o3(pts[fc[0]], pts[fc[1]], pts[fc[2]], q) < 0.0 {
                any = true;
                for e in 0..3 {
                    visible_edges.insert((fc[e], fc[(e + 1) % 3]));
                }
            }
        }
        if !any {
            continue;
        }
        horizon.clear();
        faces.retain(|fc| {
            if o3(pts[fc[0]], pts[fc[1]], pts[fc[2]], q) < 0.0 {
                for e in 0..3 {
                    let (u, v) = (fc[e], fc[(e + 1) % 3]);
                    if !visible_edges.contains(&(v, u)) {
                        horizon.push((u, v));
                    }
                }
                false
            } else {
                true
            }
        });
        for &(u, v) in &horizon {
            faces.push([u, v, p]);
        }
    }
    faces
        .into_iter()
        .filter(|fc| orientation(xy(pts[fc[0]]), xy(pts[fc[1]]), xy(pts[fc[2]])) < 0.0)
        .map(|fc| [fc[0], fc[2], fc[1]])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{Builtin, Minorant};

    #[test]
    fn orient3d_sign_convention() {
        // (a, b, c) counter-clockwise seen from +z; a point below gives > 0.
        let a = [0.0, 0.0, 0.0];
        let b = [1.0, 0.0, 0.0];
        let c = [0.0, 1.0, 0.0];
        assert!(o3(a, b, c, [0.2, 0.2, -1.0]) > 0.0);
        assert!(o3(a, b, c, [0.2, 0.2, 1.0]) < 0.0);
    }

    #[test]
    fn double_well_values() {
        let f = SampledLagrangian::from_builtin(Builtin::DoubleWell1d).unwrap();
        let env = biconjugate(&f).unwrap();
        assert!(env.value([0.0, 0.0]).unwrap().abs() < 1e-12);
        assert!((env.value([1.5, 0.0]).unwrap() - 1.5625).abs() < 1e-12);
    }

    #[test]
    fn lattice_values() {
        let f = SampledLagrangian::from_builtin(Builtin::LatticeQuadratic1d).unwrap();
        let env = biconjugate(&f).unwrap();
        assert!((env.value([0.5, 0.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!((env.value([1.5, 0.0]).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(env.hull_vertices().len(), 7);
    }

    #[test]
    fn planar_samples_give_one_face() {
        let f = SampledLagrangian::from_fn(
            &[(-1.0, 1.0), (-1.0, 1.0)],
            &[5, 5],
            Minorant::Linear { c1: 0.1, c2: -10.0 },
            None,
            |x| 0.5 * x[0] - 0.25 * x[1] + 2.0,
        )
        .unwrap();
        let env = biconjugate(&f).unwrap();
        assert_eq!(env.faces().len(), 1);
        assert!((env.value([0.3, 0.1]).unwrap() - (0.15 - 0.025 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn collinear_samples_are_degenerate() {
        let mut values = vec![f64::INFINITY; 25];
        for k in 0..5 {
            values[k * 6] = (k as f64 - 2.0).powi(2);
        }
        let f = SampledLagrangian::new(
            vec![vec![-2.0, -1.0, 0.0, 1.0, 2.0]; 2],
            values,
            Minorant::Linear { c1: 0.1, c2: -10.0 },
            None,
        )
        .unwrap();
        assert!(matches!(biconjugate(&f), Err(EnvelopeError::DegenerateSamples(_))));
    }

    #[test]
    fn radial_double_well_flat_face() {
        let f = SampledLagrangian::from_builtin(Builtin::RadialDoubleWell2d).unwrap();
        let env = biconjugate(&f).unwrap();
        assert!(env.value([0.0, 0.0]).unwrap().abs() < 1e-12);
        assert!(env.value([0.5, 0.1]).unwrap().abs() < 1e-12);
        let fc = &env.faces()[env.facets()[env.locate([0.5, 0.0]).unwrap()].face];
        assert!(fc.gradient[0].abs() < 1e-12 && fc.gradient[1].abs() < 1e-12);
    }
}
