//! Contact set, Carathéodory decomposition, enclosing contact simplex and
//! subgradient extraction.

use super::{
    is_contact_value, CaratheodoryWitness, ContactMask, ConvexEnvelope, EnvelopeError,
    SampledLagrangian, SimplexWitness, Vector, RANK_CUTOFF, SEARCH_FACTOR, TOL_CONTACT, TOL_HULL,
    TOL_WITNESS, WEIGHT_FLOOR,
};
use crate::geometry::{cross, dot, norm, orientation, sub};

pub fn contact_set(f: &SampledLagrangian, env: &ConvexEnvelope) -> ContactMask {
    let mask = (0..f.len())
        .map(|i| is_contact_value(f.value(i), env.node_values()[i], TOL_CONTACT))
        .collect();
    ContactMask { mask, tolerance: TOL_CONTACT, exact: f.exact() }
}

/// Gradient of the smallest-index facet whose cell contains `x`.
pub fn subgradient_at(env: &ConvexEnvelope, x: Vector) -> Result<Vector, EnvelopeError> {
    let i = env.locate(x).ok_or(EnvelopeError::OutOfDomain(x))?;
    Ok(env.facets()[i].gradient)
}

fn no_witness(point: Vector, reason: impl Into<String>) -> EnvelopeError {
    EnvelopeError::NoWitness { point, reason: reason.into() }
}

/// Affine rank of a point set with a relative singular-value cutoff.
pub(crate) fn affine_rank(points: &[Vector]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let scale = points.iter().map(|p| norm(*p)).fold(1.0, f64::max);
    let cut = RANK_CUTOFF * scale;
    let d: Vec<Vector> = points[1..].iter().map(|p| sub(*p, points[0])).collect();
    // Singular values of the 2×m difference matrix via its 2×2 Gram matrix.
    let (mut gxx, mut gxy, mut gyy) = (0.0, 0.0, 0.0);
    for v in &d {
        gxx += v[0] * v[0];
        gxy += v[0] * v[1];
        gyy += v[1] * v[1];
    }
    let tr = gxx + gyy;
    let det = gxx * gyy - gxy * gxy;
    let disc = ((tr * tr / 4.0 - det).max(0.0)).sqrt();
    let l1 = tr / 2.0 + disc;
    let l2 = (det / l1.max(1e-300)).max(0.0);
    [l1, l2].iter().filter(|l| l.sqrt() > cut).count()
}

fn contact_at(f: &SampledLagrangian, env: &ConvexEnvelope, x: Vector, fx: f64, fss: f64) -> bool {
    let hit = match f.exact() {
        Some(b) => b.exact_contact(x),
        None => is_contact_value(fx, fss, TOL_CONTACT),
    };
    hit && env.contains(x)
}

pub fn caratheodory_witness(
    f: &SampledLagrangian,
    env: &ConvexEnvelope,
    x: Vector,
) -> Result<CaratheodoryWitness, EnvelopeError> {
    let loc = env.locate(x).ok_or(EnvelopeError::OutOfDomain(x))?;
    let facet = &env.facets()[loc];
    let a = facet.gradient;
    let fss = dot(a, x) + facet.offset;
    let fx = f.eval(x)?;
    if contact_at(f, env, x, fx, fss) {
        return Ok(CaratheodoryWitness::contact(x, fss.min(fx), a));
    }
    if let Some(reason) = f.exact().and_then(|b| b.witness_obstruction(x)) {
        return Err(no_witness(x, reason));
    }

    let face = &env.faces()[facet.face];
    let chosen: Option<(Vec<usize>, Vec<f64>)>;
    if env.dim() == 1 {
        let (p, q) = (facet.vertices[0], facet.vertices[1]);
        let (xp, xq) = (env.node(p)[0], env.node(q)[0]);
        let t = (x[0] - xp) / (xq - xp);
        chosen = Some((vec![p, q], vec![1.0 - t, t]));
    } else {
        // A segment between two face vertices through `x` gives k = 1.
        let mut best: Option<(f64, usize, usize, f64)> = None;
        let vs = &face.vertices;
        for (ii, &p) in vs.iter().enumerate() {
            let xp = env.node(p);
            for &q in &vs[ii + 1..] {
                let xq = env.node(q);
                if orientation(xp, xq, x) != 0.0 {
                    continue;
                }
                let d = sub(xq, xp);
                let t = dot(sub(x, xp), d) / dot(d, d);
                if !(t > 0.0 && t < 1.0) {
                    continue;
                }
                let reach = norm(sub(xp, x)).max(norm(sub(xq, x)));
                if best.map_or(true, |b| reach < b.0) {
                    best = Some((reach, p, q, t));
                }
            }
        }
        if let Some((_, p, q, t)) = best {
            chosen = Some((vec![p, q], vec![1.0 - t, t]));
        } else {
            let v: Vec<Vector> = facet.vertices.iter().map(|&i| env.node(i)).collect();
            let area = orientation(v[0], v[1], v[2]);
            let w = [
                orientation(x, v[1], v[2]) / area,
                orientation(v[0], x, v[2]) / area,
                orientation(v[0], v[1], x) / area,
            ];
            chosen = Some((facet.vertices.clone(), w.to_vec()));
        }
    }
    let (ids, raw) = chosen.unwrap();
    let mut kept: Vec<(usize, f64)> =
        ids.into_iter().zip(raw).filter(|(_, w)| *w > WEIGHT_FLOOR).collect();
    let total: f64 = kept.iter().map(|(_, w)| w).sum();
    for k in &mut kept {
        k.1 /= total;
    }
    kept.sort_by(|l, r| r.1.total_cmp(&l.1).then(l.0.cmp(&r.0)));
    if kept.len() < 2 {
        return Err(no_witness(x, "decomposition collapses onto a single hull vertex"));
    }
    let points: Vec<Vector> = kept.iter().map(|(i, _)| env.node(*i)).collect();
    let witness = CaratheodoryWitness {
        point: x,
        contact: false,
        k: points.len() - 1,
        values: kept.iter().map(|(i, _)| f.value(*i)).collect(),
        weights: kept.iter().map(|(_, w)| *w).collect(),
        points,
        subgradient: a,
        envelope_value: fss,
    };
    check_witness(f, env, &witness).map_err(|r| no_witness(x, r))?;
    Ok(witness)
}

/// Verifies every witness invariant; returns the first failure.
pub fn check_witness(
    f: &SampledLagrangian,
    env: &ConvexEnvelope,
    w: &CaratheodoryWitness,
) -> Result<(), String> {
    if w.contact {
        return Ok(());
    }
    let x = w.point;
    let scale = w.points.iter().map(|p| norm(*p)).fold(norm(x).max(1.0), f64::max);
    let fscale = w.envelope_value.abs().max(1.0);
    if w.weights.iter().any(|a| !(*a > 0.0)) {
        return Err("non-positive weight".into());
    }
    if (w.weights.iter().sum::<f64>() - 1.0).abs() > TOL_WITNESS {
        return Err("weights do not sum to one".into());
    }
    let mut bary = [0.0; 2];
    let mut fsum = 0.0;
    for ((p, a), v) in w.points.iter().zip(&w.weights).zip(&w.values) {
        bary[0] += a * p[0];
        bary[1] += a * p[1];
        fsum += a * v;
    }
    if norm(sub(bary, x)) > TOL_WITNESS * scale {
        return Err("weighted mean of the points differs from the query".into());
    }
    if (fsum - w.envelope_value).abs() > TOL_WITNESS * fscale {
        return Err(format!("Σ α_i f(ξ_i) = {fsum} differs from f** = {}", w.envelope_value));
    }
    if affine_rank(&w.points) != w.k || w.points.len() != w.k + 1 {
        return Err("affine dimension of the points differs from k".into());
    }
    for (p, v) in w.points.iter().zip(&w.values) {
        let fss_p = env.value(*p).map_err(|e| e.to_string())?;
        if !contact_at(f, env, *p, *v, fss_p) {
            return Err(format!("point ({}, {}) is not a contact point", p[0], p[1]));
        }
        let plane = w.envelope_value + dot(w.subgradient, sub(*p, x));
        if (fss_p - plane).abs() > TOL_WITNESS * fss_p.abs().max(1.0) {
            return Err(format!("point ({}, {}) is off the shared supporting plane", p[0], p[1]));
        }
    }
    for (i, &fss_n) in env.node_values().iter().enumerate() {
        if !fss_n.is_finite() {
            continue;
        }
        let eta = env.node(i);
        let lhs = dot(w.subgradient, sub(eta, x));
        if lhs > fss_n - w.envelope_value + TOL_HULL * fss_n.abs().max(fscale) {
            return Err(format!("subgradient inequality fails at node {i}"));
        }
    }
    Ok(())
}

/// Contact points enclosing `B̄(0, R)` with the smallest largest norm.
pub fn simplex_witness(
    f: &SampledLagrangian,
    env: &ConvexEnvelope,
    radius: f64,
) -> Result<SimplexWitness, EnvelopeError> {
    let fail = |reason: &str| EnvelopeError::NoSimplex { radius, reason: reason.to_string() };
    if !(radius > 0.0) {
        return Err(fail("radius must be positive"));
    }
    let mask = contact_set(f, env);
    let limit = SEARCH_FACTOR * radius;
    let mut cand: Vec<(f64, usize)> = (0..f.len())
        .filter(|&i| mask.is_contact(i))
        .filter(|&i| f.exact().map_or(true, |b| b.exact_contact(f.node(i))))
        .map(|i| (norm(f.node(i)), i))
        .filter(|(r, _)| *r >= radius && *r <= limit)
        .collect();
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let make = |ids: Vec<usize>| SimplexWitness {
        radius,
        points: ids.iter().map(|&i| f.node(i)).collect(),
        values: ids.iter().map(|&i| f.value(i)).collect(),
    };
    if f.dim() == 1 {
        let lo = cand.iter().find(|(_, i)| f.node(*i)[0] <= -radius).map(|c| c.1);
        let hi = cand.iter().find(|(_, i)| f.node(*i)[0] >= radius).map(|c| c.1);
        return match (lo, hi) {
            (Some(l), Some(h)) => Ok(make(vec![l, h])),
            _ => Err(fail("no contact points on both sides of the interval")),
        };
    }

    let pts: Vec<Vector> = cand.iter().map(|c| f.node(c.1)).collect();
    let tol_r = radius * (1.0 - 1e-12);
    // Directed edge a→b keeps the ball on its left.
    let edge_ok = |a: Vector, b: Vector| -> bool {
        let d = sub(b, a);
        let side = cross(d, sub([0.0, 0.0], a));
        side > 0.0 && side / norm(d) >= tol_r
    };
    let min_max = 2.0 * radius * (1.0 - 1e-12);
    for m in 0..pts.len() {
        if cand[m].0 < min_max {
            continue;
        }
        let c = pts[m];
        let outs: Vec<usize> = (0..m).filter(|&i| edge_ok(c, pts[i])).collect();
        let ins: Vec<usize> = (0..m).filter(|&j| edge_ok(pts[j], c)).collect();
        if outs.is_empty() || ins.is_empty() {
            continue;
        }
        for &i in &outs {
            for &j in &ins {
                if i != j && edge_ok(pts[i], pts[j]) {
                    return Ok(make(vec![cand[m].1, cand[i].1, cand[j].1]));
                }
            }
        }
    }
    Err(fail("no contact triangle within the search radius"))
}

/// Checks the enclosing-ball and contact invariants of a simplex witness.
pub fn check_simplex(f: &SampledLagrangian, env: &ConvexEnvelope, s: &SimplexWitness) -> Result<(), String> {
    for (p, v) in s.points.iter().zip(&s.values) {
        let fss = env.value(*p).map_err(|e| e.to_string())?;
        if !is_contact_value(*v, fss, TOL_CONTACT) {
            return Err(format!("vertex ({}, {}) is not a contact point", p[0], p[1]));
        }
        if let Some(b) = f.exact() {
            if !b.exact_contact(*p) {
                return Err(format!("vertex ({}, {}) fails the closed-form contact test", p[0], p[1]));
            }
        }
    }
    let r = s.radius * (1.0 - 1e-12);
    if f.dim() == 1 {
        let (a, b) = (s.points[0][0], s.points[1][0]);
        return if a <= -r && b >= r { Ok(()) } else { Err("interval misses the ball".into()) };
    }
    let p = &s.points;
    let ccw = orientation(p[0], p[1], p[2]) > 0.0;
    for e in 0..3 {
        let (a, b) = if ccw { (p[e], p[(e + 1) % 3]) } else { (p[(e + 1) % 3], p[e]) };
        let d = sub(b, a);
        let side = cross(d, sub([0.0, 0.0], a));
        if !(side > 0.0) || side / norm(d) < r {
            return Err(format!("edge {e} is closer than R to the origin"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{biconjugate, Builtin};

    fn setup(b: Builtin) -> (SampledLagrangian, ConvexEnvelope) {
        let f = SampledLagrangian::from_builtin(b).unwrap();
        let env = biconjugate(&f).unwrap();
        (f, env)
    }

    #[test]
    fn double_well_witnesses() {
        let (f, env) = setup(Builtin::DoubleWell1d);
        let w = caratheodory_witness(&f, &env, [0.0, 0.0]).unwrap();
        assert_eq!(w.k, 1);
        assert_eq!(w.weights, vec![0.5, 0.5]);
        assert_eq!(w.points, vec![[-1.0, 0.0], [1.0, 0.0]]);
        assert_eq!(w.subgradient[0], 0.0);
        assert!(caratheodory_witness(&f, &env, [1.5, 0.0]).unwrap().contact);
        let mask = contact_set(&f, &env);
        for i in 0..f.len() {
            let t = f.node(i)[0];
            if t.abs() >= 1.0 + 0.01 || t.abs() <= 1.0 - 0.01 {
                assert_eq!(mask.is_contact(i), t.abs() >= 1.0, "t = {t}");
            }
        }
    }

    #[test]
    fn lattice_witnesses() {
        let (f, env) = setup(Builtin::LatticeQuadratic1d);
        let w = caratheodory_witness(&f, &env, [0.5, 0.0]).unwrap();
        assert_eq!((w.k, w.points.clone()), (1, vec![[0.0, 0.0], [1.0, 0.0]]));
        assert_eq!(w.subgradient[0], 1.0);
        assert_eq!(subgradient_at(&env, [1.5, 0.0]).unwrap()[0], 3.0);
        let s = simplex_witness(&f, &env, 2.0).unwrap();
        assert_eq!(s.points, vec![[-2.0, 0.0], [2.0, 0.0]]);
        assert_eq!(s.values, vec![4.0, 4.0]);
    }

    #[test]
    fn radial_witness_is_a_pair() {
        let (f, env) = setup(Builtin::RadialDoubleWell2d);
        let w = caratheodory_witness(&f, &env, [0.5, 0.0]).unwrap();
        assert_eq!(w.k, 1);
        assert_eq!(w.points, vec![[1.0, 0.0], [-1.0, 0.0]]);
        assert!((w.weights[0] - 0.75).abs() < 1e-15);
        let s = simplex_witness(&f, &env, 2.0).unwrap();
        check_simplex(&f, &env, &s).unwrap();
        assert!(s.max_norm() >= 4.0 && s.max_norm() < 4.5);
    }

    #[test]
    fn example_2_3_has_no_witness() {
        let (f, env) = setup(Builtin::Example23Exact);
        assert!(matches!(
            caratheodory_witness(&f, &env, [0.0, 0.0]),
            Err(EnvelopeError::NoWitness { .. })
        ));
        assert!(caratheodory_witness(&f, &env, [2.0, 0.0]).unwrap().contact);
    }

    #[test]
    fn rank_of_points() {
        assert_eq!(affine_rank(&[[0.0, 0.0], [1.0, 0.0]]), 1);
        assert_eq!(affine_rank(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]), 1);
        assert_eq!(affine_rank(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), 2);
    }
}
