use std::sync::Arc;

use proptest::prelude::*;
use relaxforge::construct::*;
use relaxforge::envelope::*;
use relaxforge::geometry::{dot, ConvexPolygon, HalfPlane};
use relaxforge::mesh::*;

fn line_samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![7 => 0.0..10.0f64, 3 => Just(f64::INFINITY)], 41)
        .prop_filter("three finite samples", |v| v.iter().filter(|x| x.is_finite()).count() >= 3)
}

fn line(values: Vec<f64>) -> SampledLagrangian {
    let axis: Vec<f64> = (0..41).map(|i| -1.0 + i as f64 / 20.0).collect();
    SampledLagrangian::new(vec![axis], values, Minorant::quadratic(1.0, -1.0), None).unwrap()
}

/// Smallest convex combination of two finite samples bracketing node `i`.
fn pair_oracle(f: &SampledLagrangian, i: usize) -> f64 {
    let xs: Vec<f64> = (0..f.len()).map(|k| f.node(k)[0]).collect();
    let v = f.values();
    let mut best = v[i];
    for a in 0..=i {
        for b in i..f.len() {
            if a == b || !v[a].is_finite() || !v[b].is_finite() {
                continue;
            }
            let t = (xs[i] - xs[a]) / (xs[b] - xs[a]);
            best = best.min((1.0 - t) * v[a] + t * v[b]);
        }
    }
    best
}

fn affine(g: Vector, c: f64) -> PwaFunction {
    let mesh = Arc::new(build_box_mesh(&[(0.0, 1.0), (0.0, 1.0)], &[2, 2]).unwrap());
    interpolate(&mesh, &Expression::Affine { constant: c, gradient: g }).unwrap()
}

/// Three witness points at angles `base + k·2π/3 + jitter_k` around `xi`.
fn cone_points(xi: Vector, base: f64, jitter: [f64; 3], radius: [f64; 3]) -> Vec<Vector> {
    (0..3)
        .map(|k| {
            let t = base + k as f64 * 2.0 * std::f64::consts::PI / 3.0 + jitter[k];
            [xi[0] + radius[k] * t.cos(), xi[1] + radius[k] * t.sin()]
        })
        .collect()
}

fn cone_spec(anchor: Vector, xi: Vector, points: Vec<Vector>) -> PatchSpec {
    PatchSpec {
        kind: PatchKind::Cone,
        anchor,
        scale: 1.0,
        xi,
        points,
        zetas: Vec::new(),
        gamma: 0.5,
        s_eta: 1.5,
        rho: 0.25,
        cellina_rounds: 8,
    }
}

fn cone_support(xi: Vector, points: &[Vector]) -> ConvexPolygon {
    let hps: Vec<HalfPlane> = points.iter().map(|p| HalfPlane::new([p[0] - xi[0], p[1] - xi[1]], 1.0)).collect();
    ConvexPolygon::from_box([-1e3, -1e3], [1e3, 1e3]).clip_all(hps.iter())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn line_envelope_matches_pair_oracle(values in line_samples()) {
        let f = line(values);
        let env = biconjugate(&f).unwrap();
        for i in 0..f.len() {
            let want = pair_oracle(&f, i);
            let got = env.node_values()[i];
            if want.is_finite() {
                prop_assert!((got - want).abs() <= 1e-9, "node {i}: {got} vs {want}");
            } else {
                prop_assert_eq!(got, f64::INFINITY);
            }
        }
    }

    #[test]
    fn envelope_is_idempotent(values in line_samples()) {
        let f = line(values);
        let env = biconjugate(&f).unwrap();
        let again = biconjugate(&f.with_values(env.node_values().to_vec()).unwrap()).unwrap();
        for (a, b) in env.node_values().iter().zip(again.node_values()) {
            prop_assert!(a == b || (a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn envelope_scales_with_the_lagrangian(values in line_samples(), s in 0.1..20.0f64) {
        let f = line(values);
        let env = biconjugate(&f).unwrap();
        let scaled = biconjugate(&f.scaled(s)).unwrap();
        for (a, b) in env.node_values().iter().zip(scaled.node_values()) {
            if a.is_finite() {
                prop_assert!((s * a - b).abs() <= 1e-9 * s.max(1.0));
            } else {
                prop_assert_eq!(*b, f64::INFINITY);
            }
        }
    }

    #[test]
    fn radial_witness_round_trip(x in -3.5..3.5f64, y in -3.5..3.5f64) {
        let f = SampledLagrangian::from_builtin(Builtin::RadialDoubleWell2d).unwrap();
        let env = biconjugate(&f).unwrap();
        let w = caratheodory_witness(&f, &env, [x, y]).unwrap();
        prop_assert_eq!(check_witness(&f, &env, &w), Ok(()));
        if !w.contact {
            let mean = w.points.iter().zip(&w.weights).fold([0.0, 0.0], |m, (p, a)| [m[0] + a * p[0], m[1] + a * p[1]]);
            prop_assert!((mean[0] - x).abs() <= 1e-8 && (mean[1] - y).abs() <= 1e-8);
        }
    }

    #[test]
    fn cone_flux_vanishes(
        xi in (-1.0..1.0f64, -1.0..1.0f64),
        base in 0.0..6.3f64,
        jitter in prop::array::uniform3(-0.4..0.4f64),
        radius in prop::array::uniform3(0.3..2.0f64),
        a in (-3.0..3.0f64, -3.0..3.0f64),
        anchor in (0.05..0.45f64, 0.01..0.04f64),
    ) {
        let xi = [xi.0, xi.1];
        let points = cone_points(xi, base, jitter, radius);
        let u = affine(xi, 0.3);
        let anchor = [anchor.0, anchor.0 * anchor.1 / 0.05];
        let support = cone_support(xi, &points);
        let s = 0.9 * admissible_scale(&u, 0, anchor, &support, &Frame::IDENTITY).unwrap();
        let patch = build_patch_cone(&u, 0, &PatchSpec { scale: s, ..cone_spec(anchor, xi, points.clone()) }).unwrap();
        let cell = u.mesh().cell_polygon(0);
        let up = vec![Piece { polygon: cell, grad: xi, offset: u.cell_offset(0) }];
        let a = [a.0, a.1];
        let total = gradient_integral(&up, &patch.pieces, a, &patch.support);
        prop_assert!(total.abs() <= 1e-10, "volume flux {total}");
        let edge = boundary_flux(&up, &patch.pieces, a, &patch.support).unwrap();
        prop_assert!(edge.abs() <= 1e-10, "boundary flux {edge}");
        for q in &patch.pieces {
            prop_assert!(points.contains(&q.grad));
        }
        for v in patch.support.vertices() {
            let ux = dot(xi, *v) + u.cell_offset(0);
            prop_assert!(patch.eval(*v) - ux >= s / 2.0 - 1e-12);
        }
    }

    #[test]
    fn overlay_never_raises_u(
        xi in (-1.0..1.0f64, -1.0..1.0f64),
        base in 0.0..6.3f64,
        probes in prop::collection::vec((0.0..0.5f64, 0.0..0.5f64), 32),
    ) {
        let xi = [xi.0, xi.1];
        let points = cone_points(xi, base, [0.0; 3], [1.0; 3]);
        let u = affine(xi, -0.2);
        let anchor = [0.3, 0.1];
        let support = cone_support(xi, &points);
        let s = 0.8 * admissible_scale(&u, 0, anchor, &support, &Frame::IDENTITY).unwrap();
        let patch = build_patch_cone(&u, 0, &PatchSpec { scale: s, ..cone_spec(anchor, xi, points) }).unwrap();
        let v = pointwise_min_overlay(&u, &patch).unwrap();
        prop_assert_eq!(&v.values()[..u.values().len()], u.values());
        for (x, y) in probes {
            let p = [x, y.min(x)];
            let (vu, vv) = (u.eval(p).unwrap(), v.eval(p).unwrap());
            prop_assert!(vv <= vu + 1e-12);
            prop_assert!(vv >= vu.min(patch.eval(p)) - 1e-12);
        }
        let mass: f64 = (0..v.mesh().num_cells()).map(|c| v.mesh().cell_measure(c)).sum();
        prop_assert!((mass - 1.0).abs() <= 1e-12);
    }
}
