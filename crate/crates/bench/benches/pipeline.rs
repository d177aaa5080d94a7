use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use relaxforge::construct::{cellina_fill, ConstructOptions};
use relaxforge::geometry::ConvexPolygon;
use relaxforge::relax::{minimize_relaxed, SolverOptions};
use relaxforge::{assemble_v, biconjugate, caratheodory_witness, Builtin, Expression, SampledLagrangian};
use relaxforge_bench::{lagrangian, zero_on_unit_box};

fn envelopes(c: &mut Criterion) {
    let mut g = c.benchmark_group("biconjugate");
    for b in [Builtin::DoubleWell1d, Builtin::RadialDoubleWell2d] {
        let f = SampledLagrangian::from_builtin(b).unwrap();
        g.bench_function(b.name(), |bench| bench.iter(|| biconjugate(black_box(&f)).unwrap()));
    }
    g.finish();
}

fn witnesses(c: &mut Criterion) {
    let (f, env) = lagrangian(Builtin::RadialDoubleWell2d);
    c.bench_function("witness/radial_inside", |b| {
        b.iter(|| caratheodory_witness(&f, &env, black_box([0.3, -0.2])).unwrap())
    });
}

fn fill(c: &mut Criterion) {
    let trapezoid = ConvexPolygon::new(vec![[-0.25, 0.0], [0.25, 0.0], [0.1, 1.0], [-0.1, 1.0]]);
    let dirs = [[1.8, -1.0], [0.0, 2.0], [-1.8, -1.0]];
    c.bench_function("cellina/trapezoid_rho_0.25", |b| {
        b.iter(|| cellina_fill(&trapezoid, 2, [0.0, 0.5], 0.0, &dirs, 0.25, 14).unwrap())
    });
}

fn construction(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble_v");
    g.sample_size(10);
    let (f1, e1) = lagrangian(Builtin::DoubleWell1d);
    let u1 = zero_on_unit_box(1, 16);
    let o1 = ConstructOptions { epsilon: 1e-3, ..Default::default() };
    g.bench_function("double_well_1d", |b| b.iter(|| assemble_v(&u1, &f1, &e1, &o1).unwrap()));
    let (f2, e2) = lagrangian(Builtin::RadialDoubleWell2d);
    let u2 = zero_on_unit_box(2, 4);
    let o2 = ConstructOptions { epsilon: 0.05, ..Default::default() };
    g.bench_function("radial_2d_res4", |b| b.iter(|| assemble_v(&u2, &f2, &e2, &o2).unwrap()));
    g.finish();
}

fn solver(c: &mut Criterion) {
    let (_, env) = lagrangian(Builtin::Quadratic1d);
    let u = zero_on_unit_box(1, 32);
    let phi = Expression::SineBump { amplitude: 0.3 };
    let opts = SolverOptions { max_iterations: 20000, tolerance: 1e-8, ..Default::default() };
    c.bench_function("minimize_relaxed/quadratic_bump", |b| {
        b.iter_batched(|| u.mesh_arc().clone(), |mesh| minimize_relaxed(&mesh, &phi, &env, &opts).unwrap(), BatchSize::SmallInput)
    });
}

criterion_group!(benches, envelopes, witnesses, fill, construction, solver);
criterion_main!(benches);
