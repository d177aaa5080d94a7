//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use relaxforge::{biconjugate, build_box_mesh, interpolate, Builtin, ConvexEnvelope, Expression, PwaFunction, SampledLagrangian};

pub fn lagrangian(b: Builtin) -> (SampledLagrangian, ConvexEnvelope) {
    let f = SampledLagrangian::from_builtin(b).expect("builtin grid is valid");
    let env = biconjugate(&f).expect("builtin hull exists");
    (f, env)
}

/// Zero function on the unit box with `res` cells per axis.
pub fn zero_on_unit_box(dim: usize, res: usize) -> PwaFunction {
    let mesh = Arc::new(build_box_mesh(&vec![(0.0, 1.0); dim], &vec![res; dim]).expect("resolution is positive"));
    interpolate(&mesh, &Expression::Zero).expect("zero interpolates")
}
