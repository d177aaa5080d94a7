//! Convex envelopes of discontinuous, possibly `+∞`-valued Lagrangians and
//! constructive relaxation of `∫ f(∇u)` on piecewise-affine functions.
//!
//! The pipeline runs [`biconjugate`] on sampled data, minimizes the relaxed
//! energy with [`minimize_relaxed`], and builds competitors `v` with
//! `F(v) ≤ F**(u) + ε` through [`assemble_v`].

pub mod construct;
pub mod envelope;
pub mod format;
pub mod geometry;
pub mod mesh;
pub mod relax;

pub use construct::{assemble_v, Assembly, ConstructError, ConstructOptions, CoverReport, Ledger, Mode};
pub use envelope::{
    biconjugate, caratheodory_witness, Builtin, CaratheodoryWitness, ConvexEnvelope, EnvelopeError, Minorant,
    SampledLagrangian, SimplexWitness, Vector,
};
pub use mesh::{build_box_mesh, energy, interpolate, EnergyReport, Expression, PwaFunction, SimplicialMesh};
pub use relax::{gap_report, minimize_relaxed, GapReport, RelaxError, RelaxedSolution, SolverOptions, StepRule};
