use std::io::Write;
use std::sync::Arc;

use super::{minimize_relaxed, RelaxError, RelaxedSolution, SolverOptions};
use crate::construct::{assemble_v, Assembly, ConstructError, ConstructOptions};
use crate::envelope::{ConvexEnvelope, SampledLagrangian};
use crate::format::fmt_f64;
use crate::geometry::norm;
use crate::mesh::{Expression, PwaFunction, SimplicialMesh};

/// `ε_n = ε₀ 2^{−n}`, `n = 0, …, steps − 1`.
pub fn epsilon_schedule(epsilon0: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|n| epsilon0 * 0.5f64.powi(n as i32)).collect()
}

#[derive(Clone, Debug)]
pub struct SequenceStep {
    pub n: usize,
    pub epsilon: f64,
    pub assembly: Assembly,
}

/// `v_n = assemble_v(u*, ε_n)` for every entry of the schedule.
pub fn minimizing_sequence(
    u: &PwaFunction,
    f: &SampledLagrangian,
    env: &ConvexEnvelope,
    schedule: &[f64],
    opts: &ConstructOptions,
) -> Result<Vec<SequenceStep>, ConstructError> {
    schedule
        .iter()
        .enumerate()
        .map(|(n, &epsilon)| {
            let assembly = assemble_v(u, f, env, &ConstructOptions { epsilon, ..opts.clone() })?;
            Ok(SequenceStep { n, epsilon, assembly })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapStep {
    pub n: usize,
    pub epsilon: f64,
    pub f_v: f64,
    pub gap: f64,
    pub grad_sup: f64,
    pub certified: bool,
    pub patches: usize,
}

#[derive(Clone, Debug)]
pub struct GapReport {
    pub solution: RelaxedSolution,
    pub min_relaxed: f64,
    pub steps: Vec<GapStep>,
    pub best_f: f64,
    pub gap: f64,
    /// `max(|∇u*|∞, |ξ_i|, |ζ_j|)` over every witness used.
    pub k_bound: f64,
    pub epsilon_final: f64,
    pub tolerance: f64,
    /// Assembly for `ε_final`.
    pub last: Box<Assembly>,
}

impl GapReport {
    /// Builds `v_n` for each `ε_n`; uncertified assemblies are kept and
    /// flagged rather than dropped.
    pub fn from_solution(
        solution: RelaxedSolution,
        f: &SampledLagrangian,
        env: &ConvexEnvelope,
        schedule: &[f64],
        opts: &ConstructOptions,
        tolerance: f64,
    ) -> Result<Self, RelaxError> {
        if schedule.is_empty() || schedule.iter().any(|e| !(*e > 0.0)) || schedule.windows(2).any(|w| w[1] >= w[0]) {
            return Err(RelaxError::Invalid("ε schedule must be positive and decreasing".into()));
        }
        let min = solution.value;
        let mut k_bound = solution.u.gradient_sup();
        let mut assemblies = Vec::with_capacity(schedule.len());
        for &epsilon in schedule {
            let a = match assemble_v(&solution.u, f, env, &ConstructOptions { epsilon, ..opts.clone() }) {
                Ok(a) => a,
                Err(ConstructError::BudgetExceeded { assembly, .. }) => *assembly,
                Err(e) => return Err(e.into()),
            };
            k_bound = k_bound.max(witness_sup(&a));
            assemblies.push(a);
        }
        let mut steps = Vec::with_capacity(schedule.len());
        for (n, (a, &epsilon)) in assemblies.iter().zip(schedule).enumerate() {
            let f_v = a.ledger.f_v;
            if f_v < min - tolerance {
                return Err(RelaxError::Sandwich { n, f_v, min });
            }
            let grad_sup = a.v.gradient_sup();
            if grad_sup > k_bound * (1.0 + 1e-12) {
                return Err(RelaxError::GradientBound { n, sup: grad_sup, k: k_bound });
            }
            steps.push(GapStep {
                n,
                epsilon,
                f_v,
                gap: f_v - min,
                grad_sup,
                certified: a.certified,
                patches: a.v.num_patches(),
            });
        }
        let last = Box::new(assemblies.pop().expect("schedule is non-empty"));
        let best_f = steps.iter().map(|s| s.f_v).fold(f64::INFINITY, f64::min);
        Ok(Self {
            solution,
            min_relaxed: min,
            gap: best_f - min,
            best_f,
            steps,
            k_bound,
            epsilon_final: *schedule.last().unwrap(),
            tolerance,
            last,
        })
    }

    pub fn certified(&self) -> bool {
        self.steps.iter().all(|s| s.certified)
    }

    /// `gap ≤ ε_final + tol` with every step certified.
    pub fn no_gap(&self) -> bool {
        self.certified() && self.gap <= self.epsilon_final + self.tolerance
    }
}

fn witness_sup(a: &Assembly) -> f64 {
    let c = &a.cover;
    let mut k = c.simplex.as_ref().map_or(0.0, |s| s.max_norm());
    for t in &c.templates {
        for p in &t.witness.points {
            k = k.max(norm(*p));
        }
    }
    for l in &c.laminates {
        for s in l.slopes {
            k = k.max(s.abs());
        }
    }
    k
}

/// Minimizes `F**` with boundary data `φ`, then builds the sequence `v_n`.
pub fn gap_report(
    mesh: &Arc<SimplicialMesh>,
    phi: &Expression,
    f: &SampledLagrangian,
    env: &ConvexEnvelope,
    schedule: &[f64],
    solver: &SolverOptions,
    opts: &ConstructOptions,
) -> Result<GapReport, RelaxError> {
    let solution = minimize_relaxed(mesh, phi, env, solver)?;
    GapReport::from_solution(solution, f, env, schedule, opts, solver.tolerance)
}

pub fn write_gap_csv<W: Write>(out: W, report: &GapReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "epsilon_n", "F_relaxed_min", "F_v_n", "gap_n", "grad_sup", "K", "certified"])?;
    for s in &report.steps {
        w.write_record([
            s.n.to_string(),
            fmt_f64(s.epsilon),
            fmt_f64(report.min_relaxed),
            fmt_f64(s.f_v),
            fmt_f64(s.gap),
            fmt_f64(s.grad_sup),
            fmt_f64(report.k_bound),
            s.certified.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
