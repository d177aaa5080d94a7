use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::RelaxError;
use crate::envelope::{subgradient_at, ConvexEnvelope, Vector};
use crate::geometry::{dot, norm};
use crate::mesh::{interpolate, EnergyError, Expression, PwaFunction, SimplicialMesh};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum StepRule {
    /// Polyak when the Jensen bound is finite, diminishing otherwise.
    #[default]
    Auto,
    /// `t = (F − F_lb) / |g|²` with the Jensen bound `F_lb`.
    Polyak,
    /// Step length `c / √(k + 1)` along `−g / |g|`.
    Diminishing { c: f64 },
}

impl FromStr for StepRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(StepRule::Auto),
            "polyak" => Ok(StepRule::Polyak),
            "diminishing" => Ok(StepRule::Diminishing { c: DEFAULT_C }),
            _ => Err(format!("unknown step rule {s:?}")),
        }
    }
}

const DEFAULT_C: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub step: StepRule,
    pub tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Amplitude of the uniform perturbation applied before each restart.
    pub perturbation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iterations: 5000, step: StepRule::Auto, tolerance: 1e-9, restarts: 0, seed: 0, perturbation: 0.1 }
    }
}

#[derive(Clone, Debug)]
pub struct RelaxedSolution {
    pub u: PwaFunction,
    /// `F**(u)`.
    pub value: f64,
    /// `λ(Ω) f**(β̄)`, `β̄` the mean gradient fixed by the boundary data.
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Barycentric gradients of every cell, one per cell node.
fn basis_gradients(mesh: &SimplicialMesh) -> Vec<Vec<Vector>> {
    (0..mesh.num_cells())
        .map(|c| {
            let v = mesh.cell(c);
            if mesh.dim() == 1 {
                let h = mesh.node(v[1])[0] - mesh.node(v[0])[0];
                return vec![[-1.0 / h, 0.0], [1.0 / h, 0.0]];
            }
            let p: Vec<Vector> = v.iter().map(|&i| mesh.node(i)).collect();
            let a2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
            (0..3)
                .map(|i| {
                    let (q, r) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                    [-(r[1] - q[1]) / a2, (r[0] - q[0]) / a2]
                })
                .collect()
        })
        .collect()
}

fn relaxed_value(env: &ConvexEnvelope, g: Vector) -> Result<f64, EnergyError> {
    let v = env.eval(g)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EnergyError::GradientOutOfDomain(g))
    }
}

/// Facet slope inside the sampled domain; central differences of the
/// closed form outside it.
fn relaxed_slope(env: &ConvexEnvelope, g: Vector) -> Result<Vector, EnergyError> {
    if let Ok(a) = subgradient_at(env, g) {
        return Ok(a);
    }
    let h = 1e-7 * norm(g).max(1.0);
    let mut a = [0.0; 2];
    for d in 0..env.dim() {
        let (mut lo, mut hi) = (g, g);
        lo[d] -= h;
        hi[d] += h;
        a[d] = (relaxed_value(env, hi)? - relaxed_value(env, lo)?) / (2.0 * h);
    }
    Ok(a)
}

struct Problem<'a> {
    mesh: &'a Arc<SimplicialMesh>,
    env: &'a ConvexEnvelope,
    basis: Vec<Vec<Vector>>,
    measures: Vec<f64>,
    free: Vec<bool>,
}

impl Problem<'_> {
    fn value(&self, values: &[f64]) -> Result<f64, EnergyError> {
        let mut total = 0.0;
        for c in 0..self.basis.len() {
            total += self.measures[c] * relaxed_value(self.env, self.mesh.cell_gradient(c, values))?;
        }
        Ok(total)
    }

    /// Subgradient with respect to the free nodal values.
    fn slope(&self, values: &[f64]) -> Result<Vec<f64>, EnergyError> {
        let mut out = vec![0.0; values.len()];
        for (c, basis) in self.basis.iter().enumerate() {
            let a = relaxed_slope(self.env, self.mesh.cell_gradient(c, values))?;
            for (&n, b) in self.mesh.cell(c).iter().zip(basis) {
                if self.free[n] {
                    out[n] += self.measures[c] * dot(a, *b);
                }
            }
        }
        Ok(out)
    }
}

struct Run {
    values: Vec<f64>,
    value: f64,
    iterations: usize,
    stationary: bool,
}

fn descend(p: &Problem, start: Vec<f64>, lower: f64, rule: StepRule, opts: &SolverOptions) -> Result<Run, RelaxError> {
    let mut x = start;
    let mut fx = p.value(&x)?;
    let mut best = Run { values: x.clone(), value: fx, iterations: 0, stationary: false };
    for k in 0..opts.max_iterations {
        best.iterations = k;
        if best.value <= lower + opts.tolerance {
            break;
        }
        let g = p.slope(&x)?;
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if gg == 0.0 {
            best.stationary = true;
            break;
        }
        let mut t = match rule {
            StepRule::Diminishing { c } => c / ((k + 1) as f64).sqrt() / gg.sqrt(),
            _ => (fx - lower).max(opts.tolerance) / gg,
        };
        let mut moved = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(v, d)| v - t * d).collect();
            if let Ok(ft) = p.value(&trial) {
                x = trial;
                fx = ft;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
        if fx < best.value {
            best.values.clone_from(&x);
            best.value = fx;
        }
        best.iterations = k + 1;
    }
    Ok(best)
}

/// Projected subgradient descent on the free nodal values of `u = φ` on
/// the boundary; optimal once `F**(u)` reaches the Jensen bound within
/// the tolerance or a zero subgradient is met.
pub fn minimize_relaxed(
    mesh: &Arc<SimplicialMesh>,
    phi: &Expression,
    env: &ConvexEnvelope,
    opts: &SolverOptions,
) -> Result<RelaxedSolution, RelaxError> {
    if !(opts.tolerance > 0.0) {
        return Err(RelaxError::Invalid(format!("tolerance must be positive, got {}", opts.tolerance)));
    }
    if env.dim() != mesh.dim() {
        return Err(RelaxError::Invalid("envelope and mesh dimensions differ".into()));
    }
    let start = interpolate(mesh, phi)?;
    let measures: Vec<f64> = (0..mesh.num_cells()).map(|c| mesh.cell_measure(c)).collect();
    let omega = measures.iter().sum::<f64>();
    let mut mean = [0.0; 2];
    for (c, m) in measures.iter().enumerate() {
        let g = start.gradient(c);
        mean = [mean[0] + m * g[0], mean[1] + m * g[1]];
    }
    let mean = [mean[0] / omega, mean[1] / omega];
    let lower = relaxed_value(env, mean).map(|v| omega * v).unwrap_or(f64::NEG_INFINITY);
    let rule = match opts.step {
        StepRule::Auto if lower.is_finite() => StepRule::Polyak,
        StepRule::Auto => StepRule::Diminishing { c: DEFAULT_C },
        StepRule::Polyak if !lower.is_finite() => {
            return Err(RelaxError::Invalid("Polyak steps need a finite lower bound".into()))
        }
        r => r,
    };
    let free: Vec<bool> = (0..mesh.num_nodes()).map(|i| !mesh.is_boundary(i)).collect();
    let problem = Problem { mesh, env, basis: basis_gradients(mesh), measures, free };

    let mut best = descend(&problem, start.values().to_vec(), lower, rule, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut iterations = best.iterations;
    for _ in 0..opts.restarts {
        if best.value <= lower + opts.tolerance || best.stationary {
            break;
        }
        let kick: Vec<f64> = best
            .values
            .iter()
            .zip(&problem.free)
            .map(|(v, f)| if *f { v + opts.perturbation * rng.gen_range(-1.0..1.0) } else { *v })
            .collect();
        let run = descend(&problem, kick, lower, rule, opts)?;
        iterations += run.iterations;
        if run.value < best.value {
            best = run;
        }
    }
    let converged = best.value <= lower + opts.tolerance || best.stationary;
    let u = PwaFunction::new(mesh.clone(), best.values)?;
    let solution = RelaxedSolution { u, value: best.value, lower_bound: lower, iterations, converged };
    if converged {
        Ok(solution)
    } else {
        Err(RelaxError::NotConverged { value: solution.value, bound: lower, iterations, solution: Box::new(solution) })
    }
}
