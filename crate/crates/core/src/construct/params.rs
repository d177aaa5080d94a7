//! Parameter selection for the local constructions.

use super::{ConstructError, Mode};
use crate::mesh::{Integrand, PwaFunction};

/// Constants fixed before a family of patches is built.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionParams {
    pub epsilon: f64,
    pub mode: Mode,
    /// Slope of the cap profile, in `(0, 1)`.
    pub gamma: f64,
    /// `δ / λ(Ω)`.
    pub eta: f64,
    pub delta: f64,
    /// Tube half-length in units of the patch scale.
    pub s_eta: f64,
    /// The three lower bounds whose maximum gives `s_eta` in certified mode.
    pub s_eta_terms: [f64; 3],
    /// `max{|f(ξ_i)|, |f(ζ_j)|, 1}`.
    pub m: f64,
    pub lambda_omega: f64,
    /// True when `gamma` and `s_eta` come from the closed-form bounds.
    pub formula_certified: bool,
    /// True when the flux estimate is identically zero (`|a| = 0` or `k = N`).
    pub flux_vanishes: bool,
}

fn s_term(x: f64, codim: usize) -> f64 {
    if x >= 1.0 {
        return 1.0;
    }
    if codim == 1 {
        return 1.0 / x;
    }
    1.0 / (1.0 - (1.0 - x).powf(1.0 / codim as f64))
}

/// Evaluates the parameter formulas. In practical mode `gamma = 1/2` and
/// `s_eta` is left at its floor `3/2`; the template builder raises it to
/// the smallest value that fits the cap budgets.
#[allow(clippy::too_many_arguments)]
pub fn select_params(
    epsilon: f64,
    lambda_omega: f64,
    n: usize,
    k: usize,
    a_norm: f64,
    m: f64,
    delta: f64,
    mode: Mode,
) -> Result<ConstructionParams, ConstructError> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(ConstructError::BadBudget(epsilon));
    }
    if !(lambda_omega > 0.0) || !(m >= 1.0) || !(delta > 0.0) || k == 0 || k > n {
        return Err(ConstructError::Invalid(format!(
            "bad parameter inputs: λ(Ω) = {lambda_omega}, M = {m}, δ = {delta}, k = {k}, N = {n}"
        )));
    }
    let codim = n - k;
    let eta = delta / lambda_omega;
    let flux_vanishes = codim == 0 || a_norm == 0.0;
    let p3 = |e: u32| 3f64.powi(e as i32);
    let (gamma, s_eta_terms) = match mode {
        Mode::Certified => {
            let gamma = if flux_vanishes {
                0.5
            } else {
                let bound = epsilon / (p3(n as u32 + 2) * codim as f64 * a_norm * lambda_omega);
                if bound < 1.0 {
                    bound
                } else {
                    0.5
                }
            };
            let terms = if codim == 0 {
                [1.5, 1.5, 1.5]
            } else {
                let t1 = if codim == 1 {
                    m * lambda_omega * p3(n as u32 + 1) / epsilon
                } else {
                    s_term(epsilon / (m * lambda_omega * p3(n as u32 + 1)), codim)
                };
                [t1, s_term(eta / p3(n as u32), codim), 1.5]
            };
            (gamma, terms)
        }
        Mode::Practical => (0.5, [1.5, 1.5, 1.5]),
    };
    let s_eta = s_eta_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ConstructionParams {
        epsilon,
        mode,
        gamma,
        eta,
        delta,
        s_eta,
        s_eta_terms,
        m,
        lambda_omega,
        formula_certified: mode == Mode::Certified,
        flux_vanishes,
    })
}

/// Largest `δ` with `∫_{Ω'} |f**(∇u)| < ε/(3λ(Ω))` whenever `λ(Ω') < δ`,
/// from the decreasing rearrangement of the cellwise values; capped at `λ(Ω)`.
pub fn delta_modulus(
    u: &PwaFunction,
    integrand: &dyn Integrand,
    epsilon: f64,
) -> Result<f64, ConstructError> {
    let mesh = u.mesh();
    let lambda = mesh.domain_measure();
    let mut cells: Vec<(f64, f64)> = Vec::with_capacity(mesh.num_cells());
    for c in 0..mesh.num_cells() {
        let g = integrand.f_relaxed(u.gradient(c))?.abs();
        cells.push((g, mesh.cell_measure(c)));
    }
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let budget = epsilon / (3.0 * lambda);
    let (mut acc, mut delta) = (0.0, 0.0);
    for (g, m) in cells {
        if g == 0.0 {
            delta += m;
            continue;
        }
        if acc + g * m < budget {
            acc += g * m;
            delta += m;
        } else {
            delta += (budget - acc) / g;
            break;
        }
    }
    Ok(delta.min(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_gamma() {
        let p = select_params(0.27, 1.0, 2, 1, 1.0, 1.0, 1.0, Mode::Certified).unwrap();
        assert_eq!(p.gamma, 1.0 / 300.0);
    }

    #[test]
    fn worked_first_s_term() {
        let p = select_params(0.01, 1.0, 2, 1, 1.0, 225.0, 1.0, Mode::Certified).unwrap();
        assert_eq!(p.s_eta_terms[0], 607500.0);
        assert_eq!(p.s_eta, 607500.0);
    }

    #[test]
    fn zero_subgradient_convention() {
        let p = select_params(0.05, 1.0, 2, 1, 0.0, 9.0, 1.0, Mode::Certified).unwrap();
        assert_eq!(p.gamma, 0.5);
        assert!(p.flux_vanishes);
        assert!(matches!(
            select_params(0.0, 1.0, 2, 1, 0.0, 9.0, 1.0, Mode::Practical),
            Err(ConstructError::BadBudget(_))
        ));
    }
}
