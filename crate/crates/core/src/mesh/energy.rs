use thiserror::Error;

use super::PwaFunction;
use crate::envelope::{ConvexEnvelope, EnvelopeError, SampledLagrangian, Vector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("gradient ({}, {}) is outside the integrand's domain", .0[0], .0[1])]
    GradientOutOfDomain(Vector),
}

impl From<EnvelopeError> for EnergyError {
    fn from(e: EnvelopeError) -> Self {
        match e {
            EnvelopeError::GradientOutOfDomain(g) | EnvelopeError::OutOfDomain(g) => {
                EnergyError::GradientOutOfDomain(g)
            }
            _ => EnergyError::GradientOutOfDomain([f64::NAN, f64::NAN]),
        }
    }
}

/// Lagrangian and its relaxation evaluated on gradients.
pub trait Integrand: Sync {
    fn f(&self, g: Vector) -> Result<f64, EnergyError>;
    fn f_relaxed(&self, g: Vector) -> Result<f64, EnergyError>;
}

/// The sampled Lagrangian paired with its envelope.
#[derive(Clone, Copy, Debug)]
pub struct SampledIntegrand<'a> {
    pub lagrangian: &'a SampledLagrangian,
    pub envelope: &'a ConvexEnvelope,
}

impl<'a> SampledIntegrand<'a> {
    pub fn new(lagrangian: &'a SampledLagrangian, envelope: &'a ConvexEnvelope) -> Self {
        Self { lagrangian, envelope }
    }
}

impl Integrand for SampledIntegrand<'_> {
    fn f(&self, g: Vector) -> Result<f64, EnergyError> {
        Ok(self.lagrangian.eval(g)?)
    }

    fn f_relaxed(&self, g: Vector) -> Result<f64, EnergyError> {
        Ok(self.envelope.eval(g)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellEnergy {
    pub cell: usize,
    pub gradient: Vector,
    pub f_value: f64,
    pub fss_value: f64,
    pub measure: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    /// `F = Σ λ(T) f(∇u|_T)`, possibly `+∞`.
    pub f_total: f64,
    /// `F** = Σ λ(T) f**(∇u|_T)`.
    pub fss_total: f64,
    pub cells: Vec<CellEnergy>,
    /// Cells on which `f = +∞`.
    pub infinite_cells: Vec<usize>,
}

impl EnergyReport {
    /// Sums `(measure, gradient)` regions in order.
    pub fn from_regions(
        regions: impl IntoIterator<Item = (f64, Vector)>,
        integrand: &dyn Integrand,
    ) -> Result<Self, EnergyError> {
        let mut cells = Vec::new();
        let mut infinite_cells = Vec::new();
        let (mut f_total, mut fss_total) = (0.0, 0.0);
        for (id, (measure, g)) in regions.into_iter().enumerate() {
            let fv = integrand.f(g)?;
            let fss = integrand.f_relaxed(g)?;
            if fv == f64::INFINITY {
                infinite_cells.push(id);
            }
            f_total += measure * fv;
            fss_total += measure * fss;
            cells.push(CellEnergy { cell: id, gradient: g, f_value: fv, fss_value: fss, measure });
        }
        Ok(Self { f_total, fss_total, cells, infinite_cells })
    }
}

/// Exact cellwise energies of a pwa function.
pub fn energy(u: &PwaFunction, integrand: &dyn Integrand) -> Result<EnergyReport, EnergyError> {
    let m = u.mesh();
    EnergyReport::from_regions((0..m.num_cells()).map(|c| (m.cell_measure(c), u.gradient(c))), integrand)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::envelope::{biconjugate, Builtin};
    use crate::mesh::{build_box_mesh, interpolate, Expression};

    fn report(b: Builtin, phi: Expression, values: Option<Vec<f64>>) -> EnergyReport {
        let f = SampledLagrangian::from_builtin(b).unwrap();
        let env = biconjugate(&f).unwrap();
        let mesh = Arc::new(build_box_mesh(&[(0.0, 1.0)], &[4]).unwrap());
        let u = match values {
            Some(v) => PwaFunction::new(mesh, v).unwrap(),
            None => interpolate(&mesh, &phi).unwrap(),
        };
        energy(&u, &SampledIntegrand::new(&f, &env)).unwrap()
    }

    #[test]
    fn zero_function_on_double_well() {
        let r = report(Builtin::DoubleWell1d, Expression::Zero, None);
        assert_eq!(r.f_total, 1.0);
        assert_eq!(r.fss_total, 0.0);
    }

    #[test]
    fn sawtooth_on_double_well() {
        let r = report(Builtin::DoubleWell1d, Expression::Zero, Some(vec![0.0, 0.25, 0.0, 0.25, 0.0]));
        assert_eq!(r.f_total, 0.0);
        let s: f64 = r.cells.iter().map(|c| c.measure * c.f_value).sum();
        assert_eq!(s, r.f_total);
    }

    #[test]
    fn half_slope_on_lattice() {
        let r = report(
            Builtin::LatticeQuadratic1d,
            Expression::Affine { constant: 0.0, gradient: [0.5, 0.0] },
            None,
        );
        assert_eq!(r.f_total, f64::INFINITY);
        assert_eq!(r.fss_total, 0.5);
        assert_eq!(r.infinite_cells.len(), 4);
    }
}
