//! Unscaled patch shapes restricted to the modified set `E`, with their
//! energies. One template serves every patch of a gradient class.

use super::params::{select_params, ConstructionParams};
use super::patch::{cone_shape, tube_cap, tube_frame, tube_shape, world_gradient, Frame, PatchKind, Shape};
use super::{ConstructError, Mode};
use crate::envelope::{CaratheodoryWitness, SimplexWitness, Vector};
use crate::geometry::{dot, norm, sub, ConvexPolygon, GridIndex, HalfPlane};
use crate::mesh::Integrand;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PieceTag {
    /// Inside the core `Q̃`.
    Core,
    /// In `Q \ Q̃` with a witness or simplex gradient.
    Cap,
    /// In `Q \ Q̃` where the cap fill left the slope `ξ + g`.
    CapResidual,
}

/// Piece of `(ṽ - u)/s` on `E`, in unscaled frame coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct TemplatePiece {
    pub polygon: ConvexPolygon,
    pub grad: Vector,
    pub offset: f64,
    pub tag: PieceTag,
    /// Gradient of `v` in world coordinates.
    pub world_gradient: Vector,
    pub f_value: f64,
}

/// Inputs shared by every template of one construction.
#[derive(Clone, Copy, Debug)]
pub(crate) struct TemplateInputs {
    pub dim: usize,
    pub epsilon: f64,
    pub lambda_omega: f64,
    pub delta: f64,
    pub mode: Mode,
    pub rho: f64,
    pub cellina_rounds: usize,
}

#[derive(Clone, Debug)]
pub struct Template {
    pub kind: PatchKind,
    pub dim: usize,
    pub xi: Vector,
    pub frame: Frame,
    pub witness: CaratheodoryWitness,
    pub zetas: Vec<Vector>,
    pub params: ConstructionParams,
    pub support: ConvexPolygon,
    pub core: ConvexPolygon,
    pub hull: ConvexPolygon,
    pub pieces: Vec<TemplatePiece>,
    pub e_measure: f64,
    pub core_measure: f64,
    pub core_energy: f64,
    pub cap_measure: f64,
    pub cap_energy: f64,
    /// `Σ λ |f|` over cap pieces, the quantity held to the cap budget.
    pub cap_abs_energy: f64,
    pub residual_measure: f64,
    /// `∫_{Q̃} a·(∇u - ∇ṽ)` with `a` the envelope subgradient at `ξ`.
    pub flux: f64,
    pub max_gradient_norm: f64,
    /// Residual fraction of the cap fill domain.
    pub fill_residual: f64,
    index: GridIndex,
}

struct CapStats {
    measure: f64,
    abs_energy: f64,
}

fn e_part(
    frame: &Frame,
    xi: Vector,
    piece: &crate::mesh::Piece,
    tag: PieceTag,
    integrand: &dyn Integrand,
) -> Result<Option<TemplatePiece>, ConstructError> {
    let poly = piece.polygon.clip(&HalfPlane::below_affine(piece.grad, piece.offset));
    if poly.is_empty() {
        return Ok(None);
    }
    let wg = world_gradient(frame, xi, piece.grad);
    let fv = integrand.f(wg)?;
    if fv == f64::INFINITY {
        return Err(ConstructError::ResidualUnchargeable { gradient: wg, measure: poly.area() });
    }
    Ok(Some(TemplatePiece { polygon: poly, grad: piece.grad, offset: piece.offset, tag, world_gradient: wg, f_value: fv }))
}

fn cap_stats(
    frame: &Frame,
    xi: Vector,
    caps: &[super::patch::CapLocal],
    integrand: &dyn Integrand,
) -> Result<CapStats, ConstructError> {
    let (mut measure, mut abs_energy) = (0.0, 0.0);
    for cap in caps {
        for (p, tag) in &cap.pieces {
            if let Some(tp) = e_part(frame, xi, p, *tag, integrand)? {
                let a = tp.polygon.area();
                measure += a;
                abs_energy += a * tp.f_value.abs();
            }
        }
    }
    Ok(CapStats { measure, abs_energy })
}

impl Template {
    pub(crate) fn build(
        witness: &CaratheodoryWitness,
        simplex: Option<&SimplexWitness>,
        integrand: &dyn Integrand,
        inp: &TemplateInputs,
    ) -> Result<Template, ConstructError> {
        let xi = witness.point;
        let k = witness.k;
        let tube = inp.dim == 2 && k == 1;
        let zetas: Vec<Vector> = if tube {
            simplex
                .ok_or_else(|| ConstructError::Invalid("tube patch needs a simplex witness".to_string()))?
                .points
                .clone()
        } else {
            Vec::new()
        };
        let mut m = 1.0f64;
        for v in &witness.values {
            m = m.max(v.abs());
        }
        for z in &zetas {
            m = m.max(integrand.f(*z)?.abs());
        }
        let mut params = select_params(
            inp.epsilon,
            inp.lambda_omega,
            inp.dim,
            k,
            norm(witness.subgradient),
            m,
            inp.delta,
            inp.mode,
        )?;
        let (shape, fill_residual): (Shape, f64) = if tube {
            let (frame, c1, c2) = tube_frame(xi, &witness.points)?;
            let dirs: Vec<Vector> = zetas.iter().map(|z| frame.to_frame(sub(*z, xi))).collect();
            let caps = [
                tube_cap(1.0, c1, c2, params.gamma, &dirs, inp.rho, inp.cellina_rounds)?,
                tube_cap(-1.0, c1, c2, params.gamma, &dirs, inp.rho, inp.cellina_rounds)?,
            ];
            if inp.mode == Mode::Practical {
                let st = cap_stats(&frame, xi, &caps, integrand)?;
                let width = 0.5 * params.gamma * (1.0 / -c1 + 1.0 / c2);
                let lam = inp.lambda_omega;
                let s_e = 1.0 + (3.0 * st.abs_energy * lam / inp.epsilon - st.measure) / (2.0 * width);
                let s_m = 1.0 + (st.measure * lam / inp.delta - st.measure) / (2.0 * width);
                params.s_eta_terms = [s_e, s_m, 1.5];
                params.s_eta = s_e.max(s_m).max(1.5) * (1.0 + 1e-9);
            }
            let fill_domain: f64 = caps.iter().map(|c| c.fill.domain.area()).sum();
            let fill_left: f64 = caps.iter().map(|c| c.fill.residual_measure).sum();
            (tube_shape(frame, c1, c2, params.gamma, params.s_eta, &caps), fill_left / fill_domain)
        } else {
            (cone_shape(inp.dim, xi, &witness.points)?, 0.0)
        };
        let a = witness.subgradient;
        let mut pieces = Vec::new();
        for (p, tag) in &shape.pieces {
            if let Some(tp) = e_part(&shape.frame, xi, p, *tag, integrand)? {
                pieces.push(tp);
            }
        }
        let (mut e_measure, mut core_measure, mut core_energy) = (0.0, 0.0, 0.0);
        let (mut cap_measure, mut cap_energy, mut cap_abs_energy) = (0.0, 0.0, 0.0);
        let (mut residual_measure, mut flux, mut max_g) = (0.0, 0.0, 0.0f64);
        for p in &pieces {
            let area = p.polygon.area();
            e_measure += area;
            max_g = max_g.max(norm(p.world_gradient));
            match p.tag {
                PieceTag::Core => {
                    core_measure += area;
                    core_energy += area * p.f_value;
                    flux -= area * dot(a, sub(p.world_gradient, xi));
                }
                PieceTag::Cap | PieceTag::CapResidual => {
                    cap_measure += area;
                    cap_energy += area * p.f_value;
                    cap_abs_energy += area * p.f_value.abs();
                    if p.tag == PieceTag::CapResidual {
                        residual_measure += area;
                    }
                }
            }
        }
        let hb = shape.hull.bbox();
        let n = pieces.len().max(1) as f64;
        let aspect = (hb.width() / hb.height().max(1e-300)).clamp(1e-6, 1e6);
        let nx = ((n * aspect).sqrt().ceil() as usize).clamp(1, 4096);
        let ny = ((n / aspect).sqrt().ceil() as usize).clamp(1, 4096);
        let mut index = GridIndex::new(hb, nx, ny);
        for (i, p) in pieces.iter().enumerate() {
            index.insert(i, &p.polygon.bbox());
        }
        Ok(Template {
            kind: if tube { PatchKind::Tube } else { PatchKind::Cone },
            dim: inp.dim,
            xi,
            frame: shape.frame,
            witness: witness.clone(),
            zetas,
            params,
            support: shape.support,
            core: shape.core,
            hull: shape.hull,
            pieces,
            e_measure,
            core_measure,
            core_energy,
            cap_measure,
            cap_energy,
            cap_abs_energy,
            residual_measure,
            flux,
            max_gradient_norm: max_g,
            fill_residual,
            index,
        })
    }

    /// `(v - u)/s` at unscaled frame point `y`; zero off `E`.
    pub fn relative(&self, y: Vector) -> f64 {
        let probe = if self.dim == 1 { [y[0], 0.5] } else { y };
        let mut best = 0.0f64;
        for &i in self.index.at_point(probe) {
            let p = &self.pieces[i];
            if p.polygon.contains(probe) {
                best = best.min(p.grad[0] * y[0] + p.grad[1] * if self.dim == 1 { 0.0 } else { y[1] } + p.offset);
            }
        }
        best
    }

    /// `s^N`, the factor applied to every measure and energy of the template.
    pub fn measure_factor(&self, s: f64) -> f64 {
        if self.dim == 1 {
            s
        } else {
            s * s
        }
    }
}
