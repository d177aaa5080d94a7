//! The competitor `v = u + Σ_n (ũ_n - u)` and its energy ledger.

use std::collections::HashMap;
use std::sync::Arc;

use super::cover::{vitali_cover, CoverReport, Laminate};
use super::patch::place;
use super::template::Template;
use super::{ConstructError, ConstructOptions};
use crate::envelope::{ConvexEnvelope, SampledLagrangian, Vector};
use crate::geometry::{dot, norm, scale, sub, Bbox, ConvexPolygon, GridIndex};
use crate::mesh::{energy, EnergyReport, Integrand, Piece, PwaFunction, SampledIntegrand, SimplicialMesh};

/// Term-by-term accounting of `F(v)` against `F**(u) + ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ledger {
    pub f_v: f64,
    pub fss_u: f64,
    pub epsilon: f64,
    /// `F` over contact cells, where `v = u`.
    pub good_energy: f64,
    pub core_energy: f64,
    pub cap_energy: f64,
    pub flux_term: f64,
    pub cap_measure: f64,
    /// Measure of cap pieces left at the fill slope.
    pub residual_measure: f64,
    /// `λ(Ω̃ \ ∪ E_n)`, charged at `f(ξ)`.
    pub uncovered_measure: f64,
    pub uncovered_energy: f64,
    pub e_measure: f64,
    pub bad_measure: f64,
    /// `(ε/3) Σ λ(E_n) / λ(Ω)`.
    pub cap_energy_budget: f64,
    /// `δ Σ λ(E_n) / λ(Ω)`.
    pub cap_measure_budget: f64,
    pub flux_budget: f64,
    pub certified: bool,
}

impl Ledger {
    pub fn within_budgets(&self) -> bool {
        self.cap_energy.abs() <= self.cap_energy_budget
            && self.cap_measure <= self.cap_measure_budget
            && self.flux_term.abs() <= self.flux_budget.max(1e-12 * self.e_measure)
    }
}

#[derive(Clone, Debug)]
struct Placed {
    template: usize,
    anchor: Vector,
    scale: f64,
    hull: ConvexPolygon,
    /// `u = grad·x + offset` on the patch's region.
    u_grad: Vector,
    u_offset: f64,
}

/// `v` as `u` plus disjointly supported patch corrections.
#[derive(Clone, Debug)]
pub struct AssembledV {
    base: PwaFunction,
    templates: Vec<Arc<Template>>,
    placed: Vec<Placed>,
    laminates: Vec<(Laminate, f64)>,
    index: Option<GridIndex>,
    grad_sup: f64,
}

impl AssembledV {
    fn new(u: &PwaFunction, cover: &CoverReport) -> Self {
        let mesh = u.mesh();
        let mut placed = Vec::with_capacity(cover.patches.len());
        let mut laminates = Vec::new();
        for p in &cover.patches {
            let ug = u.gradient(p.cell);
            let uc = u.cell_offset(p.cell);
            if cover.dim == 1 {
                laminates.push((cover.laminates[p.template].clone(), uc));
                continue;
            }
            let t = &cover.templates[p.template];
            placed.push(Placed {
                template: p.template,
                anchor: p.anchor,
                scale: p.scale,
                hull: place(2, &t.frame, &t.hull, p.anchor, p.scale),
                u_grad: ug,
                u_offset: uc,
            });
        }
        let index = (!placed.is_empty()).then(|| {
            let b = mesh.cell_polygon(0).bbox();
            let mut bb = Bbox::of_points((0..mesh.num_nodes()).map(|i| mesh.coords().get(i).unwrap()));
            bb.include(b.lo);
            let n = (placed.len() as f64).sqrt().ceil() as usize;
            let mut g = GridIndex::new(bb, (4 * n).min(2048), (4 * n).min(2048));
            for (i, p) in placed.iter().enumerate() {
                g.insert(i, &p.hull.bbox());
            }
            g
        });
        let mut grad_sup = 0.0f64;
        let bad: Vec<bool> = {
            let mut b = vec![false; mesh.num_cells()];
            for r in &cover.regions {
                for &c in &r.cells {
                    b[c] = true;
                }
            }
            b
        };
        for c in 0..mesh.num_cells() {
            if !bad[c] {
                grad_sup = grad_sup.max(norm(u.gradient(c)));
            }
        }
        for r in &cover.regions {
            if r.uncovered_measure() > 0.0 {
                grad_sup = grad_sup.max(norm(r.gradient));
            }
        }
        for t in &cover.templates {
            grad_sup = grad_sup.max(t.max_gradient_norm);
        }
        for l in &cover.laminates {
            grad_sup = grad_sup.max(l.slopes[0].abs()).max(l.slopes[1].abs());
        }
        Self { base: u.clone(), templates: cover.templates.clone(), placed, laminates, index, grad_sup }
    }

    pub fn base(&self) -> &PwaFunction {
        &self.base
    }

    pub fn num_patches(&self) -> usize {
        self.placed.len() + self.laminates.len()
    }

    /// `‖∇v‖_∞` over the pieces `v` actually uses.
    pub fn gradient_sup(&self) -> f64 {
        self.grad_sup
    }

    pub fn eval(&self, x: Vector) -> Option<f64> {
        for (lam, _) in &self.laminates {
            if x[0] > lam.a && x[0] < lam.b {
                return Some(self.base.eval(x)? + lam.relative(x[0]));
            }
        }
        if let Some(index) = &self.index {
            for &i in index.at_point(x) {
                let p = &self.placed[i];
                if p.hull.contains(x) {
                    let t = &self.templates[p.template];
                    let y = scale(t.frame.to_frame(sub(x, p.anchor)), 1.0 / p.scale);
                    return Some(dot(p.u_grad, x) + p.u_offset + p.scale * t.relative(y));
                }
            }
        }
        self.base.eval(x)
    }

    fn world_pieces(&self, max_pieces: usize) -> Result<Vec<Piece>, ConstructError> {
        let mesh = self.base.mesh();
        let too_many = || ConstructError::Invalid(format!("flattening needs more than {max_pieces} pieces"));
        let mut out: Vec<Piece> = Vec::new();
        let mut in_laminate = vec![false; mesh.num_cells()];
        for (lam, uc) in &self.laminates {
            if 2 * lam.teeth > max_pieces {
                return Err(too_many());
            }
            let h = (lam.b - lam.a) / lam.teeth as f64;
            for k in 0..lam.teeth {
                let x0 = lam.a + h * k as f64;
                let x2 = if k + 1 == lam.teeth { lam.b } else { lam.a + h * (k + 1) as f64 };
                let x1 = x0 + lam.weights[0] * h;
                let v0 = lam.xi * x0 + uc + lam.relative(x0);
                out.push(Piece { polygon: ConvexPolygon::interval(x0, x1), grad: [lam.slopes[0], 0.0], offset: v0 - lam.slopes[0] * x0 });
                let v1 = v0 + lam.slopes[0] * (x1 - x0);
                out.push(Piece { polygon: ConvexPolygon::interval(x1, x2), grad: [lam.slopes[1], 0.0], offset: v1 - lam.slopes[1] * x1 });
            }
            for c in 0..mesh.num_cells() {
                let b = mesh.cell_polygon(c).bbox();
                if b.lo[0] >= lam.a && b.hi[0] <= lam.b {
                    in_laminate[c] = true;
                }
            }
        }
        let mut by_cell: HashMap<usize, Vec<usize>> = HashMap::new();
        if let Some(index) = &self.index {
            for c in 0..mesh.num_cells() {
                let poly = mesh.cell_polygon(c);
                let hits: Vec<usize> = index
                    .query_ref(&poly.bbox())
                    .into_iter()
                    .filter(|&i| !poly.intersect(&self.placed[i].hull).is_empty())
                    .collect();
                if !hits.is_empty() {
                    by_cell.insert(c, hits);
                }
            }
        }
        for c in 0..mesh.num_cells() {
            if in_laminate[c] {
                continue;
            }
            let poly = mesh.cell_polygon(c);
            let (ug, uc) = (self.base.gradient(c), self.base.cell_offset(c));
            let Some(hits) = by_cell.get(&c) else {
                out.push(Piece { polygon: poly, grad: ug, offset: uc });
                continue;
            };
            let mut rest = vec![poly.clone()];
            for &i in hits {
                let hull = &self.placed[i].hull;
                rest = rest.into_iter().flat_map(|r| r.subtract(hull)).collect();
            }
            out.extend(rest.into_iter().map(|polygon| Piece { polygon, grad: ug, offset: uc }));
            for &i in hits {
                let p = &self.placed[i];
                let t = &self.templates[p.template];
                let mut gap = vec![p.hull.intersect(&poly)];
                for tp in &t.pieces {
                    if out.len() > max_pieces {
                        return Err(too_many());
                    }
                    let world = place(2, &t.frame, &tp.polygon, p.anchor, p.scale).intersect(&poly);
                    if world.is_empty() {
                        continue;
                    }
                    gap = gap.into_iter().flat_map(|r| r.subtract(&world)).collect();
                    let fg = t.frame.to_world(tp.grad);
                    out.push(Piece {
                        polygon: world,
                        grad: tp.world_gradient,
                        offset: uc - dot(fg, p.anchor) + p.scale * tp.offset,
                    });
                }
                out.extend(gap.into_iter().map(|polygon| Piece { polygon, grad: ug, offset: uc }));
            }
        }
        if out.len() > max_pieces {
            return Err(too_many());
        }
        Ok(out)
    }

    /// `v` on a non-conforming simplicial refinement with declared
    /// gradients; original nodes come first.
    pub fn flatten(&self, max_pieces: usize) -> Result<PwaFunction, ConstructError> {
        let mesh = self.base.mesh();
        let dim = mesh.dim();
        let pieces = self.world_pieces(max_pieces)?;
        let bounds = mesh.bounds().to_vec();
        let mut coords: Vec<Vector> = mesh.coords().to_vec();
        let mut values: Vec<f64> = Vec::with_capacity(coords.len());
        for &x in mesh.coords() {
            values.push(self.eval(x).unwrap_or(f64::NAN));
        }
        let mut boundary = mesh.boundary_mask().to_vec();
        let mut lookup: HashMap<(u64, u64), usize> =
            coords.iter().enumerate().map(|(i, p)| ((p[0].to_bits(), p[1].to_bits()), i)).collect();
        let on_box = |p: Vector| bounds.iter().enumerate().any(|(d, (lo, hi))| p[d] == *lo || p[d] == *hi);
        let mut cells = Vec::new();
        let mut grads = Vec::new();
        let mut node = |p: Vector, v: f64, coords: &mut Vec<Vector>, values: &mut Vec<f64>, boundary: &mut Vec<bool>| {
            *lookup.entry(((p[0] + 0.0).to_bits(), (p[1] + 0.0).to_bits())).or_insert_with(|| {
                coords.push(p);
                values.push(v);
                boundary.push(on_box(p));
                coords.len() - 1
            })
        };
        for p in &pieces {
            if dim == 1 {
                let b = p.polygon.bbox();
                let (a, c) = ([b.lo[0], 0.0], [b.hi[0], 0.0]);
                let ia = node(a, p.eval(a), &mut coords, &mut values, &mut boundary);
                let ic = node(c, p.eval(c), &mut coords, &mut values, &mut boundary);
                cells.extend_from_slice(&[ia, ic]);
                grads.push(p.grad);
            } else {
                for t in p.polygon.triangles() {
                    for q in t {
                        cells.push(node(q, p.eval(q), &mut coords, &mut values, &mut boundary));
                    }
                    grads.push(p.grad);
                }
            }
        }
        let refined = SimplicialMesh::from_parts(dim, coords, cells, boundary, bounds, false)?;
        Ok(PwaFunction::with_gradients(Arc::new(refined), values, grads)?)
    }
}

#[derive(Clone, Debug)]
pub struct Assembly {
    pub v: AssembledV,
    pub cover: CoverReport,
    /// Energies over good cells, uncovered parts, then template pieces.
    pub energy: EnergyReport,
    pub ledger: Ledger,
    pub fss_u: f64,
    pub certified: bool,
}

/// Builds `v` and certifies `F(v) ≤ F**(u) + ε`; on failure the assembly
/// is returned inside [`ConstructError::BudgetExceeded`].
pub fn assemble_v(
    u: &PwaFunction,
    f: &SampledLagrangian,
    env: &ConvexEnvelope,
    opts: &ConstructOptions,
) -> Result<Assembly, ConstructError> {
    let cover = vitali_cover(u, f, env, opts)?;
    let integrand = SampledIntegrand::new(f, env);
    let mesh = u.mesh();
    let fss_u = energy(u, &integrand)?.fss_total;

    let mut bad = vec![false; mesh.num_cells()];
    for r in &cover.regions {
        for &c in &r.cells {
            bad[c] = true;
        }
    }
    let mut entries: Vec<(f64, Vector)> = Vec::new();
    for c in 0..mesh.num_cells() {
        if !bad[c] {
            entries.push((mesh.cell_measure(c), u.gradient(c)));
        }
    }
    let n_good = entries.len();
    let mut uncovered_measure = 0.0;
    let mut uncovered_energy = 0.0;
    for r in &cover.regions {
        let m = r.uncovered_measure();
        if cover.dim == 1 || m == 0.0 {
            continue;
        }
        let fx = integrand.f(r.gradient)?;
        if fx == f64::INFINITY {
            return Err(ConstructError::ResidualUnchargeable { gradient: r.gradient, measure: m });
        }
        uncovered_measure += m;
        uncovered_energy += m * fx;
        entries.push((m, r.gradient));
    }
    let mut factor = vec![0.0; cover.templates.len()];
    for p in &cover.patches {
        if cover.dim == 2 {
            factor[p.template] += cover.templates[p.template].measure_factor(p.scale);
        }
    }
    for (t, k) in cover.templates.iter().zip(&factor) {
        if *k > 0.0 {
            entries.extend(t.pieces.iter().map(|p| (k * p.polygon.area(), p.world_gradient)));
        }
    }
    for l in &cover.laminates {
        let len = l.b - l.a;
        entries.push((l.weights[0] * len, [l.slopes[0], 0.0]));
        entries.push((l.weights[1] * len, [l.slopes[1], 0.0]));
    }
    let report = EnergyReport::from_regions(entries, &integrand)?;
    let good_energy = report.cells[..n_good].iter().fold(0.0, |acc, c| acc + c.measure * c.f_value);
    let sum = |g: fn(&super::cover::PatchRecord) -> f64| cover.patches.iter().fold(0.0, |acc, p| acc + g(p));
    let e_share = cover.e_measure / cover.lambda_omega;
    let ledger = Ledger {
        f_v: report.f_total,
        fss_u,
        epsilon: opts.epsilon,
        good_energy,
        core_energy: sum(|p| p.core_energy),
        cap_energy: sum(|p| p.cap_energy),
        flux_term: sum(|p| p.flux_term),
        cap_measure: sum(|p| p.cap_measure),
        residual_measure: sum(|p| p.residual_measure),
        uncovered_measure,
        uncovered_energy,
        e_measure: cover.e_measure,
        bad_measure: cover.bad_measure,
        cap_energy_budget: opts.epsilon / 3.0 * e_share,
        cap_measure_budget: cover.delta * e_share,
        flux_budget: opts.epsilon / 3.0 * e_share,
        certified: report.f_total <= fss_u + opts.epsilon,
    };
    let certified = ledger.certified;
    let assembly = Assembly { v: AssembledV::new(u, &cover), cover, energy: report, ledger, fss_u, certified };
    if !certified {
        return Err(ConstructError::BudgetExceeded {
            f_v: assembly.ledger.f_v,
            bound: fss_u + opts.epsilon,
            assembly: Box::new(assembly),
        });
    }
    Ok(assembly)
}
