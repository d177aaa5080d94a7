//! Bad regions of `u` and their packing by patches.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::packing::{pack, RegionGeom};
use super::params::delta_modulus;
use super::patch::PatchKind;
use super::template::{Template, TemplateInputs};
use super::{ConstructError, ConstructOptions};
use crate::envelope::{caratheodory_witness, simplex_witness, CaratheodoryWitness, ConvexEnvelope, SampledLagrangian, SimplexWitness, Vector};
use crate::geometry::ConvexPolygon;
use crate::mesh::{Integrand, PwaFunction, SampledIntegrand};

/// 1D exact sawtooth on `[a, b]`: each of `teeth` equal sub-intervals has
/// slope `slopes[0]` on its first `weights[0]` fraction, then `slopes[1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Laminate {
    pub region: usize,
    pub a: f64,
    pub b: f64,
    pub xi: f64,
    pub teeth: usize,
    pub slopes: [f64; 2],
    pub weights: [f64; 2],
    pub values: [f64; 2],
}

impl Laminate {
    pub fn tooth_depth(&self) -> f64 {
        self.weights[0] * (self.slopes[0] - self.xi).abs() * (self.b - self.a) / self.teeth as f64
    }

    /// `v - u` at `x ∈ [a, b]`.
    pub fn relative(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        let h = (self.b - self.a) / self.teeth as f64;
        let k = (((x - self.a) / h).floor() as usize).min(self.teeth - 1);
        let t = x - (self.a + h * k as f64);
        let split = self.weights[0] * h;
        if t <= split {
            (self.slopes[0] - self.xi) * t
        } else {
            (self.slopes[0] - self.xi) * split + (self.slopes[1] - self.xi) * (t - split)
        }
    }

    pub fn slope_at(&self, x: f64) -> f64 {
        let h = (self.b - self.a) / self.teeth as f64;
        let k = (((x - self.a) / h).floor().max(0.0) as usize).min(self.teeth - 1);
        let t = x - (self.a + h * k as f64);
        if t <= self.weights[0] * h {
            self.slopes[0]
        } else {
            self.slopes[1]
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchRecord {
    pub id: usize,
    pub region: usize,
    /// Mesh cell holding the anchor.
    pub cell: usize,
    pub kind: PatchKind,
    /// Index into [`CoverReport::templates`] or [`CoverReport::laminates`].
    pub template: usize,
    pub anchor: Vector,
    pub scale: f64,
    pub round: usize,
    pub core_energy: f64,
    pub cap_energy: f64,
    pub flux_term: f64,
    pub cap_measure: f64,
    pub residual_measure: f64,
    pub e_measure: f64,
    pub hull_measure: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionRecord {
    pub id: usize,
    pub cells: Vec<usize>,
    pub gradient: Vector,
    pub measure: f64,
    pub kind: PatchKind,
    pub template: usize,
    pub hull_measure: f64,
    pub e_measure: f64,
    pub rounds: usize,
    /// Patch ids `first..first + count`.
    pub patches: (usize, usize),
}

impl RegionRecord {
    /// `λ(region) - Σ λ(E_n)`, left at gradient `ξ`.
    pub fn uncovered_measure(&self) -> f64 {
        (self.measure - self.e_measure).max(0.0)
    }

    pub fn covered_fraction(&self) -> f64 {
        self.hull_measure / self.measure
    }
}

#[derive(Clone, Debug)]
pub struct CoverReport {
    pub dim: usize,
    pub epsilon: f64,
    pub lambda_omega: f64,
    pub delta: f64,
    pub radius: f64,
    pub simplex: Option<SimplexWitness>,
    pub regions: Vec<RegionRecord>,
    pub patches: Vec<PatchRecord>,
    pub templates: Vec<Arc<Template>>,
    pub laminates: Vec<Laminate>,
    /// `λ(Ω̃)`, the measure of the non-contact cells.
    pub bad_measure: f64,
    pub hull_measure: f64,
    pub e_measure: f64,
}

impl CoverReport {
    /// `λ(Ω̃ \ ∪ F_n)`.
    pub fn residual_measure(&self) -> f64 {
        (self.bad_measure - self.hull_measure).max(0.0)
    }

    pub fn covered_fraction(&self) -> f64 {
        if self.bad_measure == 0.0 {
            1.0
        } else {
            self.hull_measure / self.bad_measure
        }
    }
}

fn key(g: Vector) -> (u64, u64) {
    ((g[0] + 0.0).to_bits(), (g[1] + 0.0).to_bits())
}

/// Maximal edge-connected unions of non-contact cells with equal gradient.
fn regions(u: &PwaFunction, bad: &[bool]) -> Vec<Vec<usize>> {
    let mesh = u.mesh();
    let n = mesh.num_cells();
    let mut adj: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for c in 0..n {
        if !bad[c] {
            continue;
        }
        let v = mesh.cell(c);
        let faces: Vec<(usize, usize)> = if mesh.dim() == 1 {
            vec![(v[0], v[0]), (v[1], v[1])]
        } else {
            vec![(v[0], v[1]), (v[1], v[2]), (v[2], v[0])]
        };
        for (a, b) in faces {
            adj.entry((a.min(b), a.max(b))).or_default().push(c);
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if !bad[start] || seen[start] {
            continue;
        }
        let g = key(u.gradient(start));
        let mut stack = vec![start];
        let mut group = Vec::new();
        seen[start] = true;
        while let Some(c) = stack.pop() {
            group.push(c);
            let v = mesh.cell(c);
            let faces: Vec<(usize, usize)> = if mesh.dim() == 1 {
                vec![(v[0], v[0]), (v[1], v[1])]
            } else {
                vec![(v[0], v[1]), (v[1], v[2]), (v[2], v[0])]
            };
            for (a, b) in faces {
                for &d in &adj[&(a.min(b), a.max(b))] {
                    if !seen[d] && key(u.gradient(d)) == g {
                        seen[d] = true;
                        stack.push(d);
                    }
                }
            }
        }
        group.sort_unstable();
        out.push(group);
    }
    out
}

fn laminate(
    region: usize,
    u: &PwaFunction,
    cells: &[usize],
    w: &CaratheodoryWitness,
    epsilon: f64,
) -> Result<Laminate, ConstructError> {
    let mesh = u.mesh();
    let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
    for &c in cells {
        for &v in mesh.cell(c) {
            a = a.min(mesh.node(v)[0]);
            b = b.max(mesh.node(v)[0]);
        }
    }
    if w.points.len() != 2 {
        return Err(ConstructError::Invalid(format!("1D witness has {} points", w.points.len())));
    }
    let xi = w.point[0];
    let lam = Laminate {
        region,
        a,
        b,
        xi,
        teeth: 1,
        slopes: [w.points[0][0], w.points[1][0]],
        weights: [w.weights[0], w.weights[1]],
        values: [w.values[0], w.values[1]],
    };
    let mut teeth = 1usize;
    while teeth < (1 << 20) && (Laminate { teeth, ..lam.clone() }).tooth_depth() > epsilon {
        teeth *= 2;
    }
    Ok(Laminate { teeth, ..lam })
}

/// Packs every bad region of `u` with patches until hulls cover
/// `theta_cover` of it. 1D regions get one exact laminate each.
pub fn vitali_cover(
    u: &PwaFunction,
    f: &SampledLagrangian,
    env: &ConvexEnvelope,
    opts: &ConstructOptions,
) -> Result<CoverReport, ConstructError> {
    if !(opts.epsilon > 0.0) || !opts.epsilon.is_finite() {
        return Err(ConstructError::BadBudget(opts.epsilon));
    }
    let mesh = u.mesh();
    let dim = mesh.dim();
    if f.dim() != dim {
        return Err(ConstructError::Invalid(format!("mesh is {dim}D but the Lagrangian is {}D", f.dim())));
    }
    let integrand = SampledIntegrand::new(f, env);
    let n = mesh.num_cells();
    let mut witnesses: Vec<CaratheodoryWitness> = Vec::new();
    let mut by_grad: HashMap<(u64, u64), usize> = HashMap::new();
    let mut bad = vec![false; n];
    for c in 0..n {
        let g = u.gradient(c);
        let id = match by_grad.get(&key(g)) {
            Some(&id) => id,
            None => {
                let w = caratheodory_witness(f, env, g)?;
                witnesses.push(w);
                by_grad.insert(key(g), witnesses.len() - 1);
                witnesses.len() - 1
            }
        };
        bad[c] = !witnesses[id].contact;
    }
    let lambda_omega = mesh.domain_measure();
    let delta = delta_modulus(u, &integrand, opts.epsilon)?;
    let radius = u.gradient_sup() + 1.0;
    let groups = regions(u, &bad);
    let bad_measure: f64 = (0..n).filter(|&c| bad[c]).map(|c| mesh.cell_measure(c)).sum();
    let mut report = CoverReport {
        dim,
        epsilon: opts.epsilon,
        lambda_omega,
        delta,
        radius,
        simplex: None,
        regions: Vec::new(),
        patches: Vec::new(),
        templates: Vec::new(),
        laminates: Vec::new(),
        bad_measure,
        hull_measure: 0.0,
        e_measure: 0.0,
    };
    if groups.is_empty() {
        return Ok(report);
    }
    let witness_of = |c: usize| &witnesses[by_grad[&key(u.gradient(c))]];

    if dim == 1 {
        for (rid, cells) in groups.into_iter().enumerate() {
            let w = witness_of(cells[0]);
            let lam = laminate(rid, u, &cells, w, opts.epsilon)?;
            let len = lam.b - lam.a;
            let core = len * (lam.weights[0] * lam.values[0] + lam.weights[1] * lam.values[1]);
            let measure: f64 = cells.iter().map(|&c| mesh.cell_measure(c)).sum();
            let id = report.patches.len();
            report.patches.push(PatchRecord {
                id,
                region: rid,
                cell: cells[0],
                kind: PatchKind::Laminate,
                template: report.laminates.len(),
                anchor: [0.5 * (lam.a + lam.b), 0.0],
                scale: len,
                round: 0,
                core_energy: core,
                cap_energy: 0.0,
                flux_term: 0.0,
                cap_measure: 0.0,
                residual_measure: 0.0,
                e_measure: len,
                hull_measure: len,
            });
            report.regions.push(RegionRecord {
                id: rid,
                gradient: w.point,
                measure,
                kind: PatchKind::Laminate,
                template: report.laminates.len(),
                hull_measure: len,
                e_measure: measure,
                rounds: 1,
                patches: (id, 1),
                cells,
            });
            report.laminates.push(lam);
            report.hull_measure += len;
            report.e_measure += measure;
        }
        return Ok(report);
    }

    let needs_simplex = groups.iter().any(|g| witness_of(g[0]).k == 1);
    if needs_simplex {
        report.simplex = Some(simplex_witness(f, env, radius)?);
    }
    let inputs = TemplateInputs {
        dim,
        epsilon: opts.epsilon,
        lambda_omega,
        delta,
        mode: opts.mode,
        rho: opts.rho,
        cellina_rounds: opts.cellina_rounds,
    };
    let mut class_of_region = Vec::with_capacity(groups.len());
    let mut classes: Vec<usize> = Vec::new();
    let mut class_index: HashMap<usize, usize> = HashMap::new();
    for g in &groups {
        let wid = by_grad[&key(u.gradient(g[0]))];
        let t = *class_index.entry(wid).or_insert_with(|| {
            classes.push(wid);
            classes.len() - 1
        });
        class_of_region.push(t);
    }
    let simplex = report.simplex.as_ref();
    let templates: Vec<Template> = classes
        .par_iter()
        .map(|&wid| Template::build(&witnesses[wid], simplex, &integrand as &dyn Integrand, &inputs))
        .collect::<Result<_, _>>()?;
    let templates: Vec<Arc<Template>> = templates.into_iter().map(Arc::new).collect();

    let packed: Vec<_> = groups
        .par_iter()
        .enumerate()
        .map(|(rid, cells)| {
            let t = &templates[class_of_region[rid]];
            let polys: Vec<ConvexPolygon> = cells
                .iter()
                .map(|&c| {
                    let p = mesh.cell_polygon(c);
                    let fr = t.frame;
                    p.linear_map([fr.e1[0], fr.e2[0]], [fr.e1[1], fr.e2[1]])
                })
                .collect();
            let geom = RegionGeom::new(cells.clone(), polys);
            let res = pack(&geom, rid, &t.support, &t.hull, opts.theta_cover, opts.max_rounds, opts.candidate_cap)?;
            Ok::<_, ConstructError>((geom.measure, res))
        })
        .collect::<Result<_, _>>()?;

    for (rid, (cells, (measure, res))) in groups.into_iter().zip(packed).enumerate() {
        let tid = class_of_region[rid];
        let t = &templates[tid];
        let first = report.patches.len();
        let mut e_measure = 0.0;
        for pl in &res.placements {
            let k = t.measure_factor(pl.scale);
            let anchor = t.frame.to_world(pl.anchor);
            e_measure += k * t.e_measure;
            report.patches.push(PatchRecord {
                id: report.patches.len(),
                region: rid,
                cell: pl.cell,
                kind: t.kind,
                template: tid,
                anchor,
                scale: pl.scale,
                round: pl.round,
                core_energy: k * t.core_energy,
                cap_energy: k * t.cap_energy,
                flux_term: k * t.flux,
                cap_measure: k * t.cap_measure,
                residual_measure: k * t.residual_measure,
                e_measure: k * t.e_measure,
                hull_measure: k * t.hull.area(),
            });
        }
        report.hull_measure += res.hull_measure;
        report.e_measure += e_measure;
        report.regions.push(RegionRecord {
            id: rid,
            cells,
            gradient: t.xi,
            measure,
            kind: t.kind,
            template: tid,
            hull_measure: res.hull_measure,
            e_measure,
            rounds: res.rounds,
            patches: (first, res.placements.len()),
        });
    }
    report.templates = templates;
    Ok(report)
}
