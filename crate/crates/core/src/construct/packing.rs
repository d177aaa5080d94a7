//! Greedy lattice packing of patch hulls into a region, finest scale last.

use super::ConstructError;
use crate::envelope::Vector;
use crate::geometry::{convex_hull, overlap_area, sub, Bbox, ConvexPolygon, GridIndex};

/// A union of cells expressed in a patch frame.
pub(crate) struct RegionGeom {
    pub cells: Vec<usize>,
    pub polys: Vec<ConvexPolygon>,
    convex: Option<ConvexPolygon>,
    index: GridIndex,
    pub measure: f64,
    pub bbox: Bbox,
}

impl RegionGeom {
    pub fn new(cells: Vec<usize>, polys: Vec<ConvexPolygon>) -> Self {
        let pts: Vec<Vector> = polys.iter().flat_map(|p| p.vertices().iter().copied()).collect();
        let bbox = Bbox::of_points(pts.iter());
        let measure: f64 = polys.iter().map(ConvexPolygon::area).sum();
        let hull = convex_hull(&pts);
        let convex = (hull.area() <= measure * (1.0 + 1e-12)).then_some(hull);
        let n = (polys.len() as f64).sqrt().ceil() as usize;
        let mut index = GridIndex::new(bbox.clone(), n.max(1), n.max(1));
        for (i, p) in polys.iter().enumerate() {
            index.insert(i, &p.bbox());
        }
        Self { cells, polys, convex, index, measure, bbox }
    }

    pub fn contains(&self, p: &ConvexPolygon) -> bool {
        if let Some(h) = &self.convex {
            return h.contains_polygon(p);
        }
        let target = p.area();
        let got: f64 = self
            .index
            .query_ref(&p.bbox())
            .into_iter()
            .map(|i| overlap_area(p, &self.polys[i]))
            .sum();
        got >= target * (1.0 - 1e-9)
    }

    /// Mesh cell id containing `y`, if any.
    pub fn cell_at(&self, y: Vector) -> Option<usize> {
        self.index
            .at_point(y)
            .iter()
            .copied()
            .filter(|&i| self.polys[i].contains(y))
            .min()
            .map(|i| self.cells[i])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Placement {
    pub anchor: Vector,
    pub scale: f64,
    pub round: usize,
    pub cell: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct PackResult {
    pub placements: Vec<Placement>,
    pub hull_measure: f64,
    pub rounds: usize,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn pack(
    region: &RegionGeom,
    region_id: usize,
    support: &ConvexPolygon,
    hull: &ConvexPolygon,
    theta: f64,
    max_rounds: usize,
    candidate_cap: usize,
) -> Result<PackResult, ConstructError> {
    let fb = &region.bbox;
    let sb = support.bbox();
    let hb = hull.bbox();
    let target = theta * region.measure;
    let s0 = (fb.width() / sb.width()).min(fb.height() / sb.height());
    let mut out = PackResult { placements: Vec::new(), hull_measure: 0.0, rounds: 0 };
    if !(s0 > 0.0) || !s0.is_finite() {
        return Err(ConstructError::NoRoom(format!("region {region_id} is degenerate")));
    }
    let nx = ((fb.width() / (hb.width() * s0)).ceil() as usize).clamp(1, 1024);
    let ny = ((fb.height() / (hb.height() * s0)).ceil() as usize).clamp(1, 1024);
    let mut index = GridIndex::new(fb.clone(), nx, ny);
    let mut hulls: Vec<ConvexPolygon> = Vec::new();
    let mut examined = 0usize;
    for round in 0..max_rounds {
        if out.hull_measure >= target {
            break;
        }
        out.rounds = round + 1;
        let s = s0 / 2f64.powi(round as i32);
        let (hx, hy) = (hb.width() * s, hb.height() * s);
        let ci = (fb.width() / hx).ceil() as usize;
        let cj = (fb.height() / hy).ceil() as usize;
        examined = examined.saturating_add(ci.saturating_mul(cj));
        if examined > candidate_cap {
            return Err(ConstructError::CoverageStalled {
                region: region_id,
                covered: out.hull_measure / region.measure,
                target: theta,
            });
        }
        let earlier = hulls.len();
        for j in 0..cj {
            for i in 0..ci {
                let ll = [fb.lo[0] + hx * i as f64, fb.lo[1] + hy * j as f64];
                let anchor = sub(ll, [hb.lo[0] * s, hb.lo[1] * s]);
                if index.at_point(anchor).iter().any(|&k| k < earlier && hulls[k].contains(anchor)) {
                    continue;
                }
                let Some(cell) = region.cell_at(anchor) else { continue };
                let sp = support.homothety(anchor, s);
                if !region.contains(&sp) {
                    continue;
                }
                let hp = hull.homothety(anchor, s);
                let area = hp.area();
                let clash = index
                    .query(&hp.bbox())
                    .into_iter()
                    .any(|k| k < earlier && overlap_area(&hp, &hulls[k]) > 1e-9 * area);
                if clash {
                    continue;
                }
                index.insert(hulls.len(), &hp.bbox());
                hulls.push(hp);
                out.hull_measure += area;
                out.placements.push(Placement { anchor, scale: s, round, cell });
            }
        }
    }
    if out.hull_measure < target {
        return Err(ConstructError::CoverageStalled {
            region: region_id,
            covered: out.hull_measure / region.measure,
            target: theta,
        });
    }
    Ok(out)
}
