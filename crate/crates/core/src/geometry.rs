//! Planar convex-polygon kernel used by the overlay, packing and flux code.
//!
//! One-dimensional geometry is embedded into the plane as unit-height strips
//! `[a, b] × [0, 1]`, so every measure computed here is also a valid length
//! for 1D inputs.

use robust::{orient2d, Coord};

pub type Point = [f64; 2];

/// Relative threshold under which a clipped polygon is treated as empty.
pub const EMPTY_REL: f64 = 1e-13;

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Exact orientation sign of `(a, b, c)`: positive when counter-clockwise.
pub fn orientation(a: Point, b: Point, c: Point) -> f64 {
    orient2d(
        Coord { x: a[0], y: a[1] },
        Coord { x: b[0], y: b[1] },
        Coord { x: c[0], y: c[1] },
    )
}

/// Closed half-plane `{x : normal · x <= offset}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane {
    pub normal: Point,
    pub offset: f64,
}

impl HalfPlane {
    pub fn new(normal: Point, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// Half-plane where the affine map `grad · x + c` is `<= 0`.
    pub fn below_affine(grad: Point, c: f64) -> Self {
        Self { normal: grad, offset: -c }
    }

    pub fn complement(&self) -> Self {
        Self { normal: [-self.normal[0], -self.normal[1]], offset: -self.offset }
    }

    #[inline]
    pub fn eval(&self, p: Point) -> f64 {
        dot(self.normal, p) - self.offset
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bbox {
    pub lo: Point,
    pub hi: Point,
}

impl Bbox {
    pub fn empty() -> Self {
        Self { lo: [f64::INFINITY; 2], hi: [f64::NEG_INFINITY; 2] }
    }

    pub fn of_points<'a>(pts: impl IntoIterator<Item = &'a Point>) -> Self {
        let mut b = Self::empty();
        for p in pts {
            b.include(*p);
        }
        b
    }

    pub fn include(&mut self, p: Point) {
        for d in 0..2 {
            self.lo[d] = self.lo[d].min(p[d]);
            self.hi[d] = self.hi[d].max(p[d]);
        }
    }

    pub fn overlaps(&self, other: &Bbox) -> bool {
        self.lo[0] < other.hi[0]
            && other.lo[0] < self.hi[0]
            && self.lo[1] < other.hi[1]
            && other.lo[1] < self.hi[1]
    }

    pub fn width(&self) -> f64 {
        self.hi[0] - self.lo[0]
    }

    pub fn height(&self) -> f64 {
        self.hi[1] - self.lo[1]
    }
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Builds a polygon from vertices listed in either orientation.
    pub fn new(mut vertices: Vec<Point>) -> Self {
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Self { vertices }
    }

    pub fn from_box(lo: Point, hi: Point) -> Self {
        Self { vertices: vec![lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]] }
    }

    /// Unit-height strip standing in for the interval `[a, b]`.
    pub fn interval(a: f64, b: f64) -> Self {
        Self::from_box([a.min(b), 0.0], [a.max(b), 1.0])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3 || self.area() <= 0.0
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).max(0.0)
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len();
        let a = signed_area(&self.vertices);
        if n < 3 || a <= 0.0 {
            let s = self.vertices.iter().fold([0.0, 0.0], |acc, p| add(acc, *p));
            return scale(s, 1.0 / n.max(1) as f64);
        }
        let o = self.vertices[0];
        let mut c = [0.0, 0.0];
        for i in 0..n {
            let p = sub(self.vertices[i], o);
            let q = sub(self.vertices[(i + 1) % n], o);
            let w = cross(p, q);
            c[0] += (p[0] + q[0]) * w;
            c[1] += (p[1] + q[1]) * w;
        }
        add(o, scale(c, 1.0 / (6.0 * a)))
    }

    pub fn bbox(&self) -> Bbox {
        Bbox::of_points(self.vertices.iter())
    }

    /// Largest absolute coordinate, used to scale tolerances.
    fn magnitude(&self) -> f64 {
        self.vertices.iter().fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()))
    }

    /// Edge half-planes, one per edge, in vertex order.
    pub fn halfplanes(&self) -> Vec<HalfPlane> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let p = self.vertices[i];
                let q = self.vertices[(i + 1) % n];
                let e = sub(q, p);
                let normal = [e[1], -e[0]];
                HalfPlane::new(normal, dot(normal, p))
            })
            .collect()
    }

    /// Sutherland–Hodgman clip against one half-plane.
    pub fn clip(&self, hp: &HalfPlane) -> ConvexPolygon {
        let n = self.vertices.len();
        if n == 0 {
            return self.clone();
        }
        let eps = 1e-14 * (hp.offset.abs() + norm(hp.normal) * self.magnitude());
        let d: Vec<f64> = self.vertices.iter().map(|p| hp.eval(*p)).collect();
        if d.iter().all(|&v| v <= eps) {
            return self.clone();
        }
        if d.iter().all(|&v| v >= -eps) {
            return ConvexPolygon::default();
        }
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let j = (i + 1) % n;
            let (p, q) = (self.vertices[i], self.vertices[j]);
            let (dp, dq) = (d[i], d[j]);
            if dp <= eps {
                out.push(p);
            }
            if (dp < -eps && dq > eps) || (dp > eps && dq < -eps) {
                let t = dp / (dp - dq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        out.dedup();
        if out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        let poly = ConvexPolygon { vertices: out };
        if poly.len() < 3 || poly.area() <= EMPTY_REL * self.area() {
            ConvexPolygon::default()
        } else {
            poly
        }
    }

    pub fn clip_all<'a>(&self, hps: impl IntoIterator<Item = &'a HalfPlane>) -> ConvexPolygon {
        let mut p = self.clone();
        for hp in hps {
            if p.is_empty() {
                break;
            }
            p = p.clip(hp);
        }
        p
    }

    pub fn intersect(&self, other: &ConvexPolygon) -> ConvexPolygon {
        if self.is_empty() || other.is_empty() || !self.bbox().overlaps(&other.bbox()) {
            return ConvexPolygon::default();
        }
        self.clip_all(other.halfplanes().iter())
    }

    /// `self \ other` as pairwise interior-disjoint convex pieces.
    pub fn subtract(&self, other: &ConvexPolygon) -> Vec<ConvexPolygon> {
        if other.is_empty() || !self.bbox().overlaps(&other.bbox()) {
            return vec![self.clone()];
        }
        let mut out = Vec::new();
        let mut rest = self.clone();
        for hp in other.halfplanes() {
            if rest.is_empty() {
                break;
            }
            let outside = rest.clip(&hp.complement());
            if !outside.is_empty() {
                out.push(outside);
            }
            rest = rest.clip(&hp);
        }
        out
    }

    /// Closed-containment test with a relative tolerance.
    pub fn contains(&self, p: Point) -> bool {
        let eps = 1e-12 * (self.magnitude() + p[0].abs() + p[1].abs()).max(1e-300);
        self.halfplanes().iter().all(|hp| hp.eval(p) <= eps * norm(hp.normal))
    }

    /// True when every vertex of `inner` lies in `self`.
    pub fn contains_polygon(&self, inner: &ConvexPolygon) -> bool {
        let hps = self.halfplanes();
        let eps = 1e-12 * (self.magnitude() + inner.magnitude()).max(1e-300);
        inner
            .vertices
            .iter()
            .all(|p| hps.iter().all(|hp| hp.eval(*p) <= eps * norm(hp.normal)))
    }

    /// `max_{v in self} dir · v`.
    pub fn support(&self, dir: Point) -> f64 {
        self.vertices.iter().map(|p| dot(dir, *p)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Image under `x ↦ origin + s · x`.
    pub fn homothety(&self, origin: Point, s: f64) -> ConvexPolygon {
        ConvexPolygon {
            vertices: self.vertices.iter().map(|p| add(origin, scale(*p, s))).collect(),
        }
    }

    /// Image under an orientation-preserving linear map (columns `c0`, `c1`).
    pub fn linear_map(&self, c0: Point, c1: Point) -> ConvexPolygon {
        ConvexPolygon::new(
            self.vertices
                .iter()
                .map(|p| add(scale(c0, p[0]), scale(c1, p[1])))
                .collect(),
        )
    }

    /// Fan triangulation from the first vertex.
    pub fn triangles(&self) -> Vec<[Point; 3]> {
        let v = &self.vertices;
        (1..v.len().saturating_sub(1)).map(|i| [v[0], v[i], v[i + 1]]).collect()
    }
}

pub fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    let o = v[0];
    let mut s = 0.0;
    for i in 1..n - 1 {
        s += cross(sub(v[i], o), sub(v[i + 1], o));
    }
    0.5 * s
}

pub fn overlap_area(a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
    a.intersect(b).area()
}

/// Convex hull by monotone chain with exact orientation predicates.
pub fn convex_hull(points: &[Point]) -> ConvexPolygon {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return ConvexPolygon { vertices: pts };
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && orientation(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orientation(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    ConvexPolygon { vertices: lower }
}

/// Whether the segment `[a, b]` passes through the open interior of `poly`.
pub fn segment_crosses_interior(a: Point, b: Point, poly: &ConvexPolygon) -> bool {
    let d = sub(b, a);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let eps = 1e-12 * (poly.magnitude() + a[0].abs() + a[1].abs() + b[0].abs() + b[1].abs());
    for hp in poly.halfplanes() {
        // strict interior: normal · x < offset - eps·|normal|
        let lim = hp.offset - eps * norm(hp.normal);
        let na = dot(hp.normal, a) - lim;
        let nd = dot(hp.normal, d);
        if nd.abs() < 1e-300 {
            if na >= 0.0 {
                return false;
            }
        } else {
            let t = -na / nd;
            if nd > 0.0 {
                t1 = t1.min(t);
            } else {
                t0 = t0.max(t);
            }
        }
        if t0 >= t1 {
            return false;
        }
    }
    t1 - t0 > 1e-12
}

/// Uniform bucket grid over bounding boxes.
#[derive(Clone, Debug)]
pub struct GridIndex {
    bbox: Bbox,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl GridIndex {
    pub fn new(bbox: Bbox, nx: usize, ny: usize) -> Self {
        let nx = nx.max(1);
        let ny = ny.max(1);
        Self { bbox, nx, ny, buckets: vec![Vec::new(); nx * ny], stamp: Vec::new(), epoch: 0 }
    }

    fn range(&self, b: &Bbox) -> (usize, usize, usize, usize) {
        let w = self.bbox.width().max(1e-300);
        let h = self.bbox.height().max(1e-300);
        let f = |v: f64, lo: f64, ext: f64, n: usize| -> usize {
            let t = ((v - lo) / ext * n as f64).floor();
            if t < 0.0 {
                0
            } else {
                (t as usize).min(n - 1)
            }
        };
        (
            f(b.lo[0], self.bbox.lo[0], w, self.nx),
            f(b.hi[0], self.bbox.lo[0], w, self.nx),
            f(b.lo[1], self.bbox.lo[1], h, self.ny),
            f(b.hi[1], self.bbox.lo[1], h, self.ny),
        )
    }

    pub fn insert(&mut self, id: usize, b: &Bbox) {
        let (i0, i1, j0, j1) = self.range(b);
        for j in j0..=j1 {
            for i in i0..=i1 {
                self.buckets[j * self.nx + i].push(id);
            }
        }
        if self.stamp.len() <= id {
            self.stamp.resize(id + 1, 0);
        }
    }

    /// Ids stored in the bucket holding `p` (read-only; may be empty).
    pub fn at_point(&self, p: Point) -> &[usize] {
        let (i, _, j, _) = self.range(&Bbox { lo: p, hi: p });
        &self.buckets[j * self.nx + i]
    }

    /// Read-only variant of [`GridIndex::query`].
    pub fn query_ref(&self, b: &Bbox) -> Vec<usize> {
        let (i0, i1, j0, j1) = self.range(b);
        let mut out = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.extend_from_slice(&self.buckets[j * self.nx + i]);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Distinct ids whose buckets meet `b`, in ascending order.
    pub fn query(&mut self, b: &Bbox) -> Vec<usize> {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let (i0, i1, j0, j1) = self.range(b);
        let mut out = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &id in &self.buckets[j * self.nx + i] {
                    if self.stamp[id] != self.epoch {
                        self.stamp[id] = self.epoch;
                        out.push(id);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}
