//! 2D convex geometry for rate regions: pentagons, hulls, supports,
//! inclusion tests. Coordinates are `(Rc, R1)` pairs in bits, confined to the
//! nonnegative quadrant.

use crate::region::RateBounds;
use crate::scalar::{cast, Real};

/// Default tolerance for inclusion tests, in bits.
pub const DEFAULT_TOL: f64 = 1e-9;

const VERTEX_DEDUP_TOL: f64 = 1e-12;

/// A convex polygon of rate pairs, counterclockwise, possibly degenerate
/// (empty, a point, or a segment).
#[derive(Debug, Clone, PartialEq)]
pub struct RatePolygon<F: Real> {
    vertices: Vec<(F, F)>,
}

impl<F: Real> RatePolygon<F> {
    pub fn empty() -> Self {
        Self { vertices: vec![] }
    }

    /// Builds the polygon as the convex hull of the given points.
    pub fn from_points(points: &[(F, F)]) -> Self {
        hull(points)
    }

    pub fn vertices(&self) -> &[(F, F)] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Support value `max_{x in poly} <x, dir>`; negative infinity when empty.
    pub fn support(&self, dir: (F, F)) -> F {
        self.vertices
            .iter()
            .map(|&(x, y)| x * dir.0 + y * dir.1)
            .fold(F::neg_infinity(), F::max)
    }

    /// Whether every vertex of `other` lies inside this polygon, with slack
    /// at least `-tol` against each bounding halfplane.
    pub fn includes(&self, other: &RatePolygon<F>, tol: F) -> bool {
        if other.is_empty() {
            return true;
        }
        match self.vertices.len() {
            0 => false,
            1 => {
                let p = self.vertices[0];
                other
                    .vertices
                    .iter()
                    .all(|&q| dist_point(p, q) <= tol)
            }
            2 => {
                let (a, b) = (self.vertices[0], self.vertices[1]);
                other
                    .vertices
                    .iter()
                    .all(|&q| dist_segment(a, b, q) <= tol)
            }
            _ => {
                let n = self.vertices.len();
                other.vertices.iter().all(|&q| {
                    (0..n).all(|i| {
                        let a = self.vertices[i];
                        let b = self.vertices[(i + 1) % n];
                        // inward slack of q against edge a->b (CCW: inside is left)
                        cross(a, b, q) >= -tol * edge_len(a, b)
                    })
                })
            }
        }
    }
}

fn cross<F: Real>(o: (F, F), a: (F, F), b: (F, F)) -> F {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn edge_len<F: Real>(a: (F, F), b: (F, F)) -> F {
    ((b.0 - a.0) * (b.0 - a.0) + (b.1 - a.1) * (b.1 - a.1)).sqrt()
}

fn dist_point<F: Real>(a: (F, F), b: (F, F)) -> F {
    edge_len(a, b)
}

fn dist_segment<F: Real>(a: (F, F), b: (F, F), q: (F, F)) -> F {
    let len2 = (b.0 - a.0) * (b.0 - a.0) + (b.1 - a.1) * (b.1 - a.1);
    if len2 == F::zero() {
        return dist_point(a, q);
    }
    let t = ((q.0 - a.0) * (b.0 - a.0) + (q.1 - a.1) * (b.1 - a.1)) / len2;
    let t = t.max(F::zero()).min(F::one());
    let proj = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
    dist_point(proj, q)
}

/// Support of the pentagon of `rb` in direction `(wc, w1)`, in closed form:
/// negative infinity when the pentagon is empty, otherwise the best vertex.
pub fn pentagon_support<F: Real>(rb: RateBounds<F>, wc: F, w1: F) -> F {
    if rb.a < F::zero() || rb.b < F::zero() {
        return F::neg_infinity();
    }
    let a = rb.a.max(F::zero());
    let b = rb.b.max(F::zero());
    if wc >= w1 {
        wc * b
    } else {
        let m = a.min(b);
        w1 * m + wc * (b - m).max(F::zero())
    }
}

/// The `(Rc, R1)` vertex achieving [`pentagon_support`]; the origin for an
/// empty pentagon.
pub fn pentagon_support_vertex<F: Real>(rb: RateBounds<F>, wc: F, w1: F) -> (F, F) {
    if rb.a < F::zero() || rb.b < F::zero() {
        return (F::zero(), F::zero());
    }
    let a = rb.a.max(F::zero());
    let b = rb.b.max(F::zero());
    if wc >= w1 {
        (b, F::zero())
    } else {
        let m = a.min(b);
        (b - m, m)
    }
}

/// The rate set `{(Rc, R1) >= 0 : R1 <= a, Rc + R1 <= b}` induced by one
/// distribution. Empty when `a < 0` or `b < 0`; a triangle when `a >= b`.
pub fn pentagon<F: Real>(rb: RateBounds<F>) -> RatePolygon<F> {
    let (a, b) = (rb.a, rb.b);
    if a < F::zero() || b < F::zero() {
        return RatePolygon::empty();
    }
    let mut pts = vec![(F::zero(), F::zero()), (b, F::zero())];
    if a < b {
        pts.push((b - a, a));
        pts.push((F::zero(), a));
    } else {
        pts.push((F::zero(), b));
    }
    dedup_ccw(pts)
}

/// Convex hull via Andrew's monotone chain; deterministic CCW vertex order
/// starting from the lexicographic minimum. Collinear interior points are
/// dropped, so a degenerate hull is a point or a two-vertex segment.
pub fn hull<F: Real>(points: &[(F, F)]) -> RatePolygon<F> {
    let mut pts: Vec<(F, F)> = points.to_vec();
    pts.sort_by(|p, q| {
        p.0.partial_cmp(&q.0)
            .unwrap()
            .then(p.1.partial_cmp(&q.1).unwrap())
    });
    pts.dedup_by(|p, q| dist_point(*p, *q) <= cast::<F>(VERTEX_DEDUP_TOL));
    if pts.len() <= 2 {
        return RatePolygon { vertices: pts };
    }

    let mut lower: Vec<(F, F)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2
            && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= F::zero()
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(F, F)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= F::zero()
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    dedup_ccw(lower)
}

/// Intersects the nonnegative quadrant with halfplanes `<x, dir> <= bound`;
/// used to assemble a traced region from support values. Directions must have
/// nonnegative components so the result is bounded.
pub fn intersect_halfplanes<F: Real>(constraints: &[((F, F), F)]) -> RatePolygon<F> {
    if constraints.iter().any(|&(_, b)| b == F::neg_infinity()) {
        return RatePolygon::empty();
    }
    // start from a box guaranteed to contain the feasible set
    let mut bound = F::one();
    for &((wc, w1), b) in constraints {
        let w = wc.max(w1);
        if w > F::zero() && b > F::zero() {
            bound = bound.max(b / w);
        }
    }
    bound = bound + bound + F::one();
    let mut poly = vec![
        (F::zero(), F::zero()),
        (bound, F::zero()),
        (bound, bound),
        (F::zero(), bound),
    ];
    for &(dir, b) in constraints {
        poly = clip(&poly, dir, b);
        if poly.is_empty() {
            return RatePolygon::empty();
        }
    }
    dedup_ccw(poly)
}

/// Sutherland-Hodgman clip of a CCW polygon against `<x, dir> <= bound`.
fn clip<F: Real>(poly: &[(F, F)], dir: (F, F), bound: F) -> Vec<(F, F)> {
    let inside = |p: (F, F)| p.0 * dir.0 + p.1 * dir.1 <= bound;
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let cur = poly[i];
        let prev = poly[(i + n - 1) % n];
        let (ci, pi) = (inside(cur), inside(prev));
        if ci != pi {
            let fp = prev.0 * dir.0 + prev.1 * dir.1 - bound;
            let fc = cur.0 * dir.0 + cur.1 * dir.1 - bound;
            let t = fp / (fp - fc);
            out.push((
                prev.0 + t * (cur.0 - prev.0),
                prev.1 + t * (cur.1 - prev.1),
            ));
        }
        if ci {
            out.push(cur);
        }
    }
    out
}

fn dedup_ccw<F: Real>(mut pts: Vec<(F, F)>) -> RatePolygon<F> {
    let tol = cast::<F>(VERTEX_DEDUP_TOL);
    let mut out: Vec<(F, F)> = Vec::with_capacity(pts.len());
    for p in pts.drain(..) {
        if out.last().is_none_or(|&q| dist_point(p, q) > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && dist_point(out[0], *out.last().unwrap()) <= tol {
        out.pop();
    }
    // drop collinear triples left over from clipping
    if out.len() > 2 {
        let mut cleaned: Vec<(F, F)> = Vec::with_capacity(out.len());
        let n = out.len();
        for i in 0..n {
            let prev = out[(i + n - 1) % n];
            let next = out[(i + 1) % n];
            if cross(prev, out[i], next).abs() > tol * (edge_len(prev, out[i]) + F::one()) {
                cleaned.push(out[i]);
            }
        }
        if cleaned.len() >= 3 {
            out = cleaned;
        }
    }
    // canonical start: lexicographic minimum
    if out.len() > 1 {
        let start = (0..out.len())
            .min_by(|&i, &j| {
                out[i]
                    .partial_cmp(&out[j])
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        out.rotate_left(start);
    }
    RatePolygon { vertices: out }
}
