//! Polygon primitives in continuous pixel coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

/// Twice the signed area of the triangle `a, b, c`; positive when counter-clockwise
/// in a y-up frame.
pub fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Distance from `p` to the closed segment `a`-`b`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(Point::new(a.x + t * dx, a.y + t * dy))
}

/// A single closed exterior ring. The closing edge from the last vertex back to
/// the first is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Degenerate("fewer than 3 vertices"));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Degenerate("non-finite coordinate"));
        }
        Ok(Polygon { vertices })
    }

    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Self> {
        Self::new(coords.iter().copied().map(Point::from).collect())
    }

    /// Builds a polygon from a COCO-style flat `[x0, y0, x1, y1, ...]` list.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if !flat.len().is_multiple_of(2) {
            return Err(Error::Degenerate("odd number of coordinates"));
        }
        Self::new(flat.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.vertices.iter().flat_map(|p| [p.x, p.y]).collect()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as `(start, end)` pairs, including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.x * b.y - b.x * a.y).sum::<f64>()
    }

    /// Axis-aligned bounds as `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Polygon {
        Polygon { vertices: self.vertices.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect() }
    }

    /// Scales about `origin`.
    pub fn scaled(&self, factor: f64, origin: Point) -> Polygon {
        Polygon {
            vertices: self
                .vertices
                .iter()
                .map(|p| Point::new(origin.x + (p.x - origin.x) * factor, origin.y + (p.y - origin.y) * factor))
                .collect(),
        }
    }

    /// Vertices `from..=to` walking forward with wrap-around.
    pub fn stretch(&self, from: usize, to: usize) -> Vec<Point> {
        let n = self.vertices.len();
        let mut out = vec![self.vertices[from % n]];
        let mut i = from % n;
        while i != to % n {
            i = (i + 1) % n;
            out.push(self.vertices[i]);
        }
        out
    }

    /// True when no two edges properly cross and no edges overlap along a
    /// positive length. Vertices touching other edges (snapping) are allowed.
    pub fn is_simple(&self) -> bool {
        let mut pts: Vec<Point> = Vec::with_capacity(self.vertices.len());
        for &p in &self.vertices {
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        while pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        let n = pts.len();
        if n < 3 {
            return false;
        }
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            for j in (i + 1)..n {
                let (c, d) = (pts[j], pts[(j + 1) % n]);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if collinear_overlap(a, b, c, d) {
                    return false;
                }
                if !adjacent && proper_crossing(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }
}

fn proper_crossing(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(a, b, c);
    let d2 = cross(a, b, d);
    let d3 = cross(c, d, a);
    let d4 = cross(c, d, b);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn collinear_overlap(a: Point, b: Point, c: Point, d: Point) -> bool {
    if cross(a, b, c) != 0.0 || cross(a, b, d) != 0.0 {
        return false;
    }
    // project onto the dominant axis of ab
    let use_x = (b.x - a.x).abs() >= (b.y - a.y).abs();
    let key = |p: Point| if use_x { p.x } else { p.y };
    let (s0, s1) = min_max(key(a), key(b));
    let (t0, t1) = min_max(key(c), key(d));
    s1.min(t1) - s0.max(t0) > 0.0
}

fn min_max(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Absolute shoelace area. Collinear input yields 0.
pub fn polygon_area(p: &Polygon) -> f64 {
    p.signed_area().abs()
}

/// Sum of edge lengths including the closing edge.
pub fn polygon_perimeter(p: &Polygon) -> f64 {
    p.edges().map(|(a, b)| a.dist(b)).sum()
}

/// Convex hull (Andrew's monotone chain), counter-clockwise in a y-up frame,
/// collinear points dropped.
pub fn convex_hull(p: &Polygon) -> Result<Polygon> {
    let hull = hull_of_points(p.vertices().to_vec());
    if hull.len() < 3 {
        return Err(Error::Degenerate("collinear hull"));
    }
    Polygon::new(hull)
}

pub(crate) fn hull_of_points(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[(f64, f64)]) -> Polygon {
        Polygon::from_coords(c).unwrap()
    }

    fn pentagon() -> Polygon {
        poly(&[(0.0, 0.0), (4.0, 0.0), (4.0, 3.0), (2.0, 5.0), (0.0, 3.0)])
    }

    fn l_shape() -> Polygon {
        poly(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)])
    }

    // independent even-odd test used only by the Monte-Carlo area oracle
    fn contains(p: &Polygon, x: f64, y: f64) -> bool {
        let v = p.vertices();
        let mut inside = false;
        let mut j = v.len() - 1;
        for i in 0..v.len() {
            if (v[i].y > y) != (v[j].y > y) && x < (v[j].x - v[i].x) * (y - v[i].y) / (v[j].y - v[i].y) + v[i].x {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    #[test]
    fn area_basics() {
        assert_eq!(polygon_area(&poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])), 1.0);
        assert_eq!(polygon_area(&poly(&[(0.0, 0.0), (2.0, 0.0), (0.0, 2.0)])), 2.0);
        assert_eq!(polygon_area(&poly(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)])), 0.0);
    }

    #[test]
    fn pentagon_area_matches_monte_carlo() {
        use rand::{Rng, SeedableRng};
        let p = pentagon();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 400_000;
        let hits = (0..n).filter(|_| contains(&p, rng.gen_range(0.0..4.0), rng.gen_range(0.0..5.0))).count();
        let estimate = 20.0 * hits as f64 / n as f64;
        assert!((estimate - 16.0).abs() < 0.1, "mc estimate {estimate}");
        // frozen: 4x3 rectangle plus a triangle of base 4, height 2
        assert_eq!(polygon_area(&p), 16.0);
    }

    #[test]
    fn perimeter_values() {
        assert_eq!(polygon_perimeter(&poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])), 4.0);
        let edges = [4.0, 3.0, 8f64.sqrt(), 8f64.sqrt(), 3.0];
        let expected: f64 = edges.iter().sum();
        assert!((polygon_perimeter(&pentagon()) - expected).abs() < 1e-12);
        let n = 256;
        let circle = Polygon::new(
            (0..n)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    Point::new(t.cos(), t.sin())
                })
                .collect(),
        )
        .unwrap();
        assert!((polygon_perimeter(&circle) - 2.0 * std::f64::consts::PI).abs() < 1e-3);
    }

    #[test]
    fn hull_of_l_shape() {
        let h = convex_hull(&l_shape()).unwrap();
        let mut got: Vec<(f64, f64)> = h.vertices().iter().map(|p| (p.x, p.y)).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut want = vec![(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 2.0), (0.0, 2.0)];
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, want);
        assert_eq!(polygon_area(&h), 3.5);
    }

    #[test]
    fn hull_of_star_is_tip_pentagon() {
        let mut v = Vec::new();
        for k in 0..10 {
            let t = std::f64::consts::PI * k as f64 / 5.0;
            let r = if k % 2 == 0 { 10.0 } else { 4.0 };
            v.push(Point::new(20.0 + r * t.cos(), 20.0 + r * t.sin()));
        }
        let star = Polygon::new(v.clone()).unwrap();
        let h = convex_hull(&star).unwrap();
        assert_eq!(h.len(), 5);
        for tip in v.iter().step_by(2) {
            assert!(h.vertices().contains(tip));
        }
    }

    #[test]
    fn collinear_hull_is_error() {
        let p = poly(&[(0.0, 0.0), (1.0, 1.0), (3.0, 3.0)]);
        assert!(matches!(convex_hull(&p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn simplicity_checks() {
        assert!(l_shape().is_simple());
        assert!(pentagon().is_simple());
        let bowtie = poly(&[(0.0, 0.0), (2.0, 2.0), (2.0, 0.0), (0.0, 2.0)]);
        assert!(!bowtie.is_simple());
        // fold-back spike along an edge
        let spike = poly(&[(0.0, 0.0), (4.0, 0.0), (2.0, 0.0), (2.0, 3.0)]);
        assert!(!spike.is_simple());
        // a vertex touching a non-adjacent edge is allowed
        let touch = poly(&[(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (2.0, 0.0), (0.0, 4.0)]);
        assert!(touch.is_simple());
        assert!(!poly(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]).is_simple());
    }

    #[test]
    fn stretch_wraps() {
        let p = pentagon();
        assert_eq!(p.stretch(3, 1).len(), 4);
        assert_eq!(p.stretch(1, 1).len(), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn star_polygon() -> impl Strategy<Value = Polygon> {
            proptest::collection::vec((0.2f64..1.0, 1.0f64..10.0), 3..16).prop_map(|spec| {
                let n = spec.len();
                let mut acc = 0.0;
                let total: f64 = spec.iter().map(|s| s.0).sum();
                let v = spec
                    .iter()
                    .map(|&(w, r)| {
                        acc += w;
                        let t = 2.0 * std::f64::consts::PI * acc / total;
                        Point::new(50.0 + r * t.cos(), 50.0 + r * t.sin())
                    })
                    .collect::<Vec<_>>();
                debug_assert_eq!(v.len(), n);
                Polygon::new(v).unwrap()
            })
        }

        proptest! {
            #[test]
            fn area_perimeter_rotation_reversal_invariant(p in star_polygon(), k in 0usize..16) {
                let mut v = p.vertices().to_vec();
                let k = k % v.len();
                v.rotate_left(k);
                let rotated = Polygon::new(v.clone()).unwrap();
                v.reverse();
                let reversed = Polygon::new(v).unwrap();
                for q in [&rotated, &reversed] {
                    prop_assert!((polygon_area(q) - polygon_area(&p)).abs() < 1e-9);
                    prop_assert!((polygon_perimeter(q) - polygon_perimeter(&p)).abs() < 1e-9);
                }
            }

            #[test]
            fn hull_dominates_and_is_idempotent(p in star_polygon()) {
                let h = convex_hull(&p).unwrap();
                prop_assert!(polygon_area(&h) >= polygon_area(&p) - 1e-9);
                let hh = convex_hull(&h).unwrap();
                let key = |q: &Polygon| {
                    let mut v: Vec<(u64, u64)> =
                        q.vertices().iter().map(|p| (p.x.to_bits(), p.y.to_bits())).collect();
                    v.sort();
                    v
                };
                prop_assert_eq!(key(&h), key(&hh));
            }
        }
    }
}
