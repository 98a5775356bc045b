//! Planar primitives: points, support-form halfplanes and possibly degenerate
//! convex regions obtained by clipping.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance under which two vertices are treated as the same point.
pub const VERTEX_TOL: f64 = 1e-9;

/// Slack allowed when deciding which side of a halfplane a vertex is on.
pub const CLIP_TOL: f64 = 1e-10;

/// Side of the square every intersection starts from.
pub const BOUNDING_BOX_SIDE: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2 { x, y }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Counterclockwise rotation by 90 degrees.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn from_angle(theta: f64) -> Point2 {
        let (s, c) = theta.sin_cos();
        Point2::new(c, s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// The closed halfplane `{z : <z, normal> <= offset}` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    normal: Point2,
    offset: f64,
}

impl HalfPlane {
    /// Builds `{z : <z, normal> <= offset}`, rescaling a non-unit normal.
    pub fn new(normal: Point2, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if !(len.is_finite() && len > 0.0 && offset.is_finite()) {
            return Err(Error::invalid("halfplane needs a finite nonzero normal"));
        }
        Ok(HalfPlane {
            normal: normal * (1.0 / len),
            offset: offset / len,
        })
    }

    /// Halfplane bounded by the line through `point` with outward `normal`.
    pub fn through(point: Point2, normal: Point2) -> Result<Self> {
        HalfPlane::new(normal, normal.dot(point))
    }

    pub fn normal(&self) -> Point2 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed distance, positive outside.
    pub fn excess(&self, p: Point2) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        self.excess(p) <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Empty,
    Point,
    Segment,
    Polygon,
}

/// Closed convex subset of the plane. Polygons are counterclockwise, strictly
/// convex and start at their lexicographically smallest vertex; segments
/// store their two endpoints in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexRegion {
    kind: RegionKind,
    vertices: Vec<Point2>,
}

impl ConvexRegion {
    pub fn empty() -> Self {
        ConvexRegion {
            kind: RegionKind::Empty,
            vertices: Vec::new(),
        }
    }

    pub fn point(p: Point2) -> Self {
        ConvexRegion {
            kind: RegionKind::Point,
            vertices: vec![p],
        }
    }

    /// Canonical region spanned by an arbitrary finite point set.
    pub fn hull_of(points: &[Point2]) -> Self {
        ConvexRegion::from_ring(convex_hull(points))
    }

    /// Classifies a counterclockwise convex ring, collapsing vertices closer
    /// than [`VERTEX_TOL`] and pruning collinear ones.
    pub fn from_ring(ring: Vec<Point2>) -> Self {
        let mut ring = dedup_ring(ring);
        match ring.len() {
            0 => return ConvexRegion::empty(),
            1 => return ConvexRegion::point(ring[0]),
            _ => {}
        }

        let (a, b) = farthest_pair(&ring);
        if a.dist(b) <= VERTEX_TOL {
            return ConvexRegion::point(centroid_of_points(&ring));
        }
        let axis = (b - a) * (1.0 / a.dist(b));
        if ring.iter().all(|&p| axis.cross(p - a).abs() <= VERTEX_TOL) {
            let (lo, hi) = if lex_less(a, b) { (a, b) } else { (b, a) };
            return ConvexRegion {
                kind: RegionKind::Segment,
                vertices: vec![lo, hi],
            };
        }

        // Drop vertices lying on the chord of their neighbours.
        let mut changed = true;
        while changed && ring.len() > 3 {
            changed = false;
            let n = ring.len();
            for i in 0..n {
                let prev = ring[(i + n - 1) % n];
                let next = ring[(i + 1) % n];
                let chord = next - prev;
                let len = chord.norm();
                if len > 0.0 && (ring[i] - prev).cross(chord) / len <= VERTEX_TOL {
                    ring.remove(i);
                    changed = true;
                    break;
                }
            }
        }

        let start = (0..ring.len())
            .min_by(|&i, &j| lex_cmp(ring[i], ring[j]))
            .unwrap_or(0);
        ring.rotate_left(start);
        ConvexRegion {
            kind: RegionKind::Polygon,
            vertices: ring,
        }
    }

    pub fn kind(&self) -> RegionKind {
        self.kind
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.kind == RegionKind::Empty
    }

    /// Membership with distance slack `tol`.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        match self.kind {
            RegionKind::Empty => false,
            RegionKind::Point => self.vertices[0].dist(p) <= tol,
            RegionKind::Segment => segment_distance(p, self.vertices[0], self.vertices[1]) <= tol,
            RegionKind::Polygon => {
                let n = self.vertices.len();
                (0..n).all(|i| {
                    let a = self.vertices[i];
                    let b = self.vertices[(i + 1) % n];
                    let len = a.dist(b);
                    (b - a).cross(p - a) / len >= -tol
                })
            }
        }
    }

    /// Euclidean distance from `p` to the relative boundary of the region.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        match self.kind {
            RegionKind::Empty => f64::INFINITY,
            RegionKind::Point => self.vertices[0].dist(p),
            RegionKind::Segment => segment_distance(p, self.vertices[0], self.vertices[1]),
            RegionKind::Polygon => {
                let n = self.vertices.len();
                (0..n)
                    .map(|i| segment_distance(p, self.vertices[i], self.vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Every vertex of `self` lies in `other` within `tol`.
    pub fn is_subset_of(&self, other: &ConvexRegion, tol: f64) -> bool {
        self.vertices.iter().all(|&v| other.contains(v, tol))
    }

    /// Applies `f` to every vertex and re-canonicalizes; `f` must be affine
    /// and orientation preserving for polygons to stay counterclockwise.
    pub fn map(&self, f: impl Fn(Point2) -> Point2) -> ConvexRegion {
        let pts: Vec<Point2> = self.vertices.iter().map(|&v| f(v)).collect();
        ConvexRegion::hull_of(&pts)
    }

    /// Outward edge halfplanes of a polygon.
    pub fn facets(&self) -> Vec<HalfPlane> {
        if self.kind != RegionKind::Polygon {
            return Vec::new();
        }
        let n = self.vertices.len();
        (0..n)
            .filter_map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                HalfPlane::through(a, -(b - a).perp()).ok()
            })
            .collect()
    }

    /// Support function `max <v, u>` over the region.
    pub fn support(&self, u: Point2) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounding_box(&self) -> Option<(Point2, Point2)> {
        bounding_box(&self.vertices)
    }
}

pub fn bounding_box(points: &[Point2]) -> Option<(Point2, Point2)> {
    let first = *points.first()?;
    Some(points.iter().fold((first, first), |(lo, hi), p| {
        (
            Point2::new(lo.x.min(p.x), lo.y.min(p.y)),
            Point2::new(hi.x.max(p.x), hi.y.max(p.y)),
        )
    }))
}

fn lex_cmp(a: Point2, b: Point2) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

fn lex_less(a: Point2, b: Point2) -> bool {
    lex_cmp(a, b) == std::cmp::Ordering::Less
}

fn dedup_ring(mut ring: Vec<Point2>) -> Vec<Point2> {
    ring.dedup_by(|b, a| a.dist(*b) <= VERTEX_TOL);
    while ring.len() > 1 && ring[0].dist(ring[ring.len() - 1]) <= VERTEX_TOL {
        ring.pop();
    }
    ring
}

fn farthest_pair(points: &[Point2]) -> (Point2, Point2) {
    let mut best = (points[0], points[0], 0.0);
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i + 1..] {
            let d = a.dist(b);
            if d > best.2 {
                best = (a, b, d);
            }
        }
    }
    (best.0, best.1)
}

fn centroid_of_points(points: &[Point2]) -> Point2 {
    let s = points.iter().fold(Point2::default(), |acc, &p| acc + p);
    s * (1.0 / points.len() as f64)
}

pub fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Convex hull by monotone chain, counterclockwise, collinear points dropped.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|&a, &b| lex_cmp(a, b));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point2, a: Point2, b: Point2| robust::orient2d(coord(o), coord(a), coord(b));
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

pub(crate) fn coord(p: Point2) -> robust::Coord<f64> {
    robust::Coord { x: p.x, y: p.y }
}

/// Clips a counterclockwise convex ring by one halfplane.
fn clip(ring: &[Point2], h: &HalfPlane) -> Vec<Point2> {
    let n = ring.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let sa = h.excess(a);
        let sb = h.excess(b);
        let a_in = sa <= CLIP_TOL;
        if a_in {
            out.push(a);
        }
        if a_in != (sb <= CLIP_TOL) {
            let t = (sa / (sa - sb)).clamp(0.0, 1.0);
            out.push(a + (b - a) * t);
        }
    }
    out
}

/// Intersects halfplanes by successive clipping of a ring, skipping the
/// ones that cut nothing.
pub fn clip_ring<'a>(mut ring: Vec<Point2>, halfplanes: impl IntoIterator<Item = &'a HalfPlane>) -> Vec<Point2> {
    for h in halfplanes {
        if ring.is_empty() {
            break;
        }
        let worst = ring
            .iter()
            .map(|&p| h.excess(p))
            .fold(f64::NEG_INFINITY, f64::max);
        if worst <= CLIP_TOL {
            continue;
        }
        ring = clip(&ring, h);
        ring = dedup_ring(ring);
    }
    ring
}

fn bounding_square() -> Vec<Point2> {
    let s = BOUNDING_BOX_SIDE / 2.0;
    vec![
        Point2::new(-s, -s),
        Point2::new(s, -s),
        Point2::new(s, s),
        Point2::new(-s, s),
    ]
}

/// Intersection of closed halfplanes, restricted to the square of side
/// [`BOUNDING_BOX_SIDE`] centred at the origin.
pub fn intersect_halfplanes(halfplanes: &[HalfPlane]) -> ConvexRegion {
    ConvexRegion::from_ring(clip_ring(bounding_square(), halfplanes))
}

/// Largest distance between two points of the region.
pub fn region_diameter(region: &ConvexRegion) -> f64 {
    let v = region.vertices();
    match region.kind() {
        RegionKind::Empty | RegionKind::Point => 0.0,
        RegionKind::Segment => v[0].dist(v[1]),
        RegionKind::Polygon => rotating_calipers(v),
    }
}

/// Diameter of a counterclockwise convex polygon by walking antipodal pairs.
pub fn rotating_calipers(v: &[Point2]) -> f64 {
    let n = v.len();
    match n {
        0 | 1 => return 0.0,
        2 => return v[0].dist(v[1]),
        _ => {}
    }
    let area = |a: Point2, b: Point2, c: Point2| (b - a).cross(c - a).abs();
    let mut j = 1;
    let mut best: f64 = 0.0;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        let mut steps = 0;
        while steps < n && area(a, b, v[(j + 1) % n]) > area(a, b, v[j]) {
            j = (j + 1) % n;
            steps += 1;
        }
        best = best.max(a.dist(v[j])).max(b.dist(v[j]));
    }
    best
}

/// Area centroid of a polygon, midpoint of a segment, or the point itself.
pub fn region_barycenter(region: &ConvexRegion) -> Result<Point2> {
    let v = region.vertices();
    match region.kind() {
        RegionKind::Empty => Err(Error::EmptyRegion),
        RegionKind::Point => Ok(v[0]),
        RegionKind::Segment => Ok((v[0] + v[1]) * 0.5),
        RegionKind::Polygon => {
            let origin = v[0];
            let mut area2 = 0.0;
            let mut acc = Point2::default();
            for w in v[1..].windows(2) {
                let a = w[0] - origin;
                let b = w[1] - origin;
                let cr = a.cross(b);
                area2 += cr;
                acc = acc + (a + b) * cr;
            }
            if area2 == 0.0 {
                return Ok(centroid_of_points(v));
            }
            Ok(origin + acc * (1.0 / (3.0 * area2)))
        }
    }
}
