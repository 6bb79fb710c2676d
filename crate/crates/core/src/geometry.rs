//! Planar primitives used by the placement routines.
//!
//! Every function here is pure. Comparisons against radius sums use a
//! tolerance relative to that sum; comparisons on raw coordinates use the
//! tolerance as an absolute distance.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("coincident centers make the tangency system ill-posed")]
    DegenerateInput,
    #[error("centroid of an empty point set")]
    EmptySet,
    #[error("a main-area polygon needs at least 3 vertices, got {0}")]
    InvalidPolygon(usize),
}

/// Numerical tolerance shared by all geometric predicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eps: f64,
}

impl Tolerance {
    pub const DEFAULT_EPS: f64 = 1e-9;

    pub fn new(eps: f64) -> Self {
        Tolerance { eps }
    }

    /// Tolerance band for a quantity of magnitude `scale` (a radius sum).
    #[inline]
    pub fn relative(&self, scale: f64) -> f64 {
        self.eps * scale.abs()
    }

    /// Tolerance band for raw coordinate comparisons.
    #[inline]
    pub fn absolute(&self) -> f64 {
        self.eps
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(Self::DEFAULT_EPS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    #[inline]
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

#[inline]
pub fn distance(a: Point, b: Point) -> f64 {
    (a - b).norm()
}

/// Centers at which a circle of radius `r_k` touches both given circles.
///
/// When two points are present, `points()[0]` lies to the left of the
/// directed line from `p_center` to `q_center` and `points()[1]` to the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangencyCandidates {
    points: [Point; 2],
    count: usize,
}

impl TangencyCandidates {
    const NONE: TangencyCandidates = TangencyCandidates {
        points: [Point::ORIGIN; 2],
        count: 0,
    };

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn points(&self) -> &[Point] {
        &self.points[..self.count]
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

/// Solves the two-tangency system for a circle of radius `r_k` touching the
/// circles `(p_center, r_p)` and `(q_center, r_q)` from outside.
///
/// The two distance equations are subtracted to obtain the radical line,
/// which is then intersected with the first ring.
pub fn tangency_candidates(
    r_k: f64,
    p_center: Point,
    r_p: f64,
    q_center: Point,
    r_q: f64,
    tol: Tolerance,
) -> Result<TangencyCandidates, GeometryError> {
    let axis = q_center - p_center;
    let d = axis.norm();
    if d <= tol.absolute() {
        return Err(GeometryError::DegenerateInput);
    }

    let ra = r_k + r_p;
    let rb = r_k + r_q;
    let outer = ra + rb;
    let inner = (ra - rb).abs();
    let band = tol.relative(outer);

    if d > outer + band || d < inner - band {
        return Ok(TangencyCandidates::NONE);
    }

    let u = axis * (1.0 / d);
    let a = (d * d + ra * ra - rb * rb) / (2.0 * d);
    let base = p_center + u * a;

    if (d - outer).abs() <= band || (d - inner).abs() <= band {
        return Ok(TangencyCandidates {
            points: [base, base],
            count: 1,
        });
    }

    let h = ((ra - a) * (ra + a)).max(0.0).sqrt();
    let perp = Point::new(-u.y, u.x);
    Ok(TangencyCandidates {
        points: [base + perp * h, base - perp * h],
        count: 2,
    })
}

/// True when the two disks interpenetrate by more than the tolerance band.
/// Tangent disks do not overlap.
#[inline]
pub fn circles_overlap(
    a_center: Point,
    r_a: f64,
    b_center: Point,
    r_b: f64,
    tol: Tolerance,
) -> bool {
    let sum = r_a + r_b;
    distance(a_center, b_center) < sum - tol.relative(sum)
}

pub fn centroid(points: &[Point]) -> Result<Point, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptySet);
    }
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Ok(Point::new(sx / n, sy / n))
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return distance(p, a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    distance(p, a + ab * t)
}

fn segments_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return 0.0;
    }
    segment_distance(a, c, d)
        .min(segment_distance(b, c, d))
        .min(segment_distance(c, a, b))
        .min(segment_distance(d, a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    OnBoundary,
    Outside,
}

impl Containment {
    /// Inside or on the boundary.
    pub fn is_covered(self) -> bool {
        !matches!(self, Containment::Outside)
    }
}

/// Polygon through the centers of the border circles, in ring order.
#[derive(Debug, Clone, PartialEq)]
pub struct MainAreaPolygon {
    vertices: Vec<Point>,
}

impl MainAreaPolygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidPolygon(vertices.len()));
        }
        Ok(MainAreaPolygon { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area; positive for counterclockwise vertex order.
    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    /// Non-adjacent edges stay further apart than the tolerance.
    pub fn is_simple(&self, tol: Tolerance) -> bool {
        let n = self.vertices.len();
        let v = &self.vertices;
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = (v[j], v[(j + 1) % n]);
                if segments_distance(a, b, c, d) <= tol.absolute() {
                    return false;
                }
            }
        }
        true
    }

    pub fn classify(&self, p: Point, tol: Tolerance) -> Containment {
        if self
            .edges()
            .any(|(a, b)| segment_distance(p, a, b) <= tol.absolute())
        {
            return Containment::OnBoundary;
        }
        // even-odd crossing test
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        if inside {
            Containment::Inside
        } else {
            Containment::Outside
        }
    }
}

pub fn point_in_main_area(p: Point, poly: &MainAreaPolygon, tol: Tolerance) -> Containment {
    poly.classify(p, tol)
}
