//! Planar primitives: vectors, unit bearings, convex hulls and interior angles.
//!
//! Orientation tests use an epsilon of [`ORIENT_EPS`] on the cross product,
//! which is adequate at desk scale (coordinates up to ~1e4). Degenerate hulls
//! follow a closed-tour convention: all points coincident gives K=1 with
//! perimeter 0, all points collinear gives K=2 with perimeter twice the
//! segment length, so the perimeter stays continuous as a hull flattens.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Cross-product threshold below which three points count as collinear.
pub const ORIENT_EPS: f64 = 1e-12;

/// Norm tolerance for accepting a vector as unit length.
pub const UNIT_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product of the two planar vectors.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (other - self).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        self.scale(rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A unit-norm bearing vector, or the distinguished zero vector meaning
/// "no bearing" (coincident or out-of-range neighbor).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitVec2 {
    x: f64,
    y: f64,
}

impl UnitVec2 {
    pub const ZERO: UnitVec2 = UnitVec2 { x: 0.0, y: 0.0 };

    /// Wraps a vector that is already unit length (within [`UNIT_EPS`]) or zero.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidInput("non-finite unit vector components".into()));
        }
        let n2 = x * x + y * y;
        if n2 == 0.0 || (n2 - 1.0).abs() <= 2.0 * UNIT_EPS {
            Ok(UnitVec2 { x, y })
        } else {
            Err(Error::InvalidInput(format!(
                "vector ({x}, {y}) is neither unit length nor zero"
            )))
        }
    }

    /// Normalizes an arbitrary nonzero vector; zero input yields the zero bearing.
    pub fn from_direction(v: Vec2) -> Self {
        let n = v.norm();
        if n == 0.0 {
            UnitVec2::ZERO
        } else {
            UnitVec2 { x: v.x / n, y: v.y / n }
        }
    }

    pub fn x(self) -> f64 {
        self.x
    }

    pub fn y(self) -> f64 {
        self.y
    }

    pub fn as_vec2(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn is_zero(self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }

    /// Polar angle in (-pi, pi]. Only meaningful for nonzero bearings.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn dot(self, other: UnitVec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: UnitVec2) -> f64 {
        self.x * other.y - self.y * other.x
    }
}

impl Neg for UnitVec2 {
    type Output = UnitVec2;
    fn neg(self) -> UnitVec2 {
        UnitVec2 { x: -self.x, y: -self.y }
    }
}

/// Convex hull of a point set with derived perimeter and interior angles.
#[derive(Clone, Debug, PartialEq)]
pub struct HullSummary {
    /// Hull vertices in counter-clockwise order. For degenerate inputs this is
    /// a single point (K=1) or the two extreme points of a segment (K=2).
    pub vertices: Vec<Vec2>,
    pub k: usize,
    pub perimeter: f64,
    /// Interior angles per vertex, empty for K < 3.
    pub interior_angles: Vec<f64>,
}

impl HullSummary {
    pub fn cos_sum(&self) -> f64 {
        self.interior_angles.iter().map(|a| a.cos()).sum()
    }
}

/// Unit vector from `p_i` toward `p_j`, zero when coincident or beyond the
/// visibility range.
pub fn unit_bearing(p_i: Vec2, p_j: Vec2, visibility: f64) -> Result<UnitVec2> {
    if !p_i.is_finite() || !p_j.is_finite() {
        return Err(Error::InvalidInput("non-finite position".into()));
    }
    if !(visibility > 0.0) {
        return Err(Error::InvalidInput(format!("visibility must be positive, got {visibility}")));
    }
    let d = p_j - p_i;
    let n = d.norm();
    if n == 0.0 || n > visibility {
        Ok(UnitVec2::ZERO)
    } else {
        Ok(UnitVec2 { x: d.x / n, y: d.y / n })
    }
}

/// Monotone-chain convex hull. Coincident inputs collapse to one vertex and
/// collinear interior points are excluded, so the vertex list is strictly
/// convex for K >= 3. Deterministic under input permutation (sort-based).
pub fn convex_hull(points: &[Vec2]) -> Result<HullSummary> {
    if points.is_empty() {
        return Err(Error::InvalidInput("convex_hull of empty point set".into()));
    }
    for p in points {
        if !p.is_finite() {
            return Err(Error::InvalidInput("non-finite point in convex_hull input".into()));
        }
    }
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);

    if pts.len() == 1 {
        return Ok(HullSummary { vertices: pts, k: 1, perimeter: 0.0, interior_angles: vec![] });
    }

    let turn = |o: Vec2, a: Vec2, b: Vec2| (a - o).cross(b - o);

    let mut lower: Vec<Vec2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2
            && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= ORIENT_EPS
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2
            && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= ORIENT_EPS
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    let vertices = lower;
    let k = vertices.len();

    if k == 2 {
        // Collinear constellation: closed tour along the segment and back.
        let perimeter = 2.0 * vertices[0].distance(vertices[1]);
        return Ok(HullSummary { vertices, k, perimeter, interior_angles: vec![] });
    }

    let perimeter: f64 = (0..k).map(|i| vertices[i].distance(vertices[(i + 1) % k])).sum();
    let interior_angles = interior_angles(&vertices)?;
    Ok(HullSummary { vertices, k, perimeter, interior_angles })
}

/// Interior angle at each vertex of a convex CCW polygon, each in (0, pi).
pub fn interior_angles(vertices: &[Vec2]) -> Result<Vec<f64>> {
    let k = vertices.len();
    if k < 3 {
        return Err(Error::DegenerateHull(k));
    }
    let mut angles = Vec::with_capacity(k);
    for i in 0..k {
        let prev = vertices[(i + k - 1) % k];
        let next = vertices[(i + 1) % k];
        let a = prev - vertices[i];
        let b = next - vertices[i];
        // atan2 of |cross| vs dot keeps full precision near 0 and pi.
        angles.push(a.cross(b).abs().atan2(a.dot(b)));
    }
    Ok(angles)
}

/// True if `p` is inside or on the convex CCW polygon (within `tol` on the
/// edge cross products).
pub fn point_in_convex_polygon(p: Vec2, vertices: &[Vec2], tol: f64) -> bool {
    let k = vertices.len();
    match k {
        0 => false,
        1 => p.distance(vertices[0]) <= tol,
        2 => {
            let a = vertices[0];
            let b = vertices[1];
            let ab = b - a;
            let len2 = ab.dot(ab);
            if len2 == 0.0 {
                return p.distance(a) <= tol;
            }
            let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
            p.distance(a + ab * t) <= tol
        }
        _ => (0..k).all(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % k];
            (b - a).cross(p - a) >= -tol
        }),
    }
}
