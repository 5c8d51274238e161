use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A bounded strictly convex domain.
///
/// Balls carry their dimension because the radial solvers work in any `N >= 2`;
/// triangulations only exist for `N = 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    Ball { dim: usize, radius: f64 },
    /// Vertices in counter-clockwise order.
    ConvexPolygon { vertices: Vec<[f64; 2]> },
}

impl Domain {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        let d = Domain::Ball { dim, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn disc(radius: f64) -> Result<Self> {
        Self::ball(2, radius)
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let d = Domain::ConvexPolygon { vertices };
        d.validate()?;
        Ok(d)
    }

    /// Regular polygon with `n` vertices on the circle of radius `circumradius`.
    pub fn regular_polygon(n: usize, circumradius: f64) -> Result<Self> {
        let vertices = (0..n)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                [circumradius * a.cos(), circumradius * a.sin()]
            })
            .collect();
        Self::polygon(vertices)
    }

    pub fn unit_square() -> Self {
        Domain::ConvexPolygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Ball { dim, radius } => {
                if *dim < 2 {
                    return Err(Error::InvalidParameter(format!("ball dimension {dim} < 2")));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidParameter(format!("ball radius {radius} must be > 0")));
                }
                Ok(())
            }
            Domain::ConvexPolygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(Error::InvalidDomain(format!("polygon has {n} vertices, need >= 3")));
                }
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    let cross = cross(sub(b, a), sub(c, b));
                    if !(cross > 0.0) {
                        return Err(Error::InvalidDomain(format!(
                            "vertices {}, {}, {} are not strictly convex in counter-clockwise order (cross = {cross:e})",
                            i,
                            (i + 1) % n,
                            (i + 2) % n
                        )));
                    }
                }
                // a star polygon also has all-positive turns; the total turning must be one loop
                let turning: f64 = (0..n)
                    .map(|i| {
                        let e0 = sub(vertices[(i + 1) % n], vertices[i]);
                        let e1 = sub(vertices[(i + 2) % n], vertices[(i + 1) % n]);
                        cross(e0, e1).atan2(dot(e0, e1))
                    })
                    .sum();
                if (turning - 2.0 * std::f64::consts::PI).abs() > 1e-6 {
                    return Err(Error::InvalidDomain("polygon winds more than once".into()));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { dim, .. } => *dim,
            Domain::ConvexPolygon { .. } => 2,
        }
    }

    /// Measure of the domain (area for 2D; volume of the N-ball otherwise).
    pub fn measure(&self) -> f64 {
        match self {
            Domain::Ball { dim, radius } => unit_ball_volume(*dim) * radius.powi(*dim as i32),
            Domain::ConvexPolygon { vertices } => polygon_area(vertices),
        }
    }

    /// Area centroid; the origin for ball domains.
    pub fn centroid(&self) -> [f64; 2] {
        match self {
            Domain::Ball { .. } => [0.0, 0.0],
            Domain::ConvexPolygon { vertices } => {
                let n = vertices.len();
                let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    let [x0, y0] = vertices[i];
                    let [x1, y1] = vertices[(i + 1) % n];
                    let w = x0 * y1 - x1 * y0;
                    a2 += w;
                    cx += (x0 + x1) * w;
                    cy += (y0 + y1) * w;
                }
                [cx / (3.0 * a2), cy / (3.0 * a2)]
            }
        }
    }

    /// Distance from an interior point to the boundary (negative outside).
    pub fn distance_to_boundary(&self, x: [f64; 2]) -> f64 {
        match self {
            Domain::Ball { radius, .. } => radius - norm(x),
            Domain::ConvexPolygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let a = vertices[i];
                        let e = sub(vertices[(i + 1) % n], a);
                        cross(e, sub(x, a)) / norm(e)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Unit inward normal of the boundary piece closest to `x`.
    pub fn inward_normal(&self, x: [f64; 2]) -> [f64; 2] {
        match self {
            Domain::Ball { .. } => {
                let r = norm(x);
                if r == 0.0 {
                    [-1.0, 0.0]
                } else {
                    [-x[0] / r, -x[1] / r]
                }
            }
            Domain::ConvexPolygon { vertices } => {
                let n = vertices.len();
                let mut best = (f64::INFINITY, [0.0, 0.0]);
                for i in 0..n {
                    let a = vertices[i];
                    let e = sub(vertices[(i + 1) % n], a);
                    let len = norm(e);
                    let d = cross(e, sub(x, a)) / len;
                    if d < best.0 {
                        best = (d, [-e[1] / len, e[0] / len]);
                    }
                }
                best.1
            }
        }
    }

    /// Radius of the largest inscribed disc.
    pub fn inradius(&self) -> f64 {
        match self {
            Domain::Ball { radius, .. } => *radius,
            Domain::ConvexPolygon { .. } => {
                // the distance function is concave; a short search over vertex-centroid
                // combinations is not exact, so refine by pattern search from the centroid
                let mut x = self.centroid();
                let mut best = self.distance_to_boundary(x);
                let mut step = self.diameter() / 4.0;
                while step > 1e-12 * self.diameter() {
                    let mut improved = false;
                    for d in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
                        let y = [x[0] + step * d[0], x[1] + step * d[1]];
                        let v = self.distance_to_boundary(y);
                        if v > best {
                            best = v;
                            x = y;
                            improved = true;
                        }
                    }
                    if !improved {
                        step *= 0.5;
                    }
                }
                best
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Ball { radius, .. } => 2.0 * radius,
            Domain::ConvexPolygon { vertices } => {
                let mut d: f64 = 0.0;
                for a in vertices {
                    for b in vertices {
                        d = d.max(norm(sub(*a, *b)));
                    }
                }
                d
            }
        }
    }

    /// Whether `x` coincides with a polygon vertex (within `tol`). Always false for balls.
    pub fn is_corner(&self, x: [f64; 2], tol: f64) -> bool {
        match self {
            Domain::Ball { .. } => false,
            Domain::ConvexPolygon { vertices } => vertices.iter().any(|v| norm(sub(*v, x)) <= tol),
        }
    }

    pub fn scaled(&self, s: f64) -> Domain {
        match self {
            Domain::Ball { dim, radius } => Domain::Ball { dim: *dim, radius: radius * s },
            Domain::ConvexPolygon { vertices } => Domain::ConvexPolygon {
                vertices: vertices.iter().map(|v| [v[0] * s, v[1] * s]).collect(),
            },
        }
    }
}

/// Volume of the unit ball in R^N.
pub fn unit_ball_volume(n: usize) -> f64 {
    // V_N = 2π/N · V_{N-2}, V_0 = 1, V_1 = 2
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// Surface measure of the unit sphere in R^N.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

pub(crate) fn polygon_area(vertices: &[[f64; 2]]) -> f64 {
    let n = vertices.len();
    0.5 * (0..n)
        .map(|i| {
            let [x0, y0] = vertices[i];
            let [x1, y1] = vertices[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum::<f64>()
}

#[inline]
pub(crate) fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub(crate) fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}
