//! Concrete geodesic metric spaces with midpoints.
//!
//! Three model families are provided:
//!
//! * Euclidean ℝⁿ with the usual metric and linear geodesics;
//! * ℓpⁿ, the same coordinate space under the p-norm, `p ∈ [1, ∞]`;
//! * the Euclidean cone over a base space: points `(x, t)` with `t >= 0`
//!   and the law-of-cosines metric
//!   `d((x,t),(x',t'))² = t² + t'² − 2 t t' cos(d_π(x,x'))`,
//!   where `d_π = min(π, d_base)`.
//!
//! All points `(x, 0)` of a cone are identified with a single apex, stored
//! canonically as `(origin, 0)`. Cone geodesics are computed by planar
//! unfolding: the triangle with side lengths `t`, `t'` and enclosed angle
//! `d_π(x, x')` is laid out in ℝ², the geodesic read off as the straight
//! segment, and the base direction recovered at proportional arc-length.
//! Pairs with base angle `>= π` (geodesic through the apex) are rejected.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::means::Exponent;

/// A point of one of the model spaces. Euclidean and ℓp points are plain
/// coordinate vectors; cone points carry a base direction and a radius.
///
/// Serialized as a bare JSON array for vectors and `{"dir": ..., "r": t}`
/// for cone points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Vector(Vec<f64>),
    Cone {
        dir: Box<Point>,
        r: f64,
    },
}

impl Point {
    pub fn vector(coords: impl Into<Vec<f64>>) -> Self {
        Point::Vector(coords.into())
    }

    /// Cone point `(dir, r)`. Radius-zero points are not canonicalized here
    /// (that needs the base space); use [`Space::cone_point`] when building
    /// points for a specific cone.
    pub fn cone(dir: Point, r: f64) -> Self {
        Point::Cone { dir: Box::new(dir), r }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Point::Vector(v) => Some(v),
            Point::Cone { .. } => None,
        }
    }

    pub fn as_cone(&self) -> Option<(&Point, f64)> {
        match self {
            Point::Cone { dir, r } => Some((dir, *r)),
            Point::Vector(_) => None,
        }
    }
}

/// Handle for a model space: carries the kind and dimension metadata and
/// exposes distance, midpoint, geodesic evaluation and (for cones) the
/// central-ray projection.
#[derive(Clone, Debug, PartialEq)]
pub enum Space {
    Euclidean { dim: usize },
    Lp { dim: usize, p: Exponent },
    Cone { base: Box<Space> },
}

impl Space {
    pub fn euclidean(dim: usize) -> Self {
        Space::Euclidean { dim }
    }

    pub fn lp(dim: usize, p: Exponent) -> Self {
        Space::Lp { dim, p }
    }

    pub fn cone_over(base: Space) -> Self {
        Space::Cone { base: Box::new(base) }
    }

    /// Canonical origin: the zero vector, or the apex for cones.
    pub fn origin(&self) -> Point {
        match self {
            Space::Euclidean { dim } | Space::Lp { dim, .. } => Point::Vector(vec![0.0; *dim]),
            Space::Cone { base } => Point::cone(base.origin(), 0.0),
        }
    }

    /// Number of chart coordinates (cone points chart as base coords + radius).
    pub fn chart_dim(&self) -> usize {
        match self {
            Space::Euclidean { dim } | Space::Lp { dim, .. } => *dim,
            Space::Cone { base } => base.chart_dim() + 1,
        }
    }

    /// Build a validated, apex-canonicalized cone point. Errors unless the
    /// space is a cone.
    pub fn cone_point(&self, dir: Point, r: f64) -> Result<Point> {
        match self {
            Space::Cone { base } => {
                if !r.is_finite() || r < 0.0 {
                    return Err(Error::InvalidPoint(format!(
                        "cone radius must be finite and >= 0, got {r}"
                    )));
                }
                base.validate_point(&dir)?;
                if r == 0.0 {
                    Ok(Point::cone(base.origin(), 0.0))
                } else {
                    Ok(Point::cone(dir, r))
                }
            }
            _ => Err(Error::InvalidPoint("cone_point on a non-cone space".into())),
        }
    }

    /// Normalize a point to canonical form (cone apex representative).
    pub fn canonicalize(&self, p: &Point) -> Result<Point> {
        self.validate_point(p)?;
        match (self, p) {
            (Space::Cone { base }, Point::Cone { dir, r }) => {
                if *r == 0.0 {
                    Ok(Point::cone(base.origin(), 0.0))
                } else {
                    Ok(Point::cone(base.canonicalize(dir)?, *r))
                }
            }
            _ => Ok(p.clone()),
        }
    }

    /// Check that `p` is a member of this space (dimension, finiteness,
    /// non-negative cone radius).
    pub fn validate_point(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (Space::Euclidean { dim } | Space::Lp { dim, .. }, Point::Vector(v)) => {
                if v.len() != *dim {
                    return Err(Error::DimensionMismatch { expected: *dim, got: v.len() });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidPoint("non-finite coordinate".into()));
                }
                Ok(())
            }
            (Space::Cone { base }, Point::Cone { dir, r }) => {
                if !r.is_finite() || *r < 0.0 {
                    return Err(Error::InvalidPoint(format!("invalid cone radius {r}")));
                }
                base.validate_point(dir)
            }
            _ => Err(Error::InvalidPoint(format!(
                "point kind does not match space {self}"
            ))),
        }
    }

    /// Metric distance between two points of this space.
    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        self.validate_point(a)?;
        self.validate_point(b)?;
        Ok(self.distance_unchecked(a, b))
    }

    pub(crate) fn distance_unchecked(&self, a: &Point, b: &Point) -> f64 {
        match self {
            Space::Euclidean { .. } => {
                let (a, b) = (a.as_vector().unwrap(), b.as_vector().unwrap());
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            }
            Space::Lp { p, .. } => {
                let (a, b) = (a.as_vector().unwrap(), b.as_vector().unwrap());
                lp_norm(a.iter().zip(b).map(|(x, y)| x - y), *p)
            }
            Space::Cone { base } => {
                let (xa, ta) = a.as_cone().unwrap();
                let (xb, tb) = b.as_cone().unwrap();
                if ta == 0.0 || tb == 0.0 {
                    // distance to the apex is the radius, whatever the direction
                    return ta.max(tb);
                }
                let alpha = clamp_angle(base.distance_unchecked(xa, xb));
                let d2 = ta * ta + tb * tb - 2.0 * ta * tb * alpha.cos();
                d2.max(0.0).sqrt()
            }
        }
    }

    /// Midpoint `m` with `d(a,m) = d(b,m) = d(a,b)/2`.
    pub fn midpoint(&self, a: &Point, b: &Point) -> Result<Point> {
        self.geodesic_point(a, b, 0.5)
    }

    /// Constant-speed geodesic evaluation: `d(a, γ(t)) = t·d(a,b)` for
    /// `t ∈ [0,1]`. Linear interpolation for the normed spaces; planar
    /// unfolding for cones.
    pub fn geodesic_point(&self, a: &Point, b: &Point, t: f64) -> Result<Point> {
        self.validate_point(a)?;
        self.validate_point(b)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "geodesic parameter must lie in [0,1], got {t}"
            )));
        }
        self.geodesic_point_unchecked(a, b, t)
    }

    pub(crate) fn geodesic_point_unchecked(&self, a: &Point, b: &Point, t: f64) -> Result<Point> {
        match self {
            Space::Euclidean { .. } | Space::Lp { .. } => {
                let (va, vb) = (a.as_vector().unwrap(), b.as_vector().unwrap());
                Ok(Point::Vector(
                    va.iter().zip(vb).map(|(x, y)| x + t * (y - x)).collect(),
                ))
            }
            Space::Cone { base } => {
                let (xa, ta) = a.as_cone().unwrap();
                let (xb, tb) = b.as_cone().unwrap();
                if ta == 0.0 && tb == 0.0 {
                    return Ok(Point::cone(base.origin(), 0.0));
                }
                let alpha = if ta == 0.0 || tb == 0.0 {
                    0.0
                } else {
                    clamp_angle(base.distance_unchecked(xa, xb))
                };
                if alpha >= std::f64::consts::PI {
                    return Err(Error::ApexGeodesic { angle: alpha });
                }
                // unfold into the plane: a at angle 0, b at angle alpha
                let (ax, ay) = (ta, 0.0);
                let (bx, by) = (tb * alpha.cos(), tb * alpha.sin());
                let px = ax + t * (bx - ax);
                let py = ay + t * (by - ay);
                let r = (px * px + py * py).sqrt();
                if r < APEX_EPS {
                    return Ok(Point::cone(base.origin(), 0.0));
                }
                let beta = py.atan2(px).clamp(0.0, alpha.max(0.0));
                let dir = if alpha == 0.0 {
                    if ta == 0.0 { xb.clone() } else { xa.clone() }
                } else {
                    base.geodesic_point_unchecked(xa, xb, beta / alpha)?
                };
                Ok(Point::cone(dir, r))
            }
        }
    }

    /// Projection of a cone point onto the central ray `{(origin, r) | r >= 0}`:
    /// `(x, r) ↦ (origin, r·cos(d_base(x, origin)))`, valid for base angle
    /// up to π/2.
    pub fn cone_ray_projection(&self, q: &Point) -> Result<Point> {
        let base = match self {
            Space::Cone { base } => base,
            _ => {
                return Err(Error::InvalidParameter(
                    "cone_ray_projection requires a cone space".into(),
                ))
            }
        };
        self.validate_point(q)?;
        let (x, r) = q.as_cone().unwrap();
        if r == 0.0 {
            return Ok(Point::cone(base.origin(), 0.0));
        }
        let angle = base.distance_unchecked(x, &base.origin());
        if angle > std::f64::consts::FRAC_PI_2 + 1e-12 {
            return Err(Error::ProjectionRange { angle });
        }
        let proj = r * angle.cos();
        if proj < APEX_EPS {
            return Ok(Point::cone(base.origin(), 0.0));
        }
        Ok(Point::cone(base.origin(), proj))
    }

    /// Chart coordinates used by the derivative-free solvers: identity for
    /// the normed spaces, `[dir..., r]` for cones.
    pub fn to_chart(&self, p: &Point) -> Vec<f64> {
        match (self, p) {
            (Space::Euclidean { .. } | Space::Lp { .. }, Point::Vector(v)) => v.clone(),
            (Space::Cone { base }, Point::Cone { dir, r }) => {
                let mut c = base.to_chart(dir);
                c.push(*r);
                c
            }
            _ => panic!("point does not belong to space"),
        }
    }

    /// Inverse of [`Space::to_chart`]. Cone radii are clamped to `>= 0` and
    /// radius-zero points canonicalized to the apex.
    pub fn from_chart(&self, coords: &[f64]) -> Point {
        match self {
            Space::Euclidean { .. } | Space::Lp { .. } => Point::Vector(coords.to_vec()),
            Space::Cone { base } => {
                let (dir_coords, r) = coords.split_at(coords.len() - 1);
                let r = r[0].max(0.0);
                if r < APEX_EPS {
                    Point::cone(base.origin(), 0.0)
                } else {
                    Point::cone(base.from_chart(dir_coords), r)
                }
            }
        }
    }

    /// Uniform sample from the model region used by the randomized checkers:
    /// the unit ball for the normed spaces; directions in the base unit ball
    /// with radius uniform on `[0, 2)` for cones (base angles then stay
    /// below π, so midpoints exist for every sampled pair).
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Point {
        match self {
            Space::Euclidean { dim } | Space::Lp { dim, .. } => {
                Point::Vector(sample_unit_ball(*dim, rng))
            }
            Space::Cone { base } => {
                let dir = base.sample_point(rng);
                let r: f64 = rng.random::<f64>() * 2.0;
                if r < APEX_EPS {
                    Point::cone(base.origin(), 0.0)
                } else {
                    Point::cone(dir, r)
                }
            }
        }
    }

    /// Approximate equality via the metric.
    pub fn points_eq(&self, a: &Point, b: &Point, tol: f64) -> bool {
        self.distance(a, b).map(|d| d <= tol).unwrap_or(false)
    }
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Space::Euclidean { dim } => write!(f, "euclidean:{dim}"),
            Space::Lp { dim, p } => write!(f, "lp:{dim}:{p}"),
            Space::Cone { base } => write!(f, "cone:{base}"),
        }
    }
}

impl std::str::FromStr for Space {
    type Err = Error;

    /// Parse `euclidean:N`, `lp:N:p` or `cone:<base>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(base) = s.strip_prefix("cone:") {
            return Ok(Space::cone_over(base.parse()?));
        }
        let mut parts = s.split(':');
        match parts.next() {
            Some("euclidean") | Some("r") => {
                let dim = parse_dim(parts.next(), s)?;
                Ok(Space::euclidean(dim))
            }
            Some("lp") => {
                let dim = parse_dim(parts.next(), s)?;
                let p: Exponent = parts
                    .next()
                    .ok_or_else(|| Error::InvalidParameter(format!("missing p in {s:?}")))?
                    .parse()?;
                Ok(Space::lp(dim, p))
            }
            _ => Err(Error::InvalidParameter(format!(
                "cannot parse space {s:?} (expected euclidean:N, lp:N:p or cone:<base>)"
            ))),
        }
    }
}

fn parse_dim(part: Option<&str>, whole: &str) -> Result<usize> {
    let dim: usize = part
        .ok_or_else(|| Error::InvalidParameter(format!("missing dimension in {whole:?}")))?
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad dimension in {whole:?}")))?;
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    Ok(dim)
}

/// Radii below this are identified with the apex.
const APEX_EPS: f64 = 1e-300;

fn clamp_angle(d: f64) -> f64 {
    d.min(std::f64::consts::PI)
}

fn lp_norm(diffs: impl Iterator<Item = f64>, p: Exponent) -> f64 {
    let abs: Vec<f64> = diffs.map(f64::abs).collect();
    match p {
        Exponent::Infinity => abs.into_iter().fold(0.0, f64::max),
        Exponent::Finite(p) => {
            let m = abs.iter().cloned().fold(0.0, f64::max);
            if m == 0.0 {
                return 0.0;
            }
            let s: f64 = abs.iter().map(|x| (x / m).powf(p)).sum();
            m * s.powf(1.0 / p)
        }
    }
}

/// Uniform sample from the unit ball of ℝⁿ: gaussian direction scaled by
/// U^(1/n).
pub fn sample_unit_ball<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            let u: f64 = rng.random::<f64>();
            let scale = u.powf(1.0 / dim as f64) / norm;
            return g.into_iter().map(|x| x * scale).collect();
        }
    }
}

/// Standard basis vector `e_i` of ℝⁿ.
pub fn basis_vector(dim: usize, i: usize) -> Point {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    Point::Vector(v)
}
