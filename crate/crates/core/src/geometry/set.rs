use serde::{Deserialize, Serialize};

use super::point::Point;
use crate::error::{Error, Result};

/// Relative tolerance under which two candidate nearest points of a finite set are
/// considered tied.
const TIE_RTOL: f64 = 1e-12;

/// Normals whose length is this close to 1 count as unit vectors.
const UNIT_TOL: f64 = 8.0 * f64::EPSILON;

/// A closed, uniformly prox-regular subset of `R^d`.
///
/// Every variant knows its own prox-regularity radius (see [`SetDescriptor::prox_radius`]).
/// Values are validated on construction and on deserialization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", try_from = "RawSet")]
pub enum SetDescriptor {
    /// `{x : <normal, x> <= offset}` with a unit normal.
    HalfSpace { normal: Point, offset: f64 },
    /// Closed ball.
    Ball { center: Point, radius: f64 },
    /// Closure of the complement of the open ball.
    BallComplement { center: Point, radius: f64 },
    /// A finite set of distinct points.
    FinitePoints { points: Vec<Point> },
    /// `inner + B(0, rho)`. The inner set is never itself a dilation.
    Dilation { inner: Box<SetDescriptor>, rho: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawSet {
    HalfSpace { normal: Vec<f64>, offset: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    BallComplement { center: Vec<f64>, radius: f64 },
    FinitePoints { points: Vec<Vec<f64>> },
    Dilation { inner: Box<SetDescriptor>, rho: f64 },
}

impl TryFrom<RawSet> for SetDescriptor {
    type Error = Error;

    fn try_from(raw: RawSet) -> Result<Self> {
        match raw {
            RawSet::HalfSpace { normal, offset } => Self::half_space(Point::new(normal)?, offset),
            RawSet::Ball { center, radius } => Self::ball(Point::new(center)?, radius),
            RawSet::BallComplement { center, radius } => Self::ball_complement(Point::new(center)?, radius),
            RawSet::FinitePoints { points } => {
                Self::finite_points(points.into_iter().map(Point::new).collect::<Result<Vec<_>>>()?)
            }
            RawSet::Dilation { inner, rho } => {
                if !rho.is_finite() || rho < 0.0 {
                    return Err(Error::InvalidDescriptor(format!(
                        "dilation rho must be finite and >= 0, got {rho}"
                    )));
                }
                // Keep an explicit zero dilation as written; `dilate` is the normalizing path.
                let (inner, rho) = match *inner {
                    SetDescriptor::Dilation { inner, rho: r0 } => (*inner, r0 + rho),
                    other => (other, rho),
                };
                let radius = inner.prox_radius();
                if rho >= radius {
                    return Err(Error::RhoTooLarge { rho, radius });
                }
                Ok(SetDescriptor::Dilation {
                    inner: Box::new(inner),
                    rho,
                })
            }
        }
    }
}

/// Nearest point of a set together with the distance to it.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult {
    pub point: Point,
    pub dist: f64,
    /// Whether the nearest point is known to be the only one.
    pub unique: bool,
}

fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDescriptor(format!(
            "radius must be finite and positive, got {radius}"
        )))
    }
}

impl SetDescriptor {
    /// Half-space `{x : <normal, x> <= offset}`. The normal is rescaled to unit length
    /// (and the offset with it). A normal already of unit length up to rounding is kept
    /// as given, so normalizing twice changes nothing.
    pub fn half_space(normal: Point, offset: f64) -> Result<Self> {
        if !offset.is_finite() || !normal.is_finite() {
            return Err(Error::NonFinite("half-space"));
        }
        let len = normal.norm();
        if len == 0.0 || !len.is_finite() {
            return Err(Error::InvalidDescriptor("half-space normal must be nonzero".into()));
        }
        if (len - 1.0).abs() <= UNIT_TOL {
            return Ok(Self::HalfSpace { normal, offset });
        }
        Ok(Self::HalfSpace {
            normal: normal.scale(1.0 / len),
            offset: offset / len,
        })
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self::Ball { center, radius })
    }

    pub fn ball_complement(center: Point, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self::BallComplement { center, radius })
    }

    pub fn finite_points(points: Vec<Point>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidDescriptor("finite point set is empty".into()));
        };
        let dim = first.dim();
        for p in &points {
            p.check_dim(dim)?;
        }
        let set = Self::FinitePoints { points };
        if set.prox_radius() <= 0.0 {
            return Err(Error::InvalidDescriptor("finite point set has repeated points".into()));
        }
        Ok(set)
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            Self::HalfSpace { normal, .. } => normal.dim(),
            Self::Ball { center, .. } | Self::BallComplement { center, .. } => center.dim(),
            Self::FinitePoints { points } => points[0].dim(),
            Self::Dilation { inner, .. } => inner.dim(),
        }
    }

    /// The radius `r` for which the set is `r`-prox-regular (`+inf` for convex sets).
    pub fn prox_radius(&self) -> f64 {
        match self {
            Self::HalfSpace { .. } | Self::Ball { .. } => f64::INFINITY,
            Self::BallComplement { radius, .. } => *radius,
            Self::FinitePoints { points } => {
                let mut min = f64::INFINITY;
                for (i, p) in points.iter().enumerate() {
                    for q in &points[i + 1..] {
                        min = min.min(p.dist(q));
                    }
                }
                0.5 * min
            }
            Self::Dilation { inner, rho } => inner.prox_radius() - rho,
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            Self::HalfSpace { .. } | Self::BallComplement { .. } => false,
            Self::Ball { .. } | Self::FinitePoints { .. } => true,
            Self::Dilation { inner, .. } => inner.is_bounded(),
        }
    }

    /// Rigid translation by `shift`.
    pub fn translated(&self, shift: &Point) -> SetDescriptor {
        match self {
            Self::HalfSpace { normal, offset } => Self::HalfSpace {
                normal: normal.clone(),
                offset: offset + normal.dot(shift),
            },
            Self::Ball { center, radius } => Self::Ball {
                center: center + shift,
                radius: *radius,
            },
            Self::BallComplement { center, radius } => Self::BallComplement {
                center: center + shift,
                radius: *radius,
            },
            Self::FinitePoints { points } => Self::FinitePoints {
                points: points.iter().map(|p| p + shift).collect(),
            },
            Self::Dilation { inner, rho } => Self::Dilation {
                inner: Box::new(inner.translated(shift)),
                rho: *rho,
            },
        }
    }

    /// Checks that every coordinate carried by the set has dimension `dim`.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            Self::FinitePoints { points } => points.iter().try_for_each(|p| p.check_dim(dim)),
            Self::Dilation { inner, .. } => inner.check_dim(dim),
            _ => {
                let d = self.dim();
                if d == dim {
                    Ok(())
                } else {
                    Err(Error::DimensionMismatch {
                        expected: dim,
                        found: d,
                    })
                }
            }
        }
    }

    /// Closed-form distance `d(x, self)`.
    pub fn distance(&self, x: &Point) -> f64 {
        match self {
            Self::HalfSpace { normal, offset } => (normal.dot(x) - offset).max(0.0),
            Self::Ball { center, radius } => (x.dist(center) - radius).max(0.0),
            Self::BallComplement { center, radius } => (radius - x.dist(center)).max(0.0),
            Self::FinitePoints { points } => points.iter().map(|p| p.dist(x)).fold(f64::INFINITY, f64::min),
            Self::Dilation { inner, rho } => (inner.distance(x) - rho).max(0.0),
        }
    }

    /// Whether `d(x, self) <= tol`.
    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        x.check_dim(self.dim())?;
        Ok(self.distance(x) <= tol)
    }

    /// Metric projection of `x` onto the set.
    pub fn project(&self, x: &Point) -> Result<ProjectionResult> {
        x.check_dim(self.dim())?;
        if !x.is_finite() {
            return Err(Error::NonFinite("projected point"));
        }
        match self {
            Self::HalfSpace { normal, offset } => {
                let excess = normal.dot(x) - offset;
                if excess <= 0.0 {
                    return Ok(identity(x));
                }
                Ok(ProjectionResult {
                    point: x.axpy(-excess, normal),
                    dist: excess,
                    unique: true,
                })
            }
            Self::Ball { center, radius } => {
                let off = x - center;
                let len = off.norm();
                if len <= *radius {
                    return Ok(identity(x));
                }
                Ok(ProjectionResult {
                    point: center.axpy(radius / len, &off),
                    dist: len - radius,
                    unique: true,
                })
            }
            Self::BallComplement { center, radius } => {
                let off = x - center;
                let len = off.norm();
                if len >= *radius {
                    return Ok(identity(x));
                }
                if len == 0.0 {
                    return Err(Error::AmbiguousProjection {
                        dist: *radius,
                        radius: *radius,
                    });
                }
                Ok(ProjectionResult {
                    point: center.axpy(radius / len, &off),
                    dist: radius - len,
                    unique: true,
                })
            }
            Self::FinitePoints { points } => {
                let mut best = (f64::INFINITY, 0usize);
                let mut second = f64::INFINITY;
                for (i, p) in points.iter().enumerate() {
                    let d = p.dist(x);
                    if d < best.0 {
                        second = best.0;
                        best = (d, i);
                    } else if d < second {
                        second = d;
                    }
                }
                let (dist, idx) = best;
                if second - dist <= TIE_RTOL * dist.max(1.0) {
                    return Err(Error::AmbiguousProjection {
                        dist,
                        radius: self.prox_radius(),
                    });
                }
                Ok(ProjectionResult {
                    point: points[idx].clone(),
                    dist,
                    unique: true,
                })
            }
            Self::Dilation { inner, rho } => {
                let base = match inner.project(x) {
                    Ok(b) => b,
                    // Inside the dilation every point is its own projection, tie or not.
                    Err(Error::AmbiguousProjection { dist, .. }) if dist <= *rho => return Ok(identity(x)),
                    Err(e) => return Err(e),
                };
                if base.dist <= *rho {
                    return Ok(identity(x));
                }
                let dir = x - &base.point;
                Ok(ProjectionResult {
                    point: base.point.axpy(rho / base.dist, &dir),
                    dist: base.dist - rho,
                    unique: base.unique,
                })
            }
        }
    }

    /// The set inflated by a closed ball of radius `rho`, i.e. `K + B(0, rho)`.
    ///
    /// Requires `0 <= rho < prox_radius`; the result is `(r - rho)`-prox-regular.
    /// `dilate(K, 0)` is `K` itself and nested dilations collapse into one.
    pub fn dilate(&self, rho: f64) -> Result<SetDescriptor> {
        if !rho.is_finite() || rho < 0.0 {
            return Err(Error::InvalidDescriptor(format!(
                "dilation radius must be finite and >= 0, got {rho}"
            )));
        }
        let radius = self.prox_radius();
        if rho >= radius {
            return Err(Error::RhoTooLarge { rho, radius });
        }
        if rho == 0.0 {
            return Ok(self.clone());
        }
        Ok(match self {
            Self::Dilation { inner, rho: r0 } => Self::Dilation {
                inner: inner.clone(),
                rho: r0 + rho,
            },
            other => Self::Dilation {
                inner: Box::new(other.clone()),
                rho,
            },
        })
    }

    /// The underlying set of a dilation (or the set itself) and the dilation radius.
    pub fn core(&self) -> (&SetDescriptor, f64) {
        match self {
            Self::Dilation { inner, rho } => (inner, *rho),
            other => (other, 0.0),
        }
    }
}

fn identity(x: &Point) -> ProjectionResult {
    ProjectionResult {
        point: x.clone(),
        dist: 0.0,
        unique: true,
    }
}
