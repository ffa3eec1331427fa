use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::GeodesicCurve;
use crate::geometry::{Point, SetDescriptor};
use crate::oracles::OracleSpec;

use super::{Motion, MovingSet, PiecewiseLinear, Segment};

/// A moving set, an initial point, and optionally the closed-form oracle it realizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario", into = "RawScenario")]
pub struct Scenario {
    pub name: Option<String>,
    pub moving_set: MovingSet,
    pub y0: Point,
    pub oracle: Option<OracleSpec>,
}

impl Scenario {
    /// Parses a scenario. Errors inside nested values carry their JSON path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Self = serde_path_to_error::deserialize(&mut *de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                Error::Json(inner)
            } else {
                Error::Scenario(format!("{path}: {inner}"))
            }
        })?;
        de.end()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization is infallible")
    }
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    dimension: usize,
    r: f64,
    horizon: f64,
    segments: Vec<RawSegment>,
    #[serde(default)]
    jumps: Vec<RawJump>,
    y0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleSpec>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    from: f64,
    to: f64,
    motion: RawMotion,
    lip_excess: f64,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawMotion {
    Static {
        base: SetDescriptor,
    },
    Translate {
        base: SetDescriptor,
        velocity: Vec<f64>,
    },
    Offset {
        base: SetDescriptor,
        offset_fn: PiecewiseLinear,
    },
    GeodesicFill {
        z0: SetDescriptor,
        z1: SetDescriptor,
    },
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJump {
    time: f64,
    left: SetDescriptor,
    right: SetDescriptor,
}

impl TryFrom<RawMotion> for Motion {
    type Error = Error;

    fn try_from(raw: RawMotion) -> Result<Self> {
        Ok(match raw {
            RawMotion::Static { base } => Motion::Static { base },
            RawMotion::Translate { base, velocity } => Motion::Translate {
                base,
                velocity: Point::new(velocity)?,
            },
            RawMotion::Offset { base, offset_fn } => Motion::Offset {
                base,
                offset: offset_fn,
            },
            RawMotion::GeodesicFill { z0, z1 } => Motion::GeodesicFill {
                curve: GeodesicCurve::new(z0, z1)?,
            },
        })
    }
}

impl From<&Motion> for RawMotion {
    fn from(m: &Motion) -> Self {
        match m {
            Motion::Static { base } => RawMotion::Static { base: base.clone() },
            Motion::Translate { base, velocity } => RawMotion::Translate {
                base: base.clone(),
                velocity: velocity.coords().to_vec(),
            },
            Motion::Offset { base, offset } => RawMotion::Offset {
                base: base.clone(),
                offset_fn: offset.clone(),
            },
            Motion::GeodesicFill { curve } => RawMotion::GeodesicFill {
                z0: curve.z0().clone(),
                z1: curve.z1().clone(),
            },
        }
    }
}

/// Prefixes an error with the JSON path it came from.
fn at(path: String) -> impl FnOnce(Error) -> Error {
    move |e| match e {
        Error::Scenario(msg) if msg.starts_with("segments[") || msg.starts_with("jumps[") => Error::Scenario(msg),
        other => Error::Scenario(format!("{path}: {other}")),
    }
}

impl TryFrom<RawScenario> for Scenario {
    type Error = Error;

    fn try_from(raw: RawScenario) -> Result<Self> {
        let segments = raw
            .segments
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                let motion = Motion::try_from(s.motion).map_err(at(format!("segments[{i}].motion")))?;
                Segment::new(s.from, s.to, motion, s.lip_excess).map_err(at(format!("segments[{i}]")))
            })
            .collect::<Result<Vec<_>>>()?;
        let jumps = raw.jumps.into_iter().map(|j| (j.time, j.left, j.right)).collect();
        let moving_set = MovingSet::new(raw.dimension, raw.r, raw.horizon, segments, jumps)?;
        let y0 = Point::new(raw.y0).map_err(at("y0".into()))?;
        y0.check_dim(raw.dimension).map_err(at("y0".into()))?;
        if let Some(oracle) = &raw.oracle {
            oracle.check_dim(raw.dimension).map_err(at("oracle".into()))?;
        }
        Ok(Scenario {
            name: raw.name,
            moving_set,
            y0,
            oracle: raw.oracle,
        })
    }
}

impl From<Scenario> for RawScenario {
    fn from(s: Scenario) -> Self {
        let ms = &s.moving_set;
        RawScenario {
            name: s.name,
            dimension: ms.dim(),
            r: ms.r(),
            horizon: ms.horizon(),
            segments: ms
                .segments()
                .iter()
                .map(|seg| RawSegment {
                    from: seg.from,
                    to: seg.to,
                    motion: RawMotion::from(&seg.motion),
                    lip_excess: seg.lip_excess,
                })
                .collect(),
            jumps: ms
                .jumps()
                .iter()
                .map(|j| RawJump {
                    time: j.time,
                    left: j.left.clone(),
                    right: j.right.clone(),
                })
                .collect(),
            y0: s.y0.coords().to_vec(),
            oracle: s.oracle,
        }
    }
}
