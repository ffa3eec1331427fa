//! Moving sets `t -> C(t)` on `[0, T]` built from continuous segments and declared jumps,
//! their retraction arc length, and the reparametrization into a 1-Lipschitz family.

mod json;
mod normalized;
mod piecewise;
mod profile;

pub use json::Scenario;
pub use normalized::{reparametrize, NormalizedMovingSet};
pub use piecewise::PiecewiseLinear;
pub use profile::{retraction_profile, JumpIncrement, Preimage, ProfileSegment, RetractionProfile};

use crate::error::{Error, Result};
use crate::geodesic::GeodesicCurve;
use crate::geometry::{excess, ExcessPolicy, Point, SetDescriptor};

/// Tolerance for excess-based checks on scenario data (continuity at segment
/// boundaries, declared moduli, jump endpoints).
pub const EXCESS_TOL: f64 = 1e-9;

/// Number of sample times used to check a declared Lipschitz modulus.
const LIP_SAMPLES: usize = 16;

/// A one-parameter family of sets `s -> C(s)` on `[0, horizon]`.
pub trait SetFamily {
    fn horizon(&self) -> f64;
    fn dim(&self) -> usize;
    /// A radius `r` such that every member is `r`-prox-regular.
    fn prox_radius(&self) -> f64;
    fn at(&self, s: f64) -> Result<SetDescriptor>;
}

/// How a segment evolves in time.
#[derive(Clone, Debug, PartialEq)]
pub enum Motion {
    Static {
        base: SetDescriptor,
    },
    /// `base + (t - from) * velocity`.
    Translate {
        base: SetDescriptor,
        velocity: Point,
    },
    /// Half-space with the normal of `base` and offset `offset(t)` (absolute time).
    Offset {
        base: SetDescriptor,
        offset: PiecewiseLinear,
    },
    /// Excess geodesic from `z0` to `z1` traversed over the segment.
    GeodesicFill {
        curve: GeodesicCurve,
    },
}

/// A continuous piece `[from, to)` of a moving set.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub from: f64,
    pub to: f64,
    pub motion: Motion,
    /// `e(C(s), C(t)) <= lip_excess * (t - s)` on the segment.
    pub lip_excess: f64,
}

impl Segment {
    pub fn new(from: f64, to: f64, motion: Motion, lip_excess: f64) -> Result<Self> {
        if !(from.is_finite() && to.is_finite() && from < to) {
            return Err(Error::Scenario(format!(
                "segment interval [{from}, {to}) is empty or not finite"
            )));
        }
        if !(lip_excess.is_finite() && lip_excess >= 0.0) {
            return Err(Error::Scenario(format!(
                "segment lip_excess {lip_excess} must be finite and >= 0"
            )));
        }
        if let Motion::Offset { base, offset } = &motion {
            if !matches!(base, SetDescriptor::HalfSpace { .. }) {
                return Err(Error::Scenario("offset motion needs a half_space base".into()));
            }
            if offset.has_jumps() {
                return Err(Error::Scenario(
                    "offset_fn must be continuous; split the segment and declare the jump".into(),
                ));
            }
        }
        if let Motion::Translate { base, velocity } = &motion {
            velocity.check_dim(base.dim())?;
            if !velocity.is_finite() {
                return Err(Error::NonFinite("translate velocity"));
            }
        }
        Ok(Self {
            from,
            to,
            motion,
            lip_excess,
        })
    }

    pub fn dim(&self) -> usize {
        match &self.motion {
            Motion::Static { base } | Motion::Translate { base, .. } | Motion::Offset { base, .. } => base.dim(),
            Motion::GeodesicFill { curve } => curve.z1().dim(),
        }
    }

    /// The set at time `t`, with `t` clamped to `[from, to]`. Evaluating at `to` gives the
    /// left limit at the segment's right end.
    pub fn eval(&self, t: f64) -> SetDescriptor {
        let t = t.clamp(self.from, self.to);
        match &self.motion {
            Motion::Static { base } => base.clone(),
            Motion::Translate { base, velocity } => base.translated(&velocity.scale(t - self.from)),
            Motion::Offset { base, offset } => match base {
                SetDescriptor::HalfSpace { normal, .. } => SetDescriptor::HalfSpace {
                    normal: normal.clone(),
                    offset: offset.eval(t),
                },
                _ => unreachable!("checked in Segment::new"),
            },
            Motion::GeodesicFill { curve } => curve.at((t - self.from) / (self.to - self.from)),
        }
    }

    /// Smallest prox radius over the segment's sets.
    fn prox_radius(&self) -> f64 {
        match &self.motion {
            Motion::Static { base } | Motion::Translate { base, .. } | Motion::Offset { base, .. } => {
                base.prox_radius()
            }
            Motion::GeodesicFill { curve } => curve.z0().prox_radius().min(curve.z1().prox_radius()),
        }
    }

    /// Interior times where the motion changes slope.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        match &self.motion {
            Motion::Offset { offset, .. } => offset.breakpoints_in(self.from, self.to).collect(),
            _ => Vec::new(),
        }
    }

    fn check_lip_excess(&self, index: usize) -> Result<()> {
        if let Motion::Offset { offset, .. } = &self.motion {
            let rate = offset.max_descent_rate(self.from, self.to);
            if rate > self.lip_excess + EXCESS_TOL {
                return Err(Error::Scenario(format!(
                    "segments[{index}].lip_excess {} is below the offset descent rate {rate}",
                    self.lip_excess
                )));
            }
        }
        let times: Vec<f64> = (0..=LIP_SAMPLES)
            .map(|k| self.from + (self.to - self.from) * k as f64 / LIP_SAMPLES as f64)
            .collect();
        let sets: Vec<SetDescriptor> = times.iter().map(|&t| self.eval(t)).collect();
        for i in 0..times.len() {
            for j in (i + 1)..times.len() {
                // Consecutive pairs and every pair anchored at the segment start.
                if j != i + 1 && i != 0 {
                    continue;
                }
                let e = excess(&sets[i], &sets[j], ExcessPolicy::default())?.value;
                let allowed = self.lip_excess * (times[j] - times[i]) + EXCESS_TOL;
                if !(e <= allowed) {
                    return Err(Error::Scenario(format!(
                        "segments[{index}].lip_excess {} violated: e(C({}), C({})) = {e}",
                        self.lip_excess, times[i], times[j]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A declared discontinuity: `left = C(t-)`, `right = C(t)`, `rho = e(left, right)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpRecord {
    pub time: f64,
    pub left: SetDescriptor,
    pub right: SetDescriptor,
    pub rho: f64,
}

/// Per-jump admissibility line.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpCheck {
    pub time: f64,
    pub rho: f64,
    pub r: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub jumps: Vec<JumpCheck>,
}

impl AdmissibilityReport {
    pub fn pass(&self) -> bool {
        self.jumps.iter().all(|j| j.pass)
    }

    pub fn first_failure(&self) -> Option<&JumpCheck> {
        self.jumps.iter().find(|j| !j.pass)
    }
}

/// A right-continuous moving set with finitely many declared jumps.
#[derive(Clone, Debug, PartialEq)]
pub struct MovingSet {
    dim: usize,
    r: f64,
    horizon: f64,
    segments: Vec<Segment>,
    jumps: Vec<JumpRecord>,
    /// For each segment, the index of the jump at its start.
    jump_at_start: Vec<Option<usize>>,
}

impl MovingSet {
    /// Validates and assembles a moving set. Jumps are given as `(time, left, right)`;
    /// their sizes are computed here.
    pub fn new(
        dim: usize,
        r: f64,
        horizon: f64,
        segments: Vec<Segment>,
        jumps: Vec<(f64, SetDescriptor, SetDescriptor)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Scenario("dimension must be positive".into()));
        }
        if !(r > 0.0) || r.is_nan() {
            return Err(Error::Scenario(format!("r must be positive, got {r}")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Scenario(format!(
                "horizon must be finite and positive, got {horizon}"
            )));
        }
        let Some(first) = segments.first() else {
            return Err(Error::Scenario("segments must not be empty".into()));
        };
        if first.from != 0.0 {
            return Err(Error::Scenario("segments[0].from must be 0".into()));
        }
        let last = segments.last().expect("nonempty");
        if last.to != horizon {
            return Err(Error::Scenario(format!(
                "last segment ends at {} but the horizon is {horizon}",
                last.to
            )));
        }
        for (i, seg) in segments.iter().enumerate() {
            if seg.dim() != dim {
                return Err(Error::Scenario(format!(
                    "segments[{i}] has dimension {} instead of {dim}",
                    seg.dim()
                )));
            }
            seg.eval(seg.from).check_dim(dim)?;
            if i > 0 && segments[i - 1].to != seg.from {
                return Err(Error::Scenario(format!(
                    "segments[{i}].from = {} does not continue segments[{}].to = {}",
                    seg.from,
                    i - 1,
                    segments[i - 1].to
                )));
            }
            if seg.prox_radius() < r {
                return Err(Error::Scenario(format!(
                    "segments[{i}] is only {}-prox-regular, below r = {r}",
                    seg.prox_radius()
                )));
            }
            seg.check_lip_excess(i)?;
        }

        let mut jump_at_start = vec![None; segments.len()];
        let mut records = Vec::with_capacity(jumps.len());
        let mut prev_time = 0.0;
        for (k, (time, left, right)) in jumps.into_iter().enumerate() {
            if !(time > prev_time) {
                return Err(Error::Scenario(format!(
                    "jumps[{k}].time = {time} must be positive and increasing"
                )));
            }
            prev_time = time;
            let Some(seg) = segments.iter().position(|s| s.from == time) else {
                return Err(Error::Scenario(format!(
                    "jumps[{k}].time = {time} is not a segment boundary"
                )));
            };
            left.check_dim(dim)?;
            right.check_dim(dim)?;
            let before = segments[seg - 1].eval(time);
            let after = segments[seg].eval(time);
            if !same_set(&left, &before)? {
                return Err(Error::Scenario(format!(
                    "jumps[{k}].left does not match the preceding segment at t = {time}"
                )));
            }
            if !same_set(&right, &after)? {
                return Err(Error::Scenario(format!(
                    "jumps[{k}].right does not match the following segment at t = {time}"
                )));
            }
            if left.prox_radius() < r || right.prox_radius() < r {
                return Err(Error::Scenario(format!(
                    "jumps[{k}] endpoints are not {r}-prox-regular"
                )));
            }
            let est = excess(&left, &right, ExcessPolicy::default())?;
            let rho = est.value + est.error_bound;
            if !(rho > EXCESS_TOL) {
                return Err(Error::Scenario(format!(
                    "jumps[{k}] at t = {time} has zero excess; declare a plain boundary instead"
                )));
            }
            jump_at_start[seg] = Some(records.len());
            records.push(JumpRecord { time, left, right, rho });
        }
        for i in 1..segments.len() {
            if jump_at_start[i].is_none() {
                let t = segments[i].from;
                let e = excess(&segments[i - 1].eval(t), &segments[i].eval(t), ExcessPolicy::default())?;
                if e.value > EXCESS_TOL {
                    return Err(Error::Scenario(format!(
                        "undeclared jump of size {} at segment boundary t = {t}",
                        e.value
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            r,
            horizon,
            segments,
            jumps: records,
            jump_at_start,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn jumps(&self) -> &[JumpRecord] {
        &self.jumps
    }

    pub(crate) fn jump_at_start(&self, seg: usize) -> Option<&JumpRecord> {
        self.jump_at_start[seg].map(|j| &self.jumps[j])
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t >= 0.0 && t <= self.horizon {
            Ok(())
        } else {
            Err(Error::OutOfHorizon {
                t,
                horizon: self.horizon,
            })
        }
    }

    /// Index of the segment whose half-open interval holds `t` (the last one for `t = T`).
    pub(crate) fn segment_index(&self, t: f64) -> usize {
        self.segments.partition_point(|s| s.from <= t).saturating_sub(1)
    }

    /// `C(t)`, right-continuous at segment boundaries.
    pub fn snapshot(&self, t: f64) -> Result<SetDescriptor> {
        self.check_time(t)?;
        Ok(self.segments[self.segment_index(t)].eval(t))
    }

    /// `C(t-)`, with `C(0-) = C(0)`.
    pub fn left_limit(&self, t: f64) -> Result<SetDescriptor> {
        self.check_time(t)?;
        if t == 0.0 {
            return self.snapshot(0.0);
        }
        let i = self.segment_index(t);
        if self.segments[i].from == t && i > 0 {
            if let Some(jump) = self.jump_at_start(i) {
                return Ok(jump.left.clone());
            }
            return Ok(self.segments[i - 1].eval(t));
        }
        Ok(self.segments[i].eval(t))
    }

    /// Compares every jump size with the prox radius.
    pub fn check_admissibility(&self) -> AdmissibilityReport {
        AdmissibilityReport {
            jumps: self
                .jumps
                .iter()
                .map(|j| JumpCheck {
                    time: j.time,
                    rho: j.rho,
                    r: self.r,
                    pass: j.rho < self.r,
                })
                .collect(),
        }
    }

    /// Largest declared Lipschitz modulus over the segments.
    pub fn max_lip_excess(&self) -> f64 {
        self.segments.iter().map(|s| s.lip_excess).fold(0.0, f64::max)
    }
}

impl SetFamily for MovingSet {
    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn prox_radius(&self) -> f64 {
        self.r
    }

    fn at(&self, s: f64) -> Result<SetDescriptor> {
        self.snapshot(s)
    }
}

impl SetFamily for GeodesicCurve {
    fn horizon(&self) -> f64 {
        1.0
    }

    fn dim(&self) -> usize {
        self.z1().dim()
    }

    fn prox_radius(&self) -> f64 {
        (self.z1().prox_radius() - self.rho()).min(self.z0().prox_radius())
    }

    fn at(&self, s: f64) -> Result<SetDescriptor> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::OutOfHorizon { t: s, horizon: 1.0 });
        }
        Ok(GeodesicCurve::at(self, s))
    }
}

/// Hausdorff equality within [`EXCESS_TOL`].
fn same_set(a: &SetDescriptor, b: &SetDescriptor) -> Result<bool> {
    Ok(excess(a, b, ExcessPolicy::default())?.value <= EXCESS_TOL
        && excess(b, a, ExcessPolicy::default())?.value <= EXCESS_TOL)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    pub fn hs(offset: f64) -> SetDescriptor {
        SetDescriptor::half_space(p(&[1.0, 0.0]), offset).unwrap()
    }

    /// Static `{x <= 1}` on [0,1), static `{x <= 0.5}` on [1,2], jump 0.5 at t = 1.
    pub fn single_jump() -> MovingSet {
        MovingSet::new(
            2,
            1.0,
            2.0,
            vec![
                Segment::new(0.0, 1.0, Motion::Static { base: hs(1.0) }, 0.0).unwrap(),
                Segment::new(1.0, 2.0, Motion::Static { base: hs(0.5) }, 0.0).unwrap(),
            ],
            vec![(1.0, hs(1.0), hs(0.5))],
        )
        .unwrap()
    }

    #[test]
    fn snapshots() {
        let ball = SetDescriptor::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        let ms = MovingSet::new(
            2,
            1.0,
            3.0,
            vec![Segment::new(
                0.0,
                3.0,
                Motion::Translate {
                    base: ball.clone(),
                    velocity: p(&[1.0, 0.0]),
                },
                1.0,
            )
            .unwrap()],
            vec![],
        )
        .unwrap();
        assert_eq!(
            ms.snapshot(2.0).unwrap(),
            SetDescriptor::ball(p(&[2.0, 0.0]), 1.0).unwrap()
        );
        assert!(matches!(ms.snapshot(3.5), Err(Error::OutOfHorizon { .. })));
        assert!(matches!(ms.left_limit(-1.0), Err(Error::OutOfHorizon { .. })));
        assert_eq!(ms.left_limit(1.5).unwrap(), ms.snapshot(1.5).unwrap());
        assert_eq!(ms.left_limit(0.0).unwrap(), ball);
    }

    #[test]
    fn jumps_are_right_continuous() {
        let ms = single_jump();
        assert_eq!(ms.snapshot(1.0).unwrap(), hs(0.5));
        assert_eq!(ms.snapshot(0.999).unwrap(), hs(1.0));
        assert_eq!(ms.left_limit(1.0).unwrap(), hs(1.0));
        assert_eq!(ms.snapshot(2.0).unwrap(), hs(0.5));
        assert_eq!(ms.jumps()[0].rho, 0.5);
    }

    #[test]
    fn admissibility() {
        let ms = single_jump();
        let rep = ms.check_admissibility();
        assert!(rep.pass());
        assert_eq!(rep.jumps[0].rho, 0.5);
        let big = MovingSet::new(
            2,
            1.0,
            2.0,
            vec![
                Segment::new(0.0, 1.0, Motion::Static { base: hs(1.2) }, 0.0).unwrap(),
                Segment::new(1.0, 2.0, Motion::Static { base: hs(0.0) }, 0.0).unwrap(),
            ],
            vec![(1.0, hs(1.2), hs(0.0))],
        )
        .unwrap();
        let rep = big.check_admissibility();
        assert!(!rep.pass());
        assert_eq!(rep.first_failure().unwrap().time, 1.0);
        let none = MovingSet::new(
            2,
            1.0,
            1.0,
            vec![Segment::new(0.0, 1.0, Motion::Static { base: hs(0.0) }, 0.0).unwrap()],
            vec![],
        )
        .unwrap();
        assert!(none.check_admissibility().pass());
    }

    #[test]
    fn rejects_bad_structure() {
        let seg = |a, b, off| Segment::new(a, b, Motion::Static { base: hs(off) }, 0.0).unwrap();
        // Undeclared jump.
        assert!(MovingSet::new(2, 1.0, 2.0, vec![seg(0.0, 1.0, 1.0), seg(1.0, 2.0, 0.0)], vec![]).is_err());
        // Growth at a boundary is continuous in excess.
        assert!(MovingSet::new(2, 1.0, 2.0, vec![seg(0.0, 1.0, 0.0), seg(1.0, 2.0, 1.0)], vec![]).is_ok());
        // Gap between segments.
        assert!(MovingSet::new(2, 1.0, 2.0, vec![seg(0.0, 1.0, 0.0), seg(1.5, 2.0, 0.0)], vec![]).is_err());
        // Jump endpoints inconsistent with segments.
        assert!(MovingSet::new(
            2,
            1.0,
            2.0,
            vec![seg(0.0, 1.0, 1.0), seg(1.0, 2.0, 0.0)],
            vec![(1.0, hs(0.8), hs(0.0))]
        )
        .is_err());
        // Modulus too small for the motion.
        let moving = Segment::new(
            0.0,
            1.0,
            Motion::Offset {
                base: hs(0.0),
                offset: PiecewiseLinear::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap(),
            },
            0.5,
        )
        .unwrap();
        assert!(MovingSet::new(2, 1.0, 1.0, vec![moving], vec![]).is_err());
        // Prox radius below r.
        let bc = SetDescriptor::ball_complement(p(&[0.0, 0.0]), 0.5).unwrap();
        let s = Segment::new(0.0, 1.0, Motion::Static { base: bc }, 0.0).unwrap();
        assert!(MovingSet::new(2, 1.0, 1.0, vec![s], vec![]).is_err());
    }

    #[test]
    fn translate_modulus_is_checked() {
        let bc = SetDescriptor::ball_complement(p(&[0.0, 0.0]), 1.0).unwrap();
        let mk = |lip| {
            MovingSet::new(
                2,
                1.0,
                1.0,
                vec![Segment::new(
                    0.0,
                    1.0,
                    Motion::Translate {
                        base: bc.clone(),
                        velocity: p(&[0.6, 0.8]),
                    },
                    lip,
                )
                .unwrap()],
                vec![],
            )
        };
        assert!(mk(1.0).is_ok());
        assert!(mk(0.9).is_err());
    }
}
