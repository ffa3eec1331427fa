//! Closed-form reference solutions and an independent brute-force projection used to
//! check the solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{jump_solution, GeodesicCurve};
use crate::geometry::{Point, SetDescriptor};
use crate::movingset::{MovingSet, PiecewiseLinear, Scenario};
use crate::solver::{solve_bv, uniform_grid, CatchingUpConfig, RowKind};

/// The play operator on `{x : <a, x> <= b(t)}` with unit `a`: the normal coordinate is
/// `min(<a, y0>, inf_{s <= t} b(s))` and the tangential part never moves.
pub fn play_halfspace_oracle(a: &Point, b: &PiecewiseLinear, y0: &Point, t: f64) -> Point {
    let w0 = a.dot(y0);
    let push = (w0 - b.running_min(t)).max(0.0);
    y0.axpy(-push, a)
}

/// Radial pushing by `BallComplement{(speed t, 0, ..), radius}` from `y0 = (radius, 0, ..)`.
pub fn ballcomplement_push_oracle(speed: f64, radius: f64, dim: usize, t: f64) -> Point {
    Point::axis(dim, 0, speed * t + radius)
}

/// The explicit solution driven by an excess geodesic.
pub fn jump_segment_oracle(g: &GeodesicCurve, y0: &Point, tau: f64) -> Result<Point> {
    jump_solution(g, y0, tau)
}

/// A closed-form reference attached to a scenario, with its calibrated error constant:
/// the solver at level `n` is expected within `c * 2^-n` of the closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleSpec {
    PlayHalfspace {
        normal: Point,
        offset_fn: PiecewiseLinear,
        c: f64,
    },
    BallcomplementPush {
        speed: f64,
        radius: f64,
        c: f64,
    },
    JumpSegment {
        z0: SetDescriptor,
        z1: SetDescriptor,
        c: f64,
    },
}

impl OracleSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::PlayHalfspace { .. } => "play_halfspace",
            Self::BallcomplementPush { .. } => "ballcomplement_push",
            Self::JumpSegment { .. } => "jump_segment",
        }
    }

    /// The calibration constant.
    pub fn c(&self) -> f64 {
        match self {
            Self::PlayHalfspace { c, .. } | Self::BallcomplementPush { c, .. } | Self::JumpSegment { c, .. } => *c,
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            Self::PlayHalfspace { normal, .. } => normal.check_dim(dim),
            Self::BallcomplementPush { .. } => Ok(()),
            Self::JumpSegment { z0, z1, .. } => {
                z0.check_dim(dim)?;
                z1.check_dim(dim)
            }
        }
    }

    /// Error bound at level `n`.
    pub fn tolerance(&self, level: u32) -> f64 {
        self.c() * (-(level as f64)).exp2()
    }
}

/// A scenario whose solution is known in closed form.
#[derive(Clone, Debug)]
pub struct OracleScenario {
    pub name: String,
    pub moving_set: MovingSet,
    pub y0: Point,
    pub oracle: OracleSpec,
    /// Unit normal for the play oracle, the geodesic for the jump oracle.
    normal: Option<Point>,
    curve: Option<GeodesicCurve>,
}

impl OracleScenario {
    pub fn new(name: String, moving_set: MovingSet, y0: Point, oracle: OracleSpec) -> Result<Self> {
        let dim = moving_set.dim();
        oracle.check_dim(dim)?;
        y0.check_dim(dim)?;
        if !(oracle.c().is_finite() && oracle.c() >= 0.0) {
            return Err(Error::Scenario("oracle.c must be finite and >= 0".into()));
        }
        let mut normal = None;
        let mut curve = None;
        match &oracle {
            OracleSpec::PlayHalfspace { normal: a, .. } => {
                let len = a.norm();
                if len == 0.0 {
                    return Err(Error::Scenario("oracle.normal must be nonzero".into()));
                }
                normal = Some(a.scale(1.0 / len));
            }
            OracleSpec::BallcomplementPush { speed, radius, .. } => {
                if !(speed.is_finite() && radius.is_finite() && *radius > 0.0 && speed.abs() <= 1.0) {
                    return Err(Error::Scenario("oracle needs |speed| <= 1 and radius > 0".into()));
                }
            }
            OracleSpec::JumpSegment { z0, z1, .. } => {
                curve = Some(GeodesicCurve::new(z0.clone(), z1.clone())?);
            }
        }
        Ok(Self {
            name,
            moving_set,
            y0,
            oracle,
            normal,
            curve,
        })
    }

    /// Builds from a scenario that declares an oracle.
    pub fn from_scenario(s: Scenario) -> Result<Self> {
        let oracle = s
            .oracle
            .ok_or_else(|| Error::Scenario("scenario declares no oracle".into()))?;
        Self::new(s.name.unwrap_or_default(), s.moving_set, s.y0, oracle)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_scenario(Scenario::from_json(text)?)
    }

    /// The reference solution at time `t`.
    pub fn closed_form(&self, t: f64) -> Result<Point> {
        match &self.oracle {
            OracleSpec::PlayHalfspace { offset_fn, .. } => Ok(play_halfspace_oracle(
                self.normal.as_ref().expect("set in new"),
                offset_fn,
                &self.y0,
                t,
            )),
            OracleSpec::BallcomplementPush { speed, radius, .. } => {
                Ok(ballcomplement_push_oracle(*speed, *radius, self.y0.dim(), t))
            }
            OracleSpec::JumpSegment { .. } => {
                jump_segment_oracle(self.curve.as_ref().expect("set in new"), &self.y0, t)
            }
        }
    }
}

/// `sup |y(t) - closed_form(t)|` over a uniform output grid of `grid` nodes for the
/// pipeline run at the single level `level`. Left-limit rows at jumps are skipped.
pub fn oracle_sup_error(os: &OracleScenario, level: u32, grid: usize) -> Result<f64> {
    let cfg = CatchingUpConfig {
        min_level: level,
        max_level: level,
        residual_samples: 0,
        ..CatchingUpConfig::default()
    };
    let sol = solve_bv(
        &os.moving_set,
        &os.y0,
        &cfg,
        &uniform_grid(os.moving_set.horizon(), grid),
    )?;
    let mut worst = 0.0f64;
    for k in 0..sol.times.len() {
        if sol.kinds[k] == RowKind::JumpLeft {
            continue;
        }
        worst = worst.max(sol.values[k].dist(&os.closed_form(sol.times[k])?));
    }
    Ok(worst)
}

/// Smallest error floor recorded as a calibration constant.
pub const CALIBRATION_FLOOR: f64 = 1e-9;

/// Calibrates `c` from levels `level`, `level + 1`, `level + 2`: the largest observed
/// `err * 2^n`, times `margin`, and at least [`CALIBRATION_FLOOR`].
pub fn calibrate(os: &OracleScenario, level: u32, grid: usize, margin: f64) -> Result<f64> {
    let mut c = 0.0f64;
    for n in level..=level + 2 {
        c = c.max(oracle_sup_error(os, n, grid)? * (n as f64).exp2());
    }
    Ok((c * margin).max(CALIBRATION_FLOOR))
}

/// Nearest point of `set` to `x` found by ray search, using membership tests only.
/// For each direction `u` the first entry radius along `x + s u` is located by
/// marching and bisection; a coarse lattice of directions is then refined by pattern
/// search until the angular step times the distance is below `mesh / 8`. Finite point
/// sets are searched exhaustively. Marching runs up to `4 d(x, set) + mesh`.
pub fn brute_force_project(set: &SetDescriptor, x: &Point, mesh: f64) -> Point {
    if let SetDescriptor::FinitePoints { points } = set {
        return points
            .iter()
            .min_by(|p, q| p.dist(x).total_cmp(&q.dist(x)))
            .expect("nonempty")
            .clone();
    }
    let member = Membership::new(set);
    if member.contains(x.coords()) {
        return x.clone();
    }
    let dim = x.dim();
    let base = x.coords().to_vec();
    let reach = 4.0 * set.distance(x) + mesh;
    let step = (16.0 * mesh).min(reach / 64.0);
    let ray = Ray {
        member: &member,
        base: &base,
        step,
    };

    // Coarse directions: lattice points on the surface of the cube [-1, 1]^d.
    let mut k = 2usize;
    while (k + 1).pow(dim as u32) <= 20_000 {
        k += 1;
    }
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut limit = reach;
    let mut idx = vec![0usize; dim];
    loop {
        let v: Vec<f64> = idx.iter().map(|&i| -1.0 + 2.0 * i as f64 / (k - 1) as f64).collect();
        if v.iter().any(|c| c.abs() == 1.0) {
            if let Some(s) = ray.first_hit(&v, limit) {
                limit = limit.min(s + step);
                push_candidate(&mut best, s, v);
            }
        }
        if !advance(&mut idx, k) {
            break;
        }
    }

    // Pattern search in direction space around the best few coarse directions.
    let mut h = 2.0 / (k - 1) as f64;
    let d_hat = best.first().map_or(0.0, |b| b.0);
    let mut cands = best;
    while h * d_hat > mesh / 8.0 {
        h *= 0.5;
        let mut next = cands.clone();
        for (s0, c) in &cands {
            let mut idx = vec![0usize; dim];
            loop {
                let v: Vec<f64> = (0..dim).map(|i| c[i] + (idx[i] as f64 - 1.0) * h).collect();
                if let Some(s) = ray.first_hit(&v, s0 + step) {
                    push_candidate(&mut next, s, v);
                }
                if !advance(&mut idx, 3) {
                    break;
                }
            }
        }
        cands = next;
    }
    match cands.into_iter().next() {
        Some((s, v)) => Point::new(ray.point(&v, s)).expect("finite ray point"),
        None => x.clone(),
    }
}

struct Ray<'a> {
    member: &'a Membership<'a>,
    base: &'a [f64],
    step: f64,
}

impl Ray<'_> {
    fn point(&self, v: &[f64], s: f64) -> Vec<f64> {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        self.base.iter().zip(v).map(|(b, c)| b + s * c / norm).collect()
    }

    /// Smallest `s <= limit` with `x + s u` feasible, located to rounding accuracy.
    fn first_hit(&self, v: &[f64], limit: f64) -> Option<f64> {
        if v.iter().all(|c| *c == 0.0) {
            return None;
        }
        let mut lo = 0.0;
        let mut hi = None;
        let mut s = 0.0;
        while s < limit {
            s = (s + self.step).min(limit);
            if self.member.contains(&self.point(v, s)) {
                hi = Some(s);
                break;
            }
            lo = s;
        }
        let mut hi = hi?;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.member.contains(&self.point(v, mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }
}

const KEEP: usize = 8;

fn push_candidate(cands: &mut Vec<(f64, Vec<f64>)>, d: f64, z: Vec<f64>) {
    if cands.len() == KEEP && d >= cands[KEEP - 1].0 {
        return;
    }
    if cands.iter().any(|(_, c)| c == &z) {
        return;
    }
    let pos = cands.partition_point(|(e, _)| *e <= d);
    cands.insert(pos, (d, z));
    cands.truncate(KEEP);
}

fn advance(idx: &mut [usize], n: usize) -> bool {
    for i in idx.iter_mut() {
        *i += 1;
        if *i < n {
            return true;
        }
        *i = 0;
    }
    false
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Membership written out from the set definitions, independent of the library's
/// distance and projection code.
enum Membership<'a> {
    HalfSpace(&'a [f64], f64),
    Ball(&'a [f64], f64),
    Outside(&'a [f64], f64),
    NearPoints(Vec<&'a [f64]>, f64),
}

impl<'a> Membership<'a> {
    fn new(set: &'a SetDescriptor) -> Self {
        let (core, rho) = set.core();
        match core {
            SetDescriptor::HalfSpace { normal, offset } => Self::HalfSpace(normal.coords(), offset + rho),
            SetDescriptor::Ball { center, radius } => Self::Ball(center.coords(), radius + rho),
            SetDescriptor::BallComplement { center, radius } => Self::Outside(center.coords(), radius - rho),
            SetDescriptor::FinitePoints { points } => {
                Self::NearPoints(points.iter().map(|p| p.coords()).collect(), rho)
            }
            SetDescriptor::Dilation { .. } => unreachable!("core is never a dilation"),
        }
    }

    fn contains(&self, z: &[f64]) -> bool {
        match self {
            Self::HalfSpace(n, b) => n.iter().zip(z).map(|(a, c)| a * c).sum::<f64>() <= *b,
            Self::Ball(c, r) => sq_dist(z, c) <= r * r,
            Self::Outside(c, r) => sq_dist(z, c) >= r * r,
            Self::NearPoints(ps, r) => ps.iter().any(|p| sq_dist(z, p) <= r * r),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn play_examples() {
        let a = p(&[1.0, 0.0]);
        let b = PiecewiseLinear::new(vec![0.0, 10.0], vec![0.0, -10.0]).unwrap();
        for t in [0.0, 0.5, 3.0] {
            assert_eq!(play_halfspace_oracle(&a, &b, &p(&[0.0, 0.0]), t), p(&[-t, 0.0]));
        }
        let y0 = p(&[-5.0, 0.0]);
        assert_eq!(play_halfspace_oracle(&a, &b, &y0, 4.0), y0);
        assert_eq!(play_halfspace_oracle(&a, &b, &y0, 5.0), y0);
        assert_eq!(play_halfspace_oracle(&a, &b, &y0, 7.0), p(&[-7.0, 0.0]));
        let up = PiecewiseLinear::new(vec![0.0, 1.0], vec![0.0, 3.0]).unwrap();
        let y0 = p(&[-0.5, 2.0]);
        for t in [0.0, 0.5, 1.0, 2.0] {
            assert_eq!(play_halfspace_oracle(&a, &up, &y0, t), y0);
        }
        // Descent, rise, descent: frozen on the rise until the offset drops below again.
        let zig = PiecewiseLinear::new(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, -1.0, 0.0, -2.0]).unwrap();
        let y0 = p(&[0.0, 0.0]);
        assert_eq!(play_halfspace_oracle(&a, &zig, &y0, 1.5), p(&[-1.0, 0.0]));
        assert_eq!(play_halfspace_oracle(&a, &zig, &y0, 3.0), p(&[-1.0, 0.0]));
        assert_eq!(play_halfspace_oracle(&a, &zig, &y0, 4.0), p(&[-2.0, 0.0]));
    }

    #[test]
    fn push_examples() {
        assert_eq!(ballcomplement_push_oracle(1.0, 1.0, 2, 0.0), p(&[1.0, 0.0]));
        assert_eq!(ballcomplement_push_oracle(1.0, 1.0, 2, 2.0), p(&[3.0, 0.0]));
        assert_eq!(ballcomplement_push_oracle(0.0, 1.0, 2, 5.0), p(&[1.0, 0.0]));
    }

    #[test]
    fn brute_force_matches_simple_cases() {
        let mesh = 1e-3;
        let hs = SetDescriptor::half_space(p(&[1.0, 0.0]), 0.0).unwrap();
        let q = brute_force_project(&hs, &p(&[1.3, 0.2]), mesh);
        assert!(q.dist(&p(&[0.0, 0.2])) <= 2.0 * mesh, "{q:?}");
        let bc = SetDescriptor::ball_complement(p(&[0.0, 0.0]), 1.0).unwrap();
        let q = brute_force_project(&bc, &p(&[0.3, 0.4]), mesh);
        assert!(q.dist(&p(&[0.6, 0.8])) <= 2.0 * mesh, "{q:?}");
        let tube = SetDescriptor::finite_points(vec![p(&[0.0, 0.0]), p(&[3.0, 0.0])])
            .unwrap()
            .dilate(0.5)
            .unwrap();
        let q = brute_force_project(&tube, &p(&[2.0, 0.0]), mesh);
        assert!(q.dist(&p(&[2.5, 0.0])) <= 2.0 * mesh, "{q:?}");
        let inside = p(&[-1.0, 0.0]);
        assert_eq!(brute_force_project(&hs, &inside, mesh), inside);
    }
}
