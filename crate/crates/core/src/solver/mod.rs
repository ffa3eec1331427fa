//! The catching-up scheme on dyadic grids and the bounded-retraction pipeline.

mod bv;
mod csv;

pub use bv::{compose, solve_bv, uniform_grid, variation, BVSolution, RowKind};
pub use csv::{write_report_csv, write_trajectory_csv};

use crate::error::{Error, Result};
use crate::geometry::{normal_cone_residual, sample_set_points, Point};
use crate::movingset::SetFamily;

/// Largest dyadic level accepted.
pub const MAX_LEVEL: u32 = 30;

/// Allowed slack on the per-interval speed bound.
pub const SPEED_TOL: f64 = 1e-12;

const MAX_NODES: f64 = (1u64 << 26) as f64;

#[derive(Clone, Debug, PartialEq)]
pub struct CatchingUpConfig {
    pub min_level: u32,
    pub max_level: u32,
    pub cauchy_tol: f64,
    /// Samples per node for the normal-cone residual of the finest level (0 skips it).
    pub residual_samples: usize,
    /// Grid intervals per segment for the retraction profile.
    pub profile_grid: usize,
}

impl Default for CatchingUpConfig {
    fn default() -> Self {
        Self {
            min_level: 6,
            max_level: 12,
            cauchy_tol: 1e-3,
            residual_samples: 32,
            profile_grid: 64,
        }
    }
}

impl CatchingUpConfig {
    /// Checks the level range, the tolerance, and `2^-min_level < r`.
    pub fn validate(&self, r: f64) -> Result<()> {
        if self.min_level > self.max_level || self.max_level > MAX_LEVEL {
            return Err(Error::InvalidConfig(format!(
                "need min_level <= max_level <= {MAX_LEVEL}, got {}..{}",
                self.min_level, self.max_level
            )));
        }
        if !(self.cauchy_tol > 0.0 && self.cauchy_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "cauchy_tol must be positive, got {}",
                self.cauchy_tol
            )));
        }
        if self.profile_grid == 0 {
            return Err(Error::InvalidConfig("profile_grid must be at least 1".into()));
        }
        check_step(self.min_level, r)
    }
}

fn check_step(level: u32, r: f64) -> Result<()> {
    let h = (-(level as f64)).exp2();
    if h < r {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "step 2^-{level} = {h} is not below r = {r}"
        )))
    }
}

/// Dyadic nodes `j 2^-n <= T`, with `T` appended when it is not itself a node.
pub fn dyadic_nodes(level: u32, horizon: f64) -> Result<Vec<f64>> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "horizon must be finite and >= 0, got {horizon}"
        )));
    }
    let h = (-(level as f64)).exp2();
    let m = (horizon / h).floor();
    if m > MAX_NODES {
        return Err(Error::InvalidConfig(format!(
            "level {level} needs more than {MAX_NODES} nodes"
        )));
    }
    let m = m as usize;
    let mut nodes: Vec<f64> = (0..=m).map(|j| j as f64 * h).collect();
    if nodes[m] < horizon {
        nodes.push(horizon);
    }
    Ok(nodes)
}

/// Catching-up iterates `y_j = P_{C(t_j)}(y_{j-1})` of one level and their
/// piecewise-affine interpolant.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteTrajectory {
    pub level: u32,
    pub nodes: Vec<f64>,
    pub points: Vec<Point>,
    /// Largest distance from a node value to its set.
    pub max_violation: f64,
}

impl DiscreteTrajectory {
    pub fn horizon(&self) -> f64 {
        *self.nodes.last().expect("nonempty")
    }

    /// Constant velocity on each interval `(t_{j-1}, t_j)`.
    pub fn velocities(&self) -> Vec<Point> {
        self.nodes
            .windows(2)
            .zip(self.points.windows(2))
            .map(|(t, y)| (&y[1] - &y[0]).scale(1.0 / (t[1] - t[0])))
            .collect()
    }

    /// Largest per-interval speed (0 for a single node).
    pub fn max_speed(&self) -> f64 {
        self.nodes
            .windows(2)
            .zip(self.points.windows(2))
            .map(|(t, y)| y[1].dist(&y[0]) / (t[1] - t[0]))
            .fold(0.0, f64::max)
    }

    /// The interpolant at `t`.
    pub fn eval(&self, t: f64) -> Result<Point> {
        let horizon = self.horizon();
        if !(0.0..=horizon).contains(&t) {
            return Err(Error::OutOfHorizon { t, horizon });
        }
        let k = self.nodes.partition_point(|&s| s <= t);
        if k == self.nodes.len() {
            return Ok(self.points[k - 1].clone());
        }
        let (t0, t1) = (self.nodes[k - 1], self.nodes[k]);
        let s = (t - t0) / (t1 - t0);
        Ok(self.points[k - 1].axpy(s, &(&self.points[k] - &self.points[k - 1])))
    }

    /// `sup |self - coarse|` over the common domain, exact for nested grids because
    /// both interpolants are affine between the finer nodes.
    pub fn sup_diff(&self, coarse: &DiscreteTrajectory) -> Result<f64> {
        let mut worst = 0.0f64;
        for (t, y) in self.nodes.iter().zip(&self.points) {
            worst = worst.max(y.dist(&coarse.eval(*t)?));
        }
        for (t, y) in coarse.nodes.iter().zip(&coarse.points) {
            worst = worst.max(y.dist(&self.eval(*t)?));
        }
        Ok(worst)
    }
}

/// One catching-up pass at level `n` on `[0, horizon]`.
pub fn catching_up_pass<F: SetFamily + ?Sized>(
    family: &F,
    y0: &Point,
    n: u32,
    horizon: f64,
) -> Result<DiscreteTrajectory> {
    y0.check_dim(family.dim())?;
    if n > MAX_LEVEL {
        return Err(Error::InvalidConfig(format!("level {n} exceeds {MAX_LEVEL}")));
    }
    check_step(n, family.prox_radius())?;
    if horizon > family.horizon() {
        return Err(Error::OutOfHorizon {
            t: horizon,
            horizon: family.horizon(),
        });
    }
    let nodes = dyadic_nodes(n, horizon)?;
    let first = family.at(0.0)?;
    let dist = first.distance(y0);
    if !(dist < family.prox_radius()) {
        return Err(Error::InitialPointOutside { dist });
    }
    let mut points = Vec::with_capacity(nodes.len());
    let mut max_violation = 0.0f64;
    let mut prev = y0.clone();
    for (j, &t) in nodes.iter().enumerate() {
        let set = if j == 0 { first.clone() } else { family.at(t)? };
        let fail = |source| Error::StepProjectionFailure {
            level: n,
            node: j,
            source: Box::new(source),
        };
        let proj = set.project(&prev).map_err(fail)?;
        if !proj.unique {
            return Err(fail(Error::AmbiguousProjection {
                dist: proj.dist,
                radius: set.prox_radius(),
            }));
        }
        max_violation = max_violation.max(set.distance(&proj.point));
        prev = proj.point;
        points.push(prev.clone());
    }
    Ok(DiscreteTrajectory {
        level: n,
        nodes,
        points,
        max_violation,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub levels_run: Vec<u32>,
    /// `sup_diffs[k]` compares `levels_run[k + 1]` with `levels_run[k]`.
    pub sup_diffs: Vec<f64>,
    /// Constraint violation per level run.
    pub violations: Vec<f64>,
    pub converged: bool,
    pub constraint_max_violation: f64,
    /// Largest normal-cone residual on the finest level (0 when not computed).
    pub residual_max: f64,
    pub max_speed: f64,
}

/// Runs levels `min_level, min_level + 1, ...` until consecutive interpolants are within
/// `cauchy_tol` or `max_level` is reached; returns the finest trajectory. Not converging
/// is reported through `converged`, not as an error.
pub fn solve_lipschitz<F: SetFamily + ?Sized>(
    family: &F,
    y0: &Point,
    cfg: &CatchingUpConfig,
) -> Result<(DiscreteTrajectory, SolveReport)> {
    cfg.validate(family.prox_radius())?;
    let horizon = family.horizon();
    let mut report = SolveReport {
        levels_run: Vec::new(),
        sup_diffs: Vec::new(),
        violations: Vec::new(),
        converged: false,
        constraint_max_violation: 0.0,
        residual_max: 0.0,
        max_speed: 0.0,
    };
    let mut prev: Option<DiscreteTrajectory> = None;
    for n in cfg.min_level..=cfg.max_level {
        let traj = catching_up_pass(family, y0, n, horizon)?;
        report.levels_run.push(n);
        report.violations.push(traj.max_violation);
        report.constraint_max_violation = report.constraint_max_violation.max(traj.max_violation);
        report.max_speed = report.max_speed.max(traj.max_speed());
        if let Some(coarse) = &prev {
            let d = traj.sup_diff(coarse)?;
            report.sup_diffs.push(d);
            if d <= cfg.cauchy_tol {
                report.converged = true;
                prev = Some(traj);
                break;
            }
        }
        prev = Some(traj);
    }
    let traj = prev.expect("at least one level");
    if cfg.residual_samples > 0 {
        report.residual_max = velocity_residuals(family, &traj, cfg.residual_samples)?
            .into_iter()
            .fold(0.0, f64::max);
    }
    Ok((traj, report))
}

/// Radius of the ball around each node from which residual samples are drawn.
pub const RESIDUAL_SAMPLE_RADIUS: f64 = 1.0;

/// For each node `j >= 1`, the normal-cone residual of `-x'_n` on `(t_{j-1}, t_j)` against
/// `C(t_j)` at `y_j`, over `samples` deterministic points of `C(t_j)` near `y_j`.
pub fn velocity_residuals<F: SetFamily + ?Sized>(
    family: &F,
    traj: &DiscreteTrajectory,
    samples: usize,
) -> Result<Vec<f64>> {
    traj.velocities()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let j = k + 1;
            let set = family.at(traj.nodes[j])?;
            let y = &traj.points[j];
            let zs = sample_set_points(&set, y, RESIDUAL_SAMPLE_RADIUS, samples, j as u64);
            normal_cone_residual(&set, y, &v.scale(-1.0), &zs)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SetDescriptor;
    use crate::movingset::{Motion, MovingSet, PiecewiseLinear, Segment};

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn one_segment(motion: Motion, lip: f64, horizon: f64) -> MovingSet {
        MovingSet::new(
            2,
            1.0,
            horizon,
            vec![Segment::new(0.0, horizon, motion, lip).unwrap()],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn nodes_include_the_horizon() {
        assert_eq!(dyadic_nodes(2, 1.0).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(dyadic_nodes(1, 1.2).unwrap(), vec![0.0, 0.5, 1.0, 1.2]);
        assert_eq!(dyadic_nodes(3, 0.0).unwrap(), vec![0.0]);
    }

    #[test]
    fn constant_family() {
        let ball = SetDescriptor::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        let ms = one_segment(Motion::Static { base: ball }, 0.0, 1.0);
        let y0 = p(&[0.2, -0.3]);
        let traj = catching_up_pass(&ms, &y0, 5, 1.0).unwrap();
        assert!(traj.points.iter().all(|y| *y == y0));
        let (traj, rep) = solve_lipschitz(&ms, &y0, &CatchingUpConfig::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.sup_diffs, vec![0.0]);
        assert_eq!(traj.level, 7);
        assert_eq!(rep.residual_max, 0.0);
    }

    #[test]
    fn shrinking_half_space_tracks_boundary() {
        let base = SetDescriptor::half_space(p(&[1.0, 0.0]), 0.0).unwrap();
        let offset = PiecewiseLinear::new(vec![0.0, 1.0], vec![0.0, -1.0]).unwrap();
        let ms = one_segment(Motion::Offset { base, offset }, 1.0, 1.0);
        let traj = catching_up_pass(&ms, &p(&[0.0, 0.0]), 6, 1.0).unwrap();
        for (t, y) in traj.nodes.iter().zip(&traj.points) {
            assert!(y.dist(&p(&[-t, 0.0])) < 1e-15);
        }
        assert!(traj.max_speed() <= 1.0 + SPEED_TOL);
        let res = velocity_residuals(&ms, &traj, 64).unwrap();
        assert!(res.iter().all(|&r| r <= 1e-12));
    }

    #[test]
    fn expanding_half_space_keeps_initial_projection() {
        let base = SetDescriptor::half_space(p(&[1.0, 0.0]), 0.0).unwrap();
        let offset = PiecewiseLinear::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let ms = one_segment(Motion::Offset { base, offset }, 0.0, 1.0);
        let (traj, rep) = solve_lipschitz(&ms, &p(&[0.5, 1.0]), &CatchingUpConfig::default()).unwrap();
        assert!(rep.converged);
        assert!(traj.points.iter().all(|y| *y == p(&[0.0, 1.0])));
    }

    #[test]
    fn pushed_ball_complement() {
        let base = SetDescriptor::ball_complement(p(&[0.0, 0.0]), 1.0).unwrap();
        let ms = one_segment(
            Motion::Translate {
                base,
                velocity: p(&[1.0, 0.0]),
            },
            1.0,
            2.0,
        );
        let (traj, rep) = solve_lipschitz(&ms, &p(&[1.0, 0.0]), &CatchingUpConfig::default()).unwrap();
        for (t, y) in traj.nodes.iter().zip(&traj.points) {
            assert!(y.dist(&p(&[t + 1.0, 0.0])) < 1e-12);
        }
        assert!(rep.residual_max <= 1e-9, "{}", rep.residual_max);
    }

    #[test]
    fn rejects_bad_configs() {
        let ball = SetDescriptor::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        let ms = one_segment(Motion::Static { base: ball }, 0.0, 1.0);
        let y0 = p(&[0.0, 0.0]);
        let bad = |cfg: CatchingUpConfig| solve_lipschitz(&ms, &y0, &cfg).is_err();
        assert!(bad(CatchingUpConfig {
            min_level: 8,
            max_level: 7,
            ..Default::default()
        }));
        assert!(bad(CatchingUpConfig {
            max_level: 31,
            ..Default::default()
        }));
        assert!(bad(CatchingUpConfig {
            cauchy_tol: 0.0,
            ..Default::default()
        }));
        assert!(bad(CatchingUpConfig {
            min_level: 0,
            ..Default::default()
        }));
        assert!(matches!(
            catching_up_pass(&ms, &p(&[3.0, 0.0]), 4, 1.0),
            Err(Error::InitialPointOutside { .. })
        ));
    }

    #[test]
    fn max_level_is_not_an_error() {
        let base = SetDescriptor::half_space(p(&[1.0, 0.0]), 0.0).unwrap();
        let offset = PiecewiseLinear::new(vec![0.0, 1.0], vec![0.0, -1.0]).unwrap();
        let ms = one_segment(Motion::Offset { base, offset }, 1.0, 1.0);
        let cfg = CatchingUpConfig {
            min_level: 3,
            max_level: 5,
            cauchy_tol: 1e-30,
            ..Default::default()
        };
        let (traj, rep) = solve_lipschitz(&ms, &p(&[-1.0 / 3.0, 0.0]), &cfg).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.levels_run, vec![3, 4, 5]);
        assert_eq!(rep.sup_diffs.len(), 2);
        assert_eq!(traj.level, 5);
    }
}
