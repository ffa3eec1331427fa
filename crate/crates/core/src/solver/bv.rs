use crate::error::{Error, Result};
use crate::geometry::{normal_cone_residual, sample_set_points, Point, MEMBERSHIP_TOL};
use crate::movingset::{reparametrize, retraction_profile, MovingSet, RetractionProfile};

use super::{solve_lipschitz, CatchingUpConfig, DiscreteTrajectory, SolveReport, RESIDUAL_SAMPLE_RADIUS};

/// How an output row relates to the time line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Regular,
    /// `y(t-)` at a jump time.
    JumpLeft,
    /// `y(t)` at a jump time.
    JumpRight,
}

/// The solution `y = y^ o l_C` sampled on an output grid. Jump times appear twice, first
/// with the left limit and then with the value.
#[derive(Clone, Debug)]
pub struct BVSolution {
    pub times: Vec<f64>,
    pub kinds: Vec<RowKind>,
    pub values: Vec<Point>,
    /// Density of `Dy` with respect to `d l_C`.
    pub densities: Vec<Point>,
    pub dist_to_c: Vec<f64>,
    /// Normal-cone residual of `-v` at the nearest point of the row's set.
    pub residuals: Vec<f64>,
    pub profile: RetractionProfile,
    pub yhat: DiscreteTrajectory,
    pub report: SolveReport,
}

impl BVSolution {
    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }
}

/// `count` uniform nodes on `[0, horizon]` (both ends included when `count >= 2`).
pub fn uniform_grid(horizon: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count)
            .map(|k| {
                if k + 1 == count {
                    horizon
                } else {
                    horizon * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// `y^(l_C(t))`, right-continuous at jumps.
pub fn compose(yhat: &DiscreteTrajectory, profile: &RetractionProfile, t: f64) -> Result<Point> {
    yhat.eval(clamp_sigma(profile.eval(t)?, yhat.horizon()))
}

fn compose_left(yhat: &DiscreteTrajectory, profile: &RetractionProfile, t: f64) -> Result<Point> {
    yhat.eval(clamp_sigma(profile.left_limit(t)?, yhat.horizon()))
}

/// Absorbs rounding in `l_C` at the right end.
fn clamp_sigma(sigma: f64, horizon: f64) -> f64 {
    if sigma > horizon && sigma - horizon <= 1e-12 * horizon.max(1.0) {
        horizon
    } else {
        sigma
    }
}

/// Sum of consecutive distances.
pub fn variation(samples: &[Point]) -> f64 {
    samples.windows(2).map(|w| w[0].dist(&w[1])).sum()
}

/// Samples per row for the output residual.
const ROW_RESIDUAL_SAMPLES: usize = 32;

/// Solves the sweeping process driven by `ms` from `y0` through the arc-length
/// reparametrization, and samples the result on `output_grid` (sorted, inside `[0, T]`).
pub fn solve_bv(ms: &MovingSet, y0: &Point, cfg: &CatchingUpConfig, output_grid: &[f64]) -> Result<BVSolution> {
    if let Some(bad) = ms.check_admissibility().first_failure() {
        return Err(Error::InadmissibleJump {
            time: bad.time,
            rho: bad.rho,
            r: bad.r,
        });
    }
    y0.check_dim(ms.dim())?;
    let dist = ms.snapshot(0.0)?.distance(y0);
    if !(dist < ms.r()) {
        return Err(Error::InitialPointOutside { dist });
    }
    if output_grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidConfig("output grid must be sorted".into()));
    }
    let profile = retraction_profile(ms, cfg.profile_grid)?;
    let family = reparametrize(ms, &profile)?;
    let (yhat, report) = solve_lipschitz(&family, y0, cfg)?;
    let step = (-(yhat.level as f64)).exp2();

    let mut times = Vec::new();
    for &t in output_grid {
        if !(0.0..=ms.horizon()).contains(&t) {
            return Err(Error::OutOfHorizon {
                t,
                horizon: ms.horizon(),
            });
        }
        times.push(t);
    }
    times.extend(ms.jumps().iter().map(|j| j.time));
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut sol = BVSolution {
        times: Vec::new(),
        kinds: Vec::new(),
        values: Vec::new(),
        densities: Vec::new(),
        dist_to_c: Vec::new(),
        residuals: Vec::new(),
        profile,
        yhat,
        report,
    };
    for &t in &times {
        let rows: &[RowKind] = if sol.profile.jump_at(t).is_some() {
            &[RowKind::JumpLeft, RowKind::JumpRight]
        } else {
            &[RowKind::Regular]
        };
        for &kind in rows {
            let (y, v, set) = match kind {
                RowKind::Regular => {
                    let sigma = sol.profile.eval(t)?;
                    (
                        compose(&sol.yhat, &sol.profile, t)?,
                        difference_quotient(&sol.yhat, sigma, step, true, true)?,
                        ms.snapshot(t)?,
                    )
                }
                RowKind::JumpLeft => {
                    let sigma = sol.profile.left_limit(t)?;
                    (
                        compose_left(&sol.yhat, &sol.profile, t)?,
                        difference_quotient(&sol.yhat, sigma, step, true, false)?,
                        ms.left_limit(t)?,
                    )
                }
                RowKind::JumpRight => {
                    let jump = *sol.profile.jump_at(t).expect("checked above");
                    let right = compose(&sol.yhat, &sol.profile, t)?;
                    let left = compose_left(&sol.yhat, &sol.profile, t)?;
                    let v = (&right - &left).scale(1.0 / jump.rho());
                    (right, v, ms.snapshot(t)?)
                }
            };
            let proj = set.project(&y)?;
            let zs = sample_set_points(
                &set,
                &proj.point,
                RESIDUAL_SAMPLE_RADIUS,
                ROW_RESIDUAL_SAMPLES,
                sol.times.len() as u64,
            );
            let residual = if set.distance(&proj.point) <= MEMBERSHIP_TOL {
                normal_cone_residual(&set, &proj.point, &v.scale(-1.0), &zs)?
            } else {
                f64::NAN
            };
            sol.times.push(t);
            sol.kinds.push(kind);
            sol.values.push(y);
            sol.densities.push(v);
            sol.dist_to_c.push(proj.dist);
            sol.residuals.push(residual);
        }
    }
    Ok(sol)
}

/// Difference quotient of `y^` at `sigma` with the given one-sided reaches, falling back
/// to the available side at the ends of the domain.
fn difference_quotient(yhat: &DiscreteTrajectory, sigma: f64, step: f64, back: bool, forward: bool) -> Result<Point> {
    let horizon = yhat.horizon();
    let sigma = clamp_sigma(sigma, horizon);
    let lo = if back { (sigma - step).max(0.0) } else { sigma };
    let hi = if forward { (sigma + step).min(horizon) } else { sigma };
    if hi <= lo {
        return Ok(Point::zeros(yhat.points[0].dim()));
    }
    Ok((&yhat.eval(hi)? - &yhat.eval(lo)?).scale(1.0 / (hi - lo)))
}
