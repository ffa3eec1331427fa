use crate::error::{Error, Result};
use crate::geometry::{excess, ExcessPolicy};

use super::MovingSet;

/// Values of `l_C` on the node grid of one segment `[from, to]`. The last value is the
/// left limit at `to`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileSegment {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// `l_C(t-)` and `l_C(t)` at a declared jump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpIncrement {
    pub time: f64,
    pub before: f64,
    pub after: f64,
}

impl JumpIncrement {
    pub fn rho(&self) -> f64 {
        self.after - self.before
    }
}

/// The retraction arc length `l_C(t) = ret(C; [0, t])`, piecewise linear between nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct RetractionProfile {
    segments: Vec<ProfileSegment>,
    jumps: Vec<JumpIncrement>,
    /// For each segment, the index into `jumps` of the jump at its start.
    jump_at_start: Vec<Option<usize>>,
}

/// Sums consecutive excesses over `n_grid` intervals per segment (refined at offset
/// breakpoints) and adds each jump size at its time. Upper excess estimates are used so
/// that sampled pairs never under-count.
pub fn retraction_profile(ms: &MovingSet, n_grid: usize) -> Result<RetractionProfile> {
    if n_grid == 0 {
        return Err(Error::InvalidConfig("n_grid must be at least 1".into()));
    }
    if let Some(bad) = ms.check_admissibility().first_failure() {
        return Err(Error::InadmissibleJump {
            time: bad.time,
            rho: bad.rho,
            r: bad.r,
        });
    }
    let policy = ExcessPolicy::default();
    let mut segments = Vec::with_capacity(ms.segments().len());
    let mut jumps = Vec::new();
    let mut jump_at_start = Vec::with_capacity(ms.segments().len());
    let mut acc = 0.0;
    for (i, seg) in ms.segments().iter().enumerate() {
        match ms.jump_at_start(i) {
            Some(jump) => {
                let before = acc;
                acc += jump.rho;
                jump_at_start.push(Some(jumps.len()));
                jumps.push(JumpIncrement {
                    time: jump.time,
                    before,
                    after: acc,
                });
            }
            None => jump_at_start.push(None),
        }
        let mut times: Vec<f64> = (0..=n_grid)
            .map(|k| seg.from + (seg.to - seg.from) * k as f64 / n_grid as f64)
            .collect();
        times[n_grid] = seg.to;
        times.extend(seg.breakpoints());
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut values = Vec::with_capacity(times.len());
        values.push(acc);
        let mut prev = seg.eval(times[0]);
        for &t in &times[1..] {
            let next = seg.eval(t);
            let e = excess(&prev, &next, policy)?;
            acc += e.value + e.error_bound;
            values.push(acc);
            prev = next;
        }
        segments.push(ProfileSegment { times, values });
    }
    Ok(RetractionProfile {
        segments,
        jumps,
        jump_at_start,
    })
}

/// Where a normalized parameter `sigma` lands in the original time line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Preimage {
    /// `min l_C^{-1}(sigma) = t`.
    Time(f64),
    /// `sigma = l_C(t-)` is approached only from the left; the set is `C(t-)`.
    LeftLimit(f64),
    /// `sigma` lies strictly inside the gap of jump `index`, at geodesic parameter `tau`.
    Gap { index: usize, tau: f64 },
}

impl RetractionProfile {
    pub fn segments(&self) -> &[ProfileSegment] {
        &self.segments
    }

    pub fn jumps(&self) -> &[JumpIncrement] {
        &self.jumps
    }

    /// `l_C(T)`.
    pub fn total(&self) -> f64 {
        *self.segments.last().expect("nonempty").values.last().expect("nonempty")
    }

    pub fn horizon(&self) -> f64 {
        *self.segments.last().expect("nonempty").times.last().expect("nonempty")
    }

    fn segment_index(&self, t: f64) -> usize {
        self.segments.partition_point(|s| s.times[0] <= t).saturating_sub(1)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let horizon = self.horizon();
        if (0.0..=horizon).contains(&t) {
            Ok(())
        } else {
            Err(Error::OutOfHorizon { t, horizon })
        }
    }

    /// `l_C(t)`, right-continuous.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(interp(&self.segments[self.segment_index(t)], t))
    }

    /// `l_C(t-)`, with `l_C(0-) = 0`.
    pub fn left_limit(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let i = self.segment_index(t);
        if i > 0 && self.segments[i].times[0] == t {
            return Ok(*self.segments[i - 1].values.last().expect("nonempty"));
        }
        Ok(interp(&self.segments[i], t))
    }

    /// `ret(C; [s, t]) = l_C(t) - l_C(s)` for `s <= t`.
    pub fn ret(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self.eval(t)? - self.eval(s)?)
    }

    /// The jump at time `t`, if any.
    pub fn jump_at(&self, t: f64) -> Option<&JumpIncrement> {
        let i = self.segment_index(t);
        if self.segments.get(i)?.times[0] != t {
            return None;
        }
        self.jump_at_start[i].map(|j| &self.jumps[j])
    }

    /// All nodes as `(t, l_C(t))`, with the left value at each jump listed first.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.segments
            .iter()
            .flat_map(|s| s.times.iter().copied().zip(s.values.iter().copied()))
    }

    /// Resolves `min l_C^{-1}(sigma)`, or the jump gap containing `sigma`.
    pub fn preimage(&self, sigma: f64) -> Result<Preimage> {
        let total = self.total();
        if !(0.0..=total).contains(&sigma) {
            return Err(Error::OutOfHorizon {
                t: sigma,
                horizon: total,
            });
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if let Some(j) = self.jump_at_start[i] {
                let jump = &self.jumps[j];
                if sigma > jump.before && sigma < jump.after {
                    return Ok(Preimage::Gap {
                        index: j,
                        tau: (sigma - jump.before) / (jump.after - jump.before),
                    });
                }
            }
            let k = seg.values.partition_point(|&v| v < sigma);
            if k == seg.values.len() {
                continue;
            }
            if k == 0 {
                return Ok(Preimage::Time(seg.times[0]));
            }
            let (t0, t1) = (seg.times[k - 1], seg.times[k]);
            let (v0, v1) = (seg.values[k - 1], seg.values[k]);
            if k == seg.values.len() - 1 && v1 == sigma && self.jump_starts_after(i) {
                // Reached only as the left limit of the jump at `t1`; the segment's
                // interior stays strictly below `sigma`.
                return Ok(Preimage::LeftLimit(t1));
            }
            let t = (t0 + (t1 - t0) * (sigma - v0) / (v1 - v0)).clamp(t0, t1);
            return Ok(Preimage::Time(t));
        }
        Ok(Preimage::Time(self.horizon()))
    }

    fn jump_starts_after(&self, i: usize) -> bool {
        self.jump_at_start.get(i + 1).is_some_and(|j| j.is_some())
    }
}

fn interp(seg: &ProfileSegment, t: f64) -> f64 {
    let k = seg.times.partition_point(|&s| s <= t);
    if k == 0 {
        return seg.values[0];
    }
    if k == seg.times.len() {
        return seg.values[k - 1];
    }
    let (t0, t1) = (seg.times[k - 1], seg.times[k]);
    let (v0, v1) = (seg.values[k - 1], seg.values[k]);
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}
