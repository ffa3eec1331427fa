use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A piecewise-linear real function given by knots, constant beyond the first and last
/// knot. Repeated knot times encode a jump; the function is right-continuous there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise", into = "RawPiecewise")]
pub struct PiecewiseLinear {
    times: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPiecewise {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawPiecewise> for PiecewiseLinear {
    type Error = Error;
    fn try_from(raw: RawPiecewise) -> Result<Self> {
        Self::with_jumps(raw.times, raw.values)
    }
}

impl From<PiecewiseLinear> for RawPiecewise {
    fn from(f: PiecewiseLinear) -> Self {
        Self {
            times: f.times,
            values: f.values,
        }
    }
}

impl PiecewiseLinear {
    /// Continuous function: strictly increasing knot times.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let f = Self::with_jumps(times, values)?;
        if f.has_jumps() {
            return Err(Error::Scenario("offset knot times must be strictly increasing".into()));
        }
        Ok(f)
    }

    /// Nondecreasing knot times; a time may appear at most twice.
    pub fn with_jumps(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::Scenario(
                "piecewise-linear function needs matching, nonempty times and values".into(),
            ));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("piecewise-linear knots"));
        }
        for w in times.windows(2) {
            if w[1] < w[0] {
                return Err(Error::Scenario("knot times must be nondecreasing".into()));
            }
        }
        for w in times.windows(3) {
            if w[0] == w[2] {
                return Err(Error::Scenario("a knot time may repeat at most once".into()));
            }
        }
        Ok(Self { times, values })
    }

    pub fn has_jumps(&self) -> bool {
        self.times.windows(2).any(|w| w[0] == w[1])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Right-continuous evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        // First knot strictly after t.
        let i = self.times.partition_point(|&s| s <= t);
        if i == 0 {
            return self.values[0];
        }
        if i == self.times.len() {
            return self.values[i - 1];
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// `inf { f(s) : s <= t }`, attained at a knot or at `t`.
    pub fn running_min(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|&s| s <= t);
        self.values[..i].iter().copied().fold(self.eval(t), f64::min)
    }

    /// Largest decrease rate over the pieces intersecting `[a, b]` (0 if none decrease).
    pub fn max_descent_rate(&self, a: f64, b: f64) -> f64 {
        self.times
            .windows(2)
            .zip(self.values.windows(2))
            .filter(|(t, _)| t[1] > t[0] && t[1] > a && t[0] < b)
            .map(|(t, v)| (v[0] - v[1]) / (t[1] - t[0]))
            .fold(0.0, f64::max)
    }

    /// Knot times strictly inside `(a, b)`.
    pub fn breakpoints_in(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        self.times.iter().copied().filter(move |&t| t > a && t < b)
    }
}
