//! Prox-regular sets in `R^d`: descriptors, projections, distances, excess, and the
//! proximal normal cone inequality.

mod excess;
mod point;
mod set;

pub use excess::{excess, ExcessEstimate, ExcessPolicy};
pub use point::Point;
pub use set::{ProjectionResult, SetDescriptor};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Absolute membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Largest violation of `<n, z - x> <= (|n| / 2r) |z - x|^2` over the sampled `z`,
/// where `r` is the prox radius of `set`. The trivial sample `z = x` is always
/// included, so the result is never negative.
pub fn normal_cone_residual(set: &SetDescriptor, x: &Point, n: &Point, samples: &[Point]) -> Result<f64> {
    let dim = set.dim();
    x.check_dim(dim)?;
    n.check_dim(dim)?;
    let dist = set.distance(x);
    if dist > MEMBERSHIP_TOL {
        return Err(Error::PointOutsideSet { dist });
    }
    let r = set.prox_radius();
    let sigma = if r.is_finite() { n.norm() / (2.0 * r) } else { 0.0 };
    let mut worst = 0.0f64;
    for z in samples {
        z.check_dim(dim)?;
        let dz = set.distance(z);
        if dz > MEMBERSHIP_TOL {
            return Err(Error::SampleOutsideSet { dist: dz });
        }
        let d = z - x;
        worst = worst.max(n.dot(&d) - sigma * d.norm_sq());
    }
    Ok(worst)
}

/// Checks the variational characterization of `x` as a nearest point of `y`:
/// `x` in `set` and `<y - x, z - x> <= |z - x|^2 / 2 + tol` for every sampled `z`.
pub fn verify_projection(set: &SetDescriptor, y: &Point, x: &Point, samples: &[Point], tol: f64) -> bool {
    if set.distance(x) > MEMBERSHIP_TOL {
        return false;
    }
    let v = y - x;
    samples.iter().all(|z| {
        let d = z - x;
        v.dot(&d) <= 0.5 * d.norm_sq() + tol
    })
}

/// Deterministic points of `set` near `around`: uniform candidates in the ball of the
/// given radius, kept when inside the set and replaced by their projection otherwise.
/// Candidates whose projection is ambiguous are skipped.
pub fn sample_set_points(set: &SetDescriptor, around: &Point, radius: f64, count: usize, seed: u64) -> Vec<Point> {
    let dim = set.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 4 * count + 16 {
        attempts += 1;
        let dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let dir = Point::from_vec(dir);
        let len = dir.norm();
        if len == 0.0 {
            continue;
        }
        let u: f64 = rng.gen();
        let x = around.axpy(radius * u.powf(1.0 / dim as f64) / len, &dir);
        if set.distance(&x) <= 0.0 {
            out.push(x);
        } else if let Ok(p) = set.project(&x) {
            out.push(p.point);
        }
    }
    out
}
