//! Excess geodesics `G(0) = Z0`, `G(tau) = Z1 + B(0, (1 - tau) rho)` and the explicit
//! solution of the sweeping process they drive.

use crate::error::{Error, Result};
use crate::geometry::{excess, ExcessPolicy, Point, SetDescriptor, MEMBERSHIP_TOL};

/// Allowed gap between a declared jump size and the computed excess.
pub const RHO_TOL: f64 = 1e-9;

/// The curve of dilations joining `z0` to `z1` at unit excess speed `rho`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicCurve {
    z0: SetDescriptor,
    z1: SetDescriptor,
    rho: f64,
}

impl GeodesicCurve {
    /// Builds the curve with `rho = e(z0, z1)`.
    pub fn new(z0: SetDescriptor, z1: SetDescriptor) -> Result<Self> {
        let est = excess(&z0, &z1, ExcessPolicy::default())?;
        Self::with_rho(z0, z1, est.value + est.error_bound)
    }

    /// Builds the curve with a declared `rho`, checked against the computed excess.
    pub fn with_rho(z0: SetDescriptor, z1: SetDescriptor, rho: f64) -> Result<Self> {
        let est = excess(&z0, &z1, ExcessPolicy::default())?;
        if !rho.is_finite() || !est.value.is_finite() {
            return Err(Error::InvalidDescriptor(
                "geodesic endpoints have infinite excess".into(),
            ));
        }
        if rho < est.value - RHO_TOL || rho > est.value + est.error_bound + RHO_TOL {
            return Err(Error::InvalidDescriptor(format!(
                "declared rho {rho} does not match excess {}",
                est.value
            )));
        }
        let radius = z1.prox_radius();
        if rho >= radius {
            return Err(Error::RhoTooLarge { rho, radius });
        }
        Ok(Self { z0, z1, rho })
    }

    pub fn z0(&self) -> &SetDescriptor {
        &self.z0
    }

    pub fn z1(&self) -> &SetDescriptor {
        &self.z1
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// The set `G(tau)`; `tau` is clamped to `[0, 1]`.
    pub fn at(&self, tau: f64) -> SetDescriptor {
        let tau = tau.clamp(0.0, 1.0);
        if self.rho == 0.0 {
            return self.z1.clone();
        }
        if tau == 0.0 {
            return self.z0.clone();
        }
        self.z1
            .dilate((1.0 - tau) * self.rho)
            .expect("dilation radius below rho, which is below the prox radius")
    }

    /// The time at which the shrinking dilation first touches `y0`.
    pub fn contact_time(&self, y0: &Point) -> Result<f64> {
        jump_time_t0(y0, &self.z1, self.rho)
    }
}

/// `t0` solving `|y0 - P_{Z1}(y0)| = (1 - t0) rho`, clamped to `[0, 1]`.
pub fn jump_time_t0(y0: &Point, z1: &SetDescriptor, rho: f64) -> Result<f64> {
    let dist = z1.project(y0)?.dist;
    if dist > rho + RHO_TOL * rho.max(1.0) {
        return Err(Error::PointTooFar { dist, rho });
    }
    if rho == 0.0 || dist == 0.0 {
        return Ok(1.0);
    }
    Ok((1.0 - dist / rho).clamp(0.0, 1.0))
}

/// The solution of the sweeping process driven by `g` from `y0 in Z0`: at rest until
/// `t0`, then a straight segment reaching `P_{Z1}(y0)` at `tau = 1`.
pub fn jump_solution(g: &GeodesicCurve, y0: &Point, tau: f64) -> Result<Point> {
    let dist = g.z0.distance(y0);
    if dist > MEMBERSHIP_TOL {
        return Err(Error::InitialPointOutside { dist });
    }
    let target = g.z1.project(y0)?.point;
    let t0 = g.contact_time(y0)?;
    if tau <= t0 {
        return Ok(y0.clone());
    }
    if tau >= 1.0 {
        return Ok(target);
    }
    let s = (tau - t0) / (1.0 - t0);
    Ok(y0.axpy(s, &(&target - y0)))
}
