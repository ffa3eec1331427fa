use crate::error::{Error, Result};
use crate::geodesic::GeodesicCurve;
use crate::geometry::{excess, ExcessPolicy, SetDescriptor};

use super::profile::{Preimage, RetractionProfile};
use super::{Motion, MovingSet, SetFamily};

/// The family `C~(sigma) = C(min l_C^{-1}(sigma))` on `[0, l_C(T)]`, with each jump gap
/// filled by the excess geodesic from `C(t-)` to `C(t)`.
#[derive(Clone, Debug)]
pub struct NormalizedMovingSet {
    ms: MovingSet,
    profile: RetractionProfile,
    fills: Vec<GeodesicCurve>,
}

/// Builds the normalized family. The profile must come from `ms`.
pub fn reparametrize(ms: &MovingSet, profile: &RetractionProfile) -> Result<NormalizedMovingSet> {
    if let Some(bad) = ms.check_admissibility().first_failure() {
        return Err(Error::InadmissibleJump {
            time: bad.time,
            rho: bad.rho,
            r: bad.r,
        });
    }
    if profile.jumps().len() != ms.jumps().len() || profile.horizon() != ms.horizon() {
        return Err(Error::InvalidConfig(
            "retraction profile does not match the moving set".into(),
        ));
    }
    let fills = ms
        .jumps()
        .iter()
        .map(|j| GeodesicCurve::with_rho(j.left.clone(), j.right.clone(), j.rho))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormalizedMovingSet {
        ms: ms.clone(),
        profile: profile.clone(),
        fills,
    })
}

impl NormalizedMovingSet {
    pub fn moving_set(&self) -> &MovingSet {
        &self.ms
    }

    pub fn profile(&self) -> &RetractionProfile {
        &self.profile
    }

    /// The geodesic filling the gap of jump `index`.
    pub fn fill(&self, index: usize) -> &GeodesicCurve {
        &self.fills[index]
    }

    /// Largest `e(C~(s), C~(t)) - (t - s)` over consecutive pairs of an `n`-point uniform
    /// sample and over all pairs anchored at 0 and at the end. Nonpositive (up to
    /// rounding) for a 1-Lipschitz family.
    pub fn lipschitz_defect(&self, n: usize) -> Result<f64> {
        let total = self.profile.total();
        if total == 0.0 || n < 2 {
            return Ok(0.0);
        }
        let sigmas: Vec<f64> = (0..n).map(|k| total * k as f64 / (n - 1) as f64).collect();
        let sets = sigmas.iter().map(|&s| self.at(s)).collect::<Result<Vec<_>>>()?;
        let mut worst = f64::NEG_INFINITY;
        let mut check = |i: usize, j: usize| -> Result<()> {
            let e = excess(&sets[i], &sets[j], ExcessPolicy::default())?.value;
            worst = worst.max(e - (sigmas[j] - sigmas[i]));
            Ok(())
        };
        for i in 0..n - 1 {
            check(i, i + 1)?;
            if i > 0 {
                check(0, i)?;
                check(i, n - 1)?;
            }
        }
        Ok(worst)
    }
}

impl SetFamily for NormalizedMovingSet {
    fn horizon(&self) -> f64 {
        self.profile.total()
    }

    fn dim(&self) -> usize {
        self.ms.dim()
    }

    /// The `r` of the underlying moving set. Sets inside a jump gap are dilations with
    /// their own, smaller radius, but their projections stay unique along the scheme.
    fn prox_radius(&self) -> f64 {
        self.ms.r()
    }

    /// Geodesic stretches are evaluated as `Z1 + B(0, remaining arc length)`, which avoids
    /// the cancellation in `(1 - tau) rho` near the end of a stretch.
    fn at(&self, sigma: f64) -> Result<SetDescriptor> {
        match self.profile.preimage(sigma)? {
            Preimage::Time(t) => {
                let i = self.ms.segment_index(t);
                let seg = &self.ms.segments()[i];
                if let Motion::GeodesicFill { curve } = &seg.motion {
                    let end = *self.profile.segments()[i].values.last().expect("nonempty");
                    if t > seg.from && t < seg.to {
                        return Ok(dilate_remaining(curve, end - sigma));
                    }
                }
                self.ms.snapshot(t)
            }
            Preimage::LeftLimit(t) => self.ms.left_limit(t),
            Preimage::Gap { index, .. } => {
                let remaining = self.profile.jumps()[index].after - sigma;
                Ok(dilate_remaining(&self.fills[index], remaining))
            }
        }
    }
}

fn dilate_remaining(curve: &GeodesicCurve, remaining: f64) -> SetDescriptor {
    curve
        .z1()
        .dilate(remaining.clamp(0.0, curve.rho()))
        .expect("remaining arc length is below rho, which is below the prox radius")
}
