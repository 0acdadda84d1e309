//! Rotationally symmetric factors seen from the cylinder `S^{n-1} x R`:
//! `u(x) = |x|^{(2-n)/2} v(-log |x|)` and back.

use std::fmt::Debug;
use std::sync::Arc;

use super::domain::{Domain, Region, SingularSet};
use super::factor::{ConformalFactor, RadialCylinderField};
use crate::dimension::Dimension;
use crate::error::{Error, Result};
use crate::fowler::FowlerTrajectory;
use crate::geometry::{dot, norm, scale, Ball};
use crate::sampling::probe_directions;

/// Largest relative disagreement between rays tolerated by [`euclidean_to_cyl`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// A function `v(t)` on an interval of the cylinder axis.
pub trait CylinderProfile: Send + Sync + Debug {
    fn dimension(&self) -> Dimension;

    /// Closed interval where `v` is available (ends may be infinite).
    fn t_range(&self) -> (f64, f64);

    fn value(&self, t: f64) -> Result<f64> {
        Ok(self.derivatives(t)?.0)
    }

    /// `(v, v', v'')` at `t`.
    fn derivatives(&self, t: f64) -> Result<(f64, f64, f64)>;

    fn check_range(&self, t: f64) -> Result<()> {
        let (a, b) = self.t_range();
        if t >= a && t <= b {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "t = {t} outside profile range [{a}, {b}]"
            )))
        }
    }
}

/// `v ≡ c`. With `c = v0` this is the round cylinder.
#[derive(Debug, Clone)]
pub struct ConstantProfile {
    pub n: Dimension,
    pub value: f64,
}

impl CylinderProfile for ConstantProfile {
    fn dimension(&self) -> Dimension {
        self.n
    }

    fn t_range(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn derivatives(&self, _t: f64) -> Result<(f64, f64, f64)> {
        Ok((self.value, 0.0, 0.0))
    }
}

/// `v(t) = (sech t)^{(n-2)/2}`, the unit bubble seen on the cylinder.
#[derive(Debug, Clone)]
pub struct SechProfile {
    pub n: Dimension,
}

impl CylinderProfile for SechProfile {
    fn dimension(&self) -> Dimension {
        self.n
    }

    fn t_range(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn derivatives(&self, t: f64) -> Result<(f64, f64, f64)> {
        let k = self.n.half_weight();
        let sech = 1.0 / t.cosh();
        let tanh = t.tanh();
        let v = sech.powf(k);
        Ok((
            v,
            -k * v * tanh,
            v * (k * k * tanh * tanh - k * sech * sech),
        ))
    }
}

/// A Fowler trajectory read with an offset: `v(s) = traj(s + shift)`.
#[derive(Debug, Clone)]
pub struct FowlerProfile {
    pub trajectory: Arc<FowlerTrajectory>,
    pub shift: f64,
}

impl FowlerProfile {
    pub fn new(trajectory: Arc<FowlerTrajectory>, shift: f64) -> Self {
        Self { trajectory, shift }
    }
}

impl CylinderProfile for FowlerProfile {
    fn dimension(&self) -> Dimension {
        self.trajectory.dimension()
    }

    fn t_range(&self) -> (f64, f64) {
        let (a, b) = self.trajectory.t_range();
        (a - self.shift, b - self.shift)
    }

    fn value(&self, t: f64) -> Result<f64> {
        Ok(self.trajectory.eval(t + self.shift)?.v)
    }

    fn derivatives(&self, t: f64) -> Result<(f64, f64, f64)> {
        self.trajectory.derivatives(t + self.shift)
    }
}

/// Profile read off a Euclidean factor along one ray from the origin:
/// `v(t) = r^{(n-2)/2} u(r d)`, `r = e^{-t}`.
#[derive(Debug, Clone)]
pub struct RayProfile {
    factor: ConformalFactor,
    direction: Vec<f64>,
    range: (f64, f64),
}

impl RayProfile {
    pub fn direction(&self) -> &[f64] {
        &self.direction
    }
}

impl CylinderProfile for RayProfile {
    fn dimension(&self) -> Dimension {
        self.factor.dimension()
    }

    fn t_range(&self) -> (f64, f64) {
        self.range
    }

    fn value(&self, t: f64) -> Result<f64> {
        self.check_range(t)?;
        let r = (-t).exp();
        let k = self.dimension().half_weight();
        Ok(r.powf(k) * self.factor.value(&scale(&self.direction, r))?)
    }

    fn derivatives(&self, t: f64) -> Result<(f64, f64, f64)> {
        self.check_range(t)?;
        let r = (-t).exp();
        let k = self.dimension().half_weight();
        let jet = self.factor.jet(&scale(&self.direction, r))?;
        let rk = r.powf(k);
        let du_dr = dot(&jet.gradient, &self.direction);
        let v = rk * jet.value;
        let dv = -rk * (k * jet.value + r * du_dr);
        let d2v = k * k * v + rk * r * r * jet.laplacian;
        Ok((v, dv, d2v))
    }
}

/// Euclidean factor `u(x) = |x|^{(2-n)/2} v(-log |x|)` on the punctured
/// region covered by the profile's `t`-range.
pub fn cyl_to_euclidean(profile: Arc<dyn CylinderProfile>) -> Result<ConformalFactor> {
    let n = profile.dimension().get();
    let (t_lo, t_hi) = profile.t_range();
    if !(t_lo < t_hi) {
        return Err(Error::Domain("profile has an empty t-range".into()));
    }
    let r_max = (-t_lo).exp();
    let r_min = (-t_hi).exp().max(f64::MIN_POSITIVE);
    let region = if r_max.is_finite() {
        Region::Ball(Ball::new(vec![0.0; n], r_max)?)
    } else {
        Region::Everywhere
    };
    let domain = Domain::new(region, SingularSet::origin(n, r_min)?);
    Ok(ConformalFactor::new(
        Arc::new(RadialCylinderField {
            profile,
            center: vec![0.0; n],
        }),
        domain,
    ))
}

/// Profile of a factor along the ray through `direction`, after checking on a
/// handful of rays and radii that the factor is rotationally symmetric.
pub fn euclidean_to_cyl(factor: &ConformalFactor, direction: &[f64]) -> Result<RayProfile> {
    let n = factor.dimension().get();
    if direction.len() != n || (norm(direction) - 1.0).abs() > 1e-12 {
        return Err(Error::Parameter(
            "direction must be a unit vector in R^n".into(),
        ));
    }
    let (r_min, r_max) = factor.domain().radial_range()?;
    let hi = if r_max.is_finite() {
        r_max
    } else {
        r_min.max(1.0) * 10.0
    };
    let lo = if r_min > hi * 1e-8 { r_min } else { hi * 1e-2 };
    let probes = probe_directions(n, 4, 0x5EED);
    let mut mismatch: f64 = 0.0;
    for j in 0..5 {
        let frac = (j as f64 + 0.5) / 5.0;
        let r = lo * (hi / lo).powf(frac);
        let reference = factor.value(&scale(direction, r))?;
        for d in &probes {
            let other = factor.value(&scale(d, r))?;
            mismatch = mismatch.max((other - reference).abs() / reference.abs());
        }
    }
    if mismatch > SYMMETRY_TOLERANCE {
        return Err(Error::NotRotationallySymmetric { mismatch });
    }
    let range = (
        if r_max.is_finite() {
            -r_max.ln()
        } else {
            f64::NEG_INFINITY
        },
        if r_min > 0.0 {
            -r_min.ln()
        } else {
            f64::INFINITY
        },
    );
    Ok(RayProfile {
        factor: factor.clone(),
        direction: direction.to_vec(),
        range,
    })
}
