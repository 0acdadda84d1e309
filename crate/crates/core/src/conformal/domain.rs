use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, norm, Ball, HalfSpace};

/// Relative slack allowed when testing membership of boundary points.
const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Finite singular set with a common exclusion radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSet {
    pub points: Vec<Vec<f64>>,
    pub exclusion_radius: f64,
}

impl SingularSet {
    pub fn new(points: Vec<Vec<f64>>, exclusion_radius: f64) -> Result<Self> {
        if !(exclusion_radius > 0.0) {
            return Err(Error::Parameter(format!(
                "exclusion radius must be positive (got {exclusion_radius})"
            )));
        }
        Ok(Self {
            points,
            exclusion_radius,
        })
    }

    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            exclusion_radius: f64::MIN_POSITIVE,
        }
    }

    pub fn origin(n: usize, exclusion_radius: f64) -> Result<Self> {
        Self::new(vec![vec![0.0; n]], exclusion_radius)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance from `x` to the nearest singular point (infinite if none).
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| dist(p, x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn excludes(&self, x: &[f64]) -> bool {
        self.distance(x) < self.exclusion_radius
    }
}

/// Region on which a conformal factor is evaluated, before singular exclusions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Everywhere,
    /// Closed ball.
    Ball(Ball),
    /// Complement of the open ball.
    Exterior(Ball),
    Annulus {
        center: Vec<f64>,
        inner: f64,
        outer: f64,
    },
    HalfSpace(HalfSpace),
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Everywhere => true,
            Region::Ball(b) => dist(x, &b.center) <= b.radius * (1.0 + MEMBERSHIP_SLACK),
            Region::Exterior(b) => dist(x, &b.center) >= b.radius * (1.0 - MEMBERSHIP_SLACK),
            Region::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = dist(x, center);
                r >= inner * (1.0 - MEMBERSHIP_SLACK) && r <= outer * (1.0 + MEMBERSHIP_SLACK)
            }
            Region::HalfSpace(h) => h.height(x) >= -MEMBERSHIP_SLACK * (1.0 + norm(x)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub region: Region,
    pub singular: SingularSet,
}

impl Domain {
    pub fn new(region: Region, singular: SingularSet) -> Self {
        Self { region, singular }
    }

    pub fn everywhere() -> Self {
        Self::new(Region::Everywhere, SingularSet::empty())
    }

    /// `B(0, 1)` minus the exclusion balls of `singular`.
    pub fn unit_ball(n: usize, singular: SingularSet) -> Self {
        Self::new(Region::Ball(Ball::unit(n)), singular)
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite evaluation point".into()));
        }
        if self.singular.excludes(x) {
            return Err(Error::Domain(format!(
                "point within exclusion radius {} of a singular point",
                self.singular.exclusion_radius
            )));
        }
        if !self.region.contains(x) {
            return Err(Error::Domain("point outside the evaluation region".into()));
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.check(x).is_ok()
    }

    /// Range of radii `[r_min, r_max]` reachable along rays from the origin,
    /// for regions that are rotationally symmetric about it.
    pub fn radial_range(&self) -> Result<(f64, f64)> {
        let at_origin = |c: &[f64]| c.iter().all(|v| *v == 0.0);
        let (mut lo, hi) = match &self.region {
            Region::Everywhere => (0.0, f64::INFINITY),
            Region::Ball(b) if at_origin(&b.center) => (0.0, b.radius),
            Region::Exterior(b) if at_origin(&b.center) => (b.radius, f64::INFINITY),
            Region::Annulus {
                center,
                inner,
                outer,
            } if at_origin(center) => (*inner, *outer),
            _ => return Err(Error::Domain("region is not centered at the origin".into())),
        };
        for p in &self.singular.points {
            if at_origin(p) {
                lo = lo.max(self.singular.exclusion_radius);
            } else {
                return Err(Error::Domain(
                    "singular points off the origin break radial symmetry".into(),
                ));
            }
        }
        Ok((lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn punctured_ball_membership() {
        let d = Domain::unit_ball(3, SingularSet::origin(3, 0.1).unwrap());
        assert!(d.contains(&[0.5, 0.0, 0.0]));
        assert!(d.contains(&[1.0, 0.0, 0.0]));
        assert!(!d.contains(&[1.01, 0.0, 0.0]));
        assert!(!d.contains(&[0.05, 0.0, 0.0]));
        assert_eq!(d.radial_range().unwrap(), (0.1, 1.0));
    }

    #[test]
    fn exterior_membership() {
        let b = Ball::new(vec![0.0, 0.0, -2.0], 1.0).unwrap();
        let d = Domain::new(Region::Exterior(b), SingularSet::empty());
        assert!(d.contains(&[0.0, 0.0, 0.0]));
        assert!(!d.contains(&[0.0, 0.0, -2.5]));
        assert!(d.radial_range().is_err());
    }

    #[test]
    fn exclusion_radius_must_be_positive() {
        assert!(SingularSet::new(vec![], 0.0).is_err());
    }
}
