//! Sphere inversions `x -> p + ρ²(x - p)/|x - p|²`, their action on balls,
//! half-spaces and domains, and the Kelvin transform
//! `v(y) = (ρ/|y - p|)^{n-2} u(I(y))` which carries solutions of the critical
//! equation to solutions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conformal::{ConformalFactor, Domain, Field, Jet, Region, SingularSet};
use crate::dimension::Dimension;
use crate::error::{Error, Result};
use crate::geometry::{dist, dot, norm_sq, scale, sub, Ball, HalfSpace, RigidMotion};

/// Relative tolerance for deciding that a sphere passes through the center.
const THROUGH_CENTER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inversion {
    pub center: Vec<f64>,
    pub scale: f64,
}

impl Inversion {
    pub fn new(center: Vec<f64>, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Parameter(format!(
                "inversion scale must be positive (got {scale})"
            )));
        }
        Ok(Self { center, scale })
    }

    /// Inversion in the unit sphere about the origin.
    pub fn unit(n: usize) -> Self {
        Self {
            center: vec![0.0; n],
            scale: 1.0,
        }
    }

    /// Inversion in the boundary sphere of `ball`.
    pub fn in_sphere(ball: &Ball) -> Self {
        Self {
            center: ball.center.clone(),
            scale: ball.radius,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        invert_point(self, x)
    }
}

pub fn invert_point(inv: &Inversion, x: &[f64]) -> Result<Vec<f64>> {
    let d = sub(x, &inv.center);
    let d2 = norm_sq(&d);
    if !(d2 > 0.0) {
        return Err(Error::SingularPoint);
    }
    let s = inv.scale * inv.scale / d2;
    Ok(inv
        .center
        .iter()
        .zip(&d)
        .map(|(p, di)| p + s * di)
        .collect())
}

/// Image of an open ball under an inversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BallImage {
    /// Center outside the ball: the image is a ball.
    Ball(Ball),
    /// Center inside the ball: the image is the exterior of this ball.
    Exterior(Ball),
    /// Center on the sphere: the image is a half-space.
    HalfSpace(HalfSpace),
}

impl BallImage {
    /// The image of the boundary sphere when it is a sphere.
    pub fn sphere(&self) -> Option<&Ball> {
        match self {
            BallImage::Ball(b) | BallImage::Exterior(b) => Some(b),
            BallImage::HalfSpace(_) => None,
        }
    }
}

pub fn invert_ball(inv: &Inversion, b: &Ball) -> BallImage {
    let rho2 = inv.scale * inv.scale;
    let cp = sub(&b.center, &inv.center);
    let dc2 = norm_sq(&cp);
    let r2 = b.radius * b.radius;
    let power = dc2 - r2;
    if power.abs() <= THROUGH_CENTER_TOLERANCE * dc2.max(r2) {
        // the far point p + 2(c - p) maps to p + ρ²(c - p)/(2 r²)
        let m = scale(&cp, 1.0 / b.radius);
        let offset = dot(&m, &inv.center) + rho2 / (2.0 * b.radius);
        return BallImage::HalfSpace(HalfSpace { normal: m, offset });
    }
    let center: Vec<f64> = inv
        .center
        .iter()
        .zip(&cp)
        .map(|(p, c)| p + rho2 * c / power)
        .collect();
    let image = Ball {
        center,
        radius: rho2 * b.radius / power.abs(),
    };
    if power > 0.0 {
        BallImage::Ball(image)
    } else {
        BallImage::Exterior(image)
    }
}

/// Image of a closed half-space under an inversion.
pub fn invert_half_space(inv: &Inversion, hs: &HalfSpace) -> BallImage {
    let d = hs.offset - dot(&hs.normal, &inv.center);
    let scale_d = 1.0 + norm_sq(&inv.center).sqrt() + hs.offset.abs();
    if d.abs() <= THROUGH_CENTER_TOLERANCE * scale_d {
        return BallImage::HalfSpace(hs.clone());
    }
    let rho2 = inv.scale * inv.scale;
    let center: Vec<f64> = inv
        .center
        .iter()
        .zip(&hs.normal)
        .map(|(p, m)| p + rho2 * m / (2.0 * d))
        .collect();
    let sphere = Ball {
        center,
        radius: rho2 / (2.0 * d.abs()),
    };
    if d > 0.0 {
        BallImage::Ball(sphere)
    } else {
        BallImage::Exterior(sphere)
    }
}

fn complement(img: BallImage) -> Region {
    match img {
        BallImage::Ball(b) => Region::Exterior(b),
        BallImage::Exterior(b) => Region::Ball(b),
        BallImage::HalfSpace(h) => Region::HalfSpace(HalfSpace {
            normal: scale(&h.normal, -1.0),
            offset: -h.offset,
        }),
    }
}

fn as_region(img: BallImage) -> Region {
    match img {
        BallImage::Ball(b) => Region::Ball(b),
        BallImage::Exterior(b) => Region::Exterior(b),
        BallImage::HalfSpace(h) => Region::HalfSpace(h),
    }
}

/// Image of a domain: the region is mapped setwise, singular points are
/// mapped and their exclusion radius enlarged to cover the images of the
/// original exclusion balls.
pub fn invert_domain(inv: &Inversion, domain: &Domain) -> Result<Domain> {
    let region = match &domain.region {
        Region::Everywhere => Region::Everywhere,
        Region::Ball(b) => as_region(invert_ball(inv, b)),
        Region::Exterior(b) => complement(invert_ball(inv, b)),
        Region::HalfSpace(h) => as_region(invert_half_space(inv, h)),
        Region::Annulus { .. } => {
            return Err(Error::Domain(
                "inversion of annular regions is not supported".into(),
            ))
        }
    };
    let singular = if domain.singular.is_empty() {
        SingularSet::empty()
    } else {
        let delta = domain.singular.exclusion_radius;
        let mut points = Vec::with_capacity(domain.singular.points.len());
        let mut radius: f64 = 0.0;
        for s in &domain.singular.points {
            if dist(s, &inv.center) <= delta {
                return Err(Error::Domain(
                    "inversion center lies inside a singular exclusion ball".into(),
                ));
            }
            let image = invert_point(inv, s)?;
            let ball = Ball {
                center: s.clone(),
                radius: delta,
            };
            if let BallImage::Ball(b) = invert_ball(inv, &ball) {
                radius = radius.max(dist(&b.center, &image) + b.radius);
            }
            points.push(image);
        }
        SingularSet::new(points, radius)?
    };
    Ok(Domain::new(region, singular))
}

/// Kelvin transform of a field: `v(y) = (ρ/|y - p|)^{n-2} u(I(y))`.
#[derive(Debug, Clone)]
pub struct KelvinField {
    pub inversion: Inversion,
    pub inner: Arc<dyn Field>,
}

impl KelvinField {
    /// `(I(y), y - p, ρ²/|y - p|²)`
    fn pull(&self, y: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let d = sub(y, &self.inversion.center);
        let d2 = norm_sq(&d);
        if !(d2 > 0.0) {
            return Err(Error::SingularPoint);
        }
        let s = self.inversion.scale * self.inversion.scale / d2;
        let x = self
            .inversion
            .center
            .iter()
            .zip(&d)
            .map(|(p, di)| p + s * di)
            .collect();
        Ok((x, d, s))
    }
}

impl Field for KelvinField {
    fn dimension(&self) -> Dimension {
        self.inner.dimension()
    }

    fn value(&self, y: &[f64]) -> Result<f64> {
        let (x, _, s) = self.pull(y)?;
        let k = self.dimension().half_weight();
        Ok(s.powf(k) * self.inner.value(&x)?)
    }

    fn jet(&self, y: &[f64]) -> Result<Jet> {
        let (x, d, s) = self.pull(y)?;
        let k = self.dimension().half_weight();
        let phi = s.powf(k);
        let inner = self.inner.jet(&x)?;
        let d2 = norm_sq(&d);
        // D I = s (Id - 2 d d^T / |d|^2), symmetric
        let dg = dot(&d, &inner.gradient);
        let gradient = d
            .iter()
            .zip(&inner.gradient)
            .map(|(di, gi)| {
                -2.0 * k * phi * di / d2 * inner.value + phi * s * (gi - 2.0 * di * dg / d2)
            })
            .collect();
        Ok(Jet {
            value: phi * inner.value,
            gradient,
            laplacian: phi * s * s * inner.laplacian,
        })
    }

    fn residual(&self, y: &[f64]) -> Option<Result<f64>> {
        let (x, _, s) = match self.pull(y) {
            Ok(p) => p,
            Err(e) => return Some(Err(e)),
        };
        let inner = self.inner.residual(&x)?;
        let k = self.dimension().half_weight();
        Some(inner.map(|r| s.powf(k) * s * s * r))
    }
}

pub fn kelvin_transform(inv: &Inversion, factor: &ConformalFactor) -> Result<ConformalFactor> {
    if inv.dim() != factor.dimension().get() {
        return Err(Error::Parameter(
            "inversion and factor dimensions differ".into(),
        ));
    }
    let domain = invert_domain(inv, factor.domain())?;
    Ok(ConformalFactor::new(
        Arc::new(KelvinField {
            inversion: inv.clone(),
            inner: factor.field().clone(),
        }),
        domain,
    )
    .with_mode(factor.mode()))
}

/// Push-forward of a field by a rigid motion `M`: `v(y) = u(M⁻¹ y)`.
#[derive(Debug, Clone)]
pub struct MovedField {
    pub motion: RigidMotion,
    pub inner: Arc<dyn Field>,
}

impl Field for MovedField {
    fn dimension(&self) -> Dimension {
        self.inner.dimension()
    }

    fn value(&self, y: &[f64]) -> Result<f64> {
        self.inner.value(&self.motion.apply_inverse(y))
    }

    fn jet(&self, y: &[f64]) -> Result<Jet> {
        let j = self.inner.jet(&self.motion.apply_inverse(y))?;
        Ok(Jet {
            value: j.value,
            gradient: self.motion.rotate(&j.gradient),
            laplacian: j.laplacian,
        })
    }

    fn residual(&self, y: &[f64]) -> Option<Result<f64>> {
        self.inner.residual(&self.motion.apply_inverse(y))
    }
}

pub fn move_domain(motion: &RigidMotion, domain: &Domain) -> Domain {
    let region = match &domain.region {
        Region::Everywhere => Region::Everywhere,
        Region::Ball(b) => Region::Ball(motion.apply_ball(b)),
        Region::Exterior(b) => Region::Exterior(motion.apply_ball(b)),
        Region::Annulus {
            center,
            inner,
            outer,
        } => Region::Annulus {
            center: motion.apply(center),
            inner: *inner,
            outer: *outer,
        },
        Region::HalfSpace(h) => Region::HalfSpace(motion.apply_half_space(h)),
    };
    let singular = SingularSet {
        points: domain
            .singular
            .points
            .iter()
            .map(|p| motion.apply(p))
            .collect(),
        exclusion_radius: domain.singular.exclusion_radius,
    };
    Domain::new(region, singular)
}

/// The factor expressed in the coordinates `y = M x`.
pub fn move_factor(motion: &RigidMotion, factor: &ConformalFactor) -> ConformalFactor {
    ConformalFactor::new(
        Arc::new(MovedField {
            motion: motion.clone(),
            inner: factor.field().clone(),
        }),
        move_domain(motion, factor.domain()),
    )
    .with_mode(factor.mode())
}

/// Rigid motion bringing `hs` to `{x^n >= 0}` together with the moved factor.
pub fn normalize_frame(factor: &ConformalFactor, hs: &HalfSpace) -> (ConformalFactor, RigidMotion) {
    let motion = RigidMotion::normalizing(hs);
    (move_factor(&motion, factor), motion)
}

/// Configuration after inverting about a point `p` on the boundary of an
/// interior ball `B ⊂ B_outer`: `Σ = I(∂B_outer)` bounds the excluded ball
/// `B(a, r)` and `I(B)` is a half-space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorRegionMap {
    pub inversion: Inversion,
    pub sigma: Ball,
    pub plane: HalfSpace,
}

impl ExteriorRegionMap {
    pub fn new(inversion: Inversion, outer: &Ball, inner: &Ball) -> Result<Self> {
        let sigma = match invert_ball(&inversion, outer) {
            BallImage::Exterior(b) => b,
            _ => {
                return Err(Error::Geometry(
                    "inversion center must lie inside the outer ball".into(),
                ))
            }
        };
        let plane = match invert_ball(&inversion, inner) {
            BallImage::HalfSpace(h) => h,
            _ => {
                return Err(Error::Geometry(
                    "inversion center must lie on the inner sphere".into(),
                ))
            }
        };
        Ok(Self {
            inversion,
            sigma,
            plane,
        })
    }
}

/// Left-hand side of `∂v/∂ν + ((n-2)/(2r)) v + ((n-2)/2) h v^{n/(n-2)} = 0` at
/// `x ∈ Σ = ∂B(a, r)`, with `ν` pointing away from the ball.
pub fn sigma_boundary_residual(
    v: &ConformalFactor,
    sigma: &Ball,
    h: f64,
    x: &[f64],
) -> Result<f64> {
    if !crate::conformal::on_sphere(sigma, x, 1e-9) {
        return Err(Error::Geometry(format!(
            "point is not on Σ (|x - a| - r = {:e})",
            dist(x, &sigma.center) - sigma.radius
        )));
    }
    let n = v.dimension();
    let jet = v.jet(x)?;
    let nu = scale(&sub(x, &sigma.center), 1.0 / sigma.radius);
    let k = n.half_weight();
    Ok(dot(&jet.gradient, &nu)
        + k / sigma.radius * jet.value
        + k * h * jet.value.powf(n.boundary_exponent()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::bubble;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn unit_sphere_is_fixed() {
        let inv = Inversion::unit(3);
        let x = [0.6, 0.0, 0.8];
        let y = invert_point(&inv, &x).unwrap();
        assert!(dist(&x, &y) < 1e-15);
        assert_eq!(
            invert_point(&inv, &[2.0, 0.0, 0.0]).unwrap(),
            vec![0.5, 0.0, 0.0]
        );
        assert_eq!(invert_point(&inv, &[0.0; 3]), Err(Error::SingularPoint));
    }

    #[test]
    fn ball_image_closed_form() {
        let inv = Inversion::unit(3);
        let b = Ball::new(vec![2.0, 0.0, 0.0], 1.0).unwrap();
        match invert_ball(&inv, &b) {
            BallImage::Ball(img) => {
                assert!((img.center[0] - 2.0 / 3.0).abs() < 1e-15);
                assert!((img.radius - 1.0 / 3.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        match invert_ball(&inv, &Ball::unit(3)) {
            BallImage::Exterior(img) => {
                assert!(img.center.iter().all(|c| c.abs() < 1e-15));
                assert!((img.radius - 1.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sphere_through_center_maps_to_plane() {
        let inv = Inversion::new(vec![0.0, 0.0, 1.0], 1.5).unwrap();
        let b = Ball::new(vec![0.0, 0.0, 0.5], 0.5).unwrap();
        let BallImage::HalfSpace(h) = invert_ball(&inv, &b) else {
            panic!("expected half-space")
        };
        // the ball's interior maps into the half-space
        let img = invert_point(&inv, &b.center).unwrap();
        assert!(h.contains(&img));
        for d in crate::sampling::fibonacci_sphere(40) {
            let x = b.boundary_point(&d);
            if dist(&x, &inv.center) < 1e-6 {
                continue;
            }
            let y = invert_point(&inv, &x).unwrap();
            assert!(h.height(&y).abs() < 1e-12, "{}", h.height(&y));
        }
    }

    #[test]
    fn half_space_image_is_consistent_with_points() {
        let inv = Inversion::new(vec![0.1, -0.2, 0.3], 0.7).unwrap();
        let hs = HalfSpace::new(&[0.0, 1.0, 1.0], 1.0).unwrap();
        let BallImage::Ball(b) = invert_half_space(&inv, &hs) else {
            panic!("p is outside the half-space")
        };
        let deep = crate::geometry::axpy(&hs.anchor(), 3.0, &hs.normal);
        assert!(dist(&invert_point(&inv, &deep).unwrap(), &b.center) < b.radius);
        let on = hs.anchor();
        let y = invert_point(&inv, &on).unwrap();
        assert!((dist(&y, &b.center) - b.radius).abs() < 1e-12);
    }

    #[test]
    fn constant_kelvin_is_fundamental_solution() {
        let n = dim(4);
        let u = ConformalFactor::constant(n, 1.0).unwrap();
        let inv = Inversion::new(vec![0.5, 0.0, 0.0, 0.0], 2.0).unwrap();
        let v = kelvin_transform(&inv, &u).unwrap();
        let y = [1.5, 1.0, 0.0, -0.3];
        let d = dist(&y, &inv.center);
        assert!((v.value(&y).unwrap() - (2.0 / d).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn bubble_is_kelvin_invariant_under_unit_inversion() {
        let n = dim(3);
        let u = bubble(n, 1.0, vec![0.0; 3]).unwrap();
        let v = kelvin_transform(&Inversion::unit(3), &u).unwrap();
        let y = [0.3, -1.2, 0.7];
        assert!((v.value(&y).unwrap() - u.value(&y).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn moved_factor_gradient_rotates() {
        let n = dim(3);
        let u = bubble(n, 0.8, vec![0.2, 0.1, -0.4]).unwrap();
        let hs = HalfSpace::new(&[0.3, -0.4, 0.2], 0.1).unwrap();
        let (w, m) = normalize_frame(&u, &hs);
        let x = [0.5, -0.1, 0.3];
        let y = m.apply(&x);
        let ju = u.jet(&x).unwrap();
        let jw = w.jet(&y).unwrap();
        assert!((ju.value - jw.value).abs() < 1e-15);
        assert!((ju.laplacian - jw.laplacian).abs() < 1e-13);
        let rotated = m.rotate(&ju.gradient);
        for (a, b) in rotated.iter().zip(&jw.gradient) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
