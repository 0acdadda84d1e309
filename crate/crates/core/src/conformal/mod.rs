//! Conformal factors `u > 0` and the metrics `g = u^{4/(n-2)} δ` they define
//! on domains of `R^n`: scalar-curvature residuals, mean curvature of round
//! spheres, and the cylinder picture of radial factors.
//!
//! Mean curvature is `1/(n-1)` times the trace of the second fundamental
//! form with respect to the chosen unit normal, so the flat unit sphere has
//! `h = 1` for the inward normal.

mod domain;
mod factor;
mod profile;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use domain::{Domain, Region, SingularSet};
pub use factor::{
    BubbleField, ConformalFactor, ConstantField, DerivativeMode, Field, Jet, RadialCylinderField,
    Spacing,
};
pub use profile::{
    cyl_to_euclidean, euclidean_to_cyl, ConstantProfile, CylinderProfile, FowlerProfile,
    RayProfile, SechProfile, SYMMETRY_TOLERANCE,
};

use crate::dimension::Dimension;
use crate::error::{Error, Result};
use crate::fowler::equilibrium_v0;
use crate::geometry::{dist, dot, scale, sub, Ball};
use crate::sampling::probe_directions;

/// Slack for "point lies on the sphere", relative to `max(1, radius, |center|)`.
pub const ON_SPHERE_TOLERANCE: f64 = 1e-12;

/// `u(x) = (2λ / (λ² + |x - center|²))^{(n-2)/2}`, an exact solution on all of `R^n`.
pub fn bubble(n: Dimension, lambda: f64, center: Vec<f64>) -> Result<ConformalFactor> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "bubble scale must be positive (got {lambda})"
        )));
    }
    if center.len() != n.get() {
        return Err(Error::Parameter(
            "bubble center has the wrong dimension".into(),
        ));
    }
    Ok(ConformalFactor::new(
        Arc::new(BubbleField { n, lambda, center }),
        Domain::everywhere(),
    ))
}

/// Round-cylinder factor `v0 |x|^{(2-n)/2}` on `R^n \ {0}`.
pub fn cylinder_factor(n: Dimension) -> ConformalFactor {
    cyl_to_euclidean(Arc::new(ConstantProfile {
        n,
        value: equilibrium_v0(n),
    }))
    .expect("constant profile covers the whole axis")
}

/// `Δu + (n(n-2)/4) u^{(n+2)/(n-2)}` at `x`; zero exactly where `g` has
/// scalar curvature `n(n-1)`.
pub fn yamabe_residual(factor: &ConformalFactor, x: &[f64]) -> Result<f64> {
    factor.check(x)?;
    if let Some(r) = factor.routed_residual(x) {
        return r;
    }
    let n = factor.dimension();
    let jet = factor.jet(x)?;
    Ok(jet.laplacian + n.yamabe_coefficient() * jet.value.powf(n.critical_exponent()))
}

/// Scalar curvature `-(4(n-1)/(n-2)) u^{-(n+2)/(n-2)} Δu` of `g` over a flat background.
pub fn scalar_curvature(factor: &ConformalFactor, x: &[f64]) -> Result<f64> {
    let n = factor.dimension();
    let nf = n.as_f64();
    let jet = factor.jet(x)?;
    Ok(-(4.0 * (nf - 1.0) / (nf - 2.0)) * jet.value.powf(-n.critical_exponent()) * jet.laplacian)
}

/// `g = u^{4/(n-2)} δ`.
#[derive(Debug, Clone)]
pub struct ConformalMetric {
    pub factor: ConformalFactor,
}

impl ConformalMetric {
    pub fn new(factor: ConformalFactor) -> Self {
        Self { factor }
    }

    pub fn dimension(&self) -> Dimension {
        self.factor.dimension()
    }

    pub fn scalar_curvature(&self, x: &[f64]) -> Result<f64> {
        scalar_curvature(&self.factor, x)
    }

    pub fn mean_curvature_sphere(
        &self,
        ball: &Ball,
        x: &[f64],
        orientation: Orientation,
    ) -> Result<f64> {
        mean_curvature_sphere(self, ball, x, orientation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Inward,
    Outward,
}

pub(crate) fn on_sphere(ball: &Ball, x: &[f64], rel_tol: f64) -> bool {
    let scale = ball
        .radius
        .max(1.0)
        .max(ball.center.iter().map(|c| c.abs()).fold(0.0, f64::max));
    (dist(x, &ball.center) - ball.radius).abs() <= rel_tol * scale
}

/// Mean curvature of `∂ball` at `x` in the metric `g`:
///
/// `h(g) = u^{-2/(n-2)} h₀ - (2/(n-2)) u^{-n/(n-2)} ∂u/∂ν`
///
/// with `h₀ = ±1/ρ` the flat mean curvature for the chosen normal `ν`.
pub fn mean_curvature_sphere(
    metric: &ConformalMetric,
    ball: &Ball,
    x: &[f64],
    orientation: Orientation,
) -> Result<f64> {
    if !on_sphere(ball, x, ON_SPHERE_TOLERANCE) {
        return Err(Error::Geometry(format!(
            "point is not on the sphere (|x - c| - ρ = {:e})",
            dist(x, &ball.center) - ball.radius
        )));
    }
    let factor = &metric.factor;
    let n = factor.dimension();
    let jet = factor.jet(x)?;
    let sign = match orientation {
        Orientation::Inward => 1.0,
        Orientation::Outward => -1.0,
    };
    let nu = scale(&sub(&ball.center, x), sign / ball.radius);
    let h_flat = sign / ball.radius;
    let du_dnu = dot(&jet.gradient, &nu);
    let nf = n.as_f64();
    Ok(jet.value.powf(-2.0 / (nf - 2.0)) * h_flat
        - (2.0 / (nf - 2.0)) * jet.value.powf(-n.boundary_exponent()) * du_dnu)
}

/// Mean curvature of the slice `{t} x S^{n-1}` for the inward (increasing
/// `t`) normal: `-(2/(n-2)) v^{-n/(n-2)} v'(t)`.
pub fn cylinder_end_mean_curvature(profile: &dyn CylinderProfile, t: f64) -> Result<f64> {
    profile.check_range(t)?;
    let n = profile.dimension();
    let (v, dv, _) = profile.derivatives(t)?;
    Ok(-(2.0 / (n.as_f64() - 2.0)) * v.powf(-n.boundary_exponent()) * dv)
}

/// Bounds of `u(x) |x - s|^{(n-2)/2}` on one annulus about the singular point `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusBounds {
    pub r_in: f64,
    pub r_out: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticBounds {
    /// Infimum over all annuli.
    pub c1: f64,
    /// Supremum over all annuli.
    pub c2: f64,
    pub annuli: Vec<AnnulusBounds>,
    /// Log-log slope of the scaled factor against the radius. Near zero for a
    /// genuine singularity, close to `(n-2)/2` when `u` stays bounded.
    pub scaled_slope: f64,
    pub removable: bool,
}

/// Samples `u |x - s|^{(n-2)/2}` over geometric radii in each annulus around the
/// first singular point (or the origin) and reports its extreme values.
pub fn asymptotic_bounds_check(
    factor: &ConformalFactor,
    annuli: &[(f64, f64)],
) -> Result<AsymptoticBounds> {
    const RADII_PER_ANNULUS: usize = 2000;
    if annuli.is_empty() {
        return Err(Error::Parameter("need at least one annulus".into()));
    }
    let n = factor.dimension();
    let k = n.half_weight();
    let center = factor
        .domain()
        .singular
        .points
        .first()
        .cloned()
        .unwrap_or_else(|| vec![0.0; n.get()]);
    let dirs = probe_directions(n.get(), 6, 0xA5A5);
    let mut out = Vec::with_capacity(annuli.len());
    let (mut sx, mut sy, mut sxx, mut sxy, mut count) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(r_in, r_out) in annuli {
        if !(r_in > 0.0 && r_out > r_in) {
            return Err(Error::Parameter(format!(
                "annulus needs 0 < r_in < r_out (got {r_in}, {r_out})"
            )));
        }
        let mut lower = f64::INFINITY;
        let mut upper: f64 = 0.0;
        for j in 0..RADII_PER_ANNULUS {
            let frac = j as f64 / (RADII_PER_ANNULUS - 1) as f64;
            let r = r_in * (r_out / r_in).powf(frac);
            let mut ray_max: f64 = 0.0;
            for d in &dirs {
                let x: Vec<f64> = center.iter().zip(d).map(|(c, di)| c + r * di).collect();
                let u = factor.value(&x).map_err(|e| {
                    Error::Domain(format!("annulus sample at radius {r} rejected: {e}"))
                })?;
                let scaled = u * r.powf(k);
                lower = lower.min(scaled);
                upper = upper.max(scaled);
                ray_max = ray_max.max(scaled);
            }
            let (lx, ly) = (r.ln(), ray_max.ln());
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            count += 1.0;
        }
        out.push(AnnulusBounds {
            r_in,
            r_out,
            lower,
            upper,
        });
    }
    let denom = count * sxx - sx * sx;
    let scaled_slope = if denom.abs() > 0.0 {
        (count * sxy - sx * sy) / denom
    } else {
        0.0
    };
    Ok(AsymptoticBounds {
        c1: out.iter().map(|a| a.lower).fold(f64::INFINITY, f64::min),
        c2: out.iter().map(|a| a.upper).fold(0.0, f64::max),
        annuli: out,
        scaled_slope,
        removable: scaled_slope > 0.5 * k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn constant_factor_residual_and_curvature() {
        let u = ConformalFactor::constant(dim(4), 1.0).unwrap();
        assert_eq!(yamabe_residual(&u, &[0.1, 0.2, 0.3, 0.4]).unwrap(), 2.0);
        let c = ConformalFactor::constant(dim(5), 3.7).unwrap();
        assert_eq!(
            scalar_curvature(&c, &[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn bubble_rejects_bad_scale() {
        assert!(matches!(
            bubble(dim(3), 0.0, vec![0.0; 3]),
            Err(Error::Domain(_))
        ));
        assert!(bubble(dim(3), -1.0, vec![0.0; 3]).is_err());
    }

    #[test]
    fn bubble_curvature_at_sample_point() {
        let u = bubble(dim(4), 1.0, vec![0.0; 4]).unwrap();
        let r = scalar_curvature(&u, &[0.3, 0.0, 0.0, 0.0]).unwrap();
        assert!((r - 12.0).abs() < 1e-8);
    }

    #[test]
    fn cylinder_curvature_n3() {
        let u = cylinder_factor(dim(3));
        let r = scalar_curvature(&u, &[0.2, -0.5, 0.1]).unwrap();
        assert!((r - 6.0).abs() < 1e-8, "{r}");
    }

    #[test]
    fn flat_sphere_mean_curvature() {
        let g = ConformalMetric::new(ConformalFactor::constant(dim(3), 1.0).unwrap());
        let ball = Ball::new(vec![0.5, 0.0, 0.0], 0.25).unwrap();
        let x = [0.5, 0.25, 0.0];
        let h_in = g
            .mean_curvature_sphere(&ball, &x, Orientation::Inward)
            .unwrap();
        let h_out = g
            .mean_curvature_sphere(&ball, &x, Orientation::Outward)
            .unwrap();
        assert!((h_in - 4.0).abs() < 1e-14);
        assert!((h_out + 4.0).abs() < 1e-14);
    }

    #[test]
    fn off_sphere_point_is_a_geometry_error() {
        let g = ConformalMetric::new(ConformalFactor::constant(dim(3), 1.0).unwrap());
        let ball = Ball::unit(3);
        assert!(matches!(
            g.mean_curvature_sphere(&ball, &[0.9, 0.0, 0.0], Orientation::Inward),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn cylinder_unit_sphere_is_minimal() {
        for n in 3..7 {
            let g = ConformalMetric::new(cylinder_factor(dim(n)));
            let mut x = vec![0.0; n];
            x[0] = 1.0;
            let h = g
                .mean_curvature_sphere(&Ball::unit(n), &x, Orientation::Inward)
                .unwrap();
            assert!(h.abs() < 1e-10, "n={n}: {h}");
        }
    }

    #[test]
    fn sech_end_curvature() {
        let p = SechProfile { n: dim(4) };
        let h = cylinder_end_mean_curvature(&p, 1.0).unwrap();
        assert!((h - 1f64.sinh()).abs() < 1e-14);
        assert!((h - 1.17520).abs() < 1e-5);
        assert!(cylinder_end_mean_curvature(&p, 0.3).unwrap() > 0.0);
        let c = ConstantProfile {
            n: dim(5),
            value: equilibrium_v0(dim(5)),
        };
        assert_eq!(cylinder_end_mean_curvature(&c, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn cylinder_asymptotic_bounds_are_v0() {
        let n = dim(3);
        let b =
            asymptotic_bounds_check(&cylinder_factor(n), &[(1e-4, 1e-2), (1e-6, 1e-4)]).unwrap();
        let v0 = equilibrium_v0(n);
        assert!((b.c1 - v0).abs() < 1e-12 && (b.c2 - v0).abs() < 1e-12);
        assert!(!b.removable);
    }

    #[test]
    fn bubble_singularity_is_removable() {
        let u = bubble(dim(3), 1.0, vec![0.0; 3]).unwrap();
        let b = asymptotic_bounds_check(&u, &[(1e-3, 1e-2), (1e-5, 1e-3)]).unwrap();
        assert!(b.c1 < 1e-2);
        assert!(b.removable);
    }

    #[test]
    fn annulus_hitting_exclusion_is_rejected() {
        let u = cylinder_factor(dim(3));
        assert!(asymptotic_bounds_check(&u, &[(0.0, 1.0)]).is_err());
        let fenced = u.with_domain(Domain::unit_ball(3, SingularSet::origin(3, 0.1).unwrap()));
        assert!(matches!(
            asymptotic_bounds_check(&fenced, &[(0.01, 0.5)]),
            Err(Error::Domain(_))
        ));
    }
}
