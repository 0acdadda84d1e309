//! Reference configurations shared by the acceptance suite and the CLI.

use serde::{Deserialize, Serialize};

use crate::conformal::{bubble, cylinder_factor, yamabe_residual, ConformalFactor, DerivativeMode};
use crate::convexity::{
    bubble_instance, build_fowler_instance, descending_t0, exterior_problem, ConvexityInstance,
    ExteriorProblem,
};
use crate::dimension::Dimension;
use crate::error::{Error, Result};
use crate::fowler::equilibrium_v0;
use crate::geometry::{norm, scale, sub, unit_vector, Ball};
use crate::kelvin::{kelvin_transform, ExteriorRegionMap, Inversion};
use crate::sampling::{random_in_ball, rng};

/// An instance, a ball `B ⊂ B₁` and two points of `∂B`.
#[derive(Debug, Clone)]
pub struct StepFixture {
    pub instance: ConvexityInstance,
    pub ball: Ball,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Height of the symmetry plane in the normalized frame, when known.
    pub expected_plane: Option<f64>,
}

impl StepFixture {
    pub fn exterior(&self) -> Result<ExteriorProblem> {
        exterior_problem(&self.instance, &self.ball, &self.p)
    }
}

fn on_axis(n: usize, height: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    x[n - 1] = height;
    x
}

/// Bubble of scale 0.5 at the origin seen from a ball whose inversion image
/// is symmetric about a known plane. `h < 0` on part of `∂B₁` here, so the
/// hypotheses are overridden.
pub fn symmetric_bubble(n: Dimension) -> Result<StepFixture> {
    let d = n.get();
    let lambda = 0.5;
    let instance = bubble_instance(n, lambda, vec![0.0; d], true)?;
    let ball = Ball::new(on_axis(d, 0.29), 0.69)?;
    let p = on_axis(d, -0.4);
    let q = ball.boundary_point(&unit_vector(d, 0));
    let map = ExteriorRegionMap::new(Inversion::new(p.clone(), 1.0)?, &Ball::unit(d), &ball)?;
    // the image of a bubble centered at 0 is a bubble centered at p - p/(λ² + |p|²)
    let s = lambda * lambda + crate::geometry::dot(&p, &p);
    let center: Vec<f64> = p.iter().map(|pi| pi - pi / s).collect();
    Ok(StepFixture {
        instance,
        expected_plane: Some(map.plane.height(&center)),
        ball,
        p,
        q,
    })
}

/// Fowler instance on the descending branch with a small ball near the
/// singular point.
pub fn fowler_ball(n: Dimension, epsilon_frac: f64) -> Result<StepFixture> {
    if !(epsilon_frac > 0.0 && epsilon_frac < 1.0) {
        return Err(Error::Parameter(format!(
            "epsilon fraction must lie in (0, 1), got {epsilon_frac}"
        )));
    }
    let d = n.get();
    let eps = epsilon_frac * equilibrium_v0(n);
    let instance = build_fowler_instance(n, eps, descending_t0(n, eps, 0.5)?)?;
    let ball = Ball::new(on_axis(d, 0.45), 0.35)?;
    Ok(StepFixture {
        instance,
        p: on_axis(d, 0.1),
        q: ball.boundary_point(&unit_vector(d, 0)),
        ball,
        expected_plane: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KelvinKind {
    Bubble,
    Cylinder,
    Fowler,
}

/// A solution with an inversion to apply to it.
#[derive(Debug, Clone)]
pub struct KelvinFixture {
    pub kind: KelvinKind,
    pub factor: ConformalFactor,
    pub inversion: Inversion,
}

pub fn kelvin_fixture(kind: KelvinKind, n: Dimension) -> Result<KelvinFixture> {
    let d = n.get();
    let ones = vec![1.0; d];
    let off_axis = scale(&unit_vector(d, 0), 0.4);
    let (factor, inversion) = match kind {
        KelvinKind::Bubble => (
            bubble(n, 0.8, scale(&ones, 0.15))?,
            Inversion::new(scale(&ones, -0.3), 1.3)?,
        ),
        KelvinKind::Cylinder => (cylinder_factor(n), Inversion::new(off_axis, 1.0)?),
        KelvinKind::Fowler => {
            let eps = 0.5 * equilibrium_v0(n);
            let inst = build_fowler_instance(n, eps, descending_t0(n, eps, 0.5)?)?;
            (inst.factor().clone(), Inversion::new(off_axis, 1.0)?)
        }
    };
    Ok(KelvinFixture {
        kind,
        factor,
        inversion,
    })
}

/// Largest Yamabe residuals of the transformed factor on random points of
/// `B(0, 6)` kept away from the singular set and the inversion center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KelvinResiduals {
    pub kind: KelvinKind,
    pub n: usize,
    pub points: usize,
    pub max_analytic: f64,
    pub max_fd: f64,
}

impl KelvinFixture {
    pub fn residuals(&self, points: usize, seed: u64) -> Result<KelvinResiduals> {
        let v = kelvin_transform(&self.inversion, &self.factor)?;
        let vf = v.clone().with_mode(DerivativeMode::DEFAULT_FD);
        let n = v.dimension().get();
        let mut g = rng(seed);
        let (mut analytic, mut fd) = (0.0f64, 0.0f64);
        let mut taken = 0;
        while taken < points {
            let x = random_in_ball(n, 6.0, &mut g);
            let clear = v.domain().singular.distance(&x) > 0.5
                && norm(&sub(&x, &self.inversion.center)) > 0.2;
            if !clear || !v.domain().contains(&x) {
                continue;
            }
            analytic = analytic.max(yamabe_residual(&v, &x)?.abs());
            fd = fd.max(yamabe_residual(&vf, &x)?.abs());
            taken += 1;
        }
        Ok(KelvinResiduals {
            kind: self.kind,
            n,
            points,
            max_analytic: analytic,
            max_fd: fd,
        })
    }
}
