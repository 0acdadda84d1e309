//! Instances of the convexity statement built from Fowler orbits (plus bubble
//! and flat controls), checks of their hypotheses, random sweeps of interior
//! balls, and one reflection step of the moving-plane argument.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{
    bubble, cyl_to_euclidean, cylinder_end_mean_curvature, mean_curvature_sphere, yamabe_residual,
    ConformalFactor, ConformalMetric, CylinderProfile, Domain, FowlerProfile, Orientation,
    SingularSet,
};
use crate::dimension::Dimension;
use crate::error::{Error, Result};
use crate::export::fmt_f64;
use crate::fowler::{equilibrium_v0, integrate, period, FowlerParams, DEFAULT_STEP};
use crate::geometry::{dist, norm, scale, sub, unit_vector, Ball, HalfSpace, RigidMotion};
use crate::kelvin::{
    invert_ball, invert_half_space, kelvin_transform, move_factor, BallImage, ExteriorRegionMap,
    Inversion,
};
use crate::moving_planes::{
    find_lambda0, w_field, Exclusions, GridSpec, HalfSpaceDomain, LambdaSearch,
};
use crate::sampling::{random_direction, random_in_ball, sphere_directions, substream};

/// Radius of the ball removed around each singular point by default.
pub const DEFAULT_EXCLUSION_RADIUS: f64 = 1e-2;

/// Pass thresholds used by [`verify_hypotheses`] and recorded in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Bound on `|Δu + c u^p| / (|Δu| + c u^p)` over interior samples.
    pub residual: f64,
    /// Boundary mean curvature counts as nonnegative above `-boundary_h`.
    pub boundary_h: f64,
    /// Lower bound on the ray-length growth rate per unit of `-log r`.
    pub completeness_rate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-9,
            boundary_h: 1e-10,
            completeness_rate: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Fowler,
    Bubble,
    Flat,
}

/// Parameters an instance was built from, as written to reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub kind: InstanceKind,
    pub n: Dimension,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl InstanceInfo {
    fn new(kind: InstanceKind, n: Dimension) -> Self {
        Self {
            kind,
            n,
            epsilon: None,
            t0: None,
            lambda: None,
            center: None,
            value: None,
        }
    }
}

/// A conformal metric on the closed unit ball minus the exclusion balls of a
/// finite singular set.
#[derive(Debug, Clone)]
pub struct ConvexityInstance {
    pub info: InstanceInfo,
    pub metric: ConformalMetric,
    pub singular_set: SingularSet,
    /// Minimum sampled mean curvature of `∂B₁` (inward normal).
    pub boundary_h_min: f64,
    /// Cylinder profile for Fowler instances, `s = 0` on `∂B₁`.
    pub profile: Option<Arc<FowlerProfile>>,
}

impl ConvexityInstance {
    pub fn dimension(&self) -> Dimension {
        self.metric.dimension()
    }

    pub fn factor(&self) -> &ConformalFactor {
        &self.metric.factor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceOptions {
    pub exclusion_radius: f64,
    pub step: f64,
    /// Build even when `∂B₁` has negative mean curvature.
    pub allow_violations: bool,
}

impl Default for InstanceOptions {
    fn default() -> Self {
        Self {
            exclusion_radius: DEFAULT_EXCLUSION_RADIUS,
            step: DEFAULT_STEP,
            allow_violations: false,
        }
    }
}

/// Phase on the descending half of the orbit with minimum at `t = 0`:
/// `t₀ = P/2 + frac·P/2`, `frac ∈ [0, 1]` (0 at the maximum, 1 at the minimum).
/// The cylinder has no phase; `0` is returned.
pub fn descending_t0(n: Dimension, epsilon: f64, frac: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&frac) {
        return Err(Error::Parameter(format!(
            "descent fraction must lie in [0, 1] (got {frac})"
        )));
    }
    if epsilon == equilibrium_v0(n) {
        return Ok(0.0);
    }
    let p = period(epsilon, n)?;
    Ok(0.5 * p * (1.0 + frac))
}

pub fn build_fowler_instance(n: Dimension, epsilon: f64, t0: f64) -> Result<ConvexityInstance> {
    build_fowler_instance_with(n, epsilon, t0, &InstanceOptions::default())
}

/// `u(x) = |x|^{(2-n)/2} v(t₀ - log|x|)` on `B₁ \ B(0, δ)` for the Fowler orbit
/// with minimum `epsilon` at `t = 0`, so `∂B₁` sits at `t = t₀`.
pub fn build_fowler_instance_with(
    n: Dimension,
    epsilon: f64,
    t0: f64,
    opts: &InstanceOptions,
) -> Result<ConvexityInstance> {
    let params = FowlerParams::new(n, epsilon, 0.0)?;
    if !t0.is_finite() {
        return Err(Error::Parameter("t0 must be finite".into()));
    }
    let delta = opts.exclusion_radius;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!(
            "exclusion radius must lie in (0, 1) (got {delta})"
        )));
    }
    let span = -delta.ln();
    let traj = integrate(&params, t0 - 1.0, t0 + span + 1.0, opts.step)?;
    let profile = Arc::new(FowlerProfile::new(Arc::new(traj), t0));
    let (v_t0, dv, _) = profile.derivatives(0.0)?;
    // the equilibrium drifts off w = 0 at roundoff level
    if dv > 1e-12 * v_t0 && !opts.allow_violations {
        return Err(Error::HypothesisViolation(format!(
            "v'(t0) = {dv:e} > 0: t0 is on an ascending branch and ∂B₁ has negative mean curvature"
        )));
    }
    let singular = SingularSet::origin(n.get(), delta)?;
    let factor = cyl_to_euclidean(profile.clone())?
        .with_domain(Domain::unit_ball(n.get(), singular.clone()));
    let h = cylinder_end_mean_curvature(profile.as_ref(), 0.0)?;
    let mut info = InstanceInfo::new(InstanceKind::Fowler, n);
    info.epsilon = Some(epsilon);
    info.t0 = Some(t0);
    Ok(ConvexityInstance {
        info,
        metric: ConformalMetric::new(factor),
        singular_set: singular,
        boundary_h_min: h,
        profile: Some(profile),
    })
}

/// Number of `∂B₁` points used to estimate the boundary mean curvature of
/// instances without a closed form.
const BOUNDARY_PROBES: usize = 200;

fn sampled_boundary_h_min(metric: &ConformalMetric, seed: u64) -> Result<f64> {
    let n = metric.dimension().get();
    let unit = Ball::unit(n);
    let mut min = f64::INFINITY;
    for d in sphere_directions(n, BOUNDARY_PROBES, seed) {
        min = min.min(mean_curvature_sphere(
            metric,
            &unit,
            &d,
            Orientation::Inward,
        )?);
    }
    Ok(min)
}

/// The bubble `(2λ/(λ² + |x - c|²))^{(n-2)/2}` restricted to `B₁` (no singular
/// set). `∂B₁` is mean convex iff the bubble is wide enough; otherwise the
/// build fails unless `allow_violations` is set.
pub fn bubble_instance(
    n: Dimension,
    lambda: f64,
    center: Vec<f64>,
    allow_violations: bool,
) -> Result<ConvexityInstance> {
    let factor = bubble(n, lambda, center.clone())?
        .with_domain(Domain::unit_ball(n.get(), SingularSet::empty()));
    let metric = ConformalMetric::new(factor);
    let h = sampled_boundary_h_min(&metric, 0xB0B)?;
    if h < -Tolerances::default().boundary_h && !allow_violations {
        return Err(Error::HypothesisViolation(format!(
            "∂B₁ has mean curvature {h:e} < 0"
        )));
    }
    let mut info = InstanceInfo::new(InstanceKind::Bubble, n);
    info.lambda = Some(lambda);
    info.center = Some(center);
    Ok(ConvexityInstance {
        info,
        metric,
        singular_set: SingularSet::empty(),
        boundary_h_min: h,
        profile: None,
    })
}

/// `u ≡ value` on `B₁`: scalar curvature zero, so the curvature hypothesis fails.
pub fn flat_instance(n: Dimension, value: f64) -> Result<ConvexityInstance> {
    let factor = ConformalFactor::constant(n, value)?
        .with_domain(Domain::unit_ball(n.get(), SingularSet::empty()));
    let h = value.powf(-2.0 / (n.as_f64() - 2.0));
    let mut info = InstanceInfo::new(InstanceKind::Flat, n);
    info.value = Some(value);
    Ok(ConvexityInstance {
        info,
        metric: ConformalMetric::new(factor),
        singular_set: SingularSet::empty(),
        boundary_h_min: h,
        profile: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub interior_points: usize,
    pub boundary_points: usize,
    pub rays: usize,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            interior_points: 200,
            boundary_points: 200,
            rays: 8,
            seed: 7,
        }
    }
}

/// Length `∫ u^{2/(n-2)} dr` of rays from a singular point, from the
/// exclusion radius out to the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayLength {
    pub point: Vec<f64>,
    pub inner: f64,
    pub outer: f64,
    /// Smallest length over the sampled rays.
    pub length: f64,
    /// Smallest length gained per unit of `log r` over any single e-fold.
    pub min_rate: f64,
    /// Average growth `length / log(outer/inner)`.
    pub mean_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Completeness {
    NoSingularPoints,
    Rays { rays: Vec<RayLength>, passed: bool },
}

impl Completeness {
    pub fn passed(&self) -> bool {
        match self {
            Completeness::NoSingularPoints => true,
            Completeness::Rays { passed, .. } => *passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub max_residual: f64,
    pub max_relative_residual: f64,
    pub residual_ok: bool,
    pub min_boundary_h: f64,
    pub boundary_ok: bool,
    pub completeness: Completeness,
    pub tolerances: Tolerances,
    pub passed: bool,
}

/// Panels per e-fold of the Simpson rule for ray lengths.
const PANELS_PER_FOLD: usize = 32;

fn ray_length(
    factor: &ConformalFactor,
    center: &[f64],
    dir: &[f64],
    inner: f64,
    outer: f64,
) -> Result<(f64, Vec<f64>)> {
    let n = factor.dimension();
    let exponent = 2.0 / (n.as_f64() - 2.0);
    let (a, b) = (inner.ln(), outer.ln());
    let folds = ((b - a).ceil() as usize).max(1);
    let fold = (b - a) / folds as f64;
    let m = PANELS_PER_FOLD;
    let mut pieces = Vec::with_capacity(folds);
    // dr = r ds with s = log r
    let f = |s: f64| -> Result<f64> {
        let r = s.exp();
        let x: Vec<f64> = center.iter().zip(dir).map(|(c, d)| c + r * d).collect();
        Ok(factor.value(&x)?.powf(exponent) * r)
    };
    for j in 0..folds {
        let lo = a + j as f64 * fold;
        let h = fold / (2 * m) as f64;
        let mut sum = f(lo)? + f(lo + fold)?;
        for i in 1..2 * m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(lo + i as f64 * h)?;
        }
        pieces.push(sum * h / 3.0 / fold);
    }
    let total = pieces.iter().sum::<f64>() * fold;
    Ok((total, pieces))
}

/// Residual, boundary mean curvature and ray-length completeness checks.
pub fn verify_hypotheses(inst: &ConvexityInstance, spec: &SampleSpec) -> Result<HypothesisReport> {
    verify_hypotheses_with(inst, spec, &Tolerances::default())
}

pub fn verify_hypotheses_with(
    inst: &ConvexityInstance,
    spec: &SampleSpec,
    tol: &Tolerances,
) -> Result<HypothesisReport> {
    let factor = inst.factor();
    let n = inst.dimension();
    let delta = inst.singular_set.exclusion_radius;

    let mut rng = substream(spec.seed, 0);
    let mut max_residual: f64 = 0.0;
    let mut max_relative: f64 = 0.0;
    let mut taken = 0;
    while taken < spec.interior_points {
        let x = random_in_ball(n.get(), 1.0, &mut rng);
        if !inst.singular_set.is_empty() && inst.singular_set.distance(&x) < delta * 1.001 {
            continue;
        }
        let res = yamabe_residual(factor, &x)?;
        let jet = factor.jet(&x)?;
        let scale_ =
            jet.laplacian.abs() + n.yamabe_coefficient() * jet.value.powf(n.critical_exponent());
        max_residual = max_residual.max(res.abs());
        max_relative = max_relative.max(res.abs() / scale_);
        taken += 1;
    }

    let unit = Ball::unit(n.get());
    let mut min_h = f64::INFINITY;
    for d in sphere_directions(n.get(), spec.boundary_points, spec.seed ^ 0xB) {
        min_h = min_h.min(mean_curvature_sphere(
            &inst.metric,
            &unit,
            &d,
            Orientation::Inward,
        )?);
    }

    let completeness = if inst.singular_set.is_empty() {
        Completeness::NoSingularPoints
    } else {
        let dirs = sphere_directions(n.get(), spec.rays, spec.seed ^ 0xC);
        let mut rays = Vec::new();
        let mut passed = true;
        for s in &inst.singular_set.points {
            let outer = 1.0 - norm(s);
            if !(outer > delta) {
                return Err(Error::Geometry(
                    "singular exclusion reaches the unit sphere".into(),
                ));
            }
            let mut length = f64::INFINITY;
            let mut min_rate = f64::INFINITY;
            for d in &dirs {
                let (total, pieces) = ray_length(factor, s, d, delta, outer)?;
                length = length.min(total);
                min_rate = pieces.iter().copied().fold(min_rate, f64::min);
            }
            let mean_rate = length / (outer / delta).ln();
            passed &= min_rate > tol.completeness_rate;
            rays.push(RayLength {
                point: s.clone(),
                inner: delta,
                outer,
                length,
                min_rate,
                mean_rate,
            });
        }
        Completeness::Rays { rays, passed }
    };

    let residual_ok = max_relative < tol.residual;
    let boundary_ok = min_h >= -tol.boundary_h;
    let passed = residual_ok && boundary_ok && completeness.passed();
    Ok(HypothesisReport {
        max_residual,
        max_relative_residual: max_relative,
        residual_ok,
        min_boundary_h: min_h,
        boundary_ok,
        completeness,
        tolerances: *tol,
        passed,
    })
}

/// Minimum mean curvature found on one scanned sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallScan {
    pub center: Vec<f64>,
    pub radius: f64,
    pub min_h: f64,
    pub argmin: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTolerances {
    pub exclusion_radius: f64,
    /// Gap kept between scanned balls and `∂B₁` or the exclusions.
    pub clearance: f64,
    pub on_sphere: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub instance: InstanceInfo,
    pub balls: Vec<BallScan>,
    pub global_min_h: f64,
    pub seed: u64,
    pub boundary_samples: usize,
    pub tolerances: ScanTolerances,
}

impl ScanReport {
    /// One row per ball: `index,c1..cn,radius,min_h,a1..an`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.instance.n.get();
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["index".to_string()];
        header.extend((1..=n).map(|i| format!("c{i}")));
        header.push("radius".into());
        header.push("min_h".into());
        header.extend((1..=n).map(|i| format!("a{i}")));
        wtr.write_record(&header)?;
        for (i, b) in self.balls.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(b.center.iter().map(|c| fmt_f64(*c)));
            row.push(fmt_f64(b.radius));
            row.push(fmt_f64(b.min_h));
            row.extend(b.argmin.iter().map(|c| fmt_f64(*c)));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Relative gap kept between scanned balls and the boundary of the admissible set.
const CLEARANCE: f64 = 1e-9;
const SAMPLING_ATTEMPTS: usize = 1000;

/// Largest radius of an admissible ball about `c`.
fn max_radius(c: &[f64], singular: &SingularSet) -> f64 {
    let mut r = 1.0 - norm(c);
    if !singular.is_empty() {
        r = r.min(singular.distance(c) - singular.exclusion_radius);
    }
    r * (1.0 - CLEARANCE)
}

fn admissible(b: &Ball, singular: &SingularSet) -> bool {
    b.radius > 0.0 && b.radius <= max_radius(&b.center, singular)
}

fn uniform_ball<R: Rng>(n: usize, singular: &SingularSet, rng: &mut R) -> Result<Ball> {
    for _ in 0..SAMPLING_ATTEMPTS {
        let c = random_in_ball(n, 1.0, rng);
        let cap = max_radius(&c, singular);
        if cap > 1e-6 {
            let radius = cap * rng.random_range(0.05..1.0);
            return Ball::new(c, radius);
        }
    }
    Err(Error::Geometry(
        "no admissible ball fits in the unit ball".into(),
    ))
}

/// Ball whose boundary passes within a log-uniform gap of the exclusion sphere.
fn near_singular_ball<R: Rng>(n: usize, singular: &SingularSet, rng: &mut R) -> Result<Ball> {
    let delta = singular.exclusion_radius;
    for _ in 0..SAMPLING_ATTEMPTS {
        let s = &singular.points[rng.random_range(0..singular.points.len())];
        let d = random_direction(n, rng);
        let radius = rng.random_range(0.02..0.45);
        let gap = delta * 10f64.powf(rng.random_range(-3.0..0.0));
        let c: Vec<f64> = s
            .iter()
            .zip(&d)
            .map(|(si, di)| si + (delta + gap + radius) * di)
            .collect();
        let b = Ball::new(c, radius)?;
        if admissible(&b, singular) {
            return Ok(b);
        }
    }
    uniform_ball(n, singular, rng)
}

/// Ball whose boundary passes within a log-uniform gap of `∂B₁`.
fn near_boundary_ball<R: Rng>(n: usize, singular: &SingularSet, rng: &mut R) -> Result<Ball> {
    for _ in 0..SAMPLING_ATTEMPTS {
        let d = random_direction(n, rng);
        let radius = rng.random_range(0.02..0.45);
        let gap = 10f64.powf(rng.random_range(-6.0..-1.0));
        let b = Ball::new(scale(&d, 1.0 - gap - radius), radius)?;
        if admissible(&b, singular) {
            return Ok(b);
        }
    }
    uniform_ball(n, singular, rng)
}

fn scan_one(
    inst: &ConvexityInstance,
    index: usize,
    boundary_samples: usize,
    seed: u64,
) -> Result<BallScan> {
    let n = inst.dimension().get();
    let singular = &inst.singular_set;
    let mut rng = substream(seed, index as u64);
    let ball = match index % 4 {
        2 if !singular.is_empty() => near_singular_ball(n, singular, &mut rng)?,
        3 => near_boundary_ball(n, singular, &mut rng)?,
        _ => uniform_ball(n, singular, &mut rng)?,
    };
    let dirs = sphere_directions(n, boundary_samples, rng.random());
    let mut best = (f64::INFINITY, Vec::new());
    for d in &dirs {
        let x = ball.boundary_point(d);
        let h = mean_curvature_sphere(&inst.metric, &ball, &x, Orientation::Inward)?;
        if h < best.0 {
            best = (h, x);
        }
    }
    Ok(BallScan {
        center: ball.center,
        radius: ball.radius,
        min_h: best.0,
        argmin: best.1,
    })
}

/// Mean curvature (inward normal) of `num_balls` spheres inside `B₁` minus the
/// exclusions. Half the balls are uniform, a quarter hug the exclusion
/// spheres and a quarter hug `∂B₁`. Ball `i` draws from its own random stream,
/// so the report does not depend on the thread count.
pub fn scan_balls(
    inst: &ConvexityInstance,
    num_balls: usize,
    boundary_samples: usize,
    rng_seed: u64,
) -> Result<ScanReport> {
    if num_balls == 0 || boundary_samples == 0 {
        return Err(Error::Parameter(
            "need at least one ball and one boundary sample".into(),
        ));
    }
    let balls = (0..num_balls)
        .into_par_iter()
        .map(|i| scan_one(inst, i, boundary_samples, rng_seed))
        .collect::<Result<Vec<_>>>()?;
    let global_min_h = balls.iter().map(|b| b.min_h).fold(f64::INFINITY, f64::min);
    Ok(ScanReport {
        instance: inst.info.clone(),
        balls,
        global_min_h,
        seed: rng_seed,
        boundary_samples,
        tolerances: ScanTolerances {
            exclusion_radius: inst.singular_set.exclusion_radius,
            clearance: CLEARANCE,
            on_sphere: crate::conformal::ON_SPHERE_TOLERANCE,
        },
    })
}

/// The factor of an instance after inverting about `p ∈ ∂B` and moving the
/// image of `B` onto `{xⁿ ≥ 0}`.
#[derive(Debug, Clone)]
pub struct ExteriorProblem {
    pub v: ConformalFactor,
    pub exclusions: Exclusions,
    /// Normalizing motion applied after the inversion.
    pub motion: RigidMotion,
    pub inversion: Inversion,
}

pub fn exterior_problem(
    inst: &ConvexityInstance,
    ball: &Ball,
    p: &[f64],
) -> Result<ExteriorProblem> {
    let inversion = Inversion::new(p.to_vec(), 1.0)?;
    let map = ExteriorRegionMap::new(inversion.clone(), &Ball::unit(inst.dimension().get()), ball)?;
    let v = kelvin_transform(&inversion, inst.factor())?;
    let motion = RigidMotion::normalizing(&map.plane);
    let v = move_factor(&motion, &v);
    let exclusions = Exclusions::from_domain(v.domain());
    Ok(ExteriorProblem {
        v,
        exclusions,
        motion,
        inversion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `w_{λ₀}` vanishes on the grid: the configuration is symmetric about `Π_{λ₀}`.
    Symmetric,
    /// `w_{λ₀} > 0` away from `Π_{λ₀}`.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOptions {
    pub cells: usize,
    pub tolerance: f64,
    /// `max |w_{λ₀}|` below this is read as identically zero.
    pub symmetric_threshold: f64,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            cells: 24,
            tolerance: 1e-7,
            symmetric_threshold: 1e-6,
        }
    }
}

/// One moving-plane step for the interior ball `B` and the inversion center
/// `p ∈ ∂B`, reported in original coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectedStep {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Image of `∂B₁` in the normalized frame.
    pub sigma: Ball,
    pub search: LambdaSearch,
    pub branch: Branch,
    pub max_abs_w: f64,
    /// Minimum of `w_{λ₀}` two or more grid rows below `Π_{λ₀}`.
    pub min_w_interior: Option<f64>,
    pub skipped_fraction: f64,
    /// Preimage of the ball bounded by the reflected `Σ_{λ₀}`.
    pub k: Ball,
    /// Preimage of `{xⁿ ≥ λ₀}`.
    pub p_ball: Ball,
    /// Mean curvature of `∂B` at `q` (inward normal).
    pub h_q: f64,
    /// `∂v/∂xⁿ` at the image of `q` in the normalized frame.
    pub dv_dn_q: f64,
    /// `∂v/∂xⁿ + ((n-2)/2) h(q) v^{n/(n-2)}`, zero up to derivative error.
    pub normal_identity_residual: f64,
}

pub fn reflected_ball_step(
    inst: &ConvexityInstance,
    ball: &Ball,
    p: &[f64],
    q: &[f64],
    opts: &StepOptions,
) -> Result<ReflectedStep> {
    let n = inst.dimension();
    if !admissible(ball, &inst.singular_set) {
        return Err(Error::Geometry(
            "ball must lie inside B₁ away from the exclusions".into(),
        ));
    }
    let on =
        |x: &[f64]| (dist(x, &ball.center) - ball.radius).abs() <= 1e-12 * ball.radius.max(1.0);
    if !on(p) || !on(q) {
        return Err(Error::Geometry("p and q must lie on ∂B".into()));
    }
    if dist(p, q) < 1e-9 * ball.radius {
        return Err(Error::Geometry("p and q must differ".into()));
    }
    let problem = exterior_problem(inst, ball, p)?;
    let ExteriorProblem {
        v,
        exclusions,
        motion,
        inversion: inv,
    } = problem;
    let sigma = exclusions
        .ball
        .clone()
        .ok_or_else(|| Error::Geometry("image domain lost its excluded ball".into()))?;
    let grid = GridSpec::enclosing(&exclusions, opts.cells)?;
    let search = find_lambda0(&v, &exclusions, &grid, opts.tolerance)?;
    let lambda0 = search.lambda0;
    let field = w_field(&v, &HalfSpaceDomain::new(lambda0, exclusions.clone(), grid))?;
    let max_abs_w = field.max_abs();
    let branch = if max_abs_w < opts.symmetric_threshold && lambda0 > 0.0 {
        Branch::Symmetric
    } else {
        Branch::Strict
    };

    let back = motion.inverse();
    let mut reflected = sigma.clone();
    let last = n.get() - 1;
    reflected.center[last] = 2.0 * lambda0 - reflected.center[last];
    let k = match invert_ball(&inv, &back.apply_ball(&reflected)) {
        BallImage::Ball(b) => b,
        other => {
            return Err(Error::Geometry(format!(
                "reflected Σ does not pull back to a ball: {other:?}"
            )))
        }
    };
    let upper = HalfSpace {
        normal: unit_vector(n.get(), last),
        offset: lambda0,
    };
    let p_ball = match invert_half_space(&inv, &back.apply_half_space(&upper)) {
        BallImage::Ball(b) => b,
        other => {
            return Err(Error::Geometry(format!(
                "Π⁺ does not pull back to a ball: {other:?}"
            )))
        }
    };

    let h_q = mean_curvature_sphere(&inst.metric, ball, q, Orientation::Inward)?;
    let yq = motion.apply(&inv.apply(q)?);
    let jet = v.jet(&yq)?;
    let dv_dn_q = jet.gradient[last];
    let normal_identity_residual =
        dv_dn_q + n.half_weight() * h_q * jet.value.powf(n.boundary_exponent());

    Ok(ReflectedStep {
        p: p.to_vec(),
        q: q.to_vec(),
        sigma,
        branch,
        max_abs_w,
        min_w_interior: field.min_w_beyond(2),
        skipped_fraction: field.skipped_fraction(),
        search,
        k,
        p_ball,
        h_q,
        dv_dn_q,
        normal_identity_residual,
    })
}

/// `closure(inner) ⊂ outer` up to a relative slack.
pub fn ball_inside(inner: &Ball, outer: &Ball) -> bool {
    dist(&inner.center, &outer.center) + inner.radius <= outer.radius * (1.0 + 1e-12)
}

/// Direction of `x - c` scaled onto `∂B`.
pub fn point_on(ball: &Ball, toward: &[f64]) -> Result<Vec<f64>> {
    let d = crate::geometry::normalized(&sub(toward, &ball.center))?;
    Ok(ball.boundary_point(&d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn cylinder_instance_has_flat_boundary() {
        let n = dim(3);
        let inst = build_fowler_instance(n, equilibrium_v0(n), 0.3).unwrap();
        assert!(inst.boundary_h_min.abs() < 1e-12);
    }

    #[test]
    fn descending_phase_gives_positive_boundary_curvature() {
        let n = dim(4);
        let eps = 0.5 * equilibrium_v0(n);
        let t_max = descending_t0(n, eps, 0.0).unwrap();
        let at_max = build_fowler_instance(n, eps, t_max).unwrap();
        assert!(at_max.boundary_h_min.abs() < 1e-6);
        let mid = descending_t0(n, eps, 0.5).unwrap();
        let inst = build_fowler_instance(n, eps, mid).unwrap();
        assert!(inst.boundary_h_min > 0.0);
    }

    #[test]
    fn ascending_phase_is_rejected() {
        let n = dim(3);
        let eps = 0.5 * equilibrium_v0(n);
        let p = period(eps, n).unwrap();
        assert!(matches!(
            build_fowler_instance(n, eps, 0.25 * p),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn flat_balls_have_curvature_one_over_radius() {
        let inst = flat_instance(dim(3), 1.0).unwrap();
        let r = scan_balls(&inst, 12, 20, 3).unwrap();
        for b in &r.balls {
            assert!((b.min_h - 1.0 / b.radius).abs() < 1e-9 / b.radius);
        }
    }

    #[test]
    fn scanned_balls_are_admissible() {
        let n = dim(3);
        let inst = build_fowler_instance(n, equilibrium_v0(n), 0.0).unwrap();
        let r = scan_balls(&inst, 40, 10, 11).unwrap();
        for b in &r.balls {
            let ball = Ball::new(b.center.clone(), b.radius).unwrap();
            assert!(ball_inside(&ball, &Ball::unit(3)));
            assert!(norm(&b.center) - b.radius >= inst.singular_set.exclusion_radius);
        }
    }
}
