//! The end-to-end property suite. Each criterion is a function returning a
//! [`CriterionResult`]; the command-line `check-all` and the acceptance test
//! target both run them.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::conformal::{
    bubble, cyl_to_euclidean, cylinder_end_mean_curvature, cylinder_factor, euclidean_to_cyl,
    mean_curvature_sphere, yamabe_residual, ConformalFactor, ConstantProfile, CylinderProfile,
    DerivativeMode, Orientation, SechProfile, Spacing,
};
use crate::convexity::{
    build_fowler_instance, descending_t0, reflected_ball_step, scan_balls, ConvexityInstance,
    ExteriorProblem, StepOptions,
};
use crate::dimension::Dimension;
use crate::error::{Error, Result};
use crate::fixtures::{fowler_ball, kelvin_fixture, symmetric_bubble, KelvinFixture, KelvinKind};
use crate::fowler::{equilibrium_v0, integrate, period, FowlerParams, DEFAULT_STEP};
use crate::geometry::{norm, scale, Ball};
use crate::kelvin::{kelvin_transform, Inversion};
use crate::moving_planes::{
    auxiliary_g_laplacian_with_spacing, c_lambda, c_lambda_decay_exponent, default_mu,
    find_lambda0, fit_expansion, g_laplacian_ratio, reflect, w_field, GridSpec, HalfSpaceDomain,
};
use crate::sampling::{random_direction, random_in_ball, rng, sphere_directions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// Fewer balls and samples in the scan-based criteria.
    pub quick: bool,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            quick: false,
            seed: 42,
        }
    }
}

pub const TITLES: [&str; 12] = [
    "Hamiltonian conservation",
    "Equilibrium fixedness",
    "Period limit",
    "Exact-solution residuals",
    "Cylinder/Euclidean round trip",
    "Kelvin invariance",
    "Boundary mean-curvature coherence",
    "Convexity of interior balls",
    "Auxiliary function identity",
    "Moving planes",
    "Far-field expansion",
    "Determinism",
];

fn dim(n: usize) -> Dimension {
    Dimension::new(n).expect("suite dimensions are >= 3")
}

/// Runs criterion `id` (1-based) and times it. Errors count as failures.
pub fn run_criterion(id: u32, opts: &SuiteOptions) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => hamiltonian_conservation(),
        2 => equilibrium_fixedness(),
        3 => period_limit(),
        4 => exact_residuals(opts.seed),
        5 => round_trip(opts.seed),
        6 => kelvin_invariance(opts.seed),
        7 => boundary_coherence(),
        8 => convexity_scan(opts),
        9 => auxiliary_identity(opts.seed),
        10 => moving_planes(),
        11 => far_field(),
        12 => determinism(opts),
        _ => Err(Error::Parameter(format!("no criterion {id}"))),
    };
    let (passed, detail) = match outcome {
        Ok(pair) => pair,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        title: TITLES
            .get(id as usize - 1)
            .map_or_else(|| "unknown".into(), |t| t.to_string()),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all(opts: &SuiteOptions) -> Vec<CriterionResult> {
    (1..=TITLES.len() as u32)
        .map(|id| run_criterion(id, opts))
        .collect()
}

type Outcome = Result<(bool, String)>;

fn hamiltonian_conservation() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [3, 4, 5] {
        let n = dim(n);
        let eps = 0.5 * equilibrium_v0(n);
        let p = period(eps, n)?;
        let traj = integrate(
            &FowlerParams::new(n, eps, 0.0)?,
            0.0,
            10.0 * p,
            DEFAULT_STEP,
        )?;
        let h0 = traj.hamiltonian_at(0).abs();
        worst = worst.max(traj.max_energy_drift() / h0);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst < 1e-8 && secs < 5.0,
        format!("max relative drift {worst:.3e} (< 1e-8), {secs:.2} s (< 5 s)"),
    ))
}

fn equilibrium_fixedness() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [3, 4, 5, 6] {
        let n = dim(n);
        let v0 = equilibrium_v0(n);
        let traj = integrate(&FowlerParams::new(n, v0, 0.0)?, 0.0, 50.0, DEFAULT_STEP)?;
        for s in traj.samples() {
            worst = worst.max((s.v - v0).abs()).max(s.w.abs());
        }
    }
    Ok((
        worst < 1e-10,
        format!("max deviation {worst:.3e} (< 1e-10)"),
    ))
}

fn period_limit() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for n in [3, 4, 6] {
        let n = dim(n);
        let p = period(0.999 * equilibrium_v0(n), n)?;
        let target = 2.0 * std::f64::consts::PI / (n.as_f64() - 2.0).sqrt();
        let rel = (p - target).abs() / target;
        worst = worst.max(rel);
        parts.push(format!("n={n}: {p:.4} vs {target:.4}"));
    }
    Ok((
        worst < 0.01,
        format!(
            "{}; max relative gap {worst:.2e} (< 1e-2)",
            parts.join(", ")
        ),
    ))
}

/// `log2(e(h) / e(h/2))` from the RMS of the residual over `points`.
fn fd_order(factor: &ConformalFactor, points: &[Vec<f64>], h: f64) -> Result<f64> {
    let rms = |h: f64| -> Result<f64> {
        let f = factor
            .clone()
            .with_mode(DerivativeMode::FiniteDifference(Spacing::Absolute(h)));
        let mut sum = 0.0;
        for x in points {
            let r = yamabe_residual(&f, x)?;
            sum += r * r;
        }
        Ok((sum / points.len() as f64).sqrt())
    };
    Ok((rms(h)? / rms(0.5 * h)?).log2())
}

/// Points with `r_min ≤ |x| ≤ r_max`.
fn shell_points(n: usize, count: usize, r_min: f64, r_max: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut g = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = random_in_ball(n, r_max, &mut g);
        if norm(&x) >= r_min {
            out.push(x);
        }
    }
    out
}

fn exact_residuals(seed: u64) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut orders = Vec::new();
    for n in [3, 4, 5] {
        let nd = dim(n);
        let pts = shell_points(n, 100, 0.1, 2.0, seed + n as u64);
        let fixtures = [
            bubble(nd, 1.0, vec![0.0; n])?,
            bubble(nd, 0.6, scale(&vec![1.0; n], 0.1))?,
            cylinder_factor(nd),
        ];
        for f in &fixtures {
            for x in &pts {
                worst = worst.max(yamabe_residual(f, x)?.abs());
            }
            orders.push(fd_order(f, &pts, 0.02)?);
        }
    }
    let bad = orders.iter().filter(|o| (**o - 2.0).abs() > 0.3).count();
    let (lo, hi) = orders
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), o| {
            (a.min(*o), b.max(*o))
        });
    Ok((
        worst < 1e-10 && bad == 0,
        format!("max analytic residual {worst:.3e} (< 1e-10); FD orders in [{lo:.3}, {hi:.3}] (2 ± 0.3)"),
    ))
}

fn round_trip(seed: u64) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut g = rng(seed);
    for n in [3, 4, 5] {
        let nd = dim(n);
        let eps = 0.4 * equilibrium_v0(nd);
        let traj = Arc::new(integrate(
            &FowlerParams::new(nd, eps, 0.0)?,
            -1.0,
            8.0,
            DEFAULT_STEP,
        )?);
        let profiles: Vec<Arc<dyn CylinderProfile>> = vec![
            Arc::new(SechProfile { n: nd }),
            Arc::new(crate::conformal::FowlerProfile::new(traj, 0.0)),
            Arc::new(ConstantProfile {
                n: nd,
                value: equilibrium_v0(nd),
            }),
        ];
        let dir = random_direction(n, &mut g);
        for prof in profiles {
            // cylinder -> Euclidean -> cylinder
            let u = cyl_to_euclidean(prof.clone())?;
            let back = euclidean_to_cyl(&u, &dir)?;
            let (a, b) = prof.t_range();
            let (a, b) = (a.max(-1.0), b.min(8.0));
            for j in 0..100 {
                let t = a + (b - a) * (j as f64 + 0.5) / 100.0;
                let v = prof.value(t)?;
                worst = worst.max((back.value(t)? - v).abs() / v);
            }
        }
        // Euclidean -> cylinder -> Euclidean, and the sech identity
        let u = bubble(nd, 1.0, vec![0.0; n])?;
        let ray: Arc<dyn CylinderProfile> = Arc::new(euclidean_to_cyl(&u, &dir)?);
        let again = cyl_to_euclidean(ray)?;
        let sech = SechProfile { n: nd };
        for j in 0..100 {
            let t = -6.0 + 12.0 * (j as f64 + 0.5) / 100.0;
            let x = scale(&random_direction(n, &mut g), (-t).exp());
            let a = u.value(&x)?;
            worst = worst.max((again.value(&x)? - a).abs() / a);
            let ident = (-t).exp().powf(nd.half_weight()) * a;
            worst = worst.max((ident - sech.value(t)?).abs() / sech.value(t)?);
        }
    }
    Ok((
        worst < 1e-12,
        format!("max relative error {worst:.3e} (< 1e-12)"),
    ))
}

/// Solution fixtures with the inversions applied to them.
fn kelvin_fixtures() -> Result<Vec<KelvinFixture>> {
    let mut out = Vec::new();
    for n in [3, 4] {
        for kind in [KelvinKind::Bubble, KelvinKind::Cylinder, KelvinKind::Fowler] {
            out.push(kelvin_fixture(kind, dim(n))?);
        }
    }
    Ok(out)
}

fn kelvin_invariance(seed: u64) -> Outcome {
    let mut invariance: f64 = 0.0;
    for n in [3, 4, 5] {
        let nd = dim(n);
        let u = bubble(nd, 1.0, vec![0.0; n])?;
        let v = kelvin_transform(&Inversion::unit(n), &u)?;
        for x in shell_points(n, 100, 0.05, 5.0, seed + n as u64) {
            invariance = invariance.max((v.value(&x)? - u.value(&x)?).abs());
        }
    }
    let mut analytic: f64 = 0.0;
    let mut fd: f64 = 0.0;
    for (i, fx) in kelvin_fixtures()?.iter().enumerate() {
        let r = fx.residuals(100, seed ^ (0x60 + i as u64))?;
        analytic = analytic.max(r.max_analytic);
        fd = fd.max(r.max_fd);
    }
    Ok((
        invariance < 1e-12 && analytic < 1e-10 && fd < 1e-6,
        format!(
            "bubble self-map error {invariance:.3e} (< 1e-12); residual analytic {analytic:.3e} (< 1e-10), FD {fd:.3e} (< 1e-6)"
        ),
    ))
}

fn boundary_coherence() -> Outcome {
    let mut gap: f64 = 0.0;
    for n in [3, 4, 5] {
        let nd = dim(n);
        let v0 = equilibrium_v0(nd);
        for frac in [0.3, 0.7] {
            let eps = frac * v0;
            for descent in [0.0, 0.4, 0.9] {
                let inst = build_fowler_instance(nd, eps, descending_t0(nd, eps, descent)?)?;
                let profile = inst.profile.clone().expect("Fowler instance has a profile");
                let h_end = cylinder_end_mean_curvature(profile.as_ref(), 0.0)?;
                for d in sphere_directions(n, 50, 5) {
                    let h = mean_curvature_sphere(
                        &inst.metric,
                        &Ball::unit(n),
                        &d,
                        Orientation::Inward,
                    )?;
                    gap = gap.max((h - h_end).abs());
                }
            }
        }
    }
    let mut flat: f64 = 0.0;
    for n in [3, 4, 5, 6] {
        let nd = dim(n);
        let p = ConstantProfile {
            n: nd,
            value: equilibrium_v0(nd),
        };
        for t in [-2.0, 0.0, 3.5] {
            flat = flat.max(cylinder_end_mean_curvature(&p, t)?.abs());
        }
    }
    Ok((
        gap < 1e-8 && flat < 1e-10,
        format!("sphere vs cylinder-end gap {gap:.3e} (< 1e-8); cylinder h {flat:.3e} (< 1e-10)"),
    ))
}

fn scan_instances() -> Result<Vec<ConvexityInstance>> {
    let mut out = Vec::new();
    for n in [3, 4] {
        let nd = dim(n);
        for frac in [0.3, 0.7, 1.0] {
            let eps = frac * equilibrium_v0(nd);
            out.push(build_fowler_instance(
                nd,
                eps,
                descending_t0(nd, eps, 0.5)?,
            )?);
        }
    }
    Ok(out)
}

fn convexity_scan(opts: &SuiteOptions) -> Outcome {
    let (balls, points) = if opts.quick { (60, 40) } else { (200, 100) };
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .map_err(|e| Error::Parameter(e.to_string()))?;
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for inst in scan_instances()? {
        let report = pool.install(|| scan_balls(&inst, balls, points, opts.seed))?;
        worst = worst.min(report.global_min_h);
        parts.push(format!(
            "n={} ε/v0={:.1}: {:.3e}",
            inst.info.n,
            inst.info.epsilon.unwrap_or(0.0) / equilibrium_v0(inst.info.n),
            report.global_min_h
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst > 0.0 && secs < 120.0,
        format!(
            "{balls} balls x {points} points; min_h {} ; {secs:.1} s (< 120 s)",
            parts.join(", ")
        ),
    ))
}

/// `Σᵢ ∂ᵢ² |x|^{-μ}` term by term.
fn g_laplacian_by_coordinates(mu: f64, x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|c| c * c).sum();
    let r = r2.sqrt();
    x.iter()
        .map(|xi| -mu * r.powf(-mu - 2.0) + mu * (mu + 2.0) * xi * xi * r.powf(-mu - 4.0))
        .sum()
}

fn fowler_exterior(n: usize) -> Result<ExteriorProblem> {
    fowler_ball(dim(n), 0.5)?.exterior()
}

fn auxiliary_identity(seed: u64) -> Outcome {
    let mut closed_gap: f64 = 0.0;
    let mut orders = Vec::new();
    for n in [3, 4, 5] {
        let nd = dim(n);
        for x in shell_points(n, 20, 0.5, 3.0, seed + n as u64) {
            for mu in [
                0.25 * (n as f64 - 2.0),
                default_mu(nd),
                0.8 * (n as f64 - 2.0),
            ] {
                let h = 0.02 * norm(&x);
                let (closed, fd1) = auxiliary_g_laplacian_with_spacing(mu, &x, nd, h)?;
                let (_, fd2) = auxiliary_g_laplacian_with_spacing(mu, &x, nd, 0.5 * h)?;
                let direct = g_laplacian_by_coordinates(mu, &x);
                closed_gap = closed_gap.max((closed - direct).abs() / closed.abs());
                orders.push(((fd1 - closed).abs() / (fd2 - closed).abs()).log2());
            }
        }
    }
    let bad_orders = orders.iter().filter(|o| (**o - 2.0).abs() > 0.3).count();

    // c_λ + Δg/g < 0 far out on exterior fixtures
    let mut points = 0;
    let mut violations = 0;
    let mut exterior: Vec<(ConformalFactor, f64)> = Vec::new();
    for n in [3, 4] {
        let fx = fowler_exterior(n)?;
        let r0 = fx.exclusions.reach().max(1.0);
        exterior.push((fx.v, r0));
        let inv = Inversion::unit(n);
        exterior.push((
            kelvin_transform(&inv, &bubble(dim(n), 0.7, scale(&vec![1.0; n], 0.2))?)?,
            1.0,
        ));
    }
    for (v, r0) in &exterior {
        let n = v.dimension();
        let mu = default_mu(n);
        for lambda in [0.0, 0.5 * r0] {
            for (i, d) in sphere_directions(n.get(), 64, seed).iter().enumerate() {
                let r = r0 * (10.0 + 2.0 * i as f64);
                let x = scale(d, r);
                if x[n.get() - 1] > lambda {
                    continue;
                }
                let value = c_lambda(v.value(&x)?, v.value(&reflect(&x, lambda))?, n)?
                    + g_laplacian_ratio(mu, &x, n);
                points += 1;
                if value >= 0.0 {
                    violations += 1;
                }
            }
        }
    }
    Ok((
        closed_gap < 1e-12 && bad_orders == 0 && violations == 0 && points > 0,
        format!(
            "closed form vs coordinatewise {closed_gap:.3e} (< 1e-12); {} FD orders, {bad_orders} outside 2 ± 0.3; sign condition {violations}/{points} violations",
            orders.len()
        ),
    ))
}

fn moving_planes() -> Outcome {
    // symmetric branch: a concentrated bubble on B₁, Λ empty
    let n = 3;
    let nd = dim(n);
    let fixture = symmetric_bubble(nd)?;
    let plane = fixture.expected_plane.unwrap_or(f64::NAN);
    let step = reflected_ball_step(
        &fixture.instance,
        &fixture.ball,
        &fixture.p,
        &fixture.q,
        &StepOptions::default(),
    )?;
    let sym_gap = (step.search.lambda0 - plane).abs();
    let sym_ok = sym_gap <= 1e-3 && step.max_abs_w < 1e-6;

    // strict branch on a Fowler exterior problem
    let fx = fowler_exterior(n)?;
    let grid = GridSpec::enclosing(&fx.exclusions, 24)?;
    let search = find_lambda0(&fx.v, &fx.exclusions, &grid, 1e-4)?;
    let field = w_field(
        &fx.v,
        &HalfSpaceDomain::new(search.lambda0, fx.exclusions.clone(), grid),
    )?;
    let interior = field.min_w_beyond(2).unwrap_or(f64::NEG_INFINITY);
    let r0 = fx.exclusions.reach().max(1.0);
    let radii: Vec<f64> = (0..8).map(|i| 4.0 * r0 * 1.5f64.powi(i)).collect();
    let decay =
        c_lambda_decay_exponent(&fx.v, search.lambda0, &radii, &sphere_directions(n, 64, 3))?;
    Ok((
        sym_ok && interior > 0.0 && decay <= -3.8,
        format!(
            "symmetric: λ0 {:.6} vs plane {plane:.6} (gap {sym_gap:.1e}), max|w| {:.2e}; Fowler: λ0 {:.4}, min w beyond 2 cells {interior:.3e}; c_λ exponent {decay:.3}",
            step.search.lambda0, step.max_abs_w, search.lambda0
        ),
    ))
}

fn far_field() -> Outcome {
    let radii: Vec<f64> = (0..7).map(|i| 8.0 * 2f64.sqrt().powi(i)).collect();
    let mut slopes = Vec::new();
    let mut worst: f64 = 0.0;
    for n in [3, 4, 5] {
        let nd = dim(n);
        let one = ConformalFactor::constant(nd, 1.0)?;
        let exact = kelvin_transform(&Inversion::unit(n), &one)?;
        let fit = fit_expansion(&exact, &radii)?;
        worst = worst.max((fit.a - 1.0).abs()).max(norm(&fit.b));
        let fixtures = [
            kelvin_transform(&Inversion::new(scale(&vec![1.0; n], 0.1), 1.0)?, &one)?,
            kelvin_transform(
                &Inversion::unit(n),
                &bubble(nd, 0.7, scale(&vec![1.0; n], 0.2))?,
            )?,
        ];
        for v in &fixtures {
            let s = fit_expansion(v, &radii)?
                .remainder_slope
                .ok_or_else(|| Error::Conditioning("remainder at roundoff".into()))?;
            slopes.push(s + n as f64);
        }
    }
    let dev = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    Ok((
        dev <= 0.2 && worst < 1e-10,
        format!("remainder slope within {dev:.3} of -n (<= 0.2); exact input |a-1|, |b| <= {worst:.2e} (< 1e-10)"),
    ))
}

fn determinism(opts: &SuiteOptions) -> Outcome {
    let n = dim(3);
    let eps = 0.5 * equilibrium_v0(n);
    let inst = build_fowler_instance(n, eps, descending_t0(n, eps, 0.5)?)?;
    let (balls, points) = if opts.quick { (40, 20) } else { (200, 100) };
    let mut outputs = Vec::new();
    for threads in [1, 8, 1, 3] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Parameter(e.to_string()))?;
        let report = pool.install(|| scan_balls(&inst, balls, points, opts.seed))?;
        outputs.push(serde_json::to_string(&report).map_err(|e| Error::Io(e.to_string()))?);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    Ok((
        same,
        format!(
            "scan JSON ({} bytes) identical across 4 runs with 1/8/1/3 threads: {same}",
            outputs[0].len()
        ),
    ))
}
