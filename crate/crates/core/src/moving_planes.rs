//! Moving planes in the normalized frame: reflections across `Π_λ = {x^n = λ}`,
//! the differences `w_λ = v - v∘R_λ` on grids of `{x^n ≤ λ}`, the critical
//! height `λ₀`, far-field fits and the auxiliary function `|x|^{-μ}`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{ConformalFactor, Domain, Region, SingularSet};
use crate::dimension::Dimension;
use crate::error::{Error, Result};
use crate::export::fmt_f64;
use crate::geometry::{dist, dot, norm, scale, Ball};
use crate::sampling::{balanced_directions, probe_directions};

/// Grid values of `w_λ` above `-NEGATIVITY_TOLERANCE` count as nonnegative.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-10;

/// Default absolute tolerance of the `λ₀` bisection.
pub const LAMBDA_TOLERANCE: f64 = 1e-4;

/// Share of skipped grid points above which a field is flagged unreliable.
pub const SKIPPED_FRACTION_LIMIT: f64 = 0.01;

/// Below this relative gap `c_λ` switches to its diagonal limit.
const C_LAMBDA_LIMIT_GAP: f64 = 1e-9;

/// `(x¹, …, x^{n-1}, 2λ - xⁿ)`
pub fn reflect(x: &[f64], lambda: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    if let Some(last) = y.last_mut() {
        *last = 2.0 * lambda - *last;
    }
    y
}

/// `(n(n-2)/4) (v^p - v_λ^p) / (v - v_λ)`, `p = (n+2)/(n-2)`.
pub fn c_lambda(v_val: f64, v_lambda_val: f64, n: Dimension) -> Result<f64> {
    if !(v_val > 0.0) || !(v_lambda_val > 0.0) {
        return Err(Error::Domain(format!(
            "c_lambda needs positive values (got {v_val}, {v_lambda_val})"
        )));
    }
    let p = n.critical_exponent();
    let gap = v_val - v_lambda_val;
    if gap.abs() < C_LAMBDA_LIMIT_GAP * v_val {
        let nf = n.as_f64();
        return Ok(nf * (nf + 2.0) / 4.0 * v_val.powf(4.0 / (nf - 2.0)));
    }
    Ok(n.yamabe_coefficient() * (v_val.powf(p) - v_lambda_val.powf(p)) / gap)
}

/// Excluded ball `B(a, r)` and singular points of the exterior problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusions {
    pub ball: Option<Ball>,
    pub singular: SingularSet,
}

impl Exclusions {
    pub fn none() -> Self {
        Self {
            ball: None,
            singular: SingularSet::empty(),
        }
    }

    /// Exclusions implied by a factor's domain (the ball of an exterior region).
    pub fn from_domain(domain: &Domain) -> Self {
        let ball = match &domain.region {
            Region::Exterior(b) => Some(b.clone()),
            _ => None,
        };
        Self {
            ball,
            singular: domain.singular.clone(),
        }
    }

    pub fn excludes(&self, x: &[f64]) -> bool {
        if let Some(b) = &self.ball {
            if dist(x, &b.center) < b.radius * (1.0 - 1e-12) {
                return true;
            }
        }
        self.singular.excludes(x)
    }

    /// Radius of the smallest origin-centered ball containing all exclusions.
    pub fn reach(&self) -> f64 {
        let ball = self
            .ball
            .as_ref()
            .map_or(0.0, |b| norm(&b.center) + b.radius);
        let singular = if self.singular.is_empty() {
            0.0
        } else {
            self.singular
                .points
                .iter()
                .map(|p| norm(p) + self.singular.exclusion_radius)
                .fold(0.0, f64::max)
        };
        ball.max(singular)
    }

    /// Highest `xⁿ` reached by the exclusions.
    pub fn top(&self) -> f64 {
        let mut top = f64::NEG_INFINITY;
        if let Some(b) = &self.ball {
            top = top.max(b.center[b.dim() - 1] + b.radius);
        }
        if !self.singular.is_empty() {
            for p in &self.singular.points {
                top = top.max(p[p.len() - 1] + self.singular.exclusion_radius);
            }
        }
        top
    }
}

/// Box `[-L, L]^{n-1} x [-L, λ]` sampled with spacing `L / cells`; the last
/// axis is anchored at `λ` so the top row lies on `Π_λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub cells: usize,
}

impl GridSpec {
    pub const DEFAULT_CELLS: usize = 64;

    pub fn new(half_width: f64, cells: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Parameter(format!(
                "grid half-width must be positive (got {half_width})"
            )));
        }
        if cells < 2 {
            return Err(Error::Parameter("grid needs at least 2 cells".into()));
        }
        Ok(Self { half_width, cells })
    }

    /// Box a fixed multiple larger than the region holding the exclusions.
    pub fn enclosing(exclusions: &Exclusions, cells: usize) -> Result<Self> {
        Self::new(4.0 * exclusions.reach().max(1.0), cells)
    }

    pub fn spacing(&self) -> f64 {
        self.half_width / self.cells as f64
    }

    fn lateral_count(&self) -> usize {
        2 * self.cells + 1
    }

    fn rows(&self, lambda: f64) -> usize {
        ((lambda + self.half_width) / self.spacing() + 1e-9)
            .floor()
            .max(0.0) as usize
    }

    /// Grid point of row `j` and lateral multi-index `flat`.
    fn point(&self, n: usize, lambda: f64, j: usize, mut flat: usize) -> Vec<f64> {
        let s = self.spacing();
        let m = self.lateral_count();
        let mut x = vec![0.0; n];
        for c in (0..n - 1).rev() {
            x[c] = -self.half_width + (flat % m) as f64 * s;
            flat /= m;
        }
        x[n - 1] = lambda - j as f64 * s;
        x
    }
}

/// `Ω_λ = {x ∉ exclusions : xⁿ ≤ λ}` with its sampling grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceDomain {
    pub lambda: f64,
    pub exclusions: Exclusions,
    pub grid: GridSpec,
}

impl HalfSpaceDomain {
    pub fn new(lambda: f64, exclusions: Exclusions, grid: GridSpec) -> Self {
        Self {
            lambda,
            exclusions,
            grid,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x[x.len() - 1] <= self.lambda + 1e-12 * (1.0 + self.lambda.abs())
            && !self.exclusions.excludes(x)
    }
}

/// One grid point's contribution.
enum Probe {
    Outside,
    Skipped,
    Value { v: f64, v_reflected: f64 },
}

fn probe(v: &ConformalFactor, dom: &HalfSpaceDomain, x: &[f64]) -> Probe {
    if !dom.contains(x) {
        return Probe::Outside;
    }
    let Ok(vx) = v.value(x) else {
        return Probe::Outside;
    };
    let y = reflect(x, dom.lambda);
    if dom.exclusions.excludes(&y) {
        return Probe::Skipped;
    }
    match v.value(&y) {
        Ok(vy) => Probe::Value {
            v: vx,
            v_reflected: vy,
        },
        Err(_) => Probe::Skipped,
    }
}

/// `w_λ` sampled on the grid of `Ω_λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionField {
    pub n: Dimension,
    pub lambda: f64,
    pub spacing: f64,
    pub points: Vec<Vec<f64>>,
    pub v: Vec<f64>,
    pub v_reflected: Vec<f64>,
    pub w: Vec<f64>,
    pub min_w: f64,
    pub argmin: Vec<f64>,
    pub skipped: usize,
}

impl ReflectionField {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn skipped_fraction(&self) -> f64 {
        self.skipped as f64 / (self.skipped + self.len()).max(1) as f64
    }

    pub fn unreliable(&self) -> bool {
        self.skipped_fraction() > SKIPPED_FRACTION_LIMIT
    }

    fn depth(&self, x: &[f64]) -> f64 {
        (self.lambda - x[x.len() - 1]) / self.spacing
    }

    /// Largest `|w_λ|` over grid points on `Π_λ`.
    pub fn plane_max_abs(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.w)
            .filter(|(x, _)| self.depth(x) < 0.5)
            .map(|(_, w)| w.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.w.iter().map(|w| w.abs()).fold(0.0, f64::max)
    }

    /// Minimum of `w_λ` over points at least `cells` grid rows below `Π_λ`.
    pub fn min_w_beyond(&self, cells: usize) -> Option<f64> {
        self.points
            .iter()
            .zip(&self.w)
            .filter(|(x, _)| self.depth(x) > cells as f64 - 0.5)
            .map(|(_, w)| *w)
            .reduce(f64::min)
    }

    pub fn report(&self) -> LambdaScanReport {
        LambdaScanReport {
            lambda: self.lambda,
            min_w: self.min_w,
            argmin: self.argmin.clone(),
            skipped: self.skipped,
        }
    }

    /// CSV with columns `x1..xn,w`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let n = self.n.get();
        let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        header.push("w".into());
        wtr.write_record(&header)?;
        for (x, w) in self.points.iter().zip(&self.w) {
            let mut row: Vec<String> = x.iter().map(|c| fmt_f64(*c)).collect();
            row.push(fmt_f64(*w));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

struct Slab {
    points: Vec<Vec<f64>>,
    v: Vec<f64>,
    v_reflected: Vec<f64>,
    skipped: usize,
}

fn slab(v: &ConformalFactor, dom: &HalfSpaceDomain, j: usize) -> Slab {
    let n = v.dimension().get();
    let count = dom.grid.lateral_count().pow(n as u32 - 1);
    let mut out = Slab {
        points: Vec::new(),
        v: Vec::new(),
        v_reflected: Vec::new(),
        skipped: 0,
    };
    for flat in 0..count {
        let x = dom.grid.point(n, dom.lambda, j, flat);
        match probe(v, dom, &x) {
            Probe::Outside => {}
            Probe::Skipped => out.skipped += 1,
            Probe::Value { v, v_reflected } => {
                out.points.push(x);
                out.v.push(v);
                out.v_reflected.push(v_reflected);
            }
        }
    }
    out
}

fn check_grid(v: &ConformalFactor, dom: &HalfSpaceDomain) -> Result<()> {
    let n = v.dimension().get();
    if dom.grid.lateral_count().checked_pow(n as u32 - 1).is_none() {
        return Err(Error::Parameter("grid too large".into()));
    }
    if !dom.lambda.is_finite() || dom.lambda < -dom.grid.half_width {
        return Err(Error::Parameter(format!(
            "height {} lies below the grid box",
            dom.lambda
        )));
    }
    Ok(())
}

/// `w_λ(x) = v(x) - v(x_λ)` on the grid of `dom`. Points whose reflection
/// falls into an exclusion are skipped and counted.
pub fn w_field(v: &ConformalFactor, dom: &HalfSpaceDomain) -> Result<ReflectionField> {
    check_grid(v, dom)?;
    let slabs: Vec<Slab> = (0..=dom.grid.rows(dom.lambda))
        .into_par_iter()
        .map(|j| slab(v, dom, j))
        .collect();
    let mut field = ReflectionField {
        n: v.dimension(),
        lambda: dom.lambda,
        spacing: dom.grid.spacing(),
        points: Vec::new(),
        v: Vec::new(),
        v_reflected: Vec::new(),
        w: Vec::new(),
        min_w: f64::INFINITY,
        argmin: Vec::new(),
        skipped: 0,
    };
    for s in slabs {
        field.skipped += s.skipped;
        for ((x, a), b) in s.points.into_iter().zip(s.v).zip(s.v_reflected) {
            let w = a - b;
            if w < field.min_w {
                field.min_w = w;
                field.argmin = x.clone();
            }
            field.points.push(x);
            field.v.push(a);
            field.v_reflected.push(b);
            field.w.push(w);
        }
    }
    if field.is_empty() {
        return Err(Error::Geometry("the grid has no admissible points".into()));
    }
    Ok(field)
}

/// Minimum of `w_λ` over the grid without storing the field.
pub fn scan_height(v: &ConformalFactor, dom: &HalfSpaceDomain) -> Result<LambdaScanReport> {
    check_grid(v, dom)?;
    let partial: Vec<(f64, Vec<f64>, usize, usize)> = (0..=dom.grid.rows(dom.lambda))
        .into_par_iter()
        .map(|j| {
            let s = slab(v, dom, j);
            let mut min = f64::INFINITY;
            let mut arg = Vec::new();
            for (i, x) in s.points.iter().enumerate() {
                let w = s.v[i] - s.v_reflected[i];
                if w < min {
                    min = w;
                    arg = x.clone();
                }
            }
            (min, arg, s.skipped, s.points.len())
        })
        .collect();
    let mut report = LambdaScanReport {
        lambda: dom.lambda,
        min_w: f64::INFINITY,
        argmin: Vec::new(),
        skipped: 0,
    };
    let mut count = 0;
    for (min, arg, skipped, len) in partial {
        report.skipped += skipped;
        count += len;
        if min < report.min_w {
            report.min_w = min;
            report.argmin = arg;
        }
    }
    if count == 0 {
        return Err(Error::Geometry("the grid has no admissible points".into()));
    }
    Ok(report)
}

/// Minimum of `w_λ` at one height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaScanReport {
    pub lambda: f64,
    pub min_w: f64,
    pub argmin: Vec<f64>,
    pub skipped: usize,
}

impl LambdaScanReport {
    pub fn nonnegative(&self) -> bool {
        self.min_w > -NEGATIVITY_TOLERANCE
    }
}

/// Outcome of the `λ₀` search: the starting height `λ̄`, the critical height
/// and every height visited, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSearch {
    pub lambda0: f64,
    pub lambda_bar: f64,
    pub tolerance: f64,
    pub steps: Vec<LambdaScanReport>,
}

/// Heights tried per halving of the coarse downward scan.
const COARSE_STEPS: usize = 16;

/// `λ₀ = inf{λ̄ > 0 : w_λ ≥ 0 on Ω_λ for all λ ≥ λ̄}` on the grid.
///
/// A start height with `w_λ ≥ 0` is found by doubling up to the box
/// half-width, then heights are lowered in coarse steps until `w_λ` turns
/// negative and the last interval is bisected to `tol`.
pub fn find_lambda0(
    v: &ConformalFactor,
    exclusions: &Exclusions,
    grid: &GridSpec,
    tol: f64,
) -> Result<LambdaSearch> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!(
            "tolerance must be positive (got {tol})"
        )));
    }
    let ceiling = grid.half_width;
    let mut steps = Vec::new();
    let scan = |lambda: f64, steps: &mut Vec<LambdaScanReport>| -> Result<bool> {
        let r = scan_height(v, &HalfSpaceDomain::new(lambda, exclusions.clone(), *grid))?;
        let ok = r.nonnegative();
        steps.push(r);
        Ok(ok)
    };

    let mut hi = (ceiling / 8.0)
        .max(exclusions.top() + grid.spacing())
        .min(ceiling);
    loop {
        if scan(hi, &mut steps)? {
            break;
        }
        if hi >= ceiling {
            let min_w = steps.last().map_or(f64::NAN, |r| r.min_w);
            return Err(Error::NoStart { ceiling, min_w });
        }
        hi = (2.0 * hi).min(ceiling);
    }
    let lambda_bar = hi;

    let delta = lambda_bar / COARSE_STEPS as f64;
    let mut lo = None;
    for k in 1..=COARSE_STEPS {
        let lambda = (lambda_bar - k as f64 * delta).max(0.0);
        if scan(lambda, &mut steps)? {
            hi = lambda;
        } else {
            lo = Some(lambda);
            break;
        }
    }
    let Some(mut lo) = lo else {
        return Ok(LambdaSearch {
            lambda0: 0.0,
            lambda_bar,
            tolerance: tol,
            steps,
        });
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if scan(mid, &mut steps)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(LambdaSearch {
        lambda0: hi,
        lambda_bar,
        tolerance: tol,
        steps,
    })
}

/// Far-field coefficients of `v(x) = |x|^{2-n}(a + b·x/|x|²) + O(|x|^{-n})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub a: f64,
    pub b: Vec<f64>,
    pub radii: Vec<f64>,
    /// RMS over the sample sphere of `v - |x|^{2-n}(a + b·x/|x|²)` per radius.
    pub remainder_rms: Vec<f64>,
    /// Log-log slope of the remainder; `None` when it is at roundoff level.
    pub remainder_slope: Option<f64>,
    pub condition: f64,
}

/// Monomials `x̂^α` with `|α| ≤ 3` as sorted index tuples.
fn monomials(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for i in 0..n {
        out.push(vec![i]);
    }
    for i in 0..n {
        for j in i..n {
            out.push(vec![i, j]);
        }
    }
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                out.push(vec![i, j, k]);
            }
        }
    }
    out
}

/// Least-squares fit of `v |x|^{n-2}` against `x̂^α / R^{|α|}`, `|α| ≤ 3`,
/// over balanced directions on spheres of the given radii.
pub fn fit_expansion(v: &ConformalFactor, radii: &[f64]) -> Result<ExpansionFit> {
    let n = v.dimension().get();
    let mut sorted: Vec<f64> = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() < 2 || sorted.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Conditioning(
            "need at least two distinct positive radii".into(),
        ));
    }
    if sorted[sorted.len() - 1] / sorted[0] < 1.2 {
        return Err(Error::Conditioning(format!(
            "radii {} .. {} are too close together",
            sorted[0],
            sorted[sorted.len() - 1]
        )));
    }
    let basis = monomials(n);
    let mut dirs = probe_directions(n, 0, 0);
    dirs.extend(balanced_directions(n, 16 * n + basis.len(), 0xF17));

    let nf = n as f64;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for &r in radii {
        for d in &dirs {
            let x = scale(d, r);
            let val = v.value(&x).map_err(|e| {
                Error::Parameter(format!("radius {r} does not clear the exclusions: {e}"))
            })?;
            rhs.push(val * r.powf(nf - 2.0));
            rows.push(
                basis
                    .iter()
                    .map(|m| m.iter().map(|&i| d[i]).product::<f64>() / r.powi(m.len() as i32))
                    .collect::<Vec<f64>>(),
            );
        }
    }
    let m = DMatrix::from_fn(rows.len(), basis.len(), |i, j| rows[i][j]);
    let norms: Vec<f64> = (0..basis.len()).map(|j| m.column(j).norm()).collect();
    let scaled = DMatrix::from_fn(rows.len(), basis.len(), |i, j| rows[i][j] / norms[j]);
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin;
    if !(condition < 1e10) {
        return Err(Error::Conditioning(format!(
            "design matrix condition number {condition:e}"
        )));
    }
    let coef = svd
        .solve(&DVector::from_vec(rhs), 0.0)
        .map_err(|e| Error::Conditioning(e.to_string()))?;
    let coef: Vec<f64> = coef.iter().zip(&norms).map(|(c, s)| c / s).collect();
    let a = coef[0];
    let b = coef[1..=n].to_vec();

    let mut remainder_rms = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut sum = 0.0;
        for d in &dirs {
            let x = scale(d, r);
            let model = r.powf(2.0 - nf) * (a + dot(&b, d) / r);
            let diff = v.value(&x)? - model;
            sum += diff * diff;
        }
        remainder_rms.push((sum / dirs.len() as f64).sqrt());
    }
    let roundoff = radii
        .iter()
        .zip(&remainder_rms)
        .all(|(r, e)| *e <= 1e-12 * a.abs().max(1e-300) * r.powf(2.0 - nf));
    let remainder_slope = if roundoff {
        None
    } else {
        let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = remainder_rms.iter().map(|e| e.max(1e-300).ln()).collect();
        Some(log_log_slope(&xs, &ys))
    };
    Ok(ExpansionFit {
        a,
        b,
        radii: radii.to_vec(),
        remainder_rms,
        remainder_slope,
        condition,
    })
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope of `log max |c_λ|` against `log R` over points `R d` of the given
/// directions that lie below `Π_λ`.
pub fn c_lambda_decay_exponent(
    v: &ConformalFactor,
    lambda: f64,
    radii: &[f64],
    directions: &[Vec<f64>],
) -> Result<f64> {
    let n = v.dimension();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &r in radii {
        let mut peak: f64 = 0.0;
        for d in directions {
            let x = scale(d, r);
            if x[x.len() - 1] > lambda {
                continue;
            }
            let a = v.value(&x)?;
            let b = v.value(&reflect(&x, lambda))?;
            peak = peak.max(c_lambda(a, b, n)?.abs());
        }
        if peak > 0.0 {
            xs.push(r.ln());
            ys.push(peak.ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::Parameter(
            "need two radii with points below the plane".into(),
        ));
    }
    Ok(log_log_slope(&xs, &ys))
}

/// The auxiliary exponent `μ = (n-2)/2`.
pub fn default_mu(n: Dimension) -> f64 {
    n.half_weight()
}

fn check_mu(mu: f64, n: Dimension) -> Result<()> {
    let top = n.as_f64() - 2.0;
    if !(mu > 0.0 && mu < top) {
        return Err(Error::Parameter(format!(
            "mu must lie in (0, {top}) (got {mu})"
        )));
    }
    Ok(())
}

/// `Δg / g = -μ(n-2-μ) |x|^{-2}` for `g = |x|^{-μ}`.
pub fn g_laplacian_ratio(mu: f64, x: &[f64], n: Dimension) -> f64 {
    -mu * (n.as_f64() - 2.0 - mu) / dot(x, x)
}

/// Closed form `-μ(n-2-μ)|x|^{-μ-2}` of `Δ|x|^{-μ}` and a central-difference
/// estimate with spacing `10⁻³ |x|`.
pub fn auxiliary_g_laplacian(mu: f64, x: &[f64], n: Dimension) -> Result<(f64, f64)> {
    auxiliary_g_laplacian_with_spacing(mu, x, n, 1e-3 * norm(x))
}

pub fn auxiliary_g_laplacian_with_spacing(
    mu: f64,
    x: &[f64],
    n: Dimension,
    h: f64,
) -> Result<(f64, f64)> {
    check_mu(mu, n)?;
    if x.len() != n.get() {
        return Err(Error::Parameter("point has the wrong dimension".into()));
    }
    let r = norm(x);
    if !(r > 0.0) {
        return Err(Error::Domain("g is singular at the origin".into()));
    }
    if !(h > 0.0 && h < r) {
        return Err(Error::Parameter(format!(
            "spacing {h} must lie in (0, |x|)"
        )));
    }
    let g = |y: &[f64]| norm(y).powf(-mu);
    let closed = -mu * (n.as_f64() - 2.0 - mu) * r.powf(-mu - 2.0);
    let g0 = g(x);
    let mut probe = x.to_vec();
    let mut fd = 0.0;
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let gp = g(&probe);
        probe[i] = x[i] - h;
        let gm = g(&probe);
        probe[i] = x[i];
        fd += (gp - 2.0 * g0 + gm) / (h * h);
    }
    Ok((closed, fd))
}

/// Signs of `c_λ + Δg/g` over the grid points of a field with `|x| ≥ radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCheck {
    pub radius: f64,
    pub mu: f64,
    pub points: usize,
    pub violations: usize,
    pub max_value: f64,
}

pub fn sign_condition(field: &ReflectionField, radius: f64, mu: f64) -> Result<SignCheck> {
    check_mu(mu, field.n)?;
    let mut out = SignCheck {
        radius,
        mu,
        points: 0,
        violations: 0,
        max_value: f64::NEG_INFINITY,
    };
    for (i, x) in field.points.iter().enumerate() {
        if norm(x) < radius {
            continue;
        }
        let value = c_lambda(field.v[i], field.v_reflected[i], field.n)?
            + g_laplacian_ratio(mu, x, field.n);
        out.points += 1;
        if value >= 0.0 {
            out.violations += 1;
        }
        out.max_value = out.max_value.max(value);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimumLocationReport {
    pub min_w: f64,
    pub argmin: Vec<f64>,
    pub argmin_radius: f64,
    pub r0: f64,
    pub inside: bool,
    pub sign: SignCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MinimumLocation {
    NotApplicable { min_w: f64 },
    Checked(MinimumLocationReport),
}

/// Where a negative minimum of `w_λ` sits relative to `R₀`, together with
/// the sign of `c_λ + Δg/g` outside `R₀` that rules out minima there.
pub fn minimum_location_check(
    field: &ReflectionField,
    r0: f64,
    mu: f64,
) -> Result<MinimumLocation> {
    if field.min_w >= 0.0 {
        return Ok(MinimumLocation::NotApplicable { min_w: field.min_w });
    }
    let argmin_radius = norm(&field.argmin);
    Ok(MinimumLocation::Checked(MinimumLocationReport {
        min_w: field.min_w,
        argmin: field.argmin.clone(),
        argmin_radius,
        r0,
        inside: argmin_radius < r0,
        sign: sign_condition(field, r0, mu)?,
    }))
}
