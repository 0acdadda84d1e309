//! Radial Yamabe equation on the cylinder `S^{n-1} x R`, written as the
//! first-order system
//!
//! ```text
//! v' = w
//! w' = ((n-2)^2/4) v - (n(n-2)/4) v^{(n+2)/(n-2)}
//! ```
//!
//! whose periodic orbits around `(v0, 0)` are the Fowler solutions. Orbits are
//! integrated with classical fixed-step RK4; the conserved energy
//! `H(v, w) = w^2 - ((n-2)^2/4) v^2 + ((n-2)^2/4) v^{2n/(n-2)}` is monitored by
//! the tests rather than enforced by the scheme.
//!
//! Convention: a trajectory with parameters `(epsilon, T)` starts at
//! `(v, w) = (epsilon, 0)` at `t = T`, so `v` attains its minimum `epsilon` at `T`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dimension::Dimension;
use crate::error::{Error, Result};

/// Default RK4 step in `t`.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Absolute tolerance in `t` for refining `w = 0` crossings.
pub const EVENT_TOLERANCE: f64 = 1e-12;

/// Longest orbit time searched for a period before giving up.
const PERIOD_SEARCH_LIMIT: f64 = 1e4;

/// Equilibrium value `v0 = ((n-2)/n)^{(n-2)/4}`.
pub fn equilibrium_v0(n: Dimension) -> f64 {
    let nf = n.as_f64();
    ((nf - 2.0) / nf).powf((nf - 2.0) / 4.0)
}

/// A point of the `(v, w)` phase plane, `w = dv/dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub v: f64,
    pub w: f64,
}

impl PhasePoint {
    pub fn new(v: f64, w: f64) -> Self {
        Self { v, w }
    }
}

pub fn hamiltonian(p: PhasePoint, n: Dimension) -> f64 {
    let c = n.cylinder_coefficient();
    let v = p.v.abs();
    p.w * p.w - c * v * v + c * v.powf(2.0 * n.as_f64() / (n.as_f64() - 2.0))
}

/// Right-hand side of `w' = ...` for `v >= 0`.
#[inline]
fn acceleration(v: f64, n: Dimension) -> f64 {
    n.cylinder_coefficient() * v - n.yamabe_coefficient() * v.powf(n.critical_exponent())
}

pub fn vector_field(p: PhasePoint, n: Dimension) -> Result<(f64, f64)> {
    if p.v < 0.0 || !p.v.is_finite() {
        return Err(Error::Domain(format!(
            "vector field needs v >= 0 (got v = {})",
            p.v
        )));
    }
    Ok((p.w, acceleration(p.v, n)))
}

/// Parameters of a Fowler orbit: minimum value `epsilon` attained at `t = phase_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FowlerParams {
    pub n: Dimension,
    pub epsilon: f64,
    pub phase_t: f64,
}

impl FowlerParams {
    /// Checked constructor, requires `0 < epsilon <= v0(n)`.
    pub fn new(n: Dimension, epsilon: f64, phase_t: f64) -> Result<Self> {
        let v0 = equilibrium_v0(n);
        if !(epsilon > 0.0) || epsilon > v0 || !phase_t.is_finite() {
            return Err(Error::Parameter(format!(
                "epsilon must lie in (0, v0] = (0, {v0}] (got {epsilon})"
            )));
        }
        Ok(Self {
            n,
            epsilon,
            phase_t,
        })
    }

    /// `epsilon = fraction * v0(n)`.
    pub fn from_fraction(n: Dimension, fraction: f64, phase_t: f64) -> Result<Self> {
        Self::new(n, fraction * equilibrium_v0(n), phase_t)
    }

    /// Skips the `epsilon <= v0` check. Initial data with `H >= 0` may leave
    /// the half-plane `v > 0`, which [`integrate`] reports as an escape.
    pub fn unchecked(n: Dimension, epsilon: f64, phase_t: f64) -> Self {
        Self {
            n,
            epsilon,
            phase_t,
        }
    }

    pub fn is_equilibrium(&self) -> bool {
        self.epsilon == equilibrium_v0(self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub v: f64,
    pub w: f64,
}

fn rk4_step(n: Dimension, v: f64, w: f64, h: f64) -> Option<(f64, f64)> {
    let k1v = w;
    let k1w = acceleration(v, n);
    let v2 = v + 0.5 * h * k1v;
    if !(v2 > 0.0) {
        return None;
    }
    let k2v = w + 0.5 * h * k1w;
    let k2w = acceleration(v2, n);
    let v3 = v + 0.5 * h * k2v;
    if !(v3 > 0.0) {
        return None;
    }
    let k3v = w + 0.5 * h * k2w;
    let k3w = acceleration(v3, n);
    let v4 = v + h * k3v;
    if !(v4 > 0.0) {
        return None;
    }
    let k4v = w + h * k3w;
    let k4w = acceleration(v4, n);
    let vn = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    let wn = w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    if !(vn > 0.0) || !wn.is_finite() {
        return None;
    }
    Some((vn, wn))
}

/// Integrates from `start` at `from` to `to` (either direction), returning every
/// node including both ends. All steps have length `h` except the last.
fn march(n: Dimension, start: Sample, to: f64, h: f64) -> Result<Vec<Sample>> {
    let span = to - start.t;
    let dir = span.signum();
    let steps = ((span.abs() / h) - 1e-9).ceil().max(0.0) as usize;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(start);
    let (mut v, mut w) = (start.v, start.w);
    for k in 1..=steps {
        let t_prev = out[k - 1].t;
        let t_next = if k == steps {
            to
        } else {
            start.t + dir * h * k as f64
        };
        let (vn, wn) =
            rk4_step(n, v, w, t_next - t_prev).ok_or(Error::OrbitEscape { t: t_prev, v })?;
        v = vn;
        w = wn;
        out.push(Sample { t: t_next, v, w });
    }
    Ok(out)
}

/// Dense trajectory of a cylinder orbit. Between nodes `v` is the quintic
/// Hermite interpolant of `(v, w, v'')`, so it is twice continuously
/// differentiable in `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FowlerTrajectory {
    samples: Vec<Sample>,
    step: f64,
    params: FowlerParams,
}

/// Integrates the orbit of `params` on `[t0, t1]` with fixed step `step`.
pub fn integrate(params: &FowlerParams, t0: f64, t1: f64, step: f64) -> Result<FowlerTrajectory> {
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Parameter(format!("need t0 < t1 (got [{t0}, {t1}])")));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Parameter(format!(
            "step must be positive (got {step})"
        )));
    }
    if !(params.epsilon > 0.0) {
        return Err(Error::Parameter(format!(
            "epsilon must be positive (got {})",
            params.epsilon
        )));
    }
    let n = params.n;
    let start = Sample {
        t: params.phase_t,
        v: params.epsilon,
        w: 0.0,
    };
    let t_phase = params.phase_t;
    let samples = if t_phase <= t0 {
        let lead = march(n, start, t0, step)?;
        let at_t0 = *lead.last().expect("march yields at least one node");
        march(n, at_t0, t1, step)?
    } else if t_phase >= t1 {
        let lead = march(n, start, t1, step)?;
        let at_t1 = *lead.last().expect("march yields at least one node");
        let mut back = march(n, at_t1, t0, step)?;
        back.reverse();
        back
    } else {
        let mut back = march(n, start, t0, step)?;
        back.reverse();
        let fwd = march(n, start, t1, step)?;
        back.extend_from_slice(&fwd[1..]);
        back
    };
    Ok(FowlerTrajectory {
        samples,
        step,
        params: *params,
    })
}

/// Quintic Hermite interpolant on a cell of width `h` from values, first and
/// second derivatives at both ends; returns the value and first derivative.
#[inline]
fn quintic(s: f64, h: f64, y0: [f64; 3], y1: [f64; 3]) -> (f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let basis = [
        1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
        s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
        0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
        10.0 * s3 - 15.0 * s4 + 6.0 * s5,
        -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
        0.5 * s3 - s4 + 0.5 * s5,
    ];
    let slope = [
        -30.0 * s2 + 60.0 * s3 - 30.0 * s4,
        1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
        s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4,
        30.0 * s2 - 60.0 * s3 + 30.0 * s4,
        -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
        1.5 * s2 - 4.0 * s3 + 2.5 * s4,
    ];
    let coef = [
        y0[0],
        h * y0[1],
        h * h * y0[2],
        y1[0],
        h * y1[1],
        h * h * y1[2],
    ];
    let value = basis.iter().zip(&coef).map(|(b, c)| b * c).sum();
    let deriv: f64 = slope.iter().zip(&coef).map(|(b, c)| b * c).sum();
    (value, deriv / h)
}

impl FowlerTrajectory {
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn params(&self) -> &FowlerParams {
        &self.params
    }

    pub fn dimension(&self) -> Dimension {
        self.params.n
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    pub fn span(&self) -> f64 {
        let (a, b) = self.t_range();
        b - a
    }

    fn cell(&self, t: f64) -> Result<usize> {
        let (a, b) = self.t_range();
        if !(t >= a && t <= b) {
            return Err(Error::Domain(format!(
                "t = {t} outside trajectory range [{a}, {b}]"
            )));
        }
        let idx = self.samples.partition_point(|s| s.t <= t);
        Ok(idx.clamp(1, self.samples.len() - 1) - 1)
    }

    /// Interpolated phase point at `t`; `w` is the derivative of the `v`
    /// interpolant.
    pub fn eval(&self, t: f64) -> Result<PhasePoint> {
        let i = self.cell(t)?;
        let (a, b) = (self.samples[i], self.samples[i + 1]);
        let h = b.t - a.t;
        let n = self.params.n;
        let (v, w) = quintic(
            (t - a.t) / h,
            h,
            [a.v, a.w, acceleration(a.v, n)],
            [b.v, b.w, acceleration(b.v, n)],
        );
        Ok(PhasePoint { v, w })
    }

    /// `(v, v', v'')` at `t`, with `v''` taken from the equation at the
    /// interpolated `v`.
    pub fn derivatives(&self, t: f64) -> Result<(f64, f64, f64)> {
        let p = self.eval(t)?;
        Ok((p.v, p.w, acceleration(p.v.max(0.0), self.params.n)))
    }

    pub fn hamiltonian_at(&self, i: usize) -> f64 {
        let s = self.samples[i];
        hamiltonian(PhasePoint::new(s.v, s.w), self.params.n)
    }

    /// `max_i |H(t_i) - H(t_0)|`.
    pub fn max_energy_drift(&self) -> f64 {
        let h0 = self.hamiltonian_at(0);
        (0..self.samples.len())
            .map(|i| (self.hamiltonian_at(i) - h0).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,v,w,H`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["t", "v", "w", "H"])?;
        for (i, s) in self.samples.iter().enumerate() {
            wtr.write_record([
                crate::export::fmt_f64(s.t),
                crate::export::fmt_f64(s.v),
                crate::export::fmt_f64(s.w),
                crate::export::fmt_f64(self.hamiltonian_at(i)),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Period of the Fowler orbit with minimum `epsilon`, default step.
pub fn period(epsilon: f64, n: Dimension) -> Result<f64> {
    period_with_step(epsilon, n, DEFAULT_STEP)
}

/// Period from the second sign change of `w` after leaving the minimum. Each
/// crossing is refined by bisection on a partial RK4 step.
pub fn period_with_step(epsilon: f64, n: Dimension, step: f64) -> Result<f64> {
    let v0 = equilibrium_v0(n);
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!(
            "epsilon must be positive (got {epsilon})"
        )));
    }
    if epsilon >= v0 {
        return Err(Error::DegenerateOrbit { epsilon });
    }
    if !(step > 0.0) {
        return Err(Error::Parameter(format!(
            "step must be positive (got {step})"
        )));
    }
    let (mut v, mut w) = (epsilon, 0.0);
    let mut t = 0.0;
    let mut crossings = 0;
    let mut sign = 1.0; // w > 0 right after the minimum
    while t < PERIOD_SEARCH_LIMIT {
        let (vn, wn) = rk4_step(n, v, w, step).ok_or(Error::OrbitEscape { t, v })?;
        if wn * sign < 0.0 {
            crossings += 1;
            if crossings == 2 {
                let (mut lo, mut hi) = (0.0, step);
                while hi - lo > EVENT_TOLERANCE {
                    let mid = 0.5 * (lo + hi);
                    let (_, wm) = rk4_step(n, v, w, mid).ok_or(Error::OrbitEscape { t, v })?;
                    if wm * sign < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Ok(t + 0.5 * (lo + hi));
            }
            sign = -sign;
        }
        v = vn;
        w = wn;
        t += step;
    }
    Err(Error::Domain(format!(
        "no return to the minimum within t = {PERIOD_SEARCH_LIMIT}"
    )))
}

/// Extreme values of `v` along a trajectory covering at least one period.
/// Turning points are located on the `w` interpolant by bisection.
pub fn orbit_extrema(traj: &FowlerTrajectory) -> Result<(f64, f64)> {
    let params = traj.params();
    let n = params.n;
    if !params.is_equilibrium() {
        let p = period(params.epsilon, n)?;
        if traj.span() < p {
            return Err(Error::InsufficientSpan {
                span: traj.span(),
                period: p,
            });
        }
    }
    let samples = traj.samples();
    let mut v_min = f64::INFINITY;
    let mut v_max = f64::NEG_INFINITY;
    for s in samples {
        v_min = v_min.min(s.v);
        v_max = v_max.max(s.v);
    }
    for pair in samples.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.w == 0.0 || a.w * b.w >= 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (a.t, b.t);
        let w_lo = a.w;
        while hi - lo > EVENT_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            let pm = traj.eval(mid)?;
            if pm.w * w_lo > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let v = traj.eval(0.5 * (lo + hi))?.v;
        v_min = v_min.min(v);
        v_max = v_max.max(v);
    }
    Ok((v_min, v_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quintic_reproduces_degree_five() {
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t.powi(3) - t.powi(5);
        let df = |t: f64| -2.0 + 1.5 * t * t - 5.0 * t.powi(4);
        let d2f = |t: f64| 3.0 * t - 20.0 * t.powi(3);
        let (a, b) = (0.3, 0.8);
        let h = b - a;
        for k in 0..=10 {
            let t = a + h * k as f64 / 10.0;
            let (v, w) = quintic((t - a) / h, h, [f(a), df(a), d2f(a)], [f(b), df(b), d2f(b)]);
            assert!((v - f(t)).abs() < 1e-14);
            assert!((w - df(t)).abs() < 1e-13);
        }
    }

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn equilibrium_values() {
        assert_eq!(equilibrium_v0(dim(6)), 2.0 / 3.0);
        assert_relative_eq!(equilibrium_v0(dim(4)), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(
            equilibrium_v0(dim(3)),
            (1.0f64 / 3.0).powf(0.25),
            epsilon = 1e-15
        );
        assert!((equilibrium_v0(dim(3)) - 0.75983569).abs() < 1e-8);
    }

    #[test]
    fn hamiltonian_examples() {
        for n in 3..8 {
            assert_eq!(hamiltonian(PhasePoint::new(0.0, 0.0), dim(n)), 0.0);
            assert!(hamiltonian(PhasePoint::new(1.0, 0.0), dim(n)).abs() < 1e-15);
        }
        let v0 = equilibrium_v0(dim(4));
        assert_relative_eq!(
            hamiltonian(PhasePoint::new(v0, 0.0), dim(4)),
            -0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn vector_field_examples() {
        for n in 3..8 {
            let v0 = equilibrium_v0(dim(n));
            let (a, b) = vector_field(PhasePoint::new(v0, 0.0), dim(n)).unwrap();
            assert_eq!(a, 0.0);
            assert!(b.abs() < 1e-15, "n={n}: {b}");
        }
        let (a, b) = vector_field(PhasePoint::new(0.5, 0.0), dim(4)).unwrap();
        assert_eq!((a, b), (0.0, 0.25));
        let v0 = equilibrium_v0(dim(4));
        let (a, b) = vector_field(PhasePoint::new(v0, 0.1), dim(4)).unwrap();
        assert_eq!(a, 0.1);
        assert!(b.abs() < 1e-15);
        assert!(matches!(
            vector_field(PhasePoint::new(-0.1, 0.0), dim(4)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn equilibrium_trajectory_is_constant() {
        let p = FowlerParams::from_fraction(dim(4), 1.0, 0.0).unwrap();
        let traj = integrate(&p, 0.0, 50.0, 1e-3).unwrap();
        let v0 = equilibrium_v0(dim(4));
        let dev = traj
            .samples()
            .iter()
            .map(|s| (s.v - v0).abs().max(s.w.abs()))
            .fold(0.0, f64::max);
        assert!(dev < 1e-10, "{dev}");
        assert_eq!(orbit_extrema(&traj).unwrap().0, v0);
    }

    #[test]
    fn origin_is_fixed() {
        // (0, 0) is an equilibrium as well, but v = 0 is off the geometric
        // half-plane; the field itself is still zero there.
        assert_eq!(
            vector_field(PhasePoint::new(0.0, 0.0), dim(5)).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn trajectory_nodes_and_range() {
        let p = FowlerParams::from_fraction(dim(3), 0.5, 2.0).unwrap();
        let traj = integrate(&p, -1.0, 3.3, 0.01).unwrap();
        assert_eq!(traj.t_range(), (-1.0, 3.3));
        assert!(traj.samples().windows(2).all(|w| w[1].t > w[0].t));
        assert!(traj.samples().iter().all(|s| s.v > 0.0));
        let at_phase = traj.eval(2.0).unwrap();
        assert_relative_eq!(at_phase.v, p.epsilon, epsilon = 1e-14);
        assert!(at_phase.w.abs() < 1e-14);
        assert!(traj.eval(3.31).is_err());
        // phase outside [t0, t1] on either side
        let left = integrate(&p, 2.5, 4.0, 0.01).unwrap();
        let right = integrate(&p, -3.0, 1.0, 0.01).unwrap();
        assert_eq!(left.t_range(), (2.5, 4.0));
        assert_eq!(right.t_range(), (-3.0, 1.0));
        assert_relative_eq!(
            left.eval(3.0).unwrap().v,
            traj.eval(3.0).unwrap().v,
            epsilon = 1e-9
        );
    }

    #[test]
    fn rejects_bad_interval_and_step() {
        let p = FowlerParams::from_fraction(dim(3), 0.5, 0.0).unwrap();
        assert!(integrate(&p, 1.0, 1.0, 0.01).is_err());
        assert!(integrate(&p, 0.0, 1.0, 0.0).is_err());
        assert!(FowlerParams::from_fraction(dim(3), 1.2, 0.0).is_err());
        assert!(FowlerParams::new(dim(3), 0.0, 0.0).is_err());
    }

    #[test]
    fn positive_energy_data_escapes() {
        // epsilon > 1 gives H(epsilon, 0) > 0: the orbit crosses v = 0
        let p = FowlerParams::unchecked(dim(4), 1.05, 0.0);
        assert!(hamiltonian(PhasePoint::new(1.05, 0.0), dim(4)) > 0.0);
        match integrate(&p, 0.0, 30.0, 1e-3) {
            Err(Error::OrbitEscape { .. }) => {}
            other => panic!("expected escape, got {other:?}"),
        }
    }

    #[test]
    fn period_errors() {
        let n = dim(4);
        let v0 = equilibrium_v0(n);
        assert!(matches!(period(v0, n), Err(Error::DegenerateOrbit { .. })));
        assert!(matches!(
            period(1.1 * v0, n),
            Err(Error::DegenerateOrbit { .. })
        ));
        assert!(matches!(period(0.0, n), Err(Error::Domain(_))));
        assert!(matches!(period(-0.1, n), Err(Error::Domain(_))));
    }

    #[test]
    fn period_small_amplitude_limit() {
        for (n, target) in [(3, 2.0 * std::f64::consts::PI), (4, 4.442882938158366)] {
            let p = period(0.9999 * equilibrium_v0(dim(n)), dim(n)).unwrap();
            assert!(((p - target) / target).abs() < 1e-4, "n={n}: {p}");
        }
    }

    #[test]
    fn extrema_need_a_full_period() {
        let p = FowlerParams::from_fraction(dim(4), 0.5, 0.0).unwrap();
        let short = integrate(&p, 0.0, 1.0, 1e-3).unwrap();
        assert!(matches!(
            orbit_extrema(&short),
            Err(Error::InsufficientSpan { .. })
        ));
    }

    #[test]
    fn extrema_lie_on_one_level_set() {
        let n = dim(4);
        let p = FowlerParams::from_fraction(n, 0.5, 0.0).unwrap();
        let per = period(p.epsilon, n).unwrap();
        let traj = integrate(&p, 0.3, 0.3 + 1.5 * per, 1e-3).unwrap();
        let (lo, hi) = orbit_extrema(&traj).unwrap();
        assert!((lo - p.epsilon).abs() < 1e-6);
        let h_lo = hamiltonian(PhasePoint::new(lo, 0.0), n);
        let h_hi = hamiltonian(PhasePoint::new(hi, 0.0), n);
        assert!((h_lo - h_hi).abs() < 1e-8, "{h_lo} {h_hi}");
        assert!(hi > equilibrium_v0(n));
    }

    #[test]
    fn csv_export_has_header_and_full_precision() {
        let p = FowlerParams::from_fraction(dim(3), 0.5, 0.0).unwrap();
        let traj = integrate(&p, 0.0, 0.01, 0.005).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,v,w,H"));
        let first: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(first[1], p.epsilon);
        assert_eq!(text.lines().count(), 1 + traj.samples().len());
    }
}
