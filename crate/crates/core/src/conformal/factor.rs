use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::profile::CylinderProfile;
use crate::dimension::Dimension;
use crate::error::{Error, Result};
use crate::geometry::{dist, norm_sq, scale, sub};

/// Value, gradient and Laplacian of a scalar field at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub laplacian: f64,
}

/// A positive scalar field on (part of) `R^n` with analytic derivatives.
///
/// Fields do not know their domain; [`ConformalFactor`] pairs a field with
/// one and decides how derivatives are taken.
pub trait Field: Send + Sync + Debug {
    fn dimension(&self) -> Dimension;

    fn value(&self, x: &[f64]) -> Result<f64>;

    fn jet(&self, x: &[f64]) -> Result<Jet>;

    /// `Δu + (n(n-2)/4) u^{(n+2)/(n-2)}` in a better conditioned form, for
    /// fields that have one.
    fn residual(&self, _x: &[f64]) -> Option<Result<f64>> {
        None
    }
}

/// `u ≡ c`.
#[derive(Debug, Clone)]
pub struct ConstantField {
    pub n: Dimension,
    pub value: f64,
}

impl Field for ConstantField {
    fn dimension(&self) -> Dimension {
        self.n
    }

    fn value(&self, _x: &[f64]) -> Result<f64> {
        Ok(self.value)
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        Ok(Jet {
            value: self.value,
            gradient: vec![0.0; x.len()],
            laplacian: 0.0,
        })
    }
}

/// Standard bubble `u(x) = (2λ / (λ² + |x - c|²))^{(n-2)/2}`, the conformal
/// factor of the round sphere of curvature `n(n-1)` pulled back by
/// stereographic projection.
#[derive(Debug, Clone)]
pub struct BubbleField {
    pub n: Dimension,
    pub lambda: f64,
    pub center: Vec<f64>,
}

impl Field for BubbleField {
    fn dimension(&self) -> Dimension {
        self.n
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let q = self.lambda * self.lambda + norm_sq(&sub(x, &self.center));
        Ok((2.0 * self.lambda / q).powf(self.n.half_weight()))
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let y = sub(x, &self.center);
        let l2 = self.lambda * self.lambda;
        let q = l2 + norm_sq(&y);
        let k = self.n.half_weight();
        let u = (2.0 * self.lambda / q).powf(k);
        let nf = self.n.as_f64();
        Ok(Jet {
            value: u,
            gradient: scale(&y, -2.0 * k * u / q),
            laplacian: -nf * (nf - 2.0) * l2 * u / (q * q),
        })
    }
}

/// `u(x) = |x - c|^{-(n-2)/2} v(-log |x - c|)` for a cylinder profile `v`.
#[derive(Debug, Clone)]
pub struct RadialCylinderField {
    pub profile: Arc<dyn CylinderProfile>,
    pub center: Vec<f64>,
}

impl RadialCylinderField {
    fn radius(&self, x: &[f64]) -> Result<f64> {
        let r = dist(x, &self.center);
        if !(r > 0.0) {
            return Err(Error::Domain(
                "cylinder factor evaluated at its center".into(),
            ));
        }
        Ok(r)
    }
}

impl Field for RadialCylinderField {
    fn dimension(&self) -> Dimension {
        self.profile.dimension()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let r = self.radius(x)?;
        let v = self.profile.value(-r.ln())?;
        Ok(r.powf(-self.dimension().half_weight()) * v)
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let r = self.radius(x)?;
        let k = self.dimension().half_weight();
        let (v, dv, d2v) = self.profile.derivatives(-r.ln())?;
        let rk = r.powf(-k);
        // u = r^{-k} v(t), t = -ln r
        let du_dr = -rk / r * (k * v + dv);
        let y = sub(x, &self.center);
        Ok(Jet {
            value: rk * v,
            gradient: scale(&y, du_dr / r),
            laplacian: rk / (r * r) * (d2v - k * k * v),
        })
    }

    fn residual(&self, x: &[f64]) -> Option<Result<f64>> {
        Some((|| {
            let r = self.radius(x)?;
            let n = self.dimension();
            let k = n.half_weight();
            let (v, _, d2v) = self.profile.derivatives(-r.ln())?;
            let ode = d2v - k * k * v + n.yamabe_coefficient() * v.powf(n.critical_exponent());
            Ok(r.powf(-k - 2.0) * ode)
        })())
    }
}

/// Finite-difference stencil spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Spacing {
    /// Multiple of the local length scale `min(1, distance to Λ)`.
    Relative(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference(Spacing),
}

impl DerivativeMode {
    /// Central differences at `1e-4` times the local scale.
    pub const DEFAULT_FD: DerivativeMode =
        DerivativeMode::FiniteDifference(Spacing::Relative(1e-4));
}

/// Conformal factor `u > 0`: a field, the domain where it may be evaluated,
/// and the way derivatives are taken.
#[derive(Debug, Clone)]
pub struct ConformalFactor {
    field: Arc<dyn Field>,
    domain: Domain,
    mode: DerivativeMode,
}

impl ConformalFactor {
    pub fn new(field: Arc<dyn Field>, domain: Domain) -> Self {
        Self {
            field,
            domain,
            mode: DerivativeMode::Analytic,
        }
    }

    pub fn constant(n: Dimension, value: f64) -> Result<Self> {
        if !(value > 0.0) {
            return Err(Error::Parameter(format!(
                "constant factor must be positive (got {value})"
            )));
        }
        Ok(Self::new(
            Arc::new(ConstantField { n, value }),
            Domain::everywhere(),
        ))
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn dimension(&self) -> Dimension {
        self.field.dimension()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn field(&self) -> &Arc<dyn Field> {
        &self.field
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension().get() {
            return Err(Error::Domain(format!(
                "point has {} coordinates, factor lives in R^{}",
                x.len(),
                self.dimension()
            )));
        }
        self.domain.check(x)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        self.field.value(x)
    }

    /// Stencil spacing at `x` in finite-difference mode.
    pub fn spacing_at(&self, x: &[f64]) -> Option<f64> {
        match self.mode {
            DerivativeMode::Analytic => None,
            DerivativeMode::FiniteDifference(Spacing::Absolute(h)) => Some(h),
            DerivativeMode::FiniteDifference(Spacing::Relative(rel)) => {
                Some(rel * self.domain.singular.distance(x).min(1.0))
            }
        }
    }

    pub fn jet(&self, x: &[f64]) -> Result<Jet> {
        self.check(x)?;
        match self.spacing_at(x) {
            None => self.field.jet(x),
            Some(h) => self.fd_jet(x, h),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.jet(x)?.gradient)
    }

    pub fn laplacian(&self, x: &[f64]) -> Result<f64> {
        Ok(self.jet(x)?.laplacian)
    }

    /// Second-order central differences of the raw field values.
    fn fd_jet(&self, x: &[f64], h: f64) -> Result<Jet> {
        let u0 = self.field.value(x)?;
        let mut probe = x.to_vec();
        let mut gradient = vec![0.0; x.len()];
        let mut laplacian = 0.0;
        for i in 0..x.len() {
            probe[i] = x[i] + h;
            let up = self.field.value(&probe)?;
            probe[i] = x[i] - h;
            let um = self.field.value(&probe)?;
            probe[i] = x[i];
            gradient[i] = (up - um) / (2.0 * h);
            laplacian += (up - 2.0 * u0 + um) / (h * h);
        }
        Ok(Jet {
            value: u0,
            gradient,
            laplacian,
        })
    }

    /// Analytic residual override of the field, if any and if in analytic mode.
    pub(crate) fn routed_residual(&self, x: &[f64]) -> Option<Result<f64>> {
        match self.mode {
            DerivativeMode::Analytic => self.field.residual(x),
            DerivativeMode::FiniteDifference(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn bubble_values() {
        let b = BubbleField {
            n: dim(3),
            lambda: 1.0,
            center: vec![0.0; 3],
        };
        assert!((b.value(&[0.0; 3]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let b4 = BubbleField {
            n: dim(4),
            lambda: 1.0,
            center: vec![0.0; 4],
        };
        assert_eq!(b4.value(&[0.0, 1.0, 0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let u = ConformalFactor::constant(dim(3), 1.0).unwrap();
        assert!(matches!(u.value(&[0.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn fd_jet_matches_analytic_bubble() {
        let field = Arc::new(BubbleField {
            n: dim(4),
            lambda: 0.7,
            center: vec![0.1, 0.0, -0.2, 0.3],
        });
        let a = ConformalFactor::new(field, Domain::everywhere());
        let f = a.clone().with_mode(DerivativeMode::DEFAULT_FD);
        let x = [0.3, -0.4, 0.2, 0.5];
        let ja = a.jet(&x).unwrap();
        let jf = f.jet(&x).unwrap();
        assert!((ja.laplacian - jf.laplacian).abs() < 1e-5);
        for (g, h) in ja.gradient.iter().zip(&jf.gradient) {
            assert!((g - h).abs() < 1e-7);
        }
    }
}
