use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ambient dimension `n >= 3` together with the exponents of the critical
/// equation that depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidDimension(n));
        }
        Ok(Self(n))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// `(n - 2) / 2`, the decay exponent of the cylinder factor `|x|^{-(n-2)/2}`.
    #[inline]
    pub fn half_weight(self) -> f64 {
        (self.as_f64() - 2.0) / 2.0
    }

    /// Critical Sobolev exponent `(n + 2) / (n - 2)`.
    #[inline]
    pub fn critical_exponent(self) -> f64 {
        (self.as_f64() + 2.0) / (self.as_f64() - 2.0)
    }

    /// Coefficient `n (n - 2) / 4` of the nonlinear term.
    #[inline]
    pub fn yamabe_coefficient(self) -> f64 {
        let n = self.as_f64();
        n * (n - 2.0) / 4.0
    }

    /// Linear coefficient `(n - 2)^2 / 4` of the cylinder equation.
    #[inline]
    pub fn cylinder_coefficient(self) -> f64 {
        let k = self.half_weight();
        k * k
    }

    /// Exponent `n / (n - 2)` of the boundary term.
    #[inline]
    pub fn boundary_exponent(self) -> f64 {
        self.as_f64() / (self.as_f64() - 2.0)
    }

    /// Exponent `4 / (n - 2)` relating the factor to the metric.
    #[inline]
    pub fn metric_exponent(self) -> f64 {
        4.0 / (self.as_f64() - 2.0)
    }

    /// Target scalar curvature `n (n - 1)`.
    #[inline]
    pub fn target_curvature(self) -> f64 {
        let n = self.as_f64();
        n * (n - 1.0)
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        Self::new(n)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.0
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_dimensions() {
        assert_eq!(Dimension::new(2), Err(Error::InvalidDimension(2)));
        assert!(Dimension::new(3).is_ok());
    }

    #[test]
    fn exponents_for_n4() {
        let d = Dimension::new(4).unwrap();
        assert_eq!(d.critical_exponent(), 3.0);
        assert_eq!(d.yamabe_coefficient(), 2.0);
        assert_eq!(d.boundary_exponent(), 2.0);
        assert_eq!(d.target_curvature(), 12.0);
    }
}
