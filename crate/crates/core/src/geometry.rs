//! Euclidean primitives shared by the conformal, inversion and moving-plane
//! code: small vector helpers on slices, balls, half-spaces and rigid motions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
#[inline]
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn normalized(a: &[f64]) -> Result<Vec<f64>> {
    let r = norm(a);
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Geometry("cannot normalize a zero vector".into()));
    }
    Ok(scale(a, 1.0 / r))
}

pub fn unit_vector(n: usize, axis: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[axis] = 1.0;
    e
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Geometry(format!(
                "ball radius must be positive (got {radius})"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Geometry("ball center must be finite".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn unit(n: usize) -> Self {
        Self {
            center: vec![0.0; n],
            radius: 1.0,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Signed distance from `x` to the sphere, negative inside.
    #[inline]
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dist(x, &self.center) - self.radius
    }

    /// Whether `x` lies on the boundary sphere within `tol` (scaled by the radius).
    pub fn on_boundary(&self, x: &[f64], tol: f64) -> bool {
        self.signed_distance(x).abs() <= tol * self.radius.max(1.0)
    }

    /// The boundary point in direction `dir` (assumed unit).
    pub fn boundary_point(&self, dir: &[f64]) -> Vec<f64> {
        axpy(&self.center, self.radius, dir)
    }

    /// Whether the closed ball `other` sits inside this (open) ball.
    pub fn contains_ball(&self, other: &Ball) -> bool {
        dist(&self.center, &other.center) + other.radius < self.radius
    }
}

/// Closed half-space `{x : <normal, x> >= offset}`; the unit normal points into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: &[f64], offset: f64) -> Result<Self> {
        Ok(Self {
            normal: normalized(normal)?,
            offset,
        })
    }

    /// Signed height of `x` above the bounding hyperplane.
    #[inline]
    pub fn height(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.height(x) >= 0.0
    }

    /// A point on the bounding hyperplane.
    pub fn anchor(&self) -> Vec<f64> {
        scale(&self.normal, self.offset)
    }
}

/// Proper rigid motion `x -> R x + t` with `R` orthogonal, `det R = +1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidMotion {
    /// Row-major `n x n` rotation.
    rotation: Vec<f64>,
    translation: Vec<f64>,
}

impl RigidMotion {
    pub fn identity(n: usize) -> Self {
        let mut rotation = vec![0.0; n * n];
        for i in 0..n {
            rotation[i * n + i] = 1.0;
        }
        Self {
            rotation,
            translation: vec![0.0; n],
        }
    }

    pub fn translation(t: Vec<f64>) -> Self {
        let mut m = Self::identity(t.len());
        m.translation = t;
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    /// Motion taking `hs` onto `{x^n >= 0}`, with its hyperplane onto `{x^n = 0}`.
    ///
    /// Built from the Householder reflection sending the normal to `e_n`,
    /// composed with a flip of the first axis so the result is orientation
    /// preserving.
    pub fn normalizing(hs: &HalfSpace) -> Self {
        let n = hs.normal.len();
        let m = &hs.normal;
        let mut u = m.clone();
        u[n - 1] -= 1.0;
        let uu = norm_sq(&u);
        let mut rotation = vec![0.0; n * n];
        if uu < 1e-28 {
            for i in 0..n {
                rotation[i * n + i] = 1.0;
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    let h = delta - 2.0 * u[i] * u[j] / uu;
                    // flip row 0
                    rotation[i * n + j] = if i == 0 { -h } else { h };
                }
            }
        }
        let mut translation = vec![0.0; n];
        translation[n - 1] = -hs.offset;
        Self {
            rotation,
            translation,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| dot(&self.rotation[i * n..(i + 1) * n], x) + self.translation[i])
            .collect()
    }

    /// Applies only the rotation part (for vectors).
    pub fn rotate(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| dot(&self.rotation[i * n..(i + 1) * n], v))
            .collect()
    }

    /// Applies the transposed rotation (inverse rotation) to a vector.
    pub fn rotate_back(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|j| (0..n).map(|i| self.rotation[i * n + j] * v[i]).sum())
            .collect()
    }

    pub fn apply_inverse(&self, y: &[f64]) -> Vec<f64> {
        self.rotate_back(&sub(y, &self.translation))
    }

    pub fn inverse(&self) -> Self {
        let n = self.dim();
        let mut rotation = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                rotation[j * n + i] = self.rotation[i * n + j];
            }
        }
        let t = self.rotate_back(&self.translation);
        Self {
            rotation,
            translation: scale(&t, -1.0),
        }
    }

    pub fn apply_ball(&self, b: &Ball) -> Ball {
        Ball {
            center: self.apply(&b.center),
            radius: b.radius,
        }
    }

    pub fn apply_half_space(&self, hs: &HalfSpace) -> HalfSpace {
        let normal = self.rotate(&hs.normal);
        let anchor = self.apply(&hs.anchor());
        let offset = dot(&normal, &anchor);
        HalfSpace { normal, offset }
    }
}
