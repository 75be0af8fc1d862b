//! The classical stroboscopic map on the unit sphere.
//!
//! One kick takes `X = (x, y, z)` to `F(X)`:
//!
//! ```text
//! u = cos(a) x + sin(a) z          (rotation about y by a)
//! w = -sin(a) x + cos(a) z
//! theta = k w^(p-1)                (twist about z)
//! F(X) = (cos(theta) u - sin(theta) y,
//!         sin(theta) u + cos(theta) y,
//!         w)
//! ```
//!
//! Everything here is a pure function of its inputs.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::params::ipow;
use crate::{Error, ModelParams, Result};

/// A point on the unit sphere (the classical spin `<J>/J`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PhasePoint {
    /// Builds a unit vector from arbitrary nonzero components.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let raw = PhasePoint { x, y, z };
        let norm = raw.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidParameter(format!(
                "cannot normalize ({x}, {y}, {z}) onto the unit sphere"
            )));
        }
        Ok(raw.scale(1.0 / norm))
    }

    /// Builds a point without normalizing. Callers must pass a unit vector.
    pub const fn from_unit(x: f64, y: f64, z: f64) -> Self {
        PhasePoint { x, y, z }
    }

    /// Polar angle `theta` from +z, azimuth `phi` from +x.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        PhasePoint { x: st * cp, y: st * sp, z: ct }
    }

    /// The precession-axis fixed point `(0, 1, 0)`.
    pub const fn north_pole() -> Self {
        PhasePoint { x: 0.0, y: 1.0, z: 0.0 }
    }

    /// The precession-axis fixed point `(0, -1, 0)`.
    pub const fn south_pole() -> Self {
        PhasePoint { x: 0.0, y: -1.0, z: 0.0 }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        PhasePoint { x: v[0], y: v[1], z: v[2] }
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Self {
        self.scale(1.0 / self.norm())
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        PhasePoint {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn scale(self, factor: f64) -> Self {
        PhasePoint { x: self.x * factor, y: self.y * factor, z: self.z * factor }
    }

    /// Euclidean (chord) distance in R^3.
    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    /// An orthonormal basis `(e1, e2)` of the tangent plane at this point,
    /// oriented so that `(e1, e2, self)` is right-handed.
    pub fn tangent_basis(self) -> (PhasePoint, PhasePoint) {
        let n = self.normalized();
        // cross with the coordinate axis least aligned with n
        let axis = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
            PhasePoint { x: 1.0, y: 0.0, z: 0.0 }
        } else if n.y.abs() <= n.z.abs() {
            PhasePoint { x: 0.0, y: 1.0, z: 0.0 }
        } else {
            PhasePoint { x: 0.0, y: 0.0, z: 1.0 }
        };
        let e1 = axis.cross(n).normalized();
        let e2 = n.cross(e1);
        (e1, e2)
    }
}

impl Add for PhasePoint {
    type Output = PhasePoint;
    fn add(self, rhs: Self) -> Self {
        PhasePoint { x: self.x + rhs.x, y: self.y + rhs.y, z: self.z + rhs.z }
    }
}

impl Sub for PhasePoint {
    type Output = PhasePoint;
    fn sub(self, rhs: Self) -> Self {
        PhasePoint { x: self.x - rhs.x, y: self.y - rhs.y, z: self.z - rhs.z }
    }
}

impl Mul<f64> for PhasePoint {
    type Output = PhasePoint;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

/// One kick of the map without the final renormalization.
#[inline]
pub fn step_unnormalized(point: PhasePoint, params: &ModelParams) -> PhasePoint {
    let (c, s) = (params.cos_alpha(), params.sin_alpha());
    let u = c * point.x + s * point.z;
    let w = -s * point.x + c * point.z;
    let theta = params.k() * ipow(w, params.p() - 1);
    let (st, ct) = theta.sin_cos();
    PhasePoint { x: ct * u - st * point.y, y: st * u + ct * point.y, z: w }
}

/// One kick of the map, renormalized onto the sphere.
#[inline]
pub fn step(point: PhasePoint, params: &ModelParams) -> PhasePoint {
    step_unnormalized(point, params).normalized()
}

/// The inverse map: undo the twist, then rotate back by `-alpha`.
pub fn inverse_step(point: PhasePoint, params: &ModelParams) -> PhasePoint {
    let (c, s) = (params.cos_alpha(), params.sin_alpha());
    let theta = params.k() * ipow(point.z, params.p() - 1);
    let (st, ct) = theta.sin_cos();
    let u = ct * point.x + st * point.y;
    let y = -st * point.x + ct * point.y;
    let w = point.z;
    PhasePoint { x: c * u - s * w, y, z: s * u + c * w }.normalized()
}

/// `F^n(point)`.
pub fn iterate(point: PhasePoint, params: &ModelParams, n: usize) -> PhasePoint {
    (0..n).fold(point, |x, _| step(x, params))
}

/// Jacobian `dF/dX` of the forward map, evaluated at `point`.
///
/// With `C = (p-1) k w^(p-2)` the twist contributes a rank-one term
/// `(-y', x', 0)^T C (-sin a, 0, cos a)` on top of the two rotations, so
/// `det = 1` everywhere. At `p = 2` the factor `w^0` is taken as 1.
pub fn tangent_map(point: PhasePoint, params: &ModelParams) -> TangentMatrix {
    let (c, s) = (params.cos_alpha(), params.sin_alpha());
    let p = params.p();
    let k = params.k();
    let u = c * point.x + s * point.z;
    let w = -s * point.x + c * point.z;
    let theta = k * ipow(w, p - 1);
    let twist = (p - 1) as f64 * k * ipow(w, p - 2);
    let (st, ct) = theta.sin_cos();
    let x_next = ct * u - st * point.y;
    let y_next = st * u + ct * point.y;
    TangentMatrix([
        [ct * c + y_next * twist * s, -st, ct * s - y_next * twist * c],
        [st * c - x_next * twist * s, ct, st * s + x_next * twist * c],
        [-s, 0.0, c],
    ])
}

/// 3x3 real matrix; the tangent map of one or more kicks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentMatrix(pub [[f64; 3]; 3]);

impl TangentMatrix {
    pub const IDENTITY: TangentMatrix =
        TangentMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &TangentMatrix) -> TangentMatrix {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..3).map(|l| self.0[i][l] * rhs.0[l][j]).sum();
            }
        }
        TangentMatrix(out)
    }

    /// The 2x2 block acting on the tangent plane at `point`, in the basis of
    /// [`PhasePoint::tangent_basis`].
    ///
    /// Meaningful when the matrix maps the tangent plane at `point` to
    /// itself, i.e. at fixed points (or, for a product along a periodic
    /// orbit, at its base point).
    pub fn tangent_block(&self, point: PhasePoint) -> [[f64; 2]; 2] {
        let (e1, e2) = point.tangent_basis();
        let basis = [e1, e2];
        let mut block = [[0.0; 2]; 2];
        for (j, ej) in basis.iter().enumerate() {
            let image = PhasePoint::from_array(self.apply(ej.to_array()));
            for (i, ei) in basis.iter().enumerate() {
                block[i][j] = ei.dot(image);
            }
        }
        block
    }
}

/// Eigenvalues of a real 2x2 matrix, larger real part (or positive imaginary
/// part) first.
pub fn block_eigenvalues(block: [[f64; 2]; 2]) -> [Complex64; 2] {
    let [[a, b], [c, d]] = block;
    let half_trace = 0.5 * (a + d);
    // (a - d)^2 + 4bc stays accurate when the block is close to a multiple of I
    let disc = 0.25 * ((a - d) * (a - d) + 4.0 * b * c);
    if disc >= 0.0 {
        let r = disc.sqrt();
        [Complex64::new(half_trace + r, 0.0), Complex64::new(half_trace - r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [Complex64::new(half_trace, r), Complex64::new(half_trace, -r)]
    }
}

/// A finite orbit `points[0], F(points[0]), ..., F^len(points[0])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ModelParams,
    pub points: Vec<PhasePoint>,
}

impl Trajectory {
    /// Iterates `kicks` steps from `start`; the result holds `kicks + 1` points.
    pub fn generate(start: PhasePoint, params: ModelParams, kicks: usize) -> Self {
        let mut points = Vec::with_capacity(kicks + 1);
        let mut x = start;
        points.push(x);
        for _ in 0..kicks {
            x = step(x, &params);
            points.push(x);
        }
        Trajectory { params, points }
    }

    /// Number of kicks.
    pub fn len(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The time-reversal involution `T`.
pub fn involution_t(point: PhasePoint, params: &ModelParams) -> PhasePoint {
    let (c, s) = (params.cos_alpha(), params.sin_alpha());
    PhasePoint { x: -c * point.x - s * point.z, y: point.y, z: -s * point.x + c * point.z }
}

/// The second involution `T~`, a time reversal only for even `p`.
pub fn involution_t_tilde(point: PhasePoint, params: &ModelParams) -> PhasePoint {
    let (c, s) = (params.cos_alpha(), params.sin_alpha());
    PhasePoint { x: c * point.x + s * point.z, y: point.y, z: s * point.x - c * point.z }
}

/// `(x, y, z) -> (-x, y, -z)`.
pub fn rotation_y_pi(point: PhasePoint) -> PhasePoint {
    PhasePoint { x: -point.x, y: point.y, z: -point.z }
}

/// `(x, y, z) -> (x, -y, -z)`.
pub fn rotation_x_pi(point: PhasePoint) -> PhasePoint {
    PhasePoint { x: point.x, y: -point.y, z: -point.z }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Involution {
    T,
    TTilde,
}

/// A great circle through the y axis, `x_coeff * X + z_coeff * Z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreatCircle {
    pub involution: Involution,
    pub x_coeff: f64,
    pub z_coeff: f64,
    /// Set when both coefficients vanish (`T` at `alpha = 0`, `T~` at
    /// `alpha = pi`). The circle itself still exists; [`Self::normal`]
    /// falls back to the equivalent second equation of the fixed-point set.
    pub degenerate: bool,
}

impl GreatCircle {
    /// Unit normal of the plane containing the circle.
    pub fn normal(&self, params: &ModelParams) -> PhasePoint {
        let (c, s) = (params.cos_alpha(), params.sin_alpha());
        let (a, b) = if self.degenerate {
            match self.involution {
                Involution::T => (1.0 + c, s),
                Involution::TTilde => (c - 1.0, s),
            }
        } else {
            (self.x_coeff, self.z_coeff)
        };
        PhasePoint::new(a, 0.0, b).expect("fallback coefficients never both vanish")
    }

    /// Point at angle `t` along the circle, starting from `(0, 1, 0)`.
    pub fn point_at(&self, params: &ModelParams, t: f64) -> PhasePoint {
        let n = self.normal(params);
        // in-plane direction orthogonal to the y axis
        let dir = PhasePoint { x: n.z, y: 0.0, z: -n.x };
        let (st, ct) = t.sin_cos();
        PhasePoint { x: st * dir.x, y: ct, z: st * dir.z }
    }
}

/// The `T`- and `T~`-invariant great circles,
/// `sin(a) X - (cos(a) - 1) Z = 0` and `sin(a) X - (cos(a) + 1) Z = 0`.
pub fn symmetry_curves(params: &ModelParams) -> [GreatCircle; 2] {
    let (c, s) = (params.cos_alpha(), params.sin_alpha());
    let make = |involution, x_coeff: f64, z_coeff: f64| GreatCircle {
        involution,
        x_coeff,
        z_coeff,
        degenerate: x_coeff.hypot(z_coeff) < 1e-12,
    };
    [make(Involution::T, s, -(c - 1.0)), make(Involution::TTilde, s, -(c + 1.0))]
}
