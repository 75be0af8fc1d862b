//! Fixed points, their linear stability, and the local maps around the
//! poles and the period-4 equator orbit.
//!
//! The on-sphere stability of a fixed point is read off the 2x2 block of
//! the tangent map restricted to the tangent plane. Since `det M = 1` and
//! the radial direction carries eigenvalue 1 at a fixed point, the block
//! eigenvalues solve `l^2 - (tr M - 1) l + 1 = 0`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::{block_eigenvalues, step, tangent_map};
use crate::params::ipow;
use crate::{Error, ModelParams, PhasePoint, Result};

/// `| |trace| - 2 |` below this is classified as parabolic.
pub const PARABOLIC_TOLERANCE: f64 = 1e-9;
/// Phase tolerance for flagging an elliptic eigenvalue as a root of unity.
pub const RESONANCE_TOLERANCE: f64 = 1e-6;
/// Largest resonance order that is reported.
pub const MAX_RESONANCE_ORDER: u32 = 12;
/// Fixed-point residual `|F(x) - x|` accepted as a fixed point.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-9;
/// Default bracketing grid for [`find_fixed_points`].
pub const DEFAULT_GRID_RESOLUTION: usize = 2000;
/// Default ceiling of the onset search.
pub const DEFAULT_ONSET_K_MAX: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityKind {
    Elliptic,
    Hyperbolic,
    InversionHyperbolic,
    Parabolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityClass {
    pub kind: StabilityKind,
    /// `l` when an elliptic eigenvalue is `exp(2 pi i q / l)`.
    pub resonance: Option<u32>,
    /// Trace of the 2x2 on-sphere block.
    pub trace: f64,
    /// Effective eccentricity `|trace| / 2`.
    pub eccentricity: f64,
    pub eigenvalues: [Complex64; 2],
}

impl StabilityClass {
    pub fn is_stable(&self) -> bool {
        self.kind == StabilityKind::Elliptic
    }
}

/// Classifies a real 2x2 area-preserving block by its trace.
pub fn classify_block(block: [[f64; 2]; 2]) -> StabilityClass {
    let trace = block[0][0] + block[1][1];
    let eigenvalues = block_eigenvalues(block);
    let kind = if (trace.abs() - 2.0).abs() <= PARABOLIC_TOLERANCE {
        StabilityKind::Parabolic
    } else if trace.abs() < 2.0 {
        StabilityKind::Elliptic
    } else if trace > 2.0 {
        StabilityKind::Hyperbolic
    } else {
        StabilityKind::InversionHyperbolic
    };
    let resonance = match kind {
        StabilityKind::Elliptic => resonance_order(eigenvalues[0].arg().abs()),
        _ => None,
    };
    StabilityClass { kind, resonance, trace, eccentricity: trace.abs() / 2.0, eigenvalues }
}

/// Smallest `l <= MAX_RESONANCE_ORDER` with `phase = 2 pi q / l`, `gcd(q, l) = 1`.
fn resonance_order(phase: f64) -> Option<u32> {
    (3..=MAX_RESONANCE_ORDER).find(|&l| {
        (1..l).any(|q| gcd(q, l) == 1 && (phase - TAU * q as f64 / l as f64).abs() < RESONANCE_TOLERANCE)
    })
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Classifies the fixed point `point` from the on-sphere block of its
/// tangent map.
pub fn classify_fixed_point(point: PhasePoint, params: &ModelParams) -> Result<StabilityClass> {
    let residual = step(point, params).distance(point);
    if residual >= FIXED_POINT_TOLERANCE {
        return Err(Error::NotAFixedPoint { residual });
    }
    Ok(classify_block(tangent_map(point, params).tangent_block(point)))
}

/// `B2^2 - 4 B3` with `B2 = 1 - tr M` and `B3 = 1`: negative iff the fixed
/// point is elliptic. Uses only the full 3x3 trace, no tangent basis.
pub fn stability_discriminant(point: PhasePoint, params: &ModelParams) -> Result<f64> {
    let residual = step(point, params).distance(point);
    if residual >= FIXED_POINT_TOLERANCE {
        return Err(Error::NotAFixedPoint { residual });
    }
    let b2 = 1.0 - tangent_map(point, params).trace();
    Ok(b2 * b2 - 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub point: PhasePoint,
    pub class: StabilityClass,
    pub block_eigenvalues: [Complex64; 2],
}

/// A root of the fixed-point condition whose reconstructed point failed
/// verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectedRoot {
    pub z: f64,
    pub point: PhasePoint,
    /// `| |x| - 1 |` of the reconstructed point.
    pub norm_error: f64,
    /// `|F(x) - x|`, or NaN when the point was already off the sphere.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoints {
    /// Poles first, then nontrivial points sorted by `z`.
    pub records: Vec<FixedPointRecord>,
    pub rejected: Vec<RejectedRoot>,
}

impl FixedPoints {
    pub fn nontrivial(&self) -> &[FixedPointRecord] {
        &self.records[2..]
    }
}

/// The fixed-point condition in `Z`, free of the `cot` singularities:
/// `Z^2 sin^2(a/2) - cos^2(a/2) sin^2(theta/2) (1 - Z^2)`, `theta = k Z^(p-1)`.
///
/// Even in `Z`; nontrivial fixed points sit at its nonzero roots.
pub fn fixed_point_condition(z: f64, params: &ModelParams) -> f64 {
    let half = 0.5 * params.alpha();
    let (sh, ch) = half.sin_cos();
    let theta = params.k() * ipow(z, params.p() - 1);
    let st = (0.5 * theta).sin();
    z * z * sh * sh - ch * ch * st * st * (1.0 - z * z)
}

fn check_nondegenerate(alpha: f64) -> Result<()> {
    let dist = alpha.min(TAU - alpha);
    if dist < 1e-12 {
        return Err(Error::InvalidParameter(
            "alpha = 0 makes the map a pure twist; its fixed points form continuous circles".into(),
        ));
    }
    Ok(())
}

/// Point on the sphere with coordinate `z` satisfying the two linear
/// fixed-point relations `X = -tan(a/2) Z`, `Y = cot(theta/2) tan(a/2) Z`.
fn reconstruct(z: f64, params: &ModelParams) -> PhasePoint {
    let t = (0.5 * params.alpha()).tan();
    let theta = params.k() * ipow(z, params.p() - 1);
    let half = 0.5 * theta;
    PhasePoint::from_unit(-t * z, t * z * half.cos() / half.sin(), z)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All fixed points: the two poles plus every sign change of
/// [`fixed_point_condition`] on a uniform grid over `[-1, 1]`, refined by
/// bisection to `1e-12`.
///
/// Roots whose reconstructed point is off the unit sphere or not fixed by
/// the map within `1e-9` are returned in `rejected` rather than failing.
pub fn find_fixed_points(params: &ModelParams, grid_resolution: usize) -> Result<FixedPoints> {
    if grid_resolution < 100 {
        return Err(Error::InvalidParameter(format!(
            "grid_resolution must be >= 100, got {grid_resolution}"
        )));
    }
    check_nondegenerate(params.alpha())?;

    let mut records = Vec::new();
    for pole in [PhasePoint::north_pole(), PhasePoint::south_pole()] {
        let class = classify_fixed_point(pole, params)?;
        records.push(FixedPointRecord { point: pole, class, block_eigenvalues: class.eigenvalues });
    }

    let f = |z: f64| fixed_point_condition(z, params);
    let n = grid_resolution;
    let grid = |i: usize| -1.0 + 2.0 * i as f64 / n as f64;
    let mut roots = Vec::new();
    let mut prev = f(grid(0));
    for i in 1..=n {
        let z = grid(i);
        let cur = f(z);
        if cur == 0.0 {
            roots.push(z);
        } else if prev != 0.0 && (prev < 0.0) != (cur < 0.0) {
            roots.push(bisect(f, grid(i - 1), z, 1e-12));
        }
        prev = cur;
    }

    let mut rejected = Vec::new();
    for z in roots.into_iter().filter(|z| z.abs() > 1e-8) {
        let point = reconstruct(z, params);
        let norm_error = (point.norm() - 1.0).abs();
        if !(norm_error < FIXED_POINT_TOLERANCE) {
            rejected.push(RejectedRoot { z, point, norm_error, residual: f64::NAN });
            continue;
        }
        let point = point.normalized();
        match classify_fixed_point(point, params) {
            Ok(class) => {
                records.push(FixedPointRecord { point, class, block_eigenvalues: class.eigenvalues })
            }
            Err(Error::NotAFixedPoint { residual }) => {
                rejected.push(RejectedRoot { z, point, norm_error, residual })
            }
            Err(other) => return Err(other),
        }
    }
    Ok(FixedPoints { records, rejected })
}

/// Smallest `k` at which nontrivial fixed points exist, or `None` below `k_max`.
///
/// Existence is tested as a negative value of [`fixed_point_condition`] on a
/// fine grid over `(0, 1]` (the condition is positive at `Z = 1`). The first
/// `k` on a 0.01 step with a root is refined by bisection to 1e-4.
pub fn onset_of_new_fixed_points(p: u32, alpha: f64, k_max: f64) -> Result<Option<f64>> {
    let base = ModelParams::new(p, 0.0, alpha)?;
    check_nondegenerate(base.alpha())?;
    const GRID: usize = 20_000;
    let has_root = |k: f64| -> Result<bool> {
        let params = base.with_k(k)?;
        Ok((1..=GRID).any(|i| fixed_point_condition(i as f64 / GRID as f64, &params) < 0.0))
    };
    const K_STEP: f64 = 0.01;
    let steps = (k_max / K_STEP).ceil() as usize;
    let mut lo = 0.0;
    for i in 1..=steps {
        let k = (i as f64 * K_STEP).min(k_max);
        if has_root(k)? {
            let mut hi = k;
            while hi - lo > 1e-4 {
                let mid = 0.5 * (lo + hi);
                if has_root(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        lo = k;
    }
    Ok(None)
}

/// The period-4 orbit `(1,0,0) -> (0,0,-1) -> (-1,0,0) -> (0,0,1)` at `alpha = pi/2`.
pub fn equator_orbit() -> [PhasePoint; 4] {
    [
        PhasePoint::from_unit(1.0, 0.0, 0.0),
        PhasePoint::from_unit(0.0, 0.0, -1.0),
        PhasePoint::from_unit(-1.0, 0.0, 0.0),
        PhasePoint::from_unit(0.0, 0.0, 1.0),
    ]
}

/// Eigenvalues of the four-step tangent map of the equator orbit at
/// `alpha = pi/2`, as `(M+, M-)`.
///
/// Odd `p`: the block is the identity. Even `p > 2`: a rotation, `exp(-+2ik)`.
/// `p = 2`: real-trace pair with trace `(2 cos k + k sin k)^2 - 2`.
pub fn equator_orbit_eigenvalues(k: f64, p: u32) -> Result<[Complex64; 2]> {
    ModelParams::new(p, k, PI / 2.0)?;
    if p % 2 == 1 {
        return Ok([Complex64::new(1.0, 0.0); 2]);
    }
    if p > 2 {
        return Ok([Complex64::from_polar(1.0, -2.0 * k), Complex64::from_polar(1.0, 2.0 * k)]);
    }
    let a = 2.0 * k.cos() + k * k.sin();
    let trace = a * a - 2.0;
    let disc = 0.25 * trace * trace - 1.0;
    Ok(if disc >= 0.0 {
        let r = disc.sqrt();
        [Complex64::new(0.5 * trace + r, 0.0), Complex64::new(0.5 * trace - r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [Complex64::new(0.5 * trace, -r), Complex64::new(0.5 * trace, r)]
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationAngle {
    pub q: u32,
    pub l: u32,
    pub alpha: f64,
}

/// Angles `2 pi q / l` in `(0, pi]` at which an elliptic pole with
/// eigenvalues `exp(+-i alpha)` passes an `l`-th root of unity.
pub fn pole_bifurcation_alphas(l_max: u32) -> Result<Vec<BifurcationAngle>> {
    if l_max < 3 {
        return Err(Error::InvalidParameter(format!("l_max must be >= 3, got {l_max}")));
    }
    let mut out = Vec::new();
    for l in 3..=l_max {
        for q in (1..l).filter(|&q| 2 * q <= l && gcd(q, l) == 1) {
            out.push(BifurcationAngle { q, l, alpha: TAU * q as f64 / l as f64 });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pole {
    North,
    South,
}

/// Area-preserving polynomial map around a pole in coordinates `(dX, dZ)`:
///
/// ```text
/// dX' = sin(a) dZ + cos(a) (dX - k dZ^(p-1))
/// dZ' = cos(a) dZ - sin(a) (dX - k dZ^(p-1))
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalMap2D {
    pub p: u32,
    /// Kick strength with the pole's sign folded in.
    pub k: f64,
    pub alpha: f64,
}

impl LocalMap2D {
    pub fn apply(&self, dx: f64, dz: f64) -> (f64, f64) {
        let (s, c) = self.alpha.sin_cos();
        let sheared = dx - self.k * ipow(dz, self.p - 1);
        (s * dz + c * sheared, c * dz - s * sheared)
    }

    /// Jacobian `d(dX', dZ') / d(dX, dZ)`.
    pub fn jacobian(&self, dx: f64, dz: f64) -> [[f64; 2]; 2] {
        let _ = dx;
        let (s, c) = self.alpha.sin_cos();
        let shear = self.k * (self.p - 1) as f64 * ipow(dz, self.p - 2);
        [[c, s - c * shear], [-s, c + s * shear]]
    }

    /// Polynomial degree in `dZ`.
    pub fn degree(&self) -> u32 {
        (self.p - 1).max(1)
    }
}

/// The local map around a pole. The south pole uses `k -> -k` for even `p`
/// and coincides with the north pole for odd `p`.
pub fn pole_local_map(params: &ModelParams, pole: Pole) -> LocalMap2D {
    let k = match pole {
        Pole::South if params.is_even() => -params.k(),
        _ => params.k(),
    };
    LocalMap2D { p: params.p(), k, alpha: params.alpha() }
}

/// Fixed points of the local pole map shed near a 1-to-4 bifurcation, for
/// detuning `gamma`: `dZ = ((4g + 9g^3)/k)^(1/(p-2))`,
/// `dX = g k dZ^(p-1) - 3/2 g^2 dZ`.
///
/// `None` when `p = 2`, `k <= 0`, or the radicand is negative under an even root.
pub fn bifurcated_orbit_positions(p: u32, k: f64, gamma: f64) -> Option<(f64, f64)> {
    if p <= 2 || !(k > 0.0) || !gamma.is_finite() {
        return None;
    }
    let radicand = (4.0 * gamma + 9.0 * gamma.powi(3)) / k;
    let order = p - 2;
    let dz = if order % 2 == 0 {
        if radicand < 0.0 {
            return None;
        }
        radicand.powf(1.0 / order as f64)
    } else {
        radicand.signum() * radicand.abs().powf(1.0 / order as f64)
    };
    let dx = gamma * k * ipow(dz, p - 1) - 1.5 * gamma * gamma * dz;
    Some((dx, dz))
}

/// Trace of the local four-step map of the odd-`p` equator orbit,
/// `2 [1 + (2g^2 - (1 - 2g^2)(1 - g^2) cos^2 k)^2 / 8]`.
pub fn equator_orbit_local_trace(p: u32, k: f64, gamma: f64) -> Result<f64> {
    if p % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "the equator-orbit local trace applies to odd p only, got p = {p}"
        )));
    }
    let g2 = gamma * gamma;
    let inner = 2.0 * g2 - (1.0 - 2.0 * g2) * (1.0 - g2) * k.cos().powi(2);
    Ok(2.0 * (1.0 + inner * inner / 8.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn params(p: u32, k: f64, alpha: f64) -> ModelParams {
        ModelParams::new(p, k, alpha).unwrap()
    }

    #[test]
    fn p2_below_two_has_only_poles() {
        let fps = find_fixed_points(&params(2, 1.5, FRAC_PI_2), 2000).unwrap();
        assert_eq!(fps.records.len(), 2);
        assert!(fps.rejected.is_empty());
    }

    #[test]
    fn p2_above_two_has_two_more() {
        let fps = find_fixed_points(&params(2, 2.5, FRAC_PI_2), 2000).unwrap();
        assert_eq!(fps.nontrivial().len(), 2, "{fps:?}");
    }

    #[test]
    fn p3_at_five_has_four_more() {
        let pars = params(3, 5.0, FRAC_PI_2);
        let fps = find_fixed_points(&pars, 2000).unwrap();
        assert_eq!(fps.nontrivial().len(), 4, "{fps:?}");
        for rec in &fps.records {
            assert!(step(rec.point, &pars).distance(rec.point) < 1e-9);
        }
    }

    #[test]
    fn rejects_small_grid_and_zero_alpha() {
        assert!(find_fixed_points(&params(2, 1.0, 1.0), 99).is_err());
        assert!(find_fixed_points(&params(2, 1.0, 0.0), 2000).is_err());
    }

    #[test]
    fn onsets_at_quarter_turn() {
        let p2 = onset_of_new_fixed_points(2, FRAC_PI_2, 50.0).unwrap().unwrap();
        assert!((p2 - 2.0).abs() < 1e-3, "{p2}");
        let p3 = onset_of_new_fixed_points(3, FRAC_PI_2, 50.0).unwrap().unwrap();
        assert!((p3 - 4.7).abs() < 0.1, "{p3}");
    }

    #[test]
    fn onset_none_below_small_ceiling() {
        assert_eq!(onset_of_new_fixed_points(3, FRAC_PI_2, 3.0).unwrap(), None);
    }

    #[test]
    fn p2_pole_classes() {
        let north = PhasePoint::north_pole();
        let south = PhasePoint::south_pole();
        let c = classify_fixed_point(north, &params(2, 1.0, FRAC_PI_2)).unwrap();
        assert_eq!(c.kind, StabilityKind::Elliptic);
        let c = classify_fixed_point(north, &params(2, 2.0, FRAC_PI_2)).unwrap();
        assert_eq!(c.kind, StabilityKind::Parabolic);
        let c = classify_fixed_point(north, &params(2, 2.5, FRAC_PI_2)).unwrap();
        assert_eq!(c.kind, StabilityKind::Hyperbolic);
        let c = classify_fixed_point(south, &params(2, 2.5, FRAC_PI_2)).unwrap();
        assert_eq!(c.kind, StabilityKind::InversionHyperbolic);
    }

    #[test]
    fn p3_pole_is_fourth_root_resonance() {
        let c = classify_fixed_point(PhasePoint::north_pole(), &params(3, 2.0, FRAC_PI_2)).unwrap();
        assert_eq!(c.kind, StabilityKind::Elliptic);
        assert_eq!(c.resonance, Some(4));
    }

    #[test]
    fn higher_p_poles_rotate_by_alpha() {
        let alpha = 1.0;
        for p in 3..=6 {
            let c = classify_fixed_point(PhasePoint::north_pole(), &params(p, 3.3, alpha)).unwrap();
            assert_eq!(c.kind, StabilityKind::Elliptic);
            assert!((c.eigenvalues[0] - Complex64::from_polar(1.0, alpha)).norm() < 1e-12);
            assert_eq!(c.resonance, None);
        }
    }

    #[test]
    fn classify_rejects_non_fixed_point() {
        let err = classify_fixed_point(PhasePoint::from_unit(1.0, 0.0, 0.0), &params(2, 1.0, 1.0));
        assert!(matches!(err, Err(Error::NotAFixedPoint { .. })));
    }

    #[test]
    fn discriminant_agrees_with_block_at_nontrivial_points() {
        let pars = params(3, 6.0, 1.2);
        let fps = find_fixed_points(&pars, 2000).unwrap();
        assert!(fps.nontrivial().len() >= 2);
        for rec in &fps.records {
            let disc = stability_discriminant(rec.point, &pars).unwrap();
            let t = rec.class.trace;
            assert!((disc - (t * t - 4.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn equator_eigenvalue_examples() {
        assert_eq!(equator_orbit_eigenvalues(0.7, 3).unwrap(), [Complex64::new(1.0, 0.0); 2]);
        let ev = equator_orbit_eigenvalues(PI / 4.0, 4).unwrap();
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let ev = equator_orbit_eigenvalues(FRAC_PI_2, 4).unwrap();
        assert!((ev[0] + 1.0).norm() < 1e-15 && (ev[1] + 1.0).norm() < 1e-15);
    }

    #[test]
    fn bifurcation_angle_lists() {
        let four = pole_bifurcation_alphas(4).unwrap();
        assert!(four.iter().any(|b| (b.q, b.l) == (1, 3) && (b.alpha - TAU / 3.0).abs() < 1e-15));
        assert!(four.iter().any(|b| (b.q, b.l) == (1, 4) && (b.alpha - FRAC_PI_2).abs() < 1e-15));
        let three = pole_bifurcation_alphas(3).unwrap();
        assert_eq!(three.len(), 1);
        assert!(pole_bifurcation_alphas(2).is_err());
        for b in pole_bifurcation_alphas(12).unwrap() {
            assert_eq!(gcd(b.q, b.l), 1);
            assert!(b.alpha > 0.0 && b.alpha <= PI + 1e-15);
        }
    }

    #[test]
    fn local_map_shapes() {
        let pars = params(4, 1.3, 0.9);
        let north = pole_local_map(&pars, Pole::North);
        let south = pole_local_map(&pars, Pole::South);
        assert_eq!(north.degree(), 3);
        assert_eq!(south.k, -1.3);
        let odd = params(3, 1.3, 0.9);
        assert_eq!(pole_local_map(&odd, Pole::South), pole_local_map(&odd, Pole::North));
        assert_eq!(pole_local_map(&odd, Pole::North).degree(), 2);
    }

    #[test]
    fn local_map_linearization_rotates_by_alpha() {
        for p in 3..=5 {
            let map = pole_local_map(&params(p, 2.0, 0.8), Pole::North);
            let j = map.jacobian(0.0, 0.0);
            let ev = block_eigenvalues(j);
            assert!((ev[0] - Complex64::from_polar(1.0, 0.8)).norm() < 1e-12);
            assert!((j[0][0] * j[1][1] - j[0][1] * j[1][0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bifurcated_positions() {
        let (_, dz) = bifurcated_orbit_positions(3, 1.0, 0.01).unwrap();
        assert!((dz - 0.040009).abs() < 1e-12);
        let (dx, dz) = bifurcated_orbit_positions(3, 1.0, 0.0).unwrap();
        assert_eq!((dx, dz), (0.0, 0.0));
        assert_eq!(bifurcated_orbit_positions(4, 1.0, -0.01), None);
        assert!(bifurcated_orbit_positions(4, 1.0, 0.01).is_some());
        assert_eq!(bifurcated_orbit_positions(2, 1.0, 0.01), None);
    }

    #[test]
    fn equator_local_trace_values() {
        assert!((equator_orbit_local_trace(3, FRAC_PI_2, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((equator_orbit_local_trace(3, 0.0, 0.0).unwrap() - 2.25).abs() < 1e-15);
        assert!(equator_orbit_local_trace(4, 1.0, 0.0).is_err());
    }
}
