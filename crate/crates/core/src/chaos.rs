//! Chaos diagnostics of the classical map: Lyapunov exponents, the chaotic
//! area from recurrence times, and the phase-portrait similarity measure.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{step, tangent_map};
use crate::{Error, ModelParams, PhasePoint, Result};

/// Transient discarded by default before accumulating stretching rates.
pub const DEFAULT_TRANSIENT: usize = 1_000;
/// Number of Fibonacci seeds maximized over by [`lyapunov_max_over_seeds`].
pub const DEFAULT_SEED_COUNT: usize = 8;
/// Recurrence ball radius (chord distance).
pub const DEFAULT_D_MIN: f64 = 6e-2;
/// Spread of the last tenth of the convergence history above which a run is
/// flagged as not converged.
pub const CONVERGENCE_SPREAD: f64 = 1e-3;

/// Recurrence horizons `120, 121, ..., 140`.
pub fn default_t_max_list() -> Vec<usize> {
    (120..=140).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    /// Largest exponent per kick.
    pub value: f64,
    /// All three exponents of the full frame, largest first. They sum to
    /// zero up to rounding since `det M = 1`.
    pub exponents: [f64; 3],
    pub n_steps: usize,
    pub transient_discarded: usize,
    pub seed: PhasePoint,
    /// Running estimate sampled every `n_steps / 100` steps.
    pub convergence_history: Vec<f64>,
    pub converged: bool,
}

type Frame = [[f64; 3]; 3];

/// Modified Gram-Schmidt on the columns of `a`; returns `Q` and `diag(R)`.
fn orthonormalize(a: Frame) -> (Frame, [f64; 3]) {
    let col = |m: &Frame, j: usize| [m[0][j], m[1][j], m[2][j]];
    let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let mut q = [[0.0; 3]; 3];
    let mut diag = [0.0; 3];
    let mut basis: Vec<[f64; 3]> = Vec::with_capacity(3);
    for (j, d) in diag.iter_mut().enumerate() {
        let mut v = col(&a, j);
        for b in &basis {
            let r = dot(*b, v);
            for i in 0..3 {
                v[i] -= r * b[i];
            }
        }
        let norm = dot(v, v).sqrt();
        *d = norm;
        let unit = [v[0] / norm, v[1] / norm, v[2] / norm];
        for i in 0..3 {
            q[i][j] = unit[i];
        }
        basis.push(unit);
    }
    (q, diag)
}

fn matmul(m: &Frame, q: &Frame) -> Frame {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = m[i][0] * q[0][j] + m[i][1] * q[1][j] + m[i][2] * q[2][j];
        }
    }
    out
}

struct QrRun {
    sums: [f64; 3],
    history: Vec<f64>,
}

fn qr_run(params: &ModelParams, seed: PhasePoint, n_steps: usize, n_transient: usize) -> QrRun {
    let mut x = seed.normalized();
    let mut frame: Frame = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..n_transient {
        let (q, _) = orthonormalize(matmul(&tangent_map(x, params).0, &frame));
        frame = q;
        x = step(x, params);
    }
    let every = (n_steps / 100).max(1);
    let mut sums = [0.0; 3];
    let mut history = Vec::with_capacity(n_steps / every + 1);
    for n in 1..=n_steps {
        let (q, diag) = orthonormalize(matmul(&tangent_map(x, params).0, &frame));
        frame = q;
        for (s, d) in sums.iter_mut().zip(diag) {
            *s += d.ln();
        }
        x = step(x, params);
        if n % every == 0 {
            history.push(sums[0] / n as f64);
        }
    }
    QrRun { sums, history }
}

/// Largest Lyapunov exponent by QR re-orthonormalization of the full
/// tangent frame at every step.
pub fn lyapunov_qr(
    params: &ModelParams,
    seed: PhasePoint,
    n_steps: usize,
    n_transient: usize,
) -> Result<LyapunovResult> {
    if n_steps < 10_000 {
        return Err(Error::InvalidParameter(format!("n_steps must be >= 10^4, got {n_steps}")));
    }
    let run = qr_run(params, seed, n_steps, n_transient);
    let n = n_steps as f64;
    let exponents = [run.sums[0] / n, run.sums[1] / n, run.sums[2] / n];
    let tail = &run.history[run.history.len() - (run.history.len() / 10).max(1)..];
    let spread = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(LyapunovResult {
        value: exponents[0],
        exponents,
        n_steps,
        transient_discarded: n_transient,
        seed,
        convergence_history: run.history,
        converged: spread <= CONVERGENCE_SPREAD,
    })
}

/// [`lyapunov_qr`] from each seed; the result with the largest exponent.
pub fn lyapunov_max_over_seeds(
    params: &ModelParams,
    seeds: &[PhasePoint],
    n_steps: usize,
    n_transient: usize,
) -> Result<LyapunovResult> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("at least one seed is required".into()));
    }
    let runs: Vec<LyapunovResult> = seeds
        .par_iter()
        .map(|&seed| lyapunov_qr(params, seed, n_steps, n_transient))
        .collect::<Result<_>>()?;
    // first maximum wins so the choice is independent of scheduling
    let mut best = runs[0].clone();
    for run in runs.into_iter().skip(1) {
        if run.value > best.value {
            best = run;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticLyapunov {
    pub value: f64,
    /// False where the large-`k` estimate does not apply.
    pub valid: bool,
}

/// Large-`k` estimate `ln[(p-1) sin(a) k] - (p-1)`. Returns 0 flagged
/// invalid when `(p-1) sin(a) k <= e^(p-1)`.
pub fn lyapunov_analytic(params: &ModelParams) -> AnalyticLyapunov {
    let pm1 = (params.p() - 1) as f64;
    let arg = pm1 * params.sin_alpha() * params.k();
    if arg <= pm1.exp() {
        AnalyticLyapunov { value: 0.0, valid: false }
    } else {
        AnalyticLyapunov { value: arg.ln() - pm1, valid: true }
    }
}

/// Finite-time largest exponent for each starting point, no transient.
pub fn local_lyapunov_field(
    params: &ModelParams,
    points: &[PhasePoint],
    n_steps: usize,
) -> Result<Vec<f64>> {
    if n_steps < 100 {
        return Err(Error::InvalidParameter(format!("n_steps must be >= 100, got {n_steps}")));
    }
    Ok(points
        .par_iter()
        .map(|&x| qr_run(params, x, n_steps, 0).sums[0] / n_steps as f64)
        .collect())
}

/// `n` nearly uniform points: `z_i = 1 - (2i + 1)/n`, azimuth `2 pi frac(i / phi)`.
pub fn fibonacci_sphere(n: usize) -> Vec<PhasePoint> {
    let golden = 0.5 * (1.0 + 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = std::f64::consts::TAU * (i as f64 / golden).fract();
            PhasePoint::from_unit(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// [`fibonacci_sphere`] rigidly rotated by a rotation drawn from `rng_seed`
/// (uniform unit quaternion). Distinct seeds give distinct seed sets with the
/// same spacing.
pub fn rotated_fibonacci_seeds(n: usize, rng_seed: u64) -> Vec<PhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut q = [0.0f64; 4];
    loop {
        for c in q.iter_mut() {
            *c = StandardNormal.sample(&mut rng);
        }
        let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-6 {
            q.iter_mut().for_each(|c| *c /= norm);
            break;
        }
    }
    let [w, x, y, z] = q;
    let rot = [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ];
    fibonacci_sphere(n)
        .into_iter()
        .map(|p| {
            let v = p.to_array();
            let r = |row: [f64; 3]| row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
            PhasePoint::from_unit(r(rot[0]), r(rot[1]), r(rot[2])).normalized()
        })
        .collect()
}

/// First `t` in `1..=t_max` with `|F^t(x) - x| < d_min`.
pub fn first_recurrence_time(
    params: &ModelParams,
    start: PhasePoint,
    d_min: f64,
    t_max: usize,
) -> Option<usize> {
    let mut x = start;
    for t in 1..=t_max {
        x = step(x, params);
        if x.distance(start) < d_min {
            return Some(t);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaResult {
    /// Chaotic area in steradians, `4 pi <n_escaped> / n_tot`.
    pub area: f64,
    /// Escape count averaged over the horizons.
    pub n_escaped: f64,
    pub escaped_per_t_max: Vec<usize>,
    pub n_tot: usize,
    pub d_min: f64,
    pub t_max_set: Vec<usize>,
}

impl AreaResult {
    pub fn regular_area(&self) -> f64 {
        4.0 * std::f64::consts::PI - self.area
    }

    /// Chaotic fraction of the sphere.
    pub fn fraction(&self) -> f64 {
        self.n_escaped / self.n_tot as f64
    }
}

/// Chaotic area from first recurrence times of `n_tot` Fibonacci initial
/// conditions: a point is escaped for horizon `t_max` if it does not return
/// within chord distance `d_min` by then.
pub fn chaotic_area(
    params: &ModelParams,
    n_tot: usize,
    d_min: f64,
    t_max_list: &[usize],
) -> Result<AreaResult> {
    if n_tot < 1000 {
        return Err(Error::InvalidParameter(format!("n_tot must be >= 1000, got {n_tot}")));
    }
    if !(d_min > 0.0) {
        return Err(Error::InvalidParameter(format!("d_min must be positive, got {d_min}")));
    }
    let horizon = *t_max_list
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidParameter("t_max list is empty".into()))?;
    let times: Vec<Option<usize>> = fibonacci_sphere(n_tot)
        .par_iter()
        .map(|&x| first_recurrence_time(params, x, d_min, horizon))
        .collect();
    let escaped_per_t_max: Vec<usize> = t_max_list
        .iter()
        .map(|&t_max| times.iter().filter(|t| t.is_none_or(|t| t > t_max)).count())
        .collect();
    let n_escaped =
        escaped_per_t_max.iter().sum::<usize>() as f64 / escaped_per_t_max.len() as f64;
    Ok(AreaResult {
        area: 4.0 * std::f64::consts::PI * n_escaped / n_tot as f64,
        n_escaped,
        escaped_per_t_max,
        n_tot,
        d_min,
        t_max_set: t_max_list.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityResult {
    /// Mean of the per-trajectory similarity; `None` if every trajectory was
    /// excluded.
    pub mean: Option<f64>,
    pub n_tot: usize,
    /// Trajectories dropped for a constant component.
    pub n_excluded: usize,
    pub kicks: usize,
    pub params: ModelParams,
    pub perturbed: ModelParams,
}

/// Sample variance below which a component series counts as constant.
const MIN_VARIANCE: f64 = 1e-20;

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Pearson correlation, `None` if either series is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let (ma, va) = mean_and_var(a);
    let (mb, vb) = mean_and_var(b);
    if va < MIN_VARIANCE || vb < MIN_VARIANCE {
        return None;
    }
    let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / a.len() as f64;
    Some(cov / (va * vb).sqrt())
}

fn components(start: PhasePoint, params: &ModelParams, kicks: usize) -> [Vec<f64>; 3] {
    let mut out = [Vec::with_capacity(kicks), Vec::with_capacity(kicks), Vec::with_capacity(kicks)];
    let mut x = start;
    for _ in 0..kicks {
        x = step(x, params);
        out[0].push(x.x);
        out[1].push(x.y);
        out[2].push(x.z);
    }
    out
}

/// Similarity of one trajectory under two parameter sets: the product of the
/// Pearson correlations of the three component series over kicks `1..=kicks`.
pub fn trajectory_similarity(
    start: PhasePoint,
    params: &ModelParams,
    perturbed: &ModelParams,
    kicks: usize,
) -> Option<f64> {
    let a = components(start, params, kicks);
    let b = components(start, perturbed, kicks);
    let mut product = 1.0;
    for (u, v) in a.iter().zip(&b) {
        product *= pearson(u, v)?;
    }
    Some(product)
}

/// Average similarity of the portraits at `params` and at `(k + d_k, alpha + d_alpha)`
/// over `n_tot` Fibonacci initial conditions.
pub fn phase_space_similarity(
    params: &ModelParams,
    d_alpha: f64,
    d_k: f64,
    n_tot: usize,
    kicks: usize,
) -> Result<SimilarityResult> {
    if n_tot < 100 {
        return Err(Error::InvalidParameter(format!("n_tot must be >= 100, got {n_tot}")));
    }
    if kicks < 10 {
        return Err(Error::InvalidParameter(format!("kicks must be >= 10, got {kicks}")));
    }
    let perturbed = ModelParams::new(params.p(), params.k() + d_k, params.alpha() + d_alpha)?;
    let values: Vec<Option<f64>> = fibonacci_sphere(n_tot)
        .par_iter()
        .map(|&x| trajectory_similarity(x, params, &perturbed, kicks))
        .collect();
    let kept: Vec<f64> = values.iter().flatten().copied().collect();
    let mean = (!kept.is_empty()).then(|| kept.iter().sum::<f64>() / kept.len() as f64);
    Ok(SimilarityResult {
        mean,
        n_tot,
        n_excluded: n_tot - kept.len(),
        kicks,
        params: *params,
        perturbed,
    })
}

/// `alpha` of the smallest defined mean in a similarity curve.
pub fn deepest_minimum(curve: &[SimilarityResult]) -> Option<f64> {
    curve
        .iter()
        .filter_map(|r| r.mean.map(|m| (r.params.alpha(), m)))
        .fold(None, |best: Option<(f64, f64)>, (a, m)| match best {
            Some((_, bm)) if bm <= m => best,
            _ => Some((a, m)),
        })
        .map(|(a, _)| a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn params(p: u32, k: f64, alpha: f64) -> ModelParams {
        ModelParams::new(p, k, alpha).unwrap()
    }

    #[test]
    fn zero_kick_has_zero_exponent() {
        for p in 2..=4 {
            let res = lyapunov_qr(&params(p, 0.0, 1.1), PhasePoint::new(0.3, 0.4, 0.5).unwrap(), 10_000, 100)
                .unwrap();
            assert!(res.value.abs() < 1e-6, "{}", res.value);
            assert!(res.converged);
        }
    }

    #[test]
    fn exponents_sum_to_zero() {
        let res = lyapunov_qr(&params(2, 6.0, FRAC_PI_2), PhasePoint::new(0.3, 0.4, 0.5).unwrap(), 20_000, 100)
            .unwrap();
        assert!(res.exponents.iter().sum::<f64>().abs() < 1e-10);
        assert!(res.value > 0.5);
    }

    #[test]
    fn rejects_short_runs() {
        assert!(lyapunov_qr(&params(2, 1.0, 1.0), PhasePoint::north_pole(), 9_999, 0).is_err());
    }

    #[test]
    fn analytic_examples() {
        let a = lyapunov_analytic(&params(2, 100.0, FRAC_PI_2));
        assert!(a.valid && (a.value - (100f64.ln() - 1.0)).abs() < 1e-12);
        let a = lyapunov_analytic(&params(3, 100.0, FRAC_PI_2));
        assert!(a.valid && (a.value - (200f64.ln() - 2.0)).abs() < 1e-12);
        let a = lyapunov_analytic(&params(3, 100.0, PI));
        assert!(!a.valid && a.value == 0.0);
    }

    #[test]
    fn fibonacci_single_point_and_centroid() {
        let one = fibonacci_sphere(1);
        assert_eq!(one.len(), 1);
        assert!((one[0].norm() - 1.0).abs() < 1e-15);
        let many = fibonacci_sphere(10_000);
        let c = many.iter().fold(PhasePoint::from_unit(0.0, 0.0, 0.0), |a, &b| a + b) * 1e-4;
        assert!(c.norm() < 0.05);
    }

    #[test]
    fn recurrence_of_pure_rotation() {
        // rotation by 2 pi / 8 returns exactly after 8 kicks
        let pars = params(2, 0.0, PI / 4.0);
        let t = first_recurrence_time(&pars, PhasePoint::from_unit(1.0, 0.0, 0.0), 1e-9, 20);
        assert_eq!(t, Some(8));
    }

    #[test]
    fn area_bounds_and_complement() {
        let res = chaotic_area(&params(2, 0.0, 1.0), 1000, 0.06, &[120, 130]).unwrap();
        assert!(res.area >= 0.0 && res.area < 0.05 * 4.0 * PI);
        assert_eq!(res.area + res.regular_area(), 4.0 * PI);
        assert!(chaotic_area(&params(2, 0.0, 1.0), 1000, 0.06, &[]).is_err());
    }

    #[test]
    fn pearson_of_affine_pair() {
        let a: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = a.iter().map(|x| -3.0 * x + 1.0).collect();
        assert!((pearson(&a, &b).unwrap() + 1.0).abs() < 1e-14);
        assert_eq!(pearson(&a, &[2.0; 20]), None);
    }

    #[test]
    fn identical_parameters_give_unit_similarity() {
        let res = phase_space_similarity(&params(3, 1.0, 1.3), 0.0, 0.0, 200, 50).unwrap();
        assert!((res.mean.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_alpha_excludes_every_trajectory() {
        let res = phase_space_similarity(&params(3, 1.0, 0.0), 5e-4, 0.0, 200, 50).unwrap();
        assert_eq!(res.mean, None);
        assert_eq!(res.n_excluded, 200);
    }
}
