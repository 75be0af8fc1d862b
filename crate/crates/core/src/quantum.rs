//! Quantum chaos diagnostics of Floquet operators: adjacent-gap ratios,
//! eigenvector localization, and out-of-time-order correlators.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use ndarray_linalg::{Eigh, QR, UPLO};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::floquet::{
    adjoint, eigenphases, heisenberg_step, max_norm, parity_blocks, x_rotation, FloquetOperator, JyBasis,
    SpectralData, SpinRepresentation, PARITY_TOLERANCE,
};
use crate::{seed, Error, ModelParams, Result};

/// Mean adjacent-gap ratio of uncorrelated levels, `2 ln 2 - 1`.
pub const R_POISSON: f64 = 0.386_294_361_119_890_6;
/// Mean adjacent-gap ratio of the circular orthogonal ensemble.
pub const R_COE: f64 = 0.5307;
/// Spacings below this are treated as exact degeneracies and skipped.
pub const DEGENERATE_SPACING: f64 = 1e-12;
/// Minimum number of usable spacings for ratio statistics.
pub const MIN_SPACINGS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioStatistics {
    pub mean: f64,
    pub ratios: Vec<f64>,
    pub excluded_degenerate: usize,
}

/// Adjacent-gap ratios `min(d_j, d_j+1) / max(d_j, d_j+1)` of phases on the
/// circle. The wrap-around spacing is included, so `n` phases give `n`
/// spacings; spacings below [`DEGENERATE_SPACING`] are dropped and counted.
pub fn mean_adjacent_ratio(phases: &[f64]) -> Result<RatioStatistics> {
    let tau = std::f64::consts::TAU;
    let mut sorted: Vec<f64> = phases.iter().map(|&p| p.rem_euclid(tau)).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let spacings: Vec<f64> = (0..n)
        .map(|i| if i + 1 < n { sorted[i + 1] - sorted[i] } else { sorted[0] + tau - sorted[i] })
        .collect();
    let usable: Vec<f64> = spacings.iter().copied().filter(|&d| d >= DEGENERATE_SPACING).collect();
    let excluded_degenerate = n - usable.len();
    if usable.len() < MIN_SPACINGS {
        return Err(Error::TooFewSpacings { usable: usable.len(), required: MIN_SPACINGS });
    }
    let m = usable.len();
    let ratios: Vec<f64> = (0..m)
        .map(|i| {
            let (a, b) = (usable[i], usable[(i + 1) % m]);
            a.min(b) / a.max(b)
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / m as f64;
    Ok(RatioStatistics { mean, ratios, excluded_degenerate })
}

/// Mean over the union of the ratios of several independent sectors.
pub fn pooled_mean_ratio(sectors: &[RatioStatistics]) -> f64 {
    let total: usize = sectors.iter().map(|s| s.ratios.len()).sum();
    sectors.iter().flat_map(|s| &s.ratios).sum::<f64>() / total as f64
}

/// `(r - R_POISSON) / (R_COE - R_POISSON)`.
pub fn normalized_gamma(r_mean: f64) -> f64 {
    (r_mean - R_POISSON) / (R_COE - R_POISSON)
}

/// Which unitary symmetries are divided out before computing ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryReduction {
    /// Full spectrum, no reduction.
    None,
    /// The two `exp(-i pi Jy)` sectors for even `p`.
    Parity,
    /// Parity, plus `exp(-i pi Jx)` inside the parity-even sector whenever it
    /// commutes there (even `p` at `alpha = pi/2`, even `N_s`).
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumStatistics {
    pub r_mean: f64,
    pub gamma: f64,
    pub n_ratios: usize,
    pub excluded_degenerate: usize,
    /// True when the two parity sectors were analysed separately.
    pub parity_resolved: bool,
    /// True when the parity-even sector was further split by `exp(-i pi Jx)`.
    pub x_resolved: bool,
}

/// Ratio statistics with every applicable symmetry removed: see
/// [`SymmetryReduction::Full`]. Odd `p` uses the full spectrum.
pub fn spectral_statistics(op: &FloquetOperator, basis: &JyBasis) -> Result<SpectrumStatistics> {
    spectral_statistics_with(op, basis, SymmetryReduction::Full)
}

/// Ratio statistics after the requested reduction. Sectors are pooled by
/// concatenating their ratios.
pub fn spectral_statistics_with(
    op: &FloquetOperator,
    basis: &JyBasis,
    reduction: SymmetryReduction,
) -> Result<SpectrumStatistics> {
    let mut blocks = Vec::new();
    let mut parity_resolved = false;
    let mut x_resolved = false;
    if reduction == SymmetryReduction::None || !op.params.is_even() {
        blocks.push(op.matrix.clone());
    } else {
        let sectors = parity_blocks(&op.matrix, basis)?;
        parity_resolved = true;
        let split = match reduction {
            SymmetryReduction::Full => x_parity_split(&sectors.symmetric, basis)?,
            _ => None,
        };
        match split {
            Some((plus, minus)) => {
                x_resolved = true;
                blocks.extend([plus, minus]);
            }
            None => blocks.push(sectors.symmetric),
        }
        blocks.push(sectors.antisymmetric);
    }
    let sectors = blocks
        .iter()
        .map(|b| mean_adjacent_ratio(&eigenphases(b)?))
        .collect::<Result<Vec<_>>>()?;
    let r_mean = pooled_mean_ratio(&sectors);
    Ok(SpectrumStatistics {
        r_mean,
        gamma: normalized_gamma(r_mean),
        n_ratios: sectors.iter().map(|s| s.ratios.len()).sum(),
        excluded_degenerate: sectors.iter().map(|s| s.excluded_degenerate).sum(),
        parity_resolved,
        x_resolved,
    })
}

/// Splits the parity-even block by the eigenspaces of `exp(-i pi Jx)` when
/// that operator is a symmetry of the block. `Jx` rotations by `pi` square to
/// one only for integer `J`, so odd `N_s` is never split.
fn x_parity_split(
    symmetric: &Array2<Complex64>,
    basis: &JyBasis,
) -> Result<Option<(Array2<Complex64>, Array2<Complex64>)>> {
    let rep = basis.rep();
    if rep.n_spins() % 2 == 1 {
        return Ok(None);
    }
    let d = rep.dim();
    let even: Vec<usize> = (0..d).step_by(2).collect();
    let w = basis.vectors().select(Axis(1), &even);
    let rx = adjoint(&w).dot(&x_rotation(rep, std::f64::consts::PI)?).dot(&w);
    if !(max_norm(&(symmetric.dot(&rx) - rx.dot(symmetric))) <= PARITY_TOLERANCE) {
        return Ok(None);
    }
    // rx is Hermitian with eigenvalues +-1 here
    let rx = (&rx + &adjoint(&rx)) * Complex64::new(0.5, 0.0);
    let (values, vectors) = rx.eigh(UPLO::Lower)?;
    let pick = |sign: f64| {
        let cols: Vec<usize> = (0..values.len()).filter(|&i| values[i] * sign > 0.0).collect();
        let q = vectors.select(Axis(1), &cols);
        adjoint(&q).dot(symmetric).dot(&q)
    };
    Ok(Some((pick(1.0), pick(-1.0))))
}

/// Inverse participation ratio `(sum_l |<phi_l|psi>|^4)^-1` of `state` in the
/// orthonormal basis given by the columns of `basis`.
pub fn ipr(state: ArrayView1<Complex64>, basis: &Array2<Complex64>) -> Result<f64> {
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() <= 1e-10) {
        return Err(Error::Unnormalized { norm });
    }
    let coeffs = adjoint(basis).dot(&state);
    Ok(1.0 / coeffs.iter().map(|c| c.norm_sqr().powi(2)).sum::<f64>())
}

/// IPR of every column of `vectors` in the basis `basis`.
pub fn column_iprs(vectors: &Array2<Complex64>, basis: &Array2<Complex64>) -> Vec<f64> {
    let coeffs = adjoint(basis).dot(vectors);
    coeffs
        .columns()
        .into_iter()
        .map(|col| 1.0 / col.iter().map(|c| c.norm_sqr().powi(2)).sum::<f64>())
        .collect()
}

/// Floquet-eigenvector IPR in the `Jy` basis averaged and normalized by the
/// ensemble value `D / 3`.
pub fn floquet_delta(spectral: &SpectralData, basis: &JyBasis) -> f64 {
    let d = basis.rep().dim() as f64;
    let total: f64 = column_iprs(&spectral.vectors, basis.vectors()).iter().sum();
    total / (d / 3.0 * d)
}

/// `C = (2/D)(tr(V^2 W^2) - Re tr(V W V W))` for Hermitian `V`, `W`, which
/// equals `||[W, V]||_F^2 / D`.
pub fn square_commutator(v: &Array2<Complex64>, w: &Array2<Complex64>) -> f64 {
    let vw = v.dot(w);
    let d = vw.nrows();
    let frob: f64 = vw.iter().map(|z| z.norm_sqr()).sum();
    let mut cross = 0.0;
    for i in 0..d {
        for j in 0..d {
            cross += (vw[[i, j]] * vw[[j, i]]).re;
        }
    }
    2.0 / d as f64 * (frob - cross)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtocSeries {
    pub n: Vec<usize>,
    pub c: Vec<f64>,
    /// Ensemble value of `C(1)`, when computed.
    pub c_coe: Option<f64>,
    pub params: ModelParams,
    pub rep: SpinRepresentation,
}

impl OtocSeries {
    /// `C(n) / C_COE`, or `None` without a normalization.
    pub fn normalized(&self) -> Option<Vec<f64>> {
        self.c_coe.map(|norm| self.c.iter().map(|c| c / norm).collect())
    }
}

/// `C(n)` for `n = 0..=n_max` with `W(n) = U^dag^n W U^n`.
pub fn otoc_series(
    op: &FloquetOperator,
    v: &Array2<Complex64>,
    w: &Array2<Complex64>,
    n_max: usize,
) -> Result<OtocSeries> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be >= 1".into()));
    }
    let u = &op.matrix;
    let u_dag = adjoint(u);
    let mut wn = w.clone();
    let mut c = Vec::with_capacity(n_max + 1);
    c.push(square_commutator(v, &wn));
    for _ in 0..n_max {
        wn = heisenberg_step(&wn, u, &u_dag);
        c.push(square_commutator(v, &wn));
    }
    Ok(OtocSeries { n: (0..=n_max).collect(), c, c_coe: None, params: op.params, rep: op.rep })
}

fn complex_gaussian(d: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    Array2::from_shape_simple_fn((d, d), || {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(scale * re, scale * im)
    })
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary(d: usize, rng_seed: u64) -> Result<Array2<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (mut q, r) = complex_gaussian(d, &mut rng).qr()?;
    for (j, mut col) in q.columns_mut().into_iter().enumerate() {
        let rjj = r[[j, j]];
        let phase = rjj / rjj.norm();
        col.mapv_inplace(|z| z * phase);
    }
    Ok(q)
}

/// COE matrix `U_h U_h^T` from a Haar unitary `U_h`.
pub fn coe_sample(d: usize, rng_seed: u64) -> Result<Array2<Complex64>> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("COE dimension must be >= 2, got {d}")));
    }
    let uh = haar_unitary(d, rng_seed)?;
    Ok(uh.dot(&uh.t()))
}

/// Haar-random normalized state.
pub fn haar_state(d: usize, rng_seed: u64) -> Array1<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let v: Array1<Complex64> = Array1::from_shape_simple_fn(d, || {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(scale * re, scale * im)
    });
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv(|z| z / norm)
}

/// Uniform iid phases in `(-pi, pi]`: the uncorrelated reference spectrum.
pub fn poisson_phases(n: usize, rng_seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    (0..n).map(|_| std::f64::consts::PI - rng.random::<f64>() * std::f64::consts::TAU).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeNormalization {
    /// Ensemble mean of `C(1)`.
    pub c_coe: f64,
    /// Analytic ensemble IPR, `D / 3`.
    pub delta_coe: f64,
    /// Sampled mean eigenvector IPR, in the basis in which the samples are
    /// symmetric.
    pub sampled_ipr_mean: f64,
    pub n_samples: usize,
}

/// Ensemble normalizations from `n_samples` COE matrices. Sample `i` uses
/// seed `seed::derive(rng_seed, i, 0)`.
pub fn coe_normalization(
    rep: SpinRepresentation,
    v: &Array2<Complex64>,
    w: &Array2<Complex64>,
    n_samples: usize,
    rng_seed: u64,
) -> Result<CoeNormalization> {
    if n_samples < 10 {
        return Err(Error::InvalidParameter(format!("n_samples must be >= 10, got {n_samples}")));
    }
    let d = rep.dim();
    let identity = Array2::<Complex64>::eye(d);
    let mut c_sum = 0.0;
    let mut ipr_sum = 0.0;
    for i in 0..n_samples {
        let u = coe_sample(d, seed::derive(rng_seed, i as u64, 0))?;
        let w1 = heisenberg_step(w, &u, &adjoint(&u));
        c_sum += square_commutator(v, &w1);
        let spectral = crate::floquet::eigensystem(&u)?;
        let iprs = column_iprs(&spectral.vectors, &identity);
        ipr_sum += iprs.iter().sum::<f64>() / d as f64;
    }
    Ok(CoeNormalization {
        c_coe: c_sum / n_samples as f64,
        delta_coe: d as f64 / 3.0,
        sampled_ipr_mean: ipr_sum / n_samples as f64,
        n_samples,
    })
}

/// Growth-window thresholds for [`fit_quantum_lyapunov`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Window starts where `C > floor_multiplier * floor_epsilon * C(first nonzero)`.
    pub floor_multiplier: f64,
    pub floor_epsilon: f64,
    /// Window ends at the last `n` with `C < saturation_fraction * max C`.
    pub saturation_fraction: f64,
    pub min_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { floor_multiplier: 100.0, floor_epsilon: 0.01, saturation_fraction: 0.2, min_points: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumLyapunovFit {
    /// Slope of `ln C(n)` against `n`.
    pub lambda_q: f64,
    pub intercept: f64,
    pub n_lo: usize,
    pub n_hi: usize,
    /// Root-mean-square residual of the linear fit in `ln C`.
    pub residual: f64,
}

/// Least-squares line through `(x, y)`: `(slope, intercept, rms residual)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Exponential-growth rate of an OTOC series from a linear fit of `ln C(n)`
/// over the window between the noise floor and the onset of saturation.
/// `None` when the window holds fewer than `min_points` points or contains
/// a vanishing value.
pub fn fit_quantum_lyapunov(series: &OtocSeries, opts: &FitOptions) -> Option<QuantumLyapunovFit> {
    let c = &series.c;
    let first_nonzero = c.iter().copied().find(|&x| x > 0.0)?;
    let c_max = c.iter().copied().fold(0.0, f64::max);
    let floor = opts.floor_multiplier * opts.floor_epsilon * first_nonzero;
    let ceiling = opts.saturation_fraction * c_max;
    let n_lo = c.iter().position(|&x| x > floor)?;
    let n_hi = c.iter().rposition(|&x| x < ceiling)?;
    if n_hi < n_lo || n_hi - n_lo + 1 < opts.min_points {
        return None;
    }
    // a window that dips back to zero is not growth
    if c[n_lo..=n_hi].iter().any(|&x| !(x > 0.0)) {
        return None;
    }
    let x: Vec<f64> = (n_lo..=n_hi).map(|n| series.n[n] as f64).collect();
    let y: Vec<f64> = (n_lo..=n_hi).map(|n| c[n].ln()).collect();
    let (lambda_q, intercept, residual) = linear_fit(&x, &y);
    Some(QuantumLyapunovFit { lambda_q, intercept, n_lo: series.n[n_lo], n_hi: series.n[n_hi], residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{spin_operators, unitarity_error};

    #[test]
    fn picket_fence_ratio_is_one() {
        let n = 32;
        let phases: Vec<f64> = (0..n).map(|i| -3.0 + 6.0 * i as f64 / n as f64).collect();
        // wrap spacing differs, so use a full-circle fence
        let fence: Vec<f64> = (0..n).map(|i| std::f64::consts::TAU * i as f64 / n as f64).collect();
        let stats = mean_adjacent_ratio(&fence).unwrap();
        assert!((stats.mean - 1.0).abs() < 1e-12);
        assert!(mean_adjacent_ratio(&phases).unwrap().mean < 1.0);
    }

    #[test]
    fn too_few_spacings() {
        let err = mean_adjacent_ratio(&[0.0, 0.1, 0.2]).unwrap_err();
        assert!(matches!(err, Error::TooFewSpacings { usable: 3, .. }));
    }

    #[test]
    fn degenerate_spacings_are_counted() {
        let mut phases: Vec<f64> = (0..20).map(|i| 0.3 * i as f64).collect();
        phases.push(0.3);
        let stats = mean_adjacent_ratio(&phases).unwrap();
        assert_eq!(stats.excluded_degenerate, 1);
        assert_eq!(stats.ratios.len(), 20);
    }

    #[test]
    fn gamma_fixed_points() {
        assert_eq!(normalized_gamma(R_POISSON), 0.0);
        assert_eq!(normalized_gamma(R_COE), 1.0);
        assert!((R_POISSON - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-16);
    }

    #[test]
    fn ipr_extremes() {
        let d = 8;
        let basis = Array2::<Complex64>::eye(d);
        let mut e0 = Array1::zeros(d);
        e0[0] = Complex64::new(1.0, 0.0);
        assert!((ipr(e0.view(), &basis).unwrap() - 1.0).abs() < 1e-14);
        let flat = Array1::from_elem(d, Complex64::new(1.0 / (d as f64).sqrt(), 0.0));
        assert!((ipr(flat.view(), &basis).unwrap() - d as f64).abs() < 1e-12);
        let bad = Array1::from_elem(d, Complex64::new(1.0, 0.0));
        assert!(matches!(ipr(bad.view(), &basis), Err(Error::Unnormalized { .. })));
    }

    #[test]
    fn coe_sample_is_symmetric_unitary() {
        let u = coe_sample(24, 11).unwrap();
        assert!(unitarity_error(&u) < 1e-12);
        let asym = (&u - &u.t()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        assert!(asym < 1e-12);
        assert_eq!(u, coe_sample(24, 11).unwrap());
    }

    #[test]
    fn otoc_starts_at_zero_for_commuting_operators() {
        let rep = SpinRepresentation::new(8).unwrap();
        let op = crate::floquet::floquet_operator(&ModelParams::new(2, 2.0, 1.0).unwrap(), rep).unwrap();
        let jz = spin_operators(rep).jz;
        let series = otoc_series(&op, &jz, &jz, 5).unwrap();
        assert_eq!(series.c[0], 0.0);
        assert!(series.c[1..].iter().all(|&c| c > 0.0));
    }

    #[test]
    fn linear_fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.7 * v - 2.0).collect();
        let (s, i, r) = linear_fit(&x, &y);
        assert!((s - 0.7).abs() < 1e-12 && (i + 2.0).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn flat_series_has_no_window() {
        let rep = SpinRepresentation::new(4).unwrap();
        let series = OtocSeries {
            n: (0..20).collect(),
            c: vec![0.0; 20],
            c_coe: None,
            params: ModelParams::new(2, 0.0, 1.0).unwrap(),
            rep,
        };
        assert_eq!(fit_quantum_lyapunov(&series, &FitOptions::default()), None);
    }
}
