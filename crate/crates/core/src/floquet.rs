//! Collective spin operators and the kicked p-spin Floquet unitary
//! `U = exp(-i k/(p J^(p-1)) Jz^p) exp(-i alpha Jy)` in the symmetric
//! subspace of `N_s` spin-1/2 particles.
//!
//! Matrices are dense and indexed in the `Jz` eigenbasis ordered
//! `m = J, J-1, ..., -J`.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use ndarray_linalg::{Eig, Eigh, UPLO};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::params::ipow;
use crate::{Error, ModelParams, Result};

/// Spin-`J` irrep with `J = N_s / 2` and dimension `D = N_s + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinRepresentation {
    n_spins: u32,
}

impl SpinRepresentation {
    pub fn new(n_spins: u32) -> Result<Self> {
        if n_spins < 1 {
            return Err(Error::InvalidParameter("N_s must be >= 1".into()));
        }
        Ok(SpinRepresentation { n_spins })
    }

    pub fn n_spins(&self) -> u32 {
        self.n_spins
    }

    pub fn j(&self) -> f64 {
        0.5 * self.n_spins as f64
    }

    pub fn dim(&self) -> usize {
        self.n_spins as usize + 1
    }

    /// `m` for each basis index: `J, J-1, ..., -J`.
    pub fn m_values(&self) -> Vec<f64> {
        let j = self.j();
        (0..self.dim()).map(|i| j - i as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub jx: Array2<Complex64>,
    pub jy: Array2<Complex64>,
    pub jz: Array2<Complex64>,
}

/// `Jx`, `Jy`, `Jz` from the ladder elements `sqrt(J(J+1) - m(m+1))`.
pub fn spin_operators(rep: SpinRepresentation) -> SpinOperators {
    let d = rep.dim();
    let j = rep.j();
    let m = rep.m_values();
    let mut jx = Array2::zeros((d, d));
    let mut jy = Array2::zeros((d, d));
    let mut jz = Array2::zeros((d, d));
    for i in 0..d {
        jz[[i, i]] = Complex64::new(m[i], 0.0);
    }
    // <m+1| J+ |m> sits at (i-1, i)
    for i in 1..d {
        let raise = (j * (j + 1.0) - m[i] * (m[i] + 1.0)).sqrt();
        jx[[i - 1, i]] = Complex64::new(0.5 * raise, 0.0);
        jx[[i, i - 1]] = Complex64::new(0.5 * raise, 0.0);
        jy[[i - 1, i]] = Complex64::new(0.0, -0.5 * raise);
        jy[[i, i - 1]] = Complex64::new(0.0, 0.5 * raise);
    }
    SpinOperators { jx, jy, jz }
}

/// Eigenbasis of `Jy`, used to build rotations about y and as the reference
/// basis for eigenvector localization.
///
/// `Jy = P^dag Jx P` with `P = diag(exp(i m pi/2))`, so the eigenvectors come
/// from the real symmetric tridiagonal `Jx`. The eigenvalues are set to the
/// exact integers or half-integers `-J, ..., J`.
#[derive(Debug, Clone, PartialEq)]
pub struct JyBasis {
    rep: SpinRepresentation,
    eigenvalues: Vec<f64>,
    vectors: Array2<Complex64>,
}

impl JyBasis {
    pub fn new(rep: SpinRepresentation) -> Result<Self> {
        let d = rep.dim();
        let m = rep.m_values();
        let j = rep.j();
        let mut jx = Array2::<f64>::zeros((d, d));
        for i in 1..d {
            let raise = 0.5 * (j * (j + 1.0) - m[i] * (m[i] + 1.0)).sqrt();
            jx[[i - 1, i]] = raise;
            jx[[i, i - 1]] = raise;
        }
        let (_, v) = jx.eigh(UPLO::Lower)?;
        let mut vectors = Array2::<Complex64>::zeros((d, d));
        for r in 0..d {
            let phase = Complex64::from_polar(1.0, -m[r] * PI / 2.0);
            for c in 0..d {
                vectors[[r, c]] = phase * v[[r, c]];
            }
        }
        let eigenvalues = (0..d).map(|c| -j + c as f64).collect();
        Ok(JyBasis { rep, eigenvalues, vectors })
    }

    pub fn rep(&self) -> SpinRepresentation {
        self.rep
    }

    /// Ascending `Jy` eigenvalues `-J, ..., J`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `c` is the eigenvector with eigenvalue `eigenvalues()[c]`.
    pub fn vectors(&self) -> &Array2<Complex64> {
        &self.vectors
    }

    /// `exp(-i angle Jy)`.
    pub fn rotation(&self, angle: f64) -> Array2<Complex64> {
        let phases: Vec<Complex64> =
            self.eigenvalues.iter().map(|&m| Complex64::from_polar(1.0, -angle * m)).collect();
        let mut scaled = self.vectors.clone();
        for (mut col, ph) in scaled.axis_iter_mut(Axis(1)).zip(&phases) {
            col.mapv_inplace(|z| z * ph);
        }
        scaled.dot(&adjoint(&self.vectors))
    }
}

/// Conjugate transpose.
pub fn adjoint(a: &Array2<Complex64>) -> Array2<Complex64> {
    a.t().mapv(|z| z.conj())
}

/// Largest entry modulus.
pub fn max_norm(a: &Array2<Complex64>) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |U^dag U - I|`.
pub fn unitarity_error(u: &Array2<Complex64>) -> f64 {
    let mut prod = adjoint(u).dot(u);
    for i in 0..prod.nrows() {
        prod[[i, i]] -= 1.0;
    }
    max_norm(&prod)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetOperator {
    pub matrix: Array2<Complex64>,
    pub params: ModelParams,
    pub rep: SpinRepresentation,
}

/// Diagonal of the kick `exp(-i k/(p J^(p-1)) m^p)`.
pub fn kick_diagonal(params: &ModelParams, rep: SpinRepresentation) -> Vec<Complex64> {
    let p = params.p();
    let scale = params.k() / (p as f64 * ipow(rep.j(), p - 1));
    rep.m_values()
        .into_iter()
        .map(|m| Complex64::from_polar(1.0, -scale * ipow(m, p)))
        .collect()
}

/// Builds Floquet operators for one spin size, reusing the `Jy` eigenbasis
/// across parameters.
#[derive(Debug, Clone)]
pub struct FloquetBuilder {
    basis: JyBasis,
}

impl FloquetBuilder {
    pub fn new(rep: SpinRepresentation) -> Result<Self> {
        Ok(FloquetBuilder { basis: JyBasis::new(rep)? })
    }

    pub fn basis(&self) -> &JyBasis {
        &self.basis
    }

    pub fn build(&self, params: &ModelParams) -> FloquetOperator {
        let rep = self.basis.rep();
        let mut matrix = self.basis.rotation(params.alpha());
        for (mut row, kick) in matrix.axis_iter_mut(Axis(0)).zip(kick_diagonal(params, rep)) {
            row.mapv_inplace(|z| z * kick);
        }
        FloquetOperator { matrix, params: *params, rep }
    }
}

pub fn floquet_operator(params: &ModelParams, rep: SpinRepresentation) -> Result<FloquetOperator> {
    Ok(FloquetBuilder::new(rep)?.build(params))
}

/// Eigenphases `mu_j` in `(-pi, pi]`, ascending, with `U v_j = exp(-i mu_j) v_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub phases: Vec<f64>,
    /// Column `j` pairs with `phases[j]`.
    pub vectors: Array2<Complex64>,
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let mut x = phase.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// Eigenphase of a unimodular eigenvalue under the `exp(-i mu)` convention.
pub fn eigenphase(lambda: Complex64) -> f64 {
    wrap_phase(-lambda.arg())
}

/// Phases closer than this (on the circle) are treated as degenerate and
/// their eigenvectors re-orthonormalized.
const DEGENERACY_TOLERANCE: f64 = 1e-9;
/// Largest accepted `|U v - exp(-i mu) v|`.
pub const EIGEN_RESIDUAL_TOLERANCE: f64 = 1e-6;

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(2.0 * PI - d)
}

/// Groups sorted phases into runs of near-equal values, joining the first
/// and last runs across the branch cut.
fn degenerate_clusters(phases: &[f64]) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, &ph) in phases.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if circular_distance(phases[*c.last().unwrap()], ph) < DEGENERACY_TOLERANCE => {
                c.push(i)
            }
            _ => clusters.push(vec![i]),
        }
    }
    if clusters.len() > 1 {
        let first = phases[clusters[0][0]];
        let last = phases[*clusters.last().unwrap().last().unwrap()];
        if circular_distance(first, last) < DEGENERACY_TOLERANCE {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail);
        }
    }
    clusters
}

fn orthonormalize_columns(vectors: &mut Array2<Complex64>, columns: &[usize]) {
    for (n, &c) in columns.iter().enumerate() {
        for &prev in &columns[..n] {
            let overlap: Complex64 =
                vectors.column(prev).iter().zip(vectors.column(c)).map(|(a, b)| a.conj() * b).sum();
            let prev_col = vectors.column(prev).to_owned();
            vectors.column_mut(c).zip_mut_with(&prev_col, |b, a| *b -= overlap * a);
        }
        let norm = vectors.column(c).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        vectors.column_mut(c).mapv_inplace(|z| z / norm);
    }
}

/// Full spectral decomposition of a unitary matrix.
pub fn eigensystem(u: &Array2<Complex64>) -> Result<SpectralData> {
    let (values, raw) = u.eig()?;
    let phases_raw: Vec<f64> = values.iter().map(|&l| eigenphase(l)).collect();
    let mut order: Vec<usize> = (0..phases_raw.len()).collect();
    order.sort_by(|&a, &b| phases_raw[a].total_cmp(&phases_raw[b]));
    let phases: Vec<f64> = order.iter().map(|&i| phases_raw[i]).collect();
    let mut vectors = raw.select(Axis(1), &order);
    for cluster in degenerate_clusters(&phases) {
        orthonormalize_columns(&mut vectors, &cluster);
    }
    let uv = u.dot(&vectors);
    let mut worst = 0.0f64;
    for (j, &mu) in phases.iter().enumerate() {
        let lambda = Complex64::from_polar(1.0, -mu);
        let r = uv
            .column(j)
            .iter()
            .zip(vectors.column(j))
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r);
    }
    if !(worst <= EIGEN_RESIDUAL_TOLERANCE) {
        return Err(Error::EigenResidual { residual: worst, tolerance: EIGEN_RESIDUAL_TOLERANCE });
    }
    Ok(SpectralData { phases, vectors })
}

/// Eigenphases only, ascending in `(-pi, pi]`.
pub fn eigenphases(u: &Array2<Complex64>) -> Result<Vec<f64>> {
    use ndarray_linalg::EigVals;
    let values = u.eigvals()?;
    let mut phases: Vec<f64> = values.iter().map(|&l| eigenphase(l)).collect();
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

/// `exp(-i angle Jx)` in the `Jz` basis.
pub fn x_rotation(rep: SpinRepresentation, angle: f64) -> Result<Array2<Complex64>> {
    let jx = spin_operators(rep).jx.mapv(|z| z.re);
    let (_, v) = jx.eigh(UPLO::Lower)?;
    let j = rep.j();
    let v = v.mapv(|x| Complex64::new(x, 0.0));
    let mut scaled = v.clone();
    for (c, mut col) in scaled.axis_iter_mut(Axis(1)).enumerate() {
        let ph = Complex64::from_polar(1.0, -angle * (-j + c as f64));
        col.mapv_inplace(|z| z * ph);
    }
    Ok(scaled.dot(&v.t()))
}

/// `U` restricted to the two eigenspaces of `exp(-i pi Jy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityBlocks {
    /// Sector spanned by `Jy` eigenvectors with `J + m` even.
    pub symmetric: Array2<Complex64>,
    /// Sector with `J + m` odd.
    pub antisymmetric: Array2<Complex64>,
}

/// Largest allowed `max |[U, exp(-i pi Jy)]|` for a parity reduction.
pub const PARITY_TOLERANCE: f64 = 1e-8;

/// `max |U P - P U|` with `P = exp(-i pi Jy)`.
pub fn parity_commutator(u: &Array2<Complex64>, basis: &JyBasis) -> f64 {
    let parity = basis.rotation(PI);
    max_norm(&(u.dot(&parity) - parity.dot(u)))
}

/// Splits `U` into the two parity sectors. Rejects operators that do not
/// commute with `exp(-i pi Jy)`.
pub fn parity_blocks(u: &Array2<Complex64>, basis: &JyBasis) -> Result<ParityBlocks> {
    let norm = parity_commutator(u, basis);
    if !(norm <= PARITY_TOLERANCE) {
        return Err(Error::ParityViolation { norm });
    }
    let d = basis.rep().dim();
    let even: Vec<usize> = (0..d).step_by(2).collect();
    let odd: Vec<usize> = (1..d).step_by(2).collect();
    // Jy eigenvalue of column c is -J + c, so J + m = c
    let project = |cols: &[usize]| {
        let w = basis.vectors().select(Axis(1), cols);
        adjoint(&w).dot(u).dot(&w)
    };
    Ok(ParityBlocks { symmetric: project(&even), antisymmetric: project(&odd) })
}

/// `U^dag^n W U^n`, re-symmetrized after every step.
pub fn heisenberg_evolve(w: &Array2<Complex64>, u: &Array2<Complex64>, n: usize) -> Array2<Complex64> {
    let u_dag = adjoint(u);
    let mut out = w.clone();
    for _ in 0..n {
        out = heisenberg_step(&out, u, &u_dag);
    }
    out
}

pub(crate) fn heisenberg_step(
    w: &Array2<Complex64>,
    u: &Array2<Complex64>,
    u_dag: &Array2<Complex64>,
) -> Array2<Complex64> {
    let next = u_dag.dot(w).dot(u);
    (&next + &adjoint(&next)) * Complex64::new(0.5, 0.0)
}

/// Trace of a square matrix.
pub fn trace(a: &Array2<Complex64>) -> Complex64 {
    a.diag().sum()
}
