use std::f64::consts::{FRAC_PI_2, PI};

use kpspin_core::chaos::fibonacci_sphere;
use kpspin_core::classical::{step, tangent_map};
use kpspin_core::floquet::*;
use kpspin_core::quantum::*;
use kpspin_core::{Complex64, ModelParams, PhasePoint};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn op(p: u32, k: f64, alpha: f64, n_spins: u32) -> FloquetOperator {
    floquet_operator(&ModelParams::new(p, k, alpha).unwrap(), SpinRepresentation::new(n_spins).unwrap()).unwrap()
}

#[test]
fn operators_are_unitary() {
    for (p, k, a, n) in [(2, 3.0, FRAC_PI_2, 40), (3, 7.5, 1.1, 33), (4, 0.0, 2.0, 64), (5, 12.0, 0.3, 21)] {
        assert!(unitarity_error(&op(p, k, a, n).matrix) <= 1e-12);
    }
}

#[test]
fn jy_basis_diagonalizes_jy_and_rotations_act_by_phase() {
    let rep = SpinRepresentation::new(30).unwrap();
    let basis = JyBasis::new(rep).unwrap();
    let jy = spin_operators(rep).jy;
    let rot = basis.rotation(0.77);
    for (c, &m) in basis.eigenvalues().iter().enumerate() {
        let v = basis.vectors().column(c);
        let jv = jy.dot(&v);
        let err = jv.iter().zip(v.iter()).map(|(a, b)| (a - b * m).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * rep.j(), "Jy residual {err} at m={m}");
        let rv = rot.dot(&v);
        let phase = Complex64::from_polar(1.0, -0.77 * m);
        let err = rv.iter().zip(v.iter()).map(|(a, b)| (a - b * phase).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12, "rotation residual {err} at m={m}");
    }
}

#[test]
fn parity_commutes_only_for_even_p() {
    let rep = SpinRepresentation::new(24).unwrap();
    let basis = JyBasis::new(rep).unwrap();
    for p in [2u32, 4, 6] {
        let u = op(p, 2.3, 1.3, 24);
        assert!(parity_commutator(&u.matrix, &basis) <= 1e-8);
        let blocks = parity_blocks(&u.matrix, &basis).unwrap();
        assert_eq!(blocks.symmetric.nrows() + blocks.antisymmetric.nrows(), rep.dim());
    }
    for p in [3u32, 5] {
        let u = op(p, 2.3, 1.3, 24);
        assert!(parity_commutator(&u.matrix, &basis) > 1e-3);
        assert!(matches!(parity_blocks(&u.matrix, &basis), Err(kpspin_core::Error::ParityViolation { .. })));
    }
}

/// Spin coherent state along the unit vector `n`.
fn coherent_state(rep: SpinRepresentation, n: PhasePoint) -> Array1<Complex64> {
    let basis = JyBasis::new(rep).unwrap();
    let theta = n.z.clamp(-1.0, 1.0).acos();
    let phi = n.y.atan2(n.x);
    let mut top = Array1::<Complex64>::zeros(rep.dim());
    top[0] = Complex64::new(1.0, 0.0);
    let tilted = basis.rotation(theta).dot(&top);
    let m = rep.m_values();
    Array1::from_shape_fn(rep.dim(), |i| tilted[i] * Complex64::from_polar(1.0, -phi * m[i]))
}

fn expectation(a: &Array2<Complex64>, psi: &Array1<Complex64>) -> f64 {
    psi.iter().zip(a.dot(psi).iter()).map(|(x, y)| x.conj() * y).sum::<Complex64>().re
}

#[test]
fn coherent_state_follows_classical_map() {
    let rep = SpinRepresentation::new(256).unwrap();
    let params = ModelParams::new(2, 1.0, FRAC_PI_2).unwrap();
    let u = floquet_operator(&params, rep).unwrap().matrix;
    let ops = spin_operators(rep);
    let start = PhasePoint::new(0.3, 0.9, 0.3).unwrap();
    let mut psi = coherent_state(rep, start);
    let mut x = start;
    let j = rep.j();
    let initial = [expectation(&ops.jx, &psi) / j, expectation(&ops.jy, &psi) / j, expectation(&ops.jz, &psi) / j];
    for (q, c) in initial.iter().zip(start.to_array()) {
        assert!((q - c).abs() < 1e-2, "coherent state misaligned");
    }
    for kick in 1..=5 {
        psi = u.dot(&psi);
        x = step(x, &params);
        let q = [expectation(&ops.jx, &psi) / j, expectation(&ops.jy, &psi) / j, expectation(&ops.jz, &psi) / j];
        for (qi, ci) in q.iter().zip(x.to_array()) {
            assert!((qi - ci).abs() < 0.05, "kick {kick}: quantum {q:?} vs classical {x:?}");
        }
    }
}

#[test]
fn otoc_matches_brute_force_commutator() {
    for (p, k, a, n) in [(2, 3.0, FRAC_PI_2, 63), (3, 2.0, 1.2, 40), (4, 5.0, 0.7, 17)] {
        let f = op(p, k, a, n);
        let ops = spin_operators(f.rep);
        let series = otoc_series(&f, &ops.jz, &ops.jx, 12).unwrap();
        let d = f.rep.dim() as f64;
        let mut un = Array2::<Complex64>::eye(f.rep.dim());
        for (step_n, &c) in series.c.iter().enumerate() {
            let wn = adjoint(&un).dot(&ops.jx).dot(&un);
            let comm = wn.dot(&ops.jz) - ops.jz.dot(&wn);
            let frob: f64 = comm.iter().map(|z| z.norm_sqr()).sum();
            let oracle = frob / d;
            assert!(c >= -1e-10);
            assert!((c - oracle).abs() <= 1e-10 * oracle.max(1.0), "n={step_n}: {c} vs {oracle}");
            un = f.matrix.dot(&un);
        }
    }
}

#[test]
fn otoc_growth_tracks_classical_bracket() {
    // Classical analogue of C(n) for V = W = Jz at infinite temperature:
    // the sphere average of {Z_n, Z}^2, whose gradient is carried by the
    // tangent map along the flow generated by Z.
    let params = ModelParams::new(2, 3.0, FRAC_PI_2).unwrap();
    let pts = fibonacci_sphere(20_000);
    let mut classical = vec![0.0; 5];
    for &x0 in &pts {
        let mut x = x0;
        let mut t = [x0.y, -x0.x, 0.0];
        for slot in classical.iter_mut() {
            t = tangent_map(x, &params).apply(t);
            x = step(x, &params);
            *slot += t[2] * t[2];
        }
    }
    let classical: Vec<f64> = classical.iter().map(|s| (s / pts.len() as f64).ln()).collect();

    let f = op(2, 3.0, FRAC_PI_2, 256);
    let jz = spin_operators(f.rep).jz;
    let quantum: Vec<f64> = otoc_series(&f, &jz, &jz, 5).unwrap().c[1..].iter().map(|c| c.ln()).collect();
    for n in 0..4 {
        let dc = classical[n + 1] - classical[n];
        let dq = quantum[n + 1] - quantum[n];
        assert!((dc - dq).abs() < 0.05, "step {}: classical {dc:.3} quantum {dq:.3}", n + 2);
    }
}

#[test]
fn zero_kick_otoc_has_no_window() {
    let f = op(2, 0.0, FRAC_PI_2, 64);
    let jz = spin_operators(f.rep).jz;
    let series = otoc_series(&f, &jz, &jz, 30).unwrap();
    assert!(fit_quantum_lyapunov(&series, &FitOptions::default()).is_none());
}

#[test]
fn otoc_rate_is_stable_in_system_size() {
    let rates: Vec<f64> = [256u32, 512]
        .iter()
        .map(|&n| {
            let f = op(2, 3.0, FRAC_PI_2, n);
            let jz = spin_operators(f.rep).jz;
            let series = otoc_series(&f, &jz, &jz, 20).unwrap();
            fit_quantum_lyapunov(&series, &FitOptions::default()).unwrap().lambda_q
        })
        .collect();
    assert!((rates[1] - rates[0]).abs() < 0.1 * rates[1], "{rates:?}");
}

#[test]
fn delta_at_zero_kick_is_three_over_d() {
    let rep = SpinRepresentation::new(64).unwrap();
    let basis = JyBasis::new(rep).unwrap();
    let spectral = eigensystem(&op(2, 0.0, 1.0, 64).matrix).unwrap();
    let d = rep.dim() as f64;
    assert!((floquet_delta(&spectral, &basis) - 3.0 / d).abs() <= 1e-6);
}

#[test]
fn odd_p_delocalizes_earlier() {
    let rep = SpinRepresentation::new(256).unwrap();
    let basis = JyBasis::new(rep).unwrap();
    let delta = |p| floquet_delta(&eigensystem(&op(p, 1.0, FRAC_PI_2, 256).matrix).unwrap(), &basis);
    let (d2, d3) = (delta(2), delta(3));
    assert!(d3 > d2, "p=3 {d3} vs p=2 {d2}");
}

#[test]
fn symmetry_mixing_lowers_the_ratio() {
    let rep = SpinRepresentation::new(256).unwrap();
    let basis = JyBasis::new(rep).unwrap();
    let f = op(2, 6.0, 1.3, 256);
    let mixed = spectral_statistics_with(&f, &basis, SymmetryReduction::None).unwrap();
    let resolved = spectral_statistics_with(&f, &basis, SymmetryReduction::Parity).unwrap();
    assert!(resolved.parity_resolved && !mixed.parity_resolved);
    assert!(mixed.r_mean < resolved.r_mean - 0.05, "{} vs {}", mixed.r_mean, resolved.r_mean);
}

#[test]
fn quarter_turn_x_symmetry_is_detected() {
    let rep = SpinRepresentation::new(128).unwrap();
    let basis = JyBasis::new(rep).unwrap();
    let at_quarter = spectral_statistics(&op(2, 6.0, FRAC_PI_2, 128), &basis).unwrap();
    assert!(at_quarter.x_resolved);
    let generic = spectral_statistics(&op(2, 6.0, 1.3, 128), &basis).unwrap();
    assert!(generic.parity_resolved && !generic.x_resolved);
    let odd_p = spectral_statistics(&op(3, 6.0, FRAC_PI_2, 128), &basis).unwrap();
    assert!(!odd_p.parity_resolved && !odd_p.x_resolved);
}

#[test]
fn haar_states_have_porter_thomas_ipr() {
    let d = 513;
    let identity = Array2::<Complex64>::eye(d);
    let mean: f64 = (0..20).map(|s| ipr(haar_state(d, s).view(), &identity).unwrap()).sum::<f64>() / 20.0;
    assert!((mean / (d as f64 / 2.0) - 1.0).abs() < 0.1, "mean IPR {mean}");
}

#[test]
fn coe_ipr_matches_one_third() {
    let rep = SpinRepresentation::new(512).unwrap();
    let jz = spin_operators(rep).jz;
    let norm = coe_normalization(rep, &jz, &jz, 20, 5).unwrap();
    assert!((norm.sampled_ipr_mean / norm.delta_coe - 1.0).abs() < 0.1);
    assert!(norm.c_coe > 0.0);
}

#[test]
fn ratio_rejects_nonunitary_use() {
    let u = op(2, 1.0, 1.0, 4);
    assert!(matches!(
        ipr(u.matrix.column(0).mapv(|z| z * 2.0).view(), &Array2::eye(5)),
        Err(kpspin_core::Error::Unnormalized { .. })
    ));
}

proptest! {
    #[test]
    fn ratio_is_shift_and_reversal_invariant(
        phases in proptest::collection::vec(-PI..PI, 20..200),
        shift in -10.0f64..10.0,
    ) {
        let base = match mean_adjacent_ratio(&phases) {
            Ok(s) => s.mean,
            Err(_) => return Ok(()),
        };
        let shifted: Vec<f64> = phases.iter().map(|p| wrap_phase(p + shift)).collect();
        let reversed: Vec<f64> = phases.iter().rev().map(|p| -p).collect();
        prop_assert!((mean_adjacent_ratio(&shifted).unwrap().mean - base).abs() < 1e-9);
        prop_assert!((mean_adjacent_ratio(&reversed).unwrap().mean - base).abs() < 1e-9);
    }

    #[test]
    fn gamma_is_affine_in_ratio(a in 0.0f64..1.0, b in 0.0f64..1.0, t in 0.0f64..1.0) {
        let mid = normalized_gamma(t * a + (1.0 - t) * b);
        prop_assert!((mid - (t * normalized_gamma(a) + (1.0 - t) * normalized_gamma(b))).abs() < 1e-9);
    }

    #[test]
    fn ipr_bounds_and_phase_invariance(
        seed in 0u64..1000,
        d in 2usize..40,
        phases in proptest::collection::vec(0.0f64..6.3, 40),
    ) {
        let psi = haar_state(d, seed);
        let basis = Array2::<Complex64>::eye(d);
        let value = ipr(psi.view(), &basis).unwrap();
        prop_assert!(value >= 1.0 - 1e-12 && value <= d as f64 + 1e-9);
        let mut rephased = basis.clone();
        for (j, mut col) in rephased.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|z| z * Complex64::from_polar(1.0, phases[j]));
        }
        prop_assert!((ipr(psi.view(), &rephased).unwrap() - value).abs() < 1e-9 * value);
    }
}
