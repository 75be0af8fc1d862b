use std::f64::consts::{FRAC_PI_2, PI};

use kpspin_core::chaos::*;
use kpspin_core::{ModelParams, PhasePoint};
use proptest::prelude::*;

fn chaotic_seed() -> PhasePoint {
    PhasePoint::new(0.3, 0.2, 0.93).unwrap()
}

#[test]
fn lyapunov_stable_under_doubling() {
    let params = ModelParams::new(2, 6.0, FRAC_PI_2).unwrap();
    let short = lyapunov_qr(&params, chaotic_seed(), 100_000, DEFAULT_TRANSIENT).unwrap();
    let long = lyapunov_qr(&params, chaotic_seed(), 200_000, DEFAULT_TRANSIENT).unwrap();
    assert!(short.converged);
    assert!((short.value - long.value).abs() <= 0.02 * long.value);
    // exponents of an area-preserving map on the sphere: (l, 0, -l)
    assert!(short.exponents[1].abs() < 1e-3);
    assert!((short.exponents[0] + short.exponents[2]).abs() < 1e-3);
}

#[test]
fn kicked_top_strong_chaos_is_symmetric_in_alpha() {
    for a in [0.6, 1.1] {
        let lhs = ModelParams::new(2, 50.0, a).unwrap();
        let rhs = ModelParams::new(2, 50.0, PI - a).unwrap();
        let l1 = lyapunov_qr(&lhs, chaotic_seed(), 100_000, DEFAULT_TRANSIENT).unwrap().value;
        let l2 = lyapunov_qr(&rhs, chaotic_seed(), 100_000, DEFAULT_TRANSIENT).unwrap().value;
        assert!((l1 - l2).abs() <= 0.02 * l1, "alpha={a}: {l1} vs {l2}");
    }
}

#[test]
fn area_is_monotone_in_d_min_and_bounded() {
    let params = ModelParams::new(2, 3.0, FRAC_PI_2).unwrap();
    let t_max = default_t_max_list();
    let mut last = f64::INFINITY;
    for d_min in [0.02, 0.06, 0.12, 0.25] {
        let res = chaotic_area(&params, 2000, d_min, &t_max).unwrap();
        assert!(res.area >= 0.0 && res.area <= 4.0 * PI);
        assert_eq!(res.area + res.regular_area(), 4.0 * PI);
        assert!(res.area <= last, "d_min={d_min}: {} > {last}", res.area);
        last = res.area;
    }
}

#[test]
fn chaos_onset_diagnostics_agree() {
    // The recurrence estimate has a floor of 2-3% of the sphere below k = 2
    // from slow regular orbits that do not return within 140 kicks, so the
    // area onset is read at 5% of the sphere.
    let ks: Vec<f64> = (0..=14).map(|i| 1.9 + 0.05 * i as f64).collect();
    let mut lyap_onset = None;
    let mut area_onset = None;
    for &k in &ks {
        let params = ModelParams::new(2, k, FRAC_PI_2).unwrap();
        if lyap_onset.is_none() && lyapunov_qr(&params, chaotic_seed(), 50_000, DEFAULT_TRANSIENT).unwrap().value > 0.01 {
            lyap_onset = Some(k);
        }
        if area_onset.is_none() {
            let a = chaotic_area(&params, 4000, DEFAULT_D_MIN, &default_t_max_list()).unwrap();
            if a.area > 0.05 * 4.0 * PI {
                area_onset = Some(k);
            }
        }
    }
    let lyap_onset = lyap_onset.expect("no Lyapunov onset below 2.6");
    let area_onset = area_onset.expect("no area onset below 2.6");
    assert!((2.0..=2.6).contains(&lyap_onset), "lyapunov onset {lyap_onset}");
    assert!((2.0..=2.6).contains(&area_onset), "area onset {area_onset}");
}

#[test]
fn fibonacci_points_are_unit_and_balanced() {
    let pts = fibonacci_sphere(1001);
    let mut centroid = [0.0; 3];
    for p in &pts {
        assert!((p.norm() - 1.0).abs() < 1e-14);
        centroid[0] += p.x;
        centroid[1] += p.y;
        centroid[2] += p.z;
    }
    for c in centroid {
        assert!((c / 1001.0).abs() < 1e-3);
    }
    let rotated = rotated_fibonacci_seeds(50, 3);
    assert_eq!(rotated, rotated_fibonacci_seeds(50, 3));
    assert_ne!(rotated, rotated_fibonacci_seeds(50, 4));
}

fn naive_pearson(a: &[f64], b: &[f64]) -> f64 {
    // two-pass sample statistics; the 1/(n-1) factors cancel
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..a.len() {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma).powi(2);
        vb += (b[i] - mb).powi(2);
    }
    (cov / (n - 1.0)) / ((va / (n - 1.0)).sqrt() * (vb / (n - 1.0)).sqrt())
}

proptest! {
    #[test]
    fn pearson_matches_textbook_formula(
        pairs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 10..300),
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let Some(r) = pearson(&a, &b) {
            prop_assert!((r - naive_pearson(&a, &b)).abs() <= 1e-12);
        }
    }

    #[test]
    fn similarity_equals_product_of_oracle_correlations(
        z in -0.95f64..0.95,
        phi in 0.0f64..6.28,
        a in 0.2f64..3.0,
    ) {
        let start = PhasePoint::from_spherical(z.acos(), phi);
        let params = ModelParams::new(3, 1.0, a).unwrap();
        let perturbed = ModelParams::new(3, 1.0, a + 5e-4).unwrap();
        let series = |prm: &ModelParams| {
            let mut x = start;
            let mut out = [Vec::new(), Vec::new(), Vec::new()];
            for _ in 0..200 {
                x = kpspin_core::classical::step(x, prm);
                out[0].push(x.x);
                out[1].push(x.y);
                out[2].push(x.z);
            }
            out
        };
        let (sa, sb) = (series(&params), series(&perturbed));
        if let Some(s) = trajectory_similarity(start, &params, &perturbed, 200) {
            let oracle: f64 = (0..3).map(|i| naive_pearson(&sa[i], &sb[i])).product();
            prop_assert!((s - oracle).abs() <= 1e-12);
        }
    }
}
