//! Deterministic seed splitting.
//!
//! A child seed is the splitmix64 finalizer applied to a running mix of the
//! root seed and up to two indices:
//!
//! ```text
//! h = mix(root + G)
//! h = mix(h ^ (a + G))
//! h = mix(h ^ (b + G))        G = 0x9E3779B97F4A7C15
//! ```
//!
//! The rule is part of the reproducibility contract of scans and ensembles,
//! so it must never change between versions.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for cell `(a, b)` under `root`.
pub fn derive(root: u64, a: u64, b: u64) -> u64 {
    let h = mix(root.wrapping_add(GOLDEN));
    let h = mix(h ^ a.wrapping_add(GOLDEN));
    mix(h ^ b.wrapping_add(GOLDEN))
}
