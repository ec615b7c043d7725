//! Workloads shared by the benchmarks.

use bacforge_core::fixtures::c2;
use bacforge_core::{uniform_code, CodeSpec, PrimeField};

/// `(label, code, k)` triples for exhaustive verification.
pub fn verify_workloads() -> Vec<(&'static str, CodeSpec, usize)> {
    vec![
        ("c2_k4", c2(), 4),
        ("uniform_20_4", uniform_code(20, 4, PrimeField::GF2).expect("valid parameters"), 4),
    ]
}
