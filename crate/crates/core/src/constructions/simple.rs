//! Replication, single-request and `k = 2` parity codes.

use crate::code::CodeSpec;
use crate::error::{BacError, Result};
use crate::field::PrimeField;

/// `k` full copies of the data: `m = k`, `N = kn`.
pub fn trivial_replication(n: usize, k: usize, field: PrimeField) -> Result<CodeSpec> {
    if n == 0 || k == 0 {
        return Err(BacError::InvalidParams("replication needs n >= 1 and k >= 1".into()));
    }
    let bucket: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    CodeSpec::from_sums(field, n, &vec![bucket; k])
}

/// Every symbol stored once, dealt round-robin over `m` buckets.
pub fn single_request_code(n: usize, m: usize, field: PrimeField) -> Result<CodeSpec> {
    if m == 0 || m > n {
        return Err(BacError::InvalidParams(format!(
            "single-request code needs 1 <= m <= n, got n={n}, m={m}"
        )));
    }
    let mut buckets = vec![Vec::new(); m];
    for i in 0..n {
        buckets[i % m].push(vec![i]);
    }
    CodeSpec::from_sums(field, n, &buckets)
}

/// `n = m - 1` systematic buckets plus one all-ones parity bucket.
pub fn parity_code_k2(m: usize, field: PrimeField) -> Result<CodeSpec> {
    if m < 3 {
        return Err(BacError::InvalidParams(format!("parity code needs m >= 3, got {m}")));
    }
    let n = m - 1;
    let mut buckets: Vec<Vec<Vec<usize>>> = (0..n).map(|i| vec![vec![i]]).collect();
    buckets.push(vec![(0..n).collect()]);
    CodeSpec::from_sums(field, n, &buckets)
}
