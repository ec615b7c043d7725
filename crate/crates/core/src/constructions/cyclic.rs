//! Cyclically shifted omission sets.
//!
//! Buckets `1..=k` each store the data minus one cyclic window of width
//! `w = (m-k)n/k`; buckets `k+1..=m` are identical and store the `w`
//! block sums `x_b + x_{b+w} + ...`. A symbol missing from a window bucket
//! is recovered from that bucket plus any sum bucket, and a Hall matching
//! serves the other requests from window buckets directly.

use crate::code::CodeSpec;
use crate::error::{BacError, Result};
use crate::field::PrimeField;
use crate::verify::BatchRequest;

use super::matching::left_saturating_matching;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CyclicParams {
    pub n: usize,
    pub k: usize,
    pub m: usize,
}

impl CyclicParams {
    pub fn new(n: usize, k: usize, m: usize) -> Result<Self> {
        if k == 0 || !n.is_multiple_of(k) {
            return Err(BacError::InvalidParams(format!("cyclic code needs k | n, got n={n}, k={k}")));
        }
        if !(k < m && m < 2 * k) {
            return Err(BacError::InvalidParams(format!("cyclic code needs k < m < 2k, got k={k}, m={m}")));
        }
        if !k.is_multiple_of(m - k) {
            return Err(BacError::InvalidParams(format!(
                "cyclic code needs (m-k) | k, got m-k={}, k={k}",
                m - k
            )));
        }
        Ok(Self { n, k, m })
    }

    /// Width of each omitted window, `(m-k)n/k`.
    pub fn window(&self) -> usize {
        (self.m - self.k) * self.n / self.k
    }

    /// The shift set `P_l` for 0-based `l < k`, as sorted 0-based indices.
    pub fn shift_set(&self, l: usize) -> Vec<usize> {
        let step = self.n / self.k;
        let mut out: Vec<usize> = (0..self.m - self.k)
            .flat_map(|a| (0..step).map(move |b| ((l + a) * step + b) % self.n))
            .collect();
        out.sort_unstable();
        out
    }

    /// Symbols absent from window bucket `l`. Bucket `l` omits
    /// `P_{k-1-l}`, which makes the `(4, 13, 4, 5)` output
    /// coincide bucket for bucket with the hand-encoded C2.
    pub fn omitted(&self, l: usize) -> Vec<usize> {
        self.shift_set(self.k - 1 - l)
    }

    pub fn total_length(&self) -> usize {
        (2 * self.k - self.m) * self.n + (self.m - self.k) * (self.m - self.k) * self.n / self.k
    }
}

/// Builds the cyclic-shift code for `params`.
pub fn cyclic_shift_code(n: usize, k: usize, m: usize, field: PrimeField) -> Result<CodeSpec> {
    let params = CyclicParams::new(n, k, m)?;
    let mut buckets = Vec::with_capacity(m);
    for l in 0..k {
        let omitted = params.omitted(l);
        buckets.push(
            (0..n)
                .filter(|i| omitted.binary_search(i).is_err())
                .map(|i| vec![i])
                .collect::<Vec<_>>(),
        );
    }
    let w = params.window();
    let sums: Vec<Vec<usize>> = (0..w)
        .map(|b| (0..k / (m - k)).map(|t| t * w + b).collect())
        .collect();
    for _ in k..m {
        buckets.push(sums.clone());
    }
    CodeSpec::from_sums(field, n, &buckets)
}

/// Recovery sets following the Hall-matching argument: the first `2k-m`
/// requests are matched to distinct window buckets holding their symbol;
/// each remaining request takes the next unused window bucket, alone when
/// it holds the symbol and otherwise together with the next sum bucket.
/// Unused sum buckets are folded into the last set.
pub fn cyclic_plan_sets(params: &CyclicParams, request: &BatchRequest) -> Result<Vec<Vec<usize>>> {
    let CyclicParams { n, k, m } = *params;
    if request.k() != k {
        return Err(BacError::InvalidParams(format!(
            "cyclic planner serves exactly k={k} requests, got {}",
            request.k()
        )));
    }
    if let Some(&i) = request.indices().iter().find(|&&i| i >= n) {
        return Err(BacError::SymbolOutOfRange { index: i + 1, n });
    }
    let omitted: Vec<Vec<usize>> = (0..k).map(|l| params.omitted(l)).collect();
    let holds = |l: usize, i: usize| omitted[l].binary_search(&i).is_err();

    let direct = 2 * k - m;
    let adj: Vec<Vec<usize>> = request.indices()[..direct]
        .iter()
        .map(|&i| (0..k).filter(|&l| holds(l, i)).collect())
        .collect();
    let matched = left_saturating_matching(&adj, k)
        .ok_or_else(|| BacError::NoPlan(request.one_based()))?;

    let mut sets: Vec<Vec<usize>> = matched.iter().map(|&l| vec![l]).collect();
    let mut used = vec![false; k];
    for &l in &matched {
        used[l] = true;
    }
    let mut free_window = (0..k).filter(|&l| !used[l]);
    let mut free_sum = k..m;
    for &i in &request.indices()[direct..] {
        let l = free_window.next().expect("m-k window buckets remain");
        if holds(l, i) {
            sets.push(vec![l]);
        } else {
            let s = free_sum.next().expect("a sum bucket remains for each unmatched request");
            sets.push(vec![l, s]);
        }
    }
    let last = sets.last_mut().expect("k >= 2");
    last.extend(free_sum);
    Ok(sets)
}
