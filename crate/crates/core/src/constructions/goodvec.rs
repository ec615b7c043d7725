//! Good vectors (Skolem-type sequences) and the codes built from them.
//!
//! A good vector w.r.t. `t` has length `2t` over `[t]` or `2t+1` over
//! `[0, t]`; each `j` in `[t]` occurs exactly twice, `j` positions apart.
//! Bucket `i` of the derived code stores `x_i` and the `t` pair sums
//! `y_{i,j} = x_{i-t-j(v)} + x_{i-t-j(v)+j}`, indices mod `n`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::code::CodeSpec;
use crate::error::{BacError, Result};
use crate::field::PrimeField;
use crate::verify::BatchRequest;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GoodVector {
    t: usize,
    entries: Vec<usize>,
}

impl GoodVector {
    pub fn new(entries: Vec<usize>, t: usize) -> Result<Self> {
        if !is_good_vector(&entries, t) {
            return Err(BacError::InvalidParams(format!(
                "{entries:?} is not a good vector w.r.t. t={t}"
            )));
        }
        Ok(Self { t, entries })
    }

    /// Infers `t` from the length: `2t` or `2t+1`.
    pub fn from_entries(entries: Vec<usize>) -> Result<Self> {
        let t = entries.len() / 2;
        Self::new(entries, t)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `j(v)`: 1-based position of the last occurrence of `j`, for `j` in `[t]`.
    pub fn last_occurrence(&self, j: usize) -> usize {
        self.entries
            .iter()
            .rposition(|&v| v == j)
            .map(|p| p + 1)
            .expect("every j in [t] occurs in a good vector")
    }

    /// The map `j -> j(v)` for all `j` in `[t]`.
    pub fn last_occurrences(&self) -> BTreeMap<usize, usize> {
        (1..=self.t).map(|j| (j, self.last_occurrence(j))).collect()
    }

    /// Number of symbols (and buckets) of the derived code.
    pub fn code_length_n(&self) -> usize {
        if self.entries.len() == 2 * self.t {
            4 * self.t + 1
        } else {
            4 * self.t + 2
        }
    }
}

pub fn is_good_vector(v: &[usize], t: usize) -> bool {
    if t == 0 {
        return false;
    }
    let with_zero = match v.len() {
        l if l == 2 * t => false,
        l if l == 2 * t + 1 => true,
        _ => return false,
    };
    let mut positions: Vec<Vec<usize>> = vec![Vec::new(); t + 1];
    for (p, &x) in v.iter().enumerate() {
        if x > t || (x == 0 && !with_zero) {
            return false;
        }
        positions[x].push(p);
    }
    if with_zero && positions[0].len() != 1 {
        return false;
    }
    (1..=t).all(|j| positions[j].len() == 2 && positions[j][1] - positions[j][0] == j)
}

/// All good vectors of the given length, in lexicographic order.
pub fn enumerate_good_vectors(t: usize, len: usize) -> Result<Vec<GoodVector>> {
    if t == 0 || (len != 2 * t && len != 2 * t + 1) {
        return Err(BacError::InvalidParams(format!(
            "good vectors w.r.t. t={t} have length 2t or 2t+1, got {len}"
        )));
    }
    fn fill(
        slots: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        zero_left: bool,
        t: usize,
        out: &mut Vec<GoodVector>,
    ) {
        let Some(pos) = slots.iter().position(Option::is_none) else {
            let entries = slots.iter().map(|s| s.unwrap()).collect();
            out.push(GoodVector { t, entries });
            return;
        };
        if zero_left {
            slots[pos] = Some(0);
            fill(slots, used, false, t, out);
            slots[pos] = None;
        }
        for j in 1..=t {
            if used[j] || pos + j >= slots.len() || slots[pos + j].is_some() {
                continue;
            }
            used[j] = true;
            slots[pos] = Some(j);
            slots[pos + j] = Some(j);
            fill(slots, used, zero_left, t, out);
            slots[pos] = None;
            slots[pos + j] = None;
            used[j] = false;
        }
    }
    let mut out = Vec::new();
    let mut slots = vec![None; len];
    let mut used = vec![false; t + 1];
    fill(&mut slots, &mut used, len == 2 * t + 1, t, &mut out);
    Ok(out)
}

/// First good vector of the given length, if any.
pub fn find_good_vector(t: usize, len: usize) -> Result<Option<GoodVector>> {
    Ok(enumerate_good_vectors(t, len)?.into_iter().next())
}

/// The explicit length-`2t+1` good vector `(v1, v2)`: odd values mirrored
/// around a `1,1` pair, then even values mirrored around the `0`.
pub fn good_vector_2t1(t: usize) -> GoodVector {
    assert!(t >= 1, "t must be positive");
    let (odd_top, even_top) = if t.is_multiple_of(2) { (t - 1, t) } else { (t, t - 1) };
    let odds: Vec<usize> = (1..=odd_top).step_by(2).collect();
    let evens: Vec<usize> = (2..=even_top).step_by(2).collect();
    let mut entries: Vec<usize> = odds.iter().rev().chain(&odds).copied().collect();
    entries.extend(evens.iter().rev());
    entries.push(0);
    entries.extend(&evens);
    GoodVector { t, entries }
}

/// The per-`t` batch threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BatchThreshold {
    /// Largest `k` with `2k <= 2t + d + ceil(k/d)` for every `d` in `[k]`.
    pub exact: usize,
    /// `floor((sqrt(t + 1/4) + 1/2)^2)`, a sufficient value.
    pub closed_form: usize,
}

pub fn max_batch_k(t: usize) -> BatchThreshold {
    let ok = |k: usize| (1..=k).all(|d| 2 * k <= 2 * t + d + k.div_ceil(d));
    let exact = (1..=2 * t + 1).rev().find(|&k| ok(k)).unwrap_or(1);
    // floor((sqrt(t+1/4)+1/2)^2) = t + floor((1 + sqrt(4t+1)) / 2)
    let closed_form = t + (4 * t + 1).isqrt().div_ceil(2);
    BatchThreshold { exact, closed_form }
}

pub fn good_vector_code(v: &GoodVector, field: PrimeField) -> Result<CodeSpec> {
    let t = v.t();
    let n = v.code_length_n();
    let wrap = |x: isize| x.rem_euclid(n as isize) as usize;
    let buckets: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|i| {
            let mut cols = vec![vec![i]];
            for j in 1..=t {
                // 1-based i+1 minus t minus j(v), mapped back to 0-based.
                let base = i as isize - t as isize - v.last_occurrence(j) as isize;
                cols.push(vec![wrap(base), wrap(base + j as isize)]);
            }
            cols
        })
        .collect();
    CodeSpec::from_sums(field, n, &buckets)
}

/// The `2t+1` pairwise-disjoint recovery sets of `x_i` (0-based buckets):
/// `{i}`, then for each `j` in `[t]` the sets `{i-j, i+t+j(v)-j}` and
/// `{i+j, i+t+j(v)}`.
pub fn canonical_recovery_sets(v: &GoodVector, i: usize) -> Vec<Vec<usize>> {
    let n = v.code_length_n() as isize;
    let t = v.t() as isize;
    let at = |x: isize| (x.rem_euclid(n)) as usize;
    let i = i as isize;
    let mut out = vec![vec![i as usize]];
    for j in 1..=v.t() {
        let jv = v.last_occurrence(j) as isize;
        let j = j as isize;
        for mut s in [
            vec![at(i - j), at(i + t + jv - j)],
            vec![at(i + j), at(i + t + jv)],
        ] {
            s.sort_unstable();
            out.push(s);
        }
    }
    out
}

/// The greedy procedure: every distinct symbol first gets its own bucket;
/// then, in order of increasing multiplicity, each symbol takes its
/// remaining sets from its canonical family, lowest-index set first,
/// skipping any that meet a set already chosen. Leftover buckets are folded
/// into the last set.
pub fn goodvec_plan_sets(v: &GoodVector, request: &BatchRequest) -> Result<Vec<Vec<usize>>> {
    let n = v.code_length_n();
    let limit = max_batch_k(v.t()).exact;
    if request.k() > limit {
        return Err(BacError::InvalidParams(format!(
            "request size {} exceeds the batch threshold {limit} for t={}",
            request.k(),
            v.t()
        )));
    }
    if let Some(&i) = request.indices().iter().find(|&&i| i >= n) {
        return Err(BacError::SymbolOutOfRange { index: i + 1, n });
    }
    let mut mult: BTreeMap<usize, usize> = BTreeMap::new();
    for &i in request.indices() {
        *mult.entry(i).or_default() += 1;
    }
    let mut order: Vec<(usize, usize)> = mult.iter().map(|(&i, &a)| (a, i)).collect();
    order.sort_unstable();

    let mut used = vec![false; n];
    for &i in mult.keys() {
        used[i] = true;
    }
    let mut chosen: BTreeMap<usize, Vec<Vec<usize>>> =
        mult.keys().map(|&i| (i, vec![vec![i]])).collect();
    for &(a, i) in &order {
        let mut candidates = canonical_recovery_sets(v, i).split_off(1);
        candidates.sort();
        let mut need = a - 1;
        for set in candidates {
            if need == 0 {
                break;
            }
            if set.iter().all(|&l| !used[l]) {
                for &l in &set {
                    used[l] = true;
                }
                chosen.get_mut(&i).unwrap().push(set);
                need -= 1;
            }
        }
        if need > 0 {
            return Err(BacError::NoPlan(request.one_based()));
        }
    }

    let mut sets = Vec::with_capacity(request.k());
    let mut cursor: BTreeMap<usize, usize> = BTreeMap::new();
    for &i in request.indices() {
        let c = cursor.entry(i).or_default();
        sets.push(chosen[&i][*c].clone());
        *c += 1;
    }
    let last = sets.last_mut().expect("request is non-empty");
    last.extend((0..n).filter(|&l| !used[l]));
    last.sort_unstable();
    Ok(sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::Multisets;
    use crate::fixtures::pair_sums_5;
    use crate::verify::{certify_plan, plan_from_sets, verify_pir, ResponseModel};
    use proptest::prelude::*;

    const F: PrimeField = PrimeField::GF2;

    fn req(one_based: &[usize], n: usize) -> BatchRequest {
        BatchRequest::from_one_based(one_based, n).unwrap()
    }

    fn one_based(sets: &[Vec<usize>]) -> Vec<Vec<usize>> {
        sets.iter().map(|s| s.iter().map(|l| l + 1).collect()).collect()
    }

    #[test]
    fn good_vector_examples() {
        assert!(is_good_vector(&[1, 1], 1));
        assert!(is_good_vector(&[2, 3, 2, 4, 3, 1, 1, 4], 4));
        assert!(!is_good_vector(&[1, 2, 1, 2], 2));
        assert!(!is_good_vector(&[1, 1, 0, 0], 1));
        let v = GoodVector::new(vec![2, 3, 2, 4, 3, 1, 1, 4], 4).unwrap();
        let map: Vec<(usize, usize)> = v.last_occurrences().into_iter().collect();
        assert_eq!(map, vec![(1, 7), (2, 3), (3, 5), (4, 8)]);
    }

    #[test]
    fn enumeration() {
        let one = enumerate_good_vectors(1, 2).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].entries(), &[1, 1]);
        assert!(enumerate_good_vectors(2, 4).unwrap().is_empty());
        assert!(enumerate_good_vectors(3, 6).unwrap().is_empty());
        assert!(enumerate_good_vectors(2, 7).is_err());
        let four = enumerate_good_vectors(4, 8).unwrap();
        assert!(four.iter().any(|g| g.entries() == [2, 3, 2, 4, 3, 1, 1, 4]));
        assert!(four.windows(2).all(|w| w[0].entries() < w[1].entries()));
        assert!(four.iter().all(|g| is_good_vector(g.entries(), 4)));
    }

    #[test]
    fn explicit_2t1_vectors() {
        assert_eq!(good_vector_2t1(1).entries(), &[1, 1, 0]);
        assert_eq!(good_vector_2t1(2).entries(), &[1, 1, 2, 0, 2]);
        assert_eq!(good_vector_2t1(4).entries(), &[3, 1, 1, 3, 4, 2, 0, 2, 4]);
        for t in 1..=200 {
            let v = good_vector_2t1(t);
            assert!(is_good_vector(v.entries(), t), "t={t}");
        }
    }

    #[test]
    fn thresholds() {
        assert_eq!(max_batch_k(1).exact, 3);
        assert_eq!(max_batch_k(4), BatchThreshold { exact: 7, closed_form: 6 });
        for t in 1..=60 {
            let b = max_batch_k(t);
            assert!(b.closed_form <= b.exact);
            let root = ((t as f64 + 0.25).sqrt() + 0.5).powi(2).floor() as usize;
            assert_eq!(b.closed_form, root);
        }
    }

    #[test]
    fn codes_match_tables() {
        let v = GoodVector::new(vec![1, 1], 1).unwrap();
        assert_eq!(good_vector_code(&v, F).unwrap(), pair_sums_5());

        let v = GoodVector::new(vec![1, 1, 2, 0, 2], 2).unwrap();
        let code = good_vector_code(&v, F).unwrap();
        let b0: Vec<String> = code.bucket(0).iter().map(CodeSpec::describe_column).collect();
        assert_eq!(b0, vec!["x1", "x7+x8", "x4+x6"]);
        let b9: Vec<String> = code.bucket(9).iter().map(CodeSpec::describe_column).collect();
        assert_eq!(b9, vec!["x10", "x6+x7", "x3+x5"]);

        let v = GoodVector::new(vec![2, 3, 2, 4, 3, 1, 1, 4], 4).unwrap();
        let code = good_vector_code(&v, F).unwrap();
        assert_eq!((code.n(), code.total_length(), code.m()), (17, 85, 17));
    }

    #[test]
    fn pir_property_for_t4() {
        let v = GoodVector::new(vec![2, 3, 2, 4, 3, 1, 1, 4], 4).unwrap();
        let code = good_vector_code(&v, F).unwrap();
        assert!(verify_pir(&code, 7, ResponseModel::Linear).unwrap().passed());
    }

    #[test]
    fn example_plans() {
        let v = GoodVector::new(vec![1, 1], 1).unwrap();
        let sets = goodvec_plan_sets(&v, &req(&[1, 1, 1], 5)).unwrap();
        assert_eq!(one_based(&sets), vec![vec![1], vec![2, 4], vec![3, 5]]);
        let sets = goodvec_plan_sets(&v, &req(&[1, 1, 2], 5)).unwrap();
        assert_eq!(one_based(&sets), vec![vec![1], vec![3, 5], vec![2, 4]]);
        assert!(goodvec_plan_sets(&v, &req(&[1, 1, 1, 1], 5)).is_err());
    }

    #[test]
    fn plans_certify_for_small_vectors() {
        for v in [vec![1, 1], vec![1, 1, 0], vec![1, 1, 2, 0, 2]] {
            let g = GoodVector::from_entries(v).unwrap();
            let code = good_vector_code(&g, F).unwrap();
            let k = max_batch_k(g.t()).exact;
            for idx in Multisets::new(code.n(), k) {
                let r = BatchRequest::new(idx, code.n()).unwrap();
                let sets = goodvec_plan_sets(&g, &r).unwrap();
                let plan = plan_from_sets(&code, &r, sets, ResponseModel::Linear).unwrap();
                assert!(certify_plan(&code, &r, &plan, ResponseModel::Linear).unwrap());
            }
        }
    }

    proptest! {
        #[test]
        fn canonical_sets_are_disjoint(t in 1usize..40, i_seed in any::<usize>(), long in any::<bool>()) {
            let v = if long {
                good_vector_2t1(t)
            } else {
                prop_assume!(t <= 4 && t != 2 && t != 3);
                find_good_vector(t, 2 * t).unwrap().unwrap()
            };
            let n = v.code_length_n();
            let sets = canonical_recovery_sets(&v, i_seed % n);
            prop_assert_eq!(sets.len(), 2 * t + 1);
            let mut seen = vec![false; n];
            for s in &sets {
                for &l in s {
                    prop_assert!(!seen[l]);
                    seen[l] = true;
                }
            }
        }
    }
}
