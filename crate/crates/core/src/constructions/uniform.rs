//! Uniform `(n, (k-1+1/k)n, k, k+1)` codes: `k+1` copies of the
//! `m = k+1` cyclic code on disjoint coordinate blocks, interleaved so that
//! every bucket carries exactly one sum column.

use crate::code::CodeSpec;
use crate::error::{BacError, Result};
use crate::field::{FVector, PrimeField};
use crate::verify::BatchRequest;

use super::cyclic::{cyclic_shift_code, CyclicParams};
use super::matching::left_saturating_matching;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UniformParams {
    pub n: usize,
    pub k: usize,
}

impl UniformParams {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k < 2 || !n.is_multiple_of(k * (k + 1)) || n == 0 {
            return Err(BacError::InvalidParams(format!(
                "uniform code needs k >= 2 and k(k+1) | n, got n={n}, k={k}"
            )));
        }
        Ok(Self { n, k })
    }

    pub fn m(&self) -> usize {
        self.k + 1
    }

    /// Length of each coordinate block, `n/(k+1)`.
    pub fn block(&self) -> usize {
        self.n / (self.k + 1)
    }

    fn inner(&self) -> CyclicParams {
        CyclicParams::new(self.block(), self.k, self.k + 1).expect("validated divisibility")
    }

    /// Inner bucket of block `j` placed in outer bucket `l`.
    fn inner_bucket(&self, l: usize, j: usize) -> usize {
        (l + self.m() - j) % self.m()
    }

    /// The two buckets that do not store `x_i` verbatim: the one carrying
    /// the block sum and the one whose inner bucket omits `x_i`.
    pub fn non_holders(&self, i: usize) -> [usize; 2] {
        let j = i / self.block();
        let local = i % self.block();
        let inner = self.inner();
        let missing = (0..self.k)
            .find(|&b| inner.omitted(b).contains(&local))
            .expect("each index is omitted exactly once");
        let mut out = [(j + self.k) % self.m(), (j + missing) % self.m()];
        out.sort_unstable();
        out
    }
}

pub fn uniform_code(n: usize, k: usize, field: PrimeField) -> Result<CodeSpec> {
    let params = UniformParams::new(n, k)?;
    let b = params.block();
    let inner = cyclic_shift_code(b, k, k + 1, field)?;
    let buckets = (0..params.m())
        .map(|l| {
            (0..params.m())
                .flat_map(|j| {
                    inner.bucket(params.inner_bucket(l, j)).iter().map(move |col| {
                        let mut v = vec![0u64; n];
                        v[j * b..(j + 1) * b].copy_from_slice(col.entries());
                        FVector::from_residues(v, field)
                    })
                })
                .collect()
        })
        .collect();
    CodeSpec::new(field, n, buckets)
}

/// Recovery sets for the uniform code. One request (tried from the last
/// backwards) is singled out; either it takes the two buckets lacking its
/// symbol and the rest are matched to holders, or it takes one holder and
/// the rest are matched among the other `k` buckets. Ties go to the lowest
/// bucket index.
pub fn uniform_plan_sets(params: &UniformParams, request: &BatchRequest) -> Result<Vec<Vec<usize>>> {
    let k = params.k;
    let m = params.m();
    if request.k() != k {
        return Err(BacError::InvalidParams(format!(
            "uniform planner serves exactly k={k} requests, got {}",
            request.k()
        )));
    }
    if let Some(&i) = request.indices().iter().find(|&&i| i >= params.n) {
        return Err(BacError::SymbolOutOfRange { index: i + 1, n: params.n });
    }
    let idx = request.indices();
    let non_holders: Vec<[usize; 2]> = idx.iter().map(|&i| params.non_holders(i)).collect();
    let holds = |j: usize, l: usize| !non_holders[j].contains(&l);

    let assemble = |special: usize, reserved: &[usize]| -> Option<Vec<Vec<usize>>> {
        let others: Vec<usize> = (0..k).filter(|&j| j != special).collect();
        let free: Vec<usize> = (0..m).filter(|l| !reserved.contains(l)).collect();
        let adj: Vec<Vec<usize>> = others
            .iter()
            .map(|&j| (0..free.len()).filter(|&t| holds(j, free[t])).collect())
            .collect();
        let matched = left_saturating_matching(&adj, free.len())?;
        let mut sets = vec![Vec::new(); k];
        sets[special] = reserved.to_vec();
        let mut used = vec![false; free.len()];
        for (&j, &t) in others.iter().zip(&matched) {
            sets[j] = vec![free[t]];
            used[t] = true;
        }
        let leftover = (0..free.len()).filter(|&t| !used[t]).map(|t| free[t]);
        sets[k - 1].extend(leftover);
        Some(sets)
    };

    for special in (0..k).rev() {
        if let Some(sets) = assemble(special, &non_holders[special]) {
            return Ok(sets);
        }
        for h in (0..m).filter(|&l| holds(special, l)) {
            if let Some(sets) = assemble(special, &[h]) {
                return Ok(sets);
            }
        }
    }
    Err(BacError::NoPlan(request.one_based()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::Multisets;
    use crate::fixtures::uniform_20_4;
    use crate::verify::{certify_plan, plan_from_sets, verify_bac, ResponseModel};

    const F: PrimeField = PrimeField::GF2;

    #[test]
    fn reproduces_typed_in_table() {
        let code = uniform_code(20, 4, F).unwrap();
        assert_eq!(code, uniform_20_4());
        assert_eq!(code.bucket_sizes(), vec![13; 5]);
        assert_eq!(code.total_length(), 65);
        assert!(code.is_uniform());
    }

    #[test]
    fn n6_k2() {
        let code = uniform_code(6, 2, F).unwrap();
        assert_eq!(code.bucket_sizes(), vec![3, 3, 3]);
        assert!(verify_bac(&code, 2, ResponseModel::Linear).unwrap().passed());
    }

    #[test]
    fn rejects_bad_divisibility() {
        assert!(uniform_code(10, 4, F).is_err());
    }

    #[test]
    fn certified_plans_for_all_requests() {
        for (n, k) in [(6, 2), (12, 3), (24, 3)] {
            let p = UniformParams::new(n, k).unwrap();
            let code = uniform_code(n, k, F).unwrap();
            for idx in Multisets::new(n, k) {
                let r = BatchRequest::new(idx, n).unwrap();
                let sets = uniform_plan_sets(&p, &r).unwrap();
                let plan = plan_from_sets(&code, &r, sets, ResponseModel::Linear).unwrap();
                assert!(certify_plan(&code, &r, &plan, ResponseModel::Linear).unwrap());
            }
        }
    }
}
