//! Batch and PIR property checking.
//!
//! A request is served by partitioning all `m` buckets into `k` non-empty
//! recovery sets, one per requested symbol. A [`RecoveryPlan`] records the
//! partition together with each bucket's response vector and the
//! aggregator's combination coefficients, so it can be checked without
//! trusting whoever produced it.

use std::sync::Arc;
use std::time::{Duration, Instant};

use dashmap::DashMap;
use rayon::prelude::*;
use serde::Serialize;

use crate::code::CodeSpec;
use crate::combinatorics::{Combinations, Multisets};
use crate::error::{BacError, Result};
use crate::field::{span_solve, Echelon, FVector};

/// A multiset of requested symbols, kept sorted. 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BatchRequest {
    indices: Vec<usize>,
}

impl BatchRequest {
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(BacError::EmptyRequest);
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(BacError::SymbolOutOfRange { index: bad + 1, n });
        }
        indices.sort_unstable();
        Ok(Self { indices })
    }

    /// Builds a request from 1-based symbol indices.
    pub fn from_one_based(indices: &[usize], n: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > n) {
            return Err(BacError::SymbolOutOfRange { index: bad, n });
        }
        Self::new(indices.iter().map(|i| i - 1).collect(), n)
    }

    /// `k` copies of the same symbol.
    pub fn identical(i: usize, k: usize, n: usize) -> Result<Self> {
        Self::new(vec![i; k], n)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }
}

/// How a node may answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseModel {
    /// Any linear function of the bucket's contents.
    Linear,
    /// One stored symbol, verbatim.
    #[serde(rename = "projection")]
    ProjectionOnly,
}

impl std::str::FromStr for ResponseModel {
    type Err = BacError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "projection" => Ok(Self::ProjectionOnly),
            other => Err(BacError::InvalidParams(format!("unknown response model {other:?}"))),
        }
    }
}

/// A certificate that a request can be served.
///
/// `sets[j]` is the recovery set (sorted, 0-based buckets) for the j-th
/// requested symbol, `responses[l]` the coefficient vector bucket `l`
/// applies to its stored symbols, and `combos[j][t]` the coefficient the
/// aggregator gives to the response of bucket `sets[j][t]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryPlan {
    pub sets: Vec<Vec<usize>>,
    pub responses: Vec<FVector>,
    pub combos: Vec<Vec<u64>>,
}

impl RecoveryPlan {
    pub fn sets_one_based(&self) -> Vec<Vec<usize>> {
        self.sets
            .iter()
            .map(|s| s.iter().map(|l| l + 1).collect())
            .collect()
    }

    /// Which request each bucket serves.
    pub fn owner_of_buckets(&self, m: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; m];
        for (j, set) in self.sets.iter().enumerate() {
            for &l in set {
                if l < m {
                    owner[l] = Some(j);
                }
            }
        }
        owner
    }
}

/// Checks a plan: the sets must partition all buckets into exactly `k`
/// non-empty parts, the coefficient identity must reproduce every
/// requested unit vector, and under [`ResponseModel::ProjectionOnly`] every
/// nonzero response must be a unit vector. Malformed shapes are errors;
/// a well-formed plan that does not work is `Ok(false)`.
pub fn certify_plan(
    code: &CodeSpec,
    request: &BatchRequest,
    plan: &RecoveryPlan,
    model: ResponseModel,
) -> Result<bool> {
    let m = code.m();
    let f = code.field();
    if plan.responses.len() != m {
        return Err(BacError::PlanShape(format!(
            "{} response vectors for {m} buckets",
            plan.responses.len()
        )));
    }
    for (l, r) in plan.responses.iter().enumerate() {
        if r.len() != code.bucket(l).len() {
            return Err(BacError::PlanShape(format!(
                "bucket {} response has length {}, bucket holds {}",
                l + 1,
                r.len(),
                code.bucket(l).len()
            )));
        }
    }
    if plan.combos.len() != plan.sets.len()
        || plan.combos.iter().zip(&plan.sets).any(|(c, s)| c.len() != s.len())
    {
        return Err(BacError::PlanShape("combination coefficients do not align with sets".into()));
    }
    for set in &plan.sets {
        for &l in set {
            code.check_bucket(l)?;
        }
    }
    for &i in request.indices() {
        code.check_symbol(i)?;
    }

    if plan.sets.len() != request.k() {
        return Ok(false);
    }
    let mut seen = vec![false; m];
    for set in &plan.sets {
        if set.is_empty() {
            return Ok(false);
        }
        for &l in set {
            if std::mem::replace(&mut seen[l], true) {
                return Ok(false);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Ok(false);
    }
    if model == ResponseModel::ProjectionOnly
        && plan
            .responses
            .iter()
            .any(|r| !r.is_zero() && r.unit_position().is_none())
    {
        return Ok(false);
    }

    // Effective column each bucket contributes: G_l * response_l.
    let effective: Vec<FVector> = (0..m)
        .map(|l| {
            let mut acc = FVector::zeros(code.n());
            for (col, &c) in code.bucket(l).iter().zip(plan.responses[l].entries()) {
                acc.axpy(c, col, f)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    for ((set, combo), &i) in plan.sets.iter().zip(&plan.combos).zip(request.indices()) {
        let mut acc = FVector::zeros(code.n());
        for (&l, &c) in set.iter().zip(combo) {
            acc.axpy(c % f.p(), &effective[l], f)?;
        }
        if acc != FVector::unit(code.n(), i) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Response and combination coefficients recovering `x_i` from `set`, or
/// `None` when the set cannot recover it under `model`.
fn synthesize(
    code: &CodeSpec,
    set: &[usize],
    i: usize,
    model: ResponseModel,
) -> Option<(Vec<(usize, FVector)>, Vec<u64>)> {
    let n = code.n();
    let target = FVector::unit(n, i);
    match model {
        ResponseModel::Linear => {
            let gens: Vec<FVector> = set.iter().flat_map(|&l| code.bucket(l).iter().cloned()).collect();
            let coeffs = span_solve(&target, &gens, code.field()).ok()??;
            let mut offset = 0;
            let mut responses = Vec::with_capacity(set.len());
            for &l in set {
                let len = code.bucket(l).len();
                responses.push((
                    l,
                    FVector::from_residues(coeffs[offset..offset + len].to_vec(), code.field()),
                ));
                offset += len;
            }
            Some((responses, vec![1; set.len()]))
        }
        ResponseModel::ProjectionOnly => {
            let choice = projection_choice(code, set, i)?;
            let gens: Vec<FVector> = choice
                .iter()
                .zip(set)
                .map(|(c, &l)| match c {
                    Some(s) => code.bucket(l)[*s].clone(),
                    None => FVector::zeros(n),
                })
                .collect();
            let coeffs = span_solve(&target, &gens, code.field()).ok()??;
            let responses = choice
                .iter()
                .zip(set)
                .zip(&coeffs)
                .map(|((c, &l), &coef)| {
                    let len = code.bucket(l).len();
                    match c {
                        Some(s) if coef != 0 => (l, FVector::unit(len, *s)),
                        _ => (l, FVector::zeros(len)),
                    }
                })
                .collect();
            Some((responses, coeffs))
        }
    }
}

/// One stored symbol per bucket (or none) whose span contains `e_i`.
fn projection_choice(code: &CodeSpec, set: &[usize], i: usize) -> Option<Vec<Option<usize>>> {
    fn go(
        code: &CodeSpec,
        set: &[usize],
        i: usize,
        pos: usize,
        ech: &Echelon,
        choice: &mut Vec<Option<usize>>,
    ) -> bool {
        if ech.contains_unit(i) {
            choice.resize(set.len(), None);
            return true;
        }
        if pos == set.len() {
            return false;
        }
        let bucket = code.bucket(set[pos]);
        for (s, col) in bucket.iter().enumerate() {
            if col.is_zero() {
                continue;
            }
            let mut next = ech.clone();
            if !next.insert(col.entries()) {
                continue;
            }
            choice.push(Some(s));
            if go(code, set, i, pos + 1, &next, choice) {
                return true;
            }
            choice.pop();
        }
        choice.push(None);
        if go(code, set, i, pos + 1, ech, choice) {
            return true;
        }
        choice.pop();
        false
    }
    let mut choice = Vec::with_capacity(set.len());
    let ech = Echelon::new(code.n(), code.field());
    go(code, set, i, 0, &ech, &mut choice).then_some(choice)
}

/// Symbols recoverable from a bucket set when each bucket may only return
/// one stored symbol.
fn projection_recoverable(code: &CodeSpec, set: &[usize]) -> Vec<bool> {
    let n = code.n();
    let mut out = vec![false; n];
    let mut remaining = n;
    fn go(
        code: &CodeSpec,
        set: &[usize],
        pos: usize,
        ech: &Echelon,
        out: &mut [bool],
        remaining: &mut usize,
    ) {
        if *remaining == 0 {
            return;
        }
        if pos == set.len() {
            for (i, o) in out.iter_mut().enumerate() {
                if !*o && ech.contains_unit(i) {
                    *o = true;
                    *remaining -= 1;
                }
            }
            return;
        }
        let mut seen: Vec<&FVector> = Vec::new();
        for col in code.bucket(set[pos]) {
            if col.is_zero() || seen.contains(&col) {
                continue;
            }
            seen.push(col);
            let mut next = ech.clone();
            if next.insert(col.entries()) {
                go(code, set, pos + 1, &next, out, remaining);
            }
        }
        go(code, set, pos + 1, ech, out, remaining);
    }
    let ech = Echelon::new(n, code.field());
    go(code, set, 0, &ech, &mut out, &mut remaining);
    out
}

/// Turns a chosen partition into a full certificate by solving for each
/// set's responses. Returns `None` if some set cannot recover its symbol.
pub fn plan_from_sets(
    code: &CodeSpec,
    request: &BatchRequest,
    sets: Vec<Vec<usize>>,
    model: ResponseModel,
) -> Option<RecoveryPlan> {
    let mut responses: Vec<FVector> = code.buckets().iter().map(|b| FVector::zeros(b.len())).collect();
    let mut combos = Vec::with_capacity(sets.len());
    let mut sets = sets;
    for s in sets.iter_mut() {
        s.sort_unstable();
    }
    for (set, &i) in sets.iter().zip(request.indices()) {
        let (resp, combo) = synthesize(code, set, i, model)?;
        for (l, r) in resp {
            responses[l] = r;
        }
        combos.push(combo);
    }
    Some(RecoveryPlan {
        sets,
        responses,
        combos,
    })
}

fn mask_members(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |l| mask >> l & 1 == 1)
}

/// Exhaustive plan search with a memo of recoverable symbols per bucket
/// subset. The memo is shared between requests and threads; entries are
/// written once and never change.
pub struct ExhaustivePlanner<'a> {
    code: &'a CodeSpec,
    model: ResponseModel,
    memo: DashMap<u64, Arc<Vec<bool>>>,
}

impl<'a> ExhaustivePlanner<'a> {
    pub fn new(code: &'a CodeSpec, model: ResponseModel) -> Result<Self> {
        if code.m() > 64 {
            return Err(BacError::TooManyBuckets(code.m()));
        }
        Ok(Self {
            code,
            model,
            memo: DashMap::new(),
        })
    }

    fn recoverable(&self, mask: u64) -> Arc<Vec<bool>> {
        if let Some(v) = self.memo.get(&mask) {
            return Arc::clone(&v);
        }
        let set: Vec<usize> = mask_members(mask).collect();
        let v = match self.model {
            ResponseModel::Linear => self.code.recoverable_by(set),
            ResponseModel::ProjectionOnly => projection_recoverable(self.code, &set),
        };
        Arc::clone(&self.memo.entry(mask).or_insert_with(|| Arc::new(v)))
    }

    fn minimal(&self, mask: u64, i: usize) -> bool {
        mask_members(mask).all(|l| !self.recoverable(mask & !(1 << l))[i])
    }

    fn search(&self, req: &[usize], remaining: u64, chosen: &mut Vec<u64>) -> bool {
        let j = chosen.len();
        let k = req.len();
        let rec = self.recoverable(remaining);
        if req[j..].iter().any(|&i| !rec[i]) {
            return false;
        }
        if j + 1 == k {
            chosen.push(remaining);
            return true;
        }
        let avail: Vec<usize> = mask_members(remaining).collect();
        let still_needed = k - j - 1;
        if avail.len() < k - j {
            return false;
        }
        let i = req[j];
        for size in 1..=avail.len() - still_needed {
            for combo in Combinations::new(avail.len(), size) {
                let mask = combo.iter().fold(0u64, |acc, &t| acc | 1 << avail[t]);
                if !self.recoverable(mask)[i] || !self.minimal(mask, i) {
                    continue;
                }
                chosen.push(mask);
                if self.search(req, remaining & !mask, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    /// Finds a plan for `request`, or `None` when no partition exists.
    pub fn find(&self, request: &BatchRequest) -> Result<Option<RecoveryPlan>> {
        let m = self.code.m();
        if request.k() > m {
            return Err(BacError::TooManyRequests { k: request.k(), m });
        }
        for &i in request.indices() {
            self.code.check_symbol(i)?;
        }
        let all = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
        let mut chosen = Vec::with_capacity(request.k());
        if !self.search(request.indices(), all, &mut chosen) {
            return Ok(None);
        }
        let sets = chosen.iter().map(|&mask| mask_members(mask).collect()).collect();
        let plan = plan_from_sets(self.code, request, sets, self.model)
            .expect("every chosen set recovers its symbol");
        debug_assert!(certify_plan(self.code, request, &plan, self.model).unwrap_or(false));
        Ok(Some(plan))
    }
}

/// Exact decision: a certified plan for `request` if any partition works.
pub fn find_plan(
    code: &CodeSpec,
    request: &BatchRequest,
    model: ResponseModel,
) -> Result<Option<RecoveryPlan>> {
    ExhaustivePlanner::new(code, model)?.find(request)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    #[serde(serialize_with = "one_based")]
    pub request: BatchRequest,
    pub reason: String,
}

fn one_based<S: serde::Serializer>(r: &BatchRequest, s: S) -> std::result::Result<S::Ok, S::Error> {
    r.one_based().serialize(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub status: Status,
    #[serde(rename = "checked")]
    pub total_requests: usize,
    pub failures: Vec<Failure>,
    #[serde(rename = "elapsed_ms", serialize_with = "millis")]
    pub elapsed: Duration,
}

fn millis<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// First failing request in enumeration order.
    pub fn first_failure(&self) -> Option<&BatchRequest> {
        self.failures.first().map(|f| &f.request)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn check_final_code(code: &CodeSpec, k: usize) -> Result<()> {
    if k == 0 {
        return Err(BacError::EmptyRequest);
    }
    if k > code.m() {
        return Err(BacError::TooManyRequests { k, m: code.m() });
    }
    if let Some(l) = code.buckets().iter().position(Vec::is_empty) {
        return Err(BacError::InvalidParams(format!("bucket {} is empty", l + 1)));
    }
    Ok(())
}

fn run_requests(
    code: &CodeSpec,
    requests: Vec<BatchRequest>,
    model: ResponseModel,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let planner = ExhaustivePlanner::new(code, model)?;
    let total = requests.len();
    let mut failures: Vec<Failure> = requests
        .into_par_iter()
        .map(|r| match planner.find(&r) {
            Ok(Some(_)) => Ok(None),
            Ok(None) => Ok(Some(Failure {
                request: r,
                reason: "no-partition".into(),
            })),
            Err(e) => Err(e),
        })
        .filter_map(|r| r.transpose())
        .collect::<Result<_>>()?;
    failures.sort_by(|a, b| a.request.cmp(&b.request));
    Ok(VerificationReport {
        status: if failures.is_empty() { Status::Pass } else { Status::Fail },
        total_requests: total,
        failures,
        elapsed: start.elapsed(),
    })
}

/// Checks every size-`k` multiset over `[n]`, in lexicographic order.
pub fn verify_bac(code: &CodeSpec, k: usize, model: ResponseModel) -> Result<VerificationReport> {
    check_final_code(code, k)?;
    let requests = Multisets::new(code.n(), k)
        .map(|idx| BatchRequest { indices: idx })
        .collect();
    run_requests(code, requests, model)
}

/// Checks only the `n` identical requests `<i, ..., i>`.
pub fn verify_pir(code: &CodeSpec, k: usize, model: ResponseModel) -> Result<VerificationReport> {
    check_final_code(code, k)?;
    let requests = (0..code.n())
        .map(|i| BatchRequest { indices: vec![i; k] })
        .collect();
    run_requests(code, requests, model)
}

/// Whether every `(m-k+1)`-subset of buckets jointly recovers every symbol,
/// a necessary condition for any k-PIR array code.
pub fn check_subset_spanning(code: &CodeSpec, k: usize) -> Result<bool> {
    let m = code.m();
    if k == 0 || k > m {
        return Err(BacError::TooManyRequests { k, m });
    }
    let found_gap = Combinations::new(m, m - k + 1)
        .par_bridge()
        .any(|subset| code.recoverable_by(subset).iter().any(|r| !r));
    Ok(!found_gap)
}
