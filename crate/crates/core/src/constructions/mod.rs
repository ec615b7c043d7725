//! Explicit generators and the certified planners that follow their
//! correctness proofs.

pub mod compose;
pub mod cyclic;
pub mod goodvec;
pub mod matching;
pub mod simple;
pub mod uniform;

pub use compose::{compose_concat, compose_parallel, compose_repeat};
pub use cyclic::{cyclic_plan_sets, cyclic_shift_code, CyclicParams};
pub use goodvec::{
    canonical_recovery_sets, enumerate_good_vectors, find_good_vector, good_vector_2t1,
    good_vector_code, goodvec_plan_sets, is_good_vector, max_batch_k, BatchThreshold, GoodVector,
};
pub use simple::{parity_code_k2, single_request_code, trivial_replication};
pub use uniform::{uniform_code, uniform_plan_sets, UniformParams};

use crate::affine::{greedy_sets, AffinePlaneCode, GreedyOptions};
use crate::code::CodeSpec;
use crate::error::{BacError, Result};
use crate::format::Provenance;
use crate::verify::{certify_plan, plan_from_sets, BatchRequest, RecoveryPlan, ResponseModel};

/// Regenerates the code a provenance block describes.
pub fn regenerate(provenance: &Provenance, field: crate::field::PrimeField) -> Result<CodeSpec> {
    match provenance {
        Provenance::Replication { n, k } => trivial_replication(*n, *k, field),
        Provenance::Single { n, m } => single_request_code(*n, *m, field),
        Provenance::Parity { m } => parity_code_k2(*m, field),
        Provenance::Cyclic { n, k, m } => cyclic_shift_code(*n, *k, *m, field),
        Provenance::Uniform { n, k } => uniform_code(*n, *k, field),
        Provenance::Goodvec { v } => good_vector_code(&GoodVector::from_entries(v.clone())?, field),
        Provenance::Affine { .. } => Ok(AffinePlaneCode::from_provenance(provenance)?.code),
    }
}

/// Number of requests the family is built to serve, if fixed.
pub fn claimed_k(provenance: &Provenance) -> Option<usize> {
    match provenance {
        Provenance::Replication { k, .. } => Some(*k),
        Provenance::Single { .. } => Some(1),
        Provenance::Parity { .. } => Some(2),
        Provenance::Cyclic { k, .. } | Provenance::Uniform { k, .. } => Some(*k),
        Provenance::Goodvec { v } => Some(max_batch_k(v.len() / 2).exact),
        Provenance::Affine { .. } => None,
    }
}

/// Recovery sets chosen by the family's own procedure.
pub fn family_plan_sets(provenance: &Provenance, request: &BatchRequest) -> Result<Vec<Vec<usize>>> {
    let idx = request.indices();
    let need_k = |k: usize| {
        if request.k() == k {
            Ok(())
        } else {
            Err(BacError::InvalidParams(format!(
                "this code's planner serves exactly {k} requests, got {}",
                request.k()
            )))
        }
    };
    match provenance {
        Provenance::Replication { k, .. } => {
            need_k(*k)?;
            Ok((0..*k).map(|j| vec![j]).collect())
        }
        Provenance::Single { m, .. } => {
            need_k(1)?;
            Ok(vec![(0..*m).collect()])
        }
        Provenance::Parity { m } => {
            need_k(2)?;
            let first = idx[0];
            Ok(vec![vec![first], (0..*m).filter(|&l| l != first).collect()])
        }
        Provenance::Cyclic { n, k, m } => cyclic_plan_sets(&CyclicParams::new(*n, *k, *m)?, request),
        Provenance::Uniform { n, k } => uniform_plan_sets(&UniformParams::new(*n, *k)?, request),
        Provenance::Goodvec { v } => goodvec_plan_sets(&GoodVector::from_entries(v.clone())?, request),
        Provenance::Affine { .. } => {
            let apc = AffinePlaneCode::from_provenance(provenance)?;
            greedy_sets(&apc, request, GreedyOptions::default())?
                .ok_or_else(|| BacError::NoPlan(request.one_based()))
        }
    }
}

/// A certified plan from the family planner recorded in `provenance`. The
/// code must be the one the provenance regenerates.
pub fn certified_plan(
    code: &CodeSpec,
    provenance: &Provenance,
    request: &BatchRequest,
) -> Result<RecoveryPlan> {
    if &regenerate(provenance, code.field())? != code {
        return Err(BacError::InvalidParams(
            "code does not match its recorded construction parameters".into(),
        ));
    }
    let sets = family_plan_sets(provenance, request)?;
    let plan = plan_from_sets(code, request, sets, ResponseModel::Linear)
        .ok_or_else(|| BacError::NoPlan(request.one_based()))?;
    if !certify_plan(code, request, &plan, ResponseModel::Linear)? {
        return Err(BacError::NoPlan(request.one_based()));
    }
    Ok(plan)
}
