//! Gadget-lemma compositions.

use crate::code::{Bucket, CodeSpec};
use crate::error::{BacError, Result};
use crate::field::{FVector, PrimeField};

fn same_field(a: &CodeSpec, b: &CodeSpec) -> Result<()> {
    if a.field() != b.field() {
        return Err(BacError::FieldMismatch(a.field().p(), b.field().p()));
    }
    Ok(())
}

fn embed(bucket: &Bucket, offset: usize, total: usize, field: PrimeField) -> Bucket {
    bucket
        .iter()
        .map(|col| {
            let mut v = vec![0u64; total];
            v[offset..offset + col.len()].copy_from_slice(col.entries());
            FVector::from_residues(v, field)
        })
        .collect()
}

/// Same data, buckets side by side: `(n, N1+N2, k1+k2, m1+m2)`.
pub fn compose_parallel(a: &CodeSpec, b: &CodeSpec) -> Result<CodeSpec> {
    same_field(a, b)?;
    if a.n() != b.n() {
        return Err(BacError::LengthMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    let buckets = a.buckets().iter().chain(b.buckets()).cloned().collect();
    CodeSpec::new(a.field(), a.n(), buckets)
}

/// Disjoint data halves: `(n1+n2, N1+N2, min(k1,k2), m1+m2)`.
pub fn compose_concat(a: &CodeSpec, b: &CodeSpec) -> Result<CodeSpec> {
    same_field(a, b)?;
    let n = a.n() + b.n();
    let f = a.field();
    let buckets = a
        .buckets()
        .iter()
        .map(|bk| embed(bk, 0, n, f))
        .chain(b.buckets().iter().map(|bk| embed(bk, a.n(), n, f)))
        .collect();
    CodeSpec::new(f, n, buckets)
}

/// `count` copies on disjoint data blocks sharing the same `m` buckets:
/// `(cn, cN, k, m)`. Bucket `l` concatenates bucket `l` of every copy.
pub fn compose_repeat(c: &CodeSpec, count: usize) -> Result<CodeSpec> {
    if count == 0 {
        return Err(BacError::InvalidParams("repeat count must be at least 1".into()));
    }
    let n = c.n() * count;
    let f = c.field();
    let buckets = c
        .buckets()
        .iter()
        .map(|bk| (0..count).flat_map(|copy| embed(bk, copy * c.n(), n, f)).collect())
        .collect();
    CodeSpec::new(f, n, buckets)
}
