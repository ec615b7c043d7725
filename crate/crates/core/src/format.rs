//! Canonical JSON code documents.
//!
//! ```json
//! {"format":"bacforge-code-v1","p":2,"n":4,"buckets":[[[1,0,0,0],[0,1,0,0]],...]}
//! ```
//!
//! Keys appear in exactly that order, followed by an optional
//! `"provenance"` object naming the generator and its parameters so that
//! certified planners can be re-attached after a round trip. Unknown keys
//! are rejected. Serialization is compact and newline-terminated, which
//! makes parse/re-serialize byte-stable.

use serde::{Deserialize, Serialize};

use crate::code::CodeSpec;
use crate::error::{BacError, Result};
use crate::field::{FVector, PrimeField};

pub const FORMAT_ID: &str = "bacforge-code-v1";

/// Generator parameters recorded alongside a code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum Provenance {
    Replication { n: usize, k: usize },
    Single { n: usize, m: usize },
    Parity { m: usize },
    Cyclic { n: usize, k: usize, m: usize },
    Uniform { n: usize, k: usize },
    Goodvec { v: Vec<usize> },
    Affine {
        q: u64,
        s: u64,
        p1: f64,
        p2: f64,
        seed: u64,
        rng: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodeDocument {
    pub code: CodeSpec,
    pub provenance: Option<Provenance>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    format: String,
    p: u64,
    n: usize,
    buckets: Vec<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

impl CodeDocument {
    pub fn new(code: CodeSpec, provenance: Option<Provenance>) -> Self {
        Self { code, provenance }
    }

    pub fn to_json(&self) -> String {
        let raw = RawDocument {
            format: FORMAT_ID.to_string(),
            p: self.code.field().p(),
            n: self.code.n(),
            buckets: self
                .code
                .buckets()
                .iter()
                .map(|b| b.iter().map(|c| c.entries().to_vec()).collect())
                .collect(),
            provenance: self.provenance.clone(),
        };
        let mut s = serde_json::to_string(&raw).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawDocument =
            serde_json::from_str(text).map_err(|e| BacError::Format(e.to_string()))?;
        if raw.format != FORMAT_ID {
            return Err(BacError::Format(format!(
                "unsupported format {:?}, expected {FORMAT_ID:?}",
                raw.format
            )));
        }
        let field = PrimeField::new(raw.p)?;
        let mut buckets = Vec::with_capacity(raw.buckets.len());
        for (l, bucket) in raw.buckets.into_iter().enumerate() {
            let mut cols = Vec::with_capacity(bucket.len());
            for col in bucket {
                if let Some(&bad) = col.iter().find(|&&e| e >= raw.p) {
                    return Err(BacError::Format(format!(
                        "bucket {} holds entry {bad} outside [0,{})",
                        l + 1,
                        raw.p
                    )));
                }
                cols.push(FVector::from_residues(col, field));
            }
            buckets.push(cols);
        }
        let code = CodeSpec::new(field, raw.n, buckets)?;
        Ok(Self {
            code,
            provenance: raw.provenance,
        })
    }
}
