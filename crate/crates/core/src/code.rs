//! Array codes as lists of buckets, each bucket a list of generator columns.
//!
//! Bucket `l` stores `N_l` symbols; symbol `s` of the bucket is the inner
//! product of the data vector with column `s`. Library indices are 0-based;
//! the JSON format and CLI present 1-based indices.

use crate::error::{BacError, Result};
use crate::field::{recoverable_symbols, Echelon, FVector, PrimeField};

/// One storage node: its generator columns, each of length `n`.
pub type Bucket = Vec<FVector>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CodeSpec {
    field: PrimeField,
    n: usize,
    buckets: Vec<Bucket>,
}

impl CodeSpec {
    /// Validates shapes and normalizes every entry into `[0, p)`.
    pub fn new(field: PrimeField, n: usize, buckets: Vec<Bucket>) -> Result<Self> {
        if n == 0 {
            return Err(BacError::InvalidParams("n must be at least 1".into()));
        }
        if buckets.is_empty() {
            return Err(BacError::InvalidParams("a code needs at least one bucket".into()));
        }
        let mut normalized = Vec::with_capacity(buckets.len());
        for bucket in buckets {
            let mut cols = Vec::with_capacity(bucket.len());
            for col in bucket {
                if col.len() != n {
                    return Err(BacError::LengthMismatch {
                        expected: n,
                        got: col.len(),
                    });
                }
                cols.push(FVector::from_residues(col.into_inner(), field));
            }
            normalized.push(cols);
        }
        Ok(Self {
            field,
            n,
            buckets: normalized,
        })
    }

    /// Convenience constructor from per-bucket lists of 0-based symbol
    /// subsets: each subset becomes one column, the sum of its symbols.
    pub fn from_sums(field: PrimeField, n: usize, buckets: &[Vec<Vec<usize>>]) -> Result<Self> {
        let mut out = Vec::with_capacity(buckets.len());
        for bucket in buckets {
            let mut cols = Vec::with_capacity(bucket.len());
            for support in bucket {
                let mut col = vec![0u64; n];
                for &i in support {
                    if i >= n {
                        return Err(BacError::SymbolOutOfRange { index: i + 1, n });
                    }
                    col[i] = field.add(col[i], 1);
                }
                cols.push(FVector::from_residues(col, field));
            }
            out.push(cols);
        }
        Self::new(field, n, out)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Number of information symbols.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of buckets.
    pub fn m(&self) -> usize {
        self.buckets.len()
    }

    pub fn buckets(&self) -> &[Bucket] {
        &self.buckets
    }

    pub fn bucket(&self, l: usize) -> &Bucket {
        &self.buckets[l]
    }

    pub fn bucket_sizes(&self) -> Vec<usize> {
        self.buckets.iter().map(Vec::len).collect()
    }

    /// Total length `N`, the sum of all bucket sizes.
    pub fn total_length(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }

    pub fn is_uniform(&self) -> bool {
        self.buckets.windows(2).all(|w| w[0].len() == w[1].len())
    }

    pub fn has_empty_bucket(&self) -> bool {
        self.buckets.iter().any(Vec::is_empty)
    }

    /// Whether bucket `l` stores `x_i` verbatim.
    pub fn bucket_stores_symbol(&self, l: usize, i: usize) -> bool {
        self.buckets[l].iter().any(|c| c.unit_position() == Some(i))
    }

    /// `x . G_l` for every bucket.
    pub fn encode(&self, x: &FVector) -> Result<Codeword> {
        if x.len() != self.n {
            return Err(BacError::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let x = FVector::from_residues(x.entries().to_vec(), self.field);
        let values = self
            .buckets
            .iter()
            .map(|b| {
                let vals: Result<Vec<u64>> = b.iter().map(|c| x.dot(c, self.field)).collect();
                vals.map(|v| FVector::from_residues(v, self.field))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Codeword { values })
    }

    pub(crate) fn check_bucket(&self, l: usize) -> Result<()> {
        if l >= self.m() {
            return Err(BacError::BucketOutOfRange {
                index: l + 1,
                m: self.m(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_symbol(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(BacError::SymbolOutOfRange {
                index: i + 1,
                n: self.n,
            });
        }
        Ok(())
    }

    /// For every symbol, whether the buckets in `set` jointly recover it
    /// under the linear-response model.
    pub fn recoverable_by<I: IntoIterator<Item = usize>>(&self, set: I) -> Vec<bool> {
        let cols = set.into_iter().flat_map(|l| self.buckets[l].iter());
        recoverable_symbols(self.n, cols, self.field)
    }

    /// Whether the buckets in `set` recover `x_i`: each bucket answers with
    /// one linear function of its contents and the answers are combined
    /// linearly, so this holds iff `e_i` lies in the joint column span.
    pub fn bucket_set_recovers(&self, set: &[usize], i: usize) -> Result<bool> {
        self.check_symbol(i)?;
        for &l in set {
            self.check_bucket(l)?;
        }
        let mut ech = Echelon::new(self.n, self.field);
        for &l in set {
            for c in &self.buckets[l] {
                ech.insert(c.entries());
            }
        }
        Ok(ech.contains_unit(i))
    }

    /// Replaces every bucket by the lowest-index-first basis of its column
    /// space. Column spans, and hence every recoverability outcome, are
    /// unchanged; afterwards each bucket holds at most `n` columns.
    pub fn cap_and_reduce(&self) -> CodeSpec {
        let buckets = self
            .buckets
            .iter()
            .map(|b| {
                let mut ech = Echelon::new(self.n, self.field);
                b.iter()
                    .filter(|c| ech.insert(c.entries()))
                    .cloned()
                    .collect()
            })
            .collect();
        CodeSpec {
            field: self.field,
            n: self.n,
            buckets,
        }
    }

    /// Copy of the code with the given 0-based bucket removed.
    pub fn without_bucket(&self, l: usize) -> Result<CodeSpec> {
        self.check_bucket(l)?;
        let mut buckets = self.buckets.clone();
        buckets.remove(l);
        CodeSpec::new(self.field, self.n, buckets)
    }

    /// Copy of the code with one column removed from bucket `l`.
    pub fn without_column(&self, l: usize, s: usize) -> Result<CodeSpec> {
        self.check_bucket(l)?;
        if s >= self.buckets[l].len() {
            return Err(BacError::InvalidParams(format!(
                "bucket {} has no column {}",
                l + 1,
                s + 1
            )));
        }
        let mut buckets = self.buckets.clone();
        buckets[l].remove(s);
        Ok(CodeSpec {
            field: self.field,
            n: self.n,
            buckets,
        })
    }

    /// Human-readable rendering of a column, e.g. `x1+x2+2x4`.
    pub fn describe_column(col: &FVector) -> String {
        let terms: Vec<String> = col
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| {
                if c == 1 {
                    format!("x{}", i + 1)
                } else {
                    format!("{c}x{}", i + 1)
                }
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }
}

/// The stored contents of every bucket for one data vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    pub values: Vec<FVector>,
}
