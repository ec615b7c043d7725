//! Prime-field arithmetic and the small amount of exact linear algebra the
//! rest of the crate needs: rank, span membership and span solving.
//!
//! Residues are `u64` values kept canonical in `[0, p)`. The modulus is
//! capped below 2^32 so every product fits in a `u64` without widening.
//!
//! Elimination always takes the lowest-index pivot, so coefficient vectors
//! and reduced bases are reproducible across runs and platforms.

use serde::{Deserialize, Serialize};

use crate::error::{BacError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub const GF2: PrimeField = PrimeField { p: 2 };

    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 32 {
            return Err(BacError::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(BacError::NotPrime(p));
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Canonical representative of an arbitrary signed integer.
    #[inline]
    pub fn reduce(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a * b) % self.p
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        ff_inverse(a, *self)
    }
}

impl TryFrom<u64> for PrimeField {
    type Error = BacError;

    fn try_from(p: u64) -> Result<Self> {
        PrimeField::new(p)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        f.p
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        Self::GF2
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Multiplicative inverse of `a` modulo the field's prime.
pub fn ff_inverse(a: u64, field: PrimeField) -> Result<u64> {
    let a = a % field.p;
    if a == 0 {
        return Err(BacError::NotInvertible(a, field.p));
    }
    Ok(field.pow(a, field.p - 2))
}

/// A vector of canonical residues.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FVector(Vec<u64>);

impl FVector {
    /// Builds a vector from arbitrary integers, reducing each into `[0, p)`.
    pub fn new<I: IntoIterator<Item = i64>>(entries: I, field: PrimeField) -> Self {
        Self(entries.into_iter().map(|e| field.reduce(e)).collect())
    }

    /// Builds a vector from unsigned values, reducing each into `[0, p)`.
    pub fn from_residues(mut entries: Vec<u64>, field: PrimeField) -> Self {
        for e in entries.iter_mut() {
            *e %= field.p;
        }
        Self(entries)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    /// Unit vector with a one at 0-based position `i`.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = vec![0; len];
        v[i] = 1;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Number of nonzero entries.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&e| e != 0).count()
    }

    /// 0-based position of the single one, if this is a unit vector.
    pub fn unit_position(&self) -> Option<usize> {
        let mut found = None;
        for (i, &e) in self.0.iter().enumerate() {
            match e {
                0 => {}
                1 if found.is_none() => found = Some(i),
                _ => return None,
            }
        }
        found
    }

    pub fn dot(&self, other: &FVector, field: PrimeField) -> Result<u64> {
        check_len(self.len(), other.len())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .fold(0, |acc, (&a, &b)| field.add(acc, field.mul(a, b))))
    }

    pub fn add(&self, other: &FVector, field: PrimeField) -> Result<FVector> {
        check_len(self.len(), other.len())?;
        Ok(FVector(
            self.0.iter().zip(&other.0).map(|(&a, &b)| field.add(a, b)).collect(),
        ))
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: u64, other: &FVector, field: PrimeField) -> Result<()> {
        check_len(self.len(), other.len())?;
        if c != 0 {
            for (a, &b) in self.0.iter_mut().zip(&other.0) {
                *a = field.add(*a, field.mul(c, b));
            }
        }
        Ok(())
    }

    pub fn scale(&self, c: u64, field: PrimeField) -> FVector {
        FVector(self.0.iter().map(|&a| field.mul(a, c)).collect())
    }
}

impl std::ops::Index<usize> for FVector {
    type Output = u64;

    fn index(&self, i: usize) -> &u64 {
        &self.0[i]
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(BacError::LengthMismatch { expected, got });
    }
    Ok(())
}

fn uniform_len(vectors: &[FVector]) -> Result<Option<usize>> {
    let Some(first) = vectors.first() else {
        return Ok(None);
    };
    for v in vectors {
        check_len(first.len(), v.len())?;
    }
    Ok(Some(first.len()))
}

/// Finds `c` with `sum c_i * generators[i] == target`, or `None` when the
/// target lies outside the span. Free coefficients are set to zero.
pub fn span_solve(
    target: &FVector,
    generators: &[FVector],
    field: PrimeField,
) -> Result<Option<Vec<u64>>> {
    let n = target.len();
    for g in generators {
        check_len(n, g.len())?;
    }
    let g = generators.len();
    // Row r holds coordinate r of every generator followed by the target.
    let mut rows: Vec<Vec<u64>> = (0..n)
        .map(|r| {
            let mut row: Vec<u64> = generators.iter().map(|gen| gen[r]).collect();
            row.push(target[r]);
            row
        })
        .collect();

    let mut pivot_of_col: Vec<Option<usize>> = vec![None; g];
    let mut used = vec![false; n];
    for col in 0..g {
        let Some(pr) = (0..n).find(|&r| !used[r] && rows[r][col] != 0) else {
            continue;
        };
        used[pr] = true;
        pivot_of_col[col] = Some(pr);
        let inv = field.inv(rows[pr][col])?;
        for e in rows[pr].iter_mut() {
            *e = field.mul(*e, inv);
        }
        let pivot_row = rows[pr].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == pr || row[col] == 0 {
                continue;
            }
            let f = row[col];
            for (e, &pe) in row.iter_mut().zip(&pivot_row) {
                *e = field.sub(*e, field.mul(f, pe));
            }
        }
    }
    if (0..n).any(|r| !used[r] && rows[r][g] != 0) {
        return Ok(None);
    }
    Ok(Some(
        pivot_of_col
            .iter()
            .map(|p| p.map_or(0, |r| rows[r][g]))
            .collect(),
    ))
}

/// Dimension of the span of `vectors` (0 for an empty list).
pub fn rank(vectors: &[FVector], field: PrimeField) -> Result<usize> {
    let Some(n) = uniform_len(vectors)? else {
        return Ok(0);
    };
    let mut ech = Echelon::new(n, field);
    for v in vectors {
        ech.insert(v.entries());
    }
    Ok(ech.rank())
}

/// Fully reduced row-echelon basis of a subspace, grown one vector at a time.
#[derive(Clone, Debug)]
pub struct Echelon {
    field: PrimeField,
    dim: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(dim: usize, field: PrimeField) -> Self {
        Self {
            field,
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let f = self.field;
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = v[p];
            if c != 0 {
                for (e, &re) in v.iter_mut().zip(row) {
                    *e = f.sub(*e, f.mul(c, re));
                }
            }
        }
        v
    }

    /// Adds `v` to the spanning set. Returns true when the rank grew.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        debug_assert_eq!(v.len(), self.dim);
        let f = self.field;
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|&e| e != 0) else {
            return false;
        };
        let inv = f.inv(r[p]).expect("nonzero residue");
        for e in r.iter_mut() {
            *e = f.mul(*e, inv);
        }
        for row in self.rows.iter_mut() {
            let c = row[p];
            if c != 0 {
                for (e, &re) in row.iter_mut().zip(&r) {
                    *e = f.sub(*e, f.mul(c, re));
                }
            }
        }
        self.rows.push(r);
        self.pivots.push(p);
        true
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&e| e == 0)
    }

    /// Whether the unit vector `e_i` lies in the span. In a fully reduced
    /// basis this happens exactly when some basis row equals `e_i`.
    pub fn contains_unit(&self, i: usize) -> bool {
        self.rows
            .iter()
            .zip(&self.pivots)
            .any(|(row, &p)| p == i && row.iter().enumerate().all(|(j, &e)| (j == i) == (e != 0)))
    }
}

/// Bit-packed GF(2) counterpart of [`Echelon`].
#[derive(Clone, Debug)]
pub struct Gf2Echelon {
    words: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Gf2Echelon {
    pub fn new(dim: usize) -> Self {
        Self {
            words: dim.div_ceil(64),
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn pack(v: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; v.len().div_ceil(64)];
        for (i, &e) in v.iter().enumerate() {
            if e & 1 == 1 {
                out[i / 64] |= 1 << (i % 64);
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut v: Vec<u64>) -> Vec<u64> {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p / 64] >> (p % 64) & 1 == 1 {
                for (a, b) in v.iter_mut().zip(row) {
                    *a ^= b;
                }
            }
        }
        v
    }

    pub fn insert_packed(&mut self, v: Vec<u64>) -> bool {
        debug_assert_eq!(v.len(), self.words);
        let r = self.reduce(v);
        let Some(w) = r.iter().position(|&x| x != 0) else {
            return false;
        };
        let p = w * 64 + r[w].trailing_zeros() as usize;
        for row in self.rows.iter_mut() {
            if row[p / 64] >> (p % 64) & 1 == 1 {
                for (a, b) in row.iter_mut().zip(&r) {
                    *a ^= b;
                }
            }
        }
        self.rows.push(r);
        self.pivots.push(p);
        true
    }

    pub fn contains_unit(&self, i: usize) -> bool {
        self.rows.iter().zip(&self.pivots).any(|(row, &p)| {
            p == i
                && row
                    .iter()
                    .enumerate()
                    .all(|(w, &x)| x == if w == i / 64 { 1 << (i % 64) } else { 0 })
        })
    }
}

/// For each coordinate `i < dim`, whether `e_i` lies in the span of `columns`.
/// Uses the bit-packed path over GF(2) and the generic path otherwise.
pub fn recoverable_symbols<'a, I>(dim: usize, columns: I, field: PrimeField) -> Vec<bool>
where
    I: IntoIterator<Item = &'a FVector>,
{
    if field.p() == 2 {
        recoverable_symbols_gf2(dim, columns)
    } else {
        recoverable_symbols_generic(dim, columns, field)
    }
}

pub fn recoverable_symbols_generic<'a, I>(dim: usize, columns: I, field: PrimeField) -> Vec<bool>
where
    I: IntoIterator<Item = &'a FVector>,
{
    let mut ech = Echelon::new(dim, field);
    for c in columns {
        if ech.rank() == dim {
            break;
        }
        ech.insert(c.entries());
    }
    (0..dim).map(|i| ech.contains_unit(i)).collect()
}

pub fn recoverable_symbols_gf2<'a, I>(dim: usize, columns: I) -> Vec<bool>
where
    I: IntoIterator<Item = &'a FVector>,
{
    let mut ech = Gf2Echelon::new(dim);
    for c in columns {
        if ech.rank() == dim {
            break;
        }
        ech.insert_packed(Gf2Echelon::pack(c.entries()));
    }
    (0..dim).map(|i| ech.contains_unit(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(e: &[i64], f: PrimeField) -> FVector {
        FVector::new(e.iter().copied(), f)
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(ff_inverse(1, PrimeField::new(2).unwrap()).unwrap(), 1);
        assert_eq!(ff_inverse(2, PrimeField::new(5).unwrap()).unwrap(), 3);
        assert_eq!(ff_inverse(4, PrimeField::new(7).unwrap()).unwrap(), 2);
        assert_eq!(
            ff_inverse(0, PrimeField::new(7).unwrap()),
            Err(BacError::NotInvertible(0, 7))
        );
    }

    #[test]
    fn rejects_composite_modulus() {
        assert_eq!(PrimeField::new(4), Err(BacError::NotPrime(4)));
        assert_eq!(PrimeField::new(1), Err(BacError::NotPrime(1)));
        assert!(PrimeField::new(65521).is_ok());
    }

    #[test]
    fn normalizes_inputs() {
        let f = PrimeField::new(5).unwrap();
        assert_eq!(v(&[-1, 7, 5], f).entries(), &[4, 2, 0]);
        assert_eq!(FVector::from_residues(vec![9, 10], f).entries(), &[4, 0]);
    }

    #[test]
    fn span_solve_reads_x1_from_two_buckets() {
        let f = PrimeField::GF2;
        let gens = vec![
            v(&[0, 1, 0, 0], f),
            v(&[0, 0, 1, 0], f),
            v(&[0, 0, 0, 1], f),
            v(&[1, 1, 1, 1], f),
        ];
        let c = span_solve(&v(&[1, 0, 0, 0], f), &gens, f).unwrap().unwrap();
        assert_eq!(c, vec![1, 1, 1, 1]);
    }

    #[test]
    fn span_solve_identity_and_absent() {
        let f = PrimeField::new(3).unwrap();
        let gens = vec![v(&[1, 2, 0], f), v(&[0, 1, 1], f), v(&[2, 2, 2], f)];
        assert_eq!(span_solve(&gens[0], &gens, f).unwrap().unwrap(), vec![1, 0, 0]);

        let e = |i| FVector::unit(3, i);
        assert_eq!(span_solve(&e(0), &[e(1), e(2)], f).unwrap(), None);
        assert_eq!(span_solve(&e(0), &[], f).unwrap(), None);
        assert!(span_solve(&FVector::zeros(3), &[], f).unwrap().unwrap().is_empty());
    }

    #[test]
    fn span_solve_length_mismatch() {
        let f = PrimeField::GF2;
        assert!(matches!(
            span_solve(&FVector::zeros(3), &[FVector::zeros(2)], f),
            Err(BacError::LengthMismatch { .. })
        ));
        assert!(rank(&[FVector::zeros(3), FVector::zeros(2)], f).is_err());
    }

    #[test]
    fn rank_examples() {
        let vs = |f| vec![v(&[1, 1, 0], f), v(&[0, 1, 1], f), v(&[1, 0, 1], f)];
        assert_eq!(rank(&[], PrimeField::GF2).unwrap(), 0);
        assert_eq!(rank(&vs(PrimeField::GF2), PrimeField::GF2).unwrap(), 2);
        let f3 = PrimeField::new(3).unwrap();
        assert_eq!(rank(&vs(f3), f3).unwrap(), 3);
    }

    /// Determinant by cofactor expansion, used as an independent check on rank.
    fn det3(m: [[i64; 3]; 3]) -> i64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    #[test]
    fn rank_three_iff_determinant_nonzero() {
        let m = [[1, 1, 0], [0, 1, 1], [1, 0, 1]];
        assert_eq!(det3(m), 2);
        for p in [2u64, 3, 5, 7] {
            let f = PrimeField::new(p).unwrap();
            let vs: Vec<_> = m.iter().map(|r| v(r, f)).collect();
            let full = det3(m).rem_euclid(p as i64) != 0;
            assert_eq!(rank(&vs, f).unwrap() == 3, full, "p={p}");
        }
    }

    fn arb_system() -> impl Strategy<Value = (u64, usize, Vec<Vec<u64>>, Vec<u64>)> {
        (prop::sample::select(vec![2u64, 3, 5, 7]), 1usize..6, 0usize..7).prop_flat_map(
            |(p, n, g)| {
                (
                    Just(p),
                    Just(n),
                    prop::collection::vec(prop::collection::vec(0..p, n), g),
                    prop::collection::vec(0..p, n),
                )
            },
        )
    }

    proptest! {
        #[test]
        fn solve_round_trips_and_matches_rank((p, n, gens, target) in arb_system()) {
            let f = PrimeField::new(p).unwrap();
            let gens: Vec<FVector> = gens.into_iter().map(|g| FVector::from_residues(g, f)).collect();
            let target = FVector::from_residues(target, f);
            let sol = span_solve(&target, &gens, f).unwrap();
            let r = rank(&gens, f).unwrap();
            let mut with = gens.clone();
            with.push(target.clone());
            let r_with = rank(&with, f).unwrap();
            prop_assert_eq!(sol.is_some(), r == r_with);
            if let Some(c) = sol {
                let mut acc = FVector::zeros(n);
                for (ci, g) in c.iter().zip(&gens) {
                    acc.axpy(*ci, g, f).unwrap();
                }
                prop_assert_eq!(acc, target);
            }
        }

        #[test]
        fn rank_invariant_under_permutation_and_scaling(
            (p, _n, gens, _t) in arb_system(),
            seed in any::<u64>(),
        ) {
            let f = PrimeField::new(p).unwrap();
            let gens: Vec<FVector> = gens.into_iter().map(|g| FVector::from_residues(g, f)).collect();
            let r = rank(&gens, f).unwrap();
            let mut shuffled = gens.clone();
            shuffled.reverse();
            if !shuffled.is_empty() {
                let k = (seed as usize) % shuffled.len();
                shuffled.rotate_left(k);
                let c = 1 + seed % (p - 1).max(1);
                shuffled[0] = shuffled[0].scale(c % p, f);
            }
            prop_assert_eq!(rank(&shuffled, f).unwrap(), r);
        }

        #[test]
        fn gf2_fast_path_agrees_with_generic(
            cols in prop::collection::vec(prop::collection::vec(0u64..2, 70), 0..12),
        ) {
            let f = PrimeField::GF2;
            let cols: Vec<FVector> = cols.into_iter().map(|c| FVector::from_residues(c, f)).collect();
            // Sparse-ish columns so unit vectors actually show up.
            let sparse: Vec<FVector> = cols
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    let mut e = vec![0u64; 70];
                    e[(j * 7) % 70] = 1;
                    if c[0] == 1 { e[(j * 7 + 1) % 70] = 1; }
                    FVector::from_residues(e, f)
                })
                .chain(cols.iter().cloned())
                .collect();
            prop_assert_eq!(
                recoverable_symbols_gf2(70, &sparse),
                recoverable_symbols_generic(70, &sparse, f)
            );
        }
    }
}
