//! Exact lower bounds on the length of `(n, N, k, m)` codes and the upper
//! bounds achieved by the explicit constructions.
//!
//! All arithmetic is over `BigRational`; lower bounds round up to an
//! integer length.

use std::fmt;

use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::binomial;
use crate::constructions::goodvec::max_batch_k;
use crate::error::{BacError, Result};

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

fn rat(num: u128, den: u128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn int(v: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `mn / (m-k+1)`, valid whenever `m >= k`.
pub fn lb_general(n: usize, k: usize, m: usize) -> Result<BigRational> {
    if k == 0 || m < k || n == 0 {
        return Err(BacError::InvalidParams(format!("need n >= 1 and m >= k >= 1, got n={n}, k={k}, m={m}")));
    }
    Ok(rat((m * n) as u128, (m - k + 1) as u128))
}

/// `(2k - m + 1/C(m-1, 2k-m)) n`, for `k < m < 2k`.
pub fn lb_midrange(n: usize, k: usize, m: usize) -> Result<BigRational> {
    if !(k < m && m < 2 * k) {
        return Err(BacError::InvalidParams(format!("midrange bound needs k < m < 2k, got k={k}, m={m}")));
    }
    let c = binomial((m - 1) as u64, (2 * k - m) as u64);
    Ok((int(2 * k - m) + rat(1, c)) * int(n))
}

/// `(k - 2 + (4k+16)/(3k^2+k+4)) n`, for `m = k+2` and `k >= 3`.
pub fn lb_kplus2(n: usize, k: usize) -> Result<BigRational> {
    if k < 3 {
        return Err(BacError::InvalidParams(format!("the m = k+2 bound needs k >= 3, got {k}")));
    }
    let k128 = k as u128;
    Ok((int(k - 2) + rat(4 * k128 + 16, 3 * k128 * k128 + k128 + 4)) * int(n))
}

/// Whether the `m = k+2` bound dominates the midrange bound at `m = k+2`.
pub fn kplus2_dominates_midrange(k: usize) -> bool {
    let k128 = k as u128;
    k >= 3 && rat(4 * k128 + 16, 3 * k128 * k128 + k128 + 4) >= rat(1, binomial((k + 1) as u64, 3))
}

/// Informational comparator for classic (projection-only) batch codes with
/// `m = k+1`: `(k - 1/2) n`. Not a bound for batch array codes.
pub fn classic_batch_code_bound(n: usize, k: usize) -> BigRational {
    (int(k) - rat(1, 2)) * int(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum LowerSource {
    #[serde(rename = "general")]
    General,
    #[serde(rename = "midrange")]
    Midrange,
    #[serde(rename = "k+2")]
    KPlus2,
}

impl fmt::Display for LowerSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::General => "general",
            Self::Midrange => "midrange",
            Self::KPlus2 => "k+2",
        })
    }
}

/// The largest applicable lower bound; on ties the earlier source wins
/// (general, midrange, k+2).
pub fn best_lower_bound(n: usize, k: usize, m: usize) -> Result<(BigRational, LowerSource)> {
    let mut best = (lb_general(n, k, m)?, LowerSource::General);
    if k < m && m < 2 * k {
        let v = lb_midrange(n, k, m)?;
        if v > best.0 {
            best = (v, LowerSource::Midrange);
        }
    }
    if m == k + 2 && k >= 3 {
        let v = lb_kplus2(n, k)?;
        if v > best.0 {
            best = (v, LowerSource::KPlus2);
        }
    }
    Ok(best)
}

pub fn ceil(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

/// An upper bound together with the construction that achieves it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Achieved {
    #[serde(serialize_with = "as_string")]
    pub n_total: BigInt,
    pub family: String,
}

fn as_string<S: serde::Serializer, T: fmt::Display>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn consider(best: &mut Option<Achieved>, value: BigRational, family: impl Into<String>) {
    debug_assert!(value.is_integer(), "construction lengths are integral");
    let v = value.to_integer();
    if best.as_ref().is_none_or(|b| v < b.n_total) {
        *best = Some(Achieved {
            n_total: v,
            family: family.into(),
        });
    }
}

/// A length-`2t` good vector exists iff `t = 0, 1 (mod 4)` (Skolem).
pub fn short_good_vector_exists(t: usize) -> bool {
    t >= 1 && (t.is_multiple_of(4) || t % 4 == 1)
}

/// `(t, uses_short)` for which a good-vector code has `m` buckets.
fn goodvec_t(m: usize) -> Option<usize> {
    if m >= 5 && m % 4 == 1 && short_good_vector_exists((m - 1) / 4) {
        Some((m - 1) / 4)
    } else if m >= 6 && m % 4 == 2 {
        Some((m - 2) / 4)
    } else {
        None
    }
}

fn cyclic_len(n: usize, k: usize, m: usize) -> Option<BigRational> {
    let ok = k >= 1 && n.is_multiple_of(k) && k < m && m < 2 * k && k.is_multiple_of(m - k);
    ok.then(|| int(2 * k - m) * int(n) + rat(((m - k) * (m - k) * n) as u128, k as u128))
}

/// Explicit batch-array-code constructions with exactly `k` requests.
fn base_exact_k(n: usize, k: usize, m: usize, best: &mut Option<Achieved>) {
    if m == k {
        consider(best, int(k * n), "replication");
    }
    if k == 1 && m <= n {
        consider(best, int(n), "single");
    }
    if k == 2 && m >= 3 && n.is_multiple_of(m - 1) {
        consider(best, rat((m * n) as u128, (m - 1) as u128), "parity");
    }
    if let Some(v) = cyclic_len(n, k, m) {
        consider(best, v, "cyclic");
    }
    if m == k + 1 && k >= 2 && n.is_multiple_of(k * (k + 1)) {
        if let Some(v) = cyclic_len(n, k, m) {
            consider(best, v, "uniform");
        }
    }
    if let Some(t) = goodvec_t(m) {
        if n.is_multiple_of(m) && k <= max_batch_k(t).exact {
            consider(best, int((t + 1) * n), "goodvec");
        }
    }
    // More buckets never hurt: the cyclic code at floor(3k/2) with buckets
    // split until there are m of them.
    if 2 * m > 3 * k {
        let m0 = 3 * k / 2;
        if let Some(v) = cyclic_len(n, k, m0) {
            if v >= int(m) {
                consider(best, v, format!("cyclic@m={m0}+split"));
            }
        }
    }
}

/// A code for `k' >= k` requests also serves `k` (merge the extra sets).
fn base(n: usize, k: usize, m: usize) -> Option<Achieved> {
    let mut best = None;
    for kk in k..=m {
        let mut here = None;
        base_exact_k(n, kk, m, &mut here);
        if let Some(a) = here {
            let family = if kk == k { a.family } else { format!("{} (k={kk})", a.family) };
            consider(&mut best, BigRational::from_integer(a.n_total), family);
        }
    }
    best
}

/// Least construction length for `(n, k, m)` batch array codes, including
/// one level of gadget composition: `c` parallel copies at `(n, k/c, m/c)`
/// and `c` disjoint data blocks at `(n/c, k, m/c)`.
pub fn ub_constructions(n: usize, k: usize, m: usize) -> Option<Achieved> {
    if k == 0 || m < k || n == 0 {
        return None;
    }
    let mut best = base(n, k, m);
    for c in 2..=m {
        if !m.is_multiple_of(c) {
            continue;
        }
        if k.is_multiple_of(c) {
            if let Some(a) = base(n, k / c, m / c) {
                let v = BigRational::from_integer(a.n_total * BigInt::from(c));
                consider(&mut best, v, format!("{c}x parallel {}", a.family));
            }
        }
        if n.is_multiple_of(c) && k <= m / c {
            if let Some(a) = base(n / c, k, m / c) {
                let v = BigRational::from_integer(a.n_total * BigInt::from(c));
                consider(&mut best, v, format!("{c}x concat {}", a.family));
            }
        }
    }
    best
}

/// Upper bounds that hold only for PIR array codes (identical requests).
pub fn ub_pir(n: usize, k: usize, m: usize) -> Option<Achieved> {
    let mut best = ub_constructions(n, k, m);
    if let Some(t) = goodvec_t(m) {
        if n.is_multiple_of(m) && k <= 2 * t + 1 {
            consider(&mut best, int((t + 1) * n), "goodvec-pir");
        }
    }
    if 2 * m > 3 * k && m < 2 * k && (2 * m - 3 * k) % 2 == 1 {
        let l = (4 * m - 6 * k).lcm(&(4 * k - 2 * m));
        if n.is_multiple_of(l) {
            consider(&mut best, rat(((3 * k - m + 1) * n) as u128, 2), "goodvec+cyclic-pir");
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub lower: BigRational,
    pub lower_ceil: BigInt,
    pub lower_source: LowerSource,
    pub upper: Option<Achieved>,
    pub upper_pir: Option<Achieved>,
    /// `(k - 1/2) n` for `m = k+1`; a classic batch-code bound, shown for
    /// comparison only.
    pub classic_comparator: Option<BigRational>,
    pub optimal: bool,
}

pub fn bound_report(n: usize, k: usize, m: usize) -> Result<BoundReport> {
    let (lower, lower_source) = best_lower_bound(n, k, m)?;
    let lower_ceil = ceil(&lower);
    let upper = ub_constructions(n, k, m);
    let optimal = upper.as_ref().is_some_and(|u| u.n_total == lower_ceil);
    Ok(BoundReport {
        n,
        k,
        m,
        lower,
        lower_ceil,
        lower_source,
        upper,
        upper_pir: ub_pir(n, k, m),
        classic_comparator: (m == k + 1).then(|| classic_batch_code_bound(n, k)),
        optimal,
    })
}

impl BoundReport {
    pub const CSV_HEADER: [&'static str; 10] =
        ["n", "k", "m", "lb_num", "lb_den", "lb_ceil", "lb_source", "ub", "ub_source", "optimal"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.k.to_string(),
            self.m.to_string(),
            self.lower.numer().to_string(),
            self.lower.denom().to_string(),
            self.lower_ceil.to_string(),
            self.lower_source.to_string(),
            self.upper.as_ref().map(|u| u.n_total.to_string()).unwrap_or_default(),
            self.upper.as_ref().map(|u| u.family.clone()).unwrap_or_default(),
            self.optimal.to_string(),
        ]
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let frac = |r: &BigRational| format!("{}/{}", r.numer(), r.denom());
        serde_json::json!({
            "n": self.n,
            "k": self.k,
            "m": self.m,
            "lb_num": self.lower.numer().to_string(),
            "lb_den": self.lower.denom().to_string(),
            "lb_ceil": self.lower_ceil.to_u64(),
            "lb_source": self.lower_source,
            "ub": self.upper.as_ref().and_then(|u| u.n_total.to_u64()),
            "ub_source": self.upper.as_ref().map(|u| u.family.clone()),
            "ub_pir": self.upper_pir.as_ref().and_then(|u| u.n_total.to_u64()),
            "ub_pir_source": self.upper_pir.as_ref().map(|u| u.family.clone()),
            "classic_batch_code_comparator": self.classic_comparator.as_ref().map(frac),
            "optimal": self.optimal,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MRule {
    KPlus1,
    KPlus2,
    /// Every `m` in `[k, 2k]`.
    All,
}

impl std::str::FromStr for MRule {
    type Err = BacError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k+1" => Ok(Self::KPlus1),
            "k+2" => Ok(Self::KPlus2),
            "all" => Ok(Self::All),
            other => Err(BacError::InvalidParams(format!("unknown m rule {other:?}"))),
        }
    }
}

impl MRule {
    pub fn values(self, k: usize) -> Vec<usize> {
        match self {
            Self::KPlus1 => vec![k + 1],
            Self::KPlus2 => vec![k + 2],
            Self::All => (k..=2 * k).collect(),
        }
    }
}

/// One report per `(n, k, m)`, ordered by `n`, then `k`, then `m`.
pub fn bound_table(
    n_range: std::ops::RangeInclusive<usize>,
    k_range: std::ops::RangeInclusive<usize>,
    rule: MRule,
) -> Result<Vec<BoundReport>> {
    let tuples: Vec<(usize, usize, usize)> = n_range
        .flat_map(|n| {
            k_range
                .clone()
                .flat_map(move |k| rule.values(k).into_iter().map(move |m| (n, k, m)))
        })
        .collect();
    if tuples.iter().any(|&(n, k, _)| n == 0 || k == 0) {
        return Err(BacError::InvalidParams("n and k ranges must start at 1".into()));
    }
    tuples
        .into_par_iter()
        .map(|(n, k, m)| bound_report(n, k, m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::goodvec::enumerate_good_vectors;

    fn q(num: i64, den: i64) -> BigRational {
        BigRational::new(num.into(), den.into())
    }

    #[test]
    fn general_examples() {
        assert_eq!(lb_general(4, 4, 5).unwrap(), q(10, 1));
        assert_eq!(lb_general(7, 1, 3).unwrap(), q(7, 1));
        assert_eq!(lb_general(6, 3, 3).unwrap(), q(18, 1));
        assert!(lb_general(4, 5, 4).is_err());
    }

    #[test]
    fn midrange_examples() {
        assert_eq!(lb_midrange(4, 4, 5).unwrap(), q(13, 1));
        assert_eq!(lb_midrange(5, 3, 5).unwrap(), q(25, 4));
        for k in 2..30 {
            for n in [1usize, 7, 12] {
                let expect = (int(k - 1) + rat(1, k as u128)) * int(n);
                assert_eq!(lb_midrange(n, k, k + 1).unwrap(), expect);
            }
        }
        assert!(lb_midrange(4, 4, 8).is_err());
    }

    #[test]
    fn kplus2_examples() {
        let v = lb_kplus2(5, 3).unwrap();
        assert_eq!(v, q(155, 17));
        assert_eq!(ceil(&v), BigInt::from(10));
        let v = lb_kplus2(17, 7).unwrap();
        // 3k^2 + k + 4 = 158 at k = 7.
        assert_eq!(v, q(7089, 79));
        assert_eq!(ceil(&v), BigInt::from(90));
        assert!(lb_kplus2(5, 2).is_err());
        for k in 3..=100 {
            assert!(kplus2_dominates_midrange(k), "k={k}");
            assert!(lb_kplus2(11, k).unwrap() >= lb_midrange(11, k, k + 2).unwrap());
        }
    }

    #[test]
    fn best_lower_examples() {
        assert_eq!(best_lower_bound(4, 4, 5).unwrap(), (q(13, 1), LowerSource::Midrange));
        assert_eq!(best_lower_bound(5, 3, 5).unwrap(), (q(155, 17), LowerSource::KPlus2));
        assert_eq!(best_lower_bound(6, 3, 3).unwrap(), (q(18, 1), LowerSource::General));
    }

    #[test]
    fn upper_examples() {
        let u = ub_constructions(4, 4, 5).unwrap();
        assert_eq!((u.n_total, u.family.as_str()), (BigInt::from(13), "cyclic"));
        let u = ub_constructions(5, 3, 5).unwrap();
        assert_eq!((u.n_total, u.family.as_str()), (BigInt::from(10), "goodvec"));
        let u = ub_constructions(8, 4, 6).unwrap();
        assert_eq!((u.n_total, u.family.as_str()), (BigInt::from(24), "cyclic"));
        let u = ub_constructions(20, 4, 5).unwrap();
        assert_eq!(u.n_total, BigInt::from(65));
    }

    #[test]
    fn table_rows() {
        for (n, k, m) in [(4, 4, 5), (5, 3, 5), (20, 4, 5)] {
            assert!(bound_report(n, k, m).unwrap().optimal, "({n},{k},{m})");
        }
        let r = bound_report(4, 4, 5).unwrap();
        assert_eq!(r.csv_record().join(","), "4,4,5,13,1,13,midrange,13,cyclic,true");
        assert_eq!(r.classic_comparator, Some(q(14, 1)));
    }

    #[test]
    fn no_upper_below_lower() {
        let rows = bound_table(1..=20, 1..=8, MRule::All).unwrap();
        for r in rows.iter().filter(|r| r.m <= 16) {
            if let Some(u) = &r.upper {
                assert!(u.n_total >= r.lower_ceil, "{:?}", r);
            }
            if let Some(u) = &r.upper_pir {
                assert!(u.n_total >= r.lower_ceil, "{:?}", r);
            }
        }
    }

    #[test]
    fn skolem_criterion_matches_enumeration() {
        for t in 1..=8 {
            let found = !enumerate_good_vectors(t, 2 * t).unwrap().is_empty();
            assert_eq!(found, short_good_vector_exists(t), "t={t}");
        }
    }
}
