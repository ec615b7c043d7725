//! Lexicographic enumeration of combinations and multisets.

/// `C(n, r)` as `u128`; saturates instead of overflowing.
pub fn binomial(n: u64, r: u64) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Number of size-`k` multisets over `n` symbols, `C(n+k-1, k)`.
pub fn multiset_count(n: usize, k: usize) -> u128 {
    if n == 0 {
        return u128::from(k == 0);
    }
    binomial((n + k - 1) as u64, k as u64)
}

/// Strictly increasing `r`-tuples from `0..n`, in lexicographic order.
#[derive(Clone, Debug)]
pub struct Combinations {
    n: usize,
    cur: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, r: usize) -> Self {
        let cur = (r <= n).then(|| (0..r).collect());
        Self { n, cur }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let cur = self.cur.as_mut().unwrap();
        let r = cur.len();
        let mut i = r;
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            if cur[i] < self.n - r + i {
                cur[i] += 1;
                for j in i + 1..r {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Non-decreasing `k`-tuples over `0..n` (multisets), in lexicographic order.
#[derive(Clone, Debug)]
pub struct Multisets {
    n: usize,
    cur: Option<Vec<usize>>,
}

impl Multisets {
    pub fn new(n: usize, k: usize) -> Self {
        let cur = (n > 0 || k == 0).then(|| vec![0; k]);
        Self { n, cur }
    }
}

impl Iterator for Multisets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let cur = self.cur.as_mut().unwrap();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            if cur[i] + 1 < self.n {
                let v = cur[i] + 1;
                for e in cur[i..].iter_mut() {
                    *e = v;
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_enumeration() {
        for n in 0..6 {
            for r in 0..6 {
                assert_eq!(Combinations::new(n, r).count() as u128, binomial(n as u64, r as u64));
                assert_eq!(Multisets::new(n, r).count() as u128, multiset_count(n, r));
            }
        }
        assert_eq!(multiset_count(4, 4), 35);
        assert_eq!(multiset_count(20, 4), 8855);
        assert_eq!(multiset_count(17, 7), 245_157);
        assert_eq!(multiset_count(4, 8), 165);
        assert_eq!(multiset_count(10, 3), 220);
    }

    #[test]
    fn lexicographic_order() {
        let all: Vec<_> = Multisets::new(3, 2).collect();
        assert_eq!(
            all,
            vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 1], vec![1, 2], vec![2, 2]]
        );
        let c: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(c.first(), Some(&vec![0, 1]));
        assert_eq!(c.last(), Some(&vec![2, 3]));
        assert!(c.windows(2).all(|w| w[0] < w[1]));
    }
}
