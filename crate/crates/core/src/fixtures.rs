//! Small hand-encoded codes from the batch-code literature, written out
//! symbol by symbol rather than produced by a generator. Tests and the
//! acceptance suite compare generator output against these.

use crate::code::CodeSpec;
use crate::field::PrimeField;

fn sums(n: usize, buckets: &[&[&[usize]]]) -> CodeSpec {
    // 1-based symbol lists, as printed in the tables.
    let b: Vec<Vec<Vec<usize>>> = buckets
        .iter()
        .map(|bucket| {
            bucket
                .iter()
                .map(|col| col.iter().map(|i| i - 1).collect())
                .collect()
        })
        .collect();
    CodeSpec::from_sums(PrimeField::GF2, n, &b).expect("fixture is well formed")
}

/// The (4, 14, 4, 5) classic batch code: five buckets, projection responses.
pub fn c1() -> CodeSpec {
    sums(
        4,
        &[
            &[&[1], &[2], &[3]],
            &[&[1], &[2], &[4]],
            &[&[1], &[3], &[4]],
            &[&[2], &[3], &[4]],
            &[&[1, 4], &[2, 3]],
        ],
    )
}

/// The (4, 13, 4, 5) batch array code with a single all-ones parity bucket.
pub fn c2() -> CodeSpec {
    sums(
        4,
        &[
            &[&[1], &[2], &[3]],
            &[&[1], &[2], &[4]],
            &[&[1], &[3], &[4]],
            &[&[2], &[3], &[4]],
            &[&[1, 2, 3, 4]],
        ],
    )
}

/// The (5, 10, 3, 5) code: bucket i holds x_i and one pairwise sum.
pub fn pair_sums_5() -> CodeSpec {
    sums(
        5,
        &[
            &[&[1], &[3, 4]],
            &[&[2], &[4, 5]],
            &[&[3], &[5, 1]],
            &[&[4], &[1, 2]],
            &[&[5], &[2, 3]],
        ],
    )
}

/// The (20, 65, 4, 5) uniform code, typed in from its 5x5 table: row `r`
/// covers `x_{4r+1..4r+4}`, and the empty cell of each row is the bucket
/// holding that row's full sum.
pub fn uniform_20_4() -> CodeSpec {
    let rows: [[&[usize]; 5]; 5] = [
        [&[1, 2, 3], &[1, 2, 4], &[1, 3, 4], &[2, 3, 4], &[]],
        [&[], &[5, 6, 7], &[5, 6, 8], &[5, 7, 8], &[6, 7, 8]],
        [&[10, 11, 12], &[], &[9, 10, 11], &[9, 10, 12], &[9, 11, 12]],
        [&[13, 15, 16], &[14, 15, 16], &[], &[13, 14, 15], &[13, 14, 16]],
        [&[17, 18, 20], &[17, 19, 20], &[18, 19, 20], &[], &[17, 18, 19]],
    ];
    let buckets: Vec<Vec<Vec<usize>>> = (0..5)
        .map(|l| {
            (0..5)
                .flat_map(|r| {
                    let cell = rows[r][l];
                    if cell.is_empty() {
                        vec![(4 * r..4 * r + 4).collect()]
                    } else {
                        cell.iter().map(|i| vec![i - 1]).collect()
                    }
                })
                .collect()
        })
        .collect();
    CodeSpec::from_sums(PrimeField::GF2, 20, &buckets).expect("fixture is well formed")
}
