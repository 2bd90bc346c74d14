//! Exact longest-common-subsequence and insertion/deletion edit distance.

use serde::{Deserialize, Serialize};

/// A monotone matching between two sequences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    /// Matched index pairs, strictly increasing in both coordinates.
    pub pairs: Vec<(usize, usize)>,
    /// `|s| + |t| - 2 * pairs.len()`.
    pub cost: usize,
}

impl Alignment {
    /// Checks the structural invariants against the aligned sequences.
    pub fn is_valid_for<T: PartialEq>(&self, s: &[T], t: &[T]) -> bool {
        let monotone = self.pairs.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1);
        let matching = self
            .pairs
            .iter()
            .all(|&(i, j)| i < s.len() && j < t.len() && s[i] == t[j]);
        monotone && matching && self.cost == s.len() + t.len() - 2 * self.pairs.len()
    }
}

/// Length of a longest common subsequence, in `O(|s||t|)` time and
/// `O(min(|s|,|t|))` space.
pub fn lcs<T: PartialEq>(s: &[T], t: &[T]) -> usize {
    let (long, short) = if s.len() >= t.len() { (s, t) } else { (t, s) };
    let mut row = vec![0usize; short.len() + 1];
    for a in long {
        let mut diag = 0;
        for (j, b) in short.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if a == b { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[short.len()]
}

/// Minimum number of single-symbol insertions and deletions turning `s`
/// into `t`.
pub fn edit_distance<T: PartialEq>(s: &[T], t: &[T]) -> usize {
    s.len() + t.len() - 2 * lcs(s, t)
}

/// Minimum-cost alignment. Among optimal alignments the one whose matched
/// pairs are lexicographically smallest (by `i`, then `j`) is returned.
pub fn align<T: PartialEq>(s: &[T], t: &[T]) -> Alignment {
    let (n, m) = (s.len(), t.len());
    let w = m + 1;
    // suffix[i][j] = LCS(s[i..], t[j..])
    let mut suffix = vec![0u32; (n + 1) * w];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            suffix[i * w + j] = if s[i] == t[j] {
                suffix[(i + 1) * w + j + 1] + 1
            } else {
                suffix[(i + 1) * w + j].max(suffix[i * w + j + 1])
            };
        }
    }
    let mut pairs = Vec::with_capacity(suffix[0] as usize);
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        let here = suffix[i * w + j];
        if here == 0 {
            break;
        }
        if s[i] == t[j] && suffix[(i + 1) * w + j + 1] + 1 == here {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if suffix[i * w + j + 1] == here {
            // keep s[i] available so the next match has the smallest i
            j += 1;
        } else {
            i += 1;
        }
    }
    let cost = n + m - 2 * pairs.len();
    Alignment { pairs, cost }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    /// Exhaustive oracle: longest common subsequence by enumerating every
    /// subsequence of `s` (as a bitmask) and testing containment in `t`.
    fn lcs_by_enumeration(s: &[u8], t: &[u8]) -> usize {
        let mut best = 0;
        for mask in 0u32..(1 << s.len()) {
            let sub: Vec<u8> = (0..s.len()).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
            let mut it = t.iter();
            if sub.iter().all(|x| it.any(|y| y == x)) {
                best = best.max(sub.len());
            }
        }
        best
    }

    /// Independent DP over explicit insert/delete operations.
    fn insdel_distance(s: &[u8], t: &[u8]) -> usize {
        let mut d = vec![vec![0usize; t.len() + 1]; s.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for j in 0..=t.len() {
            d[0][j] = j;
        }
        for i in 1..=s.len() {
            for j in 1..=t.len() {
                let del = d[i - 1][j] + 1;
                let ins = d[i][j - 1] + 1;
                let keep = if s[i - 1] == t[j - 1] { d[i - 1][j - 1] } else { usize::MAX };
                d[i][j] = del.min(ins).min(keep);
            }
        }
        d[s.len()][t.len()]
    }

    #[test]
    fn insdel_example() {
        let s = bits("100110");
        let t = bits("1101100");
        assert_eq!(lcs(&s, &t), 5);
        assert_eq!(edit_distance(&s, &t), 3);
    }

    #[test]
    fn swapped_pair_has_distance_two() {
        assert_eq!(edit_distance(&[1, 0], &[0, 1]), 2);
        assert_eq!(lcs(&[1, 0], &[0, 1]), 1);
    }

    #[test]
    fn empty_and_identical() {
        let s = bits("0110101");
        assert_eq!(edit_distance(&s, &[]), s.len());
        assert_eq!(lcs(&s, &s), s.len());
        let a = align(&s, &s);
        assert_eq!(a.cost, 0);
        assert_eq!(a.pairs, (0..s.len()).map(|i| (i, i)).collect::<Vec<_>>());
    }

    #[test]
    fn align_ab_ba() {
        let a = align(b"ab", b"ba");
        assert_eq!(a.pairs.len(), 1);
        assert_eq!(a.cost, 2);
        // smallest i first
        assert_eq!(a.pairs, vec![(0, 1)]);
    }

    #[test]
    fn matches_enumeration_and_insdel_dp() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..400 {
            let n = rng.gen_range(0..=10);
            let m = rng.gen_range(0..=10);
            let s: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let t: Vec<u8> = (0..m).map(|_| rng.gen_range(0..2)).collect();
            let l = lcs(&s, &t);
            assert_eq!(l, lcs_by_enumeration(&s, &t));
            assert_eq!(edit_distance(&s, &t), insdel_distance(&s, &t));
            let a = align(&s, &t);
            assert!(a.is_valid_for(&s, &t));
            assert_eq!(a.cost, edit_distance(&s, &t));
        }
    }

    #[test]
    fn exhaustive_binary_up_to_six() {
        for n in 0..=6 {
            for m in 0..=6 {
                for x in 0u32..(1 << n) {
                    for y in 0u32..(1 << m) {
                        let s: Vec<u8> = (0..n).map(|i| (x >> i & 1) as u8).collect();
                        let t: Vec<u8> = (0..m).map(|i| (y >> i & 1) as u8).collect();
                        assert_eq!(edit_distance(&s, &t), insdel_distance(&s, &t));
                    }
                }
            }
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn metric_axioms(
                a in proptest::collection::vec(0u8..4, 0..24),
                b in proptest::collection::vec(0u8..4, 0..24),
                c in proptest::collection::vec(0u8..4, 0..24),
            ) {
                let ab = edit_distance(&a, &b);
                prop_assert_eq!(ab, edit_distance(&b, &a));
                prop_assert_eq!(edit_distance(&a, &a), 0);
                prop_assert!(edit_distance(&a, &c) <= ab + edit_distance(&b, &c));
                prop_assert!(lcs(&a, &b) <= a.len().min(b.len()));
            }

            #[test]
            fn alignment_is_optimal(
                a in proptest::collection::vec(0u8..3, 0..40),
                b in proptest::collection::vec(0u8..3, 0..40),
            ) {
                let al = align(&a, &b);
                prop_assert!(al.is_valid_for(&a, &b));
                prop_assert_eq!(al.cost, edit_distance(&a, &b));
            }
        }
    }
}
