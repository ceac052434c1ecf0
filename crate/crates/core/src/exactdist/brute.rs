//! Exhaustive enumeration oracle: every permutation of 1..=n crossed with
//! every p-subset of nodes, aggregated into exact rational pmfs.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::combinatorics::{binomial, factorial, Rational};
use crate::treesim::{build_bst, MarkScratch};

use super::ExactDistError;

/// Factorial blow-up guard for the exhaustive oracle.
pub const BRUTE_FORCE_MAX_N: usize = 9;

/// Exact joint and marginal pmfs from full enumeration.
#[derive(Debug, Clone)]
pub struct BruteForcePmfs {
    pub n: usize,
    pub p: usize,
    pub x: Vec<(usize, Rational)>,
    pub y: Vec<(usize, Rational)>,
    /// joint law of (X, Y)
    pub joint: Vec<((usize, usize), Rational)>,
}

impl BruteForcePmfs {
    /// Exact P{X = Y} from the joint counts.
    pub fn equal_prob(&self) -> Rational {
        let mut acc = Rational::new(BigInt::from(0), BigInt::from(1));
        for ((x, y), pr) in &self.joint {
            if x == y {
                acc += pr.clone();
            }
        }
        acc
    }
}

/// Visit all permutations of `items` (Heap's algorithm).
fn for_each_permutation<F: FnMut(&[usize])>(items: &mut [usize], mut visit: F) {
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Enumerate every permutation and every p-subset, compute the pass count
/// X (span including root) and the span size Y per instance, and return the
/// exact pmfs with denominator n! * C(n, p).
pub fn brute_force_pmfs(n: usize, p: usize) -> Result<BruteForcePmfs, ExactDistError> {
    if n == 0 || p == 0 || p > n {
        return Err(ExactDistError::InvalidParameters(format!(
            "need 1 <= p <= n, got n = {n}, p = {p}"
        )));
    }
    if n > BRUTE_FORCE_MAX_N {
        return Err(ExactDistError::TooLargeForBruteForce {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }

    let mut joint_counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut perm: Vec<usize> = (1..=n).collect();
    let mut scratch = MarkScratch::new();

    for_each_permutation(&mut perm, |perm| {
        let bst = build_bst(perm).expect("permutation by construction");
        // lexicographic p-subset enumeration
        let mut subset: Vec<usize> = (1..=p).collect();
        loop {
            let x = bst
                .span_with_root_size_scratch(&subset, &mut scratch)
                .expect("valid subset");
            let y = bst
                .span_size_scratch(&subset, &mut scratch)
                .expect("valid subset");
            *joint_counts.entry((x, y)).or_insert(0) += 1;

            // advance to the next combination
            let mut i = p;
            while i > 0 && subset[i - 1] == n - (p - i) {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            subset[i - 1] += 1;
            for j in i..p {
                subset[j] = subset[j - 1] + 1;
            }
        }
    });

    let total = factorial(n as u64) * binomial(n as u64, p as i64);
    let mut x_counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut y_counts: BTreeMap<usize, u64> = BTreeMap::new();
    for (&(x, y), &c) in &joint_counts {
        *x_counts.entry(x).or_insert(0) += c;
        *y_counts.entry(y).or_insert(0) += c;
    }
    let to_pmf = |counts: BTreeMap<usize, u64>| {
        counts
            .into_iter()
            .map(|(m, c)| (m, Rational::new(BigInt::from(c), total.clone())))
            .collect()
    };
    Ok(BruteForcePmfs {
        n,
        p,
        x: to_pmf(x_counts),
        y: to_pmf(y_counts),
        joint: joint_counts
            .into_iter()
            .map(|(k, c)| (k, Rational::new(BigInt::from(c), total.clone())))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn two_node_cases() {
        let bf = brute_force_pmfs(2, 1).unwrap();
        assert_eq!(bf.x, vec![(1, rat(1, 2)), (2, rat(1, 2))]);
        assert_eq!(bf.y, vec![(1, Rational::one())]);

        let bf = brute_force_pmfs(2, 2).unwrap();
        assert_eq!(bf.y, vec![(2, Rational::one())]);
        assert_eq!(bf.x, vec![(2, Rational::one())]);
    }

    #[test]
    fn three_node_pass_counts() {
        // hand-enumerable: P{X_{3,1} = 1} = 1/3, = 2 -> 4/9, = 3 -> 2/9
        let bf = brute_force_pmfs(3, 1).unwrap();
        assert_eq!(bf.x, vec![(1, rat(1, 3)), (2, rat(4, 9)), (3, rat(2, 9))]);
    }

    #[test]
    fn three_node_span_of_pairs() {
        // hand-enumerable: P{Y_{3,2} = 2} = 2/3, = 3 -> 1/3
        let bf = brute_force_pmfs(3, 2).unwrap();
        assert_eq!(bf.y, vec![(2, rat(2, 3)), (3, rat(1, 3))]);
    }

    #[test]
    fn pmfs_sum_to_one() {
        for n in 1..=6usize {
            for p in 1..=n {
                let bf = brute_force_pmfs(n, p).unwrap();
                let sum: Rational = bf.x.iter().map(|(_, pr)| pr.clone()).sum();
                assert!(sum.is_one(), "X pmf at ({n}, {p})");
                let sum: Rational = bf.y.iter().map(|(_, pr)| pr.clone()).sum();
                assert!(sum.is_one(), "Y pmf at ({n}, {p})");
            }
        }
    }

    #[test]
    fn guard_rails() {
        assert!(brute_force_pmfs(10, 2).is_err());
        assert!(brute_force_pmfs(3, 0).is_err());
        assert!(brute_force_pmfs(3, 4).is_err());
    }
}
