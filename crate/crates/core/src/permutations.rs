//! Permutations of {0, …, n−1} with their signs.

use itertools::Itertools;

use crate::error::{OutageError, Result};

/// Largest n for which permutation sums are expanded (6! = 720 terms).
pub const MAX_PERMUTATION_N: usize = 6;

/// All permutations of {0..n} in lexicographic order, each with sgn(σ).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationTable {
    n: usize,
    entries: Vec<(Vec<usize>, i8)>,
}

/// Sign from the inversion count.
pub fn sign(perm: &[usize]) -> i8 {
    let inversions = (0..perm.len())
        .flat_map(|i| (i + 1..perm.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| perm[i] > perm[j])
        .count();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

impl PermutationTable {
    /// Fails with `PermutationBudgetExceeded` above [`MAX_PERMUTATION_N`].
    pub fn new(n: usize) -> Result<Self> {
        Self::with_limit(n, MAX_PERMUTATION_N)
    }

    pub fn with_limit(n: usize, limit: usize) -> Result<Self> {
        if n > limit {
            return Err(OutageError::PermutationBudgetExceeded { n, limit });
        }
        let entries = (0..n)
            .permutations(n)
            .map(|p| {
                let s = sign(&p);
                (p, s)
            })
            .collect();
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], i8)> {
        self.entries.iter().map(|(p, s)| (p.as_slice(), *s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_signs() {
        for n in 0..=5 {
            let t = PermutationTable::new(n).unwrap();
            assert_eq!(t.len(), (1..=n).product::<usize>().max(1));
            let total: i32 = t.iter().map(|(_, s)| s as i32).sum();
            assert_eq!(total, if n <= 1 { 1 } else { 0 });
        }
        assert_eq!(sign(&[1, 0, 2]), -1);
        assert_eq!(sign(&[1, 2, 0]), 1);
        assert_eq!(sign(&[2, 1, 0]), -1);
    }

    #[test]
    fn sign_matches_transposition_parity() {
        let t = PermutationTable::new(4).unwrap();
        for (p, s) in t.iter() {
            // Count transpositions needed to sort by cycle decomposition.
            let mut seen = [false; 4];
            let mut swaps = 0;
            for i in 0..4 {
                let mut j = i;
                let mut len = 0;
                while !seen[j] {
                    seen[j] = true;
                    j = p[j];
                    len += 1;
                }
                swaps += len.max(1) - 1;
            }
            assert_eq!(s, if swaps % 2 == 0 { 1 } else { -1 });
        }
    }

    #[test]
    fn budget() {
        assert!(PermutationTable::new(6).is_ok());
        assert!(matches!(
            PermutationTable::new(7),
            Err(OutageError::PermutationBudgetExceeded { n: 7, limit: 6 })
        ));
    }
}
