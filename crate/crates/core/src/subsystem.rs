//! Qubit labels and the index arithmetic that ties them to amplitude arrays.
//!
//! Qubits are labelled from 1. Qubit 1 is the most significant bit of a
//! basis-state index, so the ket `|0101⟩` of a four-qubit register sits at
//! index 5.

use crate::error::{Error, Result};

/// An ordered list of distinct 1-based qubit labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subsystem {
    labels: Vec<usize>,
}

impl Subsystem {
    /// Builds a subsystem from distinct, nonzero labels. Range against a
    /// concrete register is checked by [`Subsystem::check`].
    pub fn new(labels: impl Into<Vec<usize>>) -> Result<Self> {
        let labels = labels.into();
        let mut seen = labels.clone();
        seen.sort_unstable();
        seen.dedup();
        if labels.is_empty() || seen.len() != labels.len() || seen[0] == 0 {
            return Err(Error::InvalidSubsystem {
                labels,
                num_qubits: 0,
            });
        }
        Ok(Self { labels })
    }

    /// `[1, 2, ..., n]`.
    pub fn all(num_qubits: usize) -> Self {
        Self {
            labels: (1..=num_qubits).collect(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Confirms every label lies in `1..=num_qubits`.
    pub fn check(&self, num_qubits: usize) -> Result<()> {
        if self.labels.iter().any(|&l| l > num_qubits) {
            return Err(Error::InvalidSubsystem {
                labels: self.labels.clone(),
                num_qubits,
            });
        }
        Ok(())
    }

    /// Checks that the labels are a permutation of `1..=num_qubits`.
    pub fn check_permutation(&self, num_qubits: usize) -> Result<()> {
        if self.labels.len() != num_qubits || self.check(num_qubits).is_err() {
            return Err(Error::InvalidPermutation {
                labels: self.labels.clone(),
                num_qubits,
            });
        }
        Ok(())
    }

    /// The labels not in `self`, ascending.
    pub fn complement(&self, num_qubits: usize) -> Vec<usize> {
        (1..=num_qubits)
            .filter(|l| !self.labels.contains(l))
            .collect()
    }
}

impl TryFrom<&[usize]> for Subsystem {
    type Error = Error;

    fn try_from(labels: &[usize]) -> Result<Self> {
        Subsystem::new(labels.to_vec())
    }
}

impl<const N: usize> TryFrom<[usize; N]> for Subsystem {
    type Error = Error;

    fn try_from(labels: [usize; N]) -> Result<Self> {
        Subsystem::new(labels.to_vec())
    }
}

/// Scatters the bits of a local index (over `labels`, first label most
/// significant) into their positions in an `num_qubits`-qubit index.
pub(crate) fn scatter(local: usize, labels: &[usize], num_qubits: usize) -> usize {
    let m = labels.len();
    labels.iter().enumerate().fold(0, |acc, (k, &label)| {
        let bit = (local >> (m - 1 - k)) & 1;
        acc | (bit << (num_qubits - label))
    })
}

/// Table `t[a][b]` giving the full-register index whose `first` qubits read
/// `a` and whose `second` qubits read `b`. `first` and `second` must
/// partition the register.
pub(crate) fn split_table(first: &[usize], second: &[usize], num_qubits: usize) -> Vec<Vec<usize>> {
    let second_dim = 1usize << second.len();
    (0..1usize << first.len())
        .map(|a| {
            let hi = scatter(a, first, num_qubits);
            (0..second_dim)
                .map(|b| hi | scatter(b, second, num_qubits))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_zero() {
        assert!(Subsystem::new(vec![1, 1]).is_err());
        assert!(Subsystem::new(vec![0, 2]).is_err());
        assert!(Subsystem::new(Vec::new()).is_err());
    }

    #[test]
    fn range_is_checked_against_register() {
        let s = Subsystem::new(vec![2, 5]).unwrap();
        assert!(s.check(4).is_err());
        assert!(s.check(5).is_ok());
    }

    #[test]
    fn permutation_check() {
        assert!(Subsystem::new(vec![1, 4, 2, 3])
            .unwrap()
            .check_permutation(4)
            .is_ok());
        assert!(Subsystem::new(vec![1, 4, 2])
            .unwrap()
            .check_permutation(4)
            .is_err());
    }

    #[test]
    fn complement_is_ascending() {
        let s = Subsystem::new(vec![3, 2]).unwrap();
        assert_eq!(s.complement(4), vec![1, 4]);
    }

    #[test]
    fn qubit_one_is_most_significant() {
        // |0101> over qubits (1,2,3,4) is index 5
        assert_eq!(scatter(0b0101, &[1, 2, 3, 4], 4), 5);
        // local |10> over qubits (4,1): qubit 4 = 1, qubit 1 = 0
        assert_eq!(scatter(0b10, &[4, 1], 4), 0b0001);
    }

    #[test]
    fn split_table_covers_every_index_once() {
        let t = split_table(&[2, 3], &[1, 4], 4);
        let mut all: Vec<usize> = t.into_iter().flatten().collect();
        all.sort_unstable();
        assert_eq!(all, (0..16).collect::<Vec<_>>());
    }
}
