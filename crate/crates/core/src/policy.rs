//! Charging policies: a (stop location, codeword) pair applied for one slot.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Policy {
    pub location: usize,
    pub codeword: usize,
}

/// The cartesian product of stop locations and codewords, indexed
/// location-major: `j = location * n_codewords + codeword`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicySet {
    n_locations: usize,
    n_codewords: usize,
}

impl PolicySet {
    pub fn new(n_locations: usize, n_codewords: usize) -> Self {
        Self {
            n_locations,
            n_codewords,
        }
    }

    pub fn len(&self) -> usize {
        self.n_locations * self.n_codewords
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_locations(&self) -> usize {
        self.n_locations
    }

    pub fn n_codewords(&self) -> usize {
        self.n_codewords
    }

    pub fn policy(&self, j: usize) -> Policy {
        debug_assert!(j < self.len());
        Policy {
            location: j / self.n_codewords,
            codeword: j % self.n_codewords,
        }
    }

    pub fn index(&self, p: Policy) -> usize {
        p.location * self.n_codewords + p.codeword
    }

    /// Policy indices sharing the stop location of policy `j`.
    pub fn same_location(&self, j: usize) -> std::ops::Range<usize> {
        let start = (j / self.n_codewords) * self.n_codewords;
        start..start + self.n_codewords
    }

    pub fn iter(&self) -> impl Iterator<Item = Policy> + '_ {
        (0..self.len()).map(|j| self.policy(j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let set = PolicySet::new(25, 4);
        assert_eq!(set.len(), 100);
        for (j, p) in set.iter().enumerate() {
            assert_eq!(set.index(p), j);
            assert!(set.same_location(j).contains(&j));
        }
        assert_eq!(set.same_location(9), 8..12);
    }
}
