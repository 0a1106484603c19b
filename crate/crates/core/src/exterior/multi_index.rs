use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};

/// A strictly increasing list of axis indices labelling a basis element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(axes: Vec<usize>) -> Result<Self> {
        if axes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidIndex {
                axes,
                reason: "axes must be strictly increasing",
            });
        }
        Ok(MultiIndex(axes))
    }

    /// Sorts arbitrary distinct axes, returning the index and whether the
    /// sorting permutation is odd. `None` if an axis repeats.
    pub fn from_unsorted(axes: &[usize]) -> Option<(Self, bool)> {
        let mut inversions = 0usize;
        for i in 0..axes.len() {
            for j in i + 1..axes.len() {
                match axes[i].cmp(&axes[j]) {
                    std::cmp::Ordering::Equal => return None,
                    std::cmp::Ordering::Greater => inversions += 1,
                    std::cmp::Ordering::Less => {}
                }
            }
        }
        let mut sorted = axes.to_vec();
        sorted.sort_unstable();
        Some((MultiIndex(sorted), inversions % 2 == 1))
    }

    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn single(axis: usize) -> Self {
        MultiIndex(vec![axis])
    }

    pub fn grade(&self) -> usize {
        self.0.len()
    }

    pub fn axes(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, axis: usize) -> bool {
        self.0.binary_search(&axis).is_ok()
    }

    /// Concatenation `self ++ other` sorted. Returns the index together with
    /// the parity of the sort (true for odd), or `None` if the two overlap.
    pub fn merge(&self, other: &MultiIndex) -> Option<(MultiIndex, bool)> {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let mut inversions = 0usize;
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    // b[j] jumps over the remaining elements of a
                    inversions += a.len() - i;
                    out.push(b[j]);
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Some((MultiIndex(out), inversions % 2 == 1))
    }

    /// `self` with the axes of `sub` removed, if `sub ⊆ self`.
    pub fn without(&self, sub: &MultiIndex) -> Option<MultiIndex> {
        if !sub.0.iter().all(|a| self.contains(*a)) {
            return None;
        }
        Some(MultiIndex(
            self.0
                .iter()
                .copied()
                .filter(|a| !sub.contains(*a))
                .collect(),
        ))
    }

    pub fn with_axis(&self, axis: usize) -> Option<MultiIndex> {
        self.merge(&MultiIndex::single(axis)).map(|(m, _)| m)
    }

    pub fn without_axis(&self, axis: usize) -> Option<MultiIndex> {
        self.without(&MultiIndex::single(axis))
    }

    pub fn complement(&self, dim: usize) -> MultiIndex {
        MultiIndex((0..dim).filter(|a| !self.contains(*a)).collect())
    }

    /// All indices of the given grade in lexicographic order.
    pub fn all(dim: usize, grade: usize) -> impl Iterator<Item = MultiIndex> {
        (0..dim).combinations(grade).map(MultiIndex)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted() {
        assert!(MultiIndex::new(vec![1, 0]).is_err());
        assert!(MultiIndex::new(vec![1, 1]).is_err());
        assert!(MultiIndex::new(vec![0, 2, 5]).is_ok());
    }

    #[test]
    fn merge_parity() {
        let a = MultiIndex::new(vec![1, 3]).unwrap();
        let b = MultiIndex::new(vec![0, 2]).unwrap();
        // [1,3,0,2]: inversions (1,0),(3,0),(3,2) → odd
        let (m, odd) = a.merge(&b).unwrap();
        assert_eq!(m.axes(), &[0, 1, 2, 3]);
        assert!(odd);
        assert_eq!(MultiIndex::from_unsorted(&[1, 3, 0, 2]), Some((m, true)));
        assert!(a.merge(&MultiIndex::single(3)).is_none());
    }

    #[test]
    fn enumerate_and_complement() {
        let all: Vec<_> = MultiIndex::all(4, 2).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0].axes(), &[0, 1]);
        assert_eq!(all[5].axes(), &[2, 3]);
        assert_eq!(all[1].complement(4).axes(), &[1, 3]);
        assert_eq!(MultiIndex::all(3, 0).count(), 1);
    }

    #[test]
    fn display() {
        assert_eq!(MultiIndex::new(vec![0, 2]).unwrap().to_string(), "{0,2}");
    }
}
