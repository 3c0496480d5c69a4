use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

/// Iterator over the set bits of a word slice, in increasing order.
pub(crate) struct BitIter<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl<'a> BitIter<'a> {
    pub(crate) fn new(words: &'a [u64]) -> Self {
        let current = words.first().copied().unwrap_or(0);
        Self {
            words,
            index: 0,
            current,
        }
    }
}

impl Iterator for BitIter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * WORD_BITS + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

/// A set of vertices of an `n`-vertex graph, stored as an `n`-bit bitset.
///
/// Only bits below `n` are ever set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    n: usize,
    bits: Vec<u64>,
}

impl VertexSet {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            bits: vec![0; words_for(n)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut set = Self::new(n);
        for (i, word) in set.bits.iter_mut().enumerate() {
            let lo = i * WORD_BITS;
            let width = (n - lo).min(WORD_BITS);
            *word = if width == WORD_BITS {
                u64::MAX
            } else {
                (1u64 << width) - 1
            };
        }
        set
    }

    /// Builds a set from vertex indices. Panics if an index is `>= n`.
    pub fn from_vertices<I: IntoIterator<Item = usize>>(n: usize, vertices: I) -> Self {
        let mut set = Self::new(n);
        for v in vertices {
            set.insert(v);
        }
        set
    }

    pub(crate) fn from_words(n: usize, mut bits: Vec<u64>) -> Self {
        debug_assert_eq!(bits.len(), words_for(n));
        if let Some(last) = bits.last_mut() {
            let rem = n % WORD_BITS;
            if rem != 0 {
                *last &= (1u64 << rem) - 1;
            }
        }
        Self { n, bits }
    }

    /// Universe size.
    pub fn capacity(&self) -> usize {
        self.n
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.bits
    }

    /// Inserts `v`, returning `true` if it was not already present.
    pub fn insert(&mut self, v: usize) -> bool {
        assert!(
            v < self.n,
            "vertex {v} out of range for universe of {}",
            self.n
        );
        let (w, b) = (v / WORD_BITS, v % WORD_BITS);
        let was = self.bits[w] >> b & 1 == 1;
        self.bits[w] |= 1 << b;
        !was
    }

    pub fn remove(&mut self, v: usize) -> bool {
        if v >= self.n {
            return false;
        }
        let (w, b) = (v / WORD_BITS, v % WORD_BITS);
        let was = self.bits[w] >> b & 1 == 1;
        self.bits[w] &= !(1 << b);
        was
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        v < self.n && self.bits[v / WORD_BITS] >> (v % WORD_BITS) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        BitIter::new(&self.bits)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= !b;
        }
    }

    /// Complement within `0..n`.
    pub fn complement(&self) -> VertexSet {
        let mut full = VertexSet::full(self.n);
        full.difference_with(self);
        full
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

/// Deserializes from a plain vertex list; the universe is sized to the
/// largest member and should be widened by the caller when needed.
impl<'de> Deserialize<'de> for VertexSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let vertices = Vec::<usize>::deserialize(deserializer)?;
        let n = vertices.iter().max().map_or(0, |&m| m + 1);
        Ok(VertexSet::from_vertices(n, vertices))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_sets_only_bits_below_n() {
        for n in [0, 1, 63, 64, 65, 130] {
            let s = VertexSet::full(n);
            assert_eq!(s.len(), n);
            assert_eq!(s.iter().max().map_or(0, |m| m + 1), n);
        }
    }

    #[test]
    fn insert_remove_contains() {
        let mut s = VertexSet::new(100);
        assert!(s.insert(70));
        assert!(!s.insert(70));
        assert!(s.contains(70));
        assert!(!s.contains(100));
        assert!(s.remove(70));
        assert!(s.is_empty());
    }

    #[test]
    fn complement_round_trip() {
        let s = VertexSet::from_vertices(70, [0, 5, 69]);
        let c = s.complement();
        assert_eq!(c.len(), 67);
        assert_eq!(c.complement(), s);
    }

    #[test]
    #[should_panic]
    fn insert_out_of_range_panics() {
        VertexSet::new(3).insert(3);
    }
}
