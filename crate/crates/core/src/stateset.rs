//! Dense bitsets over state indices.

use std::fmt;

use crate::model::StateId;

const WORD: usize = 64;

/// A subset of `[0, universe)`, stored one bit per state.
///
/// Every set carries its universe size; binary operations require both
/// operands to share it.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    universe: usize,
    words: Vec<u64>,
}

impl StateSet {
    pub fn empty(universe: usize) -> Self {
        Self {
            universe,
            words: vec![0; universe.div_ceil(WORD)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut set = Self {
            universe,
            words: vec![u64::MAX; universe.div_ceil(WORD)],
        };
        set.clear_tail();
        set
    }

    pub fn from_states<I>(universe: usize, states: I) -> Self
    where
        I: IntoIterator<Item = StateId>,
    {
        let mut set = Self::empty(universe);
        for s in states {
            set.insert(s);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, s: StateId) -> bool {
        let i = s.index();
        i < self.universe && self.words[i / WORD] & (1 << (i % WORD)) != 0
    }

    /// Inserts `s`; returns whether it was newly added.
    ///
    /// Panics if `s` is outside the universe.
    #[inline]
    pub fn insert(&mut self, s: StateId) -> bool {
        let i = s.index();
        assert!(i < self.universe, "state {i} outside universe {}", self.universe);
        let word = &mut self.words[i / WORD];
        let bit = 1 << (i % WORD);
        let fresh = *word & bit == 0;
        *word |= bit;
        fresh
    }

    /// Removes `s`; returns whether it was present.
    #[inline]
    pub fn remove(&mut self, s: StateId) -> bool {
        let i = s.index();
        if i >= self.universe {
            return false;
        }
        let word = &mut self.words[i / WORD];
        let bit = 1 << (i % WORD);
        let present = *word & bit != 0;
        *word &= !bit;
        present
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn union_with(&mut self, other: &StateSet) {
        self.check_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &StateSet) {
        self.check_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &StateSet) {
        self.check_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn difference(&self, other: &StateSet) -> StateSet {
        let mut out = self.clone();
        out.difference_with(other);
        out
    }

    /// Complement with respect to the universe.
    pub fn complement(&self) -> StateSet {
        let mut out = StateSet {
            universe: self.universe,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.clear_tail();
        out
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.check_universe(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn first(&self) -> Option<StateId> {
        self.iter().next()
    }

    pub fn to_vec(&self) -> Vec<StateId> {
        self.iter().collect()
    }

    fn clear_tail(&mut self) {
        let rem = self.universe % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    fn check_universe(&self, other: &StateSet) {
        assert_eq!(
            self.universe, other.universe,
            "state sets over different universes"
        );
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|s| s.0)).finish()
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = StateId;

    fn next(&mut self) -> Option<StateId> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(StateId((self.index * WORD + bit) as u32));
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

impl<'a> IntoIterator for &'a StateSet {
    type Item = StateId;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(v: &[u32]) -> Vec<StateId> {
        v.iter().copied().map(StateId).collect()
    }

    #[test]
    fn full_respects_universe() {
        let s = StateSet::full(70);
        assert_eq!(s.len(), 70);
        assert!(s.contains(StateId(69)));
        assert!(!s.contains(StateId(70)));
        assert_eq!(s.complement().len(), 0);
    }

    #[test]
    fn empty_universe() {
        let s = StateSet::full(0);
        assert!(s.is_empty());
        assert_eq!(s.iter().count(), 0);
    }

    #[test]
    fn insert_remove() {
        let mut s = StateSet::empty(10);
        assert!(s.insert(StateId(3)));
        assert!(!s.insert(StateId(3)));
        assert!(s.remove(StateId(3)));
        assert!(!s.remove(StateId(3)));
        assert!(s.is_empty());
    }

    proptest! {
        #[test]
        fn set_algebra_matches_btreeset(
            a in proptest::collection::btree_set(0u32..130, 0..60),
            b in proptest::collection::btree_set(0u32..130, 0..60),
        ) {
            let sa = StateSet::from_states(130, a.iter().copied().map(StateId));
            let sb = StateSet::from_states(130, b.iter().copied().map(StateId));
            let union: Vec<u32> = a.union(&b).copied().collect();
            let inter: Vec<u32> = a.intersection(&b).copied().collect();
            let diff: Vec<u32> = a.difference(&b).copied().collect();
            prop_assert_eq!(sa.union(&sb).to_vec(), ids(&union));
            prop_assert_eq!(sa.intersection(&sb).to_vec(), ids(&inter));
            prop_assert_eq!(sa.difference(&sb).to_vec(), ids(&diff));
            prop_assert_eq!(sa.complement().len(), 130 - a.len());
            prop_assert_eq!(sa.is_subset(&sb), a.is_subset(&b));
            prop_assert_eq!(sa.len(), a.len());
        }
    }
}
