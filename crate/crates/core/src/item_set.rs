//! Fixed-universe bit set over item indices `0..N`.

use std::fmt;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ItemSet {
    universe: usize,
    words: Vec<u64>,
}

impl ItemSet {
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

    /// Builds a set from indices. Panics if an index is `>= universe`.
    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: usize, indices: I) -> Self {
        let mut set = Self::empty(universe);
        for i in indices {
            set.insert(i);
        }
        set
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self::from_indices(
            mask.len(),
            mask.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i),
        )
    }

    /// Size of the universe `N`, not the number of members.
    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.universe && self.words[index / WORD] & (1 << (index % WORD)) != 0
    }

    pub fn insert(&mut self, index: usize) {
        assert!(
            index < self.universe,
            "item {index} outside universe of {}",
            self.universe
        );
        self.words[index / WORD] |= 1 << (index % WORD);
    }

    pub fn remove(&mut self, index: usize) {
        if index < self.universe {
            self.words[index / WORD] &= !(1 << (index % WORD));
        }
    }

    pub fn complement(&self) -> Self {
        let mut out = Self {
            universe: self.universe,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.clear_tail();
        out
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.check_universe(other);
        Self {
            universe: self.universe,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        self.check_universe(other);
        Self {
            universe: self.universe,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.check_universe(other);
        Self {
            universe: self.universe,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    /// `|self ∩ other|` without allocating.
    pub fn intersection_len(&self, other: &Self) -> usize {
        self.check_universe(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `|self \ other|` without allocating.
    pub fn difference_len(&self, other: &Self) -> usize {
        self.check_universe(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum()
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.intersection_len(other) == 0
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + bit)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
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

    fn check_universe(&self, other: &Self) {
        assert_eq!(
            self.universe, other.universe,
            "item sets over different universes"
        );
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn full_and_empty() {
        for n in [0, 1, 63, 64, 65, 130] {
            assert_eq!(ItemSet::full(n).len(), n);
            assert_eq!(ItemSet::empty(n).len(), 0);
            assert_eq!(ItemSet::empty(n).complement(), ItemSet::full(n));
        }
    }

    #[test]
    fn iter_in_order() {
        let set = ItemSet::from_indices(200, [199, 3, 64, 0, 128]);
        assert_eq!(set.to_vec(), vec![0, 3, 64, 128, 199]);
        assert!(set.contains(64));
        assert!(!set.contains(65));
        assert!(!set.contains(500));
    }

    #[test]
    #[should_panic]
    fn insert_outside_universe_panics() {
        ItemSet::empty(10).insert(10);
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<bool>, Vec<bool>)> {
        (0usize..200).prop_flat_map(|n| {
            (
                proptest::collection::vec(any::<bool>(), n),
                proptest::collection::vec(any::<bool>(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn set_identities((a, b) in arb_pair()) {
            let sa = ItemSet::from_mask(&a);
            let sb = ItemSet::from_mask(&b);
            let n = a.len();
            // De Morgan
            prop_assert_eq!(sa.union(&sb).complement(), sa.complement().intersection(&sb.complement()));
            prop_assert_eq!(sa.intersection(&sb).complement(), sa.complement().union(&sb.complement()));
            prop_assert_eq!(sa.len() + sa.complement().len(), n);
            prop_assert!(sa.is_disjoint(&sa.complement()));
            prop_assert_eq!(sa.intersection_len(&sb), sa.intersection(&sb).len());
            prop_assert_eq!(sa.difference_len(&sb), sa.difference(&sb).len());
            let naive = a.iter().zip(&b).filter(|(x, y)| **x && **y).count();
            prop_assert_eq!(sa.intersection_len(&sb), naive);
        }
    }
}
