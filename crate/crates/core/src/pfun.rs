//! Finite partial functions represented as association lists.
//!
//! A [`PFun`] is an ordered list of `(key, value)` pairs with pairwise distinct
//! keys. Every operation keeps the keys distinct and the iteration order
//! deterministic: the order in which keys were first inserted. That order is
//! what the simulator displays as its event menu, so it is part of the
//! observable behaviour even though map-level equality ignores it.

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PFunError {
    #[error("duplicate key {0} in partial function domain")]
    DuplicateKey(String),
}

/// A finite partial function `K ⇸ V`.
#[derive(Clone)]
pub struct PFun<K, V> {
    entries: Vec<(K, V)>,
}

impl<K, V> Default for PFun<K, V> {
    fn default() -> Self {
        PFun { entries: Vec::new() }
    }
}

impl<K, V> PFun<K, V> {
    /// The empty function `{↦}`.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&K, &V)> {
        self.entries.iter().map(|(k, v)| (k, v))
    }

    /// Keys in insertion order.
    pub fn keys(&self) -> impl ExactSizeIterator<Item = &K> {
        self.entries.iter().map(|(k, _)| k)
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = &V> {
        self.entries.iter().map(|(_, v)| v)
    }

    pub fn entries(&self) -> &[(K, V)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(K, V)> {
        self.entries
    }

    /// `map_pfun`: apply `h` to every output, keeping the domain.
    pub fn map_values<W>(&self, mut h: impl FnMut(&V) -> W) -> PFun<K, W>
    where
        K: Clone,
    {
        PFun {
            entries: self.entries.iter().map(|(k, v)| (k.clone(), h(v))).collect(),
        }
    }

    /// Like [`PFun::map_values`] but the function also sees the key.
    pub fn map_with_key<W>(&self, mut h: impl FnMut(&K, &V) -> W) -> PFun<K, W>
    where
        K: Clone,
    {
        PFun {
            entries: self.entries.iter().map(|(k, v)| (k.clone(), h(k, v))).collect(),
        }
    }
}

impl<K: Eq + Hash + Clone, V: Clone> PFun<K, V> {
    pub fn singleton(key: K, value: V) -> Self {
        PFun {
            entries: vec![(key, value)],
        }
    }

    /// Interprets an arbitrary association list, where an earlier occurrence of
    /// a key takes priority over later ones.
    pub fn from_alist(list: impl IntoIterator<Item = (K, V)>) -> Self {
        let mut seen = HashSet::new();
        let entries = list.into_iter().filter(|(k, _)| seen.insert(k.clone())).collect();
        PFun { entries }
    }

    /// Builds a function from pairs whose keys must already be distinct.
    pub fn try_from_entries(list: impl IntoIterator<Item = (K, V)>) -> Result<Self, PFunError>
    where
        K: fmt::Debug,
    {
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for (k, v) in list {
            if !seen.insert(k.clone()) {
                return Err(PFunError::DuplicateKey(format!("{k:?}")));
            }
            entries.push((k, v));
        }
        Ok(PFun { entries })
    }

    /// The partial lambda `λ x ∈ set(xs) • body(x)`, in `xs` order.
    pub fn lam_on(xs: impl IntoIterator<Item = K>, mut body: impl FnMut(&K) -> V) -> Result<Self, PFunError>
    where
        K: fmt::Debug,
    {
        Self::try_from_entries(xs.into_iter().map(|k| {
            let v = body(&k);
            (k, v)
        }))
    }

    pub fn get(&self, key: &K) -> Option<&V> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn contains_key(&self, key: &K) -> bool {
        self.entries.iter().any(|(k, _)| k == key)
    }

    pub fn dom(&self) -> HashSet<K> {
        self.keys().cloned().collect()
    }

    /// Override `self ⊕ other`: the result agrees with `other` on its domain
    /// and with `self` elsewhere. Keys of `self` keep their position; keys
    /// only in `other` follow in `other`'s order.
    pub fn override_with(&self, other: &PFun<K, V>) -> PFun<K, V> {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        let mine = self.dom();
        let mut entries: Vec<(K, V)> = self
            .entries
            .iter()
            .map(|(k, v)| match other.get(k) {
                Some(w) => (k.clone(), w.clone()),
                None => (k.clone(), v.clone()),
            })
            .collect();
        entries.extend(other.entries.iter().filter(|(k, _)| !mine.contains(k)).cloned());
        PFun { entries }
    }

    /// Domain restriction `A ◁ f`: keep the entries whose key is in `keys`.
    pub fn restrict(&self, keys: &HashSet<K>) -> PFun<K, V> {
        self.filter_keys(|k| keys.contains(k))
    }

    /// Domain anti-restriction `A ⩤ f`: drop the entries whose key is in `keys`.
    pub fn subtract(&self, keys: &HashSet<K>) -> PFun<K, V> {
        self.filter_keys(|k| !keys.contains(k))
    }

    pub fn filter_keys(&self, mut keep: impl FnMut(&K) -> bool) -> PFun<K, V> {
        PFun {
            entries: self.entries.iter().filter(|(k, _)| keep(k)).cloned().collect(),
        }
    }

    /// The exclusive merge `f ⊙ g = (dom g ⩤ f) ⊕ (dom f ⩤ g)`: keys present
    /// on both sides are dropped.
    pub fn merge_excl(&self, other: &PFun<K, V>) -> PFun<K, V> {
        let left = self.subtract(&other.dom());
        let right = other.subtract(&self.dom());
        left.override_with(&right)
    }

    /// Map-level equality, ignoring entry order.
    pub fn map_eq_by(&self, other: &PFun<K, V>, mut eq: impl FnMut(&V, &V) -> bool) -> bool {
        self.len() == other.len() && self.entries.iter().all(|(k, v)| other.get(k).is_some_and(|w| eq(v, w)))
    }
}

impl<K: Eq + Hash + Clone + fmt::Debug> PFun<K, K> {
    /// The identity function on `xs` (`pId_on`).
    pub fn id_on(xs: impl IntoIterator<Item = K>) -> Result<Self, PFunError> {
        Self::lam_on(xs, |k| k.clone())
    }
}

impl<K: Eq + Hash + Clone, V: Clone + PartialEq> PartialEq for PFun<K, V> {
    fn eq(&self, other: &Self) -> bool {
        self.map_eq_by(other, |a, b| a == b)
    }
}

impl<K: Eq + Hash + Clone, V: Clone + Eq> Eq for PFun<K, V> {}

impl<K: fmt::Debug, V: fmt::Debug> fmt::Debug for PFun<K, V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter().map(|(k, v)| (k, v))).finish()
    }
}

impl<K: fmt::Display, V: fmt::Display> fmt::Display for PFun<K, V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k} ↦ {v}")?;
        }
        write!(f, "}}")
    }
}

impl<K: Eq + Hash + Clone, V: Clone> FromIterator<(K, V)> for PFun<K, V> {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        Self::from_alist(iter)
    }
}

impl<K, V> IntoIterator for PFun<K, V> {
    type Item = (K, V);
    type IntoIter = std::vec::IntoIter<(K, V)>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.into_iter()
    }
}
