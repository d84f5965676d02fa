//! Player sets, access structures and the monotone-family primitives.
//!
//! An [`AccessStructure`] stores only its minimal authorized sets (an
//! antichain, kept sorted by bitmask value). The monotone closure is never
//! materialized: membership is tested against the antichain, and only the
//! explicitly enumerating operations walk all 2ⁿ subsets.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{self, Limits};
use crate::par::{self, Exec};

/// A subset of players, bit `i` standing for the `i`-th player of a universe.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerSet(u32);

impl PlayerSet {
    pub const EMPTY: PlayerSet = PlayerSet(0);

    pub const fn from_bits(bits: u32) -> Self {
        PlayerSet(bits)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        PlayerSet(indices.into_iter().fold(0, |acc, i| acc | (1 << i)))
    }

    pub fn singleton(i: usize) -> Self {
        PlayerSet(1 << i)
    }

    /// All players `0..n`.
    pub fn full(n: usize) -> Self {
        if n >= 32 {
            PlayerSet(u32::MAX)
        } else {
            PlayerSet((1u32 << n) - 1)
        }
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_subset_of(self, other: PlayerSet) -> bool {
        self.0 & other.0 == self.0
    }

    pub fn intersects(self, other: PlayerSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn union(self, other: PlayerSet) -> PlayerSet {
        PlayerSet(self.0 | other.0)
    }

    pub fn intersection(self, other: PlayerSet) -> PlayerSet {
        PlayerSet(self.0 & other.0)
    }

    pub fn difference(self, other: PlayerSet) -> PlayerSet {
        PlayerSet(self.0 & !other.0)
    }

    pub fn with(self, i: usize) -> PlayerSet {
        PlayerSet(self.0 | 1 << i)
    }

    /// Complement relative to the players `0..n`.
    pub fn complement(self, n: usize) -> PlayerSet {
        PlayerSet(!self.0 & PlayerSet::full(n).0)
    }

    pub fn lowest(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Player indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// All subsets of `self`, the empty set and `self` included.
    pub fn subsets(self) -> impl Iterator<Item = PlayerSet> {
        let mask = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(PlayerSet(cur))
        })
    }

    /// Relabels player `i` as `perm[i]`.
    pub fn permute(self, perm: &[usize]) -> PlayerSet {
        PlayerSet::from_indices(self.iter().map(|i| perm[i]))
    }
}

/// Ordered player labels `P₁…Pₙ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Universe {
    labels: Vec<String>,
}

impl Universe {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Arc<Self>> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::NoPlayers);
        }
        Limits::check(
            "players in universe",
            labels.len() as u64,
            limits::active().players as u64,
        )?;
        let mut seen = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.contains(',') || l.chars().any(char::is_whitespace) {
                return Err(Error::BadPlayerSet(l.clone()));
            }
            if seen.insert(l.as_str(), i).is_some() {
                return Err(Error::DuplicatePlayer(l.clone()));
            }
        }
        Ok(Arc::new(Universe { labels }))
    }

    /// Players labelled `P1`, …, `Pn`.
    pub fn numbered(n: usize) -> Result<Arc<Self>> {
        Universe::new((1..=n).map(|i| format!("P{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn full(&self) -> PlayerSet {
        PlayerSet::full(self.len())
    }

    pub fn complement(&self, set: PlayerSet) -> PlayerSet {
        set.complement(self.len())
    }

    pub fn set_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<PlayerSet> {
        labels.iter().try_fold(PlayerSet::EMPTY, |acc, l| {
            let l = l.as_ref().trim();
            self.index(l)
                .map(|i| acc.with(i))
                .ok_or_else(|| Error::UnknownPlayer(l.to_string()))
        })
    }

    /// Parses `P1,P3`, the compact `P1P3`, or `{}` / empty for ∅.
    ///
    /// The compact form is split greedily by longest matching label.
    pub fn parse_set(&self, text: &str) -> Result<PlayerSet> {
        let text = text.trim();
        let text = text
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .unwrap_or(text)
            .trim();
        if text.is_empty() {
            return Ok(PlayerSet::EMPTY);
        }
        if text.contains(',') {
            let parts: Vec<&str> = text.split(',').collect();
            return self.set_from_labels(&parts);
        }
        let mut set = PlayerSet::EMPTY;
        let mut rest = text;
        while !rest.is_empty() {
            let best = self
                .labels
                .iter()
                .enumerate()
                .filter(|(_, l)| rest.starts_with(l.as_str()))
                .max_by_key(|(_, l)| l.len());
            match best {
                Some((i, l)) => {
                    set = set.with(i);
                    rest = &rest[l.len()..];
                }
                None => return Err(Error::BadPlayerSet(text.to_string())),
            }
        }
        Ok(set)
    }

    /// `P1P3` style rendering; `∅` for the empty set.
    pub fn format_set(&self, set: PlayerSet) -> String {
        if set.is_empty() {
            return "∅".to_string();
        }
        set.iter().map(|i| self.labels[i].as_str()).collect()
    }

    pub fn set_labels(&self, set: PlayerSet) -> Vec<String> {
        set.iter().map(|i| self.labels[i].clone()).collect()
    }

    pub fn format_family(&self, family: &[PlayerSet]) -> String {
        format!(
            "{{{}}}",
            family.iter().map(|&s| self.format_set(s)).join(",")
        )
    }

    /// A new universe with one more player appended.
    pub fn extended(&self, label: &str) -> Result<Arc<Self>> {
        Universe::new(self.labels.iter().cloned().chain(std::iter::once(label.to_string())))
    }

    /// The sub-universe of the players in `set`, in their original order.
    pub fn restricted(&self, set: PlayerSet) -> Result<Arc<Self>> {
        Universe::new(set.iter().map(|i| self.labels[i].clone()))
    }
}

/// Reduces a family to its inclusion-minimal members, deduplicated and
/// sorted by bitmask value.
pub fn minimize_sets(family: &[PlayerSet]) -> Vec<PlayerSet> {
    let mut sets: Vec<PlayerSet> = family.to_vec();
    // Ascending cardinality lets each set be checked against accepted ones only.
    sets.sort_by_key(|s| (s.len(), s.bits()));
    sets.dedup();
    let mut kept: Vec<PlayerSet> = Vec::with_capacity(sets.len());
    for s in sets {
        if !kept.iter().any(|k| k.is_subset_of(s)) {
            kept.push(s);
        }
    }
    kept.sort();
    kept
}

/// A monotone family of authorized sets, stored as its minimal sets
/// `Γ = {A₁, …, A_r}` over a player universe.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AccessStructure {
    universe: Arc<Universe>,
    minimal: Vec<PlayerSet>,
}

/// Outcome of the no-cloning check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validity {
    pub valid: bool,
    /// A pair of disjoint minimal sets, when invalid.
    pub witness: Option<(PlayerSet, PlayerSet)>,
}

/// The non-empty unauthorized sets split into those disjoint from some
/// minimal set (`a1`) and those meeting every minimal set (`a2`).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UnauthorizedSplit {
    pub a1: Vec<PlayerSet>,
    pub a2: Vec<PlayerSet>,
}

/// Same as [`AccessStructure::new`]; reads as the antichain normalization.
pub fn minimize(
    universe: Arc<Universe>,
    family: impl IntoIterator<Item = PlayerSet>,
) -> Result<AccessStructure> {
    AccessStructure::new(universe, family)
}

impl AccessStructure {
    /// Builds the structure generated by `family`: keeps the minimal members,
    /// deduplicated and canonically ordered.
    pub fn new(
        universe: Arc<Universe>,
        family: impl IntoIterator<Item = PlayerSet>,
    ) -> Result<Self> {
        let family: Vec<PlayerSet> = family.into_iter().collect();
        if family.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let full = universe.full();
        if let Some(bad) = family.iter().find(|s| !s.is_subset_of(full)) {
            return Err(Error::BadPlayerSet(format!("{:#b}", bad.bits())));
        }
        Ok(AccessStructure {
            minimal: minimize_sets(&family),
            universe,
        })
    }

    /// Convenience constructor from compact or comma-separated set strings.
    pub fn parse<S: AsRef<str>>(universe: Arc<Universe>, sets: &[S]) -> Result<Self> {
        let family = sets
            .iter()
            .map(|s| universe.parse_set(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        AccessStructure::new(universe, family)
    }

    /// Structure on players `P1..Pn` given by compact set strings.
    pub fn numbered<S: AsRef<str>>(n: usize, sets: &[S]) -> Result<Self> {
        AccessStructure::parse(Universe::numbered(n)?, sets)
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn minimal_sets(&self) -> &[PlayerSet] {
        &self.minimal
    }

    /// Number of minimal sets.
    pub fn r(&self) -> usize {
        self.minimal.len()
    }

    /// Number of players in the universe.
    pub fn n(&self) -> usize {
        self.universe.len()
    }

    /// Players occurring in at least one minimal set.
    pub fn participants(&self) -> PlayerSet {
        self.minimal
            .iter()
            .fold(PlayerSet::EMPTY, |acc, &s| acc.union(s))
    }

    pub fn covers_universe(&self) -> bool {
        self.participants() == self.universe.full()
    }

    pub fn is_authorized(&self, set: PlayerSet) -> bool {
        self.minimal.iter().any(|m| m.is_subset_of(set))
    }

    /// Whether the closure of `other` lies inside the closure of `self`.
    pub fn contains_closure_of(&self, other: &AccessStructure) -> bool {
        other.minimal.iter().all(|&m| self.is_authorized(m))
    }

    /// Same structure with a different (equal-sized) universe.
    pub fn with_universe(&self, universe: Arc<Universe>) -> Result<Self> {
        AccessStructure::new(universe, self.minimal.iter().copied())
    }

    pub fn display(&self) -> String {
        self.universe.format_family(&self.minimal)
    }

    /// No-cloning check: every pair of minimal sets (a set with itself
    /// included) must intersect.
    pub fn validate_quantum(&self) -> Validity {
        for (i, &a) in self.minimal.iter().enumerate() {
            for &b in &self.minimal[i..] {
                if !a.intersects(b) {
                    return Validity {
                        valid: false,
                        witness: Some((a, b)),
                    };
                }
            }
        }
        Validity {
            valid: true,
            witness: None,
        }
    }

    pub fn is_quantum(&self) -> bool {
        self.validate_quantum().valid
    }

    pub(crate) fn require_quantum(&self) -> Result<()> {
        match self.validate_quantum().witness {
            None => Ok(()),
            Some((a, b)) => Err(Error::NotQuantum(
                self.universe.format_set(a),
                self.universe.format_set(b),
            )),
        }
    }

    pub(crate) fn require_enumerable(&self) -> Result<()> {
        Limits::check(
            "players for 2^n enumeration",
            self.n() as u64,
            limits::active().enum_players as u64,
        )
    }

    pub fn unauthorized_split(&self) -> Result<UnauthorizedSplit> {
        self.unauthorized_split_with(Exec::default())
    }

    pub fn unauthorized_split_with(&self, exec: Exec) -> Result<UnauthorizedSplit> {
        self.require_enumerable()?;
        let count = 1u64 << self.n();
        let unauthorized =
            par::filter_range(exec, count, |x| x != 0 && !self.is_authorized(PlayerSet(x as u32)));
        let mut split = UnauthorizedSplit::default();
        for x in unauthorized {
            let s = PlayerSet(x as u32);
            if self.minimal.iter().all(|m| m.intersects(s)) {
                split.a2.push(s);
            } else {
                split.a1.push(s);
            }
        }
        Ok(split)
    }

    /// Maximality: valid and no unauthorized set meets every minimal set.
    pub fn is_maximal(&self) -> Result<bool> {
        self.require_enumerable()?;
        if !self.is_quantum() {
            return Ok(false);
        }
        let count = 1u64 << self.n();
        Ok(!(1..count).any(|x| {
            let s = PlayerSet(x as u32);
            !self.is_authorized(s) && self.minimal.iter().all(|m| m.intersects(s))
        }))
    }

    /// Smallest sorted family among all player relabelings; equal for
    /// isomorphic structures.
    pub fn canonical_form(&self) -> Result<Vec<u32>> {
        Limits::check("players for canonical form", self.n() as u64, 9)?;
        let n = self.n();
        let mut best: Option<Vec<u32>> = None;
        for perm in (0..n).permutations(n) {
            let mut image: Vec<u32> = self.minimal.iter().map(|s| s.permute(&perm).bits()).collect();
            image.sort_unstable();
            if best.as_ref().is_none_or(|b| image < *b) {
                best = Some(image);
            }
        }
        Ok(best.unwrap_or_default())
    }

    pub fn is_isomorphic(&self, other: &AccessStructure) -> Result<bool> {
        if self.n() != other.n() || self.r() != other.r() {
            return Ok(false);
        }
        Ok(self.canonical_form()? == other.canonical_form()?)
    }

    /// The structure on the sub-universe `players`; every minimal set must
    /// lie inside `players`.
    pub fn restrict_to(&self, players: PlayerSet) -> Result<AccessStructure> {
        let index: Vec<usize> = players.iter().collect();
        let universe = self.universe.restricted(players)?;
        let family = self
            .minimal
            .iter()
            .map(|&s| {
                if !s.is_subset_of(players) {
                    return Err(Error::InvalidStep(format!(
                        "{} is not inside {}",
                        self.universe.format_set(s),
                        self.universe.format_set(players)
                    )));
                }
                Ok(PlayerSet::from_indices(
                    s.iter().map(|p| index.iter().position(|&q| q == p).unwrap()),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        AccessStructure::new(universe, family)
    }

    /// Inverse of [`restrict_to`](Self::restrict_to): maps this structure's
    /// players onto `players` of `universe`.
    pub fn lift_into(&self, universe: Arc<Universe>, players: PlayerSet) -> Result<AccessStructure> {
        let index: Vec<usize> = players.iter().collect();
        if index.len() != self.n() {
            return Err(Error::InvalidStep("lift target has the wrong size".into()));
        }
        AccessStructure::new(
            universe,
            self.minimal.iter().map(|s| PlayerSet::from_indices(s.iter().map(|p| index[p]))),
        )
    }
}

impl fmt::Display for AccessStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1() -> AccessStructure {
        AccessStructure::numbered(5, &["P1P2", "P1P4P5", "P2P3P5", "P2P3P4"]).unwrap()
    }

    fn set(g: &AccessStructure, s: &str) -> PlayerSet {
        g.universe().parse_set(s).unwrap()
    }

    #[test]
    fn minimize_absorbs_supersets() {
        let g = AccessStructure::numbered(3, &["P1P2", "P1P2P3"]).unwrap();
        assert_eq!(g.display(), "{P1P2}");
        let g = AccessStructure::numbered(3, &["P1P2"]).unwrap();
        assert_eq!(g.display(), "{P1P2}");
    }

    #[test]
    fn minimize_is_order_independent() {
        let a = ex1();
        let b = AccessStructure::numbered(5, &["P2P3P4", "P2P3P5", "P1P2", "P1P4P5", "P1P2"]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.r(), 4);
    }

    #[test]
    fn empty_family_rejected() {
        let u = Universe::numbered(3).unwrap();
        let err = AccessStructure::new(u, Vec::new()).unwrap_err();
        assert_eq!(err.to_string(), "no authorized sets");
    }

    #[test]
    fn universe_rejects_duplicates_and_oversize() {
        assert!(matches!(Universe::new(["A", "A"]), Err(Error::DuplicatePlayer(_))));
        assert!(Universe::numbered(25).unwrap_err().is_size_limit());
        assert!(Universe::numbered(24).is_ok());
    }

    #[test]
    fn parse_forms() {
        let u = Universe::numbered(12).unwrap();
        assert_eq!(u.parse_set("P1,P3").unwrap(), PlayerSet::from_indices([0, 2]));
        assert_eq!(u.parse_set("P1P3").unwrap(), PlayerSet::from_indices([0, 2]));
        // longest label wins: P11 is not P1 followed by "1"
        assert_eq!(u.parse_set("P11P2").unwrap(), PlayerSet::from_indices([10, 1]));
        assert_eq!(u.parse_set("{}").unwrap(), PlayerSet::EMPTY);
        assert!(matches!(u.parse_set("P1,Q9"), Err(Error::UnknownPlayer(_))));
        assert!(u.parse_set("X").is_err());
    }

    #[test]
    fn authorization() {
        let g = ex1();
        assert!(g.is_authorized(set(&g, "P1P2P3")));
        assert!(!g.is_authorized(set(&g, "P1P3")));
        assert!(!g.is_authorized(PlayerSet::EMPTY));
    }

    #[test]
    fn quantum_validity() {
        assert!(ex1().validate_quantum().valid);
        let bad = AccessStructure::numbered(4, &["P1P2", "P3P4"]).unwrap();
        let v = bad.validate_quantum();
        assert!(!v.valid);
        let u = bad.universe();
        let (a, b) = v.witness.unwrap();
        assert_eq!((u.format_set(a), u.format_set(b)), ("P1P2".into(), "P3P4".into()));
        assert!(AccessStructure::numbered(1, &["P1"]).unwrap().validate_quantum().valid);
        let everything = AccessStructure::new(Universe::numbered(2).unwrap(), [PlayerSet::EMPTY]).unwrap();
        assert!(!everything.validate_quantum().valid);
    }

    #[test]
    fn example1_split() {
        let g = ex1();
        let split = g.unauthorized_split().unwrap();
        let u = g.universe();
        let mut expected: Vec<PlayerSet> = ["P1P3", "P2P4", "P2P5", "P2P4P5", "P1P3P5", "P1P3P4"]
            .iter()
            .map(|s| u.parse_set(s).unwrap())
            .collect();
        expected.sort();
        assert_eq!(split.a2, expected);
        assert!(!g.is_maximal().unwrap());
    }

    #[test]
    fn split_of_single_pair() {
        let g = AccessStructure::numbered(2, &["P1P2"]).unwrap();
        let split = g.unauthorized_split().unwrap();
        assert!(split.a1.is_empty());
        assert_eq!(split.a2, vec![PlayerSet::from_bits(1), PlayerSet::from_bits(2)]);
    }

    #[test]
    fn threshold_three_of_five_is_maximal() {
        let u = Universe::numbered(5).unwrap();
        let g = AccessStructure::new(u, (0..32u32).filter(|x| x.count_ones() == 3).map(PlayerSet::from_bits)).unwrap();
        assert_eq!(g.r(), 10);
        assert!(g.unauthorized_split().unwrap().a2.is_empty());
        assert!(g.is_maximal().unwrap());
    }

    #[test]
    fn maximal_examples() {
        let gm = AccessStructure::numbered(5, &["P1P2", "P1P3", "P1P4P5", "P2P3P5", "P2P3P4"]).unwrap();
        assert!(gm.is_maximal().unwrap());
        let tri = AccessStructure::numbered(3, &["P1P2", "P1P3", "P2P3"]).unwrap();
        assert!(tri.is_maximal().unwrap());
    }

    #[test]
    fn enumeration_bound_enforced() {
        let u = Universe::numbered(21).unwrap();
        let g = AccessStructure::new(u, [PlayerSet::from_bits(1)]).unwrap();
        assert!(g.unauthorized_split().unwrap_err().is_size_limit());
    }

    #[test]
    fn restrict_and_lift_round_trip() {
        let g = AccessStructure::numbered(6, &["P2P4", "P2P5", "P4P5"]).unwrap();
        let support = g.participants();
        let small = g.restrict_to(support).unwrap();
        assert_eq!(small.display(), "{P2P4,P2P5,P4P5}");
        assert_eq!(small.n(), 3);
        let back = small.lift_into(g.universe().clone(), support).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn isomorphism() {
        let a = AccessStructure::numbered(4, &["P1P2", "P1P3", "P1P4", "P2P3P4"]).unwrap();
        let b = AccessStructure::numbered(4, &["P4P1", "P4P2", "P4P3", "P1P2P3"]).unwrap();
        let c = AccessStructure::numbered(4, &["P1P2", "P1P3", "P2P3"]).unwrap();
        assert!(a.is_isomorphic(&b).unwrap());
        assert!(!a.is_isomorphic(&c).unwrap());
    }

    #[test]
    fn subsets_iterates_all() {
        let s = PlayerSet::from_bits(0b1011);
        let subs: Vec<u32> = s.subsets().map(|x| x.bits()).collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|&x| x & !0b1011 == 0));
        assert_eq!(PlayerSet::EMPTY.subsets().count(), 1);
    }
}
