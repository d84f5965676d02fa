//! Decompositions into realizable blocks and the exact minimum-block search.
//!
//! Realizability is decided by an [`Oracle`]. Being a valid quantum access
//! structure is not enough: every subfamily of a pairwise-intersecting
//! antichain is again one, so that reading would always give `l = 1`. The
//! default oracle instead asks for a *bundled threshold*: integer weights
//! `w_p` (shares per player) and a threshold `k` such that the weighted
//! structure `{A : Σ_{p∈A} w_p ≥ k}` has exactly the block's minimal sets,
//! with `m = Σ w_p ≤ 2k − 1` so that it is carved out of a `((k, 2k−1))`
//! threshold scheme by discarding `2k − 1 − m` shares.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{self, Limits};
use crate::par::{self, Exec};
use crate::structure::{AccessStructure, PlayerSet, Universe};

/// Largest participant count the bundled oracle searches.
pub const MAX_BUNDLED_PARTICIPANTS: usize = 8;
/// Participant counts up to this use a precomputed table of weighted
/// structures.
const TABLE_PARTICIPANTS: usize = 7;
const TABLE_MAX_WEIGHT_VECTORS: u64 = 200_000;

/// A weighted threshold realizing a block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BundledThreshold {
    pub participants: PlayerSet,
    /// Share counts, aligned with `participants.iter()`.
    pub weights: Vec<u32>,
    pub threshold: u32,
    /// Prime field order, the smallest prime `≥ max(2k − 1, 2)`.
    pub field_order: u32,
}

impl BundledThreshold {
    fn new(participants: PlayerSet, weights: Vec<u32>, threshold: u32) -> Self {
        BundledThreshold {
            participants,
            weights,
            threshold,
            field_order: smallest_prime_at_least((2 * threshold).saturating_sub(1).max(2)),
        }
    }

    /// All players of `set` holding weight 1 and `k = |set|`.
    pub fn unanimity(set: PlayerSet) -> Self {
        Self::new(set, vec![1; set.len()], set.len() as u32)
    }

    pub fn total_shares(&self) -> u32 {
        self.weights.iter().sum()
    }

    /// Length `2k − 1` of the underlying threshold code.
    pub fn code_length(&self) -> u32 {
        2 * self.threshold - 1
    }

    pub fn discarded(&self) -> u32 {
        self.code_length() - self.total_shares()
    }

    pub fn weight_of_player(&self, player: usize) -> u32 {
        self.participants
            .iter()
            .position(|p| p == player)
            .map_or(0, |i| self.weights[i])
    }

    pub fn weight_of(&self, set: PlayerSet) -> u32 {
        self.participants
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| set.contains(*p))
            .map(|(_, w)| w)
            .sum()
    }

    /// The weighted structure `{A : w(A) ≥ k}` over `universe`.
    pub fn induced(&self, universe: &Arc<Universe>) -> Result<AccessStructure> {
        let authorized = self
            .participants
            .subsets()
            .filter(|&s| self.weight_of(s) >= self.threshold);
        AccessStructure::new(universe.clone(), authorized)
    }

    /// Re-derives the induced antichain and checks the share bounds.
    pub fn realizes(&self, block: &AccessStructure) -> bool {
        self.weights.len() == self.participants.len()
            && self.weights.iter().all(|&w| w >= 1)
            && self.threshold >= 1
            && self.total_shares() <= self.code_length()
            && is_prime(self.field_order)
            && self.field_order >= self.code_length()
            && self
                .induced(block.universe())
                .is_ok_and(|g| g.minimal_sets() == block.minimal_sets())
    }
}

pub fn is_prime(q: u32) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

pub fn smallest_prime_at_least(x: u32) -> u32 {
    (x.max(2)..).find(|&q| is_prime(q)).expect("primes are unbounded")
}

/// Realizability oracle for blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Oracle {
    /// Bundled thresholds with weights in `1..=max_weight` and
    /// `k ≤ max_threshold`; single sets always pass as unanimity schemes.
    Bundled { max_weight: u32, max_threshold: u32 },
    /// Only single minimal sets, giving the trivial decomposition.
    Unanimity,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle::Bundled {
            max_weight: 5,
            max_threshold: 25,
        }
    }
}

impl Oracle {
    /// A witness for the block formed by `sets`, if one exists within
    /// bounds. Every returned witness has been validated.
    pub fn realize(&self, block: &AccessStructure) -> Option<BundledThreshold> {
        if let [single] = block.minimal_sets() {
            return Some(BundledThreshold::unanimity(*single));
        }
        match *self {
            Oracle::Unanimity => None,
            Oracle::Bundled {
                max_weight,
                max_threshold,
            } => recognize_bundled_threshold(block, max_weight, max_threshold),
        }
    }
}

/// Searches for the bundled threshold with lexicographically smallest
/// `(k, m, weights)` inducing exactly `block`.
pub fn recognize_bundled_threshold(
    block: &AccessStructure,
    max_weight: u32,
    max_threshold: u32,
) -> Option<BundledThreshold> {
    if !block.is_quantum() || max_weight == 0 {
        return None;
    }
    if let [single] = block.minimal_sets() {
        let w = BundledThreshold::unanimity(*single);
        return (w.threshold <= max_threshold).then_some(w);
    }
    let participants = block.participants();
    let p = participants.len();
    if p > MAX_BUNDLED_PARTICIPANTS {
        return None;
    }
    let compact: Vec<u32> = block
        .minimal_sets()
        .iter()
        .map(|&a| compress(a, participants))
        .collect();
    let use_table = p <= TABLE_PARTICIPANTS
        && (max_weight as u64).checked_pow(p as u32).is_some_and(|c| c <= TABLE_MAX_WEIGHT_VECTORS);
    let found = if use_table {
        let key = truth_table(&compact, p);
        weighted_table(p, max_weight, max_threshold)
            .get(&key)
            .map(|(k, w)| (*k, w.clone()))
    } else {
        direct_search(&compact, p, max_weight, max_threshold)
    };
    let (k, weights) = found?;
    let witness = BundledThreshold::new(participants, weights, k);
    debug_assert!(witness.realizes(block));
    witness.realizes(block).then_some(witness)
}

fn compress(set: PlayerSet, within: PlayerSet) -> u32 {
    within
        .iter()
        .enumerate()
        .filter(|&(_, p)| set.contains(p))
        .fold(0, |acc, (i, _)| acc | 1 << i)
}

fn truth_table(compact_minimal: &[u32], p: usize) -> u128 {
    (0..1u32 << p)
        .filter(|&s| compact_minimal.iter().any(|&a| a & s == a))
        .fold(0u128, |acc, s| acc | 1u128 << s)
}

/// Iterates weight vectors in `[1, max_weight]^p` in lexicographic order.
fn for_each_weights(p: usize, max_weight: u32, mut f: impl FnMut(&[u32])) {
    let mut w = vec![1u32; p];
    loop {
        f(&w);
        let mut i = p;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if w[i] < max_weight {
                w[i] += 1;
                w[i + 1..].iter_mut().for_each(|x| *x = 1);
                break;
            }
        }
    }
}

fn subset_sums(w: &[u32], sums: &mut [u32]) {
    sums[0] = 0;
    for s in 1..sums.len() {
        let low = s.trailing_zeros() as usize;
        sums[s] = sums[s & (s - 1)] + w[low];
    }
}

/// Smallest admissible threshold for weights with the given extreme sums.
fn threshold_range(m: u32, max_unauthorized: u32, min_authorized: u32, max_threshold: u32) -> Option<u32> {
    // m ≤ 2k − 1
    let lo = (max_unauthorized + 1).max((m + 2) / 2);
    let hi = min_authorized.min(max_threshold);
    (lo <= hi).then_some(lo)
}

type WeightTable = HashMap<u128, (u32, Vec<u32>)>;

fn weighted_table(p: usize, max_weight: u32, max_threshold: u32) -> Arc<WeightTable> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32, u32), Arc<WeightTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("table cache poisoned").get(&(p, max_weight, max_threshold)) {
        return t.clone();
    }
    let mut table: WeightTable = HashMap::new();
    let mut sums = vec![0u32; 1 << p];
    for_each_weights(p, max_weight, |w| {
        subset_sums(w, &mut sums);
        let m = sums[(1 << p) - 1];
        // m ≤ 2k − 1
        let k_min = (m + 2) / 2;
        for k in k_min..=m.min(max_threshold) {
            let key = sums
                .iter()
                .enumerate()
                .filter(|&(_, &x)| x >= k)
                .fold(0u128, |acc, (s, _)| acc | 1u128 << s);
            let better = table
                .get(&key)
                .is_none_or(|(k0, w0)| (k, m) < (*k0, w0.iter().sum::<u32>()));
            if better {
                table.insert(key, (k, w.to_vec()));
            }
        }
    });
    let table = Arc::new(table);
    cache
        .lock()
        .expect("table cache poisoned")
        .insert((p, max_weight, max_threshold), table.clone());
    table
}

fn direct_search(compact_minimal: &[u32], p: usize, max_weight: u32, max_threshold: u32) -> Option<(u32, Vec<u32>)> {
    let authorized = |s: u32| compact_minimal.iter().any(|&a| a & s == a);
    let full = (1u32 << p) - 1;
    let maximal_unauthorized: Vec<u32> = (0..=full)
        .filter(|&s| !authorized(s) && (0..p).all(|i| s >> i & 1 == 1 || authorized(s | 1 << i)))
        .collect();
    let mut best: Option<(u32, u32, Vec<u32>)> = None;
    for_each_weights(p, max_weight, |w| {
        let weight = |s: u32| (0..p).filter(|i| s >> i & 1 == 1).map(|i| w[i]).sum::<u32>();
        let m = weight(full);
        let min_auth = compact_minimal.iter().map(|&a| weight(a)).min().unwrap_or(0);
        let max_unauth = maximal_unauthorized.iter().map(|&s| weight(s)).max().unwrap_or(0);
        if let Some(k) = threshold_range(m, max_unauth, min_auth, max_threshold) {
            if best.as_ref().is_none_or(|(k0, m0, _)| (k, m) < (*k0, *m0)) {
                best = Some((k, m, w.to_vec()));
            }
        }
    });
    best.map(|(k, _, w)| (k, w))
}

/// Realizability of every non-empty subfamily of a structure's minimal
/// sets, indexed by bitmask over minimal-set indices.
#[derive(Clone, Debug)]
pub struct RealizableSubfamilies {
    pub r: usize,
    /// `witnesses[t]` for `t` in `1..2^r`; index 0 is unused.
    pub witnesses: Vec<Option<BundledThreshold>>,
}

impl RealizableSubfamilies {
    pub fn is_realizable(&self, t: u32) -> bool {
        self.witnesses.get(t as usize).is_some_and(Option::is_some)
    }

    pub fn count(&self) -> usize {
        self.witnesses.iter().filter(|w| w.is_some()).count()
    }
}

/// The subfamily `{A_i : i ∈ t}` of `gamma`'s minimal sets.
pub fn subfamily(gamma: &AccessStructure, t: u32) -> Result<AccessStructure> {
    AccessStructure::new(
        gamma.universe().clone(),
        gamma
            .minimal_sets()
            .iter()
            .enumerate()
            .filter(|(i, _)| t >> i & 1 == 1)
            .map(|(_, &a)| a),
    )
}

pub fn enumerate_realizable_subfamilies(gamma: &AccessStructure, oracle: &Oracle, exec: Exec) -> Result<RealizableSubfamilies> {
    let r = gamma.r();
    Limits::check("minimal sets for decomposition", r as u64, limits::active().decomp_sets as u64)?;
    // Warm the shared table before fanning out.
    if let Oracle::Bundled {
        max_weight,
        max_threshold,
    } = *oracle
    {
        let p = gamma.participants().len().min(TABLE_PARTICIPANTS);
        if (max_weight as u64).checked_pow(p as u32).is_some_and(|c| c <= TABLE_MAX_WEIGHT_VECTORS) {
            for q in 2..=p {
                weighted_table(q, max_weight, max_threshold);
            }
        }
    }
    let mut witnesses = par::map_range(exec, 1u64 << r, |t| {
        if t == 0 {
            return None;
        }
        subfamily(gamma, t as u32).ok().and_then(|b| oracle.realize(&b))
    });
    witnesses[0] = None;
    Ok(RealizableSubfamilies { r, witnesses })
}

/// One block of a decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    /// Indices into the parent structure's minimal sets.
    pub indices: Vec<usize>,
    pub structure: AccessStructure,
    pub witness: BundledThreshold,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub gamma: AccessStructure,
    pub blocks: Vec<Block>,
    pub oracle: Oracle,
}

impl Decomposition {
    pub fn l(&self) -> usize {
        self.blocks.len()
    }

    pub fn total_shares(&self) -> u32 {
        self.blocks.iter().map(|b| b.witness.total_shares()).sum()
    }

    /// Checks the partition property and every witness.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.gamma.r()];
        for b in &self.blocks {
            for &i in &b.indices {
                if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidScheme(format!("minimal set #{i} is covered twice or out of range")));
                }
            }
            let expected = subfamily(&self.gamma, b.indices.iter().fold(0, |acc, i| acc | 1 << i))?;
            if expected != b.structure {
                return Err(Error::InvalidScheme(format!("block {} does not match its indices", b.structure)));
            }
            if !b.witness.realizes(&b.structure) {
                return Err(Error::InvalidScheme(format!("witness does not realize block {}", b.structure)));
            }
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidScheme(format!(
                "minimal set {} is in no block",
                self.gamma.universe().format_set(self.gamma.minimal_sets()[i])
            )));
        }
        Ok(())
    }
}

/// Minimum-`l` partition of `gamma`'s minimal sets into realizable blocks.
///
/// Exact DP over index subsets: each block is chosen to contain the lowest
/// uncovered index. Among optimal partitions the one with fewest total
/// shares wins, then the first in enumeration order.
pub fn optimal_decomposition(gamma: &AccessStructure, oracle: &Oracle) -> Result<Decomposition> {
    optimal_decomposition_with(gamma, oracle, Exec::default())
}

pub fn optimal_decomposition_with(gamma: &AccessStructure, oracle: &Oracle, exec: Exec) -> Result<Decomposition> {
    gamma.require_quantum()?;
    let table = enumerate_realizable_subfamilies(gamma, oracle, exec)?;
    let partition = min_partition(&table);
    let blocks = partition
        .into_iter()
        .map(|t| -> Result<Block> {
            Ok(Block {
                indices: (0..table.r).filter(|i| t >> i & 1 == 1).collect(),
                structure: subfamily(gamma, t)?,
                witness: table.witnesses[t as usize].clone().expect("partition uses realizable blocks"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let d = Decomposition {
        gamma: gamma.clone(),
        blocks,
        oracle: *oracle,
    };
    d.validate()?;
    Ok(d)
}

/// The trivial decomposition, one block per minimal set.
pub fn trivial_decomposition(gamma: &AccessStructure) -> Result<Decomposition> {
    gamma.require_quantum()?;
    let blocks = gamma
        .minimal_sets()
        .iter()
        .enumerate()
        .map(|(i, &a)| -> Result<Block> {
            Ok(Block {
                indices: vec![i],
                structure: AccessStructure::new(gamma.universe().clone(), [a])?,
                witness: BundledThreshold::unanimity(a),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Decomposition {
        gamma: gamma.clone(),
        blocks,
        oracle: Oracle::Unanimity,
    })
}

fn min_partition(table: &RealizableSubfamilies) -> Vec<u32> {
    let full = (1u32 << table.r) - 1;
    // best[mask] = (blocks, shares, first block)
    let mut best: Vec<(u32, u32, u32)> = vec![(u32::MAX, u32::MAX, 0); 1 << table.r];
    best[0] = (0, 0, 0);
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        // submasks of `rest`, each joined with `low`
        let mut sub = rest;
        loop {
            let t = sub | low;
            if let Some(w) = &table.witnesses[t as usize] {
                let (l, s, _) = best[(mask ^ t) as usize];
                let cand = (l + 1, s + w.total_shares());
                let cur = best[mask as usize];
                if l != u32::MAX && cand < (cur.0, cur.1) {
                    best[mask as usize] = (cand.0, cand.1, t);
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    let mut out = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let t = best[mask as usize].2;
        out.push(t);
        mask ^= t;
    }
    out
}
