//! Moving between general, maximal and minimal maximal structures.
//!
//! * [`extend_to_maximal`] repeatedly authorizes an unauthorized set that
//!   meets every current minimal set until none is left.
//! * [`reduce_to_minmax`] repeatedly picks a pivot `B` (an intersection of
//!   at least two minimal sets, `|B| ≥ 2`), replaces every minimal set
//!   containing `B` by `B` and drops the minimal sets disjoint from `B`,
//!   keeping only steps that leave the structure maximal and every player
//!   covered.
//! * [`grow_minmax`] adds one player to a minimal maximal structure.
//!
//! The greedy reduction can dead-end on a maximal structure with `r > n`
//! for which no single pivot step is admissible (several exist on six
//! players). The search therefore backtracks over pivot choices and reports
//! [`Error::Unreachable`] only when every path dead-ends.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{self, Limits};
use crate::par::{self, Exec};
use crate::structure::{AccessStructure, PlayerSet, Universe};

/// Which candidate [`extend_to_maximal`] authorizes next.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum ExtendPolicy {
    /// Fewest players first, lowest bitmask on ties.
    #[default]
    SmallestFirst,
    LargestFirst,
    /// The listed sets in order, then [`ExtendPolicy::SmallestFirst`].
    Scripted(Vec<PlayerSet>),
}

/// Which pivot [`reduce_to_minmax`] tries first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum PivotPolicy {
    /// Fewest players first, lowest bitmask on ties.
    #[default]
    SmallestFirst,
    LargestFirst,
    /// The listed pivots in order (each must be admissible when its turn
    /// comes), then [`PivotPolicy::SmallestFirst`].
    Scripted(Vec<PlayerSet>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    pub result: AccessStructure,
    /// Sets authorized, in order.
    pub added: Vec<PlayerSet>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionStep {
    pub pivot: PlayerSet,
    /// Minimal sets containing the pivot, replaced by it.
    pub replaced: Vec<PlayerSet>,
    /// Minimal sets disjoint from the pivot, dropped.
    pub deleted: Vec<PlayerSet>,
    pub r_before: usize,
    pub r_after: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub result: AccessStructure,
    pub steps: Vec<ReductionStep>,
    /// Dead ends abandoned during the search.
    pub backtracks: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Growth {
    pub result: AccessStructure,
    pub pivot: PlayerSet,
    /// Pivots rejected before `pivot` was accepted.
    pub rejected: Vec<PlayerSet>,
}

/// Counts for the `r` versus `n` relation of a maximal structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub r: usize,
    pub n: usize,
    pub participants: usize,
    pub r_at_least_n: bool,
    pub r_greater_than_n: bool,
    /// `r = n` with every player covered.
    pub minimal_maximal: bool,
    pub note: String,
}

fn complement_pairs(universe: &Universe, sets: &[PlayerSet]) -> Vec<(PlayerSet, PlayerSet)> {
    let mut pairs: Vec<(PlayerSet, PlayerSet)> = sets
        .iter()
        .map(|&b| {
            let c = universe.complement(b);
            if b <= c { (b, c) } else { (c, b) }
        })
        .collect();
    pairs.sort();
    pairs.dedup();
    pairs
}

/// Unordered pairs `{B, B̄}` with both members unauthorized. Empty exactly
/// when `gamma` is maximal.
pub fn candidate_pairs(gamma: &AccessStructure) -> Result<Vec<(PlayerSet, PlayerSet)>> {
    gamma.require_quantum()?;
    let split = gamma.unauthorized_split()?;
    Ok(complement_pairs(gamma.universe(), &split.a2))
}

fn pick_candidate(candidates: &[PlayerSet], policy: &ExtendPolicy, step: usize) -> Result<PlayerSet> {
    let smallest = || {
        candidates
            .iter()
            .copied()
            .min_by_key(|s| (s.len(), s.bits()))
            .expect("non-empty candidate list")
    };
    match policy {
        ExtendPolicy::SmallestFirst => Ok(smallest()),
        ExtendPolicy::LargestFirst => Ok(candidates
            .iter()
            .copied()
            .min_by_key(|s| (std::cmp::Reverse(s.len()), s.bits()))
            .expect("non-empty candidate list")),
        ExtendPolicy::Scripted(script) => match script.get(step) {
            Some(&s) if candidates.contains(&s) => Ok(s),
            Some(&s) => Err(Error::InvalidStep(format!(
                "scripted set #{} ({:#b}) is not an admissible addition",
                step + 1,
                s.bits()
            ))),
            None => Ok(smallest()),
        },
    }
}

/// Extends `gamma` to a maximal structure whose closure contains it.
///
/// Each added set is unauthorized and meets every current minimal set; the
/// family is re-minimized after each addition.
pub fn extend_to_maximal(gamma: &AccessStructure, policy: &ExtendPolicy) -> Result<Extension> {
    gamma.require_quantum()?;
    let mut current = gamma.clone();
    let mut added = Vec::new();
    loop {
        let candidates = current.unauthorized_split()?.a2;
        if candidates.is_empty() {
            if let ExtendPolicy::Scripted(script) = policy {
                if added.len() < script.len() {
                    return Err(Error::InvalidStep(format!(
                        "structure became maximal after {} of {} scripted additions",
                        added.len(),
                        script.len()
                    )));
                }
            }
            return Ok(Extension {
                result: current,
                added,
            });
        }
        let pick = pick_candidate(&candidates, policy, added.len())
            .map_err(|e| match e {
                Error::InvalidStep(_) => Error::InvalidStep(format!(
                    "{} is not an admissible addition to {}",
                    current.universe().format_set(match policy {
                        ExtendPolicy::Scripted(s) => s[added.len()],
                        _ => PlayerSet::EMPTY,
                    }),
                    current
                )),
                other => other,
            })?;
        let mut family = current.minimal_sets().to_vec();
        family.push(pick);
        current = AccessStructure::new(current.universe().clone(), family)?;
        added.push(pick);
    }
}

/// Every maximal structure whose closure contains the closure of `gamma`,
/// sorted canonically.
///
/// Backtracks over the complement pairs: any maximal extension authorizes
/// exactly one member of each remaining pair.
pub fn all_maximal_extensions(gamma: &AccessStructure) -> Result<Vec<AccessStructure>> {
    all_maximal_extensions_with(gamma, Exec::default())
}

pub fn all_maximal_extensions_with(gamma: &AccessStructure, exec: Exec) -> Result<Vec<AccessStructure>> {
    gamma.require_quantum()?;
    Limits::check(
        "players for exhaustive extension",
        gamma.n() as u64,
        limits::active().extension_players as u64,
    )?;
    let mut out = extensions_from(gamma, exec)?;
    out.sort();
    out.dedup();
    Ok(out)
}

fn extensions_from(gamma: &AccessStructure, exec: Exec) -> Result<Vec<AccessStructure>> {
    let a2 = gamma.unauthorized_split()?.a2;
    let Some(&first) = a2.first() else {
        return Ok(vec![gamma.clone()]);
    };
    let other = gamma.universe().complement(first);
    let branch = |pick: PlayerSet| -> Result<Vec<AccessStructure>> {
        let mut family = gamma.minimal_sets().to_vec();
        family.push(pick);
        extensions_from(&AccessStructure::new(gamma.universe().clone(), family)?, exec)
    };
    let (left, right) = par::join(exec, || branch(first), || branch(other));
    let mut out = left?;
    out.extend(right?);
    Ok(out)
}

/// Maximal, `r = n`, and every player of the universe occurs in some
/// minimal set.
pub fn is_minmax(gamma: &AccessStructure) -> Result<bool> {
    Ok(gamma.r() == gamma.n() && gamma.covers_universe() && gamma.is_maximal()?)
}

fn pivot_candidates(gamma: &AccessStructure) -> Vec<PlayerSet> {
    let mut seen = HashSet::new();
    for &a in gamma.minimal_sets() {
        for b in a.subsets() {
            if b.len() >= 2 {
                seen.insert(b);
            }
        }
    }
    let mut out: Vec<PlayerSet> = seen.into_iter().collect();
    out.sort();
    out
}

/// Applies the pivot replacement for `pivot` without any admissibility
/// check beyond the pivot being an intersection of ≥ 2 minimal sets.
pub fn apply_pivot(gamma: &AccessStructure, pivot: PlayerSet) -> Option<(ReductionStep, AccessStructure)> {
    let replaced: Vec<PlayerSet> = gamma
        .minimal_sets()
        .iter()
        .copied()
        .filter(|a| pivot.is_subset_of(*a))
        .collect();
    if replaced.len() < 2 || replaced.len() >= gamma.r() {
        return None;
    }
    let meet = replaced
        .iter()
        .fold(gamma.universe().full(), |acc, &a| acc.intersection(a));
    if meet != pivot {
        return None;
    }
    let deleted: Vec<PlayerSet> = gamma
        .minimal_sets()
        .iter()
        .copied()
        .filter(|a| !a.intersects(pivot))
        .collect();
    let family: Vec<PlayerSet> = std::iter::once(pivot)
        .chain(
            gamma
                .minimal_sets()
                .iter()
                .copied()
                .filter(|a| a.intersects(pivot) && !pivot.is_subset_of(*a)),
        )
        .collect();
    let next = AccessStructure::new(gamma.universe().clone(), family).ok()?;
    Some((
        ReductionStep {
            pivot,
            replaced,
            deleted,
            r_before: gamma.r(),
            r_after: next.r(),
        },
        next,
    ))
}

/// Pivot steps that strictly decrease `r`, keep the structure maximal,
/// keep every participant covered and, when `protect` is given, keep its
/// closure authorized. Sorted by pivot size then bitmask.
pub fn reducing_steps(
    gamma: &AccessStructure,
    protect: Option<&AccessStructure>,
) -> Result<Vec<(ReductionStep, AccessStructure)>> {
    gamma.require_enumerable()?;
    let participants = gamma.participants();
    let mut steps = Vec::new();
    for pivot in pivot_candidates(gamma) {
        let Some((step, next)) = apply_pivot(gamma, pivot) else {
            continue;
        };
        if next.r() >= gamma.r() || next.participants() != participants {
            continue;
        }
        if protect.is_some_and(|p| !next.contains_closure_of(p)) {
            continue;
        }
        if !next.is_maximal()? {
            continue;
        }
        steps.push((step, next));
    }
    steps.sort_by_key(|(s, _)| (s.pivot.len(), s.pivot.bits()));
    Ok(steps)
}

/// Reduces a maximal structure to a minimal maximal one over the same
/// universe.
pub fn reduce_to_minmax(gamma_m: &AccessStructure, policy: &PivotPolicy) -> Result<Reduction> {
    reduce_impl(gamma_m, policy, None)
}

/// As [`reduce_to_minmax`], restricted to steps after which the closure of
/// `protect` is still authorized.
pub fn reduce_to_minmax_protecting(
    gamma_m: &AccessStructure,
    policy: &PivotPolicy,
    protect: &AccessStructure,
) -> Result<Reduction> {
    reduce_impl(gamma_m, policy, Some(protect))
}

fn reduce_impl(
    gamma_m: &AccessStructure,
    policy: &PivotPolicy,
    protect: Option<&AccessStructure>,
) -> Result<Reduction> {
    if !gamma_m.is_maximal()? {
        return Err(Error::NotMaximal);
    }
    if let Some(p) = protect {
        if !gamma_m.contains_closure_of(p) {
            return Err(Error::InvalidStep(format!("{gamma_m} does not contain {p}")));
        }
    }
    let uncovered = gamma_m.universe().full().difference(gamma_m.participants());
    if !uncovered.is_empty() {
        return Err(Error::Unreachable(format!(
            "{} occur in no minimal set",
            gamma_m.universe().format_set(uncovered)
        )));
    }
    let mut search = PivotSearch {
        policy,
        protect,
        dead: HashSet::new(),
        backtracks: 0,
    };
    let mut path = Vec::new();
    match search.descend(gamma_m, &mut path)? {
        Some(result) => Ok(Reduction {
            result,
            steps: path,
            backtracks: search.backtracks,
        }),
        None => Err(Error::Unreachable(format!(
            "every pivot sequence from {gamma_m} dead-ends above r = n = {}",
            gamma_m.n()
        ))),
    }
}

struct PivotSearch<'a> {
    policy: &'a PivotPolicy,
    protect: Option<&'a AccessStructure>,
    dead: HashSet<Vec<PlayerSet>>,
    backtracks: usize,
}

impl PivotSearch<'_> {
    fn descend(&mut self, g: &AccessStructure, path: &mut Vec<ReductionStep>) -> Result<Option<AccessStructure>> {
        let mut steps = reducing_steps(g, self.protect)?;
        let depth = path.len();
        match self.policy {
            PivotPolicy::Scripted(script) if depth < script.len() => {
                let want = script[depth];
                let Some(pos) = steps.iter().position(|(s, _)| s.pivot == want) else {
                    return Err(Error::InvalidStep(format!(
                        "pivot {} is not an admissible reduction of {g}",
                        g.universe().format_set(want)
                    )));
                };
                let chosen = steps.swap_remove(pos);
                steps = vec![chosen];
            }
            PivotPolicy::LargestFirst => {
                steps.sort_by_key(|(s, _)| (std::cmp::Reverse(s.pivot.len()), s.pivot.bits()));
            }
            _ => {}
        }
        if steps.is_empty() {
            // No admissible step: done iff the structure is already r = n.
            return Ok((g.r() == g.n()).then(|| g.clone()));
        }
        for (step, next) in steps {
            if self.dead.contains(next.minimal_sets()) {
                continue;
            }
            path.push(step);
            if let Some(found) = self.descend(&next, path)? {
                return Ok(Some(found));
            }
            path.pop();
            self.backtracks += 1;
            self.dead.insert(next.minimal_sets().to_vec());
        }
        Ok(None)
    }
}

/// Whether `pivot` (a minimal set of `gamma`) satisfies the growth
/// condition: every proper subset of its complement misses some other
/// minimal set.
pub fn is_valid_growth_pivot(gamma: &AccessStructure, pivot: PlayerSet) -> bool {
    if !gamma.minimal_sets().contains(&pivot) {
        return false;
    }
    let comp = gamma.universe().complement(pivot);
    comp.subsets().filter(|&b| b != comp).all(|b| {
        gamma
            .minimal_sets()
            .iter()
            .any(|&a| a != pivot && !a.intersects(b))
    })
}

/// Adds player `label` to a minimal maximal structure on `n − 1` players:
/// the pivot `A_i` becomes `A_i ∪ {Pₙ}` and `Āᵢ ∪ {Pₙ}` is added.
///
/// With `pivot = None` the minimal sets are tried in canonical order.
pub fn grow_minmax(gamma: &AccessStructure, label: &str, pivot: Option<PlayerSet>) -> Result<Growth> {
    if !is_minmax(gamma)? {
        return Err(Error::NotMinimalMaximal {
            r: gamma.r(),
            n: gamma.n(),
        });
    }
    let universe = gamma.universe().extended(label)?;
    let new_player = gamma.n();
    let candidates: Vec<PlayerSet> = match pivot {
        Some(p) => vec![p],
        None => gamma.minimal_sets().to_vec(),
    };
    let mut rejected = Vec::new();
    for p in candidates {
        if is_valid_growth_pivot(gamma, p) {
            let comp = gamma.universe().complement(p);
            let family: Vec<PlayerSet> = gamma
                .minimal_sets()
                .iter()
                .map(|&a| if a == p { a.with(new_player) } else { a })
                .chain(std::iter::once(comp.with(new_player)))
                .collect();
            let result = AccessStructure::new(universe.clone(), family)?;
            if is_minmax(&result)? {
                return Ok(Growth {
                    result,
                    pivot: p,
                    rejected,
                });
            }
        }
        rejected.push(p);
    }
    Err(Error::NoValidPivot(
        rejected.iter().map(|&p| gamma.universe().format_set(p)).collect(),
    ))
}

/// Reports `r` against `n` for a maximal structure.
///
/// A strict `r > n` holds for every maximal structure except the minimal
/// maximal ones, where `r = n`; both cases are reported rather than
/// asserting strictness.
pub fn check_corollary(gamma: &AccessStructure) -> Result<CorollaryReport> {
    if !gamma.is_maximal()? {
        return Err(Error::NotMaximal);
    }
    let (r, n) = (gamma.r(), gamma.n());
    let minimal_maximal = r == n && gamma.covers_universe();
    let note = if minimal_maximal {
        "r = n: minimal maximal, so the strict inequality r > n does not hold".to_string()
    } else if r > n {
        "r > n".to_string()
    } else {
        format!(
            "r < n: only {} of {} players occur in a minimal set",
            gamma.participants().len(),
            n
        )
    };
    Ok(CorollaryReport {
        r,
        n,
        participants: gamma.participants().len(),
        r_at_least_n: r >= n,
        r_greater_than_n: r > n,
        minimal_maximal,
        note,
    })
}

/// Largest universe for [`self_dual_families`].
pub const MAX_SELF_DUAL_PLAYERS: usize = 6;

/// All maximal quantum access structures on `n` players (the self-dual
/// monotone families), built independently of the maximality test.
///
/// A self-dual family `f` on `n` players is determined by its restriction
/// `h` to sets without the last player: `f(x, 0) = h(x)` and
/// `f(x, 1) = ¬h(x̄)`, which is monotone exactly when `h` is intersecting.
/// The intersecting antichains on `n − 1` players are enumerated directly.
pub fn self_dual_families(n: usize) -> Result<Vec<AccessStructure>> {
    if n == 0 {
        return Err(Error::NoPlayers);
    }
    Limits::check("players for self-dual enumeration", n as u64, MAX_SELF_DUAL_PLAYERS as u64)?;
    let universe = Universe::numbered(n)?;
    let m = n - 1;
    let sub_mask = (1u32 << m) - 1;
    let mut antichains = Vec::new();
    let candidates: Vec<u32> = (1..=sub_mask).collect();
    intersecting_antichains(&candidates, 0, &mut Vec::new(), &mut antichains);

    let mut out = Vec::with_capacity(antichains.len());
    for h in antichains {
        let in_h = |x: u32| h.iter().any(|&a| a & x == a);
        let truth: Vec<bool> = (0..1u32 << n)
            .map(|x| {
                let low = x & sub_mask;
                if x >> m & 1 == 0 {
                    in_h(low)
                } else {
                    !in_h(sub_mask ^ low)
                }
            })
            .collect();
        let minimal = (0..1u32 << n)
            .filter(|&x| truth[x as usize] && PlayerSet::from_bits(x).iter().all(|i| !truth[(x & !(1 << i)) as usize]))
            .map(PlayerSet::from_bits);
        out.push(AccessStructure::new(universe.clone(), minimal)?);
    }
    out.sort();
    Ok(out)
}

fn intersecting_antichains(candidates: &[u32], from: usize, chosen: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    out.push(chosen.clone());
    for i in from..candidates.len() {
        let s = candidates[i];
        let fits = chosen
            .iter()
            .all(|&c| c & s != 0 && c & s != c && c & s != s);
        if fits {
            chosen.push(s);
            intersecting_antichains(candidates, i + 1, chosen, out);
            chosen.pop();
        }
    }
}

/// Outcome of checking `is_minmax ⇔ (no admissible reducing step ∧ r = n)`
/// on every maximal structure of a given size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterizationSweep {
    pub n: usize,
    pub families: usize,
    pub minimal_maximal: usize,
    /// Maximal structures with `r > n` and no admissible single step.
    pub stuck: usize,
    pub counterexamples: Vec<AccessStructure>,
}

pub fn characterization_sweep(n: usize, exec: Exec) -> Result<CharacterizationSweep> {
    let families = self_dual_families(n)?;
    let verdicts = par::map(exec, &families, |g| -> Result<(bool, bool, bool)> {
        let lhs = is_minmax(g)?;
        let no_step = reducing_steps(g, None)?.is_empty();
        let rhs = no_step && g.r() == g.n();
        Ok((lhs, rhs, no_step && g.r() > g.n() && g.covers_universe()))
    });
    let mut sweep = CharacterizationSweep {
        n,
        families: families.len(),
        minimal_maximal: 0,
        stuck: 0,
        counterexamples: Vec::new(),
    };
    for (g, v) in families.iter().zip(verdicts) {
        let (lhs, rhs, stuck) = v?;
        sweep.minimal_maximal += usize::from(lhs);
        sweep.stuck += usize::from(stuck);
        if lhs != rhs {
            sweep.counterexamples.push(g.clone());
        }
    }
    Ok(sweep)
}

/// Groups the maximal structures on `n` players with exactly `n` minimal
/// sets into isomorphism classes (by canonical form), each class sorted.
pub fn minmax_isomorphism_classes(n: usize) -> Result<Vec<Vec<AccessStructure>>> {
    let mut classes: Vec<(Vec<u32>, Vec<AccessStructure>)> = Vec::new();
    for g in self_dual_families(n)?.into_iter().filter(|g| g.r() == n) {
        let key = g.canonical_form()?;
        match classes.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(g),
            None => classes.push((key, vec![g])),
        }
    }
    classes.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(classes.into_iter().map(|(_, m)| m).collect())
}
