//! Assembly and verification of the two general-structure constructions.
//!
//! *Scheme II* concatenates an outer `((l, 2l−1))` threshold scheme with
//! the blocks of a decomposition: outer share `i ≤ l` becomes the secret of
//! block `i`, and the remaining `l − 1` outer shares are re-shared through a
//! minimal maximal structure containing `Γ`. A set authorized in `Γ` gets
//! one outer share from its block and `l − 1` from the minimal maximal part;
//! any other set gets at most `l − 1`.
//!
//! *Scheme I* gives each player one register holding its shares of every
//! block. It is built and checked at the share-flow level, with a classical
//! simulation of each block's weighted threshold code.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decomp::{
    optimal_decomposition_with, recognize_bundled_threshold, smallest_prime_at_least, trivial_decomposition,
    BundledThreshold, Decomposition, Oracle,
};
use crate::error::{Error, Result};
use crate::limits::{self, Limits};
use crate::maximalize::{
    all_maximal_extensions, extend_to_maximal, is_minmax, reduce_to_minmax, reduce_to_minmax_protecting,
    ExtendPolicy, PivotPolicy,
};
use crate::par::{self, Exec};
use crate::qsim::{leading_coefficient, verify_structure_with, SchemeInstance, Simulator};
use crate::structure::{minimize_sets, AccessStructure, PlayerSet, Universe};

/// Largest threshold simulated by the qudit simulator.
pub const SIM_MAX_THRESHOLD: u32 = 5;
/// Largest field order simulated by the qudit simulator.
pub const SIM_MAX_FIELD: u32 = 13;

/// How the minimal maximal structure was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinmaxRoute {
    /// Greedy extension followed by the pivot search.
    Greedy,
    /// Found among all maximal extensions.
    ExhaustiveExtension,
    /// Found on the participating players only and lifted.
    ParticipantsOnly,
    /// No minimal maximal structure contains `Γ`; the maximal extension
    /// with fewest minimal sets is used instead.
    SmallestMaximal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinmaxSearch {
    pub maximal: AccessStructure,
    pub minmax: AccessStructure,
    pub added: Vec<PlayerSet>,
    pub pivots: Vec<PlayerSet>,
    pub route: MinmaxRoute,
}

/// Finds a maximal extension of `gamma` and a minimal maximal structure
/// reachable from it. With `protect`, the minimal maximal structure must
/// still authorize every set of `gamma`.
pub fn find_minmax(
    gamma: &AccessStructure,
    extend: &ExtendPolicy,
    pivot: &PivotPolicy,
    protect: bool,
) -> Result<MinmaxSearch> {
    gamma.require_quantum()?;
    let reduce = |m: &AccessStructure, policy: &PivotPolicy| {
        if protect {
            reduce_to_minmax_protecting(m, policy, gamma)
        } else {
            reduce_to_minmax(m, policy)
        }
    };
    let ext = extend_to_maximal(gamma, extend)?;
    let first_error = match reduce(&ext.result, pivot) {
        Ok(red) => {
            return Ok(MinmaxSearch {
                maximal: ext.result,
                minmax: red.result,
                added: ext.added,
                pivots: red.steps.iter().map(|s| s.pivot).collect(),
                route: MinmaxRoute::Greedy,
            })
        }
        Err(e @ (Error::Unreachable(_) | Error::InvalidStep(_))) => e,
        Err(e) => return Err(e),
    };
    let extensions = if gamma.n() <= limits::active().extension_players {
        all_maximal_extensions(gamma)?
    } else {
        Vec::new()
    };
    let added_to = |m: &AccessStructure| -> Vec<PlayerSet> {
        m.minimal_sets()
            .iter()
            .copied()
            .filter(|a| !gamma.minimal_sets().contains(a))
            .collect()
    };
    for m in &extensions {
        if is_minmax(m)? {
            return Ok(MinmaxSearch {
                maximal: m.clone(),
                minmax: m.clone(),
                added: added_to(m),
                pivots: Vec::new(),
                route: MinmaxRoute::ExhaustiveExtension,
            });
        }
    }
    let participants = gamma.participants();
    if participants != gamma.universe().full() {
        let inner = find_minmax(&gamma.restrict_to(participants)?, &ExtendPolicy::default(), pivot, protect)?;
        let u = gamma.universe().clone();
        let lift_set = |s: PlayerSet| {
            PlayerSet::from_indices(s.iter().map(|i| participants.iter().nth(i).expect("restricted index")))
        };
        return Ok(MinmaxSearch {
            maximal: inner.maximal.lift_into(u.clone(), participants)?,
            minmax: inner.minmax.lift_into(u, participants)?,
            added: inner.added.into_iter().map(lift_set).collect(),
            pivots: inner.pivots.into_iter().map(lift_set).collect(),
            route: MinmaxRoute::ParticipantsOnly,
        });
    }
    // No minimal maximal structure contains gamma: settle for the smallest
    // maximal one, preferring those minimal maximal on their own players.
    let mut best: Option<(bool, usize, &AccessStructure)> = None;
    for m in &extensions {
        let on_participants = is_minmax(&m.restrict_to(m.participants())?)?;
        let key = (!on_participants, m.r(), m);
        if best.is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
            best = Some(key);
        }
    }
    if let Some((_, _, m)) = best {
        return Ok(MinmaxSearch {
            maximal: m.clone(),
            minmax: m.clone(),
            added: added_to(m),
            pivots: Vec::new(),
            route: MinmaxRoute::SmallestMaximal,
        });
    }
    Err(first_error)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scheme2Config {
    pub oracle: Oracle,
    pub extend: ExtendPolicy,
    pub pivot: PivotPolicy,
    /// One block per minimal set, remaining shares through the maximal
    /// extension instead of a minimal maximal structure.
    pub trivial: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "to", content = "index", rename_all = "snake_case")]
pub enum RouteTarget {
    /// Zero-based block index.
    Block(usize),
    Minmax,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    /// One-based outer share number.
    pub outer_share: usize,
    pub target: RouteTarget,
}

/// The concatenated construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcatScheme {
    pub gamma: AccessStructure,
    pub decomposition: Decomposition,
    /// Receives outer shares `l+1 … 2l−1`: minimal maximal, or the maximal
    /// extension for the trivial construction. `None` when `l = 1`.
    pub minmax: Option<AccessStructure>,
    pub minmax_search: Option<MinmaxSearch>,
    pub outer_threshold: usize,
    pub routing: Vec<Route>,
    pub trivial: bool,
}

impl ConcatScheme {
    pub fn l(&self) -> usize {
        self.decomposition.l()
    }

    pub fn outer(&self) -> (usize, usize) {
        (self.outer_threshold, 2 * self.outer_threshold - 1)
    }
}

pub fn build_scheme2(gamma: &AccessStructure, config: &Scheme2Config) -> Result<ConcatScheme> {
    build_scheme2_with(gamma, config, Exec::default())
}

pub fn build_scheme2_with(gamma: &AccessStructure, config: &Scheme2Config, exec: Exec) -> Result<ConcatScheme> {
    gamma.require_quantum()?;
    let decomposition = if config.trivial {
        trivial_decomposition(gamma)?
    } else {
        optimal_decomposition_with(gamma, &config.oracle, exec)?
    };
    let l = decomposition.l();
    let (minmax, minmax_search) = if l == 1 {
        (None, None)
    } else if config.trivial {
        let ext = extend_to_maximal(gamma, &config.extend)?;
        (Some(ext.result), None)
    } else {
        let search = find_minmax(gamma, &config.extend, &config.pivot, true)?;
        (Some(search.minmax.clone()), Some(search))
    };
    let routing = (1..2 * l)
        .map(|i| Route {
            outer_share: i,
            target: if i <= l { RouteTarget::Block(i - 1) } else { RouteTarget::Minmax },
        })
        .collect();
    Ok(ConcatScheme {
        gamma: gamma.clone(),
        decomposition,
        minmax,
        minmax_search,
        outer_threshold: l,
        routing,
        trivial: config.trivial,
    })
}

/// Outer shares a player set reconstructs under the routing table.
pub fn outer_shares_reconstructed(cs: &ConcatScheme, set: PlayerSet) -> usize {
    cs.routing
        .iter()
        .filter(|r| match r.target {
            RouteTarget::Block(i) => cs.decomposition.blocks.get(i).is_some_and(|b| b.structure.is_authorized(set)),
            RouteTarget::Minmax => cs.minmax.as_ref().is_some_and(|m| m.is_authorized(set)),
        })
        .count()
}

/// Minimal player sets reconstructing at least the outer threshold.
pub fn concat_authorized_family(cs: &ConcatScheme) -> Result<Vec<PlayerSet>> {
    let n = cs.gamma.n();
    Limits::check("players for scheme sweep", n as u64, limits::active().scheme_players as u64)?;
    let authorized: Vec<PlayerSet> = (0..1u32 << n)
        .map(PlayerSet::from_bits)
        .filter(|&s| outer_shares_reconstructed(cs, s) >= cs.outer_threshold)
        .collect();
    Ok(minimize_sets(&authorized))
}

/// Result of checking one sub-scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ComponentOutcome {
    Simulated {
        passed: bool,
        subsets: usize,
        violations: Vec<PlayerSet>,
    },
    ShareFlowOnly {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentCheck {
    pub name: String,
    pub structure: AccessStructure,
    pub witness: Option<BundledThreshold>,
    pub outcome: ComponentOutcome,
}

impl ComponentCheck {
    pub fn passed(&self) -> bool {
        !matches!(self.outcome, ComponentOutcome::Simulated { passed: false, .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scheme2Report {
    pub family: Vec<PlayerSet>,
    pub family_matches: bool,
    /// Minimal sets of `Γ` the scheme fails to authorize.
    pub missing: Vec<PlayerSet>,
    /// Minimal authorized sets of the scheme that are not in `Γ`.
    pub extra: Vec<PlayerSet>,
    pub max_unauthorized_shares: usize,
    pub minmax_contains_gamma: bool,
    pub minmax_is_maximal: bool,
    /// Minimal maximal on the players it uses. Informational: the
    /// construction is correct for any maximal structure containing `Γ`.
    pub minmax_is_minimal_maximal: bool,
    pub components: Vec<ComponentCheck>,
    pub passed: bool,
}

/// Simulates a bundled witness for `structure` when it lies within the
/// simulation envelope.
pub fn check_component(
    name: &str,
    structure: &AccessStructure,
    witness: Option<BundledThreshold>,
    exec: Exec,
) -> Result<ComponentCheck> {
    let outcome = match &witness {
        None => ComponentOutcome::ShareFlowOnly {
            reason: "no bundled-threshold witness within the oracle bounds".into(),
        },
        Some(w) if w.threshold > SIM_MAX_THRESHOLD || w.field_order > SIM_MAX_FIELD => {
            ComponentOutcome::ShareFlowOnly {
                reason: format!(
                    "witness ((k={}, q={})) is outside the simulation envelope (k ≤ {SIM_MAX_THRESHOLD}, q ≤ {SIM_MAX_FIELD})",
                    w.threshold, w.field_order
                ),
            }
        }
        Some(_) if structure.n() > limits::active().verify_players => ComponentOutcome::ShareFlowOnly {
            reason: format!(
                "{} players exceed the simulation sweep limit of {}",
                structure.n(),
                limits::active().verify_players
            ),
        },
        Some(w) => {
            let instance = SchemeInstance::from_bundled(structure.universe().clone(), w)?;
            match Simulator::new(&instance) {
                Ok(sim) => {
                    let rep = verify_structure_with(&sim, structure, exec)?;
                    ComponentOutcome::Simulated {
                        passed: rep.passed,
                        subsets: rep.subsets.len(),
                        violations: rep.violations,
                    }
                }
                Err(e) if e.is_size_limit() => ComponentOutcome::ShareFlowOnly { reason: e.to_string() },
                Err(e) => return Err(e),
            }
        }
    };
    Ok(ComponentCheck {
        name: name.to_string(),
        structure: structure.clone(),
        witness,
        outcome,
    })
}

pub fn verify_scheme2(cs: &ConcatScheme) -> Result<Scheme2Report> {
    verify_scheme2_with(cs, Exec::default())
}

pub fn verify_scheme2_with(cs: &ConcatScheme, exec: Exec) -> Result<Scheme2Report> {
    let n = cs.gamma.n();
    Limits::check("players for scheme sweep", n as u64, limits::active().scheme_players as u64)?;
    let l = cs.outer_threshold;
    let family = concat_authorized_family(cs)?;
    let want = cs.gamma.minimal_sets();
    let missing: Vec<PlayerSet> = want.iter().copied().filter(|a| !family.contains(a)).collect();
    let extra: Vec<PlayerSet> = family.iter().copied().filter(|a| !want.contains(a)).collect();
    let max_unauthorized_shares = (0..1u32 << n)
        .map(PlayerSet::from_bits)
        .filter(|&s| !cs.gamma.is_authorized(s))
        .map(|s| outer_shares_reconstructed(cs, s))
        .max()
        .unwrap_or(0);
    let (minmax_contains_gamma, minmax_is_maximal, minmax_is_minimal_maximal) = match &cs.minmax {
        None => (true, true, true),
        Some(m) => (
            m.contains_closure_of(&cs.gamma),
            m.is_maximal()?,
            is_minmax(&m.restrict_to(m.participants())?)?,
        ),
    };

    let mut components = Vec::new();
    let outer_universe = Universe::new((1..2 * l).map(|i| format!("S{i}")))?;
    let outer_gamma = AccessStructure::new(
        outer_universe.clone(),
        PlayerSet::full(2 * l - 1).subsets().filter(|s| s.len() == l),
    )?;
    let outer_witness = BundledThreshold {
        participants: outer_universe.full(),
        weights: vec![1; 2 * l - 1],
        threshold: l as u32,
        field_order: smallest_prime_at_least((2 * l - 1).max(2) as u32),
    };
    components.push(check_component("outer", &outer_gamma, Some(outer_witness), exec)?);
    for (i, b) in cs.decomposition.blocks.iter().enumerate() {
        components.push(check_component(
            &format!("block {}", i + 1),
            &b.structure,
            Some(b.witness.clone()),
            exec,
        )?);
    }
    if let Some(m) = &cs.minmax {
        let (w, k) = match cs.decomposition.oracle {
            Oracle::Bundled {
                max_weight,
                max_threshold,
            } => (max_weight, max_threshold),
            Oracle::Unanimity => match Oracle::default() {
                Oracle::Bundled {
                    max_weight,
                    max_threshold,
                } => (max_weight, max_threshold),
                Oracle::Unanimity => unreachable!("default oracle is bundled"),
            },
        };
        let witness = recognize_bundled_threshold(m, w, k);
        let name = if cs.trivial { "maximal" } else { "minmax" };
        components.push(check_component(name, m, witness, exec)?);
    }
    let passed = missing.is_empty()
        && extra.is_empty()
        && max_unauthorized_shares < l
        && minmax_contains_gamma
        && minmax_is_maximal
        && components.iter().all(ComponentCheck::passed);
    Ok(Scheme2Report {
        family_matches: missing.is_empty() && extra.is_empty(),
        family,
        missing,
        extra,
        max_unauthorized_shares,
        minmax_contains_gamma,
        minmax_is_maximal,
        minmax_is_minimal_maximal,
        components,
        passed,
    })
}

/// Shares one player holds in one block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Holding {
    /// Zero-based block index.
    pub block: usize,
    /// Zero-based indices into the block's code.
    pub shares: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub player: usize,
    pub holdings: Vec<Holding>,
}

/// Scheme I: every block realized independently, each player's shares of
/// all blocks collected in one register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterPlan {
    pub gamma: AccessStructure,
    pub decomposition: Decomposition,
    pub codes: Vec<SchemeInstance>,
    pub registers: Vec<Register>,
}

pub fn build_scheme1(gamma: &AccessStructure, oracle: &Oracle) -> Result<RegisterPlan> {
    build_scheme1_from(optimal_decomposition_with(gamma, oracle, Exec::default())?)
}

pub fn build_scheme1_from(decomposition: Decomposition) -> Result<RegisterPlan> {
    let gamma = decomposition.gamma.clone();
    let codes = decomposition
        .blocks
        .iter()
        .map(|b| SchemeInstance::from_bundled(gamma.universe().clone(), &b.witness))
        .collect::<Result<Vec<_>>>()?;
    let mut registers = Vec::new();
    for p in 0..gamma.n() {
        let holdings: Vec<Holding> = codes
            .iter()
            .enumerate()
            .filter_map(|(block, code)| {
                let shares: Vec<usize> = (0..code.n_code()).filter(|&i| code.holders[i] == Some(p)).collect();
                (!shares.is_empty()).then_some(Holding { block, shares })
            })
            .collect();
        if !holdings.is_empty() {
            registers.push(Register { player: p, holdings });
        }
    }
    Ok(RegisterPlan {
        gamma,
        decomposition,
        codes,
        registers,
    })
}

/// Minimal sets authorized in at least one block, computed from the
/// registers' share counts.
pub fn plan_authorized_family(plan: &RegisterPlan) -> Result<Vec<PlayerSet>> {
    let n = plan.gamma.n();
    Limits::check("players for scheme sweep", n as u64, limits::active().scheme_players as u64)?;
    let authorized: Vec<PlayerSet> = (0..1u32 << n)
        .map(PlayerSet::from_bits)
        .filter(|&s| {
            plan.codes
                .iter()
                .any(|code| (code.shares_of(s).count_ones()) >= code.k)
        })
        .collect();
    Ok(minimize_sets(&authorized))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalBlockCheck {
    pub block: usize,
    pub trials: usize,
    /// Sets holding at least `k` shares recovered the secret in every trial.
    pub recovery_ok: bool,
    /// Sets holding fewer than `k` shares were consistent with every
    /// candidate secret in every trial.
    pub secrecy_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme1Report {
    pub family: Vec<PlayerSet>,
    pub family_matches: bool,
    pub missing: Vec<PlayerSet>,
    pub extra: Vec<PlayerSet>,
    pub classical: Vec<ClassicalBlockCheck>,
    pub passed: bool,
}

/// Share-flow check of the register plan plus a seeded classical
/// simulation of each block's code.
pub fn verify_scheme1(plan: &RegisterPlan, trials: usize, seed: u64) -> Result<Scheme1Report> {
    let family = plan_authorized_family(plan)?;
    let want = plan.gamma.minimal_sets();
    let missing: Vec<PlayerSet> = want.iter().copied().filter(|a| !family.contains(a)).collect();
    let extra: Vec<PlayerSet> = family.iter().copied().filter(|a| !want.contains(a)).collect();
    let classical = plan
        .codes
        .iter()
        .enumerate()
        .map(|(i, code)| classical_check(i, code, trials, seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let passed = missing.is_empty() && extra.is_empty() && classical.iter().all(|c| c.recovery_ok && c.secrecy_ok);
    Ok(Scheme1Report {
        family_matches: missing.is_empty() && extra.is_empty(),
        family,
        missing,
        extra,
        classical,
        passed,
    })
}

fn classical_check(block: usize, code: &SchemeInstance, trials: usize, seed: u64) -> Result<ClassicalBlockCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (q, k) = (code.q, code.k as usize);
    let n = code.universe.len();
    let mut recovery_ok = true;
    let mut secrecy_ok = true;
    for _ in 0..trials {
        let secret = rng.random_range(0..q);
        let mut coeffs: Vec<u32> = (0..k - 1).map(|_| rng.random_range(0..q)).collect();
        coeffs.push(secret);
        let shares: Vec<u32> = code
            .points
            .iter()
            .map(|&x| crate::qsim::eval_poly(&coeffs, x, q))
            .collect();
        for s in 0..1u32 << n {
            let held = code.shares_of(PlayerSet::from_bits(s));
            let idx: Vec<usize> = (0..code.n_code()).filter(|i| held >> i & 1 == 1).collect();
            if idx.len() >= k {
                let xs: Vec<u32> = idx[..k].iter().map(|&i| code.points[i]).collect();
                let ys: Vec<u32> = idx[..k].iter().map(|&i| shares[i]).collect();
                recovery_ok &= leading_coefficient(&xs, &ys, q)? == secret;
            } else {
                let xs: Vec<u32> = idx.iter().map(|&i| code.points[i]).collect();
                let ys: Vec<u32> = idx.iter().map(|&i| shares[i]).collect();
                secrecy_ok &= (0..q).all(|cand| consistent(&xs, &ys, cand, k, q));
            }
        }
    }
    Ok(ClassicalBlockCheck {
        block,
        trials,
        recovery_ok,
        secrecy_ok,
    })
}

/// Whether some polynomial of degree `≤ k − 1` with leading coefficient
/// `lead` passes through the given points.
fn consistent(xs: &[u32], ys: &[u32], lead: u32, k: usize, q: u32) -> bool {
    let q64 = q as u64;
    let pow = |x: u32, e: usize| (0..e).fold(1u64, |acc, _| acc * x as u64 % q64);
    // rows [1, x, …, x^{k−2} | y − lead·x^{k−1}]
    let cols = k - 1;
    let mut rows: Vec<Vec<u64>> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let mut row: Vec<u64> = (0..cols).map(|e| pow(x, e)).collect();
            row.push((y as u64 + q64 - lead as u64 * pow(x, cols) % q64) % q64);
            row
        })
        .collect();
    let inv = |a: u64| (0..q64 - 2).fold(1u64, |acc, _| acc * a % q64);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let f = inv(rows[rank][c]);
        for v in rows[rank].iter_mut() {
            *v = *v * f % q64;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][c] != 0 {
                let m = rows[r][c];
                for j in 0..=cols {
                    rows[r][j] = (rows[r][j] + q64 * q64 - m * rows[rank][j]) % q64;
                }
            }
        }
        rank += 1;
    }
    rows[rank..].iter().all(|r| r[cols] == 0)
}

/// Shares and verification effort of one construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub construction: String,
    pub l: usize,
    pub outer: (usize, usize),
    pub block_shares: Vec<u32>,
    pub total_block_shares: u32,
    /// Minimal sets of the maximal structure that must be tested.
    pub verification_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub gamma: AccessStructure,
    pub maximal: AccessStructure,
    pub minmax: AccessStructure,
    pub ours: ResourceReport,
    pub trivial: ResourceReport,
}

/// Optimal decomposition with a minimal maximal structure against the
/// trivial decomposition with a maximal one.
pub fn resource_compare(gamma: &AccessStructure, oracle: &Oracle) -> Result<Comparison> {
    resource_compare_with(gamma, oracle, Exec::default())
}

pub fn resource_compare_with(gamma: &AccessStructure, oracle: &Oracle, exec: Exec) -> Result<Comparison> {
    let search = find_minmax(gamma, &ExtendPolicy::default(), &PivotPolicy::default(), false)?;
    let optimal = optimal_decomposition_with(gamma, oracle, exec)?;
    let trivial = trivial_decomposition(gamma)?;
    let report = |name: &str, d: &Decomposition, count: usize| {
        let block_shares: Vec<u32> = d.blocks.iter().map(|b| b.witness.total_shares()).collect();
        ResourceReport {
            construction: name.to_string(),
            l: d.l(),
            outer: (d.l(), 2 * d.l() - 1),
            total_block_shares: block_shares.iter().sum(),
            block_shares,
            verification_count: count,
        }
    };
    Ok(Comparison {
        gamma: gamma.clone(),
        ours: report("optimal decomposition + minimal maximal", &optimal, search.minmax.r()),
        trivial: report("trivial decomposition + maximal", &trivial, search.maximal.r()),
        maximal: search.maximal,
        minmax: search.minmax,
    })
}

/// Builds and verifies Scheme II for each structure.
pub fn verify_many(exec: Exec, structures: &[AccessStructure], config: &Scheme2Config) -> Vec<Result<Scheme2Report>> {
    par::map(exec, structures, |g| {
        build_scheme2_with(g, config, Exec::Sequential).and_then(|cs| verify_scheme2_with(&cs, Exec::Sequential))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex3() -> AccessStructure {
        AccessStructure::numbered(5, &["P1P2", "P1P4P5", "P2P3P5", "P2P3P4"]).unwrap()
    }

    #[test]
    fn example3_scheme2() {
        let g = ex3();
        let cs = build_scheme2(&g, &Scheme2Config::default()).unwrap();
        assert_eq!(cs.outer(), (2, 3));
        let gm = AccessStructure::numbered(5, &["P1P2", "P1P3", "P1P4P5", "P2P3P5", "P2P3P4"]).unwrap();
        assert_eq!(cs.minmax.as_ref(), Some(&gm));
        assert_eq!(concat_authorized_family(&cs).unwrap(), g.minimal_sets());
        let p1p3 = g.universe().parse_set("P1P3").unwrap();
        assert_eq!(outer_shares_reconstructed(&cs, p1p3), 1);
        let rep = verify_scheme2(&cs).unwrap();
        assert!(rep.passed, "{rep:?}");
        let minmax = rep.components.iter().find(|c| c.name == "minmax").unwrap();
        let w = minmax.witness.as_ref().unwrap();
        assert_eq!((w.threshold, w.total_shares()), (5, 9));
        assert!(matches!(minmax.outcome, ComponentOutcome::Simulated { passed: true, .. }));
    }

    #[test]
    fn example3_trivial() {
        let cs = build_scheme2(
            &ex3(),
            &Scheme2Config {
                trivial: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(cs.outer(), (4, 7));
        assert_eq!(concat_authorized_family(&cs).unwrap(), ex3().minimal_sets());
    }

    #[test]
    fn dropped_route_detected() {
        let mut cs = build_scheme2(&ex3(), &Scheme2Config::default()).unwrap();
        cs.routing.retain(|r| r.target != RouteTarget::Block(1));
        let rep = verify_scheme2(&cs).unwrap();
        assert!(!rep.passed);
        let mut missing: Vec<String> = rep.missing.iter().map(|&s| ex3().universe().format_set(s)).collect();
        missing.sort();
        assert_eq!(missing, ["P2P3P4", "P2P3P5"]);
    }

    #[test]
    fn single_block_is_degenerate() {
        let g = AccessStructure::numbered(3, &["P1P2", "P1P3", "P2P3"]).unwrap();
        let cs = build_scheme2(&g, &Scheme2Config::default()).unwrap();
        assert_eq!(cs.outer(), (1, 1));
        assert!(cs.minmax.is_none());
        assert_eq!(concat_authorized_family(&cs).unwrap(), g.minimal_sets());
        assert!(verify_scheme2(&cs).unwrap().passed);
    }

    #[test]
    fn dummy_player_uses_participants() {
        let g = AccessStructure::numbered(4, &["P1P2", "P2P3"]).unwrap();
        let cs = build_scheme2(&g, &Scheme2Config::default()).unwrap();
        let rep = verify_scheme2(&cs).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn falls_back_to_smallest_maximal() {
        let g = AccessStructure::numbered(6, &["P2P3P4", "P1P2P5", "P3P5", "P2P3P6", "P4P5P6"]).unwrap();
        let search = find_minmax(&g, &ExtendPolicy::default(), &PivotPolicy::default(), true).unwrap();
        assert_eq!(search.route, MinmaxRoute::SmallestMaximal);
        assert!(search.minmax.contains_closure_of(&g));
        let cs = build_scheme2(&g, &Scheme2Config::default()).unwrap();
        let rep = verify_scheme2(&cs).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn scheme1_registers() {
        let g = ex3();
        let plan = build_scheme1(&g, &Oracle::default()).unwrap();
        let p1 = plan.registers.iter().find(|r| r.player == 0).unwrap();
        let p2 = plan.registers.iter().find(|r| r.player == 1).unwrap();
        assert_eq!(p1.holdings.len(), 1);
        assert_eq!(p2.holdings.len(), 2);
        let rep = verify_scheme1(&plan, 3, 7).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(plan_authorized_family(&plan).unwrap(), g.minimal_sets());
    }

    #[test]
    fn consistency_solver() {
        // k = 3 over F_5, one point: any leading coefficient fits
        assert!((0..5).all(|c| consistent(&[2], &[4], c, 3, 5)));
        // k = 2, two points fix the line
        let ok: Vec<u32> = (0..5).filter(|&c| consistent(&[1, 2], &[3, 0], c, 2, 5)).collect();
        assert_eq!(ok, [2]);
    }

    #[test]
    fn comparisons() {
        let c = resource_compare(&ex3(), &Oracle::default()).unwrap();
        assert_eq!((c.ours.outer, c.trivial.outer), ((2, 3), (4, 7)));
        assert_eq!((c.ours.verification_count, c.trivial.verification_count), (5, 5));
        let maj = AccessStructure::new(
            Universe::numbered(5).unwrap(),
            (0..32u32).filter(|x| x.count_ones() == 3).map(PlayerSet::from_bits),
        )
        .unwrap();
        let c = resource_compare(&maj, &Oracle::default()).unwrap();
        assert_eq!((c.trivial.verification_count, c.ours.verification_count), (10, 5));
    }
}
