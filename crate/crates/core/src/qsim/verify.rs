//! Player-level verdicts and exhaustive structure checks.

use serde::{Deserialize, Serialize};

use super::{Simulator, DECOUPLING_TOLERANCE};
use crate::error::{Error, Result};
use crate::limits::{self, Limits};
use crate::par::{self, Exec};
use crate::structure::{AccessStructure, PlayerSet};

/// Verdicts for one player subset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetReport {
    pub players: PlayerSet,
    /// Residual of the shares the players hold.
    pub residual_held: f64,
    /// Residual of every other share, discarded ones included.
    pub residual_rest: f64,
    pub secret_free: bool,
    pub recoverable: bool,
}

pub fn player_subset_report(sim: &Simulator, players: PlayerSet) -> Result<SubsetReport> {
    let held = sim.scheme().shares_of(players);
    let rest = sim.scheme().all_shares() & !held;
    subset_report(sim, players, held, rest)
}

fn subset_report(sim: &Simulator, players: PlayerSet, held: u64, rest: u64) -> Result<SubsetReport> {
    let residual_held = sim.residual(held)?;
    let residual_rest = sim.residual(rest)?;
    Ok(SubsetReport {
        players,
        residual_held,
        residual_rest,
        secret_free: residual_held <= DECOUPLING_TOLERANCE,
        recoverable: residual_rest <= DECOUPLING_TOLERANCE,
    })
}

/// One row of a structure check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetVerdict {
    #[serde(flatten)]
    pub report: SubsetReport,
    pub authorized: bool,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub subsets: Vec<SubsetVerdict>,
    pub violations: Vec<PlayerSet>,
    pub passed: bool,
}

/// Checks every player subset: authorized subsets must recover, all others
/// must be secret-free.
pub fn verify_structure(sim: &Simulator, gamma: &AccessStructure) -> Result<StructureReport> {
    verify_structure_with(sim, gamma, Exec::default())
}

pub fn verify_structure_with(sim: &Simulator, gamma: &AccessStructure, exec: Exec) -> Result<StructureReport> {
    let scheme = sim.scheme();
    if gamma.universe().labels() != scheme.universe.labels() {
        return Err(Error::InvalidScheme("structure and scheme have different players".into()));
    }
    let n = gamma.n();
    Limits::check("players for simulation sweep", n as u64, limits::active().verify_players as u64)?;

    let all = scheme.all_shares();
    let masks: Vec<(u64, u64)> = (0..1u32 << n)
        .map(|s| {
            let held = scheme.shares_of(PlayerSet::from_bits(s));
            (held, all & !held)
        })
        .collect();
    // Warm the residual cache once per distinct share mask.
    let mut distinct: Vec<u64> = masks.iter().flat_map(|&(h, r)| [h, r]).collect();
    distinct.sort_unstable();
    distinct.dedup();
    for r in par::map(exec, &distinct, |&m| sim.residual(m)) {
        r?;
    }

    let mut subsets = Vec::with_capacity(masks.len());
    let mut violations = Vec::new();
    for (s, &(held, rest)) in masks.iter().enumerate() {
        let players = PlayerSet::from_bits(s as u32);
        let report = subset_report(sim, players, held, rest)?;
        let authorized = gamma.is_authorized(players);
        let ok = if authorized { report.recoverable } else { report.secret_free };
        if !ok {
            violations.push(players);
        }
        subsets.push(SubsetVerdict { report, authorized, ok });
    }
    Ok(StructureReport {
        passed: violations.is_empty(),
        subsets,
        violations,
    })
}
