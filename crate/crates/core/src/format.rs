//! JSON documents and text renderings.
//!
//! Every document names players by label. Structures are written as
//! `{"players": [...], "minimal_authorized_sets": [[...], ...]}`.

use std::fmt::Write as _;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::decomp::{Block, BundledThreshold, Decomposition, Oracle};
use crate::error::{Error, Result};
use crate::qsim::SchemeInstance;
use crate::scheme::{ConcatScheme, MinmaxRoute, RegisterPlan, Route, RouteTarget};
use crate::structure::{AccessStructure, PlayerSet, Universe};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessStructureDoc {
    pub players: Vec<String>,
    pub minimal_authorized_sets: Vec<Vec<String>>,
}

/// A parsed structure with the notes produced while normalizing it.
#[derive(Clone, Debug)]
pub struct Parsed {
    pub structure: AccessStructure,
    pub warnings: Vec<String>,
}

impl AccessStructureDoc {
    pub fn from_structure(gamma: &AccessStructure) -> Self {
        let u = gamma.universe();
        AccessStructureDoc {
            players: u.labels().to_vec(),
            minimal_authorized_sets: gamma.minimal_sets().iter().map(|&s| u.set_labels(s)).collect(),
        }
    }

    /// Builds the structure. Duplicate and absorbed sets are dropped with a
    /// warning; unknown players are an error.
    pub fn to_structure(&self) -> Result<Parsed> {
        let universe = Universe::new(self.players.iter().cloned())?;
        let mut warnings = Vec::new();
        let mut sets: Vec<PlayerSet> = Vec::new();
        for labels in &self.minimal_authorized_sets {
            let set = universe.set_from_labels(labels)?;
            if set.len() != labels.len() {
                warnings.push(format!("set [{}] repeats a player", labels.join(",")));
            }
            if sets.contains(&set) {
                warnings.push(format!("duplicate set {} ignored", universe.format_set(set)));
            } else {
                sets.push(set);
            }
        }
        let structure = AccessStructure::new(universe.clone(), sets.iter().copied())?;
        for &s in &sets {
            if !structure.minimal_sets().contains(&s) {
                warnings.push(format!("set {} is not minimal and was absorbed", universe.format_set(s)));
            }
        }
        Ok(Parsed { structure, warnings })
    }

    pub fn parse(text: &str) -> Result<Parsed> {
        serde_json::from_str::<AccessStructureDoc>(text)?.to_structure()
    }
}

/// Convenience for documents that embed a structure on known players.
fn structure_on(universe: &Arc<Universe>, sets: &[Vec<String>]) -> Result<AccessStructure> {
    let family = sets
        .iter()
        .map(|s| universe.set_from_labels(s))
        .collect::<Result<Vec<_>>>()?;
    AccessStructure::new(universe.clone(), family)
}

/// A bundled threshold: `weights` maps each participant to its share count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub weights: IndexMap<String, u32>,
    pub k: u32,
    /// Shares handed out.
    pub m: u32,
    pub q: u32,
    pub discarded: u32,
}

impl WitnessDoc {
    pub fn from_witness(universe: &Universe, w: &BundledThreshold) -> Self {
        WitnessDoc {
            weights: w
                .participants
                .iter()
                .zip(&w.weights)
                .map(|(p, &c)| (universe.label(p).to_string(), c))
                .collect(),
            k: w.threshold,
            m: w.total_shares(),
            q: w.field_order,
            discarded: w.discarded(),
        }
    }

    pub fn to_witness(&self, universe: &Universe) -> Result<BundledThreshold> {
        let mut pairs = self
            .weights
            .iter()
            .map(|(l, &w)| universe.index(l).map(|i| (i, w)).ok_or_else(|| Error::UnknownPlayer(l.clone())))
            .collect::<Result<Vec<_>>>()?;
        pairs.sort();
        Ok(BundledThreshold {
            participants: PlayerSet::from_indices(pairs.iter().map(|p| p.0)),
            weights: pairs.iter().map(|p| p.1).collect(),
            threshold: self.k,
            field_order: self.q,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDoc {
    pub minimal_authorized_sets: Vec<Vec<String>>,
    /// Positions in the decomposed structure's minimal-set list.
    pub indices: Vec<usize>,
    pub witness: WitnessDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionDoc {
    pub l: usize,
    pub total_shares: u32,
    pub oracle: Oracle,
    pub blocks: Vec<BlockDoc>,
}

impl DecompositionDoc {
    pub fn from_decomposition(d: &Decomposition) -> Self {
        let u = d.gamma.universe();
        DecompositionDoc {
            l: d.l(),
            total_shares: d.total_shares(),
            oracle: d.oracle,
            blocks: d
                .blocks
                .iter()
                .map(|b| BlockDoc {
                    minimal_authorized_sets: b.structure.minimal_sets().iter().map(|&s| u.set_labels(s)).collect(),
                    indices: b.indices.clone(),
                    witness: WitnessDoc::from_witness(u, &b.witness),
                })
                .collect(),
        }
    }

    pub fn to_decomposition(&self, gamma: &AccessStructure) -> Result<Decomposition> {
        let u = gamma.universe();
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                Ok(Block {
                    indices: b.indices.clone(),
                    structure: structure_on(u, &b.minimal_authorized_sets)?,
                    witness: b.witness.to_witness(u)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let d = Decomposition {
            gamma: gamma.clone(),
            blocks,
            oracle: self.oracle,
        };
        d.validate()?;
        Ok(d)
    }
}

/// A threshold code with its player assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeDescriptor {
    pub players: Vec<String>,
    pub q: u32,
    pub k: u32,
    pub points: Vec<u32>,
    /// Player label to zero-based share indices.
    pub bundling: IndexMap<String, Vec<usize>>,
    pub discarded: Vec<usize>,
    /// Structure the code should realize, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub access_structure: Option<Vec<Vec<String>>>,
}

impl SchemeDescriptor {
    pub fn from_instance(s: &SchemeInstance, target: Option<&AccessStructure>) -> Self {
        let u = &s.universe;
        SchemeDescriptor {
            players: u.labels().to_vec(),
            q: s.q,
            k: s.k,
            points: s.points.clone(),
            bundling: s
                .bundling()
                .into_iter()
                .map(|(p, shares)| (u.label(p).to_string(), shares))
                .collect(),
            discarded: (0..s.n_code()).filter(|&i| s.holders[i].is_none()).collect(),
            access_structure: target.map(|g| g.minimal_sets().iter().map(|&a| u.set_labels(a)).collect()),
        }
    }

    pub fn to_instance(&self) -> Result<(SchemeInstance, Option<AccessStructure>)> {
        let universe = Universe::new(self.players.iter().cloned())?;
        let n_code = self.points.len();
        let mut holders: Vec<Option<usize>> = vec![None; n_code];
        let mut assigned = vec![false; n_code];
        let mut claim = |i: usize| -> Result<()> {
            if i >= n_code || std::mem::replace(&mut assigned[i], true) {
                return Err(Error::InvalidScheme(format!("share index {i} is out of range or assigned twice")));
            }
            Ok(())
        };
        for (label, shares) in &self.bundling {
            let p = universe.index(label).ok_or_else(|| Error::UnknownPlayer(label.clone()))?;
            for &i in shares {
                claim(i)?;
                holders[i] = Some(p);
            }
        }
        for &i in &self.discarded {
            claim(i)?;
        }
        if let Some(i) = assigned.iter().position(|a| !a) {
            return Err(Error::InvalidScheme(format!("share index {i} is neither held nor discarded")));
        }
        let instance = SchemeInstance::new(self.q, self.k, self.points.clone(), universe.clone(), holders)?;
        let target = self
            .access_structure
            .as_ref()
            .map(|sets| structure_on(&universe, sets))
            .transpose()?;
        Ok((instance, target))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteDoc {
    pub outer_share: usize,
    /// `"block <i>"` (one-based) or `"minmax"`.
    pub to: String,
}

impl RouteDoc {
    fn from_route(r: &Route) -> Self {
        RouteDoc {
            outer_share: r.outer_share,
            to: match r.target {
                RouteTarget::Block(i) => format!("block {}", i + 1),
                RouteTarget::Minmax => "minmax".into(),
            },
        }
    }

    fn to_route(&self) -> Result<Route> {
        let target = match self.to.as_str() {
            "minmax" => RouteTarget::Minmax,
            s => {
                let i: usize = s
                    .strip_prefix("block ")
                    .and_then(|i| i.parse().ok())
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| Error::InvalidScheme(format!("bad route target `{s}`")))?;
                RouteTarget::Block(i - 1)
            }
        };
        Ok(Route {
            outer_share: self.outer_share,
            target,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OuterDoc {
    pub k: usize,
    pub m: usize,
    pub q: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinmaxDerivationDoc {
    pub route: MinmaxRoute,
    pub maximal: Vec<Vec<String>>,
    pub added: Vec<Vec<String>>,
    pub pivots: Vec<Vec<String>>,
}

/// Shares of one component held by a player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterEntry {
    pub component: String,
    pub shares: Vec<usize>,
}

/// A named sub-scheme code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentDoc {
    pub name: String,
    pub descriptor: SchemeDescriptor,
}

/// Plan of either construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanDoc {
    /// `"scheme1"` or `"scheme2"`.
    pub construction: String,
    #[serde(default)]
    pub trivial: bool,
    pub gamma: AccessStructureDoc,
    pub decomposition: DecompositionDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<OuterDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minmax: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minmax_derivation: Option<MinmaxDerivationDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub routing: Vec<RouteDoc>,
    pub registers: IndexMap<String, Vec<RegisterEntry>>,
    pub components: Vec<ComponentDoc>,
}

fn labels_of(u: &Universe, sets: &[PlayerSet]) -> Vec<Vec<String>> {
    sets.iter().map(|&s| u.set_labels(s)).collect()
}

fn block_components(d: &Decomposition) -> Result<Vec<(String, SchemeInstance, AccessStructure)>> {
    d.blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            Ok((
                format!("block {}", i + 1),
                SchemeInstance::from_bundled(d.gamma.universe().clone(), &b.witness)?,
                b.structure.clone(),
            ))
        })
        .collect()
}

fn registers_of(u: &Universe, comps: &[(String, SchemeInstance, AccessStructure)]) -> IndexMap<String, Vec<RegisterEntry>> {
    let mut regs: IndexMap<String, Vec<RegisterEntry>> = IndexMap::new();
    for p in 0..u.len() {
        let entries: Vec<RegisterEntry> = comps
            .iter()
            .filter_map(|(name, code, _)| {
                let shares: Vec<usize> = (0..code.n_code()).filter(|&i| code.holders[i] == Some(p)).collect();
                (!shares.is_empty()).then(|| RegisterEntry {
                    component: name.clone(),
                    shares,
                })
            })
            .collect();
        if !entries.is_empty() {
            regs.insert(u.label(p).to_string(), entries);
        }
    }
    regs
}

impl PlanDoc {
    /// `minmax_witness` is the bundled witness of the minimal maximal part,
    /// when one was found.
    pub fn from_scheme2(cs: &ConcatScheme, minmax_witness: Option<&BundledThreshold>) -> Result<Self> {
        let u = cs.gamma.universe();
        let mut comps = block_components(&cs.decomposition)?;
        if let (Some(m), Some(w)) = (&cs.minmax, minmax_witness) {
            comps.push(("minmax".into(), SchemeInstance::from_bundled(u.clone(), w)?, m.clone()));
        }
        let l = cs.outer_threshold;
        Ok(PlanDoc {
            construction: "scheme2".into(),
            trivial: cs.trivial,
            gamma: AccessStructureDoc::from_structure(&cs.gamma),
            decomposition: DecompositionDoc::from_decomposition(&cs.decomposition),
            outer: Some(OuterDoc {
                k: l,
                m: 2 * l - 1,
                q: crate::decomp::smallest_prime_at_least((2 * l - 1).max(2) as u32),
            }),
            minmax: cs.minmax.as_ref().map(|m| labels_of(u, m.minimal_sets())),
            minmax_derivation: cs.minmax_search.as_ref().map(|s| MinmaxDerivationDoc {
                route: s.route,
                maximal: labels_of(u, s.maximal.minimal_sets()),
                added: labels_of(u, &s.added),
                pivots: labels_of(u, &s.pivots),
            }),
            routing: cs.routing.iter().map(RouteDoc::from_route).collect(),
            registers: registers_of(u, &comps),
            components: comps
                .iter()
                .map(|(name, code, g)| ComponentDoc {
                    name: name.clone(),
                    descriptor: SchemeDescriptor::from_instance(code, Some(g)),
                })
                .collect(),
        })
    }

    pub fn from_scheme1(plan: &RegisterPlan) -> Result<Self> {
        let u = plan.gamma.universe();
        let comps = block_components(&plan.decomposition)?;
        Ok(PlanDoc {
            construction: "scheme1".into(),
            trivial: plan.decomposition.oracle == Oracle::Unanimity,
            gamma: AccessStructureDoc::from_structure(&plan.gamma),
            decomposition: DecompositionDoc::from_decomposition(&plan.decomposition),
            outer: None,
            minmax: None,
            minmax_derivation: None,
            routing: Vec::new(),
            registers: registers_of(u, &comps),
            components: comps
                .iter()
                .map(|(name, code, g)| ComponentDoc {
                    name: name.clone(),
                    descriptor: SchemeDescriptor::from_instance(code, Some(g)),
                })
                .collect(),
        })
    }

    /// Rebuilds a Scheme II plan. The derivation log is not restored.
    pub fn to_scheme2(&self) -> Result<ConcatScheme> {
        if self.construction != "scheme2" {
            return Err(Error::InvalidScheme(format!("expected a scheme2 plan, got `{}`", self.construction)));
        }
        let gamma = self.gamma.to_structure()?.structure;
        let u = gamma.universe();
        let decomposition = self.decomposition.to_decomposition(&gamma)?;
        let outer = self
            .outer
            .as_ref()
            .ok_or_else(|| Error::InvalidScheme("plan has no outer threshold".into()))?;
        Ok(ConcatScheme {
            minmax: self.minmax.as_ref().map(|m| structure_on(u, m)).transpose()?,
            minmax_search: None,
            outer_threshold: outer.k,
            routing: self.routing.iter().map(RouteDoc::to_route).collect::<Result<_>>()?,
            trivial: self.trivial,
            decomposition,
            gamma,
        })
    }

    pub fn to_scheme1(&self) -> Result<RegisterPlan> {
        if self.construction != "scheme1" {
            return Err(Error::InvalidScheme(format!("expected a scheme1 plan, got `{}`", self.construction)));
        }
        let gamma = self.gamma.to_structure()?.structure;
        crate::scheme::build_scheme1_from(self.decomposition.to_decomposition(&gamma)?)
    }
}

fn witness_label(u: &Universe, w: &BundledThreshold) -> String {
    if w.weights.iter().all(|&c| c == 1) && w.threshold as usize == w.participants.len() {
        return format!("(({},{}))", w.threshold, w.threshold);
    }
    let weights: Vec<String> = w
        .participants
        .iter()
        .zip(&w.weights)
        .map(|(p, &c)| if c == 1 { u.label(p).to_string() } else { format!("{}×{c}", u.label(p)) })
        .collect();
    format!(
        "GQSS (({},{})) q={} [{}]",
        w.threshold,
        w.total_shares(),
        w.field_order,
        weights.join(" ")
    )
}

/// Brace diagram of a concatenated scheme.
///
/// ```text
/// ((2,3)) scheme {
///   share 1 -> GQSS ((5,7)) q=11 [P1×3 P2×2 P4 P5]: Γ1 = {P1P2,P1P4P5}
///   share 2 -> GQSS ((5,6)) q=11 [P2×2 P3×2 P4 P5]: Γ2 = {P2P3P4,P2P3P5}
///   share 3 -> Γ_M^(m) = {P1P2,P1P3,P1P4P5,P2P3P4,P2P3P5}
/// }
/// ```
pub fn render_scheme2(cs: &ConcatScheme) -> String {
    let u = cs.gamma.universe();
    let (k, m) = cs.outer();
    let mut out = format!("(({k},{m})) scheme {{\n");
    for r in &cs.routing {
        if let RouteTarget::Block(i) = r.target {
            let b = &cs.decomposition.blocks[i];
            let _ = writeln!(
                out,
                "  share {} -> {}: Γ{} = {}",
                r.outer_share,
                witness_label(u, &b.witness),
                i + 1,
                b.structure
            );
        }
    }
    let rest: Vec<usize> = cs
        .routing
        .iter()
        .filter(|r| r.target == RouteTarget::Minmax)
        .map(|r| r.outer_share)
        .collect();
    if let (Some(mm), Some(&first), Some(&last)) = (&cs.minmax, rest.first(), rest.last()) {
        let shares = if first == last { format!("share {first}") } else { format!("shares {first}-{last}") };
        let name = if cs.trivial { "Γ_M" } else { "Γ_M^(m)" };
        let _ = writeln!(out, "  {shares} -> {name} = {mm}");
    }
    out.push_str("}\n");
    out
}

/// Register listing of Scheme I.
pub fn render_scheme1(plan: &RegisterPlan) -> String {
    let u = plan.gamma.universe();
    let mut out = format!("{} registers {{\n", plan.registers.len());
    for (i, b) in plan.decomposition.blocks.iter().enumerate() {
        let _ = writeln!(out, "  block {}: {}: Γ{} = {}", i + 1, witness_label(u, &b.witness), i + 1, b.structure);
    }
    for reg in &plan.registers {
        let parts: Vec<String> = reg
            .holdings
            .iter()
            .map(|h| format!("block {} shares {:?}", h.block + 1, h.shares))
            .collect();
        let _ = writeln!(out, "  R({}) = {}", u.label(reg.player), parts.join("; "));
    }
    out.push_str("}\n");
    out
}
