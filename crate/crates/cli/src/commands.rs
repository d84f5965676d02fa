use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use qaskit::decomp::{optimal_decomposition_with, trivial_decomposition, Oracle};
use qaskit::format::{
    render_scheme1, render_scheme2, AccessStructureDoc, DecompositionDoc, Parsed, PlanDoc, SchemeDescriptor, WitnessDoc,
};
use qaskit::limits::{self, Limits};
use qaskit::maximalize::{
    all_maximal_extensions_with, check_corollary, extend_to_maximal, grow_minmax, reduce_to_minmax, ExtendPolicy,
    PivotPolicy,
};
use qaskit::par::Exec;
use qaskit::qsim::{player_subset_report, verify_structure_with, Simulator, SubsetReport};
use qaskit::scheme::{
    build_scheme1, build_scheme2_with, outer_shares_reconstructed, resource_compare_with, verify_scheme1,
    verify_scheme2_with, ComponentOutcome, ConcatScheme, RegisterPlan, ResourceReport, Scheme1Report, Scheme2Config,
    Scheme2Report,
};
use qaskit::{AccessStructure, PlayerSet, Universe};
use serde_json::{json, Value};

use crate::report::{Outcome, Report, Step};

#[derive(Clone, Copy, Debug)]
pub struct Ctx {
    pub exec: Exec,
    pub seed: u64,
}

pub fn load(path: &Path) -> Result<Parsed> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    AccessStructureDoc::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn sets(u: &Universe, family: &[PlayerSet]) -> Vec<Vec<String>> {
    family.iter().map(|&s| u.set_labels(s)).collect()
}

fn doc(g: &AccessStructure) -> AccessStructureDoc {
    AccessStructureDoc::from_structure(g)
}

fn report(operation: &str, input: &Parsed, parameters: Value, steps: Vec<Step>, result: Value, passed: bool) -> Report {
    Report {
        operation: operation.into(),
        input: Some(doc(&input.structure)),
        warnings: input.warnings.clone(),
        parameters,
        steps,
        result,
        passed,
    }
}

pub fn validate(input: &Parsed, ctx: Ctx) -> Result<Outcome> {
    let g = &input.structure;
    let u = g.universe();
    let v = g.validate_quantum();
    let mut result = json!({
        "valid": v.valid,
        "witness": v.witness.map(|(a, b)| [u.set_labels(a), u.set_labels(b)]),
        "r": g.r(),
        "n": g.n(),
        "participants": u.set_labels(g.participants()),
    });
    let mut text = format!("{g}: r = {}, n = {}\n", g.r(), g.n());
    match v.witness {
        Some((a, b)) => {
            let _ = writeln!(text, "invalid: {} and {} are disjoint", u.format_set(a), u.format_set(b));
        }
        None => {
            let split = g.unauthorized_split_with(ctx.exec)?;
            let maximal = split.a2.is_empty();
            result["maximal"] = json!(maximal);
            result["unauthorized_disjoint_from_some_minimal_set"] = json!(split.a1.len());
            result["unauthorized_meeting_every_minimal_set"] = json!(sets(u, &split.a2));
            let _ = writeln!(text, "valid quantum access structure; maximal: {}", if maximal { "yes" } else { "no" });
        }
    }
    Ok(Outcome {
        report: report("validate", input, json!({}), vec![], result, v.valid),
        text,
    })
}

pub fn closure(input: &Parsed, set: &str) -> Result<Outcome> {
    let g = &input.structure;
    let u = g.universe();
    let s = u.parse_set(set)?;
    let authorized = g.is_authorized(s);
    let covering: Vec<PlayerSet> = g.minimal_sets().iter().copied().filter(|a| a.is_subset_of(s)).collect();
    let text = if authorized {
        format!("{} is authorized (contains {})\n", u.format_set(s), u.format_family(&covering))
    } else {
        format!("{} is unauthorized\n", u.format_set(s))
    };
    Ok(Outcome {
        report: report(
            "closure",
            input,
            json!({ "set": u.set_labels(s) }),
            vec![],
            json!({ "authorized": authorized, "contained_minimal_sets": sets(u, &covering) }),
            true,
        ),
        text,
    })
}

pub fn extend_policy(policy: &str, script: &[String], u: &Universe) -> Result<ExtendPolicy> {
    if !script.is_empty() {
        return Ok(ExtendPolicy::Scripted(
            script.iter().map(|s| u.parse_set(s)).collect::<qaskit::Result<_>>()?,
        ));
    }
    Ok(match policy {
        "smallest-first" => ExtendPolicy::SmallestFirst,
        "largest-first" => ExtendPolicy::LargestFirst,
        other => bail!("unknown policy `{other}`"),
    })
}

pub fn pivot_policy(policy: &str, script: &[String], u: &Universe) -> Result<PivotPolicy> {
    if !script.is_empty() {
        return Ok(PivotPolicy::Scripted(
            script.iter().map(|s| u.parse_set(s)).collect::<qaskit::Result<_>>()?,
        ));
    }
    Ok(match policy {
        "smallest-first" => PivotPolicy::SmallestFirst,
        "largest-first" => PivotPolicy::LargestFirst,
        other => bail!("unknown policy `{other}`"),
    })
}

pub fn maximalize(input: &Parsed, all: bool, policy: ExtendPolicy, ctx: Ctx) -> Result<Outcome> {
    let g = &input.structure;
    let u = g.universe();
    let ext = extend_to_maximal(g, &policy)?;
    let steps: Vec<Step> = ext.added.iter().map(|&s| Step::add(u, s)).collect();
    let mut result = json!({ "maximal": doc(&ext.result), "r": ext.result.r() });
    let mut text = format!("maximal extension (r = {}): {}\n", ext.result.r(), ext.result);
    if all {
        let every = all_maximal_extensions_with(g, ctx.exec)?;
        result["extensions"] = json!(every.iter().map(doc).collect::<Vec<_>>());
        result["count"] = json!(every.len());
        let _ = writeln!(text, "{} maximal extensions:", every.len());
        for m in &every {
            let _ = writeln!(text, "  r = {}: {m}", m.r());
        }
    }
    Ok(Outcome {
        report: report("maximalize", input, json!({ "all": all }), steps, result, true),
        text,
    })
}

pub fn minmax(input: &Parsed, extend: ExtendPolicy, pivot: PivotPolicy) -> Result<Outcome> {
    let g = &input.structure;
    let u = g.universe();
    let mut steps = Vec::new();
    let maximal = if g.is_maximal()? {
        g.clone()
    } else {
        let ext = extend_to_maximal(g, &extend)?;
        steps.extend(ext.added.iter().map(|&s| Step::add(u, s)));
        ext.result
    };
    let red = reduce_to_minmax(&maximal, &pivot)?;
    steps.extend(red.steps.iter().map(|s| Step::pivot(u, s)));
    let corollary = check_corollary(&red.result)?;
    let mut text = format!("maximal (r = {}): {maximal}\n", maximal.r());
    for s in &red.steps {
        let _ = writeln!(text, "pivot {}: r {} -> {}", u.format_set(s.pivot), s.r_before, s.r_after);
    }
    let _ = writeln!(text, "minimal maximal (r = {}): {}", red.result.r(), red.result);
    Ok(Outcome {
        report: report(
            "minmax",
            input,
            json!({}),
            steps,
            json!({
                "maximal": doc(&maximal),
                "minmax": doc(&red.result),
                "backtracks": red.backtracks,
                "corollary": corollary,
            }),
            true,
        ),
        text,
    })
}

pub fn grow(input: &Parsed, player: &str, pivot: Option<&str>) -> Result<Outcome> {
    let g = &input.structure;
    let u = g.universe();
    let pivot = pivot.map(|p| u.parse_set(p)).transpose()?;
    let grown = grow_minmax(g, player, pivot)?;
    let text = format!(
        "pivot {}: {}\n",
        u.format_set(grown.pivot),
        grown.result
    );
    Ok(Outcome {
        report: report(
            "grow",
            input,
            json!({ "player": player }),
            vec![Step {
                action: "grow".into(),
                set: u.set_labels(grown.pivot),
                replaced: vec![],
                deleted: vec![],
                r_after: Some(grown.result.r()),
            }],
            json!({
                "grown": doc(&grown.result),
                "pivot": u.set_labels(grown.pivot),
                "rejected": sets(u, &grown.rejected),
            }),
            true,
        ),
        text,
    })
}

fn render_decomposition(d: &qaskit::decomp::Decomposition) -> String {
    let u = d.gamma.universe();
    let mut text = format!("l = {} ({} shares)\n", d.l(), d.total_shares());
    for (i, b) in d.blocks.iter().enumerate() {
        let w = WitnessDoc::from_witness(u, &b.witness);
        let weights: Vec<String> = w.weights.iter().map(|(p, c)| format!("{p}:{c}")).collect();
        let _ = writeln!(
            text,
            "  Γ{} = {}  k = {}, m = {}, q = {}, weights {}",
            i + 1,
            b.structure,
            w.k,
            w.m,
            w.q,
            weights.join(" ")
        );
    }
    text
}

pub fn decompose(input: &Parsed, oracle: Oracle, ctx: Ctx) -> Result<Outcome> {
    let g = &input.structure;
    let d = match oracle {
        Oracle::Unanimity => trivial_decomposition(g)?,
        o => optimal_decomposition_with(g, &o, ctx.exec)?,
    };
    Ok(Outcome {
        text: render_decomposition(&d),
        report: report(
            "decompose",
            input,
            json!({ "oracle": oracle }),
            vec![],
            serde_json::to_value(DecompositionDoc::from_decomposition(&d))?,
            true,
        ),
    })
}

fn scheme2_json(cs: &ConcatScheme, rep: &Scheme2Report) -> Value {
    let u = cs.gamma.universe();
    let components: Vec<Value> = rep
        .components
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "minimal_authorized_sets": sets(c.structure.universe(), c.structure.minimal_sets()),
                "witness": c.witness.as_ref().map(|w| WitnessDoc::from_witness(c.structure.universe(), w)),
                "outcome": c.outcome,
            })
        })
        .collect();
    json!({
        "family": sets(u, &rep.family),
        "family_matches": rep.family_matches,
        "missing": sets(u, &rep.missing),
        "extra": sets(u, &rep.extra),
        "outer_threshold": cs.outer_threshold,
        "max_unauthorized_shares": rep.max_unauthorized_shares,
        "minmax_contains_gamma": rep.minmax_contains_gamma,
        "minmax_is_maximal": rep.minmax_is_maximal,
        "minmax_is_minimal_maximal": rep.minmax_is_minimal_maximal,
        "components": components,
        "passed": rep.passed,
    })
}

fn scheme2_text(cs: &ConcatScheme, rep: &Scheme2Report) -> String {
    let u = cs.gamma.universe();
    let mut text = render_scheme2(cs);
    let _ = writeln!(
        text,
        "authorized family {} (matches: {})",
        u.format_family(&rep.family),
        if rep.family_matches { "yes" } else { "no" }
    );
    if !rep.missing.is_empty() {
        let _ = writeln!(text, "missing {}", u.format_family(&rep.missing));
    }
    if !rep.extra.is_empty() {
        let _ = writeln!(text, "extra {}", u.format_family(&rep.extra));
    }
    let _ = writeln!(
        text,
        "unauthorized sets reconstruct at most {} of {} outer shares",
        rep.max_unauthorized_shares,
        2 * cs.outer_threshold - 1
    );
    for c in &rep.components {
        let status = match &c.outcome {
            ComponentOutcome::Simulated {
                passed, subsets, ..
            } => format!("simulated {subsets} subsets: {}", if *passed { "pass" } else { "FAIL" }),
            ComponentOutcome::ShareFlowOnly { reason } => format!("share-flow only ({reason})"),
        };
        let _ = writeln!(text, "  {}: {status}", c.name);
    }
    let _ = writeln!(text, "verdict: {}", if rep.passed { "pass" } else { "FAIL" });
    text
}

fn scheme1_json(plan: &RegisterPlan, rep: &Scheme1Report) -> Value {
    let u = plan.gamma.universe();
    json!({
        "family": sets(u, &rep.family),
        "family_matches": rep.family_matches,
        "missing": sets(u, &rep.missing),
        "extra": sets(u, &rep.extra),
        "classical": rep.classical,
        "passed": rep.passed,
    })
}

fn scheme1_text(plan: &RegisterPlan, rep: &Scheme1Report) -> String {
    let u = plan.gamma.universe();
    let mut text = render_scheme1(plan);
    let _ = writeln!(
        text,
        "authorized family {} (matches: {})",
        u.format_family(&rep.family),
        if rep.family_matches { "yes" } else { "no" }
    );
    for c in &rep.classical {
        let _ = writeln!(
            text,
            "  block {}: {} classical trials, recovery {}, secrecy {}",
            c.block + 1,
            c.trials,
            if c.recovery_ok { "ok" } else { "FAIL" },
            if c.secrecy_ok { "ok" } else { "FAIL" }
        );
    }
    let _ = writeln!(text, "verdict: {}", if rep.passed { "pass" } else { "FAIL" });
    text
}

pub struct SynthArgs {
    pub scheme: u8,
    pub trivial: bool,
    pub oracle: Oracle,
    pub trials: usize,
    pub plan_out: Option<std::path::PathBuf>,
}

pub fn synth(input: &Parsed, args: &SynthArgs, ctx: Ctx) -> Result<Outcome> {
    let g = &input.structure;
    let params = json!({ "scheme": args.scheme, "trivial": args.trivial, "oracle": args.oracle, "seed": ctx.seed });
    let (plan, verification, text, passed) = match args.scheme {
        2 => {
            let config = Scheme2Config {
                oracle: args.oracle,
                trivial: args.trivial,
                ..Default::default()
            };
            let cs = build_scheme2_with(g, &config, ctx.exec)?;
            let rep = verify_scheme2_with(&cs, ctx.exec)?;
            let minmax_witness = rep
                .components
                .iter()
                .find(|c| c.name == "minmax" || c.name == "maximal")
                .and_then(|c| c.witness.as_ref());
            let plan = PlanDoc::from_scheme2(&cs, minmax_witness)?;
            (plan, scheme2_json(&cs, &rep), scheme2_text(&cs, &rep), rep.passed)
        }
        1 => {
            let oracle = if args.trivial { Oracle::Unanimity } else { args.oracle };
            let plan = match oracle {
                Oracle::Unanimity => qaskit::scheme::build_scheme1_from(trivial_decomposition(g)?)?,
                o => build_scheme1(g, &o)?,
            };
            let rep = verify_scheme1(&plan, args.trials, ctx.seed)?;
            (PlanDoc::from_scheme1(&plan)?, scheme1_json(&plan, &rep), scheme1_text(&plan, &rep), rep.passed)
        }
        other => bail!("unknown scheme {other}; expected 1 or 2"),
    };
    if let Some(path) = &args.plan_out {
        std::fs::write(path, serde_json::to_string_pretty(&plan)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Outcome {
        report: report(
            "synth",
            input,
            params,
            vec![],
            json!({ "plan": plan, "verification": verification }),
            passed,
        ),
        text,
    })
}

fn subset_row(u: &Universe, r: &SubsetReport, authorized: Option<bool>, ok: bool) -> Value {
    json!({
        "players": u.set_labels(r.players),
        "residual_held": r.residual_held,
        "residual_rest": r.residual_rest,
        "secret_free": r.secret_free,
        "recoverable": r.recoverable,
        "authorized": authorized,
        "ok": ok,
    })
}

pub fn simverify(path: &Path, ctx: Ctx) -> Result<Outcome> {
    let text_in = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text_in)
        .map_err(qaskit::Error::from)
        .with_context(|| format!("parsing {}", path.display()))?;
    if value.get("construction").is_some() {
        let plan: PlanDoc = serde_json::from_value(value).map_err(qaskit::Error::from)?;
        let (result, text, passed) = if plan.construction == "scheme1" {
            let p = plan.to_scheme1()?;
            let rep = verify_scheme1(&p, 4, ctx.seed)?;
            (scheme1_json(&p, &rep), scheme1_text(&p, &rep), rep.passed)
        } else {
            let cs = plan.to_scheme2()?;
            let rep = verify_scheme2_with(&cs, ctx.exec)?;
            (scheme2_json(&cs, &rep), scheme2_text(&cs, &rep), rep.passed)
        };
        return Ok(Outcome {
            report: Report {
                operation: "simverify".into(),
                input: Some(plan.gamma.clone()),
                warnings: vec![],
                parameters: json!({ "kind": plan.construction }),
                steps: vec![],
                result,
                passed,
            },
            text,
        });
    }

    let desc: SchemeDescriptor = serde_json::from_value(value).map_err(qaskit::Error::from)?;
    let (scheme, target) = desc.to_instance()?;
    let sim = Simulator::new(&scheme)?;
    let u = scheme.universe.clone();
    let (rows, passed) = match &target {
        Some(gamma) => {
            let rep = verify_structure_with(&sim, gamma, ctx.exec)?;
            let rows: Vec<Value> = rep
                .subsets
                .iter()
                .map(|v| subset_row(&u, &v.report, Some(v.authorized), v.ok))
                .collect();
            (rows, rep.passed)
        }
        None => {
            let n = u.len();
            Limits::check("players for simulation sweep", n as u64, limits::active().verify_players as u64)?;
            let mut rows = Vec::new();
            let mut passed = true;
            for s in 0..1u32 << n {
                let r = player_subset_report(&sim, PlayerSet::from_bits(s))?;
                let ok = r.recoverable != r.secret_free;
                passed &= ok;
                rows.push(subset_row(&u, &r, None, ok));
            }
            (rows, passed)
        }
    };
    let failing = rows.iter().filter(|r| r["ok"] == json!(false)).count();
    let text = format!(
        "(({},{})) over F_{}: {} subsets checked, {} failing\nverdict: {}\n",
        scheme.k,
        scheme.n_code(),
        scheme.q,
        rows.len(),
        failing,
        if passed { "pass" } else { "FAIL" }
    );
    Ok(Outcome {
        report: Report {
            operation: "simverify".into(),
            input: target.as_ref().map(doc),
            warnings: vec![],
            parameters: serde_json::to_value(&desc)?,
            steps: vec![],
            result: json!({ "subsets": rows, "failing": failing }),
            passed,
        },
        text,
    })
}

fn resource_line(r: &ResourceReport) -> String {
    format!(
        "{}: l = {}, outer (({},{})), block shares {}, verification count {}",
        r.construction, r.l, r.outer.0, r.outer.1, r.total_block_shares, r.verification_count
    )
}

pub fn compare(input: &Parsed, oracle: Oracle, ctx: Ctx) -> Result<Outcome> {
    let c = resource_compare_with(&input.structure, &oracle, ctx.exec)?;
    let text = format!(
        "Γ_M (r = {}): {}\nΓ_M^(m) (r = {}): {}\n{}\n{}\nouter (({},{})) vs (({},{})); verification counts {} vs {}\n",
        c.maximal.r(),
        c.maximal,
        c.minmax.r(),
        c.minmax,
        resource_line(&c.ours),
        resource_line(&c.trivial),
        c.ours.outer.0,
        c.ours.outer.1,
        c.trivial.outer.0,
        c.trivial.outer.1,
        c.trivial.verification_count,
        c.ours.verification_count,
    );
    Ok(Outcome {
        report: report(
            "compare",
            input,
            json!({ "oracle": oracle }),
            vec![],
            json!({
                "maximal": doc(&c.maximal),
                "minmax": doc(&c.minmax),
                "ours": c.ours,
                "trivial": c.trivial,
            }),
            true,
        ),
        text,
    })
}

/// Outer shares reconstructed by `set` in a freshly built Scheme II.
pub fn outer_shares(g: &AccessStructure, set: &str, ctx: Ctx) -> Result<(usize, usize)> {
    let cs = build_scheme2_with(g, &Scheme2Config::default(), ctx.exec)?;
    let s = g.universe().parse_set(set)?;
    Ok((outer_shares_reconstructed(&cs, s), cs.outer_threshold))
}
