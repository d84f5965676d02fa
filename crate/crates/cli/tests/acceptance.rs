//! Acceptance suite: one PASS/FAIL line per criterion.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qaskit::decomp::{optimal_decomposition, subfamily, Oracle};
use qaskit::format::AccessStructureDoc;
use qaskit::maximalize::{minmax_isomorphism_classes, reduce_to_minmax, characterization_sweep, PivotPolicy};
use qaskit::par::Exec;
use qaskit::qsim::{dense_residual, encode, player_subset_report, SchemeInstance, Simulator};
use qaskit::sample::campaign;
use qaskit::scheme::{
    build_scheme2, concat_authorized_family, outer_shares_reconstructed, verify_scheme2, Scheme2Config,
};
use qaskit::{AccessStructure, PlayerSet};
use serde_json::Value;

type Check = Result<String, String>;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn cli(args: &[&str]) -> Result<(i32, Value), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qaskit"))
        .args(args)
        .env_remove("QASKIT_LIMITS")
        .output()
        .map_err(|e| e.to_string())?;
    let v = serde_json::from_slice(&out.stdout).map_err(|e| format!("{e}: {}", String::from_utf8_lossy(&out.stderr)))?;
    Ok((out.status.code().unwrap_or(-1), v))
}

fn structure_of(v: &Value) -> Result<AccessStructure, String> {
    let d: AccessStructureDoc = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
    d.to_structure().map(|p| p.structure).map_err(|e| e.to_string())
}

fn numbered(n: usize, sets: &[&str]) -> AccessStructure {
    AccessStructure::numbered(n, sets).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn example1_extensions() -> Check {
    let f = data("example1.json");
    let (code, r) = cli(&["maximalize", "--all", f.to_str().unwrap()])?;
    ensure(code == 0, format!("exit {code}"))?;
    let all = r["result"]["extensions"]
        .as_array()
        .ok_or("no extensions")?
        .iter()
        .map(structure_of)
        .collect::<Result<Vec<_>, _>>()?;
    let gm = numbered(5, &["P1P2", "P1P3", "P1P4P5", "P2P3P5", "P2P3P4"]);
    let gm_prime = numbered(5, &["P1P2", "P1P3P5", "P1P3P4", "P1P4P5", "P2P3P5", "P2P3P4", "P2P4P5"]);
    ensure(all.contains(&gm), "Γ_M missing")?;
    ensure(all.contains(&gm_prime), "Γ_M′ missing")?;
    Ok(format!("{} extensions, Γ_M (r=5) and Γ_M′ (r=7) present", all.len()))
}

fn example2_reduction() -> Check {
    let gm = numbered(
        6,
        &[
            "P1P2", "P1P3P4", "P1P3P5", "P1P3P6", "P1P4P5", "P1P4P6", "P1P5P6", "P2P3P5P6", "P2P4P5P6", "P2P3P4P5",
            "P2P3P4P6",
        ],
    );
    let red = reduce_to_minmax(&gm, &PivotPolicy::default()).map_err(|e| e.to_string())?;
    let want = numbered(6, &["P1P2", "P1P3", "P1P4", "P1P5P6", "P2P3P4P5", "P2P3P4P6"]);
    ensure(red.result == want, format!("reached {}", red.result))?;
    let pivots: Vec<String> = red.steps.iter().map(|s| gm.universe().format_set(s.pivot)).collect();
    ensure(pivots == ["P1P3", "P1P4"], format!("pivots {pivots:?}"))?;
    Ok("Γ″ reached via P1P3 then P1P4".into())
}

fn minmax_characterization() -> Check {
    let mut counts = Vec::new();
    for (n, want) in [(3, 4), (4, 12), (5, 81), (6, 2646)] {
        let s = characterization_sweep(n, Exec::default()).map_err(|e| e.to_string())?;
        ensure(s.families == want, format!("n={n}: {} families", s.families))?;
        ensure(
            s.counterexamples.is_empty(),
            format!("n={n}: {} counterexamples", s.counterexamples.len()),
        )?;
        counts.push(s.families);
    }
    Ok(format!("family counts {counts:?}, 0 counterexamples"))
}

fn five_player_classes() -> Check {
    let classes = minmax_isomorphism_classes(5).map_err(|e| e.to_string())?;
    ensure(classes.len() == 2, format!("{} classes", classes.len()))?;
    let m1 = numbered(5, &["P1P2", "P1P3", "P1P4", "P1P5", "P2P3P4P5"]);
    let m2 = numbered(5, &["P1P2", "P1P3", "P1P4P5", "P2P3P4", "P2P3P5"]);
    let i1 = classes.iter().position(|c| c.contains(&m1)).ok_or("Γ_M1 missing")?;
    let i2 = classes.iter().position(|c| c.contains(&m2)).ok_or("Γ_M2 missing")?;
    ensure(i1 != i2, "Γ_M1 and Γ_M2 in the same class")?;
    Ok("2 classes, represented by Γ_M1^(m) and Γ_M2^(m)".into())
}

fn table1_counts() -> Check {
    let mut shown = Vec::new();
    for (file, want) in [("majority5.json", (10, 5)), ("example2.json", (11, 6))] {
        let f = data(file);
        let (code, r) = cli(&["compare", f.to_str().unwrap()])?;
        ensure(code == 0, format!("exit {code}"))?;
        let got = (
            r["result"]["trivial"]["verification_count"].as_u64().unwrap_or(0),
            r["result"]["ours"]["verification_count"].as_u64().unwrap_or(0),
        );
        ensure(got == want, format!("{file}: {got:?}"))?;
        shown.push(format!("{} vs {}", got.0, got.1));
    }
    Ok(format!("verification counts {}", shown.join(", ")))
}

fn example3_scheme() -> Check {
    let f = data("example1.json");
    let f = f.to_str().unwrap();
    let (_, d) = cli(&["decompose", f])?;
    ensure(d["result"]["l"] == 2, format!("l = {}", d["result"]["l"]))?;
    let (code, s) = cli(&["synth", f, "--scheme", "2"])?;
    ensure(code == 0, format!("synth exit {code}"))?;
    ensure(s["result"]["plan"]["outer"]["k"] == 2 && s["result"]["plan"]["outer"]["m"] == 3, "outer not ((2,3))")?;
    let (_, c) = cli(&["compare", f])?;
    ensure(c["result"]["trivial"]["outer"] == serde_json::json!([4, 7]), "trivial outer not ((4,7))")?;
    let (_, t) = cli(&["synth", f, "--scheme", "2", "--trivial"])?;
    ensure(t["result"]["plan"]["outer"]["m"] == 7, "trivial synth not ((4,7))")?;

    let gamma = numbered(5, &["P1P2", "P1P4P5", "P2P3P5", "P2P3P4"]);
    let cs = build_scheme2(&gamma, &Scheme2Config::default()).map_err(|e| e.to_string())?;
    let mut sweep_ok = true;
    for s in PlayerSet::full(5).subsets() {
        let by_definition = gamma.minimal_sets().iter().any(|a| a.is_subset_of(s));
        sweep_ok &= (outer_shares_reconstructed(&cs, s) >= cs.l()) == by_definition;
    }
    ensure(sweep_ok, "2⁵ sweep disagrees with closure(Γ)")?;
    ensure(
        concat_authorized_family(&cs).map_err(|e| e.to_string())? == gamma.minimal_sets(),
        "family differs",
    )?;
    let (_, q) = cli(&["closure", f, "--set", "P1,P3"])?;
    let p1p3 = gamma.universe().parse_set("P1P3").unwrap();
    ensure(
        q["result"]["authorized"] == false && outer_shares_reconstructed(&cs, p1p3) < cs.l(),
        "P1P3 authorized",
    )?;
    Ok("l=2, ((2,3)) vs ((4,7)), 32/32 subsets agree, P1P3 unauthorized".into())
}

fn two_of_three_simulation() -> Check {
    let s = SchemeInstance::threshold(2, 3).map_err(|e| e.to_string())?;
    let sim = Simulator::fresh(&s).map_err(|e| e.to_string())?;
    for bits in 1u32..8 {
        let r = player_subset_report(&sim, PlayerSet::from_bits(bits)).map_err(|e| e.to_string())?;
        match bits.count_ones() {
            1 => ensure(r.secret_free && r.residual_held <= 1e-9, format!("singleton {bits:b} leaks"))?,
            2 => ensure(r.recoverable && r.residual_rest <= 1e-9, format!("pair {bits:b} cannot recover"))?,
            _ => {}
        }
    }
    let mut worst: f64 = 0.0;
    for held in 0u64..8 {
        let sparse = sim.residual(held).map_err(|e| e.to_string())?;
        let dense = dense_residual(&s, held).map_err(|e| e.to_string())?;
        worst = worst.max((sparse - dense).abs());
    }
    ensure(worst <= 1e-10, format!("sparse/dense gap {worst:e}"))?;
    let st = encode(&s, 0).map_err(|e| e.to_string())?;
    let amp = 1.0 / 3f64.sqrt();
    let mut err: f64 = 0.0;
    for label in 0..27u64 {
        let d = st.digits(label);
        let want = if d[0] == d[1] && d[1] == d[2] { amp } else { 0.0 };
        err = err.max((st.amplitude(&d) - num_complex::Complex64::new(want, 0.0)).norm());
    }
    ensure(err <= 1e-12, format!("encoding error {err:e}"))?;
    Ok(format!("sparse/dense gap {worst:.1e}, encoding error {err:.1e}"))
}

fn partitions_min(gamma: &AccessStructure, oracle: &Oracle) -> usize {
    fn go(i: usize, blocks: &mut Vec<u32>, r: usize, ok: &dyn Fn(u32) -> bool, best: &mut usize) {
        if blocks.len() >= *best {
            return;
        }
        if i == r {
            if blocks.iter().all(|&t| ok(t)) {
                *best = blocks.len();
            }
            return;
        }
        for b in 0..blocks.len() {
            blocks[b] |= 1 << i;
            go(i + 1, blocks, r, ok, best);
            blocks[b] &= !(1 << i);
        }
        blocks.push(1 << i);
        go(i + 1, blocks, r, ok, best);
        blocks.pop();
    }
    let r = gamma.r();
    let cache = std::cell::RefCell::new(std::collections::HashMap::new());
    let ok = |t: u32| {
        *cache
            .borrow_mut()
            .entry(t)
            .or_insert_with(|| oracle.realize(&subfamily(gamma, t).unwrap()).is_some())
    };
    let mut best = r + 1;
    go(0, &mut Vec::new(), r, &ok, &mut best);
    best
}

fn property_campaign() -> Check {
    let structures = campaign(20_240_601, 100, 2, 6).map_err(|e| e.to_string())?;
    let oracle = Oracle::default();
    let mut brute_checked = 0;
    for (i, g) in structures.iter().enumerate() {
        let cs = build_scheme2(g, &Scheme2Config::default()).map_err(|e| format!("#{i} {g}: {e}"))?;
        let rep = verify_scheme2(&cs).map_err(|e| format!("#{i} {g}: {e}"))?;
        ensure(rep.passed, format!("#{i} {g}: verification failed"))?;
        if g.r() <= 8 {
            let l = optimal_decomposition(g, &oracle).map_err(|e| e.to_string())?.l();
            let brute = partitions_min(g, &oracle);
            ensure(l == brute, format!("#{i} {g}: l = {l}, partition minimum {brute}"))?;
            brute_checked += 1;
        }
    }
    Ok(format!("100/100 schemes verified, {brute_checked} partition minima matched"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Check); 8] = [
        ("maximal extensions of the four-set structure", Duration::from_secs(1), example1_extensions),
        ("reduction of the 11-set maximal structure", Duration::from_secs(1), example2_reduction),
        ("minimal maximal characterization, n = 3..6", Duration::from_secs(300), minmax_characterization),
        ("five-player isomorphism classes", Duration::from_secs(300), five_player_classes),
        ("verification counts from compare", Duration::from_secs(300), table1_counts),
        ("concatenated scheme for the four-set structure", Duration::from_secs(10), example3_scheme),
        ("((2,3)) simulator correctness", Duration::from_secs(5), two_of_three_simulation),
        ("property campaign over 100 random structures", Duration::from_secs(300), property_campaign),
    ];
    let mut failures = 0;
    for (i, (name, budget, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {}: FAIL  {name} ({elapsed:.2?}): {why}", i + 1);
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
