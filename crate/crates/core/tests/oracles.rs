//! Library results against brute-force reference implementations.

use itertools::Itertools;
use qaskit::decomp::{optimal_decomposition, recognize_bundled_threshold, subfamily, Oracle};
use qaskit::maximalize::self_dual_families;
use qaskit::qsim::{dense_residual, SchemeInstance, Simulator, DECOUPLING_TOLERANCE};
use qaskit::sample::campaign;
use qaskit::{AccessStructure, PlayerSet, Universe};

/// Monotone self-dual non-constant functions on `n` variables, built from
/// every Boolean function on the first `n − 1` variables.
fn self_dual_brute(n: usize) -> Vec<Vec<u32>> {
    let m = n - 1;
    let half = 1usize << m;
    let mask = (1u32 << m) - 1;
    let mut out = Vec::new();
    for h in 0u64..1 << half {
        let f = |x: u32| -> bool {
            if x >> m & 1 == 0 {
                h >> (x & mask) & 1 == 1
            } else {
                h >> (mask ^ (x & mask)) & 1 == 0
            }
        };
        let all = 1u32 << n;
        let monotone = (0..all).all(|x| !f(x) || (0..n).all(|i| f(x | 1 << i)));
        let self_dual = (0..all).all(|x| f(x) != f((all - 1) ^ x));
        if monotone && self_dual {
            let mut minimal: Vec<u32> = (0..all)
                .filter(|&x| f(x) && (0..n).all(|i| x >> i & 1 == 0 || !f(x & !(1 << i))))
                .collect();
            minimal.sort();
            out.push(minimal);
        }
    }
    out.sort();
    out
}

#[test]
fn self_dual_enumeration_matches_truth_tables() {
    for n in 1..=5 {
        let mut ours: Vec<Vec<u32>> = self_dual_families(n)
            .unwrap()
            .iter()
            .map(|g| {
                let mut v: Vec<u32> = g.minimal_sets().iter().map(|s| s.bits()).collect();
                v.sort();
                v
            })
            .collect();
        ours.sort();
        assert_eq!(ours, self_dual_brute(n), "n = {n}");
    }
    assert_eq!(self_dual_brute(5).len(), 81);
}

/// Every set partition of `0..r`, as restricted growth strings.
fn partitions(r: usize) -> Vec<Vec<u32>> {
    fn go(i: usize, r: usize, blocks: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == r {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b] |= 1 << i;
            go(i + 1, r, blocks, out);
            blocks[b] &= !(1 << i);
        }
        blocks.push(1 << i);
        go(i + 1, r, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    go(0, r, &mut Vec::new(), &mut out);
    out
}

fn brute_min_blocks(gamma: &AccessStructure, oracle: &Oracle) -> usize {
    let mut realizable = std::collections::HashMap::new();
    partitions(gamma.r())
        .into_iter()
        .filter(|p| {
            p.iter().all(|&t| {
                *realizable
                    .entry(t)
                    .or_insert_with(|| oracle.realize(&subfamily(gamma, t).unwrap()).is_some())
            })
        })
        .map(|p| p.len())
        .min()
        .unwrap()
}

#[test]
fn partition_counts_are_bell_numbers() {
    let bell = [1, 1, 2, 5, 15, 52, 203];
    for (r, &b) in bell.iter().enumerate().skip(1) {
        assert_eq!(partitions(r).len(), b);
    }
}

#[test]
fn optimal_l_matches_partition_search() {
    let oracle = Oracle::default();
    let mut checked = 0;
    for g in campaign(11, 40, 3, 6).unwrap().into_iter().filter(|g| g.r() <= 7) {
        let d = optimal_decomposition(&g, &oracle).unwrap();
        assert_eq!(d.l(), brute_min_blocks(&g, &oracle), "{g}");
        checked += 1;
    }
    assert!(checked >= 30);
}

/// All weight vectors in `1..=w_max` and thresholds up to `k_max` whose
/// induced structure is `block`; returns the smallest threshold found.
fn brute_bundled(block: &AccessStructure, w_max: u32, k_max: u32) -> Option<u32> {
    let parts: Vec<usize> = block.participants().iter().collect();
    let mut best = None;
    for weights in std::iter::repeat_n(1..=w_max, parts.len()).multi_cartesian_product() {
        let total: u32 = weights.iter().sum();
        for k in 1..=k_max {
            if total > 2 * k - 1 {
                continue;
            }
            let weight = |s: PlayerSet| -> u32 {
                parts
                    .iter()
                    .zip(&weights)
                    .filter(|(p, _)| s.contains(**p))
                    .map(|(_, w)| w)
                    .sum()
            };
            let induced: Vec<PlayerSet> = block
                .participants()
                .subsets()
                .filter(|&s| weight(s) >= k)
                .collect();
            let Ok(g) = AccessStructure::new(block.universe().clone(), induced) else {
                continue;
            };
            if g.minimal_sets() == block.minimal_sets() {
                best = Some(best.map_or(k, |b: u32| b.min(k)));
            }
        }
    }
    best
}

#[test]
fn bundled_recognition_matches_exhaustive_search() {
    let mut realizable = 0;
    for g in campaign(5, 120, 2, 4).unwrap() {
        let found = recognize_bundled_threshold(&g, 3, 12);
        let brute = brute_bundled(&g, 3, 12);
        assert_eq!(found.as_ref().map(|w| w.threshold), brute, "{g}");
        if let Some(w) = found {
            assert!(w.realizes(&g));
            realizable += 1;
        }
    }
    assert!(realizable > 20);
}

#[test]
fn richer_oracles_never_need_more_blocks() {
    let oracles = [
        Oracle::Unanimity,
        Oracle::Bundled {
            max_weight: 1,
            max_threshold: 25,
        },
        Oracle::Bundled {
            max_weight: 3,
            max_threshold: 25,
        },
        Oracle::default(),
    ];
    for g in campaign(3, 30, 3, 6).unwrap() {
        let ls: Vec<usize> = oracles
            .iter()
            .map(|o| optimal_decomposition(&g, o).unwrap().l())
            .collect();
        assert!(ls.windows(2).all(|w| w[0] >= w[1]), "{g}: {ls:?}");
        assert_eq!(ls[0], g.r());
    }
}

#[test]
fn closure_membership_matches_definition() {
    for g in campaign(9, 30, 2, 6).unwrap() {
        for s in PlayerSet::full(g.n()).subsets() {
            let naive = g.minimal_sets().iter().any(|a| a.bits() & !s.bits() == 0);
            assert_eq!(g.is_authorized(s), naive);
        }
    }
}

#[test]
fn threshold_law_exhaustive() {
    for (k, q) in [(1, 2), (2, 3), (2, 5), (3, 5)] {
        let s = SchemeInstance::threshold(k, q).unwrap();
        let sim = Simulator::fresh(&s).unwrap();
        let all = s.all_shares();
        for held in 0..=all {
            let size = held.count_ones();
            let r_held = sim.residual(held).unwrap();
            let r_rest = sim.residual(all & !held).unwrap();
            assert_eq!(r_held <= DECOUPLING_TOLERANCE, size < k, "k={k} q={q} held={held:b}");
            assert_eq!(r_rest <= DECOUPLING_TOLERANCE, size >= k, "k={k} q={q} held={held:b}");
        }
    }
}

#[test]
fn sparse_matches_dense_three_of_five() {
    let s = SchemeInstance::threshold(3, 5).unwrap();
    let sim = Simulator::fresh(&s).unwrap();
    for held in (0u64..32).filter(|h| h.count_ones() <= 2) {
        let sparse = sim.residual(held).unwrap();
        let dense = dense_residual(&s, held).unwrap();
        assert!((sparse - dense).abs() < 1e-10, "{held:b}: {sparse} vs {dense}");
    }
}

#[test]
fn bundled_code_matches_dense_oracle() {
    let u = Universe::numbered(3).unwrap();
    let g = AccessStructure::parse(u, &["P1P2", "P1P3"]).unwrap();
    let w = recognize_bundled_threshold(&g, 5, 25).unwrap();
    let s = SchemeInstance::from_bundled(g.universe().clone(), &w).unwrap();
    let sim = Simulator::fresh(&s).unwrap();
    for held in (0..=s.all_shares()).filter(|h| h.count_ones() <= 4) {
        let dense = dense_residual(&s, held).unwrap();
        assert!((sim.residual(held).unwrap() - dense).abs() < 1e-10);
    }
}
