use qaskit::maximalize::{minmax_isomorphism_classes, self_dual_families, characterization_sweep};
use qaskit::par::Exec;
use qaskit::AccessStructure;

#[test]
fn minimal_maximal_characterization_up_to_five() {
    for (n, count) in [(3, 4), (4, 12), (5, 81)] {
        let sweep = characterization_sweep(n, Exec::default()).unwrap();
        assert_eq!(sweep.families, count);
        assert!(sweep.counterexamples.is_empty(), "n = {n}");
        assert_eq!(sweep.stuck, 0);
    }
}

#[test]
fn five_player_classes() {
    let classes = minmax_isomorphism_classes(5).unwrap();
    assert_eq!(classes.len(), 2);
    let star = AccessStructure::numbered(5, &["P1P2", "P1P3", "P1P4", "P1P5", "P2P3P4P5"]).unwrap();
    let other = AccessStructure::numbered(5, &["P1P2", "P1P3", "P1P4P5", "P2P3P4", "P2P3P5"]).unwrap();
    for rep in [&star, &other] {
        let hits = classes
            .iter()
            .filter(|c| c.iter().any(|g| g.is_isomorphic(rep).unwrap()))
            .count();
        assert_eq!(hits, 1);
        assert!(classes.iter().any(|c| c.contains(rep)));
    }
}

#[test]
fn every_maximal_structure_has_r_at_least_n() {
    for n in 3..=5 {
        for g in self_dual_families(n).unwrap() {
            if g.covers_universe() {
                assert!(g.r() >= g.n(), "{g}");
            }
        }
    }
}
