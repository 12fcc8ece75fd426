//! Randomized invariants for the logic core, the text format and the
//! feasibility layer. The heavier measure-level property suite lives with
//! the acceptance tests of the command-line crate.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pkb::random::{random_kb, RandomKbConfig};
use pkb::{
    build_cs, is_consistent, minimal_inconsistent_subsets, models, parse_kb, satisfies, Formula,
    KnowledgeBase, Signature, Variable, WorldSet,
};

fn sig4() -> Signature {
    Signature::new(vec![
        Variable::binary("A"),
        Variable::binary("B"),
        Variable::new("C", vec!["x".into(), "y".into(), "z".into()]),
        Variable::binary("D"),
    ])
    .unwrap()
}

/// Formula strategy over the fixed four-variable signature.
fn formula_strategy() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        5 => (0usize..4, 0usize..2).prop_map(|(var, value)| {
            // Variable C has three values; the others two.
            let value = if var == 2 { value + 1 } else { value };
            Formula::Lit { var, value }
        }),
        1 => Just(Formula::Top),
    ];
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            inner.prop_map(Formula::not),
        ]
    })
}

proptest! {
    #[test]
    fn models_agree_with_pointwise_satisfaction(f in formula_strategy()) {
        let sig = sig4();
        let set = models(&f, &sig);
        for w in sig.worlds() {
            prop_assert_eq!(set.contains(w.index()), satisfies(&w, &f));
        }
    }

    #[test]
    fn complement_partitions_the_worlds(f in formula_strategy()) {
        let sig = sig4();
        let pos = models(&f, &sig);
        let neg = models(&Formula::not(f), &sig);
        prop_assert!(pos.intersection(&neg).is_empty());
        prop_assert_eq!(pos.union(&neg), WorldSet::full(sig.world_count()));
    }

    #[test]
    fn connectives_are_set_operations(f in formula_strategy(), g in formula_strategy()) {
        let sig = sig4();
        let mf = models(&f, &sig);
        let mg = models(&g, &sig);
        prop_assert_eq!(
            models(&Formula::and(f.clone(), g.clone()), &sig),
            mf.intersection(&mg)
        );
        prop_assert_eq!(models(&Formula::or(f, g), &sig), mf.union(&mg));
    }

    #[test]
    fn serialization_round_trips(seed: u64) {
        let sig = Signature::new(vec![
            Variable::binary("A"),
            Variable::new("Color", vec!["red".into(), "green".into(), "blue".into()]),
            Variable::binary("B"),
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kb = random_kb(&mut rng, &sig, &[0, 1, 2], &RandomKbConfig::default());
        let text = kb.to_text();
        let parsed = parse_kb(&text).unwrap();
        prop_assert_eq!(parsed, kb);
    }
}

fn suite(count: usize) -> Vec<KnowledgeBase> {
    let sig = Signature::new(vec![Variable::binary("A"), Variable::binary("B")]).unwrap();
    let cfg = RandomKbConfig {
        max_constraints: 5,
        ..RandomKbConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    (0..count)
        .map(|_| random_kb(&mut rng, &sig, &[0, 1], &cfg))
        .collect()
}

#[test]
fn witnesses_satisfy_every_row() {
    for kb in suite(120) {
        let (ok, witness) = is_consistent(&kb).unwrap();
        if ok {
            let w = witness.expect("consistent base must produce a witness");
            let sys = build_cs(&kb.compile());
            for row in &sys.constraint_rows {
                let r: f64 = row.iter().zip(w.probs()).map(|(c, p)| c * p).sum();
                assert!(r.abs() <= 1e-9, "residual {r} on {}", kb.to_text());
            }
            let mass: f64 = w.probs().iter().sum();
            assert!((mass - 1.0).abs() <= 1e-9);
        } else {
            assert!(witness.is_none());
        }
    }
}

#[test]
fn consistency_is_monotone_under_subsets() {
    for kb in suite(120) {
        let n = kb.len();
        let full: Vec<bool> = (0..1u64 << n)
            .map(|mask| is_consistent(&kb.subset_by_mask(mask)).unwrap().0)
            .collect();
        for mask in 0..1u64 << n {
            for sub in 0..1u64 << n {
                if sub & mask == sub && !full[sub as usize] {
                    assert!(
                        !full[mask as usize],
                        "inconsistent subset {sub:b} inside consistent {mask:b} of {}",
                        kb.to_text()
                    );
                }
            }
        }
    }
}

/// Brute-force oracle for minimal inconsistent subsets: decide every subset
/// independently, keep the inconsistent ones that have no inconsistent
/// proper subset.
fn mis_oracle(kb: &KnowledgeBase) -> Vec<Vec<usize>> {
    let n = kb.len();
    let inconsistent: Vec<bool> = (0..1u64 << n)
        .map(|mask| !is_consistent(&kb.subset_by_mask(mask)).unwrap().0)
        .collect();
    let mut result = Vec::new();
    let mut masks: Vec<u64> = (1..1u64 << n)
        .filter(|&m| inconsistent[m as usize])
        .collect();
    masks.sort_by_key(|&m| (m.count_ones(), m));
    for &m in &masks {
        let minimal = (0..n).all(|i| {
            let sub = m & !(1u64 << i);
            sub == m || !inconsistent[sub as usize]
        });
        if minimal {
            result.push((0..n).filter(|i| m & (1u64 << i) != 0).collect());
        }
    }
    result
}

/// The counting shortcut behind `check_self_consistency` must agree with the
/// linear-programming route: a constraint is accepted exactly when forcing
/// its antecedent to probability one leaves a consistent base. One direction
/// is checkable through the public API (accepted constraints validate and
/// stay consistent under the forced antecedent); the rejected direction is
/// pinned by unit cases.
#[test]
fn accepted_constraints_are_strictly_satisfiable() {
    use pkb::random::random_constraint;
    use pkb::Constraint;

    let sig = Signature::new(vec![Variable::binary("A"), Variable::binary("B")]).unwrap();
    let cfg = RandomKbConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xF00D);
    for _ in 0..200 {
        let c = random_constraint(&mut rng, &sig, &[0, 1], &cfg);
        let forced = Constraint::new(c.antecedent.clone(), Formula::Top, 1.0);
        let kb = KnowledgeBase::new(sig.clone(), vec![c, forced])
            .expect("forced antecedent of a self-consistent constraint is satisfiable");
        let (ok, _) = is_consistent(&kb).unwrap();
        assert!(ok, "strict model must exist: {}", kb.to_text());
    }
}

#[test]
fn mis_matches_brute_force() {
    let mut saw_inconsistent = 0;
    for kb in suite(120) {
        let report = minimal_inconsistent_subsets(&kb).unwrap();
        let expected = mis_oracle(&kb);
        assert_eq!(report.subsets, expected, "kb: {}", kb.to_text());
        if !expected.is_empty() {
            saw_inconsistent += 1;
        }
        for (i, free) in report.free.iter().enumerate() {
            assert_eq!(
                *free,
                !expected.iter().any(|s| s.contains(&i)),
                "free flag {i} of {}",
                kb.to_text()
            );
        }
    }
    assert!(
        saw_inconsistent > 5,
        "suite should contain inconsistent bases"
    );
}
