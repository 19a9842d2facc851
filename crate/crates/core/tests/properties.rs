//! Property tests for the algebraic invariants the modules promise.

use frlab_core::catalog;
use frlab_core::closure::{validate_closure, ClosureOperator};
use frlab_core::groups::{automorphism_group, naive_automorphisms, naive_elements, PermGroup};
use frlab_core::instance::ActionInstance;
use frlab_core::structures::{
    qf_type, structure_from_action, ultrahomogenize, FinStructure, Signature,
};
use frlab_core::ElemSet;
use proptest::prelude::*;

fn arb_structure(max_size: usize) -> impl Strategy<Value = FinStructure> {
    (
        1..=max_size,
        proptest::collection::vec(any::<bool>(), max_size * max_size),
    )
        .prop_map(move |(size, bits)| {
            let sig = Signature::new(vec![("R".into(), 2)]).unwrap();
            let mut s = FinStructure::new(sig, size).unwrap();
            for x in 0..size {
                for y in 0..size {
                    if bits[x * max_size + y] {
                        s.set(0, vec![x, y]).unwrap();
                    }
                }
            }
            s
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn json_roundtrip_is_bit_exact(s in arb_structure(5)) {
        let text = s.to_json_string();
        let back = FinStructure::from_json_str(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_json_string(), text);
    }

    #[test]
    fn qf_type_is_automorphism_invariant(s in arb_structure(5)) {
        let group = automorphism_group(&s);
        for g in group.generators() {
            for tuple in [vec![0], vec![0, s.size() - 1], vec![s.size() - 1, 0, 0]] {
                if tuple.iter().any(|&x| x >= s.size()) {
                    continue;
                }
                prop_assert_eq!(
                    qf_type(&s, &tuple),
                    qf_type(&s, &g.apply_tuple(&tuple))
                );
            }
        }
    }

    #[test]
    fn chain_order_matches_naive_closure(s in arb_structure(5)) {
        let group = automorphism_group(&s);
        let naive = naive_elements(group.domain_size(), group.generators());
        prop_assert_eq!(group.order(), naive.len() as u128);
        for g in &naive {
            prop_assert!(group.contains(g));
        }
    }

    #[test]
    fn homogenization_preserves_the_group(s in arb_structure(5)) {
        let expanded = ultrahomogenize(&s, 2, 4).unwrap();
        prop_assert_eq!(
            automorphism_group(&s).order(),
            automorphism_group(&expanded).order()
        );
    }

    #[test]
    fn orbit_structure_types_track_orbits(s in arb_structure(4)) {
        // In the canonical orbit structure, two pairs have equal
        // quantifier-free types exactly when the group moves one to the
        // other.
        let group = automorphism_group(&s);
        let orbit_structure = structure_from_action(&group, 2).unwrap();
        let elements = naive_elements(group.domain_size(), group.generators());
        let n = s.size();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let same_type = qf_type(&orbit_structure, &[a, b])
                            == qf_type(&orbit_structure, &[c, d]);
                        let same_orbit = elements
                            .iter()
                            .any(|g| g.apply(a) == c && g.apply(b) == d);
                        prop_assert_eq!(same_type, same_orbit);
                    }
                }
            }
        }
    }

    #[test]
    fn congruence_classes_partition_and_shrink(s in arb_structure(6)) {
        let group = automorphism_group(&s);
        let n = group.domain_size();
        let b = ElemSet::singleton(0);
        let bigger = if n > 1 { b.with(n - 1) } else { b };
        for a in 0..n {
            let orbit = group.orbit_over(a, b);
            // Partition: every member's class is the same set.
            for x in orbit.iter() {
                prop_assert_eq!(group.orbit_over(x, b), orbit);
            }
            // Growing the base only shrinks the class.
            prop_assert!(group.orbit_over(a, bigger).is_subset(orbit));
        }
    }

    #[test]
    fn catalog_closures_satisfy_axioms(s in arb_structure(5)) {
        let mut inst = ActionInstance::Fixed(catalog::fixed_from_structure("rand", s));
        let sample: Vec<ElemSet> = inst.universe().subsets().collect();
        for op in [
            ClosureOperator::identity(),
            ClosureOperator::constant_full(),
            ClosureOperator::definable_closure(),
        ] {
            prop_assert!(validate_closure(&op, &mut inst, &sample).unwrap().passes());
        }
    }

    #[test]
    fn perm_group_inverses_and_products_stay_inside(s in arb_structure(5)) {
        let group = automorphism_group(&s);
        for g in group.generators() {
            prop_assert!(group.contains(&g.inverse()));
            for h in group.generators() {
                prop_assert!(group.contains(&g.compose(h)));
            }
        }
    }
}

#[test]
fn extendable_truncation_agrees_with_fixed_orbits() {
    // A fully-paired truncation of the pairs limit is ultrahomogeneous,
    // so type-equality over a base must match the fixed-case orbit
    // computation on it.
    let mut inst = catalog::load_instance("pairs-limit").unwrap();
    let e = inst.as_extendable_mut().unwrap();
    e.ensure_size(6).unwrap();
    let snapshot = e.structure().clone();
    let rel = snapshot.signature().index_of("E").unwrap();
    let all_paired = (0..snapshot.size())
        .all(|x| (0..snapshot.size()).any(|y| y != x && snapshot.holds(rel, &[x, y])));
    assert!(all_paired, "growth should pair everything by size 6");
    let group = automorphism_group(&snapshot);
    for b in ElemSet::full(snapshot.size()).subsets_up_to(2) {
        for a in 0..snapshot.size() {
            if b.contains(a) {
                continue;
            }
            let fixed_orbit = group.orbit_over(a, b);
            let base = b.to_vec();
            let ty = frlab_core::fraisse::atoms_of(&snapshot, a, &base);
            let typed_orbit: ElemSet = (0..snapshot.size())
                .filter(|&x| {
                    !b.contains(x) && frlab_core::fraisse::atoms_of(&snapshot, x, &base) == ty
                })
                .collect();
            assert_eq!(fixed_orbit, typed_orbit, "a={a} b={b:?}");
        }
    }
}

#[test]
fn rigid_order_gets_singleton_orbit_relations() {
    // Every tuple of a rigid structure sits in its own orbit relation.
    let lin = catalog::linear_order(3);
    let expanded = ultrahomogenize(&lin, 2, 4).unwrap();
    assert_eq!(expanded.signature().len(), 3 + 9);
    assert_eq!(automorphism_group(&expanded).order(), 1);
}

#[test]
fn four_cycle_expansion_separates_pair_orbits() {
    // Adjacent and antipodal pairs land in different orbit relations;
    // the dihedral group survives unchanged.
    let c4 = catalog::cycle_graph(4);
    let expanded = ultrahomogenize(&c4, 2, 4).unwrap();
    assert_eq!(automorphism_group(&expanded).order(), 8);
    let t_adj = qf_type(&expanded, &[0, 1]);
    let t_opp = qf_type(&expanded, &[0, 2]);
    assert_ne!(t_adj, t_opp);
    assert_eq!(t_adj, qf_type(&expanded, &[1, 2]));
    assert_eq!(t_opp, qf_type(&expanded, &[1, 3]));
}

#[test]
fn cyclic_action_orbit_relations_are_directional() {
    let c4 = PermGroup::cyclic(4);
    let orbit_structure = structure_from_action(&c4, 2).unwrap();
    // "one ahead" and "one behind" are different orbits under rotation.
    assert_ne!(
        qf_type(&orbit_structure, &[0, 1]),
        qf_type(&orbit_structure, &[1, 0])
    );
    assert_eq!(
        qf_type(&orbit_structure, &[0, 1]),
        qf_type(&orbit_structure, &[1, 2])
    );
    assert_eq!(automorphism_group(&orbit_structure).order(), 4);
}

#[test]
fn trivial_action_gives_one_relation_per_tuple() {
    let trivial = PermGroup::trivial(3);
    let orbit_structure = structure_from_action(&trivial, 2).unwrap();
    assert_eq!(orbit_structure.signature().len(), 3 + 9);
    assert_eq!(automorphism_group(&orbit_structure).order(), 1);
}

#[test]
fn enumerated_closures_always_include_identity_and_full() {
    for name in ["s3", "c4"] {
        let inst = catalog::load_instance(name).unwrap();
        let group = &inst.as_fixed().unwrap().group;
        let ops = frlab_core::closure::enumerate_invariant_closures(group, 4).unwrap();
        let mut inst = catalog::load_instance(name).unwrap();
        let n = inst.size();
        let has_identity = ops.iter().any(|op| {
            ElemSet::full(n)
                .subsets()
                .all(|s| op.eval(&mut inst, s).unwrap() == s)
        });
        let mut inst2 = catalog::load_instance(name).unwrap();
        let has_full = ops.iter().any(|op| {
            ElemSet::full(n)
                .subsets()
                .all(|s| op.eval(&mut inst2, s).unwrap() == ElemSet::full(n))
        });
        assert!(has_identity && has_full);
    }
}

#[test]
fn infinite_rank_certificates_on_extendable_instances() {
    use frlab_core::closure::Bounds;
    let bounds = Bounds {
        set_size: 2,
        witness_search: 20,
    };
    // Random graph with the identity operator: a ∉ B escapes, and the
    // certificate is bound-limited.
    let mut graphs = catalog::load_instance("graphs-limit").unwrap();
    graphs.as_extendable_mut().unwrap().ensure_size(5).unwrap();
    let cert = frlab_core::rank::certify_infinite_rank(
        &mut graphs,
        0,
        ElemSet::singleton(1),
        &ClosureOperator::identity(),
        bounds,
    )
    .unwrap();
    assert!(cert.bound_limited && cert.escapes_closure);

    // Pairs limit with the partner rule: an element neither in B nor
    // partnered with it.
    let mut pairs = catalog::load_instance("pairs-limit").unwrap();
    pairs.as_extendable_mut().unwrap().ensure_size(6).unwrap();
    let snapshot = pairs.structure().clone();
    let rel = snapshot.signature().index_of("E").unwrap();
    let b_elem = 0usize;
    let a = (0..snapshot.size())
        .find(|&x| x != b_elem && !snapshot.holds(rel, &[x, b_elem]))
        .unwrap();
    let cert = frlab_core::rank::certify_infinite_rank(
        &mut pairs,
        a,
        ElemSet::singleton(b_elem),
        &ClosureOperator::add_partners(),
        bounds,
    )
    .unwrap();
    assert!(cert.bound_limited && cert.escapes_closure);
}

#[test]
fn deissler_closure_set_reports_open_elements_on_graphs() {
    let mut inst = catalog::load_instance("graphs-limit").unwrap();
    inst.as_extendable_mut().unwrap().ensure_size(4).unwrap();
    let (set, diags) =
        frlab_core::rank::definable_closure_set(&mut inst, ElemSet::empty(), 3).unwrap();
    assert!(set.is_empty(), "no element is captured over the empty base");
    assert!(!diags.is_empty());
    assert!(diags.iter().all(|d| !d.rank.is_finite()));
}

#[test]
fn ternary_structures_inventory_matches_brute_force() {
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..12 {
        let size = rng.gen_range(2..=5usize);
        let sig = Signature::new(vec![("T".into(), 3), ("E".into(), 2)]).unwrap();
        let mut s = FinStructure::new(sig, size).unwrap();
        for x in 0..size {
            for y in 0..size {
                if rng.gen_bool(0.3) {
                    s.set(1, vec![x, y]).unwrap();
                }
                for z in 0..size {
                    if rng.gen_bool(0.15) {
                        s.set(0, vec![x, y, z]).unwrap();
                    }
                }
            }
        }
        let engine = automorphism_group(&s);
        assert_eq!(engine.order(), naive_automorphisms(&s).len() as u128);
        let expanded = ultrahomogenize(&s, 3, 4).unwrap();
        assert_eq!(automorphism_group(&expanded).order(), engine.order());
    }
}
