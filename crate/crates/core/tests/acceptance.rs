//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its elapsed time against the stated budget (run with
//! `--nocapture` to see the lines for passing tests).  Tolerances are
//! exact everywhere; time budgets are asserted.

use frlab_core::catalog;
use frlab_core::closure::{is_disjointifying, Bounds, ClosureOperator};
use frlab_core::fraisse::{
    build_limit, check_limit_properties, has_amalgamation, AmalgamVerdict, BuiltinClass, Flavor,
    FraisseClassSpec,
};
use frlab_core::groups::{find_isomorphism, PermGroup};
use frlab_core::instance::ActionInstance;
use frlab_core::involve::{equivariant_from, run_involvement, transversal_quotient, SigmaTarget};
use frlab_core::perm::Perm;
use frlab_core::props;
use frlab_core::rank::{oracle::Oracle, FixedRankEngine};
use frlab_core::structures::induced_substructure;
use frlab_core::support::{check_support_axioms, check_support_rank_compat, SupportFunction};
use frlab_core::ElemSet;
use std::time::{Duration, Instant};

fn conclude(number: u8, title: &str, started: Instant, budget: Duration, pass: bool) {
    let elapsed = started.elapsed();
    println!(
        "ACCEPTANCE {number:02} [{}] {title} ({elapsed:.2?} of {budget:.2?} budget)",
        if pass { "PASS" } else { "FAIL" },
    );
    assert!(pass, "criterion {number} failed");
    assert!(
        elapsed <= budget,
        "criterion {number} exceeded its {budget:.2?} budget: {elapsed:.2?}"
    );
}

#[test]
fn acceptance_01_deissler_on_symmetric_groups() {
    let started = Instant::now();
    let mut pass = true;
    for n in 3..=7usize {
        let group = PermGroup::symmetric(n);
        let mut engine = FixedRankEngine::new(&group, false);
        let mut oracle = Oracle::from_generators(n, group.generators(), false);
        for b in ElemSet::full(n).subsets() {
            for a in 0..n {
                let (ev, ov) = (engine.rank(a, b), oracle.rank(a, b));
                pass &= ev == ov;
                if b.is_empty() {
                    pass &= ev == (n - 1) as u32;
                }
            }
        }
    }
    conclude(
        1,
        "deissler rank on S_n (n=3..7) equals the literal-recursion oracle; Drk(a,∅)=n-1",
        started,
        Duration::from_secs(10),
        pass,
    );
}

#[test]
fn acceptance_02_krk_le_drk_and_basic_facts() {
    let started = Instant::now();
    let krk_le = props::run_suite("krk-le-drk", 42).unwrap();
    let facts = run_basic_facts_on(200, 42);
    conclude(
        2,
        "Krk ≤ Drk pointwise and the three basic rank facts on 200 seeded fixed instances",
        started,
        Duration::from_secs(60),
        krk_le.all_passed() && facts,
    );
}

fn run_basic_facts_on(count: usize, seed: u64) -> bool {
    let mut ok = true;
    for f in catalog::seeded_fixed_instances(count, seed) {
        let n = f.group.domain_size();
        let u = ElemSet::full(n);
        let mut krk = FixedRankEngine::new(&f.group, true);
        for b in u.subsets() {
            for a in 0..n {
                let base_val = krk.rank(a, b);
                for c in u.minus(b).iter() {
                    ok &= krk.rank(a, b.with(c)) <= base_val;
                }
                // The two finiteness clauses: hypotheses and conclusion
                // are all finite on fixed instances, asserted literally.
                if let Some(c) = u.minus(b).min() {
                    let hyp = f
                        .group
                        .orbit_over(c, b)
                        .iter()
                        .all(|cp| krk.rank(a, b.with(cp)) < u32::MAX);
                    ok &= !hyp || base_val < u32::MAX;
                }
                let hyp3 = f
                    .group
                    .orbit_over(a, b)
                    .iter()
                    .filter(|&ap| ap != a)
                    .all(|ap| krk.rank(a, b.with(ap)).min(krk.rank(ap, b.with(a))) < u32::MAX);
                ok &= !hyp3 || base_val < u32::MAX;
            }
        }
    }
    ok
}

#[test]
fn acceptance_03_finite_domain_totality() {
    let started = Instant::now();
    let mut pass = true;
    for f in catalog::seeded_fixed_instances(200, 7) {
        let n = f.group.domain_size();
        let mut krk = FixedRankEngine::new(&f.group, true);
        let mut drk = FixedRankEngine::new(&f.group, false);
        let mut oracles = (n <= 6).then(|| {
            (
                Oracle::from_generators(n, f.group.generators(), true),
                Oracle::from_generators(n, f.group.generators(), false),
            )
        });
        for b in ElemSet::full(n).subsets() {
            for a in 0..n {
                // Termination of the well-founded recursion certifies
                // finiteness; the oracle re-derives the values.
                let (kv, dv) = (krk.rank(a, b), drk.rank(a, b));
                if let Some((ok, od)) = &mut oracles {
                    pass &= ok.rank(a, b) == kv && od.rank(a, b) == dv;
                }
            }
        }
        let mut inst = ActionInstance::Fixed(f.clone());
        let clmin = frlab_core::rank::minimum_closure_operator(n);
        pass &= clmin.eval(&mut inst, ElemSet::empty()).unwrap() == ElemSet::full(n);
    }
    conclude(
        3,
        "Krk and Drk close finite values everywhere; cl-min is constant-full; oracle agrees ≤ 6",
        started,
        Duration::from_secs(60),
        pass,
    );
}

#[test]
fn acceptance_04_form_equivalence_on_enumerated_closures() {
    let started = Instant::now();
    let report = props::run_suite("cl-equivalence", 0).unwrap();
    // Four group types, including the full 2480-family trivial action.
    conclude(
        4,
        "the four disjointifying forms agree on every enumerated invariant closure (domains ≤ 4)",
        started,
        Duration::from_secs(300),
        report.all_passed() && report.passed >= 2480,
    );
}

#[test]
fn acceptance_05_minimality_of_rank_closure() {
    let started = Instant::now();
    let mut pass = true;
    for (mut inst, ops) in props::enumeration_instances_for_forms().unwrap() {
        let n = inst.size();
        let bounds = Bounds {
            set_size: n,
            witness_search: n,
        };
        let clmin = frlab_core::rank::minimum_closure_operator(n);
        for op in &ops {
            if !is_disjointifying(op, &mut inst, 1, bounds)
                .unwrap()
                .passes()
            {
                continue;
            }
            for b in inst.universe().subsets() {
                let lower = clmin.eval(&mut inst, b).unwrap();
                let upper = op.eval(&mut inst, b).unwrap();
                pass &= lower.is_subset(upper);
            }
        }
    }
    conclude(
        5,
        "every disjointifying operator on the enumeration contains cl-min pointwise",
        started,
        Duration::from_secs(300),
        pass,
    );
}

#[test]
fn acceptance_06_weak_transitivity_and_one_side() {
    let started = Instant::now();
    let wt = props::run_suite("weak-transitivity", 6).unwrap();
    let os = props::run_suite("one-side", 6).unwrap();
    // Exhaustive on domains ≤ 4 plus 1000 seeded cases on 5-7 each; the
    // weak-transitivity sweep checks the two provable directions (the
    // full biconditional fails for definable closure on S4, see the
    // pinned counterexample test in the closure module).
    conclude(
        6,
        "weak transitivity (provable directions) and the one-side lemma, exhaustive ≤ 4 + sampled",
        started,
        Duration::from_secs(120),
        wt.all_passed() && os.all_passed() && wt.passed >= 2000 && os.passed >= 1000,
    );
}

#[test]
fn acceptance_07_amalgamation_catalog() {
    let started = Instant::now();
    let graphs = FraisseClassSpec::builtin(BuiltinClass::Graphs);
    let pairs = FraisseClassSpec::builtin(BuiltinClass::EquivalencePairs);
    let g4 = has_amalgamation(&graphs, 4, Flavor::Disjoint, 0).unwrap();
    let p_disjoint = has_amalgamation(&pairs, 3, Flavor::Disjoint, 0).unwrap();
    let p_plain = has_amalgamation(&pairs, 3, Flavor::Plain, 0).unwrap();
    let pass = matches!(g4, AmalgamVerdict::HoldsUpTo { .. })
        && matches!(
            &p_disjoint,
            AmalgamVerdict::Counterexample { a, b, c, .. }
                if a.size() <= 3 && b.size() <= 3 && c.size() <= 3
        )
        && matches!(p_plain, AmalgamVerdict::HoldsUpTo { .. });
    conclude(
        7,
        "graphs amalgamate disjointly to size 4; pairs fail disjointly (≤ 3) but amalgamate plainly",
        started,
        Duration::from_secs(120),
        pass,
    );
}

#[test]
fn acceptance_08_limit_build_and_isomorphic_cores() {
    let started = Instant::now();
    let spec = FraisseClassSpec::builtin(BuiltinClass::Graphs);
    let one = build_limit(&spec, 24, 3, 1).unwrap();
    let two = build_limit(&spec, 24, 3, 2).unwrap();
    let report = check_limit_properties(&one.structure, &spec, 3, Some(one.core), 1, 30).unwrap();
    let (core1, _) = induced_substructure(&one.structure, one.core);
    let (core2, _) = induced_substructure(&two.structure, two.core);
    let pass = one.structure.size() == 24
        && !one.core.is_empty()
        && report.clause2_core_rate == Some(1.0)
        && report.clause1_rate == 1.0
        && find_isomorphism(&core1, &core2).is_some();
    conclude(
        8,
        "24-element graph limit: every depth-3 extension over the core realized; cores isomorphic across seeds",
        started,
        Duration::from_secs(120),
        pass,
    );
}

#[test]
fn acceptance_09_involvement_runs() {
    let started = Instant::now();
    let graphs = run_involvement(
        BuiltinClass::Graphs,
        &ClosureOperator::identity(),
        SigmaTarget::parse("(0 1)", 8).unwrap(),
        12,
        64,
    )
    .unwrap();
    let budget_first = Duration::from_secs(120);
    let pass_graphs = graphs.success
        && graphs.color_condition_rate == 1.0
        && graphs.domain_size >= 12
        && graphs.stages.len() == 24;
    assert!(started.elapsed() <= budget_first);
    let started_pairs = Instant::now();
    let pairs = run_involvement(
        BuiltinClass::EquivalencePairs,
        &ClosureOperator::add_partners(),
        SigmaTarget::parse("(0 1 2)", 8).unwrap(),
        9,
        64,
    )
    .unwrap();
    let pass_pairs = pairs.success && pairs.color_condition_rate == 1.0 && pairs.domain_size >= 9;
    conclude(
        9,
        "color-permuting runs: graphs/identity with a transposition, pairs/add-partners with a 3-cycle",
        started_pairs,
        Duration::from_secs(120),
        pass_graphs && pass_pairs,
    );
}

#[test]
fn acceptance_10_permutation_decomposition() {
    let started = Instant::now();
    let report = props::run_suite("decompose", 10).unwrap();
    conclude(
        10,
        "composition identity and stabilizer memberships on 500 seeded decompositions (|T| ≤ 12)",
        started,
        Duration::from_secs(10),
        report.all_passed() && report.passed == 500,
    );
}

#[test]
fn acceptance_11_transversal_quotient_homomorphism() {
    let started = Instant::now();
    let report = props::run_suite("quotient-hom", 11).unwrap();
    // 200 sampled equivariant elements, all 40000 ordered pairs, plus an
    // explicit preimage for each of the 24 target permutations.
    let mut surjective = true;
    let mut targets = 0;
    let mut idx: Vec<usize> = (0..4).collect();
    permute_all(&mut idx, &mut |images| {
        let sigma = Perm::from_images(images.to_vec()).unwrap();
        let pre = equivariant_from(2, &sigma, &[0; 4]).unwrap();
        surjective &= transversal_quotient(2, 4, &pre).unwrap() == sigma;
        targets += 1;
    });
    conclude(
        11,
        "transversal quotient is a surjective homomorphism onto S_4 for a free C2 action",
        started,
        Duration::from_secs(10),
        report.all_passed() && surjective && targets == 24,
    );
}

fn permute_all(idx: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    fn rec(idx: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == idx.len() {
            visit(idx);
            return;
        }
        for i in k..idx.len() {
            idx.swap(k, i);
            rec(idx, k + 1, visit);
            idx.swap(k, i);
        }
    }
    rec(idx, 0, visit);
}

#[test]
fn acceptance_12_token_scale_bireducibility() {
    let started = Instant::now();
    let report = props::run_suite("bireducibility", 12).unwrap();
    conclude(
        12,
        "both token-scale reductions preserve and reflect equivalence on 200+200 seeded pairs",
        started,
        Duration::from_secs(30),
        report.all_passed() && report.passed == 400,
    );
}

#[test]
fn acceptance_13_support_axioms_and_compat() {
    let started = Instant::now();
    let bounds = Bounds {
        set_size: 3,
        witness_search: 24,
    };
    let mut inst = catalog::load_instance("pairs-limit").unwrap();
    let supp = SupportFunction::pair_class_index();
    let axioms = check_support_axioms(&supp, &mut inst, &[1, 2, 3], bounds).unwrap();
    let compat = check_support_rank_compat(&supp, &mut inst, 3, bounds).unwrap();
    conclude(
        13,
        "pair-indexing support satisfies the axioms and supp(aB)=supp(B) on finite-rank pairs",
        started,
        Duration::from_secs(60),
        axioms.passes() && compat.violations.is_empty() && compat.finite_rank_cases > 0,
    );
}
