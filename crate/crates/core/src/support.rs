//! Support functions, the permutation decomposition, and token-scale
//! sequence/injection reductions.
//!
//! Reals are replaced by opaque string tokens throughout: the two
//! equivalences only ever compare values for equality, so tokens carry
//! all the structure the checks need.

use crate::closure::{Bounds, Verdict, Witness};
use crate::error::{Error, Result};
use crate::instance::ActionInstance;
use crate::perm::Perm;
use crate::set::ElemSet;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

// ---------------------------------------------------------------------
// Support functions.

#[derive(Debug, Clone)]
pub enum SupportRule {
    ConstantEmpty,
    /// On an equivalence-pairs instance: the index of each element's
    /// class, classes numbered by their least element in order.
    PairClassIndex,
    /// `{0}` for every nonempty set; fails indiscernibility.
    PinnedIndex,
    Table(BTreeMap<Vec<usize>, Vec<usize>>),
}

#[derive(Debug, Clone)]
pub struct SupportFunction {
    pub name: String,
    pub rule: SupportRule,
}

impl SupportFunction {
    pub fn constant_empty() -> Self {
        SupportFunction {
            name: "constant-empty".into(),
            rule: SupportRule::ConstantEmpty,
        }
    }

    pub fn pair_class_index() -> Self {
        SupportFunction {
            name: "pair-index".into(),
            rule: SupportRule::PairClassIndex,
        }
    }

    pub fn pinned_index() -> Self {
        SupportFunction {
            name: "pinned-0".into(),
            rule: SupportRule::PinnedIndex,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "constant-empty" | "empty" => Self::constant_empty(),
            "pair-index" => Self::pair_class_index(),
            "pinned-0" => Self::pinned_index(),
            other => return Err(Error::UnknownBuiltin(format!("support function {other}"))),
        })
    }

    pub fn eval(&self, inst: &ActionInstance, a: ElemSet) -> Result<BTreeSet<usize>> {
        match &self.rule {
            SupportRule::ConstantEmpty => Ok(BTreeSet::new()),
            SupportRule::PinnedIndex => Ok(if a.is_empty() {
                BTreeSet::new()
            } else {
                BTreeSet::from([0])
            }),
            SupportRule::PairClassIndex => {
                let m = inst.structure();
                let rel = m.signature().index_of("E").ok_or_else(|| {
                    Error::Precondition("pair-index needs an equivalence relation".into())
                })?;
                let least_of = |x: usize| -> usize {
                    (0..m.size())
                        .filter(|&y| m.holds(rel, &[x, y]))
                        .min()
                        .unwrap_or(x)
                };
                let class_leasts: Vec<usize> =
                    (0..m.size()).filter(|&y| least_of(y) == y).collect();
                let mut out = BTreeSet::new();
                for x in a.iter() {
                    let least = least_of(x);
                    let index = class_leasts
                        .iter()
                        .position(|&l| l == least)
                        .expect("class least recorded");
                    out.insert(index);
                }
                Ok(out)
            }
            SupportRule::Table(t) => Ok(t
                .get(&a.to_vec())
                .cloned()
                .unwrap_or_default()
                .into_iter()
                .collect()),
        }
    }
}

fn congruent_index_sets(
    u: &BTreeSet<usize>,
    v: &BTreeSet<usize>,
    window: usize,
) -> Vec<BTreeSet<usize>> {
    // v' ≅_u v: same trace on u, same count outside, drawn from the
    // index window.
    let trace: BTreeSet<usize> = u.intersection(v).copied().collect();
    let outside = v.len() - trace.len();
    let pool: Vec<usize> = (0..window).filter(|i| !u.contains(i)).collect();
    let mut out = vec![];
    let mut chosen: Vec<usize> = vec![];
    fn rec(
        pool: &[usize],
        start: usize,
        left: usize,
        chosen: &mut Vec<usize>,
        trace: &BTreeSet<usize>,
        out: &mut Vec<BTreeSet<usize>>,
    ) {
        if left == 0 {
            let mut s = trace.clone();
            s.extend(chosen.iter().copied());
            out.push(s);
            return;
        }
        if start + left > pool.len() {
            return;
        }
        for i in start..=pool.len() - left {
            chosen.push(pool[i]);
            rec(pool, i + 1, left - 1, chosen, trace, out);
            chosen.pop();
        }
    }
    rec(&pool, 0, outside, &mut chosen, &trace, &mut out);
    out
}

/// Axiom checks for a support function: (1) monotone on sampled nested
/// pairs, (2) some nonempty support exists, (3) every congruent
/// re-indexing of a support is realized by a congruent copy.
pub fn check_support_axioms(
    supp: &SupportFunction,
    inst: &mut ActionInstance,
    which: &[u8],
    bounds: Bounds,
) -> Result<Verdict> {
    if let Some(e) = inst.as_extendable_mut() {
        e.ensure_size(bounds.set_size * 2 + 2)?;
    }
    let window = inst.universe();
    let subsets: Vec<ElemSet> = window.subsets_up_to(bounds.set_size);
    let index_window = bounds.set_size + 2;
    let mut budget_hit = false;

    if which.contains(&1) {
        for &a in &subsets {
            for &b in &subsets {
                if !a.is_subset(b) {
                    continue;
                }
                let sa = supp.eval(inst, a)?;
                let sb = supp.eval(inst, b)?;
                if !sa.is_subset(&sb) {
                    return Ok(Verdict::Fails {
                        witness: Witness::Support {
                            axiom: 1,
                            a: a.to_vec(),
                            b: b.to_vec(),
                            target: None,
                            detail: "support not monotone".into(),
                        },
                    });
                }
            }
        }
    }
    if which.contains(&2) {
        let mut found = false;
        for &a in &subsets {
            if !supp.eval(inst, a)?.is_empty() {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(Verdict::Fails {
                witness: Witness::Support {
                    axiom: 2,
                    a: vec![],
                    b: vec![],
                    target: None,
                    detail: "every sampled support is empty".into(),
                },
            });
        }
    }
    if which.contains(&3) {
        for &a in &subsets {
            for &b in &subsets {
                if !a.is_subset(b) || a == b {
                    continue;
                }
                let u = supp.eval(inst, a)?;
                let v = supp.eval(inst, b)?;
                for target in congruent_index_sets(&u, &v, index_window) {
                    match find_congruent_copy_with_support(inst, supp, a, b, &target, bounds)? {
                        CopySearch::Found => {}
                        CopySearch::Limited => budget_hit = true,
                        CopySearch::Missing => {
                            return Ok(Verdict::Fails {
                                witness: Witness::Support {
                                    axiom: 3,
                                    a: a.to_vec(),
                                    b: b.to_vec(),
                                    target: Some(target.into_iter().collect()),
                                    detail: "no congruent copy realizes the re-indexed support"
                                        .into(),
                                },
                            });
                        }
                    }
                }
            }
        }
    }
    if budget_hit {
        Ok(Verdict::Unresolved {
            bounds,
            detail: "witness search for a congruent copy hit the growth bound".into(),
        })
    } else if inst.is_fixed() {
        Ok(Verdict::Holds)
    } else {
        Ok(Verdict::HoldsWithin { bounds })
    }
}

enum CopySearch {
    Found,
    Missing,
    Limited,
}

/// Searches for `B' ≅_A B` with `supp(B') = target`, growing extendable
/// instances toward the witness bound when the current universe has none.
fn find_congruent_copy_with_support(
    inst: &mut ActionInstance,
    supp: &SupportFunction,
    a: ElemSet,
    b: ElemSet,
    target: &BTreeSet<usize>,
    bounds: Bounds,
) -> Result<CopySearch> {
    loop {
        let free = b.minus(a).len();
        let candidates: Vec<ElemSet> = inst
            .universe()
            .minus(a)
            .combinations(free)
            .into_iter()
            .map(|s| s.union(a))
            .collect();
        for cand in candidates {
            if supp.eval(inst, cand)? != *target {
                continue;
            }
            if inst.congruence_witness(b, cand, a)?.is_some() {
                return Ok(CopySearch::Found);
            }
        }
        match inst.as_extendable_mut() {
            Some(e) if e.size() + 2 <= bounds.witness_search => {
                let next = e.size() + 2;
                e.ensure_size(next)?;
            }
            Some(_) => return Ok(CopySearch::Limited),
            None => return Ok(CopySearch::Missing),
        }
    }
}

/// Compatibility of a support function with the rank recursion: whenever
/// the disjunctive rank of `a` over `B` comes out finite, `supp(aB)` must
/// equal `supp(B)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompatReport {
    pub checked: usize,
    pub finite_rank_cases: usize,
    pub violations: Vec<CompatViolation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompatViolation {
    pub element: usize,
    pub base: Vec<usize>,
    pub supp_base: Vec<usize>,
    pub supp_with_element: Vec<usize>,
}

pub fn check_support_rank_compat(
    supp: &SupportFunction,
    inst: &mut ActionInstance,
    depth: usize,
    bounds: Bounds,
) -> Result<CompatReport> {
    if let Some(e) = inst.as_extendable_mut() {
        e.ensure_size(bounds.set_size * 2 + 2)?;
    }
    let subsets: Vec<ElemSet> = inst.universe().subsets_up_to(bounds.set_size);
    // One rank engine across the whole sweep, so states memoize.  The
    // fixed engine borrows a local copy of the group, leaving the
    // instance free for support evaluation.
    enum Engine<'g> {
        Fixed(crate::rank::FixedRankEngine<'g>),
        Typed(
            crate::rank::TypedRankEngine,
            crate::structures::FinStructure,
        ),
    }
    let owned_group = inst.as_fixed().map(|f| f.group.clone());
    let mut engine = match (&owned_group, &mut *inst) {
        (Some(group), _) => Engine::Fixed(crate::rank::FixedRankEngine::new(group, true)),
        (None, ActionInstance::Extendable(e)) => Engine::Typed(
            crate::rank::TypedRankEngine::new(e.spec(), true, depth),
            e.structure().clone(),
        ),
        (None, ActionInstance::Fixed(_)) => unreachable!(),
    };
    let mut finite = |a: usize, b: ElemSet| -> Result<bool> {
        Ok(match &mut engine {
            Engine::Fixed(fixed) => {
                let _ = fixed.rank(a, b);
                true
            }
            Engine::Typed(typed, snapshot) => typed.rank(snapshot, a, b)?.is_finite(),
        })
    };
    let mut checked = 0;
    let mut finite_cases = 0;
    let mut violations = vec![];
    for &b in &subsets {
        for a in inst.universe().iter() {
            if b.contains(a) {
                continue;
            }
            checked += 1;
            if !finite(a, b)? {
                continue;
            }
            finite_cases += 1;
            let sb = supp.eval(inst, b)?;
            let sab = supp.eval(inst, b.with(a))?;
            if sb != sab {
                violations.push(CompatViolation {
                    element: a,
                    base: b.to_vec(),
                    supp_base: sb.into_iter().collect(),
                    supp_with_element: sab.into_iter().collect(),
                });
            }
        }
    }
    Ok(CompatReport {
        checked,
        finite_rank_cases: finite_cases,
        violations,
    })
}

// ---------------------------------------------------------------------
// Permutation decomposition.

/// Splits `pi` as `pi2 ∘ pi1 ∘ pi0` with `pi0 = pi2` an involution fixing
/// `v` pointwise and `pi1` fixing `u` pointwise, following the five-case
/// formula.  Requires `pi` to fix `u ∩ v` pointwise and `w` to contain
/// the support of `pi` together with `u` and `v`; the involution swaps
/// `u ∖ v` with fresh points outside `w`.
pub fn decompose_permutation(
    pi: &Perm,
    u: ElemSet,
    v: ElemSet,
    w: ElemSet,
) -> Result<(Perm, Perm, Perm)> {
    let t = pi.degree();
    if !u.union(v).union(w).is_subset(ElemSet::full(t)) {
        return Err(Error::OutOfUniverse(
            u.union(v).union(w).iter().find(|&x| x >= t).unwrap(),
        ));
    }
    if !pi.support().union(u).union(v).is_subset(w) {
        return Err(Error::Precondition(
            "w must contain the support of pi together with u and v".into(),
        ));
    }
    if !pi.fixes_pointwise(u.intersect(v)) {
        return Err(Error::Precondition("pi must fix u ∩ v pointwise".into()));
    }
    let moved: Vec<usize> = u.minus(v).to_vec();
    let fresh: Vec<usize> = ElemSet::full(t).minus(w).iter().take(moved.len()).collect();
    if fresh.len() < moved.len() {
        return Err(Error::DomainTooSmall(format!(
            "need {} points outside w, found {}",
            moved.len(),
            fresh.len()
        )));
    }
    let mut sigma_images: Vec<usize> = (0..t).collect();
    for (&x, &y) in moved.iter().zip(&fresh) {
        sigma_images[x] = y;
        sigma_images[y] = x;
    }
    let sigma = Perm::from_images(sigma_images)?;
    let fresh_set: ElemSet = fresh.iter().copied().collect();
    let u_minus_v = u.minus(v);

    let mut pi1_images = vec![0; t];
    for a in 0..t {
        pi1_images[a] = if fresh_set.contains(a) {
            let back = pi.apply(sigma.apply(a));
            if u_minus_v.contains(back) {
                sigma.apply(back)
            } else {
                back
            }
        } else if !u_minus_v.contains(a) && u_minus_v.contains(pi.apply(a)) {
            sigma.apply(pi.apply(a))
        } else if u.contains(a) {
            a
        } else {
            pi.apply(a)
        };
    }
    let pi1 = Perm::from_images(pi1_images)?;

    let composed = sigma.compose(&pi1).compose(&sigma);
    if composed != *pi {
        return Err(Error::Precondition(
            "decomposition identity failed; preconditions violated".into(),
        ));
    }
    if !pi1.fixes_setwise(u) || !sigma.fixes_setwise(v) {
        return Err(Error::Precondition(
            "stabilizer membership failed; preconditions violated".into(),
        ));
    }
    Ok((sigma.clone(), pi1, sigma))
}

// ---------------------------------------------------------------------
// Token sequences and windowed injections.

/// A finite-support sequence of opaque tokens with a default off-support
/// token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSeq {
    pub support: BTreeMap<usize, String>,
    pub default: String,
}

impl TokenSeq {
    pub fn new(support: BTreeMap<usize, String>, default: impl Into<String>) -> Self {
        TokenSeq {
            support,
            default: default.into(),
        }
    }

    pub fn get(&self, n: usize) -> &str {
        self.support.get(&n).map_or(&self.default, |s| s.as_str())
    }

    /// Range as a set, off-support default included.
    pub fn range(&self) -> BTreeSet<&str> {
        self.support
            .values()
            .map(|s| s.as_str())
            .chain([self.default.as_str()])
            .collect()
    }
}

/// Range-set equality.
pub fn eplus_equiv(p: &TokenSeq, q: &TokenSeq) -> bool {
    p.range() == q.range()
}

/// A window of a token-valued injection out of a free cyclic action:
/// `orbits[t][d]` is the value at phase `d` of orbit `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QPoint {
    pub delta: usize,
    pub orbits: Vec<Vec<String>>,
}

impl QPoint {
    pub fn new(delta: usize, orbits: Vec<Vec<String>>) -> Result<Self> {
        if orbits.iter().any(|o| o.len() != delta) {
            return Err(Error::WindowMismatch(
                "every orbit column must have one value per phase".into(),
            ));
        }
        Ok(QPoint { delta, orbits })
    }

    pub fn width(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.orbits
            .iter()
            .flatten()
            .all(|tok| seen.insert(tok.as_str()))
    }

    pub fn json(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for (t, col) in self.orbits.iter().enumerate() {
            for (d, tok) in col.iter().enumerate() {
                out.insert(format!("{d},{t}"), tok.clone());
            }
        }
        out
    }

    /// Parses the keyed `"d,t" -> token` document form.
    pub fn from_json(doc: &BTreeMap<String, String>) -> Result<Self> {
        let mut cells: Vec<(usize, usize, String)> = vec![];
        for (key, token) in doc {
            let (d, t) = key
                .split_once(',')
                .ok_or_else(|| Error::MalformedInput(format!("bad window key {key}")))?;
            let d: usize = d
                .trim()
                .parse()
                .map_err(|_| Error::MalformedInput(format!("bad phase in {key}")))?;
            let t: usize = t
                .trim()
                .parse()
                .map_err(|_| Error::MalformedInput(format!("bad orbit in {key}")))?;
            cells.push((d, t, token.clone()));
        }
        let delta = cells.iter().map(|&(d, _, _)| d + 1).max().unwrap_or(0);
        let width = cells.iter().map(|&(_, t, _)| t + 1).max().unwrap_or(0);
        if cells.len() != delta * width {
            return Err(Error::WindowMismatch(format!(
                "expected {delta}x{width} = {} cells, found {}",
                delta * width,
                cells.len()
            )));
        }
        let mut orbits = vec![vec![String::new(); delta]; width];
        for (d, t, token) in cells {
            orbits[t][d] = token;
        }
        QPoint::new(delta, orbits)
    }
}

/// Orbit equality under windowed equivariant permutations: some orbit
/// permutation with per-orbit phase shifts matching all values.  Exact at
/// the window by direct search with per-pair shift precomputation.
pub fn eqy_equiv(y1: &QPoint, y2: &QPoint) -> Result<bool> {
    if y1.delta != y2.delta || y1.width() != y2.width() {
        return Err(Error::WindowMismatch(
            "windows must share delta order and width".into(),
        ));
    }
    let k = y1.delta;
    let m = y1.width();
    // shifts[t][t2] = phase shifts s with y2[t2][(d+s)%k] = y1[t][d] for
    // all d.
    let mut shifts: Vec<Vec<Vec<usize>>> = vec![vec![vec![]; m]; m];
    for t in 0..m {
        for t2 in 0..m {
            for s in 0..k {
                if (0..k).all(|d| y2.orbits[t2][(d + s) % k] == y1.orbits[t][d]) {
                    shifts[t][t2].push(s);
                }
            }
        }
    }
    fn rec(shifts: &[Vec<Vec<usize>>], t: usize, used: &mut Vec<bool>) -> bool {
        if t == shifts.len() {
            return true;
        }
        for t2 in 0..used.len() {
            if !used[t2] || shifts[t][t2].is_empty() {
                continue;
            }
            used[t2] = false;
            if rec(shifts, t + 1, used) {
                return true;
            }
            used[t2] = true;
        }
        false
    }
    let mut available = vec![true; m];
    Ok(rec(&shifts, 0, &mut available))
}

/// Tokens composed by an injective pairing, so distinct base tokens yield
/// disjoint composite ranges.
fn compose_token(token: &str, n: usize) -> String {
    format!("{token}#{n}")
}

/// The sequence-to-injection reduction: orbit `m` carries the composites
/// of `p(m)` across phases.
pub fn reduce_eplus_to_eqy(p: &TokenSeq, delta: usize, width: usize) -> Result<QPoint> {
    if let Some(&max) = p.support.keys().max() {
        if max >= width {
            return Err(Error::WindowMismatch(format!(
                "window width {width} does not cover support index {max}"
            )));
        }
    }
    let orbits = (0..width)
        .map(|m| (0..delta).map(|n| compose_token(p.get(m), n)).collect())
        .collect();
    QPoint::new(delta, orbits)
}

/// The injection-to-sequence reduction: one composite token per window
/// position, tupling the phase-rotated column starting there.
pub fn reduce_eqy_to_eplus(y: &QPoint) -> TokenSeq {
    let k = y.delta;
    let mut support = BTreeMap::new();
    let mut n = 0;
    for t in 0..y.width() {
        for d in 0..k {
            let tuple: Vec<&str> = (0..k).map(|i| y.orbits[t][(d + i) % k].as_str()).collect();
            support.insert(n, format!("[{}]", tuple.join(";")));
            n += 1;
        }
    }
    TokenSeq::new(support, "_")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_empty_fails_only_nontriviality() {
        let mut inst = catalog::load_instance("s4").unwrap();
        let supp = SupportFunction::constant_empty();
        let bounds = Bounds {
            set_size: 3,
            witness_search: 4,
        };
        assert!(check_support_axioms(&supp, &mut inst, &[1, 3], bounds)
            .unwrap()
            .passes());
        assert!(matches!(
            check_support_axioms(&supp, &mut inst, &[2], bounds).unwrap(),
            Verdict::Fails { .. }
        ));
    }

    #[test]
    fn pinned_support_fails_indiscernibility() {
        let mut inst = catalog::load_instance("s4").unwrap();
        let supp = SupportFunction::pinned_index();
        let bounds = Bounds {
            set_size: 2,
            witness_search: 4,
        };
        let v = check_support_axioms(&supp, &mut inst, &[3], bounds).unwrap();
        match v {
            Verdict::Fails {
                witness: Witness::Support { axiom, .. },
            } => assert_eq!(axiom, 3),
            other => panic!("expected axiom-3 failure, got {other:?}"),
        }
    }

    #[test]
    fn pair_index_axioms_hold_on_pairs_limit() {
        let mut inst = catalog::load_instance("pairs-limit").unwrap();
        let supp = SupportFunction::pair_class_index();
        let bounds = Bounds {
            set_size: 2,
            witness_search: 20,
        };
        let v = check_support_axioms(&supp, &mut inst, &[1, 2, 3], bounds).unwrap();
        assert!(v.passes(), "{v:?}");
    }

    #[test]
    fn axiom_verdicts_do_not_downgrade_with_bigger_bounds() {
        let supp = SupportFunction::pair_class_index();
        let mut small = catalog::load_instance("pairs-limit").unwrap();
        let tight = Bounds {
            set_size: 2,
            witness_search: 12,
        };
        let holds_tight = check_support_axioms(&supp, &mut small, &[1, 2, 3], tight)
            .unwrap()
            .passes();
        let mut large = catalog::load_instance("pairs-limit").unwrap();
        let wide = Bounds {
            set_size: 2,
            witness_search: 20,
        };
        let holds_wide = check_support_axioms(&supp, &mut large, &[1, 2, 3], wide)
            .unwrap()
            .passes();
        assert!(!holds_tight || holds_wide);
    }

    #[test]
    fn pair_index_compat_with_rank() {
        let mut inst = catalog::load_instance("pairs-limit").unwrap();
        let supp = SupportFunction::pair_class_index();
        let report = check_support_rank_compat(
            &supp,
            &mut inst,
            3,
            Bounds {
                set_size: 2,
                witness_search: 16,
            },
        )
        .unwrap();
        assert!(report.finite_rank_cases > 0, "partners have finite rank");
        assert!(report.violations.is_empty(), "{:?}", report.violations);
    }

    #[test]
    fn constant_empty_compat_holds_vacuously_on_fixed() {
        // Every rank is finite on a fixed instance and the supports are
        // all empty, so the compatibility sweep finds no violations.
        let mut inst = catalog::load_instance("s4").unwrap();
        let report = check_support_rank_compat(
            &SupportFunction::constant_empty(),
            &mut inst,
            4,
            Bounds {
                set_size: 3,
                witness_search: 4,
            },
        )
        .unwrap();
        assert_eq!(report.finite_rank_cases, report.checked);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn constant_default_sequence_reduces_to_repeated_pattern() {
        let p = TokenSeq::new(BTreeMap::new(), "_");
        let y = reduce_eplus_to_eqy(&p, 3, 4).unwrap();
        assert!(y.orbits.iter().all(|col| col == &y.orbits[0]));
        let back = reduce_eqy_to_eplus(&y);
        assert_eq!(
            back.range().len(),
            4,
            "one composite per phase shift, plus the default"
        );
    }

    #[test]
    fn decompose_u_inside_v_gives_pi_back() {
        // u ⊆ v: the involution is trivial and pi1 = pi off u.
        let pi = Perm::from_cycles(8, &[&[4, 5, 6]]).unwrap();
        let u: ElemSet = [0, 1].into_iter().collect();
        let v: ElemSet = [0, 1, 2].into_iter().collect();
        let w: ElemSet = ElemSet::full(7);
        let (p0, p1, p2) = decompose_permutation(&pi, u, v, w).unwrap();
        assert!(p0.is_identity() && p2.is_identity());
        assert_eq!(p1, pi);
    }

    #[test]
    fn decompose_identity_permutation() {
        let pi = Perm::identity(6);
        let u: ElemSet = [0, 2].into_iter().collect();
        let v: ElemSet = [1].into_iter().collect();
        let w: ElemSet = [0, 1, 2, 3].into_iter().collect();
        let (p0, p1, p2) = decompose_permutation(&pi, u, v, w).unwrap();
        assert_eq!(p2.compose(&p1).compose(&p0), pi);
    }

    #[test]
    fn decompose_seeded_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = 12;
        for _ in 0..200 {
            let u: ElemSet = (0..t).filter(|_| rng.gen_bool(0.25)).take(3).collect();
            let v: ElemSet = (0..t).filter(|_| rng.gen_bool(0.25)).take(3).collect();
            // pi fixes u ∩ v pointwise with support inside {0..7}.
            let mut pool: Vec<usize> = (0..8).filter(|x| !u.intersect(v).contains(*x)).collect();
            for i in (1..pool.len()).rev() {
                let j = rng.gen_range(0..=i);
                pool.swap(i, j);
            }
            let cycle_len = rng.gen_range(0..=pool.len().min(6));
            let mut images: Vec<usize> = (0..t).collect();
            if cycle_len >= 2 {
                for w in 0..cycle_len {
                    images[pool[w]] = pool[(w + 1) % cycle_len];
                }
            }
            let pi = Perm::from_images(images).unwrap();
            let w: ElemSet = ElemSet::full(8).union(u).union(v);
            if ElemSet::full(t).minus(w).len() < u.minus(v).len() {
                continue;
            }
            let (p0, p1, p2) = decompose_permutation(&pi, u, v, w).unwrap();
            assert_eq!(p2.compose(&p1).compose(&p0), pi);
            assert!(p1.fixes_setwise(u));
            assert!(p0.fixes_setwise(v));
            assert!(p0.compose(&p0).is_identity());
        }
    }

    fn seq(pairs: &[(usize, &str)]) -> TokenSeq {
        TokenSeq::new(
            pairs.iter().map(|&(n, s)| (n, s.to_string())).collect(),
            "_",
        )
    }

    #[test]
    fn eplus_examples() {
        let p = seq(&[(0, "a"), (1, "b")]);
        let q = seq(&[(3, "b"), (7, "a")]);
        let r = seq(&[(0, "a")]);
        assert!(eplus_equiv(&p, &p));
        assert!(eplus_equiv(&p, &q));
        assert!(!eplus_equiv(&p, &r));
    }

    #[test]
    fn eqy_equiv_examples() {
        let y1 = QPoint::new(
            2,
            vec![vec!["a".into(), "b".into()], vec!["c".into(), "d".into()]],
        )
        .unwrap();
        assert!(eqy_equiv(&y1, &y1).unwrap());
        // Swapping the two orbits is an equivariant move.
        let y2 = QPoint::new(
            2,
            vec![vec!["c".into(), "d".into()], vec!["a".into(), "b".into()]],
        )
        .unwrap();
        assert!(eqy_equiv(&y1, &y2).unwrap());
        // Replacing one token with a fresh one is not.
        let y3 = QPoint::new(
            2,
            vec![vec!["a".into(), "b".into()], vec!["c".into(), "x".into()]],
        )
        .unwrap();
        assert!(!eqy_equiv(&y1, &y3).unwrap());
        // Phase rotation of one orbit is equivariant.
        let y4 = QPoint::new(
            2,
            vec![vec!["b".into(), "a".into()], vec!["c".into(), "d".into()]],
        )
        .unwrap();
        assert!(eqy_equiv(&y1, &y4).unwrap());
    }

    #[test]
    fn reductions_preserve_and_reflect_on_examples() {
        let p = seq(&[(0, "a"), (1, "b")]);
        let q = seq(&[(0, "b"), (2, "a")]);
        let r = seq(&[(0, "a"), (1, "c")]);
        let yp = reduce_eplus_to_eqy(&p, 3, 5).unwrap();
        let yq = reduce_eplus_to_eqy(&q, 3, 5).unwrap();
        let yr = reduce_eplus_to_eqy(&r, 3, 5).unwrap();
        assert!(eqy_equiv(&yp, &yq).unwrap());
        assert!(!eqy_equiv(&yp, &yr).unwrap());

        let y1 = QPoint::new(
            2,
            vec![vec!["a".into(), "b".into()], vec!["c".into(), "d".into()]],
        )
        .unwrap();
        let y2 = QPoint::new(
            2,
            vec![vec!["d".into(), "c".into()], vec!["b".into(), "a".into()]],
        )
        .unwrap();
        assert!(eqy_equiv(&y1, &y2).unwrap());
        assert!(eplus_equiv(
            &reduce_eqy_to_eplus(&y1),
            &reduce_eqy_to_eplus(&y2)
        ));
        let y3 = QPoint::new(
            2,
            vec![vec!["a".into(), "b".into()], vec!["c".into(), "x".into()]],
        )
        .unwrap();
        assert!(!eplus_equiv(
            &reduce_eqy_to_eplus(&y1),
            &reduce_eqy_to_eplus(&y3)
        ));
    }
}
