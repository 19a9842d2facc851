//! Invariant closure operators and the disjointifying property.
//!
//! A closure operator here is a rule evaluable on any queried subset:
//! extensive, monotone, idempotent (all checkable), with invariance
//! checked on group generators.  The derived independence relation is
//! `A ⫫_C B  iff  A ∩ cl(BC) ⊆ cl(C) and B ∩ cl(AC) ⊆ cl(C)`, and the
//! disjointifying property is checked in any of its four equivalent
//! forms.  Fixed instances are exhausted and the verdict is exact;
//! extendable instances get bounded scans with explicit three-valued
//! verdicts, so a bound-limited sweep is never reported as a theorem.

use crate::error::{Error, Result};
use crate::groups::PermGroup;
use crate::instance::ActionInstance;
use crate::set::ElemSet;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Explicit subset-to-subset table for a fixed domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureTable {
    pub domain: usize,
    pub map: BTreeMap<u64, u64>,
}

impl ClosureTable {
    pub fn get(&self, a: ElemSet) -> ElemSet {
        ElemSet::from_mask(self.map[&a.mask()])
    }
}

#[derive(Debug, Clone)]
pub enum ClosureRule {
    Identity,
    ConstantFull,
    /// The set together with everything it is `E`-related to; the natural
    /// closure on equivalence structures.
    AddPartners,
    /// Fixed points of the pointwise stabilizer; on extendable instances,
    /// elements whose type over the set is uniquely realized.
    DefinableClosure,
    /// `{a : rank(a, B) finite at the given depth}`; with the disjunctive
    /// clause enabled this is the minimum disjointifying closure candidate,
    /// without it the pseudo-algebraic closure.
    RankFinite {
        clause2: bool,
        depth: usize,
    },
    Table(ClosureTable),
}

#[derive(Debug, Clone)]
pub struct ClosureOperator {
    pub name: String,
    pub rule: ClosureRule,
}

impl ClosureOperator {
    pub fn identity() -> Self {
        ClosureOperator {
            name: "identity".into(),
            rule: ClosureRule::Identity,
        }
    }

    pub fn constant_full() -> Self {
        ClosureOperator {
            name: "constant-full".into(),
            rule: ClosureRule::ConstantFull,
        }
    }

    pub fn add_partners() -> Self {
        ClosureOperator {
            name: "add-partners".into(),
            rule: ClosureRule::AddPartners,
        }
    }

    pub fn definable_closure() -> Self {
        ClosureOperator {
            name: "dcl-fix".into(),
            rule: ClosureRule::DefinableClosure,
        }
    }

    pub fn rank_closure(depth: usize) -> Self {
        ClosureOperator {
            name: format!("cl-min@{depth}"),
            rule: ClosureRule::RankFinite {
                clause2: true,
                depth,
            },
        }
    }

    pub fn deissler_closure(depth: usize) -> Self {
        ClosureOperator {
            name: format!("dcl@{depth}"),
            rule: ClosureRule::RankFinite {
                clause2: false,
                depth,
            },
        }
    }

    pub fn from_table(name: impl Into<String>, table: ClosureTable) -> Self {
        ClosureOperator {
            name: name.into(),
            rule: ClosureRule::Table(table),
        }
    }

    /// Looks up a catalog operator by name.
    pub fn by_name(name: &str, depth: usize) -> Result<Self> {
        Ok(match name {
            "identity" => Self::identity(),
            "constant-full" | "full" => Self::constant_full(),
            "add-partners" => Self::add_partners(),
            "dcl-fix" | "definable" => Self::definable_closure(),
            "cl-min" => Self::rank_closure(depth),
            "dcl" => Self::deissler_closure(depth),
            other => return Err(Error::UnknownBuiltin(format!("closure operator {other}"))),
        })
    }

    pub fn eval(&self, inst: &mut ActionInstance, a: ElemSet) -> Result<ElemSet> {
        match &self.rule {
            ClosureRule::Identity => Ok(a),
            ClosureRule::ConstantFull => Ok(inst.universe()),
            ClosureRule::AddPartners => {
                let m = inst.structure();
                let Some(rel) = m.signature().index_of("E") else {
                    return Ok(a);
                };
                let mut out = a;
                for t in m.table(rel) {
                    if a.contains(t[0]) {
                        out.insert(t[1]);
                    }
                    if a.contains(t[1]) {
                        out.insert(t[0]);
                    }
                }
                Ok(out)
            }
            ClosureRule::DefinableClosure => match inst {
                ActionInstance::Fixed(f) => {
                    let stab = f.group.pointwise_stabilizer(a);
                    Ok((0..f.group.domain_size())
                        .filter(|&x| stab.generators().iter().all(|g| g.apply(x) == x))
                        .collect())
                }
                ActionInstance::Extendable(e) => {
                    let mut out = a;
                    for x in 0..e.size() {
                        if a.contains(x) {
                            continue;
                        }
                        let ty = e.type_over(x, a);
                        if e.type_is_algebraic(a, &ty)? {
                            out.insert(x);
                        }
                    }
                    Ok(out)
                }
            },
            ClosureRule::RankFinite { clause2, depth } => {
                let mut out = a;
                for x in inst.universe().iter() {
                    if a.contains(x) {
                        continue;
                    }
                    if crate::rank::rank_value(inst, x, a, *depth, *clause2)?.is_finite() {
                        out.insert(x);
                    }
                }
                Ok(out)
            }
            ClosureRule::Table(t) => Ok(t.get(a)),
        }
    }

    /// Evaluates a structure-local rule on a bare finite structure (no
    /// instance context).  Rank-based rules need a class and are rejected.
    pub fn eval_on_structure(
        &self,
        m: &crate::structures::FinStructure,
        a: ElemSet,
    ) -> Result<ElemSet> {
        match &self.rule {
            ClosureRule::Identity => Ok(a),
            ClosureRule::ConstantFull => Ok(m.universe()),
            ClosureRule::AddPartners => {
                let Some(rel) = m.signature().index_of("E") else {
                    return Ok(a);
                };
                let mut out = a;
                for t in m.table(rel) {
                    if a.contains(t[0]) {
                        out.insert(t[1]);
                    }
                    if a.contains(t[1]) {
                        out.insert(t[0]);
                    }
                }
                Ok(out)
            }
            ClosureRule::DefinableClosure => {
                let group = crate::groups::automorphism_group(m);
                let stab = group.pointwise_stabilizer(a);
                Ok((0..m.size())
                    .filter(|&x| stab.generators().iter().all(|g| g.apply(x) == x))
                    .collect())
            }
            ClosureRule::Table(t) => Ok(t.get(a)),
            ClosureRule::RankFinite { .. } => Err(Error::Precondition(
                "rank-based closure needs an action instance".into(),
            )),
        }
    }

    /// Materializes the full table on a fixed instance, for fast
    /// exhaustive scans.
    pub fn materialize(&self, inst: &mut ActionInstance) -> Result<ClosureTable> {
        let n = inst.size();
        let mut map = BTreeMap::new();
        for s in ElemSet::full(n).subsets() {
            map.insert(s.mask(), self.eval(inst, s)?.mask());
        }
        Ok(ClosureTable { domain: n, map })
    }
}

// ---------------------------------------------------------------------
// Verdicts and witnesses.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    /// Maximum size of quantified subsets.
    pub set_size: usize,
    /// Universe cap for witness-realizing growth on extendable instances.
    pub witness_search: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            set_size: 3,
            witness_search: 24,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormWitness {
    pub form: u8,
    pub base: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_a: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_b: Option<Vec<usize>>,
    pub explanation: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    Axiom {
        axiom: String,
        subset: Vec<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        other: Option<Vec<usize>>,
        detail: String,
    },
    Invariance {
        generator: String,
        subset: Vec<usize>,
    },
    Form(FormWitness),
    Support {
        axiom: u8,
        a: Vec<usize>,
        b: Vec<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        target: Option<Vec<usize>>,
        detail: String,
    },
}

/// Three-valued verdict: bound-limited sweeps never upgrade to theorems.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    /// Exhaustively verified.
    Holds,
    /// Verified on the bounded window only.
    HoldsWithin {
        bounds: Bounds,
    },
    Fails {
        witness: Witness,
    },
    Unresolved {
        bounds: Bounds,
        detail: String,
    },
}

impl Verdict {
    pub fn passes(&self) -> bool {
        matches!(self, Verdict::Holds | Verdict::HoldsWithin { .. })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Verdict::Holds | Verdict::Fails { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceQuery {
    pub a: ElemSet,
    pub b: ElemSet,
    pub c: ElemSet,
}

// ---------------------------------------------------------------------
// Axiom and invariance checks.

/// Confirms extensivity, monotonicity (over sampled pairs ordered by
/// inclusion), and idempotence on the sampled subsets.
pub fn validate_closure(
    cl: &ClosureOperator,
    inst: &mut ActionInstance,
    sample: &[ElemSet],
) -> Result<Verdict> {
    for &s in sample {
        let c = cl.eval(inst, s)?;
        if !s.is_subset(c) {
            return Ok(Verdict::Fails {
                witness: Witness::Axiom {
                    axiom: "extensive".into(),
                    subset: s.to_vec(),
                    other: None,
                    detail: format!("cl({s}) = {c} does not contain the argument"),
                },
            });
        }
        let cc = cl.eval(inst, c)?;
        if cc != c {
            return Ok(Verdict::Fails {
                witness: Witness::Axiom {
                    axiom: "idempotent".into(),
                    subset: s.to_vec(),
                    other: Some(c.to_vec()),
                    detail: format!("cl(cl({s})) = {cc} differs from cl({s}) = {c}"),
                },
            });
        }
    }
    for &s in sample {
        for &t in sample {
            if s.is_subset(t) && !cl.eval(inst, s)?.is_subset(cl.eval(inst, t)?) {
                return Ok(Verdict::Fails {
                    witness: Witness::Axiom {
                        axiom: "monotone".into(),
                        subset: s.to_vec(),
                        other: Some(t.to_vec()),
                        detail: "closure of the smaller set escapes the larger's".into(),
                    },
                });
            }
        }
    }
    Ok(Verdict::Holds)
}

/// Checks `π[cl(A)] = cl(π[A])` on group generators (sufficient by
/// composition) against the sampled subsets.  Extendable instances are
/// snapshotted and checked against the snapshot's automorphisms.
pub fn is_invariant(
    cl: &ClosureOperator,
    inst: &mut ActionInstance,
    sample: &[ElemSet],
) -> Result<Verdict> {
    let (gens, exact) = match inst {
        ActionInstance::Fixed(f) => (f.group.generators().to_vec(), true),
        ActionInstance::Extendable(e) => (
            crate::groups::automorphism_group(e.structure())
                .generators()
                .to_vec(),
            false,
        ),
    };
    for &s in sample {
        let closure = cl.eval(inst, s)?;
        for g in &gens {
            let lhs = g.apply_set(closure);
            let rhs = cl.eval(inst, g.apply_set(s))?;
            if lhs != rhs {
                return Ok(Verdict::Fails {
                    witness: Witness::Invariance {
                        generator: g.cycle_string(),
                        subset: s.to_vec(),
                    },
                });
            }
        }
    }
    if exact {
        Ok(Verdict::Holds)
    } else {
        Ok(Verdict::HoldsWithin {
            bounds: Bounds {
                set_size: sample.iter().map(|s| s.len()).max().unwrap_or(0),
                witness_search: inst.size(),
            },
        })
    }
}

/// Both containments of the derived independence relation, literally.
pub fn indep(
    cl: &ClosureOperator,
    inst: &mut ActionInstance,
    q: &IndependenceQuery,
) -> Result<bool> {
    let cl_c = cl.eval(inst, q.c)?;
    let cl_bc = cl.eval(inst, q.b.union(q.c))?;
    let cl_ac = cl.eval(inst, q.a.union(q.c))?;
    Ok(q.a.intersect(cl_bc).is_subset(cl_c) && q.b.intersect(cl_ac).is_subset(cl_c))
}

/// All `b ∈ B ∖ cl(C)` minimal in `B` over `C`: every
/// `b' ∈ (B ∩ cl(bC)) ∖ cl(C)` has `b ∈ cl(b'C)`.
pub fn minimal_elements(
    cl: &ClosureOperator,
    inst: &mut ActionInstance,
    b: ElemSet,
    c: ElemSet,
) -> Result<ElemSet> {
    if !c.is_subset(b) {
        return Err(Error::Precondition(
            "minimal_elements requires C ⊆ B".into(),
        ));
    }
    let cl_c = cl.eval(inst, c)?;
    let mut out = ElemSet::empty();
    for x in b.minus(cl_c).iter() {
        let cl_xc = cl.eval(inst, c.with(x))?;
        let mut minimal = true;
        for y in b.intersect(cl_xc).minus(cl_c).iter() {
            if !cl.eval(inst, c.with(y))?.contains(x) {
                minimal = false;
                break;
            }
        }
        if minimal {
            out.insert(x);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Congruence-class iteration with optional growth.

/// Enumerates sets congruent to `a_set` over `c`.  On fixed instances this
/// is the exact orbit of the set under the pointwise stabilizer; on
/// extendable instances, the snapshot candidates followed by one attempt
/// at a freshly realized copy (growing the universe within `limit`).
fn congruent_sets(
    inst: &mut ActionInstance,
    a_set: ElemSet,
    c: ElemSet,
    limit: usize,
) -> Result<(Vec<ElemSet>, bool)> {
    match inst {
        ActionInstance::Fixed(f) => {
            let stab = f.group.pointwise_stabilizer(c);
            let mut seen = BTreeSet::from([a_set]);
            let mut queue = vec![a_set];
            while let Some(s) = queue.pop() {
                for g in stab.generators() {
                    let t = g.apply_set(s);
                    if seen.insert(t) {
                        queue.push(t);
                    }
                }
            }
            Ok((seen.into_iter().collect(), true))
        }
        ActionInstance::Extendable(e) => {
            let mut out = vec![];
            let free = a_set.minus(c);
            for cand in e.structure().universe().minus(c).combinations(free.len()) {
                let cand_full = cand.union(a_set.intersect(c));
                if e.congruence_witness(a_set, cand_full, c).is_some() {
                    out.push(cand_full);
                }
            }
            if let Some(fresh) = fresh_congruent_copy(e, a_set, c, limit)? {
                if !out.contains(&fresh) {
                    out.push(fresh);
                }
            }
            Ok((out, free.is_empty()))
        }
    }
}

/// Realizes a congruent copy of `a_set` over `c` out of fresh elements,
/// one point at a time with transported types.  Slot positions in each
/// type refer to the base in the order given, so the copy's base simply
/// substitutes copies for originals position by position.
fn fresh_congruent_copy(
    e: &mut crate::instance::ExtendableInstance,
    a_set: ElemSet,
    c: ElemSet,
    limit: usize,
) -> Result<Option<ElemSet>> {
    let free: Vec<usize> = a_set.minus(c).to_vec();
    if free.is_empty() {
        return Ok(Some(a_set));
    }
    if e.size() + free.len() > limit.min(crate::MAX_UNIVERSE) {
        return Ok(None);
    }
    let mut placed: Vec<usize> = vec![];
    for (i, &x) in free.iter().enumerate() {
        let mut base_orig: Vec<usize> = c.to_vec();
        base_orig.extend(&free[..i]);
        let ty = crate::fraisse::atoms_of(e.structure(), x, &base_orig);
        let mut base_new: Vec<usize> = c.to_vec();
        base_new.extend(&placed);
        match e.add_realization(&base_new, &ty) {
            Ok(fresh) => placed.push(fresh),
            Err(_) => return Ok(None),
        }
    }
    Ok(Some(c.iter().chain(placed.iter().copied()).collect()))
}

/// Elements congruent to `a` over `c`, plus whether the enumeration is
/// complete.  Extendable instances grow fresh realizations (up to three
/// total) within `limit`; their enumeration is complete only when the
/// type is algebraic.
fn congruent_points(
    inst: &mut ActionInstance,
    a: usize,
    c: ElemSet,
    limit: usize,
) -> Result<(Vec<usize>, bool)> {
    match inst {
        ActionInstance::Fixed(f) => Ok((f.group.orbit_over(a, c).to_vec(), true)),
        ActionInstance::Extendable(e) => {
            if c.contains(a) {
                return Ok((vec![a], true));
            }
            let base = c.to_vec();
            let ty = crate::fraisse::atoms_of(e.structure(), a, &base);
            let mut out: Vec<usize> = (0..e.size())
                .filter(|&x| {
                    !c.contains(x) && crate::fraisse::atoms_of(e.structure(), x, &base) == ty
                })
                .collect();
            if e.type_is_algebraic(c, &ty)? {
                return Ok((out, true));
            }
            if out.len() < 3 && e.size() < limit {
                if let Ok(fresh) = e.add_realization(&base, &ty) {
                    out.push(fresh);
                }
            }
            Ok((out, false))
        }
    }
}

// ---------------------------------------------------------------------
// The disjointifying property, four forms.

struct EvalCtx<'a> {
    cl: &'a ClosureOperator,
    memo: HashMap<u64, ElemSet>,
}

impl<'a> EvalCtx<'a> {
    fn new(cl: &'a ClosureOperator) -> Self {
        EvalCtx {
            cl,
            memo: HashMap::new(),
        }
    }

    /// Closure with memoization; only fixed instances are memoized, since
    /// growth can change a rule's value on the same mask.
    fn eval(&mut self, inst: &mut ActionInstance, s: ElemSet) -> Result<ElemSet> {
        if inst.is_fixed() {
            if let Some(&v) = self.memo.get(&s.mask()) {
                return Ok(v);
            }
        }
        let v = self.cl.eval(inst, s)?;
        if inst.is_fixed() {
            self.memo.insert(s.mask(), v);
        }
        Ok(v)
    }

    fn indep(
        &mut self,
        inst: &mut ActionInstance,
        a: ElemSet,
        b: ElemSet,
        c: ElemSet,
    ) -> Result<bool> {
        let cl_c = self.eval(inst, c)?;
        let cl_bc = self.eval(inst, b.union(c))?;
        let cl_ac = self.eval(inst, a.union(c))?;
        Ok(a.intersect(cl_bc).is_subset(cl_c) && b.intersect(cl_ac).is_subset(cl_c))
    }
}

/// Checks the disjointifying property in the requested form.
///
/// Form 1 quantifies over pairs of finite supersets of every base; form 2
/// over `(B, a)`; form 3 over `(a, b)`; form 4 splits into the two
/// one-point clauses.  Fixed instances are exhausted within
/// `bounds.set_size` (exact when the bound covers the whole domain);
/// extendable instances search witnesses with growth capped by
/// `bounds.witness_search`.
pub fn is_disjointifying(
    cl: &ClosureOperator,
    inst: &mut ActionInstance,
    form: u8,
    bounds: Bounds,
) -> Result<Verdict> {
    if !(1..=4).contains(&form) {
        return Err(Error::Precondition(format!("no such form: {form}")));
    }
    let exact = inst.is_fixed() && bounds.set_size >= inst.size();
    let mut ctx = EvalCtx::new(cl);
    let universe = inst.universe();
    let bases: Vec<ElemSet> = universe.subsets_up_to(bounds.set_size);
    let mut budget_hit = false;

    for &c in &bases {
        match form {
            1 => {
                let supersets: Vec<ElemSet> = universe
                    .minus(c)
                    .subsets_up_to(bounds.set_size)
                    .into_iter()
                    .map(|s| s.union(c))
                    .collect();
                for &a_set in &supersets {
                    for &b_set in &supersets {
                        match exists_congruent_set_indep(inst, &mut ctx, a_set, b_set, c, bounds)? {
                            SearchOutcome::Found => {}
                            SearchOutcome::Exhausted => {
                                return Ok(fails(form, c, FormWitnessData::Sets(a_set, b_set)));
                            }
                            SearchOutcome::BudgetLimited => budget_hit = true,
                        }
                    }
                }
            }
            2 => {
                let supersets: Vec<ElemSet> = universe
                    .minus(c)
                    .subsets_up_to(bounds.set_size)
                    .into_iter()
                    .map(|s| s.union(c))
                    .collect();
                for &b_set in &supersets {
                    for a in universe.iter() {
                        match exists_congruent_point_indep(inst, &mut ctx, a, b_set, c, bounds)? {
                            SearchOutcome::Found => {}
                            SearchOutcome::Exhausted => {
                                return Ok(fails(form, c, FormWitnessData::PointSet(a, b_set)));
                            }
                            SearchOutcome::BudgetLimited => budget_hit = true,
                        }
                    }
                }
            }
            3 => {
                for a in universe.iter() {
                    for b in universe.iter() {
                        match exists_congruent_point_indep(inst, &mut ctx, a, c.with(b), c, bounds)?
                        {
                            SearchOutcome::Found => {}
                            SearchOutcome::Exhausted => {
                                return Ok(fails(form, c, FormWitnessData::Points(a, b)));
                            }
                            SearchOutcome::BudgetLimited => budget_hit = true,
                        }
                    }
                }
            }
            4 => {
                let cl_c = ctx.eval(inst, c)?;
                for a in universe.iter() {
                    if cl_c.contains(a) {
                        continue;
                    }
                    // (a): some a' ≅_C a with a' ⫫_C a.
                    match exists_congruent_point_indep(inst, &mut ctx, a, c.with(a), c, bounds)? {
                        SearchOutcome::Found => {}
                        SearchOutcome::Exhausted => {
                            return Ok(fails(form, c, FormWitnessData::Clause4a(a)));
                        }
                        SearchOutcome::BudgetLimited => budget_hit = true,
                    }
                    // (b): for every b, some a' ≅_C a outside cl(bC).
                    for b in universe.iter() {
                        let (candidates, complete) =
                            congruent_points(inst, a, c, bounds.witness_search)?;
                        let cl_bc = ctx.eval(inst, c.with(b))?;
                        let found = candidates.iter().any(|&a_prime| !cl_bc.contains(a_prime));
                        if !found {
                            if complete {
                                return Ok(fails(form, c, FormWitnessData::Clause4b(a, b)));
                            }
                            budget_hit = true;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    if exact {
        Ok(Verdict::Holds)
    } else if budget_hit {
        Ok(Verdict::Unresolved {
            bounds,
            detail: "witness search hit the growth bound on some query".into(),
        })
    } else {
        Ok(Verdict::HoldsWithin { bounds })
    }
}

enum SearchOutcome {
    Found,
    /// Every candidate inspected and none worked: a genuine failure on
    /// fixed instances.
    Exhausted,
    /// Candidates ran out but growth was bound-limited.
    BudgetLimited,
}

fn exists_congruent_set_indep(
    inst: &mut ActionInstance,
    ctx: &mut EvalCtx,
    a_set: ElemSet,
    b_set: ElemSet,
    c: ElemSet,
    bounds: Bounds,
) -> Result<SearchOutcome> {
    let (candidates, complete) = congruent_sets(inst, a_set, c, bounds.witness_search)?;
    for cand in candidates {
        if ctx.indep(inst, cand, b_set, c)? {
            return Ok(SearchOutcome::Found);
        }
    }
    Ok(if complete {
        SearchOutcome::Exhausted
    } else {
        SearchOutcome::BudgetLimited
    })
}

fn exists_congruent_point_indep(
    inst: &mut ActionInstance,
    ctx: &mut EvalCtx,
    a: usize,
    b_set: ElemSet,
    c: ElemSet,
    bounds: Bounds,
) -> Result<SearchOutcome> {
    let (candidates, complete) = congruent_points(inst, a, c, bounds.witness_search)?;
    for cand in candidates {
        if ctx.indep(inst, ElemSet::singleton(cand), b_set, c)? {
            return Ok(SearchOutcome::Found);
        }
    }
    Ok(if complete {
        SearchOutcome::Exhausted
    } else {
        SearchOutcome::BudgetLimited
    })
}

enum FormWitnessData {
    Sets(ElemSet, ElemSet),
    PointSet(usize, ElemSet),
    Points(usize, usize),
    Clause4a(usize),
    Clause4b(usize, usize),
}

fn fails(form: u8, c: ElemSet, data: FormWitnessData) -> Verdict {
    let mut w = FormWitness {
        form,
        base: c.to_vec(),
        a: None,
        b: None,
        set_a: None,
        set_b: None,
        explanation: String::new(),
    };
    match data {
        FormWitnessData::Sets(a, b) => {
            w.set_a = Some(a.to_vec());
            w.set_b = Some(b.to_vec());
            w.explanation = "no congruent copy of A is independent from B over the base".into();
        }
        FormWitnessData::PointSet(a, b) => {
            w.a = Some(a);
            w.set_b = Some(b.to_vec());
            w.explanation = "no congruent copy of a is independent from B over the base".into();
        }
        FormWitnessData::Points(a, b) => {
            w.a = Some(a);
            w.b = Some(b);
            w.explanation = "no congruent copy of a is independent from b over the base".into();
        }
        FormWitnessData::Clause4a(a) => {
            w.a = Some(a);
            w.explanation = "clause (a): every congruent copy of a is entangled with a".into();
        }
        FormWitnessData::Clause4b(a, b) => {
            w.a = Some(a);
            w.b = Some(b);
            w.explanation = "clause (b): every congruent copy of a lies in cl(bC)".into();
        }
    }
    Verdict::Fails {
        witness: Witness::Form(w),
    }
}

/// Re-evaluates the single quantifier instance a form witness points at;
/// true means the failure reproduces.
pub fn recheck_form_witness(
    cl: &ClosureOperator,
    inst: &mut ActionInstance,
    w: &FormWitness,
    bounds: Bounds,
) -> Result<bool> {
    let mut ctx = EvalCtx::new(cl);
    let c: ElemSet = w.base.iter().copied().collect();
    let outcome = match w.form {
        1 => {
            let (Some(sa), Some(sb)) = (&w.set_a, &w.set_b) else {
                return Err(Error::MalformedInput(
                    "form-1 witness needs both sets".into(),
                ));
            };
            let a: ElemSet = sa.iter().copied().collect();
            let b: ElemSet = sb.iter().copied().collect();
            exists_congruent_set_indep(inst, &mut ctx, a, b, c, bounds)?
        }
        2 => {
            let (Some(a), Some(sb)) = (w.a, &w.set_b) else {
                return Err(Error::MalformedInput(
                    "form-2 witness needs a point and a set".into(),
                ));
            };
            let b: ElemSet = sb.iter().copied().collect();
            exists_congruent_point_indep(inst, &mut ctx, a, b, c, bounds)?
        }
        3 => {
            let (Some(a), Some(b)) = (w.a, w.b) else {
                return Err(Error::MalformedInput(
                    "form-3 witness needs two points".into(),
                ));
            };
            exists_congruent_point_indep(inst, &mut ctx, a, c.with(b), c, bounds)?
        }
        4 => {
            let Some(a) = w.a else {
                return Err(Error::MalformedInput("form-4 witness needs a point".into()));
            };
            if ctx.eval(inst, c)?.contains(a) {
                return Ok(false);
            }
            match w.b {
                None => exists_congruent_point_indep(inst, &mut ctx, a, c.with(a), c, bounds)?,
                Some(b) => {
                    let (candidates, complete) =
                        congruent_points(inst, a, c, bounds.witness_search)?;
                    let cl_bc = ctx.eval(inst, c.with(b))?;
                    if candidates.iter().any(|&ap| !cl_bc.contains(ap)) {
                        SearchOutcome::Found
                    } else if complete {
                        SearchOutcome::Exhausted
                    } else {
                        SearchOutcome::BudgetLimited
                    }
                }
            }
        }
        other => return Err(Error::MalformedInput(format!("no such form: {other}"))),
    };
    Ok(matches!(outcome, SearchOutcome::Exhausted))
}

/// Greedy element-removal minimization: drop base (and side-set) elements
/// while the witnessed failure keeps reproducing.
pub fn minimize_form_witness(
    cl: &ClosureOperator,
    inst: &mut ActionInstance,
    w: &FormWitness,
    bounds: Bounds,
) -> Result<FormWitness> {
    let mut best = w.clone();
    loop {
        let mut improved = false;
        for i in 0..best.base.len() {
            let mut cand = best.clone();
            let dropped = cand.base.remove(i);
            // Side sets containing the dropped base element shrink too.
            for side in [&mut cand.set_a, &mut cand.set_b] {
                if let Some(s) = side {
                    s.retain(|&x| x != dropped);
                }
            }
            if recheck_form_witness(cl, inst, &cand, bounds)? {
                best = cand;
                improved = true;
                break;
            }
        }
        for side_idx in 0..2 {
            let side = if side_idx == 0 {
                &best.set_a
            } else {
                &best.set_b
            };
            let Some(s) = side else { continue };
            for i in 0..s.len() {
                if best.base.contains(&s[i]) {
                    continue;
                }
                let mut cand = best.clone();
                let target = if side_idx == 0 {
                    cand.set_a.as_mut().unwrap()
                } else {
                    cand.set_b.as_mut().unwrap()
                };
                target.remove(i);
                if recheck_form_witness(cl, inst, &cand, bounds)? {
                    best = cand;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            return Ok(best);
        }
    }
}

// ---------------------------------------------------------------------
// Enumeration of invariant closure operators.

/// All invariant closure operators on the action, via their lattices of
/// closed sets: families containing the full set, closed under pairwise
/// intersection, and stable under the group.  Checked against the axioms
/// by construction; `max_domain` defaults to 4 in the CLI.
pub fn enumerate_invariant_closures(
    group: &PermGroup,
    max_domain: usize,
) -> Result<Vec<ClosureOperator>> {
    let n = group.domain_size();
    if n > max_domain {
        return Err(Error::DomainTooLarge {
            size: n,
            max: max_domain,
        });
    }
    let lattice = 1usize << n;
    let full_mask = ElemSet::full(n).mask();
    // Orbits of subsets under the group; a family is stable iff it is a
    // union of these.
    let mut orbit_of: Vec<Option<usize>> = vec![None; lattice];
    let mut orbits: Vec<Vec<u64>> = vec![];
    for s in 0..lattice as u64 {
        if orbit_of[s as usize].is_some() {
            continue;
        }
        let idx = orbits.len();
        let mut members = vec![];
        let mut queue = vec![ElemSet::from_mask(s)];
        orbit_of[s as usize] = Some(idx);
        members.push(s);
        while let Some(t) = queue.pop() {
            for g in group.generators() {
                let u = g.apply_set(t);
                if orbit_of[u.mask() as usize].is_none() {
                    orbit_of[u.mask() as usize] = Some(idx);
                    members.push(u.mask());
                    queue.push(u);
                }
            }
        }
        orbits.push(members);
    }
    let full_orbit = orbit_of[full_mask as usize].unwrap();
    let k = orbits.len();
    if k > 20 {
        return Err(Error::DomainTooLarge { size: k, max: 20 });
    }
    let mut out = vec![];
    for choice in 0u64..(1u64 << k) {
        if choice & (1 << full_orbit) == 0 {
            continue;
        }
        let family: BTreeSet<u64> = (0..k)
            .filter(|&i| choice & (1 << i) != 0)
            .flat_map(|i| orbits[i].iter().copied())
            .collect();
        // Closed under pairwise intersection?
        let ok = family
            .iter()
            .all(|&s| family.iter().all(|&t| family.contains(&(s & t))));
        if !ok {
            continue;
        }
        let mut map = BTreeMap::new();
        for s in 0..lattice as u64 {
            let closure = family
                .iter()
                .filter(|&&f| f & s == s)
                .fold(full_mask, |acc, &f| acc & f);
            map.insert(s, closure);
        }
        out.push(ClosureOperator::from_table(
            format!("enum-{choice:x}"),
            ClosureTable { domain: n, map },
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn full_lattice(n: usize) -> Vec<ElemSet> {
        ElemSet::full(n).subsets().collect()
    }

    #[test]
    fn identity_and_full_are_valid_closures() {
        let mut s4 = catalog::load_instance("s4").unwrap();
        let sample = full_lattice(4);
        assert!(
            validate_closure(&ClosureOperator::identity(), &mut s4, &sample)
                .unwrap()
                .passes()
        );
        assert!(
            validate_closure(&ClosureOperator::constant_full(), &mut s4, &sample)
                .unwrap()
                .passes()
        );
    }

    #[test]
    fn dropping_least_element_is_not_extensive() {
        let mut s4 = catalog::load_instance("s4").unwrap();
        let mut map = BTreeMap::new();
        for s in ElemSet::full(4).subsets() {
            let dropped = s.min().map_or(s, |m| s.without(m));
            map.insert(s.mask(), dropped.mask());
        }
        let cl = ClosureOperator::from_table("drop-least", ClosureTable { domain: 4, map });
        let v = validate_closure(&cl, &mut s4, &full_lattice(4)).unwrap();
        match v {
            Verdict::Fails {
                witness: Witness::Axiom { axiom, .. },
            } => assert_eq!(axiom, "extensive"),
            other => panic!("expected extensivity failure, got {other:?}"),
        }
    }

    #[test]
    fn pinned_element_closure_is_not_invariant() {
        // cl(A) = A ∪ {0} for nonempty A: a transposition moving 0 breaks it.
        let mut s4 = catalog::load_instance("s4").unwrap();
        let mut map = BTreeMap::new();
        for s in ElemSet::full(4).subsets() {
            let image = if s.is_empty() { s } else { s.with(0) };
            map.insert(s.mask(), image.mask());
        }
        let cl = ClosureOperator::from_table("pin-0", ClosureTable { domain: 4, map });
        assert!(validate_closure(&cl, &mut s4, &full_lattice(4))
            .unwrap()
            .passes());
        let v = is_invariant(&cl, &mut s4, &full_lattice(4)).unwrap();
        assert!(matches!(v, Verdict::Fails { .. }));
        // Identity and constant-full are invariant on any action.
        assert!(
            is_invariant(&ClosureOperator::identity(), &mut s4, &full_lattice(4))
                .unwrap()
                .passes()
        );
        assert!(
            is_invariant(&ClosureOperator::constant_full(), &mut s4, &full_lattice(4))
                .unwrap()
                .passes()
        );
    }

    #[test]
    fn independence_under_identity_and_full() {
        let mut s4 = catalog::load_instance("s4").unwrap();
        let id = ClosureOperator::identity();
        // identity: A ⫫_C B iff A ∩ B ⊆ C.
        let q = IndependenceQuery {
            a: [0, 1].into_iter().collect(),
            b: [1, 2].into_iter().collect(),
            c: ElemSet::empty(),
        };
        assert!(!indep(&id, &mut s4, &q).unwrap());
        let full = ClosureOperator::constant_full();
        assert!(indep(&full, &mut s4, &q).unwrap());
    }

    #[test]
    fn minimal_elements_examples() {
        let mut s4 = catalog::load_instance("s4").unwrap();
        let id = ClosureOperator::identity();
        // B inside cl(C): empty result.
        let b: ElemSet = [0, 1].into_iter().collect();
        assert!(minimal_elements(
            &ClosureOperator::constant_full(),
            &mut s4,
            b,
            ElemSet::empty()
        )
        .unwrap()
        .is_empty());
        // identity: everything in B ∖ C is minimal.
        assert_eq!(
            minimal_elements(&id, &mut s4, b, ElemSet::empty()).unwrap(),
            b
        );
        // add-partners on E2(6): partners are mutually minimal, singletons too.
        let mut e2 = catalog::load_instance("e2-6").unwrap();
        let b: ElemSet = [0, 1, 2].into_iter().collect();
        assert_eq!(
            minimal_elements(
                &ClosureOperator::add_partners(),
                &mut e2,
                b,
                ElemSet::empty()
            )
            .unwrap(),
            b
        );
    }

    #[test]
    fn constant_full_is_disjointifying_identity_is_not_on_s4() {
        let mut s4 = catalog::load_instance("s4").unwrap();
        let bounds = Bounds {
            set_size: 4,
            witness_search: 4,
        };
        for form in 1..=4 {
            let v = is_disjointifying(&ClosureOperator::constant_full(), &mut s4, form, bounds)
                .unwrap();
            assert!(matches!(v, Verdict::Holds), "form {form}: {v:?}");
        }
        // identity fails form 4 at C = {1,2,3}, a = 0.
        let v = is_disjointifying(&ClosureOperator::identity(), &mut s4, 4, bounds).unwrap();
        match v {
            Verdict::Fails {
                witness: Witness::Form(w),
            } => {
                assert_eq!(w.form, 4);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn identity_on_random_graph_holds_up_to_bounds() {
        let mut inst = catalog::load_instance("graphs-limit").unwrap();
        inst.as_extendable_mut().unwrap().ensure_size(6).unwrap();
        let v = is_disjointifying(
            &ClosureOperator::identity(),
            &mut inst,
            4,
            Bounds {
                set_size: 2,
                witness_search: 24,
            },
        )
        .unwrap();
        assert!(v.passes(), "{v:?}");
    }

    #[test]
    fn forward_base_growth_counterexample_is_pinned() {
        // Independence over a base does not survive moving a minimal
        // element of the other side into the base: definable closure on
        // the natural S4 action, A = {2,3}, B = {0,1}, C = ∅, b = 0.
        // cl({0,2,3}) is everything (the pointwise stabilizer of a triple
        // is trivial), so B ∩ cl(A ∪ {0}) escapes cl({0}).  The joint
        // conditions still imply independence over the base, which is the
        // direction the form equivalences consume.
        let mut s4 = catalog::load_instance("s4").unwrap();
        let dcl = ClosureOperator::definable_closure();
        let a: ElemSet = [2, 3].into_iter().collect();
        let b: ElemSet = [0, 1].into_iter().collect();
        let c = ElemSet::empty();
        let m = minimal_elements(&dcl, &mut s4, b, c).unwrap();
        assert!(m.contains(0));
        let lhs = indep(&dcl, &mut s4, &IndependenceQuery { a, b, c }).unwrap();
        let first = indep(
            &dcl,
            &mut s4,
            &IndependenceQuery {
                a,
                b: ElemSet::singleton(0),
                c,
            },
        )
        .unwrap();
        let second = indep(
            &dcl,
            &mut s4,
            &IndependenceQuery {
                a,
                b,
                c: ElemSet::singleton(0),
            },
        )
        .unwrap();
        assert!(lhs && first && !second);
    }

    #[test]
    fn enumerate_closures_on_two_points() {
        let s2 = PermGroup::symmetric(2);
        let ops = enumerate_invariant_closures(&s2, 4).unwrap();
        // identity, constant-full, and cl(∅)=∅ with singletons mapped full.
        assert_eq!(ops.len(), 3);
        let tables: Vec<&ClosureTable> = ops
            .iter()
            .map(|op| match &op.rule {
                super::ClosureRule::Table(t) => t,
                _ => unreachable!("enumeration yields tables"),
            })
            .collect();
        let full = ElemSet::full(2);
        let lookup = |t: &ClosureTable, s: ElemSet| t.get(s);
        assert!(tables
            .iter()
            .any(|t| full.subsets().all(|s| lookup(t, s) == s)));
        assert!(tables
            .iter()
            .any(|t| full.subsets().all(|s| lookup(t, s) == full)));
        assert!(tables.iter().any(|t| {
            lookup(t, ElemSet::empty()).is_empty()
                && lookup(t, ElemSet::singleton(0)) == full
                && lookup(t, ElemSet::singleton(1)) == full
                && lookup(t, full) == full
        }));
        let trivial1 = PermGroup::trivial(1);
        assert_eq!(enumerate_invariant_closures(&trivial1, 4).unwrap().len(), 2);
    }

    #[test]
    fn moore_family_count_on_three_points_matches_literature() {
        let t3 = PermGroup::trivial(3);
        assert_eq!(enumerate_invariant_closures(&t3, 4).unwrap().len(), 61);
    }

    #[test]
    fn enumeration_contains_definable_closure() {
        // An independently constructed invariant closure operator must
        // show up in the Moore-family enumeration, table for table.
        for name in ["s4", "c4", "e2-4"] {
            let mut inst = if name == "e2-4" {
                ActionInstance::Fixed(catalog::fixed_from_structure(
                    "e2-4",
                    catalog::paired_equivalence(4),
                ))
            } else {
                catalog::load_instance(name).unwrap()
            };
            let group = inst.as_fixed().unwrap().group.clone();
            let dcl_table = ClosureOperator::definable_closure()
                .materialize(&mut inst)
                .unwrap();
            let ops = enumerate_invariant_closures(&group, 4).unwrap();
            let found = ops.iter().any(|op| match &op.rule {
                super::ClosureRule::Table(t) => *t == dcl_table,
                _ => false,
            });
            assert!(found, "{name}: definable closure missing from enumeration");
        }
    }

    #[test]
    fn enumerated_closures_satisfy_axioms_and_invariance() {
        let c4 = PermGroup::cyclic(4);
        let ops = enumerate_invariant_closures(&c4, 4).unwrap();
        let mut inst = catalog::load_instance("c4").unwrap();
        let sample = full_lattice(4);
        assert!(ops.len() >= 2);
        for op in &ops {
            assert!(validate_closure(op, &mut inst, &sample).unwrap().passes());
            assert!(is_invariant(op, &mut inst, &sample).unwrap().passes());
        }
    }
}
