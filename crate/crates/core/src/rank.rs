//! The two rank recursions and the closure operators they induce.
//!
//! Both ranks share one engine behind a clause mask: the base case holds
//! when the pointwise stabilizer of the base fixes the element, the first
//! recursive clause picks a candidate point whose whole congruence class
//! must lower the rank, and the optional disjunctive clause ranges over
//! the element's own congruence class.  Every recursive call strictly
//! enlarges the base, so fixed-instance recursion is well-founded and the
//! values come out finite; an independent brute-force oracle recomputes
//! them from the literal definitions for cross-checking.
//!
//! Extendable instances recurse over quantifier-free types of the tuple
//! (base; element) with the base size capped, yielding exact values where
//! the cap suffices and `unresolved` lower bounds elsewhere.

use crate::closure::{is_disjointifying, is_invariant, Bounds, ClosureOperator, Verdict};
use crate::error::{Error, Result};
use crate::fraisse::{FraisseClassSpec, NewAtoms, Slot};
use crate::groups::PermGroup;
use crate::instance::ActionInstance;
use crate::perm::Perm;
use crate::set::ElemSet;
use crate::structures::{induced_substructure, FinStructure};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// A rank value: exact finite, provably infinite, or open with the
/// greatest refuted level recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "kebab-case")]
pub enum RankValue {
    Finite {
        value: u32,
    },
    Infinite,
    /// The scan refuted every level up to and including `lower_bound`
    /// without closing a value.
    Unresolved {
        lower_bound: u32,
    },
}

impl RankValue {
    pub fn finite(v: u32) -> Self {
        RankValue::Finite { value: v }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, RankValue::Finite { .. })
    }

    pub fn as_finite(&self) -> Option<u32> {
        match self {
            RankValue::Finite { value } => Some(*value),
            _ => None,
        }
    }

    pub fn display(&self) -> String {
        match self {
            RankValue::Finite { value } => value.to_string(),
            RankValue::Infinite => "inf".into(),
            RankValue::Unresolved { lower_bound } => format!(">{lower_bound}?"),
        }
    }
}

// Internal three-valued arithmetic.  `AtLeast(l)` means the value is
// proven >= l but unresolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Partial {
    Exact(u32),
    AtLeast(u32),
}

impl Partial {
    fn floor(self) -> u32 {
        match self {
            Partial::Exact(v) | Partial::AtLeast(v) => v,
        }
    }

    fn bump(self) -> Partial {
        match self {
            Partial::Exact(v) => Partial::Exact(v + 1),
            Partial::AtLeast(v) => Partial::AtLeast(v + 1),
        }
    }

    fn max_all(vals: impl IntoIterator<Item = Partial>) -> Partial {
        let mut exact = true;
        let mut floor = 0;
        for v in vals {
            floor = floor.max(v.floor());
            exact &= matches!(v, Partial::Exact(_));
        }
        if exact {
            Partial::Exact(floor)
        } else {
            Partial::AtLeast(floor)
        }
    }

    /// Minimum over candidates: exact when some exact value undercuts
    /// every unresolved floor.
    fn min_all(vals: impl IntoIterator<Item = Partial>) -> Option<Partial> {
        let vals: Vec<Partial> = vals.into_iter().collect();
        if vals.is_empty() {
            return None;
        }
        let best_exact = vals
            .iter()
            .filter_map(|v| match v {
                Partial::Exact(x) => Some(*x),
                _ => None,
            })
            .min();
        let floor = vals.iter().map(|v| v.floor()).min().unwrap();
        match best_exact {
            Some(e)
                if vals
                    .iter()
                    .all(|v| matches!(v, Partial::Exact(_)) || e <= v.floor()) =>
            {
                Some(Partial::Exact(e))
            }
            _ => Some(Partial::AtLeast(floor)),
        }
    }

    fn to_rank(self) -> RankValue {
        match self {
            Partial::Exact(v) => RankValue::finite(v),
            Partial::AtLeast(l) => RankValue::Unresolved {
                lower_bound: l.saturating_sub(1),
            },
        }
    }
}

// ---------------------------------------------------------------------
// Fixed-instance engine.

/// Exact rank evaluation on a fixed group action, with memoization over
/// canonical `(base, element)` representatives.
pub struct FixedRankEngine<'a> {
    group: &'a PermGroup,
    clause2: bool,
    memo: HashMap<(u64, usize), u32>,
    canon: HashMap<(u64, usize), (u64, usize)>,
    stabs: HashMap<u64, PermGroup>,
}

impl<'a> FixedRankEngine<'a> {
    pub fn new(group: &'a PermGroup, clause2: bool) -> Self {
        FixedRankEngine {
            group,
            clause2,
            memo: HashMap::new(),
            canon: HashMap::new(),
            stabs: HashMap::new(),
        }
    }

    fn canonical(&mut self, b: ElemSet, a: usize) -> (u64, usize) {
        if let Some(&k) = self.canon.get(&(b.mask(), a)) {
            return k;
        }
        let (cb, ca) = self.group.canonical_pair(b, a);
        let key = (cb.mask(), ca);
        self.canon.insert((b.mask(), a), key);
        key
    }

    fn stabilizer(&mut self, b: ElemSet) -> &PermGroup {
        self.stabs
            .entry(b.mask())
            .or_insert_with(|| self.group.pointwise_stabilizer(b))
    }

    fn orbit_over(&mut self, a: usize, b: ElemSet) -> ElemSet {
        let domain = self.group.domain_size();
        let stab = self.stabilizer(b);
        crate::groups::orbit_of_point(a, stab.generators(), domain)
    }

    pub fn rank(&mut self, a: usize, b: ElemSet) -> u32 {
        if b.contains(a) {
            return 0;
        }
        let key = self.canonical(b, a);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let orbit_a = self.orbit_over(a, b);
        let value = if orbit_a.len() == 1 {
            0
        } else {
            let mut candidates: Vec<u32> = vec![];
            // Clause 1: some point whose whole class over b lowers the
            // rank.  Points in an already-visited class give the same
            // candidate value and are skipped.
            let mut covered = b;
            for c in 0..self.group.domain_size() {
                if covered.contains(c) {
                    continue;
                }
                let orbit_c = self.orbit_over(c, b);
                covered = covered.union(orbit_c);
                let worst = orbit_c
                    .iter()
                    .map(|cp| self.rank(a, b.with(cp)))
                    .max()
                    .expect("orbit nonempty");
                candidates.push(1 + worst);
            }
            // Clause 2: the element's own class, via the disjunction.
            if self.clause2 {
                let worst = orbit_a
                    .iter()
                    .filter(|&ap| ap != a)
                    .map(|ap| self.rank(a, b.with(ap)).min(self.rank(ap, b.with(a))))
                    .max();
                if let Some(w) = worst {
                    candidates.push(1 + w);
                }
            }
            candidates.into_iter().min().expect("finite domain closes")
        };
        self.memo.insert(key, value);
        value
    }
}

// ---------------------------------------------------------------------
// Extendable (type-quotiented) engine.

/// State: the induced structure on `base ∪ {a}` with `a` as the last
/// element; ranks depend only on this type by invariance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct TypeState(FinStructure);

impl TypeState {
    fn base_size(&self) -> usize {
        self.0.size() - 1
    }

    fn marked(&self) -> usize {
        self.0.size() - 1
    }

    /// Canonical form under relabelings of the base part.
    fn canonical(&self) -> TypeState {
        let k = self.base_size();
        if k <= 1 {
            return self.clone();
        }
        let mut best: Option<FinStructure> = None;
        let mut idx: Vec<usize> = (0..k).collect();
        permute(&mut idx, 0, &mut |p| {
            let mut images = p.to_vec();
            images.push(k);
            let perm = Perm::from_images(images).unwrap();
            let cand = self.0.relabel(&perm);
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        });
        TypeState(best.unwrap())
    }
}

fn permute(idx: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == idx.len() {
        visit(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, visit);
        idx.swap(k, i);
    }
}

pub struct TypedRankEngine {
    spec: FraisseClassSpec,
    clause2: bool,
    depth: usize,
    memo: HashMap<TypeState, Partial>,
}

impl TypedRankEngine {
    pub fn new(spec: FraisseClassSpec, clause2: bool, depth: usize) -> Self {
        TypedRankEngine {
            spec,
            clause2,
            depth,
            memo: HashMap::new(),
        }
    }

    /// Atoms of the marked point over the base part of a state.
    fn marked_type(&self, state: &TypeState) -> NewAtoms {
        let base: Vec<usize> = (0..state.base_size()).collect();
        crate::fraisse::atoms_of(&state.0, state.marked(), &base)
    }

    /// Is the marked point's type over the base uniquely realizable?  It
    /// is not as soon as some one-point extension restricts to the same
    /// base type.
    fn algebraic(&self, state: &TypeState) -> Result<bool> {
        let marked_ty = self.marked_type(state);
        for pattern in self.spec.one_point_extensions(&state.0)? {
            let restricted: NewAtoms = pattern
                .iter()
                .filter(|(_, slots)| {
                    !slots
                        .iter()
                        .any(|s| matches!(s, Slot::Base(i) if *i == state.marked()))
                })
                .cloned()
                .collect();
            if restricted == marked_ty {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Extends the state by one point (atoms over the full state) into
    /// the base; the marked point stays last.
    fn push_base_point(&self, state: &TypeState, atoms: &NewAtoms) -> Result<TypeState> {
        let full: Vec<usize> = (0..state.0.size()).collect();
        let ext = crate::fraisse::realize_extension(&self.spec, &state.0, &full, atoms)?
            .ok_or_else(|| Error::InvalidStructure("unrealizable extension type".into()))?;
        // Swap the new point (last) with the marked one (now second-last).
        let n = ext.size();
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(n - 1, n - 2);
        Ok(TypeState(ext.relabel(&Perm::from_images(images).unwrap())))
    }

    /// Swaps roles: the new point (from `atoms`) becomes the marked one
    /// and the old marked point joins the base.
    fn push_marked_swap(&self, state: &TypeState, atoms: &NewAtoms) -> Result<TypeState> {
        let full: Vec<usize> = (0..state.0.size()).collect();
        let ext = crate::fraisse::realize_extension(&self.spec, &state.0, &full, atoms)?
            .ok_or_else(|| Error::InvalidStructure("unrealizable extension type".into()))?;
        Ok(TypeState(ext))
    }

    fn rank_state(&mut self, state: &TypeState) -> Result<Partial> {
        let canon = state.canonical();
        if let Some(&v) = self.memo.get(&canon) {
            return Ok(v);
        }
        if self.algebraic(&canon)? {
            self.memo.insert(canon, Partial::Exact(0));
            return Ok(Partial::Exact(0));
        }
        if canon.base_size() >= self.depth {
            // Non-algebraic, so rank at least 1, but the cap stops us.
            let v = Partial::AtLeast(1);
            self.memo.insert(canon, v);
            return Ok(v);
        }
        // Reserve the slot to guard against (impossible) cycles.
        self.memo.insert(canon.clone(), Partial::AtLeast(1));
        let patterns = self.spec.one_point_extensions(&canon.0)?;
        // Group by the restriction to the base part.
        let mut groups: HashMap<NewAtoms, Vec<NewAtoms>> = HashMap::new();
        for p in &patterns {
            let restricted: NewAtoms = p
                .iter()
                .filter(|(_, slots)| {
                    !slots
                        .iter()
                        .any(|s| matches!(s, Slot::Base(i) if *i == canon.marked()))
                })
                .cloned()
                .collect();
            groups.entry(restricted).or_default().push(p.clone());
        }
        let marked_ty = self.marked_type(&canon);
        let mut candidates: Vec<Partial> = vec![];
        for (_restriction, members) in groups.iter() {
            // Clause 1 with candidate type; every joint extension of the
            // class member must lower the rank.
            let mut branches = vec![];
            for atoms in members {
                let next = self.push_base_point(&canon, atoms)?;
                branches.push(self.rank_state(&next)?);
            }
            candidates.push(Partial::max_all(branches).bump());
        }
        if self.clause2 {
            if let Some(members) = groups.get(&marked_ty) {
                let mut branches = vec![];
                for atoms in members {
                    // a' realizes the same type over the base; take the
                    // better of rank(a, B a') and rank(a', B a).
                    let keep_marked = self.push_base_point(&canon, atoms)?;
                    let swap_marked = self.push_marked_swap(&canon, atoms)?;
                    let v1 = self.rank_state(&keep_marked)?;
                    let v2 = self.rank_state(&swap_marked)?;
                    branches.push(Partial::min_all([v1, v2]).unwrap());
                }
                candidates.push(Partial::max_all(branches).bump());
            }
        }
        let value = Partial::min_all(candidates).unwrap_or(Partial::AtLeast(1));
        self.memo.insert(canon, value);
        Ok(value)
    }

    pub fn rank(&mut self, m: &FinStructure, a: usize, b: ElemSet) -> Result<RankValue> {
        if b.contains(a) {
            return Ok(RankValue::finite(0));
        }
        let scope = b.with(a);
        let (sub, elems) = induced_substructure(m, scope);
        // Re-order so the marked point is last.
        let pos_a = elems.iter().position(|&x| x == a).unwrap();
        let n = sub.size();
        let mut images: Vec<usize> = vec![0; n];
        let mut next = 0;
        for (i, _) in elems.iter().enumerate() {
            if i == pos_a {
                images[i] = n - 1;
            } else {
                images[i] = next;
                next += 1;
            }
        }
        let state = TypeState(sub.relabel(&Perm::from_images(images).unwrap()));
        Ok(self.rank_state(&state)?.to_rank())
    }
}

// ---------------------------------------------------------------------
// Public entry points.

/// Rank of `a` over `b` with or without the disjunctive clause.  Exact on
/// fixed instances (the depth argument is ignored there); type-quotiented
/// depth-capped recursion on extendable ones.
pub fn rank_value(
    inst: &mut ActionInstance,
    a: usize,
    b: ElemSet,
    depth: usize,
    clause2: bool,
) -> Result<RankValue> {
    match inst {
        ActionInstance::Fixed(f) => {
            if a >= f.group.domain_size() {
                return Err(Error::OutOfUniverse(a));
            }
            let mut engine = FixedRankEngine::new(&f.group, clause2);
            Ok(RankValue::finite(engine.rank(a, b)))
        }
        ActionInstance::Extendable(e) => {
            e.ensure_size(b.with(a).iter().max().map_or(0, |x| x + 1))?;
            let mut engine = TypedRankEngine::new(e.spec(), clause2, depth);
            engine.rank(&e.structure().clone(), a, b)
        }
    }
}

pub fn deissler_rank(
    inst: &mut ActionInstance,
    a: usize,
    b: ElemSet,
    depth: usize,
) -> Result<RankValue> {
    rank_value(inst, a, b, depth, false)
}

pub fn disjointifying_rank(
    inst: &mut ActionInstance,
    a: usize,
    b: ElemSet,
    depth: usize,
) -> Result<RankValue> {
    rank_value(inst, a, b, depth, true)
}

/// `{a : deissler rank finite}`, together with a diagnostic listing one
/// candidate extension step (the closure-property mechanism) for each
/// element left out.
pub fn definable_closure_set(
    inst: &mut ActionInstance,
    b: ElemSet,
    depth: usize,
) -> Result<(ElemSet, Vec<DclDiagnostic>)> {
    let mut set = b;
    let mut diags = vec![];
    for a in inst.universe().iter() {
        if b.contains(a) {
            continue;
        }
        let v = deissler_rank(inst, a, b, depth)?;
        if v.is_finite() {
            set.insert(a);
        } else {
            diags.push(dcl_diagnostic(inst, a, b, depth)?);
        }
    }
    Ok((set, diags))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DclDiagnostic {
    pub element: usize,
    pub base: Vec<usize>,
    pub rank: RankValue,
    /// One witness step: a candidate whose class contains a realization
    /// keeping the rank open, per the closure-property argument.
    pub witness_step: String,
}

fn dcl_diagnostic(
    inst: &mut ActionInstance,
    a: usize,
    b: ElemSet,
    depth: usize,
) -> Result<DclDiagnostic> {
    let rank = deissler_rank(inst, a, b, depth)?;
    // For each candidate c, some congruent c' keeps Drk(a, Bc') open.
    let mut step = String::from("every candidate class retains an open realization");
    for c in inst.universe().iter() {
        if b.contains(c) || c == a {
            continue;
        }
        let orbit = inst.orbit_over(c, b)?;
        for cp in orbit.iter() {
            if cp == a {
                continue;
            }
            let sub = deissler_rank(inst, a, b.with(cp), depth)?;
            if !sub.is_finite() {
                step = format!("candidate {c}: realization {cp} keeps the rank open");
                break;
            }
        }
        break;
    }
    Ok(DclDiagnostic {
        element: a,
        base: b.to_vec(),
        rank,
        witness_step: step,
    })
}

/// The rank-finiteness closure operator at the given depth, with the
/// disjunctive clause enabled: the minimum disjointifying closure
/// candidate.  On fixed instances it evaluates to constant-full.
pub fn minimum_closure_operator(depth: usize) -> ClosureOperator {
    ClosureOperator::rank_closure(depth)
}

/// The rank table over all `(a, B)` with `|B| <= base_cap`.  The
/// fingerprint hashes the instance's canonical serialization, so stale
/// tables are recognizable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankTable {
    pub instance: String,
    pub fingerprint: String,
    pub depth: usize,
    pub rows: Vec<RankRow>,
}

/// FNV-1a over the canonical serialization; cheap and stable.
pub fn structure_fingerprint(m: &FinStructure) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in m.to_json_string().bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankRow {
    pub a: usize,
    pub base: Vec<usize>,
    pub drk: RankValue,
    pub krk: RankValue,
}

pub fn rank_table(inst: &mut ActionInstance, base_cap: usize, depth: usize) -> Result<RankTable> {
    let universe = inst.universe();
    let fingerprint = structure_fingerprint(inst.structure());
    let mut rows = vec![];
    match inst {
        ActionInstance::Fixed(f) => {
            let mut drk = FixedRankEngine::new(&f.group, false);
            let mut krk = FixedRankEngine::new(&f.group, true);
            for b in universe.subsets_up_to(base_cap) {
                for a in universe.iter() {
                    rows.push(RankRow {
                        a,
                        base: b.to_vec(),
                        drk: RankValue::finite(drk.rank(a, b)),
                        krk: RankValue::finite(krk.rank(a, b)),
                    });
                }
            }
        }
        ActionInstance::Extendable(e) => {
            let m = e.structure().clone();
            let mut drk = TypedRankEngine::new(e.spec(), false, depth);
            let mut krk = TypedRankEngine::new(e.spec(), true, depth);
            for b in universe.subsets_up_to(base_cap) {
                for a in universe.iter() {
                    rows.push(RankRow {
                        a,
                        base: b.to_vec(),
                        drk: drk.rank(&m, a, b)?,
                        krk: krk.rank(&m, a, b)?,
                    });
                }
            }
        }
    }
    Ok(RankTable {
        instance: inst.name().to_string(),
        fingerprint,
        depth,
        rows,
    })
}

// ---------------------------------------------------------------------
// Infinite-rank certificates.

/// A machine-checkable bundle: if the operator is invariant and
/// disjointifying and the element escapes the closure of the base, the
/// rank is infinite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub element: usize,
    pub base: Vec<usize>,
    pub operator: String,
    pub invariant: Verdict,
    pub disjointifying_form4: Verdict,
    pub escapes_closure: bool,
    pub closure_of_base: Vec<usize>,
    pub bound_limited: bool,
}

pub fn certify_infinite_rank(
    inst: &mut ActionInstance,
    a: usize,
    b: ElemSet,
    cl: &ClosureOperator,
    bounds: Bounds,
) -> Result<Certificate> {
    let sample: Vec<ElemSet> = inst.universe().subsets_up_to(bounds.set_size);
    let invariant = is_invariant(cl, inst, &sample)?;
    if matches!(invariant, Verdict::Fails { .. }) {
        return Err(Error::CertificateFailed {
            clause: "invariance".into(),
            detail: format!("operator {} is not invariant", cl.name),
        });
    }
    let disjointifying = is_disjointifying(cl, inst, 4, bounds)?;
    if matches!(disjointifying, Verdict::Fails { .. }) {
        return Err(Error::CertificateFailed {
            clause: "disjointifying".into(),
            detail: format!("operator {} fails form 4", cl.name),
        });
    }
    let closure = cl.eval(inst, b)?;
    if closure.contains(a) {
        return Err(Error::CertificateFailed {
            clause: "escape".into(),
            detail: format!("element {a} lies in cl({b:?})"),
        });
    }
    let bound_limited = !invariant.is_exact() || !disjointifying.is_exact();
    Ok(Certificate {
        element: a,
        base: b.to_vec(),
        operator: cl.name.clone(),
        invariant,
        disjointifying_form4: disjointifying,
        escapes_closure: true,
        closure_of_base: closure.to_vec(),
        bound_limited,
    })
}

// ---------------------------------------------------------------------
// Brute-force oracle.

/// Literal evaluation of the recursive definitions over the full subset
/// lattice, with plain memoization and no group quotienting.  Orbits are
/// computed by filtering a full element list, so this path shares nothing
/// with the chain-based engine.
pub mod oracle {
    use super::*;

    pub struct Oracle {
        domain: usize,
        elements: Vec<Perm>,
        clause2: bool,
        memo: HashMap<(u64, usize), u32>,
        stab_elems: HashMap<u64, Vec<usize>>,
    }

    impl Oracle {
        pub fn new(domain: usize, elements: Vec<Perm>, clause2: bool) -> Self {
            Oracle {
                domain,
                elements,
                clause2,
                memo: HashMap::new(),
                stab_elems: HashMap::new(),
            }
        }

        pub fn from_generators(domain: usize, gens: &[Perm], clause2: bool) -> Self {
            Self::new(domain, crate::groups::naive_elements(domain, gens), clause2)
        }

        fn stab_indices(&mut self, b: ElemSet) -> &[usize] {
            let elements = &self.elements;
            self.stab_elems.entry(b.mask()).or_insert_with(|| {
                elements
                    .iter()
                    .enumerate()
                    .filter(|(_, g)| g.fixes_pointwise(b))
                    .map(|(i, _)| i)
                    .collect()
            })
        }

        fn orbit(&mut self, a: usize, b: ElemSet) -> ElemSet {
            let idx: Vec<usize> = self.stab_indices(b).to_vec();
            idx.into_iter().map(|i| self.elements[i].apply(a)).collect()
        }

        pub fn rank(&mut self, a: usize, b: ElemSet) -> u32 {
            if b.contains(a) {
                return 0;
            }
            if let Some(&v) = self.memo.get(&(b.mask(), a)) {
                return v;
            }
            let orbit_a = self.orbit(a, b);
            let value = if orbit_a.len() == 1 {
                0
            } else {
                let mut best = u32::MAX;
                for c in 0..self.domain {
                    if b.contains(c) {
                        continue;
                    }
                    let worst = self
                        .orbit(c, b)
                        .iter()
                        .map(|cp| self.rank(a, b.with(cp)))
                        .max()
                        .unwrap();
                    best = best.min(1 + worst);
                }
                if self.clause2 {
                    let worst = orbit_a
                        .iter()
                        .filter(|&ap| ap != a)
                        .map(|ap| self.rank(a, b.with(ap)).min(self.rank(ap, b.with(a))))
                        .max();
                    if let Some(w) = worst {
                        best = best.min(1 + w);
                    }
                }
                best
            };
            self.memo.insert((b.mask(), a), value);
            value
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn fixed_group(name: &str) -> PermGroup {
        match catalog::load_instance(name).unwrap() {
            ActionInstance::Fixed(f) => f.group,
            _ => panic!("not fixed"),
        }
    }

    #[test]
    fn deissler_base_cases() {
        let mut s4 = catalog::load_instance("s4").unwrap();
        // a in B.
        assert_eq!(
            deissler_rank(&mut s4, 1, ElemSet::singleton(1), 4).unwrap(),
            RankValue::finite(0)
        );
        // S4, a = 0, B = {1,2,3}: trivial stabilizer.
        let b: ElemSet = [1, 2, 3].into_iter().collect();
        assert_eq!(
            disjointifying_rank(&mut s4, 0, b, 4).unwrap(),
            RankValue::finite(0)
        );
    }

    #[test]
    fn deissler_on_symmetric_groups_is_co_size() {
        // Drk(a, B) = |I \ B| - 1 for a outside B on the natural S_n action.
        for n in 3..=6 {
            let group = PermGroup::symmetric(n);
            let mut engine = FixedRankEngine::new(&group, false);
            for b in ElemSet::full(n).subsets() {
                for a in 0..n {
                    if b.contains(a) {
                        continue;
                    }
                    assert_eq!(
                        engine.rank(a, b),
                        (n - b.len() - 1) as u32,
                        "n={n} a={a} b={b:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn cyclic_rank_examples() {
        let mut c4 = catalog::load_instance("c4").unwrap();
        // C4, a = 0, B = ∅: one step closes it.
        assert_eq!(
            deissler_rank(&mut c4, 0, ElemSet::empty(), 4).unwrap(),
            RankValue::finite(1)
        );
    }

    #[test]
    fn engine_matches_oracle_on_catalog() {
        for name in ["s3", "s4", "c4", "c5", "e2-6", "delta-act(2,2)"] {
            let group = fixed_group(name);
            for clause2 in [false, true] {
                let mut engine = FixedRankEngine::new(&group, clause2);
                let mut oracle = oracle::Oracle::from_generators(
                    group.domain_size(),
                    group.generators(),
                    clause2,
                );
                for b in ElemSet::full(group.domain_size()).subsets() {
                    for a in 0..group.domain_size() {
                        assert_eq!(
                            engine.rank(a, b),
                            oracle.rank(a, b),
                            "{name} clause2={clause2} a={a} b={b:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn krk_at_most_drk() {
        for name in ["s4", "c5", "e2-6"] {
            let group = fixed_group(name);
            let mut drk = FixedRankEngine::new(&group, false);
            let mut krk = FixedRankEngine::new(&group, true);
            for b in ElemSet::full(group.domain_size()).subsets() {
                for a in 0..group.domain_size() {
                    assert!(krk.rank(a, b) <= drk.rank(a, b));
                }
            }
        }
    }

    #[test]
    fn s4_origin_rank_matches_oracle_and_bound() {
        let group = fixed_group("s4");
        let mut krk = FixedRankEngine::new(&group, true);
        let mut oracle = oracle::Oracle::from_generators(4, group.generators(), true);
        let v = krk.rank(0, ElemSet::empty());
        assert_eq!(v, oracle.rank(0, ElemSet::empty()));
        assert!(v <= 3);
    }

    #[test]
    fn extendable_graph_rank_is_open() {
        let mut inst = catalog::load_instance("graphs-limit").unwrap();
        inst.as_extendable_mut().unwrap().ensure_size(4).unwrap();
        let v = deissler_rank(&mut inst, 0, ElemSet::empty(), 3).unwrap();
        assert!(matches!(v, RankValue::Unresolved { .. }), "{v:?}");
        let v = disjointifying_rank(&mut inst, 0, ElemSet::singleton(1), 3).unwrap();
        assert!(matches!(v, RankValue::Unresolved { .. }), "{v:?}");
    }

    #[test]
    fn extendable_pairs_partner_rank_is_zero() {
        let mut inst = catalog::load_instance("pairs-limit").unwrap();
        inst.as_extendable_mut().unwrap().ensure_size(4).unwrap();
        let m = inst.structure().clone();
        let rel = m.signature().index_of("E").unwrap();
        let (x, y) = (0..m.size())
            .flat_map(|x| (0..m.size()).map(move |y| (x, y)))
            .find(|&(x, y)| x != y && m.holds(rel, &[x, y]))
            .unwrap();
        assert_eq!(
            deissler_rank(&mut inst, y, ElemSet::singleton(x), 3).unwrap(),
            RankValue::finite(0)
        );
    }

    #[test]
    fn fixed_instance_closure_is_constant_full() {
        let mut e2 = catalog::load_instance("e2-6").unwrap();
        let op = minimum_closure_operator(4);
        let closure = op.eval(&mut e2, ElemSet::empty()).unwrap();
        assert_eq!(closure, ElemSet::full(6));
        let (dcl_set, diags) = definable_closure_set(&mut e2, ElemSet::empty(), 4).unwrap();
        assert_eq!(dcl_set, ElemSet::full(6));
        assert!(diags.is_empty());
    }

    #[test]
    fn certificate_rejects_constant_full() {
        let mut inst = catalog::load_instance("graphs-limit").unwrap();
        inst.as_extendable_mut().unwrap().ensure_size(4).unwrap();
        let err = certify_infinite_rank(
            &mut inst,
            0,
            ElemSet::singleton(1),
            &ClosureOperator::constant_full(),
            Bounds {
                set_size: 2,
                witness_search: 16,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::CertificateFailed { .. }));
    }
}
