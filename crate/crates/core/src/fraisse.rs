//! Amalgamation classes of finite structures.
//!
//! A class is given by a builtin predicate, a forbidden-configuration list,
//! or the age of a reference structure; the strong substructure relation is
//! induced substructure throughout.  All catalog classes are hereditary,
//! which is what makes the slack-0 amalgam search complete: any amalgam
//! shrinks to one whose universe is the union of the two images.

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::set::ElemSet;
use crate::structures::{
    induced_substructure, tuples_over, FinStructure, PartialMap, Signature, StructureJson,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinClass {
    Graphs,
    LinearOrders,
    EquivalencePairs,
    PureSets,
}

impl BuiltinClass {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinClass::Graphs => "graphs",
            BuiltinClass::LinearOrders => "linear-orders",
            BuiltinClass::EquivalencePairs => "pairs",
            BuiltinClass::PureSets => "pure-sets",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "graphs" => Ok(BuiltinClass::Graphs),
            "linear-orders" | "orders" | "dlo" => Ok(BuiltinClass::LinearOrders),
            "pairs" | "equivalence-pairs" => Ok(BuiltinClass::EquivalencePairs),
            "pure-sets" | "sets" => Ok(BuiltinClass::PureSets),
            other => Err(Error::UnknownBuiltin(other.to_string())),
        }
    }

    pub fn signature(self) -> Signature {
        match self {
            BuiltinClass::Graphs | BuiltinClass::EquivalencePairs => {
                Signature::new(vec![("E".into(), 2)]).unwrap()
            }
            BuiltinClass::LinearOrders => Signature::new(vec![("lt".into(), 2)]).unwrap(),
            BuiltinClass::PureSets => Signature::empty(),
        }
    }

    pub fn member(self, a: &FinStructure) -> Result<bool> {
        if *a.signature() != self.signature() {
            return Err(Error::SignatureMismatch(format!(
                "structure signature does not match builtin class {}",
                self.name()
            )));
        }
        let n = a.size();
        Ok(match self {
            BuiltinClass::PureSets => true,
            BuiltinClass::Graphs => {
                let e = 0;
                (0..n).all(|x| !a.holds(e, &[x, x]))
                    && a.table(e).iter().all(|t| a.holds(e, &[t[1], t[0]]))
            }
            BuiltinClass::LinearOrders => {
                let lt = 0;
                let irrefl = (0..n).all(|x| !a.holds(lt, &[x, x]));
                let total = (0..n).all(|x| {
                    (0..n).all(|y| x == y || (a.holds(lt, &[x, y]) ^ a.holds(lt, &[y, x])))
                });
                let trans = a
                    .table(lt)
                    .iter()
                    .all(|t| (0..n).all(|z| !a.holds(lt, &[t[1], z]) || a.holds(lt, &[t[0], z])));
                irrefl && total && trans
            }
            BuiltinClass::EquivalencePairs => {
                let e = 0;
                let refl = (0..n).all(|x| a.holds(e, &[x, x]));
                let sym = a.table(e).iter().all(|t| a.holds(e, &[t[1], t[0]]));
                let trans = a
                    .table(e)
                    .iter()
                    .all(|t| (0..n).all(|z| !a.holds(e, &[t[1], z]) || a.holds(e, &[t[0], z])));
                let small = (0..n).all(|x| (0..n).filter(|&y| a.holds(e, &[x, y])).count() <= 2);
                refl && sym && trans && small
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassKindJson {
    Builtin {
        name: String,
    },
    Forbidden {
        signature: Signature,
        configs: Vec<StructureJson>,
    },
    AgeOf {
        reference: StructureJson,
    },
}

#[derive(Debug, Clone)]
pub enum ClassKind {
    Builtin(BuiltinClass),
    Forbidden {
        signature: Signature,
        configs: Vec<FinStructure>,
    },
    AgeOf(FinStructure),
}

/// An amalgamation-class specification; strong substructure is induced
/// substructure.
#[derive(Debug, Clone)]
pub struct FraisseClassSpec {
    pub kind: ClassKind,
}

impl FraisseClassSpec {
    pub fn builtin(class: BuiltinClass) -> Self {
        FraisseClassSpec {
            kind: ClassKind::Builtin(class),
        }
    }

    pub fn forbidden(signature: Signature, configs: Vec<FinStructure>) -> Self {
        FraisseClassSpec {
            kind: ClassKind::Forbidden { signature, configs },
        }
    }

    pub fn age_of(reference: FinStructure) -> Self {
        FraisseClassSpec {
            kind: ClassKind::AgeOf(reference),
        }
    }

    pub fn signature(&self) -> Signature {
        match &self.kind {
            ClassKind::Builtin(b) => b.signature(),
            ClassKind::Forbidden { signature, .. } => signature.clone(),
            ClassKind::AgeOf(m) => m.signature().clone(),
        }
    }

    pub fn in_class(&self, a: &FinStructure) -> Result<bool> {
        match &self.kind {
            ClassKind::Builtin(b) => b.member(a),
            ClassKind::Forbidden { signature, configs } => {
                if a.signature() != signature {
                    return Err(Error::SignatureMismatch(
                        "structure signature does not match forbidden-config class".into(),
                    ));
                }
                Ok(configs.iter().all(|f| find_embedding(f, a).is_none()))
            }
            ClassKind::AgeOf(m) => {
                if a.signature() != m.signature() {
                    return Err(Error::SignatureMismatch(
                        "structure signature does not match the reference structure".into(),
                    ));
                }
                Ok(find_embedding(a, m).is_some())
            }
        }
    }

    pub fn json(&self) -> ClassKindJson {
        match &self.kind {
            ClassKind::Builtin(b) => ClassKindJson::Builtin {
                name: b.name().into(),
            },
            ClassKind::Forbidden { signature, configs } => ClassKindJson::Forbidden {
                signature: signature.clone(),
                configs: configs.iter().map(|c| c.json()).collect(),
            },
            ClassKind::AgeOf(m) => ClassKindJson::AgeOf {
                reference: m.json(),
            },
        }
    }

    pub fn from_json(doc: &ClassKindJson) -> Result<Self> {
        Ok(match doc {
            ClassKindJson::Builtin { name } => {
                FraisseClassSpec::builtin(BuiltinClass::from_name(name)?)
            }
            ClassKindJson::Forbidden { signature, configs } => FraisseClassSpec::forbidden(
                signature.clone(),
                configs
                    .iter()
                    .map(FinStructure::from_json)
                    .collect::<Result<_>>()?,
            ),
            ClassKindJson::AgeOf { reference } => {
                FraisseClassSpec::age_of(FinStructure::from_json(reference)?)
            }
        })
    }
}

/// Searches for an induced embedding of `small` into `big`.
pub fn find_embedding(small: &FinStructure, big: &FinStructure) -> Option<Vec<usize>> {
    if small.signature() != big.signature() || small.size() > big.size() {
        return None;
    }
    let k = small.size();
    fn consistent(small: &FinStructure, big: &FinStructure, map: &[usize], v: usize) -> bool {
        for (rel, r) in small.signature().relations().iter().enumerate() {
            for positions in tuples_over(v + 1, r.arity) {
                if !positions.contains(&v) {
                    continue;
                }
                let image: Vec<usize> = positions.iter().map(|&i| map[i]).collect();
                if small.holds(rel, &positions) != big.holds(rel, &image) {
                    return false;
                }
            }
        }
        true
    }
    fn rec(
        small: &FinStructure,
        big: &FinStructure,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        let v = map.len();
        if v == small.size() {
            return true;
        }
        for w in 0..big.size() {
            if used[w] {
                continue;
            }
            map.push(w);
            used[w] = true;
            if consistent(small, big, map, v) && rec(small, big, map, used) {
                return true;
            }
            map.pop();
            used[w] = false;
        }
        false
    }
    let mut map = Vec::with_capacity(k);
    let mut used = vec![false; big.size()];
    if rec(small, big, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

// ---------------------------------------------------------------------
// One-point extensions.

/// A slot in a one-point extension atom: a base element (by index into the
/// sorted base) or the new point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    Base(usize),
    New,
}

/// The atoms a new point satisfies over a base, in slot form.  This is the
/// quantifier-free type of a one-point extension.
pub type NewAtoms = BTreeSet<(usize, Vec<Slot>)>;

/// All candidate atoms involving the new point over a base of size `k`.
fn candidate_atoms(sig: &Signature, k: usize) -> Vec<(usize, Vec<Slot>)> {
    let mut out = vec![];
    for (rel, r) in sig.relations().iter().enumerate() {
        let slots: Vec<Slot> = (0..k).map(Slot::Base).chain([Slot::New]).collect();
        for tuple in tuples_over(slots.len(), r.arity) {
            let tuple: Vec<Slot> = tuple.into_iter().map(|i| slots[i]).collect();
            if tuple.contains(&Slot::New) {
                out.push((rel, tuple));
            }
        }
    }
    out
}

fn apply_atoms(base: &FinStructure, atoms: &NewAtoms) -> FinStructure {
    let mut ext = base.clone();
    let new = ext.push_element().expect("within cap");
    for (rel, slots) in atoms {
        let tuple: Vec<usize> = slots
            .iter()
            .map(|s| match s {
                Slot::Base(i) => *i,
                Slot::New => new,
            })
            .collect();
        ext.set(*rel, tuple).expect("valid tuple");
    }
    ext
}

impl FraisseClassSpec {
    /// All quantifier-free types of one-point extensions of `base` within
    /// the class, in a fixed deterministic order.
    pub fn one_point_extensions(&self, base: &FinStructure) -> Result<Vec<NewAtoms>> {
        let cands = candidate_atoms(&self.signature(), base.size());
        if cands.len() > 22 {
            return Err(Error::DomainTooLarge {
                size: cands.len(),
                max: 22,
            });
        }
        let mut out = vec![];
        for mask in 0u64..(1u64 << cands.len()) {
            let atoms: NewAtoms = cands
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask & (1 << i) != 0)
                .map(|(_, a)| a.clone())
                .collect();
            let ext = apply_atoms(base, &atoms);
            if self.in_class(&ext)? {
                out.push(atoms);
            }
        }
        Ok(out)
    }
}

/// Atoms of `x` over the sorted element list `base` inside `m`, in slot
/// form; `x` must not be in `base`.
pub fn atoms_of(m: &FinStructure, x: usize, base: &[usize]) -> NewAtoms {
    let mut atoms = NewAtoms::new();
    let slots: Vec<(Slot, usize)> = base
        .iter()
        .enumerate()
        .map(|(i, &e)| (Slot::Base(i), e))
        .chain([(Slot::New, x)])
        .collect();
    for (rel, r) in m.signature().relations().iter().enumerate() {
        for tuple in tuples_over(slots.len(), r.arity) {
            let slot_tuple: Vec<Slot> = tuple.iter().map(|&i| slots[i].0).collect();
            if !slot_tuple.contains(&Slot::New) {
                continue;
            }
            let concrete: Vec<usize> = tuple.iter().map(|&i| slots[i].1).collect();
            if m.holds(rel, &concrete) {
                atoms.insert((rel, slot_tuple));
            }
        }
    }
    atoms
}

/// Finds an element of `m` outside `base` realizing `atoms` over it.
pub fn find_realization(m: &FinStructure, base: &[usize], atoms: &NewAtoms) -> Option<usize> {
    (0..m.size()).find(|&x| !base.contains(&x) && atoms_of(m, x, base) == *atoms)
}

/// Extends `m` by one element realizing `atoms` over `base`, completing
/// the relations against the rest of `m` so that the result stays in the
/// class.  Returns `None` when no completion exists (for the catalog this
/// only happens in the pairs class, when the pattern asks for a partner of
/// an element that is already partnered elsewhere).
pub fn realize_extension(
    class: &FraisseClassSpec,
    m: &FinStructure,
    base: &[usize],
    atoms: &NewAtoms,
) -> Result<Option<FinStructure>> {
    let mut ext = m.clone();
    let new = ext.push_element()?;
    let concrete = |slots: &[Slot]| -> Vec<usize> {
        slots
            .iter()
            .map(|s| match s {
                Slot::Base(i) => base[*i],
                Slot::New => new,
            })
            .collect()
    };
    for (rel, slots) in atoms {
        ext.set(*rel, concrete(slots))?;
    }
    match &class.kind {
        ClassKind::Builtin(BuiltinClass::LinearOrders) => {
            let lt = 0;
            // Insert the new point immediately above the greatest base
            // element below it; below everything when no base is below.
            let below_base: Vec<usize> = base
                .iter()
                .copied()
                .filter(|&s| ext.holds(lt, &[s, new]))
                .collect();
            let down: ElemSet = match below_base.iter().max_by(|&&x, &&y| {
                if m.holds(lt, &[x, y]) {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Greater
                }
            }) {
                Some(&top) => (0..m.size())
                    .filter(|&y| y == top || m.holds(lt, &[y, top]))
                    .collect(),
                None => ElemSet::empty(),
            };
            for y in 0..m.size() {
                if down.contains(y) {
                    ext.set(lt, vec![y, new])?;
                } else {
                    ext.set(lt, vec![new, y])?;
                }
            }
        }
        // Graphs, pairs, pure sets, and the generic kinds complete freely:
        // no relations between the new point and elements outside the base.
        _ => {}
    }
    if class.in_class(&ext)? {
        Ok(Some(ext))
    } else {
        Ok(None)
    }
}

// ---------------------------------------------------------------------
// Age.

/// One representative per isomorphism class of induced substructures of
/// `m` with at most `size_bound` elements, ordered by canonical form.
pub fn age(m: &FinStructure, size_bound: usize) -> Vec<FinStructure> {
    let mut reps: BTreeSet<FinStructure> = BTreeSet::new();
    for s in m.universe().subsets() {
        if s.len() > size_bound {
            continue;
        }
        let (sub, _) = induced_substructure(m, s);
        reps.insert(sub.canonical_code());
    }
    reps.into_iter().collect()
}

// ---------------------------------------------------------------------
// Amalgamation.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Plain,
    Disjoint,
}

#[derive(Debug, Clone)]
pub enum AmalgamVerdict {
    Amalgam {
        d: FinStructure,
        b_embedding: PartialMap,
        c_embedding: PartialMap,
        disjoint: bool,
    },
    HoldsUpTo {
        bound: usize,
        flavor: Flavor,
        slack: usize,
        triples_checked: usize,
    },
    Counterexample {
        a: FinStructure,
        b: FinStructure,
        c: FinStructure,
        a_to_b: PartialMap,
        a_to_c: PartialMap,
        flavor: Flavor,
        slack: usize,
    },
}

impl AmalgamVerdict {
    pub fn is_amalgam(&self) -> bool {
        matches!(self, AmalgamVerdict::Amalgam { .. })
    }
}

/// Searches for an amalgam of `b` and `c` over `a`.  The search enumerates
/// identifications of the two sides (none, for the disjoint flavor) and
/// then all completions of the free cross relations, smallest first, so a
/// free superposition is found immediately when it works.
pub fn amalgamate(
    spec: &FraisseClassSpec,
    a: &FinStructure,
    b: &FinStructure,
    c: &FinStructure,
    a_to_b: &PartialMap,
    a_to_c: &PartialMap,
    flavor: Flavor,
    slack: usize,
) -> Result<AmalgamVerdict> {
    if !crate::structures::is_embedding(a_to_b, a, b)?
        || !crate::structures::is_embedding(a_to_c, a, c)?
    {
        return Err(Error::Precondition(
            "amalgamation embeddings invalid".into(),
        ));
    }
    let b_extra: Vec<usize> = (0..b.size())
        .filter(|x| !a_to_b.range().contains(*x))
        .collect();
    let c_extra: Vec<usize> = (0..c.size())
        .filter(|x| !a_to_c.range().contains(*x))
        .collect();

    // c element -> b element for the a-identified part.
    let base_ident: Vec<(usize, usize)> = a_to_c
        .pairs()
        .map(|(x, yc)| (yc, a_to_b.get(x).unwrap()))
        .collect();

    let matchings = match flavor {
        Flavor::Disjoint => vec![vec![]],
        Flavor::Plain => partial_injections(&c_extra, &b_extra),
    };

    let mut truncated = false;
    for matching in matchings {
        match try_matching(spec, b, c, &base_ident, &matching, slack)? {
            MatchOutcome::Found(d, c_embedding) => {
                let b_embedding = PartialMap::from_pairs((0..b.size()).map(|x| (x, x)))?;
                return Ok(AmalgamVerdict::Amalgam {
                    disjoint: matching.is_empty() && slack == 0,
                    d,
                    b_embedding,
                    c_embedding,
                });
            }
            MatchOutcome::Exhausted => {}
            MatchOutcome::Truncated => truncated = true,
        }
    }
    if truncated {
        // A truncated completion search must never masquerade as a
        // refutation.
        return Err(Error::DomainTooLarge {
            size: b.size() + c.size(),
            max: 20,
        });
    }
    Ok(AmalgamVerdict::Counterexample {
        a: a.clone(),
        b: b.clone(),
        c: c.clone(),
        a_to_b: a_to_b.clone(),
        a_to_c: a_to_c.clone(),
        flavor,
        slack,
    })
}

enum MatchOutcome {
    Found(FinStructure, PartialMap),
    /// Every completion inspected; none is a class member.
    Exhausted,
    /// The completion space was too large to exhaust.
    Truncated,
}

/// All partial injections from `from` into `to`, ordered by size then
/// generation order, starting with the empty one.
fn partial_injections(from: &[usize], to: &[usize]) -> Vec<Vec<(usize, usize)>> {
    let mut out: Vec<Vec<(usize, usize)>> = vec![vec![]];
    let mut frontier: Vec<Vec<(usize, usize)>> = vec![vec![]];
    while !frontier.is_empty() {
        let mut next = vec![];
        for m in &frontier {
            let start = m
                .last()
                .map_or(0, |&(x, _)| from.iter().position(|&f| f == x).unwrap() + 1);
            for &x in &from[start..] {
                for &y in to {
                    if m.iter().any(|&(_, y0)| y0 == y) {
                        continue;
                    }
                    let mut m2 = m.clone();
                    m2.push((x, y));
                    next.push(m2);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn try_matching(
    spec: &FraisseClassSpec,
    b: &FinStructure,
    c: &FinStructure,
    base_ident: &[(usize, usize)],
    matching: &[(usize, usize)],
    slack: usize,
) -> Result<MatchOutcome> {
    // Universe: all of b, then fresh indices for unmatched c elements,
    // then slack padding.
    let mut c_map: Vec<Option<usize>> = vec![None; c.size()];
    for &(yc, yb) in base_ident.iter().chain(matching.iter()) {
        c_map[yc] = Some(yb);
    }
    let mut next = b.size();
    for x in 0..c.size() {
        if c_map[x].is_none() {
            c_map[x] = Some(next);
            next += 1;
        }
    }
    let d_size = next + slack;
    if d_size > crate::MAX_UNIVERSE {
        return Err(Error::UniverseTooLarge {
            size: d_size,
            max: crate::MAX_UNIVERSE,
        });
    }
    let mut d = FinStructure::new(spec.signature(), d_size)?;
    for (rel, r) in spec.signature().relations().iter().enumerate() {
        // b's table verbatim.
        for t in b.table(rel) {
            d.set(rel, t.clone())?;
        }
        // c's table mapped; overlap must agree with b.
        for t in tuples_over(c.size(), r.arity) {
            let image: Vec<usize> = t.iter().map(|&x| c_map[x].unwrap()).collect();
            let inside_b = image.iter().all(|&y| y < b.size());
            if c.holds(rel, &t) {
                if inside_b && !b.holds(rel, &image) {
                    return Ok(MatchOutcome::Exhausted);
                }
                d.set(rel, image)?;
            } else if inside_b && b.holds(rel, &image) {
                return Ok(MatchOutcome::Exhausted);
            }
        }
    }
    // Free tuples: those not inside the b part and not inside the c image.
    let c_image: ElemSet = c_map.iter().map(|y| y.unwrap()).collect();
    let b_part = ElemSet::full(b.size());
    let mut free: Vec<(usize, Vec<usize>)> = vec![];
    for (rel, r) in spec.signature().relations().iter().enumerate() {
        for t in tuples_over(d_size, r.arity) {
            let members: ElemSet = t.iter().copied().collect();
            if members.is_subset(b_part) || members.is_subset(c_image) {
                continue;
            }
            free.push((rel, t));
        }
    }
    // Lazy completion enumeration, free superposition first; searches
    // past the budget report truncation rather than a refutation.
    let exhaustive = free.len() <= 20;
    let limit = if exhaustive {
        1u64 << free.len()
    } else {
        1u64 << 20
    };
    for mask in 0u64..limit {
        let mut cand = d.clone();
        for (i, (rel, t)) in free.iter().enumerate() {
            if mask & (1 << i) != 0 {
                cand.set(*rel, t.clone())?;
            }
        }
        if spec.in_class(&cand)? {
            let c_embedding =
                PartialMap::from_pairs((0..c.size()).map(|x| (x, c_map[x].unwrap())))?;
            return Ok(MatchOutcome::Found(cand, c_embedding));
        }
    }
    Ok(if exhaustive {
        MatchOutcome::Exhausted
    } else {
        MatchOutcome::Truncated
    })
}

/// All class members with universe size at most `n`, up to isomorphism,
/// in canonical order.
pub fn members_up_to(spec: &FraisseClassSpec, n: usize) -> Result<Vec<FinStructure>> {
    let sig = spec.signature();
    let mut out = vec![];
    for size in 0..=n {
        let space: Vec<(usize, Vec<usize>)> = sig
            .relations()
            .iter()
            .enumerate()
            .flat_map(|(rel, r)| {
                tuples_over(size, r.arity)
                    .into_iter()
                    .map(move |t| (rel, t))
            })
            .collect();
        if space.len() > 22 {
            return Err(Error::DomainTooLarge {
                size: space.len(),
                max: 22,
            });
        }
        let mut reps: BTreeSet<FinStructure> = BTreeSet::new();
        for mask in 0u64..(1u64 << space.len()) {
            let mut s = FinStructure::new(sig.clone(), size)?;
            for (i, (rel, t)) in space.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    s.set(*rel, t.clone())?;
                }
            }
            if spec.in_class(&s)? {
                reps.insert(s.canonical_code());
            }
        }
        out.extend(reps);
    }
    Ok(out)
}

/// Exhausts amalgamation instances with both sides of size at most
/// `size_bound`; returns the first failure or a holds-up-to verdict.
pub fn has_amalgamation(
    spec: &FraisseClassSpec,
    size_bound: usize,
    flavor: Flavor,
    slack: usize,
) -> Result<AmalgamVerdict> {
    let members = members_up_to(spec, size_bound)?;
    let mut checked = 0;
    for b in &members {
        for a_mask in b.universe().subsets() {
            let (a, a_elems) = induced_substructure(b, a_mask);
            let a_to_b = PartialMap::from_pairs(a_elems.iter().copied().enumerate())?;
            for c in &members {
                // Every embedding of a into c, enumerated by backtracking
                // over ordered injections.
                for image in all_embeddings(&a, c) {
                    let a_to_c = PartialMap::from_pairs(image.iter().copied().enumerate())?;
                    checked += 1;
                    let verdict = amalgamate(spec, &a, b, c, &a_to_b, &a_to_c, flavor, slack)?;
                    if !verdict.is_amalgam() {
                        return Ok(verdict);
                    }
                }
            }
        }
    }
    Ok(AmalgamVerdict::HoldsUpTo {
        bound: size_bound,
        flavor,
        slack,
        triples_checked: checked,
    })
}

/// All induced embeddings of `small` into `big`.
pub fn all_embeddings(small: &FinStructure, big: &FinStructure) -> Vec<Vec<usize>> {
    let mut out = vec![];
    fn rec(
        small: &FinStructure,
        big: &FinStructure,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let v = map.len();
        if v == small.size() {
            out.push(map.clone());
            return;
        }
        for w in 0..big.size() {
            if used[w] {
                continue;
            }
            map.push(w);
            used[w] = true;
            let ok = {
                let mut ok = true;
                'outer: for (rel, r) in small.signature().relations().iter().enumerate() {
                    for positions in tuples_over(v + 1, r.arity) {
                        if !positions.contains(&v) {
                            continue;
                        }
                        let image: Vec<usize> = positions.iter().map(|&i| map[i]).collect();
                        if small.holds(rel, &positions) != big.holds(rel, &image) {
                            ok = false;
                            break 'outer;
                        }
                    }
                }
                ok
            };
            if ok {
                rec(small, big, map, used, out);
            }
            map.pop();
            used[w] = false;
        }
    }
    rec(
        small,
        big,
        &mut vec![],
        &mut vec![false; big.size()],
        &mut out,
    );
    out
}

// ---------------------------------------------------------------------
// Limit construction.

#[derive(Debug, Clone)]
pub struct LimitBuild {
    pub structure: FinStructure,
    /// Elements whose one-point extension requirements (bases up to the
    /// requested depth) are all realized.
    pub core: ElemSet,
    pub rounds_completed: usize,
    pub requirements_satisfied: usize,
    pub relabel: Perm,
}

/// Deterministic limit approximation on `n_elements` elements.
///
/// Requirements `(S, extension type)` are processed in rounds: round `k`
/// realizes every extension type over every subset of `{0..k-1}` of size
/// at most `ext_depth`.  Rounds that complete grow the reported core; the
/// element budget is then padded to exactly `n_elements` and the whole
/// universe is relabeled by a seed-keyed permutation.
pub fn build_limit(
    spec: &FraisseClassSpec,
    n_elements: usize,
    ext_depth: usize,
    seed: u64,
) -> Result<LimitBuild> {
    if n_elements > crate::MAX_UNIVERSE {
        return Err(Error::UniverseTooLarge {
            size: n_elements,
            max: crate::MAX_UNIVERSE,
        });
    }
    let mut m = FinStructure::empty(spec.signature());
    let mut core_len = 0;
    let mut rounds = 0;
    let mut satisfied = 0;
    let mut starved = 0;

    let empty = FinStructure::empty(spec.signature());
    let empty_patterns = spec.one_point_extensions(&empty)?;
    'rounds: for frontier in 0..=n_elements {
        // The core prefix {0..frontier-1} must exist before requirements
        // can mention it; sparse classes need explicit materialization.
        while m.size() < frontier {
            if m.size() >= n_elements {
                break 'rounds;
            }
            let Some(pattern) = empty_patterns.first() else {
                break 'rounds;
            };
            match realize_extension(spec, &m, &[], pattern)? {
                Some(ext) => m = ext,
                None => break 'rounds,
            }
        }
        // Requirements over subsets of {0..frontier-1}.
        let subsets: Vec<Vec<usize>> = ElemSet::full(frontier)
            .subsets_up_to(ext_depth)
            .into_iter()
            .map(|s| s.to_vec())
            .collect();
        for base in subsets {
            let (base_struct, _) = induced_substructure(&m, base.iter().copied().collect());
            for pattern in spec.one_point_extensions(&base_struct)? {
                if find_realization(&m, &base, &pattern).is_some() {
                    satisfied += 1;
                    continue;
                }
                if m.size() >= n_elements {
                    break 'rounds;
                }
                match realize_extension(spec, &m, &base, &pattern)? {
                    Some(ext) => {
                        m = ext;
                        satisfied += 1;
                    }
                    None => starved += 1,
                }
            }
        }
        core_len = frontier;
        rounds += 1;
    }
    if starved > 0 {
        return Err(Error::RequirementStarved {
            unmet: starved,
            budget: n_elements,
        });
    }
    // Pad to the requested size with fresh points realizing the least
    // extension type over the empty base.
    while m.size() < n_elements {
        let Some(pattern) = empty_patterns.first() else {
            break;
        };
        match realize_extension(spec, &m, &[], pattern)? {
            Some(ext) => m = ext,
            None => break,
        }
    }
    core_len = core_len.min(m.size());

    // Seeded relabeling; the underlying construction is seed-independent.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images: Vec<usize> = (0..m.size()).collect();
    images.shuffle(&mut rng);
    let relabel = Perm::from_images(images)?;
    let structure = m.relabel(&relabel);
    let core: ElemSet = (0..core_len).map(|x| relabel.apply(x)).collect();
    Ok(LimitBuild {
        structure,
        core,
        rounds_completed: rounds,
        requirements_satisfied: satisfied,
        relabel,
    })
}

// ---------------------------------------------------------------------
// Limit property report.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitReport {
    /// Fraction of small subsets generating class members.
    pub clause1_rate: f64,
    /// Fraction of one-point extension requirements realized.
    pub clause2_rate: f64,
    pub clause2_total: usize,
    pub clause2_satisfied: usize,
    /// Same, restricted to bases inside the core (when one is given).
    pub clause2_core_rate: Option<f64>,
    /// Fraction of sampled congruent pairs joined by an automorphism.
    pub clause3_rate: f64,
    pub clause3_total: usize,
}

/// Scores a finite structure against the three limit properties at the
/// given depth.  Clause 3 is sampled (seeded) because automorphism
/// extension search over all pairs is quadratic in the subset count.
pub fn check_limit_properties(
    m: &FinStructure,
    spec: &FraisseClassSpec,
    depth: usize,
    core: Option<ElemSet>,
    seed: u64,
    clause3_samples: usize,
) -> Result<LimitReport> {
    let subsets = m.universe().subsets_up_to(depth);
    let mut c1_total = 0usize;
    let mut c1_ok = 0usize;
    let mut c2_total = 0usize;
    let mut c2_ok = 0usize;
    let mut c2_core_total = 0usize;
    let mut c2_core_ok = 0usize;
    for s in &subsets {
        let elems = s.to_vec();
        let (sub, _) = induced_substructure(m, *s);
        c1_total += 1;
        if spec.in_class(&sub)? {
            c1_ok += 1;
        }
        for pattern in spec.one_point_extensions(&sub)? {
            let hit = find_realization(m, &elems, &pattern).is_some();
            c2_total += 1;
            if hit {
                c2_ok += 1;
            }
            if let Some(core) = core {
                if s.is_subset(core) {
                    c2_core_total += 1;
                    if hit {
                        c2_core_ok += 1;
                    }
                }
            }
        }
    }
    // Clause 3: congruent pairs over a base joined by an automorphism.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c3_total = 0usize;
    let mut c3_ok = 0usize;
    let candidates: Vec<ElemSet> = subsets.iter().copied().filter(|s| !s.is_empty()).collect();
    if !candidates.is_empty() && m.size() > 0 {
        use rand::Rng;
        for _ in 0..clause3_samples {
            let b1 = candidates[rng.gen_range(0..candidates.len())];
            let sub_masks = b1.subsets().collect::<Vec<_>>();
            let a = sub_masks[rng.gen_range(0..sub_masks.len())];
            // Find a congruent partner: an induced copy of b1 over a.
            let (sub1, elems1) = induced_substructure(m, b1);
            let perm_elems2: Vec<ElemSet> = m
                .universe()
                .subsets_up_to(b1.len())
                .into_iter()
                .filter(|s| s.len() == b1.len() && a.is_subset(*s))
                .collect();
            let b2 = perm_elems2[rng.gen_range(0..perm_elems2.len())];
            let (sub2, elems2) = induced_substructure(m, b2);
            // A partial isomorphism b1 -> b2 fixing a, if any.
            let Some(map) = congruent_copy_map(&sub1, &elems1, &sub2, &elems2, a) else {
                continue; // not a congruent pair; skip
            };
            c3_total += 1;
            let forced = PartialMap::from_pairs(map)?;
            if crate::groups::find_isomorphism_with(m, m, &forced).is_some() {
                c3_ok += 1;
            }
        }
    }
    let rate = |ok: usize, total: usize| {
        if total == 0 {
            1.0
        } else {
            ok as f64 / total as f64
        }
    };
    Ok(LimitReport {
        clause1_rate: rate(c1_ok, c1_total),
        clause2_rate: rate(c2_ok, c2_total),
        clause2_total: c2_total,
        clause2_satisfied: c2_ok,
        clause2_core_rate: core.map(|_| rate(c2_core_ok, c2_core_total)),
        clause3_rate: rate(c3_ok, c3_total),
        clause3_total: c3_total,
    })
}

/// A structure isomorphism `b1 -> b2` (as concrete element pairs in the
/// ambient universe) fixing `a` pointwise, if one exists.
fn congruent_copy_map(
    sub1: &FinStructure,
    elems1: &[usize],
    sub2: &FinStructure,
    elems2: &[usize],
    a: ElemSet,
) -> Option<Vec<(usize, usize)>> {
    if elems1.len() != elems2.len() {
        return None;
    }
    let mut forced = PartialMap::new();
    for (i, &e) in elems1.iter().enumerate() {
        if a.contains(e) {
            let j = elems2.iter().position(|&f| f == e)?;
            forced.insert(i, j).ok()?;
        }
    }
    let images = crate::groups::find_isomorphism_with(sub1, sub2, &forced)?;
    Some(
        images
            .iter()
            .enumerate()
            .map(|(i, &j)| (elems1[i], elems2[j]))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn graphs() -> FraisseClassSpec {
        FraisseClassSpec::builtin(BuiltinClass::Graphs)
    }

    fn pairs() -> FraisseClassSpec {
        FraisseClassSpec::builtin(BuiltinClass::EquivalencePairs)
    }

    #[test]
    fn empty_structure_in_every_builtin() {
        for class in [
            BuiltinClass::Graphs,
            BuiltinClass::LinearOrders,
            BuiltinClass::EquivalencePairs,
            BuiltinClass::PureSets,
        ] {
            let spec = FraisseClassSpec::builtin(class);
            let empty = FinStructure::empty(spec.signature());
            assert!(spec.in_class(&empty).unwrap(), "{}", class.name());
        }
    }

    #[test]
    fn pairs_rejects_triple_class() {
        let spec = pairs();
        let mut s = FinStructure::new(spec.signature(), 3).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                s.set(0, vec![x, y]).unwrap();
            }
        }
        assert!(!spec.in_class(&s).unwrap());
        assert!(spec.in_class(&catalog::paired_equivalence(6)).unwrap());
    }

    #[test]
    fn graphs_membership() {
        let spec = graphs();
        assert!(spec.in_class(&catalog::cycle_graph(4)).unwrap());
        let mut loopy = FinStructure::new(spec.signature(), 1).unwrap();
        loopy.set(0, vec![0, 0]).unwrap();
        assert!(!spec.in_class(&loopy).unwrap());
    }

    #[test]
    fn age_of_paired_equivalence() {
        // {empty, point, non-pair, pair} at bound 2.
        let reps = age(&catalog::paired_equivalence(6), 2);
        assert_eq!(reps.len(), 4);
    }

    #[test]
    fn age_of_four_cycle() {
        // {empty, K1, K2, non-edge, P3} at bound 3: every 3 vertices of a
        // 4-cycle induce a path.
        let reps = age(&catalog::cycle_graph(4), 3);
        assert_eq!(reps.len(), 5);
    }

    #[test]
    fn age_of_limit_approximation_has_all_small_graphs() {
        // A depth-2-saturated approximation carries every graph on up to
        // 3 vertices: 1 + 1 + 2 + 4 classes.
        let out = build_limit(&graphs(), 14, 3, 1).unwrap();
        let reps = age(&out.structure, 3);
        assert_eq!(reps.len(), 8);
        for r in &reps {
            assert!(graphs().in_class(r).unwrap());
        }
    }

    #[test]
    fn graph_amalgam_is_free_superposition() {
        let spec = graphs();
        // A single vertex, two extensions by one neighbor each.
        let a = FinStructure::new(spec.signature(), 1).unwrap();
        let mut b = FinStructure::new(spec.signature(), 2).unwrap();
        b.set(0, vec![0, 1]).unwrap();
        b.set(0, vec![1, 0]).unwrap();
        let c = b.clone();
        let inc = PartialMap::from_pairs([(0, 0)]).unwrap();
        let verdict = amalgamate(&spec, &a, &b, &c, &inc, &inc, Flavor::Disjoint, 0).unwrap();
        match verdict {
            AmalgamVerdict::Amalgam { d, disjoint, .. } => {
                assert!(disjoint);
                assert_eq!(d.size(), 3);
                // No cross edge between the two new neighbors.
                assert!(!d.holds(0, &[1, 2]));
            }
            _ => panic!("expected amalgam"),
        }
    }

    #[test]
    fn trivial_amalgam_of_equal_parts() {
        let spec = graphs();
        let a = catalog::cycle_graph(4);
        let id = PartialMap::identity_on(a.universe());
        let verdict = amalgamate(&spec, &a, &a, &a, &id, &id, Flavor::Plain, 0).unwrap();
        match verdict {
            AmalgamVerdict::Amalgam { d, .. } => assert_eq!(d.size(), 4),
            _ => panic!("expected amalgam"),
        }
    }

    #[test]
    fn pairs_fail_disjoint_but_not_plain() {
        let spec = pairs();
        let disjoint = has_amalgamation(&spec, 3, Flavor::Disjoint, 0).unwrap();
        match &disjoint {
            AmalgamVerdict::Counterexample { a, b, c, .. } => {
                assert!(a.size() <= 3 && b.size() <= 3 && c.size() <= 3);
            }
            _ => panic!("expected counterexample"),
        }
        let plain = has_amalgamation(&spec, 3, Flavor::Plain, 0).unwrap();
        assert!(matches!(plain, AmalgamVerdict::HoldsUpTo { .. }));
    }

    #[test]
    fn graphs_have_disjoint_amalgamation_up_to_3() {
        let spec = graphs();
        let verdict = has_amalgamation(&spec, 3, Flavor::Disjoint, 0).unwrap();
        assert!(matches!(verdict, AmalgamVerdict::HoldsUpTo { .. }));
    }

    #[test]
    fn build_limit_zero_is_empty() {
        let out = build_limit(&graphs(), 0, 3, 7).unwrap();
        assert_eq!(out.structure.size(), 0);
        assert!(out.core.is_empty());
    }

    #[test]
    fn build_limit_small_graph_core_is_extension_complete() {
        let out = build_limit(&graphs(), 16, 2, 3).unwrap();
        assert_eq!(out.structure.size(), 16);
        let report =
            check_limit_properties(&out.structure, &graphs(), 2, Some(out.core), 1, 50).unwrap();
        assert_eq!(report.clause2_core_rate, Some(1.0));
        assert_eq!(report.clause1_rate, 1.0);
    }

    #[test]
    fn four_cycle_misses_depth2_extensions() {
        let report =
            check_limit_properties(&catalog::cycle_graph(4), &graphs(), 2, None, 1, 20).unwrap();
        assert!(report.clause2_rate < 1.0);
    }

    #[test]
    fn disjoint_amalgam_works_as_a_plain_one() {
        // The disjoint search space is the first slice of the plain one,
        // so a disjoint success re-runs verbatim under the plain flavor.
        let spec = graphs();
        let a = FinStructure::new(spec.signature(), 1).unwrap();
        let mut b = FinStructure::new(spec.signature(), 2).unwrap();
        b.set(0, vec![0, 1]).unwrap();
        b.set(0, vec![1, 0]).unwrap();
        let inc = PartialMap::from_pairs([(0, 0)]).unwrap();
        let d1 = amalgamate(&spec, &a, &b, &b, &inc, &inc, Flavor::Disjoint, 0).unwrap();
        let d2 = amalgamate(&spec, &a, &b, &b, &inc, &inc, Flavor::Plain, 0).unwrap();
        match (d1, d2) {
            (AmalgamVerdict::Amalgam { d: x, .. }, AmalgamVerdict::Amalgam { d: y, .. }) => {
                assert_eq!(x, y);
            }
            _ => panic!("both flavors must amalgamate"),
        }
    }

    #[test]
    fn linear_order_limit_core_is_dense_and_endless() {
        // Every core pair gets a point between them and each endpoint
        // requirement is met, which is exactly a perfect clause-2 rate.
        let spec = FraisseClassSpec::builtin(BuiltinClass::LinearOrders);
        let out = build_limit(&spec, 15, 2, 2).unwrap();
        assert_eq!(out.structure.size(), 15);
        let report =
            check_limit_properties(&out.structure, &spec, 2, Some(out.core), 2, 30).unwrap();
        assert_eq!(report.clause2_core_rate, Some(1.0));
        assert!(out.core.len() >= 3);
    }

    #[test]
    fn ages_of_limit_builds_stay_in_class() {
        for class in [
            BuiltinClass::Graphs,
            BuiltinClass::LinearOrders,
            BuiltinClass::EquivalencePairs,
            BuiltinClass::PureSets,
        ] {
            let spec = FraisseClassSpec::builtin(class);
            let out = build_limit(&spec, 12, 2, 9).unwrap();
            for rep in age(&out.structure, 3) {
                assert!(spec.in_class(&rep).unwrap(), "{}", class.name());
            }
        }
    }

    #[test]
    fn limit_is_deterministic_and_seed_relabels() {
        let a = build_limit(&graphs(), 12, 2, 5).unwrap();
        let b = build_limit(&graphs(), 12, 2, 5).unwrap();
        assert_eq!(a.structure, b.structure);
        let c = build_limit(&graphs(), 12, 2, 6).unwrap();
        // Different seed, same construction up to the relabeling.
        assert_eq!(
            a.structure.relabel(&a.relabel.inverse()),
            c.structure.relabel(&c.relabel.inverse())
        );
    }
}
