//! Finite relational structures over declared signatures.
//!
//! Universes are initial segments of the naturals.  Tables are kept sorted,
//! so equal structures have equal serializations and the JSON round-trip is
//! bit-exact.

use crate::error::{Error, Result};
use crate::groups::PermGroup;
use crate::perm::Perm;
use crate::set::ElemSet;
use crate::{DEFAULT_ARITY_CAP, MAX_UNIVERSE};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
}

/// A finite relational signature: named relations with positive arities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signature {
    relations: Vec<Relation>,
}

impl Signature {
    pub fn new(relations: Vec<(String, usize)>) -> Result<Self> {
        Self::with_cap(relations, DEFAULT_ARITY_CAP)
    }

    pub fn with_cap(relations: Vec<(String, usize)>, arity_cap: usize) -> Result<Self> {
        let mut names = BTreeSet::new();
        for (name, arity) in &relations {
            if *arity == 0 {
                return Err(Error::InvalidStructure(format!(
                    "relation {name} has arity 0"
                )));
            }
            if *arity > arity_cap {
                return Err(Error::ArityCapExceeded {
                    requested: *arity,
                    max: arity_cap,
                });
            }
            if !names.insert(name.clone()) {
                return Err(Error::InvalidStructure(format!(
                    "duplicate relation name {name}"
                )));
            }
        }
        Ok(Signature {
            relations: relations
                .into_iter()
                .map(|(name, arity)| Relation { name, arity })
                .collect(),
        })
    }

    pub fn empty() -> Self {
        Signature { relations: vec![] }
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn arity(&self, rel: usize) -> usize {
        self.relations[rel].arity
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn max_arity(&self) -> usize {
        self.relations.iter().map(|r| r.arity).max().unwrap_or(0)
    }
}

/// A finite structure: a signature, a universe `{0, .., size-1}`, and one
/// sorted tuple table per relation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinStructure {
    signature: Signature,
    size: usize,
    tables: Vec<BTreeSet<Vec<usize>>>,
}

impl FinStructure {
    pub fn new(signature: Signature, size: usize) -> Result<Self> {
        if size > MAX_UNIVERSE {
            return Err(Error::UniverseTooLarge {
                size,
                max: MAX_UNIVERSE,
            });
        }
        let tables = vec![BTreeSet::new(); signature.len()];
        Ok(FinStructure {
            signature,
            size,
            tables,
        })
    }

    pub fn empty(signature: Signature) -> Self {
        FinStructure::new(signature, 0).expect("empty structure")
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn universe(&self) -> ElemSet {
        ElemSet::full(self.size)
    }

    pub fn table(&self, rel: usize) -> &BTreeSet<Vec<usize>> {
        &self.tables[rel]
    }

    pub fn holds(&self, rel: usize, tuple: &[usize]) -> bool {
        self.tables[rel].contains(tuple)
    }

    pub fn set(&mut self, rel: usize, tuple: Vec<usize>) -> Result<()> {
        if tuple.len() != self.signature.arity(rel) {
            return Err(Error::InvalidStructure(format!(
                "tuple {tuple:?} has wrong length for relation {}",
                self.signature.relations()[rel].name
            )));
        }
        for &x in &tuple {
            if x >= self.size {
                return Err(Error::OutOfUniverse(x));
            }
        }
        self.tables[rel].insert(tuple);
        Ok(())
    }

    pub fn unset(&mut self, rel: usize, tuple: &[usize]) {
        self.tables[rel].remove(tuple);
    }

    /// Appends a fresh element and returns its index.
    pub fn push_element(&mut self) -> Result<usize> {
        if self.size >= MAX_UNIVERSE {
            return Err(Error::UniverseTooLarge {
                size: self.size + 1,
                max: MAX_UNIVERSE,
            });
        }
        self.size += 1;
        Ok(self.size - 1)
    }

    /// Total number of tuples across all tables.
    pub fn tuple_count(&self) -> usize {
        self.tables.iter().map(|t| t.len()).sum()
    }

    /// The structure with universe relabeled by `perm` (a bijection of the
    /// universe).
    pub fn relabel(&self, perm: &Perm) -> FinStructure {
        let mut out = FinStructure::new(self.signature.clone(), self.size).expect("same size");
        for (rel, table) in self.tables.iter().enumerate() {
            for tuple in table {
                out.tables[rel].insert(perm.apply_tuple(tuple));
            }
        }
        out
    }

    /// Canonical code used to order and deduplicate small structures up to
    /// isomorphism: the minimum relabeling, by brute force over all
    /// permutations of the universe.  Only sensible for small sizes.
    pub fn canonical_code(&self) -> FinStructure {
        let n = self.size;
        if n <= 1 {
            return self.clone();
        }
        let mut best: Option<FinStructure> = None;
        let mut idx: Vec<usize> = (0..n).collect();
        permute_all(&mut idx, &mut |p| {
            let perm = Perm::from_images(p.to_vec()).expect("bijection");
            let cand = self.relabel(&perm);
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        });
        best.unwrap()
    }

    pub fn json(&self) -> StructureJson {
        StructureJson {
            signature: self.signature.clone(),
            size: self.size,
            tables: self
                .signature
                .relations()
                .iter()
                .zip(&self.tables)
                .map(|(r, t)| (r.name.clone(), t.iter().cloned().collect()))
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.json()).expect("serializable")
    }

    pub fn from_json(doc: &StructureJson) -> Result<Self> {
        let mut s = FinStructure::new(doc.signature.clone(), doc.size)?;
        for (name, tuples) in &doc.tables {
            let rel = doc
                .signature
                .index_of(name)
                .ok_or_else(|| Error::MalformedInput(format!("unknown relation {name}")))?;
            for t in tuples {
                s.set(rel, t.clone())?;
            }
        }
        Ok(s)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: StructureJson =
            serde_json::from_str(text).map_err(|e| Error::MalformedInput(e.to_string()))?;
        Self::from_json(&doc)
    }
}

/// JSON mirror of [`FinStructure`]; tables keyed by relation name.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureJson {
    pub signature: Signature,
    pub size: usize,
    pub tables: BTreeMap<String, Vec<Vec<usize>>>,
}

fn permute_all(idx: &mut [usize], visit: &mut impl FnMut(&[usize])) {
    fn rec(idx: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
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

/// A finite injective partial map between two universes.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartialMap {
    pairs: BTreeMap<usize, usize>,
}

impl PartialMap {
    pub fn new() -> Self {
        PartialMap::default()
    }

    pub fn identity_on(s: ElemSet) -> Self {
        PartialMap {
            pairs: s.iter().map(|x| (x, x)).collect(),
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut m = PartialMap::new();
        for (x, y) in pairs {
            m.insert(x, y)?;
        }
        Ok(m)
    }

    pub fn insert(&mut self, x: usize, y: usize) -> Result<()> {
        if let Some(&old) = self.pairs.get(&x) {
            if old != y {
                return Err(Error::InvalidStructure(format!(
                    "partial map already sends {x} to {old}"
                )));
            }
            return Ok(());
        }
        if self.pairs.values().any(|&v| v == y) {
            return Err(Error::InvalidStructure(format!(
                "partial map already hits {y}; not injective"
            )));
        }
        self.pairs.insert(x, y);
        Ok(())
    }

    pub fn get(&self, x: usize) -> Option<usize> {
        self.pairs.get(&x).copied()
    }

    pub fn remove(&mut self, x: usize) -> Option<usize> {
        self.pairs.remove(&x)
    }

    pub fn domain(&self) -> ElemSet {
        self.pairs.keys().copied().collect()
    }

    pub fn range(&self) -> ElemSet {
        self.pairs.values().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().map(|(&x, &y)| (x, y))
    }

    #[must_use]
    pub fn inverse(&self) -> PartialMap {
        PartialMap {
            pairs: self.pairs.iter().map(|(&x, &y)| (y, x)).collect(),
        }
    }

    /// Does every pair of `sub` appear in `self`?
    pub fn extends(&self, sub: &PartialMap) -> bool {
        sub.pairs().all(|(x, y)| self.get(x) == Some(y))
    }
}

/// The quantifier-free type of a tuple: its equality pattern plus the set
/// of atomic facts, both phrased in terms of tuple positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QfType {
    pub arity: usize,
    /// `eq_pattern[i]` is the least position `j <= i` with `t[j] = t[i]`.
    pub eq_pattern: Vec<usize>,
    /// Atomic facts `(relation, positions)` holding of the tuple.
    pub atoms: BTreeSet<(usize, Vec<usize>)>,
}

impl QfType {
    pub fn empty() -> Self {
        QfType {
            arity: 0,
            eq_pattern: vec![],
            atoms: BTreeSet::new(),
        }
    }
}

/// The quantifier-free type of `tuple` in `a`.
pub fn qf_type(a: &FinStructure, tuple: &[usize]) -> QfType {
    let k = tuple.len();
    let eq_pattern = (0..k)
        .map(|i| (0..=i).find(|&j| tuple[j] == tuple[i]).unwrap())
        .collect();
    let mut atoms = BTreeSet::new();
    for (rel, r) in a.signature().relations().iter().enumerate() {
        let m = r.arity;
        if k == 0 {
            continue;
        }
        for positions in tuples_over(k, m) {
            let concrete: Vec<usize> = positions.iter().map(|&i| tuple[i]).collect();
            if a.holds(rel, &concrete) {
                atoms.insert((rel, positions));
            }
        }
    }
    QfType {
        arity: k,
        eq_pattern,
        atoms,
    }
}

/// All tuples of length `m` over `{0, .., k-1}`, lexicographically.
pub fn tuples_over(k: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        let mut next = Vec::with_capacity(out.len() * k);
        for t in &out {
            for x in 0..k {
                let mut t2 = t.clone();
                t2.push(x);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// Is `f` an embedding of `a` into `b`, i.e. total on `a`, injective, and
/// preserving and reflecting every relation?
pub fn is_embedding(f: &PartialMap, a: &FinStructure, b: &FinStructure) -> Result<bool> {
    if a.signature() != b.signature() {
        return Err(Error::SignatureMismatch(
            "embedding check requires matching signatures".into(),
        ));
    }
    if f.domain() != a.universe() {
        return Err(Error::Precondition(
            "map must be total on the source universe".into(),
        ));
    }
    if !f.range().is_subset(b.universe()) {
        return Ok(false);
    }
    // Injectivity is enforced by PartialMap.  Preservation and reflection:
    for (rel, r) in a.signature().relations().iter().enumerate() {
        for tuple in tuples_over(a.size(), r.arity) {
            let image: Vec<usize> = tuple.iter().map(|&x| f.get(x).unwrap()).collect();
            if a.holds(rel, &tuple) != b.holds(rel, &image) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The substructure of `b` induced on `s`, re-indexed onto `{0, .., |s|-1}`.
/// Returns the structure together with the map `new index -> old element`.
pub fn induced_substructure(b: &FinStructure, s: ElemSet) -> (FinStructure, Vec<usize>) {
    let elems = s.to_vec();
    let mut back = vec![usize::MAX; b.size()];
    for (new, &old) in elems.iter().enumerate() {
        back[old] = new;
    }
    let mut out = FinStructure::new(b.signature().clone(), elems.len()).expect("smaller");
    for (rel, table) in b.tables.iter().enumerate() {
        for tuple in table {
            if tuple.iter().all(|&x| s.contains(x)) {
                out.tables[rel].insert(tuple.iter().map(|&x| back[x]).collect());
            }
        }
    }
    (out, elems)
}

/// One relation per orbit of tuples (arities `1..=arity_cap`) under the
/// given generators, interpreted as that orbit.  Relations are named by the
/// lexicographically least tuple in the orbit.
pub fn orbit_structure(domain: usize, gens: &[Perm], arity_cap: usize) -> Result<FinStructure> {
    if arity_cap == 0 {
        return Err(Error::Precondition("arity cap must be at least 1".into()));
    }
    let mut rel_names: Vec<(String, usize)> = Vec::new();
    let mut rel_tables: Vec<BTreeSet<Vec<usize>>> = Vec::new();
    for arity in 1..=arity_cap {
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        for tuple in tuples_over(domain, arity) {
            if seen.contains(&tuple) {
                continue;
            }
            // BFS over the orbit of the tuple.
            let mut orbit: BTreeSet<Vec<usize>> = BTreeSet::new();
            let mut queue = vec![tuple.clone()];
            orbit.insert(tuple.clone());
            while let Some(t) = queue.pop() {
                for g in gens {
                    let t2 = g.apply_tuple(&t);
                    if orbit.insert(t2.clone()) {
                        queue.push(t2);
                    }
                }
            }
            let least = orbit.iter().next().expect("nonempty").clone();
            let name = std::iter::once(format!("R{arity}"))
                .chain(least.iter().map(|x| x.to_string()))
                .collect::<Vec<_>>()
                .join("_");
            rel_names.push((name, arity));
            for t in &orbit {
                seen.insert(t.clone());
            }
            rel_tables.push(orbit);
        }
    }
    let sig = Signature::with_cap(rel_names, arity_cap)?;
    let mut out = FinStructure::new(sig, domain)?;
    out.tables = rel_tables;
    Ok(out)
}

/// The canonical structure of a group action: orbit relations up to
/// `arity_cap`.  Its automorphism group contains the acting group and, for
/// finite actions, matches it up to `arity_cap`-definability.
pub fn structure_from_action(p: &PermGroup, arity_cap: usize) -> Result<FinStructure> {
    orbit_structure(p.domain_size(), p.generators(), arity_cap)
}

/// Expands `m` with one relation per automorphism orbit of tuples up to
/// `arity_cap`.  The expansion is ultrahomogeneous for tuples up to the cap
/// and has the same automorphisms whenever the cap covers the signature.
pub fn ultrahomogenize(
    m: &FinStructure,
    arity_cap: usize,
    global_cap: usize,
) -> Result<FinStructure> {
    if arity_cap > global_cap {
        return Err(Error::ArityCapExceeded {
            requested: arity_cap,
            max: global_cap,
        });
    }
    let auts = crate::groups::automorphism_group(m);
    orbit_structure(m.size(), auts.generators(), arity_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn identity_is_embedding() {
        let e2 = catalog::paired_equivalence(6);
        let id = PartialMap::identity_on(e2.universe());
        assert!(is_embedding(&id, &e2, &e2).unwrap());
    }

    #[test]
    fn edge_reversal_is_not_an_embedding() {
        // Directed edge 0 -> 1; the swap reverses it.
        let sig = Signature::new(vec![("E".into(), 2)]).unwrap();
        let mut a = FinStructure::new(sig, 2).unwrap();
        a.set(0, vec![0, 1]).unwrap();
        let swap = PartialMap::from_pairs([(0, 1), (1, 0)]).unwrap();
        assert!(!is_embedding(&swap, &a, &a).unwrap());
    }

    #[test]
    fn cross_class_map_into_pairs_fails() {
        // {0 -> 2, 1 -> 4} from one partnered pair into E2(6): 2 and 4 sit
        // in different classes.
        let e2 = catalog::paired_equivalence(6);
        let (edge, _) = induced_substructure(&e2, [0, 1].into_iter().collect());
        let f = PartialMap::from_pairs([(0, 2), (1, 4)]).unwrap();
        assert!(!is_embedding(&f, &edge, &e2).unwrap());
    }

    #[test]
    fn induced_full_and_empty() {
        let e2 = catalog::paired_equivalence(6);
        let (full, map) = induced_substructure(&e2, e2.universe());
        assert_eq!(full, e2);
        assert_eq!(map, vec![0, 1, 2, 3, 4, 5]);
        let (empty, map) = induced_substructure(&e2, ElemSet::empty());
        assert_eq!(empty.size(), 0);
        assert!(map.is_empty());
    }

    #[test]
    fn induced_restriction_of_pairs() {
        // E2(6) on {0,2,3}: one singleton plus one pair.
        let e2 = catalog::paired_equivalence(6);
        let (sub, map) = induced_substructure(&e2, [0, 2, 3].into_iter().collect());
        assert_eq!(map, vec![0, 2, 3]);
        let rel = sub.signature().index_of("E").unwrap();
        assert!(sub.holds(rel, &[1, 2]) && sub.holds(rel, &[2, 1]));
        assert!(!sub.holds(rel, &[0, 1]) && !sub.holds(rel, &[0, 2]));
    }

    #[test]
    fn qf_types_in_paired_equivalence() {
        let e2 = catalog::paired_equivalence(6);
        assert_eq!(qf_type(&e2, &[]), QfType::empty());
        assert_eq!(qf_type(&e2, &[0, 1]), qf_type(&e2, &[2, 3]));
        assert_ne!(qf_type(&e2, &[0, 2]), qf_type(&e2, &[0, 1]));
    }

    #[test]
    fn json_roundtrip_is_bit_exact() {
        let e2 = catalog::paired_equivalence(6);
        let text = e2.to_json_string();
        let back = FinStructure::from_json_str(&text).unwrap();
        assert_eq!(back, e2);
        assert_eq!(back.to_json_string(), text);
    }
}
