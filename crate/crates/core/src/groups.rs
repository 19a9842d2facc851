//! Permutation groups on finite domains.
//!
//! A [`PermGroup`] holds its generators plus a stabilizer chain built
//! eagerly at construction, which certifies the group order and backs
//! membership tests, pointwise stabilizers, and the backtracking searches
//! (setwise stabilizers, congruence witnesses).
//!
//! The naive closure [`naive_elements`] is kept alongside as the test
//! oracle for small domains.

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::set::ElemSet;
use crate::structures::{tuples_over, FinStructure, PartialMap};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

#[derive(Debug, Clone)]
struct Level {
    point: usize,
    gens: Vec<Perm>,
    /// orbit point -> coset representative mapping `point` there.
    transversal: BTreeMap<usize, Perm>,
}

#[derive(Debug, Clone)]
pub struct PermGroup {
    domain: usize,
    gens: Vec<Perm>,
    levels: Vec<Level>,
}

impl PermGroup {
    pub fn new(domain: usize, gens: Vec<Perm>) -> Self {
        Self::with_base_hint(domain, gens, &[])
    }

    pub fn trivial(domain: usize) -> Self {
        Self::new(domain, vec![])
    }

    pub fn symmetric(domain: usize) -> Self {
        let mut gens = vec![];
        if domain >= 2 {
            gens.push(Perm::from_cycles(domain, &[&[0, 1]]).unwrap());
            let cycle: Vec<usize> = (0..domain).collect();
            gens.push(Perm::from_cycles(domain, &[&cycle]).unwrap());
        }
        Self::new(domain, gens)
    }

    pub fn cyclic(domain: usize) -> Self {
        let mut gens = vec![];
        if domain >= 2 {
            let cycle: Vec<usize> = (0..domain).collect();
            gens.push(Perm::from_cycles(domain, &[&cycle]).unwrap());
        }
        Self::new(domain, gens)
    }

    /// Builds the stabilizer chain with the given points forced to the
    /// front of the base (used for pointwise stabilizers).
    pub fn with_base_hint(domain: usize, gens: Vec<Perm>, base_hint: &[usize]) -> Self {
        for g in &gens {
            assert_eq!(g.degree(), domain, "generator degree mismatch");
        }
        let gens: Vec<Perm> = gens.into_iter().filter(|g| !g.is_identity()).collect();
        let mut group = PermGroup {
            domain,
            gens: gens.clone(),
            levels: base_hint
                .iter()
                .map(|&p| Level {
                    point: p,
                    gens: vec![],
                    transversal: BTreeMap::from([(p, Perm::identity(domain))]),
                })
                .collect(),
        };
        for g in gens {
            group.insert_gen(0, g);
        }
        group
    }

    pub fn domain_size(&self) -> usize {
        self.domain
    }

    pub fn generators(&self) -> &[Perm] {
        &self.gens
    }

    fn gens_from_level(&self, level: usize) -> Vec<Perm> {
        self.levels[level..]
            .iter()
            .flat_map(|l| l.gens.iter().cloned())
            .collect()
    }

    fn recompute_transversal(&mut self, level: usize) {
        let gens = self.gens_from_level(level);
        let point = self.levels[level].point;
        let mut transversal = BTreeMap::from([(point, Perm::identity(self.domain))]);
        let mut queue = vec![point];
        while let Some(x) = queue.pop() {
            let rep = transversal[&x].clone();
            for g in &gens {
                let y = g.apply(x);
                if !transversal.contains_key(&y) {
                    transversal.insert(y, g.compose(&rep));
                    queue.push(y);
                }
            }
        }
        self.levels[level].transversal = transversal;
    }

    /// Sift `g` through levels `level..`; returns true iff it reduces to
    /// the identity, i.e. lies in the level subgroup.
    fn sifts_from(&self, level: usize, g: &Perm) -> bool {
        let mut h = g.clone();
        for i in level..self.levels.len() {
            let x = h.apply(self.levels[i].point);
            match self.levels[i].transversal.get(&x) {
                Some(rep) => h = rep.inverse().compose(&h),
                None => return false,
            }
        }
        h.is_identity()
    }

    fn insert_gen(&mut self, level: usize, g: Perm) {
        if g.is_identity() {
            return;
        }
        if level == self.levels.len() {
            let point = g
                .support()
                .min()
                .expect("non-identity permutation moves something");
            self.levels.push(Level {
                point,
                gens: vec![],
                transversal: BTreeMap::from([(point, Perm::identity(self.domain))]),
            });
        }
        if self.sifts_from(level, &g) {
            return;
        }
        self.levels[level].gens.push(g);
        // Re-close this level: new orbit, then Schreier generators pushed
        // down.  Deeper insertions may enlarge deeper groups, which can in
        // turn enlarge this orbit, so iterate to a fixpoint.
        loop {
            self.recompute_transversal(level);
            let point = self.levels[level].point;
            let gens = self.gens_from_level(level);
            let transversal = self.levels[level].transversal.clone();
            let mut added = false;
            for (&x, rep) in &transversal {
                for s in &gens {
                    let y = s.apply(x);
                    let rep_y = &transversal[&y];
                    let schreier = rep_y.inverse().compose(&s.compose(rep));
                    debug_assert_eq!(schreier.apply(point), point);
                    if !schreier.is_identity() && !self.sifts_from(level + 1, &schreier) {
                        self.insert_gen(level + 1, schreier);
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
    }

    pub fn order(&self) -> u128 {
        self.levels
            .iter()
            .map(|l| l.transversal.len() as u128)
            .product()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        g.degree() == self.domain && self.sifts_from(0, g)
    }

    /// All group elements, via the chain.  Guarded: errors when the order
    /// exceeds `limit`.
    pub fn elements(&self, limit: u128) -> Result<Vec<Perm>> {
        let order = self.order();
        if order > limit {
            return Err(Error::DomainTooLarge {
                size: order as usize,
                max: limit as usize,
            });
        }
        let mut out = vec![Perm::identity(self.domain)];
        for level in self.levels.iter().rev() {
            let mut next = Vec::with_capacity(out.len() * level.transversal.len());
            for rep in level.transversal.values() {
                for h in &out {
                    next.push(rep.compose(h));
                }
            }
            out = next;
        }
        out.sort();
        Ok(out)
    }

    /// Orbit of a point under the whole group.
    pub fn orbit(&self, x: usize) -> ElemSet {
        orbit_of_point(x, &self.gens, self.domain)
    }

    /// Orbit of a set under the whole group, as a sorted list of masks.
    pub fn set_orbit(&self, s: ElemSet) -> Vec<ElemSet> {
        let mut seen = BTreeSet::from([s]);
        let mut queue = vec![s];
        while let Some(t) = queue.pop() {
            for g in &self.gens {
                let u = g.apply_set(t);
                if seen.insert(u) {
                    queue.push(u);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Pointwise stabilizer of `b`, via base change.
    pub fn pointwise_stabilizer(&self, b: ElemSet) -> PermGroup {
        let hint: Vec<usize> = b.to_vec();
        let rebased = PermGroup::with_base_hint(self.domain, self.gens.clone(), &hint);
        let stab_gens = rebased.gens_from_level(hint.len());
        PermGroup::new(self.domain, stab_gens)
    }

    /// Setwise stabilizer of `b`, by backtracking over the chain.
    pub fn setwise_stabilizer(&self, b: ElemSet) -> PermGroup {
        let mut found = PermGroup::trivial(self.domain);
        let mut gens: Vec<Perm> = vec![];
        self.coset_dfs(
            &mut |point, image| !(b.contains(point) ^ b.contains(image)),
            &mut |g| {
                if g.apply_set(b) == b && !found.contains(g) {
                    gens.push(g.clone());
                    found = PermGroup::new(self.domain, gens.clone());
                }
                true
            },
        );
        found
    }

    /// Orbit of `a` under the pointwise stabilizer of `b`: the congruence
    /// class of `a` over `b`.
    pub fn orbit_over(&self, a: usize, b: ElemSet) -> ElemSet {
        let stab = self.pointwise_stabilizer(b);
        orbit_of_point(a, &stab.gens, self.domain)
    }

    /// Searches for a group element fixing `c` pointwise with `g[a] = b`.
    pub fn set_congruence_witness(&self, a: ElemSet, b: ElemSet, c: ElemSet) -> Option<Perm> {
        if a.len() != b.len() {
            return None;
        }
        if a.intersect(c) != b.intersect(c) {
            return None;
        }
        let stab = self.pointwise_stabilizer(c);
        let mut witness = None;
        stab.coset_dfs(
            &mut |point, image| {
                if c.contains(point) && point != image {
                    return false;
                }
                !(a.contains(point) ^ b.contains(image))
            },
            &mut |g| {
                if g.fixes_pointwise(c) && g.apply_set(a) == b {
                    witness = Some(g.clone());
                    false
                } else {
                    true
                }
            },
        );
        witness
    }

    /// Depth-first search over the chain cosets.  `prune(point, image)` is
    /// consulted whenever a base point's image becomes final; `visit`
    /// receives each surviving leaf element and returns false to stop.
    fn coset_dfs(
        &self,
        prune: &mut dyn FnMut(usize, usize) -> bool,
        visit: &mut dyn FnMut(&Perm) -> bool,
    ) {
        fn rec(
            group: &PermGroup,
            level: usize,
            prefix: Perm,
            prune: &mut dyn FnMut(usize, usize) -> bool,
            visit: &mut dyn FnMut(&Perm) -> bool,
        ) -> bool {
            if level == group.levels.len() {
                return visit(&prefix);
            }
            let point = group.levels[level].point;
            for rep in group.levels[level].transversal.values() {
                let next = prefix.compose(rep);
                if !prune(point, next.apply(point)) {
                    continue;
                }
                if !rec(group, level + 1, next, prune, visit) {
                    return false;
                }
            }
            true
        }
        rec(self, 0, Perm::identity(self.domain), prune, visit);
    }

    /// Lexicographically least `(set, point)` pair in the orbit of
    /// `(b, a)` under the group (set compared by mask).
    pub fn canonical_pair(&self, b: ElemSet, a: usize) -> (ElemSet, usize) {
        let mut seen = BTreeSet::from([(b, a)]);
        let mut queue = vec![(b, a)];
        while let Some((s, x)) = queue.pop() {
            for g in &self.gens {
                let next = (g.apply_set(s), g.apply(x));
                if seen.insert(next) {
                    queue.push(next);
                }
            }
        }
        seen.into_iter().next().unwrap()
    }

    pub fn json(&self) -> GroupJson {
        GroupJson {
            domain_size: self.domain,
            generators: self.gens.iter().map(|g| g.images().to_vec()).collect(),
        }
    }

    pub fn from_json(doc: &GroupJson) -> Result<Self> {
        let mut gens = vec![];
        for images in &doc.generators {
            if images.len() != doc.domain_size {
                return Err(Error::InvalidPermutation(format!(
                    "generator of degree {} on a domain of size {}",
                    images.len(),
                    doc.domain_size
                )));
            }
            gens.push(Perm::from_images(images.clone())?);
        }
        Ok(PermGroup::new(doc.domain_size, gens))
    }
}

/// JSON mirror of [`PermGroup`]: domain size plus generator image tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupJson {
    pub domain_size: usize,
    pub generators: Vec<Vec<usize>>,
}

pub fn orbit_of_point(x: usize, gens: &[Perm], _domain: usize) -> ElemSet {
    let mut orbit = ElemSet::singleton(x);
    let mut queue = vec![x];
    while let Some(y) = queue.pop() {
        for g in gens {
            let z = g.apply(y);
            if !orbit.contains(z) {
                orbit.insert(z);
                queue.push(z);
            }
        }
    }
    orbit
}

/// Naive closure of the generators under composition.  Test oracle; never
/// used by the engines.
pub fn naive_elements(domain: usize, gens: &[Perm]) -> Vec<Perm> {
    let mut seen: BTreeSet<Perm> = BTreeSet::from([Perm::identity(domain)]);
    let mut queue: Vec<Perm> = vec![Perm::identity(domain)];
    while let Some(h) = queue.pop() {
        for g in gens {
            let next = g.compose(&h);
            if seen.insert(next.clone()) {
                queue.push(next);
            }
        }
    }
    seen.into_iter().collect()
}

/// Brute-force automorphisms of a structure: every permutation of the
/// universe, filtered.  Test oracle for sizes up to about 8.
pub fn naive_automorphisms(m: &FinStructure) -> Vec<Perm> {
    let n = m.size();
    let mut out = vec![];
    let mut idx: Vec<usize> = (0..n).collect();
    fn rec(idx: &mut Vec<usize>, k: usize, m: &FinStructure, out: &mut Vec<Perm>) {
        if k == idx.len() {
            let p = Perm::from_images(idx.clone()).unwrap();
            if m.relabel(&p) == *m {
                out.push(p);
            }
            return;
        }
        for i in k..idx.len() {
            idx.swap(k, i);
            rec(idx, k + 1, m, out);
            idx.swap(k, i);
        }
    }
    rec(&mut idx, 0, m, &mut out);
    out.sort();
    out
}

// ---------------------------------------------------------------------
// Partition refinement and backtracking search.

/// Iterated color refinement.  Each vertex's color is refined by the
/// multiset of (relation, occupied positions, tuple colors) over the
/// tuples it appears in, until stable.
fn refine_colors(m: &FinStructure, init: &[u64]) -> Vec<u64> {
    let n = m.size();
    let mut colors = init.to_vec();
    loop {
        let mut keys: Vec<(u64, Vec<(usize, Vec<usize>, Vec<u64>)>)> =
            (0..n).map(|v| (colors[v], Vec::new())).collect();
        for (rel, _) in m.signature().relations().iter().enumerate() {
            for tuple in m.table(rel) {
                let tuple_colors: Vec<u64> = tuple.iter().map(|&x| colors[x]).collect();
                let mut members: Vec<usize> = tuple.clone();
                members.sort_unstable();
                members.dedup();
                for &v in &members {
                    let positions: Vec<usize> = tuple
                        .iter()
                        .enumerate()
                        .filter(|&(_, &x)| x == v)
                        .map(|(i, _)| i)
                        .collect();
                    keys[v].1.push((rel, positions, tuple_colors.clone()));
                }
            }
        }
        for key in &mut keys {
            key.1.sort();
        }
        let mut sorted: Vec<&(u64, Vec<(usize, Vec<usize>, Vec<u64>)>)> = keys.iter().collect();
        sorted.sort();
        sorted.dedup();
        let index: HashMap<_, u64> = sorted
            .iter()
            .enumerate()
            .map(|(i, k)| ((*k).clone(), i as u64))
            .collect();
        let next: Vec<u64> = keys.iter().map(|k| index[k]).collect();
        if next == colors {
            return next;
        }
        colors = next;
    }
}

fn color_histogram(colors: &[u64]) -> BTreeMap<u64, usize> {
    let mut h = BTreeMap::new();
    for &c in colors {
        *h.entry(c).or_insert(0) += 1;
    }
    h
}

/// Is the partial assignment `map` (a -> b) consistent on all tuples fully
/// inside the assigned part that involve `v`?
fn consistent_at(a: &FinStructure, b: &FinStructure, map: &[Option<usize>], v: usize) -> bool {
    let assigned: Vec<usize> = map
        .iter()
        .enumerate()
        .filter_map(|(x, y)| y.map(|_| x))
        .collect();
    for (rel, r) in a.signature().relations().iter().enumerate() {
        for positions in tuples_over(assigned.len(), r.arity) {
            let tuple: Vec<usize> = positions.iter().map(|&i| assigned[i]).collect();
            if !tuple.contains(&v) {
                continue;
            }
            let image: Vec<usize> = tuple.iter().map(|&x| map[x].unwrap()).collect();
            if a.holds(rel, &tuple) != b.holds(rel, &image) {
                return false;
            }
        }
    }
    true
}

/// Backtracking isomorphism search from `a` to `b` honoring `forced`
/// assignments.  Returns the first isomorphism found, as an image table.
pub fn find_isomorphism_with(
    a: &FinStructure,
    b: &FinStructure,
    forced: &PartialMap,
) -> Option<Vec<usize>> {
    if a.signature() != b.signature() || a.size() != b.size() {
        return None;
    }
    let n = a.size();
    if n == 0 {
        return Some(vec![]);
    }
    // Individualize forced vertices with matching distinguished colors.
    let mut init_a = vec![0u64; n];
    let mut init_b = vec![0u64; n];
    for (i, (x, y)) in forced.pairs().enumerate() {
        init_a[x] = i as u64 + 1;
        init_b[y] = i as u64 + 1;
    }
    let colors_a = refine_colors(a, &init_a);
    let colors_b = refine_colors(b, &init_b);
    if color_histogram(&colors_a) != color_histogram(&colors_b) {
        return None;
    }

    let mut map: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    for (x, y) in forced.pairs() {
        map[x] = Some(y);
        used[y] = true;
        if !consistent_at(a, b, &map, x) {
            return None;
        }
    }

    fn rec(
        a: &FinStructure,
        b: &FinStructure,
        colors_a: &[u64],
        colors_b: &[u64],
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
    ) -> bool {
        // Most-constrained unassigned vertex.
        let mut best: Option<(usize, Vec<usize>)> = None;
        for v in 0..a.size() {
            if map[v].is_some() {
                continue;
            }
            let cands: Vec<usize> = (0..b.size())
                .filter(|&w| !used[w] && colors_b[w] == colors_a[v])
                .collect();
            if best.as_ref().map_or(true, |(_, c)| cands.len() < c.len()) {
                best = Some((v, cands));
            }
        }
        let Some((v, cands)) = best else {
            return true; // everything assigned
        };
        for w in cands {
            map[v] = Some(w);
            used[w] = true;
            if consistent_at(a, b, map, v) && rec(a, b, colors_a, colors_b, map, used) {
                return true;
            }
            map[v] = None;
            used[w] = false;
        }
        false
    }

    if rec(a, b, &colors_a, &colors_b, &mut map, &mut used) {
        Some(map.into_iter().map(|x| x.unwrap()).collect())
    } else {
        None
    }
}

pub fn find_isomorphism(a: &FinStructure, b: &FinStructure) -> Option<Vec<usize>> {
    find_isomorphism_with(a, b, &PartialMap::new())
}

/// Generators of the automorphism group, by individualization over the
/// refined partition: fix a vertex of the first non-singleton cell,
/// recurse for its stabilizer, and add one coset witness per orbit point.
pub fn automorphism_group(m: &FinStructure) -> PermGroup {
    fn gens_fixing(m: &FinStructure, fixed: &[usize]) -> Vec<Perm> {
        let n = m.size();
        let mut init = vec![0u64; n];
        for (i, &x) in fixed.iter().enumerate() {
            init[x] = i as u64 + 1;
        }
        let colors = refine_colors(m, &init);
        // First cell with at least two members, by color value.
        let mut cells: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (v, &c) in colors.iter().enumerate() {
            cells.entry(c).or_default().push(v);
        }
        let Some(cell) = cells.values().find(|c| c.len() >= 2) else {
            return vec![];
        };
        let v = cell[0];
        let mut fixed_v = fixed.to_vec();
        fixed_v.push(v);
        let mut gens = gens_fixing(m, &fixed_v);
        for &w in &cell[1..] {
            if orbit_of_point(v, &gens, n).contains(w) {
                continue;
            }
            let mut forced = PartialMap::new();
            for &x in fixed {
                forced.insert(x, x).unwrap();
            }
            forced.insert(v, w).unwrap();
            if let Some(images) = find_isomorphism_with(m, m, &forced) {
                gens.push(Perm::from_images(images).unwrap());
            }
        }
        gens
    }
    if m.size() == 0 {
        return PermGroup::trivial(0);
    }
    PermGroup::new(m.size(), gens_fixing(m, &[]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::structures::Signature;

    #[test]
    fn chain_order_matches_naive_closure() {
        for group in [
            PermGroup::symmetric(4),
            PermGroup::cyclic(4),
            PermGroup::symmetric(5),
            PermGroup::trivial(3),
            catalog::delta_action_group(2, 3),
        ] {
            let naive = naive_elements(group.domain_size(), group.generators());
            assert_eq!(group.order(), naive.len() as u128);
            for g in &naive {
                assert!(group.contains(g));
            }
        }
    }

    #[test]
    fn chain_order_matches_naive_up_to_seven_points() {
        for group in [
            PermGroup::symmetric(6),
            PermGroup::symmetric(7),
            PermGroup::cyclic(7),
            catalog::delta_action_group(3, 2),
        ] {
            let naive = naive_elements(group.domain_size(), group.generators());
            assert_eq!(group.order(), naive.len() as u128);
        }
    }

    #[test]
    fn elements_listing_matches_naive() {
        let g = PermGroup::symmetric(4);
        let listed = g.elements(1 << 20).unwrap();
        let naive = naive_elements(4, g.generators());
        assert_eq!(listed, naive);
    }

    #[test]
    fn pointwise_stabilizer_of_s4() {
        let s4 = PermGroup::symmetric(4);
        let stab = s4.pointwise_stabilizer(ElemSet::singleton(1));
        assert_eq!(stab.order(), 6);
        assert!(stab.generators().iter().all(|g| g.apply(1) == 1));
        // Empty base: the group itself.
        assert_eq!(s4.pointwise_stabilizer(ElemSet::empty()).order(), 24);
    }

    #[test]
    fn cyclic_point_stabilizer_is_trivial() {
        let c4 = PermGroup::cyclic(4);
        assert_eq!(c4.pointwise_stabilizer(ElemSet::singleton(0)).order(), 1);
    }

    #[test]
    fn setwise_stabilizer_sizes() {
        let s4 = PermGroup::symmetric(4);
        let stab = s4.setwise_stabilizer([0, 1].into_iter().collect());
        assert_eq!(stab.order(), 4); // 2! * 2!
        let c4 = PermGroup::cyclic(4);
        let stab = c4.setwise_stabilizer([0, 2].into_iter().collect());
        assert_eq!(stab.order(), 2);
    }

    #[test]
    fn orbit_over_base() {
        let s4 = PermGroup::symmetric(4);
        assert_eq!(
            s4.orbit_over(0, ElemSet::singleton(1)).to_vec(),
            vec![0, 2, 3]
        );
        assert_eq!(s4.orbit_over(1, ElemSet::singleton(1)).to_vec(), vec![1]);
    }

    #[test]
    fn congruence_witness_cases() {
        let s4 = PermGroup::symmetric(4);
        let a: ElemSet = [0, 1].into_iter().collect();
        let b: ElemSet = [2, 3].into_iter().collect();
        let w = s4.set_congruence_witness(a, b, ElemSet::empty()).unwrap();
        assert_eq!(w.apply_set(a), b);

        let c4 = PermGroup::cyclic(4);
        let a: ElemSet = [0, 1].into_iter().collect();
        let b: ElemSet = [0, 2].into_iter().collect();
        assert!(c4
            .set_congruence_witness(a, b, ElemSet::singleton(0))
            .is_none());
    }

    #[test]
    fn automorphisms_of_catalog_structures() {
        // Empty signature on n points: the full symmetric group.
        let pure = FinStructure::new(Signature::empty(), 5).unwrap();
        assert_eq!(automorphism_group(&pure).order(), 120);

        // Paired equivalence on 6 points: order 48, matching brute force.
        let e2 = catalog::paired_equivalence(6);
        let group = automorphism_group(&e2);
        assert_eq!(group.order(), 48);
        assert_eq!(naive_automorphisms(&e2).len(), 48);

        // A rigid 3-element linear order.
        let lin = catalog::linear_order(3);
        assert_eq!(automorphism_group(&lin).order(), 1);

        // The 4-cycle graph: dihedral of order 8.
        let c4 = catalog::cycle_graph(4);
        assert_eq!(automorphism_group(&c4).order(), 8);
    }

    #[test]
    fn automorphism_generators_always_in_brute_set() {
        let e2 = catalog::paired_equivalence(4);
        let group = automorphism_group(&e2);
        let brute: BTreeSet<Perm> = naive_automorphisms(&e2).into_iter().collect();
        for g in group.generators() {
            assert!(brute.contains(g));
        }
        assert_eq!(group.order(), brute.len() as u128);
    }

    #[test]
    fn canonical_pair_is_orbit_least() {
        let s4 = PermGroup::symmetric(4);
        let b: ElemSet = [2, 3].into_iter().collect();
        let (cb, ca) = s4.canonical_pair(b, 1);
        assert_eq!(cb.to_vec(), vec![0, 1]);
        assert_eq!(ca, 2);
    }
}
