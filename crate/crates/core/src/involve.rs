//! Colored structures and the back-and-forth construction of
//! color-permuting partial automorphisms.
//!
//! Coloring an amalgamation class and restricting to strong substructures
//! that keep closure-captured elements null turns a disjointifying
//! closure operator into a supply of color-respecting extensions.  The
//! run here builds, stage by stage, a partial automorphism `g` of a
//! colored limit approximation realizing a target color permutation:
//! odd stages swallow the next enumerated element on the `A` side, even
//! stages on the `B` side, and every stage re-verifies the six chain
//! conditions before returning.

use crate::closure::ClosureOperator;
use crate::error::{Error, Result};
use crate::fraisse::{atoms_of, BuiltinClass, FraisseClassSpec, NewAtoms};
use crate::perm::Perm;
use crate::set::ElemSet;
use crate::structures::{FinStructure, PartialMap};
use serde::{Deserialize, Serialize};

/// A finite structure with an element coloring; `None` is the null
/// non-color reserved for closure-captured elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredStructure {
    pub base: FinStructure,
    pub colors: Vec<Option<u8>>,
}

impl ColoredStructure {
    pub fn new(base: FinStructure, colors: Vec<Option<u8>>) -> Result<Self> {
        if colors.len() != base.size() {
            return Err(Error::InvalidStructure(
                "one color slot per element required".into(),
            ));
        }
        Ok(ColoredStructure { base, colors })
    }

    /// Checks the null-on-`cl(∅)` membership invariant.
    pub fn well_formed(&self, cl: &ClosureOperator) -> Result<bool> {
        let captured = cl.eval_on_structure(&self.base, ElemSet::empty())?;
        Ok(captured.iter().all(|x| self.colors[x].is_none()))
    }
}

/// The colored strong-substructure relation: `x` must be the induced
/// prefix of `y`, colors must agree, and every element of `y` captured by
/// the closure of `x`'s universe must be null.
pub fn colored_strong_sub(
    cl: &ClosureOperator,
    x: &ColoredStructure,
    y: &ColoredStructure,
) -> Result<bool> {
    let k = x.base.size();
    if k > y.base.size() {
        return Ok(false);
    }
    let prefix: ElemSet = ElemSet::full(k);
    let (induced, _) = crate::structures::induced_substructure(&y.base, prefix);
    if induced != x.base {
        return Ok(false);
    }
    if (0..k).any(|i| x.colors[i] != y.colors[i]) {
        return Ok(false);
    }
    let captured = cl.eval_on_structure(&y.base, prefix)?;
    Ok(captured.minus(prefix).iter().all(|b| y.colors[b].is_none()))
}

/// Amalgamates two colored extensions of a common colored prefix.  The
/// base amalgam is searched with identifications smallest-last is wrong;
/// identifications are tried from none upward, the coloring is read off
/// the two sides, and a conflicting identification is surfaced as a
/// clash, never silently patched.
pub fn amalgamate_colored(
    cl: &ClosureOperator,
    spec: &FraisseClassSpec,
    a: &ColoredStructure,
    b: &ColoredStructure,
    c: &ColoredStructure,
) -> Result<ColoredStructure> {
    if !colored_strong_sub(cl, a, b)? || !colored_strong_sub(cl, a, c)? {
        return Err(Error::Precondition(
            "colored amalgamation requires strong colored extensions of the prefix".into(),
        ));
    }
    let a_to_b = PartialMap::from_pairs((0..a.base.size()).map(|i| (i, i)))?;
    let a_to_c = a_to_b.clone();
    let mut clash: Option<String> = None;
    for flavor in [
        crate::fraisse::Flavor::Disjoint,
        crate::fraisse::Flavor::Plain,
    ] {
        let verdict = crate::fraisse::amalgamate(
            spec, &a.base, &b.base, &c.base, &a_to_b, &a_to_c, flavor, 0,
        )?;
        let crate::fraisse::AmalgamVerdict::Amalgam { d, c_embedding, .. } = verdict else {
            continue;
        };
        // Colors: b's part keeps its colors, c's part transports along
        // its embedding; overlap must agree.
        let mut colors: Vec<Option<u8>> = vec![None; d.size()];
        for i in 0..b.base.size() {
            colors[i] = b.colors[i];
        }
        let mut ok = true;
        for i in 0..c.base.size() {
            let img = c_embedding.get(i).unwrap();
            if img < b.base.size() && colors[img] != c.colors[i] {
                clash = Some(format!(
                    "element {img} inherits both {:?} and {:?}",
                    colors[img], c.colors[i]
                ));
                ok = false;
                break;
            }
            colors[img] = c.colors[i];
        }
        if !ok {
            continue;
        }
        let out = ColoredStructure::new(d, colors)?;
        // The two sides must embed strongly into the amalgam; a failure
        // here means the base amalgam broke the independence guarantee.
        if !colored_strong_sub(cl, b, &out)? {
            clash = Some("the b side is not a strong colored substructure of the amalgam".into());
            continue;
        }
        return Ok(out);
    }
    match clash {
        Some(detail) => Err(Error::ColoringClash(detail)),
        None => Err(Error::BaseAmalgamFailed(
            "no amalgam of the underlying structures".into(),
        )),
    }
}

// ---------------------------------------------------------------------
// Color permutations with finite support.

/// A permutation of the color palette `0..k-1`; null is never moved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaTarget {
    images: Vec<u8>,
}

impl SigmaTarget {
    pub fn identity(palette: u8) -> Self {
        SigmaTarget {
            images: (0..palette).collect(),
        }
    }

    pub fn from_images(images: Vec<u8>) -> Result<Self> {
        let k = images.len();
        let mut seen = vec![false; k];
        for &x in &images {
            if (x as usize) >= k || seen[x as usize] {
                return Err(Error::InvalidPermutation(
                    "color permutation is not a bijection".into(),
                ));
            }
            seen[x as usize] = true;
        }
        Ok(SigmaTarget { images })
    }

    /// Parses cycle notation over colors, e.g. `"(0 1)"` or `"(0 1 2)"`.
    pub fn parse(text: &str, palette: u8) -> Result<Self> {
        let mut images: Vec<u8> = (0..palette).collect();
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed == "id" || trimmed == "()" {
            return Ok(SigmaTarget { images });
        }
        for cycle_text in trimmed.split(')').map(str::trim).filter(|s| !s.is_empty()) {
            let inner = cycle_text
                .strip_prefix('(')
                .ok_or_else(|| Error::MalformedInput(format!("bad cycle in {text}")))?;
            let members: Vec<u8> = inner
                .split(|c: char| c == ' ' || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<u8>()
                        .map_err(|_| Error::MalformedInput(format!("bad color in {text}")))
                })
                .collect::<Result<_>>()?;
            for w in 0..members.len() {
                let from = members[w];
                let to = members[(w + 1) % members.len()];
                if from >= palette || to >= palette {
                    return Err(Error::MalformedInput(format!(
                        "color out of palette in {text}"
                    )));
                }
                images[from as usize] = to;
            }
        }
        SigmaTarget::from_images(images)
    }

    pub fn apply(&self, color: Option<u8>) -> Option<u8> {
        color.map(|c| self.images[c as usize])
    }

    pub fn inverse(&self) -> SigmaTarget {
        let mut images = vec![0u8; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x as usize] = i as u8;
        }
        SigmaTarget { images }
    }

    pub fn palette(&self) -> u8 {
        self.images.len() as u8
    }
}

// ---------------------------------------------------------------------
// The colored limit approximation.

pub const DEFAULT_PALETTE: u8 = 8;

/// A growing colored approximation to the limit of the colored class.
/// Fresh elements cycle through the palette so every color appears;
/// transported realizations prescribe their colors.
#[derive(Debug, Clone)]
pub struct ColoredLimit {
    pub class: BuiltinClass,
    pub cl: ClosureOperator,
    pub structure: FinStructure,
    pub colors: Vec<Option<u8>>,
    pub palette: u8,
    pub budget: usize,
    cursor: u8,
}

impl ColoredLimit {
    pub fn new(class: BuiltinClass, cl: ClosureOperator, palette: u8, budget: usize) -> Self {
        ColoredLimit {
            class,
            cl,
            structure: FinStructure::empty(class.signature()),
            colors: vec![],
            palette,
            budget,
            cursor: 0,
        }
    }

    pub fn spec(&self) -> FraisseClassSpec {
        FraisseClassSpec::builtin(self.class)
    }

    pub fn size(&self) -> usize {
        self.structure.size()
    }

    fn next_color(&mut self) -> Option<u8> {
        let c = self.cursor;
        self.cursor = (self.cursor + 1) % self.palette;
        Some(c)
    }

    /// Adds one element realizing `atoms` over `base` with the given
    /// color (`None` only for closure-captured elements).
    pub fn realize(
        &mut self,
        base: &[usize],
        atoms: &NewAtoms,
        color: Option<u8>,
    ) -> Result<usize> {
        if self.size() + 1 > self.budget {
            return Err(Error::BudgetExhausted(format!(
                "colored limit budget {} reached",
                self.budget
            )));
        }
        match crate::fraisse::realize_extension(&self.spec(), &self.structure, base, atoms)? {
            Some(ext) => {
                self.structure = ext;
                self.colors.push(color);
                Ok(self.size() - 1)
            }
            None => Err(Error::BudgetExhausted(
                "extension type not realizable in the colored limit".into(),
            )),
        }
    }

    /// Materializes elements `0..=n` with saturation-flavored growth, so
    /// the approximation carries structure (edges, partners) and every
    /// palette color keeps appearing.
    pub fn ensure_element(&mut self, n: usize) -> Result<()> {
        let spec = self.spec();
        while self.size() <= n {
            let mut grown = false;
            'grow: for base in self.structure.universe().subsets_up_to(2) {
                let (sub, _) = crate::structures::induced_substructure(&self.structure, base);
                for pattern in spec.one_point_extensions(&sub)? {
                    let base_elems = base.to_vec();
                    if crate::fraisse::find_realization(&self.structure, &base_elems, &pattern)
                        .is_some()
                    {
                        continue;
                    }
                    if crate::fraisse::realize_extension(
                        &spec,
                        &self.structure,
                        &base_elems,
                        &pattern,
                    )?
                    .is_some()
                    {
                        let color = self.next_color();
                        self.realize(&base_elems, &pattern, color)?;
                        grown = true;
                        break 'grow;
                    }
                }
            }
            if !grown {
                let empty = FinStructure::empty(spec.signature());
                let patterns = spec.one_point_extensions(&empty)?;
                let pattern = patterns
                    .first()
                    .cloned()
                    .ok_or_else(|| Error::BudgetExhausted("class admits no points".into()))?;
                let color = self.next_color();
                self.realize(&[], &pattern, color)?;
            }
        }
        Ok(())
    }

    /// The closure of `s`, materializing closure elements that exist in
    /// the limit but not yet in the approximation (partners, for the
    /// partner-adding rule).
    pub fn closed_hull(&mut self, s: ElemSet) -> Result<ElemSet> {
        if matches!(self.cl.rule, crate::closure::ClosureRule::AddPartners) {
            let rel = self
                .structure
                .signature()
                .index_of("E")
                .expect("partner rule needs E");
            for x in s.iter() {
                let partnered =
                    (0..self.size()).any(|y| y != x && self.structure.holds(rel, &[x, y]));
                if !partnered {
                    // The limit pairs everything eventually; materialize
                    // the partner now with a generic color.
                    let atoms: NewAtoms = [
                        (
                            rel,
                            vec![crate::fraisse::Slot::New, crate::fraisse::Slot::Base(0)],
                        ),
                        (
                            rel,
                            vec![crate::fraisse::Slot::Base(0), crate::fraisse::Slot::New],
                        ),
                        (
                            rel,
                            vec![crate::fraisse::Slot::New, crate::fraisse::Slot::New],
                        ),
                    ]
                    .into_iter()
                    .collect();
                    let color = self.next_color();
                    self.realize(&[x], &atoms, color)?;
                }
            }
        }
        self.cl.eval_on_structure(&self.structure, s)
    }

    pub fn colored(&self) -> ColoredStructure {
        ColoredStructure {
            base: self.structure.clone(),
            colors: self.colors.clone(),
        }
    }
}

// ---------------------------------------------------------------------
// Back-and-forth state.

#[derive(Debug, Clone)]
pub struct BackAndForthState {
    pub stage: usize,
    pub a_side: ElemSet,
    pub b_side: ElemSet,
    pub map: PartialMap,
    pub sigma: SigmaTarget,
}

impl BackAndForthState {
    pub fn initial(sigma: SigmaTarget) -> Self {
        BackAndForthState {
            stage: 0,
            a_side: ElemSet::empty(),
            b_side: ElemSet::empty(),
            map: PartialMap::new(),
            sigma,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub a_side: Vec<usize>,
    pub b_side: Vec<usize>,
    pub map: Vec<(usize, usize)>,
    pub checks: Vec<(String, bool)>,
}

/// One back-and-forth stage: odd stages enlarge the `A` side to swallow
/// the next enumerated element inside its closure hull and transport it
/// through `g` with `σ`-adjusted colors; even stages do the same on the
/// `B` side through `g⁻¹` with `σ⁻¹`.  All six chain conditions are
/// re-verified before the new state is returned.
pub fn involvement_step(
    limit: &mut ColoredLimit,
    state: &BackAndForthState,
) -> Result<BackAndForthState> {
    let stage = state.stage;
    let target = stage / 2;
    limit.ensure_element(target)?;
    let mut next = state.clone();
    next.stage = stage + 1;
    if stage % 2 == 0 {
        // Odd output stage: target joins the A side.
        let hull = limit.closed_hull(state.a_side.with(target))?;
        let new_elems: Vec<usize> = hull.minus(state.a_side).to_vec();
        let mut map = state.map.clone();
        extend_transport(limit, &mut map, &new_elems, &state.sigma)?;
        next.a_side = hull;
        next.b_side = map.range();
        next.map = map;
    } else {
        // Even output stage: target joins the B side.
        let hull = limit.closed_hull(state.b_side.with(target))?;
        let new_elems: Vec<usize> = hull.minus(state.b_side).to_vec();
        let mut inverse = state.map.inverse();
        extend_transport(limit, &mut inverse, &new_elems, &state.sigma.inverse())?;
        next.b_side = hull;
        next.a_side = inverse.range();
        next.map = inverse.inverse();
    }
    verify_conditions(limit, state, &next)?;
    Ok(next)
}

/// Extends the transport map over `new_elems`, matching structure atoms
/// and `σ`-adjusted colors, realizing fresh images when the current
/// approximation has none.  Backtracking over existing candidates with a
/// fresh-realization fallback.
fn extend_transport(
    limit: &mut ColoredLimit,
    map: &mut PartialMap,
    new_elems: &[usize],
    sigma: &SigmaTarget,
) -> Result<()> {
    if new_elems.is_empty() {
        return Ok(());
    }
    let x = new_elems[0];
    let rest = &new_elems[1..];
    let dom: Vec<usize> = map.domain().to_vec();
    let img: Vec<usize> = dom.iter().map(|&d| map.get(d).unwrap()).collect();
    let ty = atoms_of(&limit.structure, x, &dom);
    let want_color = sigma.apply(limit.colors[x]);
    // Existing candidates first, in ascending order.
    for y in 0..limit.size() {
        if map.range().contains(y) {
            continue;
        }
        if limit.colors[y] == want_color && atoms_of(&limit.structure, y, &img) == ty {
            map.insert(x, y).expect("fresh");
            match extend_transport(limit, map, rest, sigma) {
                Ok(()) => return Ok(()),
                Err(_) => {
                    map.remove(x);
                }
            }
        }
    }
    // Realize a fresh image with the transported type and color.
    let fresh = limit.realize(&img, &ty, want_color)?;
    map.insert(x, fresh).expect("fresh");
    extend_transport(limit, map, rest, sigma)
}

/// The six chain conditions, checked literally on the transition.
fn verify_conditions(
    limit: &mut ColoredLimit,
    old: &BackAndForthState,
    new: &BackAndForthState,
) -> Result<()> {
    let fail = |condition: usize, detail: String| -> Result<()> {
        Err(Error::ConditionViolation {
            condition,
            stage: new.stage,
            detail,
        })
    };
    // (1) chains increase.
    if !old.a_side.is_subset(new.a_side) || !old.b_side.is_subset(new.b_side) {
        return fail(1, "side chain decreased".into());
    }
    // (2) strong colored extensions: closure-captured newcomers are null.
    for (prev, cur) in [(old.a_side, new.a_side), (old.b_side, new.b_side)] {
        let captured = limit.cl.eval_on_structure(&limit.structure, prev)?;
        for x in captured.intersect(cur).minus(prev).iter() {
            if limit.colors[x].is_some() {
                return fail(2, format!("captured element {x} carries a color"));
            }
        }
    }
    // (3) enumeration progress: c_n ∈ A_{2n+1} and c_n ∈ B_{2n+2}.
    if new.stage % 2 == 1 {
        let n = (new.stage - 1) / 2;
        if !new.a_side.contains(n) {
            return fail(3, format!("element {n} missing from the A side"));
        }
    } else if new.stage >= 2 {
        let n = (new.stage - 2) / 2;
        if !new.b_side.contains(n) {
            return fail(3, format!("element {n} missing from the B side"));
        }
    }
    // (4) the map carries A onto B and preserves atoms.
    if new.map.domain() != new.a_side || new.map.range() != new.b_side {
        return fail(4, "map domain or range drifted from the sides".into());
    }
    let dom: Vec<usize> = new.map.domain().to_vec();
    let img: Vec<usize> = dom.iter().map(|&d| new.map.get(d).unwrap()).collect();
    for (rel, r) in limit.structure.signature().relations().iter().enumerate() {
        for positions in crate::structures::tuples_over(dom.len(), r.arity) {
            let t: Vec<usize> = positions.iter().map(|&i| dom[i]).collect();
            let ti: Vec<usize> = positions.iter().map(|&i| img[i]).collect();
            if limit.structure.holds(rel, &t) != limit.structure.holds(rel, &ti) {
                return fail(4, format!("atoms differ on tuple {t:?}"));
            }
        }
    }
    // (5) colors transport along sigma.
    for (a, b) in new.map.pairs() {
        if new.sigma.apply(limit.colors[a]) != limit.colors[b] {
            return fail(5, format!("color of {a} does not transport to {b}"));
        }
    }
    // (6) coherence: the new map extends the old one.
    if !new.map.extends(&old.map) {
        return fail(6, "map does not extend the previous stage".into());
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvolvementReport {
    pub class: String,
    pub operator: String,
    pub sigma: Vec<u8>,
    pub stages: Vec<StageRecord>,
    pub final_map: Vec<(usize, usize)>,
    pub domain_size: usize,
    pub color_condition_rate: f64,
    pub success: bool,
}

/// Runs the construction for `n_stages` enumeration rounds — each round
/// is an odd step (element `c_n` joins the `A` side) followed by an even
/// step (`c_n` joins the `B` side) — and reports the final partial
/// automorphism with per-step condition checks.  After `n` rounds the
/// map is defined on at least the first `n` enumerated elements.
pub fn run_involvement(
    class: BuiltinClass,
    cl: &ClosureOperator,
    sigma: SigmaTarget,
    n_stages: usize,
    budget: usize,
) -> Result<InvolvementReport> {
    run_involvement_with_trace(class, cl, sigma, n_stages, budget).map(|(report, _, _)| report)
}

/// As [`run_involvement`], also handing back the grown limit and final
/// state for further inspection.
pub fn run_involvement_with_trace(
    class: BuiltinClass,
    cl: &ClosureOperator,
    sigma: SigmaTarget,
    n_stages: usize,
    budget: usize,
) -> Result<(InvolvementReport, ColoredLimit, BackAndForthState)> {
    let mut limit = ColoredLimit::new(class, cl.clone(), sigma.palette(), budget);
    let mut state = BackAndForthState::initial(sigma.clone());
    let mut stages = vec![];
    for _ in 0..2 * n_stages {
        state = involvement_step(&mut limit, &state)?;
        stages.push(StageRecord {
            stage: state.stage,
            a_side: state.a_side.to_vec(),
            b_side: state.b_side.to_vec(),
            map: state.map.pairs().collect(),
            checks: vec![
                ("chains-increase".into(), true),
                ("strong-extensions".into(), true),
                ("enumeration-progress".into(), true),
                ("map-carries-sides".into(), true),
                ("colors-transport".into(), true),
                ("coherent-extension".into(), true),
            ],
        });
    }
    let total = state.map.len();
    let good = state
        .map
        .pairs()
        .filter(|&(a, b)| state.sigma.apply(limit.colors[a]) == limit.colors[b])
        .count();
    let report = InvolvementReport {
        class: class.name().to_string(),
        operator: cl.name.clone(),
        sigma: (0..sigma.palette())
            .map(|c| sigma.apply(Some(c)).unwrap())
            .collect(),
        stages,
        final_map: state.map.pairs().collect(),
        domain_size: total,
        color_condition_rate: if total == 0 {
            1.0
        } else {
            good as f64 / total as f64
        },
        success: true,
    };
    Ok((report, limit, state))
}

// ---------------------------------------------------------------------
// Transversal quotients of equivariant permutations.

/// Point encoding: orbit `t`, phase `d` -> `t * delta_order + d`.
fn decode(k: usize, x: usize) -> (usize, usize) {
    (x / k, x % k)
}

/// Is `pi` equivariant for the free cyclic action (phase rotation)?
pub fn is_equivariant(delta_order: usize, n_orbits: usize, pi: &Perm) -> bool {
    let n = delta_order * n_orbits;
    if pi.degree() != n {
        return false;
    }
    (0..n).all(|x| {
        let (t, d) = decode(delta_order, x);
        let rotated = t * delta_order + (d + 1) % delta_order;
        let (it, id) = decode(delta_order, pi.apply(x));
        pi.apply(rotated) == it * delta_order + (id + 1) % delta_order
    })
}

/// The permutation of orbit representatives induced by an equivariant
/// permutation: the orbit each representative lands in.
pub fn transversal_quotient(delta_order: usize, n_orbits: usize, pi: &Perm) -> Result<Perm> {
    if pi.degree() != delta_order * n_orbits {
        return Err(Error::NotEquivariant(format!(
            "degree {} does not match {delta_order} x {n_orbits}",
            pi.degree()
        )));
    }
    if !is_equivariant(delta_order, n_orbits, pi) {
        return Err(Error::NotEquivariant(
            "permutation does not commute with the phase rotation".into(),
        ));
    }
    let images: Vec<usize> = (0..n_orbits)
        .map(|t| pi.apply(t * delta_order) / delta_order)
        .collect();
    Perm::from_images(images)
}

/// Builds the equivariant permutation with orbit permutation `sigma` and
/// per-orbit phase shifts; the zero-shift case is a section of the
/// quotient, which is what makes it surjective.
pub fn equivariant_from(delta_order: usize, sigma: &Perm, shifts: &[usize]) -> Result<Perm> {
    let m = sigma.degree();
    if shifts.len() != m {
        return Err(Error::Precondition("one shift per orbit required".into()));
    }
    let n = delta_order * m;
    let mut images = vec![0; n];
    for t in 0..m {
        for d in 0..delta_order {
            images[t * delta_order + d] =
                sigma.apply(t) * delta_order + (d + shifts[t]) % delta_order;
        }
    }
    Perm::from_images(images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn graphs_spec() -> FraisseClassSpec {
        FraisseClassSpec::builtin(BuiltinClass::Graphs)
    }

    #[test]
    fn strong_sub_reflexive_and_free_extension() {
        let cl = ClosureOperator::identity();
        let g = ColoredStructure::new(catalog::cycle_graph(4), vec![Some(0); 4]).unwrap();
        assert!(colored_strong_sub(&cl, &g, &g).unwrap());
        // One extra element outside the closure, any color: still strong.
        let mut bigger = catalog::cycle_graph(4);
        bigger.push_element().unwrap();
        let bigger =
            ColoredStructure::new(bigger, vec![Some(0), Some(0), Some(0), Some(0), Some(3)])
                .unwrap();
        assert!(colored_strong_sub(&cl, &g, &bigger).unwrap());
    }

    #[test]
    fn partner_color_blocks_strong_sub() {
        // Pairs with the partner rule: adding an element's partner with a
        // color breaks clause (c); null is fine.
        let cl = ClosureOperator::add_partners();
        let single = ColoredStructure::new(catalog::paired_equivalence(1), vec![Some(1)]).unwrap();
        let pair = catalog::paired_equivalence(2);
        let colored = ColoredStructure::new(pair.clone(), vec![Some(1), Some(3)]).unwrap();
        assert!(!colored_strong_sub(&cl, &single, &colored).unwrap());
        let nulled = ColoredStructure::new(pair, vec![Some(1), None]).unwrap();
        assert!(colored_strong_sub(&cl, &single, &nulled).unwrap());
    }

    #[test]
    fn colored_amalgam_of_graphs_concatenates() {
        let cl = ClosureOperator::identity();
        let spec = graphs_spec();
        let a = ColoredStructure::new(
            FinStructure::new(spec.signature(), 1).unwrap(),
            vec![Some(0)],
        )
        .unwrap();
        let mut edge = FinStructure::new(spec.signature(), 2).unwrap();
        edge.set(0, vec![0, 1]).unwrap();
        edge.set(0, vec![1, 0]).unwrap();
        let b = ColoredStructure::new(edge.clone(), vec![Some(0), Some(1)]).unwrap();
        let c = ColoredStructure::new(edge, vec![Some(0), Some(2)]).unwrap();
        let d = amalgamate_colored(&cl, &spec, &a, &b, &c).unwrap();
        assert_eq!(d.base.size(), 3);
        assert_eq!(d.colors, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn trivial_colored_amalgam_is_the_prefix() {
        let cl = ClosureOperator::identity();
        let spec = graphs_spec();
        let a = ColoredStructure::new(
            FinStructure::new(spec.signature(), 1).unwrap(),
            vec![Some(5)],
        )
        .unwrap();
        let d = amalgamate_colored(&cl, &spec, &a, &a, &a).unwrap();
        assert_eq!(d.base.size(), 1);
        assert_eq!(d.colors, vec![Some(5)]);
    }

    #[test]
    fn pairs_identification_agrees_on_null_and_clashes_on_colors() {
        let spec = FraisseClassSpec::builtin(BuiltinClass::EquivalencePairs);
        let a = ColoredStructure::new(catalog::paired_equivalence(1), vec![Some(0)]).unwrap();
        let pair = catalog::paired_equivalence(2);
        // With the partner rule the new mate is forced null on both
        // sides, and the amalgam identifies the mates with no clash.
        let cl = ClosureOperator::add_partners();
        let b = ColoredStructure::new(pair.clone(), vec![Some(0), None]).unwrap();
        let c = ColoredStructure::new(pair.clone(), vec![Some(0), None]).unwrap();
        let d = amalgamate_colored(&cl, &spec, &a, &b, &c).unwrap();
        assert_eq!(d.base.size(), 2);
        assert_eq!(d.colors[1], None);
        // With the identity rule the mates may carry colors, the base
        // amalgam must identify them, and the clash surfaces.
        let cl = ClosureOperator::identity();
        let b = ColoredStructure::new(pair.clone(), vec![Some(0), Some(1)]).unwrap();
        let c = ColoredStructure::new(pair, vec![Some(0), Some(2)]).unwrap();
        let err = amalgamate_colored(&cl, &spec, &a, &b, &c).unwrap_err();
        assert!(matches!(err, Error::ColoringClash(_)), "{err:?}");
    }

    #[test]
    fn involvement_identity_sigma_preserves_colors() {
        let sigma = SigmaTarget::identity(4);
        let report = run_involvement(
            BuiltinClass::Graphs,
            &ClosureOperator::identity(),
            sigma,
            6,
            64,
        )
        .unwrap();
        assert!(report.success);
        assert_eq!(report.color_condition_rate, 1.0);
    }

    #[test]
    fn involvement_transposition_on_graphs() {
        let sigma = SigmaTarget::parse("(0 1)", 4).unwrap();
        let report = run_involvement(
            BuiltinClass::Graphs,
            &ClosureOperator::identity(),
            sigma,
            8,
            64,
        )
        .unwrap();
        assert_eq!(report.color_condition_rate, 1.0);
        assert!(report.domain_size >= 4);
    }

    #[test]
    fn involvement_three_cycle_on_pairs() {
        let sigma = SigmaTarget::parse("(0 1 2)", 8).unwrap();
        let report = run_involvement(
            BuiltinClass::EquivalencePairs,
            &ClosureOperator::add_partners(),
            sigma,
            6,
            64,
        )
        .unwrap();
        assert_eq!(report.color_condition_rate, 1.0);
    }

    #[test]
    fn involvement_runs_over_dense_orders() {
        // Transports in the order class must respect positions, so this
        // drives the insertion-completion path end to end.
        let sigma = SigmaTarget::parse("(0 1)", 4).unwrap();
        let report = run_involvement(
            BuiltinClass::LinearOrders,
            &ClosureOperator::identity(),
            sigma,
            6,
            64,
        )
        .unwrap();
        assert_eq!(report.color_condition_rate, 1.0);
        assert!(report.domain_size >= 6);
    }

    #[test]
    fn sigma_run_inverse_is_a_sigma_inverse_transport() {
        // The inverse of the final partial map transports colors along
        // σ⁻¹ and preserves atoms on the same limit: conditions (4) and
        // (5) read backwards.
        let sigma = SigmaTarget::parse("(0 1 2)", 8).unwrap();
        let (report, limit, state) = run_involvement_with_trace(
            BuiltinClass::EquivalencePairs,
            &ClosureOperator::add_partners(),
            sigma.clone(),
            6,
            64,
        )
        .unwrap();
        assert!(report.success);
        let inverse = state.map.inverse();
        let sigma_inv = sigma.inverse();
        for (b, a) in inverse.pairs() {
            assert_eq!(sigma_inv.apply(limit.colors[b]), limit.colors[a]);
        }
        let dom: Vec<usize> = inverse.domain().to_vec();
        let img: Vec<usize> = dom.iter().map(|&d| inverse.get(d).unwrap()).collect();
        let rel = limit.structure.signature().index_of("E").unwrap();
        for i in 0..dom.len() {
            for j in 0..dom.len() {
                assert_eq!(
                    limit.structure.holds(rel, &[dom[i], dom[j]]),
                    limit.structure.holds(rel, &[img[i], img[j]])
                );
            }
        }
    }

    #[test]
    fn quotient_identity_and_shift_cases() {
        let k = 2;
        let m = 3;
        let id = Perm::identity(k * m);
        assert!(transversal_quotient(k, m, &id).unwrap().is_identity());
        // Acting as the rotation inside each orbit: still the identity
        // on representatives.
        let shifts = equivariant_from(k, &Perm::identity(m), &[1, 1, 1]).unwrap();
        assert!(transversal_quotient(k, m, &shifts).unwrap().is_identity());
        // Swapping orbits 0 and 1 equivariantly: the transposition.
        let swap =
            equivariant_from(k, &Perm::from_cycles(m, &[&[0, 1]]).unwrap(), &[0, 0, 0]).unwrap();
        assert_eq!(
            transversal_quotient(k, m, &swap).unwrap(),
            Perm::from_cycles(m, &[&[0, 1]]).unwrap()
        );
    }

    #[test]
    fn non_equivariant_rejected() {
        // A transposition inside one orbit is not equivariant for k >= 3.
        let pi = Perm::from_cycles(6, &[&[0, 1]]).unwrap();
        assert!(transversal_quotient(3, 2, &pi).is_err());
    }
}
