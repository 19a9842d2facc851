//! Builtin structures, groups, and named action instances.
//!
//! Instance names accepted by [`load_instance`]: `s3`..`s7` (natural
//! symmetric actions), `c3`..`c6` (cyclic rotations of a directed cycle),
//! `e2-6` (three two-element equivalence classes), `delta-act(k,m)` (the
//! equivariant group of a free order-`k` cyclic action with `m` orbits),
//! and the extendable `graphs-limit`, `dlo-limit`, `pairs-limit`.

use crate::error::{Error, Result};
use crate::fraisse::BuiltinClass;
use crate::groups::PermGroup;
use crate::instance::{ActionInstance, ExtendableInstance, FixedInstance, DEFAULT_GROWTH_BUDGET};
use crate::perm::Perm;
use crate::structures::{structure_from_action, FinStructure, Signature};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn pure_set(n: usize) -> FinStructure {
    FinStructure::new(Signature::empty(), n).expect("within cap")
}

/// Equivalence structure with classes `{0,1}, {2,3}, ..`; odd trailing
/// element left as a singleton.  The relation is reflexive ("same class").
pub fn paired_equivalence(n: usize) -> FinStructure {
    let sig = Signature::new(vec![("E".into(), 2)]).unwrap();
    let mut s = FinStructure::new(sig, n).expect("within cap");
    for x in 0..n {
        s.set(0, vec![x, x]).unwrap();
    }
    for k in 0..n / 2 {
        s.set(0, vec![2 * k, 2 * k + 1]).unwrap();
        s.set(0, vec![2 * k + 1, 2 * k]).unwrap();
    }
    s
}

pub fn linear_order(n: usize) -> FinStructure {
    let sig = Signature::new(vec![("lt".into(), 2)]).unwrap();
    let mut s = FinStructure::new(sig, n).expect("within cap");
    for x in 0..n {
        for y in x + 1..n {
            s.set(0, vec![x, y]).unwrap();
        }
    }
    s
}

pub fn cycle_graph(n: usize) -> FinStructure {
    let sig = Signature::new(vec![("E".into(), 2)]).unwrap();
    let mut s = FinStructure::new(sig, n).expect("within cap");
    for x in 0..n {
        let y = (x + 1) % n;
        s.set(0, vec![x, y]).unwrap();
        s.set(0, vec![y, x]).unwrap();
    }
    s
}

pub fn directed_cycle(n: usize) -> FinStructure {
    let sig = Signature::new(vec![("E".into(), 2)]).unwrap();
    let mut s = FinStructure::new(sig, n).expect("within cap");
    for x in 0..n {
        s.set(0, vec![x, (x + 1) % n]).unwrap();
    }
    s
}

/// Point encoding for the free action of a cyclic group of order `k` on
/// `k*m` points: orbit `t`, phase `d` -> index `t*k + d`.
pub fn delta_point(k: usize, t: usize, d: usize) -> usize {
    t * k + d
}

/// The group of permutations commuting with the free cyclic action:
/// per-orbit phase shifts composed with orbit permutations; order `k^m m!`.
pub fn delta_action_group(k: usize, m: usize) -> PermGroup {
    let n = k * m;
    let mut gens = vec![];
    if k >= 2 {
        // Phase shift on orbit 0.
        let mut images: Vec<usize> = (0..n).collect();
        for d in 0..k {
            images[delta_point(k, 0, d)] = delta_point(k, 0, (d + 1) % k);
        }
        gens.push(Perm::from_images(images).unwrap());
    }
    if m >= 2 {
        // Swap orbits 0 and 1, preserving phase.
        let mut images: Vec<usize> = (0..n).collect();
        for d in 0..k {
            images[delta_point(k, 0, d)] = delta_point(k, 1, d);
            images[delta_point(k, 1, d)] = delta_point(k, 0, d);
        }
        gens.push(Perm::from_images(images).unwrap());
        // Cycle all orbits.
        let mut images: Vec<usize> = (0..n).collect();
        for t in 0..m {
            for d in 0..k {
                images[delta_point(k, t, d)] = delta_point(k, (t + 1) % m, d);
            }
        }
        gens.push(Perm::from_images(images).unwrap());
    }
    PermGroup::new(n, gens)
}

/// Seeded random structure over a single binary relation, for harness
/// instances; `density` out of 100.
pub fn random_binary_structure(seed: u64, size: usize, density: u32) -> FinStructure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sig = Signature::new(vec![("R".into(), 2)]).unwrap();
    let mut s = FinStructure::new(sig, size).expect("within cap");
    for x in 0..size {
        for y in 0..size {
            if rng.gen_range(0..100) < density {
                s.set(0, vec![x, y]).unwrap();
            }
        }
    }
    s
}

pub fn fixed_from_group(name: impl Into<String>, group: PermGroup) -> Result<FixedInstance> {
    let structure = structure_from_action(&group, 2)?;
    Ok(FixedInstance::new(name, group, structure))
}

pub fn fixed_from_structure(name: impl Into<String>, structure: FinStructure) -> FixedInstance {
    let group = crate::groups::automorphism_group(&structure);
    FixedInstance::new(name, group, structure)
}

/// Loads a builtin instance by name; see the module docs for the list.
pub fn load_instance(name: &str) -> Result<ActionInstance> {
    if let Some(rest) = name.strip_prefix('s') {
        if let Ok(n) = rest.parse::<usize>() {
            if (2..=12).contains(&n) {
                return Ok(ActionInstance::Fixed(fixed_from_group(
                    name,
                    PermGroup::symmetric(n),
                )?));
            }
        }
    }
    if let Some(rest) = name.strip_prefix('c') {
        if let Ok(n) = rest.parse::<usize>() {
            if (3..=12).contains(&n) {
                return Ok(ActionInstance::Fixed(FixedInstance::new(
                    name,
                    PermGroup::cyclic(n),
                    directed_cycle(n),
                )));
            }
        }
    }
    if let Some(rest) = name.strip_prefix("e2-") {
        if let Ok(n) = rest.parse::<usize>() {
            if n >= 2 && n <= 16 {
                return Ok(ActionInstance::Fixed(fixed_from_structure(
                    name,
                    paired_equivalence(n),
                )));
            }
        }
    }
    if let Some(args) = name
        .strip_prefix("delta-act(")
        .and_then(|r| r.strip_suffix(')'))
    {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if parts.len() == 2 {
            let k: usize = parts[0]
                .parse()
                .map_err(|_| Error::UnknownBuiltin(name.into()))?;
            let m: usize = parts[1]
                .parse()
                .map_err(|_| Error::UnknownBuiltin(name.into()))?;
            if k >= 2 && m >= 1 && k * m <= 24 {
                return Ok(ActionInstance::Fixed(fixed_from_group(
                    name,
                    delta_action_group(k, m),
                )?));
            }
        }
    }
    match name {
        "graphs-limit" => Ok(ActionInstance::Extendable(ExtendableInstance::new(
            name,
            BuiltinClass::Graphs,
            DEFAULT_GROWTH_BUDGET,
        ))),
        "dlo-limit" => Ok(ActionInstance::Extendable(ExtendableInstance::new(
            name,
            BuiltinClass::LinearOrders,
            DEFAULT_GROWTH_BUDGET,
        ))),
        "pairs-limit" => Ok(ActionInstance::Extendable(ExtendableInstance::new(
            name,
            BuiltinClass::EquivalencePairs,
            DEFAULT_GROWTH_BUDGET,
        ))),
        "pure-sets-limit" => Ok(ActionInstance::Extendable(ExtendableInstance::new(
            name,
            BuiltinClass::PureSets,
            DEFAULT_GROWTH_BUDGET,
        ))),
        other => Err(Error::UnknownBuiltin(other.into())),
    }
}

/// The fixed harness instances for seeded property sweeps: catalog groups
/// plus automorphism groups of seeded random structures, domains <= 7.
pub fn seeded_fixed_instances(count: usize, seed: u64) -> Vec<FixedInstance> {
    let mut out = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<ActionInstance> = ["s3", "s4", "s5", "c4", "c5", "e2-6", "delta-act(2,3)"]
        .iter()
        .map(|n| load_instance(n).unwrap())
        .collect();
    for inst in base {
        if let ActionInstance::Fixed(f) = inst {
            out.push(f);
        }
        if out.len() >= count {
            return out;
        }
    }
    let mut i = 0;
    while out.len() < count {
        let size = rng.gen_range(3..=7);
        let density = rng.gen_range(10..=70);
        let s = random_binary_structure(rng.gen(), size, density);
        out.push(fixed_from_structure(format!("rand-{i}"), s));
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_action_group_order() {
        // k^m * m! equivariant permutations.
        assert_eq!(delta_action_group(2, 3).order(), 48);
        assert_eq!(delta_action_group(2, 2).order(), 8);
        assert_eq!(delta_action_group(3, 2).order(), 18);
    }

    #[test]
    fn directed_cycle_automorphisms_are_rotations() {
        let c5 = directed_cycle(5);
        assert_eq!(crate::groups::automorphism_group(&c5).order(), 5);
    }

    #[test]
    fn orbit_structure_of_s4_has_symmetric_group() {
        let inst = load_instance("s4").unwrap();
        let f = inst.as_fixed().unwrap();
        // Equality-pattern orbits only: R1 over points, diagonal, off-diagonal.
        assert_eq!(f.structure.signature().len(), 3);
        assert_eq!(crate::groups::automorphism_group(&f.structure).order(), 24);
    }

    #[test]
    fn delta_act_structure_recovers_group() {
        let inst = load_instance("delta-act(2,3)").unwrap();
        let f = inst.as_fixed().unwrap();
        assert_eq!(
            crate::groups::automorphism_group(&f.structure).order(),
            f.group.order()
        );
    }

    #[test]
    fn unknown_builtin_is_an_error() {
        assert!(load_instance("q8").is_err());
    }
}
