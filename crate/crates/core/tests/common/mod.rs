//! Seeded random schema generators shared by the integration tests.
#![allow(dead_code)]

use catnorm_core::{CategoryGraph, DependencySet, Fd, Mvd, NameSet, ObjectDecl, ObjectKind};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

const NAMES: [&str; 12] = ["A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L"];

fn pick_kind(rng: &mut StdRng) -> ObjectKind {
    match rng.gen_range(0..4) {
        0 => ObjectKind::Entity,
        1 => ObjectKind::Relationship,
        _ => ObjectKind::Attribute,
    }
}

fn random_subset(rng: &mut StdRng, pool: &[String], min: usize, max: usize) -> NameSet {
    let k = rng.gen_range(min..=max.min(pool.len()));
    pool.choose_multiple(rng, k).cloned().collect()
}

fn add_projections(rng: &mut StdRng, g: &mut CategoryGraph, rel: &str, max: usize) {
    let others: Vec<String> = g
        .objects
        .iter()
        .map(|o| o.name.clone())
        .filter(|n| n != rel)
        .collect();
    let k = rng.gen_range(1..=max.min(others.len()));
    for t in others.choose_multiple(rng, k) {
        g.add_arrow(rel, t, true);
    }
}

fn add_composed_arrows(rng: &mut StdRng, g: &mut CategoryGraph, p: f64) {
    let names: Vec<String> = g.object_names().map(String::from).collect();
    for s in &names {
        for t in &names {
            if s != t && !g.has_arrow(s, t) && rng.gen_bool(p) {
                g.add_arrow(s, t, false);
            }
        }
    }
}

fn random_fds(rng: &mut StdRng, pool: &[String], max: usize) -> Vec<Fd> {
    let mut out = Vec::new();
    if pool.len() < 2 {
        return out;
    }
    for _ in 0..rng.gen_range(0..=max) {
        let lhs = random_subset(rng, pool, 1, 2);
        let rest: Vec<String> = pool.iter().filter(|n| !lhs.contains(*n)).cloned().collect();
        if rest.is_empty() {
            continue;
        }
        let rhs = random_subset(rng, &rest, 1, 1);
        out.push(Fd { lhs, rhs });
    }
    out
}

/// Up to `max_objects` objects of mixed kinds, sparse arrows and up to
/// `max_fds` FDs over the object names.
pub fn fd_schema(rng: &mut StdRng, max_objects: usize, max_fds: usize) -> (CategoryGraph, DependencySet) {
    let n = rng.gen_range(2..=max_objects);
    let mut g = CategoryGraph::new();
    for name in &NAMES[..n] {
        g.add_object(ObjectDecl::new(*name, pick_kind(rng)));
    }
    let rels: Vec<String> = g.relationship_objects().map(|o| o.name.clone()).collect();
    for r in &rels {
        add_projections(rng, &mut g, r, 3);
    }
    add_composed_arrows(rng, &mut g, 0.2);
    let names: Vec<String> = g.object_names().map(String::from).collect();
    let fds = random_fds(rng, &names, max_fds);
    (g, DependencySet::from_fds(fds))
}

/// A relationship object `X` with 2 to `max_proj` projections to attribute
/// objects, an optional extra object, sparse arrows among the non-context
/// objects, a few FDs, and 1 to 3 nontrivial MVDs in the context of `X`.
pub fn mvd_schema(rng: &mut StdRng, max_proj: usize) -> (CategoryGraph, DependencySet) {
    let k = rng.gen_range(2..=max_proj);
    let mut g = CategoryGraph::new();
    for name in &NAMES[..k] {
        g.add_object(ObjectDecl::attribute(*name));
    }
    if rng.gen_bool(0.3) {
        g.add_object(ObjectDecl::new(NAMES[k], if rng.gen_bool(0.5) { ObjectKind::Entity } else { ObjectKind::Attribute }));
    }
    let pi: Vec<String> = NAMES[..k].iter().map(|s| s.to_string()).collect();
    add_composed_arrows(rng, &mut g, 0.12);
    g.add_object(ObjectDecl::relationship("X"));
    for t in &pi {
        g.add_arrow("X", t, true);
    }
    let names: Vec<String> = g.object_names().filter(|n| *n != "X").map(String::from).collect();
    let fds = random_fds(rng, &names, 3);

    let mut mvds = Vec::new();
    if k >= 3 {
        for _ in 0..rng.gen_range(1..=3) {
            let lhs = random_subset(rng, &pi, 1, k - 2);
            let rest: Vec<String> = pi.iter().filter(|n| !lhs.contains(*n)).cloned().collect();
            let rhs = random_subset(rng, &rest, 1, rest.len() - 1);
            mvds.push(Mvd { lhs, rhs, context: "X".into() });
        }
    } else {
        // With two projections the only MVDs are trivial ones.
        mvds.push(Mvd::new([pi[0].clone()], [pi[1].clone()], "X"));
    }
    (g, DependencySet::new(fds, mvds))
}

/// FDs and MVDs over a universe of `n` attributes, for oracle comparisons.
pub fn dependency_set(rng: &mut StdRng, n: usize) -> (NameSet, DependencySet) {
    let u: Vec<String> = NAMES[..n].iter().map(|s| s.to_string()).collect();
    let fds = random_fds(rng, &u, 3);
    let mut mvds = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let lhs = random_subset(rng, &u, 1, (n - 1).min(2));
        let rest: Vec<String> = u.iter().filter(|x| !lhs.contains(*x)).cloned().collect();
        let rhs = random_subset(rng, &rest, 1, rest.len());
        mvds.push(Mvd { lhs, rhs, context: "U".into() });
    }
    (u.into_iter().collect(), DependencySet::new(fds, mvds))
}

/// A chain-like graph of `m` attribute objects with about `per_object`
/// outgoing arrows each and `m / 2` FDs, for timing.
pub fn scaled_graph(rng: &mut StdRng, m: usize, per_object: usize) -> (CategoryGraph, Vec<Fd>) {
    let mut g = CategoryGraph::new();
    let names: Vec<String> = (0..m).map(|i| format!("N{i}")).collect();
    for n in &names {
        g.add_object(ObjectDecl::attribute(n.clone()));
    }
    for (i, s) in names.iter().enumerate() {
        for _ in 0..per_object {
            let j = rng.gen_range(0..m);
            if j != i && !g.has_arrow(s, &names[j]) {
                g.add_arrow(s, &names[j], false);
            }
        }
    }
    let mut fds = Vec::new();
    for _ in 0..m / 2 {
        let a = names.choose(rng).unwrap().clone();
        let b = names.choose(rng).unwrap().clone();
        let c = names.choose(rng).unwrap().clone();
        if a != c && b != c {
            fds.push(Fd::new([a, b], [c]));
        }
    }
    (g, fds)
}

/// Attribute closure by repeated scanning, kept independent of the library.
pub fn naive_closure(x: &NameSet, fds: &[Fd]) -> NameSet {
    let mut out = x.clone();
    loop {
        let before = out.len();
        for f in fds {
            if f.lhs.is_subset(&out) {
                out.extend(f.rhs.iter().cloned());
            }
        }
        if out.len() == before {
            return out;
        }
    }
}

/// One FD per arrow, plus projection targets determining each relationship.
pub fn naive_graph_fds(g: &CategoryGraph) -> Vec<Fd> {
    let mut out: Vec<Fd> = g
        .arrow_pairs()
        .into_iter()
        .map(|(s, t)| Fd::new([s], [t]))
        .collect();
    for r in g.relationship_objects() {
        let pi = g.projection_targets(&r.name);
        if !pi.is_empty() {
            out.push(Fd { lhs: pi, rhs: [r.name.clone()].into_iter().collect() });
        }
    }
    out
}

/// True when no member `a` of a composite key `K` is determined by some set
/// `Y` inside the closure of `K` without `a`, unless `Y` determines all of
/// `K`. Keys are the projection sets of relationships and the multi-object
/// left sides of `F`. Outside this class an FD with a key member on the
/// right and a non-key on the left survives every FD-preserving reduction.
/// In addition, an object carrying MVDs must have no key other than its
/// projection set, or splitting it would lose an FD.
pub fn keys_are_stable(g: &CategoryGraph, d: &DependencySet) -> bool {
    let mut fds = naive_graph_fds(g);
    fds.extend(d.fds.iter().cloned());
    let contexts: NameSet = d.mvds.iter().map(|m| m.context.clone()).collect();
    for ctx in &contexts {
        let pi = g.projection_targets(ctx);
        let pool: Vec<String> = g.object_names().filter(|n| n != ctx).map(String::from).collect();
        for mask in 1u32..(1 << pool.len()) {
            let s: NameSet = (0..pool.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| pool[i].clone())
                .collect();
            if !pi.is_subset(&s) && pi.is_subset(&naive_closure(&s, &fds)) {
                return false;
            }
        }
    }
    let mut keys: Vec<NameSet> = g
        .relationship_objects()
        .map(|r| g.projection_targets(&r.name))
        .collect();
    keys.extend(d.fds.iter().map(|f| f.lhs.clone()));
    keys.retain(|k| k.len() >= 2);
    keys.sort();
    keys.dedup();
    for k in &keys {
        let reach = naive_closure(k, &fds);
        for a in k {
            let pool: Vec<&String> = reach.iter().filter(|x| *x != a).collect();
            for mask in 1u32..(1 << pool.len()) {
                let y: NameSet = (0..pool.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| pool[i].clone())
                    .collect();
                let cy = naive_closure(&y, &fds);
                if cy.contains(a) && !k.is_subset(&cy) {
                    return false;
                }
            }
        }
    }
    true
}
