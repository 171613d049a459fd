//! Attribute closure, graph cover tests, and the FD closure of a category
//! graph (`(G,F)+`).

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::{FdIndex, Interner};
use crate::schema::{
    fmt_set, graph_to_fds, validate, Arrow, CategoryGraph, Fd, NameSet, ObjectDecl,
};

/// Largest attribute set whose FD projection is enumerated exhaustively.
pub const PROJECTION_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeClosureResult {
    pub seed: NameSet,
    pub closure: NameSet,
}

/// Records why the closure added an object or arrow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub rule: String,
    pub source: String,
    pub target: String,
    pub detail: String,
}

pub const RULE_COMPOSITE: &str = "composite-lhs";
pub const RULE_FD: &str = "fd-closure";
pub const RULE_MVD: &str = "mvd-coalescence";

/// `X+` under `fds`: the least superset of `x` closed under every FD.
pub fn attribute_closure(x: &NameSet, fds: &[Fd]) -> AttributeClosureResult {
    let mut interner = Interner::new();
    let seed = interner.intern_set(x);
    let idx = FdIndex::build(fds, &mut interner);
    AttributeClosureResult {
        seed: x.clone(),
        closure: interner.to_names(&idx.closure(&seed)),
    }
}

/// Whether `fds` imply `target`.
pub fn implies(fds: &[Fd], target: &Fd) -> bool {
    attribute_closure(&target.lhs, fds).closure.is_superset(&target.rhs)
}

/// Projection of `fds` onto `u`: one FD `S -> (S+ ∩ u) - S` for every
/// nonempty subset S of `u` where that right side is nonempty.
pub fn project_fds(fds: &[Fd], u: &NameSet) -> Result<Vec<Fd>> {
    if u.len() > PROJECTION_LIMIT {
        return Err(Error::TooLarge {
            size: u.len(),
            limit: PROJECTION_LIMIT,
        });
    }
    let mut interner = Interner::new();
    let attrs = interner.intern_set(u);
    let idx = FdIndex::build(fds, &mut interner);
    let universe: Vec<&String> = u.iter().collect();
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << attrs.len()) {
        let seed: Vec<usize> = (0..attrs.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| attrs[i])
            .collect();
        let cl = idx.closure(&seed);
        let rhs: NameSet = (0..attrs.len())
            .filter(|i| mask & (1 << i) == 0 && cl[attrs[*i]])
            .map(|i| universe[i].clone())
            .collect();
        if !rhs.is_empty() {
            let lhs: NameSet = (0..attrs.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| universe[i].clone())
                .collect();
            out.push(Fd { lhs, rhs });
        }
    }
    Ok(out)
}

/// Replaces composite left-hand sides by objects of `g`.
///
/// A set resolves to an object when it is a singleton or equals the
/// projection set of a relationship object. Otherwise it is first
/// left-reduced under `fds` and, if still unresolved, materialized as a new
/// relationship object with projection arrows to its members.
pub(crate) fn materialize_composites(
    g: &mut CategoryGraph,
    lhs_sets: &BTreeSet<NameSet>,
    fds: &[Fd],
    prov: &mut Vec<Provenance>,
) {
    let mut interner = Interner::new();
    let idx = FdIndex::build(fds, &mut interner);
    let mut by_projection: BTreeMap<NameSet, String> = BTreeMap::new();
    for o in g.relationship_objects() {
        let pi = g.projection_targets(&o.name);
        by_projection.entry(pi).or_insert_with(|| o.name.clone());
    }

    for set in lhs_sets {
        if set.len() < 2 || by_projection.contains_key(set) {
            continue;
        }
        let reduced = left_reduce(set, &idx, &mut interner);
        if reduced.len() < 2 || by_projection.contains_key(&reduced) {
            continue;
        }
        let base: Vec<&str> = reduced.iter().map(String::as_str).collect();
        let name = g.fresh_object_name(&base.join("_"));
        let mut obj = ObjectDecl::relationship(name.clone());
        obj.composite = true;
        g.add_object(obj);
        for member in &reduced {
            g.add_arrow(&name, member, true);
            prov.push(Provenance {
                rule: RULE_COMPOSITE.into(),
                source: name.clone(),
                target: member.clone(),
                detail: format!(
                    "relationship-like object materialized for left-hand side {{{}}}",
                    fmt_set(set)
                ),
            });
        }
        by_projection.insert(reduced, name);
    }
}

fn left_reduce(set: &NameSet, idx: &FdIndex, interner: &mut Interner) -> NameSet {
    let mut cur = set.clone();
    for a in set {
        if cur.len() < 2 {
            break;
        }
        let Some(aid) = interner.get(a) else { continue };
        let rest: Vec<usize> = cur
            .iter()
            .filter(|n| *n != a)
            .filter_map(|n| interner.get(n))
            .collect();
        if rest.len() + 1 != cur.len() {
            continue;
        }
        if idx.closure(&rest)[aid] {
            cur.remove(a);
        }
    }
    cur
}

/// Adds an arrow `X -> Y` for every object Y in `closure_of(X)` that is not
/// yet a target of X. Objects and targets are visited in declaration order.
pub(crate) fn add_closure_arrows<F>(
    g: &mut CategoryGraph,
    mut closure_of: F,
    prov: &mut Vec<Provenance>,
) where
    F: FnMut(&str) -> Vec<(String, &'static str)>,
{
    let names: Vec<String> = g.objects.iter().map(|o| o.name.clone()).collect();
    let mut existing: HashSet<(String, String)> = g.arrow_pairs().into_iter().collect();
    // Arrow names are tracked here; `add_arrow` would rescan them per insert.
    let mut taken: HashSet<String> = g.arrows.iter().map(|a| a.name.clone()).collect();
    for x in &names {
        for (y, rule) in closure_of(x) {
            if &y == x || !existing.insert((x.clone(), y.clone())) {
                continue;
            }
            let base = format!("{x}->{y}");
            let mut name = base.clone();
            let mut i = 2;
            while taken.contains(&name) {
                name = format!("{base}#{i}");
                i += 1;
            }
            taken.insert(name.clone());
            g.arrows.push(Arrow {
                name,
                source: x.clone(),
                target: y.clone(),
                is_projection: false,
            });
            prov.push(Provenance {
                rule: rule.into(),
                source: x.clone(),
                target: y.clone(),
                detail: format!("{y} is in the closure of {x}"),
            });
        }
    }
}

pub(crate) fn lhs_sets(fds: &[Fd]) -> BTreeSet<NameSet> {
    fds.iter().map(|fd| fd.lhs.clone()).collect()
}

pub(crate) fn require_valid(g: &CategoryGraph, fds: &[Fd], mvds: &[crate::schema::Mvd]) -> Result<()> {
    let deps = crate::schema::DependencySet::new(fds.to_vec(), mvds.to_vec());
    let report = validate(g, &deps);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidGraph(report))
    }
}

/// `(G,F)+`: materializes composite left-hand sides and adds every relevant
/// inferred FD as an arrow.
pub fn fd_closure_graph(g: &CategoryGraph, f: &[Fd]) -> Result<CategoryGraph> {
    fd_closure_graph_traced(g, f).map(|(g, _)| g)
}

pub fn fd_closure_graph_traced(
    g: &CategoryGraph,
    f: &[Fd],
) -> Result<(CategoryGraph, Vec<Provenance>)> {
    require_valid(g, f, &[])?;
    let mut out = g.clone();
    let mut prov = Vec::new();
    let mut base = graph_to_fds(&out);
    base.extend_from_slice(f);
    materialize_composites(&mut out, &lhs_sets(&base), &base, &mut prov);

    let mut fds = graph_to_fds(&out);
    fds.extend_from_slice(f);
    let mut interner = Interner::new();
    for o in &out.objects {
        interner.intern(&o.name);
    }
    let idx = FdIndex::build(&fds, &mut interner);
    let object_ids: Vec<(usize, String)> = out
        .objects
        .iter()
        .map(|o| (interner.get(&o.name).unwrap(), o.name.clone()))
        .collect();
    add_closure_arrows(
        &mut out,
        |x| {
            let cl = idx.closure(&[interner.get(x).unwrap()]);
            object_ids
                .iter()
                .filter(|(id, _)| cl[*id])
                .map(|(_, n)| (n.clone(), RULE_FD))
                .collect()
        },
        &mut prov,
    );
    Ok((out, prov))
}

/// FD set used to decide whether `g1` covers `g2`: FD(g1), F, and the key
/// pair of every relationship object of `g2` that `g1` does not declare.
fn cover_basis(g1: &CategoryGraph, g2: &CategoryGraph, f: &[Fd]) -> Vec<Fd> {
    let mut fds = graph_to_fds(g1);
    fds.extend_from_slice(f);
    for o in g2.relationship_objects() {
        if g1.contains(&o.name) {
            continue;
        }
        let pi = g2.projection_targets(&o.name);
        if pi.is_empty() {
            continue;
        }
        let me: NameSet = std::iter::once(o.name.clone()).collect();
        fds.push(Fd {
            lhs: me.clone(),
            rhs: pi.clone(),
        });
        fds.push(Fd { lhs: pi, rhs: me });
    }
    fds
}

/// Whether every arrow (and relationship key pair) of `g2` is implied by
/// `g1` together with `f`.
pub fn covers(g1: &CategoryGraph, g2: &CategoryGraph, f: &[Fd]) -> bool {
    let basis = cover_basis(g1, g2, f);
    let mut interner = Interner::new();
    let idx = FdIndex::build(&basis, &mut interner);
    graph_to_fds(g2).iter().all(|fd| {
        let seed = interner.intern_set(&fd.lhs);
        let rhs = interner.intern_set(&fd.rhs);
        // Names unknown to the basis are only reachable reflexively.
        let cl = idx.closure(&seed.iter().copied().filter(|&i| i < idx.width()).collect::<Vec<_>>());
        rhs.iter()
            .all(|&r| fd.lhs.contains(interner.name(r)) || (r < cl.len() && cl[r]))
    })
}

pub fn equivalent(g1: &CategoryGraph, g2: &CategoryGraph, f: &[Fd]) -> bool {
    covers(g1, g2, f) && covers(g2, g1, f)
}

/// Whether removing `arrow` from `g` leaves a graph equivalent to `g` under `f`.
pub fn is_redundant_arrow(arrow: &Arrow, g: &CategoryGraph, f: &[Fd]) -> Result<bool> {
    let Some(existing) = g.arrow(&arrow.source, &arrow.target) else {
        return Err(Error::UnknownArrow {
            from: arrow.source.clone(),
            to: arrow.target.clone(),
        });
    };
    let mut without = g.clone();
    without.remove_arrow(&existing.source, &existing.target);
    if existing.is_projection && without.projection_targets(&existing.source).is_empty() {
        return Ok(false);
    }
    Ok(equivalent(&without, g, f))
}

/// Same decision as [`is_redundant_arrow`] with `f` empty, answered with two
/// closure queries instead of a full equivalence test.
pub(crate) fn arrow_is_redundant_fast(g: &CategoryGraph, source: &str, target: &str) -> bool {
    let Some(arrow) = g.arrow(source, target) else {
        return false;
    };
    let mut without = g.clone();
    without.remove_arrow(source, target);
    let rest = without.projection_targets(source);
    if arrow.is_projection && rest.is_empty() {
        return false;
    }
    let one = |s: &str| -> NameSet { std::iter::once(s.to_string()).collect() };
    if !attribute_closure(&one(source), &graph_to_fds(&without))
        .closure
        .contains(target)
    {
        return false;
    }
    if arrow.is_projection {
        // The shrunken key pair rest -> source must already hold in g.
        return attribute_closure(&rest, &graph_to_fds(g)).closure.contains(target);
    }
    true
}
