//! MVD reasoning relative to a context object: dependency basis, mixed
//! FD/MVD closure, and the closure `(G,F,M)+`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::fd::{
    add_closure_arrows, attribute_closure, lhs_sets, materialize_composites, project_fds,
    require_valid, Provenance, PROJECTION_LIMIT, RULE_FD, RULE_MVD,
};
use crate::index::{FdIndex, Interner};
use crate::schema::{fmt_set, graph_to_fds, CategoryGraph, DependencySet, Fd, Mvd, NameSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyBasis {
    pub seed: NameSet,
    pub context: NameSet,
    pub blocks: Vec<NameSet>,
}

impl DependencyBasis {
    /// Whether `seed ->> y` holds, i.e. `y - seed` is a union of blocks.
    pub fn determines(&self, y: &NameSet) -> bool {
        let rest: NameSet = y.difference(&self.seed).cloned().collect();
        if !rest.is_subset(&self.context) {
            return false;
        }
        self.blocks
            .iter()
            .all(|b| b.is_subset(&rest) || b.is_disjoint(&rest))
    }
}

/// Dependencies read inside universe `u`: FDs with lhs in `u` (rhs cut down
/// to `u`) and MVDs lying entirely in `u`.
fn relativize(d: &DependencySet, u: &NameSet) -> (Vec<(NameSet, NameSet)>, Vec<(NameSet, NameSet)>) {
    let mut fds = Vec::new();
    for fd in &d.fds {
        if fd.lhs.is_subset(u) {
            let rhs: NameSet = fd.rhs.intersection(u).cloned().collect();
            if !rhs.is_empty() {
                fds.push((fd.lhs.clone(), rhs));
            }
        }
    }
    let mut mvds = Vec::new();
    for m in &d.mvds {
        if m.lhs.is_subset(u) && m.rhs.is_subset(u) {
            mvds.push((m.lhs.clone(), m.rhs.clone()));
        }
    }
    (fds, mvds)
}

/// Finest partition of `u - x` such that `x ->> W` for every union W of
/// blocks. FDs take part as the MVDs `V ->> a` for each of their right-hand
/// attributes. MVDs are read relative to `u` regardless of their context.
pub fn dependency_basis(x: &NameSet, d: &DependencySet, u: &NameSet) -> Result<DependencyBasis> {
    if !x.is_subset(u) {
        return Err(Error::Precondition(format!(
            "seed {{{}}} is not contained in the context {{{}}}",
            fmt_set(x),
            fmt_set(u)
        )));
    }
    let (fds, mvds) = relativize(d, u);
    Ok(basis(x, &fds, &mvds, u))
}

fn basis(
    x: &NameSet,
    fds: &[(NameSet, NameSet)],
    mvds: &[(NameSet, NameSet)],
    u: &NameSet,
) -> DependencyBasis {
    let mut rules: Vec<(NameSet, NameSet)> = mvds.to_vec();
    for (l, r) in fds {
        for a in r.difference(l) {
            rules.push((l.clone(), std::iter::once(a.clone()).collect()));
        }
    }
    let rest: NameSet = u.difference(x).cloned().collect();
    let mut blocks: Vec<NameSet> = if rest.is_empty() { vec![] } else { vec![rest] };
    loop {
        let mut split = None;
        'search: for (v, w) in &rules {
            for (i, b) in blocks.iter().enumerate() {
                if b.is_disjoint(v) && !b.is_disjoint(w) && !b.is_subset(w) {
                    split = Some((i, w.clone()));
                    break 'search;
                }
            }
        }
        let Some((i, w)) = split else { break };
        let b = blocks.swap_remove(i);
        blocks.push(b.intersection(&w).cloned().collect());
        blocks.push(b.difference(&w).cloned().collect());
    }
    blocks.sort();
    DependencyBasis {
        seed: x.clone(),
        context: u.clone(),
        blocks,
    }
}

/// FD closure of `x` inside `u` under FDs and MVDs together: an attribute
/// outside `x` is determined iff it forms a singleton block of the basis and
/// some FD has it on the right but not on the left.
fn mixed_closure(
    x: &NameSet,
    fds: &[(NameSet, NameSet)],
    mvds: &[(NameSet, NameSet)],
    u: &NameSet,
) -> NameSet {
    let b = basis(x, fds, mvds, u);
    let mut out = x.clone();
    for block in &b.blocks {
        if block.len() != 1 {
            continue;
        }
        let a = block.iter().next().unwrap();
        if fds.iter().any(|(l, r)| r.contains(a) && !l.contains(a)) {
            out.insert(a.clone());
        }
    }
    out
}

/// Decides `q` relative to its context, whose attribute set is `u`.
/// Only the MVDs of `d` with the same context participate; FDs are global
/// but only those lying inside `u` are used.
pub fn mvd_membership(d: &DependencySet, q: &Mvd, u: &NameSet) -> Result<bool> {
    if !q.lhs.is_subset(u) || !q.rhs.is_subset(u) {
        return Err(Error::Precondition(format!("mvd {q} is not inside its context")));
    }
    let local = DependencySet {
        fds: d.fds.clone(),
        mvds: d.mvds.iter().filter(|m| m.context == q.context).cloned().collect(),
    };
    Ok(dependency_basis(&q.lhs, &local, u)?.determines(&q.rhs))
}

/// FDs holding inside `pi`, as a projection when `pi` is small and as the
/// restriction of `fds` plus singleton closures otherwise.
pub(crate) fn context_fds(fds: &[Fd], pi: &NameSet) -> Vec<(NameSet, NameSet)> {
    if pi.len() <= PROJECTION_LIMIT {
        return project_fds(fds, pi)
            .expect("bounded")
            .into_iter()
            .map(|fd| (fd.lhs, fd.rhs))
            .collect();
    }
    let mut out: Vec<(NameSet, NameSet)> = Vec::new();
    for fd in fds {
        if fd.lhs.is_subset(pi) {
            let rhs: NameSet = fd.rhs.intersection(pi).cloned().collect();
            if !rhs.is_empty() {
                out.push((fd.lhs.clone(), rhs));
            }
        }
    }
    for a in pi {
        let seed: NameSet = std::iter::once(a.clone()).collect();
        let cl = attribute_closure(&seed, fds).closure;
        let rhs: NameSet = cl.intersection(pi).filter(|b| *b != a).cloned().collect();
        if !rhs.is_empty() {
            out.push((seed, rhs));
        }
    }
    out
}

fn mvds_by_context(mvds: &[Mvd]) -> BTreeMap<String, Vec<(NameSet, NameSet)>> {
    let mut by: BTreeMap<String, Vec<(NameSet, NameSet)>> = BTreeMap::new();
    for m in mvds {
        by.entry(m.context.clone())
            .or_default()
            .push((m.lhs.clone(), m.rhs.clone()));
    }
    by
}

fn subsets(pi: &NameSet, declared: &[(NameSet, NameSet)]) -> Vec<NameSet> {
    let items: Vec<&String> = pi.iter().collect();
    if items.len() <= PROJECTION_LIMIT {
        return (1u32..(1u32 << items.len()))
            .map(|mask| {
                (0..items.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| items[i].clone())
                    .collect()
            })
            .collect();
    }
    let mut seeds: BTreeSet<NameSet> = pi.iter().map(|a| std::iter::once(a.clone()).collect()).collect();
    seeds.extend(declared.iter().map(|(l, _)| l.clone()));
    seeds.into_iter().collect()
}

/// Extends `fds` with the FDs that MVD coalescence adds, iterating the
/// per-context mixed closures and the global FD closure to a fixpoint.
pub(crate) fn derive_mixed_fds(g: &CategoryGraph, fds: &[Fd], mvds: &[Mvd]) -> Vec<Fd> {
    let mut global = fds.to_vec();
    let by_ctx = mvds_by_context(mvds);
    loop {
        let mut new = Vec::new();
        for (ctx, local) in &by_ctx {
            let pi = g.projection_targets(ctx);
            if pi.is_empty() {
                continue;
            }
            let cfds = context_fds(&global, &pi);
            let mut interner = Interner::new();
            let idx = FdIndex::build(&global, &mut interner);
            for s in subsets(&pi, local) {
                let seed = interner.intern_set(&s);
                let known = closure_names(&idx, &interner, &seed);
                let mixed = mixed_closure(&s, &cfds, local, &pi);
                let extra: NameSet = mixed.difference(&known).cloned().collect();
                if !extra.is_empty() {
                    new.push(Fd { lhs: s, rhs: extra });
                }
            }
        }
        if new.is_empty() {
            return global;
        }
        global.extend(new);
    }
}

fn closure_names(idx: &FdIndex, interner: &Interner, seed: &[usize]) -> NameSet {
    let usable: Vec<usize> = seed.iter().copied().filter(|&i| i < idx.width()).collect();
    let mut out = interner.to_names(&idx.closure(&usable));
    for &i in seed {
        out.insert(interner.name(i).to_string());
    }
    out
}

/// Relationship objects that carry a declared MVD whose left-hand side has
/// a dependency basis of at least two blocks within the object.
pub fn identify_mvd_objects(g: &CategoryGraph, fds: &[Fd], mvds: &[Mvd]) -> NameSet {
    let mut out = NameSet::new();
    for (ctx, local) in mvds_by_context(mvds) {
        if g.kind(&ctx) != Some(crate::schema::ObjectKind::Relationship) {
            continue;
        }
        let pi = g.projection_targets(&ctx);
        let cfds = context_fds(fds, &pi);
        let hit = local.iter().any(|(x, _)| {
            x.is_subset(&pi) && basis(x, &cfds, &local, &pi).blocks.len() >= 2
        });
        if hit {
            out.insert(ctx);
        }
    }
    out
}

/// `(G,F,M)+`: the FD closure where FDs may also follow from MVD
/// coalescence, with MVD objects recorded in `mvd_objects`.
pub fn fd_mvd_closure_graph(g: &CategoryGraph, f: &[Fd], m: &[Mvd]) -> Result<CategoryGraph> {
    fd_mvd_closure_graph_traced(g, f, m).map(|(g, _)| g)
}

pub fn fd_mvd_closure_graph_traced(
    g: &CategoryGraph,
    f: &[Fd],
    m: &[Mvd],
) -> Result<(CategoryGraph, Vec<Provenance>)> {
    require_valid(g, f, m)?;
    let mut out = g.clone();
    let mut prov = Vec::new();
    let mut base = graph_to_fds(&out);
    base.extend_from_slice(f);
    let mut sets = lhs_sets(&base);
    sets.extend(m.iter().map(|d| d.lhs.clone()));
    materialize_composites(&mut out, &sets, &base, &mut prov);

    let mut plain = graph_to_fds(&out);
    plain.extend_from_slice(f);
    let mixed = derive_mixed_fds(&out, &plain, m);

    let mut interner = Interner::new();
    for o in &out.objects {
        interner.intern(&o.name);
    }
    let plain_idx = FdIndex::build(&plain, &mut interner);
    let mixed_idx = FdIndex::build(&mixed, &mut interner);
    let object_ids: Vec<(usize, String)> = out
        .objects
        .iter()
        .map(|o| (interner.get(&o.name).unwrap(), o.name.clone()))
        .collect();
    add_closure_arrows(
        &mut out,
        |x| {
            let seed = [interner.get(x).unwrap()];
            let p = plain_idx.closure(&seed);
            let c = mixed_idx.closure(&seed);
            object_ids
                .iter()
                .filter(|(id, _)| c[*id])
                .map(|(id, n)| {
                    let from_fds = *id < p.len() && p[*id];
                    (n.clone(), if from_fds { RULE_FD } else { RULE_MVD })
                })
                .collect()
        },
        &mut prov,
    );
    out.mvd_objects = identify_mvd_objects(&out, &mixed, m);
    Ok((out, prov))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chase::{chase_implies, ChaseInput, Target};
    use crate::fd::fd_closure_graph;
    use crate::schema::{names, Arrow, ObjectDecl};

    pub(crate) fn mvd_sample() -> (CategoryGraph, Vec<Fd>, Vec<Mvd>) {
        let mut g = CategoryGraph::new();
        for n in ["A", "B", "C", "D"] {
            g.add_object(ObjectDecl::attribute(n));
        }
        g.add_object(ObjectDecl::relationship("X"));
        for (i, t) in ["A", "B", "C", "D"].iter().enumerate() {
            g.arrows.push(Arrow::projection(format!("p{i}"), "X", *t));
        }
        g.arrows.push(Arrow::new("g", "B", "C"));
        (g, vec![], vec![Mvd::new(["A"], ["B"], "X")])
    }

    fn s(items: &[&str]) -> NameSet {
        names(items.iter().copied())
    }

    #[test]
    fn complement_basis() {
        let d = DependencySet::new(vec![], vec![Mvd::new(["A"], ["B"], "X")]);
        let b = dependency_basis(&s(&["A"]), &d, &s(&["A", "B", "C", "D"])).unwrap();
        assert_eq!(b.blocks, vec![s(&["B"]), s(&["C", "D"])]);
        assert!(b.determines(&s(&["C", "D"])));
        assert!(!b.determines(&s(&["C"])));
    }

    #[test]
    fn full_seed_has_empty_basis() {
        let u = s(&["A", "B"]);
        let b = dependency_basis(&u, &DependencySet::default(), &u).unwrap();
        assert!(b.blocks.is_empty());
        assert!(dependency_basis(&s(&["Z"]), &DependencySet::default(), &u).is_err());
    }

    #[test]
    fn fd_splits_basis() {
        let d = DependencySet::from_fds(vec![Fd::new(["A"], ["B"])]);
        let b = dependency_basis(&s(&["A"]), &d, &s(&["A", "B", "C"])).unwrap();
        assert_eq!(b.blocks, vec![s(&["B"]), s(&["C"])]);
    }

    #[test]
    fn membership_examples() {
        let u = s(&["A", "B", "C", "D"]);
        let d = DependencySet::new(vec![], vec![Mvd::new(["A"], ["B"], "X")]);
        assert!(mvd_membership(&d, &Mvd::new(["A"], ["C", "D"], "X"), &u).unwrap());
        assert!(mvd_membership(&d, &Mvd::new(["A", "B"], ["A"], "X"), &u).unwrap());
        // An MVD from another context does not take part.
        assert!(!mvd_membership(&d, &Mvd::new(["A"], ["C", "D"], "Y"), &u).unwrap());

        let abc = s(&["A", "B", "C"]);
        let d = DependencySet::new(
            vec![],
            vec![Mvd::new(["A"], ["B"], "U"), Mvd::new(["B"], ["C"], "U")],
        );
        assert!(mvd_membership(&d, &Mvd::new(["A"], ["C"], "U"), &abc).unwrap());
    }

    #[test]
    fn mvd_sample_closure() {
        let (g, f, m) = mvd_sample();
        let (c, prov) = fd_mvd_closure_graph_traced(&g, &f, &m).unwrap();
        let added: BTreeSet<_> = c.arrow_pairs().difference(&g.arrow_pairs()).cloned().collect();
        assert_eq!(added, [("A".to_string(), "C".to_string())].into_iter().collect());
        assert_eq!(c.mvd_objects, s(&["X"]));
        assert_eq!(prov.len(), 1);
        assert_eq!(prov[0].rule, RULE_MVD);
    }

    #[test]
    fn no_mvds_matches_fd_closure() {
        let (g, f, _) = mvd_sample();
        let a = fd_mvd_closure_graph(&g, &f, &[]).unwrap();
        let b = fd_closure_graph(&g, &f).unwrap();
        assert_eq!(a, b);
        assert!(a.mvd_objects.is_empty());
    }

    #[test]
    fn mvd_object_without_new_arrows() {
        let mut g = CategoryGraph::new();
        for n in ["A", "B", "C"] {
            g.add_object(ObjectDecl::attribute(n));
        }
        g.add_object(ObjectDecl::relationship("O"));
        for t in ["A", "B", "C"] {
            g.add_arrow("O", t, true);
        }
        let m = vec![Mvd::new(["A"], ["B"], "O")];
        let c = fd_mvd_closure_graph(&g, &[], &m).unwrap();
        assert_eq!(c.mvd_objects, s(&["O"]));
        assert_eq!(c.arrows.len(), 3);
    }

    #[test]
    fn mixed_closure_matches_chase_on_mvd_sample() {
        let u = s(&["A", "B", "C", "D"]);
        let fds = vec![(s(&["B"]), s(&["C"]))];
        let mvds = vec![(s(&["A"]), s(&["B"]))];
        let cl = mixed_closure(&s(&["A"]), &fds, &mvds, &u);
        assert_eq!(cl, s(&["A", "C"]));
        let input = ChaseInput {
            fds: vec![Fd::new(["B"], ["C"])],
            mvds: vec![Mvd::new(["A"], ["B"], "X")],
        };
        for a in ["B", "C", "D"] {
            let t = Target::Fd(Fd::new(["A"], [a]));
            assert_eq!(chase_implies(&input, &t, &u).unwrap(), cl.contains(a), "{a}");
        }
    }
}
