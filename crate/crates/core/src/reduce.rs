//! First and second reduced representations.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd::{arrow_is_redundant_fast, attribute_closure, fd_closure_graph};
use crate::mvd::{dependency_basis, derive_mixed_fds, fd_mvd_closure_graph, identify_mvd_objects};
use crate::schema::{graph_to_fds, CategoryGraph, DependencySet, Fd, Mvd, NameSet, ObjectDecl, ObjectKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RemovedArrow {
    pub source: String,
    pub target: String,
    pub projection: bool,
    /// Object path from source to target in the graph left after removal.
    /// Empty when the derivation needs a composite key rather than a path.
    pub justification: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub object: String,
    pub mvd: String,
    pub new_objects: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ReductionTrace {
    pub removed_arrows: Vec<RemovedArrow>,
    pub decomposed_objects: Vec<Decomposition>,
    pub removed_limit_objects: Vec<String>,
    /// MVDs after re-contextualization onto decomposed objects.
    pub residual_mvds: Vec<Mvd>,
    pub notes: Vec<String>,
}

impl ReductionTrace {
    /// Checks that every removed arrow between surviving objects is implied
    /// by the final graph.
    pub fn verify(&self, result: &CategoryGraph) -> Result<()> {
        let fds = graph_to_fds(result);
        for r in &self.removed_arrows {
            if !result.contains(&r.source) || !result.contains(&r.target) {
                continue;
            }
            let seed: NameSet = std::iter::once(r.source.clone()).collect();
            if !attribute_closure(&seed, &fds).closure.contains(&r.target) {
                return Err(Error::Inconsistent(format!(
                    "removed arrow {}->{} is not derivable in the reduced graph",
                    r.source, r.target
                )));
            }
        }
        Ok(())
    }
}

/// Arrows in the order the redundancy scan visits them: composed arrows
/// first, then projections, each by (source, target).
fn scan_order(g: &CategoryGraph) -> Vec<(String, String)> {
    let mut composed: Vec<(String, String)> = Vec::new();
    let mut projections: Vec<(String, String)> = Vec::new();
    for a in &g.arrows {
        let key = (a.source.clone(), a.target.clone());
        if a.is_projection {
            projections.push(key);
        } else {
            composed.push(key);
        }
    }
    composed.sort();
    projections.sort();
    composed.extend(projections);
    composed
}

fn path(g: &CategoryGraph, from: &str, to: &str) -> Vec<String> {
    let mut prev: HashMap<&str, &str> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    while let Some(cur) = queue.pop_front() {
        if cur == to {
            let mut out = vec![to.to_string()];
            let mut at = to;
            while let Some(&p) = prev.get(at) {
                out.push(p.to_string());
                at = p;
            }
            out.reverse();
            return out;
        }
        for n in g.out_neighbors(cur) {
            if n != from && !prev.contains_key(n) {
                prev.insert(n, cur);
                queue.push_back(n);
            }
        }
    }
    Vec::new()
}

/// Removes redundant arrows until none is left. Returns whether anything
/// was removed.
fn remove_redundant_arrows(g: &mut CategoryGraph, trace: &mut ReductionTrace) -> bool {
    let mut any = false;
    loop {
        let mut removed = false;
        for (s, t) in scan_order(g) {
            if !arrow_is_redundant_fast(g, &s, &t) {
                continue;
            }
            let arrow = g.remove_arrow(&s, &t).expect("scanned arrow exists");
            trace.removed_arrows.push(RemovedArrow {
                justification: path(g, &s, &t),
                source: s,
                target: t,
                projection: arrow.is_projection,
            });
            removed = true;
        }
        if !removed {
            return any;
        }
        any = true;
    }
}

const MAX_ROUNDS: usize = 32;

fn same_graph(a: &CategoryGraph, b: &CategoryGraph) -> bool {
    a.arrow_set() == b.arrow_set() && a.object_names().eq(b.object_names())
}

/// Repeats `round` from `g` until its output reproduces itself. A projection
/// dropped in one round returns as a composed arrow in the next closure, so
/// a single round is not always a fixpoint. Only the first removal of each
/// pair is kept in the trace, and only if the pair is absent at the end.
fn until_stable<F>(g: &CategoryGraph, trace: &mut ReductionTrace, mut round: F) -> Result<CategoryGraph>
where
    F: FnMut(&CategoryGraph, &mut ReductionTrace) -> Result<CategoryGraph>,
{
    let mut out = g.clone();
    let mut removed: Vec<RemovedArrow> = Vec::new();
    let mut rounds = 0;
    loop {
        let mut t = ReductionTrace::default();
        let next = round(&out, &mut t)?;
        rounds += 1;
        for r in t.removed_arrows.drain(..) {
            if !removed.iter().any(|x| x.source == r.source && x.target == r.target) {
                removed.push(r);
            }
        }
        trace.decomposed_objects.append(&mut t.decomposed_objects);
        trace.removed_limit_objects.append(&mut t.removed_limit_objects);
        trace.notes.append(&mut t.notes);
        trace.residual_mvds = t.residual_mvds;
        let done = same_graph(&next, &out);
        out = next;
        if done {
            break;
        }
        if rounds == MAX_ROUNDS {
            return Err(Error::Inconsistent(format!(
                "reduction did not settle after {MAX_ROUNDS} rounds"
            )));
        }
    }
    if rounds > 2 {
        trace.notes.push(format!("reduction settled after {} rounds", rounds - 1));
    }
    removed.retain(|r| !out.has_arrow(&r.source, &r.target));
    trace.removed_arrows = removed;
    Ok(out)
}

/// 1RR: `(G,F)+` with every redundant arrow removed, repeated to a fixpoint.
pub fn first_reduced(g: &CategoryGraph, f: &[Fd]) -> Result<(CategoryGraph, ReductionTrace)> {
    let mut trace = ReductionTrace::default();
    let out = until_stable(g, &mut trace, |cur, t| {
        let mut out = fd_closure_graph(cur, f)?;
        // The closure already carries F as arrows, so redundancy is judged
        // on the graph alone.
        remove_redundant_arrows(&mut out, t);
        Ok(out)
    })?;
    Ok((out, trace))
}

/// Whether relationship object `o` can be dropped or decomposed: it is a
/// limit or MVD object, nothing points to it, and each of its composed
/// arrows is derivable from its projection targets without it.
pub fn is_derivable(o: &str, g: &CategoryGraph) -> Result<bool> {
    let obj = g.object(o).ok_or_else(|| Error::UnknownObject(o.to_string()))?;
    if obj.kind != ObjectKind::Relationship {
        return Ok(false);
    }
    if !(obj.is_limit || g.mvd_objects.contains(o)) {
        return Ok(false);
    }
    if g.incoming(o).next().is_some() {
        return Ok(false);
    }
    let composed: Vec<String> = g
        .outgoing(o)
        .filter(|a| !a.is_projection)
        .map(|a| a.target.clone())
        .collect();
    if composed.is_empty() {
        return Ok(true);
    }
    let mut without = g.clone();
    without.arrows.retain(|a| a.source != o || a.is_projection);
    let reach = attribute_closure(&g.projection_targets(o), &graph_to_fds(&without)).closure;
    Ok(composed.iter().all(|t| reach.contains(t)))
}

/// Splits `o` along `mvd` (`X ->>_o Y`) into `X ∪ Y` and `pi(o) - Y`.
pub fn decompose_mvd_object(g: &CategoryGraph, o: &str, mvd: &Mvd) -> Result<CategoryGraph> {
    let mut counters = BTreeMap::new();
    let mut bases = BTreeMap::new();
    decompose(g, o, mvd, &mut counters, &mut bases).map(|(g, _)| g)
}

fn decompose(
    g: &CategoryGraph,
    o: &str,
    mvd: &Mvd,
    counters: &mut BTreeMap<String, usize>,
    bases: &mut BTreeMap<String, String>,
) -> Result<(CategoryGraph, [String; 2])> {
    if !is_derivable(o, g)? {
        return Err(Error::Precondition(format!(
            "object {o} is not a derivable relationship object"
        )));
    }
    if mvd.context != o {
        return Err(Error::Precondition(format!("mvd {mvd} does not have context {o}")));
    }
    let pi = g.projection_targets(o);
    if !mvd.lhs.is_subset(&pi) || !mvd.rhs.is_subset(&pi) {
        return Err(Error::Precondition(format!(
            "mvd {mvd} is not inside the projection set of {o}"
        )));
    }
    let y: NameSet = mvd.rhs.difference(&mvd.lhs).cloned().collect();
    let first: NameSet = mvd.lhs.union(&y).cloned().collect();
    let second: NameSet = pi.difference(&y).cloned().collect();

    let base = bases.get(o).cloned().unwrap_or_else(|| o.to_string());
    let mut out = g.clone();
    let pos = out.objects.iter().position(|x| x.name == o).unwrap();
    let template = out.objects[pos].clone();
    out.remove_object(o);

    let mut fresh = |out: &CategoryGraph| {
        let counter = counters.entry(base.clone()).or_insert(0);
        loop {
            *counter += 1;
            let name = format!("{base}_{}", counter);
            if !out.contains(&name) {
                return name;
            }
        }
    };
    let n1 = fresh(&out);
    let mut o1 = ObjectDecl::relationship(n1.clone());
    o1.domain_tag = template.domain_tag.clone();
    out.objects.insert(pos, o1);
    let n2 = fresh(&out);
    out.objects.insert(pos + 1, ObjectDecl::relationship(n2.clone()));
    for t in &first {
        out.add_arrow(&n1, t, true);
    }
    for t in &second {
        out.add_arrow(&n2, t, true);
    }
    bases.insert(n1.clone(), base.clone());
    bases.insert(n2.clone(), base);
    Ok((out, [n1, n2]))
}

/// Moves the MVDs of a decomposed object onto the parts that contain their
/// left-hand side, cutting the right-hand side down to each part.
fn recontextualize(mvds: &[Mvd], o: &str, parts: &[(String, NameSet)]) -> Vec<Mvd> {
    let mut out = Vec::new();
    for m in mvds {
        if m.context != o {
            out.push(m.clone());
            continue;
        }
        for (name, pi) in parts {
            if !m.lhs.is_subset(pi) {
                continue;
            }
            let rhs: NameSet = m.rhs.intersection(pi).filter(|a| !m.lhs.contains(*a)).cloned().collect();
            if !rhs.is_empty() {
                out.push(Mvd {
                    lhs: m.lhs.clone(),
                    rhs,
                    context: name.clone(),
                });
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// The MVD used to split `o`: the first declared nontrivial one, else the
/// first block of a declared left-hand side's basis.
fn choose_split(g: &CategoryGraph, o: &str, fds: &[Fd], mvds: &[Mvd]) -> Option<Mvd> {
    let pi = g.projection_targets(o);
    let mut local: Vec<&Mvd> = mvds.iter().filter(|m| m.context == o).collect();
    local.sort();
    for m in &local {
        let y: NameSet = m.rhs.difference(&m.lhs).cloned().collect();
        let xy: NameSet = m.lhs.union(&y).cloned().collect();
        if m.lhs.is_subset(&pi) && !y.is_empty() && xy.is_subset(&pi) && xy != pi {
            return Some((*m).clone());
        }
    }
    let local_deps = DependencySet {
        fds: crate::mvd::context_fds(fds, &pi)
            .into_iter()
            .map(|(lhs, rhs)| Fd { lhs, rhs })
            .collect(),
        mvds: local.iter().map(|m| (*m).clone()).collect(),
    };
    for m in &local {
        if !m.lhs.is_subset(&pi) {
            continue;
        }
        let b = dependency_basis(&m.lhs, &local_deps, &pi).ok()?;
        if b.blocks.len() >= 2 {
            return Some(Mvd {
                lhs: m.lhs.clone(),
                rhs: b.blocks[0].clone(),
                context: o.to_string(),
            });
        }
    }
    None
}

fn refresh_mvd_objects(g: &mut CategoryGraph, f: &[Fd], mvds: &[Mvd]) {
    let mut fds = graph_to_fds(g);
    fds.extend_from_slice(f);
    let mixed = derive_mixed_fds(g, &fds, mvds);
    g.mvd_objects = identify_mvd_objects(g, &mixed, mvds);
}

/// 2RR: `(G,F,M)+` with derivable MVD objects decomposed, derivable limit
/// objects removed and redundant arrows removed, repeated until stable.
/// The whole procedure is then rerun on its own output until that too is
/// stable, with the MVDs carried over onto the new objects.
pub fn second_reduced(
    g: &CategoryGraph,
    f: &[Fd],
    m: &[Mvd],
) -> Result<(CategoryGraph, ReductionTrace)> {
    let mut trace = ReductionTrace::default();
    let mut mvds: Vec<Mvd> = m.to_vec();
    let out = until_stable(g, &mut trace, |cur, t| {
        // An earlier round can drop a projection of a context object when
        // another path derives it; such MVDs are carried along unchanged.
        let (live, stale): (Vec<Mvd>, Vec<Mvd>) = mvds.iter().cloned().partition(|m| {
            cur.contains(&m.context) && {
                let pi = cur.projection_targets(&m.context);
                m.lhs.is_subset(&pi) && m.rhs.is_subset(&pi)
            }
        });
        let (out, mut residual) = second_reduced_round(cur, f, &live, t)?;
        residual.extend(stale);
        t.residual_mvds = residual.clone();
        mvds = residual;
        Ok(out)
    })?;
    Ok((out, trace))
}

fn second_reduced_round(
    g: &CategoryGraph,
    f: &[Fd],
    m: &[Mvd],
    trace: &mut ReductionTrace,
) -> Result<(CategoryGraph, Vec<Mvd>)> {
    let mut out = fd_mvd_closure_graph(g, f, m)?;
    let mut mvds: Vec<Mvd> = m.to_vec();
    let mut counters = BTreeMap::new();
    let mut bases = BTreeMap::new();

    loop {
        let mut changed = false;

        // Decompose derivable MVD objects, re-identifying after each split.
        loop {
            let fds = {
                let mut fds = graph_to_fds(&out);
                fds.extend_from_slice(f);
                derive_mixed_fds(&out, &fds, &mvds)
            };
            let mut pick = None;
            for o in out.mvd_objects.clone() {
                if !is_derivable(&o, &out)? {
                    continue;
                }
                if let Some(mvd) = choose_split(&out, &o, &fds, &mvds) {
                    pick = Some((o, mvd));
                    break;
                }
            }
            let Some((o, mvd)) = pick else { break };
            let (next, names) = decompose(&out, &o, &mvd, &mut counters, &mut bases)?;
            let parts: Vec<(String, NameSet)> = names
                .iter()
                .map(|n| (n.clone(), next.projection_targets(n)))
                .collect();
            mvds = recontextualize(&mvds, &o, &parts);
            trace.decomposed_objects.push(Decomposition {
                object: o.clone(),
                mvd: mvd.to_string(),
                new_objects: names.to_vec(),
            });
            trace
                .notes
                .push(format!("MVD objects re-identified after splitting {o}"));
            out = next;
            refresh_mvd_objects(&mut out, f, &mvds);
            changed = true;
        }

        let limits: Vec<String> = out
            .objects
            .iter()
            .filter(|o| o.is_limit)
            .map(|o| o.name.clone())
            .collect();
        for l in limits {
            if is_derivable(&l, &out)? {
                out.remove_object(&l);
                trace.removed_limit_objects.push(l);
                changed = true;
            }
        }

        if remove_redundant_arrows(&mut out, trace) {
            changed = true;
        }
        refresh_mvd_objects(&mut out, f, &mvds);
        if !changed {
            break;
        }
    }
    Ok((out, mvds))
}
