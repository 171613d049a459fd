use crate::emit::RelationalSchema;
use crate::error::Result;
use crate::fd::{attribute_closure, project_fds};
use crate::schema::{fmt_set, DependencySet, Fd, NameSet};

use super::{check_bcnf, NfReport, Witness};

/// BCNF plus no restorable attribute: a non-key attribute of a relation
/// whose value follows from a key of that relation through the FDs of the
/// other relations alone.
pub fn check_improved_bcnf(s: &RelationalSchema, deps: &DependencySet) -> Result<NfReport> {
    let mut witnesses: Vec<Witness> = Vec::new();
    for r in &s.relations {
        let plain = check_bcnf(r, deps)?;
        witnesses.extend(plain.witnesses);
    }
    if !witnesses.is_empty() {
        return Ok(NfReport::from_witnesses("schema", witnesses));
    }

    let projected: Vec<Vec<Fd>> = s
        .relations
        .iter()
        .map(|r| project_fds(&deps.fds, &r.sort_set()))
        .collect::<Result<_>>()?;
    for (i, r) in s.relations.iter().enumerate() {
        let others: Vec<Fd> = projected
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .flat_map(|(_, fds)| fds.iter().cloned())
            .collect();
        let keys = keys_of(r, deps);
        let prime: NameSet = keys.iter().flatten().cloned().collect();
        for b in r.sort.iter().filter(|b| !prime.contains(*b)) {
            for k in &keys {
                if attribute_closure(k, &others).closure.contains(b) {
                    witnesses.push(Witness {
                        dependency: format!("{}->{}", fmt_set(k), b),
                        reason: format!(
                            "attribute {b} in {} is restorable from the other relations",
                            r.name
                        ),
                    });
                    break;
                }
            }
        }
    }
    Ok(NfReport::from_witnesses("schema", witnesses))
}

/// Declared candidate keys, or the minimal superkeys under `deps` when the
/// relation declares none.
fn keys_of(r: &crate::emit::RelationDecl, deps: &DependencySet) -> Vec<NameSet> {
    if !r.candidate_keys.is_empty() {
        return r.candidate_keys.clone();
    }
    let sort = r.sort_set();
    let mut keys: Vec<NameSet> = Vec::new();
    for x in super::subsets_by_size(&r.sort) {
        if keys.iter().any(|k| k.is_subset(&x)) {
            continue;
        }
        if attribute_closure(&x, &deps.fds).closure.is_superset(&sort) {
            keys.push(x);
        }
    }
    keys
}
