use crate::emit::RelationDecl;
use crate::error::{Error, Result};
use crate::fd::attribute_closure;
use crate::schema::{fmt_set, DependencySet, NameSet};

use super::{subsets_by_size, NfReport, Witness};

pub const BCNF_LIMIT: usize = 12;

/// Every nontrivial FD `X -> A` holding inside the relation must have a
/// superkey on the left. FDs are projected onto the sort by closing every
/// subset of it.
pub fn check_bcnf(r: &RelationDecl, deps: &DependencySet) -> Result<NfReport> {
    if r.sort.len() > BCNF_LIMIT {
        return Err(Error::TooLarge {
            size: r.sort.len(),
            limit: BCNF_LIMIT,
        });
    }
    let sort = r.sort_set();
    let mut witnesses: Vec<Witness> = Vec::new();
    let mut reported: Vec<NameSet> = Vec::new();
    for x in subsets_by_size(&r.sort) {
        if reported.iter().any(|w| w.is_subset(&x)) {
            continue;
        }
        let closure: NameSet = attribute_closure(&x, &deps.fds)
            .closure
            .intersection(&sort)
            .cloned()
            .collect();
        if closure == sort {
            continue;
        }
        let rhs: NameSet = closure.difference(&x).cloned().collect();
        if rhs.is_empty() {
            continue;
        }
        witnesses.push(Witness {
            dependency: format!("{}->{}", fmt_set(&x), fmt_set(&rhs)),
            reason: format!("{{{}}} is not a superkey of {}", fmt_set(&x), r.name),
        });
        reported.push(x);
    }
    Ok(NfReport::from_witnesses(&r.name, witnesses))
}
