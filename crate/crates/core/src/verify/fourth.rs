use crate::chase::{chase_implies_with, ChaseInput, ChaseLimits, Target};
use crate::emit::RelationDecl;
use crate::error::{Error, Result};
use crate::fd::project_fds;
use crate::schema::{fmt_set, DependencySet, Fd, Mvd, NameSet};

use super::{subsets_by_size, NfReport, Witness};

pub const FOURTH_NF_LIMIT: usize = 8;

/// MVDs that constrain the relation: those stated for the object the
/// relation was built from, when the relation has no surrogate column and
/// the MVD lies inside its sort.
fn applicable_mvds(r: &RelationDecl, deps: &DependencySet) -> Vec<Mvd> {
    let sort = r.sort_set();
    if r.has_surrogate {
        return vec![];
    }
    deps.mvds
        .iter()
        .filter(|m| m.context == r.source && m.lhs.is_subset(&sort) && m.rhs.is_subset(&sort))
        .cloned()
        .collect()
}

pub fn check_4nf(r: &RelationDecl, deps: &DependencySet) -> Result<NfReport> {
    check_4nf_with(r, deps, ChaseLimits::default())
}

/// Every nontrivial MVD `X ->> Y` implied inside the relation must have a
/// superkey on the left. Candidates are enumerated and decided by the chase.
pub fn check_4nf_with(r: &RelationDecl, deps: &DependencySet, limits: ChaseLimits) -> Result<NfReport> {
    if r.sort.len() > FOURTH_NF_LIMIT {
        return Err(Error::TooLarge {
            size: r.sort.len(),
            limit: FOURTH_NF_LIMIT,
        });
    }
    let u = r.sort_set();
    let input = ChaseInput {
        fds: project_fds(&deps.fds, &u)?,
        mvds: applicable_mvds(r, deps),
    };
    let mut witnesses = Vec::new();
    let mut reported: Vec<NameSet> = Vec::new();
    for x in subsets_by_size(&r.sort) {
        if x == u || reported.iter().any(|w| w.is_subset(&x)) {
            continue;
        }
        let rest: Vec<String> = u.difference(&x).cloned().collect();
        let superkey = Target::Fd(Fd {
            lhs: x.clone(),
            rhs: rest.iter().cloned().collect(),
        });
        if chase_implies_with(&input, &superkey, &u, limits)? {
            continue;
        }
        // Complements are implied together, so only Y holding the first
        // remaining attribute is tried.
        for y in subsets_by_size(&rest) {
            if !y.contains(&rest[0]) || y.len() == rest.len() {
                continue;
            }
            let t = Target::Mvd(Mvd {
                lhs: x.clone(),
                rhs: y.clone(),
                context: r.source.clone(),
            });
            if chase_implies_with(&input, &t, &u, limits)? {
                witnesses.push(Witness {
                    dependency: format!("{}->>{}", fmt_set(&x), fmt_set(&y)),
                    reason: format!("{{{}}} is not a superkey of {}", fmt_set(&x), r.name),
                });
                reported.push(x.clone());
                break;
            }
        }
    }
    Ok(NfReport::from_witnesses(&r.name, witnesses))
}
