//! Path FDs over a DTD and the XML normal-form check.
//!
//! A path is a dot-separated list of tags starting at the root, optionally
//! ending in `@attr` or `#P`.

use std::fmt;

use serde::Serialize;

use crate::emit::dtd::{ref_attribute, DtdSchema, ID};
use crate::error::{Error, Result};
use crate::schema::{CategoryGraph, ObjectKind};

use super::{NfReport, Verdict, Witness};

pub const PCDATA: &str = "#P";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PathFd {
    pub lhs: Vec<String>,
    pub rhs: String,
}

impl fmt::Display for PathFd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs.join(", "), self.rhs)
    }
}

fn join(path: &[String], last: &str) -> String {
    let mut p = path.join(".");
    p.push('.');
    p.push_str(last);
    p
}

/// Every element path of `tag`, found by walking content models from the root.
fn loci(d: &DtdSchema, tag: &str) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut stack = vec![vec![d.root.clone()]];
    while let Some(path) = stack.pop() {
        let last = path.last().unwrap();
        if last == tag && path.len() > 1 {
            out.push(path.clone());
        }
        if path.len() > d.elements.len() + 1 {
            continue;
        }
        if let Some(factors) = d.content.get(last) {
            for f in factors.iter().rev() {
                let mut next = path.clone();
                next.push(f.tag.clone());
                stack.push(next);
            }
        }
    }
    out.sort();
    out
}

fn children<'a>(d: &'a DtdSchema, tag: &str) -> impl Iterator<Item = &'a str> {
    d.content
        .get(tag)
        .into_iter()
        .flatten()
        .map(|f| f.tag.as_str())
}

/// The path FD for each arrow `O1 -> O2`, at every place of O1 in the DTD
/// where O2 is reachable as a child, an `@O2_ID` reference or a sibling leaf.
pub fn derive_xml_fds(g: &CategoryGraph, d: &DtdSchema) -> Result<Vec<PathFd>> {
    let mut out = Vec::new();
    for a in &g.arrows {
        let (o1, o2) = (a.source.as_str(), a.target.as_str());
        let mut placed = false;
        for p in loci(d, o1) {
            let element = d.attlists.contains_key(o1) && d.content.get(&d.root).is_some_and(|f| f.iter().any(|x| x.tag == o1)) && p.len() == 2;
            let lhs = if element && g.kind(o1) != Some(ObjectKind::Attribute) {
                join(&p, ID)
            } else {
                join(&p, PCDATA)
            };
            let rhs = if children(d, o1).any(|c| c == o2) {
                let mut q = p.clone();
                q.push(o2.to_string());
                join(&q, PCDATA)
            } else if d.attlists.get(o1).is_some_and(|r| r.contains(&ref_attribute(o2))) {
                join(&p, &ref_attribute(o2))
            } else if p.len() >= 2 && children(d, &p[p.len() - 2]).any(|c| c == o2) {
                let mut q = p[..p.len() - 1].to_vec();
                q.push(o2.to_string());
                join(&q, PCDATA)
            } else {
                continue;
            };
            out.push(PathFd { lhs: vec![lhs], rhs });
            placed = true;
        }
        if !placed {
            return Err(Error::Inconsistent(format!(
                "arrow {o1}->{o2} has no locus in the DTD"
            )));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

enum Step {
    Element(Vec<String>),
    Attribute(Vec<String>, String),
    Text(Vec<String>),
}

/// Splits a path into its element part and final step; `None` when some
/// step does not follow the DTD.
fn parse(d: &DtdSchema, path: &str) -> Option<Step> {
    let steps: Vec<&str> = path.split('.').collect();
    if steps.first() != Some(&d.root.as_str()) {
        return None;
    }
    let (elems, last) = match steps.last() {
        Some(s) if *s == PCDATA => (&steps[..steps.len() - 1], Some(PCDATA.to_string())),
        Some(s) if s.starts_with('@') => (&steps[..steps.len() - 1], Some(s.to_string())),
        _ => (&steps[..], None),
    };
    for w in elems.windows(2) {
        if !children(d, w[0]).any(|c| c == w[1]) {
            return None;
        }
    }
    let elems: Vec<String> = elems.iter().map(|s| s.to_string()).collect();
    match last {
        None => Some(Step::Element(elems)),
        Some(l) if l == PCDATA => Some(Step::Text(elems)),
        Some(l) => {
            let tag = elems.last()?;
            if !d.attlists.get(tag).is_some_and(|r| r.contains(&l)) {
                return None;
            }
            Some(Step::Attribute(elems, l))
        }
    }
}

/// Stored once: a direct child of the root reachable by a single path.
fn once_stored(d: &DtdSchema, elem: &[String]) -> bool {
    elem.len() == 2 && loci(d, &elem[1]).len() == 1
}

/// Whether `from` (one specific node) pins down the node at path `to`:
/// `to` is `from`, one of its ancestors, or reached from it through
/// non-repeated children only.
fn pins(d: &DtdSchema, from: &[String], to: &[String]) -> bool {
    if to.len() <= from.len() {
        return from[..to.len()] == *to;
    }
    if to[..from.len()] != *from {
        return false;
    }
    to.windows(2).skip(from.len() - 1).all(|w| {
        d.content
            .get(&w[0])
            .and_then(|fs| fs.iter().find(|f| f.tag == w[1]))
            .is_some_and(|f| !f.repeated)
    })
}

/// For each FD `X -> p.@l` or `X -> p.#P`, checks that X also determines
/// the node p. Each path in X determines its element, its `@ID`'s element,
/// or its `#P`'s element when stored once; other paths determine nothing.
pub fn check_xml_nf(d: &DtdSchema, fds: &[PathFd]) -> NfReport {
    let mut witnesses = Vec::new();
    let mut unknown = false;
    for fd in fds {
        if fd.lhs.contains(&fd.rhs) {
            continue;
        }
        let p = match parse(d, &fd.rhs) {
            Some(Step::Attribute(p, _)) | Some(Step::Text(p)) => p,
            Some(Step::Element(_)) => continue,
            None => {
                unknown = true;
                continue;
            }
        };
        let mut holds = false;
        let mut recognised = true;
        for q in &fd.lhs {
            let determined = match parse(d, q) {
                Some(Step::Element(e)) => Some(e),
                Some(Step::Attribute(e, a)) if a == ID => Some(e),
                Some(Step::Text(e)) if once_stored(d, &e) => Some(e),
                Some(Step::Text(_)) | Some(Step::Attribute(..)) => None,
                None => {
                    recognised = false;
                    None
                }
            };
            if determined.is_some_and(|e| pins(d, &e, &p)) {
                holds = true;
                break;
            }
        }
        if holds {
            continue;
        }
        if !recognised {
            unknown = true;
            continue;
        }
        witnesses.push(Witness {
            dependency: fd.to_string(),
            reason: format!(
                "it is not the case {} -> {}",
                fd.lhs.join(", "),
                p.join(".")
            ),
        });
    }
    let mut report = NfReport::from_witnesses("dtd", witnesses);
    if unknown && report.verdict == Verdict::Satisfied {
        report.verdict = Verdict::Unknown;
    }
    report
}
