//! End-to-end composition: closure, reduction, emission and checks.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::chase::ChaseLimits;
use crate::emit::{emit_dtd, emit_relational};
use crate::error::{Error, Result};
use crate::fd::{fd_closure_graph_traced, Provenance};
use crate::mvd::fd_mvd_closure_graph_traced;
use crate::reduce::{first_reduced, second_reduced, ReductionTrace};
use crate::schema::{graph_to_fds, validate, CategoryGraph, DependencySet};
use crate::verify::{
    check_4nf_with, check_bcnf, check_improved_bcnf, check_xml_nf, derive_xml_fds, NfReport,
    Verdict, Witness,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Level {
    None,
    First,
    Second,
}

impl Level {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            0 => Some(Level::None),
            1 => Some(Level::First),
            2 => Some(Level::Second),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Bcnf,
    ImprovedBcnf,
    #[serde(rename = "4nf")]
    FourthNf,
    Xmlnf,
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bcnf" => Ok(Check::Bcnf),
            "improved-bcnf" => Ok(Check::ImprovedBcnf),
            "4nf" => Ok(Check::FourthNf),
            "xmlnf" => Ok(Check::Xmlnf),
            other => Err(format!("unknown check {other}")),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::Bcnf => "bcnf",
            Check::ImprovedBcnf => "improved-bcnf",
            Check::FourthNf => "4nf",
            Check::Xmlnf => "xmlnf",
        })
    }
}

/// Everything produced by one reduction run.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub level: Level,
    pub input: CategoryGraph,
    pub deps: DependencySet,
    pub closure: CategoryGraph,
    pub provenance: Vec<Provenance>,
    pub reduced: CategoryGraph,
    pub trace: ReductionTrace,
}

impl Reduction {
    /// Dependencies the emitted schemas are checked against: the FDs of the
    /// closure and of the reduced graph with F, and the MVDs still in force.
    pub fn check_deps(&self) -> DependencySet {
        let mut fds = match self.level {
            Level::None => graph_to_fds(&self.input),
            _ => {
                let mut v = graph_to_fds(&self.closure);
                v.extend(graph_to_fds(&self.reduced));
                v
            }
        };
        fds.extend(self.deps.fds.iter().cloned());
        fds.sort();
        fds.dedup();
        let mut mvds = match self.level {
            Level::Second => self.trace.residual_mvds.clone(),
            _ => self.deps.mvds.clone(),
        };
        // An MVD only speaks about the projections of its context. When it
        // covers all of them it says nothing, and read against a wider
        // relation sort it would claim more than was stated.
        let g = &self.reduced;
        mvds.retain(|m| {
            let pi = g.projection_targets(&m.context);
            !m.lhs.union(&m.rhs).cloned().collect::<crate::schema::NameSet>().is_superset(&pi)
        });
        DependencySet { fds, mvds }
    }
}

pub fn reduce(g: &CategoryGraph, deps: &DependencySet, level: Level) -> Result<Reduction> {
    let report = validate(g, deps);
    if !report.is_valid() {
        return Err(Error::InvalidGraph(report));
    }
    let (closure, provenance) = if deps.mvds.is_empty() {
        fd_closure_graph_traced(g, &deps.fds)?
    } else {
        fd_mvd_closure_graph_traced(g, &deps.fds, &deps.mvds)?
    };
    let (reduced, trace) = match level {
        Level::None => (g.clone(), ReductionTrace::default()),
        Level::First => first_reduced(g, &deps.fds)?,
        Level::Second => second_reduced(g, &deps.fds, &deps.mvds)?,
    };
    trace.verify(&reduced)?;
    Ok(Reduction {
        level,
        input: g.clone(),
        deps: deps.clone(),
        closure,
        provenance,
        reduced,
        trace,
    })
}

fn unknown(subject: &str, err: &Error) -> NfReport {
    NfReport {
        subject: subject.to_string(),
        verdict: Verdict::Unknown,
        witnesses: vec![Witness {
            dependency: String::new(),
            reason: err.to_string(),
        }],
    }
}

/// Runs `checks` on the schemas emitted from the reduced graph. Size limits
/// turn into unknown verdicts; other errors are returned.
/// Each report is paired with the check that produced it.
pub fn run_checks(red: &Reduction, checks: &[Check], limits: ChaseLimits) -> Result<Vec<(Check, NfReport)>> {
    let deps = red.check_deps();
    let relational = emit_relational(&red.reduced);
    let mut out = Vec::new();
    let soften = |subject: &str, r: Result<NfReport>| -> Result<NfReport> {
        match r {
            Ok(r) => Ok(r),
            Err(e @ (Error::TooLarge { .. } | Error::ChaseLimit { .. })) => Ok(unknown(subject, &e)),
            Err(e) => Err(e),
        }
    };
    for check in checks {
        match check {
            Check::Bcnf => {
                for r in &relational.relations {
                    out.push((*check, soften(&r.name, check_bcnf(r, &deps))?));
                }
            }
            Check::FourthNf => {
                for r in &relational.relations {
                    out.push((*check, soften(&r.name, check_4nf_with(r, &deps, limits))?));
                }
            }
            Check::ImprovedBcnf => {
                out.push((*check, soften("schema", check_improved_bcnf(&relational, &deps))?));
            }
            Check::Xmlnf => {
                let dtd = emit_dtd(&red.reduced);
                let fds = derive_xml_fds(&red.reduced, &dtd)?;
                out.push((*check, check_xml_nf(&dtd, &fds)));
            }
        }
    }
    Ok(out)
}
