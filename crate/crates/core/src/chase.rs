//! Two-row tableau chase deciding FD and MVD implication over a fixed
//! universe. Independent of the dependency-basis code, which it checks.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::schema::{Fd, Mvd, NameSet};

pub const DEFAULT_ROW_LIMIT: usize = 4096;
pub const DEFAULT_UNIVERSE_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChaseLimits {
    pub max_rows: usize,
    pub max_universe: usize,
}

impl Default for ChaseLimits {
    fn default() -> Self {
        ChaseLimits {
            max_rows: DEFAULT_ROW_LIMIT,
            max_universe: DEFAULT_UNIVERSE_LIMIT,
        }
    }
}

impl ChaseLimits {
    pub fn with_rows(max_rows: usize) -> Self {
        ChaseLimits {
            max_rows,
            ..Self::default()
        }
    }
}

/// Dependencies interpreted over a single universe. MVD contexts are
/// ignored: every MVD is read relative to the universe given to the chase.
#[derive(Debug, Clone, Default)]
pub struct ChaseInput {
    pub fds: Vec<Fd>,
    pub mvds: Vec<Mvd>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Fd(Fd),
    Mvd(Mvd),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    pub universe: Vec<String>,
    pub rows: Vec<Vec<u32>>,
}

struct Compiled {
    fds: Vec<(Vec<usize>, Vec<usize>)>,
    mvds: Vec<(Vec<usize>, Vec<bool>)>,
}

fn positions(set: &NameSet, universe: &[String]) -> Option<Vec<usize>> {
    set.iter()
        .map(|n| universe.iter().position(|u| u == n))
        .collect()
}

fn compile(input: &ChaseInput, universe: &[String]) -> Compiled {
    let n = universe.len();
    let mut fds = Vec::new();
    for fd in &input.fds {
        let Some(lhs) = positions(&fd.lhs, universe) else { continue };
        let rhs: Vec<usize> = fd
            .rhs
            .iter()
            .filter_map(|r| universe.iter().position(|u| u == r))
            .collect();
        if !rhs.is_empty() {
            fds.push((lhs, rhs));
        }
    }
    let mut mvds = Vec::new();
    for m in &input.mvds {
        let Some(lhs) = positions(&m.lhs, universe) else { continue };
        let mut keep = vec![false; n];
        for &i in &lhs {
            keep[i] = true;
        }
        for r in &m.rhs {
            if let Some(i) = universe.iter().position(|u| u == r) {
                keep[i] = true;
            }
        }
        mvds.push((lhs, keep));
    }
    Compiled { fds, mvds }
}

/// Decides whether `input` implies `target` over `universe`.
pub fn chase_implies(input: &ChaseInput, target: &Target, universe: &NameSet) -> Result<bool> {
    chase_implies_with(input, target, universe, ChaseLimits::default())
}

pub fn chase_implies_with(
    input: &ChaseInput,
    target: &Target,
    universe: &NameSet,
    limits: ChaseLimits,
) -> Result<bool> {
    if universe.len() > limits.max_universe {
        return Err(Error::TooLarge {
            size: universe.len(),
            limit: limits.max_universe,
        });
    }
    let u: Vec<String> = universe.iter().cloned().collect();
    let n = u.len();
    let (lhs, rhs) = match target {
        Target::Fd(fd) => (&fd.lhs, &fd.rhs),
        Target::Mvd(m) => (&m.lhs, &m.rhs),
    };
    let Some(lhs_pos) = positions(lhs, &u) else {
        return Err(Error::Precondition(format!(
            "target left-hand side {{{}}} is not inside the universe",
            crate::schema::fmt_set(lhs)
        )));
    };
    let Some(rhs_pos) = positions(rhs, &u) else {
        return Err(Error::Precondition(format!(
            "target right-hand side {{{}}} is not inside the universe",
            crate::schema::fmt_set(rhs)
        )));
    };
    let compiled = compile(input, &u);

    let row0: Vec<u32> = (0..n as u32).collect();
    let mut row1: Vec<u32> = (0..n as u32).map(|i| i + n as u32).collect();
    for &i in &lhs_pos {
        row1[i] = i as u32;
    }
    let mut tab = Tableau {
        universe: u,
        rows: vec![row0, row1],
    };
    run(&mut tab, &compiled, limits.max_rows)?;

    let (r0, r1) = (&tab.rows[0], &tab.rows[1]);
    Ok(match target {
        Target::Fd(_) => rhs_pos.iter().all(|&i| r0[i] == r1[i]),
        Target::Mvd(_) => {
            let mut in_xy = vec![false; n];
            for &i in lhs_pos.iter().chain(&rhs_pos) {
                in_xy[i] = true;
            }
            let want: Vec<u32> = (0..n).map(|i| if in_xy[i] { r0[i] } else { r1[i] }).collect();
            tab.rows.contains(&want)
        }
    })
}

/// Chases to a fixpoint. Rows 0 and 1 always hold the images of the two
/// original rows, even after they become equal.
fn run(tab: &mut Tableau, deps: &Compiled, max_rows: usize) -> Result<()> {
    loop {
        let mut changed = false;

        // FD rule: equate right-hand values of rows agreeing on the lhs.
        'fd: loop {
            for (lhs, rhs) in &deps.fds {
                for i in 0..tab.rows.len() {
                    for j in (i + 1)..tab.rows.len() {
                        let (a, b) = (&tab.rows[i], &tab.rows[j]);
                        if !lhs.iter().all(|&k| a[k] == b[k]) {
                            continue;
                        }
                        if let Some(&col) = rhs.iter().find(|&&k| a[k] != b[k]) {
                            let (keep, drop) = (a[col].min(b[col]), a[col].max(b[col]));
                            for row in tab.rows.iter_mut() {
                                if row[col] == drop {
                                    row[col] = keep;
                                }
                            }
                            dedup(&mut tab.rows);
                            changed = true;
                            continue 'fd;
                        }
                    }
                }
            }
            break;
        }

        // MVD rule: add the row mixing two rows that agree on the lhs.
        let mut seen: HashSet<Vec<u32>> = tab.rows.iter().cloned().collect();
        let mut fresh = Vec::new();
        for (lhs, keep) in &deps.mvds {
            let rows = tab.rows.len();
            for i in 0..rows {
                for j in 0..rows {
                    if i == j {
                        continue;
                    }
                    let (a, b) = (&tab.rows[i], &tab.rows[j]);
                    if !lhs.iter().all(|&k| a[k] == b[k]) {
                        continue;
                    }
                    let row: Vec<u32> = (0..a.len()).map(|k| if keep[k] { a[k] } else { b[k] }).collect();
                    if seen.insert(row.clone()) {
                        fresh.push(row);
                        if seen.len() > max_rows {
                            return Err(Error::ChaseLimit { limit: max_rows });
                        }
                    }
                }
            }
        }
        if !fresh.is_empty() {
            tab.rows.extend(fresh);
            changed = true;
        }
        if !changed {
            return Ok(());
        }
    }
}

/// Removes duplicate rows after position 1, keeping first occurrences.
fn dedup(rows: &mut Vec<Vec<u32>>) {
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut out = Vec::with_capacity(rows.len());
    for (i, r) in rows.drain(..).enumerate() {
        if seen.insert(r.clone()) || i < 2 {
            out.push(r);
        }
    }
    *rows = out;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::names;

    fn u(items: &[&str]) -> NameSet {
        names(items.iter().copied())
    }

    #[test]
    fn coalescence_gives_fd() {
        let input = ChaseInput {
            fds: vec![Fd::new(["B"], ["C"])],
            mvds: vec![Mvd::new(["A"], ["B"], "U")],
        };
        let t = Target::Fd(Fd::new(["A"], ["C"]));
        assert!(chase_implies(&input, &t, &u(&["A", "B", "C"])).unwrap());
    }

    #[test]
    fn reflexive_fd() {
        let t = Target::Fd(Fd::new(["A", "B"], ["A"]));
        assert!(chase_implies(&ChaseInput::default(), &t, &u(&["A", "B", "C"])).unwrap());
        let t = Target::Fd(Fd::new(["A"], ["B"]));
        assert!(!chase_implies(&ChaseInput::default(), &t, &u(&["A", "B", "C"])).unwrap());
    }

    #[test]
    fn fd_gives_mvd() {
        let input = ChaseInput {
            fds: vec![Fd::new(["A"], ["B"])],
            mvds: vec![],
        };
        let t = Target::Mvd(Mvd::new(["A"], ["B"], "U"));
        assert!(chase_implies(&input, &t, &u(&["A", "B", "C"])).unwrap());
    }

    #[test]
    fn complement_and_transitivity() {
        let input = ChaseInput {
            fds: vec![],
            mvds: vec![Mvd::new(["A"], ["B"], "X")],
        };
        let all = u(&["A", "B", "C", "D"]);
        assert!(chase_implies(&input, &Target::Mvd(Mvd::new(["A"], ["C", "D"], "X")), &all).unwrap());
        assert!(!chase_implies(&input, &Target::Mvd(Mvd::new(["A"], ["C"], "X")), &all).unwrap());

        let input = ChaseInput {
            fds: vec![],
            mvds: vec![Mvd::new(["A"], ["B"], "U"), Mvd::new(["B"], ["C"], "U")],
        };
        let abc = u(&["A", "B", "C"]);
        assert!(chase_implies(&input, &Target::Mvd(Mvd::new(["A"], ["C"], "U")), &abc).unwrap());
    }

    #[test]
    fn limits_are_errors() {
        let big: NameSet = (0..13).map(|i| format!("A{i}")).collect();
        let t = Target::Fd(Fd::new(["A0"], ["A1"]));
        assert!(matches!(
            chase_implies(&ChaseInput::default(), &t, &big),
            Err(Error::TooLarge { .. })
        ));

        let input = ChaseInput {
            fds: vec![],
            mvds: vec![Mvd::new(["A"], ["B"], "U")],
        };
        let t = Target::Mvd(Mvd::new(["A"], ["C"], "U"));
        let r = chase_implies_with(&input, &t, &u(&["A", "B", "C"]), ChaseLimits::with_rows(2));
        assert!(matches!(r, Err(Error::ChaseLimit { limit: 2 })));
    }
}
