//! Integer interning and the linear-time FD closure used by every engine.

use std::collections::HashMap;

use crate::schema::{Fd, NameSet};

#[derive(Debug, Default, Clone)]
pub(crate) struct Interner {
    names: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn intern_set(&mut self, set: &NameSet) -> Vec<usize> {
        set.iter().map(|n| self.intern(n)).collect()
    }

    pub fn to_names(&self, mask: &[bool]) -> NameSet {
        mask.iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| self.names[i].clone())
            .collect()
    }
}

/// FD set over interned attributes, prepared for repeated closure queries.
///
/// Each query runs the counter algorithm: every FD keeps the number of its
/// left-hand attributes not yet reached and fires when that drops to zero,
/// so one query costs O(d + n) for d FDs over n attributes.
#[derive(Debug, Clone)]
pub(crate) struct FdIndex {
    lhs_len: Vec<usize>,
    rhs: Vec<Vec<usize>>,
    uses: Vec<Vec<usize>>,
    unconditional: Vec<usize>,
    width: usize,
}

impl FdIndex {
    pub fn new(fds: &[(Vec<usize>, Vec<usize>)], width: usize) -> Self {
        let mut uses = vec![Vec::new(); width];
        let mut lhs_len = Vec::with_capacity(fds.len());
        let mut rhs = Vec::with_capacity(fds.len());
        let mut unconditional = Vec::new();
        for (i, (l, r)) in fds.iter().enumerate() {
            let mut l = l.clone();
            l.sort_unstable();
            l.dedup();
            for &a in &l {
                uses[a].push(i);
            }
            if l.is_empty() {
                unconditional.push(i);
            }
            lhs_len.push(l.len());
            rhs.push(r.clone());
        }
        FdIndex {
            lhs_len,
            rhs,
            uses,
            unconditional,
            width,
        }
    }

    /// Interns every name in `fds` (and keeps earlier ids) and builds the index.
    pub fn build(fds: &[Fd], interner: &mut Interner) -> Self {
        let pairs: Vec<(Vec<usize>, Vec<usize>)> = fds
            .iter()
            .map(|fd| (interner.intern_set(&fd.lhs), interner.intern_set(&fd.rhs)))
            .collect();
        FdIndex::new(&pairs, interner.len())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn closure(&self, seed: &[usize]) -> Vec<bool> {
        self.closure_skipping(seed, None)
    }

    /// Closure that ignores the FD at position `skip`.
    pub fn closure_skipping(&self, seed: &[usize], skip: Option<usize>) -> Vec<bool> {
        let mut reached = vec![false; self.width];
        let mut remaining = self.lhs_len.clone();
        let mut stack: Vec<usize> = Vec::new();
        let push = |a: usize, reached: &mut Vec<bool>, stack: &mut Vec<usize>| {
            if !reached[a] {
                reached[a] = true;
                stack.push(a);
            }
        };
        for &a in seed {
            push(a, &mut reached, &mut stack);
        }
        for &i in &self.unconditional {
            if Some(i) != skip {
                for &b in &self.rhs[i] {
                    push(b, &mut reached, &mut stack);
                }
            }
        }
        while let Some(a) = stack.pop() {
            for &i in &self.uses[a] {
                remaining[i] -= 1;
                if remaining[i] == 0 && Some(i) != skip {
                    for &b in &self.rhs[i] {
                        push(b, &mut reached, &mut stack);
                    }
                }
            }
        }
        reached
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_closure_fires_on_full_lhs_only() {
        // 0 -> 1 ; {1,2} -> 3 ; 3 -> 4
        let idx = FdIndex::new(
            &[(vec![0], vec![1]), (vec![1, 2], vec![3]), (vec![3], vec![4])],
            5,
        );
        assert_eq!(idx.closure(&[0]), vec![true, true, false, false, false]);
        assert_eq!(idx.closure(&[0, 2]), vec![true; 5]);
        assert_eq!(
            idx.closure_skipping(&[0, 2], Some(1)),
            vec![true, true, true, false, false]
        );
    }

    #[test]
    fn empty_lhs_is_unconditional() {
        let idx = FdIndex::new(&[(vec![], vec![1])], 2);
        assert_eq!(idx.closure(&[0]), vec![true, true]);
    }
}
