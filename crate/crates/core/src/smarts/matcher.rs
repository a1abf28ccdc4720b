//! Backtracking subgraph matcher.

use std::collections::HashSet;

use super::PatternGraph;
use crate::molgraph::Molecule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    /// Components may bind atom-disjoint parts of the same molecule.
    #[default]
    Intra,
    /// Each component binds a different molecule.
    Inter,
}

/// Assignment of every pattern atom to `(molecule index, atom index)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Embedding {
    pub assignment: Vec<(usize, usize)>,
}

struct State<'a> {
    pattern: &'a PatternGraph,
    mols: &'a [Molecule],
    mode: MatchMode,
    order: Vec<usize>,
    component: Vec<usize>,
    candidates: Vec<Vec<(usize, usize)>>,
    assignment: Vec<Option<(usize, usize)>>,
    used: HashSet<(usize, usize)>,
    component_mol: Vec<Option<usize>>,
    out: Vec<Embedding>,
}

impl State<'_> {
    fn search(&mut self, depth: usize) {
        if depth == self.order.len() {
            let assignment = self.assignment.iter().map(|a| a.unwrap()).collect();
            self.out.push(Embedding { assignment });
            return;
        }
        let p = self.order[depth];
        let comp = self.component[p];
        // a neighbour already placed restricts candidates to its molecule
        let anchor = self
            .pattern
            .bonds
            .iter()
            .filter_map(|b| {
                if b.a == p {
                    Some(b.b)
                } else if b.b == p {
                    Some(b.a)
                } else {
                    None
                }
            })
            .find_map(|q| self.assignment[q]);
        let options: Vec<(usize, usize)> = match anchor {
            Some((m, a)) => self.mols[m]
                .neighbors(a)
                .iter()
                .map(|&(n, _)| (m, n))
                .filter(|c| self.candidates[p].binary_search(c).is_ok())
                .collect(),
            None => self.candidates[p].clone(),
        };
        for (m, a) in options {
            if self.used.contains(&(m, a)) || !self.consistent(p, m, a) {
                continue;
            }
            let fresh_component = self.component_mol[comp].is_none();
            if let Some(cm) = self.component_mol[comp] {
                if cm != m {
                    continue;
                }
            } else if self.mode == MatchMode::Inter && self.component_mol.contains(&Some(m)) {
                continue;
            }
            self.assignment[p] = Some((m, a));
            self.used.insert((m, a));
            if fresh_component {
                self.component_mol[comp] = Some(m);
            }
            self.search(depth + 1);
            if fresh_component {
                self.component_mol[comp] = None;
            }
            self.used.remove(&(m, a));
            self.assignment[p] = None;
        }
    }

    /// Every pattern bond to an already assigned atom is present in the
    /// molecule with a matching order.
    fn consistent(&self, p: usize, m: usize, a: usize) -> bool {
        for b in &self.pattern.bonds {
            let q = if b.a == p {
                b.b
            } else if b.b == p {
                b.a
            } else {
                continue;
            };
            let Some((mq, aq)) = self.assignment[q] else { continue };
            if mq != m {
                return false;
            }
            match self.mols[m].bond_between(a, aq) {
                Some(bi) if b.expr.matches(self.mols[m].bonds()[bi].order) => {}
                _ => return false,
            }
        }
        true
    }
}

/// Search order: fewest candidates first, then grow along pattern bonds
/// preferring the most constrained neighbour.
fn search_order(pattern: &PatternGraph, candidates: &[Vec<(usize, usize)>]) -> Vec<usize> {
    let n = pattern.atom_count();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let connected: Vec<usize> = (0..n)
            .filter(|&p| !placed[p])
            .filter(|&p| {
                pattern
                    .bonds
                    .iter()
                    .any(|b| (b.a == p && placed[b.b]) || (b.b == p && placed[b.a]))
            })
            .collect();
        let pool: Vec<usize> = if connected.is_empty() {
            (0..n).filter(|&p| !placed[p]).collect()
        } else {
            connected
        };
        let next = *pool
            .iter()
            .min_by_key(|&&p| (candidates[p].len(), p))
            .expect("unplaced atom exists");
        placed[next] = true;
        order.push(next);
    }
    order
}

/// Every injective assignment satisfying the pattern (no symmetry
/// reduction). Deterministic order.
pub fn match_all(pattern: &PatternGraph, mols: &[Molecule], mode: MatchMode) -> Vec<Embedding> {
    let n = pattern.atom_count();
    if n == 0 || mols.is_empty() {
        return Vec::new();
    }
    if mode == MatchMode::Inter && pattern.components.len() > mols.len() {
        return Vec::new();
    }
    let candidates: Vec<Vec<(usize, usize)>> = pattern
        .atoms
        .iter()
        .map(|expr| {
            let mut v = Vec::new();
            for (mi, m) in mols.iter().enumerate() {
                for (ai, atom) in m.atoms().iter().enumerate() {
                    if expr.matches(atom) {
                        v.push((mi, ai));
                    }
                }
            }
            v
        })
        .collect();
    if candidates.iter().any(|c| c.is_empty()) {
        return Vec::new();
    }
    let mut component = vec![0; n];
    for (ci, c) in pattern.components.iter().enumerate() {
        for &a in c {
            component[a] = ci;
        }
    }
    let mut state = State {
        pattern,
        mols,
        mode,
        order: search_order(pattern, &candidates),
        component,
        candidates,
        assignment: vec![None; n],
        used: HashSet::new(),
        component_mol: vec![None; pattern.components.len()],
        out: Vec::new(),
    };
    state.search(0);
    let mut out = state.out;
    out.sort_by(|a, b| a.assignment.cmp(&b.assignment));
    out
}

/// Embeddings reduced to one per set of matched atoms, which removes
/// assignments that differ only by pattern symmetry.
pub fn match_pattern(pattern: &PatternGraph, mols: &[Molecule], mode: MatchMode) -> Vec<Embedding> {
    let mut seen = HashSet::new();
    match_all(pattern, mols, mode)
        .into_iter()
        .filter(|e| {
            let mut key = e.assignment.clone();
            key.sort_unstable();
            seen.insert(key)
        })
        .collect()
}
