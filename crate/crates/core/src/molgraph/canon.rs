//! Canonical SMILES: colour refinement followed by an
//! individualize-and-refine search for the lexicographically smallest
//! output, pruned with discovered automorphisms.

use super::writer::write_ranked;
use super::Molecule;

/// Maximum number of leaves explored per molecule. Only highly symmetric
/// graphs that defeat automorphism pruning get near it.
const LEAF_BUDGET: usize = 4096;

fn initial_ranks(mol: &Molecule) -> Vec<usize> {
    let n = mol.atom_count();
    let mut ring_count = vec![0u16; n];
    for r in mol.rings().relevant_cycles() {
        for &a in &r.atoms {
            ring_count[a] += 1;
        }
    }
    let key = |i: usize| {
        let a = mol.atom(i);
        // low degree first so output starts at a chain end
        (
            mol.degree(i),
            a.element,
            a.isotope,
            a.charge,
            a.aromatic,
            a.implicit_h,
            mol.rings().min_ring_size(i),
            ring_count[i],
        )
    };
    let keys: Vec<_> = (0..n).map(key).collect();
    ranks_from_keys(&keys)
}

/// Rank of each item = number of items with a strictly smaller key.
fn ranks_from_keys<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0; keys.len()];
    for k in 1..idx.len() {
        ranks[idx[k]] = if keys[idx[k]] == keys[idx[k - 1]] {
            ranks[idx[k - 1]]
        } else {
            k
        };
    }
    ranks
}

fn distinct(ranks: &[usize]) -> usize {
    let mut seen = vec![false; ranks.len()];
    let mut count = 0;
    for &r in ranks {
        if !seen[r] {
            seen[r] = true;
            count += 1;
        }
    }
    count
}

/// Split cells by the multiset of (neighbour rank, bond order) until stable.
fn refine(mol: &Molecule, ranks: &mut Vec<usize>) {
    let n = ranks.len();
    let mut cells = distinct(ranks);
    while cells < n {
        let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..n)
            .map(|i| {
                let mut nb: Vec<(usize, u8)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(j, b)| (ranks[j], mol.bonds()[b].order.code()))
                    .collect();
                nb.sort_unstable();
                (ranks[i], nb)
            })
            .collect();
        let next = ranks_from_keys(&keys);
        let next_cells = distinct(&next);
        *ranks = next;
        if next_cells == cells {
            break;
        }
        cells = next_cells;
    }
}

struct Search<'a> {
    mol: &'a Molecule,
    best: Option<(String, Vec<usize>)>,
    leaves: usize,
    automorphisms: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn visit(&mut self, mut ranks: Vec<usize>, path: &mut Vec<usize>) {
        refine(self.mol, &mut ranks);
        let n = ranks.len();
        let mut count = vec![0usize; n];
        for &r in &ranks {
            count[r] += 1;
        }
        let Some(target) = (0..n).find(|&r| count[r] > 1) else {
            self.leaf(&ranks);
            return;
        };
        let cell: Vec<usize> = (0..n).filter(|&i| ranks[i] == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for &v in &cell {
            if self.leaves >= LEAF_BUDGET && self.best.is_some() {
                return;
            }
            if !explored.is_empty() && self.in_explored_orbit(v, &explored, path) {
                continue;
            }
            let mut next = ranks.clone();
            for &w in &cell {
                if w != v {
                    next[w] = target + 1;
                }
            }
            path.push(v);
            self.visit(next, path);
            path.pop();
            explored.push(v);
        }
    }

    fn in_explored_orbit(&self, v: usize, explored: &[usize], path: &[usize]) -> bool {
        let n = self.mol.atom_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut any = false;
        for g in &self.automorphisms {
            if path.iter().any(|&p| g[p] != p) {
                continue;
            }
            any = true;
            for i in 0..n {
                let (a, b) = (find(&mut parent, i), find(&mut parent, g[i]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        if !any {
            return false;
        }
        let rv = find(&mut parent, v);
        explored.iter().any(|&u| find(&mut parent, u) == rv)
    }

    fn leaf(&mut self, ranks: &[usize]) {
        self.leaves += 1;
        let (s, order) = write_ranked(self.mol, ranks);
        match &self.best {
            None => self.best = Some((s, order)),
            Some((b, best_order)) => {
                if s == *b {
                    let mut g = vec![0; order.len()];
                    for (k, &a) in best_order.iter().enumerate() {
                        g[a] = order[k];
                    }
                    if g.iter().enumerate().any(|(i, &x)| i != x) && !self.automorphisms.contains(&g) {
                        self.automorphisms.push(g);
                    }
                } else if s < *b {
                    self.best = Some((s, order));
                }
            }
        }
    }
}

fn canonical(mol: &Molecule) -> (String, Vec<usize>) {
    if mol.is_empty() {
        return (String::new(), Vec::new());
    }
    let mut search = Search {
        mol,
        best: None,
        leaves: 0,
        automorphisms: Vec::new(),
    };
    search.visit(initial_ranks(mol), &mut Vec::new());
    search.best.expect("search reaches at least one leaf")
}

/// Canonical SMILES, independent of input atom order.
pub fn write_canonical(mol: &Molecule) -> String {
    canonical(mol).0
}

/// Atoms in canonical output order.
pub fn canonical_order(mol: &Molecule) -> Vec<usize> {
    canonical(mol).1
}
