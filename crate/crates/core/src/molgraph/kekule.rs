//! Kekulization: alternating single/double assignment over aromatic bonds,
//! found as a perfect matching of the atoms that need a π bond.

use super::{element, Bond, BondOrder, MolError, Molecule};

/// Whether an aromatic atom with the given stored hydrogen count needs a
/// double bond among its aromatic bonds.
pub(super) fn needs_pi_bond(
    element: u8,
    charge: i8,
    hydrogens: u32,
    base_units: u32,
    atom: usize,
) -> Result<bool, MolError> {
    let allowed = element::valences(element, charge);
    if allowed.is_empty() {
        return Ok(false);
    }
    let used = base_units + hydrogens;
    match allowed.iter().map(|&v| v as u32).find(|&v| v >= used) {
        Some(v) if v - used <= 1 => Ok(v - used == 1),
        Some(_) => Err(MolError::Valence {
            atom,
            message: "aromatic atom with unfilled valence".into(),
        }),
        None => Err(MolError::Valence {
            atom,
            message: "aromatic atom exceeds its valence".into(),
        }),
    }
}

/// Atoms of `mol` that must receive a double bond from the aromatic set.
fn needy_atoms(mol: &Molecule) -> Result<Vec<bool>, MolError> {
    let mut needy = vec![false; mol.atom_count()];
    for (i, atom) in mol.atoms().iter().enumerate() {
        let has_aromatic = mol
            .neighbors(i)
            .iter()
            .any(|&(_, b)| mol.bonds()[b].order == BondOrder::Aromatic);
        if !has_aromatic {
            continue;
        }
        needy[i] = needs_pi_bond(
            atom.element,
            atom.charge,
            atom.implicit_h as u32,
            mol.bond_units(i),
            i,
        )?;
    }
    Ok(needy)
}

/// Perfect-matching search over `candidates` (bond indices) covering every
/// needy atom. Collects up to `cap` solutions as sets of bond indices.
pub(super) struct MatchingSearch<'a> {
    needy: &'a [bool],
    adj: Vec<Vec<(usize, usize)>>,
    cap: usize,
    mate: Vec<Option<usize>>,
    chosen: Vec<usize>,
    pub solutions: Vec<Vec<usize>>,
}

impl<'a> MatchingSearch<'a> {
    pub(super) fn new(n: usize, bonds: &[Bond], candidates: &[usize], needy: &'a [bool], cap: usize) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &bi in candidates {
            let b = &bonds[bi];
            if needy[b.a] && needy[b.b] {
                adj[b.a].push((b.b, bi));
                adj[b.b].push((b.a, bi));
            }
        }
        MatchingSearch {
            needy,
            adj,
            cap,
            mate: vec![None; n],
            chosen: Vec::new(),
            solutions: Vec::new(),
        }
    }

    /// Returns the first unmatched needy atom without any free partner, if
    /// the search fails.
    pub(super) fn run(&mut self) -> Option<usize> {
        let mut dead_end = None;
        self.search(&mut dead_end);
        if self.solutions.is_empty() {
            dead_end.or_else(|| self.needy.iter().position(|&x| x))
        } else {
            None
        }
    }

    fn search(&mut self, dead_end: &mut Option<usize>) {
        if self.solutions.len() >= self.cap {
            return;
        }
        // most constrained unmatched atom first
        let mut best: Option<(usize, usize)> = None;
        for u in 0..self.needy.len() {
            if !self.needy[u] || self.mate[u].is_some() {
                continue;
            }
            let free = self.adj[u]
                .iter()
                .filter(|(v, _)| self.mate[*v].is_none())
                .count();
            if free == 0 {
                if dead_end.is_none() {
                    *dead_end = Some(u);
                }
                return;
            }
            if best.is_none_or(|(_, f)| free < f) {
                best = Some((u, free));
            }
        }
        let Some((u, _)) = best else {
            self.solutions.push(self.chosen.clone());
            return;
        };
        let options: Vec<(usize, usize)> = self.adj[u]
            .iter()
            .copied()
            .filter(|(v, _)| self.mate[*v].is_none())
            .collect();
        for (v, bi) in options {
            self.mate[u] = Some(v);
            self.mate[v] = Some(u);
            self.chosen.push(bi);
            self.search(dead_end);
            self.chosen.pop();
            self.mate[u] = None;
            self.mate[v] = None;
            if self.solutions.len() >= self.cap {
                return;
            }
        }
    }
}

fn orders_from(mol: &Molecule, doubles: &[usize]) -> Vec<BondOrder> {
    let mut orders: Vec<BondOrder> = mol
        .bonds()
        .iter()
        .map(|b| match b.order {
            BondOrder::Aromatic => BondOrder::Single,
            o => o,
        })
        .collect();
    for &bi in doubles {
        orders[bi] = BondOrder::Double;
    }
    orders
}

fn aromatic_bonds(mol: &Molecule) -> Vec<usize> {
    (0..mol.bond_count())
        .filter(|&b| mol.bonds()[b].order == BondOrder::Aromatic)
        .collect()
}

/// One Kekulé assignment of the bond orders.
pub(super) fn kekulize(mol: &Molecule) -> Result<Vec<BondOrder>, MolError> {
    Ok(enumerate(mol, 1)?.swap_remove(0))
}

/// Up to `cap` Kekulé assignments.
pub(super) fn enumerate(mol: &Molecule, cap: usize) -> Result<Vec<Vec<BondOrder>>, MolError> {
    let candidates = aromatic_bonds(mol);
    if candidates.is_empty() {
        return Ok(vec![orders_from(mol, &[])]);
    }
    let needy = needy_atoms(mol)?;
    let mut search = MatchingSearch::new(mol.atom_count(), mol.bonds(), &candidates, &needy, cap.max(1));
    if let Some(atom) = search.run() {
        return Err(MolError::Kekulize { atom });
    }
    Ok(search
        .solutions
        .iter()
        .map(|d| orders_from(mol, d))
        .collect())
}

/// Up to `cap` Kekulé assignments that vary only the aromatic systems
/// containing an atom of `focus`; every other system gets one fixed
/// assignment.
pub(super) fn enumerate_around(mol: &Molecule, focus: &[usize], cap: usize) -> Result<Vec<Vec<BondOrder>>, MolError> {
    let candidates = aromatic_bonds(mol);
    if candidates.is_empty() {
        return Ok(vec![orders_from(mol, &[])]);
    }
    let needy = needy_atoms(mol)?;
    // aromatic systems as union-find over aromatic bonds
    let mut parent: Vec<usize> = (0..mol.atom_count()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let n = p[c];
            p[c] = r;
            c = n;
        }
        r
    }
    for &bi in &candidates {
        let b = mol.bonds()[bi];
        let (ra, rb) = (find(&mut parent, b.a), find(&mut parent, b.b));
        parent[ra] = rb;
    }
    let mut hot = vec![false; mol.atom_count()];
    for &f in focus {
        let r = find(&mut parent, f);
        hot[r] = true;
    }
    let in_focus: Vec<bool> = (0..mol.atom_count())
        .map(|i| {
            let r = find(&mut parent, i);
            hot[r]
        })
        .collect();
    let (focus_bonds, rest_bonds): (Vec<usize>, Vec<usize>) =
        candidates.iter().partition(|&&bi| in_focus[mol.bonds()[bi].a]);
    let focus_needy: Vec<bool> = (0..needy.len()).map(|i| needy[i] && in_focus[i]).collect();
    let rest_needy: Vec<bool> = (0..needy.len()).map(|i| needy[i] && !in_focus[i]).collect();
    let mut rest = MatchingSearch::new(mol.atom_count(), mol.bonds(), &rest_bonds, &rest_needy, 1);
    if let Some(atom) = rest.run() {
        return Err(MolError::Kekulize { atom });
    }
    let mut hot_search = MatchingSearch::new(mol.atom_count(), mol.bonds(), &focus_bonds, &focus_needy, cap.max(1));
    if let Some(atom) = hot_search.run() {
        return Err(MolError::Kekulize { atom });
    }
    let fixed = &rest.solutions[0];
    Ok(hot_search
        .solutions
        .iter()
        .map(|d| {
            let mut all = fixed.clone();
            all.extend_from_slice(d);
            orders_from(mol, &all)
        })
        .collect())
}
