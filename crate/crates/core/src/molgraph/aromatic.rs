//! Hückel aromaticity perception on relevant cycles and combinations of
//! rings fused through a single shared bond.

use super::rings::shared_bonds;
use super::{element, BondOrder, Molecule};

/// Fused systems with more rings than this only test ring pairs.
const MAX_FULL_COMBINATION_RINGS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Donor {
    NotCandidate,
    Vacant,
    One,
    Two,
}

impl Donor {
    fn electrons(self) -> Option<u32> {
        match self {
            Donor::NotCandidate => None,
            Donor::Vacant => Some(0),
            Donor::One => Some(1),
            Donor::Two => Some(2),
        }
    }
}

fn is_candidate_element(z: u8) -> bool {
    matches!(z, 5 | 6 | 7 | 8 | 15 | 16 | 33 | 34 | 52)
}

/// π-electron contribution of a ring atom in a Kekulé-form molecule.
fn donor_type(mol: &Molecule, i: usize) -> Donor {
    let atom = mol.atom(i);
    if !mol.rings().atom_in_ring(i) || !is_candidate_element(atom.element) {
        return Donor::NotCandidate;
    }
    let heavy_degree = mol.degree(i) as i32;
    let total_degree = heavy_degree + atom.implicit_h as i32;
    if total_degree > 3 {
        return Donor::NotCandidate;
    }
    let mut multiple = 0;
    let mut cyclic_multiple = false;
    let mut exocyclic_partner = None;
    for &(nbr, b) in mol.neighbors(i) {
        match mol.bonds()[b].order {
            BondOrder::Double | BondOrder::Triple => {
                multiple += 1;
                if mol.rings().bond_in_ring(b) {
                    cyclic_multiple = true;
                } else {
                    exocyclic_partner = Some(nbr);
                }
            }
            _ => {}
        }
    }
    if multiple > 1 {
        return Donor::NotCandidate;
    }
    // atoms above their default valence (hypervalent S, ...) are excluded
    match element::valences(atom.element, atom.charge).first() {
        Some(&v) if mol.bond_units(i) + atom.implicit_h as u32 > v as u32 => return Donor::NotCandidate,
        _ => {}
    }
    let dv = match element::valences(atom.element, 0).first() {
        Some(&v) if v > 1 => v as i32,
        _ => return Donor::NotCandidate,
    };
    let Some(outer) = element::outer_electrons(atom.element) else {
        return Donor::NotCandidate;
    };
    let lone = (outer as i32 - dv - atom.charge as i32).max(0);
    let mut nelec = dv - total_degree + lone;
    if nelec > 1 {
        let unsaturation = mol.bond_units(i) as i32 - heavy_degree;
        if unsaturation > 1 {
            nelec = 1;
        }
    }
    match nelec {
        n if n < 0 => Donor::NotCandidate,
        0 => {
            if exocyclic_partner.is_some() {
                Donor::Vacant
            } else if cyclic_multiple {
                Donor::One
            } else {
                Donor::Vacant
            }
        }
        1 => {
            if let Some(p) = exocyclic_partner {
                let other = mol.atom(p).element;
                if element::electronegativity(other) > element::electronegativity(atom.element) {
                    Donor::Vacant
                } else {
                    Donor::One
                }
            } else if multiple > 0 {
                Donor::One
            } else if atom.charge == 1 {
                Donor::Vacant
            } else {
                Donor::NotCandidate
            }
        }
        _ => {
            if cyclic_multiple {
                Donor::One
            } else {
                Donor::Two
            }
        }
    }
}

/// Perceive aromaticity on a Kekulé-form molecule, setting atom flags and
/// converting bonds of aromatic rings to [`BondOrder::Aromatic`].
pub(super) fn perceive(mol: &mut Molecule) {
    let n = mol.atom_count();
    for a in mol.atoms.iter_mut() {
        a.aromatic = false;
    }
    if mol.rings().relevant_cycles().is_empty() {
        return;
    }
    let electrons: Vec<Option<u32>> = (0..n).map(|i| donor_type(mol, i).electrons()).collect();
    let rings = mol.rings().relevant_cycles().to_vec();
    let mut aromatic_atom = vec![false; n];
    let mut aromatic_bond = vec![false; mol.bond_count()];
    for system in mol.rings().ortho_fused_systems() {
        let k = system.len();
        let max_size = if k <= MAX_FULL_COMBINATION_RINGS { k } else { 2.min(k) };
        for size in 1..=max_size {
            for combo in combinations(k, size) {
                let members: Vec<usize> = combo.iter().map(|&c| system[c]).collect();
                if size > 1 && !connected(&members, &rings) {
                    continue;
                }
                let mut atoms: Vec<usize> = members
                    .iter()
                    .flat_map(|&r| rings[r].atoms.iter().copied())
                    .collect();
                atoms.sort_unstable();
                // atoms inside three or more member rings are interior and
                // do not count towards the perimeter electrons
                let mut total = 0u32;
                let mut ok = true;
                for run in atoms.chunk_by(|a, b| a == b) {
                    match electrons[run[0]] {
                        Some(e) if run.len() < 3 => total += e,
                        Some(_) => {}
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                atoms.dedup();
                if !ok || total < 2 || !(total - 2).is_multiple_of(4) {
                    continue;
                }
                for &a in &atoms {
                    aromatic_atom[a] = true;
                }
                for &r in &members {
                    for &b in &rings[r].bonds {
                        aromatic_bond[b] = true;
                    }
                }
            }
        }
    }
    for (i, a) in mol.atoms.iter_mut().enumerate() {
        a.aromatic = aromatic_atom[i];
    }
    // triple bonds in aromatic rings keep their order
    for (i, b) in mol.bonds.iter_mut().enumerate() {
        if aromatic_bond[i] && b.order != BondOrder::Triple {
            b.order = BondOrder::Aromatic;
        }
    }
}

fn connected(members: &[usize], rings: &[super::rings::Ring]) -> bool {
    let mut seen = vec![false; members.len()];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        for j in 0..members.len() {
            if !seen[j] && shared_bonds(&rings[members[i]], &rings[members[j]]) == 1 {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.iter().all(|&s| s)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}
