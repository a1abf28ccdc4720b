//! Ring-system signatures and product filters.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use super::{io_err, read_lines, DatasetError};
use crate::molgraph::{write_canonical, Atom, Bond, Molecule};
use crate::smarts::{match_pattern, MatchMode, PatternGraph};

/// One canonical string per fused ring system: ring atoms become `*`,
/// aromatic flags are cleared and bond orders kept.
pub fn ring_signatures(mol: &Molecule) -> BTreeSet<String> {
    let rings = mol.rings().relevant_cycles();
    let mut out = BTreeSet::new();
    for system in mol.rings().fused_systems() {
        let mut bonds: Vec<usize> = system.iter().flat_map(|&r| rings[r].bonds.iter().copied()).collect();
        bonds.sort_unstable();
        bonds.dedup();
        let mut atoms: Vec<usize> = bonds
            .iter()
            .flat_map(|&b| [mol.bonds()[b].a, mol.bonds()[b].b])
            .collect();
        atoms.sort_unstable();
        atoms.dedup();
        let index = |a: usize| atoms.binary_search(&a).expect("bond atom in system");
        let graph = Molecule::from_parts_unchecked(
            vec![Atom::new(0); atoms.len()],
            bonds
                .iter()
                .map(|&b| {
                    let bond = mol.bonds()[b];
                    Bond {
                        a: index(bond.a),
                        b: index(bond.b),
                        order: bond.order,
                    }
                })
                .collect(),
        )
        .expect("ring system is a simple graph");
        out.insert(write_canonical(&graph));
    }
    out
}

pub fn build_scaffold_allowlist(mols: &[Molecule]) -> BTreeSet<String> {
    mols.iter().flat_map(ring_signatures).collect()
}

pub fn read_allowlist(path: &Path) -> Result<BTreeSet<String>, DatasetError> {
    Ok(read_lines(path)?.into_iter().collect())
}

pub fn write_allowlist(path: &Path, signatures: &BTreeSet<String>) -> Result<(), DatasetError> {
    let text: String = signatures.iter().map(|s| format!("{s}\n")).collect();
    fs::write(path, text).map_err(io_err(path))
}

/// A product is kept when it matches no forbidden pattern and every ring
/// system it has is in the allowlist (when one is given).
pub fn filter_product(p: &Molecule, forbidden: &[PatternGraph], allowlist: Option<&BTreeSet<String>>) -> bool {
    let single = std::slice::from_ref(p);
    if forbidden
        .iter()
        .any(|f| !match_pattern(f, single, MatchMode::Intra).is_empty())
    {
        return false;
    }
    match allowlist {
        Some(allowed) => ring_signatures(p).iter().all(|s| allowed.contains(s)),
        None => true,
    }
}
