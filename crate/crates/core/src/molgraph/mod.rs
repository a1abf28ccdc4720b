//! Molecular graphs: SMILES parsing and writing, canonical and randomized
//! serialization, valence accounting, ring perception, aromaticity and
//! kekulization.
//!
//! A [`Molecule`] is immutable once built. Hydrogens are implicit counts on
//! heavy atoms; aromatic systems are stored with [`BondOrder::Aromatic`]
//! bonds and can be expanded to Kekulé form on demand.

mod aromatic;
mod canon;
pub mod element;
mod kekule;
mod random;
mod rings;
mod smiles;
mod writer;

use std::fmt;

use thiserror::Error;

pub use canon::{canonical_order, write_canonical};
pub use random::randomized_smiles;
pub use rings::RingInfo;
pub use smiles::parse_smiles;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MolError {
    #[error("empty SMILES")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unsupported element '{symbol}' at byte {offset}")]
    UnsupportedElement { offset: usize, symbol: String },
    #[error("valence violation at atom {atom}: {message}")]
    Valence { atom: usize, message: String },
    #[error("cannot kekulize aromatic system containing atom {atom}")]
    Kekulize { atom: usize },
    #[error("invalid bond between atoms {a} and {b}: {message}")]
    Bond { a: usize, b: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to an atom's explicit valence. Aromatic bonds count one
    /// unit here; the extra π unit is resolved by kekulization.
    pub fn units(self) -> u32 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom {
    /// Atomic number; 0 is the `*` placeholder.
    pub element: u8,
    pub aromatic: bool,
    pub charge: i8,
    /// Mass number, 0 when unspecified.
    pub isotope: u16,
    pub implicit_h: u8,
}

impl Atom {
    pub fn new(element: u8) -> Self {
        Atom {
            element,
            aromatic: false,
            charge: 0,
            isotope: 0,
            implicit_h: 0,
        }
    }

    pub fn symbol(&self) -> &'static str {
        element::symbol(self.element)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// An attributed, simple, possibly disconnected molecular graph.
#[derive(Debug, Clone)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    rings: RingInfo,
}

impl PartialEq for Molecule {
    /// Identity as labelled graphs (same atom order); use canonical SMILES
    /// for isomorphism.
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms && self.bonds == other.bonds
    }
}

impl Molecule {
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, idx: usize) -> &Atom {
        &self.atoms[idx]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// `(neighbour, bond index)` pairs of an atom.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|(n, _)| *n == b)
            .map(|&(_, bi)| bi)
    }

    pub fn rings(&self) -> &RingInfo {
        &self.rings
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Sum of bond units at an atom, with aromatic bonds counted once.
    pub fn bond_units(&self, atom: usize) -> u32 {
        self.adjacency[atom]
            .iter()
            .map(|&(_, b)| self.bonds[b].order.units())
            .sum()
    }

    /// Connected components as sorted atom lists, ordered by smallest atom.
    pub fn fragments(&self) -> Vec<Vec<usize>> {
        connected_components(self.atoms.len(), &self.adjacency)
    }

    pub fn total_implicit_h(&self) -> u32 {
        self.atoms.iter().map(|a| a.implicit_h as u32).sum()
    }

    /// Build a molecule from a Kekulé-form graph (no aromatic bonds). Atoms
    /// listed in `recompute_h` get their hydrogen count derived from the
    /// valence table; all other counts are kept. Aromaticity is perceived
    /// from scratch.
    pub fn from_kekule(
        atoms: Vec<Atom>,
        bonds: Vec<Bond>,
        recompute_h: &[usize],
    ) -> Result<Molecule, MolError> {
        let mut atoms = atoms;
        for a in atoms.iter_mut() {
            a.aromatic = false;
        }
        if let Some(b) = bonds.iter().find(|b| b.order == BondOrder::Aromatic) {
            return Err(MolError::Bond {
                a: b.a,
                b: b.b,
                message: "aromatic bond in Kekulé input".into(),
            });
        }
        let adjacency = build_adjacency(atoms.len(), &bonds)?;
        for &i in recompute_h {
            let explicit: u32 = adjacency[i]
                .iter()
                .map(|&(_, b)| bonds[b].order.units())
                .sum();
            atoms[i].implicit_h = implied_hydrogens(&atoms[i], explicit, i)?;
        }
        for (i, a) in atoms.iter().enumerate() {
            check_valence(a, &adjacency[i], &bonds, i)?;
        }
        let rings = RingInfo::compute(atoms.len(), &bonds, &adjacency);
        let mut mol = Molecule {
            atoms,
            bonds,
            adjacency,
            rings,
        };
        aromatic::perceive(&mut mol);
        Ok(mol)
    }

    /// Assemble a molecule without any valence or aromaticity processing.
    /// Used for derived graphs such as scaffold signatures.
    pub fn from_parts_unchecked(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Molecule, MolError> {
        let adjacency = build_adjacency(atoms.len(), &bonds)?;
        let rings = RingInfo::compute(atoms.len(), &bonds, &adjacency);
        Ok(Molecule {
            atoms,
            bonds,
            adjacency,
            rings,
        })
    }

    /// Kekulé form: aromatic bonds replaced by alternating single/double
    /// bonds. Atom aromatic flags are retained as metadata.
    pub fn kekulize(&self) -> Result<Molecule, MolError> {
        let orders = kekule::kekulize(self)?;
        Ok(self.with_bond_orders(&orders))
    }

    /// All Kekulé structures of the molecule, at most `cap` of them, in a
    /// deterministic order. A molecule without aromatic bonds has exactly one.
    pub fn kekule_structures(&self, cap: usize) -> Result<Vec<Molecule>, MolError> {
        let all = kekule::enumerate(self, cap)?;
        Ok(all.iter().map(|o| self.with_bond_orders(o)).collect())
    }

    /// Kekulé structures varying only the aromatic systems that contain an
    /// atom of `focus`, at most `cap` of them.
    pub fn kekule_structures_around(&self, focus: &[usize], cap: usize) -> Result<Vec<Molecule>, MolError> {
        let all = kekule::enumerate_around(self, focus, cap)?;
        Ok(all.iter().map(|o| self.with_bond_orders(o)).collect())
    }

    fn with_bond_orders(&self, orders: &[BondOrder]) -> Molecule {
        let bonds = self
            .bonds
            .iter()
            .zip(orders)
            .map(|(b, &order)| Bond { order, ..*b })
            .collect();
        Molecule {
            atoms: self.atoms.clone(),
            bonds,
            adjacency: self.adjacency.clone(),
            rings: self.rings.clone(),
        }
    }

    /// Same molecule with atoms renumbered: new atom `i` is old atom
    /// `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Molecule {
        assert_eq!(perm.len(), self.atoms.len());
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let atoms = perm.iter().map(|&old| self.atoms[old]).collect();
        let bonds: Vec<Bond> = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: inverse[b.a],
                b: inverse[b.b],
                order: b.order,
            })
            .collect();
        Molecule::from_parts_unchecked(atoms, bonds).expect("permutation preserves validity")
    }

    /// Sub-molecule induced by `keep` (in the given order).
    pub fn subgraph(&self, keep: &[usize]) -> Molecule {
        let mut map = vec![usize::MAX; self.atoms.len()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let atoms = keep.iter().map(|&i| self.atoms[i]).collect();
        let bonds = self
            .bonds
            .iter()
            .filter(|b| map[b.a] != usize::MAX && map[b.b] != usize::MAX)
            .map(|b| Bond {
                a: map[b.a],
                b: map[b.b],
                order: b.order,
            })
            .collect();
        Molecule::from_parts_unchecked(atoms, bonds).expect("induced subgraph is simple")
    }

    /// Disjoint union of several molecules, atoms numbered in input order.
    pub fn union(mols: &[Molecule]) -> Molecule {
        let mut atoms = Vec::new();
        let mut bonds = Vec::new();
        for m in mols {
            let off = atoms.len();
            atoms.extend_from_slice(&m.atoms);
            bonds.extend(m.bonds.iter().map(|b| Bond {
                a: b.a + off,
                b: b.b + off,
                order: b.order,
            }));
        }
        Molecule::from_parts_unchecked(atoms, bonds).expect("union of valid molecules")
    }

    /// Recompute every hydrogen count from the valence table and compare
    /// with the stored values.
    pub fn hydrogens_consistent(&self) -> bool {
        let Ok(kek) = self.kekulize() else {
            return false;
        };
        (0..self.atoms.len()).all(|i| {
            let atom = &self.atoms[i];
            if element::valences(atom.element, atom.charge).is_empty() {
                return true;
            }
            implied_hydrogens(atom, kek.bond_units(i), i).ok() == Some(atom.implicit_h)
        })
    }

    pub fn has_charge(&self) -> bool {
        self.atoms.iter().any(|a| a.charge != 0)
    }

    pub fn has_isotope(&self) -> bool {
        self.atoms.iter().any(|a| a.isotope != 0)
    }
}

impl fmt::Display for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_canonical(self))
    }
}

/// Hydrogens needed to bring an atom from `explicit` bond units to its
/// smallest fitting valence. Atoms of elements without a valence model keep
/// their stored count.
pub(crate) fn implied_hydrogens(atom: &Atom, explicit: u32, idx: usize) -> Result<u8, MolError> {
    if element::valences(atom.element, atom.charge).is_empty() {
        return Ok(atom.implicit_h);
    }
    match element::fitting_valence(atom.element, atom.charge, explicit) {
        Some(v) => Ok((v - explicit) as u8),
        None => Err(MolError::Valence {
            atom: idx,
            message: format!(
                "{} with charge {} cannot carry {} bond units",
                atom.symbol(),
                atom.charge,
                explicit
            ),
        }),
    }
}

fn check_valence(
    atom: &Atom,
    adj: &[(usize, usize)],
    bonds: &[Bond],
    idx: usize,
) -> Result<(), MolError> {
    let allowed = element::valences(atom.element, atom.charge);
    if allowed.is_empty() {
        return Ok(());
    }
    let explicit: u32 = adj.iter().map(|&(_, b)| bonds[b].order.units()).sum();
    let total = explicit + atom.implicit_h as u32;
    let expected = implied_hydrogens(atom, explicit, idx)?;
    if expected != atom.implicit_h {
        return Err(MolError::Valence {
            atom: idx,
            message: format!(
                "{} has total valence {} (expected {} hydrogens, found {})",
                atom.symbol(),
                total,
                expected,
                atom.implicit_h
            ),
        });
    }
    Ok(())
}

pub(crate) fn build_adjacency(n: usize, bonds: &[Bond]) -> Result<Vec<Vec<(usize, usize)>>, MolError> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, b) in bonds.iter().enumerate() {
        if b.a == b.b {
            return Err(MolError::Bond {
                a: b.a,
                b: b.b,
                message: "self loop".into(),
            });
        }
        if b.a >= n || b.b >= n {
            return Err(MolError::Bond {
                a: b.a,
                b: b.b,
                message: "endpoint out of range".into(),
            });
        }
        if adj[b.a].iter().any(|(x, _)| *x == b.b) {
            return Err(MolError::Bond {
                a: b.a,
                b: b.b,
                message: "duplicate bond".into(),
            });
        }
        adj[b.a].push((b.b, i));
        adj[b.b].push((b.a, i));
    }
    Ok(adj)
}

pub(crate) fn connected_components(n: usize, adj: &[Vec<(usize, usize)>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ethanol_hydrogens() {
        let m = parse_smiles("CCO").unwrap();
        assert_eq!(m.atom_count(), 3);
        assert_eq!(m.bond_count(), 2);
        let h: Vec<u8> = m.atoms().iter().map(|a| a.implicit_h).collect();
        assert_eq!(h, vec![3, 2, 1]);
    }

    #[test]
    fn cyclopropane_ring_bonds() {
        let m = parse_smiles("C1CC1").unwrap();
        assert_eq!(m.atom_count(), 3);
        assert_eq!(m.bond_count(), 3);
        assert!((0..3).all(|b| m.rings().bond_in_ring(b)));
        assert_eq!(m.rings().sssr().len(), 1);
    }

    #[test]
    fn benzene_is_aromatic_with_one_hydrogen_each() {
        let m = parse_smiles("c1ccccc1").unwrap();
        assert!(m.atoms().iter().all(|a| a.aromatic && a.implicit_h == 1));
        assert!(m.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
        let kek = parse_smiles("C1=CC=CC=C1").unwrap();
        assert_eq!(write_canonical(&m), write_canonical(&kek));
    }

    #[test]
    fn kekulize_benzene_alternates() {
        let m = parse_smiles("c1ccccc1").unwrap().kekulize().unwrap();
        let doubles = m.bonds().iter().filter(|b| b.order == BondOrder::Double).count();
        assert_eq!(doubles, 3);
        for i in 0..6 {
            let d = m
                .neighbors(i)
                .iter()
                .filter(|&&(_, b)| m.bonds()[b].order == BondOrder::Double)
                .count();
            assert_eq!(d, 1);
        }
        assert!(m.atoms().iter().all(|a| a.aromatic));
    }

    #[test]
    fn kekulize_without_aromatic_bonds_is_identity() {
        let m = parse_smiles("CC=CC#N").unwrap();
        let k = m.kekulize().unwrap();
        assert_eq!(m, k);
    }

    #[test]
    fn kekulize_pyridine_places_nitrogen_in_double_bond() {
        let m = parse_smiles("c1ccncc1").unwrap();
        let k = m.kekulize().unwrap();
        let n = (0..6).find(|&i| k.atom(i).element == 7).unwrap();
        assert_eq!(k.bond_units(n), 3);
        assert_eq!(k.atom(n).implicit_h, 0);
        assert_eq!(k.bonds().iter().filter(|b| b.order == BondOrder::Double).count(), 3);
    }

    #[test]
    fn unkekulizable_input_is_rejected() {
        assert!(matches!(
            parse_smiles("c1cccc1"),
            Err(MolError::Kekulize { .. })
        ));
    }

    #[test]
    fn hydrogens_recompute_consistently() {
        for s in ["CCO", "c1ccccc1O", "C1=CC=CN1", "O=c1cccc[nH]1", "CS(C)=O", "C#N"] {
            let m = parse_smiles(s).unwrap();
            assert!(m.hydrogens_consistent(), "{s}");
        }
    }

    #[test]
    fn permuted_molecule_has_same_canonical_form() {
        let m = parse_smiles("OCC(=O)N").unwrap();
        let p = m.permuted(&[4, 2, 0, 3, 1]);
        assert_eq!(write_canonical(&m), write_canonical(&p));
    }
}
