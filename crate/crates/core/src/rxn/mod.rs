//! Reaction SMARTS parsing and application as a graph rewrite.

mod registry;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::molgraph::{write_canonical, Atom, Bond, BondOrder, MolError, Molecule};
use crate::smarts::{match_all, parse_smarts, BondExpr, Embedding, PatternGraph, SmartsError};

pub use crate::smarts::MatchMode;
pub use registry::{inverse_of, BrsRegistry, Direction, TABLE1};

/// Kekulé structures tried per application when a rewritten atom is
/// aromatic.
pub const KEKULE_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RxnError {
    #[error("reaction SMARTS must contain exactly one '>>'")]
    Arrow,
    #[error("invalid reaction SMARTS at byte {offset}: {source}")]
    Smarts { offset: usize, source: SmartsError },
    #[error("atom map {0} appears more than once on one side")]
    DuplicateMap(u32),
    #[error("product atom map {0} has no reactant counterpart")]
    UnknownMap(u32),
    #[error("product atom without an atom map (atom creation is not supported)")]
    UnmappedProductAtom,
    #[error("unknown template id {0}")]
    UnknownTemplate(usize),
    #[error("registry line {line}: {message}")]
    Registry { line: usize, message: String },
    #[error(transparent)]
    Molecule(#[from] MolError),
}

/// A parsed reaction template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmartsReaction {
    pub lhs: PatternGraph,
    pub rhs: PatternGraph,
    /// `(map number, lhs atom, rhs atom)` for every map present on both sides.
    pub map_table: Vec<(u32, usize, usize)>,
    raw_text: String,
}

impl SmartsReaction {
    /// Text as given, whitespace included.
    pub fn raw_text(&self) -> &str {
        &self.raw_text
    }

    fn rhs_of_lhs(&self, lhs_atom: usize) -> Option<usize> {
        self.map_table
            .iter()
            .find(|&&(_, l, _)| l == lhs_atom)
            .map(|&(_, _, r)| r)
    }

    fn lhs_of_rhs(&self, rhs_atom: usize) -> usize {
        self.map_table
            .iter()
            .find(|&&(_, _, r)| r == rhs_atom)
            .map(|&(_, l, _)| l)
            .expect("every product atom is mapped")
    }
}

impl fmt::Display for SmartsReaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}>>{}", self.lhs, self.rhs)
    }
}

fn maps_of(g: &PatternGraph) -> Result<BTreeMap<u32, usize>, RxnError> {
    let mut out = BTreeMap::new();
    for (i, a) in g.atoms.iter().enumerate() {
        if let Some(m) = a.map {
            if out.insert(m, i).is_some() {
                return Err(RxnError::DuplicateMap(m));
            }
        }
    }
    Ok(out)
}

pub fn parse_reaction(text: &str) -> Result<SmartsReaction, RxnError> {
    let mut parts = text.split(">>");
    let (Some(l), Some(r), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(RxnError::Arrow);
    };
    let lhs = parse_smarts(l).map_err(|source| RxnError::Smarts { offset: 0, source })?;
    let rhs = parse_smarts(r).map_err(|source| RxnError::Smarts {
        offset: l.len() + 2,
        source,
    })?;
    let lmaps = maps_of(&lhs)?;
    let rmaps = maps_of(&rhs)?;
    if rhs.atoms.iter().any(|a| a.map.is_none()) {
        return Err(RxnError::UnmappedProductAtom);
    }
    let mut map_table = Vec::new();
    for (&m, &ri) in &rmaps {
        let &li = lmaps.get(&m).ok_or(RxnError::UnknownMap(m))?;
        map_table.push((m, li, ri));
    }
    Ok(SmartsReaction {
        lhs,
        rhs,
        map_table,
        raw_text: text.to_string(),
    })
}

/// One distinct outcome of applying a reaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    /// Canonical SMILES of the kept graph (dot-separated if disconnected).
    pub smiles: String,
    pub molecule: Molecule,
    /// Canonical SMILES of what was split off, one entry per distinct
    /// discarded side among the applications giving this product.
    pub discarded: Vec<String>,
}

struct Outcome {
    kept: Molecule,
    discarded: Option<String>,
}

/// Apply `rxn` at every embedding of its reactant pattern into `reactants`.
/// Products are deduplicated by canonical SMILES and sorted.
pub fn apply(rxn: &SmartsReaction, reactants: &[Molecule], mode: MatchMode) -> Result<Vec<Product>, RxnError> {
    let mut offsets = Vec::with_capacity(reactants.len());
    let mut total = 0;
    for m in reactants {
        offsets.push(total);
        total += m.atom_count();
    }
    let union = Molecule::union(reactants);
    let mut found: BTreeMap<String, (Molecule, BTreeSet<String>)> = BTreeMap::new();
    for emb in match_all(&rxn.lhs, reactants, mode) {
        let atoms: Vec<usize> = emb.assignment.iter().map(|&(m, a)| offsets[m] + a).collect();
        for out in rewrite_all(rxn, &union, &atoms, &emb)? {
            let smiles = write_canonical(&out.kept);
            let entry = found.entry(smiles).or_insert_with(|| (out.kept, BTreeSet::new()));
            if let Some(d) = out.discarded {
                entry.1.insert(d);
            }
        }
    }
    Ok(found
        .into_iter()
        .map(|(smiles, (molecule, discarded))| Product {
            smiles,
            molecule,
            discarded: discarded.into_iter().collect(),
        })
        .collect())
}

/// Canonical SMILES of every product of `rxn` on `reactants`.
pub fn apply_smiles(rxn: &SmartsReaction, reactants: &[Molecule], mode: MatchMode) -> Result<Vec<String>, RxnError> {
    Ok(apply(rxn, reactants, mode)?.into_iter().map(|p| p.smiles).collect())
}

fn rewrite_all(
    rxn: &SmartsReaction,
    union: &Molecule,
    atoms: &[usize],
    _emb: &Embedding,
) -> Result<Vec<Outcome>, RxnError> {
    let deleted: Vec<bool> = (0..atoms.len()).map(|l| rxn.rhs_of_lhs(l).is_none()).collect();
    let mut focus: Vec<usize> = atoms.to_vec();
    for (l, &a) in atoms.iter().enumerate() {
        if deleted[l] {
            focus.extend(union.neighbors(a).iter().map(|&(n, _)| n));
        }
    }
    let aromatic_touched = focus.iter().any(|&a| union.atom(a).aromatic);
    let structures = if aromatic_touched {
        union.kekule_structures_around(&focus, KEKULE_CAP)?
    } else {
        vec![union.kekulize()?]
    };
    Ok(structures
        .iter()
        .filter_map(|k| rewrite(rxn, k, atoms, &deleted))
        .collect())
}

/// Rewrite one Kekulé structure at one embedding. `None` when nothing
/// changes or the result violates valence or a product H constraint.
fn rewrite(rxn: &SmartsReaction, kek: &Molecule, atoms: &[usize], deleted: &[bool]) -> Option<Outcome> {
    let n = kek.atom_count();
    let mut orders: Vec<Option<BondOrder>> = kek.bonds().iter().map(|b| Some(b.order)).collect();
    let mut added: Vec<Bond> = Vec::new();
    let mut touched = vec![false; n];
    let mut changed = false;

    for rb in &rxn.rhs.bonds {
        let (la, lb) = (rxn.lhs_of_rhs(rb.a), rxn.lhs_of_rhs(rb.b));
        let (ma, mb) = (atoms[la], atoms[lb]);
        let pinned = rxn
            .lhs
            .bond_between(la, lb)
            .and_then(|b| b.expr.explicit_order())
            .is_some();
        match kek.bond_between(ma, mb) {
            Some(bi) => {
                let current = kek.bonds()[bi].order;
                let target = match rb.expr.explicit_order() {
                    Some(o) => o,
                    None if pinned && rb.expr == BondExpr::Unspecified => BondOrder::Single,
                    None => current,
                };
                if target != current {
                    orders[bi] = Some(target);
                    touched[ma] = true;
                    touched[mb] = true;
                    changed = true;
                }
            }
            None => {
                added.push(Bond {
                    a: ma,
                    b: mb,
                    order: rb.expr.explicit_order().unwrap_or(BondOrder::Single),
                });
                touched[ma] = true;
                touched[mb] = true;
                changed = true;
            }
        }
    }
    for lb in &rxn.lhs.bonds {
        let keep = match (rxn.rhs_of_lhs(lb.a), rxn.rhs_of_lhs(lb.b)) {
            (Some(ra), Some(rb)) => rxn.rhs.bond_between(ra, rb).is_some(),
            _ => false,
        };
        if keep {
            continue;
        }
        let (ma, mb) = (atoms[lb.a], atoms[lb.b]);
        let bi = kek.bond_between(ma, mb).expect("matched bond exists");
        orders[bi] = None;
        touched[ma] = true;
        touched[mb] = true;
        changed = true;
    }
    let mut gone = vec![false; n];
    for (l, &a) in atoms.iter().enumerate() {
        if deleted[l] {
            gone[a] = true;
            changed = true;
        }
    }
    if !changed {
        return None;
    }

    let mut bonds: Vec<Bond> = kek
        .bonds()
        .iter()
        .zip(&orders)
        .filter_map(|(b, o)| o.map(|order| Bond { order, ..*b }))
        .collect();
    bonds.extend(added);

    // components after the edit, deleted atoms still present
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for b in &bonds {
        let (ra, rb) = (find(&mut parent, b.a), find(&mut parent, b.b));
        parent[ra] = rb;
    }
    let mut kept_root = vec![false; n];
    for (l, &a) in atoms.iter().enumerate() {
        if !deleted[l] {
            let r = find(&mut parent, a);
            kept_root[r] = true;
        }
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        if kept_root[r] {
            if !gone[i] {
                kept.push(i);
            }
        } else {
            dropped.push(i);
        }
    }
    // a deleted atom left inside a kept component takes its bonds with it
    for b in &bonds {
        if gone[b.a] != gone[b.b] {
            touched[b.a] = true;
            touched[b.b] = true;
        }
    }
    let gone_in_kept = (0..n).any(|i| gone[i] && kept_root[find(&mut parent, i)]);

    let kept_mol = build(kek, &bonds, &kept, &touched).ok()?;
    let mut new_index = vec![usize::MAX; n];
    for (ni, &oi) in kept.iter().enumerate() {
        new_index[oi] = ni;
    }
    for (ri, expr) in rxn.rhs.atoms.iter().enumerate() {
        if let Some(h) = expr.hydrogen_constraint() {
            let a = new_index[atoms[rxn.lhs_of_rhs(ri)]];
            if !h.matches(kept_mol.atom(a)) {
                return None;
            }
        }
    }
    let discarded = if dropped.is_empty() || gone_in_kept {
        None
    } else {
        Some(write_canonical(&build(kek, &bonds, &dropped, &touched).ok()?))
    };
    Some(Outcome {
        kept: kept_mol,
        discarded,
    })
}

/// Induced Kekulé subgraph on `keep` with hydrogens recomputed on touched
/// atoms, then aromaticity re-perceived.
fn build(kek: &Molecule, bonds: &[Bond], keep: &[usize], touched: &[bool]) -> Result<Molecule, MolError> {
    let mut map = vec![usize::MAX; kek.atom_count()];
    for (ni, &oi) in keep.iter().enumerate() {
        map[oi] = ni;
    }
    let atoms: Vec<Atom> = keep.iter().map(|&i| *kek.atom(i)).collect();
    let sub: Vec<Bond> = bonds
        .iter()
        .filter(|b| map[b.a] != usize::MAX && map[b.b] != usize::MAX)
        .map(|b| Bond {
            a: map[b.a],
            b: map[b.b],
            order: b.order,
        })
        .collect();
    let recompute: Vec<usize> = keep
        .iter()
        .enumerate()
        .filter(|&(_, &oi)| touched[oi])
        .map(|(ni, _)| ni)
        .collect();
    Molecule::from_kekule(atoms, sub, &recompute)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn run(rxn: &str, reactants: &[&str], mode: MatchMode) -> Vec<String> {
        let r = parse_reaction(rxn).unwrap();
        let mols: Vec<Molecule> = reactants.iter().map(|s| parse_smiles(s).unwrap()).collect();
        apply_smiles(&r, &mols, mode).unwrap()
    }

    fn builtin(id: usize, reactants: &[&str], mode: MatchMode) -> Vec<String> {
        run(BrsRegistry::builtin().get(id).unwrap().raw_text(), reactants, mode)
    }

    #[test]
    fn documented_examples() {
        assert_eq!(builtin(2, &["CCO"], MatchMode::Intra), vec!["C=CO", "CC=O"]);
        assert_eq!(builtin(5, &["CCC"], MatchMode::Intra), vec!["C1CC1"]);
        assert_eq!(builtin(11, &["CO"], MatchMode::Intra), vec!["C", "O"]);
        assert!(builtin(3, &["c1ccccc1"], MatchMode::Intra).is_empty());
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_reaction("[C:1]"), Err(RxnError::Arrow));
        assert_eq!(parse_reaction("[C:1]>>[C:1]>>[C:1]"), Err(RxnError::Arrow));
        assert_eq!(parse_reaction("[C:1]>>[C:2]"), Err(RxnError::UnknownMap(2)));
        assert_eq!(parse_reaction("[C:1][C:1]>>[C:1]"), Err(RxnError::DuplicateMap(1)));
        assert_eq!(parse_reaction("[C:1]>>[C:1]C"), Err(RxnError::UnmappedProductAtom));
        match parse_reaction("[C:1]>>[C:1][X") {
            Err(RxnError::Smarts { offset: 7, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn discarded_fragment_is_reported() {
        let r = BrsRegistry::builtin();
        let m = parse_smiles("CCOC").unwrap();
        let products = apply(r.get(11).unwrap(), &[m], MatchMode::Intra).unwrap();
        let ethane = products.iter().find(|p| p.smiles == "CC").unwrap();
        assert!(ethane.discarded.contains(&"CO".to_string()));
    }

    #[test]
    fn ring_deletion_has_no_discarded_side() {
        // removing a ring atom leaves it bonded to the kept side
        let r = BrsRegistry::builtin();
        let m = parse_smiles("C1CCOC1").unwrap();
        for p in apply(r.get(11).unwrap(), &[m], MatchMode::Intra).unwrap() {
            assert!(p.discarded.iter().all(|d| !d.is_empty()));
            assert!(!p.smiles.contains('.') || p.discarded.is_empty());
        }
    }

    #[test]
    fn intermolecular_join() {
        let got = builtin(1, &["C", "O"], MatchMode::Inter);
        assert!(got.contains(&"CO".to_string()));
        assert!(builtin(1, &["C"], MatchMode::Inter).is_empty());
    }

    #[test]
    fn pinned_bond_becomes_single() {
        assert_eq!(builtin(12, &["C=C"], MatchMode::Intra), vec!["CC"]);
        assert_eq!(builtin(13, &["CC#CC"], MatchMode::Intra), vec!["CCCC"]);
        assert!(builtin(13, &["C#N"], MatchMode::Intra).is_empty());
        assert_eq!(builtin(14, &["CC#N"], MatchMode::Intra), vec!["CC=N"]);
    }

    #[test]
    fn rewrites_on_aromatic_atoms() {
        assert!(builtin(11, &["Oc1ccccc1"], MatchMode::Intra).contains(&"c1ccccc1".to_string()));
        assert!(builtin(1, &["c1ccccc1", "C"], MatchMode::Inter).contains(&"Cc1ccccc1".to_string()));
        assert!(!builtin(15, &["C1=CC1"], MatchMode::Intra).is_empty());
    }

    #[test]
    fn existing_ring_closure_is_a_no_op() {
        assert!(builtin(5, &["C1CC1"], MatchMode::Intra).is_empty());
    }
}
