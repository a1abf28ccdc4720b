//! SMILES reader.

use super::kekule::{needs_pi_bond, MatchingSearch};
use super::{build_adjacency, element, implied_hydrogens, rings, Atom, Bond, BondOrder, MolError, Molecule};

#[derive(Debug, Clone)]
struct RawAtom {
    atom: Atom,
    /// Hydrogen count from a bracket atom; `None` for organic-subset atoms.
    hcount: Option<u8>,
}

#[derive(Debug, Clone, Copy)]
struct RawBond {
    a: usize,
    b: usize,
    order: Option<BondOrder>,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    atoms: Vec<RawAtom>,
    bonds: Vec<RawBond>,
    /// ring-closure digit -> (atom, bond order, offset)
    open_rings: Vec<Option<(usize, Option<BondOrder>, usize)>>,
}

fn syntax(offset: usize, message: impl Into<String>) -> MolError {
    MolError::Syntax {
        offset,
        message: message.into(),
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn parse(&mut self) -> Result<(), MolError> {
        let mut prev: Option<usize> = None;
        let mut branch_stack: Vec<Option<usize>> = Vec::new();
        let mut pending_bond: Option<(Option<BondOrder>, usize)> = None;
        let mut dot_pending = false;
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    if prev.is_none() || pending_bond.is_some() {
                        return Err(syntax(start, "branch without a preceding atom"));
                    }
                    branch_stack.push(prev);
                    self.pos += 1;
                }
                b')' => {
                    if pending_bond.is_some() {
                        return Err(syntax(start, "bond before ')'"));
                    }
                    if start > 0 && self.s[start - 1] == b'(' {
                        return Err(syntax(start, "empty branch"));
                    }
                    match branch_stack.pop() {
                        Some(p) => prev = p,
                        None => return Err(syntax(start, "unbalanced ')'")),
                    }
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' | b'$' => {
                    if pending_bond.is_some() {
                        return Err(syntax(start, "consecutive bond symbols"));
                    }
                    let order = match c {
                        b'-' | b'/' | b'\\' => BondOrder::Single,
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        b':' => BondOrder::Aromatic,
                        _ => return Err(syntax(start, "quadruple bonds are not supported")),
                    };
                    if prev.is_none() {
                        return Err(syntax(start, "bond without a preceding atom"));
                    }
                    pending_bond = Some((Some(order), start));
                    self.pos += 1;
                }
                b'.' => {
                    if pending_bond.is_some() || prev.is_none() {
                        return Err(syntax(start, "misplaced '.'"));
                    }
                    prev = None;
                    dot_pending = true;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(p) = prev else {
                        return Err(syntax(start, "ring closure without an atom"));
                    };
                    let digit = self.ring_number()?;
                    let order = pending_bond.take().and_then(|(o, _)| o);
                    self.ring_closure(p, digit, order, start)?;
                }
                _ => {
                    let idx = self.atom()?;
                    if let Some(p) = prev {
                        let order = pending_bond.take().and_then(|(o, _)| o);
                        self.bonds.push(RawBond { a: p, b: idx, order });
                    } else if let Some((_, off)) = pending_bond {
                        return Err(syntax(off, "bond without a preceding atom"));
                    }
                    dot_pending = false;
                    prev = Some(idx);
                }
            }
        }
        if let Some((_, off)) = pending_bond {
            return Err(syntax(off, "dangling bond"));
        }
        if dot_pending {
            return Err(syntax(self.s.len(), "trailing '.'"));
        }
        if !branch_stack.is_empty() {
            return Err(syntax(self.s.len(), "unclosed branch"));
        }
        if let Some((_, _, off)) = self.open_rings.iter().flatten().next() {
            return Err(syntax(*off, "unclosed ring"));
        }
        Ok(())
    }

    fn ring_number(&mut self) -> Result<usize, MolError> {
        let start = self.pos;
        if self.peek() == Some(b'%') {
            let d = self.s.get(self.pos + 1..self.pos + 3);
            match d {
                Some([a, b]) if a.is_ascii_digit() && b.is_ascii_digit() => {
                    self.pos += 3;
                    Ok(((a - b'0') * 10 + (b - b'0')) as usize)
                }
                _ => Err(syntax(start, "'%' must be followed by two digits")),
            }
        } else {
            let d = self.s[self.pos] - b'0';
            self.pos += 1;
            Ok(d as usize)
        }
    }

    fn ring_closure(
        &mut self,
        atom: usize,
        digit: usize,
        order: Option<BondOrder>,
        offset: usize,
    ) -> Result<(), MolError> {
        if self.open_rings.len() <= digit {
            self.open_rings.resize(digit + 1, None);
        }
        match self.open_rings[digit].take() {
            None => self.open_rings[digit] = Some((atom, order, offset)),
            Some((other, o2, _)) => {
                if other == atom {
                    return Err(syntax(offset, "ring closure to the same atom"));
                }
                let order = match (order, o2) {
                    (Some(x), Some(y)) if x != y => {
                        return Err(syntax(offset, "conflicting ring-closure bond orders"))
                    }
                    (Some(x), _) | (_, Some(x)) => Some(x),
                    _ => None,
                };
                self.bonds.push(RawBond {
                    a: other,
                    b: atom,
                    order,
                });
            }
        }
        Ok(())
    }

    fn atom(&mut self) -> Result<usize, MolError> {
        let start = self.pos;
        let c = self.s[self.pos];
        let atom = if c == b'[' {
            self.bracket_atom()?
        } else if c == b'*' {
            self.pos += 1;
            RawAtom {
                atom: Atom::new(0),
                hcount: Some(0),
            }
        } else {
            let two = self.s.get(self.pos..self.pos + 2);
            let (z, aromatic, len) = match (c, two) {
                (b'C', Some(b"Cl")) => (17, false, 2),
                (b'B', Some(b"Br")) => (35, false, 2),
                (b'B', _) => (5, false, 1),
                (b'C', _) => (6, false, 1),
                (b'N', _) => (7, false, 1),
                (b'O', _) => (8, false, 1),
                (b'F', _) => (9, false, 1),
                (b'P', _) => (15, false, 1),
                (b'S', _) => (16, false, 1),
                (b'I', _) => (53, false, 1),
                (b'b', _) => (5, true, 1),
                (b'c', _) => (6, true, 1),
                (b'n', _) => (7, true, 1),
                (b'o', _) => (8, true, 1),
                (b'p', _) => (15, true, 1),
                (b's', _) => (16, true, 1),
                _ if c.is_ascii_alphabetic() => {
                    return Err(MolError::UnsupportedElement {
                        offset: start,
                        symbol: (c as char).to_string(),
                    })
                }
                _ => return Err(syntax(start, format!("unexpected character '{}'", c as char))),
            };
            self.pos += len;
            let mut a = Atom::new(z);
            a.aromatic = aromatic;
            RawAtom {
                atom: a,
                hcount: None,
            }
        };
        self.atoms.push(atom);
        Ok(self.atoms.len() - 1)
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        std::str::from_utf8(&self.s[start..self.pos]).ok()?.parse().ok()
    }

    fn bracket_atom(&mut self) -> Result<RawAtom, MolError> {
        let start = self.pos;
        self.pos += 1;
        let isotope = match self.number() {
            Some(n) if n > u16::MAX as u32 => return Err(syntax(start, "isotope out of range")),
            Some(n) => n as u16,
            None => 0,
        };
        let sym_start = self.pos;
        let (z, aromatic) = self.bracket_symbol()?;
        // chirality is accepted and ignored
        if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
            } else if let Some(tag) = self.s.get(self.pos..self.pos + 2) {
                if matches!(tag, b"TH" | b"AL" | b"SP" | b"TB" | b"OH") {
                    self.pos += 2;
                    self.number();
                }
            }
        }
        let mut hcount = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hcount = match self.number() {
                Some(n) if n > 9 => return Err(syntax(sym_start, "hydrogen count out of range")),
                Some(n) => n as u8,
                None => 1,
            };
        }
        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.number() {
                charge = unit * n as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    charge += unit;
                }
            }
            if !(-15..=15).contains(&charge) {
                return Err(syntax(sym_start, "charge out of range"));
            }
        }
        if self.peek() == Some(b':') {
            self.pos += 1;
            if self.number().is_none() {
                return Err(syntax(self.pos, "atom class must be a number"));
            }
        }
        if self.peek() != Some(b']') {
            return Err(syntax(self.pos, "expected ']'"));
        }
        self.pos += 1;
        let mut atom = Atom::new(z);
        atom.aromatic = aromatic;
        atom.isotope = isotope;
        atom.charge = charge as i8;
        Ok(RawAtom {
            atom,
            hcount: Some(hcount),
        })
    }

    fn bracket_symbol(&mut self) -> Result<(u8, bool), MolError> {
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Err(syntax(start, "unterminated bracket atom"));
        };
        if c == b'*' {
            self.pos += 1;
            return Ok((0, false));
        }
        if c.is_ascii_lowercase() {
            for (sym, z) in [("se", 34u8), ("as", 33), ("te", 52), ("b", 5), ("c", 6), ("n", 7), ("o", 8), ("p", 15), ("s", 16)] {
                if self.s[self.pos..].starts_with(sym.as_bytes()) {
                    self.pos += sym.len();
                    return Ok((z, true));
                }
            }
            return Err(MolError::UnsupportedElement {
                offset: start,
                symbol: (c as char).to_string(),
            });
        }
        if !c.is_ascii_uppercase() {
            return Err(syntax(start, "expected an element symbol"));
        }
        if let Some(&l) = self.s.get(self.pos + 1) {
            if l.is_ascii_lowercase() {
                let two = std::str::from_utf8(&self.s[self.pos..self.pos + 2]).unwrap_or("");
                if let Some(z) = element::atomic_number(two) {
                    self.pos += 2;
                    return Ok((z, false));
                }
            }
        }
        let one = (c as char).to_string();
        match element::atomic_number(&one) {
            Some(z) => {
                self.pos += 1;
                Ok((z, false))
            }
            None => Err(MolError::UnsupportedElement {
                offset: start,
                symbol: one,
            }),
        }
    }
}

/// Parse a SMILES string. Stereo marks are accepted and ignored; neutral
/// explicit hydrogens attached to a heavy atom are folded into its
/// hydrogen count. Aromatic input is kekulized and aromaticity is then
/// perceived again, so equivalent Kekulé and aromatic spellings give
/// identical molecules.
pub fn parse_smiles(smiles: &str) -> Result<Molecule, MolError> {
    let smiles = smiles.trim();
    if smiles.is_empty() {
        return Err(MolError::Empty);
    }
    let mut p = Parser {
        s: smiles.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        open_rings: Vec::new(),
    };
    p.parse()?;
    let raw_atoms = p.atoms;
    let n = raw_atoms.len();
    let mut bonds: Vec<Bond> = p
        .bonds
        .iter()
        .map(|b| Bond {
            a: b.a,
            b: b.b,
            order: b.order.unwrap_or(BondOrder::Single),
        })
        .collect();
    let adjacency = build_adjacency(n, &bonds)?;

    // unspecified bonds between aromatic atoms are aromatic inside rings
    let ring_info = rings::RingInfo::compute(n, &bonds, &adjacency);
    for (i, rb) in p.bonds.iter().enumerate() {
        if rb.order.is_none()
            && raw_atoms[rb.a].atom.aromatic
            && raw_atoms[rb.b].atom.aromatic
            && ring_info.bond_in_ring(i)
        {
            bonds[i].order = BondOrder::Aromatic;
        }
    }
    let units = |i: usize, bonds: &[Bond]| -> u32 {
        adjacency[i].iter().map(|&(_, b)| bonds[b].order.units()).sum()
    };

    // atoms that need a double bond from the aromatic set
    let mut needy = vec![false; n];
    let mut candidates = Vec::new();
    for (i, b) in bonds.iter().enumerate() {
        if b.order == BondOrder::Aromatic {
            candidates.push(i);
        }
    }
    for (i, ra) in raw_atoms.iter().enumerate() {
        let has_aromatic = adjacency[i]
            .iter()
            .any(|&(_, b)| bonds[b].order == BondOrder::Aromatic);
        if !has_aromatic {
            continue;
        }
        let base = units(i, &bonds);
        needy[i] = match ra.hcount {
            Some(h) => needs_pi_bond(ra.atom.element, ra.atom.charge, h as u32, base, i)?,
            None => match element::fitting_valence(ra.atom.element, ra.atom.charge, base) {
                Some(v) => v > base,
                None => {
                    return Err(MolError::Valence {
                        atom: i,
                        message: "aromatic atom exceeds its valence".into(),
                    })
                }
            },
        };
    }
    if !candidates.is_empty() {
        let mut search = MatchingSearch::new(n, &bonds, &candidates, &needy, 1);
        if let Some(atom) = search.run() {
            return Err(MolError::Kekulize { atom });
        }
        for &bi in &candidates {
            bonds[bi].order = BondOrder::Single;
        }
        for &bi in &search.solutions[0] {
            bonds[bi].order = BondOrder::Double;
        }
    }

    let mut atoms: Vec<Atom> = Vec::with_capacity(n);
    for (i, ra) in raw_atoms.iter().enumerate() {
        let mut atom = ra.atom;
        atom.implicit_h = match ra.hcount {
            Some(h) => h,
            None => implied_hydrogens(&atom, units(i, &bonds), i)?,
        };
        atoms.push(atom);
    }

    // fold neutral [H] atoms bonded to a single heavy atom
    let foldable: Vec<bool> = (0..n)
        .map(|i| {
            let a = &atoms[i];
            a.element == 1
                && a.charge == 0
                && a.isotope == 0
                && a.implicit_h == 0
                && adjacency[i].len() == 1
                && {
                    let (nbr, b) = adjacency[i][0];
                    bonds[b].order == BondOrder::Single && atoms[nbr].element != 1
                }
        })
        .collect();
    if foldable.iter().any(|&f| f) {
        let mut map = vec![usize::MAX; n];
        let mut kept = Vec::new();
        for i in 0..n {
            if foldable[i] {
                let (nbr, _) = adjacency[i][0];
                atoms[nbr].implicit_h += 1;
            } else {
                map[i] = kept.len();
                kept.push(i);
            }
        }
        let new_atoms = kept.iter().map(|&i| atoms[i]).collect();
        let new_bonds = bonds
            .iter()
            .filter(|b| !foldable[b.a] && !foldable[b.b])
            .map(|b| Bond {
                a: map[b.a],
                b: map[b.b],
                order: b.order,
            })
            .collect();
        atoms = new_atoms;
        bonds = new_bonds;
    }
    Molecule::from_kekule(atoms, bonds, &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_errors_carry_offsets() {
        for (s, off) in [("CC(", 3), ("C1CC", 1), ("C=", 1), ("C)", 1), ("[C", 2)] {
            match parse_smiles(s) {
                Err(MolError::Syntax { offset, .. }) => assert_eq!(offset, off, "{s}"),
                other => panic!("{s}: {other:?}"),
            }
        }
        assert_eq!(parse_smiles(""), Err(MolError::Empty));
        assert!(matches!(parse_smiles("Xy"), Err(MolError::UnsupportedElement { .. })));
    }

    #[test]
    fn bracket_atoms() {
        let m = parse_smiles("[13CH3][NH3+]").unwrap();
        assert_eq!(m.atom(0).isotope, 13);
        assert_eq!(m.atom(0).implicit_h, 3);
        assert_eq!(m.atom(1).charge, 1);
        assert_eq!(m.atom(1).implicit_h, 3);
        assert!(parse_smiles("[CH3]").is_err());
        assert!(parse_smiles("C[O-]").is_ok());
    }

    #[test]
    fn explicit_hydrogens_fold() {
        let m = parse_smiles("[H]C([H])([H])O").unwrap();
        assert_eq!(m.atom_count(), 2);
        assert_eq!(m.atom(0).implicit_h, 3);
        assert_eq!(parse_smiles("[H][H]").unwrap().atom_count(), 2);
    }

    #[test]
    fn stereo_is_ignored() {
        let a = parse_smiles("F/C=C/F").unwrap();
        let b = parse_smiles("FC=CF").unwrap();
        assert_eq!(a, b);
        let c = parse_smiles("N[C@@H](C)C(=O)O").unwrap();
        assert_eq!(c.atom(1).implicit_h, 1);
    }

    #[test]
    fn ring_closure_forms() {
        let a = parse_smiles("C%10CC%10").unwrap();
        assert_eq!(a.bond_count(), 3);
        let b = parse_smiles("C=1CCCCC1").unwrap();
        assert_eq!(b.bonds().iter().filter(|x| x.order == BondOrder::Double).count(), 1);
        assert!(parse_smiles("C=1CCCCC#1").is_err());
        assert!(parse_smiles("C11").is_err());
    }

    #[test]
    fn aromatic_bond_outside_ring_is_single() {
        let m = parse_smiles("c1ccccc1c1ccccc1").unwrap();
        let singles = m.bonds().iter().filter(|b| b.order == BondOrder::Single).count();
        assert_eq!(singles, 1);
    }

    #[test]
    fn aromatic_hydrogen_inference() {
        let m = parse_smiles("c1cc[nH]c1").unwrap();
        assert_eq!(m.total_implicit_h(), 5);
        let m = parse_smiles("O=c1cccc[nH]1").unwrap();
        assert_eq!(m.total_implicit_h(), 5);
        assert!(parse_smiles("c1ccnc1").is_err());
    }
}
