//! SMILES writer driven by an atom ranking.

use super::{element, implied_hydrogens, BondOrder, Molecule};

/// Hydrogen count the reader would assign to this atom if written without
/// brackets, or `None` if it cannot be written bare.
fn bare_hydrogens(mol: &Molecule, i: usize, lowercase: bool) -> Option<u8> {
    let atom = mol.atom(i);
    if atom.element == 0 {
        return Some(0);
    }
    if !element::is_organic_subset(atom.element) {
        return None;
    }
    let units = mol.bond_units(i);
    if lowercase {
        let v = element::fitting_valence(atom.element, 0, units)?;
        let free = v - units;
        Some(if free >= 1 { (free - 1) as u8 } else { 0 })
    } else {
        let has_aromatic = mol
            .neighbors(i)
            .iter()
            .any(|&(_, b)| mol.bonds()[b].order == BondOrder::Aromatic);
        if has_aromatic {
            return None;
        }
        implied_hydrogens(atom, units, i).ok()
    }
}

fn write_lowercase(mol: &Molecule, i: usize) -> bool {
    let atom = mol.atom(i);
    atom.aromatic
        && element::has_aromatic_form(atom.element)
        && mol
            .neighbors(i)
            .iter()
            .any(|&(_, b)| mol.bonds()[b].order == BondOrder::Aromatic)
}

pub(super) fn atom_token(mol: &Molecule, i: usize, out: &mut String) {
    let atom = mol.atom(i);
    let lower = write_lowercase(mol, i);
    let bare = atom.charge == 0
        && atom.isotope == 0
        && bare_hydrogens(mol, i, lower) == Some(atom.implicit_h);
    let sym = element::symbol(atom.element);
    let sym_text = if lower { sym.to_ascii_lowercase() } else { sym.to_string() };
    if bare {
        out.push_str(&sym_text);
        return;
    }
    out.push('[');
    if atom.isotope != 0 {
        out.push_str(&atom.isotope.to_string());
    }
    out.push_str(&sym_text);
    match atom.implicit_h {
        0 => {}
        1 => out.push('H'),
        h => {
            out.push('H');
            out.push_str(&h.to_string());
        }
    }
    match atom.charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        c if c > 0 => {
            out.push('+');
            out.push_str(&c.to_string());
        }
        c => {
            out.push('-');
            out.push_str(&(-c).to_string());
        }
    }
    out.push(']');
}

fn bond_token(mol: &Molecule, bond: usize, out: &mut String) {
    let b = &mol.bonds()[bond];
    let both_lower = write_lowercase(mol, b.a) && write_lowercase(mol, b.b);
    match b.order {
        BondOrder::Single if both_lower => out.push('-'),
        BondOrder::Single => {}
        BondOrder::Double => out.push('='),
        BondOrder::Triple => out.push('#'),
        BondOrder::Aromatic if both_lower => {}
        BondOrder::Aromatic => out.push(':'),
    }
}

/// Write `mol` as SMILES, starting each component at its lowest-ranked
/// atom and visiting neighbours in rank order. Ranks must be distinct.
/// Returns the string and the atoms in output order.
pub(super) fn write_ranked(mol: &Molecule, ranks: &[usize]) -> (String, Vec<usize>) {
    let n = mol.atom_count();
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&i| ranks[i]);
    let sorted_nbrs: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|i| {
            let mut v = mol.neighbors(i).to_vec();
            v.sort_by_key(|&(nb, _)| ranks[nb]);
            v
        })
        .collect();

    // spanning forest; non-tree bonds become ring closures
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut tree_bond = vec![false; mol.bond_count()];
    let mut roots = Vec::new();
    for &root in &by_rank {
        if visited[root] {
            continue;
        }
        roots.push(root);
        dfs_tree(root, &sorted_nbrs, &mut visited, &mut order, &mut children, &mut tree_bond);
    }
    let mut position = vec![0; n];
    for (k, &a) in order.iter().enumerate() {
        position[a] = k;
    }
    // ring closures at each atom: (partner, bond), opened by the earlier atom
    let mut closures: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (bi, b) in mol.bonds().iter().enumerate() {
        if !tree_bond[bi] {
            closures[b.a].push((b.b, bi));
            closures[b.b].push((b.a, bi));
        }
    }
    for (i, c) in closures.iter_mut().enumerate() {
        c.sort_by_key(|&(p, _)| (position[p] > position[i], ranks[p]));
    }

    let mut out = String::new();
    // slot 0 is reserved so ring digits start at 1
    let mut digits_in_use: Vec<Option<usize>> = vec![Some(usize::MAX)];
    let mut bond_digit = vec![usize::MAX; mol.bond_count()];
    for (k, &root) in roots.iter().enumerate() {
        if k > 0 {
            out.push('.');
        }
        let mut w = Emitter {
            mol,
            children: &children,
            closures: &closures,
            position: &position,
            digits: &mut digits_in_use,
            bond_digit: &mut bond_digit,
            out: &mut out,
        };
        w.emit(root);
    }
    (out, order)
}

fn dfs_tree(
    root: usize,
    nbrs: &[Vec<(usize, usize)>],
    visited: &mut [bool],
    order: &mut Vec<usize>,
    children: &mut [Vec<(usize, usize)>],
    tree_bond: &mut [bool],
) {
    visited[root] = true;
    order.push(root);
    let mut stack = vec![(root, 0usize)];
    while let Some(&mut (u, ref mut cursor)) = stack.last_mut() {
        if *cursor < nbrs[u].len() {
            let (v, b) = nbrs[u][*cursor];
            *cursor += 1;
            if !visited[v] {
                visited[v] = true;
                order.push(v);
                tree_bond[b] = true;
                children[u].push((v, b));
                stack.push((v, 0));
            }
        } else {
            stack.pop();
        }
    }
}

struct Emitter<'a> {
    mol: &'a Molecule,
    children: &'a [Vec<(usize, usize)>],
    closures: &'a [Vec<(usize, usize)>],
    position: &'a [usize],
    digits: &'a mut Vec<Option<usize>>,
    bond_digit: &'a mut [usize],
    out: &'a mut String,
}

impl Emitter<'_> {
    fn emit(&mut self, root: usize) {
        // explicit stack so deep chains do not overflow
        enum Step {
            Atom(usize, Option<usize>),
            Open,
            Close,
        }
        let mut stack = vec![Step::Atom(root, None)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Close => self.out.push(')'),
                Step::Atom(a, incoming) => {
                    if let Some(b) = incoming {
                        bond_token(self.mol, b, self.out);
                    }
                    atom_token(self.mol, a, self.out);
                    self.ring_digits(a);
                    let kids = &self.children[a];
                    // push in reverse so the first child is emitted first
                    for (k, &(c, b)) in kids.iter().enumerate().rev() {
                        if k + 1 < kids.len() {
                            stack.push(Step::Close);
                            stack.push(Step::Atom(c, Some(b)));
                            stack.push(Step::Open);
                        } else {
                            stack.push(Step::Atom(c, Some(b)));
                        }
                    }
                }
                Step::Open => self.out.push('('),
            }
        }
    }

    fn ring_digits(&mut self, a: usize) {
        let mut freed = Vec::new();
        for &(p, b) in &self.closures[a] {
            if self.position[p] < self.position[a] {
                let d = self.bond_digit[b];
                push_digit(self.out, d);
                freed.push(d);
            } else {
                let d = match self.digits.iter().position(|x| x.is_none()) {
                    Some(d) => d,
                    None => {
                        self.digits.push(None);
                        self.digits.len() - 1
                    }
                };
                self.digits[d] = Some(b);
                self.bond_digit[b] = d;
                bond_token(self.mol, b, self.out);
                push_digit(self.out, d);
            }
        }
        for d in freed {
            self.digits[d] = None;
        }
    }
}

fn push_digit(out: &mut String, d: usize) {
    if d < 10 {
        out.push((b'0' + d as u8) as char);
    } else {
        out.push('%');
        out.push_str(&format!("{d:02}"));
    }
}
