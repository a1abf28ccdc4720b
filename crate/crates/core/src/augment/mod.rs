//! SMARTS template augmentation: specialization, generalization,
//! permutation and combination of atom primitives, mirrored onto the
//! product side through atom maps (permutation excepted).

mod probe;

use std::collections::HashSet;
use std::fmt;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::molgraph::{element, Molecule};
use crate::rxn::{apply, parse_reaction, MatchMode, RxnError, SmartsReaction};
use crate::smarts::{PatternGraph, Primitive};

pub use probe::{probe_molecules, PROBE_SMILES};

/// Random multi-op chains tried per requested variant once single ops run out.
const CHAIN_ATTEMPTS_PER_VARIANT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AugmentError {
    #[error("no atom {0} on that side of the template")]
    NoSuchAtom(usize),
    #[error("no primitive {term} in atom {atom}")]
    NoSuchTerm { atom: usize, term: usize },
    #[error("primitive is not an atomic-number form")]
    NotAtomicNumber,
    #[error("primitive is not an element symbol")]
    NotElementSymbol,
    #[error("element {0} has no aromatic form")]
    NoAromaticForm(u8),
    #[error("not a permutation of {0} items")]
    BadPermutation(usize),
    #[error("empty subset")]
    EmptySubset,
    #[error("subset index {0} is not in the OR list")]
    SubsetNotDrawn(usize),
    #[error("mapped product atom {0} has no matching primitive to mirror onto")]
    MirrorMissing(u32),
    #[error("duplicate primitive in OR list")]
    DuplicatePrimitive,
    #[error("variant identical to its base")]
    Identity,
    #[error(transparent)]
    Reaction(#[from] RxnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Lhs,
    Rhs,
}

impl Side {
    fn letter(self) -> char {
        match self {
            Side::Lhs => 'L',
            Side::Rhs => 'R',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Specialize,
    Generalize,
    PermuteWithin,
    PermuteBetween,
    Combine,
}

impl OpKind {
    pub const ALL: [OpKind; 5] = [
        OpKind::Specialize,
        OpKind::Generalize,
        OpKind::PermuteWithin,
        OpKind::PermuteBetween,
        OpKind::Combine,
    ];

    /// Parse a CLI op list such as `spec,gen,perm,comb`. `perm` enables
    /// both permutation kinds.
    pub fn parse_list(s: &str) -> Result<Vec<OpKind>, String> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let kinds: &[OpKind] = match part {
                "spec" => &[OpKind::Specialize],
                "gen" => &[OpKind::Generalize],
                "perm" => &[OpKind::PermuteWithin, OpKind::PermuteBetween],
                "permw" => &[OpKind::PermuteWithin],
                "permb" => &[OpKind::PermuteBetween],
                "comb" => &[OpKind::Combine],
                other => return Err(format!("unknown augmentation op '{other}'")),
            };
            for k in kinds {
                if !out.contains(k) {
                    out.push(*k);
                }
            }
        }
        if out.is_empty() {
            return Err("no augmentation ops given".into());
        }
        Ok(out)
    }
}

/// One edit. Atom indices are reactant-side pattern atoms in text order
/// unless a side is given.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AugmentationOp {
    /// `#n` at OR term `term` becomes `C`-like (aliphatic) or `c`-like.
    Specialize { atom: usize, term: usize, aromatic: bool },
    /// An element symbol at OR term `term` becomes `#n`.
    Generalize { atom: usize, term: usize },
    /// OR list reordered: new term i is old term `order[i]`.
    PermuteWithin { side: Side, atom: usize, order: Vec<usize> },
    /// Dot components reordered.
    PermuteBetween { side: Side, order: Vec<usize> },
    /// OR list reduced to the terms at `keep`.
    Combine { atom: usize, keep: Vec<usize> },
}

impl AugmentationOp {
    pub fn kind(&self) -> OpKind {
        match self {
            AugmentationOp::Specialize { .. } => OpKind::Specialize,
            AugmentationOp::Generalize { .. } => OpKind::Generalize,
            AugmentationOp::PermuteWithin { .. } => OpKind::PermuteWithin,
            AugmentationOp::PermuteBetween { .. } => OpKind::PermuteBetween,
            AugmentationOp::Combine { .. } => OpKind::Combine,
        }
    }
}

fn dotted(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(".")
}

impl fmt::Display for AugmentationOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AugmentationOp::Specialize { atom, term, aromatic } => {
                write!(f, "spec:L{atom}.{term}={}", if *aromatic { "arom" } else { "aliph" })
            }
            AugmentationOp::Generalize { atom, term } => write!(f, "gen:L{atom}.{term}"),
            AugmentationOp::PermuteWithin { side, atom, order } => {
                write!(f, "permw:{}{atom}={}", side.letter(), dotted(order))
            }
            AugmentationOp::PermuteBetween { side, order } => {
                write!(f, "permb:{}={}", side.letter(), dotted(order))
            }
            AugmentationOp::Combine { atom, keep } => write!(f, "comb:L{atom}={}", dotted(keep)),
        }
    }
}

/// How a variant's product sets relate to its base on any molecule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantClass {
    Equal,
    Subset,
    Superset,
    /// Mixes narrowing and widening ops.
    Mixed,
}

impl VariantClass {
    pub fn name(self) -> &'static str {
        match self {
            VariantClass::Equal => "equal",
            VariantClass::Subset => "subset",
            VariantClass::Superset => "superset",
            VariantClass::Mixed => "mixed",
        }
    }
}

/// A validated variant of a base template.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedTemplate {
    pub base_id: Option<usize>,
    pub ops: Vec<AugmentationOp>,
    pub result: SmartsReaction,
    /// Serialization of `result`.
    pub provenance_text: String,
}

impl AugmentedTemplate {
    /// Ops joined by `+`.
    pub fn signature(&self) -> String {
        self.ops.iter().map(|o| o.to_string()).collect::<Vec<_>>().join("+")
    }

    pub fn class(&self) -> VariantClass {
        let narrows = self
            .ops
            .iter()
            .any(|o| matches!(o.kind(), OpKind::Specialize | OpKind::Combine));
        let widens = self.ops.iter().any(|o| o.kind() == OpKind::Generalize);
        match (narrows, widens) {
            (false, false) => VariantClass::Equal,
            (true, false) => VariantClass::Subset,
            (false, true) => VariantClass::Superset,
            (true, true) => VariantClass::Mixed,
        }
    }

    /// `base_id<TAB>ops_signature<TAB>smarts`, base id 0 for a template
    /// outside the registry.
    pub fn to_line(&self) -> String {
        format!("{}\t{}\t{}", self.base_id.unwrap_or(0), self.signature(), self.provenance_text)
    }
}

fn atom_mut(g: &mut PatternGraph, atom: usize) -> Result<&mut crate::smarts::AtomExpr, AugmentError> {
    g.atoms.get_mut(atom).ok_or(AugmentError::NoSuchAtom(atom))
}

fn check_permutation(order: &[usize], n: usize) -> Result<(), AugmentError> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(AugmentError::BadPermutation(n));
    }
    for &i in order {
        if i >= n || seen[i] {
            return Err(AugmentError::BadPermutation(n));
        }
        seen[i] = true;
    }
    if order.iter().enumerate().all(|(i, &x)| i == x) {
        return Err(AugmentError::Identity);
    }
    Ok(())
}

fn no_duplicates(terms: &[Primitive]) -> Result<(), AugmentError> {
    let set: HashSet<_> = terms.iter().collect();
    if set.len() == terms.len() {
        Ok(())
    } else {
        Err(AugmentError::DuplicatePrimitive)
    }
}

/// Product-side atom linked to reactant atom `atom` through its map.
fn mirror_site(r: &SmartsReaction, atom: usize) -> Option<(u32, usize)> {
    r.map_table
        .iter()
        .find(|&&(_, l, _)| l == atom)
        .map(|&(m, _, ri)| (m, ri))
}

/// Replace the product-side primitive of element `z` linked to `atom`.
fn mirror_replace(
    r: &SmartsReaction,
    rhs: &mut PatternGraph,
    atom: usize,
    z: u8,
    with: Primitive,
) -> Result<(), AugmentError> {
    let Some((map, ri)) = mirror_site(r, atom) else {
        return Ok(());
    };
    let expr = &mut rhs.atoms[ri];
    let term = expr
        .or_terms
        .iter()
        .position(|p| p.element() == Some(z))
        .ok_or(AugmentError::MirrorMissing(map))?;
    expr.or_terms[term] = with;
    no_duplicates(&expr.or_terms)
}

fn finish(r: &SmartsReaction, lhs: &PatternGraph, rhs: &PatternGraph) -> Result<SmartsReaction, AugmentError> {
    let text = format!("{lhs}>>{rhs}");
    if text == r.to_string() {
        return Err(AugmentError::Identity);
    }
    Ok(parse_reaction(&text)?)
}

fn lhs_term(r: &SmartsReaction, atom: usize, term: usize) -> Result<Primitive, AugmentError> {
    let expr = r.lhs.atoms.get(atom).ok_or(AugmentError::NoSuchAtom(atom))?;
    expr.or_terms
        .get(term)
        .copied()
        .ok_or(AugmentError::NoSuchTerm { atom, term })
}

pub fn specialize(r: &SmartsReaction, atom: usize, term: usize, aromatic: bool) -> Result<SmartsReaction, AugmentError> {
    let Primitive::AtomicNumber(z) = lhs_term(r, atom, term)? else {
        return Err(AugmentError::NotAtomicNumber);
    };
    if aromatic && !element::has_aromatic_form(z) {
        return Err(AugmentError::NoAromaticForm(z));
    }
    let new = if aromatic {
        Primitive::Aromatic(z)
    } else {
        Primitive::Aliphatic(z)
    };
    let (mut lhs, mut rhs) = (r.lhs.clone(), r.rhs.clone());
    let expr = atom_mut(&mut lhs, atom)?;
    expr.or_terms[term] = new;
    no_duplicates(&expr.or_terms)?;
    mirror_replace(r, &mut rhs, atom, z, new)?;
    finish(r, &lhs, &rhs)
}

pub fn generalize(r: &SmartsReaction, atom: usize, term: usize) -> Result<SmartsReaction, AugmentError> {
    let z = match lhs_term(r, atom, term)? {
        Primitive::Aliphatic(z) | Primitive::Aromatic(z) => z,
        _ => return Err(AugmentError::NotElementSymbol),
    };
    let new = Primitive::AtomicNumber(z);
    let (mut lhs, mut rhs) = (r.lhs.clone(), r.rhs.clone());
    let expr = atom_mut(&mut lhs, atom)?;
    expr.or_terms[term] = new;
    no_duplicates(&expr.or_terms)?;
    mirror_replace(r, &mut rhs, atom, z, new)?;
    finish(r, &lhs, &rhs)
}

pub fn permute_within(r: &SmartsReaction, side: Side, atom: usize, order: &[usize]) -> Result<SmartsReaction, AugmentError> {
    let (mut lhs, mut rhs) = (r.lhs.clone(), r.rhs.clone());
    let g = match side {
        Side::Lhs => &mut lhs,
        Side::Rhs => &mut rhs,
    };
    let expr = atom_mut(g, atom)?;
    check_permutation(order, expr.or_terms.len())?;
    expr.or_terms = order.iter().map(|&i| expr.or_terms[i]).collect();
    finish(r, &lhs, &rhs)
}

pub fn permute_between(r: &SmartsReaction, side: Side, order: &[usize]) -> Result<SmartsReaction, AugmentError> {
    let g = match side {
        Side::Lhs => &r.lhs,
        Side::Rhs => &r.rhs,
    };
    check_permutation(order, g.components.len())?;
    let reordered = g.with_component_order(order);
    match side {
        Side::Lhs => finish(r, &reordered, &r.rhs),
        Side::Rhs => finish(r, &r.lhs, &reordered),
    }
}

pub fn combine(r: &SmartsReaction, atom: usize, keep: &[usize]) -> Result<SmartsReaction, AugmentError> {
    let expr = r.lhs.atoms.get(atom).ok_or(AugmentError::NoSuchAtom(atom))?;
    if keep.is_empty() {
        return Err(AugmentError::EmptySubset);
    }
    let n = expr.or_terms.len();
    let mut seen = vec![false; n];
    for &k in keep {
        if k >= n || seen[k] {
            return Err(AugmentError::SubsetNotDrawn(k));
        }
        seen[k] = true;
    }
    if keep.len() == n {
        return Err(AugmentError::Identity);
    }
    let kept: Vec<Primitive> = keep.iter().map(|&k| expr.or_terms[k]).collect();
    let (mut lhs, mut rhs) = (r.lhs.clone(), r.rhs.clone());
    lhs.atoms[atom].or_terms = kept.clone();
    if let Some((map, ri)) = mirror_site(r, atom) {
        let elements: Vec<Option<u8>> = kept.iter().map(|p| p.element()).collect();
        let terms = &mut rhs.atoms[ri].or_terms;
        let mirrored: Vec<Primitive> = terms
            .iter()
            .copied()
            .filter(|p| *p == Primitive::Wildcard || elements.contains(&p.element()))
            .collect();
        if mirrored.is_empty() {
            return Err(AugmentError::MirrorMissing(map));
        }
        *terms = mirrored;
    }
    finish(r, &lhs, &rhs)
}

pub fn apply_op(r: &SmartsReaction, op: &AugmentationOp) -> Result<SmartsReaction, AugmentError> {
    match op {
        AugmentationOp::Specialize { atom, term, aromatic } => specialize(r, *atom, *term, *aromatic),
        AugmentationOp::Generalize { atom, term } => generalize(r, *atom, *term),
        AugmentationOp::PermuteWithin { side, atom, order } => permute_within(r, *side, *atom, order),
        AugmentationOp::PermuteBetween { side, order } => permute_between(r, *side, order),
        AugmentationOp::Combine { atom, keep } => combine(r, *atom, keep),
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    rec(0, &mut cur, &mut out);
    out.sort();
    out.retain(|p| p.iter().enumerate().any(|(i, &x)| i != x));
    out
}

/// Every single op of the allowed kinds that is well-formed on `r`
/// (validity of the result is checked separately).
pub fn candidate_ops(r: &SmartsReaction, allowed: &[OpKind]) -> Vec<AugmentationOp> {
    let mut out = Vec::new();
    for (atom, expr) in r.lhs.atoms.iter().enumerate() {
        for (term, p) in expr.or_terms.iter().enumerate() {
            match p {
                Primitive::AtomicNumber(z) if allowed.contains(&OpKind::Specialize) => {
                    out.push(AugmentationOp::Specialize { atom, term, aromatic: false });
                    if element::has_aromatic_form(*z) {
                        out.push(AugmentationOp::Specialize { atom, term, aromatic: true });
                    }
                }
                Primitive::Aliphatic(_) | Primitive::Aromatic(_) if allowed.contains(&OpKind::Generalize) => {
                    out.push(AugmentationOp::Generalize { atom, term });
                }
                _ => {}
            }
        }
        let n = expr.or_terms.len();
        if allowed.contains(&OpKind::Combine) && n > 1 {
            for mask in 1..(1usize << n) - 1 {
                let keep: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                out.push(AugmentationOp::Combine { atom, keep });
            }
        }
    }
    if allowed.contains(&OpKind::PermuteWithin) {
        for (side, g) in [(Side::Lhs, &r.lhs), (Side::Rhs, &r.rhs)] {
            for (atom, expr) in g.atoms.iter().enumerate() {
                if expr.or_terms.len() > 1 {
                    for order in permutations(expr.or_terms.len()) {
                        out.push(AugmentationOp::PermuteWithin { side, atom, order });
                    }
                }
            }
        }
    }
    if allowed.contains(&OpKind::PermuteBetween) {
        for (side, g) in [(Side::Lhs, &r.lhs), (Side::Rhs, &r.rhs)] {
            if g.components.len() > 1 {
                for order in permutations(g.components.len()) {
                    out.push(AugmentationOp::PermuteBetween { side, order });
                }
            }
        }
    }
    out
}

/// The validity gate: the variant rewrites at least one probe molecule.
pub fn passes_probe(r: &SmartsReaction, probe: &[Molecule]) -> bool {
    probe.iter().any(|m| {
        apply(r, std::slice::from_ref(m), MatchMode::Intra).is_ok_and(|p| !p.is_empty())
    })
}

/// Seeded sample of up to `max_count` distinct variants that pass the
/// probe gate. Single-op variants come first in shuffled order; random
/// chains of two or three ops fill any remainder.
pub fn enumerate_variants(
    base_id: Option<usize>,
    r: &SmartsReaction,
    allowed: &[OpKind],
    max_count: usize,
    seed: u64,
) -> Vec<AugmentedTemplate> {
    enumerate_variants_with(base_id, r, allowed, max_count, seed, probe_molecules())
}

pub fn enumerate_variants_with(
    base_id: Option<usize>,
    r: &SmartsReaction,
    allowed: &[OpKind],
    max_count: usize,
    seed: u64,
    probe: &[Molecule],
) -> Vec<AugmentedTemplate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base_text = r.to_string();
    let mut seen: HashSet<String> = HashSet::from([base_text]);
    let mut out = Vec::new();
    let mut accept = |ops: Vec<AugmentationOp>, result: SmartsReaction, out: &mut Vec<AugmentedTemplate>| {
        let text = result.to_string();
        if seen.contains(&text) || !passes_probe(&result, probe) {
            return;
        }
        seen.insert(text.clone());
        out.push(AugmentedTemplate {
            base_id,
            ops,
            result,
            provenance_text: text,
        });
    };

    let mut singles = candidate_ops(r, allowed);
    singles.shuffle(&mut rng);
    for op in singles {
        if out.len() >= max_count {
            return out;
        }
        if let Ok(result) = apply_op(r, &op) {
            accept(vec![op], result, &mut out);
        }
    }
    let mut attempts = max_count.saturating_sub(out.len()) * CHAIN_ATTEMPTS_PER_VARIANT;
    while out.len() < max_count && attempts > 0 {
        attempts -= 1;
        let len = rng.random_range(2..=3);
        let mut cur = r.clone();
        let mut ops = Vec::new();
        for _ in 0..len {
            let options = candidate_ops(&cur, allowed);
            let Some(op) = options.choose(&mut rng).cloned() else { break };
            match apply_op(&cur, &op) {
                Ok(next) => {
                    cur = next;
                    ops.push(op);
                }
                Err(_) => break,
            }
        }
        if ops.len() >= 2 {
            accept(ops, cur, &mut out);
        }
    }
    out
}
