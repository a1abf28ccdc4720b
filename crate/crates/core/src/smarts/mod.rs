//! SMARTS subset used by the reaction templates: bracketed atom expressions
//! with OR lists, `;` conjunctions and atom maps, four bond kinds, ring
//! closures and dot-separated components.

mod matcher;
mod parser;

use std::fmt;

use thiserror::Error;

use crate::molgraph::{element, Atom, BondOrder};

pub use matcher::{match_all, match_pattern, Embedding, MatchMode};
pub use parser::parse_smarts;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmartsError {
    #[error("empty SMARTS")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unsupported SMARTS primitive '{name}' at byte {offset}")]
    Unsupported { offset: usize, name: String },
}

/// A single atom test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Primitive {
    /// `#n`: any atom of that atomic number.
    AtomicNumber(u8),
    /// Uppercase symbol: non-aromatic atom of that element.
    Aliphatic(u8),
    /// Lowercase symbol: aromatic atom of that element.
    Aromatic(u8),
    /// `*`
    Wildcard,
    /// `h` (at least one implicit H) or `hN` (exactly N).
    ImplicitH(Option<u8>),
}

impl Primitive {
    pub fn matches(&self, atom: &Atom) -> bool {
        match *self {
            Primitive::AtomicNumber(z) => atom.element == z,
            Primitive::Aliphatic(z) => atom.element == z && !atom.aromatic,
            Primitive::Aromatic(z) => atom.element == z && atom.aromatic,
            Primitive::Wildcard => true,
            Primitive::ImplicitH(None) => atom.implicit_h >= 1,
            Primitive::ImplicitH(Some(n)) => atom.implicit_h == n,
        }
    }

    /// Atomic number named by an element primitive.
    pub fn element(&self) -> Option<u8> {
        match *self {
            Primitive::AtomicNumber(z) | Primitive::Aliphatic(z) | Primitive::Aromatic(z) => Some(z),
            _ => None,
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Primitive::AtomicNumber(z) => write!(f, "#{z}"),
            Primitive::Aliphatic(z) => f.write_str(element::symbol(z)),
            Primitive::Aromatic(z) => f.write_str(&element::symbol(z).to_ascii_lowercase()),
            Primitive::Wildcard => f.write_str("*"),
            Primitive::ImplicitH(None) => f.write_str("h"),
            Primitive::ImplicitH(Some(n)) => write!(f, "h{n}"),
        }
    }
}

/// `or_terms` joined by `,`, then each `and_terms` entry after a `;`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomExpr {
    pub or_terms: Vec<Primitive>,
    pub and_terms: Vec<Primitive>,
    pub map: Option<u32>,
    /// Written inside brackets (bare atoms are allowed outside reactions).
    pub bracketed: bool,
}

impl AtomExpr {
    pub fn matches(&self, atom: &Atom) -> bool {
        self.or_terms.iter().any(|p| p.matches(atom)) && self.and_terms.iter().all(|p| p.matches(atom))
    }

    /// The `h` constraint among the AND terms, if any.
    pub fn hydrogen_constraint(&self) -> Option<Primitive> {
        self.and_terms
            .iter()
            .chain(self.or_terms.iter().filter(|_| self.or_terms.len() == 1))
            .copied()
            .find(|p| matches!(p, Primitive::ImplicitH(_)))
    }
}

impl fmt::Display for AtomExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.bracketed {
            return write!(f, "{}", self.or_terms[0]);
        }
        f.write_str("[")?;
        for (i, p) in self.or_terms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        for p in &self.and_terms {
            write!(f, ";{p}")?;
        }
        if let Some(m) = self.map {
            write!(f, ":{m}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondExpr {
    /// No symbol: single or aromatic.
    Unspecified,
    Single,
    Double,
    Triple,
    /// `~`
    Any,
}

impl BondExpr {
    pub fn matches(self, order: BondOrder) -> bool {
        match self {
            BondExpr::Unspecified => matches!(order, BondOrder::Single | BondOrder::Aromatic),
            BondExpr::Single => order == BondOrder::Single,
            BondExpr::Double => order == BondOrder::Double,
            BondExpr::Triple => order == BondOrder::Triple,
            BondExpr::Any => true,
        }
    }

    /// The order an explicit expression writes, if any.
    pub fn explicit_order(self) -> Option<BondOrder> {
        match self {
            BondExpr::Single => Some(BondOrder::Single),
            BondExpr::Double => Some(BondOrder::Double),
            BondExpr::Triple => Some(BondOrder::Triple),
            BondExpr::Unspecified | BondExpr::Any => None,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BondExpr::Unspecified => "",
            BondExpr::Single => "-",
            BondExpr::Double => "=",
            BondExpr::Triple => "#",
            BondExpr::Any => "~",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PatternBond {
    pub a: usize,
    pub b: usize,
    pub expr: BondExpr,
}

/// Written form of one component, kept so that serialization reproduces
/// the input layout (branches, ring-closure digits) exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    Atom(usize),
    /// Chain bond written before the next atom.
    Bond(usize),
    /// Ring-closure digit with the bond symbol written at this position.
    Ring { digit: u8, expr: BondExpr },
    Open,
    Close,
}

/// Parsed SMARTS: atoms in text order, bonds, and per-component layout.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternGraph {
    pub atoms: Vec<AtomExpr>,
    pub bonds: Vec<PatternBond>,
    /// Atom indices of each dot-separated component.
    pub components: Vec<Vec<usize>>,
    layout: Vec<Vec<Token>>,
}

impl PatternGraph {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn component_of(&self, atom: usize) -> usize {
        self.components
            .iter()
            .position(|c| c.contains(&atom))
            .expect("every atom belongs to a component")
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&PatternBond> {
        self.bonds
            .iter()
            .find(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a))
    }

    /// Pattern atom carrying atom map `map`.
    pub fn atom_with_map(&self, map: u32) -> Option<usize> {
        self.atoms.iter().position(|a| a.map == Some(map))
    }

    /// Same pattern with components written in the given order.
    pub fn with_component_order(&self, order: &[usize]) -> PatternGraph {
        let mut g = self.clone();
        g.components = order.iter().map(|&i| self.components[i].clone()).collect();
        g.layout = order.iter().map(|&i| self.layout[i].clone()).collect();
        g
    }
}

impl fmt::Display for PatternGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (ci, tokens) in self.layout.iter().enumerate() {
            if ci > 0 {
                f.write_str(".")?;
            }
            for t in tokens {
                match t {
                    Token::Atom(i) => write!(f, "{}", self.atoms[*i])?,
                    Token::Bond(b) => f.write_str(self.bonds[*b].expr.symbol())?,
                    Token::Ring { digit, expr } => {
                        f.write_str(expr.symbol())?;
                        if *digit < 10 {
                            write!(f, "{digit}")?;
                        } else {
                            write!(f, "%{digit:02}")?;
                        }
                    }
                    Token::Open => f.write_str("(")?,
                    Token::Close => f.write_str(")")?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_strings_round_trip() {
        for s in [
            "[#6,#7,#8;h:1].[O,N,F,C:2]",
            "[O,N,C:1]1[*:2]~[#6,#7,#8:3]1",
            "[C:1]#[N,C:2]",
            "[c;h2:1]-[n:2]",
            "CC(=O)[#8]",
            "C%12CC%12",
        ] {
            assert_eq!(parse_smarts(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn primitive_semantics() {
        let mut c = Atom::new(6);
        c.implicit_h = 2;
        assert!(Primitive::Aliphatic(6).matches(&c));
        assert!(!Primitive::Aromatic(6).matches(&c));
        assert!(Primitive::AtomicNumber(6).matches(&c));
        assert!(Primitive::ImplicitH(None).matches(&c));
        assert!(Primitive::ImplicitH(Some(2)).matches(&c));
        assert!(!Primitive::ImplicitH(Some(1)).matches(&c));
        c.aromatic = true;
        assert!(!Primitive::Aliphatic(6).matches(&c));
        assert!(Primitive::Aromatic(6).matches(&c));
    }

    #[test]
    fn bond_semantics() {
        assert!(BondExpr::Unspecified.matches(BondOrder::Aromatic));
        assert!(BondExpr::Unspecified.matches(BondOrder::Single));
        assert!(!BondExpr::Unspecified.matches(BondOrder::Double));
        assert!(!BondExpr::Single.matches(BondOrder::Aromatic));
        assert!(BondExpr::Any.matches(BondOrder::Triple));
    }
}
