use super::{AtomExpr, BondExpr, PatternBond, PatternGraph, Primitive, SmartsError, Token};
use crate::molgraph::element;

fn syntax(offset: usize, message: impl Into<String>) -> SmartsError {
    SmartsError::Syntax {
        offset,
        message: message.into(),
    }
}

fn unsupported(offset: usize, name: impl Into<String>) -> SmartsError {
    SmartsError::Unsupported {
        offset,
        name: name.into(),
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    g: PatternGraph,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.s.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn parse(&mut self) -> Result<(), SmartsError> {
        loop {
            self.component()?;
            match self.peek() {
                None => return Ok(()),
                Some(b'.') => self.pos += 1,
                Some(c) => return Err(syntax(self.pos, format!("unexpected '{}'", c as char))),
            }
        }
    }

    fn component(&mut self) -> Result<(), SmartsError> {
        let mut tokens = Vec::new();
        let mut atoms = Vec::new();
        let mut prev: Option<usize> = None;
        let mut branches: Vec<Option<usize>> = Vec::new();
        let mut pending: Option<(BondExpr, usize)> = None;
        let mut rings: Vec<Option<(usize, BondExpr, usize)>> = vec![None; 100];
        let start = self.pos;
        loop {
            let Some(c) = self.peek() else { break };
            let at = self.pos;
            match c {
                b'.' => break,
                b'(' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(syntax(at, "branch without a preceding atom"));
                    }
                    branches.push(prev);
                    tokens.push(Token::Open);
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return Err(syntax(at, "bond before ')'"));
                    }
                    if tokens.last() == Some(&Token::Open) {
                        return Err(syntax(at, "empty branch"));
                    }
                    prev = branches.pop().ok_or_else(|| syntax(at, "unbalanced ')'"))?;
                    tokens.push(Token::Close);
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b'~' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(syntax(at, "misplaced bond"));
                    }
                    let expr = match c {
                        b'-' => BondExpr::Single,
                        b'=' => BondExpr::Double,
                        b'#' => BondExpr::Triple,
                        _ => BondExpr::Any,
                    };
                    pending = Some((expr, at));
                    self.pos += 1;
                }
                b':' | b'/' | b'\\' | b'@' | b'!' | b'&' | b',' | b';' => {
                    let name = match c {
                        b':' => "aromatic bond ':'",
                        b'/' | b'\\' => "directional bond",
                        b'@' => "ring bond '@'",
                        b'!' => "negation '!'",
                        _ => "bond logic",
                    };
                    return Err(unsupported(at, name));
                }
                b'0'..=b'9' | b'%' => {
                    let Some(p) = prev else {
                        return Err(syntax(at, "ring closure without an atom"));
                    };
                    let digit = if c == b'%' {
                        match self.s.get(at + 1..at + 3) {
                            Some([a, b]) if a.is_ascii_digit() && b.is_ascii_digit() => {
                                self.pos += 3;
                                (a - b'0') * 10 + (b - b'0')
                            }
                            _ => return Err(syntax(at, "'%' must be followed by two digits")),
                        }
                    } else {
                        self.pos += 1;
                        c - b'0'
                    };
                    let expr = pending.take().map_or(BondExpr::Unspecified, |(e, _)| e);
                    tokens.push(Token::Ring { digit, expr });
                    match rings[digit as usize].take() {
                        None => rings[digit as usize] = Some((p, expr, at)),
                        Some((q, e2, _)) => {
                            if q == p {
                                return Err(syntax(at, "ring closure to the same atom"));
                            }
                            let expr = match (expr, e2) {
                                (BondExpr::Unspecified, e) | (e, BondExpr::Unspecified) => e,
                                (x, y) if x == y => x,
                                _ => return Err(syntax(at, "conflicting ring-closure bonds")),
                            };
                            self.add_bond(q, p, expr, at)?;
                        }
                    }
                }
                _ => {
                    let idx = self.atom()?;
                    atoms.push(idx);
                    if let Some(p) = prev {
                        let expr = pending.take().map_or(BondExpr::Unspecified, |(e, _)| e);
                        let b = self.add_bond(p, idx, expr, at)?;
                        tokens.push(Token::Bond(b));
                    }
                    tokens.push(Token::Atom(idx));
                    prev = Some(idx);
                }
            }
        }
        if atoms.is_empty() {
            return Err(syntax(start, "empty component"));
        }
        if let Some((_, off)) = pending {
            return Err(syntax(off, "dangling bond"));
        }
        if !branches.is_empty() {
            return Err(syntax(self.pos, "unclosed branch"));
        }
        if let Some((_, _, off)) = rings.iter().flatten().next() {
            return Err(syntax(*off, "unclosed ring"));
        }
        self.g.components.push(atoms);
        self.g.layout.push(tokens);
        Ok(())
    }

    fn add_bond(&mut self, a: usize, b: usize, expr: BondExpr, at: usize) -> Result<usize, SmartsError> {
        if self.g.bond_between(a, b).is_some() {
            return Err(syntax(at, "duplicate bond"));
        }
        self.g.bonds.push(PatternBond { a, b, expr });
        Ok(self.g.bonds.len() - 1)
    }

    fn atom(&mut self) -> Result<usize, SmartsError> {
        let at = self.pos;
        let expr = if self.s[at] == b'[' {
            self.pos += 1;
            self.bracket()?
        } else {
            let p = self.primitive(false)?;
            if matches!(p, Primitive::ImplicitH(_) | Primitive::AtomicNumber(_)) {
                return Err(syntax(at, "primitive must be bracketed"));
            }
            AtomExpr {
                or_terms: vec![p],
                and_terms: Vec::new(),
                map: None,
                bracketed: false,
            }
        };
        self.g.atoms.push(expr);
        Ok(self.g.atoms.len() - 1)
    }

    fn bracket(&mut self) -> Result<AtomExpr, SmartsError> {
        let mut or_terms = vec![self.primitive(true)?];
        let mut and_terms = Vec::new();
        let mut map = None;
        loop {
            let at = self.pos;
            match self.s.get(at) {
                Some(b',') if and_terms.is_empty() => {
                    self.pos += 1;
                    or_terms.push(self.primitive(true)?);
                }
                Some(b';') => {
                    self.pos += 1;
                    and_terms.push(self.primitive(true)?);
                }
                Some(b':') => {
                    self.pos += 1;
                    let d0 = self.pos;
                    while self.s.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                        self.pos += 1;
                    }
                    let text = std::str::from_utf8(&self.s[d0..self.pos]).unwrap_or("");
                    map = Some(text.parse().map_err(|_| syntax(d0, "atom map must be a number"))?);
                    if self.s.get(self.pos) != Some(&b']') {
                        return Err(syntax(self.pos, "expected ']' after atom map"));
                    }
                }
                Some(b']') => {
                    self.pos += 1;
                    return Ok(AtomExpr {
                        or_terms,
                        and_terms,
                        map,
                        bracketed: true,
                    });
                }
                Some(b',') => return Err(syntax(at, "',' after ';' is not supported")),
                Some(b'&') => return Err(unsupported(at, "conjunction '&'")),
                Some(b'!') => return Err(unsupported(at, "negation '!'")),
                Some(b'+' | b'-') => return Err(unsupported(at, "charge")),
                Some(b'@') => return Err(unsupported(at, "chirality")),
                Some(&c @ (b'D' | b'X' | b'R' | b'r' | b'v' | b'x' | b'H' | b'A' | b'a')) => {
                    return Err(unsupported(at, (c as char).to_string()))
                }
                Some(_) => return Err(syntax(at, "expected ',', ';', ':' or ']'")),
                None => return Err(syntax(at, "unterminated bracket atom")),
            }
        }
    }

    fn primitive(&mut self, bracket: bool) -> Result<Primitive, SmartsError> {
        let at = self.pos;
        let Some(&c) = self.s.get(at) else {
            return Err(syntax(at, "expected a primitive"));
        };
        let digits = |p: &mut Self| -> Option<u32> {
            let d0 = p.pos;
            while p.s.get(p.pos).is_some_and(|c| c.is_ascii_digit()) {
                p.pos += 1;
            }
            std::str::from_utf8(&p.s[d0..p.pos]).ok()?.parse().ok()
        };
        match c {
            b'*' => {
                self.pos += 1;
                Ok(Primitive::Wildcard)
            }
            b'#' if bracket => {
                self.pos += 1;
                match digits(self) {
                    Some(z) if (1..=118).contains(&z) => Ok(Primitive::AtomicNumber(z as u8)),
                    _ => Err(syntax(at, "'#' must be followed by an atomic number")),
                }
            }
            b'h' if bracket => {
                self.pos += 1;
                match digits(self) {
                    None => Ok(Primitive::ImplicitH(None)),
                    Some(n) if n <= 9 => Ok(Primitive::ImplicitH(Some(n as u8))),
                    Some(_) => Err(syntax(at, "hydrogen count out of range")),
                }
            }
            b'$' => Err(unsupported(at, "recursive SMARTS '$()'")),
            b'!' => Err(unsupported(at, "negation '!'")),
            b'+' | b'-' if bracket => Err(unsupported(at, "charge")),
            b'D' | b'X' | b'R' | b'r' | b'v' | b'x' | b'H' | b'A' | b'a' if bracket && !self.is_element_here() => {
                Err(unsupported(at, (c as char).to_string()))
            }
            _ if c.is_ascii_lowercase() => {
                let allowed: &[(&str, u8)] = if bracket {
                    &[("se", 34), ("as", 33), ("te", 52), ("b", 5), ("c", 6), ("n", 7), ("o", 8), ("p", 15), ("s", 16)]
                } else {
                    &[("b", 5), ("c", 6), ("n", 7), ("o", 8), ("p", 15), ("s", 16)]
                };
                for (sym, z) in allowed {
                    if self.s[at..].starts_with(sym.as_bytes()) {
                        self.pos += sym.len();
                        return Ok(Primitive::Aromatic(*z));
                    }
                }
                Err(unsupported(at, (c as char).to_string()))
            }
            _ if c.is_ascii_uppercase() => {
                if let Some(&l) = self.s.get(at + 1) {
                    if l.is_ascii_lowercase() && l != b'h' {
                        let two = std::str::from_utf8(&self.s[at..at + 2]).unwrap_or("");
                        if let Some(z) = element::atomic_number(two) {
                            if bracket || matches!(two, "Cl" | "Br") {
                                self.pos += 2;
                                return Ok(Primitive::Aliphatic(z));
                            }
                        }
                    }
                }
                let one = (c as char).to_string();
                match element::atomic_number(&one) {
                    Some(z) if bracket || element::is_organic_subset(z) => {
                        self.pos += 1;
                        Ok(Primitive::Aliphatic(z))
                    }
                    _ => Err(unsupported(at, one)),
                }
            }
            _ => Err(syntax(at, format!("unexpected '{}'", c as char))),
        }
    }

    /// Whether the uppercase letter at the cursor starts a two-letter element
    /// symbol (so `Al`, `As`, `Ar`, ... are not mistaken for primitives).
    fn is_element_here(&self) -> bool {
        match self.s.get(self.pos..self.pos + 2) {
            Some(two) if two[1].is_ascii_lowercase() && two[0].is_ascii_uppercase() => {
                element::atomic_number(std::str::from_utf8(two).unwrap_or("")).is_some()
            }
            _ => false,
        }
    }
}

/// Parse a SMARTS pattern. Whitespace between tokens is ignored.
pub fn parse_smarts(text: &str) -> Result<PatternGraph, SmartsError> {
    if text.trim().is_empty() {
        return Err(SmartsError::Empty);
    }
    if let Some(off) = text.find(">>") {
        return Err(syntax(off, "reaction arrow in a pattern"));
    }
    let mut p = Parser {
        s: text.as_bytes(),
        pos: 0,
        g: PatternGraph {
            atoms: Vec::new(),
            bonds: Vec::new(),
            components: Vec::new(),
            layout: Vec::new(),
        },
    };
    p.parse()?;
    Ok(p.g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reaction_one_lhs() {
        let g = parse_smarts("[#6,#7,#8;h:1].[O,N,F,C:2]").unwrap();
        assert_eq!(g.components.len(), 2);
        assert_eq!(
            g.atoms[0].or_terms,
            vec![Primitive::AtomicNumber(6), Primitive::AtomicNumber(7), Primitive::AtomicNumber(8)]
        );
        assert_eq!(g.atoms[0].and_terms, vec![Primitive::ImplicitH(None)]);
        assert_eq!(g.atoms[0].map, Some(1));
        assert_eq!(g.atoms[1].or_terms.len(), 4);
        assert_eq!(g.atoms[1].map, Some(2));
    }

    #[test]
    fn wildcard_atom() {
        let g = parse_smarts("[*:2]").unwrap();
        assert_eq!(g.atoms.len(), 1);
        assert_eq!(g.atoms[0].or_terms, vec![Primitive::Wildcard]);
        assert_eq!(g.atoms[0].map, Some(2));
    }

    #[test]
    fn ring_closure_between_maps() {
        let g = parse_smarts("[O,N,C:1]1[*:2]~[#6,#7,#8:3]1").unwrap();
        assert_eq!(g.atoms.len(), 3);
        assert_eq!(g.bonds.len(), 3);
        let closure = g.bond_between(0, 2).unwrap();
        assert_eq!(closure.expr, BondExpr::Unspecified);
        assert_eq!(g.bond_between(1, 2).unwrap().expr, BondExpr::Any);
    }

    #[test]
    fn whitespace_is_ignored() {
        let g = parse_smarts("[*:6]~ [#6,#7,#8;h:3]").unwrap();
        assert_eq!(g.to_string(), "[*:6]~[#6,#7,#8;h:3]");
    }

    #[test]
    fn unsupported_primitives_are_named() {
        for (s, name) in [
            ("[C+]", "charge"),
            ("[$(CO)]", "recursive SMARTS '$()'"),
            ("[CD2]", "D"),
            ("[C:1", "syntax"),
            ("[C;D2]", "D"),
            ("[!C]", "negation '!'"),
            ("[C&h]", "conjunction '&'"),
        ] {
            match parse_smarts(s) {
                Err(SmartsError::Unsupported { name: n, .. }) => assert_eq!(n, name, "{s}"),
                Err(SmartsError::Syntax { .. }) if name == "syntax" => {}
                other => panic!("{s}: {other:?}"),
            }
        }
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_smarts(""), Err(SmartsError::Empty)));
        assert!(matches!(parse_smarts("[C"), Err(SmartsError::Syntax { .. })));
        assert!(matches!(parse_smarts("C1CC"), Err(SmartsError::Syntax { offset: 1, .. })));
        assert!(matches!(parse_smarts("C>>C"), Err(SmartsError::Syntax { .. })));
        assert!(matches!(parse_smarts("[C:x]"), Err(SmartsError::Syntax { .. })));
    }
}
