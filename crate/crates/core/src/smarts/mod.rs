//! A SMARTS subset sufficient for the descriptor rule files: atom primitives
//! `* a A <element> #n H D X v R r x`, charges, isotopes, chirality (ignored),
//! recursive `$()`, the logical operators `! & , ;`, bond primitives
//! `- = # : ~ @`, branches, ring closures and `.`-separated components.

mod matcher;

pub use matcher::MatchContext;

use crate::molgraph::Element;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("SMARTS error at position {position}: {message}")]
pub struct SmartsError {
    pub message: String,
    pub position: usize,
}

#[derive(Debug, Clone)]
pub(crate) enum Expr<P> {
    Prim(P),
    Not(Box<Expr<P>>),
    And(Vec<Expr<P>>),
    Or(Vec<Expr<P>>),
}

impl<P> Expr<P> {
    pub(crate) fn eval(&self, f: &mut impl FnMut(&P) -> bool) -> bool {
        match self {
            Expr::Prim(p) => f(p),
            Expr::Not(e) => !e.eval(f),
            Expr::And(es) => es.iter().all(|e| e.eval(f)),
            Expr::Or(es) => es.iter().any(|e| e.eval(f)),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum AtomPrim {
    True,
    Aromatic,
    Aliphatic,
    Element { z: u8, aromatic: bool },
    AtomicNumber(u8),
    TotalH(u8),
    Degree(u8),
    Connectivity(u8),
    Valence(u8),
    /// Number of smallest-set rings containing the atom; `None` = any ring.
    RingCount(Option<u8>),
    /// Size of the smallest ring containing the atom; `None` = any ring.
    RingSize(Option<u8>),
    RingBonds(Option<u8>),
    Charge(i8),
    Isotope,
    Recursive(Arc<Pattern>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BondPrim {
    Single,
    Double,
    Triple,
    Aromatic,
    Any,
    Ring,
}

#[derive(Debug, Clone)]
pub(crate) struct PatternBond {
    pub a: usize,
    pub b: usize,
    /// `None` is the implicit single-or-aromatic bond.
    pub expr: Option<Expr<BondPrim>>,
}

/// A compiled SMARTS query.
#[derive(Debug, Clone)]
pub struct Pattern {
    source: String,
    pub(crate) id: usize,
    pub(crate) atoms: Vec<Expr<AtomPrim>>,
    pub(crate) bonds: Vec<PatternBond>,
    pub(crate) plan: matcher::Plan,
}

static NEXT_ID: AtomicUsize = AtomicUsize::new(0);

impl Pattern {
    pub fn parse(text: &str) -> Result<Pattern, SmartsError> {
        let mut p = Parser { s: text.as_bytes(), i: 0 };
        let pattern = p.pattern()?;
        if p.i != p.s.len() {
            return Err(p.err("trailing characters"));
        }
        Ok(pattern)
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.source)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

const CHIRAL_CLASSES: [&[u8]; 5] = [b"TH", b"AL", b"SP", b"TB", b"OH"];

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> SmartsError {
        SmartsError { message: message.to_string(), position: self.i }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.i).copied()
    }

    fn peek_at(&self, k: usize) -> Option<u8> {
        self.s.get(self.i + k).copied()
    }

    fn digits(&mut self) -> Option<u32> {
        let start = self.i;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.i += 1;
        }
        if self.i == start {
            return None;
        }
        std::str::from_utf8(&self.s[start..self.i]).ok()?.parse().ok()
    }

    fn small_digits(&mut self) -> Result<Option<u8>, SmartsError> {
        match self.digits() {
            None => Ok(None),
            Some(n) if n <= 255 => Ok(Some(n as u8)),
            Some(_) => Err(self.err("count out of range")),
        }
    }

    /// Parses a whole (sub)pattern, stopping at end of input or an
    /// unbalanced `)` that closes a recursive expression.
    fn pattern(&mut self) -> Result<Pattern, SmartsError> {
        let start = self.i;
        let mut atoms: Vec<Expr<AtomPrim>> = Vec::new();
        let mut bonds: Vec<PatternBond> = Vec::new();
        let mut prev: Option<usize> = None;
        let mut pending: Option<Expr<BondPrim>> = None;
        let mut branches: Vec<usize> = Vec::new();
        let mut rings: std::collections::HashMap<u32, (usize, Option<Expr<BondPrim>>)> = Default::default();

        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(self.err("misplaced '('"));
                    }
                    branches.push(prev.unwrap());
                    self.i += 1;
                }
                b')' => {
                    let Some(p) = branches.pop() else { break };
                    if pending.is_some() {
                        return Err(self.err("bond without atom"));
                    }
                    prev = Some(p);
                    self.i += 1;
                }
                b'.' => {
                    if pending.is_some() || !branches.is_empty() {
                        return Err(self.err("misplaced '.'"));
                    }
                    prev = None;
                    self.i += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(p) = prev else { return Err(self.err("ring closure without atom")) };
                    let n = if c == b'%' {
                        self.i += 1;
                        let a = self.peek().filter(u8::is_ascii_digit);
                        let b = self.peek_at(1).filter(u8::is_ascii_digit);
                        match (a, b) {
                            (Some(a), Some(b)) => {
                                self.i += 2;
                                ((a - b'0') * 10 + (b - b'0')) as u32
                            }
                            _ => return Err(self.err("bad %nn ring closure")),
                        }
                    } else {
                        self.i += 1;
                        (c - b'0') as u32
                    };
                    if let Some((other, expr)) = rings.remove(&n) {
                        let expr = pending.take().or(expr);
                        bonds.push(PatternBond { a: other, b: p, expr });
                    } else {
                        rings.insert(n, (p, pending.take()));
                    }
                }
                b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'!' | b'&' | b',' | b';' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(self.err("misplaced bond"));
                    }
                    pending = Some(self.bond_low()?);
                }
                _ => {
                    let atom = if c == b'[' { self.bracket_atom()? } else { self.bare_atom()? };
                    atoms.push(atom);
                    let idx = atoms.len() - 1;
                    if let Some(p) = prev {
                        bonds.push(PatternBond { a: p, b: idx, expr: pending.take() });
                    }
                    prev = Some(idx);
                }
            }
        }
        if !branches.is_empty() {
            return Err(self.err("unclosed branch"));
        }
        if !rings.is_empty() {
            return Err(self.err("unclosed ring closure"));
        }
        if pending.is_some() {
            return Err(self.err("bond without atom"));
        }
        if atoms.is_empty() {
            return Err(self.err("empty pattern"));
        }
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (bi, b) in bonds.iter().enumerate() {
            if b.a == b.b {
                return Err(self.err("ring closure on the same atom"));
            }
            adjacency[b.a].push((b.b, bi));
            adjacency[b.b].push((b.a, bi));
        }
        let plan = matcher::Plan::new(&adjacency);
        Ok(Pattern {
            source: String::from_utf8_lossy(&self.s[start..self.i]).into_owned(),
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            atoms,
            bonds,
            plan,
        })
    }

    fn bare_atom(&mut self) -> Result<Expr<AtomPrim>, SmartsError> {
        let c = self.peek().unwrap();
        let two = self.peek_at(1);
        let (prim, width) = match (c, two) {
            (b'*', _) => (AtomPrim::True, 1),
            (b'a', _) => (AtomPrim::Aromatic, 1),
            (b'A', _) => (AtomPrim::Aliphatic, 1),
            (b'C', Some(b'l')) => (AtomPrim::Element { z: 17, aromatic: false }, 2),
            (b'B', Some(b'r')) => (AtomPrim::Element { z: 35, aromatic: false }, 2),
            (b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I', _) => {
                let z = Element::from_symbol(&(c as char).to_string()).unwrap().atomic_number();
                (AtomPrim::Element { z, aromatic: false }, 1)
            }
            (b'b' | b'c' | b'n' | b'o' | b'p' | b's', _) => {
                let z = Element::from_symbol(&(c.to_ascii_uppercase() as char).to_string())
                    .unwrap()
                    .atomic_number();
                (AtomPrim::Element { z, aromatic: true }, 1)
            }
            _ => return Err(self.err("unexpected character")),
        };
        self.i += width;
        Ok(Expr::Prim(prim))
    }

    fn bracket_atom(&mut self) -> Result<Expr<AtomPrim>, SmartsError> {
        self.i += 1;
        let bracket_start = self.i;
        let expr = self.atom_low(bracket_start)?;
        if self.peek() != Some(b']') {
            return Err(self.err("expected ']'"));
        }
        self.i += 1;
        Ok(expr)
    }

    fn atom_low(&mut self, bs: usize) -> Result<Expr<AtomPrim>, SmartsError> {
        let mut parts = vec![self.atom_or(bs)?];
        while self.peek() == Some(b';') {
            self.i += 1;
            parts.push(self.atom_or(bs)?);
        }
        Ok(collapse(parts, Expr::And))
    }

    fn atom_or(&mut self, bs: usize) -> Result<Expr<AtomPrim>, SmartsError> {
        let mut parts = vec![self.atom_high(bs)?];
        while self.peek() == Some(b',') {
            self.i += 1;
            parts.push(self.atom_high(bs)?);
        }
        Ok(collapse(parts, Expr::Or))
    }

    fn atom_high(&mut self, bs: usize) -> Result<Expr<AtomPrim>, SmartsError> {
        let mut parts = vec![self.atom_unary(bs)?];
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.i += 1;
                    parts.push(self.atom_unary(bs)?);
                }
                Some(b']' | b',' | b';' | b')') | None => break,
                Some(_) => parts.push(self.atom_unary(bs)?),
            }
        }
        Ok(collapse(parts, Expr::And))
    }

    fn atom_unary(&mut self, bs: usize) -> Result<Expr<AtomPrim>, SmartsError> {
        if self.peek() == Some(b'!') {
            self.i += 1;
            return Ok(Expr::Not(Box::new(self.atom_unary(bs)?)));
        }
        self.atom_primitive(bs).map(Expr::Prim)
    }

    fn atom_primitive(&mut self, bs: usize) -> Result<AtomPrim, SmartsError> {
        let Some(c) = self.peek() else { return Err(self.err("unterminated bracket atom")) };
        let next = self.peek_at(1);
        // element symbols first, two letters before one
        if c.is_ascii_uppercase() {
            if let Some(n) = next.filter(u8::is_ascii_lowercase) {
                let sym = format!("{}{}", c as char, n as char);
                if let Some(e) = Element::from_symbol(&sym) {
                    self.i += 2;
                    return Ok(AtomPrim::Element { z: e.atomic_number(), aromatic: false });
                }
            }
        }
        if c.is_ascii_lowercase() {
            if let Some(n) = next.filter(u8::is_ascii_lowercase) {
                let pair = [c, n];
                if matches!(&pair, b"se" | b"as" | b"te") {
                    let sym = format!("{}{}", c.to_ascii_uppercase() as char, n as char);
                    let z = Element::from_symbol(&sym).unwrap().atomic_number();
                    self.i += 2;
                    return Ok(AtomPrim::Element { z, aromatic: true });
                }
            }
        }
        match c {
            b'*' => {
                self.i += 1;
                Ok(AtomPrim::True)
            }
            b'a' => {
                self.i += 1;
                Ok(AtomPrim::Aromatic)
            }
            b'A' => {
                self.i += 1;
                Ok(AtomPrim::Aliphatic)
            }
            b'#' => {
                self.i += 1;
                match self.digits() {
                    Some(z) if z <= 255 => Ok(AtomPrim::AtomicNumber(z as u8)),
                    _ => Err(self.err("expected atomic number")),
                }
            }
            b'H' if self.i == bs && matches!(next, Some(b']' | b'+' | b'-')) => {
                self.i += 1;
                Ok(AtomPrim::Element { z: 1, aromatic: false })
            }
            b'H' | b'h' => {
                self.i += 1;
                Ok(AtomPrim::TotalH(self.small_digits()?.unwrap_or(1)))
            }
            b'D' => {
                self.i += 1;
                Ok(AtomPrim::Degree(self.small_digits()?.unwrap_or(1)))
            }
            b'X' => {
                self.i += 1;
                Ok(AtomPrim::Connectivity(self.small_digits()?.unwrap_or(1)))
            }
            b'v' => {
                self.i += 1;
                Ok(AtomPrim::Valence(self.small_digits()?.unwrap_or(1)))
            }
            b'R' => {
                self.i += 1;
                Ok(AtomPrim::RingCount(self.small_digits()?))
            }
            b'r' => {
                self.i += 1;
                Ok(AtomPrim::RingSize(self.small_digits()?))
            }
            b'x' => {
                self.i += 1;
                Ok(AtomPrim::RingBonds(self.small_digits()?))
            }
            b'+' | b'-' => {
                self.i += 1;
                let sign: i32 = if c == b'+' { 1 } else { -1 };
                let magnitude = match self.digits() {
                    Some(n) => n as i32,
                    None => {
                        let mut m = 1;
                        while self.peek() == Some(c) {
                            m += 1;
                            self.i += 1;
                        }
                        m
                    }
                };
                Ok(AtomPrim::Charge((sign * magnitude).clamp(-8, 8) as i8))
            }
            b'@' => {
                self.i += 1;
                if self.peek() == Some(b'@') {
                    self.i += 1;
                }
                let rest = &self.s[self.i..];
                if CHIRAL_CLASSES.iter().any(|c| rest.starts_with(c)) {
                    self.i += 2;
                    self.digits();
                }
                if self.peek() == Some(b'?') {
                    self.i += 1;
                }
                Ok(AtomPrim::True)
            }
            b'$' => {
                if next != Some(b'(') {
                    return Err(self.err("expected '(' after '$'"));
                }
                self.i += 2;
                let sub = self.pattern()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("unclosed recursive expression"));
                }
                self.i += 1;
                Ok(AtomPrim::Recursive(Arc::new(sub)))
            }
            b'0'..=b'9' => {
                self.digits();
                Ok(AtomPrim::Isotope)
            }
            _ if c.is_ascii_uppercase() => {
                let e = Element::from_symbol(&(c as char).to_string()).ok_or_else(|| self.err("unknown element"))?;
                self.i += 1;
                Ok(AtomPrim::Element { z: e.atomic_number(), aromatic: false })
            }
            b'b' | b'c' | b'n' | b'o' | b'p' | b's' => {
                let e = Element::from_symbol(&(c.to_ascii_uppercase() as char).to_string()).unwrap();
                self.i += 1;
                Ok(AtomPrim::Element { z: e.atomic_number(), aromatic: true })
            }
            _ => Err(self.err("unexpected character in bracket atom")),
        }
    }

    fn bond_low(&mut self) -> Result<Expr<BondPrim>, SmartsError> {
        let mut parts = vec![self.bond_or()?];
        while self.peek() == Some(b';') {
            self.i += 1;
            parts.push(self.bond_or()?);
        }
        Ok(collapse(parts, Expr::And))
    }

    fn bond_or(&mut self) -> Result<Expr<BondPrim>, SmartsError> {
        let mut parts = vec![self.bond_high()?];
        while self.peek() == Some(b',') {
            self.i += 1;
            parts.push(self.bond_high()?);
        }
        Ok(collapse(parts, Expr::Or))
    }

    fn bond_high(&mut self) -> Result<Expr<BondPrim>, SmartsError> {
        let mut parts = vec![self.bond_unary()?];
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.i += 1;
                    parts.push(self.bond_unary()?);
                }
                Some(b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'!') => parts.push(self.bond_unary()?),
                _ => break,
            }
        }
        Ok(collapse(parts, Expr::And))
    }

    fn bond_unary(&mut self) -> Result<Expr<BondPrim>, SmartsError> {
        let prim = match self.peek() {
            Some(b'!') => {
                self.i += 1;
                return Ok(Expr::Not(Box::new(self.bond_unary()?)));
            }
            Some(b'-') => BondPrim::Single,
            Some(b'=') => BondPrim::Double,
            Some(b'#') => BondPrim::Triple,
            Some(b':') => BondPrim::Aromatic,
            Some(b'~') => BondPrim::Any,
            Some(b'@') => BondPrim::Ring,
            _ => return Err(self.err("expected bond primitive")),
        };
        self.i += 1;
        Ok(Expr::Prim(prim))
    }
}

fn collapse<P>(mut parts: Vec<Expr<P>>, wrap: fn(Vec<Expr<P>>) -> Expr<P>) -> Expr<P> {
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        wrap(parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_descriptor_rule_shapes() {
        for s in [
            "[CH4]",
            "[CH2X4]([N,O,P,S,F,Cl,Br,I])[A;!#1]",
            "[c](:a)(:a)-a",
            "[$([N;!H0;v3]),$([N;!H0;+1;v4]),$([O,S;H1;+0]),$([n;H1;+0])]",
            "C1NC(=O)NC(=O)1",
            "[#7,O,S!D1]-!@[CD3]=[N,O,S]",
            "C(=O)O[C,H1].C(=O)O[C,H1]",
            "[OX1;-,-2,-3][#7]",
            "[O;-0]=[#16;-0]",
            "[SiR0,CR0](c1ccccc1)(c2ccccc2)(c3ccccc3)",
            "C=!@CC=[O,S]",
            "[15N]",
            "a1aa2a3a(a1)A=AA=A3=AA=A2",
            "[$([A;R][!a])]",
        ] {
            Pattern::parse(s).unwrap_or_else(|e| panic!("{s}: {e}"));
        }
    }

    #[test]
    fn rejects_malformed_patterns() {
        for s in ["", "[C", "C(", "C1CC", "C=", "[$(C]", "C)", "[Q]"] {
            assert!(Pattern::parse(s).is_err(), "{s}");
        }
    }

    #[test]
    fn hydrogen_as_element_only_when_alone() {
        let p = Pattern::parse("[H]").unwrap();
        assert!(matches!(p.atoms[0], Expr::Prim(AtomPrim::Element { z: 1, .. })));
        let p = Pattern::parse("[CH2]").unwrap();
        match &p.atoms[0] {
            Expr::And(parts) => assert!(matches!(parts[1], Expr::Prim(AtomPrim::TotalH(2)))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence_of_operators() {
        // [C,N;!H0] = (C or N) and not H0
        let p = Pattern::parse("[C,N;!H0]").unwrap();
        match &p.atoms[0] {
            Expr::And(parts) => {
                assert!(matches!(parts[0], Expr::Or(_)));
                assert!(matches!(parts[1], Expr::Not(_)));
            }
            other => panic!("{other:?}"),
        }
    }
}
