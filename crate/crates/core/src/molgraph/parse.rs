//! SMILES grammar subset: organic-subset and bracket atoms, branches,
//! ring closures (digits and `%nn`) and the bond symbols `- = # :`.

use super::aromatic::aromatize;
use super::valence::implied_hydrogens;
use super::{allowed_valences, Atom, Bond, BondOrder, Element, MolError, Molecule, ParseErrorKind};
use std::collections::{BTreeMap, HashSet};

/// Cap applied to raw corpus input during dataset preparation.
pub const DEFAULT_MAX_INPUT_LEN: usize = 200;

/// Upper bound accepted by [`parse_smiles`].
const HARD_MAX_LEN: usize = 4096;

pub fn parse_smiles(text: &str) -> Result<Molecule, MolError> {
    parse_smiles_with_cap(text, HARD_MAX_LEN)
}

pub fn parse_smiles_with_cap(text: &str, cap: usize) -> Result<Molecule, MolError> {
    if text.is_empty() {
        return Err(MolError::parse(ParseErrorKind::Empty, 0));
    }
    if text.len() > cap {
        return Err(MolError::parse(ParseErrorKind::TooLong { len: text.len(), cap }, cap));
    }
    let raw = Reader::new(text).read()?;
    raw.finish()
}

struct PendingBond {
    a: usize,
    b: usize,
    order: Option<BondOrder>,
}

struct RawMolecule {
    atoms: Vec<Atom>,
    positions: Vec<usize>,
    bonds: Vec<PendingBond>,
}

struct Reader<'a> {
    s: &'a [u8],
    i: usize,
    atoms: Vec<Atom>,
    positions: Vec<usize>,
    bonds: Vec<PendingBond>,
    pairs: HashSet<(usize, usize)>,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            s: text.as_bytes(),
            i: 0,
            atoms: Vec::new(),
            positions: Vec::new(),
            bonds: Vec::new(),
            pairs: HashSet::new(),
        }
    }

    fn err(&self, kind: ParseErrorKind) -> MolError {
        MolError::parse(kind, self.i)
    }

    fn unexpected(&self) -> MolError {
        let c = self.s.get(self.i).map(|&b| b as char).unwrap_or('\0');
        self.err(ParseErrorKind::UnexpectedChar(c))
    }

    fn add_bond(&mut self, a: usize, b: usize, order: Option<BondOrder>) -> Result<(), MolError> {
        if a == b {
            return Err(self.err(ParseErrorKind::SelfLoop));
        }
        if !self.pairs.insert((a.min(b), a.max(b))) {
            return Err(self.err(ParseErrorKind::DuplicateBond));
        }
        self.bonds.push(PendingBond { a, b, order });
        Ok(())
    }

    fn read(mut self) -> Result<RawMolecule, MolError> {
        let mut prev: Option<usize> = None;
        let mut pending: Option<BondOrder> = None;
        let mut branches: Vec<usize> = Vec::new();
        let mut open_rings: BTreeMap<u32, (usize, Option<BondOrder>)> = BTreeMap::new();

        while self.i < self.s.len() {
            let c = self.s[self.i];
            match c {
                b'(' => {
                    let Some(p) = prev else { return Err(self.unexpected()) };
                    if pending.is_some() {
                        return Err(self.err(ParseErrorKind::DanglingBond));
                    }
                    branches.push(p);
                    self.i += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return Err(self.err(ParseErrorKind::DanglingBond));
                    }
                    prev = Some(branches.pop().ok_or_else(|| self.err(ParseErrorKind::UnmatchedParen))?);
                    self.i += 1;
                }
                b'.' => {
                    if pending.is_some() {
                        return Err(self.err(ParseErrorKind::DanglingBond));
                    }
                    if !branches.is_empty() || prev.is_none() {
                        return Err(self.unexpected());
                    }
                    prev = None;
                    self.i += 1;
                }
                b'-' | b'=' | b'#' | b':' => {
                    if pending.is_some() || prev.is_none() {
                        return Err(self.unexpected());
                    }
                    pending = Some(match c {
                        b'-' => BondOrder::Single,
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        _ => BondOrder::Aromatic,
                    });
                    self.i += 1;
                }
                b'/' | b'\\' => return Err(self.err(ParseErrorKind::Stereo)),
                b'0'..=b'9' | b'%' => {
                    let Some(p) = prev else { return Err(self.unexpected()) };
                    let number = self.ring_number()?;
                    if let Some((other, order)) = open_rings.remove(&number) {
                        let order = match (order, pending.take()) {
                            (Some(x), Some(y)) if x != y => {
                                return Err(self.err(ParseErrorKind::RingBondConflict(number)))
                            }
                            (x, y) => x.or(y),
                        };
                        self.add_bond(other, p, order)?;
                    } else {
                        open_rings.insert(number, (p, pending.take()));
                    }
                }
                b'[' => {
                    let idx = self.bracket_atom()?;
                    self.attach(idx, &mut prev, &mut pending)?;
                }
                _ if c.is_ascii_alphabetic() || c == b'*' => {
                    let idx = self.organic_atom()?;
                    self.attach(idx, &mut prev, &mut pending)?;
                }
                _ => return Err(self.unexpected()),
            }
        }
        if pending.is_some() {
            return Err(self.err(ParseErrorKind::DanglingBond));
        }
        if !branches.is_empty() {
            return Err(self.err(ParseErrorKind::UnclosedBranch));
        }
        if let Some((&n, _)) = open_rings.iter().next() {
            return Err(self.err(ParseErrorKind::UnclosedRing(n)));
        }
        Ok(RawMolecule { atoms: self.atoms, positions: self.positions, bonds: self.bonds })
    }

    fn attach(
        &mut self,
        idx: usize,
        prev: &mut Option<usize>,
        pending: &mut Option<BondOrder>,
    ) -> Result<(), MolError> {
        if let Some(p) = *prev {
            self.add_bond(p, idx, pending.take())?;
        }
        *prev = Some(idx);
        Ok(())
    }

    fn ring_number(&mut self) -> Result<u32, MolError> {
        if self.s[self.i] == b'%' {
            let digits = self.s.get(self.i + 1..self.i + 3).filter(|d| d.iter().all(u8::is_ascii_digit));
            let Some(d) = digits else {
                return Err(self.unexpected());
            };
            let n = ((d[0] - b'0') * 10 + (d[1] - b'0')) as u32;
            self.i += 3;
            Ok(n)
        } else {
            let n = (self.s[self.i] - b'0') as u32;
            self.i += 1;
            Ok(n)
        }
    }

    fn push_atom(&mut self, atom: Atom, position: usize) -> usize {
        self.atoms.push(atom);
        self.positions.push(position);
        self.atoms.len() - 1
    }

    fn organic_atom(&mut self) -> Result<usize, MolError> {
        let start = self.i;
        let c = self.s[self.i];
        let next = self.s.get(self.i + 1).copied();
        let (element, aromatic, width) = match (c, next) {
            (b'C', Some(b'l')) => (Element::CL, false, 2),
            (b'B', Some(b'r')) => (Element::BR, false, 2),
            (b'B', _) => (Element::B, false, 1),
            (b'C', _) => (Element::C, false, 1),
            (b'N', _) => (Element::N, false, 1),
            (b'O', _) => (Element::O, false, 1),
            (b'P', _) => (Element::P, false, 1),
            (b'S', _) => (Element::S, false, 1),
            (b'F', _) => (Element::F, false, 1),
            (b'I', _) => (Element::I, false, 1),
            (b'b', _) => (Element::B, true, 1),
            (b'c', _) => (Element::C, true, 1),
            (b'n', _) => (Element::N, true, 1),
            (b'o', _) => (Element::O, true, 1),
            (b'p', _) => (Element::P, true, 1),
            (b's', _) => (Element::S, true, 1),
            _ => {
                let mut sym = (c as char).to_string();
                if let Some(n) = next.filter(u8::is_ascii_lowercase) {
                    sym.push(n as char);
                }
                return Err(self.err(ParseErrorKind::UnsupportedElement(sym)));
            }
        };
        self.i += width;
        let mut atom = Atom::new(element);
        atom.aromatic = aromatic;
        Ok(self.push_atom(atom, start))
    }

    fn bracket_atom(&mut self) -> Result<usize, MolError> {
        let start = self.i;
        let end = self.s[start..]
            .iter()
            .position(|&b| b == b']')
            .map(|p| start + p)
            .ok_or_else(|| self.err(ParseErrorKind::UnclosedBracket))?;
        self.i += 1;
        if self.s[self.i].is_ascii_digit() {
            return Err(self.err(ParseErrorKind::Isotope));
        }
        let (element, aromatic) = self.bracket_symbol(end)?;
        let mut atom = Atom::new(element);
        atom.aromatic = aromatic;
        let mut h = 0u8;
        while self.i < end {
            match self.s[self.i] {
                b'@' => return Err(self.err(ParseErrorKind::Stereo)),
                b'H' => {
                    self.i += 1;
                    h = self.read_digits(end).unwrap_or(1) as u8;
                }
                sign @ (b'+' | b'-') => {
                    self.i += 1;
                    let mut magnitude = 1i32;
                    if let Some(n) = self.read_digits(end) {
                        magnitude = n as i32;
                    } else {
                        while self.i < end && self.s[self.i] == sign {
                            magnitude += 1;
                            self.i += 1;
                        }
                    }
                    let value = if sign == b'+' { magnitude } else { -magnitude };
                    atom.formal_charge = value.clamp(-8, 8) as i8;
                }
                b':' => {
                    self.i += 1;
                    if self.read_digits(end).is_none() {
                        return Err(self.unexpected());
                    }
                }
                _ => return Err(self.unexpected()),
            }
        }
        self.i = end + 1;
        atom.explicit_h = Some(h);
        Ok(self.push_atom(atom, start))
    }

    fn bracket_symbol(&mut self, end: usize) -> Result<(Element, bool), MolError> {
        let c = self.s[self.i];
        if c.is_ascii_uppercase() {
            if self.i + 1 < end && self.s[self.i + 1].is_ascii_lowercase() {
                let two = std::str::from_utf8(&self.s[self.i..self.i + 2]).unwrap_or("");
                if let Some(e) = Element::from_symbol(two) {
                    self.i += 2;
                    return Ok((e, false));
                }
            }
            let one = (c as char).to_string();
            let e = Element::from_symbol(&one)
                .ok_or_else(|| self.err(ParseErrorKind::UnsupportedElement(one.clone())))?;
            self.i += 1;
            return Ok((e, false));
        }
        if c.is_ascii_lowercase() {
            for width in [2, 1] {
                if self.i + width > end {
                    continue;
                }
                let sym = std::str::from_utf8(&self.s[self.i..self.i + width]).unwrap_or("");
                let mut cap = sym.to_string();
                cap[..1].make_ascii_uppercase();
                if let Some(e) = Element::from_symbol(&cap).filter(|e| e.can_be_aromatic()) {
                    self.i += width;
                    return Ok((e, true));
                }
            }
            return Err(self.err(ParseErrorKind::UnsupportedElement((c as char).to_string())));
        }
        if c == b'*' {
            return Err(self.err(ParseErrorKind::UnsupportedElement("*".into())));
        }
        Err(self.unexpected())
    }

    fn read_digits(&mut self, end: usize) -> Option<u32> {
        let start = self.i;
        while self.i < end && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        (self.i > start).then(|| {
            std::str::from_utf8(&self.s[start..self.i])
                .unwrap()
                .parse::<u32>()
                .unwrap_or(u32::MAX)
                .min(64)
        })
    }
}

impl RawMolecule {
    fn finish(mut self) -> Result<Molecule, MolError> {
        self.fold_explicit_hydrogens();

        let bonds: Vec<Bond> = self
            .bonds
            .iter()
            .map(|p| {
                let both_aromatic = self.atoms[p.a].aromatic && self.atoms[p.b].aromatic;
                let order = p.order.unwrap_or(if both_aromatic { BondOrder::Aromatic } else { BondOrder::Single });
                Bond { a: p.a, b: p.b, order, in_ring: false }
            })
            .collect();
        let positions = self.positions;
        let mut mol = Molecule::from_parts(self.atoms, bonds)?;

        for bond in mol.bonds.iter_mut() {
            if bond.order == BondOrder::Aromatic && !bond.in_ring {
                bond.order = BondOrder::Single;
            }
        }
        for (i, atom) in mol.atoms.iter().enumerate() {
            if atom.aromatic && !atom.in_ring {
                return Err(MolError::parse(ParseErrorKind::AromaticOutsideRing, positions[i]));
            }
        }
        for bond in &mol.bonds {
            if bond.order == BondOrder::Aromatic && !(mol.atoms[bond.a].aromatic && mol.atoms[bond.b].aromatic) {
                return Err(MolError::parse(ParseErrorKind::Valence, positions[bond.a.max(bond.b)]));
            }
        }

        for i in 0..mol.atom_count() {
            let h = match mol.atoms[i].explicit_h {
                Some(h) => {
                    let atom = &mol.atoms[i];
                    if let Some(valences) = allowed_valences(atom.element, atom.formal_charge) {
                        let max = *valences.last().unwrap();
                        if mol.bond_order_sum(i) + h > max {
                            return Err(MolError::parse(ParseErrorKind::Valence, positions[i]));
                        }
                    }
                    h
                }
                None => implied_hydrogens(&mol, i)
                    .ok_or_else(|| MolError::parse(ParseErrorKind::Valence, positions[i]))?,
            };
            mol.atoms[i].hydrogens = h;
        }

        aromatize(&mut mol);
        Ok(mol)
    }

    /// Folds `[H]` atoms bonded to a single heavy atom into that atom's count.
    fn fold_explicit_hydrogens(&mut self) {
        let mut degree = vec![0usize; self.atoms.len()];
        for b in &self.bonds {
            degree[b.a] += 1;
            degree[b.b] += 1;
        }
        let removable: Vec<bool> = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| {
                a.element == Element::H
                    && a.formal_charge == 0
                    && a.explicit_h.unwrap_or(0) == 0
                    && degree[i] == 1
                    && self.bonds.iter().any(|b| {
                        (b.a == i || b.b == i)
                            && matches!(b.order, None | Some(BondOrder::Single))
                            && self.atoms[if b.a == i { b.b } else { b.a }].element.is_heavy()
                    })
            })
            .collect();
        if !removable.contains(&true) {
            return;
        }
        for b in &self.bonds {
            for (h, heavy) in [(b.a, b.b), (b.b, b.a)] {
                if removable[h] {
                    if let Some(n) = self.atoms[heavy].explicit_h.as_mut() {
                        *n += 1;
                    }
                }
            }
        }
        let mut map = vec![usize::MAX; self.atoms.len()];
        let mut atoms = Vec::new();
        let mut positions = Vec::new();
        for (i, atom) in self.atoms.drain(..).enumerate() {
            if !removable[i] {
                map[i] = atoms.len();
                atoms.push(atom);
                positions.push(self.positions[i]);
            }
        }
        self.bonds.retain(|b| !removable[b.a] && !removable[b.b]);
        for b in &mut self.bonds {
            b.a = map[b.a];
            b.b = map[b.b];
        }
        self.atoms = atoms;
        self.positions = positions;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(text: &str) -> ParseErrorKind {
        match parse_smiles(text) {
            Err(MolError::Parse { kind, .. }) => kind,
            other => panic!("expected parse error for {text}, got {other:?}"),
        }
    }

    #[test]
    fn ethanol_chain() {
        let mol = parse_smiles("CCO").unwrap();
        assert_eq!(mol.atom_count(), 3);
        assert_eq!(mol.bond_count(), 2);
        assert!(mol.bonds().iter().all(|b| b.order == BondOrder::Single));
        let h: Vec<u8> = mol.atoms().iter().map(|a| a.hydrogens).collect();
        assert_eq!(h, vec![3, 2, 1]);
        assert_eq!(mol.bond_between(0, 1), Some(0));
        assert_eq!(mol.bond_between(1, 2), Some(1));
    }

    #[test]
    fn benzene_is_aromatic_six_cycle() {
        let mol = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(mol.atom_count(), 6);
        assert!(mol.atoms().iter().all(|a| a.aromatic && a.element == Element::C && a.hydrogens == 1));
        assert!(mol.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
        assert_eq!(mol.rings().len(), 1);
    }

    #[test]
    fn unclosed_ring_is_reported() {
        assert_eq!(kind("C1CC"), ParseErrorKind::UnclosedRing(1));
    }

    #[test]
    fn grammar_errors() {
        assert_eq!(kind(""), ParseErrorKind::Empty);
        assert_eq!(kind("C(C"), ParseErrorKind::UnclosedBranch);
        assert_eq!(kind("CC)"), ParseErrorKind::UnmatchedParen);
        assert_eq!(kind("C[NH"), ParseErrorKind::UnclosedBracket);
        assert_eq!(kind("C="), ParseErrorKind::DanglingBond);
        assert_eq!(kind("C/C=C/C"), ParseErrorKind::Stereo);
        assert_eq!(kind("C[C@H](N)O"), ParseErrorKind::Stereo);
        assert_eq!(kind("[13CH4]"), ParseErrorKind::Isotope);
        assert_eq!(kind("CXC"), ParseErrorKind::UnsupportedElement("X".into()));
        assert_eq!(kind("C[Xx]"), ParseErrorKind::UnsupportedElement("X".into()));
        assert_eq!(kind("C11"), ParseErrorKind::SelfLoop);
        assert_eq!(kind("C12CC12"), ParseErrorKind::DuplicateBond);
        assert_eq!(kind("C=1CC#1"), ParseErrorKind::RingBondConflict(1));
        assert_eq!(kind("cC"), ParseErrorKind::AromaticOutsideRing);
    }

    #[test]
    fn valence_violations() {
        assert_eq!(kind("C(C)(C)(C)(C)C"), ParseErrorKind::Valence);
        assert_eq!(kind("O=O=O"), ParseErrorKind::Valence);
        assert_eq!(kind("F=C"), ParseErrorKind::Valence);
        assert_eq!(kind("C[NH4]"), ParseErrorKind::Valence);
        assert!(parse_smiles("C[NH3+]").is_ok());
        assert!(parse_smiles("CS(=O)(=O)C").is_ok());
        assert!(parse_smiles("OP(=O)(O)O").is_ok());
    }

    #[test]
    fn bracket_atoms() {
        let mol = parse_smiles("C[NH+](C)C").unwrap();
        let n = mol.atom(1);
        assert_eq!(n.element, Element::N);
        assert_eq!(n.formal_charge, 1);
        assert_eq!(n.hydrogens, 1);
        let mol = parse_smiles("[O--]").unwrap();
        assert_eq!(mol.atom(0).formal_charge, -2);
        let mol = parse_smiles("[Na+]").unwrap();
        assert_eq!(mol.atom(0).element.symbol(), "Na");
        let mol = parse_smiles("c1cc[nH]c1").unwrap();
        assert_eq!(mol.atom(3).hydrogens, 1);
        assert!(mol.atom(3).aromatic);
    }

    #[test]
    fn percent_ring_closures_and_branches() {
        let mol = parse_smiles("C%12CCCCC%12").unwrap();
        assert_eq!(mol.rings().len(), 1);
        let mol = parse_smiles("CC(=O)Oc1ccccc1C(=O)O").unwrap();
        assert_eq!(mol.atom_count(), 13);
        assert_eq!(mol.bonds().iter().filter(|b| b.order == BondOrder::Double).count(), 2);
    }

    #[test]
    fn ring_bond_symbol_on_either_side() {
        let a = parse_smiles("C=1CCCCC1").unwrap();
        let b = parse_smiles("C1CCCCC=1").unwrap();
        assert_eq!(a.bonds().iter().filter(|x| x.order == BondOrder::Double).count(), 1);
        assert_eq!(b.bonds().iter().filter(|x| x.order == BondOrder::Double).count(), 1);
    }

    #[test]
    fn biaryl_bond_is_single() {
        let mol = parse_smiles("c1ccccc1c1ccccc1").unwrap();
        let single = mol.bonds().iter().filter(|b| b.order == BondOrder::Single).count();
        assert_eq!(single, 1);
        assert_eq!(mol.atoms().iter().filter(|a| a.hydrogens == 0).count(), 2);
    }

    #[test]
    fn explicit_hydrogen_atoms_are_folded() {
        let mol = parse_smiles("[H]C([H])([H])O").unwrap();
        assert_eq!(mol.atom_count(), 2);
        assert_eq!(mol.atom(0).hydrogens, 3);
        assert_eq!(parse_smiles("[H][H]").unwrap().atom_count(), 2);
    }

    #[test]
    fn multi_component_input() {
        let mol = parse_smiles("CC(=O)[O-].[Na+]").unwrap();
        assert_eq!(mol.components().len(), 2);
    }

    #[test]
    fn length_cap() {
        let long = "C".repeat(250);
        assert!(matches!(
            parse_smiles_with_cap(&long, DEFAULT_MAX_INPUT_LEN),
            Err(MolError::Parse { kind: ParseErrorKind::TooLong { .. }, .. })
        ));
        assert!(parse_smiles(&long).is_ok());
    }
}
