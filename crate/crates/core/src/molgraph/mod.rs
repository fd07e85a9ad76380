//! Molecular graphs parsed from SMILES, canonical and randomized SMILES
//! writers, and the stereo/salt stripping used during dataset preparation.

mod aromatic;
mod canon;
mod corpus;
mod element;
mod parse;
mod rings;
mod strip;
mod valence;
mod write;

pub use canon::{canonical_ranks, symmetry_classes, CanonicalRanks};
pub use corpus::{read_corpus, read_corpus_str, CorpusRecord};
pub use element::{allowed_valences, Element};
pub use parse::{parse_smiles, parse_smiles_with_cap, DEFAULT_MAX_INPUT_LEN};
pub use rings::perceive_rings;
pub use strip::strip_stereo_and_components;
pub use valence::{implied_hydrogens, total_valence};
pub use write::{canonical_smiles, canonicalize, randomize_smiles, write_smiles, DEFAULT_MAX_RANDOMIZED_LEN};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to the bond-order sum; aromatic bonds count one here and
    /// the extra pi electron is handled by the valence model.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    pub formal_charge: i8,
    /// Hydrogen count written inside brackets; `None` for organic-subset atoms.
    pub explicit_h: Option<u8>,
    /// Total attached hydrogens (explicit or implied by the valence model).
    pub hydrogens: u8,
    pub in_ring: bool,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            aromatic: false,
            formal_charge: 0,
            explicit_h: None,
            hydrogens: 0,
            in_ring: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub in_ring: bool,
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

/// An attributed undirected graph. Atoms carry their hydrogen counts, so the
/// graph never contains hydrogen atoms bonded to a single heavy atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    rings: Vec<Vec<usize>>,
}

impl Molecule {
    /// Builds a molecule from atoms and bonds, perceiving rings.
    /// Hydrogen counts and aromatic flags are taken as given.
    pub fn from_parts(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Molecule, MolError> {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (i, bond) in bonds.iter().enumerate() {
            if bond.a == bond.b || bond.a >= atoms.len() || bond.b >= atoms.len() {
                return Err(MolError::InvalidGraph(format!("bad bond endpoints {}-{}", bond.a, bond.b)));
            }
            if adjacency[bond.a].iter().any(|&(n, _)| n == bond.b) {
                return Err(MolError::InvalidGraph(format!("duplicate bond {}-{}", bond.a, bond.b)));
            }
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
        let mut mol = Molecule { atoms, bonds, adjacency, rings: Vec::new() };
        mol.refresh_rings();
        Ok(mol)
    }

    pub(crate) fn refresh_rings(&mut self) {
        let ring_bonds = rings::ring_bond_flags(self);
        for (bond, flag) in self.bonds.iter_mut().zip(&ring_bonds) {
            bond.in_ring = *flag;
        }
        for atom in &mut self.atoms {
            atom.in_ring = false;
        }
        for bond in &self.bonds {
            if bond.in_ring {
                self.atoms[bond.a].in_ring = true;
                self.atoms[bond.b].in_ring = true;
            }
        }
        self.rings = rings::sssr(self);
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element.is_heavy()).count()
    }

    /// `(neighbor, bond index)` pairs.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().find(|&&(n, _)| n == b).map(|&(_, bi)| bi)
    }

    /// Smallest set of smallest rings, each as an ordered atom cycle.
    pub fn rings(&self) -> &[Vec<usize>] {
        &self.rings
    }

    /// Sum of bond valences around an atom (aromatic bonds count one).
    pub fn bond_order_sum(&self, atom: usize) -> u8 {
        self.adjacency[atom]
            .iter()
            .map(|&(_, b)| self.bonds[b].order.valence())
            .sum()
    }

    /// Connected components as sorted atom lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.atoms.len() <= 1 || self.components().len() == 1
    }

    /// Induced subgraph over `keep` (in the given order); ring data is recomputed.
    pub fn subgraph(&self, keep: &[usize]) -> Molecule {
        let mut map = vec![usize::MAX; self.atoms.len()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let atoms = keep.iter().map(|&i| self.atoms[i].clone()).collect();
        let bonds = self
            .bonds
            .iter()
            .filter(|b| map[b.a] != usize::MAX && map[b.b] != usize::MAX)
            .map(|b| Bond { a: map[b.a], b: map[b.b], order: b.order, in_ring: false })
            .collect();
        Molecule::from_parts(atoms, bonds).expect("subgraph of a valid graph is valid")
    }

    /// Number of independent cycles: bonds - atoms + components.
    pub fn cycle_rank(&self) -> usize {
        (self.bonds.len() + self.components().len()).saturating_sub(self.atoms.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    TooLong { len: usize, cap: usize },
    UnexpectedChar(char),
    UnsupportedElement(String),
    UnclosedBracket,
    UnclosedBranch,
    UnmatchedParen,
    UnclosedRing(u32),
    RingBondConflict(u32),
    SelfLoop,
    DuplicateBond,
    Stereo,
    Isotope,
    DanglingBond,
    AromaticOutsideRing,
    Valence,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MolError {
    #[error("SMILES parse error at position {position}: {kind}")]
    Parse { kind: ParseErrorKind, position: usize },
    #[error("invalid atom order: {0}")]
    InvalidOrder(String),
    #[error("molecule is disconnected; write each component separately")]
    Disconnected,
    #[error("no atoms left after stripping components")]
    EmptyAfterStrip,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}

impl std::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseErrorKind::Empty => write!(f, "empty input"),
            ParseErrorKind::TooLong { len, cap } => write!(f, "input length {len} exceeds cap {cap}"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::UnsupportedElement(s) => write!(f, "unsupported element '{s}'"),
            ParseErrorKind::UnclosedBracket => write!(f, "unterminated bracket atom"),
            ParseErrorKind::UnclosedBranch => write!(f, "unclosed branch"),
            ParseErrorKind::UnmatchedParen => write!(f, "unmatched ')'"),
            ParseErrorKind::UnclosedRing(n) => write!(f, "unclosed ring bond {n}"),
            ParseErrorKind::RingBondConflict(n) => write!(f, "conflicting bond symbols on ring bond {n}"),
            ParseErrorKind::SelfLoop => write!(f, "ring bond closes on the same atom"),
            ParseErrorKind::DuplicateBond => write!(f, "duplicate bond between the same atoms"),
            ParseErrorKind::Stereo => write!(f, "stereo annotations are not accepted"),
            ParseErrorKind::Isotope => write!(f, "isotopes are not supported"),
            ParseErrorKind::DanglingBond => write!(f, "bond symbol without a following atom"),
            ParseErrorKind::AromaticOutsideRing => write!(f, "aromatic atom outside a ring"),
            ParseErrorKind::Valence => write!(f, "valence violation"),
        }
    }
}

impl MolError {
    pub(crate) fn parse(kind: ParseErrorKind, position: usize) -> MolError {
        MolError::Parse { kind, position }
    }
}
