//! Bemis-Murcko scaffolds, their generic (all-carbon, all-single) form and
//! the novel-scaffold test.

use crate::molgraph::{canonical_smiles, Atom, Bond, BondOrder, Element, Molecule};
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq)]
pub struct Scaffold {
    pub molecule: Molecule,
    pub canonical: String,
}

impl Scaffold {
    fn from_molecule(molecule: Molecule) -> Scaffold {
        let canonical = canonical_smiles(&molecule);
        Scaffold { molecule, canonical }
    }
}

/// Ring systems plus the linkers between them. Atoms double-bonded to the
/// remaining core (carbonyl O, imine N) are kept. `None` for acyclic input.
pub fn bm_scaffold(mol: &Molecule) -> Option<Scaffold> {
    if mol.rings().is_empty() {
        return None;
    }
    let n = mol.atom_count();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|i| mol.degree(i)).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&i| !mol.atom(i).in_ring && degree[i] <= 1).collect();
    while let Some(i) = stack.pop() {
        if !alive[i] {
            continue;
        }
        alive[i] = false;
        for &(v, _) in mol.neighbors(i) {
            if alive[v] {
                degree[v] -= 1;
                if !mol.atom(v).in_ring && degree[v] <= 1 {
                    stack.push(v);
                }
            }
        }
    }
    let core = alive.clone();
    for i in (0..n).filter(|&i| !core[i]) {
        let exocyclic = mol
            .neighbors(i)
            .iter()
            .any(|&(v, b)| core[v] && mol.bond(b).order == BondOrder::Double);
        if exocyclic {
            alive[i] = true;
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    Some(Scaffold::from_molecule(trimmed(mol, &keep, &core)))
}

/// Keeps bonds with at least one core endpoint between kept atoms; every
/// other bond of a kept atom turns into hydrogens on it.
fn trimmed(mol: &Molecule, keep: &[usize], core: &[bool]) -> Molecule {
    let mut map = vec![usize::MAX; mol.atom_count()];
    for (new, &old) in keep.iter().enumerate() {
        map[old] = new;
    }
    let kept = |i: usize| map[i] != usize::MAX;
    let mut atoms: Vec<Atom> = keep.iter().map(|&i| mol.atom(i).clone()).collect();
    let mut bonds = Vec::new();
    for bond in mol.bonds() {
        if kept(bond.a) && kept(bond.b) && (core[bond.a] || core[bond.b]) {
            bonds.push(Bond { a: map[bond.a], b: map[bond.b], order: bond.order, in_ring: false });
            continue;
        }
        for x in [bond.a, bond.b].into_iter().filter(|&x| kept(x)) {
            let atom = &mut atoms[map[x]];
            atom.hydrogens += bond.order.valence();
            if atom.explicit_h.is_some() {
                atom.explicit_h = Some(atom.hydrogens);
            }
        }
    }
    Molecule::from_parts(atoms, bonds).expect("subgraph of a valid graph")
}

/// All atoms become neutral aliphatic carbon and all bonds single; former
/// exocyclic atoms are then pruned like any other terminal atom.
pub fn generic_scaffold(s: &Scaffold) -> Scaffold {
    let mol = &s.molecule;
    let atoms: Vec<Atom> = (0..mol.atom_count())
        .map(|i| {
            let mut a = Atom::new(Element::C);
            a.hydrogens = 4u8.saturating_sub(mol.degree(i) as u8);
            a
        })
        .collect();
    let bonds = mol
        .bonds()
        .iter()
        .map(|b| Bond { a: b.a, b: b.b, order: BondOrder::Single, in_ring: false })
        .collect();
    let generic = Molecule::from_parts(atoms, bonds).expect("same topology as the scaffold");
    bm_scaffold(&generic).unwrap_or_else(|| Scaffold::from_molecule(generic))
}

/// Canonical generic scaffold, or `None` for acyclic molecules.
pub fn generic_scaffold_smiles(mol: &Molecule) -> Option<String> {
    bm_scaffold(mol).map(|s| generic_scaffold(&s).canonical)
}

/// True iff the molecule has a generic scaffold and it is not in `reference`.
pub fn is_novel_scaffold(mol: &Molecule, reference: &HashSet<String>) -> bool {
    generic_scaffold_smiles(mol).is_some_and(|s| !reference.contains(&s))
}
