//! Minimal aromaticity perception for Kekulé input: alternating six-membered
//! C/N rings and five-membered rings with one lone-pair donor. Applied until
//! no further ring converts, so fused systems are picked up ring by ring.

use super::{BondOrder, Element, Molecule};

pub(crate) fn aromatize(mol: &mut Molecule) {
    loop {
        let mut changed = false;
        for ri in 0..mol.rings.len() {
            let ring = &mol.rings[ri];
            if ring.iter().all(|&a| mol.atoms[a].aromatic) {
                continue;
            }
            let convert = match ring.len() {
                6 => six_ring_qualifies(mol, ring),
                5 => five_ring_qualifies(mol, ring),
                _ => false,
            };
            if convert {
                let ring = ring.clone();
                for i in 0..ring.len() {
                    let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
                    let bond = mol.bond_between(a, b).expect("ring atoms are bonded");
                    mol.bonds[bond].order = BondOrder::Aromatic;
                }
                for &a in &ring {
                    mol.atoms[a].aromatic = true;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Double bonds of `atom` whose partner lies in `ring`, and whether any
/// double bond leaves the ring.
fn ring_doubles(mol: &Molecule, ring: &[usize], atom: usize) -> (usize, bool) {
    let mut inside = 0;
    let mut outside = false;
    for &(n, b) in mol.neighbors(atom) {
        if mol.bonds[b].order == BondOrder::Double {
            if ring.contains(&n) {
                inside += 1;
            } else {
                outside = true;
            }
        }
    }
    (inside, outside)
}

fn six_ring_qualifies(mol: &Molecule, ring: &[usize]) -> bool {
    ring.iter().all(|&a| {
        let atom = &mol.atoms[a];
        let element_ok = matches!(atom.element, Element::C | Element::N);
        let charge_ok = atom.formal_charge == 0 || (atom.element == Element::N && atom.formal_charge == 1);
        if !element_ok || !charge_ok {
            return false;
        }
        let (inside, outside) = ring_doubles(mol, ring, a);
        if atom.aromatic {
            return inside == 0 && !outside;
        }
        inside == 1 && !outside
    })
}

fn five_ring_qualifies(mol: &Molecule, ring: &[usize]) -> bool {
    let mut donors = 0;
    for &a in ring {
        let atom = &mol.atoms[a];
        if atom.formal_charge != 0 {
            return false;
        }
        let (inside, outside) = ring_doubles(mol, ring, a);
        if outside || inside > 1 {
            return false;
        }
        if inside == 1 {
            if !matches!(atom.element, Element::C | Element::N) {
                return false;
            }
            continue;
        }
        if atom.aromatic {
            continue;
        }
        let donor = match atom.element {
            Element::O | Element::S => mol.degree(a) == 2,
            Element::N => mol.degree(a) + atom.hydrogens as usize == 3,
            _ => false,
        };
        if !donor {
            return false;
        }
        donors += 1;
    }
    donors == 1
}
