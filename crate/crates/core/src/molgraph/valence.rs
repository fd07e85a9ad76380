use super::{allowed_valences, BondOrder, Molecule};

/// Hydrogens an unbracketed atom would carry in its current bonding, or
/// `None` when the bond-order sum exceeds every allowed valence.
///
/// Aromatic atoms reserve one valence unit for the ring pi system when it
/// fits under the primary valence (benzene c -> 1 H, pyridine n -> 0 H);
/// otherwise the atom is treated as a pyrrole-type donor.
pub fn implied_hydrogens(mol: &Molecule, atom: usize) -> Option<u8> {
    let a = mol.atom(atom);
    let Some(valences) = allowed_valences(a.element, a.formal_charge) else {
        return Some(0);
    };
    let sum = mol.bond_order_sum(atom);
    if a.aromatic && !has_double_bond(mol, atom) && sum < valences[0] {
        return Some(valences[0] - sum - 1);
    }
    valences.iter().find(|&&v| v >= sum).map(|&v| v - sum)
}

/// Total valence as a Kekulé structure would count it: bond orders,
/// hydrogens and one extra unit for an aromatic atom holding a ring double bond.
pub fn total_valence(mol: &Molecule, atom: usize) -> u8 {
    let a = mol.atom(atom);
    let base = mol.bond_order_sum(atom) + a.hydrogens;
    if !a.aromatic || has_double_bond(mol, atom) {
        return base;
    }
    let primary = allowed_valences(a.element, a.formal_charge)
        .map(|v| v[0])
        .unwrap_or(0);
    if base < primary {
        base + 1
    } else {
        base
    }
}

pub(crate) fn has_double_bond(mol: &Molecule, atom: usize) -> bool {
    mol.neighbors(atom)
        .iter()
        .any(|&(_, b)| mol.bond(b).order == BondOrder::Double)
}
