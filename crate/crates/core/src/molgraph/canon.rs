//! Canonical atom ranking by iterative neighbourhood refinement with
//! tie-breaking on the lowest tied class.

use super::Molecule;

/// A total order of the atoms; `ranks[i]` is the canonical position of atom `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalRanks {
    pub ranks: Vec<usize>,
}

impl CanonicalRanks {
    /// Atom indices sorted by rank.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0; self.ranks.len()];
        for (atom, &r) in self.ranks.iter().enumerate() {
            order[r] = atom;
        }
        order
    }
}

fn initial_invariants(mol: &Molecule) -> Vec<usize> {
    let keys: Vec<_> = mol
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            (
                a.element.atomic_number(),
                mol.degree(i),
                a.formal_charge,
                a.hydrogens,
                a.in_ring,
                a.aromatic,
            )
        })
        .collect();
    dense_rank(&keys)
}

/// Rank of each key among the distinct keys, so equal keys share a rank and
/// the result depends only on key values, never on atom positions.
fn dense_rank<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0; keys.len()];
    let mut current = 0;
    for w in 0..idx.len() {
        if w > 0 && keys[idx[w]] != keys[idx[w - 1]] {
            current += 1;
        }
        ranks[idx[w]] = current;
    }
    ranks
}

fn class_count(ranks: &[usize]) -> usize {
    ranks.iter().max().map_or(0, |m| m + 1)
}

fn refine(mol: &Molecule, mut ranks: Vec<usize>) -> Vec<usize> {
    let mut classes = class_count(&ranks);
    loop {
        let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..mol.atom_count())
            .map(|i| {
                let mut env: Vec<(usize, u8)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(n, b)| (ranks[n], mol.bond(b).order.code()))
                    .collect();
                env.sort_unstable();
                (ranks[i], env)
            })
            .collect();
        let next = dense_rank(&keys);
        let next_classes = class_count(&next);
        ranks = next;
        if next_classes == classes {
            return ranks;
        }
        classes = next_classes;
    }
}

/// Partition of atoms into classes that refinement cannot separate.
/// Atoms related by a graph automorphism always share a class.
pub fn symmetry_classes(mol: &Molecule) -> Vec<usize> {
    refine(mol, initial_invariants(mol))
}

/// Breaks one tie: `chosen` moves ahead of the rest of its class.
pub(crate) fn break_tie(mol: &Molecule, ranks: &[usize], chosen: usize) -> Vec<usize> {
    let r = ranks[chosen];
    let split: Vec<usize> = ranks
        .iter()
        .enumerate()
        .map(|(j, &x)| 2 * x + usize::from(x == r && j != chosen))
        .collect();
    refine(mol, dense_rank(&split))
}

/// Lowest rank value shared by more than one atom.
pub(crate) fn lowest_tied_class(ranks: &[usize]) -> Option<usize> {
    let mut counts = vec![0usize; ranks.len()];
    for &r in ranks {
        counts[r] += 1;
    }
    counts.iter().position(|&c| c > 1)
}

pub fn canonical_ranks(mol: &Molecule) -> CanonicalRanks {
    let mut ranks = symmetry_classes(mol);
    while let Some(r) = lowest_tied_class(&ranks) {
        let chosen = ranks.iter().position(|&x| x == r).expect("class is populated");
        ranks = break_tie(mol, &ranks, chosen);
    }
    CanonicalRanks { ranks }
}
