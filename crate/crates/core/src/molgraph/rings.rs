//! Ring perception: ring-bond flags from bridge detection and a smallest set
//! of smallest rings chosen from Horton candidate cycles by GF(2) elimination.

use super::Molecule;
use std::collections::{HashSet, VecDeque};

/// Ring list of an already-built molecule; its length equals the cycle rank.
pub fn perceive_rings(mol: &Molecule) -> Vec<Vec<usize>> {
    mol.rings().to_vec()
}

/// A bond lies on a cycle iff it is not a bridge.
pub(crate) fn ring_bond_flags(mol: &Molecule) -> Vec<bool> {
    let n = mol.atom_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; mol.bond_count()];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (atom, bond used to enter, next neighbor cursor)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(top) = stack.last_mut() {
            let (u, via, cursor) = *top;
            if let Some(&(v, b)) = mol.neighbors(u).get(cursor) {
                top.2 += 1;
                if b == via {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, b, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        is_bridge[via] = true;
                    }
                }
            }
        }
    }
    is_bridge.iter().map(|b| !b).collect()
}

struct Candidate {
    atoms: Vec<usize>,
    edges: Vec<u64>,
}

pub(crate) fn sssr(mol: &Molecule) -> Vec<Vec<usize>> {
    let rank = mol.cycle_rank();
    if rank == 0 {
        return Vec::new();
    }
    let n = mol.atom_count();
    let m = mol.bond_count();
    let words = m.div_ceil(64);
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();

    for root in 0..n {
        if !mol.atom(root).in_ring {
            continue;
        }
        let mut parent = vec![usize::MAX; n];
        let mut parent_bond = vec![usize::MAX; n];
        let mut dist = vec![usize::MAX; n];
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(v, b) in mol.neighbors(u) {
                if mol.bond(b).in_ring && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    parent_bond[v] = b;
                    queue.push_back(v);
                }
            }
        }
        let path_to_root = |mut v: usize| {
            let mut atoms = vec![v];
            let mut bonds = Vec::new();
            while v != root {
                bonds.push(parent_bond[v]);
                v = parent[v];
                atoms.push(v);
            }
            (atoms, bonds)
        };
        for (bi, bond) in mol.bonds().iter().enumerate() {
            if !bond.in_ring || dist[bond.a] == usize::MAX || dist[bond.b] == usize::MAX {
                continue;
            }
            if parent_bond[bond.a] == bi || parent_bond[bond.b] == bi {
                continue;
            }
            let (pa, ba) = path_to_root(bond.a);
            let (pb, bb) = path_to_root(bond.b);
            let set_a: HashSet<usize> = pa[..pa.len() - 1].iter().copied().collect();
            if pb[..pb.len() - 1].iter().any(|v| set_a.contains(v)) {
                continue;
            }
            let mut edges = vec![0u64; words];
            for &e in ba.iter().chain(bb.iter()).chain(std::iter::once(&bi)) {
                edges[e / 64] |= 1 << (e % 64);
            }
            if !seen.insert(edges.clone()) {
                continue;
            }
            // root .. a, then b .. (excluding root)
            let mut atoms: Vec<usize> = pa.iter().rev().copied().collect();
            atoms.extend(pb[..pb.len() - 1].iter().copied());
            candidates.push(Candidate { atoms, edges });
        }
    }

    candidates.sort_by_cached_key(|c| {
        let mut sorted = c.atoms.clone();
        sorted.sort_unstable();
        (c.atoms.len(), sorted)
    });

    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut rings = Vec::new();
    for cand in candidates {
        let mut v = cand.edges.clone();
        for (pivot, row) in &basis {
            if v[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (x, y) in v.iter_mut().zip(row) {
                    *x ^= y;
                }
            }
        }
        if let Some(pivot) = first_bit(&v) {
            // keep basis reduced so pivots stay unique
            for (_, row) in basis.iter_mut() {
                if row[pivot / 64] >> (pivot % 64) & 1 == 1 {
                    for (x, y) in row.iter_mut().zip(&v) {
                        *x ^= y;
                    }
                }
            }
            basis.push((pivot, v));
            rings.push(normalize_cycle(cand.atoms));
            if rings.len() == rank {
                break;
            }
        }
    }
    rings
}

fn first_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

fn normalize_cycle(mut atoms: Vec<usize>) -> Vec<usize> {
    let pos = atoms
        .iter()
        .enumerate()
        .min_by_key(|(_, a)| **a)
        .map(|(i, _)| i)
        .unwrap_or(0);
    atoms.rotate_left(pos);
    if atoms.len() > 2 && atoms[atoms.len() - 1] < atoms[1] {
        atoms[1..].reverse();
    }
    atoms
}
