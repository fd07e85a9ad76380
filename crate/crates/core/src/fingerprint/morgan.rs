//! Circular environment identifiers.
//!
//! Hash: FNV-1a 64 (offset basis 0xcbf29ce484222325, prime 0x100000001b3)
//! over a little-endian byte serialization, followed by the 64-bit
//! finalizer of MurmurHash3 to spread low bits before folding.
//!
//! - radius 0: bytes `[0, Z, degree, charge as u8, H, in_ring, aromatic]`
//! - radius r: bytes `[r] ++ prev_id ++ for each (bond code, neighbour prev_id)
//!   sorted ascending: code ++ id`
//!
//! An environment at radius >= 1 is dropped when its bond set equals one
//! already emitted (earlier radius, or same radius with a smaller id).

use super::Fingerprint;
use crate::molgraph::Molecule;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashSet};

pub const DEFAULT_N_BITS: usize = 4096;
pub const DEFAULT_RADIUS: u32 = 2;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn fmix64(mut k: u64) -> u64 {
    k ^= k >> 33;
    k = k.wrapping_mul(0xff51_afd7_ed55_8ccd);
    k ^= k >> 33;
    k = k.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    k ^ (k >> 33)
}

fn hash(bytes: &[u8]) -> u64 {
    fmix64(fnv1a(bytes))
}

/// Every retained environment identifier, radius 0 first.
fn environments(mol: &Molecule, radius: u32) -> Vec<u64> {
    let n = mol.atom_count();
    let words = mol.bond_count().div_ceil(64).max(1);
    let mut ids: Vec<u64> = mol
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            hash(&[
                0,
                a.element.atomic_number(),
                mol.degree(i).min(255) as u8,
                a.formal_charge as u8,
                a.hydrogens,
                a.in_ring as u8,
                a.aromatic as u8,
            ])
        })
        .collect();
    let mut out = ids.clone();
    let mut bond_sets: Vec<Vec<u64>> = vec![vec![0; words]; n];
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut buf = Vec::new();

    for r in 1..=radius {
        let mut next_ids = Vec::with_capacity(n);
        let mut next_sets = Vec::with_capacity(n);
        for i in 0..n {
            let mut env: Vec<(u8, u64)> =
                mol.neighbors(i).iter().map(|&(v, b)| (mol.bond(b).order.code(), ids[v])).collect();
            env.sort_unstable();
            buf.clear();
            buf.push(r as u8);
            buf.extend_from_slice(&ids[i].to_le_bytes());
            for (code, id) in &env {
                buf.push(*code);
                buf.extend_from_slice(&id.to_le_bytes());
            }
            next_ids.push(hash(&buf));

            let mut set = bond_sets[i].clone();
            for &(v, b) in mol.neighbors(i) {
                set[b / 64] |= 1 << (b % 64);
                for (s, w) in set.iter_mut().zip(&bond_sets[v]) {
                    *s |= w;
                }
            }
            next_sets.push(set);
        }
        let mut layer: Vec<(&Vec<u64>, u64)> = next_sets.iter().zip(next_ids.iter().copied()).collect();
        layer.sort();
        for (set, id) in layer {
            if set.iter().any(|&w| w != 0) && seen.insert(set.clone()) {
                out.push(id);
            }
        }
        ids = next_ids;
        bond_sets = next_sets;
    }
    out
}

/// Folded binary Morgan fingerprint.
///
/// # Panics
/// If `n_bits` is zero.
pub fn morgan_fingerprint(mol: &Molecule, radius: u32, n_bits: usize) -> Fingerprint {
    assert!(n_bits > 0, "fingerprint width must be positive");
    let mut fp = Fingerprint::new(n_bits, radius);
    for id in environments(mol, radius) {
        fp.set((id % n_bits as u64) as usize);
    }
    fp
}

/// Unfolded environment counts, keyed by identifier.
pub fn morgan_counts(mol: &Molecule, radius: u32) -> BTreeMap<u64, u32> {
    let mut counts = BTreeMap::new();
    for id in environments(mol, radius) {
        *counts.entry(id).or_insert(0) += 1;
    }
    counts
}

/// Fingerprints for many molecules in parallel; output order follows input.
pub fn fingerprint_all(mols: &[Molecule], radius: u32, n_bits: usize) -> Vec<Fingerprint> {
    mols.par_iter().map(|m| morgan_fingerprint(m, radius, n_bits)).collect()
}
