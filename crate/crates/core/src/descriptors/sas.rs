//! Synthetic accessibility from fragment frequencies and complexity penalties.
//!
//! Fragment contributions are rebuilt from a corpus: with `df` the number of
//! molecules containing an environment, sort environments by `df` and walk
//! down until 80% of all (molecule, environment) occurrences are covered;
//! the `df` reached there is `k` and the contribution is `log10(df / k)`.
//! Frequent fragments score positive, rare ones negative.

use super::DescriptorError;
use crate::fingerprint::morgan_counts;
use crate::molgraph::{symmetry_classes, BondOrder, Element, Molecule};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"SAS1";
const FRAGMENT_RADIUS: u32 = 2;
/// Contribution of an environment absent from the score table.
pub const MISSING_FRAGMENT_SCORE: f64 = -4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FragScores {
    scores: BTreeMap<u64, f64>,
    /// Molecules the table was built from; `None` when loaded from a file.
    corpus_size: Option<usize>,
}

impl FragScores {
    pub fn get(&self, key: u64) -> Option<f64> {
        self.scores.get(&key).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn corpus_size(&self) -> Option<usize> {
        self.corpus_size
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.scores.iter().map(|(k, v)| (*k, *v))
    }

    /// `"SAS1"`, u64 count, then `count` records of u64 key and f64 value,
    /// little-endian and sorted by key.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), DescriptorError> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.scores.len() as u64).to_le_bytes())?;
        for (k, v) in &self.scores {
            w.write_all(&k.to_le_bytes())?;
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<FragScores, DescriptorError> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        if buf.len() < 12 || &buf[..4] != MAGIC {
            return Err(DescriptorError::Format("bad magic".into()));
        }
        let count = u64::from_le_bytes(buf[4..12].try_into().unwrap());
        let body = &buf[12..];
        if count.checked_mul(16) != Some(body.len() as u64) {
            return Err(DescriptorError::Format(format!("{count} records do not fit {} bytes", body.len())));
        }
        let mut scores = BTreeMap::new();
        for rec in body.chunks_exact(16) {
            let v = f64::from_le_bytes(rec[8..].try_into().unwrap());
            if !v.is_finite() {
                return Err(DescriptorError::Format("non-finite score".into()));
            }
            scores.insert(u64::from_le_bytes(rec[..8].try_into().unwrap()), v);
        }
        Ok(FragScores { scores, corpus_size: None })
    }
}

pub fn build_fragment_scores<'a, I>(corpus: I) -> Result<FragScores, DescriptorError>
where
    I: IntoIterator<Item = &'a Molecule>,
{
    let mut df: HashMap<u64, u64> = HashMap::new();
    let mut n = 0usize;
    for mol in corpus {
        n += 1;
        for key in morgan_counts(mol, FRAGMENT_RADIUS).into_keys() {
            *df.entry(key).or_default() += 1;
        }
    }
    if n == 0 || df.is_empty() {
        return Err(DescriptorError::EmptyCorpus);
    }
    let mut freqs: Vec<u64> = df.values().copied().collect();
    freqs.sort_unstable_by(|a, b| b.cmp(a));
    let total: u64 = freqs.iter().sum();
    let mut covered = 0u64;
    let mut k = *freqs.last().expect("nonempty");
    for f in &freqs {
        covered += f;
        if covered * 10 >= total * 8 {
            k = *f;
            break;
        }
    }
    let k = k as f64;
    let scores = df.into_iter().map(|(key, f)| (key, (f as f64 / k).log10())).collect();
    Ok(FragScores { scores, corpus_size: Some(n) })
}

/// Score in [1, 10]; lower is easier to make.
pub fn sas(mol: &Molecule, scores: &FragScores) -> f64 {
    let counts = morgan_counts(mol, FRAGMENT_RADIUS);
    let n_frag: u32 = counts.values().sum();
    let fragment = if n_frag == 0 {
        0.0
    } else {
        counts
            .iter()
            .map(|(k, &c)| scores.get(*k).unwrap_or(MISSING_FRAGMENT_SCORE) * c as f64)
            .sum::<f64>()
            / n_frag as f64
    };

    let n_atoms = mol.heavy_atom_count() as f64;
    let (spiro, bridgeheads) = spiro_and_bridgeheads(mol);
    let macrocycle = if mol.rings().iter().any(|r| r.len() > 8) { 2f64.log10() } else { 0.0 };
    let complexity = -(n_atoms.powf(1.005) - n_atoms)
        - (stereocentres(mol) as f64 + 1.0).log10()
        - (spiro as f64 + 1.0).log10()
        - (bridgeheads as f64 + 1.0).log10()
        - macrocycle;
    // molecules with many repeated environments are easier than their size suggests
    let symmetry = if n_atoms > counts.len() as f64 && !counts.is_empty() {
        (n_atoms / counts.len() as f64).ln() * 0.5
    } else {
        0.0
    };

    let raw = fragment + complexity + symmetry;
    let (lo, hi) = (-4.0, 2.5);
    let mut s = 11.0 - (raw - lo + 1.0) / (hi - lo) * 9.0;
    if s > 8.0 {
        s = 8.0 + (s - 8.0).ln();
    }
    s.clamp(1.0, 10.0)
}

/// sp3 carbons with four substituents that refinement tells apart; stereo
/// marks are stripped upstream, so every candidate counts.
fn stereocentres(mol: &Molecule) -> usize {
    let classes = symmetry_classes(mol);
    (0..mol.atom_count())
        .filter(|&i| {
            let a = mol.atom(i);
            if a.element != Element::C || a.aromatic || a.hydrogens > 1 || mol.degree(i) + a.hydrogens as usize != 4 {
                return false;
            }
            if mol.neighbors(i).iter().any(|&(_, b)| mol.bond(b).order != BondOrder::Single) {
                return false;
            }
            let distinct: BTreeSet<usize> = mol.neighbors(i).iter().map(|&(v, _)| classes[v]).collect();
            distinct.len() == mol.degree(i)
        })
        .count()
}

fn spiro_and_bridgeheads(mol: &Molecule) -> (usize, usize) {
    let rings = mol.rings();
    let bond_rings: Vec<BTreeSet<usize>> = rings
        .iter()
        .map(|r| {
            (0..r.len())
                .filter_map(|i| mol.bond_between(r[i], r[(i + 1) % r.len()]))
                .collect()
        })
        .collect();
    let mut spiro = BTreeSet::new();
    let mut bridge = BTreeSet::new();
    for i in 0..rings.len() {
        for j in i + 1..rings.len() {
            let shared: Vec<usize> = rings[i].iter().copied().filter(|a| rings[j].contains(a)).collect();
            if shared.len() == 1 {
                spiro.insert(shared[0]);
            }
            let shared_bonds: Vec<usize> = bond_rings[i].intersection(&bond_rings[j]).copied().collect();
            if shared_bonds.len() > 1 {
                let mut ends: HashMap<usize, u32> = HashMap::new();
                for b in shared_bonds {
                    let bond = mol.bond(b);
                    *ends.entry(bond.a).or_default() += 1;
                    *ends.entry(bond.b).or_default() += 1;
                }
                bridge.extend(ends.into_iter().filter(|&(_, c)| c == 1).map(|(a, _)| a));
            }
        }
    }
    (spiro.len(), bridge.len())
}
