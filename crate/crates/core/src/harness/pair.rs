//! Reference pairs: TSV `class  name_a  smiles_a  name_b  smiles_b`, `#` comments.
//! Latent pair files hold JSON `{"a": [...], "b": [...]}` for decoders whose
//! encoder lives outside this crate.

use super::HarnessError;
use crate::bridge::LatentVector;
use crate::decoder::LatentIndex;
use crate::fingerprint::{dice, morgan_fingerprint, Fingerprint, DEFAULT_N_BITS, DEFAULT_RADIUS};
use crate::molgraph::{canonical_smiles, parse_smiles, Molecule};
use crate::scaffold::generic_scaffold_smiles;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::Path;

const BUNDLED: &str = include_str!("../../data/reference_pairs.tsv");

#[derive(Debug, Clone)]
pub struct ReferencePair {
    pub class: String,
    pub name_a: String,
    pub name_b: String,
    /// Canonical forms.
    pub smiles_a: String,
    pub smiles_b: String,
    pub mol_a: Molecule,
    pub mol_b: Molecule,
    pub fp_a: Fingerprint,
    pub fp_b: Fingerprint,
    pub scaffold_a: Option<String>,
    pub scaffold_b: Option<String>,
}

impl ReferencePair {
    pub fn new(class: &str, name_a: &str, smiles_a: &str, name_b: &str, smiles_b: &str) -> Result<ReferencePair, HarnessError> {
        let bad = |message: String| HarnessError::BadPair { class: class.to_string(), message };
        let mol_a = parse_smiles(smiles_a).map_err(|e| bad(format!("{name_a}: {e}")))?;
        let mol_b = parse_smiles(smiles_b).map_err(|e| bad(format!("{name_b}: {e}")))?;
        let (canon_a, canon_b) = (canonical_smiles(&mol_a), canonical_smiles(&mol_b));
        if canon_a == canon_b {
            return Err(bad("A and B are the same molecule".into()));
        }
        let fp_a = morgan_fingerprint(&mol_a, DEFAULT_RADIUS, DEFAULT_N_BITS);
        let fp_b = morgan_fingerprint(&mol_b, DEFAULT_RADIUS, DEFAULT_N_BITS);
        if dice(&fp_a, &fp_b)? >= 1.0 {
            return Err(bad("A and B have identical fingerprints".into()));
        }
        Ok(ReferencePair {
            class: class.to_string(),
            name_a: name_a.to_string(),
            name_b: name_b.to_string(),
            fp_a,
            fp_b,
            scaffold_a: generic_scaffold_smiles(&mol_a),
            scaffold_b: generic_scaffold_smiles(&mol_b),
            smiles_a: canon_a,
            smiles_b: canon_b,
            mol_a,
            mol_b,
        })
    }

    /// Generic scaffolds of A and B, the reference set for the NBM filter.
    pub fn scaffold_set(&self) -> HashSet<String> {
        self.scaffold_a.iter().chain(&self.scaffold_b).cloned().collect()
    }

    /// A and B encoded with the reference encoder of `index`.
    pub fn latents(&self, index: &LatentIndex) -> Result<LatentPair, HarnessError> {
        Ok(LatentPair { a: index.encode_molecule(&self.mol_a)?, b: index.encode_molecule(&self.mol_b)? })
    }

    pub fn swapped(&self) -> ReferencePair {
        ReferencePair {
            class: self.class.clone(),
            name_a: self.name_b.clone(),
            name_b: self.name_a.clone(),
            smiles_a: self.smiles_b.clone(),
            smiles_b: self.smiles_a.clone(),
            mol_a: self.mol_b.clone(),
            mol_b: self.mol_a.clone(),
            fp_a: self.fp_b.clone(),
            fp_b: self.fp_a.clone(),
            scaffold_a: self.scaffold_b.clone(),
            scaffold_b: self.scaffold_a.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentPair {
    pub a: LatentVector,
    pub b: LatentVector,
}

pub fn read_latent_pair(path: &Path) -> Result<LatentPair, HarnessError> {
    let pair: LatentPair = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if pair.a.dim() != pair.b.dim() || pair.a.dim() == 0 {
        return Err(HarnessError::Data {
            file: path.display().to_string(),
            line: 1,
            message: format!("latent dims {} and {} must match and be positive", pair.a.dim(), pair.b.dim()),
        });
    }
    Ok(pair)
}

pub fn parse_reference_pairs(text: &str, file: &str) -> Result<Vec<ReferencePair>, HarnessError> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        if f.len() != 5 {
            return Err(HarnessError::Data {
                file: file.to_string(),
                line: i + 1,
                message: format!("expected 5 fields, got {}", f.len()),
            });
        }
        pairs.push(ReferencePair::new(f[0], f[1], f[2], f[3], f[4])?);
    }
    Ok(pairs)
}

pub fn bundled_reference_pairs() -> Vec<ReferencePair> {
    parse_reference_pairs(BUNDLED, "reference_pairs.tsv").expect("bundled reference pairs are valid")
}

/// Looks a pair up by class (`NSAID`) or by `NameA/NameB`, case-insensitively.
pub fn find_pair<'a>(pairs: &'a [ReferencePair], key: &str) -> Result<&'a ReferencePair, HarnessError> {
    let key_lc = key.to_ascii_lowercase();
    pairs
        .iter()
        .find(|p| {
            p.class.to_ascii_lowercase() == key_lc
                || format!("{}/{}", p.name_a, p.name_b).to_ascii_lowercase() == key_lc
        })
        .ok_or_else(|| HarnessError::UnknownPair(key.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_pairs_load() {
        let pairs = bundled_reference_pairs();
        assert_eq!(pairs.len(), 4);
        assert_eq!(find_pair(&pairs, "egfr").unwrap().name_a, "Gefitinib");
        assert_eq!(find_pair(&pairs, "Ibuprofen/Naproxen").unwrap().class, "NSAID");
        assert!(find_pair(&pairs, "nope").is_err());
        for p in &pairs {
            assert!(p.scaffold_a.is_some() && p.scaffold_b.is_some());
        }
    }

    #[test]
    fn identical_pair_rejected() {
        assert!(ReferencePair::new("X", "a", "CCO", "b", "OCC").is_err());
        assert!(parse_reference_pairs("X\ta\tCCO\n", "t").is_err());
    }
}
