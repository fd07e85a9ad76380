use super::HarnessError;
use crate::bridge::mix;
use crate::molgraph::{
    canonical_smiles, parse_smiles, randomize_smiles, read_corpus, strip_stereo_and_components, CorpusRecord, MolError,
    ParseErrorKind, DEFAULT_MAX_INPUT_LEN, DEFAULT_MAX_RANDOMIZED_LEN,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepConfig {
    /// Bounds on the canonical string length, inclusive.
    pub min_len: usize,
    pub max_len: usize,
    pub max_randomized_len: usize,
    /// Randomized forms sampled per molecule to check `max_randomized_len`.
    /// Zero disables the check.
    pub randomized_samples: usize,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            min_len: 10,
            max_len: DEFAULT_MAX_INPUT_LEN,
            max_randomized_len: DEFAULT_MAX_RANDOMIZED_LEN,
            randomized_samples: 10,
            test_fraction: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Parse,
    Length,
    RandomizedLength,
    Duplicate,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PrepStats {
    pub read: usize,
    pub kept: usize,
    pub train: usize,
    pub test: usize,
    pub rejected: BTreeMap<RejectReason, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrepOutput {
    /// Canonical SMILES with the source id, in corpus order.
    pub train: Vec<(String, Option<String>)>,
    pub test: Vec<(String, Option<String>)>,
    pub stats: PrepStats,
}

impl PrepOutput {
    pub fn write_split(rows: &[(String, Option<String>)]) -> String {
        let mut out = String::new();
        for (smiles, id) in rows {
            out.push_str(smiles);
            if let Some(id) = id {
                out.push('\t');
                out.push_str(id);
            }
            out.push('\n');
        }
        out
    }
}

fn clean_one(rec: &CorpusRecord, index: usize, cfg: &PrepConfig) -> Result<String, RejectReason> {
    let too_long = |e: &MolError| matches!(e, MolError::Parse { kind: ParseErrorKind::TooLong { .. }, .. });
    let stripped = strip_stereo_and_components(&rec.smiles)
        .map_err(|e| if too_long(&e) { RejectReason::Length } else { RejectReason::Parse })?;
    let mol = parse_smiles(&stripped).map_err(|_| RejectReason::Parse)?;
    let canonical = canonical_smiles(&mol);
    if canonical.len() < cfg.min_len || canonical.len() > cfg.max_len {
        return Err(RejectReason::Length);
    }
    if cfg.randomized_samples > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(cfg.seed, index as u64, u64::MAX));
        for _ in 0..cfg.randomized_samples {
            if randomize_smiles(&mol, &mut rng).len() > cfg.max_randomized_len {
                return Err(RejectReason::RandomizedLength);
            }
        }
    }
    Ok(canonical)
}

/// Strip, parse, canonicalize, length-filter and dedupe, then split by a
/// seeded shuffle. The first occurrence of each canonical form is kept.
pub fn prep_records(records: &[CorpusRecord], cfg: &PrepConfig) -> PrepOutput {
    let cleaned: Vec<Result<String, RejectReason>> =
        records.par_iter().enumerate().map(|(i, r)| clean_one(r, i, cfg)).collect();
    let mut stats = PrepStats { read: records.len(), ..PrepStats::default() };
    let mut seen = HashSet::new();
    let mut kept = Vec::new();
    for (rec, res) in records.iter().zip(cleaned) {
        match res {
            Ok(c) if seen.insert(c.clone()) => kept.push((c, rec.id.clone())),
            Ok(_) => *stats.rejected.entry(RejectReason::Duplicate).or_default() += 1,
            Err(reason) => *stats.rejected.entry(reason).or_default() += 1,
        }
    }
    let n_test = (kept.len() as f64 * cfg.test_fraction).round() as usize;
    let mut order: Vec<usize> = (0..kept.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let mut is_test = vec![false; kept.len()];
    for &i in &order[..n_test] {
        is_test[i] = true;
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (row, t) in kept.into_iter().zip(is_test) {
        if t { test.push(row) } else { train.push(row) }
    }
    stats.kept = train.len() + test.len();
    stats.train = train.len();
    stats.test = test.len();
    PrepOutput { train, test, stats }
}

pub fn prep_dataset(raw: &Path, cfg: &PrepConfig) -> Result<PrepOutput, HarnessError> {
    Ok(prep_records(&read_corpus(raw)?, cfg))
}
