use super::pair::ReferencePair;
use crate::bridge::BridgeRecord;
use crate::descriptors::{descriptor_vector, pc_filter, qed, sas, DescriptorTables, FragScores, PcThresholds};
use crate::fingerprint::{morgan_fingerprint, rds, DEFAULT_N_BITS, DEFAULT_RADIUS};
use crate::molgraph::parse_smiles;
use crate::scaffold::generic_scaffold_smiles;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub grid_index: u32,
    pub perturb_index: u32,
    pub t: f64,
    pub raw_smiles: String,
    pub valid: bool,
    pub canonical: String,
    /// True on the first record (in grid, perturbation order) of each canonical form.
    pub unique_first: bool,
    pub novel: bool,
    /// Descriptors and RDS are filled for every valid, unique record.
    pub qed: Option<f64>,
    pub sas: Option<f64>,
    pub rds: Option<f64>,
    pub pc_pass: bool,
    pub nbm_pass: bool,
    pub decode_micros: u64,
}

/// Per-molecule values the later stages need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assessment {
    pub qed: f64,
    pub sas: f64,
    pub rds: f64,
    /// Generic scaffold exists and differs from both references.
    pub novel_scaffold: bool,
}

pub struct CascadeContext<'a> {
    pub training_index: &'a HashSet<String>,
    pub pair: &'a ReferencePair,
    pub frag_scores: &'a FragScores,
    pub tables: &'a DescriptorTables,
    pub thresholds: PcThresholds,
}

impl CascadeContext<'_> {
    pub fn assess(&self, canonical: &str) -> Assessment {
        let mol = parse_smiles(canonical).expect("canonical SMILES reparses");
        let fp = morgan_fingerprint(&mol, DEFAULT_RADIUS, DEFAULT_N_BITS);
        let reference = self.pair.scaffold_set();
        Assessment {
            qed: qed(&descriptor_vector(&mol, self.tables), &self.tables.qed),
            sas: sas(&mol, self.frag_scores),
            rds: rds(&fp, &self.pair.fp_a, &self.pair.fp_b).expect("reference pair fingerprints differ").value,
            novel_scaffold: generic_scaffold_smiles(&mol).is_some_and(|s| !reference.contains(&s)),
        }
    }
}

/// valid -> unique -> novel -> PC -> NBM, each stage applied only to the
/// survivors of the previous one.
pub fn filter_cascade(records: &[BridgeRecord], ctx: &CascadeContext) -> Vec<GenerationRecord> {
    filter_cascade_with(records, ctx.training_index, &ctx.thresholds, |c| ctx.assess(c))
}

/// Cascade with a caller-supplied assessment, called once per distinct
/// canonical form. Uniqueness is a single ordered pass, so the result does not
/// depend on how the assessments are scheduled.
pub fn filter_cascade_with<F>(
    records: &[BridgeRecord],
    training_index: &HashSet<String>,
    thresholds: &PcThresholds,
    assess: F,
) -> Vec<GenerationRecord>
where
    F: Fn(&str) -> Assessment + Sync,
{
    let mut seen = HashSet::new();
    let first: Vec<bool> = records.iter().map(|r| r.valid && seen.insert(r.canonical.as_str())).collect();
    let assessed: HashMap<&str, Assessment> = seen.into_par_iter().map(|c| (c, assess(c))).collect();
    records
        .iter()
        .zip(first)
        .map(|(r, unique_first)| {
            let a = unique_first.then(|| assessed[r.canonical.as_str()]);
            let novel = unique_first && !training_index.contains(&r.canonical);
            let pc_pass = novel && a.is_some_and(|a| pc_filter(a.qed, a.sas, thresholds));
            let nbm_pass = pc_pass && a.is_some_and(|a| a.novel_scaffold);
            GenerationRecord {
                grid_index: r.grid_index,
                perturb_index: r.perturb_index,
                t: r.t,
                raw_smiles: r.raw_smiles.clone(),
                valid: r.valid,
                canonical: r.canonical.clone(),
                unique_first,
                novel,
                qed: a.map(|a| a.qed),
                sas: a.map(|a| a.sas),
                rds: a.map(|a| a.rds),
                pc_pass,
                nbm_pass,
                decode_micros: r.decode_micros,
            }
        })
        .collect()
}
