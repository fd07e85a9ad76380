//! Physicochemical descriptors, drug-likeness (QED), synthetic accessibility
//! (SAS) and the combined PC filter.

mod physchem;
mod qed;
mod sas;
mod tables;

pub use physchem::descriptor_vector;
pub use qed::{qed, qed_from_properties, AdsParams, QedParams, QED_PROPERTIES};
pub use sas::{build_fragment_scores, sas, FragScores, MISSING_FRAGMENT_SCORE};
pub use tables::{DescriptorTables, TableSources};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DescriptorError {
    #[error("{file}:{line}: {message}")]
    Table { file: String, line: usize, message: String },
    #[error("cannot build fragment scores from an empty corpus")]
    EmptyCorpus,
    #[error("malformed fragment score file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorVector {
    /// g/mol, hydrogens included.
    pub mw: f64,
    pub logp: f64,
    pub hba: u32,
    pub hbd: u32,
    /// Topological polar surface area over N and O, in square angstroms.
    pub tpsa: f64,
    pub rotb: u32,
    pub arom_rings: u32,
    pub alerts: u32,
    /// Heavy atoms with no logP type; each contributed 0.0.
    pub untyped_atoms: u32,
}

impl DescriptorVector {
    /// Inputs in [`QED_PROPERTIES`] order.
    pub fn qed_inputs(&self) -> [f64; 8] {
        [
            self.mw,
            self.logp,
            self.hba as f64,
            self.hbd as f64,
            self.tpsa,
            self.rotb as f64,
            self.arom_rings as f64,
            self.alerts as f64,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcThresholds {
    pub qed_min: f64,
    pub sas_max: f64,
}

impl Default for PcThresholds {
    fn default() -> Self {
        PcThresholds { qed_min: 0.4, sas_max: 4.0 }
    }
}

/// Both bounds are inclusive.
pub fn pc_filter(qed_value: f64, sas_value: f64, thresholds: &PcThresholds) -> bool {
    qed_value >= thresholds.qed_min && sas_value <= thresholds.sas_max
}
