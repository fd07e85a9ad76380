//! Morgan circular fingerprints, bitset similarity and the relative Dice score.

mod bitset;
mod morgan;
mod similarity;
mod store;

pub use bitset::Fingerprint;
pub use morgan::{fingerprint_all, morgan_counts, morgan_fingerprint, DEFAULT_N_BITS, DEFAULT_RADIUS};
pub use similarity::{dice, rds, tanimoto, RdsValue};
pub use store::FingerprintStore;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FingerprintError {
    #[error("fingerprint widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("degenerate reference pair: the two references have Dice similarity 1")]
    DegenerateReferencePair,
    #[error("fingerprint width {0} must be a positive multiple of 8")]
    BadWidth(usize),
    #[error("malformed fingerprint store: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
