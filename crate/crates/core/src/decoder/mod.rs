//! Decoders turn latent vectors into SMILES. The built-in reference decoder
//! is a nearest-neighbour lookup over a projected fingerprint index; external
//! models connect through a newline-delimited JSON protocol.

mod conformance;
mod protocol;
mod reference;

pub use conformance::{check_decoder, ConformanceReport};
pub use protocol::{serve, Endpoint, ProtocolClient, DEFAULT_TIMEOUT};
pub use reference::{build_latent_index, nn_decode, reference_encode, LatentIndex, Projection, ReferenceDecoder};

use crate::bridge::LatentVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DecoderError {
    #[error("decoder transport failed: {0}")]
    Transport(String),
    #[error("decoder timed out after {0:?}")]
    Timeout(std::time::Duration),
    #[error("decoder protocol violation: {0}")]
    Protocol(String),
    #[error("latent dimension mismatch: decoder takes {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("latent index is empty")]
    EmptyIndex,
    #[error("cannot build an index from an empty corpus")]
    EmptyCorpus,
    #[error("fingerprint has no set bits")]
    EmptyFingerprint,
    #[error("fingerprint width {got} does not match projection width {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("malformed index file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl DecoderError {
    /// Errors caused by the link to an external decoder rather than its input.
    pub fn is_transport(&self) -> bool {
        matches!(self, DecoderError::Transport(_) | DecoderError::Timeout(_) | DecoderError::Protocol(_))
    }
}

/// Per-slot outcome: a SMILES string, or the decoder's failure message.
pub type DecodeResult = Result<String, String>;

pub trait Decoder {
    fn name(&self) -> &str;
    fn latent_dim(&self) -> usize;
    /// One result per input, in input order.
    fn decode_batch(&mut self, zs: &[LatentVector]) -> Result<Vec<DecodeResult>, DecoderError>;
}

pub(crate) fn check_dims(zs: &[LatentVector], expected: usize) -> Result<(), DecoderError> {
    match zs.iter().find(|z| z.dim() != expected) {
        Some(z) => Err(DecoderError::DimensionMismatch { expected, got: z.dim() }),
        None => Ok(()),
    }
}

/// Decodes every vector to the same string. Useful as a test double.
#[derive(Debug, Clone)]
pub struct ConstantDecoder {
    pub smiles: String,
    pub dim: usize,
}

impl Decoder for ConstantDecoder {
    fn name(&self) -> &str {
        "constant"
    }

    fn latent_dim(&self) -> usize {
        self.dim
    }

    fn decode_batch(&mut self, zs: &[LatentVector]) -> Result<Vec<DecodeResult>, DecoderError> {
        check_dims(zs, self.dim)?;
        Ok(zs.iter().map(|_| Ok(self.smiles.clone())).collect())
    }
}
