use super::{Decoder, DecoderError};
use crate::bridge::LatentVector;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformanceReport {
    pub name: String,
    pub latent_dim: usize,
    pub requests: usize,
    pub responses: usize,
    pub ok: usize,
    pub failed: usize,
    pub seconds: f64,
}

/// Sends `n_requests` seeded vectors in one batch, then a single-vector
/// batch, and checks that every input gets exactly one aligned answer.
/// Components are drawn from [-1.5, 1.5] so decoders see out-of-range input.
pub fn check_decoder(decoder: &mut dyn Decoder, n_requests: usize, seed: u64) -> Result<ConformanceReport, DecoderError> {
    let dim = decoder.latent_dim();
    if dim == 0 {
        return Err(DecoderError::Protocol("decoder reports latent_dim 0".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let zs: Vec<LatentVector> = (0..n_requests)
        .map(|_| LatentVector::new((0..dim).map(|_| rng.gen_range(-1.5..=1.5)).collect()))
        .collect();
    let start = Instant::now();
    let results = decoder.decode_batch(&zs)?;
    if results.len() != zs.len() {
        return Err(DecoderError::Protocol(format!("{} inputs produced {} outputs", zs.len(), results.len())));
    }
    let single = decoder.decode_batch(&zs[..zs.len().min(1)])?;
    if single.len() != zs.len().min(1) {
        return Err(DecoderError::Protocol("single-vector batch misaligned".into()));
    }
    let ok = results.iter().filter(|r| r.is_ok()).count();
    Ok(ConformanceReport {
        name: decoder.name().to_string(),
        latent_dim: dim,
        requests: zs.len(),
        responses: results.len(),
        ok,
        failed: results.len() - ok,
        seconds: start.elapsed().as_secs_f64(),
    })
}
