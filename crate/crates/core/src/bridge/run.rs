//! Bridge runs and the noise scan.
//!
//! GenerationSet file: a `#` header line, then one tab-separated record per
//! line: grid_index, perturb_index, t, raw_smiles, valid_flag (0/1),
//! canonical_smiles (empty when invalid), decode_micros.

use super::{grid_t, mix, perturb, slerp, BridgeConfig, BridgeError, LatentVector};
use crate::decoder::Decoder;
use crate::molgraph::{canonical_smiles, parse_smiles};
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::time::Instant;

pub const DEFAULT_SCAN_SIGMAS: [f64; 7] = [0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5];
const HEADER: &str = "# grid_index\tperturb_index\tt\traw_smiles\tvalid_flag\tcanonical_smiles\tdecode_micros";

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeRecord {
    pub grid_index: u32,
    pub perturb_index: u32,
    pub t: f64,
    /// Empty when the decoder reported a failure for this slot.
    pub raw_smiles: String,
    pub valid: bool,
    pub canonical: String,
    pub decode_micros: u64,
}

impl BridgeRecord {
    fn from_decode(grid_index: u32, perturb_index: u32, t: f64, raw: Option<String>, decode_micros: u64) -> BridgeRecord {
        let raw_smiles = raw.unwrap_or_default().replace(['\t', '\n', '\r'], " ");
        let canonical = if raw_smiles.is_empty() {
            None
        } else {
            parse_smiles(&raw_smiles).ok().map(|m| canonical_smiles(&m))
        };
        BridgeRecord {
            grid_index,
            perturb_index,
            t,
            raw_smiles,
            valid: canonical.is_some(),
            canonical: canonical.unwrap_or_default(),
            decode_micros,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenerationSet {
    pub records: Vec<BridgeRecord>,
}

impl GenerationSet {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// With `with_timing = false` every decode_micros is written as 0 so two
    /// runs with the same seed give identical bytes.
    pub fn write_to<W: Write>(&self, mut w: W, with_timing: bool) -> Result<(), BridgeError> {
        write_header(&mut w)?;
        for r in &self.records {
            write_record(&mut w, r, with_timing)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<GenerationSet, BridgeError> {
        let mut records = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.starts_with('#') || line.is_empty() {
                continue;
            }
            records.push(parse_record(&line).map_err(|message| BridgeError::Format { line: i + 1, message })?);
        }
        Ok(GenerationSet { records })
    }
}

pub fn write_header<W: Write>(w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{HEADER}")
}

/// Streaming counterpart of `GenerationSet::write_to`, one record at a time.
pub fn write_record<W: Write>(w: &mut W, r: &BridgeRecord, with_timing: bool) -> std::io::Result<()> {
    writeln!(
        w,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}",
        r.grid_index,
        r.perturb_index,
        r.t,
        r.raw_smiles,
        u8::from(r.valid),
        r.canonical,
        if with_timing { r.decode_micros } else { 0 }
    )
}

fn parse_record(line: &str) -> Result<BridgeRecord, String> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() != 7 {
        return Err(format!("expected 7 fields, got {}", f.len()));
    }
    let num = |i: usize| -> Result<u64, String> { f[i].parse().map_err(|_| format!("bad integer '{}'", f[i])) };
    let valid = match f[4] {
        "0" => false,
        "1" => true,
        other => return Err(format!("bad valid flag '{other}'")),
    };
    if valid == f[5].is_empty() {
        return Err("canonical must be present iff valid".into());
    }
    Ok(BridgeRecord {
        grid_index: num(0)? as u32,
        perturb_index: num(1)? as u32,
        t: f[2].parse().map_err(|_| format!("bad t '{}'", f[2]))?,
        raw_smiles: f[3].to_string(),
        valid,
        canonical: f[5].to_string(),
        decode_micros: num(6)?,
    })
}

/// Streams `n_grid * n_perturb` records to `sink` in (grid, perturbation)
/// order and returns the total decode wall-clock in seconds. Perturbations
/// for candidate (g, p) come from the stream seeded with `mix(seed, g, p)`.
pub fn bridge_run_with<F>(
    a: &LatentVector,
    b: &LatentVector,
    decoder: &mut dyn Decoder,
    cfg: &BridgeConfig,
    mut sink: F,
) -> Result<f64, BridgeError>
where
    F: FnMut(BridgeRecord) -> Result<(), BridgeError>,
{
    cfg.validate()?;
    if a.dim() != decoder.latent_dim() {
        return Err(BridgeError::DimensionMismatch(decoder.latent_dim(), a.dim()));
    }
    let mut decode_seconds = 0.0;
    for g in 0..cfg.n_grid {
        let t = grid_t(g, cfg.n_grid, cfg.include_endpoints);
        let center = slerp(a, b, t)?;
        let zs: Vec<LatentVector> = (0..cfg.n_perturb)
            .into_par_iter()
            .map(|p| {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(mix(cfg.seed, g as u64, p as u64));
                perturb(&center, cfg.sigma, &mut rng)
            })
            .collect::<Result<_, _>>()?;
        let start = Instant::now();
        let decoded = decoder.decode_batch(&zs)?;
        let elapsed = start.elapsed();
        if decoded.len() != zs.len() {
            return Err(BridgeError::Decoder(crate::decoder::DecoderError::Protocol(format!(
                "{} inputs produced {} outputs",
                zs.len(),
                decoded.len()
            ))));
        }
        decode_seconds += elapsed.as_secs_f64();
        let per_record = (elapsed.as_micros() / zs.len() as u128) as u64;
        let records: Vec<BridgeRecord> = decoded
            .into_par_iter()
            .enumerate()
            .map(|(p, res)| BridgeRecord::from_decode(g as u32, p as u32, t, res.ok(), per_record))
            .collect();
        for r in records {
            sink(r)?;
        }
    }
    Ok(decode_seconds)
}

/// Collects a full run in memory.
pub fn bridge_run(
    a: &LatentVector,
    b: &LatentVector,
    decoder: &mut dyn Decoder,
    cfg: &BridgeConfig,
) -> Result<GenerationSet, BridgeError> {
    let mut set = GenerationSet { records: Vec::with_capacity(cfg.total()) };
    bridge_run_with(a, b, decoder, cfg, |r| {
        set.records.push(r);
        Ok(())
    })?;
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaStats {
    pub sigma: f64,
    pub total: usize,
    pub valid: usize,
    pub unique: usize,
    /// Distinct valid canonical forms absent from the corpus index.
    pub novel: usize,
    pub decode_seconds: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub per_sigma: Vec<SigmaStats>,
    /// Sigma with the most novel unique valid molecules; ties go to the smaller sigma.
    pub sigma_star: Option<f64>,
}

pub fn noise_scan(
    a: &LatentVector,
    b: &LatentVector,
    sigmas: &[f64],
    decoder: &mut dyn Decoder,
    cfg: &BridgeConfig,
    corpus_index: &HashSet<String>,
) -> Result<ScanResult, BridgeError> {
    let mut per_sigma = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let run_cfg = BridgeConfig { sigma, ..cfg.clone() };
        run_cfg.validate()?;
        let mut stats = SigmaStats { sigma, total: 0, valid: 0, unique: 0, novel: 0, decode_seconds: 0.0, error: None };
        let mut seen = HashSet::new();
        let outcome = bridge_run_with(a, b, decoder, &run_cfg, |r| {
            stats.total += 1;
            if r.valid {
                stats.valid += 1;
                if !corpus_index.contains(&r.canonical) && !seen.contains(&r.canonical) {
                    stats.novel += 1;
                }
                seen.insert(r.canonical);
            }
            Ok(())
        });
        stats.unique = seen.len();
        match outcome {
            Ok(secs) => stats.decode_seconds = secs,
            Err(BridgeError::Decoder(e)) => stats.error = Some(e.to_string()),
            Err(e) => return Err(e),
        }
        per_sigma.push(stats);
    }
    let sigma_star = per_sigma
        .iter()
        .filter(|s| s.error.is_none())
        .fold(None::<&SigmaStats>, |best, s| match best {
            Some(b) if b.novel > s.novel || (b.novel == s.novel && b.sigma <= s.sigma) => Some(b),
            _ => Some(s),
        })
        .map(|s| s.sigma);
    Ok(ScanResult { per_sigma, sigma_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::{ConstantDecoder, DecodeResult, DecoderError};

    /// Decodes to a chain whose length encodes the first component.
    struct ChainDecoder;

    impl Decoder for ChainDecoder {
        fn name(&self) -> &str {
            "chain"
        }
        fn latent_dim(&self) -> usize {
            2
        }
        fn decode_batch(&mut self, zs: &[LatentVector]) -> Result<Vec<DecodeResult>, DecoderError> {
            Ok(zs.iter().map(|z| Ok("C".repeat(1 + (z.components[0] * 1000.0).round() as usize % 40))).collect())
        }
    }

    fn ab() -> (LatentVector, LatentVector) {
        (LatentVector::new(vec![0.0, 1.0]), LatentVector::new(vec![1.0, 0.0]))
    }

    #[test]
    fn record_counts_and_order() {
        let (a, b) = ab();
        let cfg = BridgeConfig { n_grid: 4, n_perturb: 3, sigma: 0.1, seed: 5, include_endpoints: true };
        let set = bridge_run(&a, &b, &mut ChainDecoder, &cfg).unwrap();
        assert_eq!(set.len(), 12);
        let keys: Vec<(u32, u32)> = set.records.iter().map(|r| (r.grid_index, r.perturb_index)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(set.records[0].t, 0.0);
        assert_eq!(set.records[11].t, 1.0);
    }

    #[test]
    fn same_seed_same_records() {
        let (a, b) = ab();
        let cfg = BridgeConfig { n_grid: 5, n_perturb: 7, sigma: 0.2, seed: 9, include_endpoints: true };
        let x = bridge_run(&a, &b, &mut ChainDecoder, &cfg).unwrap();
        let y = bridge_run(&a, &b, &mut ChainDecoder, &cfg).unwrap();
        let strip = |s: &GenerationSet| s.records.iter().map(|r| r.raw_smiles.clone()).collect::<Vec<_>>();
        assert_eq!(strip(&x), strip(&y));
        let z = bridge_run(&a, &b, &mut ChainDecoder, &BridgeConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(strip(&x), strip(&z));
    }

    #[test]
    fn file_round_trip() {
        let (a, b) = ab();
        let cfg = BridgeConfig { n_grid: 3, n_perturb: 2, sigma: 0.05, seed: 1, include_endpoints: true };
        let mut set = bridge_run(&a, &b, &mut ChainDecoder, &cfg).unwrap();
        set.records[1].raw_smiles = "C1CC".into();
        set.records[1].valid = false;
        set.records[1].canonical.clear();
        let mut buf = Vec::new();
        set.write_to(&mut buf, true).unwrap();
        assert_eq!(GenerationSet::read_from(buf.as_slice()).unwrap(), set);
        let mut untimed = Vec::new();
        set.write_to(&mut untimed, false).unwrap();
        let back = GenerationSet::read_from(untimed.as_slice()).unwrap();
        assert!(back.records.iter().all(|r| r.decode_micros == 0));
        assert!(GenerationSet::read_from("0\t0\t0\tC\t1\t\t5\n".as_bytes()).is_err());
    }

    #[test]
    fn invalid_and_failed_slots() {
        let r = BridgeRecord::from_decode(0, 0, 0.0, Some("C1CC".into()), 1);
        assert!(!r.valid && r.canonical.is_empty());
        let r = BridgeRecord::from_decode(0, 0, 0.0, None, 1);
        assert!(!r.valid && r.raw_smiles.is_empty());
        let r = BridgeRecord::from_decode(0, 0, 0.0, Some("OCC".into()), 1);
        assert_eq!(r.canonical, "CCO");
    }

    #[test]
    fn scan_with_constant_decoder() {
        let (a, b) = ab();
        let cfg = BridgeConfig { n_grid: 3, n_perturb: 4, ..BridgeConfig::coarse() };
        let mut dec = ConstantDecoder { smiles: "CCO".into(), dim: 2 };
        let scan = noise_scan(&a, &b, &[0.0, 0.1], &mut dec, &cfg, &HashSet::new()).unwrap();
        assert_eq!(scan.per_sigma[0].total, 12);
        assert_eq!(scan.per_sigma[0].unique, 1);
        assert_eq!(scan.sigma_star, Some(0.0));
        let known: HashSet<String> = ["CCO".to_string()].into();
        let scan = noise_scan(&a, &b, &[0.0], &mut dec, &cfg, &known).unwrap();
        assert_eq!(scan.per_sigma[0].novel, 0);
    }
}
