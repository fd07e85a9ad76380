//! Deterministic reference encoder/decoder over fingerprint space.
//!
//! Index file, little-endian: `"LIX1"`, u64 seed, u32 d_latent, u32 d_fp,
//! u64 count, then per entry u32 SMILES length, SMILES bytes, d_fp/8 packed
//! fingerprint bytes and d_latent f32 components.

use super::{check_dims, DecodeResult, Decoder, DecoderError};
use crate::bridge::LatentVector;
use crate::fingerprint::{morgan_fingerprint, Fingerprint, DEFAULT_N_BITS, DEFAULT_RADIUS};
use crate::molgraph::{canonical_smiles, Molecule};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::collections::HashSet;
use std::io::{Read, Write};
use std::sync::Arc;

const MAGIC: &[u8; 4] = b"LIX1";

/// Seeded Gaussian matrix mapping fingerprint bits to latent components.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    d_fp: usize,
    d_latent: usize,
    /// Column per bit: `values[bit * d_latent + j]`.
    values: Vec<f64>,
}

impl Projection {
    pub fn new(seed: u64, d_fp: usize, d_latent: usize) -> Projection {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values = (0..d_fp * d_latent).map(|_| StandardNormal.sample(&mut rng)).collect();
        Projection { d_fp, d_latent, values }
    }

    pub fn d_fp(&self) -> usize {
        self.d_fp
    }

    pub fn d_latent(&self) -> usize {
        self.d_latent
    }
}

/// `tanh(P x / sqrt(popcount x))`; every component lies in (-1, 1).
pub fn reference_encode(fp: &Fingerprint, projection: &Projection) -> Result<LatentVector, DecoderError> {
    if fp.n_bits() != projection.d_fp {
        return Err(DecoderError::WidthMismatch { expected: projection.d_fp, got: fp.n_bits() });
    }
    let k = fp.popcount();
    if k == 0 {
        return Err(DecoderError::EmptyFingerprint);
    }
    let d = projection.d_latent;
    let mut acc = vec![0.0; d];
    for bit in fp.ones() {
        for (a, p) in acc.iter_mut().zip(&projection.values[bit * d..(bit + 1) * d]) {
            *a += p;
        }
    }
    let scale = (k as f64).sqrt();
    Ok(LatentVector::new(acc.into_iter().map(|x| (x / scale).tanh()).collect()))
}

fn round_f32(v: LatentVector) -> LatentVector {
    LatentVector::new(v.components.into_iter().map(|x| x as f32 as f64).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentIndex {
    seed: u64,
    projection: Projection,
    smiles: Vec<String>,
    fingerprints: Vec<Fingerprint>,
    /// Row-major, `d_latent` per entry.
    latents: Vec<f64>,
}

/// Canonicalizes, deduplicates (first occurrence wins) and encodes a corpus.
pub fn build_latent_index<'a, I>(corpus: I, seed: u64, d_latent: usize) -> Result<LatentIndex, DecoderError>
where
    I: IntoIterator<Item = &'a Molecule>,
{
    let mut seen = HashSet::new();
    let mut unique: Vec<(String, &Molecule)> = Vec::new();
    for mol in corpus {
        let smiles = canonical_smiles(mol);
        if seen.insert(smiles.clone()) {
            unique.push((smiles, mol));
        }
    }
    if unique.is_empty() {
        return Err(DecoderError::EmptyCorpus);
    }
    let projection = Projection::new(seed, DEFAULT_N_BITS, d_latent);
    let encoded: Vec<(Fingerprint, LatentVector)> = unique
        .par_iter()
        .map(|(_, mol)| {
            let fp = morgan_fingerprint(mol, DEFAULT_RADIUS, DEFAULT_N_BITS);
            let z = reference_encode(&fp, &projection).map(round_f32)?;
            Ok((fp, z))
        })
        .collect::<Result<_, DecoderError>>()?;
    let mut index = LatentIndex {
        seed,
        projection,
        smiles: Vec::with_capacity(unique.len()),
        fingerprints: Vec::with_capacity(unique.len()),
        latents: Vec::with_capacity(unique.len() * d_latent),
    };
    for ((smiles, _), (fp, z)) in unique.into_iter().zip(encoded) {
        index.smiles.push(smiles);
        index.fingerprints.push(fp);
        index.latents.extend(z.components);
    }
    Ok(index)
}

impl LatentIndex {
    pub fn len(&self) -> usize {
        self.smiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.smiles.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn d_latent(&self) -> usize {
        self.projection.d_latent
    }

    pub fn projection(&self) -> &Projection {
        &self.projection
    }

    pub fn smiles(&self, i: usize) -> &str {
        &self.smiles[i]
    }

    pub fn fingerprint(&self, i: usize) -> &Fingerprint {
        &self.fingerprints[i]
    }

    pub fn latent(&self, i: usize) -> &[f64] {
        let d = self.d_latent();
        &self.latents[i * d..(i + 1) * d]
    }

    /// Encoding rounded through f32, exactly as entries are stored.
    pub fn encode(&self, fp: &Fingerprint) -> Result<LatentVector, DecoderError> {
        reference_encode(fp, &self.projection).map(round_f32)
    }

    pub fn encode_molecule(&self, mol: &Molecule) -> Result<LatentVector, DecoderError> {
        self.encode(&morgan_fingerprint(mol, DEFAULT_RADIUS, self.projection.d_fp))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), DecoderError> {
        w.write_all(MAGIC)?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.d_latent() as u32).to_le_bytes())?;
        w.write_all(&(self.projection.d_fp as u32).to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for i in 0..self.len() {
            w.write_all(&(self.smiles[i].len() as u32).to_le_bytes())?;
            w.write_all(self.smiles[i].as_bytes())?;
            w.write_all(&self.fingerprints[i].to_bytes())?;
            for &x in self.latent(i) {
                w.write_all(&(x as f32).to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<LatentIndex, DecoderError> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        let mut cur = Cursor { buf: &buf, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(DecoderError::Format("bad magic".into()));
        }
        let seed = u64::from_le_bytes(cur.array()?);
        let d_latent = u32::from_le_bytes(cur.array()?) as usize;
        let d_fp = u32::from_le_bytes(cur.array()?) as usize;
        let count = u64::from_le_bytes(cur.array()?);
        if d_latent == 0 || d_fp == 0 || d_fp % 8 != 0 {
            return Err(DecoderError::Format(format!("bad dimensions {d_latent} x {d_fp}")));
        }
        let mut index = LatentIndex {
            seed,
            projection: Projection::new(seed, d_fp, d_latent),
            smiles: Vec::new(),
            fingerprints: Vec::new(),
            latents: Vec::new(),
        };
        for _ in 0..count {
            let len = u32::from_le_bytes(cur.array()?) as usize;
            let smiles = std::str::from_utf8(cur.take(len)?)
                .map_err(|_| DecoderError::Format("SMILES is not UTF-8".into()))?
                .to_string();
            let fp = Fingerprint::from_bytes(d_fp, DEFAULT_RADIUS, cur.take(d_fp / 8)?)
                .map_err(|e| DecoderError::Format(e.to_string()))?;
            for _ in 0..d_latent {
                let x = f32::from_le_bytes(cur.array()?);
                if !x.is_finite() {
                    return Err(DecoderError::Format("non-finite latent component".into()));
                }
                index.latents.push(x as f64);
            }
            index.smiles.push(smiles);
            index.fingerprints.push(fp);
        }
        if cur.pos != buf.len() {
            return Err(DecoderError::Format("trailing bytes".into()));
        }
        Ok(index)
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DecoderError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| DecoderError::Format("truncated file".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], DecoderError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
}

/// Entry with the smallest Euclidean distance to `z`; ties go to the
/// lexicographically smaller SMILES.
pub fn nn_decode<'a>(z: &LatentVector, index: &'a LatentIndex) -> Result<&'a str, DecoderError> {
    if index.is_empty() {
        return Err(DecoderError::EmptyIndex);
    }
    check_dims(std::slice::from_ref(z), index.d_latent())?;
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for i in 0..index.len() {
        let d: f64 = index.latent(i).iter().zip(&z.components).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_d || (d == best_d && index.smiles[i] < index.smiles[best]) {
            best = i;
            best_d = d;
        }
    }
    Ok(&index.smiles[best])
}

#[derive(Debug, Clone)]
pub struct ReferenceDecoder {
    index: Arc<LatentIndex>,
}

impl ReferenceDecoder {
    pub fn new(index: Arc<LatentIndex>) -> ReferenceDecoder {
        ReferenceDecoder { index }
    }

    pub fn index(&self) -> &LatentIndex {
        &self.index
    }
}

impl Decoder for ReferenceDecoder {
    fn name(&self) -> &str {
        "reference"
    }

    fn latent_dim(&self) -> usize {
        self.index.d_latent()
    }

    /// Total for finite input: every slot decodes to some index entry.
    fn decode_batch(&mut self, zs: &[LatentVector]) -> Result<Vec<DecodeResult>, DecoderError> {
        check_dims(zs, self.latent_dim())?;
        zs.par_iter()
            .map(|z| nn_decode(z, &self.index).map(|s| Ok(s.to_string())))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn index(smiles: &[&str]) -> LatentIndex {
        let mols: Vec<Molecule> = smiles.iter().map(|s| parse_smiles(s).unwrap()).collect();
        build_latent_index(&mols, 11, 16).unwrap()
    }

    #[test]
    fn dedupes_and_round_trips() {
        let idx = index(&["CCO", "OCC", "c1ccccc1", "CC(=O)O"]);
        assert_eq!(idx.len(), 3);
        let mut buf = Vec::new();
        idx.write_to(&mut buf).unwrap();
        let back = LatentIndex::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, idx);
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(again, buf);
        assert!(LatentIndex::read_from(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn own_latent_decodes_to_entry() {
        let idx = index(&["CCO", "c1ccccc1", "CC(=O)O", "CCN"]);
        for i in 0..idx.len() {
            let z = LatentVector::new(idx.latent(i).to_vec());
            assert_eq!(nn_decode(&z, &idx).unwrap(), idx.smiles(i));
            assert_eq!(idx.encode(idx.fingerprint(i)).unwrap(), z);
        }
    }

    #[test]
    fn equidistant_tie_prefers_smaller_smiles() {
        let mut idx = index(&["CCO", "CCN"]);
        let d = idx.d_latent();
        idx.latents = [vec![1.0; d], vec![-1.0; d]].concat();
        let z = LatentVector::zeros(d);
        let expected = idx.smiles(0).min(idx.smiles(1)).to_string();
        assert_eq!(nn_decode(&z, &idx).unwrap(), expected);
    }

    #[test]
    fn encode_errors() {
        let p = Projection::new(1, 64, 4);
        assert!(matches!(reference_encode(&Fingerprint::new(64, 2), &p), Err(DecoderError::EmptyFingerprint)));
        assert!(matches!(reference_encode(&Fingerprint::new(128, 2), &p), Err(DecoderError::WidthMismatch { .. })));
        let z = reference_encode(&Fingerprint::from_bits(64, 2, [1, 5, 9]), &p).unwrap();
        assert!(z.components.iter().all(|x| x.abs() < 1.0));
    }
}
