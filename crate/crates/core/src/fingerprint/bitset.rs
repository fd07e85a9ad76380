use super::FingerprintError;

/// Fixed-width bitset with the Morgan parameters that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    n_bits: usize,
    radius: u32,
    words: Vec<u64>,
}

impl Fingerprint {
    pub fn new(n_bits: usize, radius: u32) -> Fingerprint {
        Fingerprint { n_bits, radius, words: vec![0; n_bits.div_ceil(64)] }
    }

    pub fn from_bits(n_bits: usize, radius: u32, bits: impl IntoIterator<Item = usize>) -> Fingerprint {
        let mut fp = Fingerprint::new(n_bits, radius);
        for b in bits {
            fp.set(b);
        }
        fp
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// # Panics
    /// If `bit >= n_bits`.
    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.n_bits, "bit {bit} outside width {}", self.n_bits);
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.n_bits && self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn popcount(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub(crate) fn check_width(&self, other: &Fingerprint) -> Result<(), FingerprintError> {
        if self.n_bits != other.n_bits {
            return Err(FingerprintError::WidthMismatch(self.n_bits, other.n_bits));
        }
        Ok(())
    }

    pub fn intersection_count(&self, other: &Fingerprint) -> Result<u32, FingerprintError> {
        self.check_width(other)?;
        Ok(self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum())
    }

    /// Packed little-endian bytes: bit `i` is bit `i % 8` of byte `i / 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.n_bits.div_ceil(8));
        out
    }

    pub fn from_bytes(n_bits: usize, radius: u32, bytes: &[u8]) -> Result<Fingerprint, FingerprintError> {
        if n_bits == 0 || n_bits % 8 != 0 {
            return Err(FingerprintError::BadWidth(n_bits));
        }
        if bytes.len() != n_bits / 8 {
            return Err(FingerprintError::Format(format!("expected {} bytes, got {}", n_bits / 8, bytes.len())));
        }
        let mut fp = Fingerprint::new(n_bits, radius);
        for (i, chunk) in bytes.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            fp.words[i] = u64::from_le_bytes(buf);
        }
        Ok(fp)
    }

    /// The bits as 0.0/1.0 values, for projection into a latent space.
    pub fn to_dense(&self) -> Vec<f64> {
        (0..self.n_bits).map(|i| if self.get(i) { 1.0 } else { 0.0 }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_popcount() {
        let fp = Fingerprint::from_bits(128, 2, [0, 63, 64, 127]);
        assert_eq!(fp.popcount(), 4);
        assert!(fp.get(63) && fp.get(64) && !fp.get(65));
        assert_eq!(fp.ones().collect::<Vec<_>>(), vec![0, 63, 64, 127]);
    }

    #[test]
    fn byte_round_trip() {
        let fp = Fingerprint::from_bits(24, 1, [1, 9, 23]);
        let bytes = fp.to_bytes();
        assert_eq!(bytes, vec![0b10, 0b10, 0b1000_0000]);
        assert_eq!(Fingerprint::from_bytes(24, 1, &bytes).unwrap(), fp);
        assert!(Fingerprint::from_bytes(12, 1, &bytes[..2]).is_err());
    }
}
