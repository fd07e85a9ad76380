use super::{Fingerprint, FingerprintError};

/// |a ∧ b| / |a ∨ b|; two empty bitsets count as identical (1.0).
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, FingerprintError> {
    let both = a.intersection_count(b)? as f64;
    let union = (a.popcount() + b.popcount()) as f64 - both;
    Ok(if union == 0.0 { 1.0 } else { both / union })
}

/// 2|a ∧ b| / (|a| + |b|); two empty bitsets give 1.0.
pub fn dice(a: &Fingerprint, b: &Fingerprint) -> Result<f64, FingerprintError> {
    let both = a.intersection_count(b)? as f64;
    let total = (a.popcount() + b.popcount()) as f64;
    Ok(if total == 0.0 { 1.0 } else { 2.0 * both / total })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdsValue {
    /// In [-1, 1]; negative means closer to reference A.
    pub value: f64,
    /// Whether the raw ratio fell outside [-1, 1] and was clamped.
    pub clamped: bool,
}

/// Relative Dice similarity of a candidate between references A and B:
/// (d(B,i) - d(A,i)) / (1 - d(A,B)).
pub fn rds(fp_i: &Fingerprint, fp_a: &Fingerprint, fp_b: &Fingerprint) -> Result<RdsValue, FingerprintError> {
    let d_ab = dice(fp_a, fp_b)?;
    if d_ab >= 1.0 {
        return Err(FingerprintError::DegenerateReferencePair);
    }
    let d_ai = dice(fp_a, fp_i)?;
    let d_bi = dice(fp_b, fp_i)?;
    let raw = (d_bi - d_ai) / (1.0 - d_ab);
    let value = raw.clamp(-1.0, 1.0);
    Ok(RdsValue { value, clamped: value != raw })
}
