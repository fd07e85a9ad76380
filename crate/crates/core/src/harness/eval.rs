use super::report::RunReport;
use super::HarnessError;
use crate::fingerprint::{morgan_fingerprint, tanimoto, DEFAULT_N_BITS, DEFAULT_RADIUS};
use crate::molgraph::{canonical_smiles, parse_smiles};
use crate::tokenizer::tokenize_atomwise;
use serde::{Deserialize, Serialize};

/// Reconstruction quality over (input, decoded) pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub n: usize,
    /// Position-wise token matches over input tokens plus one end token per
    /// molecule. Decoding past the input length does not add to the denominator.
    pub token_accuracy: f64,
    /// Canonical forms equal.
    pub molecule_accuracy: f64,
    /// Mean Tanimoto of input vs decoded fingerprints; unparseable decodes score 0.
    pub tanimoto_accuracy: f64,
}

pub fn eval_reconstructions(pairs: &[(String, Option<String>)]) -> Result<EvalMetrics, HarnessError> {
    if pairs.is_empty() {
        return Ok(EvalMetrics::default());
    }
    let (mut tok_hit, mut tok_total, mut mol_hit, mut tani) = (0usize, 0usize, 0usize, 0.0);
    for (i, (input, decoded)) in pairs.iter().enumerate() {
        let data_err = |message: String| HarnessError::Data { file: "eval input".into(), line: i + 1, message };
        let in_tokens = tokenize_atomwise(input).map_err(|e| data_err(e.to_string()))?.tokens;
        let in_mol = parse_smiles(input).map_err(|e| data_err(e.to_string()))?;
        tok_total += in_tokens.len() + 1;
        let Some(decoded) = decoded else { continue };
        if let Ok(out) = tokenize_atomwise(decoded) {
            tok_hit += in_tokens.iter().zip(&out.tokens).filter(|(a, b)| a == b).count();
            if out.tokens.len() == in_tokens.len() {
                tok_hit += 1;
            }
        }
        if let Ok(out_mol) = parse_smiles(decoded) {
            if canonical_smiles(&out_mol) == canonical_smiles(&in_mol) {
                mol_hit += 1;
            }
            let a = morgan_fingerprint(&in_mol, DEFAULT_RADIUS, DEFAULT_N_BITS);
            let b = morgan_fingerprint(&out_mol, DEFAULT_RADIUS, DEFAULT_N_BITS);
            tani += tanimoto(&a, &b)?;
        }
    }
    let n = pairs.len() as f64;
    Ok(EvalMetrics {
        n: pairs.len(),
        token_accuracy: tok_hit as f64 / tok_total as f64,
        molecule_accuracy: mol_hit as f64 / n,
        tanimoto_accuracy: tani / n,
    })
}

/// Headline KPIs of one run against another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub candidate: String,
    pub baseline: String,
    /// NBM molecules per decode second, candidate over baseline.
    pub nbm_rate_ratio: Option<f64>,
    pub delta_sas: Option<f64>,
    pub novelty_pct_candidate: f64,
    pub novelty_pct_baseline: f64,
}

pub fn compare_reports(candidate: &RunReport, baseline: &RunReport) -> Result<Comparison, HarnessError> {
    if candidate.meta.pair != baseline.meta.pair {
        return Err(HarnessError::BaselineMismatch(format!(
            "pair {} vs {}",
            candidate.meta.pair, baseline.meta.pair
        )));
    }
    let base_rate = baseline.timing.molecules_per_second.nbm;
    Ok(Comparison {
        candidate: candidate.meta.label.clone(),
        baseline: baseline.meta.label.clone(),
        nbm_rate_ratio: (base_rate > 0.0).then(|| candidate.timing.molecules_per_second.nbm / base_rate),
        delta_sas: candidate.sas.mean.zip(baseline.sas.mean).map(|(c, b)| c - b),
        novelty_pct_candidate: 100.0 * candidate.novelty_fraction,
        novelty_pct_baseline: 100.0 * baseline.novelty_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_failed() {
        let m = eval_reconstructions(&[("CCO".into(), Some("CCO".into())), ("c1ccccc1".into(), None)]).unwrap();
        assert_eq!(m.n, 2);
        // 4 of 4 tokens for CCO, 0 of 9 for benzene.
        assert!((m.token_accuracy - 4.0 / 13.0).abs() < 1e-12);
        assert_eq!(m.molecule_accuracy, 0.5);
        assert_eq!(m.tanimoto_accuracy, 0.5);
    }

    #[test]
    fn same_molecule_other_spelling() {
        let m = eval_reconstructions(&[("CCO".into(), Some("OCC".into()))]).unwrap();
        assert_eq!(m.molecule_accuracy, 1.0);
        assert_eq!(m.tanimoto_accuracy, 1.0);
        assert!((m.token_accuracy - 2.0 / 4.0).abs() < 1e-12);
        assert!(eval_reconstructions(&[("C1CC".into(), None)]).is_err());
    }
}
