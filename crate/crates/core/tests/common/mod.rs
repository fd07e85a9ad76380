#![allow(dead_code)]

use mgbench::fingerprint::Fingerprint;
use mgbench::molgraph::{parse_smiles, read_corpus, Molecule};
use std::path::PathBuf;

pub fn data_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

/// (smiles, id) from the bundled corpus, in file order.
pub fn corpus() -> Vec<(String, Option<String>)> {
    read_corpus(&data_path("corpus.smi")).unwrap().into_iter().map(|r| (r.smiles, r.id)).collect()
}

pub fn corpus_molecules(n: usize) -> Vec<Molecule> {
    corpus().into_iter().take(n).map(|(s, _)| parse_smiles(&s).unwrap()).collect()
}

/// Rows of a `#`-commented TSV golden file.
pub fn golden(rel: &str) -> Vec<Vec<String>> {
    std::fs::read_to_string(data_path(rel))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split('\t').map(String::from).collect())
        .collect()
}

/// Bit-by-bit intersection and popcounts, independent of the word-level code.
pub fn naive_counts(a: &Fingerprint, b: &Fingerprint) -> (u32, u32, u32) {
    let (mut both, mut na, mut nb) = (0, 0, 0);
    for i in 0..a.n_bits() {
        let (x, y) = (a.get(i), b.get(i));
        na += u32::from(x);
        nb += u32::from(y);
        both += u32::from(x && y);
    }
    (both, na, nb)
}

pub fn naive_tanimoto(a: &Fingerprint, b: &Fingerprint) -> f64 {
    let (both, na, nb) = naive_counts(a, b);
    let union = (na + nb) as f64 - both as f64;
    if union == 0.0 { 1.0 } else { both as f64 / union }
}

pub fn naive_dice(a: &Fingerprint, b: &Fingerprint) -> f64 {
    let (both, na, nb) = naive_counts(a, b);
    let total = (na + nb) as f64;
    if total == 0.0 { 1.0 } else { 2.0 * both as f64 / total }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
