//! Corpus files: one `SMILES<TAB>optional-id` record per line, `#` comments.

use std::io;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRecord {
    /// 1-based line number in the source file.
    pub line: usize,
    pub smiles: String,
    pub id: Option<String>,
}

pub fn read_corpus_str(text: &str) -> Vec<CorpusRecord> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                return None;
            }
            let mut parts = line.splitn(2, '\t');
            let smiles = parts.next().unwrap_or("").trim().to_string();
            let id = parts.next().map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
            Some(CorpusRecord { line: i + 1, smiles, id })
        })
        .collect()
}

pub fn read_corpus(path: &Path) -> io::Result<Vec<CorpusRecord>> {
    Ok(read_corpus_str(&std::fs::read_to_string(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blank_lines_and_ids() {
        let recs = read_corpus_str("# header\nCCO\tethanol\n\nc1ccccc1\n");
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0], CorpusRecord { line: 2, smiles: "CCO".into(), id: Some("ethanol".into()) });
        assert_eq!(recs[1].id, None);
        assert_eq!(recs[1].line, 4);
    }
}
