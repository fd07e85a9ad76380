//! Atomwise SMILES tokenization, vocabulary construction and fixed-length
//! id encoding with `<PAD>`/`<SOS>`/`<EOS>`/`<UNK>` reserved at ids 0..=3.

use std::collections::HashMap;
use std::io;
use std::path::Path;
use thiserror::Error;

pub const PAD: &str = "<PAD>";
pub const SOS: &str = "<SOS>";
pub const EOS: &str = "<EOS>";
pub const UNK: &str = "<UNK>";
pub const PAD_ID: u32 = 0;
pub const SOS_ID: u32 = 1;
pub const EOS_ID: u32 = 2;
pub const UNK_ID: u32 = 3;
const RESERVED: [&str; 4] = [PAD, SOS, EOS, UNK];

#[derive(Debug, Error)]
pub enum TokenizerError {
    #[error("unterminated '[' at position {0}")]
    UnterminatedBracket(usize),
    #[error("sequence needs {needed} slots but max_len is {max_len}")]
    TooLong { needed: usize, max_len: usize },
    #[error("token '{0}' is not in the vocabulary")]
    UnknownToken(String),
    #[error("id {0} is outside the vocabulary")]
    IdOutOfRange(u32),
    #[error("malformed vocabulary file: {0}")]
    BadVocab(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn join(&self) -> String {
        self.tokens.concat()
    }
}

/// Greedy left-to-right split: bracket atoms, `%nn`, `Cl` and `Br` are single
/// tokens and every other character stands alone.
pub fn tokenize_atomwise(text: &str) -> Result<TokenSequence, TokenizerError> {
    let mut tokens = Vec::new();
    let mut rest = text;
    let mut pos = 0;
    while let Some(c) = rest.chars().next() {
        let width = match c {
            '[' => rest.find(']').map(|e| e + 1).ok_or(TokenizerError::UnterminatedBracket(pos))?,
            '%' if rest.len() >= 3 && rest.as_bytes()[1..3].iter().all(u8::is_ascii_digit) => 3,
            'C' if rest[1..].starts_with('l') => 2,
            'B' if rest[1..].starts_with('r') => 2,
            _ => c.len_utf8(),
        };
        tokens.push(rest[..width].to_string());
        rest = &rest[width..];
        pos += width;
    }
    Ok(TokenSequence { tokens })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocab {
    fn from_tokens(tokens: Vec<String>) -> Result<Vocab, TokenizerError> {
        for (i, r) in RESERVED.iter().enumerate() {
            if tokens.get(i).map(String::as_str) != Some(*r) {
                return Err(TokenizerError::BadVocab(format!("line {} must be {r}", i + 1)));
            }
        }
        let mut ids = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() {
                return Err(TokenizerError::BadVocab(format!("empty token on line {}", i + 1)));
            }
            if ids.insert(t.clone(), i as u32).is_some() {
                return Err(TokenizerError::BadVocab(format!("duplicate token '{t}'")));
            }
        }
        Ok(Vocab { tokens, ids })
    }

    /// Number of entries including the four reserved symbols.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// One token per line; the line number (from 0) is the id.
    pub fn to_text(&self) -> String {
        let mut s = self.tokens.join("\n");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<Vocab, TokenizerError> {
        Vocab::from_tokens(text.lines().map(|l| l.trim_end_matches('\r').to_string()).collect())
    }

    pub fn save(&self, path: &Path) -> Result<(), TokenizerError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Vocab, TokenizerError> {
        Vocab::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Reserved symbols first, then tokens by descending frequency with ties in
/// lexicographic order, so the result does not depend on corpus order.
pub fn build_vocab<'a, I>(corpus: I) -> Vocab
where
    I: IntoIterator<Item = &'a TokenSequence>,
{
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for seq in corpus {
        for t in &seq.tokens {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut entries: Vec<(&str, u64)> = counts.into_iter().filter(|(t, _)| !RESERVED.contains(t)).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let tokens = RESERVED
        .iter()
        .map(|s| s.to_string())
        .chain(entries.into_iter().map(|(t, _)| t.to_string()))
        .collect();
    Vocab::from_tokens(tokens).expect("reserved prefix and unique tokens")
}

/// `[SOS, ids.., EOS, PAD..]` of exactly `max_len` ids.
pub fn encode(seq: &TokenSequence, vocab: &Vocab, max_len: usize, allow_unk: bool) -> Result<Vec<u32>, TokenizerError> {
    let needed = seq.len() + 2;
    if needed > max_len {
        return Err(TokenizerError::TooLong { needed, max_len });
    }
    let mut ids = Vec::with_capacity(max_len);
    ids.push(SOS_ID);
    for t in &seq.tokens {
        match vocab.id(t) {
            Some(id) => ids.push(id),
            None if allow_unk => ids.push(UNK_ID),
            None => return Err(TokenizerError::UnknownToken(t.clone())),
        }
    }
    ids.push(EOS_ID);
    ids.resize(max_len, PAD_ID);
    Ok(ids)
}

/// Concatenates tokens after an optional leading `<SOS>` up to the first
/// `<EOS>`; `<PAD>` is skipped and `<UNK>` is emitted literally.
pub fn decode(ids: &[u32], vocab: &Vocab) -> Result<String, TokenizerError> {
    let mut out = String::new();
    let body = match ids.first() {
        Some(&SOS_ID) => &ids[1..],
        _ => ids,
    };
    for &id in body {
        let token = vocab.token(id).ok_or(TokenizerError::IdOutOfRange(id))?;
        match id {
            EOS_ID => break,
            PAD_ID | SOS_ID => {}
            _ => out.push_str(token),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize_atomwise(s).unwrap().tokens
    }

    #[test]
    fn atomwise_examples() {
        assert_eq!(toks("CCO"), ["C", "C", "O"]);
        assert_eq!(toks("c1ccccc1Cl"), ["c", "1", "c", "c", "c", "c", "c", "1", "Cl"]);
        assert_eq!(toks("C[NH+](C)C"), ["C", "[NH+]", "(", "C", ")", "C"]);
        assert_eq!(toks("C%12CC%12Br"), ["C", "%12", "C", "C", "%12", "Br"]);
        assert_eq!(toks("%1"), ["%", "1"]);
        assert!(matches!(tokenize_atomwise("C[NH"), Err(TokenizerError::UnterminatedBracket(1))));
    }

    #[test]
    fn vocab_ordering() {
        let a = tokenize_atomwise("CCO").unwrap();
        let b = tokenize_atomwise("c1ccccc1").unwrap();
        let v = build_vocab([&a, &b]);
        assert_eq!(v.tokens(), ["<PAD>", "<SOS>", "<EOS>", "<UNK>", "c", "1", "C", "O"]);
        let w = build_vocab([&b, &a]);
        assert_eq!(v, w);
        let only = build_vocab([&a]);
        assert_eq!(only.len(), 6);
    }

    #[test]
    fn encode_pads_and_decodes() {
        let seq = tokenize_atomwise("C").unwrap();
        let v = build_vocab([&seq]);
        let ids = encode(&seq, &v, 5, false).unwrap();
        assert_eq!(ids, vec![SOS_ID, v.id("C").unwrap(), EOS_ID, PAD_ID, PAD_ID]);
        assert_eq!(decode(&ids, &v).unwrap(), "C");
        assert!(matches!(encode(&seq, &v, 2, false), Err(TokenizerError::TooLong { .. })));
        let other = tokenize_atomwise("N").unwrap();
        assert!(matches!(encode(&other, &v, 5, false), Err(TokenizerError::UnknownToken(_))));
        assert_eq!(encode(&other, &v, 5, true).unwrap()[1], UNK_ID);
        assert!(matches!(decode(&[99], &v), Err(TokenizerError::IdOutOfRange(99))));
    }

    #[test]
    fn vocab_file_round_trip() {
        let seq = tokenize_atomwise("CC(=O)Oc1ccccc1C(=O)O").unwrap();
        let v = build_vocab([&seq]);
        assert_eq!(Vocab::from_text(&v.to_text()).unwrap(), v);
        assert!(Vocab::from_text("C\nO\n").is_err());
        assert!(Vocab::from_text("<PAD>\n<SOS>\n<EOS>\n<UNK>\nC\nC\n").is_err());
    }
}
