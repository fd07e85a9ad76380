pub mod bridge;
pub mod decoder;
pub mod descriptors;
pub mod fingerprint;
pub mod harness;
pub mod molgraph;
pub mod scaffold;
pub mod smarts;
pub mod tokenizer;
