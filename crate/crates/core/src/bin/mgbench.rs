//! mgbench command-line interface.
//!
//! Every flag can also come from a `--config FILE` of `key = value` lines
//! (`#` comments allowed). Keys are the long flag names; flags given on the
//! command line win. Boolean flags take `true` or `false`.
//!
//! Exit codes: 0 ok, 1 usage, 2 data error, 3 decoder transport error.

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use mgbench::bridge::{
    bridge_run_with, noise_scan, write_header, write_record, BridgeConfig, BridgeError, BridgeRecord,
    GenerationSet, LatentVector, DEFAULT_LATENT_DIM,
    DEFAULT_SCAN_SIGMAS,
};
use mgbench::decoder::{
    build_latent_index, check_decoder, serve, Decoder, DecoderError, Endpoint, LatentIndex, ProtocolClient,
    ReferenceDecoder,
};
use mgbench::descriptors::{build_fragment_scores, DescriptorError, DescriptorTables, FragScores, PcThresholds};
use mgbench::fingerprint::{morgan_fingerprint, FingerprintError, FingerprintStore, DEFAULT_N_BITS, DEFAULT_RADIUS};
use mgbench::harness::{
    bundled_reference_pairs, compare_reports, eval_reconstructions, export_distributions, filter_cascade, find_pair,
    kpi_report, parse_reference_pairs, prep_dataset, read_latent_pair, CascadeContext, HarnessError, LatentPair,
    PrepConfig, PrepOutput, ReferencePair, RunMeta, RunReport,
};
use mgbench::molgraph::{canonical_smiles, parse_smiles, read_corpus, strip_stereo_and_components, Molecule};
use mgbench::tokenizer::{build_vocab, tokenize_atomwise, TokenizerError};
use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Transport(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Transport(_) => 3,
        }
    }
}

impl From<DecoderError> for CliError {
    fn from(e: DecoderError) -> Self {
        if e.is_transport() { CliError::Transport(e.to_string()) } else { CliError::Data(e.to_string()) }
    }
}

impl From<BridgeError> for CliError {
    fn from(e: BridgeError) -> Self {
        match e {
            BridgeError::Decoder(d) => d.into(),
            BridgeError::Config(_) | BridgeError::NegativeSigma(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Decoder(d) => d.into(),
            HarnessError::UnknownPair(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}
data_error!(io::Error, serde_json::Error, DescriptorError, FingerprintError, TokenizerError);

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "mgbench", version, about = "Molecular-generation benchmark toolkit")]
struct Cli {
    /// key = value file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean a raw corpus and split it into train/test files.
    Prep(PrepArgs),
    /// Build a token vocabulary from a corpus.
    Vocab(IoArgs),
    /// Fingerprint a corpus into a binary store.
    Fp(FpArgs),
    /// Build the SAS fragment-score table from a corpus.
    Fragscores(IoArgs),
    /// Build the reference decoder's latent index from a corpus.
    Index(IndexArgs),
    /// Noise scan: validity, uniqueness and novelty per sigma.
    Scan(ScanArgs),
    /// Bridge run with the filter cascade and report.
    Run(RunArgs),
    /// Recompute a report from a generations file.
    Report(ReportArgs),
    /// Serve the reference decoder over the decoder protocol.
    Serve(ServeArgs),
    /// Run the protocol conformance check against a decoder.
    CheckDecoder(CheckArgs),
    /// Token, molecule and Tanimoto reconstruction accuracy.
    Eval(EvalArgs),
    /// Headline KPIs of one report against a baseline report.
    Compare(CompareArgs),
}

#[derive(Args)]
struct IoArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PrepArgs {
    #[arg(long)]
    input: PathBuf,
    /// Receives train.smi, test.smi and prep_stats.json.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    min_len: usize,
    #[arg(long, default_value_t = 200)]
    max_len: usize,
    #[arg(long, default_value_t = 215)]
    max_randomized_len: usize,
    #[arg(long, default_value_t = 10)]
    randomized_samples: usize,
    #[arg(long, default_value_t = 0.1)]
    test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FpArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    radius: u32,
    #[arg(long, default_value_t = DEFAULT_N_BITS)]
    bits: usize,
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_LATENT_DIM)]
    latent_dim: usize,
}

#[derive(Args)]
struct DecoderArgs {
    /// `reference` or `proto:<exec:CMD|tcp:HOST:PORT|unix:PATH>`.
    #[arg(long, default_value = "reference")]
    decoder: String,
    /// Latent index for the reference decoder (and reference encoding of the pair).
    #[arg(long)]
    index: Option<PathBuf>,
    /// JSON {"a": [...], "b": [...]} with the pair's latents, for external decoders.
    #[arg(long)]
    latents: Option<PathBuf>,
    /// Per-batch timeout for protocol decoders, in seconds.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
}

#[derive(Args)]
struct PairArgs {
    /// Pair class (e.g. NSAID) or NameA/NameB.
    #[arg(long)]
    pair: String,
    /// Reference pair TSV; the bundled four pairs when absent.
    #[arg(long)]
    pairs: Option<PathBuf>,
}

#[derive(Args)]
struct ScoringArgs {
    /// Training corpus; decodes found here are not novel.
    #[arg(long)]
    train: PathBuf,
    /// SAS fragment table; built from --train when absent.
    #[arg(long)]
    fragscores: Option<PathBuf>,
    #[arg(long, default_value_t = 0.4)]
    qed_min: f64,
    #[arg(long, default_value_t = 4.0)]
    sas_max: f64,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// Training corpus for the novelty count.
    #[arg(long)]
    train: PathBuf,
    #[arg(long, value_delimiter = ',')]
    sigmas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100)]
    grid: usize,
    #[arg(long, default_value_t = 100)]
    perturb: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Place grid points strictly inside (0, 1).
    #[arg(long)]
    exclude_endpoints: bool,
    /// Scan result JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[arg(long)]
    sigma: f64,
    /// 100 x 5000 unless --grid/--perturb say otherwise.
    #[arg(long)]
    production: bool,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    perturb: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    exclude_endpoints: bool,
    /// Receives generations.tsv, run_meta.json, report.json and the CSV exports.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value = "run")]
    label: String,
    /// Report of a comparison run for the SAS delta.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Write zeros for every timing field so outputs are byte-reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    generations: PathBuf,
    #[command(flatten)]
    pair: PairArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
    /// Run metadata; run_meta.json next to the generations file when absent.
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    baseline: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    index: PathBuf,
    /// tcp:HOST:PORT or unix:PATH; stdin/stdout when absent.
    #[arg(long)]
    listen: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    decoder: DecoderArgs,
    #[arg(long, default_value_t = 10_000)]
    requests: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    /// TSV of input SMILES and decoded SMILES (empty when decoding failed).
    #[arg(long, conflicts_with = "corpus")]
    reconstructions: Option<PathBuf>,
    /// Corpus to encode with --index and decode with --decoder.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[command(flatten)]
    decoder: DecoderArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    candidate: PathBuf,
    #[arg(long)]
    baseline: PathBuf,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match apply_config(argv) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    let command = Cli::command().args_override_self(true).mut_subcommands(|s| s.args_override_self(true));
    let cli = match command.try_get_matches_from(&argv).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("mgbench: {e}");
    ExitCode::from(e.code())
}

/// Appends `--key value` for config entries whose flag is not already on the
/// command line.
fn apply_config(argv: Vec<String>) -> Result<Vec<String>> {
    let mut args = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            config = Some(it.next().ok_or_else(|| CliError::Usage("--config needs a file".into()))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.to_string());
        } else {
            args.push(a);
        }
    }
    let Some(config) = config else { return Ok(args) };
    let text = std::fs::read_to_string(&config).map_err(|e| CliError::Usage(format!("{config}: {e}")))?;
    let cmd = Cli::command();
    let Some(sub) = args.get(1).and_then(|name| cmd.find_subcommand(name)) else {
        return Ok(args);
    };
    let present: HashSet<String> = args
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{config}:{}: expected key = value", n + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| CliError::Usage(format!("{config}:{}: unknown key '{key}' for {}", n + 1, sub.get_name())))?;
        if present.contains(&key) {
            continue;
        }
        if arg.get_action().takes_values() {
            args.push(format!("--{key}"));
            args.push(value.to_string());
        } else {
            match value {
                "true" => args.push(format!("--{key}")),
                "false" => {}
                _ => return Err(CliError::Usage(format!("{config}:{}: '{key}' takes true or false", n + 1))),
            }
        }
    }
    Ok(args)
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Prep(a) => cmd_prep(a),
        Command::Vocab(a) => cmd_vocab(a),
        Command::Fp(a) => cmd_fp(a),
        Command::Fragscores(a) => cmd_fragscores(a),
        Command::Index(a) => cmd_index(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Run(a) => cmd_run(a),
        Command::Report(a) => cmd_report(a),
        Command::Serve(a) => cmd_serve(a),
        Command::CheckDecoder(a) => cmd_check(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Compare(a) => cmd_compare(a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Parses every corpus line after stripping; unparseable lines are skipped
/// and counted on stderr.
fn load_molecules(path: &Path) -> Result<Vec<(Molecule, Option<String>)>> {
    let records = read_corpus(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut out = Vec::with_capacity(records.len());
    let mut skipped = 0;
    for r in records {
        match strip_stereo_and_components(&r.smiles).and_then(|s| parse_smiles(&s)) {
            Ok(m) => out.push((m, r.id)),
            Err(_) => skipped += 1,
        }
    }
    if skipped > 0 {
        eprintln!("{}: skipped {skipped} unparseable lines", path.display());
    }
    if out.is_empty() {
        return Err(CliError::Data(format!("{}: no usable molecules", path.display())));
    }
    Ok(out)
}

fn load_canonical_set(path: &Path) -> Result<HashSet<String>> {
    Ok(load_molecules(path)?.iter().map(|(m, _)| canonical_smiles(m)).collect())
}

fn cmd_prep(a: PrepArgs) -> Result<()> {
    let cfg = PrepConfig {
        min_len: a.min_len,
        max_len: a.max_len,
        max_randomized_len: a.max_randomized_len,
        randomized_samples: a.randomized_samples,
        test_fraction: a.test_fraction,
        seed: a.seed,
    };
    if !(0.0..=1.0).contains(&cfg.test_fraction) {
        return Err(CliError::Usage("--test-fraction must lie in [0, 1]".into()));
    }
    let out = prep_dataset(&a.input, &cfg).map_err(|e| CliError::Data(format!("{}: {e}", a.input.display())))?;
    std::fs::create_dir_all(&a.out_dir)?;
    std::fs::write(a.out_dir.join("train.smi"), PrepOutput::write_split(&out.train))?;
    std::fs::write(a.out_dir.join("test.smi"), PrepOutput::write_split(&out.test))?;
    let stats = serde_json::to_string_pretty(&out.stats)? + "\n";
    std::fs::write(a.out_dir.join("prep_stats.json"), &stats)?;
    print!("{stats}");
    Ok(())
}

fn cmd_vocab(a: IoArgs) -> Result<()> {
    let seqs = load_molecules(&a.input)?
        .iter()
        .map(|(m, _)| tokenize_atomwise(&canonical_smiles(m)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let vocab = build_vocab(&seqs);
    vocab.save(&a.out)?;
    println!("{} tokens", vocab.len());
    Ok(())
}

fn cmd_fp(a: FpArgs) -> Result<()> {
    if a.bits == 0 {
        return Err(CliError::Usage("--bits must be positive".into()));
    }
    let mols = load_molecules(&a.input)?;
    let mut store = FingerprintStore::new(a.bits, a.radius);
    for (i, (m, id)) in mols.iter().enumerate() {
        let id = id.clone().unwrap_or_else(|| format!("mol{}", i + 1));
        store.push(id, morgan_fingerprint(m, a.radius, a.bits))?;
    }
    store.write_to(create(&a.out)?)?;
    println!("{} fingerprints", mols.len());
    Ok(())
}

fn cmd_fragscores(a: IoArgs) -> Result<()> {
    let mols = load_molecules(&a.input)?;
    let scores = build_fragment_scores(mols.iter().map(|(m, _)| m))?;
    scores.write_to(create(&a.out)?)?;
    println!("{} fragments from {} molecules", scores.len(), mols.len());
    Ok(())
}

fn cmd_index(a: IndexArgs) -> Result<()> {
    if a.latent_dim == 0 {
        return Err(CliError::Usage("--latent-dim must be positive".into()));
    }
    let mols = load_molecules(&a.input)?;
    let index = build_latent_index(mols.iter().map(|(m, _)| m), a.seed, a.latent_dim)?;
    index.write_to(create(&a.out)?)?;
    println!("{} entries, latent_dim {}", index.len(), index.d_latent());
    Ok(())
}

fn load_index(path: &Path) -> Result<LatentIndex> {
    Ok(LatentIndex::read_from(open(path)?)?)
}

/// The decoder plus the pair latents it should bridge between.
fn open_decoder(a: &DecoderArgs, pair: Option<&ReferencePair>) -> Result<(Box<dyn Decoder>, Option<LatentPair>)> {
    let index = a.index.as_deref().map(load_index).transpose()?.map(Arc::new);
    let explicit = a.latents.as_deref().map(read_latent_pair).transpose()?;
    let encoded = |index: &LatentIndex| -> Result<Option<LatentPair>> {
        Ok(match pair {
            Some(p) => Some(p.latents(index)?),
            None => None,
        })
    };
    if a.decoder == "reference" {
        let index = index.ok_or_else(|| CliError::Usage("--decoder reference needs --index".into()))?;
        let latents = match explicit {
            Some(l) => Some(l),
            None => encoded(&index)?,
        };
        return Ok((Box::new(ReferenceDecoder::new(index)), latents));
    }
    let Some(target) = a.decoder.strip_prefix("proto:") else {
        return Err(CliError::Usage(format!("unknown decoder '{}'", a.decoder)));
    };
    let endpoint: Endpoint = target.parse().map_err(CliError::Usage)?;
    if !(a.timeout > 0.0 && a.timeout.is_finite()) {
        return Err(CliError::Usage("--timeout must be positive".into()));
    }
    let client = ProtocolClient::connect(&endpoint, Duration::from_secs_f64(a.timeout))?;
    let latents = match (explicit, &index) {
        (Some(l), _) => Some(l),
        (None, Some(index)) => encoded(index)?,
        (None, None) => None,
    };
    Ok((Box::new(client), latents))
}

fn load_pair(a: &PairArgs) -> Result<ReferencePair> {
    let pairs = match &a.pairs {
        Some(p) => parse_reference_pairs(&std::fs::read_to_string(p)?, &p.display().to_string())?,
        None => bundled_reference_pairs(),
    };
    Ok(find_pair(&pairs, &a.pair)?.clone())
}

fn require_latents(latents: Option<LatentPair>, decoder: &dyn Decoder) -> Result<LatentPair> {
    let l = latents.ok_or_else(|| CliError::Usage("external decoders need --latents or --index".into()))?;
    if l.a.dim() != decoder.latent_dim() {
        return Err(CliError::Data(format!(
            "pair latents have dim {} but decoder '{}' takes {}",
            l.a.dim(),
            decoder.name(),
            decoder.latent_dim()
        )));
    }
    Ok(l)
}

fn cmd_scan(a: ScanArgs) -> Result<()> {
    let pair = load_pair(&a.pair)?;
    let (mut decoder, latents) = open_decoder(&a.decoder, Some(&pair))?;
    let LatentPair { a: za, b: zb } = require_latents(latents, decoder.as_ref())?;
    let training = load_canonical_set(&a.train)?;
    let sigmas = a.sigmas.unwrap_or_else(|| DEFAULT_SCAN_SIGMAS.to_vec());
    let cfg = BridgeConfig { n_grid: a.grid, n_perturb: a.perturb, sigma: 0.0, seed: a.seed, include_endpoints: !a.exclude_endpoints };
    let result = noise_scan(&za, &zb, &sigmas, decoder.as_mut(), &cfg, &training)?;
    println!("sigma\ttotal\tvalid\tunique\tnovel\terror");
    for s in &result.per_sigma {
        println!("{}\t{}\t{}\t{}\t{}\t{}", s.sigma, s.total, s.valid, s.unique, s.novel, s.error.as_deref().unwrap_or(""));
    }
    match result.sigma_star {
        Some(s) => println!("sigma* = {s}"),
        None => println!("sigma* undetermined"),
    }
    if let Some(out) = &a.out {
        let mut w = create(out)?;
        serde_json::to_writer_pretty(&mut w, &result)?;
        writeln!(w)?;
    }
    if let Some(err) = result.per_sigma.iter().find_map(|s| s.error.clone()) {
        return Err(CliError::Transport(err));
    }
    Ok(())
}

fn load_frag_scores(scoring: &ScoringArgs) -> Result<FragScores> {
    match &scoring.fragscores {
        Some(p) => Ok(FragScores::read_from(open(p)?)?),
        None => {
            let mols = load_molecules(&scoring.train)?;
            Ok(build_fragment_scores(mols.iter().map(|(m, _)| m))?)
        }
    }
}

fn read_baseline(path: Option<&Path>) -> Result<Option<RunReport>> {
    path.map(|p| RunReport::read(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))).transpose()
}

/// Cascade, report and exports shared by `run` and `report`.
fn finish_report(
    records: &[BridgeRecord],
    meta: RunMeta,
    pair: &ReferencePair,
    scoring: &ScoringArgs,
    decode_seconds: f64,
    wall_clock_s: f64,
    baseline: Option<&RunReport>,
    out_dir: &Path,
) -> Result<RunReport> {
    let training = load_canonical_set(&scoring.train)?;
    let frags = load_frag_scores(scoring)?;
    let ctx = CascadeContext {
        training_index: &training,
        pair,
        frag_scores: &frags,
        tables: DescriptorTables::bundled(),
        thresholds: PcThresholds { qed_min: scoring.qed_min, sas_max: scoring.sas_max },
    };
    let annotated = filter_cascade(records, &ctx);
    let report = kpi_report(meta, &annotated, decode_seconds, wall_clock_s, baseline)?;
    std::fs::write(out_dir.join("report.json"), report.to_json())?;
    export_distributions(&annotated, &report, out_dir)?;
    let c = &report.counts;
    println!(
        "total {} valid {} unique {} novel {} pc {} nbm {}",
        c.total, c.valid, c.unique, c.novel, c.pc, c.nbm
    );
    Ok(report)
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let started = Instant::now();
    let pair = load_pair(&a.pair)?;
    let base = if a.production { BridgeConfig::production() } else { BridgeConfig::coarse() };
    let cfg = BridgeConfig {
        n_grid: a.grid.unwrap_or(base.n_grid),
        n_perturb: a.perturb.unwrap_or(base.n_perturb),
        sigma: a.sigma,
        seed: a.seed,
        include_endpoints: !a.exclude_endpoints,
    };
    cfg.validate()?;
    let baseline = read_baseline(a.baseline.as_deref())?;
    let (mut decoder, latents) = open_decoder(&a.decoder, Some(&pair))?;
    let LatentPair { a: za, b: zb } = require_latents(latents, decoder.as_ref())?;
    std::fs::create_dir_all(&a.out_dir)?;
    let meta = RunMeta {
        label: a.label.clone(),
        decoder: decoder.name().to_string(),
        pair: pair.class.clone(),
        latent_dim: decoder.latent_dim(),
        sigma: cfg.sigma,
        n_grid: cfg.n_grid,
        n_perturb: cfg.n_perturb,
        seed: cfg.seed,
    };
    std::fs::write(a.out_dir.join("run_meta.json"), serde_json::to_string_pretty(&meta)? + "\n")?;

    let mut out = create(&a.out_dir.join("generations.tsv"))?;
    write_header(&mut out)?;
    let mut records = Vec::with_capacity(cfg.total());
    let decode_seconds = bridge_run_with(&za, &zb, decoder.as_mut(), &cfg, |mut r| {
        if a.no_timing {
            r.decode_micros = 0;
        }
        write_record(&mut out, &r, true)?;
        records.push(r);
        Ok(())
    })?;
    out.flush()?;
    drop(decoder);

    let (decode_seconds, wall) = if a.no_timing { (0.0, 0.0) } else { (decode_seconds, started.elapsed().as_secs_f64()) };
    finish_report(&records, meta, &pair, &a.scoring, decode_seconds, wall, baseline.as_ref(), &a.out_dir)?;
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let started = Instant::now();
    let pair = load_pair(&a.pair)?;
    let set = GenerationSet::read_from(open(&a.generations)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", a.generations.display())))?;
    let meta_path = a.meta.clone().or_else(|| {
        let p = a.generations.parent()?.join("run_meta.json");
        p.exists().then_some(p)
    });
    let mut meta: RunMeta = match meta_path {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(&p)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        None => RunMeta { pair: pair.class.clone(), ..RunMeta::default() },
    };
    if let Some(label) = a.label {
        meta.label = label;
    }
    if meta.pair != pair.class {
        return Err(CliError::Data(format!("generations were made for pair {}, not {}", meta.pair, pair.class)));
    }
    let baseline = read_baseline(a.baseline.as_deref())?;
    std::fs::create_dir_all(&a.out_dir)?;
    let decode_seconds = if a.no_timing { 0.0 } else { set.records.iter().map(|r| r.decode_micros).sum::<u64>() as f64 / 1e6 };
    let wall = if a.no_timing { 0.0 } else { started.elapsed().as_secs_f64() };
    finish_report(&set.records, meta, &pair, &a.scoring, decode_seconds, wall, baseline.as_ref(), &a.out_dir)?;
    Ok(())
}

fn cmd_serve(a: ServeArgs) -> Result<()> {
    let index = Arc::new(load_index(&a.index)?);
    let Some(listen) = a.listen else {
        let mut dec = ReferenceDecoder::new(index);
        serve(&mut dec, io::stdin().lock(), io::stdout().lock())?;
        return Ok(());
    };
    let endpoint: Endpoint = listen.parse().map_err(CliError::Usage)?;
    let spawn = |index: Arc<LatentIndex>, reader: Box<dyn io::Read + Send>, writer: Box<dyn Write + Send>| {
        std::thread::spawn(move || {
            let mut dec = ReferenceDecoder::new(index);
            if let Err(e) = serve(&mut dec, reader, writer) {
                eprintln!("connection closed: {e}");
            }
        });
    };
    match endpoint {
        Endpoint::Tcp(addr) => {
            let listener = std::net::TcpListener::bind(&addr)?;
            eprintln!("listening on tcp:{}", listener.local_addr()?);
            for stream in listener.incoming() {
                let stream = stream?;
                spawn(index.clone(), Box::new(stream.try_clone()?), Box::new(stream));
            }
        }
        Endpoint::Unix(path) => {
            let listener = std::os::unix::net::UnixListener::bind(&path)?;
            eprintln!("listening on unix:{}", path.display());
            for stream in listener.incoming() {
                let stream = stream?;
                spawn(index.clone(), Box::new(stream.try_clone()?), Box::new(stream));
            }
        }
        Endpoint::Exec(_) => return Err(CliError::Usage("--listen takes tcp: or unix:".into())),
    }
    Ok(())
}

fn cmd_check(a: CheckArgs) -> Result<()> {
    let (mut decoder, _) = open_decoder(&a.decoder, None)?;
    let report = check_decoder(decoder.as_mut(), a.requests, a.seed)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let pairs: Vec<(String, Option<String>)> = match (&a.reconstructions, &a.corpus) {
        (Some(path), _) => std::fs::read_to_string(path)?
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .map(|l| {
                let mut f = l.splitn(2, '\t');
                let input = f.next().unwrap_or("").trim().to_string();
                let out = f.next().map(str::trim).filter(|s| !s.is_empty()).map(String::from);
                (input, out)
            })
            .collect(),
        (None, Some(corpus)) => {
            let index_path = a.decoder.index.as_deref().ok_or_else(|| CliError::Usage("--corpus needs --index".into()))?;
            let index = load_index(index_path)?;
            let mols = load_molecules(corpus)?;
            let zs = mols.iter().map(|(m, _)| index.encode_molecule(m)).collect::<std::result::Result<Vec<LatentVector>, _>>()?;
            let (mut decoder, _) = open_decoder(&a.decoder, None)?;
            let decoded = decoder.decode_batch(&zs)?;
            mols.iter().zip(decoded).map(|((m, _), d)| (canonical_smiles(m), d.ok())).collect()
        }
        (None, None) => return Err(CliError::Usage("eval needs --reconstructions or --corpus".into())),
    };
    let metrics = eval_reconstructions(&pairs)?;
    println!("{}", serde_json::to_string_pretty(&metrics)?);
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<()> {
    let cand = RunReport::read(&a.candidate).map_err(|e| CliError::Data(format!("{}: {e}", a.candidate.display())))?;
    let base = RunReport::read(&a.baseline).map_err(|e| CliError::Data(format!("{}: {e}", a.baseline.display())))?;
    println!("{}", serde_json::to_string_pretty(&compare_reports(&cand, &base)?)?);
    Ok(())
}
