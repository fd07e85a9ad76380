mod common;

use common::corpus_molecules;
use mgbench::bridge::{bridge_run, noise_scan, BridgeConfig, BridgeRecord};
use mgbench::decoder::{build_latent_index, ReferenceDecoder};
use mgbench::descriptors::{build_fragment_scores, DescriptorTables, PcThresholds};
use mgbench::harness::{
    bundled_reference_pairs, compare_reports, eval_reconstructions, filter_cascade, kpi_report, CascadeContext,
    GenerationRecord, RunMeta, StageCounts,
};
use mgbench::molgraph::{canonical_smiles, Molecule};
use std::collections::HashSet;
use std::sync::Arc;

fn record(p: u32, canonical: &str) -> BridgeRecord {
    BridgeRecord {
        grid_index: 0,
        perturb_index: p,
        t: 0.0,
        raw_smiles: canonical.into(),
        valid: true,
        canonical: canonical.into(),
        decode_micros: 1,
    }
}

fn small_index(extra: &[&Molecule], n: usize) -> Arc<mgbench::decoder::LatentIndex> {
    let corpus = corpus_molecules(n);
    Arc::new(build_latent_index(extra.iter().copied().chain(corpus.iter()), 7, 32).unwrap())
}

#[test]
fn novelty_counts_the_half_outside_the_index() {
    let mols = corpus_molecules(200);
    let canon: Vec<String> = mols.iter().map(canonical_smiles).collect();
    let distinct: Vec<&String> = {
        let mut seen = HashSet::new();
        canon.iter().filter(|c| seen.insert(*c)).collect()
    };
    let half = distinct.len() / 2;
    let training: HashSet<String> = distinct[..half].iter().map(|s| s.to_string()).collect();
    let records: Vec<BridgeRecord> = canon.iter().enumerate().map(|(i, c)| record(i as u32, c)).collect();
    let pairs = bundled_reference_pairs();
    let frags = build_fragment_scores(mols.iter()).unwrap();
    let ctx = CascadeContext {
        training_index: &training,
        pair: &pairs[0],
        frag_scores: &frags,
        tables: DescriptorTables::bundled(),
        thresholds: PcThresholds::default(),
    };
    let out = filter_cascade(&records, &ctx);
    let counts = StageCounts::tally(&out);
    assert_eq!(counts.unique, distinct.len());
    assert_eq!(counts.novel, distinct.len() - half);
    assert!(counts.is_monotone());
    assert!(out.iter().filter(|r| r.unique_first).all(|r| r.qed.is_some() && r.sas.is_some() && r.rds.is_some()));
}

#[test]
fn reference_molecules_in_the_cascade() {
    let pairs = bundled_reference_pairs();
    let frags = build_fragment_scores(corpus_molecules(500).iter()).unwrap();
    for pair in &pairs {
        let training: HashSet<String> = [pair.smiles_a.clone()].into();
        let ctx = CascadeContext {
            training_index: &training,
            pair,
            frag_scores: &frags,
            tables: DescriptorTables::bundled(),
            thresholds: PcThresholds::default(),
        };
        let out = filter_cascade(&[record(0, &pair.smiles_a), record(1, &pair.smiles_b)], &ctx);
        assert!(out[0].valid && out[0].unique_first && !out[0].novel && !out[0].nbm_pass);
        assert!(!out[1].nbm_pass, "{}: B's own scaffold is not novel", pair.class);
        assert!((out[0].rds.unwrap() + 1.0).abs() < 1e-12);
        assert!((out[1].rds.unwrap() - 1.0).abs() < 1e-12);
    }
}

/// Ten records with hand-set flags; the expected tally is counted by eye.
#[test]
fn report_tally_on_hand_set_flags() {
    let flags: [(bool, bool, bool, bool, bool); 10] = [
        (true, true, true, true, true),
        (true, true, true, true, false),
        (true, true, true, false, false),
        (true, true, false, false, false),
        (true, false, false, false, false),
        (false, false, false, false, false),
        (true, true, true, true, true),
        (false, false, false, false, false),
        (true, false, false, false, false),
        (true, true, true, false, false),
    ];
    let records: Vec<GenerationRecord> = flags
        .iter()
        .enumerate()
        .map(|(i, &(valid, unique_first, novel, pc_pass, nbm_pass))| GenerationRecord {
            grid_index: 0,
            perturb_index: i as u32,
            t: 0.0,
            raw_smiles: String::new(),
            valid,
            canonical: String::new(),
            unique_first,
            novel,
            qed: unique_first.then_some(0.5),
            sas: unique_first.then_some(2.0),
            rds: unique_first.then_some(-0.95 + 0.2 * i as f64),
            pc_pass,
            nbm_pass,
            decode_micros: 0,
        })
        .collect();
    let r = kpi_report(RunMeta::default(), &records, 4.0, 5.0, None).unwrap();
    assert_eq!(r.counts, StageCounts { total: 10, valid: 8, unique: 6, novel: 5, pc: 3, nbm: 2 });
    assert_eq!(r.timing.molecules_per_second.nbm, 0.5);
    assert_eq!(r.rds_histogram.iter().sum::<usize>(), 6);
    // RDS of unique records: -0.95, -0.75, -0.55, -0.35, 0.25, 0.85.
    assert_eq!(r.rds_central, 1);
    assert_eq!(r.novelty_fraction, 5.0 / 6.0);
}

#[test]
fn bridge_endpoints_decode_to_the_pair() {
    let pairs = bundled_reference_pairs();
    let pair = &pairs[1];
    let index = small_index(&[&pair.mol_a, &pair.mol_b], 300);
    let z = pair.latents(&index).unwrap();
    let cfg = BridgeConfig { n_grid: 6, n_perturb: 3, sigma: 0.0, seed: 1, include_endpoints: true };
    let set = bridge_run(&z.a, &z.b, &mut ReferenceDecoder::new(index.clone()), &cfg).unwrap();
    assert_eq!(set.len(), 18);
    assert!(set.records[..3].iter().all(|r| r.canonical == pair.smiles_a));
    assert!(set.records[15..].iter().all(|r| r.canonical == pair.smiles_b));
}

#[test]
fn output_is_independent_of_worker_count() {
    let pairs = bundled_reference_pairs();
    let index = small_index(&[], 300);
    let z = pairs[0].latents(&index).unwrap();
    let cfg = BridgeConfig { n_grid: 5, n_perturb: 40, sigma: 0.3, seed: 11, include_endpoints: true };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| bridge_run(&z.a, &z.b, &mut ReferenceDecoder::new(index.clone()), &cfg).unwrap())
    };
    let strip = |s: mgbench::bridge::GenerationSet| {
        s.records.into_iter().map(|r| (r.grid_index, r.perturb_index, r.raw_smiles)).collect::<Vec<_>>()
    };
    assert_eq!(strip(run(1)), strip(run(4)));
}

#[test]
fn scan_and_compare_on_reference_runs() {
    let pairs = bundled_reference_pairs();
    let pair = &pairs[0];
    let index = small_index(&[], 400);
    let z = pair.latents(&index).unwrap();
    let training: HashSet<String> = (0..200).map(|i| index.smiles(i).to_string()).collect();
    let cfg = BridgeConfig { n_grid: 10, n_perturb: 20, ..BridgeConfig::coarse() };
    let mut dec = ReferenceDecoder::new(index.clone());
    let scan = noise_scan(&z.a, &z.b, &[0.0, 0.2, 0.5], &mut dec, &cfg, &training).unwrap();
    assert_eq!(scan.per_sigma.len(), 3);
    assert!(scan.per_sigma.iter().all(|s| s.total == 200 && s.error.is_none()));
    let best = scan.per_sigma.iter().map(|s| s.novel).max().unwrap();
    let star = scan.sigma_star.unwrap();
    assert_eq!(scan.per_sigma.iter().find(|s| s.novel == best).unwrap().sigma, star);

    let frags = build_fragment_scores(corpus_molecules(400).iter()).unwrap();
    let ctx = CascadeContext {
        training_index: &training,
        pair,
        frag_scores: &frags,
        tables: DescriptorTables::bundled(),
        thresholds: PcThresholds::default(),
    };
    let report_for = |sigma: f64, label: &str, baseline| {
        let set = bridge_run(&z.a, &z.b, &mut ReferenceDecoder::new(index.clone()), &BridgeConfig { sigma, ..cfg.clone() })
            .unwrap();
        let out = filter_cascade(&set.records, &ctx);
        let meta = RunMeta { label: label.into(), pair: pair.class.clone(), latent_dim: 32, ..RunMeta::default() };
        kpi_report(meta, &out, 1.0, 1.0, baseline).unwrap()
    };
    let base = report_for(0.1, "base", None);
    let cand = report_for(0.4, "cand", Some(&base));
    let cmp = compare_reports(&cand, &base).unwrap();
    assert_eq!(cmp.delta_sas, cand.delta_sas.as_ref().unwrap().value);
    assert_eq!(cmp.novelty_pct_candidate, 100.0 * cand.novelty_fraction);

    let recon: Vec<(String, Option<String>)> = (0..50)
        .map(|i| {
            let s = index.smiles(i).to_string();
            let decoded = mgbench::decoder::nn_decode(&index.encode(index.fingerprint(i)).unwrap(), &index).unwrap();
            (s, Some(decoded.to_string()))
        })
        .collect();
    let m = eval_reconstructions(&recon).unwrap();
    assert!([m.token_accuracy, m.molecule_accuracy, m.tanimoto_accuracy].iter().all(|x| (0.0..=1.0).contains(x)));
    assert!(m.tanimoto_accuracy >= m.molecule_accuracy);
}
