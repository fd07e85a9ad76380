//! Run reports and plot-ready exports.
//!
//! `qed_sas.csv`: t,grid_index,perturb_index,canonical,qed,sas,rds,novel,pc_pass,nbm_pass
//! with one row per valid unique record, sorted by (t, perturb_index).
//! `rds_histogram.csv`: bin,lo,hi,count with 40 bins of width 0.05 over [-1, 1];
//! the last bin is closed on the right.

use super::cascade::GenerationRecord;
use super::HarnessError;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const RDS_BINS: usize = 40;
const RDS_CENTRAL: f64 = 0.3;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub label: String,
    pub decoder: String,
    pub pair: String,
    pub latent_dim: usize,
    pub sigma: f64,
    pub n_grid: usize,
    pub n_perturb: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub total: usize,
    pub valid: usize,
    pub unique: usize,
    pub novel: usize,
    pub pc: usize,
    pub nbm: usize,
}

impl StageCounts {
    pub fn tally(records: &[GenerationRecord]) -> StageCounts {
        let count = |f: fn(&GenerationRecord) -> bool| records.iter().filter(|r| f(r)).count();
        StageCounts {
            total: records.len(),
            valid: count(|r| r.valid),
            unique: count(|r| r.unique_first),
            novel: count(|r| r.novel),
            pc: count(|r| r.pc_pass),
            nbm: count(|r| r.nbm_pass),
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.total >= self.valid
            && self.valid >= self.unique
            && self.unique >= self.novel
            && self.novel >= self.pc
            && self.pc >= self.nbm
    }
}

/// Mean and population standard deviation; absent for an empty sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Summary {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return Summary::default();
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Summary { n: v.len(), mean: Some(mean), std: Some(var.sqrt()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSas {
    pub baseline: String,
    /// mean SAS of this run minus mean SAS of the baseline.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRates {
    pub total: f64,
    pub valid: f64,
    pub unique: f64,
    pub novel: f64,
    pub pc: f64,
    pub nbm: f64,
}

/// Everything that varies between identical runs lives here.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTiming {
    pub decode_seconds: f64,
    pub wall_clock_s: f64,
    /// Stage count / decode seconds; zero when no decode time was recorded.
    pub molecules_per_second: StageRates,
}

impl RunTiming {
    pub fn new(decode_seconds: f64, wall_clock_s: f64, counts: &StageCounts) -> RunTiming {
        let rate = |n: usize| if decode_seconds > 0.0 { n as f64 / decode_seconds } else { 0.0 };
        RunTiming {
            decode_seconds,
            wall_clock_s,
            molecules_per_second: StageRates {
                total: rate(counts.total),
                valid: rate(counts.valid),
                unique: rate(counts.unique),
                novel: rate(counts.novel),
                pc: rate(counts.pc),
                nbm: rate(counts.nbm),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub meta: RunMeta,
    pub counts: StageCounts,
    /// Novel / unique.
    pub novelty_fraction: f64,
    /// Over valid unique records.
    pub qed: Summary,
    pub sas: Summary,
    pub delta_sas: Option<DeltaSas>,
    pub rds_histogram: Vec<usize>,
    /// Valid unique records with RDS strictly inside (-0.3, 0.3).
    pub rds_central: usize,
    pub timing: RunTiming,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<RunReport, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<RunReport, HarnessError> {
        RunReport::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn without_timing(&self) -> RunReport {
        RunReport { timing: RunTiming::default(), ..self.clone() }
    }
}

/// Bin k covers [-1 + 0.05k, -1 + 0.05(k+1)).
pub fn rds_bin(r: f64) -> usize {
    (((r + 1.0) * 20.0).floor().max(0.0) as usize).min(RDS_BINS - 1)
}

pub fn kpi_report(
    meta: RunMeta,
    records: &[GenerationRecord],
    decode_seconds: f64,
    wall_clock_s: f64,
    baseline: Option<&RunReport>,
) -> Result<RunReport, HarnessError> {
    let counts = StageCounts::tally(records);
    let scored: Vec<&GenerationRecord> = records.iter().filter(|r| r.unique_first).collect();
    let qed = Summary::of(scored.iter().filter_map(|r| r.qed));
    let sas = Summary::of(scored.iter().filter_map(|r| r.sas));
    let mut rds_histogram = vec![0; RDS_BINS];
    let mut rds_central = 0;
    for r in scored.iter().filter_map(|r| r.rds) {
        rds_histogram[rds_bin(r)] += 1;
        if r.abs() < RDS_CENTRAL {
            rds_central += 1;
        }
    }
    let delta_sas = match baseline {
        None => None,
        Some(b) => {
            if b.meta.pair != meta.pair {
                return Err(HarnessError::BaselineMismatch(format!("pair {} vs {}", meta.pair, b.meta.pair)));
            }
            if b.meta.latent_dim != meta.latent_dim {
                return Err(HarnessError::BaselineMismatch(format!(
                    "latent_dim {} vs {}",
                    meta.latent_dim, b.meta.latent_dim
                )));
            }
            let value = sas.mean.zip(b.sas.mean).map(|(x, y)| x - y);
            Some(DeltaSas { baseline: b.meta.label.clone(), value })
        }
    };
    Ok(RunReport {
        novelty_fraction: if counts.unique == 0 { 0.0 } else { counts.novel as f64 / counts.unique as f64 },
        timing: RunTiming::new(decode_seconds, wall_clock_s, &counts),
        meta,
        counts,
        qed,
        sas,
        delta_sas,
        rds_histogram,
        rds_central,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn scatter_csv(records: &[GenerationRecord]) -> String {
    let mut rows: Vec<&GenerationRecord> = records.iter().filter(|r| r.unique_first).collect();
    rows.sort_by(|a, b| {
        a.t.total_cmp(&b.t).then(a.perturb_index.cmp(&b.perturb_index)).then(a.grid_index.cmp(&b.grid_index))
    });
    let mut out = String::from("t,grid_index,perturb_index,canonical,qed,sas,rds,novel,pc_pass,nbm_pass\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.grid_index,
            r.perturb_index,
            r.canonical,
            opt(r.qed),
            opt(r.sas),
            opt(r.rds),
            u8::from(r.novel),
            u8::from(r.pc_pass),
            u8::from(r.nbm_pass)
        );
    }
    out
}

pub fn histogram_csv(histogram: &[usize]) -> String {
    let mut out = String::from("bin,lo,hi,count\n");
    for (k, count) in histogram.iter().enumerate() {
        let lo = -1.0 + k as f64 * 0.05;
        let _ = writeln!(out, "{k},{:.2},{:.2},{count}", lo, lo + 0.05);
    }
    out
}

/// Writes `qed_sas.csv` and `rds_histogram.csv` into `dir`.
pub fn export_distributions(
    records: &[GenerationRecord],
    report: &RunReport,
    dir: &Path,
) -> Result<(PathBuf, PathBuf), HarnessError> {
    std::fs::create_dir_all(dir)?;
    let scatter = dir.join("qed_sas.csv");
    let hist = dir.join("rds_histogram.csv");
    std::fs::write(&scatter, scatter_csv(records))?;
    std::fs::write(&hist, histogram_csv(&report.rds_histogram))?;
    Ok((scatter, hist))
}
