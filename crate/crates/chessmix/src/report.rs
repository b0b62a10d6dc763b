//! Class-balance reporting over source and generated sets.

use std::fmt;
use std::path::Path;

use crate::dataset_io::{load_dataset, load_mask, read_output_manifest};
use crate::error::{Error, Result};
use crate::stats_index::ClassStats;

pub const OUTPUT_MANIFEST_NAME: &str = "manifest.tsv";
pub const SOURCE_STATS_NAME: &str = "source_stats.tsv";
pub const REPORT_NAME: &str = "report.txt";
pub const AUDIT_NAME: &str = "audit.tsv";

#[derive(Clone, Debug)]
pub struct IndexScaleSummary {
    pub scale: u32,
    pub patch_count: usize,
    pub total_weight: f64,
}

/// Source vs generated class shares, over non-ignore pixels.
#[derive(Clone, Debug)]
pub struct BalanceReport {
    pub class_count: usize,
    pub ignore_index: u8,
    pub source_counts: Vec<u64>,
    pub source_percentages: Vec<f64>,
    pub generated_counts: Vec<u64>,
    pub generated_percentages: Vec<f64>,
    /// generated share / source share; NaN for classes absent from the source.
    pub ratios: Vec<f64>,
    pub index_summary: Vec<IndexScaleSummary>,
}

impl BalanceReport {
    pub fn new(
        stats: &ClassStats,
        generated_counts: Vec<u64>,
        index_summary: Vec<IndexScaleSummary>,
    ) -> BalanceReport {
        let gen_total: u64 = generated_counts.iter().sum();
        let generated_percentages: Vec<f64> = generated_counts
            .iter()
            .map(|&c| if gen_total == 0 { 0.0 } else { c as f64 / gen_total as f64 })
            .collect();
        let ratios = stats
            .percentages()
            .iter()
            .zip(&generated_percentages)
            .map(|(&s, &g)| if s > 0.0 { g / s } else { f64::NAN })
            .collect();
        BalanceReport {
            class_count: stats.class_count(),
            ignore_index: stats.ignore_index(),
            source_counts: stats.counts().to_vec(),
            source_percentages: stats.percentages().to_vec(),
            generated_counts,
            generated_percentages,
            ratios,
            index_summary,
        }
    }

    /// Classes whose generated share fell below their source share.
    pub fn decreased_classes(&self) -> Vec<usize> {
        self.ratios
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_finite() && **r < 1.0)
            .map(|(i, _)| i)
            .collect()
    }
}

impl fmt::Display for BalanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "class balance (shares over non-ignore pixels)")?;
        writeln!(f, "ignore index: {}", self.ignore_index)?;
        writeln!(f, "class\tsource%\tgenerated%\tratio")?;
        for i in 0..self.class_count {
            let ratio = self.ratios[i];
            let marker = if ratio.is_finite() && ratio < 1.0 { "  DOWN" } else { "" };
            if self.source_counts[i] == 0 {
                writeln!(
                    f,
                    "{i}\t-\t{:.6}\t- (absent from source, excluded from weighting)",
                    self.generated_percentages[i]
                )?;
            } else {
                writeln!(
                    f,
                    "{i}\t{:.6}\t{:.6}\t{:.4}{marker}",
                    self.source_percentages[i], self.generated_percentages[i], ratio
                )?;
            }
        }
        if !self.index_summary.is_empty() {
            writeln!(f, "patch index")?;
            writeln!(f, "scale\tpatches\ttotal_weight")?;
            for s in &self.index_summary {
                writeln!(f, "{}\t{}\t{:.3}", s.scale, s.patch_count, s.total_weight)?;
            }
        }
        Ok(())
    }
}

/// Persist source stats next to the generated set so `report` can re-derive
/// ratios without reloading the source dataset.
pub fn write_source_stats(path: &Path, stats: &ClassStats) -> Result<()> {
    let mut out = format!(
        "classes={} ignore={}\n",
        stats.class_count(),
        stats.ignore_index()
    );
    for (i, c) in stats.counts().iter().enumerate() {
        out.push_str(&format!("{i}\t{c}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_source_stats(path: &Path) -> Result<ClassStats> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Manifest {
        path: path.to_path_buf(),
        msg: "empty stats file".into(),
    })?;
    let mut class_count = 0usize;
    let mut ignore_index = crate::dataset_io::DEFAULT_IGNORE_INDEX;
    for tok in header.split_whitespace() {
        if let Some(v) = tok.strip_prefix("classes=") {
            class_count = v.parse().unwrap_or(0);
        } else if let Some(v) = tok.strip_prefix("ignore=") {
            ignore_index = v.parse().unwrap_or(ignore_index);
        }
    }
    let mut counts = vec![0u64; class_count];
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let (i, c) = line.split_once('\t').ok_or_else(|| Error::Manifest {
            path: path.to_path_buf(),
            msg: format!("bad stats line {line:?}"),
        })?;
        let i: usize = i.parse().map_err(|_| Error::Manifest {
            path: path.to_path_buf(),
            msg: format!("bad class index {i:?}"),
        })?;
        counts[i] = c.parse().map_err(|_| Error::Manifest {
            path: path.to_path_buf(),
            msg: format!("bad count {c:?}"),
        })?;
    }
    ClassStats::from_counts(counts, ignore_index)
}

/// Re-scan every generated mask and compare class shares with the source.
///
/// Source stats come from the `source_stats.tsv` written at generation time,
/// or from `source_manifest` when given (which takes precedence).
pub fn run_report(generated_dir: &Path, source_manifest: Option<&Path>) -> Result<BalanceReport> {
    let manifest_path = generated_dir.join(OUTPUT_MANIFEST_NAME);
    let records = read_output_manifest(&manifest_path)?;
    if records.is_empty() {
        return Err(Error::Manifest {
            path: manifest_path,
            msg: "generated manifest is empty".into(),
        });
    }
    let stats = match source_manifest {
        Some(m) => {
            let (manifest, samples) = load_dataset(m)?;
            crate::stats_index::compute_class_stats(
                &samples,
                manifest.class_count,
                manifest.ignore_index,
            )?
        }
        None => read_source_stats(&generated_dir.join(SOURCE_STATS_NAME))?,
    };
    let mut counts = vec![0u64; stats.class_count()];
    for rec in &records {
        let mask = load_mask(&rec.mask_path, &rec.id)?;
        for &v in mask.data() {
            if v != stats.ignore_index() && (v as usize) < counts.len() {
                counts[v as usize] += 1;
            }
        }
    }
    Ok(BalanceReport::new(&stats, counts, Vec::new()))
}
