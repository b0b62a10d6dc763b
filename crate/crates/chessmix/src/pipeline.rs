//! The full generation loop: load, weigh, sample, compose, persist, report.

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::composer::{compose, mirror_fill, ChessLayout, SyntheticSample};
use crate::config::GenerationConfig;
use crate::dataset_io::{
    load_dataset, output_manifest_row, save_synthetic, write_output_manifest, LabeledSample,
};
use crate::error::{Error, Result};
use crate::report::{
    write_source_stats, BalanceReport, IndexScaleSummary, AUDIT_NAME, OUTPUT_MANIFEST_NAME,
    REPORT_NAME, SOURCE_STATS_NAME,
};
use crate::sampler::{choose_scale, RngStream, SamplingConfig};
use crate::stats_index::{build_index, compute_class_stats, ClassStats, PatchIndex};

#[derive(Debug)]
pub struct GenerateOutcome {
    pub manifest_path: PathBuf,
    pub report: BalanceReport,
}

struct ImageResult {
    row: String,
    class_counts: Vec<u64>,
    audit_lines: Vec<String>,
}

fn audit_lines(sample: &SyntheticSample) -> Vec<String> {
    sample
        .provenance
        .iter()
        .map(|p| {
            format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:016x}",
                sample.id,
                p.row,
                p.col,
                p.sample_id,
                p.x,
                p.y,
                p.side,
                p.scale,
                p.spec.digest()
            )
        })
        .collect()
}

fn generate_one(
    config: &GenerationConfig,
    samples: &[LabeledSample],
    stats: &ClassStats,
    index: &PatchIndex,
    sampling: &SamplingConfig,
    stream_id: u64,
) -> Result<ImageResult> {
    let mut rng = RngStream::new(config.seed, stream_id);
    let ordinal = choose_scale(&mut rng, sampling);
    let cell_side = config.base_patch_side * config.scales[ordinal] as usize;
    let layout = ChessLayout::new(config.image_side, cell_side)?;
    let mut sample = compose(
        &mut rng,
        &layout,
        index,
        ordinal,
        samples,
        &config.transform,
        stats.ignore_index(),
    )?;
    if config.mirror {
        mirror_fill(&mut sample, &layout);
    }
    let paths = save_synthetic(&sample, &config.out_dir)?;
    let mut class_counts = vec![0u64; stats.class_count()];
    for &v in sample.mask.data() {
        if v != stats.ignore_index() {
            class_counts[v as usize] += 1;
        }
    }
    Ok(ImageResult {
        row: output_manifest_row(&sample, &paths),
        class_counts,
        audit_lines: if config.audit { audit_lines(&sample) } else { Vec::new() },
    })
}

/// Run the whole generation loop for `config.count` synthetic images.
///
/// Output is a pure function of (dataset bytes, config, seed): every image
/// draws from its own stream keyed by its ordinal, and the manifest is
/// written in stream order, so `--jobs` never changes any output byte.
pub fn run_generate(config: &GenerationConfig) -> Result<GenerateOutcome> {
    config.validate()?;
    let (manifest, samples) = load_dataset(&config.manifest_path)?;
    let ignore_index = config.ignore_index.unwrap_or(manifest.ignore_index);
    let stats = compute_class_stats(&samples, manifest.class_count, ignore_index)?;
    if !stats.absent_classes().is_empty() {
        eprintln!(
            "note: classes {:?} have no source pixels and are excluded from weighting",
            stats.absent_classes()
        );
    }
    let index = build_index(&samples, &stats, config.base_patch_side, &config.scales)?;
    let sampling = SamplingConfig::new(config.scale_probs.clone(), config.mirror)?;
    std::fs::create_dir_all(&config.out_dir)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;

    let progress = AtomicU64::new(0);
    let results: Vec<Result<ImageResult>> = pool.install(|| {
        (0..config.count)
            .into_par_iter()
            .map(|stream_id| {
                let r = generate_one(config, &samples, &stats, &index, &sampling, stream_id)
                    .map_err(|e| Error::Generation {
                        stream_id,
                        source: Box::new(e),
                    });
                let done = progress.fetch_add(1, Ordering::Relaxed) + 1;
                if done % 200 == 0 || done == config.count {
                    eprintln!("generated {done}/{} images", config.count);
                }
                r
            })
            .collect()
    });

    // rayon preserves input order, so rows are already sorted by stream_id
    let mut rows = Vec::with_capacity(results.len());
    let mut audit = Vec::new();
    let mut generated_counts = vec![0u64; stats.class_count()];
    for r in results {
        let r = r?;
        rows.push(r.row);
        audit.extend(r.audit_lines);
        for (acc, c) in generated_counts.iter_mut().zip(&r.class_counts) {
            *acc += c;
        }
    }

    let manifest_path = config.out_dir.join(OUTPUT_MANIFEST_NAME);
    write_output_manifest(&manifest_path, &rows)?;
    if config.audit {
        write_output_manifest(&config.out_dir.join(AUDIT_NAME), &audit)?;
    }
    write_source_stats(&config.out_dir.join(SOURCE_STATS_NAME), &stats)?;

    let index_summary = index
        .scales
        .iter()
        .map(|s| IndexScaleSummary {
            scale: s.scale,
            patch_count: s.descriptors.len(),
            total_weight: s.total_weight,
        })
        .collect();
    let report = BalanceReport::new(&stats, generated_counts, index_summary);
    std::fs::write(config.out_dir.join(REPORT_NAME), report.to_string())?;

    Ok(GenerateOutcome {
        manifest_path,
        report,
    })
}
