//! Thin CLI over the chessmix library.
//!
//! Exit codes: 0 success, 1 config error, 2 dataset error, 3 generation error.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use chessmix::config::GenerationConfig;
use chessmix::dataset_io::load_dataset;
use chessmix::error::Result;
use chessmix::pipeline::run_generate;
use chessmix::report::run_report;
use chessmix::stats_index::{build_index, compute_class_stats, dump_index};

#[derive(Parser)]
#[command(name = "chessmix", about = "Chessboard cut-and-mix augmentation for segmentation datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic image/mask pairs from a training manifest.
    Generate {
        /// Input manifest: `id <TAB> image <TAB> mask` per line
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory for PNGs, manifest and report
        #[arg(long)]
        out: PathBuf,
        /// Optional key=value config file; flags override its values
        #[arg(long)]
        config: Option<PathBuf>,
        /// Geometry preset: vaihingen (800/200) or thetford (400/100)
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        count: Option<u64>,
        #[arg(long = "image-side")]
        image_side: Option<usize>,
        #[arg(long = "patch-side")]
        patch_side: Option<usize>,
        /// Comma-separated integer scale factors, e.g. 1,2
        #[arg(long)]
        scales: Option<String>,
        /// Comma-separated per-scale probabilities summing to 1
        #[arg(long = "scale-probs")]
        scale_probs: Option<String>,
        /// Mirror each patch into its adjacent empty image cell
        #[arg(long)]
        mirror: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = all cores); output is identical for any value
        #[arg(long)]
        jobs: Option<usize>,
        /// Also write a per-cell provenance audit file
        #[arg(long)]
        audit: bool,
        #[arg(long = "ignore-index")]
        ignore_index: Option<u8>,
    },
    /// Re-scan a generated directory and print its class-balance report.
    Report {
        #[arg(long)]
        dir: PathBuf,
        /// Recompute source stats from this manifest instead of the stored ones
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Build the weighted patch index and dump it for audit.
    Index {
        #[arg(long)]
        manifest: PathBuf,
        /// Output TSV: `sample_id x y side weight`
        #[arg(long)]
        dump: PathBuf,
        #[arg(long = "patch-side", default_value_t = 200)]
        patch_side: usize,
        #[arg(long, default_value = "1,2")]
        scales: String,
    },
}

fn parse_scales(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| chessmix::Error::Config(format!("bad scale {v:?}")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            manifest,
            out,
            config,
            preset,
            count,
            image_side,
            patch_side,
            scales,
            scale_probs,
            mirror,
            seed,
            jobs,
            audit,
            ignore_index,
        } => {
            let mut cfg = GenerationConfig::default();
            if let Some(path) = config {
                cfg.apply_file(&path)?;
            }
            if let Some(p) = preset {
                cfg.apply_preset(&p)?;
            }
            cfg.manifest_path = manifest;
            cfg.out_dir = out;
            if let Some(v) = count {
                cfg.count = v;
            }
            if let Some(v) = image_side {
                cfg.image_side = v;
            }
            if let Some(v) = patch_side {
                cfg.base_patch_side = v;
            }
            if let Some(v) = &scales {
                cfg.apply_kv("scales", v)?;
            }
            if let Some(v) = &scale_probs {
                cfg.apply_kv("scale_probs", v)?;
            }
            if mirror {
                cfg.mirror = true;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if let Some(v) = jobs {
                cfg.jobs = v;
            }
            if audit {
                cfg.audit = true;
            }
            if let Some(v) = ignore_index {
                cfg.ignore_index = Some(v);
            }
            let outcome = run_generate(&cfg)?;
            eprintln!("{}", outcome.report);
            // the manifest path is the sole stdout artifact
            println!("{}", outcome.manifest_path.display());
        }
        Command::Report { dir, manifest } => {
            let report = run_report(&dir, manifest.as_deref())?;
            print!("{report}");
            std::fs::write(dir.join(chessmix::report::REPORT_NAME), report.to_string())?;
        }
        Command::Index {
            manifest,
            dump,
            patch_side,
            scales,
        } => {
            let scales = parse_scales(&scales)?;
            let (m, samples) = load_dataset(&manifest)?;
            let stats = compute_class_stats(&samples, m.class_count, m.ignore_index)?;
            let index = build_index(&samples, &stats, patch_side, &scales)?;
            let file = std::fs::File::create(&dump)?;
            dump_index(&index, &samples, std::io::BufWriter::new(file))?;
            eprintln!("wrote {}", dump.display());
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
