//! Generate a batch, then independently re-scan the written masks to audit
//! how class balance shifted relative to the source dataset.
//!
//! Run with `cargo run --example balance_report`.

#[path = "util/toy.rs"]
mod toy;

use chessmix::config::GenerationConfig;
use chessmix::pipeline::run_generate;
use chessmix::report::run_report;

fn main() -> chessmix::Result<()> {
    let root = toy::scratch("balance_report");
    let manifest = toy::write_dataset(&root.join("source"), 2, 160);

    let mut config = GenerationConfig::default();
    config.manifest_path = manifest.clone();
    config.out_dir = root.join("out");
    config.count = 50;
    config.image_side = 80;
    config.base_patch_side = 20;
    config.seed = 9;
    run_generate(&config)?;

    // re-scan from disk rather than trusting the pipeline's own accounting
    let report = run_report(&config.out_dir, Some(&manifest))?;
    println!("{report}");
    let down = report.decreased_classes();
    if down.is_empty() {
        println!("no class lost share relative to the source");
    } else {
        println!("classes with decreased share: {down:?}");
    }
    Ok(())
}
