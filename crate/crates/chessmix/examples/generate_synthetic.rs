//! End-to-end generation: build a toy dataset, synthesize 24 chessboard
//! composites at two scales, and print the balance report.
//!
//! Run with `cargo run --example generate_synthetic`.

#[path = "util/toy.rs"]
mod toy;

use chessmix::config::GenerationConfig;
use chessmix::pipeline::run_generate;

fn main() -> chessmix::Result<()> {
    let root = toy::scratch("generate_synthetic");
    let manifest = toy::write_dataset(&root.join("source"), 2, 160);

    let mut config = GenerationConfig::default();
    config.manifest_path = manifest;
    config.out_dir = root.join("out");
    config.count = 24;
    config.image_side = 80;
    config.base_patch_side = 10;
    config.scales = vec![1, 2];
    config.scale_probs = vec![0.5, 0.5];
    config.mirror = true;
    config.audit = true;
    config.seed = 42;

    let outcome = run_generate(&config)?;
    println!("wrote {}", outcome.manifest_path.display());
    println!("{}", outcome.report);
    Ok(())
}
