//! Compute class statistics, build the rarity-weighted patch index, and
//! show which windows the sampler favors.
//!
//! Run with `cargo run --example inspect_weights`.

#[path = "util/toy.rs"]
mod toy;

use chessmix::dataset_io::load_dataset;
use chessmix::stats_index::{build_index, compute_class_stats, dump_index};

fn main() -> chessmix::Result<()> {
    let root = toy::scratch("inspect_weights");
    let manifest = toy::write_dataset(&root.join("source"), 2, 160);

    let (m, samples) = load_dataset(&manifest)?;
    let stats = compute_class_stats(&samples, m.class_count, m.ignore_index)?;
    for (i, &count) in stats.counts().iter().enumerate() {
        println!(
            "class {i}: {count} px ({:.2}%), rarity ratio {:.2}",
            100.0 * stats.percentages()[i],
            stats.rarity_ratio(i)
        );
    }

    let index = build_index(&samples, &stats, 20, &[1, 2])?;
    for si in &index.scales {
        let mut by_weight: Vec<_> = si.descriptors.iter().collect();
        by_weight.sort_by(|a, b| b.weight.total_cmp(&a.weight));
        println!(
            "scale {}: {} windows of {}px, total weight {:.0}",
            si.scale,
            si.descriptors.len(),
            si.side,
            si.total_weight
        );
        for d in by_weight.iter().take(3) {
            println!(
                "  top window: {} @ ({},{}) weight {:.0}",
                samples[d.sample_idx].id, d.x, d.y, d.weight
            );
        }
    }

    let dump_path = root.join("index.tsv");
    std::fs::create_dir_all(&root)?;
    dump_index(&index, &samples, std::fs::File::create(&dump_path)?)?;
    println!("full index dumped to {}", dump_path.display());
    Ok(())
}
