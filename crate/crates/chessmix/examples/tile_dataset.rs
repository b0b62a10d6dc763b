//! Split large source rasters into overlapping square tiles, the usual
//! preprocessing step before patch indexing when sources are huge.
//!
//! Run with `cargo run --example tile_dataset`.

#[path = "util/toy.rs"]
mod toy;

use chessmix::dataset_io::{load_dataset, tile_dataset};

fn main() -> chessmix::Result<()> {
    let root = toy::scratch("tile_dataset");
    let manifest = toy::write_dataset(&root.join("source"), 2, 320);

    let (_, samples) = load_dataset(&manifest)?;
    for overlap in [0.0, 0.5] {
        let tiles = tile_dataset(&samples, 160, overlap)?;
        println!(
            "{} samples of 320px -> {} tiles of 160px at overlap {overlap}",
            samples.len(),
            tiles.len()
        );
        for t in tiles.iter().take(4) {
            println!("  {} ({}x{})", t.id, t.image.width(), t.image.height());
        }
    }
    Ok(())
}
