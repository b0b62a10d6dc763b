//! Sample the augmentation pipeline a few times and save each transformed
//! window next to the original for visual inspection.
//!
//! Run with `cargo run --example transform_gallery`.

#[path = "util/toy.rs"]
#[allow(dead_code)]
mod toy;

use chessmix::dataset_io::write_png;
use chessmix::raster::Raster;
use chessmix::sampler::RngStream;
use chessmix::transforms::{apply_transform, sample_transform, TransformParams};

fn main() -> chessmix::Result<()> {
    let root = toy::scratch("transform_gallery");
    std::fs::create_dir_all(&root)?;

    let side = 64;
    let mut image = Raster::new(side, side, 3, 0);
    let mut mask = Raster::new(side, side, 1, 0);
    for y in 0..side {
        for x in 0..side {
            image.set_pixel(x, y, &[
                toy::image_value(0, x, y, 0),
                toy::image_value(0, x, y, 1),
                toy::image_value(0, x, y, 2),
            ]);
            mask.set_pixel(x, y, &[toy::mask_value(0, x, y)]);
        }
    }
    write_png(&root.join("original_image.png"), &image)?;
    write_png(&root.join("original_mask.png"), &mask)?;

    let params = TransformParams::default();
    let mut rng = RngStream::new(7, 0);
    for i in 0..8 {
        let spec = sample_transform(&mut rng, &params);
        let (oi, om) = apply_transform(&image, &mask, &spec)?;
        write_png(&root.join(format!("t{i}_image.png")), &oi)?;
        write_png(&root.join(format!("t{i}_mask.png")), &om)?;
        println!("t{i}: {}", spec.canonical_string());
    }
    println!("gallery written to {}", root.display());
    Ok(())
}
