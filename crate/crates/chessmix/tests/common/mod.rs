//! Shared toy-dataset builder for integration tests.
//!
//! Produces a deterministic 3-class dataset with pixel shares close to
//! [0.5, 0.4, 0.1]: a 5:4 striped background of classes 0 and 1 with 6x6
//! rare-class blocks sprinkled on a lattice to make up roughly 10%.

use std::fs;
use std::path::{Path, PathBuf};

pub const CLASS_COUNT: usize = 3;
pub const IGNORE: u8 = 255;

pub fn toy_mask_value(sample: usize, x: usize, y: usize) -> u8 {
    // rare blocks: 6x6 squares on a 16px lattice, 71 of the 100 positions
    let (bx, by) = (x / 16, y / 16);
    if bx < 10 && by < 10 {
        let slot = by * 10 + bx;
        let taken = (slot * 7 + sample * 3) % 100 < 71;
        if taken && x % 16 < 6 && y % 16 < 6 {
            return 2;
        }
    }
    if (x + 3 * y + sample) % 9 < 5 {
        0
    } else {
        1
    }
}

pub fn toy_image_value(sample: usize, x: usize, y: usize, c: usize) -> u8 {
    ((x * 31 + y * 17 + sample * 7 + c * 101) % 256) as u8
}

/// Write `n_samples` PNG pairs of the given side plus a manifest; returns the
/// manifest path.
pub fn write_toy_dataset(dir: &Path, n_samples: usize, side: usize) -> PathBuf {
    let mut manifest = format!("classes={CLASS_COUNT} ignore={IGNORE}\n");
    for s in 0..n_samples {
        let mut img = image::RgbImage::new(side as u32, side as u32);
        let mut mask = image::GrayImage::new(side as u32, side as u32);
        for y in 0..side {
            for x in 0..side {
                img.put_pixel(
                    x as u32,
                    y as u32,
                    image::Rgb([
                        toy_image_value(s, x, y, 0),
                        toy_image_value(s, x, y, 1),
                        toy_image_value(s, x, y, 2),
                    ]),
                );
                mask.put_pixel(x as u32, y as u32, image::Luma([toy_mask_value(s, x, y)]));
            }
        }
        let img_name = format!("toy{s}_image.png");
        let mask_name = format!("toy{s}_mask.png");
        img.save(dir.join(&img_name)).unwrap();
        mask.save(dir.join(&mask_name)).unwrap();
        manifest.push_str(&format!("toy{s}\t{img_name}\t{mask_name}\n"));
    }
    let path = dir.join("train.tsv");
    fs::write(&path, manifest).unwrap();
    path
}
