//! Tiny deterministic 3-class dataset shared by the examples: striped
//! classes 0/1 with sparse rare-class-2 blocks, roughly 50/40/10 shares.

use std::fs;
use std::path::{Path, PathBuf};

pub const CLASS_COUNT: usize = 3;
pub const IGNORE: u8 = 255;

pub fn mask_value(sample: usize, x: usize, y: usize) -> u8 {
    let (bx, by) = (x / 16, y / 16);
    if bx < 10 && by < 10 {
        let slot = by * 10 + bx;
        if (slot * 7 + sample * 3) % 100 < 71 && x % 16 < 6 && y % 16 < 6 {
            return 2;
        }
    }
    if (x + 3 * y + sample) % 9 < 5 {
        0
    } else {
        1
    }
}

pub fn image_value(sample: usize, x: usize, y: usize, c: usize) -> u8 {
    ((x * 31 + y * 17 + sample * 7 + c * 101) % 256) as u8
}

/// Write `n_samples` image/mask PNG pairs plus a manifest under `dir` and
/// return the manifest path.
pub fn write_dataset(dir: &Path, n_samples: usize, side: usize) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
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
                        image_value(s, x, y, 0),
                        image_value(s, x, y, 1),
                        image_value(s, x, y, 2),
                    ]),
                );
                mask.put_pixel(x as u32, y as u32, image::Luma([mask_value(s, x, y)]));
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

/// Root for an example's scratch output, under the workspace target dir.
pub fn scratch(name: &str) -> PathBuf {
    PathBuf::from("target").join("example-scratch").join(name)
}
