//! Loading, validation, tiling and persistence of image/mask pairs.
//!
//! Input manifests are line-delimited `id <TAB> image_path <TAB> mask_path`
//! records with an optional first line `classes=N ignore=K`. Relative paths
//! are resolved against the manifest's directory. Images are 8-bit RGB PNG,
//! masks are 8-bit grayscale PNG holding class indices.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::composer::SyntheticSample;
use crate::error::{Error, Result};
use crate::raster::Raster;

pub const DEFAULT_IGNORE_INDEX: u8 = 255;

/// An image raster paired with a class-index mask of identical dimensions.
#[derive(Clone, Debug)]
pub struct LabeledSample {
    pub id: String,
    pub image: Raster,
    pub mask: Raster,
}

#[derive(Clone, Debug)]
pub struct ManifestEntry {
    pub id: String,
    pub image_path: PathBuf,
    pub mask_path: PathBuf,
}

#[derive(Clone, Debug)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub class_count: usize,
    pub ignore_index: u8,
}

fn manifest_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Manifest {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

/// Parse an input manifest. `class_count` is 0 when the header is absent and
/// must then be inferred from the loaded masks.
fn parse_manifest(path: &Path) -> Result<(Vec<ManifestEntry>, Option<usize>, u8)> {
    let text = fs::read_to_string(path)
        .map_err(|e| manifest_err(path, format!("cannot read: {e}")))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    let mut declared_classes = None;
    let mut ignore_index = DEFAULT_IGNORE_INDEX;
    let mut seen_ids = std::collections::HashSet::new();

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if lineno == 0 && line.contains("classes=") {
            for tok in line.split_whitespace() {
                if let Some(v) = tok.strip_prefix("classes=") {
                    declared_classes = Some(v.parse::<usize>().map_err(|_| {
                        manifest_err(path, format!("bad classes= value {v:?}"))
                    })?);
                } else if let Some(v) = tok.strip_prefix("ignore=") {
                    ignore_index = v.parse::<u8>().map_err(|_| {
                        manifest_err(path, format!("bad ignore= value {v:?}"))
                    })?;
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(manifest_err(
                path,
                format!("line {}: expected 3 tab-separated fields", lineno + 1),
            ));
        }
        let id = fields[0].to_string();
        if !seen_ids.insert(id.clone()) {
            return Err(manifest_err(path, format!("duplicate id {id:?}")));
        }
        entries.push(ManifestEntry {
            id,
            image_path: base.join(fields[1]),
            mask_path: base.join(fields[2]),
        });
    }
    if entries.is_empty() {
        return Err(manifest_err(path, "no entries"));
    }
    if let Some(n) = declared_classes {
        if (ignore_index as usize) < n {
            return Err(manifest_err(
                path,
                format!("ignore index {ignore_index} collides with class range 0..{n}"),
            ));
        }
    }
    Ok((entries, declared_classes, ignore_index))
}

pub fn load_rgb(path: &Path) -> Result<Raster> {
    let img = image::open(path)?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(Raster::from_raw(w, h, 3, img.into_raw()))
}

pub fn load_mask(path: &Path, id: &str) -> Result<Raster> {
    match image::open(path)? {
        image::DynamicImage::ImageLuma8(m) => {
            let (w, h) = (m.width() as usize, m.height() as usize);
            Ok(Raster::from_raw(w, h, 1, m.into_raw()))
        }
        _ => Err(Error::MaskNotGrayscale { id: id.to_string() }),
    }
}

fn validate_sample(sample: &LabeledSample, class_count: usize, ignore_index: u8) -> Result<()> {
    if sample.image.width() != sample.mask.width() || sample.image.height() != sample.mask.height()
    {
        return Err(Error::DimensionMismatch {
            id: sample.id.clone(),
            image_w: sample.image.width(),
            image_h: sample.image.height(),
            mask_w: sample.mask.width(),
            mask_h: sample.mask.height(),
        });
    }
    for &v in sample.mask.data() {
        if (v as usize) >= class_count && v != ignore_index {
            return Err(Error::MaskValueOutOfRange {
                id: sample.id.clone(),
                value: v,
                class_count,
                ignore_index,
            });
        }
    }
    Ok(())
}

/// Load all samples referenced by a manifest and verify their invariants.
///
/// When the manifest does not declare `classes=N`, the class count is
/// inferred as the largest observed non-ignore index plus one.
pub fn load_dataset(manifest_path: &Path) -> Result<(DatasetManifest, Vec<LabeledSample>)> {
    let (entries, declared_classes, ignore_index) = parse_manifest(manifest_path)?;
    let mut samples = Vec::with_capacity(entries.len());
    for entry in &entries {
        samples.push(LabeledSample {
            id: entry.id.clone(),
            image: load_rgb(&entry.image_path)?,
            mask: load_mask(&entry.mask_path, &entry.id)?,
        });
    }
    let class_count = match declared_classes {
        Some(n) => n,
        None => {
            let max = samples
                .iter()
                .flat_map(|s| s.mask.data().iter().copied())
                .filter(|&v| v != ignore_index)
                .max()
                .ok_or(Error::AllIgnored)?;
            max as usize + 1
        }
    };
    for sample in &samples {
        validate_sample(sample, class_count, ignore_index)?;
    }
    Ok((
        DatasetManifest {
            entries,
            class_count,
            ignore_index,
        },
        samples,
    ))
}

/// Window start positions along one axis: stride steps from 0, plus a final
/// edge-flush position when the stride does not land exactly on the edge.
pub(crate) fn axis_positions(dim: usize, window: usize, stride: usize) -> Vec<usize> {
    debug_assert!(window <= dim && stride >= 1);
    let mut out = Vec::new();
    let mut x = 0;
    while x + window <= dim {
        out.push(x);
        x += stride;
    }
    let flush = dim - window;
    if *out.last().expect("at least position 0") != flush {
        out.push(flush);
    }
    out
}

/// Cut every sample into overlapping square tiles.
///
/// Stride is `tile_size * (1 - overlap_fraction)` rounded down; a final tile
/// aligned with the right/bottom edge is added so every pixel is covered.
pub fn tile_dataset(
    samples: &[LabeledSample],
    tile_size: usize,
    overlap_fraction: f64,
) -> Result<Vec<LabeledSample>> {
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::Config(format!(
            "overlap fraction {overlap_fraction} must be in [0, 1)"
        )));
    }
    let stride = ((tile_size as f64) * (1.0 - overlap_fraction)).floor() as usize;
    let stride = stride.max(1);
    let mut tiles = Vec::new();
    for sample in samples {
        let (w, h) = (sample.image.width(), sample.image.height());
        if tile_size > w || tile_size > h {
            return Err(Error::TileTooLarge {
                id: sample.id.clone(),
                tile: tile_size,
                w,
                h,
            });
        }
        for &y in &axis_positions(h, tile_size, stride) {
            for &x in &axis_positions(w, tile_size, stride) {
                tiles.push(LabeledSample {
                    id: format!("{}_x{x}_y{y}", sample.id),
                    image: sample.image.window(x, y, tile_size),
                    mask: sample.mask.window(x, y, tile_size),
                });
            }
        }
    }
    Ok(tiles)
}

#[derive(Clone, Debug)]
pub struct SavedPaths {
    pub image_path: PathBuf,
    pub mask_path: PathBuf,
}

/// Write a raster as PNG via a temp file and an atomic rename.
pub fn write_png(path: &Path, raster: &Raster) -> Result<()> {
    // Write to a temp name, then rename: a failed run leaves no partial file.
    let tmp = path.with_extension("png.tmp");
    let (w, h) = (raster.width() as u32, raster.height() as u32);
    match raster.channels() {
        3 => {
            let img = image::RgbImage::from_raw(w, h, raster.data().to_vec())
                .expect("raster buffer matches dimensions");
            img.save_with_format(&tmp, image::ImageFormat::Png)?;
        }
        1 => {
            let img = image::GrayImage::from_raw(w, h, raster.data().to_vec())
                .expect("raster buffer matches dimensions");
            img.save_with_format(&tmp, image::ImageFormat::Png)?;
        }
        _ => unreachable!(),
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Persist a synthetic sample as an RGB PNG plus an index-mask PNG.
/// A round-trip load reproduces the pixel values exactly.
pub fn save_synthetic(sample: &SyntheticSample, out_dir: &Path) -> Result<SavedPaths> {
    fs::create_dir_all(out_dir)?;
    let image_path = out_dir.join(format!("{}_image.png", sample.id));
    let mask_path = out_dir.join(format!("{}_mask.png", sample.id));
    write_png(&image_path, &sample.image)?;
    write_png(&mask_path, &sample.mask)?;
    Ok(SavedPaths {
        image_path,
        mask_path,
    })
}

/// One output-manifest record:
/// `synthetic_id <TAB> image_path <TAB> mask_path <TAB> seed <TAB> scale`.
pub fn output_manifest_row(sample: &SyntheticSample, paths: &SavedPaths) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}",
        sample.id,
        paths.image_path.display(),
        paths.mask_path.display(),
        sample.seed,
        sample.scale
    )
}

/// Write manifest rows (already in stream order) under a single writer.
pub fn write_output_manifest(path: &Path, rows: &[String]) -> Result<()> {
    let tmp = path.with_extension("tsv.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        for row in rows {
            writeln!(f, "{row}")?;
        }
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct OutputRecord {
    pub id: String,
    pub image_path: PathBuf,
    pub mask_path: PathBuf,
    pub seed: u64,
    pub scale: u32,
}

pub fn read_output_manifest(path: &Path) -> Result<Vec<OutputRecord>> {
    let text = fs::read_to_string(path)
        .map_err(|e| manifest_err(path, format!("cannot read: {e}")))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return Err(manifest_err(
                path,
                format!("line {}: expected 5 fields", lineno + 1),
            ));
        }
        out.push(OutputRecord {
            id: f[0].to_string(),
            image_path: PathBuf::from(f[1]),
            mask_path: PathBuf::from(f[2]),
            seed: f[3]
                .parse()
                .map_err(|_| manifest_err(path, format!("line {}: bad seed", lineno + 1)))?,
            scale: f[4]
                .parse()
                .map_err(|_| manifest_err(path, format!("line {}: bad scale", lineno + 1)))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(id: &str, w: usize, h: usize) -> LabeledSample {
        let image = Raster::from_raw(w, h, 3, (0..w * h * 3).map(|i| (i % 251) as u8).collect());
        let mask = Raster::from_raw(w, h, 1, (0..w * h).map(|i| (i % 3) as u8).collect());
        LabeledSample {
            id: id.to_string(),
            image,
            mask,
        }
    }

    #[test]
    fn axis_positions_edge_flush() {
        assert_eq!(axis_positions(800, 800, 400), vec![0]);
        assert_eq!(axis_positions(1200, 800, 400), vec![0, 400]);
        assert_eq!(axis_positions(1000, 400, 200), vec![0, 200, 400, 600]);
        assert_eq!(axis_positions(250, 100, 50), vec![0, 50, 100, 150]);
        assert_eq!(axis_positions(105, 100, 50), vec![0, 5]);
    }

    #[test]
    fn tile_counts_match_stride_enumeration() {
        let one = tile_dataset(&[sample("a", 800, 800)], 800, 0.5).unwrap();
        assert_eq!(one.len(), 1);

        let two = tile_dataset(&[sample("b", 1200, 800)], 800, 0.5).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two[0].id, "b_x0_y0");
        assert_eq!(two[1].id, "b_x400_y0");

        let sixteen = tile_dataset(&[sample("c", 1000, 1000)], 400, 0.5).unwrap();
        assert_eq!(sixteen.len(), 16);
    }

    #[test]
    fn tile_covers_every_pixel() {
        let s = sample("cov", 130, 90);
        let tiles = tile_dataset(std::slice::from_ref(&s), 40, 0.5).unwrap();
        let mut covered = vec![0u32; 130 * 90];
        for t in &tiles {
            let x: usize = t.id.split("_x").nth(1).unwrap().split("_y").next().unwrap().parse().unwrap();
            let y: usize = t.id.split("_y").nth(1).unwrap().parse().unwrap();
            for dy in 0..40 {
                for dx in 0..40 {
                    covered[(y + dy) * 130 + (x + dx)] += 1;
                }
            }
        }
        assert!(covered.iter().all(|&c| c >= 1));
    }

    #[test]
    fn tile_too_large_is_error() {
        let err = tile_dataset(&[sample("small", 100, 100)], 200, 0.0).unwrap_err();
        assert!(matches!(err, Error::TileTooLarge { .. }));
    }

    #[test]
    fn tiling_does_not_mutate_input() {
        let s = sample("keep", 64, 64);
        let before = s.image.clone();
        let _ = tile_dataset(std::slice::from_ref(&s), 32, 0.5).unwrap();
        assert_eq!(s.image, before);
    }

    #[test]
    fn manifest_round_trip_validation() {
        let dir = tempfile::tempdir().unwrap();
        let s = sample("pair", 20, 20);
        let img_p = dir.path().join("pair_image.png");
        let mask_p = dir.path().join("pair_mask.png");
        write_png(&img_p, &s.image).unwrap();
        write_png(&mask_p, &s.mask).unwrap();

        let manifest = dir.path().join("train.tsv");
        fs::write(
            &manifest,
            "pair\tpair_image.png\tpair_mask.png\npair2\tpair_image.png\tpair_mask.png\n",
        )
        .unwrap();
        let (m, samples) = load_dataset(&manifest).unwrap();
        assert_eq!(samples.len(), 2);
        assert_eq!(m.class_count, 3); // inferred: max index 2 observed
        assert_eq!(m.ignore_index, DEFAULT_IGNORE_INDEX);
        assert_eq!(samples[0].image, s.image);
        assert_eq!(samples[0].mask, s.mask);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let s = sample("bad", 100, 101);
        write_png(&dir.path().join("img.png"), &s.image).unwrap();
        let small_mask = Raster::new(100, 100, 1, 0);
        write_png(&dir.path().join("mask.png"), &small_mask).unwrap();
        let manifest = dir.path().join("train.tsv");
        fs::write(&manifest, "bad\timg.png\tmask.png\n").unwrap();
        let err = load_dataset(&manifest).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn out_of_range_mask_value_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let image = Raster::new(10, 10, 3, 0);
        let mut mask = Raster::new(10, 10, 1, 0);
        mask.set_pixel(3, 3, &[7]);
        write_png(&dir.path().join("img.png"), &image).unwrap();
        write_png(&dir.path().join("mask.png"), &mask).unwrap();
        let manifest = dir.path().join("train.tsv");
        fs::write(&manifest, "classes=3 ignore=255\nx\timg.png\tmask.png\n").unwrap();
        let err = load_dataset(&manifest).unwrap_err();
        assert!(matches!(err, Error::MaskValueOutOfRange { value: 7, .. }));
    }
}
