//! Training-set class statistics and the rarity-weighted mini-patch index.
//!
//! A mini-patch weight is the sum over its pixels of `c_max / c_i`, where
//! `c_i` is the training-set share of the pixel's class and `c_max` the share
//! of the most common class. Rarer classes therefore pull more weight, which
//! biases patch selection toward underrepresented content.

use std::io::Write;

use crate::dataset_io::{axis_positions, LabeledSample};
use crate::error::{Error, Result};
use crate::raster::Raster;

/// Per-class pixel counts and shares over the whole training set.
/// Ignore-index pixels are excluded from both numerator and denominator.
#[derive(Clone, Debug)]
pub struct ClassStats {
    counts: Vec<u64>,
    percentages: Vec<f64>,
    max_count: u64,
    total: u64,
    ignore_index: u8,
}

impl ClassStats {
    /// Build stats directly from per-class pixel counts.
    pub fn from_counts(counts: Vec<u64>, ignore_index: u8) -> Result<ClassStats> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::AllIgnored);
        }
        let max_count = *counts.iter().max().expect("non-empty counts");
        let percentages = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Ok(ClassStats {
            counts,
            percentages,
            max_count,
            total,
            ignore_index,
        })
    }

    pub fn class_count(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn percentages(&self) -> &[f64] {
        &self.percentages
    }

    pub fn total_pixels(&self) -> u64 {
        self.total
    }

    pub fn ignore_index(&self) -> u8 {
        self.ignore_index
    }

    pub fn c_max(&self) -> f64 {
        self.max_count as f64 / self.total as f64
    }

    /// Classes absent from the training set (excluded from weighting).
    pub fn absent_classes(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// `c_max / c_i`, computed from the integer counts so the common ratios
    /// (e.g. 50/40) are exact. Zero for absent classes.
    #[inline]
    pub fn rarity_ratio(&self, class: usize) -> f64 {
        let c = self.counts[class];
        if c == 0 {
            0.0
        } else {
            self.max_count as f64 / c as f64
        }
    }
}

/// Count class pixels over all samples. Errors if no labeled pixel exists.
pub fn compute_class_stats(
    samples: &[LabeledSample],
    class_count: usize,
    ignore_index: u8,
) -> Result<ClassStats> {
    let mut counts = vec![0u64; class_count];
    for s in samples {
        for &v in s.mask.data() {
            if v != ignore_index {
                counts[v as usize] += 1;
            }
        }
    }
    ClassStats::from_counts(counts, ignore_index)
}

/// Candidate top-left offsets for `side`-sized patches at 50% overlap
/// (stride `side / 2`), with one edge-flush position per axis when the
/// stride does not land on the border exactly.
pub fn enumerate_patches(width: usize, height: usize, side: usize) -> Result<Vec<(usize, usize)>> {
    if side % 2 != 0 {
        return Err(Error::OddPatchSide(side));
    }
    if side > width || side > height {
        return Err(Error::PatchTooLarge {
            side,
            w: width,
            h: height,
        });
    }
    let stride = side / 2;
    let xs = axis_positions(width, side, stride);
    let ys = axis_positions(height, side, stride);
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for &y in &ys {
        for &x in &xs {
            out.push((x, y));
        }
    }
    Ok(out)
}

/// Rarity-weighted pixel score of one mask window. Ignore pixels and absent
/// classes contribute nothing; an all-ignore window scores 0.
pub fn patch_weight(mask_window: &Raster, stats: &ClassStats) -> f64 {
    debug_assert_eq!(mask_window.channels(), 1);
    let mut hist = vec![0u64; stats.class_count()];
    for &v in mask_window.data() {
        if v != stats.ignore_index() {
            hist[v as usize] += 1;
        }
    }
    let mut w = 0.0;
    for (class, &p) in hist.iter().enumerate() {
        if p > 0 {
            w += stats.rarity_ratio(class) * p as f64;
        }
    }
    w
}

/// One candidate mini-patch.
#[derive(Clone, Debug)]
pub struct PatchDescriptor {
    pub sample_idx: usize,
    pub x: usize,
    pub y: usize,
    pub side: usize,
    pub weight: f64,
}

/// Descriptors for one scale plus the prefix-sum table used for sampling.
#[derive(Clone, Debug)]
pub struct ScaleIndex {
    pub scale: u32,
    pub side: usize,
    pub descriptors: Vec<PatchDescriptor>,
    pub cumulative: Vec<f64>,
    pub total_weight: f64,
}

#[derive(Clone, Debug)]
pub struct PatchIndex {
    pub base_side: usize,
    pub scales: Vec<ScaleIndex>,
}

impl PatchIndex {
    pub fn scale_index(&self, ordinal: usize) -> &ScaleIndex {
        &self.scales[ordinal]
    }
}

/// Enumerate and weight every candidate patch at every scale.
///
/// Samples too small for a scale are skipped at that scale; a scale where
/// every sample is skipped or total weight is zero is an error. Descriptor
/// order is sample order, then row-major offsets; the cumulative table is an
/// exact sequential prefix sum over that order.
pub fn build_index(
    samples: &[LabeledSample],
    stats: &ClassStats,
    base_side: usize,
    scales: &[u32],
) -> Result<PatchIndex> {
    let mut scale_indexes = Vec::with_capacity(scales.len());
    for &scale in scales {
        let side = base_side * scale as usize;
        let mut descriptors = Vec::new();
        for (sample_idx, s) in samples.iter().enumerate() {
            if side > s.mask.width() || side > s.mask.height() {
                continue;
            }
            for (x, y) in enumerate_patches(s.mask.width(), s.mask.height(), side)? {
                let weight = patch_weight(&s.mask.window(x, y, side), stats);
                descriptors.push(PatchDescriptor {
                    sample_idx,
                    x,
                    y,
                    side,
                    weight,
                });
            }
        }
        if descriptors.is_empty() {
            return Err(Error::NoUsableScale);
        }
        let mut cumulative = Vec::with_capacity(descriptors.len());
        let mut acc = 0.0;
        for d in &descriptors {
            acc += d.weight;
            cumulative.push(acc);
        }
        if acc <= 0.0 {
            return Err(Error::EmptyScale { scale });
        }
        scale_indexes.push(ScaleIndex {
            scale,
            side,
            descriptors,
            cumulative,
            total_weight: acc,
        });
    }
    Ok(PatchIndex {
        base_side,
        scales: scale_indexes,
    })
}

/// Audit dump: `sample_id <TAB> x <TAB> y <TAB> side <TAB> weight`.
pub fn dump_index(
    index: &PatchIndex,
    samples: &[LabeledSample],
    mut out: impl Write,
) -> Result<()> {
    for scale in &index.scales {
        for d in &scale.descriptors {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                samples[d.sample_idx].id, d.x, d.y, d.side, d.weight
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_sample(id: &str, w: usize, h: usize, vals: Vec<u8>) -> LabeledSample {
        LabeledSample {
            id: id.to_string(),
            image: Raster::new(w, h, 3, 0),
            mask: Raster::from_raw(w, h, 1, vals),
        }
    }

    #[test]
    fn single_class_stats() {
        let s = mask_sample("a", 10, 10, vec![0; 100]);
        let stats = compute_class_stats(&[s], 1, 255).unwrap();
        assert_eq!(stats.percentages(), &[1.0]);
        assert_eq!(stats.c_max(), 1.0);
    }

    #[test]
    fn three_class_split_matches_hand_counts() {
        let mut vals = vec![0u8; 50];
        vals.extend(vec![1u8; 40]);
        vals.extend(vec![2u8; 10]);
        let s = mask_sample("a", 10, 10, vals);
        let stats = compute_class_stats(&[s], 3, 255).unwrap();
        assert_eq!(stats.percentages(), &[0.5, 0.4, 0.1]);
        assert_eq!(stats.c_max(), 0.5);
    }

    #[test]
    fn ignore_pixels_are_excluded() {
        let mut vals = vec![0u8; 60];
        vals.extend(vec![1u8; 20]);
        vals.extend(vec![255u8; 20]);
        let s = mask_sample("a", 10, 10, vals);
        let stats = compute_class_stats(&[s], 2, 255).unwrap();
        assert_eq!(stats.percentages(), &[0.75, 0.25]);
    }

    #[test]
    fn all_ignore_dataset_is_error() {
        let s = mask_sample("a", 4, 4, vec![255; 16]);
        assert!(matches!(
            compute_class_stats(&[s], 2, 255),
            Err(Error::AllIgnored)
        ));
    }

    #[test]
    fn enumerate_matches_stride_oracle() {
        assert_eq!(enumerate_patches(400, 400, 100).unwrap().len(), 49);
        assert_eq!(enumerate_patches(100, 100, 100).unwrap(), vec![(0, 0)]);
        let pos = enumerate_patches(250, 100, 100).unwrap();
        assert_eq!(
            pos,
            vec![(0, 0), (50, 0), (100, 0), (150, 0)],
            "x sweeps with edge flush at 150, y fixed at 0"
        );
    }

    #[test]
    fn enumerate_positions_in_bounds_and_unique() {
        let pos = enumerate_patches(370, 260, 60).unwrap();
        let mut seen = std::collections::HashSet::new();
        for &(x, y) in &pos {
            assert!(x + 60 <= 370 && y + 60 <= 260);
            assert!(seen.insert((x, y)));
        }
    }

    #[test]
    fn oversized_or_odd_side_errors() {
        assert!(matches!(
            enumerate_patches(50, 50, 100),
            Err(Error::PatchTooLarge { .. })
        ));
        assert!(matches!(
            enumerate_patches(100, 100, 33),
            Err(Error::OddPatchSide(33))
        ));
    }

    #[test]
    fn worked_weight_example() {
        // Shares 50/40/10; window with 4000/2000/4000 pixels per class.
        let stats = ClassStats::from_counts(vec![50, 40, 10], 255).unwrap();
        let mut vals = vec![0u8; 4000];
        vals.extend(vec![1u8; 2000]);
        vals.extend(vec![2u8; 4000]);
        let window = Raster::from_raw(100, 100, 1, vals);
        assert_eq!(patch_weight(&window, &stats), 26500.0);
    }

    #[test]
    fn most_common_class_window_weight_equals_area() {
        let stats = ClassStats::from_counts(vec![70, 30], 255).unwrap();
        let window = Raster::new(16, 16, 1, 0);
        assert_eq!(patch_weight(&window, &stats), 256.0);
    }

    #[test]
    fn all_ignore_window_weight_is_zero() {
        let stats = ClassStats::from_counts(vec![70, 30], 255).unwrap();
        let window = Raster::new(8, 8, 1, 255);
        assert_eq!(patch_weight(&window, &stats), 0.0);
    }

    #[test]
    fn index_sizes_per_scale() {
        let s = mask_sample("a", 400, 400, vec![0; 160_000]);
        let stats = compute_class_stats(std::slice::from_ref(&s), 1, 255).unwrap();
        let index = build_index(&[s], &stats, 100, &[1, 2]).unwrap();
        assert_eq!(index.scales[0].descriptors.len(), 49);
        assert_eq!(index.scales[1].descriptors.len(), 9);
    }

    #[test]
    fn uniform_dataset_weight_equals_area() {
        let s = mask_sample("a", 200, 200, vec![0; 40_000]);
        let stats = compute_class_stats(std::slice::from_ref(&s), 1, 255).unwrap();
        let index = build_index(&[s], &stats, 50, &[1]).unwrap();
        assert!(index.scales[0]
            .descriptors
            .iter()
            .all(|d| d.weight == 2500.0));
    }

    #[test]
    fn index_weights_match_independent_recomputation() {
        let mut vals = Vec::with_capacity(120 * 120);
        for i in 0..120 * 120 {
            vals.push(((i * 7 + i / 120) % 3) as u8);
        }
        let s = mask_sample("a", 120, 120, vals);
        let stats = compute_class_stats(std::slice::from_ref(&s), 3, 255).unwrap();
        let index = build_index(std::slice::from_ref(&s), &stats, 40, &[1]).unwrap();
        for d in &index.scales[0].descriptors {
            let w = patch_weight(&s.mask.window(d.x, d.y, d.side), &stats);
            assert_eq!(d.weight, w);
        }
    }

    #[test]
    fn cumulative_table_is_nondecreasing_and_ends_at_total() {
        let s = mask_sample("a", 120, 120, (0..120 * 120).map(|i| (i % 2) as u8).collect());
        let stats = compute_class_stats(std::slice::from_ref(&s), 2, 255).unwrap();
        let index = build_index(&[s], &stats, 40, &[1]).unwrap();
        let si = &index.scales[0];
        let mut prev = 0.0;
        for &c in &si.cumulative {
            assert!(c >= prev);
            prev = c;
        }
        assert_eq!(*si.cumulative.last().unwrap(), si.total_weight);
    }

    #[test]
    fn too_small_samples_are_skipped_not_fatal() {
        let big = mask_sample("big", 80, 80, vec![0; 6400]);
        let small = mask_sample("small", 30, 30, vec![0; 900]);
        let stats = compute_class_stats(&[big.clone(), small.clone()], 1, 255).unwrap();
        let index = build_index(&[big, small], &stats, 40, &[1, 2]).unwrap();
        // scale 2 (side 80) only fits the big sample
        assert_eq!(index.scales[1].descriptors.len(), 1);
    }
}
