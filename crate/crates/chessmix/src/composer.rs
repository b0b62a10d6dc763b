//! Assembly of synthetic image/mask pairs on the chessboard grid.
//!
//! Filled cells sit where row + column is even, so no two patches ever share
//! an edge. Empty mask cells always hold the ignore index; empty image cells
//! are black unless mirroring copies in a horizontally flipped neighbor.

use crate::dataset_io::LabeledSample;
use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::sampler::{choose_patch, RngStream};
use crate::stats_index::PatchIndex;
use crate::transforms::{apply_transform, sample_transform, TransformParams, TransformSpec};

/// Chessboard cell layout for one synthetic image.
#[derive(Clone, Debug)]
pub struct ChessLayout {
    pub image_side: usize,
    pub cell_side: usize,
    pub grid_n: usize,
}

impl ChessLayout {
    /// `image_side` must be a multiple of `cell_side`. Cell (0, 0) is filled.
    pub fn new(image_side: usize, cell_side: usize) -> Result<ChessLayout> {
        if cell_side == 0 || image_side % cell_side != 0 {
            return Err(Error::LayoutIndivisible {
                image_side,
                cell_side,
            });
        }
        Ok(ChessLayout {
            image_side,
            cell_side,
            grid_n: image_side / cell_side,
        })
    }

    #[inline]
    pub fn is_filled(&self, row: usize, col: usize) -> bool {
        (row + col) % 2 == 0
    }

    /// Filled cells in row-major order.
    pub fn filled_cells(&self) -> Vec<(usize, usize)> {
        self.cells(true)
    }

    pub fn empty_cells(&self) -> Vec<(usize, usize)> {
        self.cells(false)
    }

    fn cells(&self, filled: bool) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.grid_n {
            for c in 0..self.grid_n {
                if self.is_filled(r, c) == filled {
                    out.push((r, c));
                }
            }
        }
        out
    }
}

/// Source patch and transform used for one filled cell.
#[derive(Clone, Debug)]
pub struct CellProvenance {
    pub row: usize,
    pub col: usize,
    pub sample_id: String,
    pub x: usize,
    pub y: usize,
    pub side: usize,
    pub scale: u32,
    pub spec: TransformSpec,
}

/// A composed synthetic pair plus the record of how it was built.
#[derive(Clone, Debug)]
pub struct SyntheticSample {
    pub id: String,
    pub image: Raster,
    pub mask: Raster,
    pub provenance: Vec<CellProvenance>,
    pub seed: u64,
    pub stream_id: u64,
    pub scale: u32,
}

/// Fill every chessboard cell with a weighted-sampled, transformed patch.
///
/// Cells are processed in row-major order consuming the stream sequentially;
/// this ordering is part of the reproducibility contract.
pub fn compose(
    rng: &mut RngStream,
    layout: &ChessLayout,
    index: &PatchIndex,
    scale_ordinal: usize,
    samples: &[LabeledSample],
    transform_params: &TransformParams,
    ignore_index: u8,
) -> Result<SyntheticSample> {
    let scale_index = index.scale_index(scale_ordinal);
    debug_assert_eq!(scale_index.side, layout.cell_side);
    let mut image = Raster::new(layout.image_side, layout.image_side, 3, 0);
    let mut mask = Raster::new(layout.image_side, layout.image_side, 1, ignore_index);
    let mut provenance = Vec::new();

    for (row, col) in layout.filled_cells() {
        let descriptor = choose_patch(rng, scale_index)?;
        let source = &samples[descriptor.sample_idx];
        let image_window = source.image.window(descriptor.x, descriptor.y, descriptor.side);
        let mask_window = source.mask.window(descriptor.x, descriptor.y, descriptor.side);
        let spec = sample_transform(rng, transform_params);
        let (ti, tm) = apply_transform(&image_window, &mask_window, &spec)?;
        let px = col * layout.cell_side;
        let py = row * layout.cell_side;
        image.blit(px, py, &ti);
        mask.blit(px, py, &tm);
        provenance.push(CellProvenance {
            row,
            col,
            sample_id: source.id.clone(),
            x: descriptor.x,
            y: descriptor.y,
            side: descriptor.side,
            scale: scale_index.scale,
            spec,
        });
    }

    Ok(SyntheticSample {
        id: format!("syn_{:06}", rng.stream_id()),
        image,
        mask,
        provenance,
        seed: rng.master_seed(),
        stream_id: rng.stream_id(),
        scale: scale_index.scale,
    })
}

/// Copy each filled cell's horizontally mirrored pixels into its adjacent
/// empty image cell: even columns mirror rightward, odd columns leftward,
/// falling back to the opposite side at the image border. The mask keeps its
/// ignore cells untouched.
pub fn mirror_fill(sample: &mut SyntheticSample, layout: &ChessLayout) {
    for (row, col) in layout.filled_cells() {
        let preferred: i64 = if col % 2 == 0 { col as i64 + 1 } else { col as i64 - 1 };
        let fallback: i64 = if col % 2 == 0 { col as i64 - 1 } else { col as i64 + 1 };
        let target = if (0..layout.grid_n as i64).contains(&preferred) {
            preferred
        } else if (0..layout.grid_n as i64).contains(&fallback) {
            fallback
        } else {
            continue; // 1x1 grid has no horizontal neighbor
        } as usize;
        let cell = sample.image.window(
            col * layout.cell_side,
            row * layout.cell_side,
            layout.cell_side,
        );
        sample
            .image
            .blit(target * layout.cell_side, row * layout.cell_side, &cell.hflip());
    }
}
