use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by the augmentation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),

    #[error("manifest {path}: {msg}")]
    Manifest { path: PathBuf, msg: String },

    #[error("sample {id}: image is {image_w}x{image_h} but mask is {mask_w}x{mask_h}")]
    DimensionMismatch {
        id: String,
        image_w: usize,
        image_h: usize,
        mask_w: usize,
        mask_h: usize,
    },

    #[error("sample {id}: mask value {value} is outside 0..{class_count} and is not the ignore index {ignore_index}")]
    MaskValueOutOfRange {
        id: String,
        value: u8,
        class_count: usize,
        ignore_index: u8,
    },

    #[error("sample {id}: mask must be an 8-bit single-channel raster")]
    MaskNotGrayscale { id: String },

    #[error("tile size {tile} exceeds dimensions {w}x{h} of sample {id}")]
    TileTooLarge {
        id: String,
        tile: usize,
        w: usize,
        h: usize,
    },

    #[error("patch side {side} exceeds raster dimensions {w}x{h}")]
    PatchTooLarge { side: usize, w: usize, h: usize },

    #[error("patch side {0} must be even")]
    OddPatchSide(usize),

    #[error("dataset contains no labeled (non-ignore) pixels")]
    AllIgnored,

    #[error("scale {scale} has zero total patch weight")]
    EmptyScale { scale: u32 },

    #[error("no sample is large enough for any requested scale")]
    NoUsableScale,

    #[error("degenerate corner correspondence: homography system is singular")]
    SingularHomography,

    #[error("window must be square, got {w}x{h}")]
    NonSquareWindow { w: usize, h: usize },

    #[error("image side {image_side} is not divisible by cell side {cell_side}")]
    LayoutIndivisible { image_side: usize, cell_side: usize },

    #[error("generation failed for stream {stream_id}: {source}")]
    Generation { stream_id: u64, source: Box<Error> },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("raster: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    /// Process exit code classification: 1 config, 2 dataset, 3 generation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::OddPatchSide(_) | Error::LayoutIndivisible { .. } => 1,
            Error::Generation { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
