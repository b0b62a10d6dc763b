//! Chessboard-patterned cut-and-mix augmentation for semantic segmentation.
//!
//! The library synthesizes new training pairs by sampling rarity-weighted
//! square mini-patches from an existing labeled dataset, transforming them
//! geometrically, and placing them on a chessboard grid where the interleaved
//! empty cells carry an ignore index so downstream trainers skip them in the
//! loss. Patches never touch edge-to-edge, which avoids hard spatial
//! discontinuities between content cut from different images.
//!
//! Typical flow:
//!
//! ```no_run
//! use chessmix::config::GenerationConfig;
//! use chessmix::pipeline::run_generate;
//!
//! let mut config = GenerationConfig::default();
//! config.manifest_path = "train.tsv".into();
//! config.out_dir = "augmented".into();
//! config.count = 1000;
//! config.seed = 42;
//! let outcome = run_generate(&config).unwrap();
//! println!("{}", outcome.report);
//! ```
//!
//! See the `examples/` directory for runnable demonstrations of each stage:
//! tiling, weighting, sampling, transforming, composing and reporting.

pub mod composer;
pub mod config;
pub mod dataset_io;
pub mod error;
pub mod pipeline;
pub mod raster;
pub mod report;
pub mod sampler;
pub mod stats_index;
pub mod transforms;

pub use error::{Error, Result};
