//! Generation configuration: defaults, flat key=value config files, presets.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::transforms::TransformParams;

/// Everything a `generate` run needs. Defaults follow the reference setup:
/// 1000 images, 800/200 geometry, scales 1 and 2 at even odds.
#[derive(Clone, Debug)]
pub struct GenerationConfig {
    pub manifest_path: PathBuf,
    pub out_dir: PathBuf,
    pub count: u64,
    pub image_side: usize,
    pub base_patch_side: usize,
    pub scales: Vec<u32>,
    pub scale_probs: Vec<f64>,
    pub mirror: bool,
    pub seed: u64,
    pub jobs: usize,
    pub audit: bool,
    /// Overrides the manifest's ignore index when set.
    pub ignore_index: Option<u8>,
    pub transform: TransformParams,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            manifest_path: PathBuf::new(),
            out_dir: PathBuf::new(),
            count: 1000,
            image_side: 800,
            base_patch_side: 200,
            scales: vec![1, 2],
            scale_probs: vec![0.5, 0.5],
            mirror: false,
            seed: 0,
            jobs: 0,
            audit: false,
            ignore_index: None,
            transform: TransformParams::default(),
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| cfg_err(format!("bad value {value:?} for {key}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|v| parse(key, v.trim()))
        .collect()
}

impl GenerationConfig {
    /// Named geometry presets matching the two reference dataset setups.
    pub fn apply_preset(&mut self, name: &str) -> Result<()> {
        match name {
            "vaihingen" => {
                self.image_side = 800;
                self.base_patch_side = 200;
            }
            "thetford" | "coffee" => {
                self.image_side = 400;
                self.base_patch_side = 100;
            }
            other => return Err(cfg_err(format!("unknown preset {other:?}"))),
        }
        Ok(())
    }

    /// Apply one `key=value` setting. Keys match the config-file format and
    /// the CLI flag names with `-` replaced by `_`.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "manifest" => self.manifest_path = PathBuf::from(value),
            "out" => self.out_dir = PathBuf::from(value),
            "count" => self.count = parse(key, value)?,
            "image_side" => self.image_side = parse(key, value)?,
            "patch_side" => self.base_patch_side = parse(key, value)?,
            "scales" => self.scales = parse_list(key, value)?,
            "scale_probs" => self.scale_probs = parse_list(key, value)?,
            "mirror" => self.mirror = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "jobs" => self.jobs = parse(key, value)?,
            "audit" => self.audit = parse(key, value)?,
            "ignore_index" => self.ignore_index = Some(parse(key, value)?),
            "p_vflip" => self.transform.p_vflip = parse(key, value)?,
            "p_hflip" => self.transform.p_hflip = parse(key, value)?,
            "p_rot90" => self.transform.p_rot90 = parse(key, value)?,
            "p_transpose" => self.transform.p_transpose = parse(key, value)?,
            "p_distortion" => self.transform.p_distortion = parse(key, value)?,
            "p_distortion_apply" => self.transform.p_distortion_apply = parse(key, value)?,
            "grid_steps" => self.transform.grid_steps = parse(key, value)?,
            "grid_limit" => self.transform.grid_limit = parse(key, value)?,
            "perspective_limit" => self.transform.perspective_limit = parse(key, value)?,
            "preset" => self.apply_preset(value)?,
            other => return Err(cfg_err(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Load settings from a flat `key=value` file (one per line, `#` comments).
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err(format!("cannot read config {}: {e}", path.display())))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(format!("line {}: expected key=value", lineno + 1)))?;
            self.apply_kv(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.manifest_path.as_os_str().is_empty() {
            return Err(cfg_err("manifest path is required"));
        }
        if self.out_dir.as_os_str().is_empty() {
            return Err(cfg_err("output directory is required"));
        }
        if self.count < 1 {
            return Err(cfg_err("count must be at least 1"));
        }
        if self.scales.is_empty() || self.scales.len() != self.scale_probs.len() {
            return Err(cfg_err("scales and scale_probs must be non-empty and equal length"));
        }
        if self.scales.contains(&0) {
            return Err(cfg_err("scale factors must be positive"));
        }
        for &s in &self.scales {
            let cell = self.base_patch_side * s as usize;
            if cell == 0 || self.image_side % cell != 0 {
                return Err(cfg_err(format!(
                    "image side {} is not divisible by patch side {} at scale {s}",
                    self.image_side, self.base_patch_side
                )));
            }
        }
        let prob_sum: f64 = self.scale_probs.iter().sum();
        if self.scale_probs.iter().any(|&p| p < 0.0) || (prob_sum - 1.0).abs() > 1e-9 {
            return Err(cfg_err(format!(
                "scale probabilities must be nonnegative and sum to 1 (got {prob_sum})"
            )));
        }
        let t = &self.transform;
        for (name, p) in [
            ("p_vflip", t.p_vflip),
            ("p_hflip", t.p_hflip),
            ("p_rot90", t.p_rot90),
            ("p_transpose", t.p_transpose),
            ("p_distortion", t.p_distortion),
            ("p_distortion_apply", t.p_distortion_apply),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(cfg_err(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        if t.grid_steps == 0 {
            return Err(cfg_err("grid_steps must be at least 1"));
        }
        if !(0.0..1.0).contains(&t.grid_limit) {
            return Err(cfg_err("grid_limit must be in [0, 1)"));
        }
        if !(0.0..=0.2).contains(&t.perspective_limit) {
            return Err(cfg_err("perspective_limit must be in [0, 0.2]"));
        }
        Ok(())
    }
}
