//! Stochastic geometric transform pipeline applied identically to an image
//! window and its mask window.
//!
//! All randomness is consumed when a [`TransformSpec`] is sampled; applying a
//! spec is a pure function. Discrete stages (flips, quarter turns, transpose)
//! are pixel permutations. The optional distortion stage resamples through an
//! inverse mapping: bilinear for image windows, nearest neighbor for masks so
//! class indices are never fabricated, reflect-101 at the borders.

use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::sampler::RngStream;

/// Probabilities and magnitudes for [`sample_transform`].
#[derive(Clone, Debug)]
pub struct TransformParams {
    pub p_vflip: f64,
    pub p_hflip: f64,
    pub p_rot90: f64,
    pub p_transpose: f64,
    /// Gate for the distortion stage; when open, one family is drawn and
    /// applied with `p_distortion_apply`.
    pub p_distortion: f64,
    pub p_distortion_apply: f64,
    pub grid_steps: usize,
    /// Grid cell extents are scaled by factors in [1 - grid_limit, 1 + grid_limit].
    pub grid_limit: f64,
    /// Corner displacement range as a fraction of the window side.
    pub perspective_limit: f64,
}

impl Default for TransformParams {
    fn default() -> Self {
        TransformParams {
            p_vflip: 0.5,
            p_hflip: 0.5,
            p_rot90: 0.5,
            p_transpose: 0.5,
            p_distortion: 0.5,
            p_distortion_apply: 0.8,
            grid_steps: 5,
            grid_limit: 0.3,
            perspective_limit: 0.05,
        }
    }
}

/// Corner displacement cap that keeps the displaced quad convex for any draw.
const PERSPECTIVE_HARD_CAP: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub enum Distortion {
    None,
    /// Per-axis cell stretch factors; cell extents are renormalized to the
    /// window side, giving a piecewise-linear monotone coordinate map.
    Grid {
        x_factors: Vec<f64>,
        y_factors: Vec<f64>,
    },
    /// Corner offsets as fractions of the window side, in order
    /// top-left, top-right, bottom-right, bottom-left.
    Perspective { offsets: [[f64; 2]; 4] },
}

/// A fully concrete transform; applying it twice to the same input yields
/// identical output.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformSpec {
    pub vflip: bool,
    pub hflip: bool,
    pub rot90_count: u8,
    pub transpose: bool,
    pub distortion: Distortion,
}

impl TransformSpec {
    pub fn identity() -> Self {
        TransformSpec {
            vflip: false,
            hflip: false,
            rot90_count: 0,
            transpose: false,
            distortion: Distortion::None,
        }
    }

    pub fn is_identity(&self) -> bool {
        !self.vflip
            && !self.hflip
            && self.rot90_count == 0
            && !self.transpose
            && self.distortion == Distortion::None
    }

    /// Canonical serialization used for provenance digests.
    pub fn canonical_string(&self) -> String {
        let mut s = format!(
            "v{}h{}r{}t{}",
            self.vflip as u8, self.hflip as u8, self.rot90_count, self.transpose as u8
        );
        match &self.distortion {
            Distortion::None => s.push_str(":none"),
            Distortion::Grid {
                x_factors,
                y_factors,
            } => {
                s.push_str(":grid");
                for f in x_factors.iter().chain(y_factors) {
                    s.push_str(&format!(",{f:.17e}"));
                }
            }
            Distortion::Perspective { offsets } => {
                s.push_str(":persp");
                for c in offsets {
                    s.push_str(&format!(",{:.17e},{:.17e}", c[0], c[1]));
                }
            }
        }
        s
    }

    /// FNV-1a 64 digest of the canonical serialization.
    pub fn digest(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.canonical_string().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

/// Draw a concrete transform. Stage order (and therefore stream consumption
/// order) is fixed: vflip, hflip, rotation gate + count, transpose,
/// distortion gate, family, apply gate, parameters.
pub fn sample_transform(rng: &mut RngStream, params: &TransformParams) -> TransformSpec {
    let vflip = rng.bernoulli(params.p_vflip);
    let hflip = rng.bernoulli(params.p_hflip);
    let rot90_count = if rng.bernoulli(params.p_rot90) {
        rng.uniform_index(4) as u8
    } else {
        0
    };
    let transpose = rng.bernoulli(params.p_transpose);

    let distortion = if rng.bernoulli(params.p_distortion) {
        let grid_family = rng.bernoulli(0.5);
        if rng.bernoulli(params.p_distortion_apply) {
            if grid_family {
                let limit = params.grid_limit.clamp(0.0, 0.99);
                let steps = params.grid_steps.max(1);
                let mut draw = |n: usize| {
                    (0..n)
                        .map(|_| rng.uniform(1.0 - limit, 1.0 + limit))
                        .collect::<Vec<f64>>()
                };
                let x_factors = draw(steps);
                let y_factors = draw(steps);
                Distortion::Grid {
                    x_factors,
                    y_factors,
                }
            } else {
                let limit = params.perspective_limit.clamp(0.0, PERSPECTIVE_HARD_CAP);
                let mut offsets = [[0.0; 2]; 4];
                for corner in &mut offsets {
                    corner[0] = rng.uniform(-limit, limit);
                    corner[1] = rng.uniform(-limit, limit);
                }
                Distortion::Perspective { offsets }
            }
        } else {
            Distortion::None
        }
    } else {
        Distortion::None
    };

    TransformSpec {
        vflip,
        hflip,
        rot90_count,
        transpose,
        distortion,
    }
}

/// Apply the discrete stages in order vflip, hflip, rot90, transpose.
pub fn apply_discrete(window: &Raster, spec: &TransformSpec) -> Result<Raster> {
    if !window.is_square() {
        return Err(Error::NonSquareWindow {
            w: window.width(),
            h: window.height(),
        });
    }
    let mut out = window.clone();
    if spec.vflip {
        out = out.vflip();
    }
    if spec.hflip {
        out = out.hflip();
    }
    for _ in 0..(spec.rot90_count % 4) {
        out = out.rot90_ccw()?;
    }
    if spec.transpose {
        out = out.transpose()?;
    }
    Ok(out)
}

/// A 3x3 projective map in row-major order, normalized so m[8] == 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography(pub [f64; 9]);

impl Homography {
    pub fn identity() -> Self {
        Homography([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0])
    }

    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let m = &self.0;
        let w = m[6] * x + m[7] * y + m[8];
        (
            (m[0] * x + m[1] * y + m[2]) / w,
            (m[3] * x + m[4] * y + m[5]) / w,
        )
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
            + m[2] * (m[3] * m[7] - m[4] * m[6])
    }

    pub fn invert(&self) -> Result<Homography> {
        let det = self.determinant();
        if det.abs() < 1e-12 {
            return Err(Error::SingularHomography);
        }
        let m = &self.0;
        let mut inv = [
            m[4] * m[8] - m[5] * m[7],
            m[2] * m[7] - m[1] * m[8],
            m[1] * m[5] - m[2] * m[4],
            m[5] * m[6] - m[3] * m[8],
            m[0] * m[8] - m[2] * m[6],
            m[2] * m[3] - m[0] * m[5],
            m[3] * m[7] - m[4] * m[6],
            m[1] * m[6] - m[0] * m[7],
            m[0] * m[4] - m[1] * m[3],
        ];
        for v in &mut inv {
            *v /= det;
        }
        normalize_homography(&mut inv)?;
        Ok(Homography(inv))
    }
}

fn normalize_homography(m: &mut [f64; 9]) -> Result<()> {
    let w = m[8];
    if w.abs() < 1e-12 {
        return Err(Error::SingularHomography);
    }
    for v in m.iter_mut() {
        *v /= w;
    }
    Ok(())
}

/// Solve the 8x8 linear system mapping each source corner to its destination.
pub fn solve_homography(src: &[[f64; 2]; 4], dst: &[[f64; 2]; 4]) -> Result<Homography> {
    // Unknowns: h11 h12 h13 h21 h22 h23 h31 h32 (h33 fixed at 1).
    let mut a = [[0.0f64; 9]; 8]; // augmented
    for i in 0..4 {
        let [x, y] = src[i];
        let [u, v] = dst[i];
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, u];
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, v];
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..8 {
        let pivot = (col..8)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-12 {
            return Err(Error::SingularHomography);
        }
        a.swap(col, pivot);
        for row in 0..8 {
            if row != col {
                let factor = a[row][col] / a[col][col];
                if factor != 0.0 {
                    for k in col..9 {
                        a[row][k] -= factor * a[col][k];
                    }
                }
            }
        }
    }
    let mut h = [0.0f64; 9];
    for i in 0..8 {
        h[i] = a[i][8] / a[i][i];
    }
    h[8] = 1.0;
    let hom = Homography(h);
    if hom.determinant().abs() < 1e-12 {
        return Err(Error::SingularHomography);
    }
    Ok(hom)
}

/// An inverse mapping from output coordinates to source coordinates.
#[derive(Clone, Debug)]
pub enum WarpMap {
    /// Homography taking output coordinates to source coordinates.
    Homography(Homography),
    /// Separable piecewise-linear coordinate maps, one per axis.
    Grid {
        x_map: PiecewiseAxisMap,
        y_map: PiecewiseAxisMap,
    },
}

/// Monotone piecewise-linear map from distorted (output) coordinates back to
/// uniform source coordinates along one axis.
#[derive(Clone, Debug)]
pub struct PiecewiseAxisMap {
    /// Output-space cell start positions (prefix sums of distorted extents).
    out_starts: Vec<f64>,
    out_extents: Vec<f64>,
    src_extent: f64,
}

impl PiecewiseAxisMap {
    /// Scale factors are applied to uniform cell extents, then renormalized so
    /// the extents sum to `side`. All-ones factors give the identity map.
    pub fn new(side: f64, factors: &[f64]) -> Self {
        let steps = factors.len().max(1);
        let src_extent = side / steps as f64;
        let mut out_extents: Vec<f64> = factors.iter().map(|&f| src_extent * f).collect();
        let sum: f64 = out_extents.iter().sum();
        let norm = side / sum;
        for e in &mut out_extents {
            *e *= norm;
        }
        let mut out_starts = Vec::with_capacity(steps);
        let mut acc = 0.0;
        for e in &out_extents {
            out_starts.push(acc);
            acc += e;
        }
        PiecewiseAxisMap {
            out_starts,
            out_extents,
            src_extent,
        }
    }

    #[inline]
    pub fn to_source(&self, x: f64) -> f64 {
        let k = match self
            .out_starts
            .partition_point(|&s| s <= x)
            .checked_sub(1)
        {
            Some(k) => k.min(self.out_starts.len() - 1),
            None => 0,
        };
        let local = x - self.out_starts[k];
        k as f64 * self.src_extent + local * (self.src_extent / self.out_extents[k])
    }
}

/// Build the inverse warp map a spec's distortion induces on a window of the
/// given side, or `None` when the spec has no distortion.
pub fn distortion_map(spec: &TransformSpec, side: usize) -> Result<Option<WarpMap>> {
    match &spec.distortion {
        Distortion::None => Ok(None),
        Distortion::Grid {
            x_factors,
            y_factors,
        } => {
            let s = side as f64;
            Ok(Some(WarpMap::Grid {
                x_map: PiecewiseAxisMap::new(s, x_factors),
                y_map: PiecewiseAxisMap::new(s, y_factors),
            }))
        }
        Distortion::Perspective { offsets } => {
            let s = side as f64;
            let max = s - 1.0;
            let src = [[0.0, 0.0], [max, 0.0], [max, max], [0.0, max]];
            let mut dst = src;
            for (corner, off) in dst.iter_mut().zip(offsets) {
                corner[0] += off[0] * s;
                corner[1] += off[1] * s;
            }
            // Solve output -> source directly so no matrix inversion is needed.
            let inverse = solve_homography(&dst, &src)?;
            Ok(Some(WarpMap::Homography(inverse)))
        }
    }
}

#[inline]
fn reflect101(mut t: f64, n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let max = (n - 1) as f64;
    let period = 2.0 * max;
    t = t.rem_euclid(period);
    if t > max {
        period - t
    } else {
        t
    }
}

/// Inverse-warp resampling. Image windows (`is_mask == false`) use bilinear
/// interpolation; masks use nearest neighbor, so the output only contains
/// values present in the input.
pub fn warp(window: &Raster, mapping: &WarpMap, is_mask: bool) -> Raster {
    let (w, h, ch) = (window.width(), window.height(), window.channels());
    let mut out = Raster::new(w, h, ch, 0);
    let mut px = [0u8; 3];
    for oy in 0..h {
        for ox in 0..w {
            let (sx, sy) = match mapping {
                WarpMap::Homography(hom) => hom.apply(ox as f64, oy as f64),
                WarpMap::Grid { x_map, y_map } => {
                    (x_map.to_source(ox as f64), y_map.to_source(oy as f64))
                }
            };
            let sx = reflect101(sx, w);
            let sy = reflect101(sy, h);
            if is_mask {
                let xi = (sx + 0.5).floor().clamp(0.0, (w - 1) as f64) as usize;
                let yi = (sy + 0.5).floor().clamp(0.0, (h - 1) as f64) as usize;
                out.set_pixel(ox, oy, window.pixel(xi, yi));
            } else {
                let x0 = sx.floor() as usize;
                let y0 = sy.floor() as usize;
                let x1 = (x0 + 1).min(w - 1);
                let y1 = (y0 + 1).min(h - 1);
                let fx = sx - x0 as f64;
                let fy = sy - y0 as f64;
                let p00 = window.pixel(x0, y0);
                let p10 = window.pixel(x1, y0);
                let p01 = window.pixel(x0, y1);
                let p11 = window.pixel(x1, y1);
                for c in 0..ch {
                    let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
                    let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
                    let v = top * (1.0 - fy) + bottom * fy;
                    px[c] = (v + 0.5).floor().clamp(0.0, 255.0) as u8;
                }
                out.set_pixel(ox, oy, &px[..ch]);
            }
        }
    }
    out
}

/// Apply one spec to an image window and its mask window with the identical
/// geometric mapping.
pub fn apply_transform(
    image_window: &Raster,
    mask_window: &Raster,
    spec: &TransformSpec,
) -> Result<(Raster, Raster)> {
    if image_window.width() != mask_window.width()
        || image_window.height() != mask_window.height()
    {
        return Err(Error::DimensionMismatch {
            id: "<window>".into(),
            image_w: image_window.width(),
            image_h: image_window.height(),
            mask_w: mask_window.width(),
            mask_h: mask_window.height(),
        });
    }
    let mut image = apply_discrete(image_window, spec)?;
    let mut mask = apply_discrete(mask_window, spec)?;
    if let Some(mapping) = distortion_map(spec, image.width())? {
        image = warp(&image, &mapping, false);
        mask = warp(&mask, &mapping, true);
    }
    Ok((image, mask))
}
