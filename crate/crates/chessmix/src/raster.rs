//! Minimal interleaved 8-bit raster used for both RGB images and index masks.

use crate::error::{Error, Result};

/// An 8-bit raster with 1 (index mask) or 3 (RGB) interleaved channels.
#[derive(Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for Raster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Raster({}x{}x{}, {} bytes)",
            self.width,
            self.height,
            self.channels,
            self.data.len()
        )
    }
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize, fill: u8) -> Self {
        assert!(channels == 1 || channels == 3, "1 or 3 channels");
        Raster {
            width,
            height,
            channels,
            data: vec![fill; width * height * channels],
        }
    }

    pub fn from_raw(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), width * height * channels);
        assert!(channels == 1 || channels == 3);
        Raster {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    pub fn is_square(&self) -> bool {
        self.width == self.height
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, px: &[u8]) {
        let i = (y * self.width + x) * self.channels;
        self.data[i..i + self.channels].copy_from_slice(px);
    }

    /// Copy of the `side`x`side` window whose top-left corner is (x, y).
    pub fn window(&self, x: usize, y: usize, side: usize) -> Raster {
        assert!(x + side <= self.width && y + side <= self.height);
        let mut out = Vec::with_capacity(side * side * self.channels);
        for row in y..y + side {
            let start = (row * self.width + x) * self.channels;
            out.extend_from_slice(&self.data[start..start + side * self.channels]);
        }
        Raster::from_raw(side, side, self.channels, out)
    }

    /// Write `src` into this raster with its top-left corner at (x, y).
    pub fn blit(&mut self, x: usize, y: usize, src: &Raster) {
        assert_eq!(self.channels, src.channels);
        assert!(x + src.width <= self.width && y + src.height <= self.height);
        for row in 0..src.height {
            let dst_start = ((y + row) * self.width + x) * self.channels;
            let src_start = row * src.width * src.channels;
            let n = src.width * src.channels;
            self.data[dst_start..dst_start + n].copy_from_slice(&src.data[src_start..src_start + n]);
        }
    }

    pub fn hflip(&self) -> Raster {
        let mut out = Raster::new(self.width, self.height, self.channels, 0);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set_pixel(x, y, self.pixel(self.width - 1 - x, y));
            }
        }
        out
    }

    pub fn vflip(&self) -> Raster {
        let mut out = Raster::new(self.width, self.height, self.channels, 0);
        for y in 0..self.height {
            let src_start = (self.height - 1 - y) * self.width * self.channels;
            let dst_start = y * self.width * self.channels;
            let n = self.width * self.channels;
            out.data[dst_start..dst_start + n].copy_from_slice(&self.data[src_start..src_start + n]);
        }
        out
    }

    /// Counterclockwise quarter turn: out(r, c) = in(c, n-1-r).
    pub fn rot90_ccw(&self) -> Result<Raster> {
        if !self.is_square() {
            return Err(Error::NonSquareWindow {
                w: self.width,
                h: self.height,
            });
        }
        let n = self.width;
        let mut out = Raster::new(n, n, self.channels, 0);
        for r in 0..n {
            for c in 0..n {
                out.set_pixel(c, r, self.pixel(n - 1 - r, c));
            }
        }
        Ok(out)
    }

    /// out(r, c) = in(c, r).
    pub fn transpose(&self) -> Result<Raster> {
        if !self.is_square() {
            return Err(Error::NonSquareWindow {
                w: self.width,
                h: self.height,
            });
        }
        let n = self.width;
        let mut out = Raster::new(n, n, self.channels, 0);
        for r in 0..n {
            for c in 0..n {
                out.set_pixel(c, r, self.pixel(r, c));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(w: usize, h: usize, vals: &[u8]) -> Raster {
        Raster::from_raw(w, h, 1, vals.to_vec())
    }

    #[test]
    fn window_and_blit_round_trip() {
        let r = mask(4, 4, &(0..16).collect::<Vec<u8>>());
        let w = r.window(1, 2, 2);
        assert_eq!(w.data(), &[9, 10, 13, 14]);
        let mut dst = Raster::new(4, 4, 1, 0);
        dst.blit(1, 2, &w);
        assert_eq!(dst.pixel(1, 2), &[9]);
        assert_eq!(dst.pixel(2, 3), &[14]);
        assert_eq!(dst.pixel(0, 0), &[0]);
    }

    #[test]
    fn rot90_ccw_matches_hand_permutation() {
        // [[a,b],[c,d]] -> [[b,d],[a,c]]
        let r = mask(2, 2, &[1, 2, 3, 4]);
        let rot = r.rot90_ccw().unwrap();
        assert_eq!(rot.data(), &[2, 4, 1, 3]);
    }

    #[test]
    fn flips_are_involutions() {
        let r = mask(3, 3, &[1, 2, 3, 4, 5, 6, 7, 8, 9]);
        assert_eq!(r.hflip().hflip(), r);
        assert_eq!(r.vflip().vflip(), r);
        assert_eq!(r.transpose().unwrap().transpose().unwrap(), r);
    }

    #[test]
    fn rot90_on_rectangle_errors() {
        let r = mask(2, 3, &[0; 6]);
        assert!(r.rot90_ccw().is_err());
    }
}
