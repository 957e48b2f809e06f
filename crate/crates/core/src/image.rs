//! Pixel containers and the pure image operations used throughout the
//! pipeline: bilinear resampling, min-max normalization and the symmetric
//! (half-sample) extension used to make periodic transforms behave like
//! mirror-padded ones.

use crate::error::{Error, Result};

/// Smallest edge length accepted by the enhancement pipeline.
pub const MIN_DIMENSION: usize = 8;

/// A 2-D real-valued field stored row-major.
///
/// Loaded images hold intensities in `[0, 1]`, but the same container carries
/// intermediate fields (phase angles, energies, filter outputs) whose range
/// is unconstrained.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if pixels.len() != width * height {
            return Err(Error::BufferLength {
                expected: width * height,
                found: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `(width, height)`
    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.pixels[y * self.width + x] = value;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    /// Returns `(min, max)`. NaN pixels are ignored.
    pub fn min_max(&self) -> (f64, f64) {
        self.pixels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    pub fn ensure_shape(&self, expected: (usize, usize)) -> Result<()> {
        if self.shape() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: self.shape(),
            });
        }
        Ok(())
    }

    pub fn ensure_min_size(&self) -> Result<()> {
        if self.width < MIN_DIMENSION || self.height < MIN_DIMENSION {
            return Err(Error::TooSmall {
                width: self.width,
                height: self.height,
                min: MIN_DIMENSION,
            });
        }
        Ok(())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.pixels.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite {
                x: i % self.width,
                y: i / self.width,
            }),
            None => Ok(()),
        }
    }

    pub fn ensure_unit_range(&self) -> Result<()> {
        self.ensure_finite()?;
        match self.pixels.iter().position(|v| !(0.0..=1.0).contains(v)) {
            Some(i) => Err(Error::OutOfRange {
                x: i % self.width,
                y: i / self.width,
                value: self.pixels[i],
            }),
            None => Ok(()),
        }
    }
}

/// Three co-registered planes in the fixed order `[LwPA, LPE, ELEA]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiChannelImage {
    channels: [GrayImage; 3],
}

impl MultiChannelImage {
    pub fn new(channels: [GrayImage; 3]) -> Result<Self> {
        let expected = channels[0].shape();
        for c in &channels[1..] {
            c.ensure_shape(expected)?;
        }
        Ok(Self { channels })
    }

    pub fn width(&self) -> usize {
        self.channels[0].width()
    }

    pub fn height(&self) -> usize {
        self.channels[0].height()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.channels[0].shape()
    }

    pub fn channels(&self) -> &[GrayImage; 3] {
        &self.channels
    }

    pub fn channel(&self, index: usize) -> &GrayImage {
        &self.channels[index]
    }

    pub fn into_channels(self) -> [GrayImage; 3] {
        self.channels
    }
}

/// Corner-aligned bilinear resampling with no minimum-size check.
///
/// Output sample `(x', y')` reads the source at
/// `x = x' (W - 1) / (W' - 1)`, so the four corners map onto each other.
pub fn resample_bilinear(
    img: &GrayImage,
    new_width: usize,
    new_height: usize,
) -> Result<GrayImage> {
    if new_width == 0 || new_height == 0 {
        return Err(Error::EmptyImage {
            width: new_width,
            height: new_height,
        });
    }
    if img.shape() == (new_width, new_height) {
        return Ok(img.clone());
    }

    let xs = sample_positions(img.width(), new_width);
    let ys = sample_positions(img.height(), new_height);
    let w = img.width();
    let src = img.pixels();

    let mut out = Vec::with_capacity(new_width * new_height);
    for &(y0, y1, fy) in &ys {
        let row0 = &src[y0 * w..(y0 + 1) * w];
        let row1 = &src[y1 * w..(y1 + 1) * w];
        for &(x0, x1, fx) in &xs {
            let top = row0[x0] * (1.0 - fx) + row0[x1] * fx;
            let bottom = row1[x0] * (1.0 - fx) + row1[x1] * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    GrayImage::new(new_width, new_height, out)
}

fn sample_positions(src_len: usize, dst_len: usize) -> Vec<(usize, usize, f64)> {
    (0..dst_len)
        .map(|i| {
            if src_len == 1 || dst_len == 1 {
                return (0, 0, 0.0);
            }
            let pos = (i * (src_len - 1)) as f64 / (dst_len - 1) as f64;
            let i0 = (pos.floor() as usize).min(src_len - 1);
            let i1 = (i0 + 1).min(src_len - 1);
            (i0, i1, pos - i0 as f64)
        })
        .collect()
}

/// Bilinear resize to a pipeline-sized target (both edges at least
/// [`MIN_DIMENSION`]).
pub fn resize_bilinear(img: &GrayImage, new_width: usize, new_height: usize) -> Result<GrayImage> {
    if new_width < MIN_DIMENSION || new_height < MIN_DIMENSION {
        return Err(Error::TooSmall {
            width: new_width,
            height: new_height,
            min: MIN_DIMENSION,
        });
    }
    resample_bilinear(img, new_width, new_height)
}

/// Affine rescale onto `[0, 1]`; a constant image maps to all zeros.
pub fn normalize_minmax(img: &GrayImage) -> Result<GrayImage> {
    img.ensure_finite()?;
    let (lo, hi) = img.min_max();
    if hi > lo {
        let inv = 1.0 / (hi - lo);
        Ok(img.map(|v| ((v - lo) * inv).clamp(0.0, 1.0)))
    } else {
        Ok(img.map(|_| 0.0))
    }
}

/// Half-sample symmetric extension to `2W x 2H`.
///
/// The periodic continuation of the result is continuous across every edge,
/// so circular filtering of the extension equals mirror-padded filtering of
/// the original on the top-left quadrant.
pub fn mirror_extend(img: &GrayImage) -> GrayImage {
    let (w, h) = img.shape();
    let (ew, eh) = (2 * w, 2 * h);
    let mut out = Vec::with_capacity(ew * eh);
    for y in 0..eh {
        let sy = if y < h { y } else { eh - 1 - y };
        let row = &img.pixels()[sy * w..(sy + 1) * w];
        out.extend_from_slice(row);
        out.extend(row.iter().rev());
    }
    GrayImage {
        width: ew,
        height: eh,
        pixels: out,
    }
}

/// Top-left `width x height` window of `img`.
pub fn crop(img: &GrayImage, width: usize, height: usize) -> Result<GrayImage> {
    if width > img.width() || height > img.height() {
        return Err(Error::ShapeMismatch {
            expected: img.shape(),
            found: (width, height),
        });
    }
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        let start = y * img.width();
        out.extend_from_slice(&img.pixels()[start..start + width]);
    }
    GrayImage::new(width, height, out)
}
