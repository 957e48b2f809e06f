//! PNG / binary PGM ingestion and PNG output.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, ImageReader, Luma, Rgb};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{GrayImage, MultiChannelImage};

// ITU-R BT.601 luma weights.
const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// Bit depth of written PNG files.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum BitDepth {
    #[default]
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn max_value(self) -> f64 {
        match self {
            BitDepth::Eight => u8::MAX as f64,
            BitDepth::Sixteen => u16::MAX as f64,
        }
    }
}

impl TryFrom<u8> for BitDepth {
    type Error = String;

    fn try_from(bits: u8) -> std::result::Result<Self, Self::Error> {
        match bits {
            8 => Ok(BitDepth::Eight),
            16 => Ok(BitDepth::Sixteen),
            other => Err(format!("bit depth must be 8 or 16, got {other}")),
        }
    }
}

impl From<BitDepth> for u8 {
    fn from(depth: BitDepth) -> u8 {
        match depth {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }
}

/// Loads an 8/16-bit grayscale (or color, luma-converted) PNG or binary PGM
/// and maps the source bit range linearly onto `[0, 1]`.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = ImageReader::new(BufReader::new(file))
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;

    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        Some(other) => {
            return Err(Error::UnsupportedFormat {
                path: path.to_owned(),
                detail: format!("{other:?}"),
            })
        }
        None => {
            return Err(Error::UnsupportedFormat {
                path: path.to_owned(),
                detail: "unrecognized file signature".into(),
            })
        }
    }

    let decoded = reader.decode().map_err(|e| Error::Decode {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage { width, height });
    }

    let pixels = match decoded {
        DynamicImage::ImageLuma8(buf) => scale(buf.into_raw(), u8::MAX),
        DynamicImage::ImageLuma16(buf) => scale(buf.into_raw(), u16::MAX),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p[0] as f64 / 255.0).collect(),
        DynamicImage::ImageLumaA16(buf) => buf.pixels().map(|p| p[0] as f64 / 65535.0).collect(),
        DynamicImage::ImageRgb8(buf) => luma(buf.pixels().map(|p| p.0), 255.0),
        DynamicImage::ImageRgba8(buf) => luma(buf.pixels().map(|p| [p[0], p[1], p[2]]), 255.0),
        DynamicImage::ImageRgb16(buf) => luma(buf.pixels().map(|p| p.0), 65535.0),
        DynamicImage::ImageRgba16(buf) => luma(buf.pixels().map(|p| [p[0], p[1], p[2]]), 65535.0),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_owned(),
                detail: format!("pixel layout {:?}", other.color()),
            })
        }
    };
    GrayImage::new(width, height, pixels)
}

fn scale<T: Copy + Into<f64>>(raw: Vec<T>, full: T) -> Vec<f64> {
    let full: f64 = full.into();
    raw.into_iter().map(|v| v.into() / full).collect()
}

fn luma<T: Into<f64>>(rgb: impl Iterator<Item = [T; 3]>, full: f64) -> Vec<f64> {
    rgb.map(|[r, g, b]| {
        let y = LUMA_R * r.into() + LUMA_G * g.into() + LUMA_B * b.into();
        (y / full).clamp(0.0, 1.0)
    })
    .collect()
}

/// Either kind of image accepted by [`save_image`].
#[derive(Clone, Copy, Debug)]
pub enum SaveSource<'a> {
    Gray(&'a GrayImage),
    Multi(&'a MultiChannelImage),
}

impl<'a> From<&'a GrayImage> for SaveSource<'a> {
    fn from(img: &'a GrayImage) -> Self {
        SaveSource::Gray(img)
    }
}

impl<'a> From<&'a MultiChannelImage> for SaveSource<'a> {
    fn from(img: &'a MultiChannelImage) -> Self {
        SaveSource::Multi(img)
    }
}

/// Writes a grayscale or 3-channel PNG. Pixels must be finite and in
/// `[0, 1]`; nothing is written otherwise.
pub fn save_image<'a>(
    img: impl Into<SaveSource<'a>>,
    path: impl AsRef<Path>,
    depth: BitDepth,
) -> Result<()> {
    let path = path.as_ref();
    let encoded = match img.into() {
        SaveSource::Gray(g) => {
            g.ensure_unit_range()?;
            let (w, h) = (g.width() as u32, g.height() as u32);
            match depth {
                BitDepth::Eight => DynamicImage::ImageLuma8(
                    ImageBuffer::<Luma<u8>, _>::from_raw(w, h, quantize(g.pixels(), depth))
                        .expect("buffer length matches dimensions"),
                ),
                BitDepth::Sixteen => DynamicImage::ImageLuma16(
                    ImageBuffer::<Luma<u16>, _>::from_raw(w, h, quantize(g.pixels(), depth))
                        .expect("buffer length matches dimensions"),
                ),
            }
        }
        SaveSource::Multi(m) => {
            for c in m.channels() {
                c.ensure_unit_range()?;
            }
            let (w, h) = (m.width() as u32, m.height() as u32);
            match depth {
                BitDepth::Eight => DynamicImage::ImageRgb8(
                    ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, interleave(m, depth))
                        .expect("buffer length matches dimensions"),
                ),
                BitDepth::Sixteen => DynamicImage::ImageRgb16(
                    ImageBuffer::<Rgb<u16>, _>::from_raw(w, h, interleave(m, depth))
                        .expect("buffer length matches dimensions"),
                ),
            }
        }
    };

    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = std::io::BufWriter::new(file);
    encoded
        .write_to(&mut writer, ImageFormat::Png)
        .map_err(|e| Error::Encode(format!("failed to write {}: {e}", path.display())))?;
    std::io::Write::flush(&mut writer).map_err(|e| Error::io(path, e))
}

trait Sample: Copy {
    fn from_scaled(v: f64) -> Self;
}

impl Sample for u8 {
    fn from_scaled(v: f64) -> Self {
        v.round() as u8
    }
}

impl Sample for u16 {
    fn from_scaled(v: f64) -> Self {
        v.round() as u16
    }
}

fn quantize<T: Sample>(pixels: &[f64], depth: BitDepth) -> Vec<T> {
    let full = depth.max_value();
    pixels.iter().map(|&v| T::from_scaled(v * full)).collect()
}

fn interleave<T: Sample>(img: &MultiChannelImage, depth: BitDepth) -> Vec<T> {
    let full = depth.max_value();
    let [a, b, c] = img.channels();
    a.pixels()
        .iter()
        .zip(b.pixels())
        .zip(c.pixels())
        .flat_map(|((&a, &b), &c)| [a, b, c])
        .map(|v| T::from_scaled(v * full))
        .collect()
}

/// Loads a 3-channel PNG written by [`save_image`] back into its planes.
pub fn load_multichannel(path: impl AsRef<Path>) -> Result<MultiChannelImage> {
    let path = path.as_ref();
    let decoded = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::Decode {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
    let rgb = decoded.to_rgb16();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let mut planes = [
        Vec::with_capacity(w * h),
        Vec::with_capacity(w * h),
        Vec::with_capacity(w * h),
    ];
    for p in rgb.pixels() {
        for (plane, &v) in planes.iter_mut().zip(p.0.iter()) {
            plane.push(v as f64 / 65535.0);
        }
    }
    let [r, g, b] = planes;
    MultiChannelImage::new([
        GrayImage::new(w, h, r)?,
        GrayImage::new(w, h, g)?,
        GrayImage::new(w, h, b)?,
    ])
}
