use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cosine::CosineTransform2d;
use super::fft::{symmetrize_nyquist, Fft2d};
use super::grid::FrequencyGrid;
use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Peak wavelength (pixels) of the coarsest default scale.
pub const DEFAULT_COARSEST_WAVELENGTH: f64 = 25.0;

/// Parameters of the alpha-scale-space derivative bandpass family
/// `B(w) = |w| exp(-s |w|^alpha)`, sampled at scales
/// `s_i = s0 * scale_multiplier^i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssdParams {
    pub alpha: f64,
    pub s0: f64,
    pub scale_multiplier: f64,
    pub num_scales: usize,
}

impl Default for AssdParams {
    fn default() -> Self {
        Self::with_coarsest_wavelength(2.0, 2.0, 2, DEFAULT_COARSEST_WAVELENGTH)
    }
}

impl AssdParams {
    /// Chooses `s0` so the coarsest scale peaks at `wavelength` pixels.
    pub fn with_coarsest_wavelength(
        alpha: f64,
        scale_multiplier: f64,
        num_scales: usize,
        wavelength: f64,
    ) -> Self {
        let peak = 2.0 * PI / wavelength;
        // d/dw [w exp(-s w^a)] = 0  =>  s = 1 / (a w^a)
        let coarsest = 1.0 / (alpha * peak.powf(alpha));
        let s0 = coarsest / scale_multiplier.powi(num_scales.saturating_sub(1) as i32);
        Self {
            alpha,
            s0,
            scale_multiplier,
            num_scales,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::config(
                "alpha",
                format!("{} (must be in (0, 2])", self.alpha),
            ));
        }
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return Err(Error::config("s0", format!("{} (must be > 0)", self.s0)));
        }
        if !(self.scale_multiplier > 1.0 && self.scale_multiplier.is_finite()) {
            return Err(Error::config(
                "scale_multiplier",
                format!("{} (must be > 1)", self.scale_multiplier),
            ));
        }
        if self.num_scales == 0 {
            return Err(Error::config("num_scales", "0 (must be >= 1)"));
        }
        Ok(())
    }

    pub fn scale(&self, index: usize) -> f64 {
        self.s0 * self.scale_multiplier.powi(index as i32)
    }

    /// Analytic maximizer of `|w| exp(-s |w|^alpha)`: `(1 / (s alpha))^(1/alpha)`.
    pub fn peak_frequency(&self, index: usize) -> f64 {
        (1.0 / (self.scale(index) * self.alpha)).powf(1.0 / self.alpha)
    }
}

/// Whether a response is purely real or purely imaginary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResponseKind {
    Real,
    Imaginary,
}

/// A frequency response with a purely real or purely imaginary value per
/// bin; `values[k]` holds the real coefficient (times `i` for imaginary).
#[derive(Clone, Debug, PartialEq)]
pub struct FilterResponse {
    width: usize,
    height: usize,
    kind: ResponseKind,
    values: Vec<f64>,
}

impl FilterResponse {
    pub fn new(width: usize, height: usize, kind: ResponseKind, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::BufferLength {
                expected: width * height,
                found: values.len(),
            });
        }
        Ok(Self {
            width,
            height,
            kind,
            values,
        })
    }

    /// The identity filter.
    pub fn flat(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            kind: ResponseKind::Real,
            values: vec![1.0; width * height],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn kind(&self) -> ResponseKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, index: usize) -> Complex64 {
        match self.kind {
            ResponseKind::Real => Complex64::new(self.values[index], 0.0),
            ResponseKind::Imaginary => Complex64::new(0.0, self.values[index]),
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.at(y * self.width + x)
    }

    /// `spectrum * self`, elementwise.
    pub fn multiply(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(spectrum.len(), self.values.len());
        match self.kind {
            ResponseKind::Real => spectrum
                .iter()
                .zip(&self.values)
                .map(|(s, &v)| s * v)
                .collect(),
            ResponseKind::Imaginary => spectrum
                .iter()
                .zip(&self.values)
                .map(|(s, &v)| Complex64::new(-s.im * v, s.re * v))
                .collect(),
        }
    }
}

/// One unit-peak bandpass response per scale, DC forced to zero.
pub fn build_assd_bank(grid: &FrequencyGrid, params: &AssdParams) -> Vec<FilterResponse> {
    (0..params.num_scales)
        .map(|i| {
            let s = params.scale(i);
            let mut values: Vec<f64> = grid
                .magnitudes()
                .iter()
                .map(|&w| w * (-s * w.powf(params.alpha)).exp())
                .collect();
            values[0] = 0.0;
            let peak = values.iter().copied().fold(0.0, f64::max);
            if peak > 0.0 {
                values.iter_mut().for_each(|v| *v /= peak);
            }
            FilterResponse {
                width: grid.width(),
                height: grid.height(),
                kind: ResponseKind::Real,
                values,
            }
        })
        .collect()
}

/// The Riesz pair `-i w1/|w|`, `-i w2/|w|`, both zero at DC.
pub fn build_riesz(grid: &FrequencyGrid) -> [FilterResponse; 2] {
    let (w, h) = grid.shape();
    let mut r1 = Vec::with_capacity(w * h);
    let mut r2 = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mag = grid.magnitude(x, y);
            if mag == 0.0 {
                r1.push(0.0);
                r2.push(0.0);
            } else {
                r1.push(-grid.omega1(x, y) / mag);
                r2.push(-grid.omega2(x, y) / mag);
            }
        }
    }
    [
        FilterResponse {
            width: w,
            height: h,
            kind: ResponseKind::Imaginary,
            values: r1,
        },
        FilterResponse {
            width: w,
            height: h,
            kind: ResponseKind::Imaginary,
            values: r2,
        },
    ]
}

/// How image borders are treated by spectral filtering.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Filter the image as one period of a periodic field.
    Periodic,
    /// Filter the half-sample symmetric `2W x 2H` extension and crop.
    #[default]
    Mirror,
}

impl Boundary {
    /// Shape of the periodic field that is actually filtered.
    pub fn transform_shape(self, width: usize, height: usize) -> (usize, usize) {
        match self {
            Boundary::Periodic => (width, height),
            Boundary::Mirror => (2 * width, 2 * height),
        }
    }
}

/// Transform plan of a [`SpectralBank`].
#[derive(Clone, Debug)]
pub enum BankTransform {
    Fourier(Fft2d),
    /// Mirror filtering evaluated with cosine/sine transforms on the image
    /// grid; the symmetric extension is never materialized.
    Cosine(CosineTransform2d),
}

/// Precomputed bandpass and Riesz responses plus transform plans for one
/// image shape. Immutable once built.
///
/// Responses are sampled on the image-sized grid: the DFT grid for
/// [`Boundary::Periodic`], the DCT-II grid ([`FrequencyGrid::cosine`]) for
/// [`Boundary::Mirror`].
#[derive(Clone, Debug)]
pub struct SpectralBank {
    image_shape: (usize, usize),
    boundary: Boundary,
    params: AssdParams,
    bandpass: Vec<FilterResponse>,
    riesz: [FilterResponse; 2],
    transform: BankTransform,
}

impl SpectralBank {
    pub fn new(
        width: usize,
        height: usize,
        params: AssdParams,
        boundary: Boundary,
    ) -> Result<Self> {
        params.validate()?;
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        let (grid, transform) = match boundary {
            Boundary::Periodic => (
                FrequencyGrid::new(width, height),
                BankTransform::Fourier(Fft2d::new(width, height)),
            ),
            Boundary::Mirror => (
                FrequencyGrid::cosine(width, height),
                BankTransform::Cosine(CosineTransform2d::new(width, height)),
            ),
        };
        Ok(Self {
            image_shape: (width, height),
            boundary,
            params,
            bandpass: build_assd_bank(&grid, &params),
            riesz: build_riesz(&grid),
            transform,
        })
    }

    pub fn image_shape(&self) -> (usize, usize) {
        self.image_shape
    }

    pub fn transform_shape(&self) -> (usize, usize) {
        self.boundary
            .transform_shape(self.image_shape.0, self.image_shape.1)
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn params(&self) -> &AssdParams {
        &self.params
    }

    pub fn num_scales(&self) -> usize {
        self.bandpass.len()
    }

    pub fn bandpass(&self) -> &[FilterResponse] {
        &self.bandpass
    }

    pub fn riesz1(&self) -> &FilterResponse {
        &self.riesz[0]
    }

    pub fn riesz2(&self) -> &FilterResponse {
        &self.riesz[1]
    }

    pub fn transform(&self) -> &BankTransform {
        &self.transform
    }
}

/// Filters `img` (taken as one period) by `response` and returns the real
/// output. Responses whose product with the image spectrum is not
/// conjugate-symmetric are rejected with [`Error::Asymmetry`].
pub fn apply_filter(img: &GrayImage, response: &FilterResponse) -> Result<GrayImage> {
    img.ensure_shape(response.shape())?;
    img.ensure_finite()?;
    let fft = Fft2d::new(img.width(), img.height());
    let spectrum = fft.forward_real(img);
    let mut filtered = response.multiply(&spectrum.data);
    symmetrize_nyquist(&mut filtered, img.width(), img.height());
    fft.inverse_real(filtered, rounding_floor(img))
}

/// Absolute slack for the realness check: rounding noise scales with the
/// input magnitude.
pub(crate) fn rounding_floor(img: &GrayImage) -> f64 {
    let peak = img.pixels().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    1e-12 * peak
}
