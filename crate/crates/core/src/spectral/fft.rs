use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Relative bound on the imaginary residue of an inverse transform that is
/// expected to be real.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-8;

/// A 2-D complex spectrum in row-major order with DC at index 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub width: usize,
    pub height: usize,
    pub data: Vec<Complex64>,
}

impl Spectrum {
    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.data[y * self.width + x]
    }

    /// Largest `|S(k) - conj(S(-k))|`; zero for the spectrum of a real field.
    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.data, self.width, self.height)
    }
}

pub(crate) fn hermitian_defect(data: &[Complex64], width: usize, height: usize) -> f64 {
    let mut worst = 0.0f64;
    for y in 0..height {
        let ny = (height - y) % height;
        for x in 0..width {
            let nx = (width - x) % width;
            let d = data[y * width + x] - data[ny * width + nx].conj();
            worst = worst.max(d.norm());
        }
    }
    worst
}

/// Replaces every partner pair `(k, -k)` on a Nyquist line (an even axis
/// at index `n / 2`) by its Hermitian part. There `+pi` and `-pi` are the
/// same bin, so an odd response evaluated at `+pi` breaks conjugate symmetry;
/// averaging is exactly what taking the real part of the inverse does.
pub(crate) fn symmetrize_nyquist(data: &mut [Complex64], width: usize, height: usize) {
    let mut fix = |x: usize, y: usize| {
        let (nx, ny) = ((width - x) % width, (height - y) % height);
        let (i, j) = (y * width + x, ny * width + nx);
        let a = (data[i] + data[j].conj()) * 0.5;
        data[i] = a;
        data[j] = a.conj();
    };
    if width.is_multiple_of(2) {
        for y in 0..height {
            fix(width / 2, y);
        }
    }
    if height.is_multiple_of(2) {
        for x in 0..width {
            fix(x, height / 2);
        }
    }
}

/// Planned row/column transforms for one `width x height` shape.
///
/// Plans are immutable and shareable; each call allocates its own scratch.
#[derive(Clone)]
pub struct Fft2d {
    width: usize,
    height: usize,
    row_forward: Arc<dyn Fft<f64>>,
    row_inverse: Arc<dyn Fft<f64>>,
    col_forward: Arc<dyn Fft<f64>>,
    col_inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2d")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish()
    }
}

impl Fft2d {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "transform shape must be non-zero");
        let mut planner = FftPlanner::new();
        Self {
            width,
            height,
            row_forward: planner.plan_fft_forward(width),
            row_inverse: planner.plan_fft_inverse(width),
            col_forward: planner.plan_fft_forward(height),
            col_inverse: planner.plan_fft_inverse(height),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unnormalized forward DFT, in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.row_forward, &self.col_forward);
    }

    /// Unnormalized inverse DFT, in place (the caller scales by `1/N`).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.row_inverse, &self.col_inverse);
    }

    fn run(&self, data: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        assert_eq!(
            data.len(),
            self.len(),
            "buffer does not match transform shape"
        );
        process_rows(data, self.width, rows);
        let mut transposed = vec![Complex64::default(); data.len()];
        transpose(data, &mut transposed, self.width, self.height);
        process_rows(&mut transposed, self.height, cols);
        transpose(&transposed, data, self.height, self.width);
    }

    pub fn forward_real(&self, img: &GrayImage) -> Spectrum {
        assert_eq!(
            img.shape(),
            self.shape(),
            "image does not match transform shape"
        );
        let mut data: Vec<Complex64> = img
            .pixels()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.forward(&mut data);
        Spectrum {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Inverse transform of a spectrum that should correspond to a real
    /// field. Fails when the imaginary residue exceeds
    /// `ASYMMETRY_TOLERANCE * max|real| + floor`; `floor` absorbs rounding
    /// noise for outputs that are legitimately zero.
    pub fn inverse_real(&self, mut data: Vec<Complex64>, floor: f64) -> Result<GrayImage> {
        self.inverse(&mut data);
        let scale = 1.0 / self.len() as f64;
        let mut max_re = 0.0f64;
        let mut max_im = 0.0f64;
        let pixels: Vec<f64> = data
            .iter()
            .map(|c| {
                let re = c.re * scale;
                max_re = max_re.max(re.abs());
                max_im = max_im.max((c.im * scale).abs());
                re
            })
            .collect();
        let limit = ASYMMETRY_TOLERANCE * max_re + floor;
        if max_im > limit {
            return Err(Error::Asymmetry {
                residue: max_im,
                limit,
            });
        }
        GrayImage::new(self.width, self.height, pixels)
    }

    /// Inverse transform of `a + i b` where `a` and `b` are the spectra of
    /// two real fields; returns both fields from one transform.
    pub(crate) fn inverse_pair(&self, mut packed: Vec<Complex64>) -> (GrayImage, GrayImage) {
        self.inverse(&mut packed);
        let scale = 1.0 / self.len() as f64;
        let re = packed.iter().map(|c| c.re * scale).collect();
        let im = packed.iter().map(|c| c.im * scale).collect();
        (
            GrayImage::new(self.width, self.height, re).expect("shape checked"),
            GrayImage::new(self.width, self.height, im).expect("shape checked"),
        )
    }
}

fn process_rows(data: &mut [Complex64], len: usize, fft: &Arc<dyn Fft<f64>>) {
    let rows = data.len() / len;
    let tasks = rayon::current_num_threads() * 4;
    let rows_per_task = rows.div_ceil(tasks).max(1);
    if rayon::current_num_threads() == 1 {
        fft.process(data);
    } else {
        data.par_chunks_mut(rows_per_task * len)
            .for_each(|chunk| fft.process(chunk));
    }
}

const TILE: usize = 32;

/// `src` is `height` rows of `width`; `dst` receives `width` rows of `height`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], width: usize, height: usize) {
    for by in (0..height).step_by(TILE) {
        for bx in (0..width).step_by(TILE) {
            for y in by..(by + TILE).min(height) {
                for x in bx..(bx + TILE).min(width) {
                    dst[x * height + y] = src[y * width + x];
                }
            }
        }
    }
}

/// Unnormalized forward DFT of a real image.
pub fn fft_forward(img: &GrayImage) -> Result<Spectrum> {
    img.ensure_finite()?;
    Ok(Fft2d::new(img.width(), img.height()).forward_real(img))
}

/// Inverse DFT scaled by `1/N`, returning the real part after checking that
/// the imaginary residue is negligible.
pub fn fft_inverse(spectrum: &Spectrum) -> Result<GrayImage> {
    Fft2d::new(spectrum.width, spectrum.height).inverse_real(spectrum.data.clone(), 0.0)
}
