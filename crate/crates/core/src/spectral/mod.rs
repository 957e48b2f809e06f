//! Frequency-domain machinery: 2-D FFT, frequency grids, the
//! alpha-scale-space bandpass bank and the Riesz pair.

mod bank;
mod cosine;
mod fft;
mod grid;

pub(crate) use bank::rounding_floor;
pub use bank::{
    apply_filter, build_assd_bank, build_riesz, AssdParams, BankTransform, Boundary,
    FilterResponse, ResponseKind, SpectralBank, DEFAULT_COARSEST_WAVELENGTH,
};
pub use cosine::{CosineTransform2d, Parity};
pub use fft::{fft_forward, fft_inverse, Fft2d, Spectrum, ASYMMETRY_TOLERANCE};
pub(crate) use fft::{hermitian_defect, symmetrize_nyquist};
pub use grid::{axis_frequency, build_frequency_grid, FrequencyGrid};
pub use rustfft::num_complex::Complex64;
