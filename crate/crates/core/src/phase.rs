//! Monogenic signal per scale and its reduction to the local weighted mean
//! phase angle (LwPA) and local phase energy (LPE) maps.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::spectral::{
    hermitian_defect, rounding_floor, symmetrize_nyquist, BankTransform, Complex64, FilterResponse,
    Parity, SpectralBank, ASYMMETRY_TOLERANCE,
};

/// Default guard, relative to the largest multi-scale odd energy.
pub const DEFAULT_RELATIVE_GUARD: f64 = 1e-6;

/// Even (bandpass) and odd (Riesz) responses of one scale.
#[derive(Clone, Debug, PartialEq)]
pub struct MonogenicResponse {
    pub scale_index: usize,
    pub m1: GrayImage,
    pub m2: GrayImage,
    pub m3: GrayImage,
}

/// Builds the monogenic triple for every scale of `bank`:
/// `m1 = B_i * img`, `m2 = R1 * m1`, `m3 = R2 * m1`.
pub fn compute_monogenic(img: &GrayImage, bank: &SpectralBank) -> Result<Vec<MonogenicResponse>> {
    img.ensure_shape(bank.image_shape())?;
    img.ensure_finite()?;
    let floor = rounding_floor(img);
    let (w, h) = bank.image_shape();
    let field = |pixels: Vec<f64>| flush(GrayImage::new(w, h, pixels).expect("bank shape"), floor);

    let mut out = Vec::with_capacity(bank.num_scales());
    match bank.transform() {
        BankTransform::Fourier(fft) => {
            let spectrum = fft.forward_real(img);
            let spectrum_floor = floor * fft.len() as f64;
            for (scale_index, bandpass) in bank.bandpass().iter().enumerate() {
                let even = bandpass.multiply(&spectrum.data);
                let mut odd1 = bank.riesz1().multiply(&even);
                let mut odd2 = bank.riesz2().multiply(&even);
                symmetrize_nyquist(&mut odd1, w, h);
                symmetrize_nyquist(&mut odd2, w, h);

                // The odd fields are recovered together from one packed
                // transform, which is only valid when each spectrum is
                // conjugate-symmetric.
                for odd in [&odd1, &odd2] {
                    let peak = odd.iter().fold(0.0f64, |m, c| m.max(c.norm()));
                    let defect = hermitian_defect(odd, w, h);
                    let limit = ASYMMETRY_TOLERANCE * peak + spectrum_floor;
                    if defect > limit {
                        return Err(Error::Asymmetry {
                            residue: defect,
                            limit,
                        });
                    }
                }
                let packed: Vec<Complex64> = odd1
                    .iter()
                    .zip(&odd2)
                    .map(|(a, b)| a + Complex64::new(-b.im, b.re))
                    .collect();

                let m1 = fft.inverse_real(even, floor)?;
                let (m2, m3) = fft.inverse_pair(packed);
                out.push(MonogenicResponse {
                    scale_index,
                    m1: flush(m1, floor),
                    m2: flush(m2, floor),
                    m3: flush(m3, floor),
                });
            }
        }
        BankTransform::Cosine(dct) => {
            let mut coefficients = img.pixels().to_vec();
            dct.forward(&mut coefficients);
            for (scale_index, bandpass) in bank.bandpass().iter().enumerate() {
                let even: Vec<f64> = coefficients
                    .iter()
                    .zip(bandpass.values())
                    .map(|(c, b)| c * b)
                    .collect();
                // -i w1/|w| maps cos(w1 u) to (w1/|w|) sin(w1 u); the stored
                // Riesz values are -w/|w|.
                let odd = |riesz: &FilterResponse, x: Parity, y: Parity| -> Vec<f64> {
                    let mut v: Vec<f64> = even
                        .iter()
                        .zip(riesz.values())
                        .map(|(e, r)| -e * r)
                        .collect();
                    dct.inverse(&mut v, x, y);
                    v
                };
                let m2 = odd(bank.riesz1(), Parity::Odd, Parity::Even);
                let m3 = odd(bank.riesz2(), Parity::Even, Parity::Odd);
                let mut m1 = even;
                dct.inverse(&mut m1, Parity::Even, Parity::Even);
                out.push(MonogenicResponse {
                    scale_index,
                    m1: field(m1),
                    m2: field(m2),
                    m3: field(m3),
                });
            }
        }
    }
    Ok(out)
}

/// Zeroes values at or below the transform rounding floor, so flat regions
/// give exactly zero responses rather than noise of arbitrary phase.
fn flush(field: GrayImage, floor: f64) -> GrayImage {
    field.map(|v| if v.abs() <= floor { 0.0 } else { v })
}

fn check_responses(responses: &[MonogenicResponse]) -> Result<(usize, usize)> {
    let first = responses.first().ok_or(Error::NoScales)?;
    let shape = first.m1.shape();
    for r in responses {
        r.m1.ensure_shape(shape)?;
        r.m2.ensure_shape(shape)?;
        r.m3.ensure_shape(shape)?;
    }
    Ok(shape)
}

/// Per-pixel multi-scale odd energy `sqrt(sum m2^2 + sum m3^2)`.
pub fn odd_energy(responses: &[MonogenicResponse]) -> Result<GrayImage> {
    let (w, h) = check_responses(responses)?;
    let mut acc = vec![0.0; w * h];
    for r in responses {
        for ((a, &b), &c) in acc.iter_mut().zip(r.m2.pixels()).zip(r.m3.pixels()) {
            *a += b * b + c * c;
        }
    }
    GrayImage::new(w, h, acc.into_iter().map(f64::sqrt).collect())
}

/// Absolute guard `relative * max(odd energy)`. Scales with the input, so
/// the resulting LwPA is exactly scale invariant.
pub fn relative_guard(responses: &[MonogenicResponse], relative: f64) -> Result<f64> {
    let energy = odd_energy(responses)?;
    Ok(relative * energy.pixels().iter().copied().fold(0.0, f64::max))
}

/// `arctan( sum m1 / sqrt(sum m2^2 + sum m3^2 + guard^2) )`.
pub fn compute_lwpa(responses: &[MonogenicResponse], guard: f64) -> Result<GrayImage> {
    let (w, h) = check_responses(responses)?;
    let mut even = vec![0.0; w * h];
    let mut odd = vec![guard * guard; w * h];
    for r in responses {
        for (e, &m1) in even.iter_mut().zip(r.m1.pixels()) {
            *e += m1;
        }
        for ((o, &m2), &m3) in odd.iter_mut().zip(r.m2.pixels()).zip(r.m3.pixels()) {
            *o += m2 * m2 + m3 * m3;
        }
    }
    let lwpa = even
        .iter()
        .zip(&odd)
        .map(|(&e, &o)| e.atan2(o.sqrt()))
        .collect();
    GrayImage::new(w, h, lwpa)
}

/// `sum over scales of (|m1| - sqrt(m2^2 + m3^2))`, unclamped.
pub fn energy_factor(responses: &[MonogenicResponse]) -> Result<GrayImage> {
    let (w, h) = check_responses(responses)?;
    let mut acc = vec![0.0; w * h];
    for r in responses {
        for (((a, &m1), &m2), &m3) in acc
            .iter_mut()
            .zip(r.m1.pixels())
            .zip(r.m2.pixels())
            .zip(r.m3.pixels())
        {
            *a += m1.abs() - m2.hypot(m3);
        }
    }
    GrayImage::new(w, h, acc)
}

/// `energy_factor * lwpa`, clamped at zero from below.
pub fn compute_lpe(responses: &[MonogenicResponse], lwpa: &GrayImage) -> Result<GrayImage> {
    let factor = energy_factor(responses)?;
    lwpa.ensure_shape(factor.shape())?;
    let lpe = factor
        .pixels()
        .iter()
        .zip(lwpa.pixels())
        .map(|(&f, &phase)| (f * phase).max(0.0))
        .collect();
    GrayImage::new(factor.width(), factor.height(), lpe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{AssdParams, Boundary};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn single(m1: f64, m2: f64, m3: f64) -> Vec<MonogenicResponse> {
        vec![MonogenicResponse {
            scale_index: 0,
            m1: GrayImage::filled(1, 1, m1),
            m2: GrayImage::filled(1, 1, m2),
            m3: GrayImage::filled(1, 1, m3),
        }]
    }

    #[test]
    fn constant_image_gives_zero_responses() {
        for boundary in [Boundary::Periodic, Boundary::Mirror] {
            let bank = SpectralBank::new(16, 12, AssdParams::default(), boundary).unwrap();
            let img = GrayImage::filled(16, 12, 0.6);
            let responses = compute_monogenic(&img, &bank).unwrap();
            assert_eq!(responses.len(), 2);
            for r in &responses {
                for f in [&r.m1, &r.m2, &r.m3] {
                    assert_eq!(f.shape(), (16, 12));
                    assert!(f.pixels().iter().all(|&v| v == 0.0));
                }
            }
            let lwpa = compute_lwpa(&responses, relative_guard(&responses, 1e-6).unwrap()).unwrap();
            assert!(lwpa.pixels().iter().all(|&v| v == 0.0));
            assert!(compute_lpe(&responses, &lwpa)
                .unwrap()
                .pixels()
                .iter()
                .all(|&v| v == 0.0));
        }
    }

    #[test]
    fn zero_responses_give_zero_phase_even_without_guard() {
        let r = single(0.0, 0.0, 0.0);
        assert_eq!(compute_lwpa(&r, 0.0).unwrap().pixels(), &[0.0]);
        let lwpa = compute_lwpa(&r, 1e-9).unwrap();
        assert_eq!(compute_lpe(&r, &lwpa).unwrap().pixels(), &[0.0]);
    }

    #[test]
    fn lwpa_quarter_pi() {
        // sum m1 = 5, sum m2^2 + sum m3^2 = 25 -> arctan(1)
        let r = single(5.0, 3.0, 4.0);
        let lwpa = compute_lwpa(&r, 1e-9).unwrap();
        assert!((lwpa.pixels()[0] - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn lpe_pure_even_pixel() {
        let r = single(2.0, 0.0, 0.0);
        let lwpa = GrayImage::filled(1, 1, FRAC_PI_2);
        assert!((compute_lpe(&r, &lwpa).unwrap().pixels()[0] - PI).abs() < 1e-15);
    }

    #[test]
    fn lpe_balanced_pixel_is_zero() {
        let r = single(-5.0, 3.0, 4.0);
        for phase in [-1.0, 0.3, FRAC_PI_2] {
            let lwpa = GrayImage::filled(1, 1, phase);
            assert_eq!(compute_lpe(&r, &lwpa).unwrap().pixels(), &[0.0]);
        }
    }

    #[test]
    fn lpe_is_clamped() {
        let r = single(1.0, 3.0, 4.0);
        let lwpa = GrayImage::filled(1, 1, 1.0);
        assert_eq!(energy_factor(&r).unwrap().pixels(), &[-4.0]);
        assert_eq!(compute_lpe(&r, &lwpa).unwrap().pixels(), &[0.0]);
    }

    #[test]
    fn empty_response_list_is_an_error() {
        assert!(matches!(compute_lwpa(&[], 1.0), Err(Error::NoScales)));
    }

    #[test]
    fn horizontal_cosine_has_no_vertical_odd_part() {
        let bank = SpectralBank::new(32, 32, AssdParams::default(), Boundary::Mirror).unwrap();
        let img = GrayImage::from_fn(32, 32, |x, _| 0.5 + 0.4 * (0.3 * x as f64).cos());
        let responses = compute_monogenic(&img, &bank).unwrap();
        for r in &responses {
            let m2_peak = r.m2.pixels().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let m3_peak = r.m3.pixels().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(m2_peak > 1e-3);
            assert!(m3_peak < 1e-12 * m2_peak.max(1.0));
        }
    }
}
