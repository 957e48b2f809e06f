mod common;

use std::f64::consts::PI;

use common::{max_abs, max_abs_diff, naive_dft, random_image, rng};
use cxr_phase::spectral::{
    apply_filter, build_assd_bank, build_frequency_grid, build_riesz, fft_forward, fft_inverse,
    AssdParams, Complex64, FilterResponse, FrequencyGrid, ResponseKind, Spectrum,
};
use cxr_phase::{Error, GrayImage};
use proptest::prelude::*;

#[test]
fn forward_matches_naive_dft() {
    let mut r = rng(1);
    for (w, h) in [(12, 10), (9, 7), (16, 16)] {
        let img = random_image(&mut r, w, h);
        let fast = fft_forward(&img).unwrap();
        let slow = naive_dft(&img);
        let n = (w * h) as f64;
        for (c, &(re, im)) in fast.data.iter().zip(&slow) {
            assert!((c.re - re).abs() < 1e-10 * n && (c.im - im).abs() < 1e-10 * n);
        }
    }
}

#[test]
fn random_round_trip() {
    let img = random_image(&mut rng(2), 16, 16);
    let back = fft_inverse(&fft_forward(&img).unwrap()).unwrap();
    assert!(max_abs_diff(img.pixels(), back.pixels()) < 1e-10);
}

#[test]
fn grid_examples() {
    let g = build_frequency_grid(16, 16);
    assert_eq!(g.magnitude(0, 0), 0.0);
    assert_eq!(g.omega1(8, 0), PI);
    assert!((g.magnitude(4, 4) - 2f64.sqrt() * PI / 2.0).abs() < 1e-15);
    assert!(g.horizontal_axis().iter().all(|&w| w > -PI && w <= PI));
}

#[test]
fn cosine_grid_is_quadrant_of_extension_grid() {
    let (w, h) = (10, 7);
    let quarter = FrequencyGrid::cosine(w, h);
    let full = FrequencyGrid::new(2 * w, 2 * h);
    for y in 0..h {
        for x in 0..w {
            assert_eq!(quarter.omega1(x, y), full.omega1(x, y));
            assert_eq!(quarter.omega2(x, y), full.omega2(x, y));
            assert_eq!(quarter.magnitude(x, y), full.magnitude(x, y));
        }
    }
}

#[test]
fn riesz_on_positive_horizontal_axis() {
    let g = build_frequency_grid(32, 16);
    let [r1, r2] = build_riesz(&g);
    for x in 1..16 {
        assert_eq!(r1.get(x, 0), Complex64::new(0.0, -1.0));
        assert_eq!(r2.get(x, 0), Complex64::new(0.0, 0.0));
    }
}

#[test]
fn analytic_peak_alpha_one() {
    let params = AssdParams {
        alpha: 1.0,
        s0: 4.0,
        scale_multiplier: 2.0,
        num_scales: 1,
    };
    let n = 256;
    let bank = build_assd_bank(&build_frequency_grid(n, n), &params);
    let values = bank[0].values();
    let best = (0..values.len())
        .max_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    let g = build_frequency_grid(n, n);
    let peak = g.magnitudes()[best];
    assert!((peak - 0.25).abs() <= 2.0 * PI / n as f64, "peak at {peak}");
}

#[test]
fn cosine_is_an_eigenfunction() {
    let params = AssdParams {
        alpha: 1.0,
        s0: 4.0,
        scale_multiplier: 2.0,
        num_scales: 1,
    };
    // Bin 5 of 128 is 0.2454 rad/pixel, the grid frequency nearest 0.25.
    let (w, h, k) = (128, 8, 5);
    let omega = 2.0 * PI * k as f64 / w as f64;
    let grid = build_frequency_grid(w, h);
    let bandpass = &build_assd_bank(&grid, &params)[0];
    let img = GrayImage::from_fn(w, h, |x, _| (omega * x as f64).cos());
    let out = apply_filter(&img, bandpass).unwrap();

    // Response at that bin, evaluated directly from the closed form.
    let raw = |w: f64| w * (-4.0 * w).exp();
    let peak = grid
        .magnitudes()
        .iter()
        .map(|&m| raw(m))
        .fold(0.0, f64::max);
    let gain = raw(omega) / peak;
    assert!((bandpass.get(k, 0).re - gain).abs() < 1e-12);
    let expected: Vec<f64> = img.pixels().iter().map(|v| gain * v).collect();
    assert!(max_abs_diff(out.pixels(), &expected) < 1e-10);
}

#[test]
fn constant_through_bandpass_is_zero() {
    let grid = build_frequency_grid(24, 20);
    let img = GrayImage::filled(24, 20, 0.8);
    for b in build_assd_bank(&grid, &AssdParams::default()) {
        assert!(max_abs(apply_filter(&img, &b).unwrap().pixels()) < 1e-10);
    }
}

#[test]
fn impulse_through_flat_response() {
    let mut img = GrayImage::filled(16, 12, 0.0);
    img.set(3, 5, 1.0);
    let out = apply_filter(&img, &FilterResponse::flat(16, 12)).unwrap();
    assert!(max_abs_diff(out.pixels(), img.pixels()) < 1e-15);
}

#[test]
fn riesz_kernels_are_odd() {
    let (w, h) = (32, 24);
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let img = GrayImage::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        (-(dx * dx) / 30.0 - (dy * dy) / 12.0).exp() + 0.3 * (-(dx * dx + dy * dy) / 4.0).exp()
    });
    let grid = build_frequency_grid(w, h);
    let [r1, r2] = build_riesz(&grid);
    let o1 = apply_filter(&img, &r1).unwrap();
    let o2 = apply_filter(&img, &r2).unwrap();
    for y in 0..h {
        for x in 0..w {
            let (mx, my) = ((w - x) % w, (h - y) % h);
            assert!((o1.get(x, y) + o1.get(mx, y)).abs() < 1e-8);
            assert!((o2.get(x, y) + o2.get(x, my)).abs() < 1e-8);
        }
    }
}

#[test]
fn riesz_output_is_the_real_part_of_the_naive_inverse() {
    for (w, h) in [(10, 8), (9, 6), (7, 5)] {
        let img = random_image(&mut rng(21), w, h);
        let spectrum = naive_dft(&img);
        for r in build_riesz(&build_frequency_grid(w, h)) {
            let fast = apply_filter(&img, &r).unwrap();
            let product: Vec<Complex64> = spectrum
                .iter()
                .enumerate()
                .map(|(i, &(re, im))| Complex64::new(re, im) * r.get(i % w, i / w))
                .collect();
            let mut expected = Vec::with_capacity(w * h);
            for y in 0..h {
                for x in 0..w {
                    let mut acc = 0.0;
                    for (i, p) in product.iter().enumerate() {
                        let (kx, ky) = (i % w, i / w);
                        let phase =
                            2.0 * PI * ((kx * x) as f64 / w as f64 + (ky * y) as f64 / h as f64);
                        acc += (p * Complex64::from_polar(1.0, phase)).re;
                    }
                    expected.push(acc / (w * h) as f64);
                }
            }
            assert!(max_abs_diff(fast.pixels(), &expected) < 1e-12, "{w}x{h}");
        }
    }
}

#[test]
fn broken_symmetry_is_an_error() {
    let mut data = vec![Complex64::default(); 64];
    data[3] = Complex64::new(0.0, 1.0);
    let s = Spectrum {
        width: 8,
        height: 8,
        data,
    };
    assert!(matches!(fft_inverse(&s), Err(Error::Asymmetry { .. })));
}

#[test]
fn response_kind_and_length_checked() {
    assert!(FilterResponse::new(4, 4, ResponseKind::Real, vec![0.0; 15]).is_err());
}

fn image_strategy() -> impl Strategy<Value = GrayImage> {
    (8usize..20, 8usize..20).prop_flat_map(|(w, h)| {
        prop::collection::vec(-1.0f64..1.0, w * h)
            .prop_map(move |v| GrayImage::new(w, h, v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(img in image_strategy()) {
        let spec = fft_forward(&img).unwrap();
        let lhs: f64 = spec.data.iter().map(|c| c.norm_sqr()).sum();
        let rhs = img.len() as f64 * img.pixels().iter().map(|v| v * v).sum::<f64>();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.max(1e-300));
    }

    #[test]
    fn filtering_is_linear(
        x in image_strategy(),
        seed in any::<u64>(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let y = random_image(&mut rng(seed), x.width(), x.height());
        let grid = build_frequency_grid(x.width(), x.height());
        let combo = GrayImage::from_fn(x.width(), x.height(), |i, j| a * x.get(i, j) + b * y.get(i, j));
        let mut responses = build_assd_bank(&grid, &AssdParams::default());
        responses.extend(build_riesz(&grid));
        for r in &responses {
            let lhs = apply_filter(&combo, r).unwrap();
            let fx = apply_filter(&x, r).unwrap();
            let fy = apply_filter(&y, r).unwrap();
            let rhs: Vec<f64> = fx.pixels().iter().zip(fy.pixels()).map(|(p, q)| a * p + b * q).collect();
            prop_assert!(max_abs_diff(lhs.pixels(), &rhs) < 1e-10);
        }
    }
}
