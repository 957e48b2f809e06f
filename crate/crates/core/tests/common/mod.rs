//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::f64::consts::PI;

use cxr_phase::GrayImage;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, width: usize, height: usize) -> GrayImage {
    GrayImage::from_fn(width, height, |_, _| rng.gen::<f64>())
}

/// Naive O(N^2) forward DFT, row-major, `sum f(x,y) e^{-2 pi i (kx x/W + ky y/H)}`.
pub fn naive_dft(img: &GrayImage) -> Vec<(f64, f64)> {
    let (w, h) = img.shape();
    let mut out = Vec::with_capacity(w * h);
    for ky in 0..h {
        for kx in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let phase =
                        -2.0 * PI * ((kx * x) as f64 / w as f64 + (ky * y) as f64 / h as f64);
                    let v = img.get(x, y);
                    re += v * phase.cos();
                    im += v * phase.sin();
                }
            }
            out.push((re, im));
        }
    }
    out
}

/// The nine contextual-regularization stencils as `(dx, dy, weight)` taps:
/// unit-norm first differences towards the eight neighbours and the
/// unit-norm 4-neighbour Laplacian.
pub fn reference_stencils() -> Vec<Vec<(isize, isize, f64)>> {
    let g = 0.5f64.sqrt();
    let mut out: Vec<Vec<(isize, isize, f64)>> = [
        (1, 0),
        (-1, 0),
        (0, 1),
        (0, -1),
        (1, 1),
        (-1, -1),
        (1, -1),
        (-1, 1),
    ]
    .iter()
    .map(|&(dx, dy)| vec![(0, 0, -g), (dx, dy, g)])
    .collect();
    let n = 20f64.sqrt();
    out.push(vec![
        (0, 0, -4.0 / n),
        (1, 0, 1.0 / n),
        (-1, 0, 1.0 / n),
        (0, 1, 1.0 / n),
        (0, -1, 1.0 / n),
    ]);
    out
}

fn index(i: isize, n: usize, periodic: bool) -> usize {
    let n = n as isize;
    if periodic {
        i.rem_euclid(n) as usize
    } else if i < 0 {
        (-i - 1) as usize
    } else if i >= n {
        (2 * n - 1 - i) as usize
    } else {
        i as usize
    }
}

/// Dense `N x N` matrix of one stencil under wrap or half-sample
/// reflection boundaries.
pub fn dense_operator(
    taps: &[(isize, isize, f64)],
    w: usize,
    h: usize,
    periodic: bool,
) -> DMatrix<f64> {
    let n = w * h;
    let mut m = DMatrix::zeros(n, n);
    for y in 0..h {
        for x in 0..w {
            let row = y * w + x;
            for &(dx, dy, wt) in taps {
                let sx = index(x as isize + dx, w, periodic);
                let sy = index(y as isize + dy, h, periodic);
                m[(row, sy * w + sx)] += wt;
            }
        }
    }
    m
}

pub fn dense_bank(w: usize, h: usize, periodic: bool) -> Vec<DMatrix<f64>> {
    reference_stencils()
        .iter()
        .map(|s| dense_operator(s, w, h, periodic))
        .collect()
}

pub fn vector(img: &GrayImage) -> DVector<f64> {
    DVector::from_column_slice(img.pixels())
}

/// Solves `(a I + sum D_j^T D_j) t = a lpe + sum D_j^T u_j` by LU.
pub fn dense_t_update(
    ops: &[DMatrix<f64>],
    lpe: &DVector<f64>,
    aux: &[Vec<f64>],
    a: f64,
) -> DVector<f64> {
    let n = lpe.len();
    let mut lhs = DMatrix::identity(n, n) * a;
    let mut rhs = lpe * a;
    for (d, u) in ops.iter().zip(aux) {
        lhs += d.transpose() * d;
        rhs += d.transpose() * DVector::from_column_slice(u);
    }
    lhs.lu().solve(&rhs).expect("system is positive definite")
}

/// `exp(-(D_j lpe)^2)` for every stencil.
pub fn dense_weights(ops: &[DMatrix<f64>], lpe: &DVector<f64>) -> Vec<DVector<f64>> {
    ops.iter()
        .map(|d| (d * lpe).map(|v| (-v * v).exp()))
        .collect()
}

/// `lambda/2 |t - lpe|^2 + sum_j |W_j o D_j t|_1`.
pub fn dense_objective(
    ops: &[DMatrix<f64>],
    weights: &[DVector<f64>],
    t: &DVector<f64>,
    lpe: &DVector<f64>,
    lambda: f64,
) -> f64 {
    let data = 0.5 * lambda * (t - lpe).norm_squared();
    let reg: f64 = ops
        .iter()
        .zip(weights)
        .map(|(d, w)| (d * t).component_mul(w).abs().sum())
        .sum();
    data + reg
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
