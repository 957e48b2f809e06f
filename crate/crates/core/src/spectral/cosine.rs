use std::sync::Arc;

use rayon::prelude::*;
use rustdct::{DctPlanner, TransformType2And3};

/// Basis used along one axis by [`CosineTransform2d::inverse`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    /// `cos(pi k (x + 1/2) / N)`, `k = 0..N`.
    Even,
    /// `sin(pi k (x + 1/2) / N)`, `k = 1..N`; coefficient `k = 0` is ignored.
    Odd,
}

/// Separable 2-D DCT-II and its inverses.
///
/// The DCT-II of a `W x H` field holds the DFT of its half-sample symmetric
/// `2W x 2H` extension on bins `0..W x 0..H` (up to a phase), so filtering
/// that extension with a response even in both axes is a cosine-cosine
/// round trip, and with one odd in an axis a sine synthesis along it.
#[derive(Clone)]
pub struct CosineTransform2d {
    width: usize,
    height: usize,
    rows: Arc<dyn TransformType2And3<f64>>,
    cols: Arc<dyn TransformType2And3<f64>>,
}

impl std::fmt::Debug for CosineTransform2d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CosineTransform2d")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish()
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Forward,
    Synthesis(Parity),
}

impl CosineTransform2d {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "transform shape must be non-zero");
        let mut planner = DctPlanner::new();
        Self {
            width,
            height,
            rows: planner.plan_dct2(width),
            cols: planner.plan_dct2(height),
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

    /// Unnormalized DCT-II along both axes, in place:
    /// `C(k1, k2) = sum f(x, y) cos(pi k1 (x + 1/2) / W) cos(pi k2 (y + 1/2) / H)`.
    pub fn forward(&self, data: &mut [f64]) {
        self.run(data, Kind::Forward, Kind::Forward);
    }

    /// Synthesizes a field from coefficients indexed by frequency. With
    /// [`Parity::Even`] on both axes this is the exact inverse of
    /// [`CosineTransform2d::forward`].
    pub fn inverse(&self, data: &mut [f64], x: Parity, y: Parity) {
        self.run(data, Kind::Synthesis(x), Kind::Synthesis(y));
        let scale = 4.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    fn run(&self, data: &mut [f64], x: Kind, y: Kind) {
        assert_eq!(
            data.len(),
            self.len(),
            "buffer does not match transform shape"
        );
        process_rows(data, self.width, &self.rows, x);
        let mut t = vec![0.0; data.len()];
        transpose(data, &mut t, self.width, self.height);
        process_rows(&mut t, self.height, &self.cols, y);
        transpose(&t, data, self.height, self.width);
    }
}

fn process_row(
    row: &mut [f64],
    plan: &dyn TransformType2And3<f64>,
    kind: Kind,
    scratch: &mut [f64],
) {
    match kind {
        Kind::Forward => plan.process_dct2_with_scratch(row, scratch),
        Kind::Synthesis(Parity::Even) => plan.process_dct3_with_scratch(row, scratch),
        Kind::Synthesis(Parity::Odd) => {
            // DST-III input n carries frequency n + 1; frequency N is zero.
            row.rotate_left(1);
            *row.last_mut().expect("non-empty row") = 0.0;
            plan.process_dst3_with_scratch(row, scratch);
        }
    }
}

fn process_rows(data: &mut [f64], len: usize, plan: &Arc<dyn TransformType2And3<f64>>, kind: Kind) {
    let scratch_len = plan.get_scratch_len();
    if rayon::current_num_threads() == 1 {
        let mut scratch = vec![0.0; scratch_len];
        for row in data.chunks_exact_mut(len) {
            process_row(row, plan.as_ref(), kind, &mut scratch);
        }
    } else {
        data.par_chunks_exact_mut(len).for_each_init(
            || vec![0.0; scratch_len],
            |scratch, row| process_row(row, plan.as_ref(), kind, scratch),
        );
    }
}

const TILE: usize = 32;

fn transpose(src: &[f64], dst: &mut [f64], width: usize, height: usize) {
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
