use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::spectral::{fft_forward, Boundary, Spectrum};

/// A small zero-sum stencil: `(D f)(x, y) = sum_k w_k f(x + dx_k, y + dy_k)`,
/// with out-of-range samples wrapped or reflected per [`Boundary`].
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub name: &'static str,
    pub taps: Vec<(isize, isize, f64)>,
}

impl Stencil {
    fn difference(name: &'static str, dx: isize, dy: isize) -> Self {
        Self {
            name,
            taps: vec![(0, 0, -FRAC_1_SQRT_2), (dx, dy, FRAC_1_SQRT_2)],
        }
    }

    fn laplacian() -> Self {
        let n = 20f64.sqrt();
        Self {
            name: "laplacian",
            taps: vec![
                (0, 0, -4.0 / n),
                (1, 0, 1.0 / n),
                (-1, 0, 1.0 / n),
                (0, 1, 1.0 / n),
                (0, -1, 1.0 / n),
            ],
        }
    }

    pub fn weight_sum(&self) -> f64 {
        self.taps.iter().map(|t| t.2).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.taps.iter().map(|t| t.2 * t.2).sum::<f64>().sqrt()
    }

    /// `sum_k w_k exp(i (w1 dx_k + w2 dy_k))`
    pub fn frequency_response(&self, omega1: f64, omega2: f64) -> (f64, f64) {
        self.taps.iter().fold((0.0, 0.0), |(re, im), &(dx, dy, w)| {
            let phase = omega1 * dx as f64 + omega2 * dy as f64;
            (re + w * phase.cos(), im + w * phase.sin())
        })
    }

    fn reach(&self) -> isize {
        self.taps
            .iter()
            .map(|&(dx, dy, _)| dx.abs().max(dy.abs()))
            .max()
            .unwrap_or(0)
    }
}

/// Directional first differences towards all eight neighbours plus the
/// 4-neighbour Laplacian, each scaled to unit L2 norm, bound to one field
/// shape and boundary rule.
#[derive(Clone, Debug)]
pub struct DiffFilterBank {
    width: usize,
    height: usize,
    boundary: Boundary,
    kernels: Vec<Stencil>,
    /// `sum_j |D_j(w)|^2` on the basis that diagonalizes the boundary rule.
    denominator: Vec<f64>,
    x_index: Vec<Vec<usize>>,
    y_index: Vec<Vec<usize>>,
}

fn wrap(i: isize, n: usize, boundary: Boundary) -> usize {
    let n = n as isize;
    let r = match boundary {
        Boundary::Periodic => i.rem_euclid(n),
        Boundary::Mirror => {
            let p = i.rem_euclid(2 * n);
            if p < n {
                p
            } else {
                2 * n - 1 - p
            }
        }
    };
    r as usize
}

pub fn default_stencils() -> Vec<Stencil> {
    vec![
        Stencil::difference("east", 1, 0),
        Stencil::difference("west", -1, 0),
        Stencil::difference("south", 0, 1),
        Stencil::difference("north", 0, -1),
        Stencil::difference("south_east", 1, 1),
        Stencil::difference("north_west", -1, -1),
        Stencil::difference("north_east", 1, -1),
        Stencil::difference("south_west", -1, 1),
        Stencil::laplacian(),
    ]
}

impl DiffFilterBank {
    pub fn new(width: usize, height: usize, boundary: Boundary) -> Result<Self> {
        Self::with_stencils(width, height, boundary, default_stencils())
    }

    pub fn with_stencils(
        width: usize,
        height: usize,
        boundary: Boundary,
        kernels: Vec<Stencil>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        let reach = kernels.iter().map(Stencil::reach).max().unwrap_or(0);
        let offsets: Vec<isize> = (-reach..=reach).collect();
        let table = |n: usize| -> Vec<Vec<usize>> {
            offsets
                .iter()
                .map(|&d| (0..n).map(|i| wrap(i as isize + d, n, boundary)).collect())
                .collect()
        };

        // Periodic fields are diagonalized by the DFT of the field shape; the
        // mirror rule by the DCT-II, whose frequencies are those of the
        // 2W x 2H symmetric extension restricted to one quadrant.
        let (step1, step2) = match boundary {
            Boundary::Periodic => (2.0 * PI / width as f64, 2.0 * PI / height as f64),
            Boundary::Mirror => (PI / width as f64, PI / height as f64),
        };
        let mut denominator = Vec::with_capacity(width * height);
        for ky in 0..height {
            for kx in 0..width {
                let (w1, w2) = (step1 * kx as f64, step2 * ky as f64);
                denominator.push(
                    kernels
                        .iter()
                        .map(|k| {
                            let (re, im) = k.frequency_response(w1, w2);
                            re * re + im * im
                        })
                        .sum(),
                );
            }
        }

        Ok(Self {
            width,
            height,
            boundary,
            kernels,
            denominator,
            x_index: table(width),
            y_index: table(height),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn kernels(&self) -> &[Stencil] {
        &self.kernels
    }

    pub fn denominator(&self) -> &[f64] {
        &self.denominator
    }

    fn reach(&self) -> isize {
        (self.x_index.len() as isize - 1) / 2
    }

    /// Exact DFT of kernel `j` zero-padded (circularly placed) onto the
    /// field shape, such that `F(D_j * f) = spectrum * F(f)`.
    pub fn spectrum(&self, j: usize) -> Spectrum {
        let mut padded = GrayImage::filled(self.width, self.height, 0.0);
        for &(dx, dy, w) in &self.kernels[j].taps {
            let x = (-dx).rem_euclid(self.width as isize) as usize;
            let y = (-dy).rem_euclid(self.height as isize) as usize;
            padded.set(x, y, padded.get(x, y) + w);
        }
        fft_forward(&padded).expect("finite kernel")
    }

    /// `D_j * field`.
    pub fn apply(&self, j: usize, field: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; field.len()];
        self.apply_into(j, field, &mut out);
        out
    }

    pub(crate) fn apply_into(&self, j: usize, field: &[f64], out: &mut [f64]) {
        debug_assert_eq!(field.len(), self.width * self.height);
        let r = self.reach();
        out.iter_mut().for_each(|v| *v = 0.0);
        for &(dx, dy, w) in &self.kernels[j].taps {
            let xi = &self.x_index[(dx + r) as usize];
            let yi = &self.y_index[(dy + r) as usize];
            for y in 0..self.height {
                let src = &field[yi[y] * self.width..(yi[y] + 1) * self.width];
                let dst = &mut out[y * self.width..(y + 1) * self.width];
                for (d, &sx) in dst.iter_mut().zip(xi) {
                    *d += w * src[sx];
                }
            }
        }
    }

    /// `D_j^T * field` (adjoint under the same boundary rule).
    pub fn apply_transpose(&self, j: usize, field: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; field.len()];
        self.accumulate_transpose(j, field, &mut out);
        out
    }

    pub(crate) fn accumulate_transpose(&self, j: usize, field: &[f64], out: &mut [f64]) {
        let r = self.reach();
        for &(dx, dy, w) in &self.kernels[j].taps {
            let xi = &self.x_index[(dx + r) as usize];
            let yi = &self.y_index[(dy + r) as usize];
            for y in 0..self.height {
                let src = &field[y * self.width..(y + 1) * self.width];
                let row = yi[y] * self.width;
                for (&v, &tx) in src.iter().zip(xi) {
                    out[row + tx] += w * v;
                }
            }
        }
    }
}

pub fn build_diff_bank(width: usize, height: usize, boundary: Boundary) -> Result<DiffFilterBank> {
    DiffFilterBank::new(width, height, boundary)
}

/// Per-kernel weights `W_j = exp(-|D_j * LPE|^2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMaps {
    pub weights: Vec<GrayImage>,
}

pub fn compute_weights(lpe: &GrayImage, bank: &DiffFilterBank) -> Result<WeightMaps> {
    lpe.ensure_shape(bank.shape())?;
    let (w, h) = bank.shape();
    let weights = (0..bank.len())
        .map(|j| {
            let response = bank.apply(j, lpe.pixels());
            GrayImage::new(w, h, response.into_iter().map(|d| (-d * d).exp()).collect())
        })
        .collect::<Result<_>>()?;
    Ok(WeightMaps { weights })
}
