use std::f64::consts::PI;

/// Angular frequency coordinates (radians/pixel) of every DFT bin for one
/// shape, in standard FFT order with DC at `(0, 0)`. Each axis covers
/// `(-pi, pi]`; for even lengths the Nyquist bin is `+pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    width: usize,
    height: usize,
    omega1: Vec<f64>,
    omega2: Vec<f64>,
    magnitude: Vec<f64>,
}

/// Angular frequency of bin `k` on an axis of length `n`.
pub fn axis_frequency(k: usize, n: usize) -> f64 {
    let signed = if 2 * k <= n {
        k as f64
    } else {
        k as f64 - n as f64
    };
    2.0 * PI * signed / n as f64
}

impl FrequencyGrid {
    /// # Panics
    /// If either dimension is zero.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "grid dimensions must be non-zero");
        let omega1 = (0..width).map(|k| axis_frequency(k, width)).collect();
        let omega2 = (0..height).map(|k| axis_frequency(k, height)).collect();
        Self::from_axes(omega1, omega2)
    }

    /// Frequencies `(pi k1 / W, pi k2 / H)` of the DCT-II bins, which are the
    /// non-negative quadrant of the DFT grid of the half-sample symmetric
    /// `2W x 2H` extension.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn cosine(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "grid dimensions must be non-zero");
        let axis = |n: usize| -> Vec<f64> { (0..n).map(|k| axis_frequency(k, 2 * n)).collect() };
        Self::from_axes(axis(width), axis(height))
    }

    fn from_axes(omega1: Vec<f64>, omega2: Vec<f64>) -> Self {
        let mut magnitude = Vec::with_capacity(omega1.len() * omega2.len());
        for &w2 in &omega2 {
            for &w1 in &omega1 {
                magnitude.push(w1.hypot(w2));
            }
        }
        Self {
            width: omega1.len(),
            height: omega2.len(),
            omega1,
            omega2,
            magnitude,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.magnitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitude.is_empty()
    }

    /// Horizontal frequency of bin `(x, y)`.
    #[inline]
    pub fn omega1(&self, x: usize, _y: usize) -> f64 {
        self.omega1[x]
    }

    /// Vertical frequency of bin `(x, y)`.
    #[inline]
    pub fn omega2(&self, _x: usize, y: usize) -> f64 {
        self.omega2[y]
    }

    #[inline]
    pub fn magnitude(&self, x: usize, y: usize) -> f64 {
        self.magnitude[y * self.width + x]
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitude
    }

    pub fn horizontal_axis(&self) -> &[f64] {
        &self.omega1
    }

    pub fn vertical_axis(&self) -> &[f64] {
        &self.omega2
    }
}

pub fn build_frequency_grid(width: usize, height: usize) -> FrequencyGrid {
    FrequencyGrid::new(width, height)
}
