use serde::{Deserialize, Serialize};

use super::diff::{DiffFilterBank, WeightMaps};
use crate::error::{Error, Result};
use crate::image::{normalize_minmax, GrayImage};
use crate::spectral::{Boundary, Complex64, CosineTransform2d, Fft2d, Parity};

/// How the echogenicity constant is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RhoRepr", into = "RhoRepr")]
pub enum RhoMode {
    /// Mean of the LPE map being recovered.
    #[default]
    MeanOfLpe,
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RhoRepr {
    Named(String),
    Value(f64),
}

impl TryFrom<RhoRepr> for RhoMode {
    type Error = String;

    fn try_from(repr: RhoRepr) -> std::result::Result<Self, Self::Error> {
        match repr {
            RhoRepr::Value(v) => Ok(RhoMode::Fixed(v)),
            RhoRepr::Named(s) if s == "mean" => Ok(RhoMode::MeanOfLpe),
            RhoRepr::Named(s) => Err(format!("rho must be \"mean\" or a number, got {s:?}")),
        }
    }
}

impl From<RhoMode> for RhoRepr {
    fn from(mode: RhoMode) -> Self {
        match mode {
            RhoMode::MeanOfLpe => RhoRepr::Named("mean".into()),
            RhoMode::Fixed(v) => RhoRepr::Value(v),
        }
    }
}

impl std::str::FromStr for RhoMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "mean" {
            return Ok(RhoMode::MeanOfLpe);
        }
        s.parse::<f64>()
            .map(RhoMode::Fixed)
            .map_err(|_| format!("rho must be \"mean\" or a number, got {s:?}"))
    }
}

impl RhoMode {
    pub fn resolve(self, lpe: &GrayImage) -> f64 {
        match self {
            RhoMode::MeanOfLpe => lpe.mean(),
            RhoMode::Fixed(v) => v,
        }
    }
}

/// Transmission estimation and recovery parameters.
///
/// `delta` is the attenuation exponent; it is set equal to the tissue
/// attenuation coefficient (0.85).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EleaParams {
    pub lambda: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub rho: RhoMode,
    pub beta0: f64,
    pub beta_max: f64,
    pub beta_scale: f64,
    pub max_outer_iters: usize,
}

impl Default for EleaParams {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            epsilon: 1e-4,
            delta: 0.85,
            rho: RhoMode::MeanOfLpe,
            beta0: 1.0,
            beta_max: 256.0,
            beta_scale: 2.0,
            max_outer_iters: 9,
        }
    }
}

impl EleaParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("{v} (must be > 0)")))
            }
        };
        positive("lambda", self.lambda)?;
        positive("epsilon", self.epsilon)?;
        positive("beta0", self.beta0)?;
        positive("beta_max", self.beta_max)?;
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::config(
                "delta",
                format!("{} (must be in (0, 1])", self.delta),
            ));
        }
        if !(self.beta_scale > 1.0 && self.beta_scale.is_finite()) {
            return Err(Error::config(
                "beta_scale",
                format!("{} (must be > 1)", self.beta_scale),
            ));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::config("max_outer_iters", "0 (must be >= 1)"));
        }
        if let RhoMode::Fixed(v) = self.rho {
            if !v.is_finite() {
                return Err(Error::config("rho", format!("{v} (must be finite)")));
            }
        }
        Ok(())
    }

    /// Penalty weights visited by the outer loop.
    pub fn beta_schedule(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut beta = self.beta0;
        while beta <= self.beta_max && out.len() < self.max_outer_iters {
            out.push(beta);
            beta *= self.beta_scale;
        }
        out
    }
}

/// Transmission field, clamped to `[epsilon, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionMap(GrayImage);

impl TransmissionMap {
    pub fn from_raw(raw: &GrayImage, epsilon: f64) -> Result<Self> {
        let normalized = normalize_minmax(raw)?;
        Ok(Self(normalized.map(|v| v.clamp(epsilon, 1.0))))
    }

    /// Wraps an already-valid transmission field (values clamped to
    /// `[epsilon, 1]`).
    pub fn from_field(field: GrayImage, epsilon: f64) -> Self {
        Self(field.map(|v| v.clamp(epsilon, 1.0)))
    }

    pub fn field(&self) -> &GrayImage {
        &self.0
    }

    pub fn into_field(self) -> GrayImage {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub beta: f64,
    pub objective: f64,
    pub augmented_objective: f64,
}

#[derive(Clone, Debug)]
pub struct TransmissionSolution {
    /// Unconstrained minimizer returned by the last quadratic step.
    pub raw: GrayImage,
    pub map: TransmissionMap,
    pub iterations: usize,
    pub final_objective: f64,
    pub trace: Vec<TraceEntry>,
}

enum QuadraticSolver {
    Fourier {
        fft: Fft2d,
        lpe_hat: Vec<Complex64>,
    },
    Cosine {
        dct: CosineTransform2d,
        lpe_hat: Vec<f64>,
    },
}

/// Half-quadratic splitting state for
/// `lambda/2 |t - LPE|^2 + sum_j |W_j o (D_j * t)|_1`.
///
/// Each outer iteration at penalty `beta` runs [`HqsSolver::shrink_step`]
/// then [`HqsSolver::quadratic_step`]; both are exact minimizations of the
/// augmented objective over their block of variables.
pub struct HqsSolver<'a> {
    lpe: &'a GrayImage,
    bank: &'a DiffFilterBank,
    weights: &'a WeightMaps,
    lambda: f64,
    t: Vec<f64>,
    aux: Vec<Vec<f64>>,
    solver: QuadraticSolver,
    floor: f64,
}

impl<'a> HqsSolver<'a> {
    /// Starts from `t = LPE` with all auxiliary fields zero.
    pub fn new(
        lpe: &'a GrayImage,
        bank: &'a DiffFilterBank,
        weights: &'a WeightMaps,
        lambda: f64,
    ) -> Result<Self> {
        lpe.ensure_shape(bank.shape())?;
        lpe.ensure_finite()?;
        if weights.weights.len() != bank.len() {
            return Err(Error::BufferLength {
                expected: bank.len(),
                found: weights.weights.len(),
            });
        }
        for w in &weights.weights {
            w.ensure_shape(bank.shape())?;
        }
        let (width, height) = bank.shape();
        let solver = match bank.boundary() {
            Boundary::Periodic => {
                let fft = Fft2d::new(width, height);
                let lpe_hat = fft.forward_real(lpe).data;
                QuadraticSolver::Fourier { fft, lpe_hat }
            }
            Boundary::Mirror => {
                let dct = CosineTransform2d::new(width, height);
                let mut lpe_hat = lpe.pixels().to_vec();
                dct.forward(&mut lpe_hat);
                QuadraticSolver::Cosine { dct, lpe_hat }
            }
        };
        let peak = lpe.pixels().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self {
            lpe,
            bank,
            weights,
            lambda,
            t: lpe.pixels().to_vec(),
            aux: vec![vec![0.0; width * height]; bank.len()],
            solver,
            floor: 1e-12 * peak.max(1.0),
        })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn aux(&self) -> &[Vec<f64>] {
        &self.aux
    }

    pub fn set_t(&mut self, t: Vec<f64>) {
        assert_eq!(t.len(), self.t.len());
        self.t = t;
    }

    pub fn set_aux(&mut self, aux: Vec<Vec<f64>>) {
        assert_eq!(aux.len(), self.aux.len());
        self.aux = aux;
    }

    /// `u_j = shrink(D_j * t, W_j / beta)`.
    pub fn shrink_step(&mut self, beta: f64) {
        let mut response = vec![0.0; self.t.len()];
        for (j, u) in self.aux.iter_mut().enumerate() {
            self.bank.apply_into(j, &self.t, &mut response);
            for ((u, &d), &w) in u
                .iter_mut()
                .zip(&response)
                .zip(self.weights.weights[j].pixels())
            {
                *u = soft_threshold(d, w / beta);
            }
        }
    }

    /// Solves `(lambda/beta)(t - LPE) + sum_j D_j^T (D_j t - u_j) = 0`
    /// exactly in the transform domain.
    pub fn quadratic_step(&mut self, beta: f64) -> Result<()> {
        let a = self.lambda / beta;
        let mut rhs = vec![0.0; self.t.len()];
        for (j, u) in self.aux.iter().enumerate() {
            self.bank.accumulate_transpose(j, u, &mut rhs);
        }
        let den = self.bank.denominator();
        self.t = match &self.solver {
            QuadraticSolver::Fourier { fft, lpe_hat } => {
                let mut spectrum: Vec<Complex64> =
                    rhs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                fft.forward(&mut spectrum);
                for ((s, l), &d) in spectrum.iter_mut().zip(lpe_hat).zip(den) {
                    *s = (l * a + *s) / (a + d);
                }
                fft.inverse_real(spectrum, self.floor)?.into_pixels()
            }
            QuadraticSolver::Cosine { dct, lpe_hat } => {
                dct.forward(&mut rhs);
                for ((s, &l), &d) in rhs.iter_mut().zip(lpe_hat).zip(den) {
                    *s = (a * l + *s) / (a + d);
                }
                dct.inverse(&mut rhs, Parity::Even, Parity::Even);
                rhs
            }
        };
        Ok(())
    }

    fn data_term(&self) -> f64 {
        0.5 * self.lambda
            * self
                .t
                .iter()
                .zip(self.lpe.pixels())
                .map(|(t, l)| (t - l) * (t - l))
                .sum::<f64>()
    }

    /// The target objective at the current `t`.
    pub fn objective(&self) -> f64 {
        let mut response = vec![0.0; self.t.len()];
        let mut total = self.data_term();
        for j in 0..self.bank.len() {
            self.bank.apply_into(j, &self.t, &mut response);
            total += response
                .iter()
                .zip(self.weights.weights[j].pixels())
                .map(|(d, w)| (w * d).abs())
                .sum::<f64>();
        }
        total
    }

    /// `lambda/2 |t - LPE|^2 + sum_j (|W_j o u_j|_1 + beta/2 |D_j t - u_j|^2)`.
    pub fn augmented_objective(&self, beta: f64) -> f64 {
        let mut response = vec![0.0; self.t.len()];
        let mut total = self.data_term();
        for (j, u) in self.aux.iter().enumerate() {
            self.bank.apply_into(j, &self.t, &mut response);
            for ((&d, &u), &w) in response.iter().zip(u).zip(self.weights.weights[j].pixels()) {
                total += (w * u).abs() + 0.5 * beta * (d - u) * (d - u);
            }
        }
        total
    }
}

#[inline]
fn soft_threshold(v: f64, threshold: f64) -> f64 {
    v.signum() * (v.abs() - threshold).max(0.0)
}

/// Elementwise `sign(v) max(|v| - threshold, 0)`.
pub fn shrink(v: &GrayImage, threshold: &GrayImage) -> Result<GrayImage> {
    threshold.ensure_shape(v.shape())?;
    let out = v
        .pixels()
        .iter()
        .zip(threshold.pixels())
        .map(|(&v, &t)| if t == 0.0 { v } else { soft_threshold(v, t) })
        .collect();
    GrayImage::new(v.width(), v.height(), out)
}

/// `lambda/2 |t - LPE|^2 + sum_j |W_j o (D_j * t)|_1`.
pub fn objective_value(
    t: &GrayImage,
    lpe: &GrayImage,
    bank: &DiffFilterBank,
    weights: &WeightMaps,
    lambda: f64,
) -> Result<f64> {
    t.ensure_shape(bank.shape())?;
    let mut solver = HqsSolver::new(lpe, bank, weights, lambda)?;
    solver.set_t(t.pixels().to_vec());
    Ok(solver.objective())
}

/// Minimizes the weighted-L1 contextual objective by half-quadratic
/// splitting, then min-max normalizes the result and clamps it to
/// `[epsilon, 1]`.
pub fn solve_transmission(
    lpe: &GrayImage,
    bank: &DiffFilterBank,
    weights: &WeightMaps,
    params: &EleaParams,
) -> Result<TransmissionSolution> {
    solve_transmission_traced(lpe, bank, weights, params, false)
}

/// As [`solve_transmission`], optionally recording the objective after
/// every outer iteration.
pub fn solve_transmission_traced(
    lpe: &GrayImage,
    bank: &DiffFilterBank,
    weights: &WeightMaps,
    params: &EleaParams,
    record_trace: bool,
) -> Result<TransmissionSolution> {
    params.validate()?;
    let mut solver = HqsSolver::new(lpe, bank, weights, params.lambda)?;
    let schedule = params.beta_schedule();
    let mut trace = Vec::new();
    for (iteration, &beta) in schedule.iter().enumerate() {
        solver.shrink_step(beta);
        solver.quadratic_step(beta)?;
        if record_trace {
            trace.push(TraceEntry {
                iteration,
                beta,
                objective: solver.objective(),
                augmented_objective: solver.augmented_objective(beta),
            });
        }
    }
    let final_objective = solver.objective();
    let (w, h) = bank.shape();
    let raw = GrayImage::new(w, h, solver.t)?;
    raw.ensure_finite()?;
    let map = TransmissionMap::from_raw(&raw, params.epsilon)?;
    Ok(TransmissionSolution {
        raw,
        map,
        iterations: schedule.len(),
        final_objective,
        trace,
    })
}

/// `(LPE - rho) / max(t, epsilon)^delta + rho`, before normalization.
///
/// Evaluated as `LPE + (LPE - rho) (max(t, epsilon)^-delta - 1)`, which is
/// exact for unit transmission and for `LPE = rho`.
pub fn elea_unnormalized(
    lpe: &GrayImage,
    t: &TransmissionMap,
    rho: f64,
    epsilon: f64,
    delta: f64,
) -> Result<GrayImage> {
    t.field().ensure_shape(lpe.shape())?;
    let out = lpe
        .pixels()
        .iter()
        .zip(t.field().pixels())
        .map(|(&l, &a)| l + (l - rho) * (a.max(epsilon).powf(-delta) - 1.0))
        .collect();
    GrayImage::new(lpe.width(), lpe.height(), out)
}

/// Recovers the ELEA image and min-max normalizes it to `[0, 1]`.
pub fn recover_elea(
    lpe: &GrayImage,
    t: &TransmissionMap,
    params: &EleaParams,
) -> Result<GrayImage> {
    let rho = params.rho.resolve(lpe);
    normalize_minmax(&elea_unnormalized(
        lpe,
        t,
        rho,
        params.epsilon,
        params.delta,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elea::diff::{build_diff_bank, compute_weights};

    #[test]
    fn shrink_examples() {
        let v = GrayImage::new(3, 1, vec![0.5, -0.1, -0.7]).unwrap();
        let t = GrayImage::filled(3, 1, 0.2);
        let out = shrink(&v, &t).unwrap();
        assert!((out.pixels()[0] - 0.3).abs() < 1e-15);
        assert_eq!(out.pixels()[1], 0.0);
        assert!((out.pixels()[2] + 0.5).abs() < 1e-15);
        let zero = GrayImage::filled(3, 1, 0.0);
        assert_eq!(shrink(&v, &zero).unwrap(), v);
    }

    #[test]
    fn default_schedule_has_nine_steps() {
        let p = EleaParams::default();
        assert_eq!(
            p.beta_schedule(),
            vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0]
        );
    }

    #[test]
    fn constant_lpe_is_a_fixed_point() {
        for boundary in [Boundary::Periodic, Boundary::Mirror] {
            let bank = build_diff_bank(16, 12, boundary).unwrap();
            let lpe = GrayImage::filled(16, 12, 0.42);
            let weights = compute_weights(&lpe, &bank).unwrap();
            let sol = solve_transmission(&lpe, &bank, &weights, &EleaParams::default()).unwrap();
            assert!(sol.raw.pixels().iter().all(|v| (v - 0.42).abs() < 1e-12));
            assert!(sol.final_objective < 1e-12, "{}", sol.final_objective);
        }
    }

    #[test]
    fn rho_parsing() {
        assert_eq!("mean".parse::<RhoMode>().unwrap(), RhoMode::MeanOfLpe);
        assert_eq!("0.5".parse::<RhoMode>().unwrap(), RhoMode::Fixed(0.5));
        assert!("median".parse::<RhoMode>().is_err());
    }

    #[test]
    fn validation_names_keys() {
        let bad = EleaParams {
            delta: -1.0,
            ..EleaParams::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config { key, .. }) if key == "delta"));
        let bad = EleaParams {
            lambda: 0.0,
            ..EleaParams::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config { key, .. }) if key == "lambda"));
    }

    #[test]
    fn elea_worked_example() {
        let lpe = GrayImage::filled(1, 1, 0.8);
        let t = TransmissionMap::from_field(GrayImage::filled(1, 1, 0.25), 1e-4);
        let e = elea_unnormalized(&lpe, &t, 0.5, 1e-4, 0.85).unwrap();
        let expected = 0.5 + 0.3 / 0.25f64.powf(0.85);
        assert!((e.pixels()[0] - expected).abs() < 1e-14);
        assert!((e.pixels()[0] - 1.475).abs() < 1e-3);
    }
}
