//! Periodic torus discretization.
//!
//! Functions live on the uniform grid `x = -L + j h`, `h = 2L/N`, over
//! `[-L, L)^n` with `n ∈ {1, 2}`. The frequency grid is `ξ_k = π k / L` with
//! `k ∈ [-N/2, N/2)`, stored in FFT order. The Fourier transform follows the
//! `(2π)^{-n/2} ∫ e^{-ix·ξ} f(x) dx` convention.

mod eta;
mod fft;
pub mod io;
mod scale;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eta::{eta_hat, eta_l1_norm, eta_samples, eta_value};
pub use fft::{convolve_kernel, fourier, inverse_fourier};
pub use scale::ScaleGrid;

pub(crate) const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Shape of a periodic grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    points: usize,
    half_period: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points: usize, half_period: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("points per axis must be a power of two >= 16, got {points}")));
        }
        if !(half_period.is_finite() && half_period > 0.0) {
            return Err(Error::InvalidGrid(format!("half period must be positive, got {half_period}")));
        }
        Ok(Self { dim, points, half_period })
    }

    /// The default one-dimensional grid: N = 1024, L = 16.
    pub fn default_1d() -> Self {
        Self { dim: 1, points: 1024, half_period: 16.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_period / self.points as f64
    }

    /// Volume of one grid cell, `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Spacing of the frequency grid, `π / L`.
    pub fn frequency_spacing(&self) -> f64 {
        std::f64::consts::PI / self.half_period
    }

    /// Largest representable frequency magnitude along an axis, `π N / (2L)`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.points as f64 / (2.0 * self.half_period)
    }

    /// Total number of samples, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The same torus sampled with twice as many points per axis.
    pub fn refined(&self) -> Self {
        Self { points: self.points * 2, ..*self }
    }

    pub(crate) fn axis_coordinate(&self, i: usize) -> f64 {
        -self.half_period + i as f64 * self.spacing()
    }

    pub(crate) fn axis_frequency(&self, k: usize) -> f64 {
        let n = self.points as isize;
        let k = k as isize;
        let signed = if k < n / 2 { k } else { k - n };
        signed as f64 * self.frequency_spacing()
    }

    /// Per-axis indices of a flat row-major index.
    pub(crate) fn split(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.points, idx % self.points]
        }
    }

    /// Spatial coordinate of a flat index (second component is 0 in 1D).
    pub fn coordinate(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.split(idx);
        if self.dim == 1 {
            [self.axis_coordinate(i), 0.0]
        } else {
            [self.axis_coordinate(i), self.axis_coordinate(j)]
        }
    }

    /// Frequency vector of a flat FFT-ordered index.
    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.split(idx);
        if self.dim == 1 {
            [self.axis_frequency(i), 0.0]
        } else {
            [self.axis_frequency(i), self.axis_frequency(j)]
        }
    }

    pub fn frequency_norm(&self, idx: usize) -> f64 {
        let [a, b] = self.frequency(idx);
        a.hypot(b)
    }

    pub fn coordinate_norm(&self, idx: usize) -> f64 {
        let [a, b] = self.coordinate(idx);
        a.hypot(b)
    }

    /// Number of grid steps between two axis indices on the circle.
    pub(crate) fn axis_steps(&self, i: usize, j: usize) -> usize {
        let d = i.abs_diff(j);
        d.min(self.points - d)
    }

    /// Periodic Euclidean distance between two grid points.
    pub fn periodic_distance(&self, a: usize, b: usize) -> f64 {
        let [a0, a1] = self.split(a);
        let [b0, b1] = self.split(b);
        let d0 = self.axis_steps(a0, b0) as f64;
        let d1 = self.axis_steps(a1, b1) as f64;
        d0.hypot(d1) * self.spacing()
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Complex samples of a function on the spatial grid, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidArgument(format!("expected {} samples, got {}", spec.len(), values.len())));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidArgument("grid function has non-finite samples".into()));
        }
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self { spec, values: vec![Complex64::new(0.0, 0.0); spec.len()] }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..spec.len()).map(|i| f(spec.coordinate(i))).collect();
        Self { spec, values }
    }

    pub fn from_real_fn(spec: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self::from_fn(spec, |x| Complex64::new(f(x), 0.0))
    }

    pub fn from_real(spec: GridSpec, values: &[f64]) -> Result<Self> {
        Self::new(spec, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub(crate) fn from_parts_unchecked(spec: GridSpec, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        Self { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { spec: self.spec, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.spec.ensure_same(&other.spec)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { spec: self.spec, values })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    /// `(h^n Σ |f|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.spec.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Fraction of `∫|f|` carried by the outer band `|x|_∞ ≥ 3L/4`.
    ///
    /// A small value means periodization leaves the function essentially
    /// unchanged.
    pub fn boundary_mass(&self) -> f64 {
        let band = 0.75 * self.spec.half_period;
        let mut outer = 0.0;
        let mut total = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let [a, b] = self.spec.coordinate(i);
            let m = v.norm();
            total += m;
            if a.abs().max(b.abs()) >= band {
                outer += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outer / total
        }
    }
}

/// Trapezoid quadrature `h^n Σ f` over the torus.
pub fn integrate(f: &GridFunction) -> Complex64 {
    let sum: Complex64 = f.values.iter().sum();
    sum * f.spec.cell_volume()
}

/// Frequency-side samples in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} frequency samples, got {}",
                spec.len(),
                values.len()
            )));
        }
        Ok(Self { spec, values })
    }

    /// Samples a radial profile `m(|ξ|)` on the frequency grid.
    pub fn from_radial(spec: GridSpec, profile: impl Fn(f64) -> f64) -> Self {
        let values = (0..spec.len()).map(|k| Complex64::new(profile(spec.frequency_norm(k)), 0.0)).collect();
        Self { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Pointwise product with a radial Fourier multiplier.
    pub fn apply_radial(&self, symbol: impl Fn(f64) -> f64) -> Spectrum {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let m = symbol(self.spec.frequency_norm(k));
                if m == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    v * m
                }
            })
            .collect();
        Spectrum { spec: self.spec, values }
    }

    /// `(π/L)^n Σ |f̂|²`, the frequency-side squared L² norm.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.spec.frequency_spacing().powi(self.spec.dim() as i32)
            * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }
}

/// Applies the Fourier multiplier `m(|ξ|)`: returns `𝓕^{-1}[m(|ξ|) f̂]`.
pub fn apply_multiplier(f: &GridFunction, symbol: impl Fn(f64) -> f64) -> GridFunction {
    inverse_fourier(&fourier(f).apply_radial(symbol))
}
