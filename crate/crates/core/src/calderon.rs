//! Frequency-side kernels: the continuous resolution of unity `(Φ̂, φ̂)`, the
//! dyadic family `ψ̂_v`, and local-means kernels `(k̂₀, k̂)`.
//!
//! All kernels are radial and act as Fourier multipliers, so `φ_t ∗ f` means
//! `𝓕^{-1}[φ̂(t|ξ|) f̂]`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScaleGrid};

/// Inner and outer radius of the annulus carrying `φ̂`.
pub const ANNULUS: (f64, f64) = (0.5, 2.0);
/// Points in the exported radial tables.
pub const TABLE_POINTS: usize = 4096;

/// `C^∞` step: 0 for `x ≤ 0`, 1 for `x ≥ 1`, built from `e^{-1/x}`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Shape of the annulus bump before normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BumpShape {
    /// `exp(-1/(u(1-u)))` with `u` linear in `r` across `[1/2, 2]`.
    Mollifier,
    /// `μ̂(r)·η̂(r)` with `μ̂(r) = r² e^{-r²}` and `η̂` a bump symmetric in
    /// `log₂ r`.
    MuEta,
}

impl BumpShape {
    /// Unnormalized bump `a(r)`, positive exactly on `(1/2, 2)`.
    pub fn eval(self, r: f64) -> f64 {
        let (lo, hi) = ANNULUS;
        if r <= lo || r >= hi {
            return 0.0;
        }
        match self {
            BumpShape::Mollifier => {
                let u = (r - lo) / (hi - lo);
                (-1.0 / (u * (1.0 - u))).exp()
            }
            BumpShape::MuEta => {
                let u = r.log2();
                r * r * (-r * r).exp() * (-1.0 / (1.0 - u * u)).exp()
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BumpShape::Mollifier => "mollifier",
            BumpShape::MuEta => "mu-eta",
        }
    }
}

/// Continuous resolution of unity matched to a scale grid.
///
/// `φ̂(r) = a(r) / D(r)` with `D(r) = Σ_{j∈ℤ} (ln 2/K) a(2^{-j/K} r)`. `D` is
/// periodic in `log₂ r`, so both `∫₀^∞ φ̂(tr) dt/t = 1` and
/// `Σ_{j∈ℤ} (ln 2/K) φ̂(2^{-j/K} r) = 1` hold exactly. `Φ̂` collects the lattice
/// terms with `t > 1` plus half the `t = 1` term, which makes the trapezoid
/// identity `Φ̂ + Σ_j w_j φ̂(t_j ξ) = 1` exact for `|ξ| ≤ 2^{J-1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelPair {
    shape: BumpShape,
    per_octave: usize,
}

/// Builds the default (mollifier) pair for `s`, checking the identity on `spec`.
pub fn build_continuous_pair(spec: &GridSpec, s: &ScaleGrid) -> Result<KernelPair> {
    KernelPair::with_shape(spec, s, BumpShape::Mollifier)
}

impl KernelPair {
    pub fn with_shape(spec: &GridSpec, s: &ScaleGrid, shape: BumpShape) -> Result<Self> {
        s.ensure_resolvable(spec)?;
        let pair = Self { shape, per_octave: s.per_octave() };
        let residual = pair.reproducing_residual(spec, s);
        if !(residual < 1e-6) {
            return Err(Error::Construction(format!("reproducing identity residual {residual:e} exceeds 1e-6")));
        }
        Ok(pair)
    }

    /// The alternate pair built from `μ̂ η̂`.
    pub fn from_mu_eta(spec: &GridSpec, s: &ScaleGrid) -> Result<Self> {
        Self::with_shape(spec, s, BumpShape::MuEta)
    }

    pub fn shape(&self) -> BumpShape {
        self.shape
    }

    pub fn per_octave(&self) -> usize {
        self.per_octave
    }

    fn step(&self) -> f64 {
        std::f64::consts::LN_2 / self.per_octave as f64
    }

    fn lattice_sum(&self, r: f64) -> f64 {
        let k = self.per_octave as f64;
        let centre = (k * r.log2()).round() as i64;
        let reach = 2 * self.per_octave as i64 + 2;
        let mut sum = 0.0;
        for j in centre - reach..=centre + reach {
            sum += self.shape.eval((-(j as f64) / k).exp2() * r);
        }
        sum * self.step()
    }

    /// `φ̂` at radius `r`.
    pub fn phi_hat(&self, r: f64) -> f64 {
        let a = self.shape.eval(r);
        if a == 0.0 {
            0.0
        } else {
            a / self.lattice_sum(r)
        }
    }

    /// `Φ̂` at radius `r`.
    pub fn phi0_hat(&self, r: f64) -> f64 {
        let (lo, hi) = ANNULUS;
        if r < lo {
            return 1.0;
        }
        if r >= hi {
            return 0.0;
        }
        let k = self.per_octave as f64;
        let mut sum = 0.5 * self.phi_hat(r);
        let mut j = 1;
        loop {
            let rr = (j as f64 / k).exp2() * r;
            if rr >= hi {
                break;
            }
            sum += self.phi_hat(rr);
            j += 1;
        }
        self.step() * sum
    }

    /// `max |Φ̂ + Σ_j w_j φ̂(t_j ξ) - 1|` over grid frequencies within the
    /// resolvable radius of `s`.
    pub fn reproducing_residual(&self, spec: &GridSpec, s: &ScaleGrid) -> f64 {
        let radius = s.resolvable_radius();
        let mut radii: Vec<f64> = (0..spec.len()).map(|k| spec.frequency_norm(k)).filter(|&r| r <= radius).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        radii
            .iter()
            .map(|&r| {
                let total = self.phi0_hat(r) + s.nodes().map(|(t, w)| w * self.phi_hat(t * r)).sum::<f64>();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `(r, Φ̂(r), φ̂(r))` on [`TABLE_POINTS`] equispaced radii in `[0, 2.5]`.
    pub fn radial_table(&self) -> Vec<[f64; 3]> {
        radial_grid(2.5).map(|r| [r, self.phi0_hat(r), self.phi_hat(r)]).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_table(out, &["r", "phi0_hat", "phi_hat"], &self.radial_table())
    }
}

/// Dyadic resolution of unity `ψ̂_0 = Ψ`, `ψ̂_v = Ψ(2^{-v}·) - Ψ(2^{1-v}·)`.
///
/// `Ψ` is 1 on `[0, 1]` and 0 from `b = 3/2` on, so each `ψ̂_v` equals 1 on
/// `[3/4·2^v, 2^v]` and lives in `[2^{v-1}, 3/2·2^v]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicFamily {
    v_max: usize,
    cutoff_end: f64,
}

/// Largest `v_max` with `2^{v_max+1} ≤` Nyquist.
pub fn default_v_max(spec: &GridSpec) -> usize {
    (spec.nyquist().log2().floor() as usize).saturating_sub(1)
}

pub fn build_dyadic(spec: &GridSpec, v_max: usize) -> Result<DyadicFamily> {
    let top = ((v_max + 1) as f64).exp2();
    if top > spec.nyquist() {
        return Err(Error::InvalidArgument(format!(
            "v_max = {v_max} needs |ξ| up to {top} but grid Nyquist is {:.3}",
            spec.nyquist()
        )));
    }
    Ok(DyadicFamily { v_max, cutoff_end: 1.5 })
}

impl DyadicFamily {
    pub fn v_max(&self) -> usize {
        self.v_max
    }

    /// The cutoff `Ψ`.
    pub fn psi0_hat(&self, r: f64) -> f64 {
        1.0 - smooth_step((r - 1.0) / (self.cutoff_end - 1.0))
    }

    pub fn psi_hat(&self, v: usize, r: f64) -> f64 {
        if v == 0 {
            self.psi0_hat(r)
        } else {
            let s = (-(v as f64)).exp2() * r;
            self.psi0_hat(s) - self.psi0_hat(2.0 * s)
        }
    }

    /// Frequencies `|ξ| ≤ 2^{v_max}` are fully covered.
    pub fn resolvable_radius(&self) -> f64 {
        (self.v_max as f64).exp2()
    }

    /// `max |Σ_v ψ̂_v - 1|` over resolvable grid frequencies.
    pub fn residual(&self, spec: &GridSpec) -> f64 {
        let radius = self.resolvable_radius();
        (0..spec.len())
            .map(|k| spec.frequency_norm(k))
            .filter(|&r| r <= radius)
            .map(|r| ((0..=self.v_max).map(|v| self.psi_hat(v, r)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `(r, ψ̂_0(r), ..., ψ̂_{v_max}(r))` over `[0, 2^{v_max+1}]`.
    pub fn radial_table(&self) -> Vec<Vec<f64>> {
        radial_grid(2.0 * self.resolvable_radius())
            .map(|r| std::iter::once(r).chain((0..=self.v_max).map(|v| self.psi_hat(v, r))).collect())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut header = vec!["r".to_string()];
        header.extend((0..=self.v_max).map(|v| format!("psi_hat_{v}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write_table(out, &header, &self.radial_table())
    }
}

/// Local-means kernels `k̂(r) = (r/ε)^{S+1} e^{1-(r/ε)²}`, `k̂₀(r) = e^{-(r/2ε)²}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMeansKernels {
    moments: i32,
    radius: f64,
}

pub fn build_local_means(moments: i32, radius: f64, spec: &GridSpec) -> Result<LocalMeansKernels> {
    if moments + 1 < 0 {
        return Err(Error::InvalidArgument(format!("moment order S = {moments} must satisfy S >= -1")));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!("Tauberian radius must be positive, got {radius}")));
    }
    if 2.0 * radius > spec.nyquist() {
        return Err(Error::InvalidArgument(format!(
            "Tauberian annulus reaches {} beyond Nyquist {:.3}",
            2.0 * radius,
            spec.nyquist()
        )));
    }
    let kernels = LocalMeansKernels { moments, radius };
    kernels.check_tauberian()?;
    Ok(kernels)
}

impl LocalMeansKernels {
    /// `S`
    pub fn moments(&self) -> i32 {
        self.moments
    }

    /// `ε`
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn k_hat(&self, r: f64) -> f64 {
        let u = r / self.radius;
        if self.moments == -1 {
            (1.0 - u * u).exp()
        } else {
            u.powi(self.moments + 1) * (1.0 - u * u).exp()
        }
    }

    pub fn k0_hat(&self, r: f64) -> f64 {
        (-(r / (2.0 * self.radius)).powi(2)).exp()
    }

    /// Slope of `ln |k̂|` against `ln r` fitted on `r ∈ [10⁻⁴ε, 10⁻²ε]`.
    pub fn moment_exponent(&self) -> f64 {
        let pts: Vec<(f64, f64)> = (0..=20)
            .map(|i| {
                let r = self.radius * 10f64.powf(-4.0 + 0.1 * i as f64);
                (r.ln(), self.k_hat(r).ln())
            })
            .collect();
        least_squares_slope(&pts)
    }

    /// Positivity of `k̂₀` on `|ξ| < 2ε` and of `k̂` on `ε/2 < |ξ| < 2ε`.
    pub fn check_tauberian(&self) -> Result<()> {
        let e = self.radius;
        for i in 0..=1000 {
            let r = 2.0 * e * i as f64 / 1001.0;
            if !(self.k0_hat(r) > 0.0) {
                return Err(Error::Construction(format!("k0_hat vanishes at |ξ| = {r}")));
            }
            let r = e * (0.5 + 1.5 * (i as f64 + 0.5) / 1001.0);
            if !(self.k_hat(r) > 0.0) {
                return Err(Error::Construction(format!("k_hat vanishes at |ξ| = {r}")));
            }
        }
        Ok(())
    }

    pub fn radial_table(&self) -> Vec<[f64; 3]> {
        radial_grid(4.0 * self.radius).map(|r| [r, self.k0_hat(r), self.k_hat(r)]).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_table(out, &["r", "k0_hat", "k_hat"], &self.radial_table())
    }
}

fn radial_grid(r_max: f64) -> impl Iterator<Item = f64> {
    (0..TABLE_POINTS).map(move |i| r_max * i as f64 / (TABLE_POINTS - 1) as f64)
}

fn write_table<W: Write, R: AsRef<[f64]>>(out: W, header: &[&str], rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.as_ref().iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(shape: BumpShape) -> KernelPair {
        KernelPair::with_shape(&GridSpec::default_1d(), &ScaleGrid::default_grid(), shape).unwrap()
    }

    #[test]
    fn smooth_step_limits() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        for i in 1..100 {
            let x = i as f64 / 100.0;
            assert!((smooth_step(x) + smooth_step(1.0 - x) - 1.0).abs() < 1e-15);
            assert!(smooth_step(x) >= smooth_step(x - 0.01));
        }
    }

    #[test]
    fn low_pass_at_origin() {
        for shape in [BumpShape::Mollifier, BumpShape::MuEta] {
            assert_eq!(pair(shape).phi0_hat(0.0), 1.0);
        }
    }

    #[test]
    fn supports() {
        for shape in [BumpShape::Mollifier, BumpShape::MuEta] {
            let k = pair(shape);
            assert_eq!(k.phi_hat(0.4), 0.0);
            assert_eq!(k.phi_hat(2.1), 0.0);
            assert_eq!(k.phi0_hat(2.0), 0.0);
            assert_eq!(k.phi0_hat(3.0), 0.0);
            assert!(k.phi_hat(1.0) > 0.0);
            for i in 0..=400 {
                let r = 2.5 * i as f64 / 400.0;
                assert!(k.phi_hat(r) >= 0.0);
                assert!((0.0..=1.0 + 1e-14).contains(&k.phi0_hat(r)));
            }
        }
    }

    #[test]
    fn continuous_normalization() {
        // ∫₀^∞ φ̂(t) dt/t = 1 by fine quadrature in ln t
        let k = pair(BumpShape::Mollifier);
        let n = 20000;
        let (a, b) = (0.5f64.ln(), 2f64.ln());
        let h = (b - a) / n as f64;
        let integral: f64 = (0..n).map(|i| k.phi_hat((a + (i as f64 + 0.5) * h).exp()) * h).sum();
        assert!((integral - 1.0).abs() < 1e-8, "{integral}");
    }

    #[test]
    fn reproducing_identity() {
        let spec = GridSpec::default_1d();
        for s in [ScaleGrid::default_grid(), ScaleGrid::new(64, 5).unwrap(), ScaleGrid::new(3, 4).unwrap()] {
            for shape in [BumpShape::Mollifier, BumpShape::MuEta] {
                let k = KernelPair::with_shape(&spec, &s, shape).unwrap();
                assert!(k.reproducing_residual(&spec, &s) < 1e-12);
            }
        }
    }

    #[test]
    fn unresolvable_scales_rejected() {
        let spec = GridSpec::default_1d();
        assert!(build_continuous_pair(&spec, &ScaleGrid::new(8, 7).unwrap()).is_err());
    }

    #[test]
    fn dyadic_telescopes() {
        let spec = GridSpec::default_1d();
        let d = build_dyadic(&spec, default_v_max(&spec)).unwrap();
        assert_eq!(d.v_max(), 5);
        for i in 0..=2000 {
            let r = 80.0 * i as f64 / 2000.0;
            let sum: f64 = (0..=d.v_max()).map(|v| d.psi_hat(v, r)).sum();
            assert!((sum - d.psi0_hat((-(d.v_max() as f64)).exp2() * r)).abs() < 1e-15);
        }
        assert!(d.residual(&spec) < 1e-10);
    }

    #[test]
    fn dyadic_supports_and_plateau() {
        let d = build_dyadic(&GridSpec::default_1d(), 5).unwrap();
        for v in 1..=5usize {
            let scale = (v as f64).exp2();
            assert_eq!(d.psi_hat(v, 0.49 * scale), 0.0);
            assert_eq!(d.psi_hat(v, 2.01 * scale), 0.0);
            assert_eq!(d.psi_hat(v, 0.75 * scale), 1.0);
            assert_eq!(d.psi_hat(v, scale), 1.0);
        }
        assert!(build_dyadic(&GridSpec::default_1d(), 6).is_err());
    }

    #[test]
    fn local_means_values() {
        let spec = GridSpec::default_1d();
        let k = build_local_means(3, 1.0, &spec).unwrap();
        assert!((k.k_hat(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(k.k0_hat(0.0), 1.0);
        assert!(build_local_means(-2, 1.0, &spec).is_err());
        for s in [-1, 0, 1, 3, 6] {
            let k = build_local_means(s, 1.0, &spec).unwrap();
            assert!(k.moment_exponent() >= (s + 1) as f64 - 0.1);
        }
    }

    #[test]
    fn exports_have_table_rows() {
        let mut buf = Vec::new();
        pair(BumpShape::Mollifier).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), TABLE_POINTS + 1);
        assert!(text.starts_with("r,phi0_hat,phi_hat"));
    }
}
