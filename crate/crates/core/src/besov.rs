//! Besov quasi-norm evaluators: continuous resolution, dyadic blocks, Peetre
//! maximal functions and local means.

use rayon::prelude::*;

use crate::calderon::{DyadicFamily, KernelPair, LocalMeansKernels};
use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::grid::{fourier, inverse_fourier, GridFunction, GridSpec, ScaleGrid, Spectrum};
use crate::modular_norms::{luxemburg_log, mixed_norm_log};

/// The decomposition used by an evaluator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernels {
    Continuous(KernelPair),
    Dyadic(DyadicFamily),
    LocalMeans(LocalMeansKernels),
}

/// Exponents, Peetre parameter, scale grid and kernels of a Besov quasi-norm.
#[derive(Clone, Debug)]
pub struct BesovParams {
    pub alpha: ExponentField,
    pub p: ExponentField,
    pub q: ExponentField,
    /// Peetre exponent `a`.
    pub a: f64,
    pub scale: ScaleGrid,
    pub kernels: Kernels,
}

impl BesovParams {
    /// Checks grids, `p, q ∈ 𝒫₀`, bounded `α`, `a > 0`, and either `q⁺ < ∞`
    /// or `q ≡ ∞`.
    pub fn new(
        alpha: ExponentField,
        p: ExponentField,
        q: ExponentField,
        a: f64,
        scale: ScaleGrid,
        kernels: Kernels,
    ) -> Result<Self> {
        alpha.spec().ensure_same(p.spec())?;
        alpha.spec().ensure_same(q.spec())?;
        alpha.ensure_finite("α")?;
        if alpha.range_min() == f64::NEG_INFINITY {
            return Err(Error::Hypothesis("α must be bounded below".into()));
        }
        p.ensure_p0("p")?;
        q.ensure_p0("q")?;
        if q.range_max().is_infinite() && q.range_min().is_finite() {
            return Err(Error::Hypothesis("q must be either bounded or identically ∞".into()));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidArgument(format!("Peetre exponent must be positive, got {a}")));
        }
        if let Kernels::Continuous(k) = &kernels {
            if k.per_octave() != scale.per_octave() {
                return Err(Error::InvalidArgument(format!(
                    "kernel pair built for K = {} used with K = {}",
                    k.per_octave(),
                    scale.per_octave()
                )));
            }
            scale.ensure_resolvable(alpha.spec())?;
        }
        Ok(Self { alpha, p, q, a, scale, kernels })
    }

    pub fn spec(&self) -> &GridSpec {
        self.alpha.spec()
    }

    pub fn dim(&self) -> usize {
        self.spec().dim()
    }

    pub fn q_is_infinite(&self) -> bool {
        self.q.range_min().is_infinite()
    }

    /// Maximal characterizations need `a > n/p⁻`.
    pub fn ensure_peetre_exponent(&self) -> Result<()> {
        let bound = self.dim() as f64 / self.p.range_min();
        if self.a > bound {
            Ok(())
        } else {
            Err(Error::Hypothesis(format!("Peetre exponent a = {} must exceed n/p⁻ = {bound}", self.a)))
        }
    }

    /// Local means need `α⁺ < S + 1`.
    pub fn ensure_moment_order(&self, k: &LocalMeansKernels) -> Result<()> {
        let bound = (k.moments() + 1) as f64;
        if self.alpha.range_max() < bound {
            Ok(())
        } else {
            Err(Error::Hypothesis(format!("local means need α⁺ = {} < S + 1 = {bound}", self.alpha.range_max())))
        }
    }

    fn ensure_grid(&self, f: &GridFunction) -> Result<()> {
        f.spec().ensure_same(self.spec())
    }

    fn continuous(&self) -> Result<&KernelPair> {
        match &self.kernels {
            Kernels::Continuous(k) => Ok(k),
            _ => Err(Error::InvalidArgument("evaluator needs a continuous kernel pair".into())),
        }
    }

    fn dyadic(&self) -> Result<&DyadicFamily> {
        match &self.kernels {
            Kernels::Dyadic(k) => Ok(k),
            _ => Err(Error::InvalidArgument("evaluator needs a dyadic family".into())),
        }
    }

    fn local_means(&self) -> Result<&LocalMeansKernels> {
        match &self.kernels {
            Kernels::LocalMeans(k) => Ok(k),
            _ => Err(Error::InvalidArgument("evaluator needs local-means kernels".into())),
        }
    }

    /// Aggregates per-scale log magnitudes with `q`: the mixed norm, or the
    /// supremum of Luxemburg norms when `q ≡ ∞`.
    fn aggregate(&self, logs: &[Vec<f64>], weights: &[f64]) -> f64 {
        let cell = self.spec().cell_volume();
        if self.q_is_infinite() {
            logs.par_iter()
                .map(|l| luxemburg_log(l, self.p.samples(), cell))
                .collect::<Vec<_>>()
                .into_iter()
                .fold(0.0, f64::max)
        } else {
            mixed_norm_log(logs, weights, self.p.samples(), self.q.samples(), cell)
        }
    }

    fn lp(&self, logs: &[f64]) -> f64 {
        luxemburg_log(logs, self.p.samples(), self.spec().cell_volume())
    }
}

fn log_abs(f: &GridFunction) -> Vec<f64> {
    f.values().iter().map(|v| v.norm().ln()).collect()
}

/// `ln|t^{-α(x)} g(x)|`.
fn weighted_logs(g: &GridFunction, alpha: &ExponentField, t: f64) -> Vec<f64> {
    let lt = t.ln();
    g.values().iter().zip(alpha.samples()).map(|(v, &al)| v.norm().ln() - al * lt).collect()
}

fn filtered(fhat: &Spectrum, symbol: impl Fn(f64) -> f64) -> GridFunction {
    inverse_fourier(&fhat.apply_radial(symbol))
}

/// `Φ∗f` followed by `φ_{t_j}∗f` for every node of `s`.
pub fn continuous_coefficients(f: &GridFunction, k: &KernelPair, s: &ScaleGrid) -> (GridFunction, Vec<GridFunction>) {
    let fhat = fourier(f);
    let low = filtered(&fhat, |r| k.phi0_hat(r));
    let bands = (0..s.len())
        .into_par_iter()
        .map(|j| {
            let t = s.t(j);
            filtered(&fhat, |r| k.phi_hat(t * r))
        })
        .collect();
    (low, bands)
}

/// `ψ_v∗f` for `v = 0..=v_max`.
pub fn dyadic_blocks(f: &GridFunction, d: &DyadicFamily) -> Vec<GridFunction> {
    let fhat = fourier(f);
    (0..=d.v_max()).into_par_iter().map(|v| filtered(&fhat, |r| d.psi_hat(v, r))).collect()
}

/// `‖Φ∗f‖_{p(·)} + ‖(t^{-α(·)} φ_t∗f)_t‖_{ℓ^{q(·)}(L^{p(·)})}` over the scale grid.
pub fn besov_continuous(f: &GridFunction, params: &BesovParams) -> Result<f64> {
    params.ensure_grid(f)?;
    let k = params.continuous()?;
    let s = &params.scale;
    let (low, bands) = continuous_coefficients(f, k, s);
    let logs: Vec<Vec<f64>> =
        bands.par_iter().enumerate().map(|(j, g)| weighted_logs(g, &params.alpha, s.t(j))).collect();
    Ok(params.lp(&log_abs(&low)) + params.aggregate(&logs, &s.weights()))
}

/// `‖(2^{vα(·)} ψ_v∗f)_v‖_{ℓ^{q(·)}(L^{p(·)})}`.
pub fn besov_discrete(f: &GridFunction, params: &BesovParams) -> Result<f64> {
    params.ensure_grid(f)?;
    let d = params.dyadic()?;
    let blocks = dyadic_blocks(f, d);
    let logs: Vec<Vec<f64>> =
        blocks.par_iter().enumerate().map(|(v, g)| weighted_logs(g, &params.alpha, (-(v as f64)).exp2())).collect();
    Ok(params.aggregate(&logs, &vec![1.0; logs.len()]))
}

/// How the Peetre supremum visits candidate points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SweepMode {
    /// Walks outward from `x` and stops once no farther point can win.
    #[default]
    Pruned,
    /// Visits every grid point.
    Exhaustive,
}

/// `sup_y g(y) / (1 + d(x,y)/t)^a` over grid points `y`, for each grid `x`.
pub fn peetre_sweep(g: &[f64], spec: &GridSpec, t: f64, a: f64, mode: SweepMode) -> Result<Vec<f64>> {
    if g.len() != spec.len() {
        return Err(Error::InvalidArgument(format!("expected {} samples, got {}", spec.len(), g.len())));
    }
    if !(a > 0.0 && t > 0.0) {
        return Err(Error::InvalidArgument(format!("Peetre sweep needs a > 0 and t > 0, got a={a}, t={t}")));
    }
    let n = spec.points();
    let half = n / 2;
    let h = spec.spacing();
    let top = g.iter().copied().fold(0.0, f64::max);
    let pruned = mode == SweepMode::Pruned;
    let out = match spec.dim() {
        1 => {
            let weight: Vec<f64> = (0..=half).map(|d| (1.0 + d as f64 * h / t).powf(-a)).collect();
            (0..n)
                .into_par_iter()
                .map(|x| {
                    let mut best = g[x];
                    for d in 1..=half {
                        let w = weight[d];
                        if pruned && top * w <= best {
                            break;
                        }
                        let l = g[(x + n - d) % n];
                        let r = g[(x + d) % n];
                        best = best.max(l.max(r) * w);
                    }
                    best
                })
                .collect()
        }
        _ => {
            // weight by wrapped offset (|di|, |dj|) ∈ [0, N/2]²
            let stride = half + 1;
            let weight: Vec<f64> = (0..stride * stride)
                .map(|k| {
                    let (i, j) = ((k / stride) as f64, (k % stride) as f64);
                    (1.0 + h * i.hypot(j) / t).powf(-a)
                })
                .collect();
            (0..n * n)
                .into_par_iter()
                .map(|x| {
                    let (xi, xj) = (x / n, x % n);
                    let mut best = g[x];
                    for shell in 1..=half {
                        // nearest point of the shell is at distance shell·h
                        if pruned && top * weight[shell * stride] <= best {
                            break;
                        }
                        let s = shell as isize;
                        for di in -s..=s {
                            let edge = di.abs() == s;
                            let mut dj = -s;
                            while dj <= s {
                                let yi = (xi as isize + di).rem_euclid(n as isize) as usize;
                                let yj = (xj as isize + dj).rem_euclid(n as isize) as usize;
                                let w = weight[di.unsigned_abs() * stride + dj.unsigned_abs()];
                                best = best.max(g[yi * n + yj] * w);
                                dj += if edge { 1 } else { 2 * s };
                            }
                        }
                    }
                    best
                })
                .collect()
        }
    };
    Ok(out)
}

/// `(φ_t^{∗,a} t^{-α(·)} f)(x) = sup_y t^{-α(y)} |φ_t∗f(y)| / (1 + d(x,y)/t)^a`.
pub fn peetre_maximal(
    f: &GridFunction,
    t: f64,
    a: f64,
    alpha: &ExponentField,
    kernel: impl Fn(f64) -> f64,
) -> Result<GridFunction> {
    f.spec().ensure_same(alpha.spec())?;
    let g = filtered(&fourier(f), |r| kernel(t * r));
    let weighted: Vec<f64> = weighted_logs(&g, alpha, t).into_iter().map(f64::exp).collect();
    let m = peetre_sweep(&weighted, f.spec(), t, a, SweepMode::Pruned)?;
    GridFunction::from_real(*f.spec(), &m)
}

/// Low-pass maximal term and per-scale maximal terms, as log magnitudes.
fn maximal_logs(
    f: &GridFunction,
    params: &BesovParams,
    low: impl Fn(f64) -> f64,
    band: impl Fn(f64) -> f64 + Sync,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let spec = *params.spec();
    let s = &params.scale;
    let fhat = fourier(f);
    let low_vals = filtered(&fhat, low).abs();
    let low_max = peetre_sweep(&low_vals, &spec, 1.0, params.a, SweepMode::Pruned)?;
    let bands = (0..s.len())
        .into_par_iter()
        .map(|j| {
            let t = s.t(j);
            let g = filtered(&fhat, |r| band(t * r));
            let weighted: Vec<f64> = weighted_logs(&g, &params.alpha, t).into_iter().map(f64::exp).collect();
            peetre_sweep(&weighted, &spec, t, params.a, SweepMode::Pruned)
                .map(|m| m.into_iter().map(f64::ln).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((low_max.into_iter().map(f64::ln).collect(), bands))
}

/// `‖Φ^{∗,a} f‖_{p(·)} + ‖(φ_t^{∗,a} t^{-α(·)} f)_t‖_{ℓ^{q(·)}(L^{p(·)})}`.
pub fn besov_peetre(f: &GridFunction, params: &BesovParams) -> Result<f64> {
    params.ensure_grid(f)?;
    params.ensure_peetre_exponent()?;
    let k = *params.continuous()?;
    let (low, bands) = maximal_logs(f, params, |r| k.phi0_hat(r), |r| k.phi_hat(r))?;
    Ok(params.lp(&low) + params.aggregate(&bands, &params.scale.weights()))
}

/// `‖k₀^{∗,a} f‖_{p(·)} + ‖(k_t^{∗,a} t^{-α(·)} f)_t‖_{ℓ^{q(·)}(L^{p(·)})}`.
pub fn besov_local_means(f: &GridFunction, params: &BesovParams) -> Result<f64> {
    params.ensure_grid(f)?;
    let k = *params.local_means()?;
    params.ensure_moment_order(&k)?;
    params.ensure_peetre_exponent()?;
    let (low, bands) = maximal_logs(f, params, |r| k.k0_hat(r), |r| k.k_hat(r))?;
    Ok(params.lp(&low) + params.aggregate(&bands, &params.scale.weights()))
}
