//! Empirical constants for the auxiliary inequalities behind the
//! equivalence theorems.
//!
//! Each oracle evaluates both sides of an inequality on sampled inputs and
//! returns the smallest constant that makes it hold there. Ratios are
//! homogeneous of degree zero in the input functions.

use rayon::prelude::*;

use crate::calderon::{least_squares_slope, smooth_step, BumpShape, KernelPair};
use crate::error::{Error, Result};
use crate::exponent::{estimate_clog, ExponentField};
use crate::grid::{apply_multiplier, convolve_kernel, eta_hat, fourier, inverse_fourier, GridFunction, ScaleGrid};
use crate::modular_norms::{luxemburg_norm, mixed_norm_continuous, mixed_norm_discrete, power_norm};

/// Result of the variable-smoothness transfer check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferOutcome {
    pub constant: f64,
    /// `R ≥` estimated `c_log(α)`.
    pub hypothesis_met: bool,
}

/// `max_{x,y} t^{-α(x)} η_{t,m+R}(x-y) / (t^{-α(y)} η_{t,m}(x-y))`
/// `= max t^{α(y)-α(x)} (1 + d(x,y)/t)^{-R}`.
pub fn check_transfer(alpha: &ExponentField, t: f64, m: f64, r: f64) -> Result<TransferOutcome> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidArgument(format!("scale t must lie in (0, 1], got {t}")));
    }
    if !(m > 0.0 && r >= 0.0) {
        return Err(Error::InvalidArgument(format!("need m > 0 and R >= 0, got m={m}, R={r}")));
    }
    alpha.ensure_finite("α")?;
    let spec = *alpha.spec();
    let a = alpha.samples();
    let lt = t.ln();
    let constant = (0..a.len())
        .into_par_iter()
        .map(|x| {
            let mut best = 1.0f64;
            for y in 0..a.len() {
                let d = spec.periodic_distance(x, y);
                let v = ((a[y] - a[x]) * lt - r * (1.0 + d / t).ln()).exp();
                best = best.max(v);
            }
            best
        })
        .reduce(|| 1.0, f64::max);
    Ok(TransferOutcome { constant, hypothesis_met: r >= estimate_clog(alpha) })
}

/// Both sides of the power-norm comparison `‖f‖_p^{q⁻} ≤ ‖|f|^q‖_{p/q}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DzwOutcome {
    pub lhs: f64,
    pub rhs: f64,
    /// The comparison only claims anything when `rhs ≥ 1`.
    pub applicable: bool,
    pub holds: bool,
}

impl DzwOutcome {
    /// `lhs / rhs`, the constant the inequality needs.
    pub fn constant(&self) -> f64 {
        if self.rhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

pub fn check_dzw(f: &GridFunction, p: &ExponentField, q: &ExponentField) -> Result<DzwOutcome> {
    let rhs = power_norm(f, p, q)?;
    let lhs = luxemburg_norm(f, p)?.powf(q.range_min());
    let applicable = rhs >= 1.0;
    let holds = !applicable || lhs <= rhs * (1.0 + 1e-8);
    Ok(DzwOutcome { lhs, rhs, applicable, holds })
}

/// Trapezoid integrals of `ε`, `η_t = t^s ∫_t^1 τ^{-s} ε_τ dτ/τ` and
/// `δ_t = t^{-s} ∫_{t_min}^t τ^s ε_τ dτ/τ` against `dt/t` on the scale grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardyIntegrals {
    pub epsilon: f64,
    pub eta: f64,
    pub delta: f64,
}

impl HardyIntegrals {
    /// `(∫η + ∫δ) / ∫ε`, zero for `ε ≡ 0`.
    pub fn constant(&self) -> f64 {
        if self.epsilon == 0.0 {
            0.0
        } else {
            (self.eta + self.delta) / self.epsilon
        }
    }
}

pub fn hardy_integrals(eps: &[f64], s: f64, scale: &ScaleGrid) -> Result<HardyIntegrals> {
    if eps.len() != scale.len() {
        return Err(Error::InvalidArgument(format!("ε has {} values for {} scale nodes", eps.len(), scale.len())));
    }
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("Hardy exponent must be positive, got {s}")));
    }
    if eps.iter().any(|&e| !(e >= 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument("ε must be finite and nonnegative".into()));
    }
    let n = scale.len();
    let h = scale.step();
    let t: Vec<f64> = (0..n).map(|j| scale.t(j)).collect();
    // nodes run from t = 1 down to t_min
    let up: Vec<f64> = (0..n).map(|j| t[j].powf(-s) * eps[j]).collect();
    let down: Vec<f64> = (0..n).map(|j| t[j].powf(s) * eps[j]).collect();
    let mut inner_eta = vec![0.0; n];
    for j in 1..n {
        inner_eta[j] = inner_eta[j - 1] + 0.5 * h * (up[j - 1] + up[j]);
    }
    let mut inner_delta = vec![0.0; n];
    for j in (0..n - 1).rev() {
        inner_delta[j] = inner_delta[j + 1] + 0.5 * h * (down[j] + down[j + 1]);
    }
    let weights = scale.weights();
    let integrate = |g: &dyn Fn(usize) -> f64| (0..n).map(|j| weights[j] * g(j)).sum::<f64>();
    Ok(HardyIntegrals {
        epsilon: integrate(&|j| eps[j]),
        eta: integrate(&|j| t[j].powf(s) * inner_eta[j]),
        delta: integrate(&|j| t[j].powf(-s) * inner_delta[j]),
    })
}

/// The Hardy-type constant `(∫η + ∫δ)/∫ε`.
pub fn check_hardy(eps: &[f64], s: f64, scale: &ScaleGrid) -> Result<f64> {
    Ok(hardy_integrals(eps, s, scale)?.constant())
}

/// `θ̂`, a Gaussian.
fn rtrick_theta(r: f64) -> f64 {
    (-r * r).exp()
}

/// `ω̂`, equal to 1 on `|ξ| ≤ 1/2` and vanishing from `|ξ| = 1` on.
fn rtrick_omega(r: f64) -> f64 {
    1.0 - smooth_step(2.0 * r - 1.0)
}

/// `(η ∗ |g|^r)^{1/r}` with `η` given on the frequency side.
fn eta_power_mean(g: &GridFunction, eta: &crate::grid::Spectrum, r: f64) -> Result<Vec<f64>> {
    let powered: Vec<f64> = g.values().iter().map(|v| v.norm().powf(r)).collect();
    let conv = convolve_kernel(&GridFunction::from_real(*g.spec(), &powered)?, eta)?;
    Ok(conv.values().iter().map(|v| v.re.max(0.0).powf(1.0 / r)).collect())
}

/// Largest ratio `num/den` over points where `den` is not negligible;
/// `None` when `den` vanishes identically.
fn max_ratio(num: &[f64], den: &[f64]) -> Option<f64> {
    let top = den.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return None;
    }
    let floor = 1e-13 * top;
    Some(num.iter().zip(den).filter(|(_, &d)| d > floor).map(|(&n, &d)| n / d).fold(0.0, f64::max))
}

/// `max_x |θ_N∗ω_N∗g(x)| / (η_{N,m}∗|ω_N∗g|^r(x))^{1/r}` with a Gaussian `θ̂`
/// and `ω̂` supported in the unit ball. `None` for `g ≡ 0`.
pub fn check_rtrick(g: &GridFunction, dilation: f64, r: f64, m: f64) -> Result<Option<f64>> {
    let spec = *g.spec();
    if !(dilation > 0.0 && r > 0.0) {
        return Err(Error::InvalidArgument(format!("need N > 0 and r > 0, got N={dilation}, r={r}")));
    }
    if dilation > spec.nyquist() {
        return Err(Error::InvalidArgument(format!("dilation {dilation} exceeds grid Nyquist")));
    }
    let ghat = fourier(g);
    let omega_g = inverse_fourier(&ghat.apply_radial(|x| rtrick_omega(x / dilation)));
    let both = inverse_fourier(&ghat.apply_radial(|x| rtrick_theta(x / dilation) * rtrick_omega(x / dilation)));
    let den = eta_power_mean(&omega_g, &eta_hat(1.0 / dilation, m, &spec)?, r)?;
    Ok(max_ratio(&both.abs(), &den))
}

/// Checks `m > n + c_log(1/q)`.
fn ensure_eta_order(m: f64, q: &ExponentField) -> Result<()> {
    let bound = q.spec().dim() as f64 + estimate_clog(&q.reciprocal()?);
    if m > bound {
        Ok(())
    } else {
        Err(Error::Hypothesis(format!("η order m = {m} must exceed n + c_log(1/q) = {bound}")))
    }
}

fn eta_convolve_abs(f: &GridFunction, t: f64, m: f64) -> Result<GridFunction> {
    let abs = GridFunction::from_real(*f.spec(), &f.abs())?;
    convolve_kernel(&abs, &eta_hat(t, m, f.spec())?)
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `‖(η_{2^{-v},m}∗|f_v|)_v‖ / ‖(f_v)_v‖` in `ℓ^{q(·)}(L^{p(·)})`.
pub fn check_eta_conv_discrete(fv: &[GridFunction], p: &ExponentField, q: &ExponentField, m: f64) -> Result<f64> {
    ensure_eta_order(m, q)?;
    let conv = fv
        .par_iter()
        .enumerate()
        .map(|(v, f)| eta_convolve_abs(f, (-(v as f64)).exp2(), m))
        .collect::<Result<Vec<_>>>()?;
    Ok(ratio_or_zero(mixed_norm_discrete(&conv, p, q)?, mixed_norm_discrete(fv, p, q)?))
}

/// Continuous-index analog over the scale grid: `f_t` at node `t_j`.
pub fn check_eta_conv_continuous(
    ft: &[GridFunction],
    p: &ExponentField,
    q: &ExponentField,
    m: f64,
    scale: &ScaleGrid,
) -> Result<f64> {
    ensure_eta_order(m, q)?;
    if ft.len() != scale.len() {
        return Err(Error::InvalidArgument("family length differs from the scale grid".into()));
    }
    let conv =
        ft.par_iter().enumerate().map(|(j, f)| eta_convolve_abs(f, scale.t(j), m)).collect::<Result<Vec<_>>>()?;
    Ok(ratio_or_zero(mixed_norm_continuous(&conv, p, q, scale)?, mixed_norm_continuous(ft, p, q, scale)?))
}

/// `g_t = Σ_{τ_j ∈ [αt, βt]} w_j η_{τ_j,m}∗|f_{τ_j}|` for every node `t`.
pub fn averaged_family(
    ft: &[GridFunction],
    m: f64,
    lower: f64,
    upper: f64,
    scale: &ScaleGrid,
) -> Result<Vec<GridFunction>> {
    if !(lower > 0.0 && lower < upper && upper.is_finite()) {
        return Err(Error::InvalidArgument(format!("need 0 < α < β < ∞, got α={lower}, β={upper}")));
    }
    if ft.len() != scale.len() {
        return Err(Error::InvalidArgument("family length differs from the scale grid".into()));
    }
    let spec = *ft[0].spec();
    let conv = ft
        .par_iter()
        .enumerate()
        .map(|(j, f)| if f.is_zero() { Ok(None) } else { eta_convolve_abs(f, scale.t(j), m).map(Some) })
        .collect::<Result<Vec<_>>>()?;
    let k = scale.per_octave() as f64;
    let (lo, hi) = (lower.log2(), upper.log2());
    let weights = scale.weights();
    Ok((0..scale.len())
        .map(|i| {
            let mut acc = vec![0.0; spec.len()];
            for (j, c) in conv.iter().enumerate() {
                // τ_j / t_i = 2^{(i-j)/K}
                let e = (i as f64 - j as f64) / k;
                if e < lo - 1e-12 || e > hi + 1e-12 {
                    continue;
                }
                if let Some(c) = c {
                    for (a, v) in acc.iter_mut().zip(c.values()) {
                        *a += weights[j] * v.re;
                    }
                }
            }
            GridFunction::from_real(spec, &acc).expect("finite sums")
        })
        .collect())
}

/// `‖(g_t)_t‖ / ‖(f_t)_t‖` for the averaged family of [`averaged_family`].
pub fn check_averaged(
    ft: &[GridFunction],
    p: &ExponentField,
    q: &ExponentField,
    m: f64,
    lower: f64,
    upper: f64,
    scale: &ScaleGrid,
) -> Result<f64> {
    ensure_eta_order(m, q)?;
    let g = averaged_family(ft, m, lower, upper, scale)?;
    Ok(ratio_or_zero(mixed_norm_continuous(&g, p, q, scale)?, mixed_norm_continuous(ft, p, q, scale)?))
}

/// Constants for the two pointwise bounds through the resolution of unity.
#[derive(Clone, Debug, PartialEq)]
pub struct ReproducingOutcome {
    /// `|θ∗f|^r` against the low-pass and `τ ∈ [1/4, 1]` terms.
    pub part_i: Option<f64>,
    /// `|ω_t∗f|^r` against the `τ ∈ [t/4, min(1, 4t)]` terms, per node `t`.
    pub part_ii: Vec<Option<f64>>,
}

impl ReproducingOutcome {
    /// Largest part-(ii) constant over the sweep.
    pub fn part_ii_max(&self) -> Option<f64> {
        self.part_ii.iter().flatten().copied().reduce(f64::max)
    }
}

/// `θ̂`: 1 on `|ξ| ≤ 1`, 0 from `|ξ| = 2`.
fn reproducing_theta(r: f64) -> f64 {
    1.0 - smooth_step(r - 1.0)
}

/// Evaluates both parts with `η_{·,mr}`; requires `m > max(n, n/r)`.
pub fn check_reproducing_bounds(
    f: &GridFunction,
    kernels: &KernelPair,
    scale: &ScaleGrid,
    r: f64,
    m: f64,
) -> Result<ReproducingOutcome> {
    let spec = *f.spec();
    let n = spec.dim() as f64;
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("r must be positive, got {r}")));
    }
    if !(m > n.max(n / r)) {
        return Err(Error::Hypothesis(format!("m = {m} must exceed max(n, n/r) = {}", n.max(n / r))));
    }
    scale.ensure_resolvable(&spec)?;
    let mr = m * r;
    let k = scale.per_octave() as i64;
    let fhat = fourier(f);
    let band = |t: f64| inverse_fourier(&fhat.apply_radial(|x| kernels.phi_hat(t * x)));
    let powered = |g: &GridFunction| -> Result<GridFunction> {
        GridFunction::from_real(spec, &g.values().iter().map(|v| v.norm().powf(r)).collect::<Vec<_>>())
    };
    let eta_of = |t: f64, g: &GridFunction| -> Result<Vec<f64>> {
        Ok(convolve_kernel(&powered(g)?, &eta_hat(t, mr, &spec)?)?.values().iter().map(|v| v.re.max(0.0)).collect())
    };
    let low = inverse_fourier(&fhat.apply_radial(|x| kernels.phi0_hat(x)));
    let low_term = eta_of(1.0, &low)?;

    // η_{τ,mr}∗|φ_τ∗f|^r at every node
    let terms = (0..scale.len())
        .into_par_iter()
        .map(|j| {
            let t = scale.t(j);
            eta_of(t, &band(t))
        })
        .collect::<Result<Vec<_>>>()?;
    let step = scale.step();
    // trapezoid over node indices [a, b]
    let window = |a: usize, b: usize| -> Vec<f64> {
        let mut acc = low_term.clone();
        for (j, term) in terms.iter().enumerate().take(b + 1).skip(a) {
            let w = if a == b {
                0.0
            } else if j == a || j == b {
                0.5 * step
            } else {
                step
            };
            for (s, v) in acc.iter_mut().zip(term) {
                *s += w * v;
            }
        }
        acc
    };
    let lhs = |symbol: &dyn Fn(f64) -> f64| -> Vec<f64> {
        inverse_fourier(&fhat.apply_radial(symbol)).values().iter().map(|v| v.norm().powf(r)).collect()
    };

    let quarter = (2 * k) as usize;
    let part_i = max_ratio(&lhs(&reproducing_theta), &window(0, quarter.min(scale.len() - 1)));

    let omega = |x: f64| BumpShape::Mollifier.eval(x) / BumpShape::Mollifier.eval(1.25);
    let last = scale.len() - 1;
    let part_ii = (0..scale.len())
        .into_par_iter()
        .map(|i| {
            let t = scale.t(i);
            // τ = t/4 is node i + 2K, τ = min(1, 4t) is node max(0, i - 2K)
            let a = (i as i64 - 2 * k).max(0) as usize;
            let b = (i + quarter).min(last);
            max_ratio(&lhs(&|x| omega(t * x)), &window(a, b))
        })
        .collect();
    Ok(ReproducingOutcome { part_i, part_ii })
}

/// `μ̂(ξ) = |ξ|^{M+1} e^{-|ξ|²}`, with `M+1` vanishing moments.
pub fn rychkov_mu_hat(moments: i32) -> impl Fn(f64) -> f64 + Sync {
    move |r: f64| {
        if moments == -1 {
            (-r * r).exp()
        } else {
            r.powi(moments + 1) * (-r * r).exp()
        }
    }
}

/// Per-scale `D(t) = sup_z |μ_t∗ϱ(z)| (1 + |z|)^{N_w}` and the slope of
/// `ln D` against `ln t`.
#[derive(Clone, Debug, PartialEq)]
pub struct RychkovOutcome {
    pub scales: Vec<f64>,
    pub sup: Vec<f64>,
    /// `None` when `ϱ ≡ 0`.
    pub slope: Option<f64>,
}

/// Fits the decay of `D(t)` over the scale nodes with `t ≤ 1/4`, where the
/// power law has taken over.
pub fn check_rychkov_decay(
    mu_hat: impl Fn(f64) -> f64 + Sync,
    rho: &GridFunction,
    moments: i32,
    weight_order: f64,
    scale: &ScaleGrid,
) -> Result<RychkovOutcome> {
    if moments < -1 {
        return Err(Error::InvalidArgument(format!("M must be >= -1, got {moments}")));
    }
    let spec = *rho.spec();
    let weight: Vec<f64> = (0..spec.len()).map(|i| (1.0 + spec.coordinate_norm(i)).powf(weight_order)).collect();
    let scales: Vec<f64> = (0..scale.len()).map(|j| scale.t(j)).collect();
    let sup: Vec<f64> = scales
        .par_iter()
        .map(|&t| {
            apply_multiplier(rho, |x| mu_hat(t * x))
                .values()
                .iter()
                .zip(&weight)
                .map(|(v, w)| v.norm() * w)
                .fold(0.0, f64::max)
        })
        .collect();
    let pts: Vec<(f64, f64)> =
        scales.iter().zip(&sup).filter(|(&t, &d)| t <= 0.25 && d > 0.0).map(|(t, d)| (t.ln(), d.ln())).collect();
    let slope = if rho.is_zero() || pts.len() < 2 { None } else { Some(least_squares_slope(&pts)) };
    Ok(RychkovOutcome { scales, sup, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calderon::build_continuous_pair;
    use crate::exponent::ExponentFamily;
    use crate::grid::GridSpec;
    use num_complex::Complex64;

    fn spec() -> GridSpec {
        GridSpec::new(1, 256, 8.0).unwrap()
    }

    #[test]
    fn transfer_constant_alpha_is_one() {
        let a = ExponentField::constant(spec(), 0.7).unwrap();
        let out = check_transfer(&a, 0.25, 2.0, 1.0).unwrap();
        assert_eq!(out.constant, 1.0);
        assert!(out.hypothesis_met);
    }

    #[test]
    fn transfer_without_decay_grows() {
        let s = spec();
        let a = ExponentFamily::Sine { base: 0.5, amplitude: 0.3, frequency: 1.0 }.sample(&s).unwrap();
        let coarse = check_transfer(&a, 1.0, 2.0, 0.0).unwrap();
        let fine = check_transfer(&a, 1.0 / 16.0, 2.0, 0.0).unwrap();
        assert!(!coarse.hypothesis_met);
        assert!(fine.constant >= 3.0 * coarse.constant);
    }

    #[test]
    fn dzw_equality_for_equal_constant_exponents() {
        let s = spec();
        let p = ExponentField::constant(s, 2.0).unwrap();
        let f = GridFunction::from_real_fn(s, |x| 3.0 * (-x[0] * x[0]).exp());
        let out = check_dzw(&f, &p, &p).unwrap();
        assert!(out.applicable && out.holds);
        assert!((out.constant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hardy_zero_is_zero() {
        let s = ScaleGrid::default_grid();
        assert_eq!(check_hardy(&vec![0.0; s.len()], 1.0, &s).unwrap(), 0.0);
    }

    #[test]
    fn rtrick_zero_is_vacuous() {
        assert_eq!(check_rtrick(&GridFunction::zeros(spec()), 1.0, 1.0, 2.0).unwrap(), None);
    }

    #[test]
    fn eta_order_hypothesis() {
        let s = spec();
        let p = ExponentField::constant(s, 2.0).unwrap();
        let f = vec![GridFunction::from_real_fn(s, |x| (-x[0] * x[0]).exp())];
        assert!(matches!(check_eta_conv_discrete(&f, &p, &p, 1.0), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn averaged_support_bookkeeping() {
        let s = spec();
        let scale = ScaleGrid::new(4, 3).unwrap();
        let j0 = 6;
        let ft: Vec<GridFunction> =
            (0..scale.len())
                .map(|j| {
                    if j == j0 {
                        GridFunction::from_real_fn(s, |x| (-x[0] * x[0]).exp())
                    } else {
                        GridFunction::zeros(s)
                    }
                })
                .collect();
        let g = averaged_family(&ft, 3.0, 0.25, 4.0, &scale).unwrap();
        let tau = scale.t(j0);
        for (i, gi) in g.iter().enumerate() {
            let t = scale.t(i);
            let inside = tau >= 0.25 * t * (1.0 - 1e-12) && tau <= 4.0 * t * (1.0 + 1e-12);
            assert_eq!(!gi.is_zero(), inside, "node {i}");
        }
    }

    #[test]
    fn reproducing_bounds_vacuous_for_zero() {
        let s = spec();
        let scale = ScaleGrid::new(8, 3).unwrap();
        let k = build_continuous_pair(&s, &scale).unwrap();
        let out = check_reproducing_bounds(&GridFunction::zeros(s), &k, &scale, 1.0, 2.0).unwrap();
        assert_eq!(out.part_i, None);
        assert!(out.part_ii.iter().all(Option::is_none));
    }

    #[test]
    fn rychkov_zero_skips_fit() {
        let out =
            check_rychkov_decay(rychkov_mu_hat(1), &GridFunction::zeros(spec()), 1, 2.0, &ScaleGrid::default_grid())
                .unwrap();
        assert_eq!(out.slope, None);
        assert!(out.sup.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn oracles_are_scale_invariant() {
        let s = spec();
        let f = GridFunction::from_fn(s, |x| Complex64::from_polar((-x[0] * x[0] / 2.0).exp(), 2.0 * x[0]));
        let f7 = f.scaled(Complex64::new(7.0, 0.0));
        let a = check_rtrick(&f, 2.0, 0.5, 3.0).unwrap().unwrap();
        let b = check_rtrick(&f7, 2.0, 0.5, 3.0).unwrap().unwrap();
        assert!((a / b - 1.0).abs() < 1e-10);
    }
}
