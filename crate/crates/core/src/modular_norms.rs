//! Variable-exponent modulars, the Luxemburg quasi-norm, and the mixed
//! `ℓ^{q(·)}(L^{p(·)})` quasi-norms over discrete and continuous scale indices.
//!
//! Everything is solved in log space. For a family `(f_v)` and a trial level
//! `μ = e^s`, each inner term `λ_v(μ) = ‖|f_v/μ|^{q(·)}‖_{p(·)/q(·)}` is the root
//! of `ln ρ(u) = 0` with
//!
//! ```text
//! ρ(u) = h^n Σ_x exp(e_x (ℓ_x - u)),   ℓ_x = q(x)(ln|f_v(x)| - s),   e_x = p(x)/q(x),
//! ```
//!
//! and `λ_v = e^u`. `ln ρ` is convex and decreasing in `u`, so Newton started to
//! the left of the root climbs monotonically onto it. Points with `p(x) = ∞`
//! only impose `u ≥ ℓ_x`. The outer level solves `Σ_v w_v λ_v(e^s) = 1` by
//! safeguarded Newton inside a bracket derived from the slope bounds
//! `-q⁺ ≤ d ln λ_v / ds ≤ -q⁻`.
//!
//! Luxemburg norms use the same machinery with `q ≡ 1` and a single term.

use crate::error::{Error, Result};
use crate::exponent::{omega_unchecked, ExponentField};
use crate::grid::{GridFunction, ScaleGrid};

/// Every solved level is padded by this much in `ln λ` so that the modular at
/// the returned norm is `≤ 1` despite rounding.
const LEVEL_PAD: f64 = 1e-12;
const MAX_ITERATIONS: usize = 200;

/// A modular value in `[0, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ModularValue(f64);

impl ModularValue {
    pub fn new(value: f64) -> Result<Self> {
        if value >= 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidArgument(format!("modular must be nonnegative, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

/// `ln|f(x)|`, `-∞` where `f` vanishes.
pub fn log_magnitudes(f: &GridFunction) -> Vec<f64> {
    f.values().iter().map(|v| v.norm().ln()).collect()
}

/// `ϱ_{p(·)}(f) = ∫ ω_{p(x)}(|f(x)|) dx` by the torus trapezoid rule.
pub fn modular_lp(f: &GridFunction, p: &ExponentField) -> Result<ModularValue> {
    f.spec().ensure_same(p.spec())?;
    p.ensure_p0("p")?;
    let sum: f64 = f.values().iter().zip(p.samples()).map(|(v, &px)| omega_unchecked(px, v.norm())).sum();
    Ok(ModularValue(sum * f.spec().cell_volume()))
}

/// `‖f‖_{p(·)} = inf{λ > 0 : ϱ_{p(·)}(f/λ) ≤ 1}`; zero for `f ≡ 0`.
pub fn luxemburg_norm(f: &GridFunction, p: &ExponentField) -> Result<f64> {
    f.spec().ensure_same(p.spec())?;
    p.ensure_p0("p")?;
    Ok(luxemburg_log(&log_magnitudes(f), p.samples(), f.spec().cell_volume()))
}

/// `‖|f|^{q(·)}‖_{p(·)/q(·)}`, the per-index term of the mixed modular.
pub fn power_norm(f: &GridFunction, p: &ExponentField, q: &ExponentField) -> Result<f64> {
    check_mixed_exponents(f.spec(), p, q)?;
    let a = log_magnitudes(f);
    Ok(solve_inner(&a, p.samples(), q.samples(), 0.0, f.spec().cell_volume()).map_or(0.0, |lvl| lvl.u.exp()))
}

/// `‖(f_v)_v‖_{ℓ^{q(·)}(L^{p(·)})}` for a finite sequence; requires `q⁺ < ∞`.
pub fn mixed_norm_discrete(fv: &[GridFunction], p: &ExponentField, q: &ExponentField) -> Result<f64> {
    let Some(first) = fv.first() else {
        return Ok(0.0);
    };
    for f in fv {
        check_mixed_exponents(f.spec(), p, q)?;
    }
    let logs: Vec<Vec<f64>> = fv.iter().map(log_magnitudes).collect();
    let weights = vec![1.0; fv.len()];
    Ok(mixed_norm_log(&logs, &weights, p.samples(), q.samples(), first.spec().cell_volume()))
}

/// The continuous-index mixed norm: `Σ_v` is replaced by the `dt/t`
/// quadrature of the scale grid. `ft[j]` is the function at `t_j`.
pub fn mixed_norm_continuous(ft: &[GridFunction], p: &ExponentField, q: &ExponentField, s: &ScaleGrid) -> Result<f64> {
    if ft.len() != s.len() {
        return Err(Error::InvalidArgument(format!(
            "scale family has {} members but the scale grid has {} nodes",
            ft.len(),
            s.len()
        )));
    }
    for f in ft {
        check_mixed_exponents(f.spec(), p, q)?;
    }
    let logs: Vec<Vec<f64>> = ft.iter().map(log_magnitudes).collect();
    Ok(mixed_norm_log(&logs, &s.weights(), p.samples(), q.samples(), ft[0].spec().cell_volume()))
}

pub(crate) fn check_mixed_exponents(spec: &crate::grid::GridSpec, p: &ExponentField, q: &ExponentField) -> Result<()> {
    spec.ensure_same(p.spec())?;
    spec.ensure_same(q.spec())?;
    p.ensure_p0("p")?;
    q.ensure_p0("q")?;
    if !q.range_max().is_finite() {
        return Err(Error::Hypothesis("mixed modular requires q⁺ < ∞; use the supremum branch for q ≡ ∞".into()));
    }
    Ok(())
}

/// Luxemburg norm from log magnitudes.
pub(crate) fn luxemburg_log(a: &[f64], p: &[f64], cell: f64) -> f64 {
    let ones = vec![1.0; a.len()];
    solve_inner(a, p, &ones, 0.0, cell).map_or(0.0, |lvl| lvl.u.exp())
}

/// Mixed norm of a weighted family given by log magnitudes.
pub(crate) fn mixed_norm_log(family: &[Vec<f64>], weights: &[f64], p: &[f64], q: &[f64], cell: f64) -> f64 {
    let members: Vec<(&[f64], f64)> = family
        .iter()
        .zip(weights)
        .filter(|(a, &w)| w > 0.0 && a.iter().any(|v| v.is_finite()))
        .map(|(a, &w)| (a.as_slice(), w))
        .collect();
    if members.is_empty() {
        return 0.0;
    }
    let q_min = q.iter().copied().fold(f64::INFINITY, f64::min);
    let q_max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    // (ln G(s), d ln G / ds)
    let outer = |s: f64| -> (f64, f64) {
        let levels: Vec<(f64, f64)> = members
            .iter()
            .filter_map(|(a, w)| solve_inner(a, p, q, s, cell).map(|lvl| (lvl.u + w.ln(), lvl.slope)))
            .collect();
        let m = levels.iter().map(|l| l.0).fold(f64::NEG_INFINITY, f64::max);
        let (mut sum, mut dsum) = (0.0, 0.0);
        for (z, slope) in &levels {
            let e = (z - m).exp();
            sum += e;
            dsum += e * slope;
        }
        (m + sum.ln(), dsum / sum)
    };

    if q_min == q_max {
        // λ_v(e^s) = e^{-qs} λ_v(1): the outer equation is explicit
        let (g0, _) = outer(0.0);
        return (g0 / q_min + LEVEL_PAD).exp();
    }

    let (g0, d0) = outer(0.0);
    let (mut lo, mut hi) = if g0 > 0.0 { (0.0, g0 / q_min) } else { (g0 / q_min, 0.0) };
    let mut s = -g0 / d0;
    if !(s > lo && s < hi) {
        s = 0.5 * (lo + hi);
    }
    for _ in 0..MAX_ITERATIONS {
        let (g, d) = outer(s);
        if g > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        if hi - lo <= 1e-14 * (1.0 + s.abs()) || g.abs() <= 1e-15 {
            break;
        }
        let mut next = s - g / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        s = next;
    }
    // step right until the modular is certainly ≤ 1
    let mut step = 1e-15 * (1.0 + s.abs());
    let mut candidate = s.min(hi);
    while outer(candidate).0 > 0.0 && candidate < hi {
        candidate = (candidate + step).min(hi);
        step *= 4.0;
    }
    let _ = q_max;
    (candidate + LEVEL_PAD).exp()
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct InnerLevel {
    /// `ln λ`
    pub u: f64,
    /// `d u / d s`
    pub slope: f64,
}

/// Solves for `ln ‖|f/e^s|^{q}‖_{p/q}` given `a = ln|f|`; `None` for `f ≡ 0`.
pub(crate) fn solve_inner(a: &[f64], p: &[f64], q: &[f64], s: f64, cell: f64) -> Option<InnerLevel> {
    let ln_cell = cell.ln();
    // finite-exponent terms: (level ℓ, exponent e, q)
    let mut terms: Vec<(f64, f64, f64)> = Vec::with_capacity(a.len());
    let mut floor = f64::NEG_INFINITY;
    let mut floor_q = 1.0;
    for ((&ax, &px), &qx) in a.iter().zip(p).zip(q) {
        if !ax.is_finite() {
            continue;
        }
        let level = qx * (ax - s);
        if px.is_infinite() {
            if level > floor {
                floor = level;
                floor_q = qx;
            }
        } else {
            terms.push((level, px / qx, qx));
        }
    }
    if terms.is_empty() {
        return floor.is_finite().then_some(InnerLevel { u: floor + LEVEL_PAD, slope: -floor_q });
    }

    let e_min = terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    // (ln ρ(u), Σ e T, Σ e q T, Σ T) with T scaled by the max exponent
    let eval = |u: f64| {
        let m = terms.iter().map(|&(l, e, _)| e * (l - u)).fold(f64::NEG_INFINITY, f64::max);
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &(l, e, qx) in &terms {
            let t = (e * (l - u) - m).exp();
            s0 += t;
            s1 += e * t;
            s2 += e * qx * t;
        }
        (m + ln_cell + s0.ln(), s1 / s0, s2 / s0)
    };

    let mut u = terms.iter().map(|&(l, e, _)| l + ln_cell / e).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..MAX_ITERATIONS {
        let (f, mean_e, _) = eval(u);
        let du = f / mean_e;
        u += du;
        if du.abs() <= 1e-15 * (1.0 + u.abs()) {
            break;
        }
    }
    for _ in 0..8 {
        let (f, _, _) = eval(u);
        if f <= 0.0 {
            break;
        }
        u += f / e_min + f64::EPSILON * (1.0 + u.abs());
    }

    if floor > u {
        return Some(InnerLevel { u: floor + LEVEL_PAD, slope: -floor_q });
    }
    let (_, mean_e, mean_eq) = eval(u);
    Some(InnerLevel { u: u + LEVEL_PAD, slope: -mean_eq / mean_e })
}
