use num_complex::Complex64;

use super::{fourier, GridFunction, GridSpec, Spectrum};
use crate::error::{Error, Result};

/// Image copies summed explicitly on each side before the far-field correction.
const IMAGES_1D: i64 = 64;
const IMAGES_2D: i64 = 6;

/// `η_{t,m}(x) = t^{-n} (1 + |x|/t)^{-m}` at `|x| = r`.
pub fn eta_value(t: f64, m: f64, r: f64, dim: usize) -> f64 {
    t.powi(-(dim as i32)) * (1.0 + r / t).powf(-m)
}

/// `‖η_{t,m}‖₁`, independent of `t`.
pub fn eta_l1_norm(m: f64, dim: usize) -> f64 {
    match dim {
        1 => 2.0 / (m - 1.0),
        _ => 2.0 * std::f64::consts::PI / ((m - 1.0) * (m - 2.0)),
    }
}

fn validate(t: f64, m: f64, dim: usize) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidArgument(format!("eta scale must be positive, got {t}")));
    }
    if !(m > dim as f64) {
        return Err(Error::InvalidArgument(format!("eta_(t,m) is not integrable for m = {m} <= n = {dim}")));
    }
    Ok(())
}

/// Periodized `η_{t,m}` on the grid, each sample the average over its cell.
///
/// Cell averages make `integrate` reproduce `‖η_{t,m}‖₁` even when `t` is
/// comparable to the grid spacing, where point samples of the cusp at the
/// origin are badly biased.
pub fn eta_samples(t: f64, m: f64, spec: &GridSpec) -> Result<GridFunction> {
    validate(t, m, spec.dim())?;
    let values = match spec.dim() {
        1 => periodized_1d(t, m, spec),
        _ => periodized_2d(t, m, spec),
    };
    Ok(GridFunction::from_parts_unchecked(*spec, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect()))
}

/// Frequency-side `η_{t,m}`, usable with [`super::convolve_kernel`].
pub fn eta_hat(t: f64, m: f64, spec: &GridSpec) -> Result<Spectrum> {
    Ok(fourier(&eta_samples(t, m, spec)?))
}

fn periodized_1d(t: f64, m: f64, spec: &GridSpec) -> Vec<f64> {
    let h = spec.spacing();
    let period = 2.0 * spec.half_period();
    // ∫_0^y η_{t,m}, odd in y
    let antiderivative = |y: f64| y.signum() * (1.0 - (1.0 + y.abs() / t).powf(1.0 - m)) / (m - 1.0);
    let far = (2 * IMAGES_1D + 1) as f64 * spec.half_period() / t;
    let tail = 2.0 * (1.0 + far).powf(1.0 - m) / (m - 1.0) / period;
    (0..spec.points())
        .map(|i| {
            let x = spec.axis_coordinate(i);
            let mut sum = 0.0;
            for k in -IMAGES_1D..=IMAGES_1D {
                let c = x + k as f64 * period;
                sum += antiderivative(c + 0.5 * h) - antiderivative(c - 0.5 * h);
            }
            sum / h + tail
        })
        .collect()
}

fn periodized_2d(t: f64, m: f64, spec: &GridSpec) -> Vec<f64> {
    let h = spec.spacing();
    let period = 2.0 * spec.half_period();
    let eta = |a: f64, b: f64| eta_value(t, m, a.hypot(b), 2);
    let (nodes6, weights6) = gauss_legendre(6);
    let (nodes8, weights8) = gauss_legendre(8);

    let cell_average = |cx: f64, cy: f64, half: f64, nodes: &[f64], weights: &[f64]| {
        let mut acc = 0.0;
        for (xa, wa) in nodes.iter().zip(weights) {
            for (xb, wb) in nodes.iter().zip(weights) {
                acc += wa * wb * eta(cx + half * xa, cy + half * xb);
            }
        }
        acc / 4.0
    };

    let side = (2 * IMAGES_2D + 1) as f64 * period;
    let radius = side / std::f64::consts::PI.sqrt();
    let u = radius / t;
    let tail_mass =
        2.0 * std::f64::consts::PI * ((1.0 + u).powf(2.0 - m) / (m - 2.0) - (1.0 + u).powf(1.0 - m) / (m - 1.0));
    let tail = tail_mass / (period * period);

    (0..spec.len())
        .map(|idx| {
            let [x, y] = spec.coordinate(idx);
            let central = if x == 0.0 && y == 0.0 {
                // the cusp sits at the cell centre: integrate quadrant by quadrant
                let q = 0.25 * h;
                [(-q, -q), (-q, q), (q, -q), (q, q)]
                    .iter()
                    .map(|&(a, b)| cell_average(a, b, q, &nodes8, &weights8))
                    .sum::<f64>()
                    / 4.0
            } else {
                cell_average(x, y, 0.5 * h, &nodes6, &weights6)
            };
            let mut images = 0.0;
            for a in -IMAGES_2D..=IMAGES_2D {
                for b in -IMAGES_2D..=IMAGES_2D {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    images += eta(x + a as f64 * period, y + b as f64 * period);
                }
            }
            central + images + tail
        })
        .collect()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}
