use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{GridFunction, GridSpec, Spectrum, TWO_PI};
use crate::error::Result;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Unnormalized multi-dimensional DFT in place.
fn dft(spec: &GridSpec, data: &mut [Complex64], inverse: bool) {
    let n = spec.points();
    let fft = plan(n, inverse);
    if spec.dim() == 1 {
        fft.process(data);
        return;
    }
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            column[r] = data[r * n + c];
        }
        fft.process(&mut column);
        for r in 0..n {
            data[r * n + c] = column[r];
        }
    }
}

/// `(-1)^{k_1 + ... + k_n}`: the phase from the grid starting at `x = -L`.
fn phase(spec: &GridSpec, idx: usize) -> f64 {
    let [a, b] = spec.split(idx);
    if (a + b) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Forward transform approximating `(2π)^{-n/2} ∫ e^{-ix·ξ} f(x) dx` at `ξ_k`.
pub fn fourier(f: &GridFunction) -> Spectrum {
    let spec = *f.spec();
    let mut data = f.values().to_vec();
    dft(&spec, &mut data, false);
    let scale = spec.cell_volume() * TWO_PI.powf(-(spec.dim() as f64) / 2.0);
    for (k, v) in data.iter_mut().enumerate() {
        *v *= scale * phase(&spec, k);
    }
    Spectrum { spec, values: data }
}

/// Exact inverse of [`fourier`].
pub fn inverse_fourier(s: &Spectrum) -> GridFunction {
    let spec = *s.spec();
    let mut data: Vec<Complex64> = s.values().iter().enumerate().map(|(k, v)| v * phase(&spec, k)).collect();
    dft(&spec, &mut data, true);
    let scale = TWO_PI.powf(spec.dim() as f64 / 2.0) / (spec.cell_volume() * spec.len() as f64);
    for v in &mut data {
        *v *= scale;
    }
    GridFunction::from_parts_unchecked(spec, data)
}

/// Convolution with a kernel given by its transform: `𝓕^{-1}[(2π)^{n/2} f̂ k̂]`.
pub fn convolve_kernel(f: &GridFunction, khat: &Spectrum) -> Result<GridFunction> {
    f.spec().ensure_same(khat.spec())?;
    let fhat = fourier(f);
    let factor = TWO_PI.powf(f.spec().dim() as f64 / 2.0);
    let values = fhat.values().iter().zip(khat.values()).map(|(a, b)| a * b * factor).collect();
    Ok(inverse_fourier(&Spectrum { spec: *f.spec(), values }))
}
