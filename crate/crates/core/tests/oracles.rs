use num_complex::Complex64;
use varbesov::besov::{continuous_coefficients, dyadic_blocks, peetre_maximal, peetre_sweep, SweepMode};
use varbesov::calderon::{build_dyadic, default_v_max, BumpShape, KernelPair};
use varbesov::exponent::ExponentField;
use varbesov::grid::{GridFunction, GridSpec, ScaleGrid};
use varbesov::harness::Corpus;
use varbesov::lemmas::hardy_integrals;
use varbesov::modular_norms::mixed_norm_continuous;

fn l2_rel_error(a: &GridFunction, b: &GridFunction) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm()
}

#[test]
fn calderon_reconstruction_recovers_corpus() {
    let spec = GridSpec::default_1d();
    let scale = ScaleGrid::default_grid();
    let corpus = Corpus::standard(spec, 7, 1.0).unwrap();
    for shape in [BumpShape::Mollifier, BumpShape::MuEta] {
        let k = KernelPair::with_shape(&spec, &scale, shape).unwrap();
        for e in corpus.entries() {
            let (low, bands) = continuous_coefficients(&e.function, &k, &scale);
            let mut sum = low;
            for (j, b) in bands.iter().enumerate() {
                sum = sum.add(&b.scaled(Complex64::new(scale.weight(j), 0.0))).unwrap();
            }
            let err = l2_rel_error(&sum, &e.function);
            assert!(err < 1e-4, "{} {}: {err:e}", shape.label(), e.name);
        }
    }
}

#[test]
fn dyadic_blocks_sum_to_identity() {
    // in 2D only the entries whose spectrum sits below 2^{v_max} = 8
    for (spec, entries) in [
        (GridSpec::default_1d(), (0..10).collect::<Vec<_>>()),
        (GridSpec::new(2, 256, 16.0).unwrap(), vec![0, 1, 2, 6]),
    ] {
        let d = build_dyadic(&spec, default_v_max(&spec)).unwrap();
        let corpus = Corpus::standard(spec, 7, 1.0).unwrap();
        for i in entries {
            let e = &corpus.entries()[i];
            let blocks = dyadic_blocks(&e.function, &d);
            let sum = blocks.iter().skip(1).fold(blocks[0].clone(), |acc, b| acc.add(b).unwrap());
            let err = l2_rel_error(&sum, &e.function);
            assert!(err < 1e-8, "{}: {err:e}", e.name);
        }
    }
}

fn packet(spec: GridSpec) -> GridFunction {
    GridFunction::from_fn(spec, |x| {
        Complex64::from_polar((-x[0] * x[0] / 2.0).exp(), 3.0 * x[0])
            + Complex64::new(0.5, -0.3) * Complex64::from_polar((-(x[0] - 1.5).powi(2)).exp(), -5.0 * x[0])
    })
}

/// The grid sup of a real band at scale `t` samples a carrier of frequency up
/// to `2/t`, so it is checked where the grid has ten points per scale length.
#[test]
fn peetre_grid_sup_is_refinement_stable() {
    let coarse = GridSpec::new(1, 2048, 16.0).unwrap();
    let fine = coarse.refined();
    let scale = ScaleGrid::default_grid();
    let k = KernelPair::with_shape(&coarse, &scale, BumpShape::Mollifier).unwrap();
    let sine = |spec: GridSpec| {
        ExponentField::from_fn(spec, |x| 0.5 + 0.3 * (4.0 * std::f64::consts::PI * x[0] / 16.0).sin()).unwrap()
    };
    let (cc, cf) = (Corpus::standard(coarse, 7, 1.0).unwrap(), Corpus::standard(fine, 7, 1.0).unwrap());
    let nodes: Vec<usize> = (0..scale.len()).step_by(3).filter(|&j| scale.t(j) >= 10.0 * coarse.spacing()).collect();
    assert!(nodes.len() >= 7);
    for i in [0, 2, 4, 6, 8] {
        let (fc, ff) = (&cc.entries()[i].function, &cf.entries()[i].function);
        let floor = 1e-8 * fc.max_abs();
        for &j in &nodes {
            let t = scale.t(j);
            for a in [1.5, 3.0] {
                let mc = peetre_maximal(fc, t, a, &sine(coarse), |r| k.phi_hat(r)).unwrap();
                let mf = peetre_maximal(ff, t, a, &sine(fine), |r| k.phi_hat(r)).unwrap();
                for (x, v) in mc.values().iter().enumerate() {
                    let w = mf.values()[2 * x].re;
                    // below the floor both values are FFT roundoff
                    if w > floor {
                        assert!((v.re - w).abs() < 0.01 * w, "{} t={t} a={a}: {} vs {w}", cc.entries()[i].name, v.re);
                    }
                }
            }
        }
    }
}

#[test]
fn pruned_sweep_equals_exhaustive() {
    for spec in [GridSpec::new(1, 256, 16.0).unwrap(), GridSpec::new(2, 32, 8.0).unwrap()] {
        let g: Vec<f64> = (0..spec.len())
            .map(|i| {
                let x = spec.coordinate(i);
                (-(x[0] - 1.0).powi(2) - x[1] * x[1]).exp() * (1.0 + 0.5 * (3.0 * x[0]).cos()).abs()
            })
            .collect();
        for t in [1.0, 0.3] {
            for a in [0.5, 2.0, 6.0] {
                let p = peetre_sweep(&g, &spec, t, a, SweepMode::Pruned).unwrap();
                let e = peetre_sweep(&g, &spec, t, a, SweepMode::Exhaustive).unwrap();
                assert_eq!(p, e);
            }
        }
    }
}

#[test]
fn peetre_large_exponent_is_pointwise() {
    let spec = GridSpec::default_1d();
    let scale = ScaleGrid::default_grid();
    let k = KernelPair::with_shape(&spec, &scale, BumpShape::Mollifier).unwrap();
    let alpha = ExponentField::constant(spec, 0.5).unwrap();
    let f = packet(spec);
    let t = 0.25;
    let m = peetre_maximal(&f, t, 1e3, &alpha, |r| k.phi_hat(r)).unwrap();
    let (_, bands) = continuous_coefficients(&f, &k, &ScaleGrid::new(8, 2).unwrap());
    // node 16 of an 8-per-octave grid is t = 1/4
    let point: Vec<f64> = bands[16].values().iter().map(|v| v.norm() * t.powf(-0.5)).collect();
    let peak = point.iter().copied().fold(0.0, f64::max);
    for (v, p) in m.values().iter().zip(&point) {
        // the evaluator works with log magnitudes, so equality holds up to rounding
        assert!(v.re >= *p * (1.0 - 1e-12));
        assert!((v.re - p).abs() <= 1e-6 * peak, "{} vs {p}", v.re);
    }
}

/// Closed form for `ε_t = t^σ` on `[t₀, 1]`, the same truncation as the grid.
fn hardy_power_ratio(sigma: f64, s: f64, t0: f64) -> f64 {
    let e = (1.0 - t0.powf(sigma)) / sigma;
    let eta = (e - (1.0 - t0.powf(s)) / s) / (s - sigma);
    let delta = (e - (t0.powf(sigma) - t0.powf(s + sigma)) / s) / (s + sigma);
    (eta + delta) / e
}

#[test]
fn hardy_matches_power_closed_form() {
    let scale = ScaleGrid::default_grid();
    for sigma in [0.1, 0.5, 1.0, 1.7] {
        for gap in [0.2, 0.5, 1.5] {
            let s = sigma + gap;
            let eps: Vec<f64> = (0..scale.len()).map(|j| scale.t(j).powf(sigma)).collect();
            let got = hardy_integrals(&eps, s, &scale).unwrap().constant();
            let want = hardy_power_ratio(sigma, s, scale.t_min());
            assert!((got / want - 1.0).abs() < 0.02, "σ={sigma} s={s}: {got} vs {want}");
        }
    }
}

#[test]
fn mixed_continuous_norm_converges_in_k() {
    let spec = GridSpec::default_1d();
    let corpus = Corpus::standard(spec, 7, 1.0).unwrap();
    let sine = |b: f64, a: f64| {
        ExponentField::from_fn(spec, move |x| b + a * (4.0 * std::f64::consts::PI * x[0] / 16.0).sin()).unwrap()
    };
    let (p, q) = (sine(2.0, 0.5), sine(1.5, 0.4));
    let norm = |f: &GridFunction, scale: ScaleGrid| {
        let k = KernelPair::with_shape(&spec, &scale, BumpShape::Mollifier).unwrap();
        let (_, bands) = continuous_coefficients(f, &k, &scale);
        mixed_norm_continuous(&bands, &p, &q, &scale).unwrap()
    };
    for e in corpus.entries() {
        let base = norm(&e.function, ScaleGrid::new(8, 5).unwrap());
        let refined = norm(&e.function, ScaleGrid::new(16, 5).unwrap());
        assert!((refined / base - 1.0).abs() < 0.01, "{}: {base} vs {refined}", e.name);
    }
}
