use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

/// Entries must keep at most this fraction of their mass near the boundary.
pub const MAX_BOUNDARY_MASS: f64 = 1e-10;

/// Number of seeded random entries in the standard corpus.
pub const RANDOM_ENTRIES: usize = 2;

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub function: GridFunction,
}

/// Named test functions on a common grid.
#[derive(Clone, Debug)]
pub struct Corpus {
    entries: Vec<CorpusEntry>,
}

/// Summary row for `corpus list`.
#[derive(Clone, Debug, Serialize)]
pub struct EntrySummary {
    pub name: String,
    pub l2_norm: f64,
    pub max_abs: f64,
    pub boundary_mass: f64,
}

fn radius_sqr(x: [f64; 2]) -> f64 {
    x[0] * x[0] + x[1] * x[1]
}

/// `e^{-|x|²/2}`.
pub fn gaussian(spec: GridSpec) -> GridFunction {
    GridFunction::from_real_fn(spec, |x| (-0.5 * radius_sqr(x)).exp())
}

/// `e^{i 2^j x₁} e^{-|x|²/2}`.
pub fn modulated(spec: GridSpec, j: i32) -> GridFunction {
    let w = (j as f64).exp2();
    GridFunction::from_fn(spec, |x| Complex64::from_polar((-0.5 * radius_sqr(x)).exp(), w * x[0]))
}

fn random_packets(spec: GridSpec, rng: &mut ChaCha8Rng) -> GridFunction {
    let terms: Vec<(Complex64, [f64; 2], f64, f64)> = (0..4)
        .map(|_| {
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let centre = [rng.random_range(-2.0..2.0), if spec.dim() == 2 { rng.random_range(-2.0..2.0) } else { 0.0 }];
            let width = rng.random_range(0.7..1.2);
            let freq = rng.random_range(-6.0..6.0);
            (c, centre, width, freq)
        })
        .collect();
    GridFunction::from_fn(spec, |x| {
        terms
            .iter()
            .map(|&(c, x0, w, k)| {
                let d = [x[0] - x0[0], x[1] - x0[1]];
                c * Complex64::from_polar((-radius_sqr(d) / (2.0 * w * w)).exp(), k * x[0])
            })
            .sum()
    })
}

impl Corpus {
    /// Builds a corpus, rejecting empty input and entries with boundary
    /// mass above [`MAX_BOUNDARY_MASS`].
    pub fn new(entries: Vec<CorpusEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let spec = *entries[0].function.spec();
        for e in &entries {
            e.function.spec().ensure_same(&spec)?;
            let mass = e.function.boundary_mass();
            if mass > MAX_BOUNDARY_MASS {
                return Err(Error::Config(format!(
                    "corpus entry `{}` has boundary mass {mass:.3e}; enlarge the torus",
                    e.name
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Gaussians, two dilates, three modulations, a Mexican hat, a wave packet
    /// near frequency 7 and seeded random packet sums, all multiplied by
    /// `factor`.
    pub fn standard(spec: GridSpec, seed: u64, factor: f64) -> Result<Self> {
        let c = Complex64::new(factor, 0.0);
        let mut entries = vec![
            ("gauss".to_string(), gaussian(spec)),
            ("gauss-dilate-down".into(), GridFunction::from_real_fn(spec, |x| (-0.25 * radius_sqr(x)).exp())),
            ("gauss-dilate-up".into(), GridFunction::from_real_fn(spec, |x| (-radius_sqr(x)).exp())),
        ];
        for j in 1..=3 {
            entries.push((format!("modulated-{j}"), modulated(spec, j)));
        }
        entries.push((
            "mexican-hat".into(),
            GridFunction::from_real_fn(spec, |x| (1.0 - radius_sqr(x)) * (-0.5 * radius_sqr(x)).exp()),
        ));
        entries.push((
            "packet".into(),
            GridFunction::from_fn(spec, |x| Complex64::from_polar((-radius_sqr(x) / 4.5).exp(), 7.0 * x[0])),
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..RANDOM_ENTRIES {
            entries.push((format!("random-{i}"), random_packets(spec, &mut rng)));
        }
        Self::new(entries.into_iter().map(|(name, f)| CorpusEntry { name, function: f.scaled(c) }).collect())
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn spec(&self) -> &GridSpec {
        self.entries[0].function.spec()
    }

    pub fn summaries(&self) -> Vec<EntrySummary> {
        self.entries
            .iter()
            .map(|e| EntrySummary {
                name: e.name.clone(),
                l2_norm: e.function.l2_norm(),
                max_abs: e.function.max_abs(),
                boundary_mass: e.function.boundary_mass(),
            })
            .collect()
    }
}
