//! Variable exponents `α(·)`, `p(·)`, `q(·)` sampled on the torus grid.
//!
//! On a bounded torus the log-Hölder decay condition is vacuous, so the
//! locally log-Hölder class and the global class coincide. The decay limit
//! and constant are still computed and stored, but nothing checks them.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Above this many grid pairs `estimate_clog` samples pairs instead of
/// enumerating them.
const BRUTE_FORCE_PAIRS: usize = 1 << 24;
const SAMPLED_PAIRS: usize = 100_000;

/// `ω_p(t)`: `t^p` for finite `p > 0`; for `p = ∞`, `0` on `[0, 1]` and `∞`
/// beyond.
pub fn omega(p: f64, t: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("exponent must be positive, got {p}")));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("omega argument must be nonnegative, got {t}")));
    }
    Ok(omega_unchecked(p, t))
}

#[inline]
pub(crate) fn omega_unchecked(p: f64, t: f64) -> f64 {
    if p.is_infinite() {
        if t <= 1.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else if t == 0.0 {
        0.0
    } else {
        t.powf(p)
    }
}

/// A sampled exponent function with its range and log-Hölder data.
#[derive(Debug, Clone)]
pub struct ExponentField {
    spec: GridSpec,
    samples: Vec<f64>,
    range_min: f64,
    range_max: f64,
    decay_limit: f64,
    clog_decay: f64,
    clog_local: OnceLock<f64>,
}

impl PartialEq for ExponentField {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.samples == other.samples
    }
}

impl ExponentField {
    /// Accepts any samples that are not NaN and not `-∞`; `+∞` is allowed
    /// (e.g. `p = ∞` on part of the torus).
    pub fn new(spec: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != spec.len() {
            return Err(Error::InvalidArgument(format!(
                "exponent field needs {} samples, got {}",
                spec.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::InvalidArgument("exponent samples must not be NaN or -inf".into()));
        }
        let range_min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let range_max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // the corner x = -L is the point farthest from the origin
        let decay_limit = samples[0];
        let clog_decay = samples
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                let diff = (g - decay_limit).abs();
                if diff == 0.0 {
                    0.0
                } else {
                    diff * (std::f64::consts::E + spec.coordinate_norm(i)).ln()
                }
            })
            .fold(0.0, f64::max);
        Ok(Self { spec, samples, range_min, range_max, decay_limit, clog_decay, clog_local: OnceLock::new() })
    }

    pub fn constant(spec: GridSpec, value: f64) -> Result<Self> {
        Self::new(spec, vec![value; spec.len()])
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        Self::new(spec, (0..spec.len()).map(|i| f(spec.coordinate(i))).collect())
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Exact minimum over the grid (`p⁻`).
    pub fn range_min(&self) -> f64 {
        self.range_min
    }

    /// Exact maximum over the grid (`p⁺`), possibly `+∞`.
    pub fn range_max(&self) -> f64 {
        self.range_max
    }

    pub fn is_constant(&self) -> bool {
        self.range_min == self.range_max
    }

    /// Estimated local log-Hölder constant, computed on first use.
    pub fn clog_local(&self) -> f64 {
        *self.clog_local.get_or_init(|| estimate_clog(self))
    }

    /// `g_∞`, taken as the value at the corner of the torus.
    pub fn decay_limit(&self) -> f64 {
        self.decay_limit
    }

    /// `sup |g(x) - g_∞| log(e + |x|)`; informational only on the torus.
    pub fn clog_decay(&self) -> f64 {
        self.clog_decay
    }

    /// Pointwise `1/g` with `1/∞ = 0`.
    pub fn reciprocal(&self) -> Result<Self> {
        if self.range_min <= 0.0 {
            return Err(Error::InvalidArgument("reciprocal of a non-positive exponent".into()));
        }
        Self::new(self.spec, self.samples.iter().map(|&v| 1.0 / v).collect())
    }

    /// Class `𝒫₀`: bounded away from zero.
    pub fn ensure_p0(&self, name: &str) -> Result<()> {
        if self.range_min > 0.0 {
            Ok(())
        } else {
            Err(Error::Hypothesis(format!("{name}⁻ = {} must be positive", self.range_min)))
        }
    }

    pub fn ensure_finite(&self, name: &str) -> Result<()> {
        if self.range_max.is_finite() {
            Ok(())
        } else {
            Err(Error::Hypothesis(format!("{name} must be bounded, got {name}⁺ = ∞")))
        }
    }
}

/// Lower estimate of `c_log(g)`: the largest `|g(x)-g(y)| log(e + 1/d(x,y))`
/// over grid pairs, with `d` the periodic distance.
///
/// All pairs are enumerated up to 2^24 pairs; above that a fixed-seed sample of
/// 10^5 random pairs plus every nearest-neighbour pair is used.
pub fn estimate_clog(g: &ExponentField) -> f64 {
    let spec = *g.spec();
    let samples = g.samples();
    let count = samples.len();
    let pair_value = |a: usize, b: usize| {
        let diff = samples[a] - samples[b];
        if diff == 0.0 {
            return 0.0;
        }
        let d = spec.periodic_distance(a, b);
        diff.abs() * (std::f64::consts::E + 1.0 / d).ln()
    };

    let pairs = count * (count - 1) / 2;
    if pairs <= BRUTE_FORCE_PAIRS {
        if spec.dim() == 1 {
            // distance depends only on the index offset
            let h = spec.spacing();
            let logs: Vec<f64> = (0..count)
                .map(|k| {
                    let d = k.min(count - k) as f64 * h;
                    (std::f64::consts::E + 1.0 / d).ln()
                })
                .collect();
            let mut best: f64 = 0.0;
            for a in 0..count {
                for b in a + 1..count {
                    let diff = (samples[a] - samples[b]).abs();
                    if diff != 0.0 {
                        best = best.max(diff * logs[b - a]);
                    }
                }
            }
            return best;
        }
        let mut best: f64 = 0.0;
        for a in 0..count {
            for b in a + 1..count {
                best = best.max(pair_value(a, b));
            }
        }
        return best;
    }

    let n = spec.points();
    let mut best: f64 = 0.0;
    for idx in 0..count {
        let [i, j] = spec.split(idx);
        let right = if spec.dim() == 1 { (i + 1) % n } else { i * n + (j + 1) % n };
        best = best.max(pair_value(idx, right));
        if spec.dim() == 2 {
            best = best.max(pair_value(idx, ((i + 1) % n) * n + j));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xc10c);
    for _ in 0..SAMPLED_PAIRS {
        let a = rng.random_range(0..count);
        let b = rng.random_range(0..count);
        if a != b {
            best = best.max(pair_value(a, b));
        }
    }
    best
}

/// Declarative exponent families used by the harness configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExponentFamily {
    Constant {
        value: f64,
    },
    /// `base + amplitude · sin(frequency · π x₁ / L)`.
    Sine {
        base: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// `base + amplitude · exp(-|x|² / (2 width²))`.
    Bump {
        base: f64,
        amplitude: f64,
        width: f64,
    },
    /// `low` for `x₁ < 0`, `high` otherwise. Not log-Hölder.
    Jump {
        low: f64,
        high: f64,
    },
}

impl ExponentFamily {
    pub fn sample(&self, spec: &GridSpec) -> Result<ExponentField> {
        let l = spec.half_period();
        match *self {
            Self::Constant { value } => ExponentField::constant(*spec, value),
            Self::Sine { base, amplitude, frequency } => ExponentField::from_fn(*spec, |x| {
                base + amplitude * (frequency * std::f64::consts::PI * x[0] / l).sin()
            }),
            Self::Bump { base, amplitude, width } => ExponentField::from_fn(*spec, |x| {
                base + amplitude * (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * width * width)).exp()
            }),
            Self::Jump { low, high } => ExponentField::from_fn(*spec, |x| if x[0] < 0.0 { low } else { high }),
        }
    }

    /// Supremum of the family, known without sampling.
    pub fn upper_bound(&self) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Sine { base, amplitude, .. } => base + amplitude.abs(),
            Self::Bump { base, amplitude, .. } => base + amplitude.max(0.0),
            Self::Jump { low, high } => low.max(high),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Constant { value } => format!("const({value})"),
            Self::Sine { base, amplitude, frequency } => {
                format!("sine({base}{amplitude:+}·sin({frequency}πx/L))")
            }
            Self::Bump { base, amplitude, width } => format!("bump({base}{amplitude:+}, w={width})"),
            Self::Jump { low, high } => format!("jump({low}|{high})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_cases() {
        assert_eq!(omega(2.0, 3.0).unwrap(), 9.0);
        assert_eq!(omega(f64::INFINITY, 0.5).unwrap(), 0.0);
        assert_eq!(omega(f64::INFINITY, 1.0).unwrap(), 0.0);
        assert_eq!(omega(f64::INFINITY, 2.0).unwrap(), f64::INFINITY);
        assert_eq!(omega(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(omega(0.5, 4.0).unwrap(), 2.0);
        assert!(omega(0.0, 1.0).is_err());
        assert!(omega(-1.0, 1.0).is_err());
        assert!(omega(2.0, -0.1).is_err());
    }

    #[test]
    fn omega_at_one_is_one() {
        for p in [0.3, 1.0, 2.5, 40.0] {
            assert_eq!(omega(p, 1.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn range_is_exact_min_max() {
        let spec = GridSpec::new(1, 64, 4.0).unwrap();
        let f = ExponentFamily::Sine { base: 2.0, amplitude: 0.5, frequency: 1.0 }.sample(&spec).unwrap();
        let min = f.samples().iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(f.range_min(), min);
        assert!(f.range_max() <= 2.5 && f.range_max() > 2.49);
    }

    #[test]
    fn rejects_nan() {
        let spec = GridSpec::new(1, 16, 1.0).unwrap();
        let mut s = vec![1.0; 16];
        s[3] = f64::NAN;
        assert!(ExponentField::new(spec, s).is_err());
    }

    #[test]
    fn infinite_exponent_allowed() {
        let spec = GridSpec::new(1, 16, 1.0).unwrap();
        let mut s = vec![2.0; 16];
        s[0] = f64::INFINITY;
        let p = ExponentField::new(spec, s).unwrap();
        assert!(p.ensure_p0("p").is_ok());
        assert!(p.ensure_finite("p").is_err());
        assert_eq!(p.reciprocal().unwrap().samples()[0], 0.0);
    }

    #[test]
    fn clog_of_constant_is_zero() {
        let spec = GridSpec::new(1, 256, 8.0).unwrap();
        assert_eq!(estimate_clog(&ExponentField::constant(spec, 0.3).unwrap()), 0.0);
    }

    /// Independent oracle: all ordered pairs, distance recomputed from coordinates.
    fn clog_oracle(g: &ExponentField) -> f64 {
        let spec = g.spec();
        let two_l = 2.0 * spec.half_period();
        let mut best: f64 = 0.0;
        for a in 0..spec.len() {
            for b in 0..spec.len() {
                if a == b {
                    continue;
                }
                let (xa, xb) = (spec.coordinate(a), spec.coordinate(b));
                let wrap = |d: f64| {
                    let d = d.abs() % two_l;
                    d.min(two_l - d)
                };
                let d = wrap(xa[0] - xb[0]).hypot(wrap(xa[1] - xb[1]));
                let v = (g.samples()[a] - g.samples()[b]).abs() * (std::f64::consts::E + 1.0 / d).ln();
                best = best.max(v);
            }
        }
        best
    }

    #[test]
    fn clog_matches_brute_force_for_sine() {
        let spec = GridSpec::new(1, 128, 16.0).unwrap();
        let g = ExponentFamily::Sine { base: 0.0, amplitude: 1.0, frequency: 1.0 }.sample(&spec).unwrap();
        let est = estimate_clog(&g);
        assert!(est.is_finite() && est > 0.0);
        assert!((est - clog_oracle(&g)).abs() < 1e-12);

        let spec2 = GridSpec::new(2, 16, 2.0).unwrap();
        let g2 = ExponentFamily::Bump { base: 1.0, amplitude: 0.4, width: 0.5 }.sample(&spec2).unwrap();
        assert!((estimate_clog(&g2) - clog_oracle(&g2)).abs() < 1e-12);
    }

    #[test]
    fn clog_of_jump_grows_with_resolution() {
        let jump = ExponentFamily::Jump { low: 1.0, high: 2.0 };
        let coarse = estimate_clog(&jump.sample(&GridSpec::new(1, 256, 16.0).unwrap()).unwrap());
        let fine = estimate_clog(&jump.sample(&GridSpec::new(1, 512, 16.0).unwrap()).unwrap());
        // the nearest pair straddling the jump gives log(e + N/2L)
        assert!(fine - coarse > 0.5 * std::f64::consts::LN_2, "{coarse} -> {fine}");
    }

    #[test]
    fn clog_converges_for_smooth_families() {
        let families = [
            ExponentFamily::Sine { base: 0.5, amplitude: 0.3, frequency: 4.0 },
            ExponentFamily::Bump { base: 2.0, amplitude: 0.5, width: 2.0 },
        ];
        for fam in families {
            let a = estimate_clog(&fam.sample(&GridSpec::new(1, 512, 16.0).unwrap()).unwrap());
            let b = estimate_clog(&fam.sample(&GridSpec::new(1, 1024, 16.0).unwrap()).unwrap());
            assert!((b - a).abs() / a < 0.05, "{fam:?}: {a} -> {b}");
        }
    }

    #[test]
    fn family_deserializes_from_kind_tag() {
        let f: ExponentFamily =
            toml::from_str("kind = \"sine\"\nbase = 0.5\namplitude = 0.2\nfrequency = 1.0").unwrap();
        assert_eq!(f, ExponentFamily::Sine { base: 0.5, amplitude: 0.2, frequency: 1.0 });
    }
}
