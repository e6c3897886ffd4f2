use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::Config;
use super::corpus::Corpus;
use super::report::{Hypotheses, LemmaReport, LemmaRow, RatioEntry, RatioReport, Report};
use crate::besov::{besov_continuous, besov_discrete, besov_local_means, besov_peetre, BesovParams, Kernels};
use crate::calderon::{build_continuous_pair, build_dyadic, build_local_means, default_v_max, BumpShape, KernelPair};
use crate::error::{Error, Result};
use crate::exponent::{estimate_clog, ExponentFamily, ExponentField};
use crate::grid::{apply_multiplier, GridFunction, GridSpec, ScaleGrid};
use crate::lemmas;

/// Experiments comparing two quasi-norms over the corpus.
pub const RATIO_EXPERIMENTS: [&str; 4] =
    ["independence", "peetre-vs-continuous", "discrete-vs-continuous", "local-means-vs-discrete"];

/// Lemma oracles, run as `lemma:<id>`; `lemma:all` runs every one.
pub const LEMMAS: [&str; 9] =
    ["transfer", "dzw", "hardy", "rtrick", "eta-discrete", "eta-continuous", "averaged", "reproducing", "rychkov"];

/// Relative change allowed when the grid is refined.
pub const STABILITY_TOLERANCE: f64 = 0.05;

pub fn experiment_names() -> Vec<String> {
    RATIO_EXPERIMENTS
        .iter()
        .map(|s| s.to_string())
        .chain(std::iter::once("lemma:all".to_string()))
        .chain(LEMMAS.iter().map(|l| format!("lemma:{l}")))
        .collect()
}

/// Runs `name` on a thread pool of `config.threads` workers.
pub fn run_experiment(name: &str, config: &Config) -> Result<Report> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| {
        if RATIO_EXPERIMENTS.contains(&name) {
            run_ratio(name, config).map(Report::Ratio)
        } else if let Some(id) = name.strip_prefix("lemma:") {
            let ids: Vec<&str> = if id == "all" {
                LEMMAS.to_vec()
            } else if LEMMAS.contains(&id) {
                vec![id]
            } else {
                return Err(Error::UnknownExperiment(name.to_string()));
            };
            run_lemmas(name, &ids, config).map(Report::Lemma)
        } else {
            Err(Error::UnknownExperiment(name.to_string()))
        }
    })
}

struct Exponents {
    alpha: ExponentField,
    p: ExponentField,
    q: ExponentField,
}

fn sample_exponents(config: &Config, spec: &GridSpec) -> Result<Exponents> {
    let e = &config.exponents;
    Ok(Exponents { alpha: e.alpha.sample(spec)?, p: e.p.sample(spec)?, q: e.q.sample(spec)? })
}

fn hypotheses(name: &str, config: &Config, ex: &Exponents, a: f64) -> Hypotheses {
    let n = config.grid.dim as f64;
    let mut violations = Vec::new();
    let uses_maximal = matches!(name, "peetre-vs-continuous" | "local-means-vs-discrete");
    if uses_maximal && !(a > n / ex.p.range_min()) {
        violations.push(format!("a = {a} must exceed n/p⁻ = {}", n / ex.p.range_min()));
    }
    let moments = (name == "local-means-vs-discrete").then_some(config.local_means.moments);
    if let Some(s) = moments {
        if !(ex.alpha.range_max() < (s + 1) as f64) {
            violations.push(format!("α⁺ = {} must be below S + 1 = {}", ex.alpha.range_max(), s + 1));
        }
    }
    let clog_inv_q = ex.q.reciprocal().map(|r| estimate_clog(&r)).unwrap_or(f64::INFINITY);
    Hypotheses {
        peetre_a: uses_maximal.then_some(a),
        moments,
        p_min: ex.p.range_min(),
        q_max: ex.q.range_max(),
        alpha_max: ex.alpha.range_max(),
        clog_alpha: estimate_clog(&ex.alpha),
        clog_p: estimate_clog(&ex.p),
        clog_inv_q: if clog_inv_q.is_finite() { clog_inv_q } else { 0.0 },
        satisfied: violations.is_empty(),
        violations,
    }
}

/// Both quasi-norms of one corpus entry.
type NormPair = Box<dyn Fn(&GridFunction) -> Result<(f64, f64)> + Sync>;

fn run_ratio(name: &str, config: &Config) -> Result<RatioReport> {
    let corpus = Corpus::standard(config.grid_spec()?, config.seed, config.corpus.factor)?;
    run_ratio_on(name, config, &corpus)
}

/// Runs a ratio experiment on a caller-supplied corpus, on the current
/// rayon pool. The corpus grid must match `config`.
pub fn run_ratio_on(name: &str, config: &Config, corpus: &Corpus) -> Result<RatioReport> {
    if !RATIO_EXPERIMENTS.contains(&name) {
        return Err(Error::UnknownExperiment(name.to_string()));
    }
    let spec = config.grid_spec()?;
    corpus.spec().ensure_same(&spec)?;
    let scale = config.scale_grid()?;
    let ex = sample_exponents(config, &spec)?;
    let a = config.peetre.a.unwrap_or(spec.dim() as f64 / ex.p.range_min() + 1.0);
    let hyp = hypotheses(name, config, &ex, a);
    if !hyp.satisfied {
        return Err(Error::Hypothesis(hyp.violations.join("; ")));
    }
    let params = |kernels| BesovParams::new(ex.alpha.clone(), ex.p.clone(), ex.q.clone(), a, scale, kernels);
    let continuous = params(Kernels::Continuous(build_continuous_pair(&spec, &scale)?))?;
    let (label_a, label_b, norms): (&str, &str, NormPair) = match name {
        "independence" => {
            let other = params(Kernels::Continuous(KernelPair::from_mu_eta(&spec, &scale)?))?;
            (
                "continuous[mollifier]",
                "continuous[mu-eta]",
                Box::new(move |f| Ok((besov_continuous(f, &continuous)?, besov_continuous(f, &other)?))),
            )
        }
        "peetre-vs-continuous" => (
            "peetre",
            "continuous",
            Box::new(move |f| Ok((besov_peetre(f, &continuous)?, besov_continuous(f, &continuous)?))),
        ),
        "discrete-vs-continuous" => {
            let dyadic = params(Kernels::Dyadic(build_dyadic(&spec, default_v_max(&spec))?))?;
            (
                "continuous",
                "discrete",
                Box::new(move |f| Ok((besov_continuous(f, &continuous)?, besov_discrete(f, &dyadic)?))),
            )
        }
        "local-means-vs-discrete" => {
            let lm = &config.local_means;
            let local = params(Kernels::LocalMeans(build_local_means(lm.moments, lm.radius, &spec)?))?;
            let dyadic = params(Kernels::Dyadic(build_dyadic(&spec, default_v_max(&spec))?))?;
            (
                "local-means",
                "discrete",
                Box::new(move |f| Ok((besov_local_means(f, &local)?, besov_discrete(f, &dyadic)?))),
            )
        }
        other => return Err(Error::UnknownExperiment(other.to_string())),
    };
    let entries = corpus
        .entries()
        .par_iter()
        .map(|e| {
            let (na, nb) = norms(&e.function)?;
            let vacuous = na == 0.0 && nb == 0.0;
            let ratio = (nb > 0.0).then(|| na / nb);
            Ok(RatioEntry {
                name: e.name.clone(),
                norm_a: na,
                norm_b: nb,
                ratio,
                vacuous,
                boundary_mass: e.function.boundary_mass(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = RatioReport {
        experiment: name.to_string(),
        norm_a: label_a.into(),
        norm_b: label_b.into(),
        exponents: config.exponents.label(),
        seed: config.seed,
        grid: [spec.dim() as f64, spec.points() as f64, spec.half_period()],
        scales: [scale.per_octave(), scale.octaves()],
        entries,
        min_ratio: None,
        max_ratio: None,
        spread: None,
        threshold: config.thresholds.for_experiment(name),
        hypotheses: hyp,
        passed: false,
    };
    report.finish();
    Ok(report)
}

fn digest(label: &str, fields: &[&[f64]], functions: &[&GridFunction]) -> String {
    let mut h = Sha256::new();
    h.update(label.as_bytes());
    for f in fields {
        h.update((f.len() as u64).to_le_bytes());
        for v in *f {
            h.update(v.to_le_bytes());
        }
    }
    for g in functions {
        h.update((g.values().len() as u64).to_le_bytes());
        for v in g.values() {
            h.update(v.re.to_le_bytes());
            h.update(v.im.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// One evaluation of a lemma oracle on a given discretization.
struct Evaluation {
    constant: Option<f64>,
    hypothesis_met: bool,
    digest: String,
}

/// How a row's pass flag is decided.
#[derive(Clone, Copy)]
enum Check {
    /// Finite constant, stable under refinement (vacuous rows pass).
    Stable,
    /// Stable, and the constant is at least the given value.
    AtLeast(f64),
    /// Stable, and the constant is at most the given value.
    AtMost(f64),
}

/// Which discretization parameter the stability check doubles.
#[derive(Clone, Copy)]
enum Refine {
    Grid,
    Scales,
}

type Eval = Box<dyn Fn(&GridSpec, &ScaleGrid) -> Result<Evaluation> + Send + Sync>;

struct Case {
    lemma: &'static str,
    case: String,
    refine: Refine,
    check: Check,
    eval: Eval,
}

fn sine(base: f64, amplitude: f64) -> ExponentFamily {
    ExponentFamily::Sine { base, amplitude, frequency: 4.0 }
}

fn ok(constant: Option<f64>, hypothesis_met: bool, digest: String) -> Result<Evaluation> {
    Ok(Evaluation { constant, hypothesis_met, digest })
}

fn transfer_cases() -> Vec<Case> {
    let mut cases = Vec::new();
    for (label, use_clog) in [("R=clog", true), ("R=0", false)] {
        for (tl, t) in [("1", 1.0), ("1/4", 0.25), ("1/16", 1.0 / 16.0)] {
            cases.push(Case {
                lemma: "transfer",
                case: format!("{label} t={tl}"),
                refine: Refine::Grid,
                check: Check::Stable,
                eval: Box::new(move |spec, _| {
                    let alpha = sine(0.5, 0.3).sample(spec)?;
                    let r = if use_clog { estimate_clog(&alpha) } else { 0.0 };
                    let out = lemmas::check_transfer(&alpha, t, 2.0, r)?;
                    ok(Some(out.constant), out.hypothesis_met, digest("transfer", &[alpha.samples(), &[t, r]], &[]))
                }),
            });
        }
    }
    cases
}

fn dzw_cases(seed: u64, factor: f64) -> Vec<Case> {
    (0..10)
        .map(|i| Case {
            lemma: "dzw",
            case: format!("entry {i}"),
            refine: Refine::Grid,
            check: Check::AtMost(1.0 + 1e-8),
            eval: Box::new(move |spec, _| {
                let corpus = Corpus::standard(*spec, seed, factor)?;
                let f = &corpus.entries()[i].function;
                let p = sine(2.0, 0.5).sample(spec)?;
                let q = sine(1.5, 0.4).sample(spec)?;
                // scale so the right-hand side is at least one
                let rhs = crate::modular_norms::power_norm(f, &p, &q)?;
                let g = f.scaled(Complex64::new(2.0 * rhs.powf(-1.0 / q.range_min()).max(1.0), 0.0));
                let out = lemmas::check_dzw(&g, &p, &q)?;
                ok(Some(out.constant()), out.applicable, digest("dzw", &[p.samples(), q.samples()], &[&g]))
            }),
        })
        .collect()
}

fn hardy_cases() -> Vec<Case> {
    type Profile = fn(f64) -> f64;
    let families: [(&str, Profile); 3] = [
        ("eps=t^0.5", |t: f64| t.sqrt()),
        ("eps=1", |_| 1.0),
        ("eps=spike", |t: f64| (-(t.log2() + 2.0).powi(2) * 8.0).exp()),
    ];
    let mut cases = Vec::new();
    for (label, eps) in families {
        for s in [0.5, 1.0, 2.0] {
            cases.push(Case {
                lemma: "hardy",
                case: format!("{label} s={s}"),
                refine: Refine::Scales,
                check: Check::Stable,
                eval: Box::new(move |_, scale| {
                    let e: Vec<f64> = (0..scale.len()).map(|j| eps(scale.t(j))).collect();
                    let c = lemmas::check_hardy(&e, s, scale)?;
                    ok(Some(c), true, digest("hardy", &[&e, &[s]], &[]))
                }),
            });
        }
    }
    cases
}

fn corpus_entry(spec: &GridSpec, seed: u64, factor: f64, i: usize) -> Result<GridFunction> {
    Ok(Corpus::standard(*spec, seed, factor)?.entries()[i].function.clone())
}

fn rtrick_cases(seed: u64, factor: f64) -> Vec<Case> {
    let mut cases = Vec::new();
    for i in [0, 4, 8] {
        for r in [1.0, 0.5] {
            for n in [1.0, 2.0, 4.0] {
                cases.push(Case {
                    lemma: "rtrick",
                    case: format!("entry {i} r={r} N={n}"),
                    refine: Refine::Grid,
                    check: Check::Stable,
                    eval: Box::new(move |spec, _| {
                        let g = corpus_entry(spec, seed, factor, i)?;
                        let m = spec.dim() as f64 + 2.0;
                        let c = lemmas::check_rtrick(&g, n, r, m)?;
                        ok(c, true, digest("rtrick", &[&[n, r, m]], &[&g]))
                    }),
                });
            }
        }
    }
    cases
}

fn eta_order(spec: &GridSpec, q: &ExponentField) -> Result<f64> {
    Ok(spec.dim() as f64 + estimate_clog(&q.reciprocal()?) + 1.0)
}

fn family_cases(lemma: &'static str, seed: u64, factor: f64) -> Vec<Case> {
    [0, 3, 5, 6, 9]
        .into_iter()
        .map(|i| Case {
            lemma,
            case: format!("entry {i}"),
            refine: Refine::Grid,
            check: Check::Stable,
            eval: Box::new(move |spec, scale| {
                let f = corpus_entry(spec, seed, factor, i)?;
                let p = sine(2.0, 0.5).sample(spec)?;
                let q = sine(1.5, 0.4).sample(spec)?;
                let m = eta_order(spec, &q)?;
                let c = match lemma {
                    "eta-discrete" => {
                        let d = build_dyadic(spec, 5)?;
                        let fv: Vec<GridFunction> =
                            (0..=5).map(|v| apply_multiplier(&f, |x| d.psi_hat(v, x))).collect();
                        lemmas::check_eta_conv_discrete(&fv, &p, &q, m)?
                    }
                    _ => {
                        let k = build_continuous_pair(spec, scale)?;
                        let ft: Vec<GridFunction> =
                            (0..scale.len()).map(|j| apply_multiplier(&f, |x| k.phi_hat(scale.t(j) * x))).collect();
                        if lemma == "averaged" {
                            lemmas::check_averaged(&ft, &p, &q, m, 0.25, 4.0, scale)?
                        } else {
                            lemmas::check_eta_conv_continuous(&ft, &p, &q, m, scale)?
                        }
                    }
                };
                ok(Some(c), true, digest(lemma, &[p.samples(), q.samples(), &[m]], &[&f]))
            }),
        })
        .collect()
}

fn reproducing_cases(seed: u64, factor: f64) -> Vec<Case> {
    let mut cases = Vec::new();
    for i in [0, 3, 7, 8] {
        for r in [1.0, 0.5] {
            for part in ["i", "ii"] {
                cases.push(Case {
                    lemma: "reproducing",
                    case: format!("entry {i} r={r} part {part}"),
                    refine: Refine::Grid,
                    check: Check::Stable,
                    eval: Box::new(move |spec, scale| {
                        let f = corpus_entry(spec, seed, factor, i)?;
                        let n = spec.dim() as f64;
                        let m = n.max(n / r) + 1.0;
                        let k = build_continuous_pair(spec, scale)?;
                        let out = lemmas::check_reproducing_bounds(&f, &k, scale, r, m)?;
                        let c = if part == "i" { out.part_i } else { out.part_ii_max() };
                        ok(c, true, digest("reproducing", &[&[r, m]], &[&f]))
                    }),
                });
            }
        }
    }
    cases
}

fn rychkov_cases() -> Vec<Case> {
    [-1, 1, 3]
        .into_iter()
        .map(|m| Case {
            lemma: "rychkov",
            case: format!("M={m}"),
            refine: Refine::Grid,
            check: Check::AtLeast((m + 1) as f64 - 0.1),
            eval: Box::new(move |spec, scale| {
                let rho = GridFunction::from_real_fn(*spec, |x| (-(x[0] * x[0] + x[1] * x[1]) / 8.0).exp());
                let out = lemmas::check_rychkov_decay(lemmas::rychkov_mu_hat(m), &rho, m, 2.0, scale)?;
                ok(out.slope, true, digest("rychkov", &[&[m as f64, 2.0]], &[&rho]))
            }),
        })
        .collect()
}

fn cases_for(id: &str, config: &Config) -> Vec<Case> {
    let (seed, factor) = (config.seed, config.corpus.factor);
    match id {
        "transfer" => transfer_cases(),
        "dzw" => dzw_cases(seed, factor),
        "hardy" => hardy_cases(),
        "rtrick" => rtrick_cases(seed, factor),
        "eta-discrete" | "eta-continuous" | "averaged" => family_cases(
            match id {
                "eta-discrete" => "eta-discrete",
                "eta-continuous" => "eta-continuous",
                _ => "averaged",
            },
            seed,
            factor,
        ),
        "reproducing" => reproducing_cases(seed, factor),
        _ => rychkov_cases(),
    }
}

fn evaluate(case: &Case, spec: &GridSpec, scale: &ScaleGrid) -> Result<LemmaRow> {
    let base = (case.eval)(spec, scale)?;
    let refined = match case.refine {
        Refine::Grid => (case.eval)(&spec.refined(), scale)?,
        Refine::Scales => (case.eval)(spec, &scale.refined())?,
    };
    let stable = match (base.constant, refined.constant) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => {
            a == b || (b - a).abs() < STABILITY_TOLERANCE * a.abs().max(b.abs())
        }
        (None, None) => true,
        _ => false,
    };
    let passed = stable
        && match (case.check, base.constant) {
            (_, None) | (Check::Stable, _) => true,
            (Check::AtLeast(lo), Some(c)) => c >= lo,
            (Check::AtMost(hi), Some(c)) => c <= hi,
        };
    Ok(LemmaRow {
        lemma: case.lemma.to_string(),
        case: case.case.clone(),
        digest: base.digest,
        constant: base.constant,
        refined: refined.constant,
        stable,
        hypothesis_met: base.hypothesis_met,
        passed,
    })
}

/// Summary rows: t-uniformity under the hypothesis and growth without it.
fn transfer_summary(rows: &[LemmaRow]) -> Vec<LemmaRow> {
    let pick = |case: &str| rows.iter().find(|r| r.lemma == "transfer" && r.case == case).and_then(|r| r.constant);
    let mut out = Vec::new();
    let met: Vec<f64> = ["R=clog t=1", "R=clog t=1/4", "R=clog t=1/16"].iter().filter_map(|c| pick(c)).collect();
    if met.len() == 3 {
        let lo = met.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = met.iter().copied().fold(0.0, f64::max);
        let c = hi / lo;
        out.push(LemmaRow {
            lemma: "transfer".into(),
            case: "t-uniformity (max/min over t, R=clog)".into(),
            digest: String::new(),
            constant: Some(c),
            refined: None,
            stable: true,
            hypothesis_met: true,
            passed: c <= 2.0,
        });
    }
    if let (Some(a), Some(b)) = (pick("R=0 t=1"), pick("R=0 t=1/16")) {
        let c = b / a;
        out.push(LemmaRow {
            lemma: "transfer".into(),
            case: "violation growth (t=1/16 vs t=1, R=0)".into(),
            digest: String::new(),
            constant: Some(c),
            refined: None,
            stable: true,
            hypothesis_met: false,
            passed: c >= 3.0,
        });
    }
    out
}

fn run_lemmas(name: &str, ids: &[&str], config: &Config) -> Result<LemmaReport> {
    let spec = config.grid_spec()?;
    let scale = config.scale_grid()?;
    let cases: Vec<Case> = ids.iter().flat_map(|id| cases_for(id, config)).collect();
    let mut rows = cases.par_iter().map(|c| evaluate(c, &spec, &scale)).collect::<Result<Vec<_>>>()?;
    if ids.contains(&"transfer") {
        let summary = transfer_summary(&rows);
        rows.extend(summary);
    }
    let passed = rows.iter().all(|r| r.passed);
    Ok(LemmaReport {
        experiment: name.to_string(),
        seed: config.seed,
        grid: [spec.dim() as f64, spec.points() as f64, spec.half_period()],
        scales: [scale.per_octave(), scale.octaves()],
        rows,
        passed,
    })
}

/// The two kernel pairs compared by the `independence` experiment.
pub fn independence_pairs(spec: &GridSpec, scale: &ScaleGrid) -> Result<[KernelPair; 2]> {
    Ok([
        KernelPair::with_shape(spec, scale, BumpShape::Mollifier)?,
        KernelPair::with_shape(spec, scale, BumpShape::MuEta)?,
    ])
}
