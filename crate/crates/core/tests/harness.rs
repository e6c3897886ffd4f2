use varbesov::grid::GridFunction;
use varbesov::harness::{
    emit_report, gaussian, run_experiment, run_ratio_on, Config, Corpus, CorpusEntry, Report, RATIO_EXPERIMENTS,
};
use varbesov::Error;

fn ratios(report: &Report) -> Vec<Option<f64>> {
    match report {
        Report::Ratio(r) => r.entries.iter().map(|e| e.ratio).collect(),
        Report::Lemma(_) => panic!("expected a ratio report"),
    }
}

#[test]
fn ratios_ignore_corpus_scaling() {
    let base = Config::default();
    let mut scaled = base.clone();
    scaled.corpus.factor = 7.0;
    for name in RATIO_EXPERIMENTS {
        let a = ratios(&run_experiment(name, &base).unwrap());
        let b = ratios(&run_experiment(name, &scaled).unwrap());
        for (x, y) in a.iter().zip(&b) {
            let (x, y) = (x.unwrap(), y.unwrap());
            assert!((x - y).abs() <= 1e-10 * x, "{name}: {x} vs {y}");
        }
    }
}

#[test]
fn identical_configs_give_identical_bytes() {
    let config = Config::default();
    for name in ["discrete-vs-continuous", "lemma:hardy"] {
        let a = run_experiment(name, &config).unwrap();
        let b = run_experiment(name, &config).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        emit_report(&a, da.path(), None).unwrap();
        emit_report(&b, db.path(), None).unwrap();
        for file in ["report.json", "report.csv"] {
            assert_eq!(std::fs::read(da.path().join(file)).unwrap(), std::fs::read(db.path().join(file)).unwrap());
        }
        assert_eq!(Report::from_json(&a.to_json().unwrap()).unwrap(), a);
    }
}

#[test]
fn zero_entry_is_vacuous() {
    let config = Config::default();
    let spec = config.grid_spec().unwrap();
    let corpus = Corpus::new(vec![
        CorpusEntry { name: "zero".into(), function: GridFunction::zeros(spec) },
        CorpusEntry { name: "gauss".into(), function: gaussian(spec) },
    ])
    .unwrap();
    let r = run_ratio_on("discrete-vs-continuous", &config, &corpus).unwrap();
    assert_eq!((r.entries[0].norm_a, r.entries[0].norm_b), (0.0, 0.0));
    assert!(r.entries[0].vacuous && r.entries[0].ratio.is_none());
    assert!(r.passed);
    assert_eq!(r.spread, Some(1.0));
}

#[test]
fn errors_are_classified() {
    let config = Config::default();
    assert!(matches!(run_experiment("nope", &config), Err(Error::UnknownExperiment(_))));
    assert!(matches!(run_experiment("lemma:nope", &config), Err(Error::UnknownExperiment(_))));
    assert!(matches!(Corpus::new(vec![]), Err(Error::EmptyCorpus)));
    let mut bad = config.clone();
    bad.peetre.a = Some(0.4);
    assert!(matches!(run_experiment("peetre-vs-continuous", &bad), Err(Error::Hypothesis(_))));
    let mut zero_threads = config;
    zero_threads.threads = 0;
    assert!(matches!(run_experiment("independence", &zero_threads), Err(Error::Config(_))));
}

#[test]
fn two_dimensional_run() {
    let config = Config::from_toml("[grid]\ndim = 2\npoints = 128\n[scales]\noctaves = 2\n").unwrap();
    let r = run_experiment("discrete-vs-continuous", &config).unwrap();
    assert!(r.passed(), "{}", r.to_json().unwrap());
    match r {
        Report::Ratio(r) => assert_eq!(r.entries.len(), 10),
        Report::Lemma(_) => unreachable!(),
    }
}
