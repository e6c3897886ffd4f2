use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calderon::{DyadicFamily, KernelPair, LocalMeansKernels};
use crate::error::Result;

/// One corpus entry evaluated by two quasi-norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub name: String,
    pub norm_a: f64,
    pub norm_b: f64,
    /// `norm_a / norm_b`; absent when `norm_b` vanishes.
    pub ratio: Option<f64>,
    pub vacuous: bool,
    pub boundary_mass: f64,
}

/// Parameters and hypothesis checks recorded with a ratio experiment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub peetre_a: Option<f64>,
    pub moments: Option<i32>,
    pub p_min: f64,
    pub q_max: f64,
    pub alpha_max: f64,
    pub clog_alpha: f64,
    pub clog_p: f64,
    pub clog_inv_q: f64,
    /// Every theorem hypothesis needed by the experiment holds.
    pub satisfied: bool,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub experiment: String,
    pub norm_a: String,
    pub norm_b: String,
    pub exponents: String,
    pub seed: u64,
    pub grid: [f64; 3],
    pub scales: [usize; 2],
    pub entries: Vec<RatioEntry>,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    /// `max_ratio / min_ratio`, at least 1.
    pub spread: Option<f64>,
    pub threshold: f64,
    pub hypotheses: Hypotheses,
    pub passed: bool,
}

impl RatioReport {
    /// Fills in the corpus statistics and the pass flag from `entries`.
    pub fn finish(&mut self) {
        let ratios: Vec<f64> = self.entries.iter().filter_map(|e| e.ratio).collect();
        self.min_ratio = ratios.iter().copied().reduce(f64::min);
        self.max_ratio = ratios.iter().copied().reduce(f64::max);
        self.spread = match (self.min_ratio, self.max_ratio) {
            (Some(lo), Some(hi)) if lo > 0.0 => Some((hi / lo).max(1.0)),
            (Some(_), Some(_)) => Some(f64::MAX),
            _ => None,
        };
        // one norm zero and the other not: no finite bracket exists
        let degenerate = self.entries.iter().any(|e| e.ratio.is_none() && !e.vacuous);
        self.passed = self.hypotheses.satisfied && !degenerate && self.spread.is_none_or(|s| s <= self.threshold);
    }
}

/// One lemma oracle evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub lemma: String,
    pub case: String,
    /// SHA-256 of the inputs, hex.
    pub digest: String,
    /// Empirical constant; absent for vacuous inputs.
    pub constant: Option<f64>,
    /// The same constant recomputed with `N → 2N`.
    pub refined: Option<f64>,
    /// Relative change under refinement is below 5%.
    pub stable: bool,
    pub hypothesis_met: bool,
    /// The lemma's own pass condition on this row.
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub experiment: String,
    pub seed: u64,
    pub grid: [f64; 3],
    pub scales: [usize; 2],
    pub rows: Vec<LemmaRow>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum Report {
    Ratio(RatioReport),
    Lemma(LemmaReport),
}

impl Report {
    pub fn passed(&self) -> bool {
        match self {
            Report::Ratio(r) => r.passed,
            Report::Lemma(r) => r.passed,
        }
    }

    pub fn experiment(&self) -> &str {
        match self {
            Report::Ratio(r) => &r.experiment,
            Report::Lemma(r) => &r.experiment,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_csv(&self) -> Result<String> {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        match self {
            Report::Ratio(r) => {
                w.write_record(["experiment", "name", "norm_a", "norm_b", "ratio", "vacuous", "boundary_mass"])?;
                for e in &r.entries {
                    w.write_record([
                        r.experiment.clone(),
                        e.name.clone(),
                        e.norm_a.to_string(),
                        e.norm_b.to_string(),
                        opt(e.ratio),
                        e.vacuous.to_string(),
                        e.boundary_mass.to_string(),
                    ])?;
                }
            }
            Report::Lemma(r) => {
                w.write_record([
                    "lemma",
                    "case",
                    "digest",
                    "constant",
                    "refined",
                    "stable",
                    "hypothesis_met",
                    "passed",
                ])?;
                for row in &r.rows {
                    w.write_record([
                        row.lemma.clone(),
                        row.case.clone(),
                        row.digest.clone(),
                        opt(row.constant),
                        opt(row.refined),
                        row.stable.to_string(),
                        row.hypothesis_met.to_string(),
                        row.passed.to_string(),
                    ])?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
    }
}

/// Kernels whose radial profiles go into the plot data.
#[derive(Clone, Copy, Debug)]
pub struct KernelSet<'a> {
    pub pairs: &'a [KernelPair],
    pub dyadic: &'a DyadicFamily,
    pub local_means: &'a LocalMeansKernels,
}

impl KernelSet<'_> {
    /// Writes one CSV per kernel into `dir`.
    pub fn export(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for pair in self.pairs {
            let path = dir.join(format!("pair-{}.csv", pair.shape().label()));
            pair.write_csv(fs::File::create(&path)?)?;
            written.push(path);
        }
        let path = dir.join("dyadic.csv");
        self.dyadic.write_csv(fs::File::create(&path)?)?;
        written.push(path);
        let path = dir.join("local-means.csv");
        self.local_means.write_csv(fs::File::create(&path)?)?;
        written.push(path);
        Ok(written)
    }
}

const PLOT_SCRIPT: &str = r#"import csv, glob, json, os
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
report = json.load(open(os.path.join(here, "..", "report.json")))

fig, ax = plt.subplots(figsize=(8, 4))
if report["kind"] == "ratio":
    rows = [e for e in report["entries"] if e["ratio"] is not None]
    ax.plot([e["name"] for e in rows], [e["ratio"] for e in rows], "o-")
    ax.set_ylabel("norm_a / norm_b")
    ax.set_title(report["experiment"] + "  spread=%.3g" % (report["spread"] or float("nan")))
else:
    rows = [r for r in report["rows"] if r["constant"] is not None]
    ax.semilogy([r["lemma"] + ":" + r["case"] for r in rows], [max(r["constant"], 1e-300) for r in rows], "o")
    ax.set_ylabel("empirical constant")
ax.tick_params(axis="x", rotation=60)
fig.tight_layout()
fig.savefig(os.path.join(here, "ratios.png"))

for path in sorted(glob.glob(os.path.join(here, "kernels", "*.csv"))):
    with open(path) as fh:
        data = list(csv.reader(fh))
    header, body = data[0], [[float(v) for v in row] for row in data[1:]]
    fig, ax = plt.subplots(figsize=(6, 4))
    for k, name in enumerate(header[1:], start=1):
        ax.plot([r[0] for r in body], [r[k] for r in body], label=name)
    ax.set_xlabel("|xi|")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path[:-4] + ".png")
"#;

/// Writes `report.json` and `report.csv` into `dir`, plus `plots/` (ratio
/// data, kernel tables and `plot.py`) when `kernels` is given.
pub fn emit_report(report: &Report, dir: &Path, kernels: Option<KernelSet<'_>>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let json = dir.join("report.json");
    fs::write(&json, report.to_json()?)?;
    let csv = dir.join("report.csv");
    fs::write(&csv, report.to_csv()?)?;
    let mut written = vec![json, csv];
    if let Some(k) = kernels {
        let plots = dir.join("plots");
        fs::create_dir_all(&plots)?;
        let data = plots.join("ratios.csv");
        fs::write(&data, report.to_csv()?)?;
        written.push(data);
        written.extend(k.export(&plots.join("kernels"))?);
        let script = plots.join("plot.py");
        fs::write(&script, PLOT_SCRIPT)?;
        written.push(script);
    }
    Ok(written)
}
