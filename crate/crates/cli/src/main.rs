use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use varbesov::calderon::{build_dyadic, build_local_means, default_v_max};
use varbesov::harness::{
    emit_report, experiment_names, independence_pairs, run_experiment, Config, Corpus, ExponentTriple, KernelSet,
    Report,
};
use varbesov::Error;

/// Variable-exponent Besov quasi-norm experiments.
#[derive(Parser)]
#[command(name = "varbesov", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write report.json / report.csv.
    Run(RunArgs),
    /// Kernel profile tables.
    Kernels {
        #[command(subcommand)]
        command: KernelsCommand,
    },
    /// The test-function corpus.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
    /// List experiment names.
    Experiments,
}

#[derive(Subcommand)]
enum KernelsCommand {
    /// Write radial profiles of every kernel as CSV.
    Export {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "kernels")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Print name, L² norm, max modulus and boundary mass of each entry.
    List {
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Overrides applied on top of the config file.
#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Spatial dimension (1 or 2).
    #[arg(long)]
    dim: Option<usize>,
    /// Points per axis and half period, e.g. `1024,16`.
    #[arg(long, value_name = "N,L")]
    grid: Option<String>,
    /// Nodes per octave and number of octaves, e.g. `8,5`.
    #[arg(long, value_name = "K,J")]
    scales: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment name; see `varbesov experiments`.
    experiment: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
    /// Exponent preset: constant, sine-alpha or sine-p.
    #[arg(long)]
    exponents: Option<String>,
    /// Peetre exponent `a`.
    #[arg(long)]
    peetre_a: Option<f64>,
    /// Vanishing moments `S` of the local-means kernel.
    #[arg(long, allow_negative_numbers = true)]
    moments: Option<i32>,
    /// Spread threshold for this experiment.
    #[arg(long)]
    threshold: Option<f64>,
    /// Multiply every corpus entry by this factor.
    #[arg(long)]
    factor: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write plot data and a plotting script under `<out>/plots`.
    #[arg(long)]
    plots: bool,
}

fn parse_pair<A: std::str::FromStr, B: std::str::FromStr>(flag: &str, s: &str) -> varbesov::Result<(A, B)> {
    let bad = || Error::Config(format!("--{flag} expects two comma-separated values, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn load_config(c: &CommonArgs) -> varbesov::Result<Config> {
    let mut config = match &c.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = c.seed {
        config.seed = seed;
    }
    if let Some(dim) = c.dim {
        config.grid.dim = dim;
    }
    if let Some(g) = &c.grid {
        (config.grid.points, config.grid.half_period) = parse_pair("grid", g)?;
    }
    if let Some(s) = &c.scales {
        (config.scales.per_octave, config.scales.octaves) = parse_pair("scales", s)?;
    }
    if let Some(t) = c.threads {
        config.threads = t;
    }
    Ok(config)
}

fn kernel_tables(config: &Config, run: impl FnOnce(KernelSet<'_>) -> varbesov::Result<()>) -> varbesov::Result<()> {
    let spec = config.grid_spec()?;
    let scale = config.scale_grid()?;
    let pairs = independence_pairs(&spec, &scale)?;
    let dyadic = build_dyadic(&spec, default_v_max(&spec))?;
    let lm = build_local_means(config.local_means.moments, config.local_means.radius, &spec)?;
    run(KernelSet { pairs: &pairs, dyadic: &dyadic, local_means: &lm })
}

fn summarize(report: &Report) {
    match report {
        Report::Ratio(r) => {
            for e in &r.entries {
                let ratio = e.ratio.map(|x| format!("{x:.6}")).unwrap_or_else(|| "vacuous".into());
                println!("{:<20} {:>14.6e} {:>14.6e} {ratio:>12}", e.name, e.norm_a, e.norm_b);
            }
            println!(
                "{}: {} / {}  spread {}  threshold {}  {}",
                r.experiment,
                r.norm_a,
                r.norm_b,
                r.spread.map(|s| format!("{s:.4}")).unwrap_or_else(|| "-".into()),
                r.threshold,
                if r.passed { "PASS" } else { "FAIL" }
            );
        }
        Report::Lemma(r) => {
            for row in &r.rows {
                let c = row.constant.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "vacuous".into());
                println!("{:<14} {:<44} {c:>14} {}", row.lemma, row.case, if row.passed { "ok" } else { "FAIL" });
            }
            println!("{}: {}", r.experiment, if r.passed { "PASS" } else { "FAIL" });
        }
    }
}

fn run(args: RunArgs) -> varbesov::Result<bool> {
    let mut config = load_config(&args.common)?;
    if let Some(preset) = &args.exponents {
        config.exponents = ExponentTriple::preset(preset)?;
    }
    if args.peetre_a.is_some() {
        config.peetre.a = args.peetre_a;
    }
    if let Some(s) = args.moments {
        config.local_means.moments = s;
    }
    if let Some(f) = args.factor {
        config.corpus.factor = f;
    }
    let name = args
        .experiment
        .or_else(|| config.experiment.clone())
        .ok_or_else(|| Error::Config("no experiment given on the command line or in the config".into()))?;
    if let Some(t) = args.threshold {
        config.thresholds.per_experiment.insert(name.clone(), t);
    }
    config.validate()?;
    let report = run_experiment(&name, &config)?;
    if args.plots {
        kernel_tables(&config, |k| emit_report(&report, &args.out, Some(k)).map(|_| ()))?;
    } else {
        emit_report(&report, &args.out, None)?;
    }
    summarize(&report);
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Kernels { command: KernelsCommand::Export { common, out } } => load_config(&common).and_then(|c| {
            kernel_tables(&c, |k| {
                for path in k.export(&out)? {
                    println!("{}", path.display());
                }
                Ok(())
            })?;
            Ok(true)
        }),
        Command::Corpus { command: CorpusCommand::List { common } } => load_config(&common).and_then(|c| {
            let corpus = Corpus::standard(c.grid_spec()?, c.seed, c.corpus.factor)?;
            println!("{:<20} {:>14} {:>14} {:>14}", "name", "l2_norm", "max_abs", "boundary_mass");
            for s in corpus.summaries() {
                println!("{:<20} {:>14.6e} {:>14.6e} {:>14.3e}", s.name, s.l2_norm, s.max_abs, s.boundary_mass);
            }
            Ok(true)
        }),
        Command::Experiments => {
            for name in experiment_names() {
                println!("{name}");
            }
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
