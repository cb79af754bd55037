use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use evofs::classifiers::{save_model, train, ClassifierSpec};
use evofs::data::{ingest, read_cache, write_cache, DatasetKind, Imputation, MinMaxScaler};
use evofs::error::{Error, Result};
use evofs::evo::EvoConfig;
use evofs::experiment::{
    bench, describe, load_balanced, median, run_experiment, scaled_split, write_atomic, DatasetSpec,
    ExperimentConfig,
};
use evofs::functions::TestFunction;
use evofs::metrics::{confusion_matrix, scores};
use evofs::select::{select_features_with, CostWeights, FeatureMask, FitnessProtocol};

#[derive(Parser)]
#[command(name = "evofs", version, about = "Energy valley feature selection for intrusion detection")]
struct Cli {
    /// Master seed (sampling, training and the optimizer).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Experiment config (JSON); other subcommands take defaults from it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Fit the scaler on the training split only.
    #[arg(long, global = true)]
    strict_scaling: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean, balance and cache a dataset.
    Prep(PrepArgs),
    /// Class counts, column statistics and missing-value tallies.
    Describe(SourceArgs),
    /// Search for a feature subset on the training split.
    Select(SelectArgs),
    /// Train on the training split and score on the test split.
    Eval(EvalArgs),
    /// Run the full grid from `--config`.
    Experiment,
    /// Run the optimizer on a test function.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// cic-ddos2019, cse-cic-ids2018 or generic.
    #[arg(long, default_value = "generic")]
    kind: DatasetKind,
    #[arg(required = true)]
    paths: Vec<PathBuf>,
}

#[derive(Args)]
struct PrepArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Name of the cache file (without extension).
    #[arg(long, default_value = "dataset")]
    name: String,
    /// Rows kept per class; 0 cuts every class to the minority count.
    #[arg(long)]
    n_per_label: Option<usize>,
    /// Use k-nearest-row imputation with this k instead of the median.
    #[arg(long)]
    knn_impute: Option<usize>,
}

#[derive(Args)]
struct SplitArgs {
    /// Cache file written by `prep`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    split_ratio: Option<f64>,
    #[arg(long)]
    split_seed: Option<u64>,
    /// knn, cart, rf or svm.
    #[arg(long, default_value = "cart")]
    classifier: String,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    split: SplitArgs,
    #[arg(long)]
    particles: Option<usize>,
    /// Objective evaluation budget.
    #[arg(long)]
    budget: Option<usize>,
    /// Cost weights `w1,w2,w3[,w4]`.
    #[arg(long)]
    weights: Option<String>,
    /// Score masks with k-fold instead of the inner holdout.
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    inner_seed: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    split: SplitArgs,
    /// Selection JSON written by `select`.
    #[arg(long)]
    mask: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// sphere, rastrigin or rosenbrock.
    #[arg(long)]
    function: String,
    #[arg(long, default_value_t = 10)]
    dims: usize,
    #[arg(long, default_value_t = 30)]
    particles: usize,
    #[arg(long, default_value_t = 5000)]
    budget: usize,
    /// Run seeds `seed..seed+runs`.
    #[arg(long, default_value_t = 1)]
    runs: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn base_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
        cfg.evo.seed = s;
    }
    if cli.strict_scaling {
        cfg.strict_scaling = true;
    }
    Ok(cfg)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    write_atomic(path, text.as_bytes())?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let mut cfg = base_config(cli)?;
    match &cli.command {
        Command::Prep(a) => {
            if let Some(k) = a.knn_impute {
                cfg.preprocess.imputation = Imputation::KNearest { k };
            }
            if let Some(n) = a.n_per_label {
                cfg.n_per_label = (n > 0).then_some(n);
            }
            let spec = DatasetSpec {
                name: a.name.clone(),
                kind: a.source.kind,
                paths: a.source.paths.clone(),
                cache: None,
            };
            let mut ds = load_balanced(&spec, &cfg.preprocess, cfg.n_per_label, cfg.seed)?;
            if !cfg.strict_scaling {
                ds = MinMaxScaler::fit_transform(&ds).1;
            }
            std::fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
            let cache = cli.out.join(format!("{}.evofs", a.name));
            write_cache(&ds, &cache)?;
            eprintln!("wrote {} ({} rows, {} features, {} classes)", cache.display(), ds.n_rows(), ds.n_features(), ds.n_classes());
            write_text(
                &cli.out.join(format!("{}.provenance.json", a.name)),
                &serde_json::to_string_pretty(&ds.provenance)?,
            )
        }
        Command::Describe(a) => {
            let raw = ingest(&a.paths, a.kind)?;
            let text = serde_json::to_string_pretty(&describe(&raw))?;
            let _ = writeln!(std::io::stdout(), "{text}");
            write_text(&cli.out.join("describe.json"), &text)
        }
        Command::Select(a) => {
            let (pair, spec) = load_split(&a.split, &cfg)?;
            if let Some(n) = a.particles {
                cfg.evo = EvoConfig { k_neighbors: EvoConfig::new(n, 0, 0).k_neighbors, n_particles: n, ..cfg.evo };
            }
            if let Some(b) = a.budget {
                cfg.evo.max_fes = b;
            }
            if let Some(w) = &a.weights {
                cfg.weights = parse_weights(w)?;
            }
            if let Some(k) = a.folds {
                cfg.fitness.protocol = FitnessProtocol::KFold { folds: k };
            }
            if let Some(s) = a.inner_seed {
                cfg.fitness.inner_seed = s;
            }
            let r = select_features_with(&pair.train, &spec, cfg.weights, &cfg.evo, &cfg.fitness)?;
            eprintln!(
                "selected {}/{} features, inner cost {:.6}, {} evaluations",
                r.mask.count(),
                r.mask.len(),
                r.cost,
                r.opt.evaluations_used
            );
            write_text(&cli.out.join("selection.json"), &r.to_json()?)
        }
        Command::Eval(a) => {
            let (mut pair, spec) = load_split(&a.split, &cfg)?;
            if let Some(m) = &a.mask {
                let mask = read_mask(m)?;
                let cols = mask.indices();
                pair.train = pair.train.select_columns(&cols)?;
                pair.test = pair.test.select_columns(&cols)?;
            }
            let model = train(&spec, &pair.train, cfg.seed)?;
            let (pred, test_time) = model.predict_timed(&pair.test)?;
            let cm = confusion_matrix(pair.test.labels(), &pred, pair.test.n_classes())?;
            let metrics = scores(&cm)?.with_timings(model.train_time, test_time);
            println!(
                "{}: accuracy {:.4} precision {:.4} recall {:.4} f1 {:.4}",
                spec.name(),
                metrics.accuracy,
                metrics.precision_macro,
                metrics.recall_macro,
                metrics.f1_macro
            );
            let doc = serde_json::json!({
                "classifier": spec,
                "features": pair.train.feature_names(),
                "converged": model.converged,
                "metrics": metrics,
                "confusion_matrix": cm,
            });
            write_text(&cli.out.join("eval.json"), &serde_json::to_string_pretty(&doc)?)?;
            write_text(&cli.out.join("confusion.csv"), &cm.to_csv(pair.test.class_names()))?;
            save_model(&model, &cli.out.join("model.json"))
        }
        Command::Experiment => {
            if cli.config.is_none() {
                return Err(Error::Usage("experiment requires --config <file>".into()));
            }
            let report = run_experiment(&cfg)?;
            let dir = if cli.out == Path::new(".") { cfg.output_dir.clone() } else { cli.out.clone() };
            let (json, table) = report.write(&dir)?;
            eprintln!("wrote {} and {}", json.display(), table.display());
            for e in &report.body.errors {
                eprintln!("cell {}/{}/fs={} failed: {}", e.dataset, e.model, e.fs_applied, e.message);
            }
            match report.body.errors.first() {
                Some(e) if report.body.records.is_empty() => Err(match e.exit_code {
                    1 => Error::Config(e.message.clone()),
                    2 => Error::Data(e.message.clone()),
                    _ => Error::Internal(e.message.clone()),
                }),
                _ => Ok(()),
            }
        }
        Command::Bench(a) => {
            let function: TestFunction = a.function.parse()?;
            let seed = cli.seed.unwrap_or(0);
            let mut finals = Vec::new();
            for s in seed..seed + a.runs.max(1) {
                let run = bench(function, a.dims, &EvoConfig::new(a.particles, a.budget, s))?;
                let suffix = if a.runs > 1 { format!("_seed{s}") } else { String::new() };
                write_text(&cli.out.join(format!("convergence{suffix}.csv")), &run.history_csv())?;
                write_text(&cli.out.join(format!("summary{suffix}.json")), &run.summary_json()?)?;
                eprintln!("seed {s}: best {:e} in {:.3}s", run.summary.best_nel, run.summary.elapsed_seconds);
                finals.push(run.summary.best_nel);
            }
            if finals.len() > 1 {
                println!("median best_nel over {} runs: {:e}", finals.len(), median(&finals).unwrap_or(f64::NAN));
            }
            Ok(())
        }
    }
}

fn load_split(a: &SplitArgs, cfg: &ExperimentConfig) -> Result<(evofs::data::SplitPair, ClassifierSpec)> {
    let spec = ClassifierSpec::from_name(&a.classifier)?;
    let ds = read_cache(&a.data)?;
    let ratio = a.split_ratio.unwrap_or(cfg.split_ratio);
    let seed = a.split_seed.unwrap_or(cfg.split_seed);
    Ok((scaled_split(&ds, ratio, seed, cfg.strict_scaling)?, spec))
}

fn parse_weights(s: &str) -> Result<CostWeights> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Usage(format!("--weights {s:?}: {e}")))?;
    match v.as_slice() {
        [a, b, c] => CostWeights::new(*a, *b, *c, 0.0),
        [a, b, c, d] => CostWeights::new(*a, *b, *c, *d),
        _ => Err(Error::Usage(format!("--weights takes 3 or 4 comma-separated numbers, got {s:?}"))),
    }
}

fn read_mask(path: &Path) -> Result<FeatureMask> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: serde_json::Value = serde_json::from_str(&text)?;
    let mask = doc
        .get("mask")
        .ok_or_else(|| Error::Usage(format!("{} has no `mask` field", path.display())))?;
    serde_json::from_value(mask.clone()).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
}
