use plli_cli::{errors, model_file, table};

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use plli_core::{
    brute_force_1d, cluster_1d, evaluate, fit_eq_plli, fit_plli, predict, representatives,
    Dataset, FitConfig, Loss, ModelFamily, PlliModel,
};
use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use errors::{CliError, CliResult};
use table::Table;

#[derive(Parser)]
#[command(
    name = "plli",
    version,
    about = "Piecewise local-linear surrogates and optimal 1-D clustering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a surrogate on a CSV of features plus black-box predictions
    Fit(FitArgs),
    /// Evaluate a saved model on a CSV
    Evaluate(EvaluateArgs),
    /// Print the per-region table of a saved model
    Explain(ExplainArgs),
    /// Optimal 1-D clustering of a numeric column
    Cluster1d(Cluster1dArgs),
    /// Per-region representative rows and coverage statistics
    Representatives(RepresentativesArgs),
    /// Generate the synthetic benchmark dataset
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Squared,
    Absolute,
}

impl From<LossArg> for Loss {
    fn from(l: LossArg) -> Loss {
        match l {
            LossArg::Squared => Loss::Squared,
            LossArg::Absolute => Loss::Absolute,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Linear,
    Constant,
}

impl From<FamilyArg> for ModelFamily {
    fn from(m: FamilyArg) -> ModelFamily {
        match m {
            FamilyArg::Linear => ModelFamily::Linear,
            FamilyArg::Constant => ModelFamily::Constant,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum AlgoArg {
    /// Optimal interval boundaries via dynamic programming
    Op,
    /// Equal-quantile interval boundaries
    Eq,
}

impl AlgoArg {
    fn name(self) -> &'static str {
        match self {
            AlgoArg::Op => "op",
            AlgoArg::Eq => "eq",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectArg {
    /// Pick the (H, W) factorization with the lowest holdout MSE-f
    MseF,
}

#[derive(Args)]
struct FitArgs {
    /// Input CSV with a header row
    #[arg(long)]
    input: PathBuf,
    /// Name of the column holding the black-box predictions
    #[arg(long)]
    target_col: String,
    /// Number of range intervals (H); use together with --w
    #[arg(long, conflicts_with = "k")]
    h: Option<usize>,
    /// Feature-space regions per interval (W); use together with --h
    #[arg(long, conflicts_with = "k")]
    w: Option<usize>,
    /// Total region budget; sweeps all (H, W) factorizations of K
    #[arg(long)]
    k: Option<usize>,
    /// Criterion for the --k sweep
    #[arg(long, value_enum, default_value = "mse-f")]
    select: SelectArg,
    /// Holdout fraction for the --k sweep
    #[arg(long, default_value_t = 0.2)]
    holdout: f64,
    #[arg(long, value_enum, default_value = "squared")]
    loss: LossArg,
    /// Local model family
    #[arg(long = "model", value_enum, default_value = "linear")]
    family: FamilyArg,
    #[arg(long, value_enum, default_value = "op")]
    algo: AlgoArg,
    /// Split-candidate subsampling factor; 1 = exact
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Clip local-model outputs to lo,hi
    #[arg(long, value_name = "LO,HI")]
    clip: Option<String>,
    #[arg(long, default_value = ",")]
    delimiter: String,
    /// Output model file (JSON)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Name of the column holding the black-box predictions
    #[arg(long)]
    target_col: String,
    /// Optional ground-truth label column for MSE-p and R²
    #[arg(long)]
    label_col: Option<String>,
    /// Optional machine-readable report file (JSON)
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value = ",")]
    delimiter: String,
}

#[derive(Args)]
struct ExplainArgs {
    #[arg(long)]
    model: PathBuf,
    /// Decimal places for centroids and importances
    #[arg(long, default_value_t = 4)]
    precision: usize,
}

#[derive(Args)]
struct Cluster1dArgs {
    #[arg(long)]
    input: PathBuf,
    /// Column to cluster; defaults to the only column of a one-column CSV
    #[arg(long)]
    col: Option<String>,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "squared")]
    loss: LossArg,
    /// Cross-check against the exhaustive oracle (n <= 20)
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value = ",")]
    delimiter: String,
}

#[derive(Args)]
struct RepresentativesArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Name of the column holding the black-box predictions
    #[arg(long)]
    target_col: String,
    #[arg(long, default_value = ",")]
    delimiter: String,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Explain(args) => cmd_explain(args),
        Command::Cluster1d(args) => cmd_cluster1d(args),
        Command::Representatives(args) => cmd_representatives(args),
        Command::Synth(args) => cmd_synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn parse_delimiter(s: &str) -> CliResult<u8> {
    let bytes = s.as_bytes();
    if bytes.len() != 1 {
        return Err(CliError::Validation(format!(
            "delimiter must be a single ASCII character, got '{s}'"
        )));
    }
    Ok(bytes[0])
}

fn parse_clip(s: &str) -> CliResult<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').collect();
    let err = || CliError::Validation(format!("--clip expects 'lo,hi' with lo < hi, got '{s}'"));
    if parts.len() != 2 {
        return Err(err());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| err())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| err())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(err());
    }
    Ok((lo, hi))
}

fn fit_with_algo(ds: Dataset, cfg: &FitConfig, algo: AlgoArg) -> CliResult<PlliModel> {
    let model = match algo {
        AlgoArg::Op => fit_plli(ds, cfg)?,
        AlgoArg::Eq => fit_eq_plli(ds, cfg)?,
    };
    Ok(model)
}

/// Worker-thread cap: PLLI_THREADS if set, otherwise the machine parallelism.
fn thread_cap() -> usize {
    match std::env::var("PLLI_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&t| t >= 1).unwrap_or(1),
        Err(_) => std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1),
    }
}

/// Row subset of a dataset, keeping original row ids.
fn subset(ds: &Dataset, rows: &[usize]) -> CliResult<Dataset> {
    let d = ds.dim();
    let mut features = Vec::with_capacity(rows.len() * d);
    let mut target = Vec::with_capacity(rows.len());
    let mut ids = Vec::with_capacity(rows.len());
    for &i in rows {
        features.extend_from_slice(ds.row(i));
        target.push(ds.target()[i]);
        ids.push(ds.row_ids()[i]);
    }
    Ok(Dataset::new(
        features,
        target,
        ds.column_names().to_vec(),
        Some(ids),
    )?)
}

/// Seeded shuffle-based split into (train, holdout) index sets.
fn holdout_split(n: usize, fraction: f64, seed: u64) -> CliResult<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CliError::Validation(
            "--holdout must lie strictly between 0 and 1".to_string(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    let n_hold = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let holdout = order[..n_hold].to_vec();
    let train = order[n_hold..].to_vec();
    Ok((train, holdout))
}

/// All (H, W) pairs with H * W = k, ascending in H.
fn factorizations(k: usize) -> Vec<(usize, usize)> {
    (1..=k).filter(|h| k % h == 0).map(|h| (h, k / h)).collect()
}

/// Cross-validated sweep over the factorizations of K: fit each candidate on
/// the training split, score MSE-f on the holdout, return the winner's (H, W).
fn sweep_factorizations(
    ds: &Dataset,
    base_cfg: &FitConfig,
    k: usize,
    holdout: f64,
    algo: AlgoArg,
) -> CliResult<(usize, usize)> {
    let candidates = factorizations(k);
    let (train_idx, hold_idx) = holdout_split(ds.n(), holdout, base_cfg.seed)?;
    let train = subset(ds, &train_idx)?;
    let hold = subset(ds, &hold_idx)?;
    let n_workers = thread_cap().min(candidates.len()).max(1);

    let next = AtomicUsize::new(0);
    let scores: Mutex<Vec<Option<f64>>> = Mutex::new(vec![None; candidates.len()]);
    std::thread::scope(|scope| {
        for _ in 0..n_workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= candidates.len() {
                    break;
                }
                let (h, w) = candidates[idx];
                let mut cfg = base_cfg.clone();
                cfg.num_intervals = h;
                cfg.regions_per_interval = w;
                let score = fit_with_algo(train.clone(), &cfg, algo)
                    .and_then(|m| Ok(evaluate(&m, &hold, None)?))
                    .ok()
                    .map(|r| r.mse_f)
                    .filter(|s| s.is_finite());
                scores.lock().unwrap()[idx] = score;
            });
        }
    });

    let scores = scores.into_inner().unwrap();
    let mut best: Option<(usize, f64)> = None;
    for (idx, score) in scores.iter().enumerate() {
        if let Some(s) = score {
            // Ties keep the earlier candidate (lowest H).
            if best.map_or(true, |(_, b)| *s < b) {
                best = Some((idx, *s));
            }
        }
    }
    let (idx, score) = best.ok_or_else(|| {
        CliError::Validation(format!(
            "no (H, W) factorization of K={k} could be fitted on the training split"
        ))
    })?;
    let (h, w) = candidates[idx];
    println!("selected H={h}, W={w} (holdout MSE-f {score:.6e})");
    Ok((h, w))
}

fn cmd_fit(args: FitArgs) -> CliResult<()> {
    let delimiter = parse_delimiter(&args.delimiter)?;
    let table = table::read_table(&args.input, delimiter)?;
    let ds = table::dataset_from_table(&table, &args.target_col)?;

    let mut cfg = FitConfig::new(1, 1);
    cfg.loss = args.loss.into();
    cfg.model_family = args.family.into();
    cfg.stride = args.stride;
    cfg.seed = args.seed;
    cfg.clip_range = match &args.clip {
        Some(s) => Some(parse_clip(s)?),
        None => None,
    };

    let (h, w) = match (args.h, args.w, args.k) {
        (Some(h), Some(w), None) => (h, w),
        (None, None, Some(k)) => {
            if k == 0 {
                return Err(CliError::Validation(
                    "--k must be a positive integer".to_string(),
                ));
            }
            let SelectArg::MseF = args.select;
            sweep_factorizations(&ds, &cfg, k, args.holdout, args.algo)?
        }
        (None, None, None) => {
            return Err(CliError::Validation(
                "either --h and --w, or --k, must be given".to_string(),
            ))
        }
        _ => {
            return Err(CliError::Validation(
                "--h and --w must be given together".to_string(),
            ))
        }
    };
    cfg.num_intervals = h;
    cfg.regions_per_interval = w;
    cfg.validate().map_err(CliError::from)?;

    let columns = ds.column_names().to_vec();
    let n = ds.n();
    let model = fit_with_algo(ds.clone(), &cfg, args.algo)?;

    // Route every training row to count per-region sizes.
    let mut sizes = vec![0usize; model.region_count()];
    for i in 0..n {
        let (_, rid) = predict(&model, ds.row(i), Some(ds.target()[i]))?;
        sizes[rid] += 1;
    }

    let file = model_file::ModelFile::from_model(
        &model,
        &args.input.display().to_string(),
        args.algo.name(),
        &columns,
    );
    model_file::save(&file, &args.out)?;

    println!("algorithm: {}", args.algo.name());
    println!(
        "intervals (H): {h}  regions per interval (W): {w}  total regions: {}",
        model.region_count()
    );
    println!("training risk: {:.6e}", model.training_risk);
    print!("region sizes:");
    for s in &sizes {
        print!(" {s}");
    }
    println!();
    println!("wrote {}", args.out.display());
    Ok(())
}

/// Load a model and a CSV, matching the model's feature columns by name.
fn load_model_and_data(
    model_path: &Path,
    input: &Path,
    target_col: &str,
    delimiter: u8,
) -> CliResult<(model_file::ModelFile, Table, Dataset)> {
    let file = model_file::load(model_path)?;
    let table = table::read_table(input, delimiter)?;
    let ds = table::build_dataset(&table, &file.column_names, target_col)?;
    Ok((file, table, ds))
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.6e}"),
        None => "n/a".to_string(),
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> CliResult<()> {
    let delimiter = parse_delimiter(&args.delimiter)?;
    let (file, table, ds) =
        load_model_and_data(&args.model, &args.input, &args.target_col, delimiter)?;
    let model = file.into_model();
    let labels = match &args.label_col {
        Some(col) => Some(table::column_values(&table, col)?),
        None => None,
    };
    let report = evaluate(&model, &ds, labels.as_deref())?;

    println!("{:<8} {:>14}", "metric", "value");
    println!("{:<8} {:>14}", "MSE-f", format!("{:.6e}", report.mse_f));
    println!("{:<8} {:>14}", "MSE-p", fmt_opt(report.mse_p));
    println!("{:<8} {:>14}", "R2", fmt_opt(report.r2));
    println!("{:<8} {:>14}", "n", report.n_eval);

    if let Some(path) = &args.report {
        let mut text = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Io(format!("serializing report: {e}")))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn fmt_vec(v: &[f64], precision: usize) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.precision$}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Importance vector with the top-5 entries starred.
fn fmt_importances(imp: &[f64], precision: usize) -> String {
    let mut order: Vec<usize> = (0..imp.len()).collect();
    order.sort_by(|&a, &b| imp[b].total_cmp(&imp[a]));
    let top: Vec<usize> = order.into_iter().take(5).collect();
    let parts: Vec<String> = imp
        .iter()
        .enumerate()
        .map(|(j, x)| {
            if top.contains(&j) && *x > 0.0 {
                format!("{x:.precision$}*")
            } else {
                format!("{x:.precision$}")
            }
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_interval(lo: Option<f64>, hi: Option<f64>, precision: usize) -> String {
    let lo = lo.map_or("-inf".to_string(), |v| format!("{v:.precision$}"));
    let hi = hi.map_or("+inf".to_string(), |v| format!("{v:.precision$}"));
    format!("({lo}, {hi}]")
}

fn cmd_explain(args: ExplainArgs) -> CliResult<()> {
    let file = model_file::load(&args.model)?;
    let p = args.precision;
    println!("columns: {}", file.column_names.join(", "));
    println!(
        "{:<8} {:<24} {:<32} {:<40} {}",
        "region", "f-interval", "centroid", "importance (* = top-5)", "raw |b_j|"
    );
    let model = file.into_model();
    for (rid, iv, u) in model.region_ids() {
        let interval = &model.intervals[iv];
        let m = &interval.models[u];
        let raw: Vec<f64> = if m.coefficients.is_empty() {
            vec![0.0; model.dim()]
        } else {
            m.coefficients.iter().map(|b| b.abs()).collect()
        };
        let imp = plli_core::feature_importance(m, &interval.feature_stddevs[u]);
        println!(
            "{:<8} {:<24} {:<32} {:<40} {}",
            rid,
            fmt_interval(interval.f_low, interval.f_high, p),
            fmt_vec(&interval.centroids[u], p),
            fmt_importances(&imp, p),
            fmt_vec(&raw, p)
        );
    }
    Ok(())
}

fn cmd_cluster1d(args: Cluster1dArgs) -> CliResult<()> {
    let delimiter = parse_delimiter(&args.delimiter)?;
    let table = table::read_table(&args.input, delimiter)?;
    let values = match &args.col {
        Some(col) => table::column_values(&table, col)?,
        None => {
            if table.header.len() != 1 {
                return Err(CliError::Validation(
                    "input has multiple columns; select one with --col".to_string(),
                ));
            }
            table::column_values(&table, &table.header[0].clone())?
        }
    };
    let clustering = cluster_1d(&values, args.k, args.loss.into())?;

    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    // Boundary positions are indices into the sorted sequence; report the
    // midpoint between the neighboring values.
    let boundary_values: Vec<f64> = clustering
        .boundaries
        .iter()
        .map(|&b| (sorted[b - 1] + sorted[b]) / 2.0)
        .collect();

    println!("n: {}  k: {}", values.len(), args.k);
    print!("boundaries:");
    for b in &boundary_values {
        print!(" {b}");
    }
    println!();
    print!("centers:");
    for c in &clustering.centers {
        print!(" {c}");
    }
    println!();
    println!("total cost: {}", clustering.total_cost);

    if args.verify {
        if values.len() <= 20 {
            let oracle = brute_force_1d(&values, args.k, args.loss.into())?;
            if (oracle.total_cost - clustering.total_cost).abs() <= 1e-9 {
                println!("oracle match");
            } else {
                return Err(CliError::Numerical(format!(
                    "oracle mismatch: dp cost {} vs exhaustive cost {}",
                    clustering.total_cost, oracle.total_cost
                )));
            }
        } else {
            println!("oracle skipped (n > 20)");
        }
    }
    Ok(())
}

fn cmd_representatives(args: RepresentativesArgs) -> CliResult<()> {
    let delimiter = parse_delimiter(&args.delimiter)?;
    let (file, _table, ds) =
        load_model_and_data(&args.model, &args.input, &args.target_col, delimiter)?;
    let model = file.into_model();
    let report = representatives(&model, &ds)?;

    println!(
        "{:<8} {:<8} {:<32} {:<14} {}",
        "region", "row", "centroid", "f", "importances"
    );
    for r in &report.representatives {
        println!(
            "{:<8} {:<8} {:<32} {:<14} {}",
            r.region_id,
            r.nearest_row_id,
            fmt_vec(&r.centroid, 4),
            format!("{:.6}", r.f_value),
            fmt_vec(&r.importances, 4)
        );
    }
    let full = |v: Option<f64>| match v {
        Some(v) => format!("{v}"),
        None => "n/a".to_string(),
    };
    println!("coverage (features):    {}", full(report.coverage_features));
    println!("coverage (predictions): {}", full(report.coverage_predictions));
    println!("coverage (importances): {}", full(report.coverage_importances));
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> CliResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut out = Vec::new();
    writeln!(out, "x1,x2,f").expect("in-memory write");
    for _ in 0..args.n {
        let x1: f64 = StandardNormal.sample(&mut rng);
        let x2: f64 = StandardNormal.sample(&mut rng);
        let f = (x1 + x2) * (x1 + x2);
        writeln!(out, "{x1},{x2},{f}").expect("in-memory write");
    }
    fs::write(&args.out, out).map_err(|e| CliError::Io(format!("{}: {e}", args.out.display())))?;
    println!("wrote {} rows to {}", args.n, args.out.display());
    Ok(())
}
