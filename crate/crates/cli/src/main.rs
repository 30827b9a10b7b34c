use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use correntia::baselines::Loss;
use correntia::correntropy::SigmaMode;
use correntia::dataset::{load_csv, load_feature_csv, write_csv};
use correntia::eval::{accuracy, auc, curve_csv, multiclass_binary_scores, pr_curve, roc_curve};
use correntia::harness::{
    emit_reports, generate_synthetic, run_experiment, select_alpha, AlphaChoice, ExperimentConfig, MethodSpec,
    SyntheticSpec,
};
use correntia::kernels::{Bandwidth, KernelKind, RepresentationConfig};
use correntia::model::{predict_labels, score_matrix};
use correntia::regmaxcem::{self, TrainConfig};
use correntia::{Dataset, Error, Model, Result};

#[derive(Parser, Debug)]
#[command(name = "correntia", version, about = "Correntropy-based robust classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model on a labelled CSV.
    Train(TrainArgs),
    /// Score a CSV with a trained model.
    Predict(PredictArgs),
    /// Accuracy, AUC and curves of a trained model on a labelled CSV.
    Eval(EvalArgs),
    /// Run a config-driven experiment and write its reports.
    Experiment(ExperimentArgs),
    /// Write a synthetic Gaussian-blob dataset as CSV.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Regmaxcem,
    Square,
    Hinge,
    Logistic,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RepresentationMode {
    Linear,
    Kernel,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KernelArg {
    Linear,
    Rbf,
}

/// Hyperparameters shared by `train` and `experiment`. Unset flags keep the
/// method (or config) values.
#[derive(Args, Debug)]
struct HyperArgs {
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated alpha grid chosen by inner cross-validation;
    /// `default` selects 1e-4,1e-3,1e-2,1e-1,1.
    #[arg(long, value_parser = parse_grid)]
    alpha_grid: Option<Grid>,
    #[arg(long, default_value_t = 3)]
    inner_folds: usize,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Step size of the hinge and logistic baselines.
    #[arg(long)]
    step_size: Option<f64>,
    /// `adaptive` or a fixed positive kernel width.
    #[arg(long, value_parser = parse_sigma)]
    sigma: Option<SigmaMode>,
    #[arg(long)]
    sigma_floor: Option<f64>,
    #[arg(long, value_enum)]
    representation: Option<RepresentationMode>,
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    /// `median` or a fixed positive rbf bandwidth.
    #[arg(long, value_parser = parse_bandwidth)]
    bandwidth: Option<Bandwidth>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    label_col: String,
    #[arg(long, value_enum, default_value = "regmaxcem")]
    method: Method,
    #[arg(long)]
    model_out: PathBuf,
    /// Per-iteration objective trace (regmaxcem only).
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    label_col: String,
    /// Class name whose score drives the curves; defaults to the first class.
    #[arg(long)]
    positive_class: Option<String>,
    /// Directory for `roc.csv` and `pr.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    noise_rates: Option<Vec<f64>>,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Class means separated by `;`, coordinates by `,`, e.g. `2,0;-2,0`.
    #[arg(long, value_parser = parse_means, allow_hyphen_values = true)]
    means: Means,
    #[arg(long, default_value_t = 1.0)]
    std: f64,
    #[arg(long, default_value_t = 100)]
    per_class: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "label")]
    label_col: String,
    #[arg(long)]
    out: PathBuf,
}

fn parse_sigma(s: &str) -> std::result::Result<SigmaMode, String> {
    if s == "adaptive" {
        return Ok(SigmaMode::Adaptive);
    }
    s.parse()
        .map(SigmaMode::Fixed)
        .map_err(|_| format!("expected 'adaptive' or a number, got '{s}'"))
}

fn parse_bandwidth(s: &str) -> std::result::Result<Bandwidth, String> {
    if s == "median" {
        return Ok(Bandwidth::Median);
    }
    s.parse()
        .map(Bandwidth::Fixed)
        .map_err(|_| format!("expected 'median' or a number, got '{s}'"))
}

#[derive(Clone, Debug)]
struct Grid(Vec<f64>);

#[derive(Clone, Debug)]
struct Means(Vec<Vec<f64>>);

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad number '{v}'")))
        .collect()
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    if s == "default" {
        if let AlphaChoice::Grid { grid, .. } = AlphaChoice::default_grid() {
            return Ok(Grid(grid));
        }
    }
    parse_list(s).map(Grid)
}

fn parse_means(s: &str) -> std::result::Result<Means, String> {
    s.split(';').map(parse_list).collect::<std::result::Result<_, _>>().map(Means)
}

impl HyperArgs {
    fn representation(&self, base: RepresentationConfig) -> RepresentationConfig {
        let (mut kernel, mut bandwidth) = match base {
            RepresentationConfig::Kernel { kernel, bandwidth } => (kernel, bandwidth),
            RepresentationConfig::Linear => (KernelKind::Rbf, Bandwidth::Median),
        };
        if let Some(k) = self.kernel {
            kernel = match k {
                KernelArg::Linear => KernelKind::Linear,
                KernelArg::Rbf => KernelKind::Rbf,
            };
        }
        if let Some(b) = self.bandwidth {
            bandwidth = b;
        }
        let kernel_mode = match self.representation {
            Some(RepresentationMode::Kernel) => true,
            Some(RepresentationMode::Linear) => false,
            None => {
                matches!(base, RepresentationConfig::Kernel { .. })
                    || self.kernel.is_some()
                    || self.bandwidth.is_some()
            }
        };
        if kernel_mode {
            RepresentationConfig::Kernel { kernel, bandwidth }
        } else {
            RepresentationConfig::Linear
        }
    }

    fn apply(&self, spec: &mut MethodSpec) {
        if let Some(Grid(grid)) = &self.alpha_grid {
            *spec.alpha_mut() = AlphaChoice::Grid {
                grid: grid.clone(),
                folds: self.inner_folds,
            };
        } else if let Some(a) = self.alpha {
            *spec.alpha_mut() = AlphaChoice::Fixed(a);
        }
        if let Some(n) = self.iters {
            spec.set_iters(n);
        }
        match spec {
            MethodSpec::Regmaxcem {
                tol,
                sigma,
                sigma_floor,
                ..
            } => {
                if let Some(t) = self.tol {
                    *tol = t;
                }
                if let Some(s) = self.sigma {
                    *sigma = s;
                }
                if let Some(f) = self.sigma_floor {
                    *sigma_floor = f;
                }
            }
            MethodSpec::Hinge { tol, step_size, .. } | MethodSpec::Logistic { tol, step_size, .. } => {
                if self.tol.is_some() {
                    *tol = self.tol;
                }
                if self.step_size.is_some() {
                    *step_size = self.step_size;
                }
            }
            MethodSpec::Square { .. } => {}
        }
    }
}

fn method_spec(method: Method) -> MethodSpec {
    match method {
        Method::Regmaxcem => MethodSpec::regmaxcem(),
        Method::Square => MethodSpec::baseline(Loss::Square),
        Method::Hinge => MethodSpec::baseline(Loss::Hinge),
        Method::Logistic => MethodSpec::baseline(Loss::Logistic),
    }
}

fn train(args: &TrainArgs) -> Result<()> {
    let ds = load_csv(&args.data, &args.label_col)?;
    let rep = args.hyper.representation(RepresentationConfig::Linear);
    let mut spec = method_spec(args.method);
    args.hyper.apply(&mut spec);

    let (model, alpha) = match (&spec, &args.trace_out) {
        (
            MethodSpec::Regmaxcem {
                iters,
                tol,
                sigma,
                sigma_floor,
                ..
            },
            Some(trace_path),
        ) => {
            let alpha = match spec.alpha() {
                AlphaChoice::Fixed(a) => *a,
                AlphaChoice::Grid { grid, folds } => select_alpha(&spec, &ds, &rep, grid, *folds, args.seed)?,
            };
            let cfg = TrainConfig {
                alpha,
                max_iters: *iters,
                tol: *tol,
                sigma_policy: correntia::correntropy::SigmaPolicy {
                    mode: *sigma,
                    floor: *sigma_floor,
                },
                representation: rep,
                trace: true,
            };
            let (model, trace) = regmaxcem::train(&ds, &cfg)?;
            write_text(trace_path, &trace.to_csv())?;
            (model, alpha)
        }
        (_, Some(_)) => {
            return Err(Error::InvalidArgument(
                "--trace-out is only available for --method regmaxcem".into(),
            ))
        }
        (_, None) => spec.fit(&ds, &rep, args.seed)?,
    };
    model.save(&args.model_out)?;
    let pred = predict_labels(&model, ds.features())?;
    println!(
        "method={} alpha={} classes={} samples={} train_accuracy={}",
        model.method,
        alpha,
        model.num_classes(),
        ds.num_samples(),
        accuracy(&pred, ds.labels())?
    );
    Ok(())
}

fn predict(args: &PredictArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    let x = load_feature_csv(&args.data, &model.feature_names)?;
    let f = score_matrix(&model, &x)?;
    let labels = predict_labels(&model, &x)?;
    let mut out = String::from("label");
    for name in &model.class_names {
        out.push_str(&format!(",score_{name}"));
    }
    out.push('\n');
    for (i, &l) in labels.iter().enumerate() {
        out.push_str(&model.class_names[l - 1]);
        for c in 0..model.num_classes() {
            out.push_str(&format!(",{}", f[(c, i)]));
        }
        out.push('\n');
    }
    write_text(&args.out, &out)
}

/// Relabels `ds` into the model's class numbering by class name.
fn align_labels(ds: &Dataset, model: &Model) -> Result<Dataset> {
    let map: Vec<usize> = ds
        .class_names()
        .iter()
        .map(|name| {
            model
                .class_names
                .iter()
                .position(|m| m == name)
                .map(|p| p + 1)
                .ok_or_else(|| Error::InvalidDataset(format!("class '{name}' unknown to the model")))
        })
        .collect::<Result<_>>()?;
    let labels: Vec<usize> = ds.labels().iter().map(|&l| map[l - 1]).collect();
    let ds = ds.select_features(&model.feature_names)?;
    Dataset::with_names(
        ds.features().clone(),
        labels,
        model.num_classes(),
        model.class_names.clone(),
        model.feature_names.clone(),
    )
}

fn eval(args: &EvalArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    let ds = align_labels(&load_csv(&args.data, &args.label_col)?, &model)?;
    let positive = match &args.positive_class {
        None => 1,
        Some(name) => {
            model
                .class_names
                .iter()
                .position(|m| m == name)
                .ok_or_else(|| Error::InvalidArgument(format!("positive class '{name}' unknown to the model")))?
                + 1
        }
    };
    let acc = accuracy(&predict_labels(&model, ds.features())?, ds.labels())?;
    let (scores, truth) = multiclass_binary_scores(&model, &ds, positive)?;
    let roc = roc_curve(&scores, &truth).ok();
    let area = roc.as_deref().map(auc).transpose()?;
    let auc_text = area.map_or("none".to_string(), |a| a.to_string());
    println!("accuracy={acc} auc={auc_text} samples={}", ds.num_samples());
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        if let Some(roc) = &roc {
            write_text(&dir.join("roc.csv"), &curve_csv(roc))?;
        }
        if let Ok(pr) = pr_curve(&scores, &truth) {
            write_text(&dir.join("pr.csv"), &curve_csv(&pr))?;
        }
    }
    Ok(())
}

fn experiment(args: &ExperimentArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(rates) = &args.noise_rates {
        cfg.noise_rates = rates.clone();
    }
    cfg.representation = args.hyper.representation(cfg.representation);
    for entry in &mut cfg.methods {
        args.hyper.apply(&mut entry.spec);
    }
    let outcome = run_experiment(&cfg)?;
    emit_reports(&outcome, &args.out)?;
    for r in &outcome.reports {
        let acc = r.accuracy.map_or("none".to_string(), |a| format!("{a:.4}"));
        let area = r.auc.map_or("none".to_string(), |a| format!("{a:.4}"));
        println!(
            "method={} noise={} accuracy={acc} auc={area} failures={}",
            r.method,
            r.noise_rate,
            r.failures.len()
        );
    }
    for c in &outcome.comparisons {
        let p = c.p.map_or("none".to_string(), |p| format!("{p:.4}"));
        println!(
            "ttest noise={} {} vs {} pairs={} p={p} status={}",
            c.noise_rate, c.method_a, c.method_b, c.pairs, c.status
        );
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        means: args.means.0.clone(),
        std: args.std,
        per_class: args.per_class,
        seed: args.seed,
    };
    let ds = generate_synthetic(&spec)?;
    write_csv(&ds, &args.out, &args.label_col)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn fail(kind: &str, message: &str) -> ExitCode {
    let message = serde_json::to_string(message).unwrap_or_else(|_| "\"\"".into());
    eprintln!("error: kind={kind} message={message}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail("usage", first);
        }
    };
    let result = match &cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Eval(a) => eval(a),
        Command::Experiment(a) => experiment(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string()),
    }
}
