//! Experiment runner.
//!
//! An experiment is a JSON config naming a dataset (CSV file or synthetic
//! Gaussian blobs), a representation, a list of methods, an evaluation
//! protocol (repeated random splits or k-fold) and a list of training-label
//! noise rates. Every (noise rate, split, method) cell injects noise into the
//! training portion only, trains, and scores the untouched test portion.
//! Per-split accuracies of each method pair are compared with a paired
//! t-test.
//!
//! All randomness is derived from the config seed, so the outcome (and the
//! files written by [`emit_reports`]) is a deterministic function of the
//! config.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::baselines::{self, BaselineConfig, Loss};
use crate::correntropy::{SigmaMode, SigmaPolicy, DEFAULT_SIGMA_FLOOR};
use crate::dataset::{self, complement, inject_label_noise, kfold_indices, split_indices, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::eval::{self, accuracy, auc, curve_csv, pr_curve, roc_curve, EvalReport};
use crate::kernels::RepresentationConfig;
use crate::model::{predict_labels, Model};
use crate::regmaxcem::{self, TrainConfig};
use crate::rng::{derive_seed, seeded};

/// Isotropic Gaussian blobs, one per class mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub means: Vec<Vec<f64>>,
    pub std: f64,
    pub per_class: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn num_classes(&self) -> usize {
        self.means.len()
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.means.is_empty() {
            return bad("synthetic spec needs at least one class mean".into());
        }
        let dim = self.means[0].len();
        if dim == 0 || self.means.iter().any(|m| m.len() != dim) {
            return bad("class means must share a nonzero dimension".into());
        }
        if self.means.iter().flatten().any(|v| !v.is_finite()) {
            return bad("class means must be finite".into());
        }
        for i in 0..self.means.len() {
            for j in (i + 1)..self.means.len() {
                if self.means[i] == self.means[j] {
                    return bad(format!("class means {} and {} coincide", i + 1, j + 1));
                }
            }
        }
        if !(self.std > 0.0 && self.std.is_finite()) {
            return bad(format!("std must be positive, got {}", self.std));
        }
        if self.per_class == 0 {
            return bad("per_class must be >= 1".into());
        }
        Ok(())
    }
}

/// Samples `per_class` points around each mean, class by class.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let dim = spec.means[0].len();
    let n = spec.per_class * spec.means.len();
    let mut rng = seeded(spec.seed);
    let mut values = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for (c, mean) in spec.means.iter().enumerate() {
        for _ in 0..spec.per_class {
            for &m in mean {
                let z: f64 = StandardNormal.sample(&mut rng);
                values.push(m + spec.std * z);
            }
            labels.push(c + 1);
        }
    }
    Dataset::new(DMatrix::from_row_slice(n, dim, &values), labels, spec.means.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Synthetic(SyntheticSpec),
    Csv { path: PathBuf, label_col: String },
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Synthetic(spec) => generate_synthetic(spec),
            DataSource::Csv { path, label_col } => dataset::load_csv(path, label_col),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    RepeatedSplit { times: usize, train_fraction: f64 },
    Kfold { k: usize },
}

/// A fixed regularization weight, or a grid searched by inner k-fold
/// cross-validation on each training portion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaChoice {
    Fixed(f64),
    Grid {
        grid: Vec<f64>,
        #[serde(default = "default_inner_folds")]
        folds: usize,
    },
}

fn default_inner_folds() -> usize {
    3
}

impl Default for AlphaChoice {
    fn default() -> Self {
        AlphaChoice::Fixed(0.01)
    }
}

impl AlphaChoice {
    /// Log-spaced grid `1e-4 .. 1` (five points).
    pub fn default_grid() -> Self {
        AlphaChoice::Grid {
            grid: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            folds: default_inner_folds(),
        }
    }
}

fn default_iters() -> usize {
    20
}

fn default_tol() -> f64 {
    1e-6
}

fn default_sigma() -> SigmaMode {
    SigmaMode::Adaptive
}

fn default_floor() -> f64 {
    DEFAULT_SIGMA_FLOOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum MethodSpec {
    Regmaxcem {
        #[serde(default)]
        alpha: AlphaChoice,
        #[serde(default = "default_iters")]
        iters: usize,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_sigma")]
        sigma: SigmaMode,
        #[serde(default = "default_floor")]
        sigma_floor: f64,
    },
    Square {
        #[serde(default)]
        alpha: AlphaChoice,
    },
    Hinge {
        #[serde(default)]
        alpha: AlphaChoice,
        iters: Option<usize>,
        step_size: Option<f64>,
        tol: Option<f64>,
    },
    Logistic {
        #[serde(default)]
        alpha: AlphaChoice,
        iters: Option<usize>,
        step_size: Option<f64>,
        tol: Option<f64>,
    },
}

impl MethodSpec {
    pub fn regmaxcem() -> Self {
        MethodSpec::Regmaxcem {
            alpha: AlphaChoice::default(),
            iters: default_iters(),
            tol: default_tol(),
            sigma: default_sigma(),
            sigma_floor: default_floor(),
        }
    }

    pub fn baseline(loss: Loss) -> Self {
        let alpha = AlphaChoice::default();
        match loss {
            Loss::Square => MethodSpec::Square { alpha },
            Loss::Hinge => MethodSpec::Hinge {
                alpha,
                iters: None,
                step_size: None,
                tol: None,
            },
            Loss::Logistic => MethodSpec::Logistic {
                alpha,
                iters: None,
                step_size: None,
                tol: None,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MethodSpec::Regmaxcem { .. } => "regmaxcem",
            MethodSpec::Square { .. } => "square",
            MethodSpec::Hinge { .. } => "hinge",
            MethodSpec::Logistic { .. } => "logistic",
        }
    }

    pub fn alpha(&self) -> &AlphaChoice {
        match self {
            MethodSpec::Regmaxcem { alpha, .. }
            | MethodSpec::Square { alpha }
            | MethodSpec::Hinge { alpha, .. }
            | MethodSpec::Logistic { alpha, .. } => alpha,
        }
    }

    pub fn alpha_mut(&mut self) -> &mut AlphaChoice {
        match self {
            MethodSpec::Regmaxcem { alpha, .. }
            | MethodSpec::Square { alpha }
            | MethodSpec::Hinge { alpha, .. }
            | MethodSpec::Logistic { alpha, .. } => alpha,
        }
    }

    /// Overrides the iteration cap of iterative methods.
    pub fn set_iters(&mut self, n: usize) {
        match self {
            MethodSpec::Regmaxcem { iters, .. } => *iters = n,
            MethodSpec::Hinge { iters, .. } | MethodSpec::Logistic { iters, .. } => *iters = Some(n),
            MethodSpec::Square { .. } => {}
        }
    }

    fn validate(&self) -> Result<()> {
        match self.alpha() {
            AlphaChoice::Fixed(a) if !(*a >= 0.0 && a.is_finite()) => {
                return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {a}")))
            }
            AlphaChoice::Grid { grid, folds } => {
                if grid.is_empty() || grid.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
                    return Err(Error::InvalidArgument(
                        "alpha grid must be a non-empty list of nonnegative numbers".into(),
                    ));
                }
                if *folds < 2 {
                    return Err(Error::InvalidArgument("inner folds must be >= 2".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Trains with a fixed `alpha` (grid settings are ignored).
    pub fn fit_with_alpha(&self, ds: &Dataset, rep: &RepresentationConfig, alpha: f64) -> Result<Model> {
        match self {
            MethodSpec::Regmaxcem {
                iters,
                tol,
                sigma,
                sigma_floor,
                ..
            } => {
                let cfg = TrainConfig {
                    alpha,
                    max_iters: *iters,
                    tol: *tol,
                    sigma_policy: SigmaPolicy {
                        mode: *sigma,
                        floor: *sigma_floor,
                    },
                    representation: *rep,
                    trace: false,
                };
                regmaxcem::train(ds, &cfg).map(|(m, _)| m)
            }
            MethodSpec::Square { .. } => baselines::train_square(ds, rep, alpha),
            MethodSpec::Hinge {
                iters,
                step_size,
                tol,
                ..
            } => baselines::train_hinge(ds, rep, &baseline_config(Loss::Hinge, alpha, *iters, *step_size, *tol)),
            MethodSpec::Logistic {
                iters,
                step_size,
                tol,
                ..
            } => baselines::train_logistic(
                ds,
                rep,
                &baseline_config(Loss::Logistic, alpha, *iters, *step_size, *tol),
            ),
        }
    }

    /// Trains, first choosing alpha by inner cross-validation when a grid is
    /// configured. Returns the model and the alpha used.
    pub fn fit(&self, ds: &Dataset, rep: &RepresentationConfig, seed: u64) -> Result<(Model, f64)> {
        self.validate()?;
        let alpha = match self.alpha() {
            AlphaChoice::Fixed(a) => *a,
            AlphaChoice::Grid { grid, folds } => select_alpha(self, ds, rep, grid, *folds, seed)?,
        };
        Ok((self.fit_with_alpha(ds, rep, alpha)?, alpha))
    }
}

fn baseline_config(
    loss: Loss,
    alpha: f64,
    iters: Option<usize>,
    step_size: Option<f64>,
    tol: Option<f64>,
) -> BaselineConfig {
    let d = BaselineConfig::new(loss, alpha);
    BaselineConfig {
        max_iters: iters.unwrap_or(d.max_iters),
        step_size: step_size.unwrap_or(d.step_size),
        tol: tol.unwrap_or(d.tol),
        ..d
    }
}

/// Picks the grid value with the best mean inner-fold accuracy; ties go to
/// the earlier grid entry. Folds whose training fails count as accuracy 0.
pub fn select_alpha(
    method: &MethodSpec,
    ds: &Dataset,
    rep: &RepresentationConfig,
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<f64> {
    let n = ds.num_samples();
    let test_folds = kfold_indices(n, folds.min(n), seed)?;
    let mut best = (grid[0], f64::NEG_INFINITY);
    for &alpha in grid {
        let mut total = 0.0;
        for test in &test_folds {
            let train = ds.subset(&complement(n, test));
            let held = ds.subset(test);
            total += method
                .fit_with_alpha(&train, rep, alpha)
                .and_then(|m| predict_labels(&m, held.features()))
                .and_then(|p| accuracy(&p, held.labels()))
                .unwrap_or(0.0);
        }
        let mean = total / test_folds.len() as f64;
        if mean > best.1 {
            best = (alpha, mean);
        }
    }
    Ok(best.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodEntry {
    /// Display name; defaults to the method kind, made unique within the
    /// experiment by numeric suffixes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub spec: MethodSpec,
}

fn default_noise_rates() -> Vec<f64> {
    vec![0.0]
}

fn default_positive_class() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DataSource,
    #[serde(default)]
    pub representation: RepresentationConfig,
    pub methods: Vec<MethodEntry>,
    pub protocol: Protocol,
    #[serde(default = "default_noise_rates")]
    pub noise_rates: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Class whose score drives the ROC and precision-recall curves.
    #[serde(default = "default_positive_class")]
    pub positive_class: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("method list is empty".into()));
        }
        if let Some(r) = self.noise_rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::InvalidArgument(format!("noise rate {r} outside [0, 1]")));
        }
        if self.noise_rates.is_empty() {
            return Err(Error::InvalidArgument("noise rate list is empty".into()));
        }
        match self.protocol {
            Protocol::RepeatedSplit { times, train_fraction } => {
                if times == 0 {
                    return Err(Error::InvalidArgument("repeated_split.times must be >= 1".into()));
                }
                if !(train_fraction > 0.0 && train_fraction < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "train_fraction must lie in (0, 1), got {train_fraction}"
                    )));
                }
            }
            Protocol::Kfold { k } if k < 2 => {
                return Err(Error::InvalidArgument("kfold.k must be >= 2".into()))
            }
            Protocol::Kfold { .. } => {}
        }
        for m in &self.methods {
            m.spec.validate()?;
        }
        Ok(())
    }

    /// Display names, unique within the experiment.
    pub fn method_names(&self) -> Vec<String> {
        let base: Vec<String> = self
            .methods
            .iter()
            .map(|m| m.name.clone().unwrap_or_else(|| m.spec.kind().to_string()))
            .collect();
        let mut names = Vec::with_capacity(base.len());
        for (i, b) in base.iter().enumerate() {
            let mut name = b.clone();
            let mut k = 2;
            while base[..i].contains(&name) || names.contains(&name) {
                name = format!("{b}-{k}");
                k += 1;
            }
            names.push(name);
        }
        names
    }
}

/// Train and test indices of one split or fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn plan_folds(ds: &Dataset, protocol: &Protocol, seed: u64) -> Result<Vec<FoldPlan>> {
    match *protocol {
        Protocol::RepeatedSplit { times, train_fraction } => (0..times)
            .map(|r| {
                let spec = SplitSpec {
                    train_fraction,
                    seed: derive_seed(seed, &[0, r as u64]),
                };
                split_indices(ds, spec).map(|(train, test)| FoldPlan { train, test })
            })
            .collect(),
        Protocol::Kfold { k } => {
            let n = ds.num_samples();
            Ok(kfold_indices(n, k, derive_seed(seed, &[1]))?
                .into_iter()
                .map(|test| FoldPlan {
                    train: complement(n, &test),
                    test,
                })
                .collect())
        }
    }
}

/// Seed for the label noise of noise rate `q` on fold `f`. Shared by all
/// methods so they see identical noisy training sets.
pub fn noise_seed(seed: u64, q: usize, f: usize) -> u64 {
    derive_seed(seed, &[2, q as u64, f as u64])
}

/// Paired t-test of two methods' per-fold accuracies at one noise rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub noise_rate: f64,
    pub method_a: String,
    pub method_b: String,
    /// Folds where both methods produced an accuracy.
    pub pairs: usize,
    pub mean_difference: Option<f64>,
    pub t: Option<f64>,
    pub p: Option<f64>,
    /// `ok`, `degenerate_variance`, or an error description.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub num_folds: usize,
    pub reports: Vec<EvalReport>,
    pub comparisons: Vec<Comparison>,
}

struct Cell {
    accuracy: f64,
    auc: Option<f64>,
    scores: Vec<f64>,
    truth: Vec<bool>,
}

fn run_cell(
    spec: &MethodSpec,
    train: &Dataset,
    test: &Dataset,
    rep: &RepresentationConfig,
    positive_class: usize,
    seed: u64,
) -> Result<Cell> {
    let (model, _) = spec.fit(train, rep, seed)?;
    let pred = predict_labels(&model, test.features())?;
    let acc = accuracy(&pred, test.labels())?;
    let (scores, truth) = eval::multiclass_binary_scores(&model, test, positive_class)?;
    let fold_auc = roc_curve(&scores, &truth).and_then(|c| auc(&c)).ok();
    Ok(Cell {
        accuracy: acc,
        auc: fold_auc,
        scores,
        truth,
    })
}

/// Runs every (noise rate, method, fold) cell of `cfg`.
///
/// Reports come back noise-rate major, then in config method order. A cell
/// that fails is recorded in its report's `failures` and skipped; dataset,
/// config and split errors abort the run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let ds = cfg.dataset.load()?;
    if cfg.positive_class == 0 || cfg.positive_class > ds.num_classes() {
        return Err(Error::LabelOutOfRange {
            label: cfg.positive_class,
            num_classes: ds.num_classes(),
        });
    }
    let folds = plan_folds(&ds, &cfg.protocol, cfg.seed)?;
    let names = cfg.method_names();
    let mut reports = Vec::new();
    let mut comparisons = Vec::new();

    for (q, &rate) in cfg.noise_rates.iter().enumerate() {
        let mut rows: Vec<EvalReport> = names
            .iter()
            .map(|name| EvalReport {
                method: name.clone(),
                noise_rate: rate,
                accuracy: None,
                roc: Vec::new(),
                pr: Vec::new(),
                auc: None,
                per_fold_accuracy: Vec::new(),
                per_fold_auc: Vec::new(),
                per_fold_label_changes: Vec::new(),
                failures: Vec::new(),
            })
            .collect();
        let mut fold_acc: Vec<Vec<Option<f64>>> = vec![Vec::new(); names.len()];
        let mut pooled: Vec<(Vec<f64>, Vec<bool>)> = vec![(Vec::new(), Vec::new()); names.len()];

        for (f, plan) in folds.iter().enumerate() {
            let pristine_train = ds.subset(&plan.train);
            let test = ds.subset(&plan.test);
            let train = inject_label_noise(&pristine_train, rate, noise_seed(cfg.seed, q, f));
            let changes = train.as_ref().map_or(0, |t| {
                t.labels()
                    .iter()
                    .zip(pristine_train.labels())
                    .filter(|(a, b)| a != b)
                    .count()
            });
            for (m, entry) in cfg.methods.iter().enumerate() {
                let report = &mut rows[m];
                report.per_fold_label_changes.push(changes);
                let outcome = train.as_ref().map_err(clone_error).and_then(|train| {
                    run_cell(
                        &entry.spec,
                        train,
                        &test,
                        &cfg.representation,
                        cfg.positive_class,
                        derive_seed(cfg.seed, &[3, q as u64, f as u64, m as u64]),
                    )
                });
                match outcome {
                    Ok(cell) => {
                        report.per_fold_accuracy.push(cell.accuracy);
                        report.per_fold_auc.push(cell.auc);
                        fold_acc[m].push(Some(cell.accuracy));
                        pooled[m].0.extend(cell.scores);
                        pooled[m].1.extend(cell.truth);
                    }
                    Err(e) => {
                        report.failures.push(format!("fold {}: {e}", f + 1));
                        fold_acc[m].push(None);
                    }
                }
            }
        }

        for (m, report) in rows.iter_mut().enumerate() {
            let accs = &report.per_fold_accuracy;
            if !accs.is_empty() {
                report.accuracy = Some(accs.iter().sum::<f64>() / accs.len() as f64);
            }
            let aucs: Vec<f64> = report.per_fold_auc.iter().flatten().copied().collect();
            if !aucs.is_empty() {
                report.auc = Some(aucs.iter().sum::<f64>() / aucs.len() as f64);
            }
            let (scores, truth) = &pooled[m];
            if let Ok(roc) = roc_curve(scores, truth) {
                report.roc = roc;
            }
            if let Ok(pr) = pr_curve(scores, truth) {
                report.pr = pr;
            }
        }

        for a in 0..names.len() {
            for b in (a + 1)..names.len() {
                let (xa, xb): (Vec<f64>, Vec<f64>) = fold_acc[a]
                    .iter()
                    .zip(&fold_acc[b])
                    .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
                    .unzip();
                let pairs = xa.len();
                let mean_difference = (pairs > 0)
                    .then(|| xa.iter().zip(&xb).map(|(x, y)| x - y).sum::<f64>() / pairs as f64);
                let (t, p, status) = match eval::paired_ttest(&xa, &xb) {
                    Ok(r) => (Some(r.t), Some(r.p), "ok".to_string()),
                    Err(Error::DegenerateVariance) => (None, None, "degenerate_variance".to_string()),
                    Err(e) => (None, None, e.to_string()),
                };
                comparisons.push(Comparison {
                    noise_rate: rate,
                    method_a: names[a].clone(),
                    method_b: names[b].clone(),
                    pairs,
                    mean_difference,
                    t,
                    p,
                    status,
                });
            }
        }
        reports.extend(rows);
    }
    Ok(ExperimentOutcome {
        num_folds: folds.len(),
        reports,
        comparisons,
    })
}

fn clone_error(e: &Error) -> Error {
    Error::InvalidArgument(e.to_string())
}

/// File stem for one report: method name and noise rate.
pub fn report_stem(report: &EvalReport) -> String {
    let name: String = report
        .method
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{name}_noise{:.3}", report.noise_rate)
}

#[derive(Serialize)]
struct Summary<'a> {
    num_folds: usize,
    reports: &'a [EvalReport],
    comparisons: &'a [Comparison],
}

pub const SUMMARY_FILE: &str = "summary.json";

/// Writes `summary.json` plus `roc_<stem>.csv` / `pr_<stem>.csv` for every
/// report that has curves. Returns the written paths in write order.
pub fn emit_reports(outcome: &ExperimentOutcome, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let write = |name: String, text: String, written: &mut Vec<PathBuf>| -> Result<()> {
        let path = out_dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    let summary = Summary {
        num_folds: outcome.num_folds,
        reports: &outcome.reports,
        comparisons: &outcome.comparisons,
    };
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Model(e.to_string()))?;
    write(SUMMARY_FILE.into(), text + "\n", &mut written)?;
    for report in &outcome.reports {
        let stem = report_stem(report);
        if !report.roc.is_empty() {
            write(format!("roc_{stem}.csv"), curve_csv(&report.roc), &mut written)?;
        }
        if !report.pr.is_empty() {
            write(format!("pr_{stem}.csv"), curve_csv(&report.pr), &mut written)?;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            means: vec![vec![5.0, 0.0], vec![-5.0, 0.0]],
            std: 0.5,
            per_class: 100,
            seed,
        }
    }

    fn config(methods: Vec<MethodEntry>, protocol: Protocol, noise_rates: Vec<f64>) -> ExperimentConfig {
        ExperimentConfig {
            dataset: DataSource::Synthetic(blobs(3)),
            representation: RepresentationConfig::Linear,
            methods,
            protocol,
            noise_rates,
            seed: 17,
            positive_class: 1,
        }
    }

    fn entry(spec: MethodSpec) -> MethodEntry {
        MethodEntry { name: None, spec }
    }

    #[test]
    fn synthetic_degenerate_std_sits_on_means() {
        let spec = SyntheticSpec {
            means: vec![vec![1.0, -2.0], vec![3.0, 0.5], vec![0.0, 0.0]],
            std: 1e-9,
            per_class: 5,
            seed: 1,
        };
        let ds = generate_synthetic(&spec).unwrap();
        assert_eq!(ds.num_samples(), 15);
        assert_eq!(ds.num_classes(), 3);
        for i in 0..15 {
            let mean = &spec.means[ds.labels()[i] - 1];
            for (a, b) in ds.sample(i).iter().zip(mean) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn synthetic_is_deterministic_and_validated() {
        assert_eq!(generate_synthetic(&blobs(9)).unwrap(), generate_synthetic(&blobs(9)).unwrap());
        assert_ne!(generate_synthetic(&blobs(9)).unwrap(), generate_synthetic(&blobs(10)).unwrap());
        let mut bad = blobs(1);
        bad.std = 0.0;
        assert!(generate_synthetic(&bad).is_err());
        let mut bad = blobs(1);
        bad.means[1] = bad.means[0].clone();
        assert!(generate_synthetic(&bad).is_err());
        let mut bad = blobs(1);
        bad.means[1] = vec![1.0];
        assert!(generate_synthetic(&bad).is_err());
    }

    #[test]
    fn well_separated_blobs_are_learned_by_square_loss() {
        let ds = generate_synthetic(&blobs(4)).unwrap();
        let (train, test) = dataset::split(&ds, SplitSpec { train_fraction: 0.5, seed: 2 }).unwrap();
        let m = baselines::train_square(&train, &RepresentationConfig::Linear, 0.01).unwrap();
        let acc = accuracy(&predict_labels(&m, test.features()).unwrap(), test.labels()).unwrap();
        assert!(acc > 0.99, "accuracy {acc}");
    }

    #[test]
    fn kfold_single_method_is_near_perfect() {
        let cfg = config(vec![entry(MethodSpec::regmaxcem())], Protocol::Kfold { k: 5 }, vec![0.0]);
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.reports.len(), 1);
        assert_eq!(out.reports[0].per_fold_accuracy.len(), 5);
        assert!(out.reports[0].accuracy.unwrap() > 0.99);
        assert!(out.comparisons.is_empty());
    }

    #[test]
    fn identical_methods_give_degenerate_ttest() {
        let cfg = config(
            vec![entry(MethodSpec::regmaxcem()), entry(MethodSpec::regmaxcem())],
            Protocol::RepeatedSplit { times: 4, train_fraction: 0.5 },
            vec![0.1],
        );
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(cfg.method_names(), vec!["regmaxcem", "regmaxcem-2"]);
        assert_eq!(out.comparisons.len(), 1);
        assert_eq!(out.comparisons[0].status, "degenerate_variance");
        assert_eq!(out.comparisons[0].pairs, 4);
    }

    #[test]
    fn noise_only_touches_training_labels() {
        let cfg = config(
            vec![entry(MethodSpec::baseline(Loss::Square))],
            Protocol::RepeatedSplit { times: 3, train_fraction: 0.6 },
            vec![0.0, 0.2],
        );
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.reports.len(), 2);
        assert!(out.reports[0].per_fold_label_changes.iter().all(|&c| c == 0));
        // 200 samples, 120 training samples per split
        assert!(out.reports[1].per_fold_label_changes.iter().all(|&c| c == 24));

        // the test portion of every fold is the pristine data
        let ds = cfg.dataset.load().unwrap();
        for plan in plan_folds(&ds, &cfg.protocol, cfg.seed).unwrap() {
            let test = ds.subset(&plan.test);
            let expected: Vec<usize> = plan.test.iter().map(|&i| ds.labels()[i]).collect();
            assert_eq!(test.labels(), expected.as_slice());
        }
    }

    #[test]
    fn failing_cells_are_isolated() {
        let hinge_bad = MethodSpec::Hinge {
            alpha: AlphaChoice::Fixed(0.01),
            iters: Some(10),
            step_size: Some(1e308),
            tol: None,
        };
        let cfg = config(
            vec![entry(hinge_bad), entry(MethodSpec::baseline(Loss::Square))],
            Protocol::Kfold { k: 3 },
            vec![0.0],
        );
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.reports[0].failures.len(), 3);
        assert!(out.reports[0].accuracy.is_none());
        assert_eq!(out.reports[1].per_fold_accuracy.len(), 3);
        assert_eq!(out.comparisons[0].pairs, 0);
    }

    #[test]
    fn alpha_grid_selects_from_grid() {
        let ds = generate_synthetic(&blobs(6)).unwrap();
        let spec = MethodSpec::Square {
            alpha: AlphaChoice::Grid { grid: vec![1e-3, 1e6], folds: 3 },
        };
        let (_, alpha) = spec.fit(&ds, &RepresentationConfig::Linear, 1).unwrap();
        assert_eq!(alpha, 1e-3);
    }

    #[test]
    fn config_json_schema() {
        let text = r#"{
            "dataset": {"synthetic": {"means": [[2, 0], [-2, 0]], "std": 1, "per_class": 20, "seed": 5}},
            "representation": {"mode": "kernel", "kernel": "rbf", "bandwidth": "median"},
            "methods": [
                {"method": "regmaxcem", "alpha": 0.01, "sigma": "adaptive"},
                {"method": "regmaxcem", "name": "mcc-fixed", "sigma": 1.0, "iters": 50},
                {"method": "square", "alpha": {"grid": [0.001, 0.1]}},
                {"method": "hinge", "step_size": 0.1},
                {"method": "logistic"}
            ],
            "protocol": {"kfold": {"k": 4}},
            "noise_rates": [0, 0.2],
            "seed": 11
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.methods.len(), 5);
        assert_eq!(cfg.positive_class, 1);
        assert_eq!(cfg.method_names(), vec!["regmaxcem", "mcc-fixed", "square", "hinge", "logistic"]);
        assert!(matches!(cfg.methods[2].spec.alpha(), AlphaChoice::Grid { folds: 3, .. }));

        let empty = r#"{"dataset": {"csv": {"path": "x.csv", "label_col": "y"}}, "methods": [], "protocol": {"kfold": {"k": 2}}}"#;
        assert!(ExperimentConfig::from_json(empty).unwrap().validate().is_err());
        let bad_rate = text.replace("[0, 0.2]", "[1.5]");
        assert!(ExperimentConfig::from_json(&bad_rate).unwrap().validate().is_err());
    }

    #[test]
    fn emit_file_layout() {
        let dir = tempfile::tempdir().unwrap();
        let empty = ExperimentOutcome { num_folds: 0, reports: vec![], comparisons: vec![] };
        let files = emit_reports(&empty, dir.path()).unwrap();
        assert_eq!(files, vec![dir.path().join(SUMMARY_FILE)]);

        let cfg = config(
            vec![entry(MethodSpec::regmaxcem()), entry(MethodSpec::baseline(Loss::Square))],
            Protocol::Kfold { k: 3 },
            vec![0.0, 0.2],
        );
        let out = run_experiment(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_reports(&out, dir.path()).unwrap();
        let count = |prefix: &str| {
            files
                .iter()
                .filter(|p| p.file_name().unwrap().to_str().unwrap().starts_with(prefix))
                .count()
        };
        assert_eq!((count("roc_"), count("pr_"), count("summary")), (4, 4, 1));
        assert!(dir.path().join("roc_regmaxcem_noise0.200.csv").exists());

        let first: Vec<Vec<u8>> = files.iter().map(|p| std::fs::read(p).unwrap()).collect();
        let again = emit_reports(&run_experiment(&cfg).unwrap(), dir.path()).unwrap();
        assert_eq!(files, again);
        let second: Vec<Vec<u8>> = again.iter().map(|p| std::fs::read(p).unwrap()).collect();
        assert_eq!(first, second);
    }
}
