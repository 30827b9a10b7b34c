//! Regularized maximum correntropy training.
//!
//! The trainer maximizes
//!
//! ```text
//! J(theta) = 1/(L N) sum_{l,i} g_sigma(F_li - Y_li) - alpha/L sum_l |w_l|^2
//! ```
//!
//! by half-quadratic alternation. The E-step sets the auxiliary matrix
//! `P = -g_sigma(F - Y)`; the M-step then solves, independently per class,
//! the weighted ridge problem
//!
//! ```text
//! min_{w, b} sum_i u_i^2 (w' x~_i + b - Y_li)^2 + alpha |w|^2,   u_i^2 = -P_li / N
//! ```
//!
//! in closed form. Starting from `P = -1` the first M-step is plain ridge
//! regression on the ±1 indicators; later rounds down-weight cells whose
//! residual is large relative to sigma, which is what makes the predictor
//! tolerant of mislabelled samples.
//!
//! The tight quadratic minorizer of `g_sigma` at residual `r0` has slope
//! `-g_sigma(r0) / (2 sigma^2)` in `r^2`, not `-g_sigma(r0)`. Keeping `P`
//! as the unscaled Gaussian, the M-steps that follow an E-step therefore
//! use `2 sigma^2 alpha` as their ridge penalty. With that scaling each
//! round maximizes a minorizer of `J` that touches it at the current
//! parameters, so `J` never decreases for a fixed sigma.
//!
//! The intercept is eliminated with `u^2`-weighted means (the weights of
//! the squared loss). Centering with `u`-weighted means would not give a
//! stationary point of the weighted problem.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::correntropy::{self, gaussian, SigmaMode, SigmaPolicy};
use crate::dataset::{label_indicator, Dataset, IndicatorMatrix};
use crate::error::{Error, Result};
use crate::kernels::RepresentationConfig;
use crate::linalg::{weighted_ridge, OnSingular};
use crate::model::{score_matrix, Model};

pub use crate::model::{predict_label, predict_scores};

/// Smallest admissible `u_l' 1` before a class is declared degenerate.
pub const MIN_WEIGHT_SUM: f64 = 1e-12;

/// L×N half-quadratic auxiliary variables, each in `[-1, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxMatrix(DMatrix<f64>);

impl AuxMatrix {
    /// The initial auxiliary matrix, all entries -1.
    pub fn uniform(num_classes: usize, num_samples: usize) -> Self {
        AuxMatrix(DMatrix::from_element(num_classes, num_samples, -1.0))
    }

    /// Wraps `values`, checking every entry lies in `[-1, 0)`.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= -1.0 && **v < 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "auxiliary entry {v} outside [-1, 0)"
            )));
        }
        Ok(AuxMatrix(values))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub alpha: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub sigma_policy: SigmaPolicy,
    pub representation: RepresentationConfig,
    pub trace: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            max_iters: 20,
            tol: 1e-6,
            sigma_policy: SigmaPolicy::adaptive(),
            representation: RepresentationConfig::Linear,
            trace: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be a nonnegative number, got {}",
                self.alpha
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tol must be nonnegative, got {}",
                self.tol
            )));
        }
        self.sigma_policy.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Regularized correntropy objective after this round's M-step,
    /// evaluated at `sigma`.
    pub objective: f64,
    pub sigma: f64,
    /// Largest absolute change of any weight or bias in this round.
    pub max_change: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<IterationRecord>,
}

impl TrainTrace {
    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,objective,sigma,max_change\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.iteration, r.objective, r.sigma, r.max_change
            ));
        }
        out
    }
}

/// `P_li = -g_sigma(F_li - Y_li)`.
pub fn e_step(f: &DMatrix<f64>, y: &IndicatorMatrix, sigma: f64) -> Result<AuxMatrix> {
    if f.shape() != y.matrix().shape() {
        return Err(Error::DimensionMismatch {
            expected: y.matrix().len(),
            actual: f.len(),
        });
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let p = f.zip_map(y.matrix(), |a, b| -gaussian(a - b, sigma));
    // Residuals past ~38 sigma underflow g to zero; keep the entry strictly
    // negative so the weight stays a valid (vanishing) confidence.
    Ok(AuxMatrix(p.map(|v| v.min(-f64::MIN_POSITIVE))))
}

/// Closed-form per-class weighted ridge solution for fixed `P`.
///
/// `xt` is the D'×N matrix of represented samples (one column per sample).
/// Returns the class weight vectors and biases.
pub fn m_step(
    p: &AuxMatrix,
    xt: &DMatrix<f64>,
    y: &IndicatorMatrix,
    alpha: f64,
) -> Result<(Vec<DVector<f64>>, Vec<f64>)> {
    let (l, n) = p.matrix().shape();
    if y.matrix().shape() != (l, n) {
        return Err(Error::DimensionMismatch {
            expected: l * n,
            actual: y.matrix().len(),
        });
    }
    if xt.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: xt.ncols(),
        });
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {alpha}")));
    }
    let mut weights = Vec::with_capacity(l);
    let mut biases = Vec::with_capacity(l);
    for class in 0..l {
        let u_sq: Vec<f64> = p.matrix().row(class).iter().map(|&v| -v / n as f64).collect();
        let weight_sum: f64 = u_sq.iter().map(|s| s.sqrt()).sum();
        if !(weight_sum >= MIN_WEIGHT_SUM) {
            return Err(Error::DegenerateClass {
                class: class + 1,
                weight_sum,
            });
        }
        let targets: Vec<f64> = y.matrix().row(class).iter().copied().collect();
        let (w, b) = weighted_ridge(
            xt,
            &targets,
            &u_sq,
            alpha,
            OnSingular::LeastSquares,
            class + 1,
        )?;
        weights.push(w);
        biases.push(b);
    }
    Ok((weights, biases))
}

fn max_change(
    old: &[DVector<f64>],
    old_b: &[f64],
    new: &[DVector<f64>],
    new_b: &[f64],
) -> f64 {
    let w = old
        .iter()
        .zip(new)
        .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    old_b
        .iter()
        .zip(new_b)
        .map(|(a, b)| (a - b).abs())
        .fold(w, f64::max)
}

/// Runs the alternating optimization on `ds`.
///
/// Each round performs the M-step with the previous auxiliary matrix, then
/// (re)computes sigma under the configured policy and performs the E-step.
/// The first M-step uses `alpha` itself; every later one uses
/// `2 sigma^2 alpha` with the sigma of the preceding E-step.
/// Training stops after `max_iters` rounds or once no parameter moved by
/// `tol` or more. The trace is filled only when `cfg.trace` is set.
pub fn train(ds: &Dataset, cfg: &TrainConfig) -> Result<(Model, TrainTrace)> {
    cfg.validate()?;
    let representation = cfg.representation.build(ds.features())?;
    let xt = representation.represent_rows(ds.features())?;
    let y = label_indicator(ds.labels(), ds.num_classes())?;
    let (l, n) = (ds.num_classes(), ds.num_samples());
    let dim = xt.nrows();

    let mut model = Model {
        method: "regmaxcem".into(),
        weights: vec![DVector::zeros(dim); l],
        biases: vec![0.0; l],
        representation,
        sigma_final: None,
        class_names: ds.class_names().to_vec(),
        feature_names: ds.feature_names().to_vec(),
    };
    let mut p = AuxMatrix::uniform(l, n);
    let mut m_alpha = cfg.alpha;
    let mut trace = TrainTrace::default();

    for iteration in 1..=cfg.max_iters {
        let (weights, biases) = m_step(&p, &xt, &y, m_alpha)?;
        let change = max_change(&model.weights, &model.biases, &weights, &biases);
        model.weights = weights;
        model.biases = biases;

        let f = model.scores_represented(&xt);
        let sigma = match cfg.sigma_policy.mode {
            SigmaMode::Fixed(s) => s,
            SigmaMode::Adaptive => correntropy::sigma_heuristic(&f, &y, cfg.sigma_policy.floor)?,
        };
        let objective = correntropy::objective(&f, &y, &model.weights, sigma, cfg.alpha)?;
        if !objective.is_finite() || change.is_nan() {
            return Err(Error::NonFinite { iteration });
        }
        if cfg.trace {
            trace.records.push(IterationRecord {
                iteration,
                objective,
                sigma,
                max_change: change,
            });
        }
        model.sigma_final = Some(sigma);
        if change < cfg.tol {
            break;
        }
        p = e_step(&f, &y, sigma)?;
        m_alpha = 2.0 * sigma * sigma * cfg.alpha;
    }
    Ok((model, trace))
}

/// Regularized correntropy objective of `model` on `ds`.
pub fn evaluate_objective(model: &Model, ds: &Dataset, sigma: f64, alpha: f64) -> Result<f64> {
    let f = score_matrix(model, ds.features())?;
    let y = label_indicator(ds.labels(), ds.num_classes())?;
    correntropy::objective(&f, &y, &model.weights, sigma, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn indicator(labels: &[usize], l: usize) -> IndicatorMatrix {
        label_indicator(labels, l).unwrap()
    }

    #[test]
    fn e_step_examples() {
        let y = indicator(&[1, 2, 2], 2);
        let p = e_step(y.matrix(), &y, 0.4).unwrap();
        assert!(p.matrix().iter().all(|&v| v == -1.0));

        let sigma = 0.3;
        let mut f = y.matrix().clone();
        f[(1, 2)] += 10.0 * sigma;
        let p = e_step(&f, &y, sigma).unwrap();
        assert_abs_diff_eq!(p.matrix()[(1, 2)], -(-50.0f64).exp(), epsilon = 1e-30);
        assert!(p.matrix()[(1, 2)] < 0.0 && p.matrix()[(1, 2)] > -1e-21);

        let mut g = y.matrix().clone();
        g[(0, 0)] += 0.7;
        g[(0, 1)] -= 0.7;
        let p = e_step(&g, &y, 0.5).unwrap();
        assert_eq!(p.matrix()[(0, 0)], p.matrix()[(0, 1)]);

        assert!(e_step(&DMatrix::zeros(1, 3), &y, 1.0).is_err());
        assert!(e_step(y.matrix(), &y, 0.0).is_err());
    }

    #[test]
    fn e_step_huge_residual_stays_negative() {
        let y = indicator(&[1], 1);
        let f = DMatrix::from_element(1, 1, 1e6);
        let p = e_step(&f, &y, 1.0).unwrap();
        assert!(p.matrix()[(0, 0)] < 0.0);
        assert!(AuxMatrix::new(p.matrix().clone()).is_ok());
    }

    #[test]
    fn m_step_two_sample_ridge() {
        let y = indicator(&[1, 2], 2);
        let xt = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let (w, b) = m_step(&AuxMatrix::uniform(2, 2), &xt, &y, 0.5).unwrap();
        assert_abs_diff_eq!(w[0][0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1][0], -2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn m_step_degenerate_class() {
        let y = indicator(&[1, 2, 1], 2);
        let xt = DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 2.0]);
        let mut p = DMatrix::from_element(2, 3, -1.0);
        p.row_mut(1).fill(-1e-300);
        let err = m_step(&AuxMatrix::new(p).unwrap(), &xt, &y, 0.1).unwrap_err();
        assert!(matches!(err, Error::DegenerateClass { class: 2, .. }));
    }

    #[test]
    fn m_step_shape_errors() {
        let y = indicator(&[1, 2], 2);
        let xt = DMatrix::zeros(1, 3);
        assert!(m_step(&AuxMatrix::uniform(2, 2), &xt, &y, 0.1).is_err());
        assert!(m_step(&AuxMatrix::uniform(2, 3), &xt, &y, 0.1).is_err());
    }

    fn separable_1d() -> Dataset {
        let x = [-3.0, -2.5, -2.0, -1.5, -1.0, 1.0, 1.5, 2.0, 2.5, 3.0];
        let labels = x.iter().map(|&v| if v < 0.0 { 1 } else { 2 }).collect();
        Dataset::new(DMatrix::from_column_slice(10, 1, &x), labels, 2).unwrap()
    }

    #[test]
    fn train_separable_reaches_full_accuracy() {
        let ds = separable_1d();
        let cfg = TrainConfig {
            alpha: 0.01,
            max_iters: 20,
            sigma_policy: SigmaPolicy::fixed(1.0),
            ..TrainConfig::default()
        };
        let (model, _) = train(&ds, &cfg).unwrap();
        let pred = crate::model::predict_labels(&model, ds.features()).unwrap();
        assert_eq!(pred, ds.labels());
    }

    #[test]
    fn infinite_tol_stops_after_one_round() {
        let ds = separable_1d();
        let cfg = TrainConfig {
            tol: f64::INFINITY,
            max_iters: 50,
            trace: true,
            ..TrainConfig::default()
        };
        let (_, trace) = train(&ds, &cfg).unwrap();
        assert_eq!(trace.records.len(), 1);
    }

    #[test]
    fn trace_respects_iteration_cap() {
        let ds = separable_1d();
        let cfg = TrainConfig {
            tol: 0.0,
            max_iters: 7,
            trace: true,
            ..TrainConfig::default()
        };
        let (_, trace) = train(&ds, &cfg).unwrap();
        assert_eq!(trace.records.len(), 7);
        assert!(trace.to_csv().starts_with("iteration,objective,sigma,max_change\n"));
        let (_, silent) = train(&ds, &TrainConfig { trace: false, ..cfg }).unwrap();
        assert!(silent.records.is_empty());
    }

    #[test]
    fn config_validation() {
        let ds = separable_1d();
        for cfg in [
            TrainConfig { max_iters: 0, ..TrainConfig::default() },
            TrainConfig { alpha: -1.0, ..TrainConfig::default() },
            TrainConfig { tol: -1.0, ..TrainConfig::default() },
            TrainConfig { sigma_policy: SigmaPolicy::fixed(0.0), ..TrainConfig::default() },
        ] {
            assert!(matches!(train(&ds, &cfg), Err(Error::InvalidArgument(_))));
        }
    }

    #[test]
    fn evaluate_objective_examples() {
        let ds = Dataset::new(DMatrix::from_column_slice(2, 1, &[0.5, -0.5]), vec![1, 2], 2).unwrap();
        let perfect = Model {
            method: "fixed".into(),
            weights: vec![DVector::zeros(1); 2],
            biases: vec![0.0, 0.0],
            representation: crate::kernels::Representation::Linear,
            sigma_final: None,
            class_names: vec!["1".into(), "2".into()],
            feature_names: vec!["x1".into()],
        };
        // zero weights can't fit ±1 targets; build the exact fit instead
        let mut exact = perfect.clone();
        exact.weights = vec![DVector::from_vec(vec![2.0]), DVector::from_vec(vec![-2.0])];
        let base = evaluate_objective(&exact, &ds, 0.5, 0.0).unwrap();
        assert_eq!(base, 1.0);
        let penalized = evaluate_objective(&exact, &ds, 0.5, 0.3).unwrap();
        assert_abs_diff_eq!(base - penalized, 0.3 * 8.0 / 2.0, epsilon = 1e-15);

        let zero_fit = evaluate_objective(&perfect, &ds, 0.5, 0.3).unwrap();
        assert_abs_diff_eq!(zero_fit, (-2.0f64).exp(), epsilon = 1e-15);
    }
}
