//! One-vs-all baselines with classical losses: square (closed-form ridge),
//! hinge (subgradient descent) and logistic (gradient descent with
//! backtracking). All three minimize
//!
//! ```text
//! 1/(L N) sum_{l,i} loss(F_li, Y_li) + alpha/L sum_l |w_l|^2
//! ```
//!
//! which decouples into one problem per class. They emit the same [`Model`]
//! type as the correntropy trainer.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::{label_indicator, Dataset};
use crate::error::{Error, Result};
use crate::kernels::{Representation, RepresentationConfig};
use crate::linalg::{weighted_ridge, OnSingular};
use crate::model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Square,
    Hinge,
    Logistic,
}

impl Loss {
    pub fn name(self) -> &'static str {
        match self {
            Loss::Square => "square",
            Loss::Hinge => "hinge",
            Loss::Logistic => "logistic",
        }
    }

    /// Per-cell loss for score `f` against target `y` in {-1, +1}.
    pub fn value(self, f: f64, y: f64) -> f64 {
        match self {
            Loss::Square => (f - y) * (f - y),
            Loss::Hinge => (1.0 - f * y).max(0.0),
            Loss::Logistic => softplus(-f * y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub loss: Loss,
    pub alpha: f64,
    pub max_iters: usize,
    pub step_size: f64,
    pub tol: f64,
}

impl BaselineConfig {
    pub fn new(loss: Loss, alpha: f64) -> Self {
        let (max_iters, step_size, tol) = match loss {
            Loss::Square => (1, 1.0, 0.0),
            Loss::Hinge => (2000, 0.5, 1e-9),
            Loss::Logistic => (5000, 1.0, 1e-8),
        };
        Self {
            loss,
            alpha,
            max_iters,
            step_size,
            tol,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be a nonnegative number, got {}",
                self.alpha
            )));
        }
        if self.loss != Loss::Square {
            if !(self.step_size > 0.0 && self.step_size.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "step_size must be positive, got {}",
                    self.step_size
                )));
            }
            if self.max_iters == 0 {
                return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
            }
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be >= 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `1 / (1 + e^{-z})` without overflow.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Regularized empirical risk of `model` under `loss`.
pub fn baseline_objective(model: &Model, ds: &Dataset, loss: Loss, alpha: f64) -> Result<f64> {
    let f = crate::model::score_matrix(model, ds.features())?;
    let y = label_indicator(ds.labels(), ds.num_classes())?;
    let (l, n) = f.shape();
    let risk: f64 = f
        .iter()
        .zip(y.matrix().iter())
        .map(|(&a, &b)| loss.value(a, b))
        .sum::<f64>()
        / (l * n) as f64;
    let penalty = model.weights.iter().map(|w| w.norm_squared()).sum::<f64>() * alpha / l as f64;
    Ok(risk + penalty)
}

struct Prepared {
    representation: Representation,
    xt: DMatrix<f64>,
    targets: DMatrix<f64>,
}

fn prepare(ds: &Dataset, rep: &RepresentationConfig) -> Result<Prepared> {
    let representation = rep.build(ds.features())?;
    let xt = representation.represent_rows(ds.features())?;
    let targets = label_indicator(ds.labels(), ds.num_classes())?.matrix().clone();
    Ok(Prepared {
        representation,
        xt,
        targets,
    })
}

fn assemble(
    ds: &Dataset,
    method: &str,
    representation: Representation,
    params: Vec<(DVector<f64>, f64)>,
) -> Model {
    let (weights, biases) = params.into_iter().unzip();
    Model {
        method: method.into(),
        weights,
        biases,
        representation,
        sigma_final: None,
        class_names: ds.class_names().to_vec(),
        feature_names: ds.feature_names().to_vec(),
    }
}

/// Closed-form ridge regression with intercept on the ±1 indicators.
///
/// Fails with [`Error::Singular`] when `alpha = 0` and the centered design
/// is rank deficient.
pub fn train_square(ds: &Dataset, rep: &RepresentationConfig, alpha: f64) -> Result<Model> {
    BaselineConfig::new(Loss::Square, alpha).validate()?;
    let prep = prepare(ds, rep)?;
    let n = ds.num_samples();
    let weights = vec![1.0 / n as f64; n];
    let params = (0..ds.num_classes())
        .map(|l| {
            let targets: Vec<f64> = prep.targets.row(l).iter().copied().collect();
            weighted_ridge(&prep.xt, &targets, &weights, alpha, OnSingular::Fail, l + 1)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(ds, "square", prep.representation, params))
}

/// Per-class objective `(1/N) sum_i loss + alpha |w|^2`.
fn class_objective(
    loss: Loss,
    xt: &DMatrix<f64>,
    y: &[f64],
    w: &DVector<f64>,
    b: f64,
    alpha: f64,
) -> f64 {
    let scores = xt.tr_mul(w);
    let risk: f64 = scores
        .iter()
        .zip(y)
        .map(|(&f, &t)| loss.value(f + b, t))
        .sum();
    risk / y.len() as f64 + alpha * w.norm_squared()
}

/// Full-batch projected subgradient descent on the hinge objective with
/// steps `step_size / sqrt(t)`. The best iterate seen is returned.
///
/// Iterates are projected onto `|w| <= 1/sqrt(alpha)`, a ball that holds
/// the minimizer because `alpha |w*|^2` cannot exceed the objective of the
/// zero model, which is 1.
pub fn train_hinge(ds: &Dataset, rep: &RepresentationConfig, cfg: &BaselineConfig) -> Result<Model> {
    cfg.validate()?;
    let prep = prepare(ds, rep)?;
    let n = ds.num_samples();
    let radius = if cfg.alpha > 0.0 {
        cfg.alpha.sqrt().recip()
    } else {
        f64::INFINITY
    };
    let mut params = Vec::with_capacity(ds.num_classes());
    for l in 0..ds.num_classes() {
        let y: Vec<f64> = prep.targets.row(l).iter().copied().collect();
        let mut w = DVector::zeros(prep.xt.nrows());
        let mut b = 0.0;
        let mut best = (w.clone(), b, class_objective(Loss::Hinge, &prep.xt, &y, &w, b, cfg.alpha));
        for t in 1..=cfg.max_iters {
            let scores = prep.xt.tr_mul(&w);
            let mut gw = &w * (2.0 * cfg.alpha);
            let mut gb = 0.0;
            for i in 0..n {
                // margin exactly 1 takes the zero subgradient
                if (scores[i] + b) * y[i] < 1.0 {
                    gw.axpy(-y[i] / n as f64, &prep.xt.column(i), 1.0);
                    gb -= y[i] / n as f64;
                }
            }
            let gnorm = (gw.norm_squared() + gb * gb).sqrt();
            if gnorm <= cfg.tol {
                break;
            }
            let eta = cfg.step_size / (t as f64).sqrt();
            w.axpy(-eta, &gw, 1.0);
            b -= eta * gb;
            let norm = w.norm();
            if norm > radius {
                w *= radius / norm;
            }
            let obj = class_objective(Loss::Hinge, &prep.xt, &y, &w, b, cfg.alpha);
            if !obj.is_finite() {
                return Err(Error::NonFinite { iteration: t });
            }
            if obj < best.2 {
                best = (w.clone(), b, obj);
            }
        }
        params.push((best.0, best.1));
    }
    Ok(assemble(ds, "hinge", prep.representation, params))
}

/// Gradient of the per-class logistic objective, stable for large margins.
fn logistic_gradient(
    xt: &DMatrix<f64>,
    y: &[f64],
    w: &DVector<f64>,
    b: f64,
    alpha: f64,
) -> (DVector<f64>, f64) {
    let n = y.len() as f64;
    let scores = xt.tr_mul(w);
    // d/df ln(1 + e^{-f y}) = -y sigmoid(-f y)
    let coef = DVector::from_fn(y.len(), |i, _| -y[i] * sigmoid(-(scores[i] + b) * y[i]) / n);
    let gw = xt * &coef + w * (2.0 * alpha);
    (gw, coef.sum())
}

/// Full-batch gradient descent with Armijo backtracking on the logistic
/// objective. Each iteration starts its line search at twice the previous
/// accepted step (capped at `step_size`); training stops when the gradient
/// norm falls to `tol` or `max_iters` is reached.
pub fn train_logistic(
    ds: &Dataset,
    rep: &RepresentationConfig,
    cfg: &BaselineConfig,
) -> Result<Model> {
    cfg.validate()?;
    let prep = prepare(ds, rep)?;
    let params = (0..ds.num_classes())
        .map(|l| {
            let y: Vec<f64> = prep.targets.row(l).iter().copied().collect();
            fit_logistic_class(&prep.xt, &y, cfg).map(|(w, b, _)| (w, b))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(ds, "logistic", prep.representation, params))
}

/// Returns the fitted parameters and the objective after every accepted
/// step (starting with the zero model).
fn fit_logistic_class(
    xt: &DMatrix<f64>,
    y: &[f64],
    cfg: &BaselineConfig,
) -> Result<(DVector<f64>, f64, Vec<f64>)> {
    let mut w = DVector::zeros(xt.nrows());
    let mut b = 0.0;
    let mut obj = class_objective(Loss::Logistic, xt, y, &w, b, cfg.alpha);
    let mut history = vec![obj];
    let mut step = cfg.step_size;
    for t in 1..=cfg.max_iters {
        let (gw, gb) = logistic_gradient(xt, y, &w, b, cfg.alpha);
        let g_sq = gw.norm_squared() + gb * gb;
        if g_sq.sqrt() <= cfg.tol {
            break;
        }
        step = (2.0 * step).min(cfg.step_size);
        let accepted = loop {
            let cand_w = &w - &gw * step;
            let cand_b = b - step * gb;
            let cand = class_objective(Loss::Logistic, xt, y, &cand_w, cand_b, cfg.alpha);
            if !cand.is_nan() && cand <= obj - 0.5 * step * g_sq {
                break Some((cand_w, cand_b, cand));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((nw, nb, nobj)) = accepted else {
            // no decrease representable in floating point
            break;
        };
        if !nobj.is_finite() {
            return Err(Error::NonFinite { iteration: t });
        }
        w = nw;
        b = nb;
        obj = nobj;
        history.push(obj);
    }
    Ok((w, b, history))
}

/// Dispatches on `cfg.loss`.
pub fn train_baseline(ds: &Dataset, rep: &RepresentationConfig, cfg: &BaselineConfig) -> Result<Model> {
    match cfg.loss {
        Loss::Square => train_square(ds, rep, cfg.alpha),
        Loss::Hinge => train_hinge(ds, rep, cfg),
        Loss::Logistic => train_logistic(ds, rep, cfg),
    }
}
