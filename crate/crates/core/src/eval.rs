//! Evaluation: accuracy, confusion counts, ROC and precision-recall curves,
//! AUC and the paired t-test.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{score_matrix, Model};

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("accuracy of empty vectors".into()));
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / pred.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// FP / (FP + TN).
    pub fn fpr(&self) -> f64 {
        self.fp as f64 / (self.fp + self.tn) as f64
    }

    /// TP / (TP + FN); also the recall.
    pub fn tpr(&self) -> f64 {
        self.tp as f64 / (self.tp + self.fn_) as f64
    }

    /// TP / (TP + FP), taken as 1 when nothing is predicted positive.
    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }
}

/// Counts with "positive" predicted iff `score >= threshold`.
pub fn confusion_counts(scores: &[f64], truth: &[bool], threshold: f64) -> Result<ConfusionCounts> {
    check_lengths(scores, truth)?;
    let mut c = ConfusionCounts::default();
    for (&s, &t) in scores.iter().zip(truth) {
        match (s >= threshold, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

fn check_lengths(scores: &[f64], truth: &[bool]) -> Result<()> {
    if scores.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: scores.len(),
        });
    }
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::InvalidArgument(format!("score {s} is not comparable")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
    pub threshold: f64,
}

/// Cumulative (tp, fp) after admitting each group of tied scores, highest
/// scores first. Thresholds are the distinct score values, descending.
fn threshold_sweep(scores: &[f64], truth: &[bool]) -> Vec<(f64, usize, usize)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut out: Vec<(f64, usize, usize)> = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    for (k, &i) in order.iter().enumerate() {
        if truth[i] {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_group = order
            .get(k + 1)
            .is_none_or(|&j| scores[j] != scores[i]);
        if last_of_group {
            out.push((scores[i], tp, fp));
        }
    }
    out
}

/// ROC curve (x = FPR, y = TPR), from (0, 0) to (1, 1), one point per
/// distinct score.
pub fn roc_curve(scores: &[f64], truth: &[bool]) -> Result<Vec<CurvePoint>> {
    check_lengths(scores, truth)?;
    let pos = truth.iter().filter(|&&t| t).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidArgument(
            "ROC curve needs both positive and negative samples".into(),
        ));
    }
    let mut curve = vec![CurvePoint {
        x: 0.0,
        y: 0.0,
        threshold: f64::INFINITY,
    }];
    for (threshold, tp, fp) in threshold_sweep(scores, truth) {
        curve.push(CurvePoint {
            x: fp as f64 / neg as f64,
            y: tp as f64 / pos as f64,
            threshold,
        });
    }
    let last = curve[curve.len() - 1];
    if last.x != 1.0 || last.y != 1.0 {
        curve.push(CurvePoint {
            x: 1.0,
            y: 1.0,
            threshold: f64::NEG_INFINITY,
        });
    }
    Ok(curve)
}

/// Trapezoid-rule area under a curve given in increasing `x`.
pub fn auc(curve: &[CurvePoint]) -> Result<f64> {
    if curve.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "area needs at least 2 points, got {}",
            curve.len()
        )));
    }
    Ok(curve
        .windows(2)
        .map(|p| (p[1].x - p[0].x) * (p[0].y + p[1].y) / 2.0)
        .sum())
}

/// Precision-recall curve (x = recall, y = precision) over the same
/// threshold sweep as [`roc_curve`], starting from the empty prediction
/// (recall 0, precision 1).
pub fn pr_curve(scores: &[f64], truth: &[bool]) -> Result<Vec<CurvePoint>> {
    check_lengths(scores, truth)?;
    let pos = truth.iter().filter(|&&t| t).count();
    if pos == 0 {
        return Err(Error::InvalidArgument(
            "precision-recall curve needs at least one positive".into(),
        ));
    }
    let mut curve = vec![CurvePoint {
        x: 0.0,
        y: 1.0,
        threshold: f64::INFINITY,
    }];
    for (threshold, tp, fp) in threshold_sweep(scores, truth) {
        curve.push(CurvePoint {
            x: tp as f64 / pos as f64,
            y: tp as f64 / (tp + fp) as f64,
            threshold,
        });
    }
    Ok(curve)
}

/// Scores of class `positive_class` against membership in that class.
pub fn multiclass_binary_scores(
    model: &Model,
    ds: &Dataset,
    positive_class: usize,
) -> Result<(Vec<f64>, Vec<bool>)> {
    if positive_class == 0 || positive_class > model.num_classes() {
        return Err(Error::LabelOutOfRange {
            label: positive_class,
            num_classes: model.num_classes(),
        });
    }
    let f = score_matrix(model, ds.features())?;
    let scores = f.row(positive_class - 1).iter().copied().collect();
    let truth = ds.labels().iter().map(|&l| l == positive_class).collect();
    Ok((scores, truth))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub df: usize,
}

/// Two-sided paired t-test on `a - b`.
///
/// Fails with [`Error::DegenerateVariance`] when all differences are equal:
/// the statistic is undefined there, not infinitely significant.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "paired t-test needs at least 2 pairs, got {n}"
        )));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if d.iter().all(|&v| v == d[0]) {
        return Err(Error::DegenerateVariance);
    }
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let t = mean / (var / n as f64).sqrt();
    let df = n - 1;
    Ok(TTest {
        t,
        p: student_t_two_sided(t, df as f64),
        df,
    })
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom, via
/// `I_{df/(df+t^2)}(df/2, 1/2)`.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(x, df / 2.0, 0.5).clamp(0.0, 1.0)
}

/// Student's t cumulative distribution function.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * student_t_two_sided(t, df);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Natural log of the gamma function (Lanczos, g = 7, 9 terms), for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized incomplete beta `I_x(a, b)` by Lentz's continued fraction,
/// using the symmetry `I_x(a, b) = 1 - I_{1-x}(b, a)` where it converges
/// faster.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let mut c = 1.0;
    let mut d = 1.0 - (a + b) * x / (a + 1.0);
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        // even step
        let num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 + num * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + num / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // odd step
        let num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 + num * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + num / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Metrics of one method at one noise rate, aggregated over splits or folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub noise_rate: f64,
    /// Mean of `per_fold_accuracy`; `None` when every fold failed.
    pub accuracy: Option<f64>,
    /// ROC of the positive-class score, pooled over every test fold. Plot
    /// data only: scores of separately trained models need not share a scale.
    #[serde(skip)]
    pub roc: Vec<CurvePoint>,
    #[serde(skip)]
    pub pr: Vec<CurvePoint>,
    /// Mean of the defined entries of `per_fold_auc`.
    pub auc: Option<f64>,
    pub per_fold_accuracy: Vec<f64>,
    pub per_fold_auc: Vec<Option<f64>>,
    /// Training labels changed by noise injection, per fold.
    pub per_fold_label_changes: Vec<usize>,
    pub failures: Vec<String>,
}

/// Curve as `threshold,x,y` CSV text with LF line endings.
pub fn curve_csv(curve: &[CurvePoint]) -> String {
    let mut out = String::from("threshold,x,y\n");
    for p in curve {
        out.push_str(&format!("{},{},{}\n", p.threshold, p.x, p.y));
    }
    out
}
