//! Correntropy: the Gaussian similarity `g_sigma`, its sample estimator,
//! the residual-based kernel width heuristic and the regularized
//! correntropy objective maximized by the trainer.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::IndicatorMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_SIGMA_FLOOR: f64 = 1e-8;

/// How the kernel width is chosen during training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaPolicy {
    pub mode: SigmaMode,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_floor() -> f64 {
    DEFAULT_SIGMA_FLOOR
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaMode {
    /// Recomputed from the current residuals before every E-step.
    Adaptive,
    #[serde(untagged)]
    Fixed(f64),
}

impl SigmaPolicy {
    pub fn adaptive() -> Self {
        Self {
            mode: SigmaMode::Adaptive,
            floor: DEFAULT_SIGMA_FLOOR,
        }
    }

    pub fn fixed(sigma: f64) -> Self {
        Self {
            mode: SigmaMode::Fixed(sigma),
            floor: DEFAULT_SIGMA_FLOOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.floor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma floor must be positive, got {}",
                self.floor
            )));
        }
        if let SigmaMode::Fixed(s) = self.mode {
            check_sigma(s)?;
        }
        Ok(())
    }
}

impl Default for SigmaPolicy {
    fn default() -> Self {
        Self::adaptive()
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "sigma must be positive and finite, got {sigma}"
        )))
    }
}

#[inline]
pub(crate) fn gaussian(x: f64, sigma: f64) -> f64 {
    (-(x * x) / (2.0 * sigma * sigma)).exp()
}

/// `g_sigma(x) = exp(-x^2 / (2 sigma^2))`.
pub fn g_sigma(x: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(gaussian(x, sigma))
}

/// Sample correntropy `(1/d) sum_i g_sigma(a_i - b_i)`.
pub fn correntropy_estimate(a: &[f64], b: &[f64], sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("correntropy of empty vectors".into()));
    }
    let total: f64 = a.iter().zip(b).map(|(x, y)| gaussian(x - y, sigma)).sum();
    Ok(total / a.len() as f64)
}

fn check_shape(f: &DMatrix<f64>, y: &IndicatorMatrix) -> Result<()> {
    let ym = y.matrix();
    if f.shape() != ym.shape() {
        let (expected, actual) = if f.nrows() != ym.nrows() {
            (ym.nrows(), f.nrows())
        } else {
            (ym.ncols(), f.ncols())
        };
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Kernel width from the current fit: the summed squared residual divided
/// by `2 L N`, clamped below by `floor`.
///
/// The value is assigned to sigma itself, not to sigma squared.
pub fn sigma_heuristic(f: &DMatrix<f64>, y: &IndicatorMatrix, floor: f64) -> Result<f64> {
    check_shape(f, y)?;
    let (l, n) = f.shape();
    let sq: f64 = (f - y.matrix()).iter().map(|r| r * r).sum();
    Ok((sq / (2.0 * (l * n) as f64)).max(floor))
}

/// Regularized correntropy objective
/// `(1/(L N)) sum g_sigma(F - Y) - (alpha / L) sum_l |w_l|^2`.
pub fn objective(
    f: &DMatrix<f64>,
    y: &IndicatorMatrix,
    weights: &[DVector<f64>],
    sigma: f64,
    alpha: f64,
) -> Result<f64> {
    check_shape(f, y)?;
    check_sigma(sigma)?;
    let (l, n) = f.shape();
    if weights.len() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            actual: weights.len(),
        });
    }
    let fit: f64 = f
        .iter()
        .zip(y.matrix().iter())
        .map(|(a, b)| gaussian(a - b, sigma))
        .sum::<f64>()
        / (l * n) as f64;
    let penalty: f64 = weights.iter().map(|w| w.norm_squared()).sum::<f64>() * alpha / l as f64;
    Ok(fit - penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::label_indicator;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const EXP_MINUS_HALF: f64 = 0.606_530_659_712_633_4;

    #[test]
    fn g_sigma_examples() {
        assert_eq!(g_sigma(0.0, 0.3).unwrap(), 1.0);
        assert_abs_diff_eq!(g_sigma(2.0, 2.0).unwrap(), EXP_MINUS_HALF, epsilon = 1e-15);
        assert_eq!(g_sigma(-2.0, 2.0).unwrap(), g_sigma(2.0, 2.0).unwrap());
        assert!(g_sigma(1.0, 0.0).is_err());
        assert!(g_sigma(1.0, -1.0).is_err());
    }

    #[test]
    fn correntropy_examples() {
        let a = [0.3, -1.0, 4.0];
        assert_eq!(correntropy_estimate(&a, &a, 0.1).unwrap(), 1.0);
        let s = 0.5;
        let v = correntropy_estimate(&[0.0, 10.0 * s], &[0.0, 0.0], s).unwrap();
        assert_abs_diff_eq!(v, (1.0 + (-50.0f64).exp()) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-12);
        let v = correntropy_estimate(&[s, s], &[0.0, 0.0], s).unwrap();
        assert_abs_diff_eq!(v, EXP_MINUS_HALF, epsilon = 1e-15);
        assert!(correntropy_estimate(&[1.0], &[1.0, 2.0], 1.0).is_err());
        assert!(correntropy_estimate(&[], &[], 1.0).is_err());
    }

    #[test]
    fn sigma_heuristic_examples() {
        let y = label_indicator(&[1, 2, 2], 2).unwrap();
        assert_eq!(sigma_heuristic(y.matrix(), &y, 1e-8).unwrap(), 1e-8);

        let y1 = label_indicator(&[1], 1).unwrap();
        let f = DMatrix::from_element(1, 1, 2.0);
        assert_eq!(sigma_heuristic(&f, &y1, 1e-8).unwrap(), 0.5);

        let y2 = label_indicator(&[1, 1], 1).unwrap();
        let f = DMatrix::from_row_slice(1, 2, &[2.0, 4.0]);
        assert_eq!(sigma_heuristic(&f, &y2, 1e-8).unwrap(), 2.5);

        assert!(sigma_heuristic(&DMatrix::zeros(2, 2), &y1, 1e-8).is_err());
    }

    #[test]
    fn objective_examples() {
        let y = label_indicator(&[1, 2, 1], 2).unwrap();
        let zeros = vec![DVector::zeros(3); 2];
        assert_eq!(objective(y.matrix(), &y, &zeros, 0.7, 5.0).unwrap(), 1.0);

        let y1 = label_indicator(&[1, 1], 1).unwrap();
        let w = vec![DVector::from_vec(vec![1.0, 0.0])];
        assert_eq!(objective(y1.matrix(), &y1, &w, 1.0, 0.5).unwrap(), 0.5);

        let f = DMatrix::from_row_slice(2, 3, &[0.2, -0.4, 1.5, -2.0, 0.1, 0.0]);
        let flat_f: Vec<f64> = f.iter().copied().collect();
        let flat_y: Vec<f64> = y.matrix().iter().copied().collect();
        assert_abs_diff_eq!(
            objective(&f, &y, &zeros, 0.8, 0.0).unwrap(),
            correntropy_estimate(&flat_f, &flat_y, 0.8).unwrap(),
            epsilon = 1e-15
        );

        assert!(objective(&f, &y, &zeros[..1], 0.8, 0.0).is_err());
        assert!(objective(&DMatrix::zeros(2, 2), &y, &zeros, 0.8, 0.0).is_err());
    }

    #[test]
    fn policy_parses() {
        let p: SigmaPolicy = serde_json::from_str(r#"{"mode":"adaptive"}"#).unwrap();
        assert_eq!(p, SigmaPolicy::adaptive());
        let p: SigmaPolicy = serde_json::from_str(r#"{"mode":1.5,"floor":0.001}"#).unwrap();
        assert_eq!(p.mode, SigmaMode::Fixed(1.5));
        assert!(SigmaPolicy::fixed(-1.0).validate().is_err());
    }

    proptest! {
        #[test]
        fn g_sigma_bounded_and_decreasing(a in -50.0f64..50.0, b in -50.0f64..50.0, s in 0.05f64..10.0) {
            let (ga, gb) = (g_sigma(a, s).unwrap(), g_sigma(b, s).unwrap());
            prop_assert!(ga > 0.0 || a.abs() / s > 30.0);
            prop_assert!(ga <= 1.0);
            if a.abs() < b.abs() {
                prop_assert!(ga >= gb);
            }
        }

        #[test]
        fn correntropy_of_identical_vectors_is_one(a in prop::collection::vec(-1e3f64..1e3, 1..30), s in 1e-3f64..1e3) {
            prop_assert_eq!(correntropy_estimate(&a, &a, s).unwrap(), 1.0);
        }

        #[test]
        fn objective_column_permutation_invariant(
            labels in prop::collection::vec(1usize..=3, 2..12),
            seed_vals in prop::collection::vec(-2.0f64..2.0, 36),
            rot in 1usize..11,
        ) {
            let n = labels.len();
            let y = label_indicator(&labels, 3).unwrap();
            let f = DMatrix::from_fn(3, n, |l, i| seed_vals[(l * 12 + i) % 36]);
            let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
            let pl: Vec<usize> = perm.iter().map(|&i| labels[i]).collect();
            let py = label_indicator(&pl, 3).unwrap();
            let pf = f.select_columns(&perm);
            let w = vec![DVector::from_vec(vec![0.3, -0.1]); 3];
            let a = objective(&f, &y, &w, 0.9, 0.1).unwrap();
            let b = objective(&pf, &py, &w, 0.9, 0.1).unwrap();
            prop_assert!((a - b).abs() <= 1e-14);
        }

        #[test]
        fn objective_monotone_in_residual(r in 0.0f64..5.0, extra in 0.0f64..5.0, s in 0.1f64..3.0) {
            let y = label_indicator(&[1, 2], 2).unwrap();
            let mut f = y.matrix().clone();
            let w = vec![DVector::zeros(1); 2];
            f[(0, 1)] += r;
            let a = objective(&f, &y, &w, s, 0.2).unwrap();
            f[(0, 1)] += extra;
            let b = objective(&f, &y, &w, s, 0.2).unwrap();
            prop_assert!(b <= a);
        }
    }
}
