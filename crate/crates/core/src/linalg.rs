//! Weighted ridge regression with an unpenalized intercept.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// What to do when `alpha = 0` and the centered design is rank deficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum OnSingular {
    /// Minimum-norm least-squares solution.
    LeastSquares,
    Fail,
}

/// Minimizes `sum_i s_i (w'x_i + b - y_i)^2 + alpha |w|^2` where `s_i` are
/// the nonnegative sample weights and `x_i` the columns of `xt` (D'×N).
///
/// The intercept is eliminated by centering on the `s`-weighted means,
/// leaving the D'×D' system
/// `(Xc Xc' + alpha I) w = Xc yc` with `Xc[:, i] = sqrt(s_i) (x_i - x_bar)`.
pub(crate) fn weighted_ridge(
    xt: &DMatrix<f64>,
    targets: &[f64],
    sample_weights: &[f64],
    alpha: f64,
    on_singular: OnSingular,
    class: usize,
) -> Result<(DVector<f64>, f64)> {
    let (dim, n) = xt.shape();
    debug_assert_eq!(targets.len(), n);
    debug_assert_eq!(sample_weights.len(), n);
    let total: f64 = sample_weights.iter().sum();
    let mut x_bar = DVector::zeros(dim);
    let mut y_bar = 0.0;
    for (i, (&s, &y)) in sample_weights.iter().zip(targets).enumerate() {
        x_bar.axpy(s, &xt.column(i), 1.0);
        y_bar += s * y;
    }
    x_bar /= total;
    y_bar /= total;

    let mut xc = xt.clone();
    let mut yc = DVector::zeros(n);
    for i in 0..n {
        let u = sample_weights[i].sqrt();
        let mut col = xc.column_mut(i);
        col -= &x_bar;
        col *= u;
        yc[i] = u * (targets[i] - y_bar);
    }

    let w = if alpha > 0.0 {
        let mut a = &xc * xc.transpose();
        for d in 0..dim {
            a[(d, d)] += alpha;
        }
        let rhs = &xc * &yc;
        match a.clone().cholesky() {
            Some(chol) => chol.solve(&rhs),
            None => lstsq(&xc, &yc, on_singular, class)?,
        }
    } else {
        lstsq(&xc, &yc, on_singular, class)?
    };
    let b = y_bar - w.dot(&x_bar);
    Ok((w, b))
}

fn lstsq(
    xc: &DMatrix<f64>,
    yc: &DVector<f64>,
    on_singular: OnSingular,
    class: usize,
) -> Result<DVector<f64>> {
    let design = xc.transpose();
    let (rows, cols) = design.shape();
    let svd = design.svd(true, true);
    let largest = svd.singular_values.max();
    let eps = largest * rows.max(cols) as f64 * f64::EPSILON;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    if rank < cols && on_singular == OnSingular::Fail {
        return Err(Error::Singular { class });
    }
    svd.solve(yc, eps)
        .map_err(|e| Error::InvalidArgument(format!("least squares failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ordinary_least_squares_line() {
        // y = 2x - 1 exactly
        let xt = DMatrix::from_row_slice(1, 4, &[0.0, 1.0, 2.0, 3.0]);
        let y = [-1.0, 1.0, 3.0, 5.0];
        let (w, b) = weighted_ridge(&xt, &y, &[0.25; 4], 0.0, OnSingular::Fail, 1).unwrap();
        assert_abs_diff_eq!(w[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_handling() {
        // duplicated feature row: rank 1 design in 2 dimensions
        let xt = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        let y = [1.0, 2.0, 3.0];
        let s = [1.0; 3];
        assert!(matches!(
            weighted_ridge(&xt, &y, &s, 0.0, OnSingular::Fail, 2),
            Err(Error::Singular { class: 2 })
        ));
        let (w, b) = weighted_ridge(&xt, &y, &s, 0.0, OnSingular::LeastSquares, 2).unwrap();
        // minimum-norm split of slope 1 across the two copies
        assert_abs_diff_eq!(w[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-12);
    }
}
