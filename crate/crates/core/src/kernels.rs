//! Sample representations: raw features, or a vector of kernel evaluations
//! against the training samples.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Rbf { bandwidth: f64 },
}

impl KernelSpec {
    pub fn rbf(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rbf bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(KernelSpec::Rbf { bandwidth })
    }
}

/// Evaluates `K(x, z)`: dot product for the linear kernel,
/// `exp(-|x - z|^2 / (2 h^2))` for rbf with bandwidth `h`.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], z: &[f64]) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: z.len(),
        });
    }
    Ok(kernel_unchecked(spec, x.iter().copied(), z.iter().copied()))
}

fn kernel_unchecked(
    spec: &KernelSpec,
    x: impl Iterator<Item = f64>,
    z: impl Iterator<Item = f64>,
) -> f64 {
    match *spec {
        KernelSpec::Linear => x.zip(z).map(|(a, b)| a * b).sum(),
        KernelSpec::Rbf { bandwidth } => {
            let sq: f64 = x.zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
            (-sq / (2.0 * bandwidth * bandwidth)).exp()
        }
    }
}

/// How a sample is fed to the per-class linear predictors.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Linear,
    /// `anchors` holds the training features, one row per sample.
    Kernel {
        kernel: KernelSpec,
        anchors: DMatrix<f64>,
    },
}

impl Representation {
    pub fn kernel(kernel: KernelSpec, anchors: DMatrix<f64>) -> Result<Self> {
        if anchors.nrows() == 0 || anchors.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "kernel representation needs non-empty anchors".into(),
            ));
        }
        Ok(Representation::Kernel { kernel, anchors })
    }

    /// Length of a represented sample given `input_dim` raw features.
    pub fn output_dim(&self, input_dim: usize) -> usize {
        match self {
            Representation::Linear => input_dim,
            Representation::Kernel { anchors, .. } => anchors.nrows(),
        }
    }

    /// Raw feature count expected, if fixed by the representation.
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            Representation::Linear => None,
            Representation::Kernel { anchors, .. } => Some(anchors.ncols()),
        }
    }

    /// Represents every row of `features`; column `i` of the result is
    /// the represented sample `i` (a D'×N matrix).
    pub fn represent_rows(&self, features: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self {
            Representation::Linear => Ok(features.transpose()),
            Representation::Kernel { kernel, anchors } => {
                if features.ncols() != anchors.ncols() {
                    return Err(Error::DimensionMismatch {
                        expected: anchors.ncols(),
                        actual: features.ncols(),
                    });
                }
                Ok(DMatrix::from_fn(anchors.nrows(), features.nrows(), |a, i| {
                    kernel_unchecked(
                        kernel,
                        anchors.row(a).iter().copied(),
                        features.row(i).iter().copied(),
                    )
                }))
            }
        }
    }
}

pub fn represent(x: &[f64], rep: &Representation) -> Result<DVector<f64>> {
    match rep {
        Representation::Linear => Ok(DVector::from_column_slice(x)),
        Representation::Kernel { kernel, anchors } => {
            if x.len() != anchors.ncols() {
                return Err(Error::DimensionMismatch {
                    expected: anchors.ncols(),
                    actual: x.len(),
                });
            }
            Ok(DVector::from_fn(anchors.nrows(), |a, _| {
                kernel_unchecked(kernel, anchors.row(a).iter().copied(), x.iter().copied())
            }))
        }
    }
}

/// Gram matrix `K[i][j] = K(x_i, x_j)` over the rows of `features`.
pub fn gram(spec: &KernelSpec, features: &DMatrix<f64>) -> DMatrix<f64> {
    let n = features.nrows();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel_unchecked(
                spec,
                features.row(i).iter().copied(),
                features.row(j).iter().copied(),
            );
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Median of the pairwise Euclidean distances between rows, or 1 when that
/// median is 0.
pub fn median_bandwidth(features: &DMatrix<f64>) -> Result<f64> {
    let n = features.nrows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "median bandwidth needs at least 2 samples, got {n}"
        )));
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push((features.row(i) - features.row(j)).norm());
        }
    }
    dists.sort_by(f64::total_cmp);
    let m = dists.len();
    let median = if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    };
    Ok(if median > 0.0 { median } else { 1.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    Median,
    #[serde(untagged)]
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

/// Representation settings before anchors are known. Resolved against a
/// training set with [`RepresentationConfig::build`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum RepresentationConfig {
    #[default]
    Linear,
    Kernel {
        #[serde(default = "default_kernel")]
        kernel: KernelKind,
        #[serde(default = "default_bandwidth")]
        bandwidth: Bandwidth,
    },
}

fn default_kernel() -> KernelKind {
    KernelKind::Rbf
}

fn default_bandwidth() -> Bandwidth {
    Bandwidth::Median
}

impl RepresentationConfig {
    pub fn rbf_median() -> Self {
        RepresentationConfig::Kernel {
            kernel: KernelKind::Rbf,
            bandwidth: Bandwidth::Median,
        }
    }

    pub fn build(&self, train_features: &DMatrix<f64>) -> Result<Representation> {
        match *self {
            RepresentationConfig::Linear => Ok(Representation::Linear),
            RepresentationConfig::Kernel { kernel, bandwidth } => {
                let spec = match kernel {
                    KernelKind::Linear => KernelSpec::Linear,
                    KernelKind::Rbf => KernelSpec::rbf(match bandwidth {
                        Bandwidth::Median => median_bandwidth(train_features)?,
                        Bandwidth::Fixed(h) => h,
                    })?,
                };
                Representation::kernel(spec, train_features.clone())
            }
        }
    }
}
