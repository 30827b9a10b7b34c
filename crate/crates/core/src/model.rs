//! Trained one-vs-all predictors and their on-disk format.
//!
//! A model holds one affine scorer `f_l(x) = w_l' x~ + b_l` per class, where
//! `x~` is the represented sample. Prediction is the argmax of the scores.
//! Models produced by every training method share this type.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{represent, KernelSpec, Representation};

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub method: String,
    pub weights: Vec<DVector<f64>>,
    pub biases: Vec<f64>,
    pub representation: Representation,
    /// Kernel width used in the final E-step (correntropy training only).
    pub sigma_final: Option<f64>,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
}

impl Model {
    pub fn num_classes(&self) -> usize {
        self.weights.len()
    }

    /// Raw feature count this model scores.
    pub fn input_dim(&self) -> usize {
        self.representation
            .input_dim()
            .unwrap_or_else(|| self.weights.first().map_or(0, |w| w.len()))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let l = self.weights.len();
        if l == 0 || self.biases.len() != l {
            return Err(Error::Model(format!(
                "{} weight vectors but {} biases",
                l,
                self.biases.len()
            )));
        }
        let dim = self.weights[0].len();
        let expected = match &self.representation {
            Representation::Linear => dim,
            Representation::Kernel { anchors, .. } => anchors.nrows(),
        };
        if self.weights.iter().any(|w| w.len() != expected) {
            return Err(Error::Model(format!(
                "weight length inconsistent with representation (expected {expected})"
            )));
        }
        let finite = self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.is_finite());
        if !finite {
            return Err(Error::Model("non-finite parameters".into()));
        }
        if self.class_names.len() != l {
            return Err(Error::Model("class map length mismatch".into()));
        }
        Ok(())
    }

    /// L×D' matrix whose rows are the class weight vectors.
    pub(crate) fn weight_matrix(&self) -> DMatrix<f64> {
        let dim = self.weights.first().map_or(0, |w| w.len());
        DMatrix::from_fn(self.weights.len(), dim, |l, d| self.weights[l][d])
    }

    /// L×N score matrix for already-represented samples (columns of `xt`).
    pub(crate) fn scores_represented(&self, xt: &DMatrix<f64>) -> DMatrix<f64> {
        let mut f = self.weight_matrix() * xt;
        for (mut row, &b) in f.row_iter_mut().zip(&self.biases) {
            row.add_scalar_mut(b);
        }
        f
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&ModelFile::from(self))
            .map_err(|e| Error::Model(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&ModelFile::from(self)).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        file.try_into()
    }
}

/// Scores `f_l(x) = w_l' x~ + b_l` for every class.
pub fn predict_scores(model: &Model, x: &[f64]) -> Result<Vec<f64>> {
    if matches!(model.representation, Representation::Linear) && x.len() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            actual: x.len(),
        });
    }
    let xt = represent(x, &model.representation)?;
    Ok(model
        .weights
        .iter()
        .zip(&model.biases)
        .map(|(w, b)| w.dot(&xt) + b)
        .collect())
}

/// Index (1-based) of the largest score; ties go to the smallest class.
pub fn argmax_label(scores: &[f64]) -> usize {
    let mut best = 0;
    for (l, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = l;
        }
    }
    best + 1
}

pub fn predict_label(model: &Model, x: &[f64]) -> Result<usize> {
    predict_scores(model, x).map(|s| argmax_label(&s))
}

/// L×N scores for every row of `features`.
pub fn score_matrix(model: &Model, features: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if matches!(model.representation, Representation::Linear) && features.ncols() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            actual: features.ncols(),
        });
    }
    let xt = model.representation.represent_rows(features)?;
    Ok(model.scores_represented(&xt))
}

pub fn predict_labels(model: &Model, features: &DMatrix<f64>) -> Result<Vec<usize>> {
    let f = score_matrix(model, features)?;
    Ok(f.column_iter()
        .map(|c| argmax_label(c.as_slice()))
        .collect())
}

const FORMAT_TAG: &str = "correntia-model";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    method: String,
    representation: RepresentationFile,
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
    sigma_final: Option<f64>,
    class_names: Vec<String>,
    feature_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
enum RepresentationFile {
    Linear,
    Kernel {
        kernel: KernelSpec,
        anchors: Vec<Vec<f64>>,
    },
}

impl From<&Model> for ModelFile {
    fn from(m: &Model) -> Self {
        let representation = match &m.representation {
            Representation::Linear => RepresentationFile::Linear,
            Representation::Kernel { kernel, anchors } => RepresentationFile::Kernel {
                kernel: *kernel,
                anchors: anchors
                    .row_iter()
                    .map(|r| r.iter().copied().collect())
                    .collect(),
            },
        };
        ModelFile {
            format: FORMAT_TAG.into(),
            version: FORMAT_VERSION,
            method: m.method.clone(),
            representation,
            weights: m.weights.iter().map(|w| w.iter().copied().collect()).collect(),
            biases: m.biases.clone(),
            sigma_final: m.sigma_final,
            class_names: m.class_names.clone(),
            feature_names: m.feature_names.clone(),
        }
    }
}

impl TryFrom<ModelFile> for Model {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.format != FORMAT_TAG || f.version != FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported format '{}' version {}",
                f.format, f.version
            )));
        }
        let representation = match f.representation {
            RepresentationFile::Linear => Representation::Linear,
            RepresentationFile::Kernel { kernel, anchors } => {
                let rows = anchors.len();
                let cols = anchors.first().map_or(0, Vec::len);
                if anchors.iter().any(|r| r.len() != cols) {
                    return Err(Error::Model("ragged anchor matrix".into()));
                }
                let flat: Vec<f64> = anchors.into_iter().flatten().collect();
                Representation::kernel(kernel, DMatrix::from_row_slice(rows, cols, &flat))?
            }
        };
        let model = Model {
            method: f.method,
            weights: f.weights.into_iter().map(DVector::from_vec).collect(),
            biases: f.biases,
            representation,
            sigma_final: f.sigma_final,
            class_names: f.class_names,
            feature_names: f.feature_names,
        };
        model.validate()?;
        Ok(model)
    }
}
