//! Labelled data: ingestion, label encoding, splitting, folds and label noise.
//!
//! Class labels are 1-based (`1..=L`) throughout the crate. The original
//! label strings are kept alongside so reports and predictions can be
//! written back in the user's vocabulary.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::{index, SliceRandom};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

/// Feature matrix (one row per sample) with class labels in `1..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: Vec<usize>,
    num_classes: usize,
    class_names: Vec<String>,
    feature_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset with generated class names `"1".."L"` and feature
    /// names `"x1".."xD"`.
    pub fn new(features: DMatrix<f64>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let class_names = (1..=num_classes).map(|l| l.to_string()).collect();
        let feature_names = (1..=features.ncols()).map(|j| format!("x{j}")).collect();
        Self::with_names(features, labels, num_classes, class_names, feature_names)
    }

    pub fn with_names(
        features: DMatrix<f64>,
        labels: Vec<usize>,
        num_classes: usize,
        class_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::InvalidDataset(format!(
                "need N >= 1 and D >= 1, got {}x{}",
                features.nrows(),
                features.ncols()
            )));
        }
        if labels.len() != features.nrows() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                actual: labels.len(),
            });
        }
        if num_classes == 0 {
            return Err(Error::InvalidDataset("num_classes must be >= 1".into()));
        }
        if class_names.len() != num_classes {
            return Err(Error::DimensionMismatch {
                expected: num_classes,
                actual: class_names.len(),
            });
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::DimensionMismatch {
                expected: features.ncols(),
                actual: feature_names.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l == 0 || l > num_classes) {
            return Err(Error::LabelOutOfRange { label, num_classes });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            let (row, col) = (pos % features.nrows(), pos / features.nrows());
            return Err(Error::InvalidDataset(format!(
                "non-finite feature at row {row}, column {col}"
            )));
        }
        Ok(Self {
            features,
            labels,
            num_classes,
            class_names,
            feature_names,
        })
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    /// Original label strings; entry `l - 1` names class `l`.
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn sample(&self, i: usize) -> Vec<f64> {
        self.features.row(i).iter().copied().collect()
    }

    /// Classes in `1..=L` that have no sample.
    pub fn missing_classes(&self) -> Vec<usize> {
        let mut seen = vec![false; self.num_classes];
        for &l in &self.labels {
            seen[l - 1] = true;
        }
        (1..=self.num_classes).filter(|l| !seen[l - 1]).collect()
    }

    /// Rows selected by `indices`, in that order. Class vocabulary is kept.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let features = self.features.select_rows(indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self {
            features,
            labels,
            num_classes: self.num_classes,
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Same features and vocabulary with different labels.
    /// Dataset restricted to the named feature columns, in that order.
    pub fn select_features(&self, names: &[String]) -> Result<Self> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::InvalidDataset(format!("feature column '{n}' not found")))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            features: self.features.select_columns(&idx),
            labels: self.labels.clone(),
            num_classes: self.num_classes,
            class_names: self.class_names.clone(),
            feature_names: names.to_vec(),
        })
    }

    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        Self::with_names(
            self.features.clone(),
            labels,
            self.num_classes,
            self.class_names.clone(),
            self.feature_names.clone(),
        )
    }
}

/// L×N matrix of ±1 class indicators: entry (l, i) is +1 iff sample i has
/// class l + 1.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorMatrix(DMatrix<f64>);

impl IndicatorMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn num_classes(&self) -> usize {
        self.0.nrows()
    }

    pub fn num_samples(&self) -> usize {
        self.0.ncols()
    }

    /// Recovers 1-based labels from the position of the +1 in each column.
    pub fn to_labels(&self) -> Vec<usize> {
        self.0
            .column_iter()
            .map(|c| c.iter().position(|&v| v > 0.0).map_or(0, |l| l + 1))
            .collect()
    }
}

pub fn label_indicator(labels: &[usize], num_classes: usize) -> Result<IndicatorMatrix> {
    if let Some(&label) = labels.iter().find(|&&l| l == 0 || l > num_classes) {
        return Err(Error::LabelOutOfRange { label, num_classes });
    }
    let y = DMatrix::from_fn(num_classes, labels.len(), |l, i| {
        if labels[i] == l + 1 {
            1.0
        } else {
            -1.0
        }
    });
    Ok(IndicatorMatrix(y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

const SPLIT_ATTEMPTS: usize = 100;

/// Train/test index sets for a uniform (unstratified) random split.
///
/// The permutation is redrawn from the same seeded stream until both
/// partitions hold every class, up to 100 attempts.
pub fn split_indices(ds: &Dataset, spec: SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = ds.num_samples();
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train_fraction must lie in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let n_train = (spec.train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::InvalidArgument(format!(
            "train_fraction {} leaves an empty partition for N = {n}",
            spec.train_fraction
        )));
    }
    let mut rng = rng::seeded(spec.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut absent = 0;
    for _ in 0..SPLIT_ATTEMPTS {
        order.shuffle(&mut rng);
        let (train, test) = order.split_at(n_train);
        match first_absent_class(ds, train).or_else(|| first_absent_class(ds, test)) {
            None => return Ok((train.to_vec(), test.to_vec())),
            Some(class) => absent = class,
        }
    }
    Err(Error::ClassAbsent {
        class: absent,
        attempts: SPLIT_ATTEMPTS,
    })
}

fn first_absent_class(ds: &Dataset, indices: &[usize]) -> Option<usize> {
    let mut seen = vec![false; ds.num_classes()];
    for &i in indices {
        seen[ds.labels()[i] - 1] = true;
    }
    seen.iter().position(|s| !s).map(|l| l + 1)
}

pub fn split(ds: &Dataset, spec: SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(ds, spec)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// Test-fold index sets for k-fold cross-validation over a seeded
/// permutation. The first `N mod k` folds hold one extra sample.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the number of samples N = {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

/// Complement of `test` in `0..n`, ascending.
pub fn complement(n: usize, test: &[usize]) -> Vec<usize> {
    let mut in_test = vec![false; n];
    for &i in test {
        in_test[i] = true;
    }
    (0..n).filter(|&i| !in_test[i]).collect()
}

pub fn kfold(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<(Dataset, Dataset)>> {
    let n = ds.num_samples();
    Ok(kfold_indices(n, k, seed)?
        .into_iter()
        .map(|test| (ds.subset(&complement(n, &test)), ds.subset(&test)))
        .collect())
}

/// Replaces the labels of exactly `floor(rate * N)` uniformly chosen samples
/// with a uniformly drawn different class.
pub fn inject_label_noise(ds: &Dataset, rate: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!(
            "noise rate must lie in [0, 1], got {rate}"
        )));
    }
    let n = ds.num_samples();
    let count = (rate * n as f64).floor() as usize;
    if count == 0 {
        return Ok(ds.clone());
    }
    let num_classes = ds.num_classes();
    if num_classes < 2 {
        return Err(Error::InvalidArgument(
            "label noise needs at least two classes".into(),
        ));
    }
    let mut rng = rng::seeded(seed);
    let mut chosen = index::sample(&mut rng, n, count).into_vec();
    chosen.sort_unstable();
    let mut labels = ds.labels().to_vec();
    for i in chosen {
        // draw from the L-1 other classes
        let draw = rng.gen_range(1..num_classes);
        labels[i] = if draw >= labels[i] { draw + 1 } else { draw };
    }
    ds.with_labels(labels)
}

/// Reads a headed CSV file. `label_column` names the class column; every
/// other column must hold decimal numbers.
///
/// Labels are mapped to `1..=L` by order of first appearance, except when
/// they are exactly the integers `1..=L`, in which case they map to
/// themselves.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_err(e.to_string()))?
        .clone();
    if headers.is_empty() {
        return Err(parse_err("empty file".into()));
    }
    let label_idx = headers
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| parse_err(format!("label column '{label_column}' not found")))?;
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&j| j != label_idx).collect();
    if feature_cols.is_empty() {
        return Err(parse_err("no feature columns".into()));
    }
    let feature_names = feature_cols
        .iter()
        .map(|&j| headers[j].trim().to_string())
        .collect();

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        // row numbers are 1-based data rows, excluding the header
        let row = r + 1;
        let record = record.map_err(|e| parse_err(format!("row {row}: {e}")))?;
        for &j in &feature_cols {
            let cell = record.get(j).unwrap_or("").trim();
            let v: f64 = cell.parse().map_err(|_| {
                parse_err(format!(
                    "row {row}, column '{}': cannot parse '{cell}' as a number",
                    &headers[j]
                ))
            })?;
            if !v.is_finite() {
                return Err(parse_err(format!(
                    "row {row}, column '{}': non-finite value",
                    &headers[j]
                )));
            }
            values.push(v);
        }
        raw_labels.push(record.get(label_idx).unwrap_or("").trim().to_string());
    }
    if raw_labels.is_empty() {
        return Err(parse_err("no data rows".into()));
    }

    let (labels, class_names) = encode_labels(&raw_labels);
    let features = DMatrix::from_row_slice(raw_labels.len(), feature_cols.len(), &values);
    Dataset::with_names(features, labels, class_names.len(), class_names, feature_names)
}

fn encode_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for s in raw {
        if !index.contains_key(s.as_str()) {
            names.push(s.clone());
            index.insert(s.as_str(), names.len());
        }
    }
    let num_classes = names.len();
    let as_ints: Option<Vec<usize>> = names.iter().map(|s| s.parse().ok()).collect();
    if let Some(mut ints) = as_ints {
        ints.sort_unstable();
        if ints.iter().copied().eq(1..=num_classes) {
            let labels = raw.iter().map(|s| s.parse().unwrap()).collect();
            let names = (1..=num_classes).map(|l| l.to_string()).collect();
            return (labels, names);
        }
    }
    let labels = raw.iter().map(|s| index[s.as_str()]).collect();
    (labels, names)
}

/// Reads the named feature columns from a headed CSV (other columns are
/// ignored), for scoring with a trained model.
pub fn load_feature_csv(path: impl AsRef<Path>, columns: &[String]) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_err(e.to_string()))?
        .clone();
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h.trim() == c)
                .ok_or_else(|| parse_err(format!("feature column '{c}' not found")))
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::new();
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| parse_err(format!("row {row}: {e}")))?;
        for (&j, name) in idx.iter().zip(columns) {
            let cell = record.get(j).unwrap_or("").trim();
            let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                parse_err(format!(
                    "row {row}, column '{name}': cannot parse '{cell}' as a number"
                ))
            })?;
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(parse_err("no data rows".into()));
    }
    Ok(DMatrix::from_row_slice(rows, columns.len(), &values))
}

/// Writes a dataset as a headed CSV with the label column last.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let mut header: Vec<&str> = ds.feature_names().iter().map(String::as_str).collect();
    header.push(label_column);
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..ds.num_samples() {
        for v in ds.features().row(i).iter() {
            out.push_str(&v.to_string());
            out.push(',');
        }
        out.push_str(&ds.class_names()[ds.labels()[i] - 1]);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn csv_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn toy(n: usize, num_classes: usize) -> Dataset {
        let features = DMatrix::from_fn(n, 2, |i, j| (i * 2 + j) as f64);
        let labels = (0..n).map(|i| i % num_classes + 1).collect();
        Dataset::new(features, labels, num_classes).unwrap()
    }

    #[test]
    fn load_csv_remaps_string_labels() {
        let f = csv_file("x,y\n1.0,a\n2.0,b\n3.0,a\n");
        let ds = load_csv(f.path(), "y").unwrap();
        assert_eq!(ds.num_samples(), 3);
        assert_eq!(ds.num_features(), 1);
        assert_eq!(ds.num_classes(), 2);
        assert_eq!(ds.labels(), &[1, 2, 1]);
        assert_eq!(ds.class_names(), &["a", "b"]);
        assert_eq!(ds.sample(2), vec![3.0]);
    }

    #[test]
    fn load_csv_blank_cell_names_row_and_column() {
        let f = csv_file("x,z,y\n1.0,2.0,a\n2.0,,b\n");
        let err = load_csv(f.path(), "y").unwrap_err().to_string();
        assert!(err.contains("row 2"), "{err}");
        assert!(err.contains("'z'"), "{err}");
    }

    #[test]
    fn load_csv_integer_labels_map_to_themselves() {
        let f = csv_file("y,x\n2,0.5\n1,0.1\n3,0.2\n2,0.3\n");
        let ds = load_csv(f.path(), "y").unwrap();
        assert_eq!(ds.labels(), &[2, 1, 3, 2]);
        assert_eq!(ds.class_names(), &["1", "2", "3"]);
    }

    #[test]
    fn load_csv_errors() {
        assert!(matches!(
            load_csv("/nonexistent/file.csv", "y"),
            Err(Error::Io { .. })
        ));
        let empty = csv_file("");
        assert!(matches!(load_csv(empty.path(), "y"), Err(Error::Parse { .. })));
        let header_only = csv_file("x,y\n");
        assert!(matches!(
            load_csv(header_only.path(), "y"),
            Err(Error::Parse { .. })
        ));
        let no_label = csv_file("x,z\n1,2\n");
        let err = load_csv(no_label.path(), "y").unwrap_err().to_string();
        assert!(err.contains("label column"), "{err}");
        let text = csv_file("x,y\nabc,1\n");
        assert!(matches!(load_csv(text.path(), "y"), Err(Error::Parse { .. })));
    }

    #[test]
    fn csv_write_then_load_preserves_data() {
        let ds = toy(7, 3);
        let f = tempfile::NamedTempFile::new().unwrap();
        write_csv(&ds, f.path(), "label").unwrap();
        let back = load_csv(f.path(), "label").unwrap();
        assert_eq!(back.features(), ds.features());
        assert_eq!(back.labels(), ds.labels());
    }

    #[test]
    fn indicator_examples() {
        let y = label_indicator(&[1, 2], 2).unwrap();
        assert_eq!(y.matrix(), &DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        let y = label_indicator(&[1], 1).unwrap();
        assert_eq!(y.matrix(), &DMatrix::from_element(1, 1, 1.0));
        let y = label_indicator(&[3, 1, 2], 3).unwrap();
        for c in y.matrix().column_iter() {
            assert_eq!(c.sum(), -1.0);
        }
        assert!(matches!(
            label_indicator(&[1, 4], 3),
            Err(Error::LabelOutOfRange { label: 4, .. })
        ));
        assert!(label_indicator(&[0], 3).is_err());
    }

    #[test]
    fn split_sizes_and_partition() {
        let ds = toy(66, 2);
        let (train, test) = split_indices(&ds, SplitSpec { train_fraction: 0.5, seed: 3 }).unwrap();
        assert_eq!((train.len(), test.len()), (33, 33));

        let ds = toy(4, 2);
        let (train, test) = split_indices(&ds, SplitSpec { train_fraction: 0.5, seed: 11 }).unwrap();
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }

    #[test]
    fn split_is_deterministic() {
        let ds = toy(30, 3);
        let spec = SplitSpec { train_fraction: 0.7, seed: 99 };
        assert_eq!(split(&ds, spec).unwrap(), split(&ds, spec).unwrap());
    }

    #[test]
    fn split_fails_when_a_class_cannot_appear_in_both() {
        let features = DMatrix::from_fn(5, 1, |i, _| i as f64);
        let ds = Dataset::new(features, vec![1, 1, 1, 1, 2], 2).unwrap();
        let err = split(&ds, SplitSpec { train_fraction: 0.5, seed: 0 }).unwrap_err();
        assert!(matches!(err, Error::ClassAbsent { class: 2, attempts: 100 }));
    }

    #[test]
    fn split_rejects_degenerate_fractions() {
        let ds = toy(4, 2);
        assert!(split(&ds, SplitSpec { train_fraction: 0.0, seed: 0 }).is_err());
        assert!(split(&ds, SplitSpec { train_fraction: 0.05, seed: 0 }).is_err());
        assert!(split(&ds, SplitSpec { train_fraction: 1.0, seed: 0 }).is_err());
    }

    #[test]
    fn kfold_examples() {
        let folds = kfold_indices(10, 10, 1).unwrap();
        assert!(folds.iter().all(|f| f.len() == 1));
        let folds = kfold_indices(6000, 10, 1).unwrap();
        assert!(folds.iter().all(|f| f.len() == 600));
        assert!(kfold_indices(3, 4, 1).is_err());
        assert!(kfold_indices(3, 1, 1).is_err());

        let ds = toy(11, 2);
        let pairs = kfold(&ds, 3, 5).unwrap();
        assert_eq!(pairs.len(), 3);
        for (train, test) in &pairs {
            assert_eq!(train.num_samples() + test.num_samples(), 11);
        }
    }

    #[test]
    fn noise_examples() {
        let ds = toy(100, 3);
        assert_eq!(inject_label_noise(&ds, 0.0, 1).unwrap(), ds);

        let noisy = inject_label_noise(&ds, 0.2, 1).unwrap();
        let changed = noisy.labels().iter().zip(ds.labels()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 20);
        assert_eq!(noisy.features(), ds.features());

        let two = toy(9, 2);
        let flipped = inject_label_noise(&two, 1.0, 4).unwrap();
        for (a, b) in flipped.labels().iter().zip(two.labels()) {
            assert_eq!(*a, 3 - *b);
        }

        assert!(inject_label_noise(&ds, 1.5, 1).is_err());
        assert!(inject_label_noise(&ds, -0.1, 1).is_err());
        assert_eq!(
            inject_label_noise(&ds, 0.3, 8).unwrap(),
            inject_label_noise(&ds, 0.3, 8).unwrap()
        );
    }

    proptest! {
        #[test]
        fn indicator_roundtrips_labels(labels in prop::collection::vec(1usize..=5, 1..40)) {
            let y = label_indicator(&labels, 5).unwrap();
            for c in y.matrix().column_iter() {
                prop_assert_eq!(c.iter().filter(|&&v| v == 1.0).count(), 1);
            }
            prop_assert_eq!(y.to_labels(), labels);
        }

        #[test]
        fn kfold_is_exact_partition(n in 2usize..200, k in 2usize..12, seed: u64) {
            prop_assume!(k <= n);
            let folds = kfold_indices(n, k, seed).unwrap();
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }

        #[test]
        fn split_is_exact_partition(n in 8usize..120, frac in 0.3f64..0.7, seed: u64) {
            let ds = toy(n, 2);
            let (mut train, test) = split_indices(&ds, SplitSpec { train_fraction: frac, seed }).unwrap();
            train.extend(test);
            train.sort_unstable();
            prop_assert_eq!(train, (0..n).collect::<Vec<_>>());
        }

        #[test]
        fn noise_changes_exact_count(n in 1usize..150, rate in 0.0f64..=1.0, classes in 2usize..6, seed: u64) {
            let ds = toy(n, classes);
            let noisy = inject_label_noise(&ds, rate, seed).unwrap();
            let changed = noisy.labels().iter().zip(ds.labels()).filter(|(a, b)| a != b).count();
            prop_assert_eq!(changed, (rate * n as f64).floor() as usize);
            prop_assert!(noisy.labels().iter().all(|&l| (1..=classes).contains(&l)));
        }
    }
}
