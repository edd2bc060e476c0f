//! Sparse instances, labelled datasets, LIBSVM text I/O, min-max
//! normalization and seeded splits.
//!
//! Splits and folds draw permutations from `ChaCha8Rng::seed_from_u64(seed)`
//! followed by a Fisher-Yates shuffle, so the same seed always yields the
//! same partition.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{OdmError, Result};

/// A sparse feature vector with 1-based, strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut prev = 0usize;
        for &(idx, val) in &entries {
            if idx == 0 {
                return Err(OdmError::InvalidDataset("feature indices are 1-based".into()));
            }
            if idx <= prev {
                return Err(OdmError::InvalidDataset(format!(
                    "non-ascending index {idx} after {prev}"
                )));
            }
            if !val.is_finite() {
                return Err(OdmError::InvalidDataset(format!("non-finite value at index {idx}")));
            }
            prev = idx;
        }
        Ok(Self { entries })
    }

    /// Builds a vector from dense values; `values[k]` becomes index `k + 1`.
    /// Zeros are dropped.
    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, v)| (k + 1, *v))
            .collect();
        Self { entries }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> usize {
        self.entries.last().map_or(0, |e| e.0)
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |e| e.0)
            .map_or(0.0, |k| self.entries[k].1)
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum()
    }

    /// Squared Euclidean distance, merging both index lists.
    pub fn dist_sq(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < a.len() || j < b.len() {
            let d = if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                i += 1;
                a[i - 1].1
            } else if i >= a.len() || b[j].0 < a[i].0 {
                j += 1;
                b[j - 1].1
            } else {
                i += 1;
                j += 1;
                a[i - 1].1 - b[j - 1].1
            };
            sum += d * d;
        }
        sum
    }

    /// Dot product with a dense vector whose element `k` holds index `k + 1`.
    /// Indices beyond the dense length contribute nothing.
    pub fn dot_dense(&self, w: &[f64]) -> f64 {
        self.entries
            .iter()
            .take_while(|(idx, _)| *idx <= w.len())
            .map(|(idx, v)| w[idx - 1] * v)
            .sum()
    }

    /// `w += scale * self`, ignoring indices beyond `w.len()`.
    pub fn axpy_into(&self, scale: f64, w: &mut [f64]) {
        for &(idx, v) in &self.entries {
            if idx > w.len() {
                break;
            }
            w[idx - 1] += scale * v;
        }
    }

    /// Appends a feature at `index`, which must exceed every existing index.
    pub fn push(&mut self, index: usize, value: f64) {
        debug_assert!(index > self.max_index());
        if value != 0.0 {
            self.entries.push((index, value));
        }
    }

    fn write_libsvm(&self, out: &mut String) {
        for (idx, v) in &self.entries {
            let _ = write!(out, " {idx}:{v:?}");
        }
    }

    /// Entries in `idx:val` syntax separated by spaces.
    pub fn to_libsvm_entries(&self) -> String {
        let mut s = String::new();
        self.write_libsvm(&mut s);
        s.trim_start().to_string()
    }
}

/// Parses a whitespace-separated list of `idx:val` tokens.
pub fn parse_entries<'a, I>(tokens: I) -> std::result::Result<SparseVector, String>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut entries = Vec::new();
    let mut prev = 0usize;
    for tok in tokens {
        let (i, v) = tok
            .split_once(':')
            .ok_or_else(|| format!("malformed token '{tok}'"))?;
        let idx: usize = i.parse().map_err(|_| format!("malformed index in '{tok}'"))?;
        let val: f64 = v.parse().map_err(|_| format!("malformed value in '{tok}'"))?;
        if idx == 0 {
            return Err(format!("index 0 in '{tok}' (indices are 1-based)"));
        }
        if idx <= prev {
            return Err(format!("non-ascending index {idx} after {prev}"));
        }
        if !val.is_finite() {
            return Err(format!("non-finite value in '{tok}'"));
        }
        prev = idx;
        entries.push((idx, val));
    }
    Ok(SparseVector { entries })
}

/// Instances paired with ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    instances: Vec<SparseVector>,
    labels: Vec<f64>,
    dim: usize,
}

impl Dataset {
    /// Labels must be exactly `1.0` or `-1.0`. An empty dataset is allowed
    /// here; trainers reject it.
    pub fn new(instances: Vec<SparseVector>, labels: Vec<f64>) -> Result<Self> {
        if instances.len() != labels.len() {
            return Err(OdmError::DimensionMismatch {
                expected: instances.len(),
                found: labels.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(OdmError::InvalidDataset(format!("label {bad} is not ±1")));
        }
        let dim = instances.iter().map(SparseVector::max_index).max().unwrap_or(0);
        Ok(Self { instances, labels, dim })
    }

    pub fn instances(&self) -> &[SparseVector] {
        &self.instances
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SparseVector, f64)> {
        self.instances.iter().zip(self.labels.iter().copied())
    }

    /// (positives, negatives)
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y > 0.0).count();
        (pos, self.len() - pos)
    }

    pub fn has_both_classes(&self) -> bool {
        let (p, n) = self.class_counts();
        p > 0 && n > 0
    }

    /// Errors unless the set is nonempty and contains both classes.
    pub fn ensure_trainable(&self) -> Result<()> {
        if self.is_empty() {
            return Err(OdmError::InvalidDataset("training set is empty".into()));
        }
        if !self.has_both_classes() {
            return Err(OdmError::InvalidDataset("training set has a single class".into()));
        }
        Ok(())
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let instances: Vec<_> = indices.iter().map(|&i| self.instances[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        let dim = instances.iter().map(SparseVector::max_index).max().unwrap_or(0);
        Dataset { instances, labels, dim }
    }

    /// Appends a constant feature at index `dim + 1` to every instance,
    /// emulating an intercept for the bias-free decision function.
    pub fn with_bias_feature(&self, value: f64, index: usize) -> Dataset {
        let instances = self
            .instances
            .iter()
            .map(|x| {
                let mut x = x.clone();
                x.push(index, value);
                x
            })
            .collect::<Vec<_>>();
        let dim = instances.iter().map(SparseVector::max_index).max().unwrap_or(0);
        Dataset { instances, labels: self.labels.clone(), dim }
    }

    pub fn to_libsvm(&self) -> String {
        let mut out = String::new();
        for (x, y) in self.iter() {
            out.push_str(if y > 0.0 { "+1" } else { "-1" });
            x.write_libsvm(&mut out);
            out.push('\n');
        }
        out
    }
}

fn parse_label(tok: &str) -> Option<f64> {
    match tok {
        "+1" | "1" => Some(1.0),
        "-1" | "0" => Some(-1.0),
        _ => match tok.parse::<f64>().ok()? {
            v if v == 1.0 => Some(1.0),
            v if v == -1.0 || v == 0.0 => Some(-1.0),
            _ => None,
        },
    }
}

/// Parses LIBSVM text: `<label> <idx>:<val> ...` per line. Blank lines are
/// skipped and `#` starts a comment. Label `0` is read as `-1`.
pub fn parse_libsvm(text: &str) -> Result<Dataset> {
    let mut instances = Vec::new();
    let mut labels = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label = parse_label(label_tok).ok_or_else(|| OdmError::Parse {
            line: lineno + 1,
            message: format!("unsupported label '{label_tok}'"),
        })?;
        let x = parse_entries(tokens).map_err(|message| OdmError::Parse {
            line: lineno + 1,
            message,
        })?;
        instances.push(x);
        labels.push(label);
    }
    Dataset::new(instances, labels)
}

/// Instances to classify, labelled or not.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionInput {
    pub instances: Vec<SparseVector>,
    /// Present when every line carries a label.
    pub labels: Option<Vec<f64>>,
}

/// Like [`parse_libsvm`], but a line whose first token is `idx:val` has no
/// label. All lines must agree.
pub fn parse_prediction_input(text: &str) -> Result<PredictionInput> {
    let mut instances = Vec::new();
    let mut labels = Vec::new();
    let mut labelled: Option<bool> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| OdmError::Parse { line: lineno + 1, message };
        let mut tokens = line.split_whitespace().peekable();
        let has_label = !tokens.peek().is_some_and(|t| t.contains(':'));
        if *labelled.get_or_insert(has_label) != has_label {
            return Err(parse_err("mixed labelled and unlabelled lines".into()));
        }
        if has_label {
            let tok = tokens.next().unwrap_or_default();
            labels.push(parse_label(tok).ok_or_else(|| parse_err(format!("unsupported label '{tok}'")))?);
        }
        instances.push(parse_entries(tokens).map_err(parse_err)?);
    }
    let labels = (labelled == Some(true)).then_some(labels);
    Ok(PredictionInput { instances, labels })
}

pub fn read_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_libsvm(&std::fs::read_to_string(path)?)
}

/// Per-feature min/max learned from a training set. Features absent from
/// an instance count as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    ranges: Vec<(f64, f64)>,
}

impl Normalizer {
    pub fn fit(train: &Dataset) -> Normalizer {
        let m = train.len();
        let dim = train.dim();
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        let mut present = vec![0usize; dim];
        for x in train.instances() {
            for &(idx, v) in x.entries() {
                let r = &mut ranges[idx - 1];
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
                present[idx - 1] += 1;
            }
        }
        for (r, &count) in ranges.iter_mut().zip(&present) {
            if count < m {
                r.0 = r.0.min(0.0);
                r.1 = r.1.max(0.0);
            }
        }
        Normalizer { ranges }
    }

    pub fn from_ranges(ranges: Vec<(f64, f64)>) -> Result<Normalizer> {
        if ranges.iter().any(|&(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(OdmError::InvalidParameter("normalizer ranges need finite min <= max".into()));
        }
        Ok(Normalizer { ranges })
    }

    pub fn ranges(&self) -> &[(f64, f64)] {
        &self.ranges
    }

    pub fn dim(&self) -> usize {
        self.ranges.len()
    }

    fn map(&self, idx: usize, v: f64) -> f64 {
        let (lo, hi) = self.ranges[idx - 1];
        if hi > lo {
            (v - lo) / (hi - lo)
        } else {
            0.0
        }
    }

    /// Maps every fitted feature through `(v - min) / (max - min)`, including
    /// absent ones when `min != 0`. Values are not clipped; indices beyond
    /// the fitted range pass through.
    pub fn apply_vector(&self, x: &SparseVector) -> SparseVector {
        let mut out = Vec::with_capacity(x.nnz());
        let mut it = x.entries().iter().peekable();
        for idx in 1..=self.dim() {
            let v = match it.peek() {
                Some(&&(i, v)) if i == idx => {
                    it.next();
                    v
                }
                _ => 0.0,
            };
            let mapped = self.map(idx, v);
            if mapped != 0.0 {
                out.push((idx, mapped));
            }
        }
        out.extend(it.copied());
        SparseVector { entries: out }
    }

    pub fn apply(&self, d: &Dataset) -> Dataset {
        let instances = d.instances().iter().map(|x| self.apply_vector(x)).collect();
        Dataset::new(instances, d.labels().to_vec()).expect("labels already validated")
    }
}

/// Free-function form of [`Normalizer::fit`].
pub fn fit_normalizer(train: &Dataset) -> Normalizer {
    Normalizer::fit(train)
}

pub fn apply_normalizer(n: &Normalizer, d: &Dataset) -> Dataset {
    n.apply(d)
}

pub fn seeded_permutation(m: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    idx
}

/// Result of [`split`]; indices refer to rows of the input dataset.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    /// Set when the training part contains only one class.
    pub single_class_train: bool,
}

/// Random partition with `round(fraction * m)` training rows.
pub fn split(d: &Dataset, fraction: f64, seed: u64) -> Result<Split> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(OdmError::InvalidParameter(format!("split fraction {fraction} not in (0, 1)")));
    }
    let m = d.len();
    let n_train = (fraction * m as f64).round() as usize;
    if n_train == 0 || n_train == m {
        return Err(OdmError::InvalidParameter(format!(
            "split of {m} rows at fraction {fraction} leaves an empty side"
        )));
    }
    let perm = seeded_permutation(m, seed);
    let mut train_indices = perm[..n_train].to_vec();
    let mut test_indices = perm[n_train..].to_vec();
    train_indices.sort_unstable();
    test_indices.sort_unstable();
    let train = d.subset(&train_indices);
    let single_class_train = !train.has_both_classes();
    if single_class_train {
        log::warn!("split (seed {seed}) produced a single-class training set");
    }
    Ok(Split {
        test: d.subset(&test_indices),
        train,
        train_indices,
        test_indices,
        single_class_train,
    })
}

/// Validation index sets for `k` folds; sizes differ by at most one.
pub fn kfold_indices(m: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > m {
        return Err(OdmError::InvalidParameter(format!("k = {k} folds invalid for m = {m}")));
    }
    let perm = seeded_permutation(m, seed);
    let (base, extra) = (m / k, m % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut fold = perm[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(folds)
}

/// (train, validation) pairs for k-fold cross-validation.
pub fn kfold(d: &Dataset, k: usize, seed: u64) -> Result<Vec<(Dataset, Dataset)>> {
    let folds = kfold_indices(d.len(), k, seed)?;
    Ok(folds
        .iter()
        .map(|val| {
            let mut in_val = vec![false; d.len()];
            val.iter().for_each(|&i| in_val[i] = true);
            let train: Vec<usize> = (0..d.len()).filter(|&i| !in_val[i]).collect();
            (d.subset(&train), d.subset(val))
        })
        .collect())
}
