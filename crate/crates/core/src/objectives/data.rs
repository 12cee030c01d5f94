use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::sampling;
use crate::scalar::Scalar;

/// Feature rows with labels in `{-1, +1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset<T: Scalar> {
    features: DMatrix<T>,
    labels: Vec<T>,
}

impl<T: Scalar> LabeledDataset<T> {
    pub fn new(features: DMatrix<T>, labels: Vec<T>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l != T::one() && l != -T::one()) {
            return Err(Error::InvalidArgument(format!("label {bad} is not -1 or +1")));
        }
        Ok(LabeledDataset { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<T> {
        &self.features
    }

    pub fn labels(&self) -> &[T] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> (DVector<T>, T) {
        (self.features.row(i).transpose(), self.labels[i])
    }

    /// Rows at the given indices, in that order.
    pub fn select(&self, idx: &[usize]) -> Self {
        let features = DMatrix::from_fn(idx.len(), self.dim(), |r, c| self.features[(idx[r], c)]);
        let labels = idx.iter().map(|&i| self.labels[i]).collect();
        LabeledDataset { features, labels }
    }

    /// `count` rows drawn without replacement, order given by a seeded shuffle.
    pub fn subsample(&self, count: usize, seed: u64) -> Result<Self> {
        if count > self.len() {
            return Err(Error::InvalidArgument(format!("cannot draw {count} rows from {}", self.len())));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut sampling::rng(seed));
        idx.truncate(count);
        Ok(self.select(&idx))
    }

    /// Centres every feature column and scales it to unit variance
    /// (constant columns are only centred).
    pub fn standardized(&self) -> Self {
        let m = T::of_usize(self.len().max(1));
        let mut features = self.features.clone();
        for mut col in features.column_iter_mut() {
            let mean = col.sum() / m;
            col.add_scalar_mut(-mean);
            let sd = (col.norm_squared() / m).sqrt();
            if sd > T::zero() {
                col /= sd;
            }
        }
        LabeledDataset { features, labels: self.labels.clone() }
    }

    /// Non-separable synthetic data with correlated, unevenly scaled
    /// features (scales from 1.5 down to 0.2 along a random rotation) and
    /// labels drawn from a logistic model around a fixed weight vector.
    pub fn synthetic(rows: usize, dim: usize, seed: u64) -> Self {
        let mut rng = sampling::rng(seed);
        let rotation = sampling::gaussian_matrix::<f64>(dim, dim, &mut rng).qr().q();
        let scales =
            DVector::from_fn(
                dim,
                |j, _| {
                    if dim == 1 {
                        1.0
                    } else {
                        1.5 * (0.2f64 / 1.5).powf(j as f64 / (dim - 1) as f64)
                    }
                },
            );
        let base: DVector<f64> =
            DVector::from_fn(dim, |i, _| if i % 2 == 0 { 1.5 } else { -1.0 } / (1.0 + i as f64 / 2.0));
        let weights = &rotation * base;
        let features: DMatrix<f64> = sampling::gaussian_matrix::<f64>(rows, dim, &mut rng)
            * DMatrix::from_diagonal(&scales)
            * rotation.transpose();
        let labels = (0..rows)
            .map(|r| {
                let margin = features.row(r).transpose().dot(&weights);
                let prob = 1.0 / (1.0 + (-margin).exp());
                if rng.random::<f64>() < prob {
                    T::one()
                } else {
                    -T::one()
                }
            })
            .collect();
        LabeledDataset { features: features.map(T::lit), labels }
    }

    /// Parses comma-separated rows `z_1,...,z_d,class`. Class `0`/`-1` maps to
    /// -1 and `1`/`+1` to +1. Lines whose first field is not numeric are
    /// treated as headers and skipped.
    pub fn parse_csv(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse { path: origin.to_path_buf(), line, msg };
        let mut values: Vec<T> = Vec::new();
        let mut labels = Vec::new();
        let mut dim = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields[0].parse::<f64>().is_err() {
                continue;
            }
            if fields.len() < 2 {
                return Err(err(idx + 1, "need at least one feature and a class".into()));
            }
            let d = fields.len() - 1;
            match dim {
                None => dim = Some(d),
                Some(expected) if expected != d => {
                    return Err(err(idx + 1, format!("expected {expected} features, found {d}")))
                }
                _ => {}
            }
            for f in &fields[..d] {
                let v: f64 = f.parse().map_err(|_| err(idx + 1, format!("bad feature `{f}`")))?;
                if !v.is_finite() {
                    return Err(err(idx + 1, format!("non-finite feature `{f}`")));
                }
                values.push(T::lit(v));
            }
            let label = match fields[d] {
                "0" | "-1" => -T::one(),
                "1" | "+1" => T::one(),
                other => return Err(err(idx + 1, format!("bad class token `{other}`"))),
            };
            labels.push(label);
        }
        let dim = dim.ok_or_else(|| err(0, "no data rows".into()))?;
        let features = DMatrix::from_row_slice(labels.len(), dim, &values);
        Ok(LabeledDataset { features, labels })
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, path)
    }
}
