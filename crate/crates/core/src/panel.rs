//! Labeled series-by-time panels and the moment estimators used by every
//! factor method in the crate.
//!
//! A [`Panel`] stores a `P x T` matrix with one row per series (an age, a
//! simulated coordinate) and one column per period. Column labels are integer
//! time stamps and must be strictly increasing.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    values: DMatrix<f64>,
    row_labels: Vec<String>,
    col_labels: Vec<i64>,
}

impl Panel {
    pub fn new(values: DMatrix<f64>, row_labels: Vec<String>, col_labels: Vec<i64>) -> Result<Self> {
        let (p, t) = values.shape();
        if p < 1 {
            return Err(Error::InvalidPanel("panel needs at least one series".into()));
        }
        if t < 2 {
            return Err(Error::InvalidPanel(format!("panel needs at least two periods, got {t}")));
        }
        if row_labels.len() != p {
            return Err(Error::InvalidPanel(format!(
                "{} row labels for {p} rows",
                row_labels.len()
            )));
        }
        if col_labels.len() != t {
            return Err(Error::InvalidPanel(format!(
                "{} column labels for {t} columns",
                col_labels.len()
            )));
        }
        if col_labels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPanel("column labels must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("panel values"));
        }
        Ok(Self {
            values,
            row_labels,
            col_labels,
        })
    }

    /// Panel with rows labelled `0..P` and columns labelled `1..=T`.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        let rows = (0..values.nrows()).map(|i| i.to_string()).collect();
        let cols = (1..=values.ncols() as i64).collect();
        Self::new(values, rows, cols)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[i64] {
        &self.col_labels
    }

    pub fn n_series(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_periods(&self) -> usize {
        self.values.ncols()
    }

    /// Index of the column carrying time label `label`.
    pub fn col_index(&self, label: i64) -> Option<usize> {
        self.col_labels.binary_search(&label).ok()
    }

    /// Same labels, new values of identical shape.
    pub fn with_values(&self, values: DMatrix<f64>) -> Result<Self> {
        if values.shape() != self.values.shape() {
            return Err(Error::ShapeMismatch(format!(
                "expected {:?}, got {:?}",
                self.values.shape(),
                values.shape()
            )));
        }
        Self::new(values, self.row_labels.clone(), self.col_labels.clone())
    }

    /// Sub-panel made of the columns `start..end`.
    pub fn column_range(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.n_periods() {
            return Err(Error::InvalidPanel(format!(
                "column range {start}..{end} outside 0..{}",
                self.n_periods()
            )));
        }
        Self::new(
            self.values.columns(start, end - start).into_owned(),
            self.row_labels.clone(),
            self.col_labels[start..end].to_vec(),
        )
    }

    /// Sub-panel made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.iter().any(|&r| r >= self.n_series()) {
            return Err(Error::InvalidPanel("row index out of range".into()));
        }
        let values = self.values.select_rows(rows.iter());
        let labels = rows.iter().map(|&r| self.row_labels[r].clone()).collect();
        Self::new(values, labels, self.col_labels.clone())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        self.with_values(&self.values * c)
    }

    /// Writes the panel as CSV: a header of time labels, then one row per
    /// series starting with its label.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["series".to_string()];
        header.extend(self.col_labels.iter().map(|c| c.to_string()));
        w.write_record(&header).map_err(csv_err)?;
        for (i, label) in self.row_labels.iter().enumerate() {
            let mut rec = vec![label.clone()];
            rec.extend(self.values.row(i).iter().map(|v| format!("{v:?}")));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut records = r.records();
        let header = records
            .next()
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: "empty panel file".into(),
            })?
            .map_err(csv_err)?;
        let cols = header
            .iter()
            .skip(1)
            .map(|s| {
                s.trim().parse::<i64>().map_err(|_| Error::Parse {
                    line: 1,
                    message: format!("time label {s:?} is not an integer"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut labels = Vec::new();
        let mut data = Vec::new();
        for (k, rec) in records.enumerate() {
            let line = k + 2;
            let rec = rec.map_err(csv_err)?;
            if rec.len() != cols.len() + 1 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, got {}", cols.len() + 1, rec.len()),
                });
            }
            labels.push(rec[0].to_string());
            for cell in rec.iter().skip(1) {
                let cell = cell.trim();
                if cell.is_empty() || cell == "." {
                    return Err(Error::Parse {
                        line,
                        message: "missing values are not allowed in a panel".into(),
                    });
                }
                let v = cell.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("cell {cell:?} is not a number"),
                })?;
                data.push(v);
            }
        }
        let values = DMatrix::from_row_slice(labels.len(), cols.len(), &data);
        Self::new(values, labels, cols)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

/// A (lagged) sample covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    pub matrix: DMatrix<f64>,
    pub lag: usize,
}

impl CovMatrix {
    /// `S * S^T`, symmetrized; the nonnegative definite matrix whose leading
    /// eigenvectors are used as loadings.
    pub fn outer_product(&self) -> DMatrix<f64> {
        symmetrize(&(&self.matrix * self.matrix.transpose()))
    }
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn sample_mean(panel: &Panel) -> DVector<f64> {
    panel.values.column_mean()
}

/// Panel values with the row means subtracted, together with those means.
pub fn centered(panel: &Panel) -> (DVector<f64>, DMatrix<f64>) {
    let mean = sample_mean(panel);
    let mut z = panel.values.clone();
    for mut col in z.column_iter_mut() {
        col -= &mean;
    }
    (mean, z)
}

/// Lag-`lag` sample auto-covariance, centred by the full-sample mean.
///
/// Lag 0 divides by `T`; lag `l >= 1` divides by `T - l`.
pub fn sample_autocov(panel: &Panel, lag: usize) -> Result<CovMatrix> {
    let (_, z) = centered(panel);
    autocov_of_centered(&z, lag)
}

pub(crate) fn autocov_of_centered(z: &DMatrix<f64>, lag: usize) -> Result<CovMatrix> {
    let t = z.ncols();
    if lag >= t {
        return Err(Error::InvalidLag { lag, periods: t });
    }
    let matrix = if lag == 0 {
        symmetrize(&(z * z.transpose())) / t as f64
    } else {
        let n = t - lag;
        let lead = z.columns(lag, n);
        let base = z.columns(0, n);
        (lead * base.transpose()) / n as f64
    };
    Ok(CovMatrix { matrix, lag })
}

/// First differences `y_{t+1} - y_t`, labelled by the later period.
pub fn difference_panel(panel: &Panel) -> Result<Panel> {
    let t = panel.n_periods();
    if t < 3 {
        return Err(Error::InsufficientLength { needed: 3, got: t });
    }
    let v = &panel.values;
    let diff = v.columns(1, t - 1) - v.columns(0, t - 1);
    Panel::new(diff, panel.row_labels.clone(), panel.col_labels[1..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_panel(p: usize, t: usize, seed: u64) -> Panel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Panel::from_matrix(DMatrix::from_fn(p, t, |_, _| rng.random_range(-2.0..2.0))).unwrap()
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        assert!(Panel::from_matrix(DMatrix::zeros(2, 1)).is_err());
        let bad_labels = Panel::new(DMatrix::zeros(1, 3), vec!["a".into()], vec![1, 1, 2]);
        assert!(bad_labels.is_err());
        let mut m = DMatrix::zeros(1, 3);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(Panel::from_matrix(m), Err(Error::NonFinite(_))));
    }

    #[test]
    fn mean_examples() {
        let p = Panel::from_matrix(DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(sample_mean(&p)[0], 2.0);
        let z = Panel::from_matrix(DMatrix::zeros(3, 4)).unwrap();
        assert_eq!(sample_mean(&z), DVector::zeros(3));

        let p = random_panel(2, 4, 11);
        for i in 0..2 {
            let mut s = 0.0;
            for t in 0..4 {
                s += p.values()[(i, t)];
            }
            assert_abs_diff_eq!(sample_mean(&p)[i], s / 4.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn autocov_hand_examples() {
        let p = Panel::from_matrix(DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(sample_autocov(&p, 1).unwrap().matrix[(0, 0)], 0.0);
        let p = Panel::from_matrix(DMatrix::from_row_slice(1, 4, &[1.0, 2.0, 1.0, 2.0])).unwrap();
        assert_abs_diff_eq!(sample_autocov(&p, 1).unwrap().matrix[(0, 0)], -0.25, epsilon = 1e-15);
        assert!(matches!(sample_autocov(&p, 4), Err(Error::InvalidLag { .. })));
    }

    #[test]
    fn lag0_matches_outer_product_loop() {
        let p = random_panel(3, 50, 5);
        let cov = sample_autocov(&p, 0).unwrap().matrix;
        let y = p.values();
        let mut mean = [0.0; 3];
        for i in 0..3 {
            for t in 0..50 {
                mean[i] += y[(i, t)] / 50.0;
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for t in 0..50 {
                    s += (y[(i, t)] - mean[i]) * (y[(j, t)] - mean[j]);
                }
                assert_abs_diff_eq!(cov[(i, j)], s / 50.0, epsilon = 1e-12);
                assert_eq!(cov[(i, j)], cov[(j, i)]);
            }
        }
    }

    #[test]
    fn lagged_autocov_matches_loop() {
        let p = random_panel(3, 20, 8);
        let y = p.values();
        let mean = sample_mean(&p);
        for lag in 1..4 {
            let cov = sample_autocov(&p, lag).unwrap().matrix;
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = 0.0;
                    for t in 0..20 - lag {
                        s += (y[(i, t + lag)] - mean[i]) * (y[(j, t)] - mean[j]);
                    }
                    assert_abs_diff_eq!(cov[(i, j)], s / (20 - lag) as f64, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn difference_examples() {
        let p = Panel::new(
            DMatrix::from_row_slice(1, 3, &[1.0, 4.0, 9.0]),
            vec!["x".into()],
            vec![2000, 2001, 2002],
        )
        .unwrap();
        let d = difference_panel(&p).unwrap();
        assert_eq!(d.values().as_slice(), &[3.0, 5.0]);
        assert_eq!(d.col_labels(), &[2001, 2002]);

        let c = Panel::from_matrix(DMatrix::from_element(2, 5, 3.5)).unwrap();
        assert!(difference_panel(&c).unwrap().values().iter().all(|&v| v == 0.0));

        let r = random_panel(2, 5, 3);
        let d = difference_panel(&r).unwrap();
        for i in 0..2 {
            for t in 0..4 {
                assert_eq!(d.values()[(i, t)], r.values()[(i, t + 1)] - r.values()[(i, t)]);
            }
        }

        let short = Panel::from_matrix(DMatrix::zeros(1, 2)).unwrap();
        assert!(matches!(difference_panel(&short), Err(Error::InsufficientLength { .. })));
    }

    #[test]
    fn column_permutation_changes_autocov_not_mean() {
        let p = random_panel(3, 12, 21);
        let mut swapped = p.values().clone();
        swapped.swap_columns(2, 9);
        let q = p.with_values(swapped).unwrap();
        let dm = sample_mean(&p) - sample_mean(&q);
        assert!(dm.amax() < 1e-14);
        let a = sample_autocov(&p, 1).unwrap().matrix;
        let b = sample_autocov(&q, 1).unwrap().matrix;
        assert!((a - b).amax() > 1e-6);
    }

    #[test]
    fn csv_round_trip_and_rejections() {
        let p = Panel::new(
            DMatrix::from_row_slice(2, 3, &[0.1, -2.5, 3.0, 1e-9, 4.25, -0.0]),
            vec!["0".into(), "90+".into()],
            vec![1933, 1934, 1935],
        )
        .unwrap();
        let text = p.to_csv_string().unwrap();
        assert!(text.starts_with("series,1933,1934,1935\n"));
        assert_eq!(Panel::read_csv(text.as_bytes()).unwrap(), p);

        let missing = "series,1,2\na,1.0,.\n";
        assert!(matches!(Panel::read_csv(missing.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let empty = "series,1,2\na,,2\n";
        assert!(Panel::read_csv(empty.as_bytes()).is_err());
    }
}
