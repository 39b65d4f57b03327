//! Factor and residual diagnostics, fit and forecast error measures.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorDiag {
    pub time_variance: f64,
    pub time_dependence: f64,
    /// `time_variance + time_dependence`.
    pub mix: f64,
}

/// Sample variance (divisor `T-1`) and lag-1 auto-covariance of a factor
/// series. The lag-1 sum has `T-1` terms but is divided by `T-2`.
pub fn factor_diag(k: &[f64]) -> Result<FactorDiag> {
    let t = k.len();
    if t < 3 {
        return Err(Error::InsufficientLength { needed: 3, got: t });
    }
    let m = k.iter().sum::<f64>() / t as f64;
    let time_variance = k.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (t - 1) as f64;
    let time_dependence = k.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / (t - 2) as f64;
    Ok(FactorDiag {
        time_variance,
        time_dependence,
        mix: time_variance + time_dependence,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualDiag {
    pub time_variance: f64,
    pub time_dependence: f64,
    pub cross_variance: f64,
    pub cross_dependence: f64,
}

fn mean_abs_off_diagonal(c: &DMatrix<f64>) -> f64 {
    let n = c.nrows();
    let mut total = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                total += c[(i, j)].abs();
            }
        }
    }
    total / (n * (n - 1)) as f64
}

/// Residual variance and absolute covariance averaged along time and across
/// series. `e` is P x T.
pub fn residual_diag(e: &DMatrix<f64>) -> Result<ResidualDiag> {
    let (p, t) = e.shape();
    if p < 2 || t < 2 {
        return Err(Error::InvalidPanel(format!(
            "residual diagnostics need P >= 2 and T >= 2, got {p} x {t}"
        )));
    }
    // Each row centered over time.
    let mut by_row = e.clone();
    for mut row in by_row.row_iter_mut() {
        let m = row.mean();
        row.add_scalar_mut(-m);
    }
    // Each column centered over series.
    let mut by_col = e.clone();
    for mut col in by_col.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }

    let time_variance = by_row.iter().map(|v| v * v).sum::<f64>() / (t - 1) as f64 / p as f64;
    let cross_variance = by_col.iter().map(|v| v * v).sum::<f64>() / (p - 1) as f64 / t as f64;
    let time_cov = by_col.transpose() * &by_col / p as f64;
    let cross_cov = &by_row * by_row.transpose() / t as f64;
    Ok(ResidualDiag {
        time_variance,
        time_dependence: mean_abs_off_diagonal(&time_cov),
        cross_variance,
        cross_dependence: mean_abs_off_diagonal(&cross_cov),
    })
}

/// Cells over which an RMSE is computed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "indices", rename_all = "snake_case")]
pub enum Selector {
    All,
    Rows(Vec<usize>),
    Cols(Vec<usize>),
}

fn check_shapes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

pub fn fit_rmse(actual: &DMatrix<f64>, fitted: &DMatrix<f64>, selector: &Selector) -> Result<f64> {
    check_shapes(actual, fitted)?;
    let diff = actual - fitted;
    let (p, t) = diff.shape();
    let check = |idx: &[usize], bound: usize, what: &str| -> Result<()> {
        if idx.is_empty() || idx.iter().any(|&i| i >= bound) {
            return Err(Error::ShapeMismatch(format!(
                "{what} selection {idx:?} is empty or out of range for {bound}"
            )));
        }
        Ok(())
    };
    let (sum, count) = match selector {
        Selector::All => (diff.iter().map(|v| v * v).sum::<f64>(), p * t),
        Selector::Rows(rows) => {
            check(rows, p, "row")?;
            let s = rows.iter().map(|&i| diff.row(i).norm_squared()).sum::<f64>();
            (s, rows.len() * t)
        }
        Selector::Cols(cols) => {
            check(cols, t, "column")?;
            let s = cols.iter().map(|&j| diff.column(j).norm_squared()).sum::<f64>();
            (s, cols.len() * p)
        }
    };
    Ok((sum / count as f64).sqrt())
}

/// Root mean squared forecast error over a P x h block.
pub fn frmse(actual: &DMatrix<f64>, forecast: &DMatrix<f64>) -> Result<f64> {
    check_shapes(actual, forecast)?;
    let n = actual.len() as f64;
    Ok(((actual - forecast).norm_squared() / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrmseSplit {
    pub overall: f64,
    pub dependent: f64,
    pub independent: f64,
}

/// Overall forecast RMSE plus the RMSE of each block of a row partition.
pub fn frmse_split(
    actual: &DMatrix<f64>,
    forecast: &DMatrix<f64>,
    dependent_rows: &[usize],
    independent_rows: &[usize],
) -> Result<FrmseSplit> {
    check_shapes(actual, forecast)?;
    let p = actual.nrows();
    let mut seen = vec![0u8; p];
    for &i in dependent_rows.iter().chain(independent_rows) {
        if i >= p {
            return Err(Error::ShapeMismatch(format!("row {i} out of range for P = {p}")));
        }
        seen[i] += 1;
    }
    if seen.iter().any(|&c| c != 1) || dependent_rows.is_empty() || independent_rows.is_empty() {
        return Err(Error::ShapeMismatch(
            "dependent and independent rows must partition the rows".into(),
        ));
    }
    let diff = actual - forecast;
    let h = diff.ncols() as f64;
    let part = |rows: &[usize]| {
        let s: f64 = rows.iter().map(|&i| diff.row(i).norm_squared()).sum();
        (s / (h * rows.len() as f64)).sqrt()
    };
    Ok(FrmseSplit {
        overall: frmse(actual, forecast)?,
        dependent: part(dependent_rows),
        independent: part(independent_rows),
    })
}

/// Mean squared and mean absolute deviation of estimates from truths.
pub fn fmse_fmae(estimates: &[f64], truths: &[f64]) -> Result<(f64, f64)> {
    if estimates.len() != truths.len() || estimates.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "{} estimates vs {} truths",
            estimates.len(),
            truths.len()
        )));
    }
    let n = estimates.len() as f64;
    let mut se = 0.0;
    let mut ae = 0.0;
    for (e, t) in estimates.iter().zip(truths) {
        se += (e - t).powi(2);
        ae += (e - t).abs();
    }
    Ok((se / n, ae / n))
}
