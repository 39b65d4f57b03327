//! Two-step hierarchical factor estimation and factor-based forecasting.
//!
//! Step one takes loadings from the leading eigenvectors of
//! `S(1) S(1)'`, where `S(1)` is the lag-1 sample auto-covariance, so the
//! first factors carry the strongest serial dependence. Step two removes
//! those factors and takes loadings from `S_u(0)^2` of what remains, picking
//! up the leftover variance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::arima::{auto_arima, forecast_arima, ArimaGrid, ArimaModel};
use crate::eigen::sym_eigen_desc;
use crate::error::{Error, Result};
use crate::panel::{autocov_of_centered, centered, difference_panel, Panel};

/// A rank that is either fixed or chosen by the eigenvalue-ratio criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "RankRepr", into = "RankRepr")]
pub enum Rank {
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RankRepr {
    Fixed(usize),
    Word(String),
}

impl TryFrom<RankRepr> for Rank {
    type Error = String;
    fn try_from(r: RankRepr) -> std::result::Result<Self, String> {
        match r {
            RankRepr::Fixed(n) => Ok(Rank::Fixed(n)),
            RankRepr::Word(w) if w.eq_ignore_ascii_case("auto") => Ok(Rank::Auto),
            RankRepr::Word(w) => Err(format!("rank must be a positive integer or \"auto\", got {w:?}")),
        }
    }
}

impl From<Rank> for RankRepr {
    fn from(r: Rank) -> Self {
        match r {
            Rank::Auto => RankRepr::Word("auto".into()),
            Rank::Fixed(n) => RankRepr::Fixed(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FhfmConfig {
    pub r1: Rank,
    pub r2: Rank,
    /// Largest index searched by the ratio criterion; `None` means
    /// `floor(min(P, T) / 2)`.
    pub r_max: Option<usize>,
    /// Estimate step-one loadings on the first-differenced panel.
    pub difference_step1: bool,
    /// Lag of the auto-covariance used in step one.
    pub step1_lag: usize,
    pub arima_grid: ArimaGrid,
}

impl Default for FhfmConfig {
    fn default() -> Self {
        Self {
            r1: Rank::Auto,
            r2: Rank::Auto,
            r_max: None,
            difference_step1: false,
            step1_lag: 1,
            arima_grid: ArimaGrid::default(),
        }
    }
}

/// Loadings, factors and leftover panel of one eigen-extraction step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFit {
    /// P x r, orthonormal columns.
    pub loadings: DMatrix<f64>,
    /// r x T.
    pub factors: DMatrix<f64>,
    /// Input minus `loadings * factors`.
    pub residual: DMatrix<f64>,
    /// Full spectrum of the matrix the loadings came from.
    pub spectrum: Vec<f64>,
}

impl StepFit {
    pub fn rank(&self) -> usize {
        self.loadings.ncols()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FhfmFit {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<i64>,
    pub mean: DVector<f64>,
    pub step1_loadings: DMatrix<f64>,
    pub step1_factors: DMatrix<f64>,
    pub step2_loadings: DMatrix<f64>,
    pub step2_factors: DMatrix<f64>,
    pub residual: DMatrix<f64>,
    pub step1_spectrum: Vec<f64>,
    pub step2_spectrum: Vec<f64>,
    pub config: FhfmConfig,
}

impl FhfmFit {
    pub fn r1(&self) -> usize {
        self.step1_loadings.ncols()
    }

    pub fn r2(&self) -> usize {
        self.step2_loadings.ncols()
    }

    /// Both factor panels stacked, step one on top.
    pub fn all_factors(&self) -> DMatrix<f64> {
        stack_rows(&self.step1_factors, &self.step2_factors)
    }

    pub fn all_loadings(&self) -> DMatrix<f64> {
        stack_cols(&self.step1_loadings, &self.step2_loadings)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub horizon: usize,
    /// P x h.
    pub forecasts: DMatrix<f64>,
    /// One row per factor series, h columns.
    pub factor_forecasts: DMatrix<f64>,
    pub models: Vec<ArimaModel>,
    /// Indices of series that fell back to a random walk with drift.
    #[serde(default)]
    pub fallbacks: Vec<usize>,
}

pub(crate) fn stack_rows(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = a.ncols().max(b.ncols());
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), cols);
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

pub(crate) fn stack_cols(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let rows = a.nrows().max(b.nrows());
    let mut out = DMatrix::zeros(rows, a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

/// Ratio criterion: the 1-based `i` in `1..=r_max` minimizing
/// `lambda_{i+1} / lambda_i`, first index on ties.
pub fn select_rank(eigenvalues: &[f64], r_max: usize) -> Result<usize> {
    if r_max == 0 || r_max + 1 > eigenvalues.len() {
        return Err(Error::InvalidR {
            r_max,
            available: eigenvalues.len(),
        });
    }
    let lead = eigenvalues[0];
    if !(lead > 0.0) {
        return Err(Error::DegenerateSpectrum);
    }
    let floor = 1e-12 * lead;
    let mut best = 1;
    let mut best_ratio = f64::INFINITY;
    for i in 0..r_max {
        let ratio = eigenvalues[i + 1].max(floor) / eigenvalues[i].max(floor);
        if ratio < best_ratio {
            best_ratio = ratio;
            best = i + 1;
        }
    }
    Ok(best)
}

pub(crate) fn default_r_max(p: usize, t: usize) -> usize {
    (p.min(t) / 2).max(1)
}

pub(crate) fn check_r_max(r_max: usize, p: usize, t: usize) -> Result<()> {
    if r_max == 0 || r_max + 1 > p || r_max + 1 > p.min(t) {
        return Err(Error::InvalidR {
            r_max,
            available: p.min(t),
        });
    }
    Ok(())
}

/// Eigen-decomposes `target`, resolves the rank and projects the centered
/// levels `z` on the kept eigenvectors. `scale` is the magnitude of the data
/// the matrix was built from; a leading eigenvalue that is zero relative to
/// it (the matrix is quartic in the data) is treated as no signal.
pub(crate) fn extract(
    target: &DMatrix<f64>,
    z: &DMatrix<f64>,
    rank: Rank,
    r_max: Option<usize>,
    scale: f64,
) -> Result<StepFit> {
    let (p, t) = z.shape();
    let ed = sym_eigen_desc(target)?;
    let lead = ed.eigenvalues[0];
    if !(lead > 0.0) || lead.sqrt().sqrt() <= 1e-12 * scale {
        return Err(Error::DegenerateSpectrum);
    }
    let r = match rank {
        Rank::Fixed(r) => {
            if r == 0 || r > p {
                return Err(Error::Rank { rank: r, dim: p });
            }
            r
        }
        Rank::Auto => {
            let r_max = r_max.unwrap_or_else(|| default_r_max(p, t));
            check_r_max(r_max, p, t)?;
            select_rank(&ed.eigenvalues, r_max)?
        }
    };
    let loadings = ed.leading_vectors(r);
    let factors = loadings.transpose() * z;
    let residual = z - &loadings * &factors;
    Ok(StepFit {
        loadings,
        factors,
        residual,
        spectrum: ed.eigenvalues,
    })
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

fn step1_target(panel: &Panel, difference: bool, lag: usize) -> Result<DMatrix<f64>> {
    let source = if difference {
        difference_panel(panel)?
    } else {
        panel.clone()
    };
    let (_, zs) = centered(&source);
    Ok(autocov_of_centered(&zs, lag)?.outer_product())
}

/// Each step of the hierarchy must leave something for the other.
fn proper_rank(rank: Rank, p: usize) -> Result<()> {
    match rank {
        Rank::Fixed(r) if r >= p => Err(Error::Rank { rank: r, dim: p }),
        _ => Ok(()),
    }
}

fn step1_with_lag(panel: &Panel, rank: Rank, difference: bool, r_max: Option<usize>, lag: usize) -> Result<StepFit> {
    if lag == 0 {
        return Err(Error::InvalidLagSet("step one needs a positive lag".into()));
    }
    proper_rank(rank, panel.n_series())?;
    let target = step1_target(panel, difference, lag)?;
    let (_, z) = centered(panel);
    extract(&target, &z, rank, r_max, max_abs(panel.values()))
}

/// First step: loadings from the lag-1 auto-covariance product of the panel
/// (or of its first differences when `difference` is set); factors are
/// always projections of the centered levels.
pub fn fit_step1(panel: &Panel, r1: Rank, difference: bool, r_max: Option<usize>) -> Result<StepFit> {
    step1_with_lag(panel, r1, difference, r_max, 1)
}

fn step2_with_scale(u: &DMatrix<f64>, r2: Rank, r_max: Option<usize>, scale: f64) -> Result<StepFit> {
    proper_rank(r2, u.nrows())?;
    let target = autocov_of_centered(u, 0)?.outer_product();
    extract(&target, u, r2, r_max, scale)
}

/// Second step on a residual panel that is already centered.
pub fn fit_step2(residual: &Panel, r2: Rank, r_max: Option<usize>) -> Result<StepFit> {
    step2_with_scale(residual.values(), r2, r_max, max_abs(residual.values()))
}

pub fn fit_fhfm(panel: &Panel, config: &FhfmConfig) -> Result<FhfmFit> {
    let p = panel.n_series();
    if let (Rank::Fixed(a), Rank::Fixed(b)) = (config.r1, config.r2) {
        if a + b >= p {
            return Err(Error::RankBudget { total: a + b, dim: p });
        }
    }
    let s1 = step1_with_lag(panel, config.r1, config.difference_step1, config.r_max, config.step1_lag)?;
    let s2 = step2_with_scale(&s1.residual, config.r2, config.r_max, max_abs(panel.values()))?;
    if s1.rank() + s2.rank() >= p {
        return Err(Error::RankBudget {
            total: s1.rank() + s2.rank(),
            dim: p,
        });
    }
    Ok(FhfmFit {
        row_labels: panel.row_labels().to_vec(),
        col_labels: panel.col_labels().to_vec(),
        mean: crate::panel::sample_mean(panel),
        step1_loadings: s1.loadings,
        step1_factors: s1.factors,
        step2_loadings: s2.loadings,
        step2_factors: s2.factors,
        residual: s2.residual,
        step1_spectrum: s1.spectrum,
        step2_spectrum: s2.spectrum,
        config: config.clone(),
    })
}

/// Fitted values `mean + B K1 + A K2`.
pub fn reconstruct(fit: &FhfmFit) -> Result<Panel> {
    let low = &fit.step1_loadings * &fit.step1_factors + &fit.step2_loadings * &fit.step2_factors;
    let values = add_mean(low, &fit.mean);
    Panel::new(values, fit.row_labels.clone(), fit.col_labels.clone())
}

pub(crate) fn add_mean(mut m: DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    for mut col in m.column_iter_mut() {
        col += mean;
    }
    m
}

/// Minimum factor-series length accepted for ARIMA-based forecasting.
pub const MIN_FORECAST_LENGTH: usize = 10;

/// Fits `auto_arima` to each row of `factors` and forecasts `h` steps.
/// Rows are independent; with the `parallel` feature they run on the rayon
/// pool and results are collected in row order.
pub(crate) fn forecast_factor_rows(
    factors: &DMatrix<f64>,
    h: usize,
    grid: &ArimaGrid,
) -> Result<(DMatrix<f64>, Vec<ArimaModel>)> {
    if h == 0 {
        return Err(Error::InvalidHorizon(h));
    }
    if factors.ncols() < MIN_FORECAST_LENGTH {
        return Err(Error::InsufficientLength {
            needed: MIN_FORECAST_LENGTH,
            got: factors.ncols(),
        });
    }
    let one = |i: usize| -> Result<(Vec<f64>, ArimaModel)> {
        let series: Vec<f64> = factors.row(i).iter().copied().collect();
        let wrap = |e: Error| Error::FactorModel {
            index: i,
            source: Box::new(e),
        };
        let model = auto_arima(&series, grid).map_err(wrap)?;
        let fc = forecast_arima(&model, &series, h).map_err(wrap)?;
        Ok((fc, model))
    };
    let rows: Vec<Result<(Vec<f64>, ArimaModel)>> = map_indices(factors.nrows(), one);
    let mut out = DMatrix::zeros(factors.nrows(), h);
    let mut models = Vec::with_capacity(rows.len());
    for (i, r) in rows.into_iter().enumerate() {
        let (fc, model) = r?;
        for (k, v) in fc.into_iter().enumerate() {
            out[(i, k)] = v;
        }
        models.push(model);
    }
    Ok((out, models))
}

#[cfg(feature = "parallel")]
pub(crate) fn map_indices<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indices<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Forecasts every factor series independently and maps the forecasts back
/// through the loadings.
pub fn forecast_fhfm(fit: &FhfmFit, h: usize, grid: &ArimaGrid) -> Result<ForecastResult> {
    let factors = fit.all_factors();
    let (factor_forecasts, models) = forecast_factor_rows(&factors, h, grid)?;
    let forecasts = add_mean(&fit.all_loadings() * &factor_forecasts, &fit.mean);
    Ok(ForecastResult {
        horizon: h,
        forecasts,
        factor_forecasts,
        models,
        fallbacks: vec![],
    })
}
