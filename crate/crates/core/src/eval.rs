//! Method configuration and forecast evaluation: hold-out FRMSE, in-sample
//! fit RMSE tables and rolling-window FRMSE reports.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::arima::ArimaGrid;
use crate::baselines::{
    fit_cpca, fit_dpca, fit_forecast_individual, fit_lee_carter, forecast_baseline, FactorFit,
    FittedModel,
};
use crate::error::{Error, Result};
use crate::fhfm::{fit_fhfm, forecast_fhfm, map_indices, FhfmConfig, ForecastResult, Rank};
use crate::metrics::{fit_rmse, frmse, Selector};
use crate::panel::Panel;

fn default_ell0() -> usize {
    1
}

fn yes() -> bool {
    true
}

/// A forecasting method and its settings, as written in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MethodSpec {
    Fhfm(FhfmConfig),
    Cpca {
        #[serde(default)]
        r: Rank,
        #[serde(default)]
        difference: bool,
        #[serde(default)]
        r_max: Option<usize>,
        #[serde(default)]
        arima_grid: ArimaGrid,
    },
    Dpca {
        #[serde(default)]
        r: Rank,
        #[serde(default = "default_ell0")]
        ell0: usize,
        #[serde(default = "yes")]
        include_lag0: bool,
        #[serde(default)]
        difference: bool,
        #[serde(default)]
        r_max: Option<usize>,
        #[serde(default)]
        arima_grid: ArimaGrid,
    },
    LeeCarter {
        #[serde(default)]
        arima_grid: ArimaGrid,
    },
    Individual {
        #[serde(default)]
        arima_grid: ArimaGrid,
    },
}

impl MethodSpec {
    pub fn cpca(r: Rank) -> Self {
        MethodSpec::Cpca {
            r,
            difference: false,
            r_max: None,
            arima_grid: ArimaGrid::default(),
        }
    }

    pub fn dpca(r: Rank, ell0: usize) -> Self {
        MethodSpec::Dpca {
            r,
            ell0,
            include_lag0: true,
            difference: false,
            r_max: None,
            arima_grid: ArimaGrid::default(),
        }
    }

    /// The three methods compared on simulated panels: FHFM with both ranks
    /// chosen by the ratio criterion, and one-factor static and dynamic PCA.
    pub fn simulation_set() -> Vec<MethodSpec> {
        vec![
            MethodSpec::Fhfm(FhfmConfig::default()),
            MethodSpec::cpca(Rank::Fixed(1)),
            MethodSpec::dpca(Rank::Fixed(1), 1),
        ]
    }

    /// Short name used as a column or row key in reports.
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Fhfm(_) => "fhfm".into(),
            MethodSpec::Cpca { .. } => "cpca".into(),
            MethodSpec::Dpca { ell0, include_lag0: true, .. } => format!("dpca{ell0}"),
            MethodSpec::Dpca { ell0, .. } => format!("dpca{ell0}_nolag0"),
            MethodSpec::LeeCarter { .. } => "lee_carter".into(),
            MethodSpec::Individual { .. } => "individual".into(),
        }
    }

    fn grid(&self) -> &ArimaGrid {
        match self {
            MethodSpec::Fhfm(c) => &c.arima_grid,
            MethodSpec::Cpca { arima_grid, .. }
            | MethodSpec::Dpca { arima_grid, .. }
            | MethodSpec::LeeCarter { arima_grid }
            | MethodSpec::Individual { arima_grid } => arima_grid,
        }
    }

    /// Fits the low-rank model. The individual method has no joint fit and
    /// returns `None`.
    pub fn fit(&self, panel: &Panel) -> Result<Option<FittedModel>> {
        Ok(Some(match self {
            MethodSpec::Fhfm(c) => FittedModel::Fhfm(fit_fhfm(panel, c)?),
            MethodSpec::Cpca { r, difference, r_max, .. } => {
                FittedModel::OneStage(fit_cpca(panel, *r, *difference, *r_max)?)
            }
            MethodSpec::Dpca {
                r,
                ell0,
                include_lag0,
                difference,
                r_max,
                ..
            } => FittedModel::OneStage(fit_dpca(panel, *r, *ell0, *include_lag0, *difference, *r_max)?),
            MethodSpec::LeeCarter { .. } => FittedModel::LeeCarter(fit_lee_carter(panel)?),
            MethodSpec::Individual { .. } => return Ok(None),
        }))
    }

    /// Forecasts from an existing fit of this method.
    pub fn forecast_fitted(&self, fit: &FittedModel, h: usize) -> Result<ForecastResult> {
        match fit {
            FittedModel::Fhfm(f) => forecast_fhfm(f, h, self.grid()),
            other => forecast_baseline(other.as_factor_fit(), h, self.grid()),
        }
    }

    /// Fits on `train` and forecasts `h` periods past its end.
    pub fn fit_forecast(&self, train: &Panel, h: usize) -> Result<ForecastResult> {
        match self.fit(train)? {
            Some(fit) => self.forecast_fitted(&fit, h),
            None => fit_forecast_individual(train, h, self.grid()),
        }
    }
}

/// Anything that turns a training panel into an h-step point forecast.
pub trait PanelForecaster: Sync {
    fn name(&self) -> String;
    /// `P x h` forecasts for the `h` periods after the end of `train`.
    fn forecast(&self, train: &Panel, h: usize) -> Result<DMatrix<f64>>;
}

impl PanelForecaster for MethodSpec {
    fn name(&self) -> String {
        self.label()
    }

    fn forecast(&self, train: &Panel, h: usize) -> Result<DMatrix<f64>> {
        Ok(self.fit_forecast(train, h)?.forecasts)
    }
}

/// FRMSE of forecasting the last `h` periods of `panel` from the rest.
pub fn holdout_frmse(panel: &Panel, method: &dyn PanelForecaster, h: usize) -> Result<f64> {
    let (train, test) = split_tail(panel, h)?;
    frmse(&test, &method.forecast(&train, h)?)
}

/// Splits off the values of the last `h` periods.
pub fn split_tail(panel: &Panel, h: usize) -> Result<(Panel, DMatrix<f64>)> {
    let t = panel.n_periods();
    if h == 0 || h + 2 > t {
        return Err(Error::InvalidSplit(format!("cannot hold out {h} of {t} periods")));
    }
    Ok((panel.column_range(0, t - h)?, panel.values().columns(t - h, h).into_owned()))
}

/// In-sample RMSE of a fit: overall, per series and per period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub method: String,
    pub overall: f64,
    pub by_row: Vec<(String, f64)>,
    pub by_col: Vec<(i64, f64)>,
}

pub fn fit_report(method: &str, panel: &Panel, fit: &dyn FactorFit) -> Result<FitReport> {
    let actual = panel.values();
    let fitted = fit.fitted()?.into_values();
    let by_row = (0..panel.n_series())
        .map(|i| Ok((panel.row_labels()[i].clone(), fit_rmse(actual, &fitted, &Selector::Rows(vec![i]))?)))
        .collect::<Result<_>>()?;
    let by_col = (0..panel.n_periods())
        .map(|j| Ok((panel.col_labels()[j], fit_rmse(actual, &fitted, &Selector::Cols(vec![j]))?)))
        .collect::<Result<_>>()?;
    Ok(FitReport {
        method: method.to_string(),
        overall: fit_rmse(actual, &fitted, &Selector::All)?,
        by_row,
        by_col,
    })
}

/// Rolling out-of-sample design. Each of the `n_windows` test years
/// `test_start .. test_start + n_windows - 1` is the last year of an
/// h-step forecast for every `h` in `1..=max_horizon`: the model is trained
/// on all years up to `test year - h` and FRMSE(h) is taken over the `h`
/// forecast years ending at the test year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollingProtocol {
    pub test_start: i64,
    pub n_windows: usize,
    pub max_horizon: usize,
}

/// Per-method FRMSE(h), averaged over windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub methods: Vec<String>,
    pub horizons: Vec<usize>,
    /// `frmse[h_index][method_index]`; `None` when every window failed.
    pub frmse: Vec<Vec<Option<f64>>>,
    /// Failures as (method, horizon, test year, message).
    pub failures: Vec<(String, usize, i64, String)>,
}

impl EvalReport {
    /// Mean over horizons per method, skipping missing cells.
    pub fn mean_row(&self) -> Vec<Option<f64>> {
        self.column_summary(|v| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn median_row(&self) -> Vec<Option<f64>> {
        self.column_summary(|v| {
            let mut s = v.to_vec();
            s.sort_by(f64::total_cmp);
            let n = s.len();
            if n % 2 == 1 {
                s[n / 2]
            } else {
                0.5 * (s[n / 2 - 1] + s[n / 2])
            }
        })
    }

    fn column_summary(&self, f: impl Fn(&[f64]) -> f64) -> Vec<Option<f64>> {
        (0..self.methods.len())
            .map(|m| {
                let v: Vec<f64> = self.frmse.iter().filter_map(|row| row[m]).collect();
                (!v.is_empty()).then(|| f(&v))
            })
            .collect()
    }

    /// One row per horizon plus `mean` and `median` rows; one column per
    /// method. Missing cells are left empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(e.into());
        w.write_record(["method", "horizon", "metric", "value"]).map_err(io)?;
        let summary = [("mean", self.mean_row()), ("median", self.median_row())];
        for (j, method) in self.methods.iter().enumerate() {
            let rows = self
                .horizons
                .iter()
                .zip(&self.frmse)
                .map(|(h, row)| (h.to_string(), row[j]))
                .chain(summary.iter().map(|(name, row)| (name.to_string(), row[j])));
            for (h, v) in rows {
                // A cell with no successful window is left empty.
                let v = v.map(|x| x.to_string()).unwrap_or_default();
                w.write_record([method.as_str(), &h, "frmse", &v]).map_err(io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the rolling design for each method. A failing (method, window,
/// horizon) cell is recorded in `failures` and left out of the average.
pub fn rolling_evaluation(
    panel: &Panel,
    methods: &[&dyn PanelForecaster],
    protocol: &RollingProtocol,
) -> Result<EvalReport> {
    let RollingProtocol {
        test_start,
        n_windows,
        max_horizon,
    } = *protocol;
    if n_windows == 0 || max_horizon == 0 || methods.is_empty() {
        return Err(Error::Config("rolling evaluation needs windows, horizons and methods".into()));
    }
    let years = panel.col_labels();
    let last_test = test_start + n_windows as i64 - 1;
    let end_idx = panel.col_index(last_test).ok_or_else(|| {
        Error::InvalidSplit(format!("test year {last_test} is not in the panel"))
    })?;
    let start_idx = panel
        .col_index(test_start)
        .ok_or_else(|| Error::InvalidSplit(format!("test year {test_start} is not in the panel")))?;
    if end_idx - start_idx + 1 != n_windows {
        return Err(Error::InvalidSplit("test years are not consecutive columns".into()));
    }
    // Smallest training set: the first window at the longest horizon.
    let min_train = (start_idx + 1).saturating_sub(max_horizon);
    if min_train < crate::fhfm::MIN_FORECAST_LENGTH {
        return Err(Error::InvalidSplit(format!(
            "window ending {test_start} at horizon {max_horizon} leaves {min_train} training periods"
        )));
    }

    // Cells ordered (method, horizon, window) and merged in that order.
    let n_cells = methods.len() * max_horizon * n_windows;
    let cells = map_indices(n_cells, |c| {
        let m = c / (max_horizon * n_windows);
        let h = c / n_windows % max_horizon + 1;
        let w = c % n_windows;
        let test_idx = start_idx + w;
        let train = panel.column_range(0, test_idx + 1 - h)?;
        let actual = panel.values().columns(test_idx + 1 - h, h).into_owned();
        frmse(&actual, &methods[m].forecast(&train, h)?)
    });

    let mut report = EvalReport {
        methods: methods.iter().map(|m| m.name()).collect(),
        horizons: (1..=max_horizon).collect(),
        frmse: vec![vec![None; methods.len()]; max_horizon],
        failures: vec![],
    };
    for m in 0..methods.len() {
        for h in 1..=max_horizon {
            let mut ok = Vec::new();
            for w in 0..n_windows {
                match &cells[(m * max_horizon + h - 1) * n_windows + w] {
                    Ok(v) => ok.push(*v),
                    Err(e) => {
                        log::warn!("{} h={h} test year {}: {e}", report.methods[m], years[start_idx + w]);
                        report.failures.push((report.methods[m].clone(), h, years[start_idx + w], e.to_string()));
                    }
                }
            }
            if !ok.is_empty() {
                report.frmse[h - 1][m] = Some(ok.iter().sum::<f64>() / ok.len() as f64);
            }
        }
    }
    Ok(report)
}
