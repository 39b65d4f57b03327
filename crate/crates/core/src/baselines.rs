//! One-stage comparison methods: static PCA, dynamic PCA over a lag set,
//! Lee-Carter, and independent per-series ARIMA.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::arima::{auto_arima, forecast_arima, ArimaGrid, ArimaModel};
use crate::error::{Error, Result};
use crate::fhfm::{
    add_mean, extract, forecast_factor_rows, map_indices, FhfmFit, ForecastResult, Rank,
    MIN_FORECAST_LENGTH,
};
use crate::panel::{autocov_of_centered, centered, difference_panel, Panel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PcaMethod {
    Cpca,
    Dpca { ell0: usize, include_lag0: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneStagePcaFit {
    pub method: PcaMethod,
    pub difference: bool,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<i64>,
    pub mean: DVector<f64>,
    pub loadings: DMatrix<f64>,
    pub factors: DMatrix<f64>,
    pub residual: DMatrix<f64>,
    pub spectrum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeeCarterFit {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<i64>,
    /// Age intercepts (row means).
    pub a: DVector<f64>,
    /// Age loadings, summing to one.
    pub b: DVector<f64>,
    /// Period index, summing to zero.
    pub k: DVector<f64>,
    pub residual: DMatrix<f64>,
}

/// Common view of any fit of the form `mean + loadings * factors`.
pub trait FactorFit {
    fn mean(&self) -> DVector<f64>;
    fn loadings(&self) -> DMatrix<f64>;
    fn factors(&self) -> DMatrix<f64>;
    fn row_labels(&self) -> &[String];
    fn col_labels(&self) -> &[i64];

    fn fitted(&self) -> Result<Panel> {
        let values = add_mean(self.loadings() * self.factors(), &self.mean());
        Panel::new(values, self.row_labels().to_vec(), self.col_labels().to_vec())
    }
}

impl FactorFit for FhfmFit {
    fn mean(&self) -> DVector<f64> {
        self.mean.clone()
    }
    fn loadings(&self) -> DMatrix<f64> {
        self.all_loadings()
    }
    fn factors(&self) -> DMatrix<f64> {
        self.all_factors()
    }
    fn row_labels(&self) -> &[String] {
        &self.row_labels
    }
    fn col_labels(&self) -> &[i64] {
        &self.col_labels
    }
}

impl FactorFit for OneStagePcaFit {
    fn mean(&self) -> DVector<f64> {
        self.mean.clone()
    }
    fn loadings(&self) -> DMatrix<f64> {
        self.loadings.clone()
    }
    fn factors(&self) -> DMatrix<f64> {
        self.factors.clone()
    }
    fn row_labels(&self) -> &[String] {
        &self.row_labels
    }
    fn col_labels(&self) -> &[i64] {
        &self.col_labels
    }
}

impl FactorFit for LeeCarterFit {
    fn mean(&self) -> DVector<f64> {
        self.a.clone()
    }
    fn loadings(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.b.len(), 1, self.b.as_slice())
    }
    fn factors(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(1, self.k.len(), self.k.as_slice())
    }
    fn row_labels(&self) -> &[String] {
        &self.row_labels
    }
    fn col_labels(&self) -> &[i64] {
        &self.col_labels
    }
}

/// Any fitted model, tagged by method for JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FittedModel {
    Fhfm(FhfmFit),
    OneStage(OneStagePcaFit),
    LeeCarter(LeeCarterFit),
}

impl FittedModel {
    pub fn as_factor_fit(&self) -> &dyn FactorFit {
        match self {
            FittedModel::Fhfm(f) => f,
            FittedModel::OneStage(f) => f,
            FittedModel::LeeCarter(f) => f,
        }
    }
}

fn lag_target(panel: &Panel, lags: &[usize], difference: bool) -> Result<DMatrix<f64>> {
    let source = if difference {
        difference_panel(panel)?
    } else {
        panel.clone()
    };
    let (_, zs) = centered(&source);
    let p = panel.n_series();
    let mut target = DMatrix::zeros(p, p);
    for &lag in lags {
        target += autocov_of_centered(&zs, lag)?.outer_product();
    }
    Ok(target)
}

fn one_stage(
    panel: &Panel,
    method: PcaMethod,
    lags: &[usize],
    r: Rank,
    difference: bool,
    r_max: Option<usize>,
) -> Result<OneStagePcaFit> {
    let target = lag_target(panel, lags, difference)?;
    let (mean, z) = centered(panel);
    let step = extract(&target, &z, r, r_max, panel.values().amax())?;
    Ok(OneStagePcaFit {
        method,
        difference,
        row_labels: panel.row_labels().to_vec(),
        col_labels: panel.col_labels().to_vec(),
        mean,
        loadings: step.loadings,
        factors: step.factors,
        residual: step.residual,
        spectrum: step.spectrum,
    })
}

/// Static PCA: loadings from `S(0) S(0)'`.
pub fn fit_cpca(panel: &Panel, r: Rank, difference: bool, r_max: Option<usize>) -> Result<OneStagePcaFit> {
    one_stage(panel, PcaMethod::Cpca, &[0], r, difference, r_max)
}

/// Dynamic PCA: loadings from `sum_l S(l) S(l)'` over lags `0..=ell0`, or
/// `1..=ell0` when lag zero is excluded.
pub fn fit_dpca(
    panel: &Panel,
    r: Rank,
    ell0: usize,
    include_lag0: bool,
    difference: bool,
    r_max: Option<usize>,
) -> Result<OneStagePcaFit> {
    if !include_lag0 && ell0 == 0 {
        return Err(Error::InvalidLagSet(
            "excluding lag 0 needs ell0 >= 1".into(),
        ));
    }
    let first = usize::from(!include_lag0);
    let lags: Vec<usize> = (first..=ell0).collect();
    one_stage(
        panel,
        PcaMethod::Dpca { ell0, include_lag0 },
        &lags,
        r,
        difference,
        r_max,
    )
}

/// Lee-Carter by the leading principal component of the centered log rates,
/// normalized so that `sum b = 1` and `sum k = 0`.
pub fn fit_lee_carter(panel: &Panel) -> Result<LeeCarterFit> {
    let (a, z) = centered(panel);
    let target = autocov_of_centered(&z, 0)?.outer_product();
    let step = extract(&target, &z, Rank::Fixed(1), None, panel.values().amax())
        .or_else(|e| match e {
            // A single series has no room for a rank-one truncation under the
            // general rank rule, but Lee-Carter is still defined.
            Error::Rank { .. } if panel.n_series() == 1 => Ok(single_series_step(&z)),
            e => Err(e),
        })?;
    let b_raw = step.loadings.column(0).into_owned();
    let k_raw = step.factors.row(0).transpose();
    let s: f64 = b_raw.sum();
    if !(s.abs() > 1e-12 * b_raw.abs().sum()) {
        return Err(Error::DegenerateSpectrum);
    }
    let b = &b_raw / s;
    let k = &k_raw * s;
    let residual = &z - &b * k.transpose();
    Ok(LeeCarterFit {
        row_labels: panel.row_labels().to_vec(),
        col_labels: panel.col_labels().to_vec(),
        a,
        b,
        k,
        residual,
    })
}

fn single_series_step(z: &DMatrix<f64>) -> crate::fhfm::StepFit {
    crate::fhfm::StepFit {
        loadings: DMatrix::from_element(1, 1, 1.0),
        factors: z.clone(),
        residual: DMatrix::zeros(1, z.ncols()),
        spectrum: vec![],
    }
}

/// How factor series are extrapolated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorDynamics {
    AutoArima {
        #[serde(default)]
        grid: ArimaGrid,
    },
    RandomWalkDrift,
}

impl Default for FactorDynamics {
    fn default() -> Self {
        FactorDynamics::AutoArima {
            grid: ArimaGrid::default(),
        }
    }
}

/// Forecasts each factor row independently and maps back through the
/// loadings and mean.
pub fn forecast_factors(fit: &dyn FactorFit, h: usize, dynamics: &FactorDynamics) -> Result<ForecastResult> {
    let factors = fit.factors();
    let (factor_forecasts, models) = match dynamics {
        FactorDynamics::AutoArima { grid } => forecast_factor_rows(&factors, h, grid)?,
        FactorDynamics::RandomWalkDrift => rw_drift_rows(&factors, h)?,
    };
    let forecasts = add_mean(fit.loadings() * &factor_forecasts, &fit.mean());
    Ok(ForecastResult {
        horizon: h,
        forecasts,
        factor_forecasts,
        models,
        fallbacks: vec![],
    })
}

fn rw_drift_rows(factors: &DMatrix<f64>, h: usize) -> Result<(DMatrix<f64>, Vec<ArimaModel>)> {
    if h == 0 {
        return Err(Error::InvalidHorizon(h));
    }
    let mut out = DMatrix::zeros(factors.nrows(), h);
    let mut models = Vec::new();
    for i in 0..factors.nrows() {
        let series: Vec<f64> = factors.row(i).iter().copied().collect();
        let model = ArimaModel::random_walk_drift(&series)?;
        let fc = forecast_arima(&model, &series, h)?;
        out.row_mut(i).copy_from_slice(&fc);
        models.push(model);
    }
    Ok((out, models))
}

/// Per-factor auto-ARIMA forecasts of a one-stage or Lee-Carter fit.
pub fn forecast_baseline(fit: &dyn FactorFit, h: usize, grid: &ArimaGrid) -> Result<ForecastResult> {
    forecast_factors(fit, h, &FactorDynamics::AutoArima { grid: *grid })
}

/// Independent auto-ARIMA per row with no dimension reduction. A row whose
/// order search fails falls back to a random walk with drift and is listed
/// in `fallbacks`.
pub fn fit_forecast_individual(panel: &Panel, h: usize, grid: &ArimaGrid) -> Result<ForecastResult> {
    if h == 0 {
        return Err(Error::InvalidHorizon(h));
    }
    let t = panel.n_periods();
    if t < MIN_FORECAST_LENGTH {
        return Err(Error::InsufficientLength {
            needed: MIN_FORECAST_LENGTH,
            got: t,
        });
    }
    let values = panel.values();
    let rows = map_indices(panel.n_series(), |i| -> Result<(Vec<f64>, ArimaModel, bool)> {
        let series: Vec<f64> = values.row(i).iter().copied().collect();
        let selected = auto_arima(&series, grid).and_then(|m| {
            let fc = forecast_arima(&m, &series, h)?;
            Ok((fc, m))
        });
        match selected {
            Ok((fc, m)) => Ok((fc, m, false)),
            Err(e) => {
                log::warn!(
                    "series {}: ARIMA selection failed ({e}); using random walk with drift",
                    panel.row_labels()[i]
                );
                let m = ArimaModel::random_walk_drift(&series)?;
                let fc = forecast_arima(&m, &series, h)?;
                Ok((fc, m, true))
            }
        }
    });
    let mut forecasts = DMatrix::zeros(panel.n_series(), h);
    let mut models = Vec::new();
    let mut fallbacks = Vec::new();
    for (i, r) in rows.into_iter().enumerate() {
        let (fc, m, fell_back) = r?;
        forecasts.row_mut(i).copy_from_slice(&fc);
        models.push(m);
        if fell_back {
            fallbacks.push(i);
        }
    }
    Ok(ForecastResult {
        horizon: h,
        factor_forecasts: forecasts.clone(),
        forecasts,
        models,
        fallbacks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fhfm::fit_step1;
    use crate::panel::sample_autocov;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_panel(p: usize, t: usize, seed: u64) -> Panel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Panel::from_matrix(DMatrix::from_fn(p, t, |_, _| rng.random_range(-1.0..1.0))).unwrap()
    }

    #[test]
    fn definitional_equivalences() {
        for seed in 0..5 {
            let panel = random_panel(7, 25, seed);
            for diff in [false, true] {
                let c = fit_cpca(&panel, Rank::Fixed(3), diff, None).unwrap();
                let d0 = fit_dpca(&panel, Rank::Fixed(3), 0, true, diff, None).unwrap();
                assert!((&c.loadings - &d0.loadings).amax() < 1e-10);
                let s1 = fit_step1(&panel, Rank::Fixed(3), diff, None).unwrap();
                let d1 = fit_dpca(&panel, Rank::Fixed(3), 1, false, diff, None).unwrap();
                assert!((&s1.loadings - &d1.loadings).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn dpca_sums_lag_products() {
        let panel = random_panel(5, 20, 9);
        let d = fit_dpca(&panel, Rank::Fixed(1), 2, true, false, None).unwrap();
        let mut target = DMatrix::zeros(5, 5);
        for lag in 0..=2 {
            target += sample_autocov(&panel, lag).unwrap().outer_product();
        }
        let ed = crate::eigen::sym_eigen_desc(&target).unwrap();
        assert_eq!(d.spectrum, ed.eigenvalues);
        assert!(matches!(
            fit_dpca(&panel, Rank::Fixed(1), 0, false, false, None),
            Err(Error::InvalidLagSet(_))
        ));
        assert!(matches!(
            fit_dpca(&panel, Rank::Fixed(1), 20, true, false, None),
            Err(Error::InvalidLag { .. })
        ));
    }

    #[test]
    fn cpca_full_rank_is_exact() {
        // Centered part of rank 2 in a 4-row panel.
        let y = DMatrix::from_fn(4, 9, |i, t| {
            let (t, i) = (t as f64, i as f64);
            1.0 + i + (i + 1.0) * t.sin() - i * i * (0.5 * t).cos()
        });
        let panel = Panel::from_matrix(y).unwrap();
        let c = fit_cpca(&panel, Rank::Fixed(2), false, None).unwrap();
        assert!((c.fitted().unwrap().values() - panel.values()).amax() < 1e-10);
        let noisy = Panel::from_matrix(DMatrix::from_fn(4, 9, |i, t| ((i * 7 + t * 3) % 5) as f64 + 0.1 * i as f64)).unwrap();
        let full = fit_cpca(&noisy, Rank::Fixed(4), false, None).unwrap();
        assert!((full.fitted().unwrap().values() - noisy.values()).amax() < 1e-10);
        assert!(matches!(fit_cpca(&noisy, Rank::Fixed(5), false, None), Err(Error::Rank { .. })));
    }

    #[test]
    fn lee_carter_recovers_exact_model() {
        let p = 6;
        let t = 20;
        let a: Vec<f64> = (0..p).map(|x| -6.0 + 0.5 * x as f64).collect();
        let b_raw: Vec<f64> = vec![0.3, 0.2, 0.15, 0.15, 0.1, 0.1];
        let mut k: Vec<f64> = (0..t).map(|s| 10.0 - 0.8 * s as f64 + (s as f64).sin()).collect();
        let km = k.iter().sum::<f64>() / t as f64;
        k.iter_mut().for_each(|v| *v -= km);
        let y = DMatrix::from_fn(p, t, |x, s| a[x] + b_raw[x] * k[s]);
        let fit = fit_lee_carter(&Panel::from_matrix(y).unwrap()).unwrap();
        assert!((fit.b.sum() - 1.0).abs() < 1e-10);
        assert!(fit.k.sum().abs() < 1e-10);
        for x in 0..p {
            assert!((fit.b[x] - b_raw[x]).abs() < 1e-8);
            assert!((fit.a[x] - a[x]).abs() < 1e-10);
        }
        for s in 0..t {
            assert!((fit.k[s] - k[s]).abs() < 1e-8);
        }
        assert!(fit.residual.amax() < 1e-8);
    }

    #[test]
    fn lee_carter_degenerate_without_time_variation() {
        let y = DMatrix::from_fn(5, 12, |x, _| -3.0 - 0.1 * x as f64);
        assert!(matches!(
            fit_lee_carter(&Panel::from_matrix(y).unwrap()),
            Err(Error::DegenerateSpectrum)
        ));
    }

    #[test]
    fn lee_carter_linear_index_drift_forecast() {
        let p = 4;
        let t = 15;
        let b = [0.4, 0.3, 0.2, 0.1];
        let y = DMatrix::from_fn(p, t, |x, s| -4.0 + x as f64 - b[x] * 0.5 * s as f64);
        let fit = fit_lee_carter(&Panel::from_matrix(y.clone()).unwrap()).unwrap();
        for dynamics in [FactorDynamics::RandomWalkDrift, FactorDynamics::default()] {
            let fc = forecast_factors(&fit, 3, &dynamics).unwrap();
            for step in 0..3 {
                for x in 0..p {
                    let truth = -4.0 + x as f64 - b[x] * 0.5 * (t + step) as f64;
                    assert!((fc.forecasts[(x, step)] - truth).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn individual_constant_rows_are_flat_and_ar1_recovered() {
        let y = DMatrix::from_fn(3, 20, |i, _| i as f64 - 1.5);
        let fc = fit_forecast_individual(&Panel::from_matrix(y).unwrap(), 4, &ArimaGrid::default()).unwrap();
        for i in 0..3 {
            for k in 0..4 {
                assert!((fc.forecasts[(i, k)] - (i as f64 - 1.5)).abs() < 1e-10);
            }
        }
        assert!(fc.fallbacks.is_empty());

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phis = [0.7, -0.4];
        let y = DMatrix::from_fn(2, 600, |_, _| 0.0);
        let mut y = y;
        for (i, phi) in phis.iter().enumerate() {
            let mut x = 0.0;
            for s in 0..600 {
                let e: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
                x = phi * x + e;
                y[(i, s)] = x;
            }
        }
        let grid = ArimaGrid::default();
        let fc = fit_forecast_individual(&Panel::from_matrix(y).unwrap(), 1, &grid).unwrap();
        for (i, phi) in phis.iter().enumerate() {
            let m = &fc.models[i];
            assert_eq!((m.order.p, m.order.d), (1, 0), "{m:?}");
            assert!((m.ar[0] - phi).abs() < 0.1);
        }
        assert!(fit_forecast_individual(&random_panel(2, 8, 1), 1, &grid).is_err());
    }

    #[test]
    fn fitted_model_json_is_tagged() {
        let panel = random_panel(5, 15, 2);
        let fit = FittedModel::OneStage(fit_cpca(&panel, Rank::Fixed(1), false, None).unwrap());
        let json = serde_json::to_value(&fit).unwrap();
        assert_eq!(json["model"], "one_stage");
        assert_eq!(json["method"]["kind"], "cpca");
        let back: FittedModel = serde_json::from_value(json).unwrap();
        assert_eq!(back, fit);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn one_stage_invariants(seed in 0u64..500, r in 1usize..4) {
                let panel = random_panel(6, 14, seed);
                for fit in [
                    fit_cpca(&panel, Rank::Fixed(r), false, None).unwrap(),
                    fit_dpca(&panel, Rank::Fixed(r), 2, true, true, None).unwrap(),
                ] {
                    let gram = fit.loadings.transpose() * &fit.loadings - DMatrix::identity(r, r);
                    prop_assert!(gram.amax() < 1e-10);
                    let (_, z) = centered(&panel);
                    let back = &fit.loadings * &fit.factors + &fit.residual;
                    prop_assert!((back - z).amax() < 1e-12);
                }
                let lc = fit_lee_carter(&panel).unwrap();
                prop_assert!((lc.b.sum() - 1.0).abs() < 1e-10);
                prop_assert!(lc.k.sum().abs() < 1e-10 * lc.k.abs().sum().max(1.0));
                let rec = lc.fitted().unwrap();
                prop_assert!((panel.values() - rec.values() - &lc.residual).amax() < 1e-12);
            }
        }
    }
}
