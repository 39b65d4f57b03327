//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string; the page
//! draws the result on a canvas. The `*_json` functions hold the logic so
//! they can be tested off the browser.

use fhfm::actuarial::{AnnuityTerms, Basis, MortalitySurface, Provenance};
use fhfm::eval::{split_tail, MethodSpec};
use fhfm::metrics::{factor_diag, frmse, residual_diag};
use fhfm::simgen::{generate, DgpSpec};
use nalgebra::DMatrix;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Upper bounds that keep a single call interactive in the browser.
const MAX_SERIES: usize = 200;
const MAX_PERIODS: usize = 400;

fn check_size(p: usize, t: usize) -> Result<(), String> {
    if p > MAX_SERIES || t > MAX_PERIODS {
        return Err(format!("panel is limited to {MAX_SERIES} series and {MAX_PERIODS} periods"));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct MethodFit {
    method: String,
    n_factors: usize,
    first_factor: Vec<f64>,
    factor_time_variance: f64,
    factor_time_dependence: f64,
    residual_time_variance: f64,
}

#[derive(Debug, Serialize)]
struct FitSummary {
    p: usize,
    t: usize,
    true_factor: Vec<f64>,
    methods: Vec<MethodFit>,
}

pub fn fit_summary_json(example: u8, p: usize, t: usize, seed: u64) -> Result<String, String> {
    check_size(p, t)?;
    let sim = generate(&DgpSpec::new(example, p, t, seed)).map_err(|e| e.to_string())?;
    let mut methods = Vec::new();
    for m in MethodSpec::simulation_set() {
        let Some(fit) = m.fit(&sim.panel).map_err(|e| format!("{}: {e}", m.label()))? else {
            continue;
        };
        let f = fit.as_factor_fit();
        let k = f.factors();
        let first: Vec<f64> = k.row(0).iter().copied().collect();
        let diag = factor_diag(&first).map_err(|e| e.to_string())?;
        let resid = sim.panel.values() - f.fitted().map_err(|e| e.to_string())?.values();
        let rd = residual_diag(&resid).map_err(|e| e.to_string())?;
        methods.push(MethodFit {
            method: m.label(),
            n_factors: k.nrows(),
            first_factor: first,
            factor_time_variance: diag.time_variance,
            factor_time_dependence: diag.time_dependence,
            residual_time_variance: rd.time_variance,
        });
    }
    let summary = FitSummary {
        p,
        t,
        true_factor: sim.factors.row(0).iter().copied().collect(),
        methods,
    };
    serde_json::to_string(&summary).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
struct MethodForecast {
    method: String,
    frmse: f64,
    /// Forecast path of the displayed series.
    path: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct ForecastComparison {
    series: usize,
    history: Vec<f64>,
    actual: Vec<f64>,
    methods: Vec<MethodForecast>,
}

/// Holds out the last `h` periods, forecasts them with each method and
/// returns the errors plus the paths for one series.
pub fn forecast_comparison_json(example: u8, p: usize, t: usize, seed: u64, h: usize, series: usize) -> Result<String, String> {
    check_size(p, t)?;
    if series >= p {
        return Err(format!("series index {series} is out of range for {p} series"));
    }
    let sim = generate(&DgpSpec::new(example, p, t, seed)).map_err(|e| e.to_string())?;
    let (train, test) = split_tail(&sim.panel, h).map_err(|e| e.to_string())?;
    let mut methods = Vec::new();
    for m in MethodSpec::simulation_set() {
        let fc = m.fit_forecast(&train, h).map_err(|e| format!("{}: {e}", m.label()))?;
        methods.push(MethodForecast {
            method: m.label(),
            frmse: frmse(&test, &fc.forecasts).map_err(|e| e.to_string())?,
            path: fc.forecasts.row(series).iter().copied().collect(),
        });
    }
    let out = ForecastComparison {
        series,
        history: train.values().row(series).iter().copied().collect(),
        actual: test.row(series).iter().copied().collect(),
        methods,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
struct LifeTableCurves {
    ages: Vec<usize>,
    period_life_expectancy: Vec<f64>,
    cohort_life_expectancy: Vec<f64>,
    annuity: Vec<f64>,
}

/// Gompertz mortality `exp(level + slope * age)` falling by `improvement`
/// per year, closed at age 90, over enough years for every cohort to reach
/// the closing age. Curves are evaluated in the first year.
pub fn life_table_json(level: f64, slope: f64, improvement: f64, interest: f64) -> Result<String, String> {
    const AGES: usize = 91;
    const YEARS: usize = 100;
    let rates = DMatrix::from_fn(AGES, YEARS, |a, y| {
        ((level + slope * a as f64).exp() * (-improvement * y as f64).exp()).clamp(1e-7, 1.0)
    });
    let surface = MortalitySurface::new(0, 2000, rates, vec![Provenance::Forecast; YEARS]).map_err(|e| e.to_string())?;
    let terms = AnnuityTerms {
        interest,
        ..AnnuityTerms::default()
    };
    terms.validate().map_err(|e| e.to_string())?;
    let ages: Vec<usize> = (0..=terms.end_age).collect();
    let mut curves = LifeTableCurves {
        ages: ages.clone(),
        period_life_expectancy: Vec::new(),
        cohort_life_expectancy: Vec::new(),
        annuity: Vec::new(),
    };
    for &x in &ages {
        let e = |basis| surface.life_expectancy(x, 2000, basis, AGES).map_err(|e| e.to_string());
        curves.period_life_expectancy.push(e(Basis::Period)?);
        curves.cohort_life_expectancy.push(e(Basis::Cohort)?);
        curves.annuity.push(surface.annuity_pv(x, 2000, &terms).map_err(|e| e.to_string())?);
    }
    serde_json::to_string(&curves).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn fit_summary(example: u8, p: usize, t: usize, seed: u32) -> Result<String, JsError> {
    fit_summary_json(example, p, t, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn forecast_comparison(example: u8, p: usize, t: usize, seed: u32, h: usize, series: usize) -> Result<String, JsError> {
    forecast_comparison_json(example, p, t, seed.into(), h, series).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn life_table(level: f64, slope: f64, improvement: f64, interest: f64) -> Result<String, JsError> {
    life_table_json(level, slope, improvement, interest).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn fit_summary_lists_each_method() {
        let v: Value = serde_json::from_str(&fit_summary_json(1, 20, 40, 3).unwrap()).unwrap();
        let methods = v["methods"].as_array().unwrap();
        assert_eq!(methods.len(), 3);
        assert_eq!(methods[0]["first_factor"].as_array().unwrap().len(), 40);
        assert_eq!(v["true_factor"].as_array().unwrap().len(), 40);
    }

    #[test]
    fn forecast_comparison_has_paths_of_length_h() {
        let v: Value = serde_json::from_str(&forecast_comparison_json(2, 15, 60, 1, 4, 2).unwrap()).unwrap();
        assert_eq!(v["actual"].as_array().unwrap().len(), 4);
        assert_eq!(v["history"].as_array().unwrap().len(), 56);
        for m in v["methods"].as_array().unwrap() {
            assert_eq!(m["path"].as_array().unwrap().len(), 4);
            assert!(m["frmse"].as_f64().unwrap() > 0.0);
        }
        assert!(forecast_comparison_json(2, 15, 60, 1, 4, 15).is_err());
    }

    #[test]
    fn life_table_curves_behave() {
        let v: Value = serde_json::from_str(&life_table_json(-9.0, 0.09, 0.01, 0.02).unwrap()).unwrap();
        let period: Vec<f64> = serde_json::from_value(v["period_life_expectancy"].clone()).unwrap();
        let cohort: Vec<f64> = serde_json::from_value(v["cohort_life_expectancy"].clone()).unwrap();
        assert_eq!(period.len(), 91);
        // Improving mortality favours the cohort basis.
        assert!(period.iter().zip(&cohort).all(|(p, c)| c >= p));
        assert!(period.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(life_table_json(-9.0, 0.09, 0.01, -1.5).is_err());
    }

    #[test]
    fn oversized_requests_are_refused() {
        assert!(fit_summary_json(1, 1000, 50, 0).is_err());
    }
}
