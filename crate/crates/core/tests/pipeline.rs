use fhfm::actuarial::{Basis, MortalitySurface};
use fhfm::eval::{holdout_frmse, split_tail, MethodSpec};
use fhfm::fhfm::{fit_fhfm, forecast_fhfm, reconstruct, FhfmConfig};
use fhfm::simgen::{generate, DgpSpec};
use fhfm::Panel;

#[test]
fn simulated_panel_survives_csv_and_refits_identically() {
    let sim = generate(&DgpSpec::new(2, 30, 60, 4)).unwrap();
    let text = sim.panel.to_csv_string().unwrap();
    let back = Panel::read_csv(text.as_bytes()).unwrap();
    assert_eq!(back, sim.panel);

    let cfg = FhfmConfig::default();
    let a = fit_fhfm(&sim.panel, &cfg).unwrap();
    let b = fit_fhfm(&back, &cfg).unwrap();
    assert_eq!(a, b);
    let json = serde_json::to_string(&a).unwrap();
    let c: fhfm::fhfm::FhfmFit = serde_json::from_str(&json).unwrap();
    assert_eq!(c, a);

    let fitted = reconstruct(&a).unwrap();
    let resid = sim.panel.values() - fitted.values();
    assert!((resid - &a.residual).amax() < 1e-10);
}

#[test]
fn forecasts_beat_the_panel_mean_on_a_persistent_factor() {
    let sim = generate(&DgpSpec::new(1, 40, 120, 9)).unwrap();
    let (train, test) = split_tail(&sim.panel, 1).unwrap();
    let fit = fit_fhfm(&train, &FhfmConfig::default()).unwrap();
    let fc = forecast_fhfm(&fit, 1, &Default::default()).unwrap();
    let model_err = (&test - &fc.forecasts).norm();
    let mean_err = (&test - &fit.mean).norm();
    assert!(model_err < mean_err, "{model_err} vs {mean_err}");

    let direct = holdout_frmse(&sim.panel, &MethodSpec::Fhfm(FhfmConfig::default()), 1).unwrap();
    assert!((direct - model_err / (40f64).sqrt()).abs() < 1e-12);
}

#[test]
fn spliced_forecast_feeds_the_life_table() {
    // Log rates for ages 0..4 plus an open 5+, falling 1% a year.
    let ages: Vec<String> = (0..5).map(|a| a.to_string()).chain(["5+".to_string()]).collect();
    let years: Vec<i64> = (1990..2020).collect();
    let values = nalgebra::DMatrix::from_fn(6, 30, |a, y| -6.0 + 0.8 * a as f64 - 0.01 * y as f64 + 0.002 * ((a * 3 + y) % 5) as f64);
    let panel = Panel::new(values, ages, years).unwrap();
    let fc = MethodSpec::LeeCarter {
        arima_grid: Default::default(),
    }
    .fit_forecast(&panel, 10)
    .unwrap();
    let surface = MortalitySurface::splice(&panel, Some(&fc.forecasts)).unwrap();
    assert_eq!(surface.last_year(), 2029);
    let period = surface.life_expectancy(0, 2019, Basis::Period, 6).unwrap();
    let cohort = surface.life_expectancy(0, 2019, Basis::Cohort, 6).unwrap();
    // Mortality keeps improving in the forecast, so the cohort basis lives longer.
    assert!(cohort > period);
    assert!(period > 0.0 && cohort < 5.0);
}
