//! Subcommand implementations. Every command writes its tables into the
//! output directory and logs progress to standard error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use fhfm::actuarial::MortalitySurface;
use fhfm::eval::{fit_report, rolling_evaluation, FitReport, PanelForecaster};
use fhfm::study::{compare_life_tables, simulation_study};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::{DataSource, ExperimentConfig};
use crate::CliError;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(fhfm::Error::from)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> CliError {
    CliError::Core(fhfm::Error::Io(e.into()))
}

/// Writes `series,<year>...` rows like a panel file, without the panel's
/// minimum-length rule so that one-step forecasts can be written too.
fn write_matrix_csv(
    dir: &Path,
    name: &str,
    rows: &[String],
    cols: &[i64],
    m: &DMatrix<f64>,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create(dir, name)?);
    let mut header = vec!["series".to_string()];
    header.extend(cols.iter().map(|c| c.to_string()));
    w.write_record(&header).map_err(csv_io)?;
    for (i, label) in rows.iter().enumerate() {
        let mut rec = vec![label.clone()];
        rec.extend(m.row(i).iter().map(|v| format!("{v:?}")));
        w.write_record(&rec).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// Collapses per-method outcomes: all good, partial failure, or the first
/// error when nothing succeeded.
fn settle(errors: Vec<(String, fhfm::Error)>, total: usize) -> Result<(), CliError> {
    if errors.is_empty() {
        return Ok(());
    }
    for (m, e) in &errors {
        log::error!("{m}: {e}");
    }
    if errors.len() == total {
        let (m, e) = errors.into_iter().next().expect("nonempty");
        eprintln!("{m} failed");
        return Err(e.into());
    }
    Err(CliError::Partial {
        failed: errors.len(),
        total,
    })
}

pub fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let Some(spec) = cfg.dgp() else {
        return Err(CliError::Config("simulate needs data.source = \"simulation\"".into()));
    };
    let sim = fhfm::simgen::generate(&spec)?;
    sim.panel.save_csv(out.join("panel.csv"))?;
    write_json(out, "truth.json", &sim)?;
    log::info!("wrote simulated example {} ({} x {}) to {}", spec.example, spec.p, spec.t, out.display());
    Ok(())
}

pub fn fit(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let (panel, _) = cfg.load_panel()?;
    let mut reports: Vec<FitReport> = Vec::new();
    let mut errors = Vec::new();
    for m in &cfg.methods {
        let label = m.label();
        let result = m.fit(&panel).and_then(|fit| match fit {
            Some(f) => Ok(Some((fit_report(&label, &panel, f.as_factor_fit())?, f))),
            None => Ok(None),
        });
        match result {
            Ok(Some((report, f))) => {
                write_json(out, &format!("fit_{label}.json"), &f)?;
                reports.push(report);
            }
            Ok(None) => log::info!("{label} has no joint fit; skipped"),
            Err(e) => errors.push((label, e)),
        }
    }
    let mut w = csv::Writer::from_writer(create(out, "fit_rmse.csv")?);
    w.write_record(["method", "scope", "key", "rmse"]).map_err(csv_io)?;
    for r in &reports {
        w.write_record([r.method.as_str(), "overall", "", &r.overall.to_string()]).map_err(csv_io)?;
        for (k, v) in &r.by_row {
            w.write_record([r.method.as_str(), "series", k, &v.to_string()]).map_err(csv_io)?;
        }
        for (k, v) in &r.by_col {
            w.write_record([r.method.as_str(), "period", &k.to_string(), &v.to_string()]).map_err(csv_io)?;
        }
    }
    w.flush()?;
    settle(errors, cfg.methods.len())
}

pub fn forecast(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let (panel, _) = cfg.load_panel()?;
    let h = *cfg.horizons.iter().max().expect("validated nonempty");
    let last = *panel.col_labels().last().expect("panel has periods");
    let years: Vec<i64> = (1..=h as i64).map(|k| last + k).collect();
    let mut errors = Vec::new();
    for m in &cfg.methods {
        let label = m.label();
        match m.fit_forecast(&panel, h) {
            Ok(fc) => {
                write_matrix_csv(out, &format!("forecast_{label}.csv"), panel.row_labels(), &years, &fc.forecasts)?;
                write_json(out, &format!("forecast_{label}.json"), &fc)?;
                if !fc.fallbacks.is_empty() {
                    log::warn!("{label}: {} series fell back to a random walk with drift", fc.fallbacks.len());
                }
            }
            Err(e) => errors.push((label, e)),
        }
    }
    settle(errors, cfg.methods.len())
}

pub fn evaluate(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    if let DataSource::Simulation { replications, .. } = cfg.data {
        let spec = cfg.dgp().expect("simulation source");
        let seeds: Vec<u64> = (0..replications as u64).map(|k| cfg.seed() + k).collect();
        let report = simulation_study(&spec, &seeds, &cfg.methods, &cfg.horizons)?;
        report.write_summary_csv(create(out, "study_summary.csv")?)?;
        write_json(out, "study.json", &report)?;
        return Ok(());
    }
    let Some(protocol) = cfg.rolling else {
        return Err(CliError::Config("evaluate on observed data needs a \"rolling\" protocol".into()));
    };
    let (panel, _) = cfg.load_panel()?;
    let methods: Vec<&dyn PanelForecaster> = cfg.methods.iter().map(|m| m as &dyn PanelForecaster).collect();
    let report = rolling_evaluation(&panel, &methods, &protocol)?;
    report.write_csv(create(out, "eval_report.csv")?)?;
    write_json(out, "eval_report.json", &report)?;
    if report.failures.is_empty() {
        return Ok(());
    }
    let failed = report.methods.iter().filter(|m| report.failures.iter().any(|f| &f.0 == *m)).count();
    Err(CliError::Partial {
        failed,
        total: report.methods.len(),
    })
}

pub fn actuarial(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let Some(act) = &cfg.actuarial else {
        return Err(CliError::Config("actuarial needs an \"actuarial\" section".into()));
    };
    if matches!(cfg.data, DataSource::Simulation { .. }) {
        return Err(CliError::Config("actuarial needs mortality data (csv or hmd source)".into()));
    }
    let (panel, _) = cfg.load_panel()?;
    let cut = panel
        .col_index(act.train_end)
        .ok_or_else(|| CliError::Config(format!("train_end {} is not a year of the data", act.train_end)))?
        + 1;
    let h = panel.n_periods() - cut;
    if h == 0 {
        return Err(CliError::Config("train_end leaves no years to forecast".into()));
    }
    let train = panel.column_range(0, cut)?;
    let truth = MortalitySurface::from_log_panel(&panel)?.with_clipping(act.clip_rates);
    let mut surfaces = Vec::new();
    let mut errors = Vec::new();
    for m in &cfg.methods {
        let label = m.label();
        match m.fit_forecast(&train, h) {
            Ok(fc) => {
                let s = MortalitySurface::splice(&train, Some(&fc.forecasts))?.with_clipping(act.clip_rates);
                surfaces.push((label, s));
            }
            Err(e) => errors.push((label, e)),
        }
    }
    if !surfaces.is_empty() {
        let cmp = compare_life_tables(&truth, &surfaces, act.train_end, &act.settings())?;
        cmp.write_errors_csv(create(out, "actuarial_errors.csv")?)?;
        cmp.write_selected_csv(create(out, "actuarial_selected.csv")?)?;
        write_json(out, "actuarial.json", &cmp)?;
    }
    settle(errors, cfg.methods.len())
}
