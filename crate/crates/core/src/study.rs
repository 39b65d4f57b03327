//! Experiment drivers: repeated simulation studies and the life-table
//! comparison of forecast mortality surfaces against observed ones.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::actuarial::{AnnuityTerms, Basis, MortalitySurface};
use crate::baselines::FittedModel;
use crate::error::{Error, Result};
use crate::eval::{split_tail, MethodSpec, PanelForecaster};
use crate::fhfm::map_indices;
use crate::metrics::{factor_diag, fmse_fmae, frmse, frmse_split, residual_diag, FactorDiag, ResidualDiag};
use crate::simgen::{generate, DgpSpec};

/// Metrics of one method on one simulated panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodMetrics {
    pub method: String,
    /// Diagnostics of the first estimated factor from the full-panel fit.
    pub first_factor: Option<FactorDiag>,
    pub residual: Option<ResidualDiag>,
    /// Total number of factors in the full-panel fit.
    pub n_factors: Option<usize>,
    /// Hold-out FRMSE per requested horizon.
    pub frmse: Vec<f64>,
    /// Dependent and independent block FRMSE per horizon, for designs that
    /// have the split.
    pub frmse_blocks: Option<Vec<(f64, f64)>>,
}

fn residual_of(fit: &FittedModel) -> &nalgebra::DMatrix<f64> {
    match fit {
        FittedModel::Fhfm(f) => &f.residual,
        FittedModel::OneStage(f) => &f.residual,
        FittedModel::LeeCarter(f) => &f.residual,
    }
}

/// Generates one panel and scores every method on it. Diagnostics use a
/// fit to the whole panel; FRMSE(h) trains on all but the last `h` periods.
pub fn simulation_replication(
    spec: &DgpSpec,
    methods: &[MethodSpec],
    horizons: &[usize],
) -> Result<Vec<MethodMetrics>> {
    let sim = generate(spec)?;
    let y = &sim.panel;
    methods
        .iter()
        .map(|m| {
            let fit = m.fit(y)?;
            let (first_factor, residual, n_factors) = match &fit {
                Some(f) => {
                    let k = f.as_factor_fit().factors();
                    let first: Vec<f64> = k.row(0).iter().copied().collect();
                    (Some(factor_diag(&first)?), Some(residual_diag(residual_of(f))?), Some(k.nrows()))
                }
                None => (None, None, None),
            };
            let mut frmse_all = Vec::with_capacity(horizons.len());
            let mut blocks = Vec::new();
            for &h in horizons {
                let (train, test) = split_tail(y, h)?;
                let fc = m.forecast(&train, h)?;
                match (&sim.dependent_rows, &sim.independent_rows) {
                    (Some(dep), Some(ind)) => {
                        let s = frmse_split(&test, &fc, dep, ind)?;
                        frmse_all.push(s.overall);
                        blocks.push((s.dependent, s.independent));
                    }
                    _ => frmse_all.push(frmse(&test, &fc)?),
                }
            }
            Ok(MethodMetrics {
                method: m.label(),
                first_factor,
                residual,
                n_factors,
                frmse: frmse_all,
                frmse_blocks: sim.dependent_rows.as_ref().map(|_| blocks),
            })
        })
        .collect()
}

/// Per-replication results of a simulation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub example: u8,
    pub p: usize,
    pub t: usize,
    pub horizons: Vec<usize>,
    pub methods: Vec<String>,
    pub seeds: Vec<u64>,
    /// `replications[seed_index][method_index]`.
    pub replications: Vec<Vec<MethodMetrics>>,
}

/// Runs `simulation_replication` for each seed. `template.seed` is ignored.
pub fn simulation_study(
    template: &DgpSpec,
    seeds: &[u64],
    methods: &[MethodSpec],
    horizons: &[usize],
) -> Result<StudyReport> {
    if seeds.is_empty() || methods.is_empty() {
        return Err(Error::Config("a study needs at least one seed and one method".into()));
    }
    let reps = map_indices(seeds.len(), |i| {
        let spec = DgpSpec {
            seed: seeds[i],
            ..template.clone()
        };
        simulation_replication(&spec, methods, horizons)
    });
    Ok(StudyReport {
        example: template.example,
        p: template.p,
        t: template.t,
        horizons: horizons.to_vec(),
        methods: methods.iter().map(MethodSpec::label).collect(),
        seeds: seeds.to_vec(),
        replications: reps.into_iter().collect::<Result<_>>()?,
    })
}

impl StudyReport {
    /// Named per-replication values of one method, in seed order.
    fn series(&self, method: usize) -> Vec<(String, Vec<f64>)> {
        let reps: Vec<&MethodMetrics> = self.replications.iter().map(|r| &r[method]).collect();
        let mut out: Vec<(String, Vec<f64>)> = Vec::new();
        let mut push = |name: String, v: Vec<Option<f64>>| {
            if let Some(v) = v.into_iter().collect::<Option<Vec<f64>>>() {
                out.push((name, v));
            }
        };
        push("factor_time_variance".into(), reps.iter().map(|m| m.first_factor.map(|d| d.time_variance)).collect());
        push("factor_time_dependence".into(), reps.iter().map(|m| m.first_factor.map(|d| d.time_dependence)).collect());
        push("factor_mix".into(), reps.iter().map(|m| m.first_factor.map(|d| d.mix)).collect());
        push("residual_time_variance".into(), reps.iter().map(|m| m.residual.map(|d| d.time_variance)).collect());
        push("residual_time_dependence".into(), reps.iter().map(|m| m.residual.map(|d| d.time_dependence)).collect());
        push("residual_cross_variance".into(), reps.iter().map(|m| m.residual.map(|d| d.cross_variance)).collect());
        push("residual_cross_dependence".into(), reps.iter().map(|m| m.residual.map(|d| d.cross_dependence)).collect());
        push("n_factors".into(), reps.iter().map(|m| m.n_factors.map(|n| n as f64)).collect());
        for (k, h) in self.horizons.iter().enumerate() {
            push(format!("frmse_{h}"), reps.iter().map(|m| Some(m.frmse[k])).collect());
            push(
                format!("frmse_{h}_dependent"),
                reps.iter().map(|m| m.frmse_blocks.as_ref().map(|b| b[k].0)).collect(),
            );
            push(
                format!("frmse_{h}_independent"),
                reps.iter().map(|m| m.frmse_blocks.as_ref().map(|b| b[k].1)).collect(),
            );
        }
        out
    }

    /// Mean over replications of the named metric for `method`.
    pub fn mean(&self, method: &str, metric: &str) -> Option<f64> {
        let m = self.methods.iter().position(|x| x == method)?;
        let (_, v) = self.series(m).into_iter().find(|(n, _)| n == metric)?;
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Per-replication values of the named metric for `method`.
    pub fn values(&self, method: &str, metric: &str) -> Option<Vec<f64>> {
        let m = self.methods.iter().position(|x| x == method)?;
        self.series(m).into_iter().find(|(n, _)| n == metric).map(|(_, v)| v)
    }

    /// Long-format summary: `method,metric,mean,sd` with the sample
    /// standard deviation across replications.
    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(e.into());
        w.write_record(["method", "metric", "mean", "sd"]).map_err(io)?;
        for (i, name) in self.methods.iter().enumerate() {
            for (metric, v) in self.series(i) {
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                let sd = if v.len() > 1 {
                    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
                } else {
                    0.0
                };
                w.write_record([name.clone(), metric, mean.to_string(), sd.to_string()]).map_err(io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Life-table quantity compared between surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifeQuantity {
    PeriodLifeExpectancy,
    CohortLifeExpectancy,
    AnnuityPv,
}

impl LifeQuantity {
    pub const ALL: [LifeQuantity; 3] = [
        LifeQuantity::PeriodLifeExpectancy,
        LifeQuantity::CohortLifeExpectancy,
        LifeQuantity::AnnuityPv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LifeQuantity::PeriodLifeExpectancy => "period_life_expectancy",
            LifeQuantity::CohortLifeExpectancy => "cohort_life_expectancy",
            LifeQuantity::AnnuityPv => "annuity_pv",
        }
    }

    pub fn evaluate(self, s: &MortalitySurface, age: usize, year: i64, max_age: usize, terms: &AnnuityTerms) -> Result<f64> {
        match self {
            LifeQuantity::PeriodLifeExpectancy => s.life_expectancy(age, year, Basis::Period, max_age),
            LifeQuantity::CohortLifeExpectancy => s.life_expectancy(age, year, Basis::Cohort, max_age),
            LifeQuantity::AnnuityPv => s.annuity_pv(age, year, terms),
        }
    }

    /// Last calendar year whose rates the quantity reads.
    fn last_year_read(self, age: usize, year: i64, max_age: usize, terms: &AnnuityTerms) -> i64 {
        let span = match self {
            LifeQuantity::PeriodLifeExpectancy => 0,
            LifeQuantity::CohortLifeExpectancy => max_age.saturating_sub(age + 2),
            // Deferred or not, payments stop at the end age on the diagonal.
            LifeQuantity::AnnuityPv => terms.end_age.saturating_sub(age + 1),
        };
        year + span as i64
    }
}

/// The (age, year) cells at which a quantity is compared: ages below the
/// last age that contributes, years from the surface start, restricted to
/// cells that read at least one forecast year (after `train_end`) and no
/// year past `data_end`.
pub fn comparison_cells(
    q: LifeQuantity,
    first_age: usize,
    first_year: i64,
    train_end: i64,
    data_end: i64,
    max_age: usize,
    terms: &AnnuityTerms,
) -> Vec<(usize, i64)> {
    let top_age = match q {
        LifeQuantity::AnnuityPv => terms.end_age,
        _ => max_age.saturating_sub(1),
    };
    let mut cells = Vec::new();
    for year in first_year..=data_end {
        for age in first_age..top_age {
            let last = q.last_year_read(age, year, max_age, terms);
            if last > train_end && last <= data_end {
                cells.push((age, year));
            }
        }
    }
    cells
}

/// FMSE and FMAE of one method for one quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifeTableError {
    pub method: String,
    pub quantity: LifeQuantity,
    pub n_cells: usize,
    pub fmse: f64,
    pub fmae: f64,
}

/// One row of the selected-cells table: true and estimated values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifeTableRow {
    pub age: usize,
    pub year: i64,
    pub quantity: LifeQuantity,
    pub truth: f64,
    /// One entry per method; `None` when no forecast year is involved.
    pub estimates: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifeTableComparison {
    pub methods: Vec<String>,
    pub errors: Vec<LifeTableError>,
    pub selected: Vec<LifeTableRow>,
}

/// Settings of the life-table comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LifeTableSettings {
    pub max_age: usize,
    pub terms: AnnuityTerms,
    /// (age, year) cells reported individually.
    pub selected: Vec<(usize, i64)>,
}

impl Default for LifeTableSettings {
    fn default() -> Self {
        Self {
            max_age: crate::actuarial::DEFAULT_MAX_AGE,
            terms: AnnuityTerms::default(),
            selected: vec![(25, 1950), (35, 1960), (45, 1970), (55, 1980), (65, 1990), (75, 2000)],
        }
    }
}

/// Compares life expectancies and annuity values computed from each
/// method's spliced surface with those from the observed surface.
/// `truth` covers the full data; every estimate surface must start at the
/// same age and year, with observed rates through `train_end`.
pub fn compare_life_tables(
    truth: &MortalitySurface,
    estimates: &[(String, MortalitySurface)],
    train_end: i64,
    settings: &LifeTableSettings,
) -> Result<LifeTableComparison> {
    let data_end = truth.last_year();
    for (name, s) in estimates {
        if s.first_age() != truth.first_age() || s.first_year() != truth.first_year() || s.max_age() != truth.max_age() {
            return Err(Error::InvalidSurface(format!("{name} surface grid differs from the observed one")));
        }
        if s.last_year() < data_end {
            return Err(Error::Coverage(format!(
                "{name} forecasts end in {}, observed data run to {data_end}",
                s.last_year()
            )));
        }
    }
    let (max_age, terms) = (settings.max_age, &settings.terms);
    let mut errors = Vec::new();
    for q in LifeQuantity::ALL {
        let cells = comparison_cells(q, truth.first_age(), truth.first_year(), train_end, data_end, max_age, terms);
        if cells.is_empty() {
            return Err(Error::Coverage(format!("no {} cells involve forecast years", q.name())));
        }
        let truths = cells
            .iter()
            .map(|&(a, y)| q.evaluate(truth, a, y, max_age, terms))
            .collect::<Result<Vec<_>>>()?;
        for (name, s) in estimates {
            let est = cells
                .iter()
                .map(|&(a, y)| q.evaluate(s, a, y, max_age, terms))
                .collect::<Result<Vec<_>>>()?;
            let (fmse, fmae) = fmse_fmae(&est, &truths)?;
            errors.push(LifeTableError {
                method: name.clone(),
                quantity: q,
                n_cells: cells.len(),
                fmse,
                fmae,
            });
        }
    }
    let mut selected = Vec::new();
    for &(age, year) in &settings.selected {
        for q in LifeQuantity::ALL {
            let reads_forecast = q.last_year_read(age, year, max_age, terms) > train_end;
            let estimates = estimates
                .iter()
                .map(|(_, s)| reads_forecast.then(|| q.evaluate(s, age, year, max_age, terms)).transpose())
                .collect::<Result<Vec<_>>>()?;
            selected.push(LifeTableRow {
                age,
                year,
                quantity: q,
                truth: q.evaluate(truth, age, year, max_age, terms)?,
                estimates,
            });
        }
    }
    Ok(LifeTableComparison {
        methods: estimates.iter().map(|(n, _)| n.clone()).collect(),
        errors,
        selected,
    })
}

impl LifeTableComparison {
    /// `method,quantity,n_cells,fmse,fmae`.
    pub fn write_errors_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(e.into());
        w.write_record(["method", "quantity", "n_cells", "fmse", "fmae"]).map_err(io)?;
        for e in &self.errors {
            w.write_record([
                e.method.clone(),
                e.quantity.name().to_string(),
                e.n_cells.to_string(),
                e.fmse.to_string(),
                e.fmae.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `year,age,quantity,true,<method>...`; empty where no forecast is read.
    pub fn write_selected_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(e.into());
        let mut header = vec!["year".to_string(), "age".into(), "quantity".into(), "true".into()];
        header.extend(self.methods.iter().cloned());
        w.write_record(&header).map_err(io)?;
        for r in &self.selected {
            let mut rec = vec![r.year.to_string(), r.age.to_string(), r.quantity.name().into(), r.truth.to_string()];
            rec.extend(r.estimates.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}
