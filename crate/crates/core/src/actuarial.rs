//! Life-table arithmetic on mortality surfaces.
//!
//! The one-year death probability is taken to be the central death rate
//! itself (`q = m`), with no m-to-q conversion. Survival follows either a
//! single calendar year down the age column (period basis) or the diagonal
//! of the surface (cohort basis), where age `x + j` is read in year `T + j`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::Panel;

/// Default maximum age `w` for life expectancy: ages up to 90 contribute.
pub const DEFAULT_MAX_AGE: usize = 91;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Observed,
    Forecast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Period,
    Cohort,
}

/// Death rates over a contiguous age grid and a contiguous year grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MortalitySurface {
    first_age: usize,
    first_year: i64,
    /// Ages × years.
    rates: DMatrix<f64>,
    provenance: Vec<Provenance>,
    /// Treat rates above 1 as certain death instead of failing.
    clip: bool,
}

impl MortalitySurface {
    pub fn new(
        first_age: usize,
        first_year: i64,
        rates: DMatrix<f64>,
        provenance: Vec<Provenance>,
    ) -> Result<Self> {
        if rates.nrows() == 0 || rates.ncols() == 0 {
            return Err(Error::InvalidSurface("empty rate grid".into()));
        }
        if provenance.len() != rates.ncols() {
            return Err(Error::InvalidSurface(format!(
                "{} provenance flags for {} years",
                provenance.len(),
                rates.ncols()
            )));
        }
        if let Some(v) = rates.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidSurface(format!("rate {v} is not a finite nonnegative number")));
        }
        Ok(Self {
            first_age,
            first_year,
            rates,
            provenance,
            clip: false,
        })
    }

    /// Surface of observed rates from a panel of log death rates whose rows
    /// are labelled by consecutive ages (a trailing `+` is allowed, as in
    /// `90+`) and whose columns are consecutive years.
    pub fn from_log_panel(panel: &Panel) -> Result<Self> {
        Self::splice(panel, None)
    }

    /// Observed log rates followed by forecast log rates for the years right
    /// after the panel's last year. `forecast` has the panel's row count and
    /// one column per forecast year.
    pub fn splice(history: &Panel, forecast: Option<&DMatrix<f64>>) -> Result<Self> {
        let first_age = parse_age_labels(history.row_labels())?;
        let years = history.col_labels();
        if years.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::InvalidSurface("years are not consecutive".into()));
        }
        let h = forecast.map_or(0, |f| f.ncols());
        if let Some(f) = forecast {
            if f.nrows() != history.n_series() {
                return Err(Error::ShapeMismatch(format!(
                    "forecast has {} rows, history has {}",
                    f.nrows(),
                    history.n_series()
                )));
            }
        }
        let n_hist = history.n_periods();
        let log_rates = DMatrix::from_fn(history.n_series(), n_hist + h, |i, j| {
            if j < n_hist {
                history.values()[(i, j)]
            } else {
                forecast.expect("h > 0 only with a forecast")[(i, j - n_hist)]
            }
        });
        let provenance = (0..n_hist + h)
            .map(|j| if j < n_hist { Provenance::Observed } else { Provenance::Forecast })
            .collect();
        Self::new(first_age, years[0], log_rates.map(f64::exp), provenance)
    }

    /// Enables or disables clipping of rates above 1 to certain death.
    pub fn with_clipping(mut self, clip: bool) -> Self {
        self.clip = clip;
        self
    }

    pub fn rates(&self) -> &DMatrix<f64> {
        &self.rates
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn first_age(&self) -> usize {
        self.first_age
    }

    /// Highest age on the grid; its rate stands for everyone at or above it.
    pub fn max_age(&self) -> usize {
        self.first_age + self.rates.nrows() - 1
    }

    pub fn first_year(&self) -> i64 {
        self.first_year
    }

    pub fn last_year(&self) -> i64 {
        self.first_year + self.rates.ncols() as i64 - 1
    }

    pub fn years(&self) -> impl Iterator<Item = i64> + '_ {
        self.first_year..=self.last_year()
    }

    /// One-year death probability at `age` in `year`.
    pub fn death_prob(&self, age: usize, year: i64) -> Result<f64> {
        if age < self.first_age || age > self.max_age() {
            return Err(Error::Coverage(format!(
                "age {age} (grid {}..={})",
                self.first_age,
                self.max_age()
            )));
        }
        if year < self.first_year || year > self.last_year() {
            return Err(Error::Coverage(format!(
                "year {year} (grid {}..={})",
                self.first_year,
                self.last_year()
            )));
        }
        let m = self.rates[(age - self.first_age, (year - self.first_year) as usize)];
        if m > 1.0 {
            if self.clip {
                return Ok(1.0);
            }
            return Err(Error::RateAboveOne { age, year, value: m });
        }
        Ok(m)
    }

    /// Checks that every cell a `t`-year survival from (`x`, `year`) reads
    /// is on the grid, naming the whole missing range at once.
    fn check_coverage(&self, x: usize, year: i64, t: usize, basis: Basis) -> Result<()> {
        if t == 0 {
            return Ok(());
        }
        if x < self.first_age || x + t - 1 > self.max_age() {
            return Err(Error::Coverage(format!(
                "ages {x}..={} (grid {}..={})",
                x + t - 1,
                self.first_age,
                self.max_age()
            )));
        }
        let last = match basis {
            Basis::Period => year,
            Basis::Cohort => year + t as i64 - 1,
        };
        if year < self.first_year || last > self.last_year() {
            let missing = if year < self.first_year {
                format!("years {year}..={}", (self.first_year - 1).min(last))
            } else {
                format!("years {}..={last}", self.last_year() + 1)
            };
            return Err(Error::Coverage(format!(
                "{missing} needed from age {x} in {year} (grid {}..={})",
                self.first_year,
                self.last_year()
            )));
        }
        Ok(())
    }

    /// Survival probabilities `ₛp` for s = 1..=t, accumulated in one pass.
    fn survival_curve(&self, x: usize, year: i64, t: usize, basis: Basis) -> Result<Vec<f64>> {
        self.check_coverage(x, year, t, basis)?;
        let mut p = 1.0;
        (0..t)
            .map(|j| {
                let y = match basis {
                    Basis::Period => year,
                    Basis::Cohort => year + j as i64,
                };
                p *= 1.0 - self.death_prob(x + j, y)?;
                Ok(p)
            })
            .collect()
    }

    /// Probability that someone aged `x` in `year` survives `t` more years.
    pub fn survival_prob(&self, x: usize, year: i64, t: usize, basis: Basis) -> Result<f64> {
        Ok(self.survival_curve(x, year, t, basis)?.last().copied().unwrap_or(1.0))
    }

    /// Curtate life expectancy `Σ_{t=1}^{w−x−1} ₜp` for age `x` in `year`.
    pub fn life_expectancy(&self, x: usize, year: i64, basis: Basis, max_age: usize) -> Result<f64> {
        let terms = max_age.saturating_sub(x + 1);
        Ok(self.survival_curve(x, year, terms, basis)?.iter().sum())
    }

    /// Present value of a unit annual life annuity for someone aged `x` in
    /// `year`, on the cohort basis. Below the retirement age the value at
    /// retirement is discounted for interest only, with no survival factor.
    pub fn annuity_pv(&self, x: usize, year: i64, terms: &AnnuityTerms) -> Result<f64> {
        terms.validate()?;
        let v = 1.0 / (1.0 + terms.interest);
        if x < terms.retirement_age {
            let wait = terms.retirement_age - x;
            let at_retirement = self.annuity_pv(terms.retirement_age, year + wait as i64, terms)?;
            return Ok(at_retirement * v.powi(wait as i32));
        }
        let n = terms.end_age.saturating_sub(x);
        let curve = self.survival_curve(x, year, n, Basis::Cohort)?;
        Ok(curve
            .iter()
            .enumerate()
            .map(|(s, p)| terms.payment * p * v.powi(s as i32 + 1))
            .sum())
    }
}

fn parse_age_labels(labels: &[String]) -> Result<usize> {
    let ages = labels
        .iter()
        .map(|l| {
            l.trim()
                .trim_end_matches('+')
                .parse::<usize>()
                .map_err(|_| Error::InvalidSurface(format!("row label {l:?} is not an age")))
        })
        .collect::<Result<Vec<_>>>()?;
    if ages.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::InvalidSurface("ages are not consecutive".into()));
    }
    Ok(ages[0])
}

/// Terms of the retirement annuity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnuityTerms {
    pub interest: f64,
    pub retirement_age: usize,
    pub end_age: usize,
    pub payment: f64,
}

impl Default for AnnuityTerms {
    fn default() -> Self {
        Self {
            interest: 0.02,
            retirement_age: 66,
            end_age: 90,
            payment: 1.0,
        }
    }
}

impl AnnuityTerms {
    pub fn validate(&self) -> Result<()> {
        if !(self.interest > -1.0) || !self.interest.is_finite() {
            return Err(Error::Config(format!("interest {} must exceed -1", self.interest)));
        }
        if self.retirement_age > self.end_age {
            return Err(Error::Config(format!(
                "retirement age {} is above end age {}",
                self.retirement_age, self.end_age
            )));
        }
        Ok(())
    }

    /// Value of the same payments with survival certain.
    pub fn annuity_certain(&self, x: usize) -> f64 {
        let v = 1.0 / (1.0 + self.interest);
        (1..=self.end_age.saturating_sub(x)).map(|t| self.payment * v.powi(t as i32)).sum()
    }
}
