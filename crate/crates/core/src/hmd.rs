//! Human Mortality Database period 1×1 files and the log-rate panel built
//! from them.
//!
//! The files carry a free-text title, a blank line and a header
//! `Year Age Female Male Total`, followed by one whitespace-separated row per
//! (year, age). Missing cells are written as `.`.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::Panel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HmdKind {
    Mx,
    Deaths,
    Exposures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Female,
    Male,
    #[default]
    Total,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HmdRecord {
    pub year: i64,
    /// Age as written, e.g. `"0"` or `"110+"`.
    pub age_label: String,
    pub female: Option<f64>,
    pub male: Option<f64>,
    pub total: Option<f64>,
}

impl HmdRecord {
    /// Numeric age; the open interval `110+` maps to 110.
    pub fn age(&self) -> usize {
        parse_age(&self.age_label).expect("validated at parse time")
    }

    pub fn value(&self, sex: Sex) -> Option<f64> {
        match sex {
            Sex::Female => self.female,
            Sex::Male => self.male,
            Sex::Total => self.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HmdTable {
    pub kind: HmdKind,
    pub records: Vec<HmdRecord>,
}

fn parse_age(label: &str) -> Option<usize> {
    label.strip_suffix('+').unwrap_or(label).parse().ok()
}

fn parse_cell(s: &str) -> std::result::Result<Option<f64>, String> {
    if s == "." {
        return Ok(None);
    }
    let v: f64 = s.parse().map_err(|_| format!("bad number {s:?}"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("value {s} is not a finite nonnegative number"));
    }
    Ok(Some(v))
}

/// Parses an HMD 1×1 table. Every year must list the same consecutive ages
/// starting from 0, the last of which may be open (`110+`).
pub fn parse_hmd(text: &str, kind: HmdKind) -> Result<HmdTable> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .by_ref()
        .find(|(_, l)| l.trim_start().starts_with("Year"))
        .ok_or(Error::Parse {
            line: 0,
            message: "no header line starting with \"Year\"".into(),
        })?;
    let cols: Vec<&str> = header.1.split_whitespace().collect();
    if cols != ["Year", "Age", "Female", "Male", "Total"] {
        return Err(Error::Parse {
            line: header.0 + 1,
            message: format!("unexpected header {:?}", header.1.trim()),
        });
    }

    let mut records = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse { line: i + 1, message };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(bad(format!("expected 5 fields, found {}", f.len())));
        }
        let year = f[0].parse().map_err(|_| bad(format!("bad year {:?}", f[0])))?;
        if parse_age(f[1]).is_none() {
            return Err(bad(format!("bad age {:?}", f[1])));
        }
        records.push(HmdRecord {
            year,
            age_label: f[1].to_string(),
            female: parse_cell(f[2]).map_err(bad)?,
            male: parse_cell(f[3]).map_err(bad)?,
            total: parse_cell(f[4]).map_err(bad)?,
        });
    }
    if records.is_empty() {
        return Err(Error::Parse {
            line: header.0 + 1,
            message: "no data rows".into(),
        });
    }
    check_ladder(&records)?;
    Ok(HmdTable { kind, records })
}

fn check_ladder(records: &[HmdRecord]) -> Result<()> {
    let mut by_year: BTreeMap<i64, Vec<&str>> = BTreeMap::new();
    for r in records {
        by_year.entry(r.year).or_default().push(&r.age_label);
    }
    let (first_year, ladder) = by_year.iter().next().expect("records nonempty");
    for (k, label) in ladder.iter().enumerate() {
        let open = label.ends_with('+');
        if parse_age(label) != Some(k) || (open && k + 1 != ladder.len()) {
            return Err(Error::Parse {
                line: 0,
                message: format!("incomplete age ladder in {first_year}: expected age {k}, found {label:?}"),
            });
        }
    }
    for (year, ages) in &by_year {
        if ages != ladder {
            return Err(Error::Parse {
                line: 0,
                message: format!("incomplete age ladder in {year}: ages differ from {first_year}"),
            });
        }
    }
    Ok(())
}

pub fn read_hmd_file(path: impl AsRef<Path>, kind: HmdKind) -> Result<HmdTable> {
    parse_hmd(&std::fs::read_to_string(path)?, kind)
}

impl HmdTable {
    /// Values for one sex as an age × year grid over `years`; cells are
    /// `None` where the file has `.`.
    fn grid(&self, sex: Sex, years: &RangeInclusive<i64>) -> Result<Vec<Vec<Option<f64>>>> {
        let n_years = (years.end() - years.start() + 1).max(0) as usize;
        let n_ages = self.records.iter().map(HmdRecord::age).max().unwrap_or(0) + 1;
        let mut grid = vec![vec![None; n_years]; n_ages];
        let mut seen = vec![false; n_years];
        for r in self.records.iter().filter(|r| years.contains(&r.year)) {
            let j = (r.year - years.start()) as usize;
            grid[r.age()][j] = r.value(sex);
            seen[j] = true;
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(Error::Preprocess(format!(
                "{:?} table has no rows for year {}",
                self.kind,
                years.start() + j as i64
            )));
        }
        Ok(grid)
    }
}

/// What to do with a zero or missing rate that is about to be logged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillPolicy {
    #[default]
    Error,
    /// Replace by the smallest positive rate seen for that age in the
    /// selected years.
    MinPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogPanelOptions {
    pub sex: Sex,
    /// Ages at and above this are pooled into one row labelled `{cap}+`.
    pub age_cap: usize,
    pub fill: FillPolicy,
}

impl Default for LogPanelOptions {
    fn default() -> Self {
        Self {
            sex: Sex::Total,
            age_cap: 90,
            fill: FillPolicy::Error,
        }
    }
}

/// Builds the ages × years panel of log death rates, rows `0..cap-1` plus a
/// pooled `cap+` row. With deaths and exposures the pooled rate is total
/// deaths over total exposure; with rates only it is the plain mean of the
/// rates, which ignores the age structure and is logged as a warning.
pub fn build_log_panel(
    mx: &HmdTable,
    deaths: Option<&HmdTable>,
    exposures: Option<&HmdTable>,
    years: RangeInclusive<i64>,
    opts: &LogPanelOptions,
) -> Result<Panel> {
    if years.is_empty() {
        return Err(Error::Preprocess("empty year range".into()));
    }
    let cap = opts.age_cap;
    let rates = mx.grid(opts.sex, &years)?;
    if rates.len() <= cap {
        return Err(Error::Preprocess(format!(
            "age cap {cap} is beyond the table's last age {}",
            rates.len() - 1
        )));
    }
    let n_years = rates[0].len();
    let mut rows: Vec<Vec<Option<f64>>> = rates[..cap].to_vec();

    let pooled = match (deaths, exposures) {
        (Some(d), Some(e)) => {
            let d = d.grid(opts.sex, &years)?;
            let e = e.grid(opts.sex, &years)?;
            if d.len() != rates.len() || e.len() != rates.len() {
                return Err(Error::Preprocess("deaths, exposures and rates have different age ranges".into()));
            }
            (0..n_years)
                .map(|j| {
                    let mut sd = 0.0;
                    let mut se = 0.0;
                    for age in cap..rates.len() {
                        sd += d[age][j]?;
                        se += e[age][j]?;
                    }
                    (se > 0.0).then(|| sd / se)
                })
                .collect()
        }
        (None, None) => {
            if rates.len() > cap + 1 {
                log::warn!(
                    "no deaths/exposures supplied: pooling ages {cap}+ by the plain mean of their rates"
                );
            }
            (0..n_years)
                .map(|j| {
                    let vals: Option<Vec<f64>> = (cap..rates.len()).map(|a| rates[a][j]).collect();
                    vals.map(|v| v.iter().sum::<f64>() / v.len() as f64)
                })
                .collect()
        }
        _ => return Err(Error::Preprocess("deaths and exposures must be given together".into())),
    };
    rows.push(pooled);

    let first_year = *years.start();
    let mut logs = DMatrix::zeros(rows.len(), n_years);
    for (i, row) in rows.iter().enumerate() {
        let min_pos = row.iter().flatten().copied().filter(|v| *v > 0.0).reduce(f64::min);
        for (j, cell) in row.iter().enumerate() {
            let v = match (*cell, opts.fill) {
                (Some(v), _) if v > 0.0 => v,
                (_, FillPolicy::MinPositive) if min_pos.is_some() => {
                    let m = min_pos.expect("checked");
                    log::info!("age row {i}, year {}: filled {cell:?} with {m}", first_year + j as i64);
                    m
                }
                _ => {
                    return Err(Error::Preprocess(format!(
                        "{} rate at age row {i}, year {} cannot be logged",
                        if cell.is_some() { "zero" } else { "missing" },
                        first_year + j as i64
                    )))
                }
            };
            logs[(i, j)] = v.ln();
        }
    }
    let labels = (0..=cap).map(|a| if a == cap { format!("{a}+") } else { a.to_string() }).collect();
    Panel::new(logs, labels, years.collect())
}
