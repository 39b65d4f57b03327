//! Experiment configuration files (JSON).

use std::path::{Path, PathBuf};

use fhfm::actuarial::AnnuityTerms;
use fhfm::eval::{MethodSpec, RollingProtocol};
use fhfm::hmd::{build_log_panel, read_hmd_file, HmdKind, LogPanelOptions};
use fhfm::simgen::{generate, DgpSpec, SimOutput};
use fhfm::study::LifeTableSettings;
use fhfm::Panel;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_horizons")]
    pub horizons: Vec<usize>,
    #[serde(default)]
    pub rolling: Option<RollingProtocol>,
    #[serde(default)]
    pub actuarial: Option<ActuarialConfig>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_methods() -> Vec<MethodSpec> {
    MethodSpec::simulation_set()
}

fn default_horizons() -> Vec<usize> {
    vec![1, 5]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Simulation {
        example: u8,
        p: usize,
        t: usize,
        #[serde(default)]
        d: Option<f64>,
        /// Number of seeded replications for study runs.
        #[serde(default = "one")]
        replications: usize,
    },
    Csv {
        path: PathBuf,
    },
    Hmd {
        mx: PathBuf,
        #[serde(default)]
        deaths: Option<PathBuf>,
        #[serde(default)]
        exposures: Option<PathBuf>,
        first_year: i64,
        last_year: i64,
        #[serde(default)]
        options: LogPanelOptions,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuarialConfig {
    /// Last observed year used for training; later years are forecast.
    pub train_end: i64,
    #[serde(default)]
    pub clip_rates: bool,
    #[serde(default = "default_max_age")]
    pub max_age: usize,
    #[serde(default)]
    pub terms: AnnuityTerms,
    #[serde(default = "default_selected")]
    pub selected: Vec<(usize, i64)>,
}

fn default_max_age() -> usize {
    LifeTableSettings::default().max_age
}

fn default_selected() -> Vec<(usize, i64)> {
    LifeTableSettings::default().selected
}

impl ActuarialConfig {
    pub fn settings(&self) -> LifeTableSettings {
        LifeTableSettings {
            max_age: self.max_age,
            terms: self.terms,
            selected: self.selected.clone(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.methods.is_empty() {
            return Err(CliError::Config("methods must not be empty".into()));
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(CliError::Config("horizons must be a nonempty list of positive integers".into()));
        }
        if let Some(r) = &self.rolling {
            if r.n_windows == 0 || r.max_horizon == 0 {
                return Err(CliError::Config("rolling.n_windows and rolling.max_horizon must be at least 1".into()));
            }
        }
        let mut labels: Vec<String> = self.methods.iter().map(MethodSpec::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Config(format!("methods have duplicate labels: {labels:?}")));
        }
        if let DataSource::Simulation { replications: 0, .. } = self.data {
            return Err(CliError::Config("data.replications must be at least 1".into()));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn dgp(&self) -> Option<DgpSpec> {
        match &self.data {
            DataSource::Simulation { example, p, t, d, .. } => Some(DgpSpec {
                example: *example,
                p: *p,
                t: *t,
                d: *d,
                seed: self.seed(),
            }),
            _ => None,
        }
    }

    /// The panel to work on. For simulated data this is the replication
    /// with the configured seed, returned along with its ground truth.
    pub fn load_panel(&self) -> Result<(Panel, Option<SimOutput>), CliError> {
        match &self.data {
            DataSource::Simulation { .. } => {
                let sim = generate(&self.dgp().expect("simulation source"))?;
                Ok((sim.panel.clone(), Some(sim)))
            }
            DataSource::Csv { path } => Ok((Panel::load_csv(path)?, None)),
            DataSource::Hmd {
                mx,
                deaths,
                exposures,
                first_year,
                last_year,
                options,
            } => {
                let mx = read_hmd_file(mx, HmdKind::Mx)?;
                let d = deaths.as_ref().map(|p| read_hmd_file(p, HmdKind::Deaths)).transpose()?;
                let e = exposures.as_ref().map(|p| read_hmd_file(p, HmdKind::Exposures)).transpose()?;
                let panel = build_log_panel(&mx, d.as_ref(), e.as_ref(), *first_year..=*last_year, options)?;
                Ok((panel, None))
            }
        }
    }
}
