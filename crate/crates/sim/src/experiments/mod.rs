//! Figure-reproduction experiments. Each runner returns a [`ResultTable`];
//! the routing experiment also returns a JSON route dump.

use std::path::PathBuf;
use std::str::FromStr;

use crate::table::ResultTable;
use crate::{Runner, SimError};

pub mod custom;
pub mod fig6;
pub mod fig7;
pub mod fig8;
pub mod routes;
pub mod training;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig11,
    Fig13,
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 7] =
        [Scenario::Fig6, Scenario::Fig7, Scenario::Fig8, Scenario::Fig9, Scenario::Fig11, Scenario::Fig13, Scenario::Custom];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig6 => "fig6",
            Scenario::Fig7 => "fig7",
            Scenario::Fig8 => "fig8",
            Scenario::Fig9 => "fig9",
            Scenario::Fig11 => "fig11",
            Scenario::Fig13 => "fig13",
            Scenario::Custom => "custom",
        }
    }

    /// Trials used when the command line does not say.
    pub fn default_trials(self) -> usize {
        match self {
            Scenario::Fig6 => 20,
            Scenario::Fig7 => 50,
            Scenario::Fig8 => 20,
            Scenario::Fig9 | Scenario::Fig11 => 10,
            Scenario::Fig13 => 100,
            Scenario::Custom => 10,
        }
    }
}

impl FromStr for Scenario {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| SimError::Config(format!("unknown scenario `{s}` (expected one of fig6, fig7, fig8, fig9, fig11, fig13, custom)")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Scene file; each scenario has a built-in default except `custom`.
    pub scene: Option<PathBuf>,
    /// Values of the scenario's sweep variable; `None` keeps the default range.
    pub sweep: Option<Vec<f64>>,
    pub trials: usize,
    pub seed: u64,
}

/// Trial multiplier of `--full-scale` over the desk-scale defaults.
pub const FULL_SCALE_TRIALS: usize = 10;

impl ExperimentConfig {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self { scenario, scene: None, sweep: None, trials: scenario.default_trials(), seed }
    }

    /// Default trial count times [`FULL_SCALE_TRIALS`].
    pub fn full_scale(mut self) -> Self {
        self.trials = self.scenario.default_trials() * FULL_SCALE_TRIALS;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.trials == 0 {
            return Err(SimError::Config("trials must be at least 1".into()));
        }
        if let Some(s) = &self.sweep {
            if s.is_empty() {
                return Err(SimError::Config("sweep range is empty".into()));
            }
            if s.iter().any(|v| v.is_nan()) {
                return Err(SimError::Config("sweep values must be numbers".into()));
            }
        }
        if self.scenario == Scenario::Custom && self.scene.is_none() {
            return Err(SimError::Config("the custom scenario needs a scene file".into()));
        }
        Ok(())
    }

    pub(crate) fn sweep_or(&self, default: &[f64]) -> Vec<f64> {
        self.sweep.clone().unwrap_or_else(|| default.to_vec())
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub table: ResultTable,
    pub routes: Option<routes::RouteDump>,
}

pub fn run(config: &ExperimentConfig, runner: &Runner) -> Result<RunOutput, SimError> {
    config.validate()?;
    let table = match config.scenario {
        Scenario::Fig6 => fig6::run(config, runner)?,
        Scenario::Fig7 => fig7::run(config, runner)?,
        Scenario::Fig8 => fig8::run(config, runner)?,
        Scenario::Fig9 | Scenario::Fig11 => {
            let (table, dump) = routes::run(config, runner)?;
            return Ok(RunOutput { table, routes: Some(dump) });
        }
        Scenario::Fig13 => training::run(config, runner)?,
        Scenario::Custom => custom::run(config, runner)?,
    };
    Ok(RunOutput { table, routes: None })
}

pub(crate) fn rate(snr: f64) -> f64 {
    irs_core::units::rate_bps_hz(snr)
}

pub(crate) fn db(x: f64) -> f64 {
    irs_core::units::linear_to_db(x)
}
