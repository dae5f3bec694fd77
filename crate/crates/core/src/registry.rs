//! Name-based dispatch over every packing algorithm in the crate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aptas::{aptas, AptasConfig};
use crate::classic::first_fit_decreasing;
use crate::error::{Error, Result};
use crate::model::{Instance, Packing};
use crate::offline::{offline_17_1plus_eps, offline_1plus_eps, VlConfig};
use crate::online::{
    run_online, BestFitOnline, FirstFitOnline, LevelScheme, OnlineAlgorithm, Placement, RegionRule,
    ThresholdScheme,
};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Nf,
    Ff,
    Ffd,
    Bf,
    Bbf,
    Mnf,
    Mff,
    Level17,
    Threshold,
    Vl1eps,
    Off17,
    Aptas,
}

impl Algorithm {
    pub const ALL: [Algorithm; 12] = [
        Algorithm::Nf,
        Algorithm::Ff,
        Algorithm::Ffd,
        Algorithm::Bf,
        Algorithm::Bbf,
        Algorithm::Mnf,
        Algorithm::Mff,
        Algorithm::Level17,
        Algorithm::Threshold,
        Algorithm::Vl1eps,
        Algorithm::Off17,
        Algorithm::Aptas,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Nf => "nf",
            Algorithm::Ff => "ff",
            Algorithm::Ffd => "ffd",
            Algorithm::Bf => "bf",
            Algorithm::Bbf => "bbf",
            Algorithm::Mnf => "mnf",
            Algorithm::Mff => "mff",
            Algorithm::Level17 => "level17",
            Algorithm::Threshold => "threshold",
            Algorithm::Vl1eps => "vl1eps",
            Algorithm::Off17 => "off17",
            Algorithm::Aptas => "aptas",
        }
    }

    pub fn needs_epsilon(self) -> bool {
        matches!(
            self,
            Algorithm::Mnf
                | Algorithm::Mff
                | Algorithm::Level17
                | Algorithm::Threshold
                | Algorithm::Vl1eps
                | Algorithm::Off17
                | Algorithm::Aptas
        )
    }

    /// Builds the online form, if the algorithm has one.
    pub fn online(self, params: &RunParams) -> Result<Option<Box<dyn OnlineAlgorithm>>> {
        Ok(Some(match self {
            Algorithm::Nf => Box::new(BestFitOnline::next_fit()),
            Algorithm::Ff => Box::new(FirstFitOnline::new()),
            Algorithm::Bf => Box::new(BestFitOnline::new(None)),
            Algorithm::Bbf => Box::new(BestFitOnline::new(Some(params.k))),
            Algorithm::Mnf => Box::new(LevelScheme::new(params.epsilon(self)?, RegionRule::NextFit, false)?),
            Algorithm::Mff => Box::new(LevelScheme::new(params.epsilon(self)?, RegionRule::FirstFit, false)?),
            Algorithm::Level17 => Box::new(LevelScheme::three_seventeen(params.epsilon(self)?)?),
            Algorithm::Threshold => Box::new(ThresholdScheme::new(params.epsilon(self)?)?),
            _ => return Ok(None),
        }))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.as_str()).collect();
                Error::InvalidParameter(format!("unknown algorithm {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunParams {
    pub epsilon: Option<Rational>,
    pub beta: Option<Rational>,
    /// Open bins for `bbf`.
    pub k: usize,
    /// Search-node budget for the offline schemes and the APTAS.
    pub budget: Option<u64>,
    pub aptas: AptasConfig,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            epsilon: None,
            beta: None,
            k: 2,
            budget: None,
            aptas: AptasConfig::default(),
        }
    }
}

impl RunParams {
    fn epsilon(&self, algo: Algorithm) -> Result<Rational> {
        self.epsilon
            .ok_or_else(|| Error::InvalidParameter(format!("{algo} needs ε")))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub packing: Packing,
    /// Placement events, for online algorithms.
    pub trace: Option<Vec<Placement>>,
}

pub fn run_algorithm(algo: Algorithm, instance: &Instance, params: &RunParams) -> Result<RunOutput> {
    instance.validate()?;
    if let Some(mut online) = algo.online(params)? {
        let (packing, trace) = run_online(&mut online, &instance.items)?;
        return Ok(RunOutput {
            packing,
            trace: Some(trace),
        });
    }
    let vl = VlConfig {
        node_budget: params.budget.unwrap_or(VlConfig::default().node_budget),
    };
    let packing = match algo {
        Algorithm::Ffd => first_fit_decreasing(&instance.items)?,
        Algorithm::Vl1eps => offline_1plus_eps(instance, params.epsilon(algo)?, vl)?,
        Algorithm::Off17 => offline_17_1plus_eps(instance, params.epsilon(algo)?, vl)?,
        Algorithm::Aptas => {
            let mut config = params.aptas.clone();
            if let Some(b) = params.budget {
                config.max_nodes = b;
            }
            aptas(instance, params.epsilon(algo)?, params.beta, &config)?
        }
        _ => unreachable!("online algorithms handled above"),
    };
    Ok(RunOutput {
        packing,
        trace: None,
    })
}
