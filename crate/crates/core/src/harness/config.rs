use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::road::{RoadError, RoadParams};
use crate::search::{Budget, SearchConfig, SearchError, Variant};
use crate::simulator::{SimError, SimParams, VehicleParams};

pub const DEFAULT_SUT_TIMEOUT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SutKind {
    #[default]
    Builtin,
    External,
}

impl fmt::Display for SutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SutKind::Builtin => "builtin",
            SutKind::External => "external",
        })
    }
}

/// Which system under test drives the roads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SutDescriptor {
    pub kind: SutKind,
    /// Shell command, external SUTs only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Seconds to wait for a reply.
    pub timeout: f64,
}

impl Default for SutDescriptor {
    fn default() -> Self {
        Self {
            kind: SutKind::Builtin,
            command: None,
            timeout: DEFAULT_SUT_TIMEOUT,
        }
    }
}

impl SutDescriptor {
    pub fn external(command: impl Into<String>) -> Self {
        Self {
            kind: SutKind::External,
            command: Some(command.into()),
            ..Default::default()
        }
    }

    pub fn check(&self) -> Result<(), HarnessError> {
        if self.kind == SutKind::External
            && self.command.as_deref().is_none_or(|c| c.trim().is_empty())
        {
            return Err(range(
                "sut.command",
                "an external SUT needs a non-empty command",
            ));
        }
        if !(self.timeout > 0.0 && self.timeout.is_finite()) {
            return Err(range(
                "sut.timeout",
                format!("must be positive, got {}", self.timeout),
            ));
        }
        Ok(())
    }
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Config {
    pub search: SearchConfig,
    pub road: RoadParams,
    pub vehicle: VehicleParams,
    pub simulation: SimParams,
    pub sut: SutDescriptor,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    #[serde(skip_serializing_if = "Option::is_none")]
    variant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    population_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_control_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget_evals: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mutation_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mutation_range: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tournament_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elitism: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    crossover_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    novelty_filter: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<RawSeed>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parallel: Option<bool>,
}

/// TOML integers are signed 64-bit, so seeds above `i64::MAX` are written
/// as decimal strings.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawSeed {
    Int(i64),
    Text(String),
}

impl RawSeed {
    fn from_u64(seed: u64) -> Self {
        i64::try_from(seed).map_or_else(|_| RawSeed::Text(seed.to_string()), RawSeed::Int)
    }

    fn to_u64(&self) -> Result<u64, HarnessError> {
        match self {
            RawSeed::Int(i) => u64::try_from(*i)
                .map_err(|_| range("search.seed", format!("must be non-negative, got {i}"))),
            RawSeed::Text(t) => t.trim().parse().map_err(|_| {
                range(
                    "search.seed",
                    format!("not a 64-bit unsigned integer: `{t}`"),
                )
            }),
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    search: RawSearch,
    #[serde(default)]
    road: RoadParams,
    #[serde(default)]
    vehicle: VehicleParams,
    #[serde(default)]
    simulation: SimParams,
    #[serde(default)]
    sut: SutDescriptor,
}

fn range(key: impl Into<String>, reason: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        key: key.into(),
        reason: reason.into(),
    }
}

impl RawSearch {
    fn resolve(self) -> Result<SearchConfig, HarnessError> {
        let variant = match self.variant {
            Some(v) => Variant::from_str(&v).map_err(|e| range("search.variant", e))?,
            None => Variant::default(),
        };
        let base = SearchConfig::for_variant(variant);
        let budget = match (self.budget_evals, self.budget_seconds) {
            (Some(_), Some(_)) => {
                return Err(range(
                    "search.budget_evals",
                    "set either budget_evals or budget_seconds, not both",
                ))
            }
            (Some(n), None) => Budget::Evaluations(n),
            (None, Some(s)) => Budget::WallTime(s),
            (None, None) => base.budget,
        };
        Ok(SearchConfig {
            variant,
            population_size: self.population_size.unwrap_or(base.population_size),
            num_control_points: self.num_control_points.unwrap_or(base.num_control_points),
            budget,
            mutation_prob: self.mutation_prob.unwrap_or(base.mutation_prob),
            mutation_range: self.mutation_range.unwrap_or(base.mutation_range),
            tournament_size: self.tournament_size.unwrap_or(base.tournament_size),
            elitism: self.elitism.unwrap_or(base.elitism),
            crossover_prob: self.crossover_prob.unwrap_or(base.crossover_prob),
            novelty_filter: self.novelty_filter.unwrap_or(base.novelty_filter),
            seed: self
                .seed
                .map(|s| s.to_u64())
                .transpose()?
                .unwrap_or(base.seed),
            parallel: self.parallel.unwrap_or(base.parallel),
        })
    }

    fn from_config(c: &SearchConfig) -> Self {
        let (budget_evals, budget_seconds) = match c.budget {
            Budget::Evaluations(n) => (Some(n), None),
            Budget::WallTime(s) => (None, Some(s)),
        };
        Self {
            variant: Some(c.variant.to_string()),
            population_size: Some(c.population_size),
            num_control_points: Some(c.num_control_points),
            budget_evals,
            budget_seconds,
            mutation_prob: Some(c.mutation_prob),
            mutation_range: Some(c.mutation_range),
            tournament_size: Some(c.tournament_size),
            elitism: Some(c.elitism),
            crossover_prob: Some(c.crossover_prob),
            novelty_filter: Some(c.novelty_filter),
            seed: Some(RawSeed::from_u64(c.seed)),
            parallel: Some(c.parallel),
        }
    }
}

impl Config {
    /// Parses TOML text. Missing keys take their defaults; unknown keys and
    /// out-of-range values are errors naming the offending key.
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| HarnessError::Syntax(e.to_string()))?;
        let config = Config {
            search: raw.search.resolve()?,
            road: raw.road,
            vehicle: raw.vehicle,
            simulation: raw.simulation,
            sut: raw.sut,
        };
        config.check()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        let raw = RawConfig {
            search: RawSearch::from_config(&self.search),
            road: self.road.clone(),
            vehicle: self.vehicle.clone(),
            simulation: self.simulation.clone(),
            sut: self.sut.clone(),
        };
        toml::to_string(&raw).expect("config serializes")
    }

    pub fn check(&self) -> Result<(), HarnessError> {
        self.search.check().map_err(|e| match e {
            SearchError::Param { key, reason } => range(format!("search.{key}"), reason),
            other => range("search", other.to_string()),
        })?;
        self.road.check().map_err(|e| match e {
            RoadError::Param { key, reason } => range(format!("road.{key}"), reason),
            other => range("road", other.to_string()),
        })?;
        let sim = |section: &str, e: SimError| match e {
            SimError::Param { key, reason } => range(format!("{section}.{key}"), reason),
            other => range(section, other.to_string()),
        };
        self.vehicle.check().map_err(|e| sim("vehicle", e))?;
        self.simulation.check().map_err(|e| sim("simulation", e))?;
        self.sut.check()
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<Config, HarnessError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Config::from_toml(&text).map_err(|e| match e {
        HarnessError::Syntax(msg) => HarnessError::Syntax(format!("{}: {msg}", path.display())),
        other => other,
    })
}
