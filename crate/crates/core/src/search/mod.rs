//! Genetic search over control-point sets.
//!
//! One individual is one [`ControlPointSet`]. Its fitness is the maximum
//! out-of-lane percentage observed while the system under test drives the
//! resulting road; invalid roads score zero and stay in the population.
//!
//! Three restart policies are supported:
//!
//! * [`Variant::A`] never restarts.
//! * [`Variant::B`] throws the population away after every failing test and
//!   starts again from a random seed population.
//! * [`Variant::C`] restarts like B, but seeds are drawn by rejection sampling
//!   that prefers candidates passing the validity check while still letting
//!   some invalid ones through.

mod engine;
mod evaluate;
mod novelty;
mod operators;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::ControlPointSet;
use crate::simulator::Verdict;

pub use engine::{
    draw_seed, run_search, Counts, Event, LogReporter, NullReporter, Reporter, RunReport,
    TestRecord,
};
pub use evaluate::{
    evaluate, BuiltinSut, Evaluation, Evaluator, RoadEvaluator, Sut, SutFault, TracePoint,
};
pub use novelty::{
    centerline_of, novelty_accept, pairwise_frechet, population_avg_frechet, FailureArchive,
    NoveltyPolicy,
};
pub use operators::{crossover, crossover_at, mutate, random_individual, select};

/// Invalid candidates survive variant-C seeding with this probability.
pub const INVALID_SEED_ACCEPTANCE: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid search parameter `{key}`: {reason}")]
    Param { key: &'static str, reason: String },
    #[error("empty population")]
    EmptyPopulation,
    #[error("individual {0} has not been evaluated")]
    Unevaluated(usize),
    #[error("genotype lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Variant {
    #[default]
    A,
    B,
    C,
}

impl Variant {
    pub fn restarts_on_failure(self) -> bool {
        matches!(self, Variant::B | Variant::C)
    }

    pub fn default_population(self) -> usize {
        match self {
            Variant::A | Variant::B => 25,
            Variant::C => 15,
        }
    }

    pub fn default_budget(self) -> Budget {
        match self {
            Variant::A | Variant::B => Budget::WallTime(5000.0),
            Variant::C => Budget::WallTime(10000.0),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::A => "A",
            Variant::B => "B",
            Variant::C => "C",
        })
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Variant::A),
            "B" | "b" => Ok(Variant::B),
            "C" | "c" => Ok(Variant::C),
            other => Err(format!("unknown variant `{other}`, expected A, B or C")),
        }
    }
}

/// When a run stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    /// Number of executed tests.
    Evaluations(u64),
    /// Seconds of wall-clock time.
    WallTime(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub variant: Variant,
    pub population_size: usize,
    pub num_control_points: usize,
    pub budget: Budget,
    /// Per control point.
    pub mutation_prob: f64,
    /// Half side of the square a mutated point is redrawn from, meters.
    pub mutation_range: f64,
    pub tournament_size: usize,
    pub elitism: usize,
    pub crossover_prob: f64,
    pub novelty_filter: bool,
    pub seed: u64,
    /// Evaluate offspring on a thread pool; results are committed in order.
    pub parallel: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self::for_variant(Variant::A)
    }
}

impl SearchConfig {
    pub fn for_variant(variant: Variant) -> Self {
        Self {
            variant,
            population_size: variant.default_population(),
            num_control_points: 7,
            budget: variant.default_budget(),
            mutation_prob: 0.2,
            mutation_range: 25.0,
            tournament_size: 2,
            elitism: 1,
            crossover_prob: 0.8,
            novelty_filter: false,
            seed: 0,
            parallel: false,
        }
    }

    pub fn check(&self) -> Result<(), SearchError> {
        let err = |key, reason: String| Err(SearchError::Param { key, reason });
        if self.population_size < 2 {
            return err(
                "population_size",
                format!("must be at least 2, got {}", self.population_size),
            );
        }
        if self.num_control_points < 3 {
            return err(
                "num_control_points",
                format!("must be at least 3, got {}", self.num_control_points),
            );
        }
        for (key, p) in [
            ("mutation_prob", self.mutation_prob),
            ("crossover_prob", self.crossover_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return err(key, format!("must lie in [0, 1], got {p}"));
            }
        }
        if !(self.mutation_range > 0.0 && self.mutation_range.is_finite()) {
            return err(
                "mutation_range",
                format!("must be positive, got {}", self.mutation_range),
            );
        }
        if self.tournament_size < 1 {
            return err("tournament_size", "must be at least 1".into());
        }
        if self.elitism >= self.population_size {
            return err(
                "elitism",
                format!("must be below population_size ({})", self.population_size),
            );
        }
        match self.budget {
            Budget::Evaluations(_) => {}
            Budget::WallTime(s) if s >= 0.0 && s.is_finite() => {}
            Budget::WallTime(s) => {
                return err("budget", format!("wall time must be non-negative, got {s}"))
            }
        }
        Ok(())
    }
}

/// Fitness and verdict, set together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub fitness: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genotype: ControlPointSet,
    /// `None` until evaluated.
    pub score: Option<Score>,
}

impl Individual {
    pub fn new(genotype: ControlPointSet) -> Self {
        Self {
            genotype,
            score: None,
        }
    }

    pub fn fitness(&self) -> Option<f64> {
        self.score.map(|s| s.fitness)
    }

    pub fn verdict(&self) -> Option<Verdict> {
        self.score.map(|s| s.verdict)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_defaults() {
        assert_eq!(SearchConfig::for_variant(Variant::C).population_size, 15);
        assert_eq!(SearchConfig::for_variant(Variant::B).population_size, 25);
        assert_eq!(
            SearchConfig::for_variant(Variant::C).budget,
            Budget::WallTime(10000.0)
        );
        assert_eq!(SearchConfig::default().budget, Budget::WallTime(5000.0));
        assert!(SearchConfig::default().check().is_ok());
    }

    #[test]
    fn config_checks() {
        let mut c = SearchConfig::default();
        c.mutation_prob = 1.5;
        assert!(matches!(
            c.check(),
            Err(SearchError::Param {
                key: "mutation_prob",
                ..
            })
        ));
        let mut c = SearchConfig::default();
        c.population_size = 1;
        assert!(c.check().is_err());
        let mut c = SearchConfig::default();
        c.num_control_points = 2;
        assert!(c.check().is_err());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("c".parse::<Variant>().unwrap(), Variant::C);
        assert!("D".parse::<Variant>().is_err());
    }
}
