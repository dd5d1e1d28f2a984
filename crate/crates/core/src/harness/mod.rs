//! Configuration files, the external-SUT protocol, run archives, summary
//! tables, road renderings and replay.

mod config;
mod protocol;
mod replay;
mod report;

use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

use crate::road::RoadSpec;
use crate::search::{run_search, BuiltinSut, Reporter, RoadEvaluator, SearchError, Sut, SutFault};
use crate::simulator::TestResult;

pub use config::{parse_config, Config, SutDescriptor, SutKind, DEFAULT_SUT_TIMEOUT};
pub use protocol::{serve, ExternalSut, Reply, Request};
pub use replay::replay;
pub use report::{
    format_meters, render_failures, render_svg, summary_table, write_report, write_summary,
    Aggregates, Archive, SUMMARY_HEADER,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration: {0}")]
    Syntax(String),
    #[error("configuration key `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("archive: {0}")]
    Archive(String),
    #[error("no test with id {0} in the archive")]
    UnknownTest(u64),
    #[error("archive was produced by external SUT `{archived}`; replay needs the same command (got {supplied:?})")]
    SutMismatch {
        archived: String,
        supplied: Option<String>,
    },
    #[error("replay of test {test_id} diverged: stored {stored}, replayed {replayed}")]
    Divergence {
        test_id: u64,
        stored: String,
        replayed: String,
    },
}

/// The built-in simulator or an external command.
#[derive(Debug, Clone)]
pub enum AnySut {
    Builtin(BuiltinSut),
    External(ExternalSut),
}

impl Sut for AnySut {
    fn execute(&self, road: &RoadSpec) -> Result<TestResult, SutFault> {
        match self {
            AnySut::Builtin(s) => s.execute(road),
            AnySut::External(s) => s.execute(road),
        }
    }
}

pub fn make_evaluator(config: &Config) -> RoadEvaluator<AnySut> {
    let sut = match config.sut.kind {
        SutKind::Builtin => AnySut::Builtin(BuiltinSut {
            vehicle: config.vehicle.clone(),
            sim: config.simulation.clone(),
        }),
        SutKind::External => AnySut::External(ExternalSut::new(
            config.sut.command.clone().unwrap_or_default(),
            Duration::from_secs_f64(config.sut.timeout),
            config.vehicle.clone(),
            config.simulation.clone(),
        )),
    };
    RoadEvaluator::new(config.road.clone(), sut)
}

/// Checks the configuration, runs one search and packages the result.
pub fn execute(config: &Config, reporter: &mut dyn Reporter) -> Result<Archive, HarnessError> {
    config.check()?;
    let run = run_search(&config.search, &make_evaluator(config), reporter)?;
    Archive::new(config.clone(), run)
}
