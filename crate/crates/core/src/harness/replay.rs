use super::{make_evaluator, Archive, HarnessError, SutKind};
use crate::search::{Evaluation, Evaluator};

/// Re-runs one archived test and checks that verdict and fitness match.
///
/// Archives produced with an external SUT are only replayed when the same
/// command is supplied in `sut_command`.
pub fn replay(
    archive: &Archive,
    test_id: u64,
    sut_command: Option<&str>,
) -> Result<Evaluation, HarnessError> {
    let rec = archive
        .record(test_id)
        .ok_or(HarnessError::UnknownTest(test_id))?;
    let mut config = archive.config.clone();
    if config.sut.kind == SutKind::External {
        let archived = config.sut.command.clone().unwrap_or_default();
        if sut_command != Some(archived.as_str()) {
            return Err(HarnessError::SutMismatch {
                archived,
                supplied: sut_command.map(str::to_string),
            });
        }
    }
    if archive.version != crate::VERSION {
        log::warn!(
            "archive written by version {}, replaying with {}",
            archive.version,
            crate::VERSION
        );
    }
    config.search.parallel = false;
    let replayed = make_evaluator(&config).evaluate(&rec.genotype);
    if replayed.verdict != rec.verdict || replayed.fitness.to_bits() != rec.fitness.to_bits() {
        return Err(HarnessError::Divergence {
            test_id,
            stored: format!("{} / {}", rec.verdict, rec.fitness),
            replayed: format!("{} / {}", replayed.verdict, replayed.fitness),
        });
    }
    Ok(replayed)
}
