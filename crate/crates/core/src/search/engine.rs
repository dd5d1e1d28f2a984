use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evaluate::{Evaluation, Evaluator, SutFault, TracePoint};
use super::novelty::{novelty_accept_with, pairwise_frechet, NoveltyPolicy};
use super::operators::{crossover, mutate, random_individual, select};
use super::{
    Budget, Individual, Score, SearchConfig, SearchError, Variant, INVALID_SEED_ACCEPTANCE,
};
use crate::geometry::{ControlPointSet, Polyline};
use crate::simulator::Verdict;

/// Offspring rejected by the novelty filter are redrawn at most this many
/// times per generation slot before the next candidate is admitted anyway.
const NOVELTY_ATTEMPTS: usize = 10;

/// One executed test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub id: u64,
    /// Number of restarts before this test.
    pub epoch: u32,
    pub genotype: ControlPointSet,
    pub verdict: Verdict,
    pub fitness: f64,
    /// Wall-clock seconds.
    pub eval_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<SutFault>,
    /// Trajectory with OOB per sample; kept for failing tests only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Event {
    /// A fresh random population is about to be evaluated.
    Seed {
        epoch: u32,
    },
    /// Offspring generation `index` (1-based within the epoch) starts.
    Generation {
        epoch: u32,
        index: u32,
    },
    Fail {
        test_id: u64,
    },
    /// The population was discarded after a failure.
    Reseed {
        epoch: u32,
    },
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: SearchConfig,
    pub records: Vec<TestRecord>,
    pub events: Vec<Event>,
    /// The budget ran out before the first seed population was evaluated.
    pub partial_seed: bool,
    /// Wall-clock seconds for the whole run.
    pub elapsed: f64,
}

/// T, P, I, F.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub total: usize,
    pub passed: usize,
    pub invalid: usize,
    pub failed: usize,
}

impl RunReport {
    pub fn counts(&self) -> Counts {
        let mut c = Counts {
            total: self.records.len(),
            ..Default::default()
        };
        for r in &self.records {
            match r.verdict {
                Verdict::Pass => c.passed += 1,
                Verdict::Invalid => c.invalid += 1,
                Verdict::Fail => c.failed += 1,
            }
        }
        c
    }

    pub fn failures(&self) -> impl Iterator<Item = &TestRecord> {
        self.records.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn reseeds(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, Event::Reseed { .. }))
            .count()
    }

    /// Equal up to wall-clock timings.
    pub fn same_outcome(&self, other: &RunReport) -> bool {
        let strip = |r: &RunReport| {
            let mut r = r.clone();
            r.elapsed = 0.0;
            r.config.parallel = false;
            for rec in &mut r.records {
                rec.eval_time = 0.0;
            }
            r
        };
        strip(self) == strip(other)
    }
}

/// Progress hooks.
pub trait Reporter {
    fn on_record(&mut self, _record: &TestRecord) {}
    fn on_event(&mut self, _event: &Event) {}
    /// A fully evaluated population: the seed population of an epoch, then
    /// each generation formed after it.
    fn on_population(&mut self, _epoch: u32, _population: &[Individual]) {}
}

pub struct NullReporter;

impl Reporter for NullReporter {}

/// Logs through the `log` facade.
pub struct LogReporter;

impl Reporter for LogReporter {
    fn on_record(&mut self, r: &TestRecord) {
        log::debug!("test {} {} fitness {:.2}", r.id, r.verdict, r.fitness);
        if let Some(f) = &r.fault {
            log::warn!("test {}: {f}", r.id);
        }
    }

    fn on_event(&mut self, e: &Event) {
        match e {
            Event::Fail { test_id } => log::info!("test {test_id} failed"),
            Event::BudgetExhausted => log::info!("budget exhausted"),
            other => log::debug!("{other:?}"),
        }
    }
}

enum Stop {
    Failure,
    Exhausted,
}

struct Run<'a, E: Evaluator + ?Sized> {
    config: &'a SearchConfig,
    evaluator: &'a E,
    reporter: &'a mut dyn Reporter,
    rng: ChaCha8Rng,
    started: Instant,
    report: RunReport,
    epoch: u32,
}

impl<E: Evaluator + ?Sized> Run<'_, E> {
    fn emit(&mut self, event: Event) {
        self.reporter.on_event(&event);
        self.report.events.push(event);
    }

    fn exhausted(&self) -> bool {
        match self.config.budget {
            Budget::Evaluations(n) => self.report.records.len() as u64 >= n,
            Budget::WallTime(s) => self.started.elapsed().as_secs_f64() >= s,
        }
    }

    fn remaining(&self) -> usize {
        match self.config.budget {
            Budget::Evaluations(n) => n.saturating_sub(self.report.records.len() as u64) as usize,
            Budget::WallTime(_) => usize::MAX,
        }
    }

    fn seed_population(&mut self) -> Vec<Individual> {
        (0..self.config.population_size)
            .map(|_| draw_seed(&mut self.rng, self.config, self.evaluator))
            .collect()
    }

    /// Evaluates in order, committing results one by one. Stops early on a
    /// failure (restarting variants) or when the budget runs out.
    fn evaluate_all(&mut self, batch: Vec<Individual>) -> (Vec<Individual>, Option<Stop>) {
        let mut done = Vec::with_capacity(batch.len());
        let mut pending = batch.into_iter().peekable();
        while pending.peek().is_some() {
            if self.exhausted() {
                return (done, Some(Stop::Exhausted));
            }
            let chunk: Vec<Individual> = if self.config.parallel {
                pending.by_ref().take(self.remaining()).collect()
            } else {
                pending.by_ref().take(1).collect()
            };
            let evals: Vec<Evaluation> = if self.config.parallel {
                chunk
                    .par_iter()
                    .map(|i| self.evaluator.evaluate(&i.genotype))
                    .collect()
            } else {
                chunk
                    .iter()
                    .map(|i| self.evaluator.evaluate(&i.genotype))
                    .collect()
            };
            for (ind, eval) in chunk.into_iter().zip(evals) {
                if self.exhausted() {
                    return (done, Some(Stop::Exhausted));
                }
                let failed = eval.verdict == Verdict::Fail;
                self.commit(&ind, eval);
                done.push(Individual {
                    genotype: ind.genotype,
                    score: Some(Score {
                        fitness: self.report.records.last().unwrap().fitness,
                        verdict: self.report.records.last().unwrap().verdict,
                    }),
                });
                if failed && self.config.variant.restarts_on_failure() {
                    return (done, Some(Stop::Failure));
                }
            }
        }
        (done, None)
    }

    fn commit(&mut self, ind: &Individual, eval: Evaluation) {
        let id = self.report.records.len() as u64;
        let record = TestRecord {
            id,
            epoch: self.epoch,
            genotype: ind.genotype.clone(),
            verdict: eval.verdict,
            fitness: eval.fitness,
            eval_time: eval.eval_time,
            fault: eval.fault,
            trace: eval.trace,
        };
        self.reporter.on_record(&record);
        let failed = record.verdict == Verdict::Fail;
        self.report.records.push(record);
        if failed {
            self.emit(Event::Fail { test_id: id });
        }
    }

    fn offspring(&mut self, pop: &[Individual]) -> Result<Vec<Individual>, SearchError> {
        let n = self.config.population_size;
        let novelty = if self.config.novelty_filter {
            let curves: Vec<Polyline> = pop
                .iter()
                .filter_map(|i| self.evaluator.centerline(&i.genotype))
                .collect();
            let matrix = pairwise_frechet(&curves);
            Some((curves, matrix))
        } else {
            None
        };
        let mut out = Vec::with_capacity(n);
        let mut rejected = 0;
        while out.len() < n {
            let a = select(pop, &mut self.rng, self.config)?;
            let b = select(pop, &mut self.rng, self.config)?;
            let (c1, c2) = crossover(&pop[a], &pop[b], &mut self.rng, self.config)?;
            for child in [c1, c2] {
                if out.len() == n {
                    break;
                }
                let child = mutate(&child, &mut self.rng, self.config);
                if let Some((curves, matrix)) = &novelty {
                    let admitted = self.evaluator.centerline(&child.genotype).is_some_and(|c| {
                        novelty_accept_with(&c, curves, matrix, NoveltyPolicy::default())
                    });
                    if !admitted && rejected < NOVELTY_ATTEMPTS {
                        rejected += 1;
                        continue;
                    }
                }
                rejected = 0;
                out.push(child);
            }
        }
        Ok(out)
    }
}

/// One member of a seed population. Variant C keeps drawing until a
/// candidate passes the validity check or wins the
/// [`INVALID_SEED_ACCEPTANCE`] coin flip; A and B take the first draw.
pub fn draw_seed<R: Rng + ?Sized, E: Evaluator + ?Sized>(
    rng: &mut R,
    config: &SearchConfig,
    evaluator: &E,
) -> Individual {
    let map = evaluator.map_size();
    loop {
        let cand = random_individual(rng, config, map);
        if config.variant != Variant::C {
            return cand;
        }
        // Flip before the validity check so the random stream does not
        // depend on its outcome.
        let lucky = rng.gen_bool(INVALID_SEED_ACCEPTANCE);
        if lucky || evaluator.is_valid(&cand.genotype) {
            return cand;
        }
    }
}

/// Replaces the weakest offspring with the best `elitism` parents.
fn next_generation(
    parents: &[Individual],
    mut offspring: Vec<Individual>,
    elitism: usize,
) -> Vec<Individual> {
    let by_fitness = |pop: &[Individual]| {
        let mut idx: Vec<usize> = (0..pop.len()).collect();
        idx.sort_by(|&a, &b| {
            let (fa, fb) = (
                pop[a].fitness().unwrap_or(0.0),
                pop[b].fitness().unwrap_or(0.0),
            );
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        idx
    };
    let elites: Vec<Individual> = by_fitness(parents)
        .into_iter()
        .take(elitism)
        .map(|i| parents[i].clone())
        .collect();
    let worst: Vec<usize> = by_fitness(&offspring)
        .into_iter()
        .rev()
        .take(elites.len())
        .collect();
    for (slot, elite) in worst.into_iter().zip(elites) {
        offspring[slot] = elite;
    }
    offspring
}

/// Runs the genetic search until the budget is spent.
///
/// Every evaluated individual becomes a [`TestRecord`], in evaluation order.
/// The random stream depends only on `config.seed`, so with a deterministic
/// evaluator identical configurations give identical reports (timings aside),
/// whether or not evaluation runs in parallel.
pub fn run_search<E: Evaluator + ?Sized>(
    config: &SearchConfig,
    evaluator: &E,
    reporter: &mut dyn Reporter,
) -> Result<RunReport, SearchError> {
    config.check()?;
    let mut run = Run {
        config,
        evaluator,
        reporter,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        started: Instant::now(),
        report: RunReport {
            config: config.clone(),
            records: Vec::new(),
            events: Vec::new(),
            partial_seed: false,
            elapsed: 0.0,
        },
        epoch: 0,
    };

    'epochs: loop {
        if run.exhausted() {
            run.emit(Event::BudgetExhausted);
            break;
        }
        run.emit(Event::Seed { epoch: run.epoch });
        let seeds = run.seed_population();
        let (mut population, stop) = run.evaluate_all(seeds);
        match stop {
            Some(Stop::Exhausted) => {
                if run.epoch == 0 {
                    run.report.partial_seed = true;
                }
                run.emit(Event::BudgetExhausted);
                break;
            }
            Some(Stop::Failure) => {
                run.epoch += 1;
                run.emit(Event::Reseed { epoch: run.epoch });
                continue;
            }
            None => run.reporter.on_population(run.epoch, &population),
        }

        for index in 1.. {
            if run.exhausted() {
                run.emit(Event::BudgetExhausted);
                break 'epochs;
            }
            run.emit(Event::Generation {
                epoch: run.epoch,
                index,
            });
            let children = run.offspring(&population)?;
            let (children, stop) = run.evaluate_all(children);
            match stop {
                Some(Stop::Exhausted) => {
                    run.emit(Event::BudgetExhausted);
                    break 'epochs;
                }
                Some(Stop::Failure) => {
                    run.epoch += 1;
                    run.emit(Event::Reseed { epoch: run.epoch });
                    continue 'epochs;
                }
                None => {
                    population = next_generation(&population, children, config.elitism);
                    run.reporter.on_population(run.epoch, &population);
                }
            }
        }
    }

    run.report.elapsed = run.started.elapsed().as_secs_f64();
    Ok(run.report)
}
