use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{Individual, Score};
use crate::geometry::{ControlPointSet, Polyline};
use crate::road::{build_road, validate, RoadParams, RoadSpec};
use crate::simulator::{run_test, SimParams, TestResult, VehicleParams, Verdict};

/// Why a test could not be executed normally. Such tests count as INVALID.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum SutFault {
    /// The SUT process could not be started.
    Spawn(String),
    /// No reply within the timeout.
    Timeout,
    /// The reply was not a well-formed message.
    Protocol(String),
    /// The road could not be built or the simulator rejected its input.
    Simulator(String),
}

impl fmt::Display for SutFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SutFault::Spawn(e) => write!(f, "spawn failure: {e}"),
            SutFault::Timeout => f.write_str("timeout"),
            SutFault::Protocol(e) => write!(f, "protocol error: {e}"),
            SutFault::Simulator(e) => write!(f, "simulator error: {e}"),
        }
    }
}

/// A system under test: executes one validated road.
pub trait Sut: Sync {
    fn execute(&self, road: &RoadSpec) -> Result<TestResult, SutFault>;
}

/// The in-process vehicle simulator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuiltinSut {
    pub vehicle: VehicleParams,
    pub sim: SimParams,
}

impl Sut for BuiltinSut {
    fn execute(&self, road: &RoadSpec) -> Result<TestResult, SutFault> {
        run_test(road, &self.vehicle, &self.sim).map_err(|e| SutFault::Simulator(e.to_string()))
    }
}

/// One trajectory sample for rendering: rear-axle position and OOB percent.
pub type TracePoint = [f64; 3];

/// Outcome of evaluating one genotype.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub verdict: Verdict,
    pub fitness: f64,
    /// Wall-clock seconds spent.
    pub eval_time: f64,
    pub fault: Option<SutFault>,
    pub trace: Vec<TracePoint>,
}

impl Evaluation {
    pub fn invalid(fault: Option<SutFault>) -> Self {
        Self {
            verdict: Verdict::Invalid,
            fitness: 0.0,
            eval_time: 0.0,
            fault,
            trace: Vec::new(),
        }
    }

    pub fn from_result(result: &TestResult) -> Self {
        Self {
            verdict: result.verdict,
            fitness: if result.verdict == Verdict::Invalid {
                0.0
            } else {
                result.max_oob
            },
            eval_time: 0.0,
            fault: None,
            trace: result
                .trajectory
                .iter()
                .zip(&result.oob_trace)
                .map(|(s, o)| [s.position.x, s.position.y, o.oob_percent])
                .collect(),
        }
    }
}

/// Turns genotypes into scores. Implementations must be deterministic for
/// runs to be reproducible.
pub trait Evaluator: Sync {
    fn evaluate(&self, genotype: &ControlPointSet) -> Evaluation;

    /// Cheap pre-execution validity check, used to steer variant-C seeding.
    fn is_valid(&self, genotype: &ControlPointSet) -> bool;

    /// Centerline used for Fréchet comparisons.
    fn centerline(&self, genotype: &ControlPointSet) -> Option<Polyline>;

    /// Side of the square map random genotypes are drawn from.
    fn map_size(&self) -> f64;
}

/// Builds and validates the road, then hands valid roads to a [`Sut`].
#[derive(Debug, Clone)]
pub struct RoadEvaluator<S> {
    pub road: RoadParams,
    pub sut: S,
}

impl<S: Sut> RoadEvaluator<S> {
    pub fn new(road: RoadParams, sut: S) -> Self {
        Self { road, sut }
    }
}

impl RoadEvaluator<BuiltinSut> {
    pub fn builtin(road: RoadParams, vehicle: VehicleParams, sim: SimParams) -> Self {
        Self::new(road, BuiltinSut { vehicle, sim })
    }
}

impl<S: Sut> Evaluator for RoadEvaluator<S> {
    fn evaluate(&self, genotype: &ControlPointSet) -> Evaluation {
        let started = Instant::now();
        let mut eval = match build_road(genotype, &self.road) {
            Err(e) => Evaluation::invalid(Some(SutFault::Simulator(e.to_string()))),
            Ok(road) if !validate(&road).valid => Evaluation::invalid(None),
            Ok(road) => match self.sut.execute(&road) {
                Ok(result) => {
                    let mut e = Evaluation::from_result(&result);
                    if result.verdict != Verdict::Fail {
                        e.trace.clear();
                    }
                    e
                }
                Err(fault) => Evaluation::invalid(Some(fault)),
            },
        };
        eval.eval_time = started.elapsed().as_secs_f64();
        eval
    }

    fn is_valid(&self, genotype: &ControlPointSet) -> bool {
        build_road(genotype, &self.road)
            .map(|r| validate(&r).valid)
            .unwrap_or(false)
    }

    fn centerline(&self, genotype: &ControlPointSet) -> Option<Polyline> {
        centerline_or_none(genotype, &self.road)
    }

    fn map_size(&self) -> f64 {
        self.road.map_size
    }
}

pub(crate) fn centerline_or_none(
    genotype: &ControlPointSet,
    road: &RoadParams,
) -> Option<Polyline> {
    build_road(genotype, road).ok().map(|r| r.centerline)
}

/// Scores an individual with the built-in simulator: invalid roads get
/// verdict INVALID and fitness 0, otherwise fitness is the maximum OOB.
pub fn evaluate(
    ind: &Individual,
    road: &RoadParams,
    vehicle: &VehicleParams,
    sim: &SimParams,
) -> Individual {
    let e =
        RoadEvaluator::builtin(road.clone(), vehicle.clone(), sim.clone()).evaluate(&ind.genotype);
    Individual {
        genotype: ind.genotype.clone(),
        score: Some(Score {
            fitness: e.fitness,
            verdict: e.verdict,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2D;

    fn ind(pts: &[(f64, f64)]) -> Individual {
        Individual::new(
            ControlPointSet::new(pts.iter().map(|&p| p.into()).collect(), 200.0).unwrap(),
        )
    }

    #[test]
    fn straight_road_passes() {
        let straight: Vec<(f64, f64)> = (0..7).map(|i| (20.0 + i as f64 * 25.0, 100.0)).collect();
        let e = evaluate(
            &ind(&straight),
            &RoadParams::default(),
            &VehicleParams::default(),
            &SimParams::default(),
        );
        assert_eq!(e.verdict(), Some(Verdict::Pass));
        assert_eq!(e.fitness(), Some(0.0));
    }

    #[test]
    fn self_crossing_is_invalid() {
        let e = evaluate(
            &ind(&[
                (20.0, 20.0),
                (180.0, 180.0),
                (180.0, 20.0),
                (20.0, 180.0),
                (100.0, 20.0),
            ]),
            &RoadParams::default(),
            &VehicleParams::default(),
            &SimParams::default(),
        );
        assert_eq!(e.verdict(), Some(Verdict::Invalid));
        assert_eq!(e.fitness(), Some(0.0));
    }

    #[test]
    fn curvy_valid_road_fails_at_speed() {
        // Valid, but the slew-limited steering cannot follow it at 25 m/s.
        let g = ind(&[
            (32.0, 118.0),
            (67.0, 159.0),
            (73.0, 25.0),
            (144.0, 66.0),
            (161.0, 54.0),
            (163.0, 16.0),
            (163.0, 13.0),
        ]);
        let road = build_road(&g.genotype, &RoadParams::default()).unwrap();
        assert!(validate(&road).valid, "{:?}", validate(&road));
        let fast = VehicleParams {
            speed: 25.0,
            ..Default::default()
        };
        let e = evaluate(&g, &RoadParams::default(), &fast, &SimParams::default());
        assert_eq!(e.verdict(), Some(Verdict::Fail));
        assert!(e.fitness().unwrap() > 95.0);
        let slow = evaluate(
            &g,
            &RoadParams::default(),
            &VehicleParams::default(),
            &SimParams::default(),
        );
        assert!(slow.fitness().unwrap() < e.fitness().unwrap());
    }

    #[test]
    fn degenerate_genotype_is_invalid_with_fault() {
        let p = Point2D::new(50.0, 50.0);
        let g = ControlPointSet::new(vec![p, p, p], 200.0).unwrap();
        let ev = RoadEvaluator::builtin(
            RoadParams::default(),
            VehicleParams::default(),
            SimParams::default(),
        );
        let e = ev.evaluate(&g);
        assert_eq!(e.verdict, Verdict::Invalid);
        assert!(matches!(e.fault, Some(SutFault::Simulator(_))));
        assert!(!ev.is_valid(&g));
        assert!(ev.centerline(&g).is_none());
    }
}
