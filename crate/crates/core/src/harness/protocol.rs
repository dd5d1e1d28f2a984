//! Line-delimited JSON exchange with an external system under test.
//!
//! For every test the harness starts the SUT command once, writes one
//! request line and waits for one reply line:
//!
//! ```text
//! -> {"road": {...}, "vehicle": {...}, "simulation": {...}}
//! <- {"verdict": "PASS", "max_oob": 12.5, "trajectory": [[x, y, oob], ...]}
//! ```
//!
//! `verdict` is one of `PASS`, `FAIL`, `INVALID`; `trajectory` is optional.
//! Unknown reply fields are ignored.

use std::io::{self, BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2D;
use crate::road::RoadSpec;
use crate::search::{Sut, SutFault, TracePoint};
use crate::simulator::{
    run_test, OobSample, SimParams, TestResult, VehicleParams, VehicleState, Verdict,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub road: RoadSpec,
    pub vehicle: VehicleParams,
    pub simulation: SimParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub verdict: Verdict,
    pub max_oob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<TracePoint>>,
}

impl Reply {
    pub fn from_result(r: &TestResult) -> Self {
        Self {
            verdict: r.verdict,
            max_oob: r.max_oob,
            trajectory: Some(
                r.trajectory
                    .iter()
                    .zip(&r.oob_trace)
                    .map(|(s, o)| [s.position.x, s.position.y, o.oob_percent])
                    .collect(),
            ),
        }
    }

    /// Checks the values and expands the reply into a [`TestResult`].
    /// Headings are not transmitted and come back as zero.
    pub fn into_result(self, dt: f64) -> Result<TestResult, SutFault> {
        let pct = |v: f64| v.is_finite() && (0.0..=100.0).contains(&v);
        if !pct(self.max_oob) {
            return Err(SutFault::Protocol(format!(
                "max_oob out of range: {}",
                self.max_oob
            )));
        }
        let trace = self.trajectory.unwrap_or_default();
        let mut trajectory = Vec::with_capacity(trace.len());
        let mut oob_trace = Vec::with_capacity(trace.len());
        for (i, &[x, y, oob]) in trace.iter().enumerate() {
            if !(x.is_finite() && y.is_finite() && pct(oob)) {
                return Err(SutFault::Protocol(format!("bad trajectory sample {i}")));
            }
            let time = i as f64 * dt;
            trajectory.push(VehicleState {
                position: Point2D::new(x, y),
                heading: 0.0,
                steer: 0.0,
                time,
            });
            oob_trace.push(OobSample {
                time,
                oob_percent: oob,
            });
        }
        Ok(TestResult {
            verdict: self.verdict,
            trajectory,
            oob_trace,
            max_oob: self.max_oob,
            completed: false,
        })
    }
}

/// A SUT reached through a shell command speaking the line protocol.
#[derive(Debug, Clone)]
pub struct ExternalSut {
    pub command: String,
    pub timeout: Duration,
    pub vehicle: VehicleParams,
    pub simulation: SimParams,
}

impl ExternalSut {
    pub fn new(
        command: impl Into<String>,
        timeout: Duration,
        vehicle: VehicleParams,
        simulation: SimParams,
    ) -> Self {
        Self {
            command: command.into(),
            timeout,
            vehicle,
            simulation,
        }
    }

    fn spawn(&self) -> io::Result<Child> {
        let mut cmd = Command::new("sh");
        cmd.arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit());
        #[cfg(unix)]
        {
            use std::os::unix::process::CommandExt;
            cmd.process_group(0);
        }
        cmd.spawn()
    }
}

fn kill_tree(child: &mut Child) {
    #[cfg(unix)]
    unsafe {
        // The child leads its own process group; take down its descendants too.
        libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
    }
    let _ = child.kill();
    let _ = child.wait();
}

impl Sut for ExternalSut {
    fn execute(&self, road: &RoadSpec) -> Result<TestResult, SutFault> {
        let request = Request {
            road: road.clone(),
            vehicle: self.vehicle.clone(),
            simulation: self.simulation.clone(),
        };
        let mut line =
            serde_json::to_string(&request).map_err(|e| SutFault::Protocol(e.to_string()))?;
        line.push('\n');

        let mut child = self.spawn().map_err(|e| SutFault::Spawn(e.to_string()))?;
        let mut stdin = child.stdin.take().expect("piped");
        let stdout = child.stdout.take().expect("piped");

        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reply = String::new();
            let r = BufReader::new(stdout).read_line(&mut reply).map(|_| reply);
            let _ = tx.send(r);
        });
        // A SUT that exits without reading surfaces as a broken pipe here and
        // as an empty reply below; the reply is the more useful diagnostic.
        let _ = stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush());
        drop(stdin);

        let outcome = match rx.recv_timeout(self.timeout) {
            Err(_) => Err(SutFault::Timeout),
            Ok(Err(e)) => Err(SutFault::Protocol(format!("reading reply: {e}"))),
            Ok(Ok(reply)) if reply.trim().is_empty() => {
                Err(SutFault::Protocol("no reply before end of output".into()))
            }
            Ok(Ok(reply)) => serde_json::from_str::<Reply>(reply.trim())
                .map_err(|e| SutFault::Protocol(format!("malformed reply: {e}")))
                .and_then(|r| r.into_result(self.simulation.dt)),
        };
        kill_tree(&mut child);
        outcome
    }
}

/// Serves the built-in simulator over the protocol: one reply per request
/// line until end of input. Requests that fail to parse end the session.
pub fn serve<R: BufRead, W: Write>(input: R, mut output: W) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let req: Request = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        let reply = match run_test(&req.road, &req.vehicle, &req.simulation) {
            Ok(r) => Reply::from_result(&r),
            Err(e) => {
                log::warn!("simulation rejected: {e}");
                Reply::from_result(&TestResult::invalid())
            }
        };
        serde_json::to_writer(&mut output, &reply).map_err(io::Error::other)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}
