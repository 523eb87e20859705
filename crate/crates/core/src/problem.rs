//! Problem documents: one JSON file holding the space, functional, start point,
//! tolerance, solver and verifier settings, and the expected outcome.
//!
//! ```json
//! {
//!   "space": {"kind": "normed", "dim": 2, "norm": "l2"},
//!   "functional": {"name": "quadratic", "params": {"center": [0, 0]}},
//!   "start": [0.3, 0.0],
//!   "epsilon": 0.1,
//!   "mode": "standard",
//!   "solver": {"max_iters": 1000, "sampler": {"kind": "local_ball", "seed": 7}},
//!   "verifier": {"samples": 10000},
//!   "expect": "pass"
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::certificate::{certify, Certificate, Mode, Overall, VerifierConfig};
use crate::error::Error;
use crate::functional::zoo::FunctionalSpec;
use crate::functional::Functional;
use crate::solver::{self, CandidateSampler, IterationTrace, SolverConfig};
use crate::space::{MetricSpace, Point};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<CandidateSampler>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    #[default]
    Pass,
    Partial,
    Fail,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub space: MetricSpace,
    pub functional: FunctionalSpec,
    pub start: Point,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub verifier: VerifierConfig,
    #[serde(default)]
    pub expect: Expectation,
}

/// Command-line overrides applied on top of a problem document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

/// How a problem ended. Determines the exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Partial,
    Fail,
    /// The start point violates the hypothesis (or the declared lower bound is wrong).
    Rejected(String),
    /// The document does not parse or validate.
    Malformed(String),
}

impl Outcome {
    pub fn exit_code(&self, allow_partial: bool) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Partial if allow_partial => 0,
            Outcome::Partial | Outcome::Fail => 1,
            Outcome::Rejected(_) => 2,
            Outcome::Malformed(_) => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Partial => "partial",
            Outcome::Fail => "fail",
            Outcome::Rejected(_) => "reject",
            Outcome::Malformed(_) => "malformed",
        }
    }

    pub fn meets(&self, expect: Expectation, allow_partial: bool) -> bool {
        matches!(
            (self, expect),
            (Outcome::Pass, Expectation::Pass)
                | (Outcome::Partial, Expectation::Partial)
                | (Outcome::Fail, Expectation::Fail)
                | (Outcome::Rejected(_), Expectation::Reject)
        ) || (allow_partial && matches!((self, expect), (Outcome::Partial, Expectation::Pass)))
    }
}

/// Everything a single run produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub outcome: Outcome,
    pub expect: Expectation,
    pub certificate: Option<Certificate>,
    pub trace: Option<IterationTrace>,
}

/// Parses a problem document; errors name the offending field path.
pub fn parse_spec(text: &str) -> Result<ProblemSpec, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            e.inner().to_string()
        } else {
            format!("{path}: {}", e.inner())
        }
    })
}

/// A validated problem ready to run.
#[derive(Debug, Clone)]
pub struct Problem {
    pub space: MetricSpace,
    pub functional: Functional,
    pub start: Point,
    pub epsilon: f64,
    pub mode: Mode,
    pub solver: SolverConfig,
    pub verifier: VerifierConfig,
    pub expect: Expectation,
}

impl Problem {
    pub fn from_spec(spec: &ProblemSpec, overrides: &Overrides) -> Result<Self, String> {
        let functional = spec.functional.build().map_err(|e| format!("functional: {e}"))?;
        functional
            .check_space(&spec.space)
            .map_err(|e| format!("functional: {e}"))?;
        spec.space
            .check_point(&spec.start)
            .map_err(|e| format!("start: {e}"))?;
        let epsilon = overrides.epsilon.unwrap_or(spec.epsilon);
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(format!("epsilon: must be a positive real, got {epsilon}"));
        }
        let mut sampler = spec
            .solver
            .sampler
            .clone()
            .unwrap_or_else(|| CandidateSampler::default_for(&spec.space, 0));
        let mut verifier = spec.verifier.clone();
        if let Some(seed) = overrides.seed {
            sampler = sampler.with_seed(seed);
            verifier.seed = seed;
        }
        if let Some(samples) = overrides.samples {
            verifier.samples = samples;
        }
        verifier.validate().map_err(|e| format!("verifier: {e}"))?;
        let mut solver = SolverConfig::new(epsilon, sampler);
        if let Some(m) = spec.solver.max_iters {
            solver.max_iters = m;
        }
        solver.step_tolerance = spec.solver.step_tolerance;
        solver.validate(&spec.space).map_err(|e| format!("solver: {e}"))?;
        Ok(Problem {
            space: spec.space.clone(),
            functional,
            start: spec.start.clone(),
            epsilon,
            mode: overrides.mode.or(spec.mode).unwrap_or(Mode::Standard),
            solver,
            verifier,
            expect: spec.expect,
        })
    }

    /// Runs the solver in the problem's mode and certifies the result.
    pub fn solve(&self) -> Result<(IterationTrace, Certificate), Error> {
        let f = &self.functional;
        let (v, trace) = match self.mode {
            Mode::Standard => solver::run(f, &self.space, &self.start, &self.solver)?,
            Mode::SecondOrder => solver::run_second_order(f, &self.space, &self.start, &self.solver)?,
            Mode::RemarkRescaled => solver::run_rescaled(f, &self.space, &self.start, &self.solver)?,
        };
        let cert = certify(
            f,
            &self.space,
            &self.start,
            &v,
            self.epsilon,
            self.mode,
            &self.verifier,
            &trace.points,
        )?;
        Ok((trace, cert))
    }
}

/// Parses, validates, solves and certifies one document.
pub fn run_text(text: &str, overrides: &Overrides) -> Report {
    let malformed = |msg: String| Report {
        outcome: Outcome::Malformed(msg),
        expect: Expectation::Pass,
        certificate: None,
        trace: None,
    };
    let spec = match parse_spec(text) {
        Ok(s) => s,
        Err(msg) => return malformed(msg),
    };
    let problem = match Problem::from_spec(&spec, overrides) {
        Ok(p) => p,
        Err(msg) => {
            return Report {
                expect: spec.expect,
                ..malformed(msg)
            }
        }
    };
    match problem.solve() {
        Ok((trace, cert)) => Report {
            outcome: match cert.overall {
                Overall::Pass => Outcome::Pass,
                Overall::Partial => Outcome::Partial,
                Overall::Fail => Outcome::Fail,
            },
            expect: spec.expect,
            certificate: Some(cert),
            trace: Some(trace),
        },
        Err(e @ (Error::RejectedStart { .. } | Error::LowerBoundViolated { .. })) => Report {
            outcome: Outcome::Rejected(format!("hypothesis violated: {e}")),
            expect: spec.expect,
            certificate: None,
            trace: None,
        },
        Err(e) => Report {
            outcome: Outcome::Malformed(e.to_string()),
            expect: spec.expect,
            certificate: None,
            trace: None,
        },
    }
}
