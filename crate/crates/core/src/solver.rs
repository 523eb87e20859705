//! Descent-set iteration producing an Ekeland point.
//!
//! Starting from `u_1 = u`, each step restricts attention to the descent set
//!
//! ```text
//! S_n = { w : F(w) + ε·d(u_n, w) <= F(u_n) }
//! ```
//!
//! and moves to a point of `S_n` whose value is at most the midpoint between
//! `F(u_n)` and `inf_{S_n} F`. On finite spaces the exact argmin over `S_n` is
//! taken (it always satisfies the midpoint rule). On normed spaces `S_n` is
//! explored by sampling a ball around `u_n` whose radius covers every point the
//! iteration can still reach, since `ε·d(u_1, u_n) <= F(u_1) - inf F`.
//!
//! The iteration stops when `S_n = {u_n}` as far as the sampler can tell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{ExtReal, Functional};
use crate::space::{offset, MetricSpace, Point};

/// Number of geometric radius levels tried along each sampled direction.
pub const RADIUS_LEVELS: usize = 20;
/// Ratio between consecutive radius levels.
pub const RADIUS_RATIO: f64 = 1.0 / 3.0;

const STEP_TOLERANCE_FACTOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CandidateSampler {
    /// Scan every point of a finite space.
    Exhaustive,
    /// Sample `u_n + r·φ` with `φ` from seeded unit directions and `r` on a
    /// geometric grid in `(0, radius_factor·(F(u_n) - lower_bound)/ε]`.
    LocalBall {
        #[serde(default = "default_radius_factor")]
        radius_factor: f64,
        #[serde(default = "default_samples_per_iter")]
        samples_per_iter: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_radius_factor() -> f64 {
    1.0
}

fn default_samples_per_iter() -> usize {
    4000
}

impl CandidateSampler {
    pub fn local_ball(seed: u64) -> Self {
        CandidateSampler::LocalBall {
            radius_factor: default_radius_factor(),
            samples_per_iter: default_samples_per_iter(),
            seed,
        }
    }

    /// Exhaustive on finite spaces, a seeded local ball otherwise.
    pub fn default_for(space: &MetricSpace, seed: u64) -> Self {
        if space.is_finite() {
            CandidateSampler::Exhaustive
        } else {
            CandidateSampler::local_ball(seed)
        }
    }

    pub fn with_seed(&self, new_seed: u64) -> Self {
        match self {
            CandidateSampler::Exhaustive => CandidateSampler::Exhaustive,
            CandidateSampler::LocalBall {
                radius_factor,
                samples_per_iter,
                ..
            } => CandidateSampler::LocalBall {
                radius_factor: *radius_factor,
                samples_per_iter: *samples_per_iter,
                seed: new_seed,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub max_iters: usize,
    /// `None` selects 0 on finite spaces and `1e-10·ε` on normed spaces.
    pub step_tolerance: Option<f64>,
    pub sampler: CandidateSampler,
    /// Run with tolerance `ε²` instead of `ε`.
    pub second_order_mode: bool,
}

impl SolverConfig {
    pub fn new(epsilon: f64, sampler: CandidateSampler) -> Self {
        SolverConfig {
            epsilon,
            max_iters: 10_000,
            step_tolerance: None,
            sampler,
            second_order_mode: false,
        }
    }

    /// The tolerance the iteration actually uses.
    pub fn effective_epsilon(&self) -> f64 {
        if self.second_order_mode {
            self.epsilon * self.epsilon
        } else {
            self.epsilon
        }
    }

    pub fn step_tolerance_for(&self, space: &MetricSpace) -> f64 {
        self.step_tolerance.unwrap_or(if space.is_finite() {
            0.0
        } else {
            STEP_TOLERANCE_FACTOR * self.effective_epsilon()
        })
    }

    pub fn validate(&self, space: &MetricSpace) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be a positive real, got {}",
                self.epsilon
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
        }
        if let Some(t) = self.step_tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "step_tolerance must be a nonnegative real, got {t}"
                )));
            }
        }
        match (&self.sampler, space.is_finite()) {
            (CandidateSampler::Exhaustive, false) => Err(Error::InvalidConfig(
                "the exhaustive sampler needs a finite space".into(),
            )),
            (CandidateSampler::LocalBall { .. }, true) => Err(Error::InvalidConfig(
                "the local-ball sampler needs a normed space".into(),
            )),
            (
                CandidateSampler::LocalBall {
                    radius_factor,
                    samples_per_iter,
                    ..
                },
                false,
            ) => {
                if !(radius_factor.is_finite() && *radius_factor > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "radius_factor must be positive, got {radius_factor}"
                    )));
                }
                if *samples_per_iter == 0 {
                    return Err(Error::InvalidConfig("samples_per_iter must be >= 1".into()));
                }
                Ok(())
            }
            (CandidateSampler::Exhaustive, true) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Stationary,
    StepTolerance,
    MaxIters,
}

/// The sequence `u_1 = u, u_2, ...` with its values and step lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    /// Tolerance the iteration ran with (`ε`, or `ε²` in second-order mode).
    pub epsilon: f64,
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    /// `step_dists[n] = d(u_n, u_{n+1})`.
    pub step_dists: Vec<f64>,
    /// One entry per selection step, including the final stationary one.
    pub inf_estimates: Vec<f64>,
    pub terminated_by: Termination,
}

impl IterationTrace {
    pub fn last_point(&self) -> &Point {
        self.points.last().expect("a trace always holds the start point")
    }
}

/// Worst excesses over the descent inequalities of a trace (positive = violated).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceAudit {
    /// `max_n ε·d(u_n, u_{n+1}) - (F(u_n) - F(u_{n+1})) - 1e-12·(1 + |F(u_n)|)`.
    pub step_excess: f64,
    /// `max_{n<m} ε·d(u_n, u_m) - (F(u_n) - F(u_m)) - (m - n)·1e-12·(1 + |F(u_n)|)`.
    pub telescoped_excess: f64,
    /// `max_n ε·d(u_n, v) - (F(u_n) - F(v))` with `v` the last iterate, no slack.
    pub limit_excess: f64,
    pub nonincreasing: bool,
}

impl TraceAudit {
    pub fn holds(&self) -> bool {
        self.step_excess <= 0.0 && self.telescoped_excess <= 0.0 && self.nonincreasing
    }
}

impl IterationTrace {
    /// Re-checks the per-step and telescoped descent inequalities against `space`.
    pub fn audit(&self, space: &MetricSpace) -> Result<TraceAudit> {
        let eps = self.epsilon;
        let n = self.points.len();
        let mut audit = TraceAudit {
            step_excess: f64::NEG_INFINITY,
            telescoped_excess: f64::NEG_INFINITY,
            limit_excess: f64::NEG_INFINITY,
            nonincreasing: self.values.windows(2).all(|w| w[1] <= w[0]),
        };
        for i in 0..n.saturating_sub(1) {
            let d = space.distance(&self.points[i], &self.points[i + 1])?;
            let slack = 1e-12 * (1.0 + self.values[i].abs());
            audit.step_excess = audit
                .step_excess
                .max(eps * d - (self.values[i] - self.values[i + 1]) - slack);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let d = space.distance(&self.points[i], &self.points[j])?;
                let slack = (j - i) as f64 * 1e-12 * (1.0 + self.values[i].abs());
                audit.telescoped_excess = audit
                    .telescoped_excess
                    .max(eps * d - (self.values[i] - self.values[j]) - slack);
            }
        }
        let v = self.last_point();
        let fv = *self.values.last().expect("non-empty trace");
        for (p, fp) in self.points.iter().zip(&self.values) {
            let d = space.distance(p, v)?;
            audit.limit_excess = audit.limit_excess.max(eps * d - (fp - fv));
        }
        Ok(audit)
    }
}

fn finite_value(f: &Functional, p: &Point) -> Result<f64> {
    f.evaluate(p)?.finite().ok_or_else(|| {
        Error::Domain(format!("F(u_n) must be finite, got +inf at {p:?}"))
    })
}

/// `w ∈ S_n`, i.e. `F(w) + ε·d(u_n, w) <= F(u_n)`; `F(w) = +inf` is never a member.
pub fn membership_s(f: &Functional, space: &MetricSpace, eps: f64, u_n: &Point, w: &Point) -> Result<bool> {
    let f_un = finite_value(f, u_n)?;
    member_with(f, space, eps, u_n, f_un, w).map(|m| m.is_some())
}

/// Returns `F(w)` when `w ∈ S_n`.
fn member_with(
    f: &Functional,
    space: &MetricSpace,
    eps: f64,
    u_n: &Point,
    f_un: f64,
    w: &Point,
) -> Result<Option<f64>> {
    match f.evaluate(w)? {
        ExtReal::PlusInfinity => Ok(None),
        ExtReal::Finite(fw) => {
            let d = space.distance(u_n, w)?;
            Ok((fw + eps * d <= f_un).then_some(fw))
        }
    }
}

/// Result of one selection step.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub point: Point,
    pub value: f64,
    /// Exact `min_{S_n} F` (exhaustive) or the minimum over sampled members and `u_n`.
    pub inf_estimate: f64,
}

fn mix_seed(seed: u64, iteration: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (iteration as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Picks `u_{n+1} ∈ S_n`. `iteration` decorrelates the seeded samples between steps.
pub fn select_next(
    f: &Functional,
    space: &MetricSpace,
    eps: f64,
    u_n: &Point,
    sampler: &CandidateSampler,
    iteration: usize,
) -> Result<Selection> {
    let f_un = finite_value(f, u_n)?;
    let mut best = Selection {
        point: u_n.clone(),
        value: f_un,
        inf_estimate: f_un,
    };
    match sampler {
        CandidateSampler::Exhaustive => {
            if !space.is_finite() {
                return Err(Error::InvalidConfig(
                    "the exhaustive sampler needs a finite space".into(),
                ));
            }
            // u_n is itself a member, so scanning in index order with a strict
            // comparison returns the lowest-index argmin over S_n.
            let mut best_index: Option<(usize, f64)> = None;
            for w in space.points() {
                if let Some(fw) = member_with(f, space, eps, u_n, f_un, &w)? {
                    let i = w.index().expect("finite points are indices");
                    if best_index.is_none_or(|(_, b)| fw < b) {
                        best_index = Some((i, fw));
                    }
                }
            }
            if let Some((i, fw)) = best_index {
                best = Selection {
                    point: Point::Index(i),
                    value: fw,
                    inf_estimate: fw,
                };
            }
        }
        CandidateSampler::LocalBall {
            radius_factor,
            samples_per_iter,
            seed,
        } => {
            let x = u_n
                .coords()
                .ok_or_else(|| Error::InvalidConfig("the local-ball sampler needs a normed space".into()))?;
            let reach = radius_factor * (f_un - f.lower_bound()) / eps;
            let radius = reach / space.metric_scale();
            if !(radius.is_finite() && radius > 0.0) {
                return Ok(best);
            }
            let n_dirs = samples_per_iter.div_ceil(RADIUS_LEVELS);
            let mut dirs = space.sample_directions(n_dirs, mix_seed(*seed, iteration))?;
            // Near a point with ||grad||_* slightly above ε the descent cone is thin;
            // random directions miss it in higher dimensions, the steepest one does not.
            let mut total = *samples_per_iter;
            if f.has_gradient() {
                if let Some(phi) = f.gradient(x).ok().and_then(|g| space.steepest_descent(&g).ok().flatten()) {
                    dirs.insert(0, phi);
                    total += RADIUS_LEVELS;
                }
            }
            let mut radii = [0.0; RADIUS_LEVELS];
            let mut r = radius;
            for slot in radii.iter_mut() {
                *slot = r;
                r *= RADIUS_RATIO;
            }
            for k in 0..total {
                let phi = &dirs[k / RADIUS_LEVELS];
                let w = Point::Coords(offset(x, radii[k % RADIUS_LEVELS], phi));
                if w == *u_n {
                    continue;
                }
                if let Some(fw) = member_with(f, space, eps, u_n, f_un, &w)? {
                    if fw < best.value {
                        best = Selection {
                            point: w,
                            value: fw,
                            inf_estimate: fw,
                        };
                    }
                }
            }
        }
    }
    Ok(best)
}

fn check_start(f: &Functional, space: &MetricSpace, u: &Point, tolerance: f64, strict: bool, label: &str) -> Result<f64> {
    f.check_space(space)?;
    space.check_point(u)?;
    let bound = f.lower_bound() + tolerance;
    let hypothesis = format!(
        "F(u) {} lower_bound + {label}",
        if strict { "<" } else { "<=" }
    );
    let fu = match f.evaluate(u)? {
        ExtReal::PlusInfinity => {
            return Err(Error::RejectedStart {
                value: f64::INFINITY,
                bound,
                hypothesis,
            })
        }
        ExtReal::Finite(x) => x,
    };
    let ok = if strict { fu < bound } else { fu <= bound };
    if !ok {
        return Err(Error::RejectedStart {
            value: fu,
            bound,
            hypothesis,
        });
    }
    Ok(fu)
}

fn iterate(f: &Functional, space: &MetricSpace, u: &Point, fu: f64, cfg: &SolverConfig) -> Result<(Point, IterationTrace)> {
    let eps = cfg.effective_epsilon();
    let step_tol = cfg.step_tolerance_for(space);
    let mut trace = IterationTrace {
        epsilon: eps,
        points: vec![u.clone()],
        values: vec![fu],
        step_dists: Vec::new(),
        inf_estimates: Vec::new(),
        terminated_by: Termination::MaxIters,
    };
    for iteration in 0..cfg.max_iters {
        let current = trace.last_point().clone();
        let next = select_next(f, space, eps, &current, &cfg.sampler, iteration)?;
        trace.inf_estimates.push(next.inf_estimate);
        if next.point == current {
            trace.terminated_by = Termination::Stationary;
            break;
        }
        let d = space.distance(&current, &next.point)?;
        trace.points.push(next.point);
        trace.values.push(next.value);
        trace.step_dists.push(d);
        if d <= step_tol {
            trace.terminated_by = Termination::StepTolerance;
            break;
        }
    }
    Ok((trace.last_point().clone(), trace))
}

/// Runs the iteration from `u`, which must satisfy `F(u) <= lower_bound + ε`
/// (`ε²` when `cfg.second_order_mode` is set).
pub fn run(f: &Functional, space: &MetricSpace, u: &Point, cfg: &SolverConfig) -> Result<(Point, IterationTrace)> {
    cfg.validate(space)?;
    let label = if cfg.second_order_mode { "epsilon^2" } else { "epsilon" };
    let fu = check_start(f, space, u, cfg.effective_epsilon(), false, label)?;
    iterate(f, space, u, fu, cfg)
}

/// [`run`] with tolerance `ε²`; the returned point is where the second-order bound is checked.
pub fn run_second_order(f: &Functional, space: &MetricSpace, u: &Point, cfg: &SolverConfig) -> Result<(Point, IterationTrace)> {
    let cfg = SolverConfig {
        second_order_mode: true,
        ..cfg.clone()
    };
    run(f, space, u, &cfg)
}

/// Runs under the rescaled metric `ε^{1/2}·d` with tolerance `ε`, which is the
/// tolerance `ε^{3/2}` in the original metric. Requires `F(u) < lower_bound + ε²`.
///
/// The trace records distances in the rescaled metric.
pub fn run_rescaled(f: &Functional, space: &MetricSpace, u: &Point, cfg: &SolverConfig) -> Result<(Point, IterationTrace)> {
    if cfg.second_order_mode {
        return Err(Error::InvalidConfig(
            "rescaled runs use tolerance epsilon; second_order_mode must be off".into(),
        ));
    }
    cfg.validate(space)?;
    let eps = cfg.epsilon;
    let fu = check_start(f, space, u, eps * eps, true, "epsilon^2")?;
    let scaled = space.rescaled(eps.sqrt())?;
    iterate(f, &scaled, u, fu, cfg)
}
