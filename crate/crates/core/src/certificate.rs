//! Independent verification of the Ekeland conclusions at a candidate point.
//!
//! | id  | inequality                                                        |
//! |-----|-------------------------------------------------------------------|
//! | C1  | `d(u, v) <= 1`                                                    |
//! | C2  | `F(v) <= F(u)`                                                    |
//! | C3  | `F(v) <= F(w) + ε·d(v, w)` for all `w`                            |
//! | C4  | `||δF(v)||_* <= ε`                                                |
//! | C5  | `δ²F(v)(φ, φ) >= -4ε||φ|| - 2R/ε²`, `R` the exact Taylor remainder |
//! | R1  | `d(u, v) <= ε^{1/2}`                                              |
//! | R3  | `F(v) <= F(w) + ε^{3/2}·d(v, w)` for all `w`                      |
//! | R4  | `||δF(v)||_* <= ε^{3/2}`                                          |
//! | R5  | `δ²F(v)(φ, φ) >= -4ε^{1/2}||φ|| - 2R/ε²`                          |
//!
//! Every item reports a signed margin (negative means violated) and passes
//! when `margin >= -1e-9·(1 + |F(v)|)`. C3 is exact on finite spaces and
//! sampled on normed spaces. Items that need derivatives are reported as not
//! applicable for nonsmooth functionals and omitted on finite spaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{ExtReal, Functional};
use crate::space::{offset, MetricSpace, Point};
use crate::solver::{RADIUS_LEVELS, RADIUS_RATIO};

/// Relative tolerance applied to every inequality.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Standard,
    SecondOrder,
    #[serde(rename = "remark")]
    RemarkRescaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ItemId {
    C1,
    C2,
    C3,
    C4,
    C5,
    R1,
    R3,
    R4,
    R5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overall {
    Pass,
    Fail,
    Partial,
}

/// The point or direction where an item's margin is smallest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Point { point: Point, margin: f64 },
    Direction { direction: Vec<f64>, margin: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertItem {
    pub id: ItemId,
    pub status: Status,
    /// `None` when not applicable.
    pub margin: Option<f64>,
    pub tolerance: f64,
    /// Number of witnesses (points or directions) examined.
    pub samples: usize,
    pub worst_witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CertItem {
    fn judged(id: ItemId, margin: f64, tolerance: f64, samples: usize, worst_witness: Option<Witness>) -> Self {
        let status = if margin >= -tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        CertItem {
            id,
            status,
            margin: Some(margin),
            tolerance,
            samples,
            worst_witness,
            note: None,
        }
    }

    fn not_applicable(id: ItemId, tolerance: f64, why: impl Into<String>) -> Self {
        CertItem {
            id,
            status: Status::NotApplicable,
            margin: None,
            tolerance,
            samples: 0,
            worst_witness: None,
            note: Some(why.into()),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub mode: Mode,
    pub epsilon: f64,
    pub items: Vec<CertItem>,
    pub overall: Overall,
}

impl Certificate {
    pub fn new(mode: Mode, epsilon: f64, items: Vec<CertItem>) -> Self {
        let overall = overall_of(&items);
        Certificate {
            mode,
            epsilon,
            items,
            overall,
        }
    }

    pub fn item(&self, id: ItemId) -> Option<&CertItem> {
        self.items.iter().find(|i| i.id == id)
    }
}

fn overall_of(items: &[CertItem]) -> Overall {
    if items.iter().any(|i| i.status == Status::Fail) {
        Overall::Fail
    } else if items.iter().any(|i| i.status == Status::NotApplicable) {
        Overall::Partial
    } else {
        Overall::Pass
    }
}

/// Sampling parameters for the checks that cannot be exhaustive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifierConfig {
    /// Sampled C3/R3 witnesses on normed spaces.
    #[serde(default = "VerifierConfig::default_samples")]
    pub samples: usize,
    /// Test directions for C4/C5.
    #[serde(default = "VerifierConfig::default_directions")]
    pub directions: usize,
    #[serde(default)]
    pub seed: u64,
    /// Step of the difference quotients in C4.
    #[serde(default = "VerifierConfig::default_fd_step")]
    pub fd_step: f64,
}

impl VerifierConfig {
    fn default_samples() -> usize {
        10_000
    }
    fn default_directions() -> usize {
        64
    }
    fn default_fd_step() -> f64 {
        1e-5
    }

    pub fn validate(&self) -> Result<()> {
        if self.directions == 0 {
            return Err(Error::InvalidConfig("verifier.directions must be >= 1".into()));
        }
        if !(self.fd_step.is_finite() && self.fd_step > 0.0) {
            return Err(Error::InvalidConfig("verifier.fd_step must be positive".into()));
        }
        Ok(())
    }

    /// Test directions for `space`: the signed axes plus seeded draws.
    pub fn test_directions(&self, space: &MetricSpace) -> Result<Vec<Vec<f64>>> {
        let dim = space
            .dim()
            .ok_or_else(|| Error::Unsupported("test directions require a normed space".into()))?;
        space.sample_directions(self.directions.max(2 * dim), self.seed)
    }
}

impl Default for VerifierConfig {
    fn default() -> Self {
        VerifierConfig {
            samples: Self::default_samples(),
            directions: Self::default_directions(),
            seed: 0,
            fd_step: Self::default_fd_step(),
        }
    }
}

/// `1e-9·(1 + |F(v)|)`.
pub fn tolerance_at(fv: f64) -> f64 {
    TOLERANCE * (1.0 + fv.abs())
}

/// Where C3 draws its comparison points from.
#[derive(Debug, Clone, PartialEq)]
pub enum WitnessSource {
    /// Every point of a finite space.
    Exhaustive,
    /// `count` seeded points of the ball that can contain violators, plus `extra`.
    Sampled {
        count: usize,
        seed: u64,
        extra: Vec<Point>,
    },
}

/// C1 (or R1 in rescaled mode, measured in the unscaled metric of `space`).
pub fn check_c1(f: &Functional, space: &MetricSpace, u: &Point, v: &Point, eps: f64, mode: Mode) -> Result<CertItem> {
    let tol = tolerance_at(f.evaluate_finite(v)?);
    let d = space.distance(u, v)?;
    let (id, radius) = match mode {
        Mode::Standard | Mode::SecondOrder => (ItemId::C1, 1.0),
        Mode::RemarkRescaled => (ItemId::R1, eps.sqrt()),
    };
    Ok(CertItem::judged(id, radius - d, tol, 1, None))
}

/// C2: `F(u) - F(v)`.
pub fn check_c2(f: &Functional, u: &Point, v: &Point) -> Result<CertItem> {
    let fu = f.evaluate_finite(u)?;
    let fv = f.evaluate_finite(v)?;
    Ok(CertItem::judged(ItemId::C2, fu - fv, tolerance_at(fv), 1, None))
}

/// C3: `min_w F(w) + ε·d(v, w) - F(v)` over the witness source.
///
/// On normed spaces the sampled ball has radius `(F(v) - lower_bound)/ε`:
/// any violator `w` satisfies `ε·d(v, w) < F(v) - F(w) <= F(v) - lower_bound`.
pub fn check_c3(f: &Functional, space: &MetricSpace, v: &Point, eps: f64, witnesses: &WitnessSource) -> Result<CertItem> {
    check_c3_as(ItemId::C3, f, space, v, eps, witnesses)
}

fn check_c3_as(
    id: ItemId,
    f: &Functional,
    space: &MetricSpace,
    v: &Point,
    eps: f64,
    witnesses: &WitnessSource,
) -> Result<CertItem> {
    let fv = f.evaluate_finite(v)?;
    let tol = tolerance_at(fv);
    let mut margin = 0.0;
    let mut worst = Witness::Point {
        point: v.clone(),
        margin: 0.0,
    };
    let mut samples = 1;
    let mut consider = |w: Point| -> Result<()> {
        samples += 1;
        if let ExtReal::Finite(fw) = f.evaluate(&w)? {
            let m = fw + eps * space.distance(v, &w)? - fv;
            if m < margin {
                margin = m;
                worst = Witness::Point { point: w, margin: m };
            }
        }
        Ok(())
    };
    match witnesses {
        WitnessSource::Exhaustive => {
            if !space.is_finite() {
                return Err(Error::InvalidConfig(
                    "exhaustive witnesses need a finite space".into(),
                ));
            }
            for w in space.points().filter(|w| w != v) {
                consider(w)?;
            }
        }
        WitnessSource::Sampled { count, seed, extra } => {
            for w in extra {
                consider(w.clone())?;
            }
            let x = v
                .coords()
                .ok_or_else(|| Error::InvalidConfig("sampled witnesses need a normed space".into()))?;
            let dim = x.len() as f64;
            let radius = (fv - f.lower_bound()) / eps / space.metric_scale();
            if radius.is_finite() && radius > 0.0 && *count > 0 {
                // half uniform in the ball, half on a geometric shell grid around v
                let uniform = count / 2;
                let shell = count - uniform;
                let dirs = space.sample_directions(uniform.max(1), *seed)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
                for phi in dirs.iter().take(uniform) {
                    let r = radius * rng.random::<f64>().powf(1.0 / dim);
                    consider(Point::Coords(offset(x, r, phi)))?;
                }
                let shell_dirs = space.sample_directions(shell.div_ceil(RADIUS_LEVELS).max(1), seed.wrapping_add(2))?;
                for k in 0..shell {
                    let r = radius * RADIUS_RATIO.powi((k % RADIUS_LEVELS) as i32);
                    consider(Point::Coords(offset(x, r, &shell_dirs[k / RADIUS_LEVELS])))?;
                }
            }
        }
    }
    Ok(CertItem::judged(id, margin, tol, samples, Some(worst)))
}

/// C4: `ε - ||grad F(v)||_*`, cross-checked by the one-sided difference
/// quotients `(F(v) - F(v ± tφ))/t <= ε||φ||` for every test direction.
pub fn check_c4(
    f: &Functional,
    space: &MetricSpace,
    v: &Point,
    eps: f64,
    directions: &[Vec<f64>],
    fd_step: f64,
) -> Result<CertItem> {
    check_c4_as(ItemId::C4, f, space, v, eps, directions, fd_step)
}

fn check_c4_as(
    id: ItemId,
    f: &Functional,
    space: &MetricSpace,
    v: &Point,
    eps: f64,
    directions: &[Vec<f64>],
    fd_step: f64,
) -> Result<CertItem> {
    let fv = f.evaluate_finite(v)?;
    let tol = tolerance_at(fv);
    let Some(x) = v.coords() else {
        return Ok(CertItem::not_applicable(id, tol, "first-order bound needs a normed space"));
    };
    if !f.has_gradient() {
        return Ok(CertItem::not_applicable(id, tol, "functional has no analytic gradient"));
    }
    let grad = f.gradient(x)?;
    let dual = space.dual_norm(&grad)?;
    let analytic = eps - dual;
    let mut margin = analytic;
    let mut worst = None;
    for phi in directions {
        let bound = eps * space.norm(phi)?;
        let mut quotient = f64::NEG_INFINITY;
        for sign in [1.0, -1.0] {
            let probe = Point::Coords(offset(x, sign * fd_step, phi));
            if let ExtReal::Finite(fp) = f.evaluate(&probe)? {
                quotient = quotient.max((fv - fp) / fd_step);
            }
        }
        let m = bound - quotient;
        if m < margin {
            margin = m;
            worst = Some(Witness::Direction {
                direction: phi.clone(),
                margin: m,
            });
        }
    }
    Ok(
        CertItem::judged(id, margin, tol, directions.len(), worst)
            .with_note(format!("dual norm of gradient = {dual:e}")),
    )
}

/// C5 (mode `SecondOrder`) or R5 (mode `RemarkRescaled`).
///
/// For each direction, `margin = δ²F(v)(φ,φ) + c·||φ|| + 2R/ε²` with `R` the
/// exact Taylor remainder at step `ε` and `c = 4ε` (C5) or `4ε^{1/2}` (R5).
/// Each direction is checked as the pair `±φ`. The item also requires
/// `max(|R(φ)|, |R(-φ)|)/ε²` to be nonincreasing over `ε, ε/10, ε/100` up to
/// roundoff; the worst shortfall of that sequence is folded into the margin.
pub fn check_c5(
    f: &Functional,
    space: &MetricSpace,
    v: &Point,
    eps: f64,
    directions: &[Vec<f64>],
    mode: Mode,
) -> Result<CertItem> {
    let fv = f.evaluate_finite(v)?;
    let tol = tolerance_at(fv);
    let (id, coefficient) = match mode {
        Mode::Standard => {
            return Ok(CertItem::not_applicable(
                ItemId::C5,
                tol,
                "second-order bound is stated at the point of a second-order run",
            ))
        }
        Mode::SecondOrder => (ItemId::C5, 4.0 * eps),
        Mode::RemarkRescaled => (ItemId::R5, 4.0 * eps.sqrt()),
    };
    let Some(x) = v.coords() else {
        return Ok(CertItem::not_applicable(id, tol, "second-order bound needs a normed space"));
    };
    if !(f.has_gradient() && f.has_hessian()) {
        return Ok(CertItem::not_applicable(
            id,
            tol,
            "functional has no analytic second variation",
        ));
    }
    let scales = [eps, eps / 10.0, eps / 100.0];
    let mut margin = f64::INFINITY;
    let mut worst = None;
    let mut skipped = 0usize;
    let mut worst_ratio: f64 = 0.0;
    for phi in directions {
        let minus: Vec<f64> = phi.iter().map(|x| -x).collect();
        // |R|/e² at each scale for +φ and -φ; None once F leaves its domain
        let mut paired: Vec<Option<(f64, f64)>> = Vec::with_capacity(3);
        for &e in &scales {
            let plus = f.taylor_remainder(x, phi, e);
            let neg = f.taylor_remainder(x, &minus, e);
            match (plus, neg) {
                (Ok(a), Ok(b)) => paired.push(Some((a, b))),
                (Err(Error::DerivativeUndefined(_)), _) | (_, Err(Error::DerivativeUndefined(_))) => paired.push(None),
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
        let hess = f.hess_form(x, phi, phi)?;
        let base = hess + coefficient * space.norm(phi)?;
        let mut m = f64::INFINITY;
        match paired[0] {
            Some((rp, rm)) => {
                m = m.min(base + 2.0 * rp / (eps * eps));
                m = m.min(base + 2.0 * rm / (eps * eps));
            }
            // F(v ± εφ) = +inf: the remainder is +inf and the bound holds vacuously
            None => skipped += 1,
        }
        // Decay is measured on the pair ±φ: the odd-order part of R changes sign
        // with φ, so a single direction can cancel at one scale, the pair cannot.
        let ratios: Vec<(f64, f64)> = paired
            .iter()
            .zip(scales)
            .map_while(|(r, e)| r.map(|(a, b)| (a.abs().max(b.abs()) / (e * e), e)))
            .collect();
        if let Some(first) = ratios.first() {
            worst_ratio = worst_ratio.max(first.0);
        }
        for pair in ratios.windows(2) {
            let (prev, _) = pair[0];
            let (next, e) = pair[1];
            let roundoff = 16.0 * f64::EPSILON * (1.0 + fv.abs()) / (e * e);
            m = m.min(prev + roundoff - next);
        }
        if m == f64::INFINITY {
            continue;
        }
        if m < margin {
            margin = m;
            worst = Some(Witness::Direction {
                direction: phi.clone(),
                margin: m,
            });
        }
    }
    if margin == f64::INFINITY {
        margin = 0.0;
    }
    let mut note = format!("max |R|/eps^2 = {worst_ratio:e}");
    if skipped > 0 {
        note.push_str(&format!("; {skipped} directions leave the domain (vacuous)"));
    }
    Ok(CertItem::judged(id, margin, tol, directions.len(), worst).with_note(note))
}

/// Remark items R1, C2, R3, R4, R5 for a point from a rescaled run.
///
/// `space` is the original (unscaled) space. Requires `F(u) < lower_bound + ε²`.
pub fn check_remark(
    f: &Functional,
    space: &MetricSpace,
    u: &Point,
    v: &Point,
    eps: f64,
    verifier: &VerifierConfig,
    trace_points: &[Point],
) -> Result<Vec<CertItem>> {
    let fu = f.evaluate(u)?.to_f64();
    let bound = f.lower_bound() + eps * eps;
    if !(fu < bound) {
        return Err(Error::RejectedStart {
            value: fu,
            bound,
            hypothesis: "F(u) < lower_bound + epsilon^2".into(),
        });
    }
    let tight = eps.powf(1.5);
    let mut items = vec![
        check_c1(f, space, u, v, eps, Mode::RemarkRescaled)?,
        check_c2(f, u, v)?,
    ];
    let directions = if space.is_finite() {
        Vec::new()
    } else {
        verifier.test_directions(space)?
    };
    let source = witness_source(space, v, verifier, trace_points, &directions);
    items.push(check_c3_as(ItemId::R3, f, space, v, tight, &source)?);
    if !space.is_finite() {
        items.push(check_c4_as(ItemId::R4, f, space, v, tight, &directions, verifier.fd_step)?);
        items.push(check_c5(f, space, v, eps, &directions, Mode::RemarkRescaled)?);
    }
    Ok(items)
}

fn witness_source(
    space: &MetricSpace,
    v: &Point,
    verifier: &VerifierConfig,
    trace_points: &[Point],
    directions: &[Vec<f64>],
) -> WitnessSource {
    if space.is_finite() {
        return WitnessSource::Exhaustive;
    }
    let mut extra: Vec<Point> = trace_points.to_vec();
    if let Some(x) = v.coords() {
        for phi in directions {
            for sign in [1.0, -1.0] {
                extra.push(Point::Coords(offset(x, sign * verifier.fd_step, phi)));
            }
        }
    }
    WitnessSource::Sampled {
        count: verifier.samples,
        seed: verifier.seed,
        extra,
    }
}

/// Builds the full certificate for `v` in the given mode.
///
/// Standard checks C1–C4 at `ε`. SecondOrder checks C1–C4 at `ε²` and C5 at
/// `ε`. RemarkRescaled delegates to [`check_remark`]. Derivative items are
/// omitted on finite spaces.
pub fn certify(
    f: &Functional,
    space: &MetricSpace,
    u: &Point,
    v: &Point,
    eps: f64,
    mode: Mode,
    verifier: &VerifierConfig,
    trace_points: &[Point],
) -> Result<Certificate> {
    verifier.validate()?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidConfig(format!("epsilon must be positive, got {eps}")));
    }
    f.check_space(space)?;
    space.check_point(u)?;
    space.check_point(v)?;
    let items = match mode {
        Mode::RemarkRescaled => check_remark(f, space, u, v, eps, verifier, trace_points)?,
        Mode::Standard | Mode::SecondOrder => {
            let level = if mode == Mode::SecondOrder { eps * eps } else { eps };
            let directions = if space.is_finite() {
                Vec::new()
            } else {
                verifier.test_directions(space)?
            };
            let source = witness_source(space, v, verifier, trace_points, &directions);
            let mut items = vec![
                check_c1(f, space, u, v, level, mode)?,
                check_c2(f, u, v)?,
                check_c3(f, space, v, level, &source)?,
            ];
            if !space.is_finite() {
                items.push(check_c4(f, space, v, level, &directions, verifier.fd_step)?);
                if mode == Mode::SecondOrder {
                    items.push(check_c5(f, space, v, eps, &directions, mode)?);
                }
            }
            items
        }
    };
    Ok(Certificate::new(mode, eps, items))
}
