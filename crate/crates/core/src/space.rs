//! Complete metric spaces: finite point sets with an explicit distance matrix,
//! and finite-dimensional normed spaces (`l1`, `l2`, `linf`).
//!
//! Every distance carries a positive `metric_scale` factor. The rescaled
//! metric `c * d` has the same topology as `d`, so rescaling never touches the
//! stored data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest finite space accepted (triangle validation is cubic, the oracle quadratic).
pub const MAX_FINITE_POINTS: usize = 500;

/// Relative slack allowed when validating the triangle inequality.
const TRIANGLE_SLACK: f64 = 1e-12;

/// An element of a space: an index into a finite space or a coordinate vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Index(usize),
    Coords(Vec<f64>),
}

impl Point {
    pub fn index(&self) -> Option<usize> {
        match self {
            Point::Index(i) => Some(*i),
            Point::Coords(_) => None,
        }
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Index(_) => None,
            Point::Coords(c) => Some(c),
        }
    }
}

impl From<usize> for Point {
    fn from(i: usize) -> Self {
        Point::Index(i)
    }
}

impl From<Vec<f64>> for Point {
    fn from(c: Vec<f64>) -> Self {
        Point::Coords(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormKind::L1 => v.iter().map(|x| x.abs()).sum(),
            NormKind::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormKind::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// The norm whose unit ball is polar to this one's.
    pub fn dual(self) -> NormKind {
        match self {
            NormKind::L1 => NormKind::Linf,
            NormKind::L2 => NormKind::L2,
            NormKind::Linf => NormKind::L1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Finite {
        labels: Vec<String>,
        dist: Vec<Vec<f64>>,
    },
    Normed {
        dim: usize,
        norm: NormKind,
    },
}

/// A complete metric space `(U, d)`. Immutable once constructed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceSpec", into = "SpaceSpec")]
pub struct MetricSpace {
    geometry: Geometry,
    metric_scale: f64,
}

/// On-disk form of a space section.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpaceSpec {
    Finite {
        #[serde(default)]
        labels: Vec<String>,
        dist: Vec<Vec<f64>>,
        #[serde(default = "unit_scale", skip_serializing_if = "is_unit_scale")]
        metric_scale: f64,
    },
    Normed {
        dim: usize,
        norm: NormKind,
        #[serde(default = "unit_scale", skip_serializing_if = "is_unit_scale")]
        metric_scale: f64,
    },
}

fn unit_scale() -> f64 {
    1.0
}

fn is_unit_scale(c: &f64) -> bool {
    *c == 1.0
}

impl TryFrom<SpaceSpec> for MetricSpace {
    type Error = Error;

    fn try_from(spec: SpaceSpec) -> Result<Self> {
        match spec {
            SpaceSpec::Finite {
                labels,
                dist,
                metric_scale,
            } => MetricSpace::finite(labels, dist)?.with_metric_scale(metric_scale),
            SpaceSpec::Normed {
                dim,
                norm,
                metric_scale,
            } => MetricSpace::normed(dim, norm)?.with_metric_scale(metric_scale),
        }
    }
}

impl From<MetricSpace> for SpaceSpec {
    fn from(s: MetricSpace) -> Self {
        match s.geometry {
            Geometry::Finite { labels, dist } => SpaceSpec::Finite {
                labels,
                dist,
                metric_scale: s.metric_scale,
            },
            Geometry::Normed { dim, norm } => SpaceSpec::Normed {
                dim,
                norm,
                metric_scale: s.metric_scale,
            },
        }
    }
}

impl MetricSpace {
    /// Builds a finite space, validating the metric axioms over every pair and triple.
    ///
    /// Empty `labels` are replaced by the point indices.
    pub fn finite(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::InvalidSpace("finite space has no points".into()));
        }
        if n > MAX_FINITE_POINTS {
            return Err(Error::TooLarge(n));
        }
        let labels = if labels.is_empty() {
            (0..n).map(|i| i.to_string()).collect()
        } else {
            labels
        };
        if labels.len() != n {
            return Err(Error::InvalidSpace(format!(
                "{} labels for a {n}x{n} distance matrix",
                labels.len()
            )));
        }
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidSpace(format!(
                    "dist row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidSpace(format!(
                        "dist[{i}][{j}] = {d} is not a nonnegative real"
                    )));
                }
                if i == j && d != 0.0 {
                    return Err(Error::InvalidSpace(format!("dist[{i}][{i}] = {d}, expected 0")));
                }
                if i != j && d == 0.0 {
                    return Err(Error::InvalidSpace(format!(
                        "dist[{i}][{j}] = 0 for distinct points"
                    )));
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if dist[i][j] != dist[j][i] {
                    return Err(Error::InvalidSpace(format!(
                        "dist is not symmetric: dist[{i}][{j}] = {} but dist[{j}][{i}] = {}",
                        dist[i][j], dist[j][i]
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let via = dist[i][j] + dist[j][k];
                    if dist[i][k] > via * (1.0 + TRIANGLE_SLACK) {
                        return Err(Error::InvalidSpace(format!(
                            "triangle inequality fails: dist[{i}][{k}] = {} > dist[{i}][{j}] + dist[{j}][{k}] = {via}",
                            dist[i][k]
                        )));
                    }
                }
            }
        }
        Ok(MetricSpace {
            geometry: Geometry::Finite { labels, dist },
            metric_scale: 1.0,
        })
    }

    pub fn normed(dim: usize, norm: NormKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("normed space needs dim >= 1".into()));
        }
        Ok(MetricSpace {
            geometry: Geometry::Normed { dim, norm },
            metric_scale: 1.0,
        })
    }

    /// Replaces the metric scale.
    pub fn with_metric_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidSpace(format!(
                "metric_scale must be a positive real, got {scale}"
            )));
        }
        self.metric_scale = scale;
        Ok(self)
    }

    /// The same space under the metric `factor * d`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        self.clone().with_metric_scale(self.metric_scale * factor)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn metric_scale(&self) -> f64 {
        self.metric_scale
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.geometry, Geometry::Finite { .. })
    }

    /// Number of points of a finite space.
    pub fn point_count(&self) -> Option<usize> {
        match &self.geometry {
            Geometry::Finite { dist, .. } => Some(dist.len()),
            Geometry::Normed { .. } => None,
        }
    }

    /// Dimension of a normed space.
    pub fn dim(&self) -> Option<usize> {
        match &self.geometry {
            Geometry::Normed { dim, .. } => Some(*dim),
            Geometry::Finite { .. } => None,
        }
    }

    pub fn norm_kind(&self) -> Option<NormKind> {
        match &self.geometry {
            Geometry::Normed { norm, .. } => Some(*norm),
            Geometry::Finite { .. } => None,
        }
    }

    /// All points of a finite space in index order; empty for normed spaces.
    pub fn points(&self) -> impl Iterator<Item = Point> {
        (0..self.point_count().unwrap_or(0)).map(Point::Index)
    }

    /// Checks that `p` is an element of this space.
    pub fn check_point(&self, p: &Point) -> Result<()> {
        match (&self.geometry, p) {
            (Geometry::Finite { dist, .. }, Point::Index(i)) => {
                if *i < dist.len() {
                    Ok(())
                } else {
                    Err(Error::Domain(format!(
                        "index {i} out of range for a {}-point space",
                        dist.len()
                    )))
                }
            }
            (Geometry::Normed { dim, .. }, Point::Coords(c)) => {
                if c.len() != *dim {
                    Err(Error::Domain(format!(
                        "point has {} coordinates, space has dim {dim}",
                        c.len()
                    )))
                } else if c.iter().any(|x| !x.is_finite()) {
                    Err(Error::Domain("point has a non-finite coordinate".into()))
                } else {
                    Ok(())
                }
            }
            (Geometry::Finite { .. }, Point::Coords(_)) => Err(Error::Domain(
                "coordinate point used with a finite space".into(),
            )),
            (Geometry::Normed { .. }, Point::Index(_)) => {
                Err(Error::Domain("index point used with a normed space".into()))
            }
        }
    }

    /// `d(a, b)` without the metric scale.
    pub fn unscaled_distance(&self, a: &Point, b: &Point) -> Result<f64> {
        self.check_point(a)?;
        self.check_point(b)?;
        Ok(match (&self.geometry, a, b) {
            (Geometry::Finite { dist, .. }, Point::Index(i), Point::Index(j)) => dist[*i][*j],
            (Geometry::Normed { norm, .. }, Point::Coords(x), Point::Coords(y)) => {
                let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                norm.norm(&diff)
            }
            _ => unreachable!("check_point rejects mismatched kinds"),
        })
    }

    /// `metric_scale * d(a, b)`.
    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        Ok(self.metric_scale * self.unscaled_distance(a, b)?)
    }

    fn require_normed(&self, what: &str) -> Result<(usize, NormKind)> {
        match &self.geometry {
            Geometry::Normed { dim, norm } => Ok((*dim, *norm)),
            Geometry::Finite { .. } => Err(Error::Unsupported(format!(
                "{what} requires a normed space"
            ))),
        }
    }

    /// Vector norm `||v||` in the space's norm, without the metric scale.
    pub fn norm(&self, v: &[f64]) -> Result<f64> {
        let (dim, norm) = self.require_normed("norm")?;
        if v.len() != dim {
            return Err(Error::Domain(format!(
                "vector has length {}, space has dim {dim}",
                v.len()
            )));
        }
        Ok(norm.norm(v))
    }

    /// Norm of a linear functional `g` in the dual space. Independent of the metric scale.
    pub fn dual_norm(&self, g: &[f64]) -> Result<f64> {
        let (dim, norm) = self.require_normed("dual_norm")?;
        if g.len() != dim {
            return Err(Error::Domain(format!(
                "covector has length {}, space has dim {dim}",
                g.len()
            )));
        }
        Ok(norm.dual().norm(g))
    }

    /// A unit vector `φ` with `<g, φ> = -||g||_*`, i.e. the steepest descent
    /// direction for the space's norm. `None` when `g = 0`.
    pub fn steepest_descent(&self, g: &[f64]) -> Result<Option<Vec<f64>>> {
        let dual = self.dual_norm(g)?;
        if !(dual > 0.0 && dual.is_finite()) {
            return Ok(None);
        }
        let (_, norm) = self.require_normed("steepest_descent")?;
        let phi = match norm {
            NormKind::L2 => g.iter().map(|x| -x / dual).collect(),
            NormKind::Linf => g.iter().map(|x| if *x == 0.0 { 0.0 } else { -x.signum() }).collect(),
            NormKind::L1 => {
                let (k, _) = g
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
                    .expect("dual > 0 implies a nonzero entry");
                let mut e = vec![0.0; g.len()];
                e[k] = -g[k].signum();
                e
            }
        };
        Ok(Some(phi))
    }

    /// Deterministic unit directions (unit in the space's norm).
    ///
    /// When `count >= 2 * dim` the first `2 * dim` directions are the signed
    /// coordinate axes `+e0, -e0, +e1, -e1, ...`; the rest are normalized
    /// Gaussian draws from a generator seeded with `seed`.
    pub fn sample_directions(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let (dim, norm) = self.require_normed("sample_directions")?;
        if count == 0 {
            return Err(Error::InvalidConfig("direction count must be >= 1".into()));
        }
        let mut out = Vec::with_capacity(count);
        if count >= 2 * dim {
            for axis in 0..dim {
                for sign in [1.0, -1.0] {
                    let mut e = vec![0.0; dim];
                    e[axis] = sign;
                    out.push(e);
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while out.len() < count {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = norm.norm(&v);
            if n > 1e-150 {
                out.push(v.into_iter().map(|x| x / n).collect());
            }
        }
        Ok(out)
    }
}

/// `x + r * phi`.
pub fn offset(x: &[f64], r: f64, phi: &[f64]) -> Vec<f64> {
    x.iter().zip(phi).map(|(a, b)| a + r * b).collect()
}
