//! Test functionals and their JSON descriptions.
//!
//! Smooth members (`quadratic`, `quartic`, `rosenbrock`, `boxed_quadratic`)
//! carry analytic gradients and second variations; `abs_sum` and `table` do not.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ExtReal, Functional, Objective};
use crate::error::{Error, Result};
use crate::space::{MetricSpace, Point};

fn coords<'a>(p: &'a Point, name: &str) -> Result<&'a [f64]> {
    p.coords()
        .ok_or_else(|| Error::Domain(format!("`{name}` is defined on normed spaces only")))
}

fn check_dim(space: &MetricSpace, len: usize, name: &str) -> Result<()> {
    match space.dim() {
        Some(d) if d == len => Ok(()),
        Some(d) => Err(Error::Domain(format!(
            "`{name}` has {len} coordinates but the space has dim {d}"
        ))),
        None => Err(Error::Domain(format!(
            "`{name}` is defined on normed spaces only"
        ))),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_center(center: &[f64], name: &str) -> Result<()> {
    if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "`{name}` needs a non-empty finite center"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Constant(pub f64);

impl Objective for Constant {
    fn value(&self, _p: &Point) -> Result<f64> {
        Ok(self.0)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; x.len()])
    }
    fn hess_form(&self, _x: &[f64], _a: &[f64], _b: &[f64]) -> Option<f64> {
        Some(0.0)
    }
    fn has_gradient(&self) -> bool {
        true
    }
    fn has_hessian(&self) -> bool {
        true
    }
}

/// `||x - c||²` (Euclidean, whatever the space norm).
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub center: Vec<f64>,
}

impl Objective for Quadratic {
    fn value(&self, p: &Point) -> Result<f64> {
        let x = coords(p, "quadratic")?;
        Ok(x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum())
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().zip(&self.center).map(|(a, c)| 2.0 * (a - c)).collect())
    }
    fn hess_form(&self, _x: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
        Some(2.0 * dot(a, b))
    }
    fn has_gradient(&self) -> bool {
        true
    }
    fn has_hessian(&self) -> bool {
        true
    }
    fn check_space(&self, space: &MetricSpace) -> Result<()> {
        check_dim(space, self.center.len(), "quadratic")
    }
}

/// `Σ (x_i - c_i)⁴`.
#[derive(Debug, Clone)]
pub struct Quartic {
    pub center: Vec<f64>,
}

impl Objective for Quartic {
    fn value(&self, p: &Point) -> Result<f64> {
        let x = coords(p, "quartic")?;
        Ok(x.iter().zip(&self.center).map(|(a, c)| (a - c).powi(4)).sum())
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().zip(&self.center).map(|(a, c)| 4.0 * (a - c).powi(3)).collect())
    }
    fn hess_form(&self, x: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
        Some(
            x.iter()
                .zip(&self.center)
                .zip(a.iter().zip(b))
                .map(|((xi, ci), (ai, bi))| 12.0 * (xi - ci).powi(2) * ai * bi)
                .sum(),
        )
    }
    fn has_gradient(&self) -> bool {
        true
    }
    fn has_hessian(&self) -> bool {
        true
    }
    fn check_space(&self, space: &MetricSpace) -> Result<()> {
        check_dim(space, self.center.len(), "quartic")
    }
}

/// Chained Rosenbrock function `Σ b(x_{i+1} - x_i²)² + (a - x_i)²`, minimum 0 at `(a, a², ...)` for `a = 1`.
#[derive(Debug, Clone)]
pub struct Rosenbrock {
    pub a: f64,
    pub b: f64,
}

impl Objective for Rosenbrock {
    fn value(&self, p: &Point) -> Result<f64> {
        let x = coords(p, "rosenbrock")?;
        Ok(x.windows(2)
            .map(|w| self.b * (w[1] - w[0] * w[0]).powi(2) + (self.a - w[0]).powi(2))
            .sum())
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len().saturating_sub(1) {
            let r = x[i + 1] - x[i] * x[i];
            g[i] += -4.0 * self.b * x[i] * r - 2.0 * (self.a - x[i]);
            g[i + 1] += 2.0 * self.b * r;
        }
        Some(g)
    }

    fn hess_form(&self, x: &[f64], u: &[f64], w: &[f64]) -> Option<f64> {
        let mut acc = 0.0;
        for i in 0..x.len().saturating_sub(1) {
            let h_ii = 12.0 * self.b * x[i] * x[i] - 4.0 * self.b * x[i + 1] + 2.0;
            let h_ij = -4.0 * self.b * x[i];
            let h_jj = 2.0 * self.b;
            acc += h_ii * u[i] * w[i]
                + h_ij * (u[i] * w[i + 1] + u[i + 1] * w[i])
                + h_jj * u[i + 1] * w[i + 1];
        }
        Some(acc)
    }

    fn has_gradient(&self) -> bool {
        true
    }
    fn has_hessian(&self) -> bool {
        true
    }
    fn check_space(&self, space: &MetricSpace) -> Result<()> {
        match space.dim() {
            Some(d) if d >= 2 => Ok(()),
            _ => Err(Error::Domain("`rosenbrock` needs a normed space of dim >= 2".into())),
        }
    }
}

/// `Σ |x_i - c_i|`. Nonsmooth: no derivatives.
#[derive(Debug, Clone)]
pub struct AbsSum {
    pub center: Vec<f64>,
}

impl Objective for AbsSum {
    fn value(&self, p: &Point) -> Result<f64> {
        let x = coords(p, "abs_sum")?;
        Ok(x.iter().zip(&self.center).map(|(a, c)| (a - c).abs()).sum())
    }
    fn check_space(&self, space: &MetricSpace) -> Result<()> {
        check_dim(space, self.center.len(), "abs_sum")
    }
}

/// `scale · ||x - c||²` on the box `[lower, upper]`, `+inf` outside.
#[derive(Debug, Clone)]
pub struct BoxedQuadratic {
    pub center: Vec<f64>,
    pub scale: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxedQuadratic {
    fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Exact infimum over the box.
    fn infimum(&self) -> f64 {
        let per_axis = self
            .center
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(c, (lo, hi))| {
                if self.scale >= 0.0 {
                    let nearest = c.clamp(*lo, *hi);
                    (nearest - c).powi(2)
                } else {
                    (lo - c).powi(2).max((hi - c).powi(2))
                }
            });
        self.scale * per_axis.sum::<f64>()
    }
}

impl Objective for BoxedQuadratic {
    fn value(&self, p: &Point) -> Result<f64> {
        let x = coords(p, "boxed_quadratic")?;
        if !self.contains(x) {
            return Ok(f64::INFINITY);
        }
        Ok(self.scale * x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>())
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(
            x.iter()
                .zip(&self.center)
                .map(|(a, c)| 2.0 * self.scale * (a - c))
                .collect(),
        )
    }
    fn hess_form(&self, _x: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
        Some(2.0 * self.scale * dot(a, b))
    }
    fn has_gradient(&self) -> bool {
        true
    }
    fn has_hessian(&self) -> bool {
        true
    }
    fn check_space(&self, space: &MetricSpace) -> Result<()> {
        check_dim(space, self.center.len(), "boxed_quadratic")
    }
}

/// Explicit value table on a finite space.
#[derive(Debug, Clone)]
pub struct Table {
    pub values: Vec<ExtReal>,
}

impl Objective for Table {
    fn value(&self, p: &Point) -> Result<f64> {
        let i = p
            .index()
            .ok_or_else(|| Error::Domain("`table` is defined on finite spaces only".into()))?;
        self.values
            .get(i)
            .map(|v| v.to_f64())
            .ok_or_else(|| Error::Domain(format!("index {i} outside a table of {}", self.values.len())))
    }
    fn check_space(&self, space: &MetricSpace) -> Result<()> {
        match space.point_count() {
            Some(n) if n == self.values.len() => Ok(()),
            Some(n) => Err(Error::Domain(format!(
                "table has {} values but the space has {n} points",
                self.values.len()
            ))),
            None => Err(Error::Domain("`table` is defined on finite spaces only".into())),
        }
    }
}

pub fn constant(value: f64) -> Result<Functional> {
    if !value.is_finite() {
        return Err(Error::InvalidConfig("constant value must be finite".into()));
    }
    Functional::new("constant", value, Arc::new(Constant(value)))
}

pub fn quadratic(center: Vec<f64>) -> Result<Functional> {
    check_center(&center, "quadratic")?;
    Functional::new("quadratic", 0.0, Arc::new(Quadratic { center }))
}

pub fn quartic(center: Vec<f64>) -> Result<Functional> {
    check_center(&center, "quartic")?;
    Functional::new("quartic", 0.0, Arc::new(Quartic { center }))
}

pub fn rosenbrock(a: f64, b: f64) -> Result<Functional> {
    if !(a.is_finite() && b.is_finite() && b >= 0.0) {
        return Err(Error::InvalidConfig("rosenbrock needs finite a and b >= 0".into()));
    }
    Functional::new("rosenbrock", 0.0, Arc::new(Rosenbrock { a, b }))
}

pub fn abs_sum(center: Vec<f64>) -> Result<Functional> {
    check_center(&center, "abs_sum")?;
    Functional::new("abs_sum", 0.0, Arc::new(AbsSum { center }))
}

/// `scale·||x - c||²` plus the indicator of `[lower, upper]`; lower bound is the exact box minimum.
pub fn boxed_quadratic(center: Vec<f64>, scale: f64, lower: Vec<f64>, upper: Vec<f64>) -> Result<Functional> {
    check_center(&center, "boxed_quadratic")?;
    if lower.len() != center.len() || upper.len() != center.len() {
        return Err(Error::InvalidConfig(
            "boxed_quadratic: center, lower and upper must have equal lengths".into(),
        ));
    }
    if !scale.is_finite() {
        return Err(Error::InvalidConfig("boxed_quadratic: scale must be finite".into()));
    }
    if lower
        .iter()
        .zip(&upper)
        .any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi))
    {
        return Err(Error::InvalidConfig(
            "boxed_quadratic: need finite lower <= upper on every axis".into(),
        ));
    }
    let body = BoxedQuadratic {
        center,
        scale,
        lower,
        upper,
    };
    let inf = body.infimum();
    Functional::new("boxed_quadratic", inf, Arc::new(body))
}

/// Value table; lower bound is the smallest finite entry.
pub fn table(values: Vec<ExtReal>) -> Result<Functional> {
    let inf = values
        .iter()
        .filter_map(|v| v.finite())
        .min_by(f64::total_cmp)
        .ok_or(Error::NoFiniteValue)?;
    Functional::new("table", inf, Arc::new(Table { values }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantParams {
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterParams {
    pub center: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RosenbrockParams {
    #[serde(default = "RosenbrockParams::default_a")]
    pub a: f64,
    #[serde(default = "RosenbrockParams::default_b")]
    pub b: f64,
}

impl RosenbrockParams {
    fn default_a() -> f64 {
        1.0
    }
    fn default_b() -> f64 {
        100.0
    }
}

impl Default for RosenbrockParams {
    fn default() -> Self {
        RosenbrockParams { a: 1.0, b: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxedQuadraticParams {
    pub center: Vec<f64>,
    #[serde(default = "unit")]
    pub scale: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

fn unit() -> f64 {
    1.0
}

/// JSON functional section, e.g. `{"name":"quadratic","params":{"center":[0,0]}}` or
/// `{"name":"table","values":[1,"inf",0.5],"lower_bound":0.5}`.
///
/// `lower_bound` overrides the built-in bound; it must not exceed any value
/// the functional actually takes (violations surface at evaluation time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FunctionalSpec {
    Constant {
        params: ConstantParams,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower_bound: Option<f64>,
    },
    Quadratic {
        params: CenterParams,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower_bound: Option<f64>,
    },
    Quartic {
        params: CenterParams,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower_bound: Option<f64>,
    },
    Rosenbrock {
        #[serde(default)]
        params: RosenbrockParams,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower_bound: Option<f64>,
    },
    AbsSum {
        params: CenterParams,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower_bound: Option<f64>,
    },
    BoxedQuadratic {
        params: BoxedQuadraticParams,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower_bound: Option<f64>,
    },
    Table {
        values: Vec<ExtReal>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower_bound: Option<f64>,
    },
}

impl FunctionalSpec {
    pub fn build(&self) -> Result<Functional> {
        let (f, lb) = match self.clone() {
            FunctionalSpec::Constant { params, lower_bound } => (constant(params.value)?, lower_bound),
            FunctionalSpec::Quadratic { params, lower_bound } => (quadratic(params.center)?, lower_bound),
            FunctionalSpec::Quartic { params, lower_bound } => (quartic(params.center)?, lower_bound),
            FunctionalSpec::Rosenbrock { params, lower_bound } => {
                (rosenbrock(params.a, params.b)?, lower_bound)
            }
            FunctionalSpec::AbsSum { params, lower_bound } => (abs_sum(params.center)?, lower_bound),
            FunctionalSpec::BoxedQuadratic { params, lower_bound } => (
                boxed_quadratic(params.center, params.scale, params.lower, params.upper)?,
                lower_bound,
            ),
            FunctionalSpec::Table { values, lower_bound } => (table(values)?, lower_bound),
        };
        match lb {
            Some(lb) => f.with_lower_bound(lb),
            None => Ok(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::NormKind;

    #[test]
    fn rosenbrock_minimum_and_hessian_entry() {
        let r = rosenbrock(1.0, 100.0).unwrap();
        let x = [1.0, 1.0];
        assert_eq!(r.evaluate(&Point::Coords(x.to_vec())).unwrap(), ExtReal::Finite(0.0));
        assert_eq!(r.gradient(&x).unwrap(), vec![0.0, 0.0]);
        assert_eq!(r.hess_form(&x, &[1.0, 0.0], &[1.0, 0.0]).unwrap(), 802.0);
        assert_eq!(r.hess_form(&x, &[0.0, 1.0], &[0.0, 1.0]).unwrap(), 200.0);
        assert_eq!(r.hess_form(&x, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), -400.0);
    }

    #[test]
    fn boxed_lower_bounds() {
        let convex = boxed_quadratic(vec![3.0], 1.0, vec![-1.0], vec![1.0]).unwrap();
        assert_eq!(convex.lower_bound(), 4.0);
        let concave = boxed_quadratic(vec![0.0, 0.0], -1.0, vec![-1.0, -2.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(concave.lower_bound(), -5.0);
    }

    #[test]
    fn table_needs_a_finite_value() {
        assert_eq!(
            table(vec![ExtReal::PlusInfinity]).unwrap_err(),
            Error::NoFiniteValue
        );
        let t = table(vec![ExtReal::Finite(2.0), ExtReal::PlusInfinity, ExtReal::Finite(-1.0)]).unwrap();
        assert_eq!(t.lower_bound(), -1.0);
        assert_eq!(t.evaluate(&Point::Index(1)).unwrap(), ExtReal::PlusInfinity);
    }

    #[test]
    fn space_compatibility() {
        let l2 = MetricSpace::normed(2, NormKind::L2).unwrap();
        let line = MetricSpace::normed(1, NormKind::L2).unwrap();
        assert!(quadratic(vec![0.0, 0.0]).unwrap().check_space(&l2).is_ok());
        assert!(quadratic(vec![0.0]).unwrap().check_space(&l2).is_err());
        assert!(rosenbrock(1.0, 100.0).unwrap().check_space(&line).is_err());
        let fin = MetricSpace::finite(vec![], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(table(vec![ExtReal::Finite(0.0); 2]).unwrap().check_space(&fin).is_ok());
        assert!(table(vec![ExtReal::Finite(0.0); 3]).unwrap().check_space(&fin).is_err());
        assert!(quadratic(vec![0.0]).unwrap().check_space(&fin).is_err());
    }

    #[test]
    fn spec_json() {
        let spec: FunctionalSpec =
            serde_json::from_str(r#"{"name":"table","values":[3.0,1.0,"inf"],"lower_bound":0.5}"#).unwrap();
        let f = spec.build().unwrap();
        assert_eq!(f.lower_bound(), 0.5);
        let spec: FunctionalSpec = serde_json::from_str(r#"{"name":"rosenbrock"}"#).unwrap();
        assert_eq!(spec.build().unwrap().name(), "rosenbrock");
        let spec: FunctionalSpec =
            serde_json::from_str(r#"{"name":"quadratic","params":{"center":[1,2]}}"#).unwrap();
        let f = spec.build().unwrap();
        assert_eq!(f.evaluate(&Point::Coords(vec![1.0, 2.0])).unwrap(), ExtReal::Finite(0.0));
        let err = serde_json::from_str::<FunctionalSpec>(r#"{"name":"quadratic","params":{}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("center"), "{err}");
        assert!(serde_json::from_str::<FunctionalSpec>(r#"{"name":"cubic"}"#).is_err());
    }
}
