//! Extended-real-valued functionals `F: U -> R ∪ {+inf}` with optional analytic
//! derivatives, central finite differences, and the exact second-order Taylor
//! remainder.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::space::{offset, MetricSpace, Point};

pub mod zoo;

/// A value in `R ∪ {+inf}`. Never NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PlusInfinity,
}

impl ExtReal {
    /// Rejects NaN and `-inf`; maps `+inf` to [`ExtReal::PlusInfinity`].
    pub fn new(x: f64) -> Result<Self> {
        if x.is_nan() {
            Err(Error::Evaluation("value is NaN".into()))
        } else if x == f64::INFINITY {
            Ok(ExtReal::PlusInfinity)
        } else if x == f64::NEG_INFINITY {
            Err(Error::Evaluation("value is -inf".into()))
        } else {
            Ok(ExtReal::Finite(x))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::PlusInfinity => None,
        }
    }

    /// `+inf` becomes `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_f64().total_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PlusInfinity => f.write_str("+inf"),
        }
    }
}

/// JSON: a number, or the string `"inf"` for `+inf`.
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => serializer.serialize_f64(*x),
            ExtReal::PlusInfinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(x) => ExtReal::new(x).map_err(serde::de::Error::custom),
            Raw::Str(s) if s == "inf" || s == "+inf" => Ok(ExtReal::PlusInfinity),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

/// The mathematical content of a functional. Implementors must be pure.
pub trait Objective: Send + Sync + fmt::Debug {
    /// Raw value at `p`; `f64::INFINITY` encodes `+inf`.
    fn value(&self, p: &Point) -> Result<f64>;

    /// Analytic gradient at `x`, if the functional is differentiable.
    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Analytic second variation `δ²F(x)(a, b)`.
    fn hess_form(&self, _x: &[f64], _a: &[f64], _b: &[f64]) -> Option<f64> {
        None
    }

    fn has_gradient(&self) -> bool {
        false
    }

    fn has_hessian(&self) -> bool {
        false
    }

    /// Rejects spaces the functional is not defined on.
    fn check_space(&self, _space: &MetricSpace) -> Result<()> {
        Ok(())
    }
}

/// A named functional together with a known finite lower bound.
#[derive(Debug, Clone)]
pub struct Functional {
    name: String,
    lower_bound: f64,
    objective: Arc<dyn Objective>,
}

impl Functional {
    pub fn new(name: impl Into<String>, lower_bound: f64, objective: Arc<dyn Objective>) -> Result<Self> {
        if !lower_bound.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "lower_bound must be finite, got {lower_bound}"
            )));
        }
        Ok(Functional {
            name: name.into(),
            lower_bound,
            objective,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// Same functional, different declared lower bound.
    pub fn with_lower_bound(&self, lower_bound: f64) -> Result<Self> {
        Functional::new(self.name.clone(), lower_bound, self.objective.clone())
    }

    pub fn objective(&self) -> &dyn Objective {
        self.objective.as_ref()
    }

    pub fn has_gradient(&self) -> bool {
        self.objective.has_gradient()
    }

    pub fn has_hessian(&self) -> bool {
        self.objective.has_hessian()
    }

    pub fn check_space(&self, space: &MetricSpace) -> Result<()> {
        self.objective.check_space(space)
    }

    /// `F(p)`. NaN is an error, and so is any finite value below `lower_bound`.
    pub fn evaluate(&self, p: &Point) -> Result<ExtReal> {
        let raw = self.objective.value(p)?;
        let v = ExtReal::new(raw)
            .map_err(|e| Error::Evaluation(format!("functional `{}`: {e}", self.name)))?;
        if let ExtReal::Finite(x) = v {
            if x < self.lower_bound {
                return Err(Error::LowerBoundViolated {
                    name: self.name.clone(),
                    value: x,
                    lower_bound: self.lower_bound,
                });
            }
        }
        Ok(v)
    }

    /// `F(p)` where `p` must have a finite value.
    pub fn evaluate_finite(&self, p: &Point) -> Result<f64> {
        self.evaluate(p)?.finite().ok_or_else(|| {
            Error::Domain(format!("functional `{}` is +inf at {p:?}", self.name))
        })
    }

    fn at(&self, x: &[f64]) -> Result<f64> {
        self.evaluate(&Point::Coords(x.to_vec()))?
            .finite()
            .ok_or_else(|| Error::DerivativeUndefined(format!("F = +inf at probe {x:?}")))
    }

    fn probes(&self, x: &[f64], phi: &[f64], t: f64) -> Result<(f64, f64, f64)> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidConfig(format!("step t must be positive, got {t}")));
        }
        if phi.len() != x.len() {
            return Err(Error::Domain("direction and point dimensions differ".into()));
        }
        let plus = self.at(&offset(x, t, phi))?;
        let centre = self.at(x)?;
        let minus = self.at(&offset(x, -t, phi))?;
        Ok((minus, centre, plus))
    }

    /// Central difference `(F(x + tφ) - F(x - tφ)) / 2t`, approximating `<δF(x), φ>`.
    pub fn gateaux_fd(&self, x: &[f64], phi: &[f64], t: f64) -> Result<f64> {
        let (minus, _, plus) = self.probes(x, phi, t)?;
        Ok((plus - minus) / (2.0 * t))
    }

    /// `(F(x + tφ) - 2F(x) + F(x - tφ)) / t²`, approximating `δ²F(x)(φ, φ)`.
    pub fn second_variation_fd(&self, x: &[f64], phi: &[f64], t: f64) -> Result<f64> {
        let (minus, centre, plus) = self.probes(x, phi, t)?;
        Ok((plus - 2.0 * centre + minus) / (t * t))
    }

    /// Analytic gradient at a point with finite value.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        if !self.has_gradient() {
            return Err(Error::Unsupported(format!(
                "functional `{}` has no analytic gradient",
                self.name
            )));
        }
        self.at(x)?;
        self.objective
            .gradient(x)
            .ok_or_else(|| Error::Unsupported(format!("gradient of `{}` unavailable", self.name)))
    }

    /// Analytic `δ²F(x)(a, b)` at a point with finite value.
    pub fn hess_form(&self, x: &[f64], a: &[f64], b: &[f64]) -> Result<f64> {
        if !self.has_hessian() {
            return Err(Error::Unsupported(format!(
                "functional `{}` has no analytic second variation",
                self.name
            )));
        }
        self.at(x)?;
        self.objective.hess_form(x, a, b).ok_or_else(|| {
            Error::Unsupported(format!("second variation of `{}` unavailable", self.name))
        })
    }

    /// Exact remainder `F(x+εφ) - F(x) - ε<δF(x),φ> - ½ε²δ²F(x)(φ,φ)`, the
    /// computable stand-in for the `o(ε²)` term of the second-order expansion.
    pub fn taylor_remainder(&self, x: &[f64], phi: &[f64], eps: f64) -> Result<f64> {
        let grad = self.gradient(x)?;
        let hess = self.hess_form(x, phi, phi)?;
        let f0 = self.at(x)?;
        let f1 = self.at(&offset(x, eps, phi))?;
        let slope: f64 = grad.iter().zip(phi).map(|(g, p)| g * p).sum();
        Ok(f1 - f0 - eps * slope - 0.5 * eps * eps * hess)
    }
}

#[cfg(test)]
mod tests {
    use super::zoo;
    use super::*;

    fn pt(x: &[f64]) -> Point {
        Point::Coords(x.to_vec())
    }

    #[test]
    fn ext_real_ordering_and_json() {
        assert!(ExtReal::Finite(1e300) < ExtReal::PlusInfinity);
        assert!(ExtReal::Finite(-3.0) < ExtReal::Finite(2.0));
        assert!(ExtReal::new(f64::NAN).is_err());
        assert!(ExtReal::new(f64::NEG_INFINITY).is_err());
        assert_eq!(ExtReal::new(f64::INFINITY).unwrap(), ExtReal::PlusInfinity);
        let v: Vec<ExtReal> = serde_json::from_str(r#"[1.5, "inf", 2]"#).unwrap();
        assert_eq!(v, vec![ExtReal::Finite(1.5), ExtReal::PlusInfinity, ExtReal::Finite(2.0)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[1.5,"inf",2.0]"#);
        assert!(serde_json::from_str::<ExtReal>(r#""-inf""#).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let zero = zoo::constant(0.0).unwrap();
        assert_eq!(zero.evaluate(&pt(&[4.0, -1.0])).unwrap(), ExtReal::Finite(0.0));
        let q = zoo::quadratic(vec![0.0, 0.0]).unwrap();
        assert_eq!(q.evaluate(&pt(&[1.0, 2.0])).unwrap(), ExtReal::Finite(5.0));
        let boxed = zoo::boxed_quadratic(vec![0.0], 1.0, vec![-1.0], vec![1.0]).unwrap();
        assert_eq!(boxed.evaluate(&pt(&[1.5])).unwrap(), ExtReal::PlusInfinity);
        assert_eq!(boxed.evaluate(&pt(&[0.5])).unwrap(), ExtReal::Finite(0.25));
    }

    #[derive(Debug)]
    struct Nan;
    impl Objective for Nan {
        fn value(&self, _p: &Point) -> Result<f64> {
            Ok(f64::NAN)
        }
    }

    #[test]
    fn nan_is_an_evaluation_error() {
        let f = Functional::new("nan", 0.0, Arc::new(Nan)).unwrap();
        assert!(matches!(f.evaluate(&pt(&[0.0])), Err(Error::Evaluation(_))));
    }

    #[test]
    fn lower_bound_is_enforced() {
        let q = zoo::quadratic(vec![0.0]).unwrap().with_lower_bound(0.5).unwrap();
        assert!(matches!(
            q.evaluate(&pt(&[0.0])),
            Err(Error::LowerBoundViolated { .. })
        ));
        assert!(q.evaluate(&pt(&[1.0])).is_ok());
    }

    #[test]
    fn gateaux_examples() {
        let zero = zoo::constant(0.0).unwrap();
        assert_eq!(zero.gateaux_fd(&[0.3, 0.1], &[0.6, 0.8], 1e-3).unwrap(), 0.0);
        let q = zoo::quadratic(vec![0.0, 0.0]).unwrap();
        let d = q.gateaux_fd(&[1.0, 0.0], &[1.0, 0.0], 1e-5).unwrap();
        assert!((d - 2.0).abs() <= 1e-9, "{d}");
        let r = zoo::rosenbrock(1.0, 100.0).unwrap();
        for phi in [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]] {
            let d = r.gateaux_fd(&[1.0, 1.0], &phi, 1e-5).unwrap();
            assert!(d.abs() <= 1e-6, "{d}");
        }
    }

    #[test]
    fn second_variation_examples() {
        let zero = zoo::constant(0.0).unwrap();
        assert_eq!(zero.second_variation_fd(&[1.0], &[1.0], 1e-4).unwrap(), 0.0);
        let q = zoo::quadratic(vec![0.0, 0.0]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = q.second_variation_fd(&[0.7, -2.0], &[s, s], 1e-4).unwrap();
        assert!((h - 2.0).abs() <= 1e-6, "{h}");
        // d²/dx² of the Rosenbrock function is 1200x² - 400y + 2, i.e. 802 at (1, 1)
        let r = zoo::rosenbrock(1.0, 100.0).unwrap();
        let h = r.second_variation_fd(&[1.0, 1.0], &[1.0, 0.0], 1e-4).unwrap();
        assert!((h - 802.0).abs() <= 0.1, "{h}");
    }

    #[test]
    fn fd_probe_at_infinity_is_an_error() {
        let boxed = zoo::boxed_quadratic(vec![0.0], 1.0, vec![-1.0], vec![1.0]).unwrap();
        assert!(matches!(
            boxed.gateaux_fd(&[1.0], &[1.0], 1e-3),
            Err(Error::DerivativeUndefined(_))
        ));
        assert!(matches!(
            boxed.second_variation_fd(&[-1.0], &[1.0], 1e-3),
            Err(Error::DerivativeUndefined(_))
        ));
    }

    #[test]
    fn taylor_remainder_examples() {
        let q = zoo::quadratic(vec![0.5, -1.0]).unwrap();
        let r = q.taylor_remainder(&[2.0, 3.0], &[0.6, -0.8], 0.3).unwrap();
        assert!(r.abs() <= 1e-12, "{r}");
        // (1.1)^4 - 1 - 0.1*4 - 0.005*12 = 0.0041
        let quartic = zoo::quartic(vec![0.0]).unwrap();
        let r = quartic.taylor_remainder(&[1.0], &[1.0], 0.1).unwrap();
        assert!((r - 0.0041).abs() <= 1e-10, "{r}");
        let abs = zoo::abs_sum(vec![0.0]).unwrap();
        assert!(matches!(
            abs.taylor_remainder(&[1.0], &[1.0], 0.1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn remainder_ratio_decays() {
        let smooth = [
            zoo::quartic(vec![0.0, 0.0]).unwrap(),
            zoo::rosenbrock(1.0, 100.0).unwrap(),
        ];
        for f in &smooth {
            let x = [0.8, 0.5];
            let phi = [0.6, 0.8];
            let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3]
                .iter()
                .map(|&e| f.taylor_remainder(&x, &phi, e).unwrap().abs() / (e * e))
                .collect();
            assert!(ratios[1] < ratios[0] && ratios[2] < ratios[1], "{}: {ratios:?}", f.name());
        }
    }

    #[test]
    fn missing_derivatives_are_unsupported() {
        let abs = zoo::abs_sum(vec![0.0, 0.0]).unwrap();
        assert!(matches!(abs.gradient(&[1.0, 1.0]), Err(Error::Unsupported(_))));
        assert!(matches!(
            abs.hess_form(&[1.0, 1.0], &[1.0, 0.0], &[1.0, 0.0]),
            Err(Error::Unsupported(_))
        ));
    }
}
