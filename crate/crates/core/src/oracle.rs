//! Brute-force ground truth on finite spaces.

use crate::error::{Error, Result};
use crate::functional::{ExtReal, Functional};
use crate::space::{MetricSpace, Point};

fn require_finite(space: &MetricSpace) -> Result<usize> {
    space
        .point_count()
        .ok_or_else(|| Error::Unsupported("the oracle needs a finite space".into()))
}

fn values(f: &Functional, space: &MetricSpace) -> Result<Vec<ExtReal>> {
    space.points().map(|p| f.evaluate(&p)).collect()
}

/// Exact `(min F, argmin)`; ties go to the lowest index.
pub fn exact_inf(f: &Functional, space: &MetricSpace) -> Result<(f64, Point)> {
    require_finite(space)?;
    let mut best: Option<(f64, usize)> = None;
    for (i, v) in values(f, space)?.into_iter().enumerate() {
        if let ExtReal::Finite(x) = v {
            if best.is_none_or(|(b, _)| x < b) {
                best = Some((x, i));
            }
        }
    }
    best.map(|(x, i)| (x, Point::Index(i)))
        .ok_or(Error::NoFiniteValue)
}

/// Sorted indices `v` with `F(v)` finite and `F(v) <= F(w) + ε·d(v, w)` for every `w`.
pub fn ekeland_set(f: &Functional, space: &MetricSpace, eps: f64) -> Result<Vec<usize>> {
    let n = require_finite(space)?;
    let vals = values(f, space)?;
    let mut out = Vec::new();
    for v in 0..n {
        let ExtReal::Finite(fv) = vals[v] else { continue };
        let mut ok = true;
        for (w, fw) in vals.iter().enumerate() {
            if let ExtReal::Finite(fw) = fw {
                let d = space.distance(&Point::Index(v), &Point::Index(w))?;
                if !(fv <= fw + eps * d) {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            out.push(v);
        }
    }
    Ok(out)
}

/// `v ∈ ekeland_set(ε)`, `F(v) <= F(u)` and `d(u, v) <= 1`.
pub fn verify_against_oracle(f: &Functional, space: &MetricSpace, u: &Point, eps: f64, v: &Point) -> Result<bool> {
    let set = ekeland_set(f, space, eps)?;
    let Some(vi) = v.index() else {
        return Err(Error::Domain("oracle points are indices".into()));
    };
    space.check_point(v)?;
    let fu = f.evaluate(u)?;
    let fv = f.evaluate(v)?;
    Ok(set.binary_search(&vi).is_ok() && fv <= fu && space.distance(u, v)? <= 1.0)
}
