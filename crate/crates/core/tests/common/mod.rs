#![allow(dead_code, clippy::needless_range_loop)]

use ekeland::functional::zoo;
use ekeland::{ExtReal, Functional, MetricSpace, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random finite metric space and value table with a valid start point.
pub struct FiniteFixture {
    pub space: MetricSpace,
    pub functional: Functional,
    pub values: Vec<ExtReal>,
    pub start: Point,
    pub epsilon: f64,
}

/// Shortest-path closure of random symmetric weights, so the triangle inequality holds.
pub fn random_metric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = scale * (0.05 + rng.random::<f64>());
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    // symmetrize exactly (the closure is symmetric up to summation order)
    for i in 0..n {
        for j in (i + 1)..n {
            let m = d[i][j].min(d[j][i]);
            d[i][j] = m;
            d[j][i] = m;
        }
    }
    d
}

pub fn random_finite_fixture(seed: u64, n: usize, epsilon: f64) -> FiniteFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist_scale = [0.1, 1.0, 5.0][rng.random_range(0..3)];
    let dist = random_metric(&mut rng, n, dist_scale);
    // values on the scale of epsilon so several points qualify as starts
    let value_scale = epsilon * [0.5, 3.0, 20.0][rng.random_range(0..3)];
    let mut values: Vec<ExtReal> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < 0.1 {
                ExtReal::PlusInfinity
            } else {
                ExtReal::Finite(value_scale * rng.random::<f64>())
            }
        })
        .collect();
    if values.iter().all(|v| !v.is_finite()) {
        values[0] = ExtReal::Finite(0.0);
    }
    let space = MetricSpace::finite(vec![], dist).unwrap();
    let functional = zoo::table(values.clone()).unwrap();
    let inf = functional.lower_bound();
    let starts: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.finite().is_some_and(|x| x <= inf + epsilon))
        .map(|(i, _)| i)
        .collect();
    // prefer the worst admissible start to force some descent
    let start = *starts
        .iter()
        .max_by(|a, b| values[**a].cmp(&values[**b]).then(b.cmp(a)))
        .unwrap();
    FiniteFixture {
        space,
        functional,
        values,
        start: Point::Index(start),
        epsilon,
    }
}

/// `center + r·φ` with `φ` a seeded unit vector, `r` chosen so that `F(start) = target`
/// (found by bisection on `r`; `F` must increase along the ray near the center).
pub fn start_at_level(f: &Functional, center: &[f64], target: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phi: Vec<f64> = (0..center.len()).map(|_| rng.random::<f64>() - 0.5).collect();
    let n = phi.iter().map(|x| x * x).sum::<f64>().sqrt();
    phi.iter_mut().for_each(|x| *x /= n);
    let at = |r: f64| -> f64 {
        let x: Vec<f64> = center.iter().zip(&phi).map(|(c, p)| c + r * p).collect();
        f.evaluate(&Point::Coords(x)).unwrap().to_f64()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while at(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    center.iter().zip(&phi).map(|(c, p)| c + lo * p).collect()
}

/// Prints and records one acceptance line.
pub fn report(results: &mut Vec<(String, bool)>, name: &str, ok: bool, detail: String) {
    println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    results.push((name.to_string(), ok));
}
