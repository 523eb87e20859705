mod common;

use ekeland::certificate::{check_c3, check_c4, check_remark, WitnessSource};
use ekeland::functional::zoo;
use ekeland::oracle::{ekeland_set, exact_inf};
use ekeland::solver::{run, run_rescaled};
use ekeland::space::offset;
use ekeland::{
    certify, CandidateSampler, Certificate, Functional, IterationTrace, ItemId, MetricSpace, Mode, NormKind, Point,
    SolverConfig, Status, VerifierConfig,
};
use proptest::prelude::*;

use common::random_finite_fixture;

fn norm_kind() -> impl Strategy<Value = NormKind> {
    prop_oneof![Just(NormKind::L1), Just(NormKind::L2), Just(NormKind::Linf)]
}

fn vec_pair(dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-3.0..3.0f64, dim),
        prop::collection::vec(-3.0..3.0f64, dim),
    )
}

fn smooth_zoo(dim: usize) -> Vec<Functional> {
    let center: Vec<f64> = (0..dim).map(|i| 0.25 * i as f64 - 0.5).collect();
    let mut out = vec![
        zoo::constant(-1.0).unwrap(),
        zoo::quadratic(center.clone()).unwrap(),
        zoo::quartic(center).unwrap(),
    ];
    if dim >= 2 {
        out.push(zoo::rosenbrock(1.0, 100.0).unwrap());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normed_distance_is_a_metric(dim in 1usize..6, norm in norm_kind(), seed in any::<u64>(), scale in 0.1..4.0f64) {
        let s = MetricSpace::normed(dim, norm).unwrap().with_metric_scale(scale).unwrap();
        let pts: Vec<Point> = s
            .sample_directions(3, seed)
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(k, v)| Point::Coords(v.iter().map(|x| x * (k + 1) as f64).collect()))
            .collect();
        let d = |a: &Point, b: &Point| s.distance(a, b).unwrap();
        prop_assert_eq!(d(&pts[0], &pts[1]), d(&pts[1], &pts[0]));
        prop_assert_eq!(d(&pts[2], &pts[2]), 0.0);
        prop_assert!(d(&pts[0], &pts[2]) <= (d(&pts[0], &pts[1]) + d(&pts[1], &pts[2])) * (1.0 + 1e-12));
    }

    #[test]
    fn holder_inequality(dim in 1usize..6, norm in norm_kind(), (g, phi) in (1usize..6).prop_flat_map(vec_pair)) {
        let dim = dim.min(g.len());
        let s = MetricSpace::normed(dim, norm).unwrap();
        let (g, phi) = (&g[..dim], &phi[..dim]);
        let pairing: f64 = g.iter().zip(phi).map(|(a, b)| a * b).sum();
        let bound = s.dual_norm(g).unwrap() * s.norm(phi).unwrap();
        prop_assert!(pairing.abs() <= bound * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn second_variation_is_quadratic_in_the_direction(
        (x, phi) in (2usize..5).prop_flat_map(vec_pair),
        t in -3.0..3.0f64,
    ) {
        for f in smooth_zoo(x.len()) {
            let scaled: Vec<f64> = phi.iter().map(|p| t * p).collect();
            let h1 = f.hess_form(&x, &phi, &phi).unwrap();
            let ht = f.hess_form(&x, &scaled, &scaled).unwrap();
            prop_assert!((ht - t * t * h1).abs() <= 1e-10 * (1.0 + ht.abs()), "{}: {} vs {}", f.name(), ht, t * t * h1);
        }
    }

    #[test]
    fn values_respect_the_lower_bound((x, _) in (1usize..6).prop_flat_map(vec_pair)) {
        let p = Point::Coords(x.clone());
        for f in smooth_zoo(x.len()) {
            prop_assert!(f.evaluate(&p).unwrap().to_f64() >= f.lower_bound());
        }
        let abs = zoo::abs_sum(vec![0.0; x.len()]).unwrap();
        prop_assert!(abs.evaluate(&p).unwrap().to_f64() >= abs.lower_bound());
        let boxed = zoo::boxed_quadratic(vec![0.0; x.len()], -1.0, vec![-1.0; x.len()], vec![1.0; x.len()]).unwrap();
        prop_assert!(boxed.evaluate(&p).unwrap().to_f64() >= boxed.lower_bound());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oracle_sets_are_monotone_and_contain_the_minimizer(seed in any::<u64>(), n in 2usize..60, eps in 1e-3..10.0f64) {
        let fx = random_finite_fixture(seed, n, eps);
        let (_, argmin) = exact_inf(&fx.functional, &fx.space).unwrap();
        let small = ekeland_set(&fx.functional, &fx.space, eps).unwrap();
        let large = ekeland_set(&fx.functional, &fx.space, 2.0 * eps).unwrap();
        prop_assert!(small.contains(&argmin.index().unwrap()));
        prop_assert!(small.iter().all(|i| large.contains(i)));
    }

    #[test]
    fn exhaustive_c3_is_exactly_oracle_membership(seed in any::<u64>(), n in 2usize..60, eps in 1e-3..10.0f64) {
        let fx = random_finite_fixture(seed, n, eps);
        let set = ekeland_set(&fx.functional, &fx.space, eps).unwrap();
        for (i, value) in fx.values.iter().enumerate() {
            if !value.is_finite() {
                continue;
            }
            let c3 = check_c3(&fx.functional, &fx.space, &Point::Index(i), eps, &WitnessSource::Exhaustive).unwrap();
            let margin = c3.margin.unwrap();
            prop_assert_eq!(margin >= 0.0, set.contains(&i), "point {} margin {}", i, margin);
            let doubled = check_c3(&fx.functional, &fx.space, &Point::Index(i), 2.0 * eps, &WitnessSource::Exhaustive).unwrap();
            prop_assert!(doubled.margin.unwrap() >= margin);
        }
    }

    #[test]
    fn certificates_round_trip_through_json(seed in any::<u64>(), n in 2usize..40) {
        let fx = random_finite_fixture(seed, n, 0.1);
        let cfg = SolverConfig::new(0.1, CandidateSampler::Exhaustive);
        let (v, trace) = run(&fx.functional, &fx.space, &fx.start, &cfg).unwrap();
        let cert = certify(&fx.functional, &fx.space, &fx.start, &v, 0.1, Mode::Standard, &VerifierConfig::default(), &trace.points).unwrap();
        let back: Certificate = serde_json::from_str(&serde_json::to_string(&cert).unwrap()).unwrap();
        prop_assert_eq!(&back, &cert);
        let back: IterationTrace = serde_json::from_str(&serde_json::to_string(&trace).unwrap()).unwrap();
        prop_assert_eq!(&back, &trace);
        // certifying again gives the same answer
        let again = certify(&fx.functional, &fx.space, &fx.start, &v, 0.1, Mode::Standard, &VerifierConfig::default(), &trace.points).unwrap();
        prop_assert_eq!(again, cert);
    }

    #[test]
    fn perturbation_on_probes_implies_the_difference_quotient_check(
        x in prop::collection::vec(-0.2..0.2f64, 2),
        eps in 0.05..1.0f64,
        norm in norm_kind(),
    ) {
        let f = zoo::quadratic(vec![0.0, 0.0]).unwrap();
        let s = MetricSpace::normed(2, norm).unwrap();
        let verifier = VerifierConfig::default();
        let dirs = verifier.test_directions(&s).unwrap();
        let probes: Vec<Point> = dirs
            .iter()
            .flat_map(|phi| [1.0, -1.0].map(|sign| Point::Coords(offset(&x, sign * verifier.fd_step, phi))))
            .collect();
        let v = Point::Coords(x.clone());
        let c3 = check_c3(&f, &s, &v, eps, &WitnessSource::Sampled { count: 0, seed: 0, extra: probes }).unwrap();
        let c4 = check_c4(&f, &s, &v, eps, &dirs, verifier.fd_step).unwrap();
        if c3.margin.unwrap() >= 0.0 {
            // the analytic part may still be the minimum; any direction witness must be nonnegative
            if let Some(ekeland::certificate::Witness::Direction { margin, .. }) = &c4.worst_witness {
                prop_assert!(*margin >= -1e-9, "difference quotient margin {}", margin);
            }
        }
    }
}

#[test]
fn remark_perturbation_equals_c3_at_the_tight_tolerance() {
    // ε·d₁ with d₁ = ε^{1/2}·d is ε^{3/2}·d, both in the certificate and in the solver trace
    for seed in 0..40u64 {
        let eps: f64 = [0.25, 0.04, 0.5][seed as usize % 3];
        let tight = eps.powf(1.5);
        let fx = random_finite_fixture(seed, 50, eps * eps * 0.999);
        let cfg = SolverConfig::new(eps, CandidateSampler::Exhaustive);
        let (v, trace) = run_rescaled(&fx.functional, &fx.space, &fx.start, &cfg).unwrap();
        let items = check_remark(&fx.functional, &fx.space, &fx.start, &v, eps, &VerifierConfig::default(), &trace.points)
            .unwrap();
        let r3 = items.iter().find(|i| i.id == ItemId::R3).unwrap();
        let c3 = check_c3(&fx.functional, &fx.space, &v, tight, &WitnessSource::Exhaustive).unwrap();
        let (a, b) = (r3.margin.unwrap(), c3.margin.unwrap());
        assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "seed {seed}: R3 {a} vs C3 {b}");
        assert_eq!(r3.status, Status::Pass);

        let direct = SolverConfig::new(tight, CandidateSampler::Exhaustive);
        let (w, _) = run(&fx.functional, &fx.space, &fx.start, &direct).unwrap();
        assert_eq!(v, w, "seed {seed}: rescaled and tight-tolerance runs disagree");
    }
}

#[test]
fn remark_items_on_a_hand_checked_line() {
    // F(x) = x², u = 0.2ε, ε = 0.09: F(u) = 3.24e-4 < ε² = 8.1e-3
    let f = zoo::quadratic(vec![0.0]).unwrap();
    let s = MetricSpace::normed(1, NormKind::L2).unwrap();
    let eps = 0.09;
    let u = Point::Coords(vec![0.2 * eps]);
    let cfg = SolverConfig::new(eps, CandidateSampler::local_ball(0));
    let (v, trace) = run_rescaled(&f, &s, &u, &cfg).unwrap();
    let items = check_remark(&f, &s, &u, &v, eps, &VerifierConfig::default(), &trace.points).unwrap();
    for item in &items {
        assert_eq!(item.status, Status::Pass, "{:?}", item);
    }
    let r1 = items.iter().find(|i| i.id == ItemId::R1).unwrap();
    assert!(r1.margin.unwrap() > 0.0);
}
