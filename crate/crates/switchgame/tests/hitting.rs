use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use switchgame::hitting::*;
use switchgame::montecarlo::{simulate_payoff, Rule, SimConfig, ThresholdStrategy};
use switchgame::sample::{random_spec, SampleRanges};
use switchgame::{build, Cell, CostCondition, GameSpec, OrderCase, Regime};

fn spec(b: f64, s: f64, r: f64, g: f64) -> GameSpec {
    GameSpec::uniform(b, s, r, g).with_cost_max(0.4, 0.3).with_cost_min(0.2, 0.5)
}

proptest! {
    #[test]
    fn resolvent_identity(b in -0.3f64..0.3, s in 0.1f64..1.5, r in 0.5f64..2.0, g in 0.2f64..0.8,
                          x in 0.2f64..5.0, a in 0.2f64..5.0) {
        let p = PassageFunctionals::new(&spec(b * r, s, r, g), Regime::One, Regime::One).unwrap();
        let lhs = p.f1(x, a).unwrap() + p.r1(x, a).unwrap() * p.no_switch(a);
        prop_assert!((lhs - p.no_switch(x)).abs() <= 1e-12 * p.no_switch(x).max(1.0));
    }

    #[test]
    fn functionals_bounded(b in -0.3f64..0.3, s in 0.1f64..1.5, r in 0.5f64..2.0,
                           a in 0.2f64..0.95, bb in 1.05f64..5.0) {
        let p = PassageFunctionals::new(&spec(b * r, s, r, 0.5), Regime::One, Regime::One).unwrap();
        let x = 1.0;
        for v in [p.r1(x, a).unwrap(), p.r1(x, bb).unwrap(), p.r2(x, a, bb).unwrap(), p.r3(x, a, bb).unwrap(), p.r3(x, bb, a).unwrap()] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(p.r3(x, a, bb).unwrap() + p.r3(x, bb, a).unwrap() <= 1.0);
        prop_assert!(p.r3(x, a, bb).unwrap() <= p.r1(x, a).unwrap());
        for v in [p.f1(x, a).unwrap(), p.f2(x, a, bb).unwrap(), p.f3(x, a, bb).unwrap()] {
            prop_assert!(v >= -1e-15);
        }
        prop_assert!(p.f3(x, a, bb).unwrap() <= p.f1(x, a).unwrap() + 1e-15);
    }

    #[test]
    fn strong_markov_factorization(s in 0.1f64..1.5, a in 0.2f64..3.0, bb in 0.2f64..3.0) {
        let p = PassageFunctionals::new(&spec(0.1, s, 1.0, 0.5), Regime::One, Regime::One).unwrap();
        prop_assert_eq!(p.r2(1.0, a, bb).unwrap(), p.r1(1.0, a).unwrap() * p.r1(a, bb).unwrap());
        prop_assert_eq!(p.f2(1.0, a, bb).unwrap(), p.r1(1.0, a).unwrap() * p.f1(a, bb).unwrap());
    }
}

#[test]
fn continuous_across_barriers() {
    let p = PassageFunctionals::new(&spec(0.1, 0.6, 1.2, 0.4), Regime::One, Regime::One).unwrap();
    let (a, b) = (0.7, 1.6);
    let eps = 1e-12;
    let jump = |f: &dyn Fn(f64) -> f64, at: f64| (f(at * (1.0 + eps)) - f(at * (1.0 - eps))).abs();
    assert!(jump(&|x| p.r1(x, a).unwrap(), a) < 1e-9);
    assert!(jump(&|x| p.f1(x, a).unwrap(), a) < 1e-9);
    assert!(jump(&|x| p.r2(x, a, b).unwrap(), a) < 1e-9);
    assert!(jump(&|x| p.f2(x, a, b).unwrap(), a) < 1e-9);
    // Two-sided functionals at their edges.
    assert!((p.r3(a * (1.0 + eps), a, b).unwrap() - 1.0).abs() < 1e-9);
    assert!(p.r3(b * (1.0 - eps), a, b).unwrap() < 1e-9);
    assert!(p.f3(a * (1.0 + eps), a, b).unwrap() < 1e-9);
    assert!(p.f3(b * (1.0 - eps), a, b).unwrap() < 1e-9);
}

#[test]
fn limits_of_f1() {
    let p = PassageFunctionals::new(&spec(0.0, 0.5, 1.0, 0.5), Regime::One, Regime::One).unwrap();
    let v = p.no_switch(2.0);
    assert!((p.f1(2.0, 1e9).unwrap() - v).abs() < 1e-6 * v);
    assert!((p.f1(2.0, 1e-9).unwrap() - v).abs() < 1e-6 * v);
    assert!(p.r1(2.0, 1e9).unwrap() < 1e-12);
}

#[test]
fn single_threshold_minimizer_matches_closed_form() {
    let cell = Cell { case: OrderCase::ColGt, condition: CostCondition::B1 };
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let spec = random_spec(cell, &SampleRanges::default(), &mut rng);
        let sol = build(&spec, cell.case, cell.condition).unwrap();
        let xs = sol.thresholds.x_star.unwrap();
        let jv = JValues::new(&spec, RegionTuple::new(0.0, xs, f64::INFINITY).unwrap()).unwrap();
        for k in 1..60 {
            let x = xs * 0.05 * k as f64;
            for i in Regime::ALL {
                for j in Regime::ALL {
                    let (a, b) = (jv.at(i, j, x).unwrap(), sol.value(i, j).value(x));
                    assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0), "{i}{j} x={x}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn cycle_fixed_point() {
    let mut s = spec(0.0, 0.4, 1.5, 0.5);
    s.drift = [[0.1, -0.1], [0.2, 0.0]];
    s.vol = [[0.4, 0.3], [0.5, 0.35]];
    for t in [(0.7, 1.3, 1.8), (0.2, 0.9, 4.0), (0.0, 1.1, 1.5), (0.5, f64::INFINITY, 2.0)] {
        let jv = JValues::new(&s, RegionTuple::new(t.0, t.1, t.2).unwrap()).unwrap();
        assert!(jv.fixed_point_residual().unwrap() < 1e-10);
    }
}

#[test]
fn payoff_matches_simulation() {
    // One volatility so the discrete-monitoring shift is the same for every
    // barrier; drifts differ so the regimes pay differently.
    let sigma = 0.4;
    let mut s = spec(0.0, sigma, 1.5, 0.5).with_x0(1.0);
    s.drift = [[0.1, -0.1], [0.2, 0.0]];
    let (y21, xp, x12) = (0.7, 1.3, 1.8);
    let cfg = SimConfig { paths: 10_000, dt: 1e-3, horizon: 20.0 / 1.5, seed: 17, antithetic: false };
    let strategy = ThresholdStrategy { max: [Rule::Above(x12), Rule::Below(y21)], min: [Rule::Above(xp), Rule::Never] };
    // Grid monitoring acts like barriers moved outward by 0.5826 σ √dt.
    let shift = (0.5826 * sigma * cfg.dt.sqrt()).exp();
    let jv = JValues::new(&s, RegionTuple::new(y21 / shift, xp * shift, x12 * shift).unwrap()).unwrap();
    for i in Regime::ALL {
        for j in Regime::ALL {
            let est = simulate_payoff(&s, &strategy, (i, j), &cfg).unwrap().estimate;
            let v = jv.at(i, j, 1.0).unwrap();
            assert!(est.z_score(v) < 3.0, "({i},{j}) mc {} ± {} vs {v}", est.mean, est.std_error);
        }
    }
}

fn degenerate_grids(x_star: f64, n: usize) -> SearchGrids {
    let mut y21 = vec![0.0];
    y21.extend(log_grid(x_star / 3.1, x_star * 2.7, n));
    let mut x12 = log_grid(x_star / 3.1, x_star * 2.7, n);
    x12.push(f64::INFINITY);
    SearchGrids { y21, x12_prime: vec![f64::INFINITY], x12 }
}

#[test]
fn search_recovers_single_threshold() {
    let cell = Cell { case: OrderCase::RowLt, condition: CostCondition::B1 };
    let spec = random_spec(cell, &SampleRanges::default(), &mut ChaCha8Rng::seed_from_u64(8));
    let sol = build(&spec, cell.case, cell.condition).unwrap();
    let xs = sol.thresholds.x_star.unwrap();
    let x = xs * 0.6;
    let v = sol.value(Regime::One, Regime::One).value(x);
    let mut errors = Vec::new();
    for n in [9, 17, 33] {
        let grids = degenerate_grids(xs, n);
        let res = threshold_search(&spec, (Regime::One, Regime::One), x, &grids).unwrap();
        let cell_width = (2.7f64 * 3.1).ln() / (n - 1) as f64;
        assert_eq!(res.best.y21, 0.0);
        assert!((res.best.x12 / xs).ln().abs() <= cell_width, "n={n}: {} vs {xs}", res.best.x12);
        assert!(res.gap <= res.cell_tolerance);
        assert!(res.value <= v + 1e-12);
        errors.push(v - res.value);
    }
    assert!(errors[1] <= errors[0] && errors[2] <= errors[1] && errors[2] < errors[0], "{errors:?}");
}

#[test]
fn search_rejects_empty_grid() {
    let s = spec(0.0, 0.4, 1.0, 0.5);
    let grids = SearchGrids { y21: vec![2.0], x12_prime: vec![1.5], x12: vec![1.0] };
    assert_eq!(threshold_search(&s, (Regime::One, Regime::One), 1.0, &grids), Err(HittingError::EmptyGrid));
}

#[test]
fn search_surface_is_ordered() {
    let s = spec(0.0, 0.4, 1.0, 0.5);
    let grids = SearchGrids::uniform(0.5, 2.0, 6);
    let res = threshold_search(&s, (Regime::Two, Regime::Two), 1.0, &grids).unwrap();
    assert!(res.surface.iter().all(|p| p.tuple.is_feasible()));
    assert!(res.surface.iter().any(|p| p.tuple == res.best && p.value == res.value));
    assert!(res.minmax >= res.maxmin - 1e-12);
}
