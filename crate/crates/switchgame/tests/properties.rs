use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use switchgame::model::{characteristic_residual, characteristic_roots};
use switchgame::montecarlo::Estimate;
use switchgame::qvi::apply_generator;
use switchgame::sample::{random_spec, SampleRanges};
use switchgame::{build, Cell, Regime};

fn any_cell() -> impl Strategy<Value = Cell> {
    (0..20usize).prop_map(|k| Cell::all().nth(k).unwrap())
}

proptest! {
    #[test]
    fn roots_solve_the_quadratic(s in 0.05f64..2.0, r in 0.05f64..2.0, f in -0.5f64..0.5) {
        let b = f * r;
        let (mp, mm) = characteristic_roots(b, s, r);
        prop_assert!(mp > 1.0 && mm < 0.0);
        prop_assert!(characteristic_residual(b, s, r, mp) < 1e-10);
        prop_assert!(characteristic_residual(b, s, r, mm) < 1e-10);
        let s2 = s * s;
        prop_assert!(((mp + mm) - (1.0 - 2.0 * b / s2)).abs() <= 1e-12 * (mp.abs() + mm.abs()));
        prop_assert!((mp * mm + 2.0 * r / s2).abs() <= 1e-12 * (2.0 * r / s2));
    }

    #[test]
    fn generator_matches_finite_differences(cell in any_cell(), seed in 0u64..1000, u in 0.05f64..0.95) {
        let spec = random_spec(cell, &SampleRanges::default(), &mut ChaCha8Rng::seed_from_u64(seed));
        let sol = build(&spec, cell.case, cell.condition).unwrap();
        let scale = sol.thresholds.points().iter().map(|p| p.1).fold(1.0, f64::max);
        let x = 3.0 * scale * u;
        for i in Regime::ALL {
            for j in Regime::ALL {
                let v = sol.value(i, j);
                if v.breakpoint_distance(x) < 1e-3 {
                    continue;
                }
                let h = 1e-5 * x;
                let (lo, mid, hi) = (v.value(x - h), v.value(x), v.value(x + h));
                let (b, s) = (spec.b(i, j), spec.sigma(i, j));
                let fd = 0.5 * s * s * x * x * (hi - 2.0 * mid + lo) / (h * h) + b * x * (hi - lo) / (2.0 * h);
                let exact = apply_generator(&spec, i, j, v, x).unwrap();
                let tol = 1e-4 * mid.abs().max(x.powf(spec.gamma)).max(1.0);
                prop_assert!((fd - exact).abs() < tol, "{cell} ({i},{j}) x={x}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn values_are_continuous_and_ordered(cell in any_cell(), seed in 0u64..1000) {
        let spec = random_spec(cell, &SampleRanges::default(), &mut ChaCha8Rng::seed_from_u64(seed));
        let sol = build(&spec, cell.case, cell.condition).unwrap();
        for i in Regime::ALL {
            for j in Regime::ALL {
                let v = sol.value(i, j);
                for t in v.breakpoints() {
                    let (l, r) = (v.value(t * (1.0 - 1e-12)), v.value(t * (1.0 + 1e-12)));
                    prop_assert!((l - r).abs() < 1e-9 * l.abs().max(1.0));
                }
                // Switching never beats the value net of its cost.
                let x = spec.x0;
                let k = i.other();
                prop_assert!(v.value(x) >= sol.value(k, j).value(x) - spec.c(i, k) - 1e-9);
                let l = j.other();
                prop_assert!(v.value(x) <= sol.value(i, l).value(x) + spec.chi(j, l) + 1e-9);
            }
        }
    }

    #[test]
    fn estimate_mean_is_bracketed(xs in prop::collection::vec(-1e3f64..1e3, 2..200)) {
        let e = Estimate::from_samples(&xs);
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(e.mean >= lo - 1e-9 && e.mean <= hi + 1e-9);
        prop_assert!(e.std_error >= 0.0);
    }
}
