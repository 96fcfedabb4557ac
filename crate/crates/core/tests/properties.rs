use std::sync::Arc;

use proptest::prelude::*;

use lipzoom::algorithm::{Algorithm, Feedback};
use lipzoom::bandit::{confidence_radius, sharp_radius, Zooming, ZoomingConfig};
use lipzoom::instances::{lipschitz_audit, Environment, LipschitzEnv, Noise, Payoff};
use lipzoom::metric::{covering_number, packing_number, Ball, CountMode, FiniteSpace, Interval, MetricSpace, Point, Region, SpaceRef};
use lipzoom::simulator::{recompute_regret, run, slope_fit, RunOptions};

fn line(exponent: f64) -> SpaceRef {
    Arc::new(Interval::new(exponent).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn radius_shrinks_with_pulls(n in 0u64..10_000, phase in 1u32..40) {
        prop_assert!(confidence_radius(n + 1, phase) < confidence_radius(n, phase));
        prop_assert!(confidence_radius(0, phase) > 1.0);
    }

    #[test]
    fn sharp_radius_is_monotone(n in 0u64..10_000, mean in 0.0f64..=1.0, phase in 1u32..40) {
        prop_assert!(sharp_radius(n + 1, mean, phase, 16.0) <= sharp_radius(n, mean, phase, 16.0));
        prop_assert!(sharp_radius(n, mean, phase, 16.0) >= 0.0);
    }

    #[test]
    fn interval_metric_axioms(x in 0.0f64..=1.0, y in 0.0f64..=1.0, z in 0.0f64..=1.0, e in 0.25f64..=1.0) {
        let s = Interval::new(e).unwrap();
        let (px, py, pz) = (Point::Real1D(x), Point::Real1D(y), Point::Real1D(z));
        prop_assert_eq!(s.dist(&px, &py), s.dist(&py, &px));
        prop_assert_eq!(s.dist(&px, &px), 0.0);
        prop_assert!(s.dist(&px, &pz) <= s.dist(&px, &py) + s.dist(&py, &pz) + 1e-12);
    }

    #[test]
    fn covering_oracle_witness_is_uncovered(balls in prop::collection::vec((0.0f64..=1.0, 0.001f64..0.3), 0..12), probes in prop::collection::vec(0.0f64..=1.0, 50)) {
        let s = Interval::new(1.0).unwrap();
        let balls: Vec<Ball> = balls.into_iter().map(|(c, r)| Ball::open(Point::Real1D(c), r)).collect();
        match s.find_uncovered(&balls, &Region::All, None) {
            Some(p) => prop_assert!(balls.iter().all(|b| !b.contains(&s, &p))),
            None => {
                for x in probes {
                    let p = Point::Real1D(x);
                    prop_assert!(balls.iter().any(|b| b.contains(&s, &p)));
                }
            }
        }
    }

    #[test]
    fn greedy_cover_bounds_exact_and_sandwich_holds(coords in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 1..10), r in 0.05f64..0.6) {
        let s = FiniteSpace::from_coords(&coords).unwrap();
        let pts = s.finite_points().unwrap();
        let exact = covering_number(&s, &pts, r, CountMode::Exact).unwrap();
        let greedy = covering_number(&s, &pts, r, CountMode::Greedy).unwrap();
        prop_assert!(exact <= greedy);
        let pack = packing_number(&s, &pts, r, CountMode::Exact).unwrap();
        let wide = covering_number(&s, &pts, 2.0 * r, CountMode::Exact).unwrap();
        prop_assert!(wide <= pack && pack <= exact);
        prop_assert!(packing_number(&s, &pts, r, CountMode::Greedy).unwrap() <= pack);
    }

    #[test]
    fn random_cones_are_lipschitz(seed in 0u64..1000, count in 1usize..8, e in 0.5f64..=1.0) {
        let s = line(e);
        let env = LipschitzEnv::new(s.clone(), Payoff::random_cones(&s, count, 0.2, 0.9, seed), Noise::Bernoulli, false).unwrap();
        prop_assert!(lipschitz_audit(&env, 500, seed, 1e-12).passed());
    }

    #[test]
    fn zooming_keeps_the_space_covered(rewards in prop::collection::vec(0.0f64..=1.0, 1..300)) {
        let s = line(1.0);
        let mut z = Zooming::plain(s.clone(), &ZoomingConfig::default()).unwrap();
        for (t, y) in rewards.iter().enumerate() {
            let round = t as u64 + 1;
            z.act(round);
            let balls = z.confidence_balls();
            prop_assert!(s.find_uncovered(&balls, &Region::All, None).is_none());
            z.observe(round, &Feedback { reward: *y, peeks: vec![] });
        }
    }

    #[test]
    fn regret_trace_matches_action_log(seed in 0u64..500, horizon in 2u64..600) {
        let s = line(1.0);
        let env = LipschitzEnv::new(s.clone(), Payoff::random_cones(&s, 3, 0.3, 0.9, seed), Noise::Bernoulli, false).unwrap();
        let mut z = Zooming::plain(s, &ZoomingConfig::default()).unwrap();
        let tr = run(&mut z, &env, &RunOptions::new(horizon, seed).with_actions()).unwrap();
        let ts: Vec<u64> = tr.checkpoints.iter().map(|c| c.t).collect();
        let again = recompute_regret(&env, &tr.actions, &ts);
        prop_assert_eq!(again.len(), ts.len());
        for (a, c) in again.iter().zip(&tr.checkpoints) {
            prop_assert!((a - c.regret).abs() < 1e-9);
        }
        prop_assert!(tr.checkpoints.windows(2).all(|w| w[0].t < w[1].t && w[0].regret <= w[1].regret + 1e-12));
        prop_assert!(tr.final_regret() <= horizon as f64 * env.mu_star() + 1e-9);
    }

    #[test]
    fn slope_fit_recovers_power_laws(k in 0.1f64..1.0, c in 0.5f64..50.0) {
        let pts: Vec<(f64, f64)> = (4..20).map(|j| {
            let t = (1u64 << j) as f64;
            (t, c * t.powf(k))
        }).collect();
        let fit = slope_fit(&pts, 16.0, 1e7).unwrap();
        prop_assert!((fit.slope - k).abs() < 1e-9);
    }
}
