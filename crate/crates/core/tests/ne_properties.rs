mod common;

use common::*;
use lqnet::{GameSpec, InteractionFunction, NeOptions};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Positive Perron vector of an irreducible non-negative matrix, by iterating `I + M`.
fn perron_vector(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let shifted = m + DMatrix::identity(n, n);
    let mut v = DVector::from_element(n, 1.0);
    for _ in 0..20_000 {
        v = &shifted * &v;
        v /= v.amax();
    }
    v
}

fn weighted_norm(x: &DVector<f64>, w: &DVector<f64>) -> f64 {
    x.component_div(w).amax()
}

fn dense_game(seed: u64) -> GameSpec {
    let mut r = rng(seed);
    let n = r.gen_range(2..=10);
    let a = DVector::from_fn(n, |_, _| r.gen_range(0.5..2.0));
    let b = DVector::from_fn(n, |_, _| r.gen_range(0.5..2.0));
    let mut g = random_graph(&mut r, n, 1.0);
    let load = (0..n).map(|i| g.row(i).sum() / (2.0 * b[i])).fold(0.0, f64::max);
    g *= r.gen_range(0.3..0.95) / load;
    GameSpec::new(a, b, g, random_concave(&mut r)).unwrap()
}

#[test]
fn equilibrium_does_not_depend_on_the_start() {
    let opts = NeOptions::default();
    for seed in 0..10 {
        let mut r = rng(100 + seed);
        let n = r.gen_range(2..=10);
        let game = random_game(&mut r, n);
        let p = random_point(&mut r, n, 1.0);
        let reference = game.solve_ne(&p, &opts).unwrap().x;
        for _ in 0..100 {
            let start = random_point(&mut r, n, 10.0);
            let x = game.solve_ne_from(&p, &start, &opts).unwrap().x;
            assert!((&x - &reference).amax() < 1e-8, "seed {seed}");
        }
    }
}

#[test]
fn steps_shrink_at_the_contraction_rate() {
    for seed in 0..30 {
        let game = dense_game(200 + seed);
        let report = game.check_assumptions().unwrap();
        assert!(report.assumption1_ok);
        let n = game.n();
        let scaled = DMatrix::from_fn(n, n, |i, j| game.g()[(i, j)] / (2.0 * game.b()[i]));
        let v = perron_vector(&scaled);
        let collatz = (&scaled * &v).component_div(&v).amax();
        assert!((collatz * report.lipschitz_alpha - report.contraction_factor).abs() < 1e-9);

        let mut r = rng(300 + seed);
        let p = random_point(&mut r, n, 0.5);
        let mut x = random_point(&mut r, n, 10.0);
        let mut prev: Option<DVector<f64>> = None;
        for _ in 0..200 {
            let next = game.best_response(&x, &p).unwrap();
            let step = &next - &x;
            if let Some(last) = &prev {
                let (now, before) = (weighted_norm(&step, &v), weighted_norm(last, &v));
                if before < 1e-12 {
                    break;
                }
                assert!(
                    now <= (report.contraction_factor + 1e-9) * before,
                    "seed {seed}: {now} vs {before}"
                );
                assert!(step.amax() <= (report.linf_contraction + 1e-9) * last.amax());
            }
            prev = Some(step);
            x = next;
        }
    }
}

#[test]
fn iteration_count_is_consistent_with_the_rate() {
    let opts = NeOptions::default();
    for seed in 0..20 {
        let game = dense_game(400 + seed);
        let rate = game.check_assumptions().unwrap().linf_contraction;
        let p = game.a() * 0.5;
        let report = game.solve_ne(&p, &opts).unwrap();
        assert!(report.converged);
        // first step from 0 is at most ‖a‖∞/(2 min b)
        let first = game.a().amax() / (2.0 * game.b().min());
        let needed = ((opts.tol / first).ln() / rate.ln()).ceil() as usize + 1;
        assert!(
            report.iterations <= needed,
            "seed {seed}: {} > {needed}",
            report.iterations
        );
    }
}

#[test]
fn normalization_preserves_the_equilibrium() {
    let opts = NeOptions::default();
    for seed in 0..20 {
        let mut r = rng(500 + seed);
        let n = r.gen_range(2..=10);
        let scale = r.gen_range(0.5..3.0);
        let offset = r.gen_range(-0.5..2.0);
        let f = random_concave(&mut r).affine(scale, offset).unwrap();
        let base = admissible_game(&mut r, n, InteractionFunction::log1p());
        // keep α·(row sum) below 2b after the rescaling
        let g = base.g() / scale.max(1.0);
        let game = GameSpec::new(base.a().clone(), base.b().clone(), g, f).unwrap();
        assert!(game.check_assumptions().unwrap().assumption1_ok);
        let hat = game.normalize().unwrap();
        assert!(hat.is_normalized());
        let p = DVector::from_fn(n, |i, _| r.gen_range(0.0..1.5) * game.a()[i]);
        let x = game.solve_ne(&p, &opts).unwrap().x;
        let y = hat.solve_ne(&p, &opts).unwrap().x;
        assert!((&x - &y).amax() <= 2.0 * opts.tol, "seed {seed}: {}", (&x - &y).amax());
    }
}

#[test]
fn uniform_prices_give_uniform_play_on_regular_networks() {
    let opts = NeOptions::default();
    for n in [3, 10, 100] {
        for g_bar in [0.1, 0.5, 0.9] {
            let game = GameSpec::uniform(
                2.0,
                1.0,
                lqnet::graphs::ring_graph(n, g_bar).unwrap(),
                InteractionFunction::log1p(),
            )
            .unwrap();
            let x = game.solve_ne(&DVector::from_element(n, 0.7), &opts).unwrap().x;
            assert!(x.max() - x.min() <= 1e-10);
        }
    }
}
