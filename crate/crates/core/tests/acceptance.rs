//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use lqnet::experiments::{self, Experiment, ExperimentConfig, GbarMode, SweepRow, Tolerances};
use lqnet::graphs::{ring_graph, Family, GraphParams};
use lqnet::linalg::lu_solve;
use lqnet::pricing::{self, PgOptions};
use lqnet::{GameSpec, InteractionFunction, NeOptions};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: Vec<String>, summary: String) -> Self {
        if failures.is_empty() {
            Outcome {
                pass: true,
                detail: summary,
            }
        } else {
            Outcome {
                pass: false,
                detail: format!("{summary}; {}", failures.join("; ")),
            }
        }
    }
}

fn f1() -> InteractionFunction {
    InteractionFunction::log1p()
}

fn f2() -> InteractionFunction {
    InteractionFunction::scaled_log(10.0).unwrap()
}

fn alpha_config(family: Family, n: usize, a: f64, b: f64, f: InteractionFunction, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        experiment: Experiment::AlphaSweep,
        graph: GraphParams {
            family,
            n,
            alpha: 0.5,
            g_bar: 0.0,
            m: 1,
            seed,
        },
        a_scalar: a,
        b_scalar: b,
        f_kind: f,
        sweep_grid: None,
        gbar_mode: GbarMode::Discriminatory,
        b_tracks_gbar: false,
        tolerances: Tolerances::default(),
        output_dir: None,
    }
}

fn ring_config(mode: GbarMode, b_tracks_gbar: bool) -> ExperimentConfig {
    ExperimentConfig {
        experiment: Experiment::GbarSweep,
        graph: GraphParams {
            family: Family::Ring,
            n: 100,
            alpha: 0.5,
            g_bar: 0.0,
            m: 1,
            seed: 1,
        },
        a_scalar: 2.0,
        b_scalar: 1.0,
        f_kind: f1(),
        sweep_grid: None,
        gbar_mode: mode,
        b_tracks_gbar,
        tolerances: Tolerances::default(),
        output_dir: None,
    }
}

fn check_rows(label: &str, rows: &[SweepRow], failures: &mut Vec<String>) {
    for r in rows {
        if !r.is_ok() {
            failures.push(format!("{label}: point {} not solved ({:?})", r.param, r.status));
        } else if r.inverse_poi > 1.0 + 1e-9 {
            failures.push(format!("{label}: inverse PoI {} > 1 at {}", r.inverse_poi, r.param));
        }
    }
}

fn within(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

fn star_figure() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let lin = experiments::run(&alpha_config(
        Family::Star,
        10,
        1.0,
        1.0,
        InteractionFunction::linear(),
        1,
    ))
    .unwrap();
    check_rows("linear", &lin, &mut failures);
    let mid = lin.iter().find(|r| r.param == 0.5).unwrap();
    if !within(mid.inverse_poi, 1.0, 1e-6) {
        failures.push(format!("linear inverse PoI at 0.5 is {}", mid.inverse_poi));
    }
    if let Some(r) = lin.iter().find(|r| r.param != 0.5 && r.inverse_poi >= 1.0 - 1e-9) {
        failures.push(format!(
            "linear inverse PoI {} at α = {} is not below 1",
            r.inverse_poi, r.param
        ));
    }
    // rises up to 0.5 and falls after it
    let rising = lin
        .windows(2)
        .filter(|w| w[1].param <= 0.5)
        .all(|w| w[1].inverse_poi > w[0].inverse_poi);
    let falling = lin
        .windows(2)
        .filter(|w| w[0].param >= 0.5)
        .all(|w| w[1].inverse_poi < w[0].inverse_poi);
    if !(rising && falling) {
        failures.push("linear curve is not unimodal around 0.5".into());
    }
    let mut summary = format!("linear {:.8} at 0.5", mid.inverse_poi);
    for (name, f, value, at, at_tol) in [("f1", f1(), 0.989, 0.41, 0.02), ("f2", f2(), 0.995, 0.32, 0.03)] {
        let rows = experiments::run(&alpha_config(Family::Star, 10, 1.0, 1.0, f, 1)).unwrap();
        check_rows(name, &rows, &mut failures);
        let peak = experiments::peak_inverse_poi(&rows).unwrap();
        summary += &format!("; {name} peak {:.5} at α = {:.3}", peak.value, peak.param);
        if !within(peak.value, value, 0.002) || !within(peak.param, at, at_tol) {
            failures.push(format!("{name} peak outside {value}±0.002 at {at}±{at_tol}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(30) {
        failures.push(format!("took {elapsed:?}"));
    }
    Outcome::new(failures, format!("{summary}; {:.1?}", elapsed))
}

fn pa_figure() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for (name, f, value, at) in [("f1", f1(), 0.999, 0.44), ("f2", f2(), 0.998, 0.32)] {
        let mut peaks = Vec::new();
        for seed in 1..=5 {
            let rows = experiments::run(&alpha_config(
                Family::PreferentialAttachment,
                100,
                1.0,
                2.0,
                f.clone(),
                seed,
            ))
            .unwrap();
            check_rows(&format!("{name} seed {seed}"), &rows, &mut failures);
            let peak = experiments::peak_inverse_poi(&rows).unwrap();
            if !within(peak.value, value, 0.005) || !within(peak.param, at, 0.10) {
                failures.push(format!(
                    "{name} seed {seed}: peak {:.5} at {:.3} outside {value}±0.005 at {at}±0.10",
                    peak.value, peak.param
                ));
            }
            peaks.push(peak);
        }
        let (lo, hi) = peaks
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, h), p| (l.min(p.value), h.max(p.value)));
        let (alo, ahi) = peaks
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, h), p| (l.min(p.param), h.max(p.param)));
        summary.push(format!("{name} peaks {lo:.5}..{hi:.5} at α {alo:.3}..{ahi:.3}"));
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(300) {
        failures.push(format!("took {elapsed:?}"));
    }
    Outcome::new(failures, format!("{}; {:.1?}", summary.join("; "), elapsed))
}

fn ring_general_bound() -> Outcome {
    let mut failures = Vec::new();
    let rows = experiments::run(&ring_config(GbarMode::Discriminatory, true)).unwrap();
    let solved: Vec<&SweepRow> = rows.iter().filter(|r| r.is_ok()).collect();
    if solved.len() < rows.len() / 2 {
        failures.push(format!("only {} of {} points solved", solved.len(), rows.len()));
    }
    let mut min_slack = f64::INFINITY;
    for r in &solved {
        match r.bound {
            Some(bound) => {
                if bound < 0.0 {
                    failures.push(format!("negative bound at ḡ = {}", r.param));
                }
                min_slack = min_slack.min(r.gap - bound);
                if r.gap < bound - 1e-9 {
                    failures.push(format!("gap {} below bound {bound} at ḡ = {}", r.gap, r.param));
                }
            }
            None => failures.push(format!("no bound at ḡ = {}", r.param)),
        }
    }
    // bound vanishes with the interaction strength
    let small: Vec<f64> = [1e-3, 1e-4, 1e-5]
        .iter()
        .map(|&g| {
            let game = GameSpec::uniform(2.0, g, ring_graph(100, g).unwrap(), f1()).unwrap();
            pricing::poi_lower_bound(&game).unwrap()
        })
        .collect();
    if !(small.windows(2).all(|w| w[1] < w[0]) && small[2] < 1e-6) {
        failures.push(format!("bound does not vanish as ḡ → 0: {small:?}"));
    }
    Outcome::new(
        failures,
        format!(
            "{} points, min(gap − bound) = {min_slack:.3e}, bound at ḡ=1e-5 is {:.2e}",
            solved.len(),
            small[2]
        ),
    )
}

fn ring_uniform_bound() -> Outcome {
    let mut failures = Vec::new();
    let rows = experiments::run(&ring_config(GbarMode::Uniform, false)).unwrap();
    let mut min_slack = f64::INFINITY;
    for r in &rows {
        match (r.is_ok(), r.bound) {
            (true, Some(bound)) => {
                min_slack = min_slack.min(r.gap - bound);
                if r.gap < bound - 1e-9 || bound < 0.0 {
                    failures.push(format!("gap {} vs bound {bound} at ḡ = {}", r.gap, r.param));
                }
            }
            _ => failures.push(format!("point ḡ = {} not solved ({:?})", r.param, r.status)),
        }
    }
    let game = GameSpec::uniform(2.0, 1.0, ring_graph(100, 0.5).unwrap(), f1()).unwrap();
    let bound = pricing::uniform_poi_lower_bound(&game).unwrap();
    // ā = 2, b̄ = 1, ḡ = 0.5: ((ḡ/ā)(1 − ḡ/2b̄) h(ā/4b̄))², h(x) = ln(1+x) − x/(1+x)
    let h = 1.5f64.ln() - 0.5 / 1.5;
    let hand = (0.25 * 0.75 * h).powi(2);
    if !within(bound, 1.83e-4, 1e-6) || !within(bound, hand, 1e-12) {
        failures.push(format!("bound at ḡ = 0.5 is {bound:.6e}, hand value {hand:.6e}"));
    }
    Outcome::new(
        failures,
        format!(
            "{} points, min(gap − bound) = {min_slack:.3e}, bound(0.5) = {bound:.4e}",
            rows.len()
        ),
    )
}

fn oracle_agreement() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let (mut worst_j, mut worst_x) = (0.0f64, 0.0f64);
    for seed in 0..20 {
        let mut r = rng(9000 + seed);
        let game = random_game(&mut r, 2);
        let report = game.check_assumptions().unwrap();
        assert!(report.assumption3_ok);
        let sol = pricing::solve_optimal_price(&game, &PgOptions::default()).unwrap();
        let x_max = 1.1 * pricing::action_bounds(&game).unwrap().upper_max().amax();
        let brute = experiments::brute_force_optimal(&game, x_max, 1e-3).unwrap();
        let dj = (sol.revenue - brute.j).abs();
        let dx = (&sol.x_star - &brute.x).amax();
        worst_j = worst_j.max(dj);
        worst_x = worst_x.max(dx);
        if dj > 1e-4 || dx > 1e-2 {
            failures.push(format!("seed {seed}: |ΔJ| = {dj:.2e}, ‖Δx‖∞ = {dx:.2e}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        failures.push(format!("took {elapsed:?}"));
    }
    Outcome::new(
        failures,
        format!("20 instances, max |ΔJ| = {worst_j:.2e}, max ‖Δx‖∞ = {worst_x:.2e}; {elapsed:.1?}"),
    )
}

fn derivative_checks() -> Outcome {
    let mut failures = Vec::new();
    let (mut worst_g, mut worst_h) = (0.0f64, 0.0f64);
    for seed in 0..50 {
        let mut r = rng(10_000 + seed);
        let n = r.gen_range(2..=10);
        let game = random_game(&mut r, n);
        let x = random_point(&mut r, n, 2.0).add_scalar(0.01);
        let grad = pricing::gradient(&game, &x).unwrap();
        let fd = fd_gradient(|y| pricing::revenue(&game, y).unwrap(), &x, 1e-6);
        let eg = (&grad - fd).amax() / (1.0 + grad.amax());
        let hess = pricing::hessian(&game, &x).unwrap();
        let fdh = fd_jacobian(|y| pricing::gradient(&game, y).unwrap(), &x, 1e-6);
        let eh = (&hess - fdh).amax() / (1.0 + hess.amax());
        worst_g = worst_g.max(eg);
        worst_h = worst_h.max(eh);
        if eg >= 1e-6 || eh >= 1e-5 {
            failures.push(format!("seed {seed}: gradient {eg:.2e}, Hessian {eh:.2e}"));
        }
    }
    Outcome::new(
        failures,
        format!("50 instances, max rel. error gradient {worst_g:.2e}, Hessian {worst_h:.2e}"),
    )
}

fn ne_properties() -> Outcome {
    let mut failures = Vec::new();
    let opts = NeOptions::default();

    let mut r = rng(11_000);
    let game = random_game(&mut r, 8);
    let p = random_point(&mut r, 8, 1.0);
    let reference = game.solve_ne(&p, &opts).unwrap().x;
    let mut spread = 0.0f64;
    for _ in 0..100 {
        let start = random_point(&mut r, 8, 10.0);
        spread = spread.max((game.solve_ne_from(&p, &start, &opts).unwrap().x - &reference).amax());
    }
    if spread >= 1e-8 {
        failures.push(format!("start dependence {spread:.2e}"));
    }

    // ℓ∞ steps shrink by the row-sum factor, ℓ2 steps by the spectral factor
    // when B⁻¹G is symmetric
    let mut worst_ratio = 0.0f64;
    for seed in 0..20 {
        let mut r = rng(12_000 + seed);
        let n = r.gen_range(2..=10);
        let mut g = random_graph(&mut r, n, 0.6);
        g = &g + g.transpose();
        let b = r.gen_range(0.5..2.0);
        let load = (0..n).map(|i| g.row(i).sum()).fold(0.0, f64::max) / (2.0 * b);
        g *= r.gen_range(0.3..0.95) / load;
        let game = GameSpec::uniform(1.0, b, g, random_concave(&mut r)).unwrap();
        let report = game.check_assumptions().unwrap();
        let p = random_point(&mut r, n, 0.5);
        let mut x = random_point(&mut r, n, 10.0);
        let mut last: Option<DVector<f64>> = None;
        for _ in 0..200 {
            let next = game.best_response(&x, &p).unwrap();
            let step = &next - &x;
            if let Some(prev) = &last {
                if prev.norm() < 1e-12 {
                    break;
                }
                worst_ratio = worst_ratio.max(step.norm() / prev.norm() / report.contraction_factor);
                if step.norm() > (report.contraction_factor + 1e-9) * prev.norm()
                    || step.amax() > (report.linf_contraction + 1e-9) * prev.amax()
                {
                    failures.push(format!("seed {seed}: step ratio above the contraction factor"));
                    break;
                }
            }
            last = Some(step);
            x = next;
        }
    }

    let mut worst_norm = 0.0f64;
    for seed in 0..20 {
        let mut r = rng(13_000 + seed);
        let n = r.gen_range(2..=10);
        let scale = r.gen_range(0.5..3.0);
        let f = f1().affine(scale, r.gen_range(-0.5..2.0)).unwrap();
        let base = admissible_game(&mut r, n, f1());
        let game = GameSpec::new(base.a().clone(), base.b().clone(), base.g() / scale.max(1.0), f).unwrap();
        let p = DVector::from_fn(n, |i, _| r.gen_range(0.0..1.5) * game.a()[i]);
        let x = game.solve_ne(&p, &opts).unwrap().x;
        let y = game.normalize().unwrap().solve_ne(&p, &opts).unwrap().x;
        worst_norm = worst_norm.max((&x - &y).amax());
    }
    if worst_norm > 2.0 * opts.tol {
        failures.push(format!("normalization changes the equilibrium by {worst_norm:.2e}"));
    }
    Outcome::new(
        failures,
        format!(
            "start spread {spread:.1e}, max step ratio / factor {worst_ratio:.3}, normalization Δ {worst_norm:.1e}"
        ),
    )
}

fn structural() -> Outcome {
    let mut failures = Vec::new();
    let mut solved = 0;
    let mut games: Vec<GameSpec> = (0..40)
        .map(|seed| {
            let mut r = rng(14_000 + seed);
            let n = r.gen_range(2..=10);
            random_game(&mut r, n)
        })
        .collect();
    for g_bar in [0.1, 0.5, 0.9] {
        games.push(GameSpec::uniform(2.0, 1.0, ring_graph(100, g_bar).unwrap(), f1()).unwrap());
    }
    for (k, game) in games.iter().enumerate() {
        let sol = pricing::solve_optimal_price(game, &PgOptions::default()).unwrap();
        let base = pricing::agnostic_baseline(game, &NeOptions::default()).unwrap();
        solved += 1;
        if sol.x_star.iter().any(|v| *v <= 0.0) {
            failures.push(format!("instance {k}: x⋆ not positive"));
        }
        if sol.revenue - base.j0 <= 1e-9 * base.j0 {
            failures.push(format!("instance {k}: no strict gap"));
        }
        let bm = game.b_matrix();
        let g = game.g();
        let low = game.a().component_div(game.b()) * 0.25;
        let up0 = lu_solve(&(&bm - g), game.a()).unwrap() * 0.5;
        let up_star = lu_solve(&(&bm - (g + g.transpose()) * 0.5), game.a()).unwrap() * 0.5;
        for i in 0..game.n() {
            let ok = (g.row(i).sum() == 0.0 || base.x0[i] > low[i])
                && base.x0[i] <= up0[i] + 1e-9
                && sol.x_star[i] >= low[i] - 1e-9
                && sol.x_star[i] <= up_star[i] + 1e-9;
            if !ok {
                failures.push(format!("instance {k}, agent {i}: outside the sandwich bounds"));
            }
        }
    }
    let mut spread = 0.0f64;
    for n in [5, 50, 100] {
        for g_bar in [0.2, 0.6, 0.95] {
            let game = GameSpec::uniform(2.0, 1.0, ring_graph(n, g_bar).unwrap(), f1()).unwrap();
            let x = game
                .solve_ne(&DVector::from_element(n, 1.0), &NeOptions::default())
                .unwrap()
                .x;
            spread = spread.max(x.max() - x.min());
        }
        // a regular network that is not a ring: complete graph scaled to row sum 0.8
        let g = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 0.8 / (n - 1) as f64 });
        let game = GameSpec::uniform(2.0, 1.0, g, f2()).unwrap();
        let x = game
            .solve_ne(&DVector::from_element(n, 0.3), &NeOptions::default())
            .unwrap()
            .x;
        spread = spread.max(x.max() - x.min());
    }
    if spread > 1e-10 {
        failures.push(format!("uniform game NE spread {spread:.2e}"));
    }
    Outcome::new(
        failures,
        format!("{solved} instances solved, uniform NE spread {spread:.1e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("star network alpha sweep", star_figure),
        ("preferential attachment alpha sweep", pa_figure),
        ("ring gap above general bound", ring_general_bound),
        ("ring uniform gap above uniform bound", ring_uniform_bound),
        ("projected gradient vs brute force", oracle_agreement),
        ("gradient and Hessian vs finite differences", derivative_checks),
        ("equilibrium solver properties", ne_properties),
        ("structural properties", structural),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("acceptance {}: {tag} {name}: {}", i + 1, outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
