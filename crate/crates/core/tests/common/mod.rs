#![allow(dead_code)]

use lqnet::{GameSpec, InteractionFunction};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Sparse non-negative matrix with zero diagonal and at least one edge.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> DMatrix<f64> {
    let mut g = DMatrix::from_fn(n, n, |i, j| {
        if i != j && rng.gen_bool(density) {
            rng.gen_range(0.1..1.0)
        } else {
            0.0
        }
    });
    if g.sum() == 0.0 {
        let i = rng.gen_range(0..n);
        g[(i, (i + 1) % n)] = rng.gen_range(0.1..1.0);
    }
    g
}

/// Random game whose row and column sums stay below `2bᵢ·s` for a random
/// `s < 1`, so both diagonal-dominance margins are positive.
pub fn admissible_game(rng: &mut ChaCha8Rng, n: usize, f: InteractionFunction) -> GameSpec {
    let a = DVector::from_fn(n, |_, _| rng.gen_range(0.5..2.0));
    let b = DVector::from_fn(n, |_, _| rng.gen_range(0.5..2.0));
    let mut g = random_graph(rng, n, 0.6);
    let load = (0..n)
        .map(|i| g.row(i).sum().max(g.column(i).sum()) / (2.0 * b[i]))
        .fold(0.0, f64::max);
    let s = rng.gen_range(0.2..0.9);
    if load > 0.0 {
        g *= s / load;
    }
    GameSpec::new(a, b, g, f).unwrap()
}

pub fn random_concave(rng: &mut ChaCha8Rng) -> InteractionFunction {
    match rng.gen_range(0..3) {
        0 => InteractionFunction::log1p(),
        1 => InteractionFunction::scaled_log(10.0).unwrap(),
        _ => InteractionFunction::scaled_log(rng.gen_range(0.5..4.0)).unwrap(),
    }
}

pub fn random_game(rng: &mut ChaCha8Rng, n: usize) -> GameSpec {
    let f = random_concave(rng);
    admissible_game(rng, n, f)
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize, hi: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(0.0..hi))
}

/// Central differences of a scalar function.
pub fn fd_gradient(func: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>, h: f64) -> DVector<f64> {
    DVector::from_fn(x.len(), |i, _| {
        let mut up = x.clone();
        let mut dn = x.clone();
        up[i] += h;
        dn[i] -= h;
        (func(&up) - func(&dn)) / (2.0 * h)
    })
}

/// Central-difference Jacobian of a vector function, column `j` = ∂/∂xⱼ.
pub fn fd_jacobian(func: impl Fn(&DVector<f64>) -> DVector<f64>, x: &DVector<f64>, h: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut up = x.clone();
        let mut dn = x.clone();
        up[j] += h;
        dn[j] -= h;
        out.set_column(j, &((func(&up) - func(&dn)) / (2.0 * h)));
    }
    out
}
