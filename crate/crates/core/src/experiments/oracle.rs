//! Exhaustive grid search for the revenue maximizer of tiny games.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{ser_vec, GameSpec};

pub const MAX_ORACLE_AGENTS: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct OracleResult {
    #[serde(serialize_with = "ser_vec")]
    pub x: DVector<f64>,
    /// `J(x)` at the best grid point.
    pub j: f64,
    pub evaluations: usize,
}

/// Maximizes `J` over `[0, x_max]ⁿ` on a grid of spacing `coarse_step`, then
/// again on a grid of spacing `coarse_step / 100` covering the best coarse
/// cell's neighborhood.
pub fn brute_force_optimal(game: &GameSpec, x_max: f64, coarse_step: f64) -> Result<OracleResult> {
    let n = game.n();
    if n > MAX_ORACLE_AGENTS {
        return Err(Error::TooLarge { n });
    }
    if !(x_max > 0.0 && coarse_step > 0.0 && coarse_step <= x_max) {
        return Err(Error::Domain(format!(
            "grid needs 0 < coarse_step <= x_max, got step {coarse_step}, x_max {x_max}"
        )));
    }
    let coarse = Grid::new(vec![(0.0, x_max); n], coarse_step);
    let (best, j, mut evaluations) = coarse.search(game);
    let fine_step = coarse_step / 100.0;
    let window: Vec<(f64, f64)> = best
        .iter()
        .map(|&c| ((c - coarse_step).max(0.0), (c + coarse_step).min(x_max)))
        .collect();
    let (fine_best, fine_j, fine_evals) = Grid::new(window, fine_step).search(game);
    evaluations += fine_evals;
    let (x, j) = if fine_j >= j { (fine_best, fine_j) } else { (best, j) };
    Ok(OracleResult {
        x: DVector::from_vec(x),
        j,
        evaluations,
    })
}

struct Grid {
    /// Sample points per axis.
    axes: Vec<Vec<f64>>,
}

impl Grid {
    fn new(ranges: Vec<(f64, f64)>, step: f64) -> Self {
        let axes = ranges
            .into_iter()
            .map(|(lo, hi)| {
                let count = ((hi - lo) / step + 1e-9).floor() as usize;
                (0..=count).map(|k| lo + k as f64 * step).collect()
            })
            .collect();
        Self { axes }
    }

    fn search(&self, game: &GameSpec) -> (Vec<f64>, f64, usize) {
        let n = self.axes.len();
        let f = game.f();
        let fx: Vec<Vec<f64>> = self
            .axes
            .iter()
            .map(|ax| ax.iter().map(|&v| f.eval(v)).collect())
            .collect();
        let (a, b, g) = (game.a(), game.b(), game.g());
        let mut idx = vec![0usize; n];
        let mut best = (f64::NEG_INFINITY, idx.clone());
        let mut evaluations = 0;
        loop {
            let mut j = 0.0;
            for i in 0..n {
                let xi = self.axes[i][idx[i]];
                let mut margin = a[i] - 2.0 * b[i] * xi;
                for k in 0..n {
                    margin += g[(i, k)] * fx[k][idx[k]];
                }
                j += xi * margin;
            }
            evaluations += 1;
            if j > best.0 {
                best = (j, idx.clone());
            }
            // odometer increment
            let mut axis = 0;
            loop {
                if axis == n {
                    let x = (0..n).map(|i| self.axes[i][best.1[i]]).collect();
                    return (x, best.0, evaluations);
                }
                idx[axis] += 1;
                if idx[axis] < self.axes[axis].len() {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }
    }
}
