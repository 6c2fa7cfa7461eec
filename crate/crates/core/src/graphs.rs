//! Network generators: star, ring and preferential attachment, each returned as
//! a dense weighted adjacency matrix with `Gᵢⱼ` the influence of `j` on `i`.
//!
//! Star and preferential-attachment graphs are built as a directed base `E` and
//! then mixed as `αE + (1 − α)Eᵀ`; `α = 0.5` gives a symmetric network.

use nalgebra::DMatrix;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_PA_M: usize = 1;
pub const DEFAULT_PA_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Star,
    PreferentialAttachment,
    Ring,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphParams {
    pub family: Family,
    pub n: usize,
    /// Mixing weight (star, preferential attachment).
    #[serde(default = "half")]
    pub alpha: f64,
    /// Edge weight of the ring.
    #[serde(default)]
    pub g_bar: f64,
    /// Attachment count of each arriving node.
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn half() -> f64 {
    0.5
}

fn default_m() -> usize {
    DEFAULT_PA_M
}

fn default_seed() -> u64 {
    DEFAULT_PA_SEED
}

impl GraphParams {
    pub fn build(&self) -> Result<DMatrix<f64>> {
        match self.family {
            Family::Star => star_graph(self.n, self.alpha),
            Family::Ring => ring_graph(self.n, self.g_bar),
            Family::PreferentialAttachment => pa_graph(self.n, self.m, self.seed, self.alpha),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("mixing weight must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

/// `αE + (1 − α)Eᵀ`.
pub fn mix(base: &DMatrix<f64>, alpha: f64) -> Result<DMatrix<f64>> {
    check_alpha(alpha)?;
    Ok(base * alpha + base.transpose() * (1.0 - alpha))
}

/// Star centered on the first agent: the hub influences every leaf with weight
/// `α` and every leaf influences the hub with weight `1 − α`.
pub fn star_graph(n: usize, alpha: f64) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::Domain(format!("a star needs at least 2 nodes, got {n}")));
    }
    let base = DMatrix::from_fn(n, n, |i, j| if i == 0 && j != 0 { 1.0 } else { 0.0 });
    mix(&base, alpha)
}

/// Directed ring with `Gᵢⱼ = ḡ` iff `i ≡ j + 1 (mod n)`.
pub fn ring_graph(n: usize, g_bar: f64) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::Domain(format!("a ring needs at least 2 nodes, got {n}")));
    }
    if !(g_bar.is_finite() && g_bar >= 0.0) {
        return Err(Error::Domain(format!("ring weight must be non-negative, got {g_bar}")));
    }
    Ok(DMatrix::from_fn(
        n,
        n,
        |i, j| if i == (j + 1) % n { g_bar } else { 0.0 },
    ))
}

/// Upper-triangular 0/1 preferential-attachment matrix before mixing.
///
/// Nodes `0..=m` start as a complete graph. Each later node `v` then links to
/// `m` distinct earlier nodes drawn with probability proportional to their
/// current degree, redrawing duplicates. An edge between `u < v` is stored at
/// `(u, v)`. The generator is ChaCha8 seeded through `seed_from_u64`, so a given
/// `(n, m, seed)` always yields the same matrix.
pub fn pa_base(n: usize, m: usize, seed: u64) -> Result<DMatrix<f64>> {
    if m == 0 || m >= n {
        return Err(Error::Domain(format!(
            "attachment count must satisfy 1 <= m < n, got m = {m}, n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = DMatrix::zeros(n, n);
    let mut degree = vec![0usize; n];
    for v in 0..=m {
        for u in 0..v {
            e[(u, v)] = 1.0;
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    let mut targets = Vec::with_capacity(m);
    for v in (m + 1)..n {
        let dist = WeightedIndex::new(&degree[..v]).expect("earlier nodes have positive degree");
        targets.clear();
        while targets.len() < m {
            let u = dist.sample(&mut rng);
            if !targets.contains(&u) {
                targets.push(u);
            }
        }
        for &u in &targets {
            e[(u, v)] = 1.0;
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    Ok(e)
}

/// Preferential-attachment network `αE + (1 − α)Eᵀ`, see [`pa_base`].
pub fn pa_graph(n: usize, m: usize, seed: u64, alpha: f64) -> Result<DMatrix<f64>> {
    check_alpha(alpha)?;
    mix(&pa_base(n, m, seed)?, alpha)
}
