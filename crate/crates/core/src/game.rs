//! Game instances `Game(a, b, G, f; p)` and their Nash equilibria.
//!
//! Agent `i` earns `(Σⱼ Gᵢⱼ f(xⱼ) + aᵢ − pᵢ)·xᵢ − bᵢ·xᵢ²` for an action `xᵢ ≥ 0`.
//! The equilibrium is the fixed point of the best-response map
//! `Tᵢ(x) = max{0, (Σⱼ Gᵢⱼ f(xⱼ) + aᵢ − pᵢ) / (2bᵢ)}`, which is a contraction
//! whenever `2bᵢ > α Σⱼ Gᵢⱼ` for every agent.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::InteractionFunction;
use crate::linalg::spectral_radius;

/// Default ℓ∞ stopping tolerance of the equilibrium iteration.
pub const DEFAULT_NE_TOL: f64 = 1e-10;
pub const DEFAULT_NE_MAX_ITER: usize = 100_000;

/// A game instance without prices.
#[derive(Clone, Debug, PartialEq)]
pub struct GameSpec {
    a: DVector<f64>,
    b: DVector<f64>,
    g: DMatrix<f64>,
    f: InteractionFunction,
}

impl GameSpec {
    /// Validates `a > 0`, `b > 0`, `G ≥ 0` with zero diagonal, and matching shapes.
    pub fn new(a: DVector<f64>, b: DVector<f64>, g: DMatrix<f64>, f: InteractionFunction) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::InvalidGame("a game needs at least one agent".into()));
        }
        if b.len() != n || g.nrows() != n || g.ncols() != n {
            return Err(Error::Dimension(format!(
                "a has {n} entries, b has {}, G is {}x{}",
                b.len(),
                g.nrows(),
                g.ncols()
            )));
        }
        if let Some((i, v)) = a.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidGame(format!("a[{i}] = {v} must be positive")));
        }
        if let Some((i, v)) = b.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidGame(format!("b[{i}] = {v} must be positive")));
        }
        for i in 0..n {
            if g[(i, i)] != 0.0 {
                return Err(Error::InvalidGame(format!("G[{i}][{i}] = {} must be zero", g[(i, i)])));
            }
            for j in 0..n {
                let v = g[(i, j)];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidGame(format!("G[{i}][{j}] = {v} must be non-negative")));
                }
            }
        }
        Ok(Self { a, b, g, f })
    }

    /// Game with `a = ā·1` and `b = b̄·1`.
    pub fn uniform(a: f64, b: f64, g: DMatrix<f64>, f: InteractionFunction) -> Result<Self> {
        let n = g.nrows();
        Self::new(DVector::from_element(n, a), DVector::from_element(n, b), g, f)
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &DVector<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn f(&self) -> &InteractionFunction {
        &self.f
    }

    /// `B = 2·Diag(b)`.
    pub fn b_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&(&self.b * 2.0))
    }

    /// `f` applied entrywise.
    pub fn f_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        x.map(|v| self.f.eval(v))
    }

    pub fn f_prime_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        x.map(|v| self.f.deriv(v))
    }

    pub(crate) fn check_len(&self, what: &str, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.n() {
            return Err(Error::Dimension(format!(
                "{what} has {} entries, game has {}",
                v.len(),
                self.n()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_nonneg(&self, what: &str, x: &DVector<f64>) -> Result<()> {
        self.check_len(what, x)?;
        if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::Domain(format!("{what}[{i}] = {v} must be non-negative")));
        }
        Ok(())
    }

    /// Payoff of agent `i` at profile `x` under its own price `p_i`.
    pub fn payoff(&self, i: usize, x: &DVector<f64>, p_i: f64) -> Result<f64> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange { index: i, n: self.n() });
        }
        self.check_nonneg("x", x)?;
        let peer: f64 = (0..self.n()).map(|j| self.g[(i, j)] * self.f.eval(x[j])).sum();
        Ok((peer + self.a[i] - p_i) * x[i] - self.b[i] * x[i] * x[i])
    }

    /// Best-response map `T(x)`.
    pub fn best_response(&self, x: &DVector<f64>, p: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len("x", x)?;
        self.check_len("p", p)?;
        Ok(self.best_response_unchecked(x, p))
    }

    pub(crate) fn best_response_unchecked(&self, x: &DVector<f64>, p: &DVector<f64>) -> DVector<f64> {
        let peer = &self.g * self.f_vec(x);
        DVector::from_fn(self.n(), |i, _| {
            ((peer[i] + self.a[i] - p[i]) / (2.0 * self.b[i])).max(0.0)
        })
    }

    /// Iterates `xᵏ⁺¹ = T(xᵏ)` from `start` and reports whatever state it reached.
    pub fn iterate_ne(&self, p: &DVector<f64>, start: &DVector<f64>, opts: &NeOptions) -> Result<SolveReport> {
        self.check_len("p", p)?;
        self.check_nonneg("start", start)?;
        if !(opts.tol > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {}", opts.tol)));
        }
        let mut x = start.clone();
        let mut residual = f64::INFINITY;
        for k in 1..=opts.max_iter {
            let next = self.best_response_unchecked(&x, p);
            residual = (&next - &x).amax();
            x = next;
            if !residual.is_finite() {
                break;
            }
            if residual <= opts.tol {
                return Ok(SolveReport {
                    x,
                    iterations: k,
                    final_residual: residual,
                    converged: true,
                });
            }
        }
        Ok(SolveReport {
            x,
            iterations: opts.max_iter,
            final_residual: residual,
            converged: false,
        })
    }

    /// Nash equilibrium under prices `p`, iterating from `x⁰ = 0`.
    pub fn solve_ne(&self, p: &DVector<f64>, opts: &NeOptions) -> Result<SolveReport> {
        self.solve_ne_from(p, &DVector::zeros(self.n()), opts)
    }

    pub fn solve_ne_from(&self, p: &DVector<f64>, start: &DVector<f64>, opts: &NeOptions) -> Result<SolveReport> {
        let report = self.iterate_ne(p, start, opts)?;
        if !report.converged {
            return Err(Error::NotConverged {
                what: "equilibrium iteration",
                iterations: report.iterations,
                residual: report.final_residual,
            });
        }
        Ok(report)
    }

    /// Lipschitz/in-degree condition, contraction factor and the maximal
    /// diagonal-dominance margins `ρ`, `ρ′`.
    pub fn check_assumptions(&self) -> Result<AssumptionReport> {
        let n = self.n();
        let alpha = self.f.lipschitz_alpha();
        let row: Vec<f64> = (0..n).map(|i| self.g.row(i).sum()).collect();
        let col: Vec<f64> = (0..n).map(|j| self.g.column(j).sum()).collect();
        let rho = (0..n)
            .map(|i| 2.0 * self.b[i] - 0.5 * (row[i] + col[i]))
            .fold(f64::INFINITY, f64::min);
        let rho_prime = (0..n).map(|i| 2.0 * self.b[i] - row[i]).fold(f64::INFINITY, f64::min);
        let assumption1_ok = (0..n).all(|i| 2.0 * self.b[i] > alpha * row[i]);
        let linf_contraction = (0..n).map(|i| alpha * row[i] / (2.0 * self.b[i])).fold(0.0, f64::max);
        let scaled = DMatrix::from_fn(n, n, |i, j| self.g[(i, j)] / (2.0 * self.b[i]));
        let contraction_factor = alpha * spectral_radius(&scaled)?;
        debug_assert!(!assumption1_ok || contraction_factor < 1.0);
        Ok(AssumptionReport {
            lipschitz_alpha: alpha,
            contraction_factor,
            linf_contraction,
            rho,
            rho_prime,
            assumption1_ok,
            assumption3_ok: rho > 0.0 && rho_prime > 0.0,
        })
    }

    /// The equivalent game with `f̂(0) = 0` and `α = 1`:
    /// `â = a + f(0)·G·1`, `Ĝ = αG`, `f̂ = (f − f(0))/α`.
    pub fn normalize(&self) -> Result<GameSpec> {
        let alpha = self.f.lipschitz_alpha();
        let f0 = self.f.eval(0.0);
        let a = &self.a + row_sums(&self.g) * f0;
        GameSpec::new(a, self.b.clone(), &self.g * alpha, self.f.normalized())
    }

    pub fn is_normalized(&self) -> bool {
        self.f.is_normalized()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GameDoc::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: GameDoc = serde_json::from_str(s)?;
        doc.try_into()
    }
}

fn row_sums(g: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(g.nrows(), |i, _| g.row(i).sum())
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NeOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NeOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_NE_TOL,
            max_iter: DEFAULT_NE_MAX_ITER,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    #[serde(serialize_with = "ser_vec")]
    pub x: DVector<f64>,
    pub iterations: usize,
    /// ℓ∞ change of the last iterate.
    pub final_residual: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    pub lipschitz_alpha: f64,
    /// `α·ρ(B⁻¹G)`.
    pub contraction_factor: f64,
    /// `maxᵢ α Σⱼ Gᵢⱼ / (2bᵢ)`, the ℓ∞ contraction modulus of `T`.
    pub linf_contraction: f64,
    /// `minᵢ [2bᵢ − ½ Σⱼ (Gᵢⱼ + Gⱼᵢ)]`
    pub rho: f64,
    /// `minᵢ [2bᵢ − Σⱼ Gᵢⱼ]`
    pub rho_prime: f64,
    pub assumption1_ok: bool,
    pub assumption3_ok: bool,
}

pub(crate) fn ser_vec<S: serde::Serializer>(v: &DVector<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

/// JSON form `{n, a, b, G, f}` with row-major `G`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDoc {
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    pub f: InteractionFunction,
}

impl From<&GameSpec> for GameDoc {
    fn from(game: &GameSpec) -> Self {
        GameDoc {
            n: game.n(),
            a: game.a.iter().copied().collect(),
            b: game.b.iter().copied().collect(),
            g: (0..game.n()).map(|i| game.g.row(i).iter().copied().collect()).collect(),
            f: game.f.clone(),
        }
    }
}

impl TryFrom<GameDoc> for GameSpec {
    type Error = Error;

    fn try_from(doc: GameDoc) -> Result<Self> {
        let n = doc.n;
        if doc.a.len() != n || doc.b.len() != n || doc.g.len() != n {
            return Err(Error::Dimension(format!(
                "n = {n} but a, b, G have {}, {}, {} entries",
                doc.a.len(),
                doc.b.len(),
                doc.g.len()
            )));
        }
        if let Some((i, row)) = doc.g.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Dimension(format!(
                "G row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        let g = DMatrix::from_fn(n, n, |i, j| doc.g[i][j]);
        GameSpec::new(DVector::from_vec(doc.a), DVector::from_vec(doc.b), g, doc.f)
    }
}
