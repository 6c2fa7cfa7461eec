//! Revenue-maximizing prices through the single-level reduction.
//!
//! At an optimal price every agent is active, so prices and equilibrium actions
//! are linked by `p = a + G f(x) − Bx` with `B = 2·Diag(b)`. Substituting turns
//! the bilevel problem into maximizing
//!
//! ```text
//! J(x) = xᵀ(a + G f(x) − Bx)      over x ≥ 0,
//! ```
//!
//! which is strongly concave under the diagonal-dominance conditions. The
//! maximizer is found by projected gradient ascent with step `1/ν`, where `ν`
//! bounds the curvature of `J` on the region containing both the optimal and the
//! network-agnostic equilibria.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{ser_vec, GameSpec, NeOptions};
use crate::linalg::{lu_solve, spectral_radius};

pub const DEFAULT_PG_TOL: f64 = 1e-10;
pub const DEFAULT_PG_MAX_ITER: usize = 1_000_000;
/// Bisection stops once the bracket is narrower than this.
pub const DEFAULT_BISECTION_TOL: f64 = 1e-12;
/// Tolerance of the uniform-game test `a = ā1, b = b̄1, G1 = ḡ1`.
pub const UNIFORM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Serialize, serde::Deserialize)]
pub struct PgOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Keep the ℓ∞ length of every step in [`PricingSolution::step_history`].
    #[serde(default)]
    pub record_steps: bool,
}

impl Default for PgOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_PG_TOL,
            max_iter: DEFAULT_PG_MAX_ITER,
            record_steps: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PricingSolution {
    #[serde(serialize_with = "ser_vec")]
    pub x_star: DVector<f64>,
    #[serde(serialize_with = "ser_vec")]
    pub p_star: DVector<f64>,
    /// `J(x⋆)`
    pub revenue: f64,
    pub iterations: usize,
    /// `γ = 1/ν`
    pub step_size: f64,
    pub nu: f64,
    /// `‖∇J(x⋆)‖∞` at exit.
    pub grad_norm: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub step_history: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AgnosticBaseline {
    #[serde(serialize_with = "ser_vec")]
    pub p0: DVector<f64>,
    #[serde(serialize_with = "ser_vec")]
    pub x0: DVector<f64>,
    /// `J(x₀)`
    pub j0: f64,
    /// `p₀ᵀx₀`, equal to `j0` up to the equilibrium tolerance.
    pub price_revenue: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PoiReport {
    pub j_star: f64,
    pub j_agnostic: f64,
    /// `J(x⋆) / J(x₀)`
    pub poi: f64,
    /// Lower bound on `poi − 1`; `None` when the game does not admit it.
    pub lower_bound: Option<f64>,
    pub nu: f64,
    pub rho: f64,
    pub iterations: usize,
}

/// Elementwise brackets on the agnostic and optimal equilibria.
#[derive(Clone, Debug)]
pub struct ActionBounds {
    /// `½B⁻¹a`, below both `x₀` and `x⋆`.
    pub lower: DVector<f64>,
    /// `½(B − G)⁻¹a ≥ x₀`
    pub agnostic_upper: DVector<f64>,
    /// `½(B − (G + Gᵀ)/2)⁻¹a ≥ x⋆`
    pub optimal_upper: DVector<f64>,
}

impl ActionBounds {
    pub fn upper_max(&self) -> DVector<f64> {
        self.agnostic_upper.zip_map(&self.optimal_upper, f64::max)
    }
}

fn require_normalized(game: &GameSpec) -> Result<()> {
    if !game.is_normalized() {
        return Err(Error::NotNormalized(format!(
            "interaction {} needs f(0) = 0 and α = 1; call GameSpec::normalize first",
            game.f().label()
        )));
    }
    Ok(())
}

/// `J(x) = xᵀ(a + G f(x) − Bx)`.
pub fn revenue(game: &GameSpec, x: &DVector<f64>) -> Result<f64> {
    game.check_nonneg("x", x)?;
    Ok(revenue_unchecked(game, x))
}

fn revenue_unchecked(game: &GameSpec, x: &DVector<f64>) -> f64 {
    let margin = game.a() + game.g() * game.f_vec(x) - x.component_mul(game.b()) * 2.0;
    x.dot(&margin)
}

/// `∇J(x) = a − 2Bx + G f(x) + D_f(x) Gᵀ x`.
pub fn gradient(game: &GameSpec, x: &DVector<f64>) -> Result<DVector<f64>> {
    game.check_nonneg("x", x)?;
    Ok(gradient_unchecked(game, x))
}

fn gradient_unchecked(game: &GameSpec, x: &DVector<f64>) -> DVector<f64> {
    let gt_x = game.g().tr_mul(x);
    game.a() - x.component_mul(game.b()) * 4.0 + game.g() * game.f_vec(x) + game.f_prime_vec(x).component_mul(&gt_x)
}

/// `∂²J/∂xᵢ² = −4bᵢ + f″(xᵢ) Σⱼ Gⱼᵢxⱼ`, `∂²J/∂xᵢ∂xⱼ = Gᵢⱼ f′(xⱼ) + Gⱼᵢ f′(xᵢ)`.
pub fn hessian(game: &GameSpec, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    game.check_nonneg("x", x)?;
    let n = game.n();
    let g = game.g();
    let f = game.f();
    let d1 = game.f_prime_vec(x);
    let gt_x = g.tr_mul(x);
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -4.0 * game.b()[i] + gt_x[i] * f.second_deriv(x[i])
        } else {
            g[(i, j)] * d1[j] + g[(j, i)] * d1[i]
        }
    }))
}

/// `B − K` has a non-negative inverse iff `ρ(B⁻¹K) < 1` (for `K ≥ 0`).
fn require_inverse_positive(game: &GameSpec, k: &DMatrix<f64>, label: &str) -> Result<()> {
    let n = game.n();
    let scaled = DMatrix::from_fn(n, n, |i, j| k[(i, j)] / (2.0 * game.b()[i]));
    let rho = spectral_radius(&scaled)?;
    if !(rho < 1.0) {
        return Err(Error::AssumptionViolated(format!(
            "{label} is not inverse-positive: spectral radius of B⁻¹K is {rho}"
        )));
    }
    Ok(())
}

/// Elementwise brackets `½B⁻¹a`, `½(B−G)⁻¹a`, `½(B−(G+Gᵀ)/2)⁻¹a`.
pub fn action_bounds(game: &GameSpec) -> Result<ActionBounds> {
    let g = game.g();
    let sym = (g + g.transpose()) * 0.5;
    require_inverse_positive(game, g, "B − G")?;
    require_inverse_positive(game, &sym, "B − (G + Gᵀ)/2")?;
    let b_mat = game.b_matrix();
    let agnostic_upper = lu_solve(&(&b_mat - g), game.a())? * 0.5;
    let optimal_upper = lu_solve(&(&b_mat - &sym), game.a())? * 0.5;
    if agnostic_upper.iter().chain(optimal_upper.iter()).any(|v| *v < 0.0) {
        return Err(Error::AssumptionViolated(
            "upper action bound has a negative entry".into(),
        ));
    }
    Ok(ActionBounds {
        lower: game.a().component_div(game.b()) * 0.25,
        agnostic_upper,
        optimal_upper,
    })
}

/// `ν = ‖4b + (G + Gᵀ)1 + M Gᵀ x̄ᵐᵃˣ‖∞`.
pub fn nu_bound(game: &GameSpec) -> Result<f64> {
    let m = game
        .f()
        .curvature_m()
        .ok_or_else(|| Error::NotComputable(format!("interaction {} declares no curvature bound", game.f().label())))?;
    let bounds = action_bounds(game)?;
    Ok(nu_from_bounds(game, m, &bounds))
}

fn nu_from_bounds(game: &GameSpec, m: f64, bounds: &ActionBounds) -> f64 {
    let g = game.g();
    let xmax = bounds.upper_max();
    let degree = DVector::from_fn(game.n(), |i, _| g.row(i).sum() + g.column(i).sum());
    (game.b() * 4.0 + degree + g.tr_mul(&xmax) * m).amax()
}

/// Projected gradient ascent on `J` from `½B⁻¹a` with step `1/ν`; recovers
/// `p⋆ = a + G f(x⋆) − Bx⋆`.
pub fn solve_optimal_price(game: &GameSpec, opts: &PgOptions) -> Result<PricingSolution> {
    require_normalized(game)?;
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let nu = nu_bound(game)?;
    let gamma = 1.0 / nu;
    let mut x = game.a().component_div(game.b()) * 0.25;
    let mut steps = Vec::new();
    let mut step = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let grad = gradient_unchecked(game, &x);
        let next = (&x + grad * gamma).map(|v| v.max(0.0));
        step = (&next - &x).amax();
        x = next;
        if opts.record_steps {
            steps.push(step);
        }
        if !step.is_finite() {
            break;
        }
        if step <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            what: "projected gradient",
            iterations,
            residual: step,
        });
    }
    if let Some(index) = x.iter().position(|v| *v <= 0.0) {
        return Err(Error::BoundaryOptimum { index });
    }
    let p_star = game.a() + game.g() * game.f_vec(&x) - x.component_mul(game.b()) * 2.0;
    let revenue = revenue_unchecked(game, &x);
    let grad_norm = gradient_unchecked(game, &x).amax();
    Ok(PricingSolution {
        x_star: x,
        p_star,
        revenue,
        iterations,
        step_size: gamma,
        nu,
        grad_norm,
        step_history: steps,
    })
}

/// Price `a/2`, which is optimal when the network is ignored, and the revenue it
/// actually earns in the networked game.
pub fn agnostic_baseline(game: &GameSpec, ne: &NeOptions) -> Result<AgnosticBaseline> {
    require_normalized(game)?;
    let p0 = game.a() * 0.5;
    let report = game.solve_ne(&p0, ne)?;
    let x0 = report.x;
    let j0 = revenue_unchecked(game, &x0);
    let price_revenue = p0.dot(&x0);
    Ok(AgnosticBaseline {
        p0,
        x0,
        j0,
        price_revenue,
        iterations: report.iterations,
    })
}

/// Lower bound on `J(x⋆)/J(x₀) − 1`:
///
/// ```text
/// (4ρ/ν²) · (aᵀB⁻¹G h(½B⁻¹a))² / ((aᵀ(B−G)⁻¹a) · ‖(B−G)⁻¹a‖²)
/// ```
///
/// with `h(x) = f(x) − f′(x)x` applied entrywise.
pub fn poi_lower_bound(game: &GameSpec) -> Result<f64> {
    require_normalized(game)?;
    let report = game.check_assumptions()?;
    if !report.assumption3_ok {
        return Err(Error::AssumptionViolated(format!(
            "diagonal dominance fails: rho = {}, rho' = {}",
            report.rho, report.rho_prime
        )));
    }
    let nu = nu_bound(game)?;
    Ok(poi_bound_with(game, report.rho, nu))
}

fn poi_bound_with(game: &GameSpec, rho: f64, nu: f64) -> f64 {
    let a = game.a();
    let b2 = game.b() * 2.0;
    let z = game.a().component_div(game.b()) * 0.25;
    let h = z.map(|v| game.f().concavity_gap(v));
    let weighted = a.component_div(&b2);
    let numerator = weighted.dot(&(game.g() * h)).powi(2);
    let y = match lu_solve(&(game.b_matrix() - game.g()), a) {
        Ok(y) => y,
        Err(_) => return f64::NAN,
    };
    let denominator = a.dot(&y) * y.norm_squared();
    4.0 * rho / (nu * nu) * numerator / denominator
}

/// Optimal and agnostic revenues, their ratio and the lower bound on the gap.
pub fn poi_report(game: &GameSpec, pg: &PgOptions, ne: &NeOptions) -> Result<PoiReport> {
    let solution = solve_optimal_price(game, pg)?;
    let baseline = agnostic_baseline(game, ne)?;
    let rho = game.check_assumptions()?.rho;
    let lower_bound = poi_lower_bound(game).ok();
    Ok(PoiReport {
        j_star: solution.revenue,
        j_agnostic: baseline.j0,
        poi: solution.revenue / baseline.j0,
        lower_bound,
        nu: solution.nu,
        rho,
        iterations: solution.iterations,
    })
}

/// Scalars of a game with `a = ā1`, `b = b̄1`, `G1 = ḡ1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UniformGame {
    pub n: usize,
    pub a_bar: f64,
    pub b_bar: f64,
    pub g_bar: f64,
}

pub fn uniform_reduce(game: &GameSpec) -> Result<UniformGame> {
    let n = game.n();
    let close = |x: f64, y: f64| (x - y).abs() <= UNIFORM_TOL * x.abs().max(y.abs()).max(1.0);
    let a_bar = game.a()[0];
    if let Some(i) = (0..n).find(|&i| !close(game.a()[i], a_bar)) {
        return Err(Error::NotUniform(format!(
            "a[{i}] = {} differs from a[0] = {a_bar}",
            game.a()[i]
        )));
    }
    let b_bar = game.b()[0];
    if let Some(i) = (0..n).find(|&i| !close(game.b()[i], b_bar)) {
        return Err(Error::NotUniform(format!(
            "b[{i}] = {} differs from b[0] = {b_bar}",
            game.b()[i]
        )));
    }
    let g_bar = game.g().row(0).sum();
    if let Some(i) = (0..n).find(|&i| !close(game.g().row(i).sum(), g_bar)) {
        return Err(Error::NotUniform(format!(
            "row sums of G differ: row {i} sums to {}, row 0 to {g_bar}",
            game.g().row(i).sum()
        )));
    }
    Ok(UniformGame { n, a_bar, b_bar, g_bar })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct UniformPrice {
    pub p_bar_star: f64,
    pub x_bar_star: f64,
    /// `J(x̄⋆1)`
    pub revenue: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct UniformAgnostic {
    pub x_bar_0: f64,
    /// `J(x̄₀1) = (n/2)·ā·x̄₀`
    pub j0: f64,
    pub iterations: usize,
}

fn uniform_checked(game: &GameSpec) -> Result<UniformGame> {
    require_normalized(game)?;
    let u = uniform_reduce(game)?;
    if !(4.0 * u.b_bar - 2.0 * u.g_bar > 0.0) {
        return Err(Error::AssumptionViolated(format!(
            "4b̄ − 2ḡ = {} must be positive",
            4.0 * u.b_bar - 2.0 * u.g_bar
        )));
    }
    Ok(u)
}

/// Root of a decreasing function by bisection; returns the midpoint and the
/// number of halvings.
fn bisect_decreasing(lo: f64, hi: f64, tol: f64, func: impl Fn(f64) -> f64) -> Result<(f64, usize)> {
    let (flo, fhi) = (func(lo), func(hi));
    if !(flo >= 0.0 && fhi <= 0.0) {
        return Err(Error::Bracket { lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut iterations = 0;
    while hi - lo > tol && iterations < 2_000 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if func(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), iterations))
}

/// Optimal single price of a uniform game: `x̄⋆` solves
/// `ā − 4b̄x + ḡ(x f′(x) + f(x)) = 0` on `[0, ā/(4b̄ − 2ḡ)]`.
pub fn solve_uniform_price(game: &GameSpec, tol: f64) -> Result<UniformPrice> {
    let u = uniform_checked(game)?;
    let f = game.f();
    let hi = u.a_bar / (4.0 * u.b_bar - 2.0 * u.g_bar) * 1.1;
    let (x, iterations) = bisect_decreasing(0.0, hi, tol, |x| {
        u.a_bar - 4.0 * u.b_bar * x + u.g_bar * (x * f.deriv(x) + f.eval(x))
    })?;
    let p = u.a_bar + u.g_bar * f.eval(x) - 2.0 * u.b_bar * x;
    Ok(UniformPrice {
        p_bar_star: p,
        x_bar_star: x,
        revenue: u.n as f64 * x * p,
        iterations,
    })
}

/// Uniform equilibrium under the agnostic price `ā/2`: `x̄₀` solves
/// `ā − 4b̄x + 2ḡ f(x) = 0` on `[ā/(4b̄), ā/(4b̄ − 2ḡ)]`.
pub fn uniform_agnostic(game: &GameSpec, tol: f64) -> Result<UniformAgnostic> {
    let u = uniform_checked(game)?;
    let f = game.f();
    let lo = u.a_bar / (4.0 * u.b_bar) * 0.9;
    let hi = u.a_bar / (4.0 * u.b_bar - 2.0 * u.g_bar) * 1.1;
    let (x, iterations) = bisect_decreasing(lo, hi, tol, |x| u.a_bar - 4.0 * u.b_bar * x + 2.0 * u.g_bar * f.eval(x))?;
    Ok(UniformAgnostic {
        x_bar_0: x,
        j0: 0.5 * u.n as f64 * u.a_bar * x,
        iterations,
    })
}

/// `((ḡ/ā)(1 − ḡ/(2b̄)) h(ā/(4b̄)))²`.
pub fn uniform_poi_lower_bound(game: &GameSpec) -> Result<f64> {
    let u = uniform_reduce(game)?;
    let h = game.f().concavity_gap(u.a_bar / (4.0 * u.b_bar));
    Ok((u.g_bar / u.a_bar * (1.0 - u.g_bar / (2.0 * u.b_bar)) * h).powi(2))
}
