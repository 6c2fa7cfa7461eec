//! Parameter sweeps over network families.
//!
//! An α-sweep varies the mixing weight of a star or preferential-attachment
//! network and records how much revenue the network-agnostic price leaves on
//! the table. A ḡ-sweep varies the weight of a ring and compares the measured
//! gap with the matching lower bound, either with per-agent prices or with a
//! single uniform price.

mod oracle;
mod output;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameSpec, NeOptions};
use crate::graphs::{Family, GraphParams};
use crate::interaction::InteractionFunction;
use crate::pricing::{self, PgOptions, DEFAULT_BISECTION_TOL};

pub use oracle::{brute_force_optimal, OracleResult};
pub use output::{emit_csv, emit_plot, render_csv, render_plot, PlotKind, CSV_HEADER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    AlphaSweep,
    GbarSweep,
    Single,
}

/// Which gap a ḡ-sweep measures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GbarMode {
    /// Per-agent prices, compared with the general lower bound.
    #[default]
    Discriminatory,
    /// One price for everybody, compared with the uniform-game bound.
    Uniform,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub ne: NeOptions,
    pub pg: PgOptions,
    pub bisection: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ne: NeOptions::default(),
            pg: PgOptions::default(),
            bisection: DEFAULT_BISECTION_TOL,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub graph: GraphParams,
    pub a_scalar: f64,
    pub b_scalar: f64,
    pub f_kind: InteractionFunction,
    /// Defaults to 101 points on `[0, 1]` for α and 100 midpoints of `(0, 1)` for ḡ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub gbar_mode: GbarMode,
    /// Use `b = ḡ` at every ring point instead of `b_scalar`.
    #[serde(default)]
    pub b_tracks_gbar: bool,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Vec<f64> {
        match &self.sweep_grid {
            Some(g) => g.clone(),
            None => match self.experiment {
                Experiment::AlphaSweep => default_alpha_grid(),
                Experiment::GbarSweep => default_gbar_grid(),
                Experiment::Single => vec![self.single_param()],
            },
        }
    }

    fn single_param(&self) -> f64 {
        match self.graph.family {
            Family::Ring => self.graph.g_bar,
            _ => self.graph.alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.a_scalar > 0.0) || !(self.b_scalar > 0.0 || self.b_tracks_gbar) {
            return bad(format!(
                "a_scalar = {} and b_scalar = {} must be positive",
                self.a_scalar, self.b_scalar
            ));
        }
        match (self.experiment, self.graph.family) {
            (Experiment::AlphaSweep, Family::Ring) => {
                return bad("alpha sweeps need a star or preferential_attachment graph".into())
            }
            (Experiment::GbarSweep, Family::Star | Family::PreferentialAttachment) => {
                return bad("gbar sweeps need a ring graph".into())
            }
            _ => {}
        }
        if let Some(grid) = &self.sweep_grid {
            if grid.is_empty() {
                return bad("sweep_grid is empty".into());
            }
            if grid.windows(2).any(|w| !(w[0] < w[1])) {
                return bad("sweep_grid must be strictly increasing".into());
            }
            let valid = |v: &f64| match self.experiment {
                Experiment::AlphaSweep => (0.0..=1.0).contains(v),
                _ => v.is_finite() && *v >= 0.0,
            };
            if let Some(v) = grid.iter().find(|v| !valid(v)) {
                return bad(format!("sweep_grid value {v} is outside the parameter range"));
            }
        }
        Ok(())
    }
}

pub fn default_alpha_grid() -> Vec<f64> {
    (0..=100).map(|k| k as f64 / 100.0).collect()
}

pub fn default_gbar_grid() -> Vec<f64> {
    (0..100).map(|k| (k as f64 + 0.5) / 100.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    /// The instance violates the assumptions the bound needs.
    Skipped(String),
    Failed(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub j_star: f64,
    pub j_agnostic: f64,
    /// `J(x₀)/J(x⋆)`
    pub inverse_poi: f64,
    /// `J(x⋆)/J(x₀) − 1`
    pub gap: f64,
    pub bound: Option<f64>,
    pub iterations: usize,
    #[serde(flatten)]
    pub status: RowStatus,
}

impl SweepRow {
    fn with_status(param: f64, status: RowStatus) -> Self {
        Self {
            param,
            j_star: f64::NAN,
            j_agnostic: f64::NAN,
            inverse_poi: f64::NAN,
            gap: f64::NAN,
            bound: None,
            iterations: 0,
            status,
        }
    }

    fn measured(param: f64, j_star: f64, j_agnostic: f64, bound: Option<f64>, iterations: usize) -> Self {
        Self {
            param,
            j_star,
            j_agnostic,
            inverse_poi: j_agnostic / j_star,
            gap: j_star / j_agnostic - 1.0,
            bound,
            iterations,
            status: RowStatus::Ok,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }
}

/// Runs the experiment named in the config.
pub fn run(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    match config.experiment {
        Experiment::AlphaSweep => run_alpha_sweep(config),
        Experiment::GbarSweep => run_gbar_sweep(config),
        Experiment::Single => run_single(config),
    }
}

pub fn run_alpha_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    if config.experiment != Experiment::AlphaSweep {
        return Err(Error::Config("run_alpha_sweep needs experiment = alpha_sweep".into()));
    }
    Ok(config
        .grid()
        .into_par_iter()
        .map(|alpha| {
            let graph = GraphParams { alpha, ..config.graph };
            discriminatory_point(config, alpha, graph, config.b_scalar)
        })
        .collect())
}

pub fn run_gbar_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    if config.experiment != Experiment::GbarSweep {
        return Err(Error::Config("run_gbar_sweep needs experiment = gbar_sweep".into()));
    }
    Ok(config
        .grid()
        .into_par_iter()
        .map(|g_bar| ring_point(config, g_bar))
        .collect())
}

fn run_single(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let param = config.single_param();
    Ok(vec![match config.graph.family {
        Family::Ring => ring_point(config, param),
        _ => discriminatory_point(config, param, config.graph, config.b_scalar),
    }])
}

fn ring_point(config: &ExperimentConfig, g_bar: f64) -> SweepRow {
    let b = if config.b_tracks_gbar { g_bar } else { config.b_scalar };
    if !(b > 0.0) {
        return SweepRow::with_status(g_bar, RowStatus::Skipped(format!("b = {b} is not positive")));
    }
    let graph = GraphParams { g_bar, ..config.graph };
    match config.gbar_mode {
        GbarMode::Discriminatory => discriminatory_point(config, g_bar, graph, b),
        GbarMode::Uniform => uniform_point(config, g_bar, graph, b),
    }
}

fn build_game(config: &ExperimentConfig, graph: GraphParams, b: f64) -> Result<GameSpec> {
    let game = GameSpec::uniform(config.a_scalar, b, graph.build()?, config.f_kind.clone())?;
    if game.is_normalized() {
        Ok(game)
    } else {
        game.normalize()
    }
}

fn discriminatory_point(config: &ExperimentConfig, param: f64, graph: GraphParams, b: f64) -> SweepRow {
    let game = match build_game(config, graph, b) {
        Ok(g) => g,
        Err(e) => return SweepRow::with_status(param, RowStatus::Failed(e.to_string())),
    };
    if graph.family == Family::Ring {
        match game.check_assumptions() {
            Ok(r) if r.assumption3_ok => {}
            Ok(r) => {
                return SweepRow::with_status(
                    param,
                    RowStatus::Skipped(format!(
                        "diagonal dominance fails: rho = {}, rho' = {}",
                        r.rho, r.rho_prime
                    )),
                )
            }
            Err(e) => return SweepRow::with_status(param, RowStatus::Failed(e.to_string())),
        }
    }
    let tol = &config.tolerances;
    match pricing::poi_report(&game, &tol.pg, &tol.ne) {
        Ok(r) => SweepRow::measured(param, r.j_star, r.j_agnostic, r.lower_bound, r.iterations),
        Err(e) => SweepRow::with_status(param, RowStatus::Failed(e.to_string())),
    }
}

fn uniform_point(config: &ExperimentConfig, param: f64, graph: GraphParams, b: f64) -> SweepRow {
    let game = match build_game(config, graph, b) {
        Ok(g) => g,
        Err(e) => return SweepRow::with_status(param, RowStatus::Failed(e.to_string())),
    };
    match game.check_assumptions() {
        Ok(r) if r.assumption3_ok => {}
        Ok(r) => {
            return SweepRow::with_status(
                param,
                RowStatus::Skipped(format!(
                    "diagonal dominance fails: rho = {}, rho' = {}",
                    r.rho, r.rho_prime
                )),
            )
        }
        Err(e) => return SweepRow::with_status(param, RowStatus::Failed(e.to_string())),
    }
    let tol = config.tolerances.bisection;
    let result = pricing::solve_uniform_price(&game, tol).and_then(|opt| {
        let agn = pricing::uniform_agnostic(&game, tol)?;
        let bound = pricing::uniform_poi_lower_bound(&game)?;
        Ok((opt, agn, bound))
    });
    match result {
        Ok((opt, agn, bound)) => SweepRow::measured(param, opt.revenue, agn.j0, Some(bound), opt.iterations),
        Err(e) => SweepRow::with_status(param, RowStatus::Failed(e.to_string())),
    }
}

/// Location of the largest inverse PoI along a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    /// Interpolated location.
    pub param: f64,
    pub value: f64,
    pub grid_param: f64,
    pub grid_value: f64,
}

/// Largest `inverse_poi` among successful rows, refined by fitting a parabola
/// through the best grid point and its two neighbors.
pub fn peak_inverse_poi(rows: &[SweepRow]) -> Option<Peak> {
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.is_ok() && r.inverse_poi.is_finite()).collect();
    let best = (0..ok.len()).max_by(|&i, &j| ok[i].inverse_poi.total_cmp(&ok[j].inverse_poi))?;
    let (gp, gv) = (ok[best].param, ok[best].inverse_poi);
    let mut peak = Peak {
        param: gp,
        value: gv,
        grid_param: gp,
        grid_value: gv,
    };
    if best == 0 || best + 1 == ok.len() {
        return Some(peak);
    }
    let (x0, y0) = (ok[best - 1].param, ok[best - 1].inverse_poi);
    let (x2, y2) = (ok[best + 1].param, ok[best + 1].inverse_poi);
    // parabola through three points in Newton form
    let d1 = (gv - y0) / (gp - x0);
    let d2 = (y2 - gv) / (x2 - gp);
    let curv = (d2 - d1) / (x2 - x0);
    if curv < 0.0 {
        let vertex = 0.5 * (x0 + gp) - d1 / (2.0 * curv);
        if vertex > x0 && vertex < x2 {
            peak.param = vertex;
            peak.value = y0 + d1 * (vertex - x0) + curv * (vertex - x0) * (vertex - gp);
        }
    }
    Some(peak)
}
