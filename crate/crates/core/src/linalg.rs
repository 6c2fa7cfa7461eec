//! Dense linear-algebra helpers: Perron spectral radius of non-negative
//! matrices, LU solves and Gershgorin bounds.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct PowerOptions {
    /// Relative width of the Collatz–Wielandt bracket at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 1_000_000,
        }
    }
}

/// Spectral radius of an entrywise non-negative square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    spectral_radius_with(m, PowerOptions::default())
}

/// Spectral radius by power iteration on each strongly connected block.
///
/// The spectral radius of a non-negative matrix is the largest Perron value of
/// the irreducible diagonal blocks of its Frobenius normal form. Each block is
/// iterated as `A + sI` (`s > 0` makes the block primitive, so cyclic patterns
/// such as bipartite stars do not oscillate) starting from the all-ones vector.
/// For a positive iterate `v`, `min (Av)ᵢ/vᵢ ≤ ρ(A) ≤ max (Av)ᵢ/vᵢ`, and the
/// iteration stops once that bracket is narrower than `tol` relative to its top.
pub fn spectral_radius_with(m: &DMatrix<f64>, opts: PowerOptions) -> Result<f64> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Dimension(format!(
            "spectral radius of a {}x{} matrix",
            n,
            m.ncols()
        )));
    }
    if let Some(v) = m.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Domain(format!(
            "spectral radius requires non-negative finite entries, found {v}"
        )));
    }
    let mut graph = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)] > 0.0 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut rho = 0.0f64;
    for component in tarjan_scc(&graph) {
        let idx: Vec<usize> = component.iter().map(|v| v.index()).collect();
        let value = if idx.len() == 1 {
            m[(idx[0], idx[0])]
        } else {
            let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
            irreducible_perron_value(&block, opts)?
        };
        rho = rho.max(value);
    }
    Ok(rho)
}

fn irreducible_perron_value(a: &DMatrix<f64>, opts: PowerOptions) -> Result<f64> {
    let k = a.nrows();
    let shift = 0.5 * (0..k).map(|i| a.row(i).sum()).fold(0.0, f64::max);
    let mut v = DVector::from_element(k, 1.0);
    let mut av = a * &v;
    let mut width = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..k {
            let r = av[i] / v[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        width = hi - lo;
        if width <= opts.tol * hi {
            return Ok(0.5 * (lo + hi));
        }
        v = &av + &v * shift;
        let top = v.amax();
        v /= top;
        av = a * &v;
    }
    Err(Error::NotConverged {
        what: "power iteration",
        iterations: opts.max_iter,
        residual: width,
    })
}

/// Solves `a·x = rhs` by LU decomposition.
pub fn lu_solve(a: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() != a.ncols() || a.nrows() != rhs.len() {
        return Err(Error::Dimension(format!(
            "cannot solve {}x{} system with rhs of length {}",
            a.nrows(),
            a.ncols(),
            rhs.len()
        )));
    }
    let x = a
        .clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::AssumptionViolated("linear system is singular".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::AssumptionViolated(
            "linear system is numerically singular".into(),
        ));
    }
    Ok(x)
}

/// Upper Gershgorin bound on the real parts of the eigenvalues:
/// `maxᵢ (mᵢᵢ + Σ_{j≠i} |mᵢⱼ|)`.
pub fn gershgorin_upper(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m[(i, i)] + (0..m.ncols()).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Lower Gershgorin bound: `minᵢ (mᵢᵢ − Σ_{j≠i} |mᵢⱼ|)`.
pub fn gershgorin_lower(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m[(i, i)] - (0..m.ncols()).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}
