//! Immersed-interface finite-difference solver for piecewise-constant tensors.
//!
//! Regular nodes use the plain 9-point stencil of their own side. Irregular
//! nodes (3×3 block straddling Γ) additionally carry the jump-relation
//! corrections built in [`assemble`]. Outer boundary values are Dirichlet data
//! from the manufactured field.

pub mod assemble;
pub mod grid;
pub mod krylov;

use nalgebra::DVector;

pub use assemble::{
    discretize, jump_expansion, stencil, taylor_basis, AssemblyOptions, CorrectionTerm,
    Discretization, IrregularPoint, JumpExpansion,
};
pub use grid::{Grid, GridSpec};
pub use krylov::{KrylovMethod, KrylovOptions, KrylovReport};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::manufactured::ManufacturedCase;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverOptions {
    pub assembly: AssemblyOptions,
    pub krylov: KrylovOptions,
}

impl SolverOptions {
    pub fn without_corrections() -> Self {
        Self {
            assembly: AssemblyOptions {
                corrections: false,
                ..Default::default()
            },
            ..Default::default()
        }
    }
}

/// Node values on the full grid (boundary included).
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub report: KrylovReport,
}

/// One node of a solution compared with the exact field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeError {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub error: f64,
}

impl GridSolution {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.spec.index(i, j)]
    }

    /// `(x, y, u, u − u_exact)` for every node, row-major.
    pub fn node_errors(&self, case: &ManufacturedCase) -> Vec<NodeError> {
        let spec = self.grid.spec;
        let m = spec.nodes_per_side();
        (0..m)
            .flat_map(|j| (0..m).map(move |i| (i, j)))
            .map(|(i, j)| {
                let p = spec.node(i, j);
                let u = self.value(i, j);
                NodeError {
                    x: p.x,
                    y: p.y,
                    u,
                    error: u - case.exact(p),
                }
            })
            .collect()
    }

    /// Max and discrete L2 norms of the error over interior nodes.
    pub fn errors(&self, case: &ManufacturedCase) -> (f64, f64) {
        let spec = self.grid.spec;
        let (mut max, mut sum) = (0.0f64, 0.0);
        for (i, j) in self.grid.interior() {
            let e = self.value(i, j) - case.exact(spec.node(i, j));
            max = max.max(e.abs());
            sum += e * e;
        }
        (max, (sum * spec.hx() * spec.hy()).sqrt())
    }
}

impl Discretization {
    /// Interior unknowns of a full-grid node vector.
    pub fn restrict(&self, values: &[f64]) -> DVector<f64> {
        let spec = self.grid.spec;
        DVector::from_iterator(
            self.grid.unknowns(),
            self.grid.interior().map(|(i, j)| values[spec.index(i, j)]),
        )
    }

    /// `M u − b` for a full-grid node vector.
    pub fn residual(&self, values: &[f64]) -> DVector<f64> {
        &self.matrix * self.restrict(values) - &self.rhs
    }

    /// Exact solution sampled at every node.
    pub fn exact_values(&self, case: &ManufacturedCase) -> Vec<f64> {
        let spec = self.grid.spec;
        let m = spec.nodes_per_side();
        (0..m)
            .flat_map(|j| (0..m).map(move |i| (i, j)))
            .map(|(i, j)| case.exact(spec.node(i, j)))
            .collect()
    }

    pub fn solve(&self, opts: &KrylovOptions) -> Result<GridSolution> {
        let (x, report) = krylov::solve(&self.matrix, &self.rhs, opts)?;
        let mut values = self.boundary.clone();
        for (k, (i, j)) in self.grid.interior().enumerate() {
            values[self.grid.spec.index(i, j)] = x[k];
        }
        Ok(GridSolution {
            grid: self.grid.clone(),
            values,
            report,
        })
    }
}

/// Discretizes and solves `case` on an `n × n` grid over `[−1, 1]²`.
pub fn solve_case(case: &ManufacturedCase, n: usize, opts: &SolverOptions) -> Result<GridSolution> {
    let grid = Grid::new(GridSpec::unit_square(n)?, &case.curve);
    discretize(case, grid, &opts.assembly)?.solve(&opts.krylov)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub max_err: f64,
    pub l2_err: f64,
    /// `log(e_prev / e) / log(h_prev / h)` on the max error; absent on the first row.
    pub order: Option<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub case: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order).collect()
    }

    /// Order between the first and last grid.
    pub fn overall_order(&self) -> Option<f64> {
        let (first, last) = (self.rows.first()?, self.rows.last()?);
        (self.rows.len() > 1).then(|| (first.max_err / last.max_err).ln() / (first.h / last.h).ln())
    }

    /// Least-squares slope of `log(max_err)` against `log(h)`.
    pub fn fitted_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .map(|r| (r.h.ln(), r.max_err.ln()))
            .collect();
        fit_slope(&pts)
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].max_err < w[0].max_err)
    }
}

/// Slope of the least-squares line through `(x, y)` pairs.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / k, b + y / k));
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn convergence_study(
    case: &ManufacturedCase,
    n_list: &[usize],
    opts: &SolverOptions,
) -> Result<ConvergenceTable> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid(format!(
            "grid sizes must be strictly ascending, got {n_list:?}"
        )));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let sol = solve_case(case, n, opts)?;
        let (max_err, l2_err) = sol.errors(case);
        let h = sol.grid.spec.h();
        let order = rows
            .last()
            .map(|p| (p.max_err / max_err).ln() / (p.h / h).ln());
        rows.push(ConvergenceRow {
            n,
            h,
            max_err,
            l2_err,
            order,
            iterations: sol.report.iterations,
        });
    }
    Ok(ConvergenceTable {
        case: case.name.clone(),
        rows,
    })
}

/// Nearest node of a point, for sampling solutions.
pub fn nearest_node(spec: &GridSpec, p: Vec2) -> (usize, usize) {
    let i = ((p.x - spec.lower.x) / spec.hx())
        .round()
        .clamp(0.0, spec.n as f64) as usize;
    let j = ((p.y - spec.lower.y) / spec.hy())
        .round()
        .clamp(0.0, spec.n as f64) as usize;
    (i, j)
}

#[cfg(test)]
mod tests;
