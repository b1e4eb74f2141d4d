//! 9-point discretization with interface corrections.
//!
//! At an irregular node owned by side `s`, every stencil neighbour on the other
//! side is replaced by the extension of `u_s` to that neighbour:
//! `u_s(x_k) = u_k − τ_k·D`, where `τ_k` is the second-order Taylor basis at
//! the projected interface point and `D = (T − I) m_s + b` is the opposite-minus-own
//! state given by the jump relations. The own state `m_s` is a least-squares
//! quadratic fit over nearby own-side nodes, so `(T − I) m_s` stays in the matrix
//! and only `b` (jump data) reaches the right-hand side.

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::geometry::{LocalFrame, Vec2};
use crate::jump::{
    plus_state_closed_form_constant, FormulaVariant, InterfaceSetting, JumpData, SideState,
};
use crate::manufactured::{ManufacturedCase, Side};
use crate::tensor::Sym2;

type Mat6 = SMatrix<f64, 6, 6>;
type Vec6 = SVector<f64, 6>;

/// `opposite − own = state · m_own + data` at an interface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpExpansion {
    pub state: Mat6,
    pub data: Vec6,
}

pub fn jump_expansion(
    own: Side,
    jumps: &JumpData,
    setting: &InterfaceSetting,
    variant: FormulaVariant,
) -> Result<JumpExpansion> {
    let (jumps, setting) = match own {
        Side::Minus => (*jumps, *setting),
        Side::Plus => (jumps.negated(), setting.swapped()),
    };
    let relation = |m: &SideState| -> Result<Vec6> {
        Ok(Vec6::from(
            plus_state_closed_form_constant(m, &jumps, &setting, variant)?.to_array(),
        ))
    };
    let data = relation(&SideState::default())?;
    let mut state = Mat6::zeros();
    for k in 0..6 {
        state.set_column(k, &(relation(&SideState::basis(k))? - data));
    }
    Ok(JumpExpansion {
        state: state - Mat6::identity(),
        data,
    })
}

/// `[1, ξ, η, ξ²/2, ξη, η²/2]`, pairing with a [`SideState`] as a Taylor polynomial.
pub fn taylor_basis(q: Vec2) -> Vec6 {
    Vec6::from([1.0, q.x, q.y, 0.5 * q.x * q.x, q.x * q.y, 0.5 * q.y * q.y])
}

/// Right-hand-side correction at one irregular node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionTerm {
    pub node: (usize, usize),
    pub value: f64,
}

/// Interface data used at one irregular node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrregularPoint {
    pub node: (usize, usize),
    pub side: Side,
    pub param: f64,
    pub anchor: Vec2,
    pub jumps: JumpData,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    pub corrections: bool,
    pub relations: FormulaVariant,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            corrections: true,
            relations: FormulaVariant::corrected(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Discretization {
    pub grid: Grid,
    pub matrix: CsrMatrix<f64>,
    pub rhs: DVector<f64>,
    pub corrections: Vec<CorrectionTerm>,
    pub irregular: Vec<IrregularPoint>,
    /// Node values on the boundary (zero elsewhere).
    pub boundary: Vec<f64>,
}

/// `(di, dj, weight)` of the 9-point stencil for `−∇·(A∇u) + σu` with constant `A`.
pub fn stencil(a: &Sym2, sigma: f64, hx: f64, hy: f64) -> [(i64, i64, f64); 9] {
    let (wx, wy, wc) = (
        a.a11 / (hx * hx),
        a.a22 / (hy * hy),
        2.0 * a.a12 / (4.0 * hx * hy),
    );
    [
        (0, 0, 2.0 * wx + 2.0 * wy + sigma),
        (-1, 0, -wx),
        (1, 0, -wx),
        (0, -1, -wy),
        (0, 1, -wy),
        (1, 1, -wc),
        (-1, -1, -wc),
        (1, -1, wc),
        (-1, 1, wc),
    ]
}

struct Row {
    entries: Vec<(usize, f64)>,
    rhs: f64,
    correction: Option<CorrectionTerm>,
    irregular: Option<IrregularPoint>,
}

pub fn discretize(
    case: &ManufacturedCase,
    grid: Grid,
    opts: &AssemblyOptions,
) -> Result<Discretization> {
    let (a_plus, a_minus) = match (
        case.tensor_plus.constant_value(),
        case.tensor_minus.constant_value(),
    ) {
        (Some(p), Some(m)) => (p, m),
        _ => {
            return Err(Error::Capability(
                "piecewise-constant tensors (solver scope)",
            ))
        }
    };
    let spec = grid.spec;
    let m = spec.nodes_per_side();
    let mut boundary = vec![0.0; m * m];
    for j in 0..m {
        for i in 0..m {
            if spec.is_boundary(i, j) {
                boundary[spec.index(i, j)] = case.exact(spec.node(i, j));
            }
        }
    }
    let coefficients = |side: Side| match side {
        Side::Plus => (a_plus, case.tensor_plus.sigma()),
        Side::Minus => (a_minus, case.tensor_minus.sigma()),
    };
    // Rows are independent; this loop may be parallelized without shared state.
    let rows: Vec<Row> = grid
        .interior()
        .map(|(i, j)| {
            let side = grid.side(i, j);
            let (a, sigma) = coefficients(side);
            assemble_row(case, &grid, &boundary, (i, j), side, &a, sigma, opts)
        })
        .collect::<Result<_>>()?;

    let n = grid.unknowns();
    let mut coo = CooMatrix::new(n, n);
    let mut rhs = DVector::zeros(n);
    let mut corrections = Vec::new();
    let mut irregular = Vec::new();
    for (r, row) in rows.into_iter().enumerate() {
        for (c, v) in row.entries {
            coo.push(r, c, v);
        }
        rhs[r] = row.rhs;
        corrections.extend(row.correction);
        irregular.extend(row.irregular);
    }
    Ok(Discretization {
        grid,
        matrix: CsrMatrix::from(&coo),
        rhs,
        corrections,
        irregular,
        boundary,
    })
}

#[allow(clippy::too_many_arguments)]
fn assemble_row(
    case: &ManufacturedCase,
    grid: &Grid,
    boundary: &[f64],
    (i, j): (usize, usize),
    side: Side,
    a: &Sym2,
    sigma: f64,
    opts: &AssemblyOptions,
) -> Result<Row> {
    let spec = grid.spec;
    let x = spec.node(i, j);
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(9);
    let mut rhs = case.source(side, x)?;
    // Adds `weight · u(a, b)` to the row: unknown or known boundary value.
    let add = |entries: &mut Vec<(usize, f64)>,
               rhs: &mut f64,
               (a, b): (usize, usize),
               weight: f64| match grid.unknown_index(a, b) {
        Some(c) => entries.push((c, weight)),
        None => *rhs -= weight * boundary[spec.index(a, b)],
    };

    let weights = stencil(a, sigma, spec.hx(), spec.hy());
    let at = |di: i64, dj: i64| ((i as i64 + di) as usize, (j as i64 + dj) as usize);
    for &(di, dj, w) in &weights {
        add(&mut entries, &mut rhs, at(di, dj), w);
    }

    let (mut correction, mut irregular) = (None, None);
    if opts.corrections && grid.is_irregular(i, j) {
        let (t, anchor) = case.curve.project(x, 1e-12 * spec.h())?;
        let frame = case.frame_at(t)?;
        let jumps = case.jump_data_at(t)?;
        let setting = case.setting_at(&frame)?;
        let expansion = jump_expansion(side, &jumps, &setting, opts.relations)?;
        // c = Σ γ_k τ_k over opposite-side neighbours.
        let mut c = Vec6::zeros();
        for &(di, dj, w) in &weights {
            let node = at(di, dj);
            if w != 0.0 && grid.side(node.0, node.1) != side {
                c += taylor_basis(frame.world_to_local(spec.node(node.0, node.1))) * w;
            }
        }
        let value = c.dot(&expansion.data);
        rhs += value;
        let fit = own_side_fit(grid, (i, j), side, &frame)?;
        let row_state = -(expansion.state.transpose() * c);
        for (node, wvec) in &fit {
            let coef = row_state.dot(wvec);
            add(&mut entries, &mut rhs, *node, coef);
        }
        correction = Some(CorrectionTerm {
            node: (i, j),
            value,
        });
        irregular = Some(IrregularPoint {
            node: (i, j),
            side,
            param: t,
            anchor,
            jumps,
        });
    }
    Ok(Row {
        entries,
        rhs,
        correction,
        irregular,
    })
}

/// Least-squares quadratic fit of the own side about the frame anchor.
/// Returns each node with its weight vector: `m = Σ u_node · weights`.
fn own_side_fit(
    grid: &Grid,
    (i, j): (usize, usize),
    side: Side,
    frame: &LocalFrame,
) -> Result<Vec<((usize, usize), Vec6)>> {
    let spec = grid.spec;
    let h = spec.h();
    let last = spec.n as i64;
    for radius in [2i64, 3, 4] {
        let mut nodes = Vec::new();
        for b in (j as i64 - radius).max(0)..=(j as i64 + radius).min(last) {
            for a in (i as i64 - radius).max(0)..=(i as i64 + radius).min(last) {
                let (a, b) = (a as usize, b as usize);
                if grid.side(a, b) == side {
                    nodes.push((a, b));
                }
            }
        }
        if nodes.len() < 8 {
            continue;
        }
        // Nodes far from the anchor get less weight.
        let local: Vec<Vec2> = nodes
            .iter()
            .map(|&(a, b)| frame.world_to_local(spec.node(a, b)) / h)
            .collect();
        let weight: Vec<f64> = local
            .iter()
            .map(|q| 1.0 / (1.0 + q.norm_squared()))
            .collect();
        let design = DMatrix::from_fn(nodes.len(), 6, |r, col| {
            weight[r] * taylor_basis(local[r])[col]
        });
        let svd = design.svd(true, true);
        let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
        if smin < 1e-8 * smax {
            continue;
        }
        let pinv = svd
            .pseudo_inverse(0.0)
            .map_err(|e| Error::Grid(format!("fit pseudo-inverse failed: {e}")))?;
        let scale = Vec6::from([
            1.0,
            1.0 / h,
            1.0 / h,
            1.0 / (h * h),
            1.0 / (h * h),
            1.0 / (h * h),
        ]);
        return Ok(nodes
            .iter()
            .enumerate()
            .map(|(r, node)| {
                (
                    *node,
                    Vec6::from_iterator(pinv.column(r).iter().copied()).component_mul(&scale)
                        * weight[r],
                )
            })
            .collect());
    }
    Err(Error::Grid(format!(
        "too few well-placed {side:?} nodes near ({i}, {j}) for a quadratic fit"
    )))
}
