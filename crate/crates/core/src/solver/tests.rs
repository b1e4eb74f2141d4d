use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::field::ScalarField;
use crate::geometry::{InterfaceCurve, LocalFrame};
use crate::jump::{FormulaVariant, InterfaceSetting, JumpData, SideCoefficients, SideState};
use crate::manufactured::{builtin_case, Side};
use crate::tensor::{AnisoTensor, LocalTensor, Sym2};

fn row_of(d: &Discretization, i: usize, j: usize) -> Vec<(usize, f64)> {
    let r = d.grid.unknown_index(i, j).unwrap();
    let row = d.matrix.row(r);
    row.col_indices()
        .iter()
        .copied()
        .zip(row.values().iter().copied())
        .filter(|(_, v)| *v != 0.0)
        .collect()
}

fn assert_row(d: &Discretization, (i, j): (usize, usize), expected: &[(i64, i64, f64)]) {
    let mut got = row_of(d, i, j);
    got.sort_by_key(|(c, _)| *c);
    let mut want: Vec<(usize, f64)> = expected
        .iter()
        .filter(|(_, _, w)| *w != 0.0)
        .map(|&(di, dj, w)| {
            (
                d.grid
                    .unknown_index((i as i64 + di) as usize, (j as i64 + dj) as usize)
                    .unwrap(),
                w,
            )
        })
        .collect();
    want.sort_by_key(|(c, _)| *c);
    assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
    for ((c1, v1), (c2, v2)) in got.iter().zip(&want) {
        assert_eq!(c1, c2);
        assert!((v1 - v2).abs() < 1e-12 * v2.abs().max(1.0));
    }
}

#[test]
fn no_interface_gives_five_point_laplacian() {
    let case = builtin_case("no-interface").unwrap();
    let grid = Grid::new(GridSpec::unit_square(16).unwrap(), &case.curve);
    let d = discretize(&case, grid, &AssemblyOptions::default()).unwrap();
    assert!(d.corrections.is_empty());
    let h2 = d.grid.spec.h().powi(2);
    let five = [
        (0, 0, 4.0 / h2),
        (1, 0, -1.0 / h2),
        (-1, 0, -1.0 / h2),
        (0, 1, -1.0 / h2),
        (0, -1, -1.0 / h2),
    ];
    assert_row(&d, (5, 7), &five);
    assert_eq!(row_of(&d, 5, 7).len(), 5);
}

#[test]
fn diagonal_tensor_gives_weighted_five_point() {
    let s = stencil(&Sym2::new(3.0, 0.0, 0.5), 0.0, 0.1, 0.1);
    let corners: Vec<f64> = s
        .iter()
        .filter(|(di, dj, _)| *di != 0 && *dj != 0)
        .map(|s| s.2)
        .collect();
    assert!(corners.iter().all(|w| *w == 0.0));
    assert!((s[0].2 - (600.0 + 100.0)).abs() < 1e-9);
    assert!((s[1].2 + 300.0).abs() < 1e-9 && (s[3].2 + 50.0).abs() < 1e-9);
    let c = stencil(&Sym2::new(1.0, 0.4, 1.0), 0.0, 0.1, 0.1);
    assert!((c[5].2 + 20.0).abs() < 1e-9 && (c[7].2 - 20.0).abs() < 1e-9);
}

#[test]
fn regular_truncation_error_is_second_order() {
    let case = builtin_case("anisotropic-benchmark").unwrap();
    let probe = |n: usize| {
        let grid = Grid::new(GridSpec::unit_square(n).unwrap(), &case.curve);
        let d = discretize(&case, grid, &AssemblyOptions::default()).unwrap();
        let r = d.residual(&d.exact_values(&case));
        d.grid
            .interior()
            .enumerate()
            .filter(|(_, (i, j))| !d.grid.is_irregular(*i, *j))
            .fold(0.0f64, |m, (k, _)| m.max(r[k].abs()))
    };
    let (coarse, fine) = (probe(32), probe(64));
    assert!(coarse / fine >= 3.5, "ratio {}", coarse / fine);
}

#[test]
fn continuous_problem_has_zero_corrections() {
    let mut case = builtin_case("continuous").unwrap();
    case.u_plus = ScalarField::polynomial(&[(1.0, 2, 0), (0.5, 1, 1)]);
    case.u_minus = case.u_plus.clone();
    let grid = Grid::new(GridSpec::unit_square(16).unwrap(), &case.curve);
    let d = discretize(&case, grid, &AssemblyOptions::default()).unwrap();
    assert!(!d.corrections.is_empty());
    for c in &d.corrections {
        assert!(c.value.abs() < 1e-10, "{c:?}");
    }
    // The fit terms cancel as well: rows equal the plain stencil.
    let plain = discretize(
        &case,
        Grid::new(GridSpec::unit_square(16).unwrap(), &case.curve),
        &AssemblyOptions {
            corrections: false,
            ..Default::default()
        },
    )
    .unwrap();
    let diff = &d.matrix - &plain.matrix;
    assert!(diff.values().iter().all(|v| v.abs() < 1e-8));
}

fn scalar_setting(
    beta_minus: f64,
    beta_plus: f64,
    sigma: (f64, f64),
    f: (f64, f64),
) -> InterfaceSetting {
    let side = |b: f64, s: f64, src: f64| SideCoefficients {
        tensor: LocalTensor::constant_at(&Sym2::scalar(b), 0.0, 0.0).unwrap(),
        sigma: s,
        source: src,
    };
    InterfaceSetting {
        chi_second: 0.0,
        minus: side(beta_minus, sigma.0, f.0),
        plus: side(beta_plus, sigma.1, f.1),
    }
}

#[test]
fn one_dimensional_reduction_matches_hand_formula() {
    // Flat interface x = α, normal +x, y-independent data.
    let (bm, bp) = (1.5, 4.0);
    let (sm, sp) = (0.3, 0.7);
    let (fm, fp) = (2.0, -1.0);
    let setting = scalar_setting(bm, bp, (sm, sp), (fm, fp));
    let jumps = JumpData {
        w: 0.4,
        w1: 0.0,
        w2: 0.0,
        v: -1.2,
        v1: 0.0,
    };
    let e = jump_expansion(Side::Minus, &jumps, &setting, FormulaVariant::corrected()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let (u, ux, uxx) = (
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let m = SideState {
            u,
            u_xi: ux,
            u_xixi: uxx,
            ..Default::default()
        };
        let d = rng.random_range(0.0..0.1);
        let h = 0.1;
        let gamma = -bm / (h * h);
        let jump = e.state * nalgebra::SVector::<f64, 6>::from(m.to_array()) + e.data;
        let got = gamma * taylor_basis(Vec2::new(d, 0.0)).dot(&jump);
        // [u] + d[u_x] + d²/2 [u_xx] with the 1D jump conditions.
        let jump_ux = (bm / bp - 1.0) * ux + jumps.v / bp;
        let jump_uxx = (bm / bp - 1.0) * uxx + (sp - sm) * u / bp + (sp * jumps.w - (fp - fm)) / bp;
        let want = gamma * (jumps.w + d * jump_ux + 0.5 * d * d * jump_uxx);
        assert!(
            (got - want).abs() < 1e-12 * want.abs().max(1.0),
            "{got} vs {want}"
        );
    }
}

#[test]
fn expansion_is_antisymmetric_under_side_swap() {
    let case = builtin_case("coupled-ellipse").unwrap();
    let frame: LocalFrame = case.frame_at(0.8).unwrap();
    let setting = case.setting_at(&frame).unwrap();
    let jumps = case.jump_data_at(0.8).unwrap();
    let from_minus =
        jump_expansion(Side::Minus, &jumps, &setting, FormulaVariant::corrected()).unwrap();
    let from_plus =
        jump_expansion(Side::Plus, &jumps, &setting, FormulaVariant::corrected()).unwrap();
    let minus =
        nalgebra::SVector::<f64, 6>::from(case.side_state_in_frame(&frame, Side::Minus).to_array());
    let plus =
        nalgebra::SVector::<f64, 6>::from(case.side_state_in_frame(&frame, Side::Plus).to_array());
    assert!((from_minus.state * minus + from_minus.data - (plus - minus)).amax() < 1e-9);
    assert!((from_plus.state * plus + from_plus.data - (minus - plus)).amax() < 1e-9);
}

#[test]
fn projected_interface_data_is_refinement_invariant() {
    let case = builtin_case("anisotropic-benchmark").unwrap();
    let build = |n| {
        let grid = Grid::new(GridSpec::unit_square(n).unwrap(), &case.curve);
        discretize(&case, grid, &AssemblyOptions::default()).unwrap()
    };
    let (coarse, fine) = (build(32), build(64));
    let mut shared = 0;
    for p in &coarse.irregular {
        let node = (2 * p.node.0, 2 * p.node.1);
        if let Some(q) = fine.irregular.iter().find(|q| q.node == node) {
            shared += 1;
            assert!((p.anchor - q.anchor).norm() < 1e-10);
            for (a, b) in [
                (p.jumps.w, q.jumps.w),
                (p.jumps.w1, q.jumps.w1),
                (p.jumps.w2, q.jumps.w2),
                (p.jumps.v, q.jumps.v),
                (p.jumps.v1, q.jumps.v1),
            ] {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }
    assert!(shared > 10);
}

#[test]
fn solver_recovers_smooth_field_without_interface() {
    let case = builtin_case("no-interface").unwrap();
    let sol = solve_case(&case, 16, &SolverOptions::default()).unwrap();
    let (max, _) = sol.errors(&case);
    assert!(max < 1e-3, "max error {max}");
    assert!(sol.report.relative_residual < 1e-10);
}

#[test]
fn accepted_solves_meet_residual_contract() {
    let case = builtin_case("anisotropic-benchmark").unwrap();
    let grid = Grid::new(GridSpec::unit_square(24).unwrap(), &case.curve);
    let d = discretize(&case, grid, &AssemblyOptions::default()).unwrap();
    let sol = d.solve(&KrylovOptions::default()).unwrap();
    let r = d.residual(&sol.values);
    assert!(r.norm() / d.rhs.norm() < 1e-10);
}

#[test]
fn smooth_poisson_is_second_order() {
    let case = builtin_case("no-interface").unwrap();
    let table = convergence_study(&case, &[16, 32, 64], &SolverOptions::default()).unwrap();
    for o in table.orders() {
        assert!(o >= 1.9, "{table:?}");
    }
}

#[test]
fn scalar_benchmark_ratio() {
    let case = builtin_case("scalar-benchmark").unwrap();
    let table = convergence_study(&case, &[32, 64], &SolverOptions::default()).unwrap();
    let ratio = table.rows[0].max_err / table.rows[1].max_err;
    assert!(ratio >= 3.4, "{table:?}");
}

#[test]
fn isotropic_interface_case_is_second_order() {
    let case = builtin_case("isotropic-circle").unwrap();
    let table = convergence_study(&case, &[32, 64], &SolverOptions::default()).unwrap();
    assert!(table.orders()[0] >= 1.8, "{table:?}");
}

#[test]
fn label_swap_leaves_solution_unchanged() {
    // No grid node lies exactly on this circle, so ownership is unambiguous.
    let case = builtin_case("coupled-circle").unwrap();
    let grid = Grid::new(GridSpec::unit_square(32).unwrap(), &case.curve);
    assert!(grid.phi.iter().all(|p| *p != 0.0));
    let a = solve_case(&case, 32, &SolverOptions::default()).unwrap();
    let b = solve_case(&case.swapped(), 32, &SolverOptions::default()).unwrap();
    let diff = a
        .values
        .iter()
        .zip(&b.values)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(diff < 1e-8, "max difference {diff}");
}

#[test]
fn variable_tensors_are_rejected() {
    let case = builtin_case("variable-circle").unwrap();
    assert!(matches!(
        solve_case(&case, 16, &SolverOptions::default()),
        Err(Error::Capability(_))
    ));
}

#[test]
fn grid_sizes_are_validated() {
    let case = builtin_case("scalar-benchmark").unwrap();
    assert!(matches!(
        solve_case(&case, 4, &SolverOptions::default()),
        Err(Error::Grid(_))
    ));
    assert!(convergence_study(&case, &[32, 16], &SolverOptions::default()).is_err());
}

#[test]
fn slope_fit_and_nearest_node() {
    let pts = [(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)];
    assert!((fit_slope(&pts).unwrap() - 2.0).abs() < 1e-14);
    assert_eq!(fit_slope(&pts[..1]), None);
    let spec = GridSpec::unit_square(8).unwrap();
    assert_eq!(nearest_node(&spec, Vec2::new(0.01, -0.99)), (4, 0));
}

#[test]
fn node_errors_cover_grid() {
    let case = ManufacturedCase {
        name: "linear".into(),
        curve: InterfaceCurve::circle(Vec2::new(5.0, 5.0), 0.5).unwrap(),
        u_plus: ScalarField::polynomial(&[(1.0, 1, 0), (2.0, 0, 1)]),
        u_minus: ScalarField::constant(0.0),
        tensor_plus: AnisoTensor::constant(Sym2::new(2.0, 0.3, 1.0), 0.0).unwrap(),
        tensor_minus: AnisoTensor::constant(Sym2::scalar(1.0), 0.0).unwrap(),
    };
    let sol = solve_case(&case, 8, &SolverOptions::default()).unwrap();
    let errs = sol.node_errors(&case);
    assert_eq!(errs.len(), 81);
    assert!(errs.iter().all(|e| e.error.abs() < 1e-10));
}
