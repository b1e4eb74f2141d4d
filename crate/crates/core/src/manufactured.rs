//! Manufactured interface problems.
//!
//! A case fixes analytic `u⁺`, `u⁻`, tensors per side and an interface curve.
//! Everything else is induced: `f± = −∇·(A±∇u±) + σ±u±`, `w = u⁺ − u⁻` and
//! `v = A⁺∇u⁺·n − A⁻∇u⁻·n` on Γ, with their derivatives along the curve.

use crate::error::{Error, Result};
use crate::field::{Jet, ScalarField};
use crate::geometry::{InterfaceCurve, LocalFrame, Vec2};
use crate::jump::{
    plus_state_closed_form_constant, plus_state_closed_form_variable, plus_state_oracle,
    relative_deviation, FormulaVariant, InterfaceSetting, JumpData, RelationPath, SideCoefficients,
    SideState,
};
use crate::tensor::{variable_family, AnisoTensor, LocalTensor, Sym2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub curve: InterfaceCurve,
    pub u_plus: ScalarField,
    pub u_minus: ScalarField,
    pub tensor_plus: AnisoTensor,
    pub tensor_minus: AnisoTensor,
}

impl ManufacturedCase {
    pub fn field(&self, side: Side) -> &ScalarField {
        match side {
            Side::Plus => &self.u_plus,
            Side::Minus => &self.u_minus,
        }
    }

    pub fn tensor(&self, side: Side) -> &AnisoTensor {
        match side {
            Side::Plus => &self.tensor_plus,
            Side::Minus => &self.tensor_minus,
        }
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.tensor_plus.is_constant() && self.tensor_minus.is_constant()
    }

    /// Side owning a world point (the interface itself counts as Ω⁻).
    pub fn side_of(&self, p: Vec2) -> Side {
        if self.curve.level_set(p).0 <= 0.0 {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    /// Exact solution of the owning side.
    pub fn exact(&self, p: Vec2) -> f64 {
        self.field(self.side_of(p)).value(p)
    }

    /// `f = −(A : ∇²u + (∇·A)·∇u) + σu` for the given side's extension at `p`.
    pub fn source(&self, side: Side, p: Vec2) -> Result<f64> {
        let jet = self.field(side).jet(p);
        let tensor = self.tensor(side);
        let a = tensor.at(p);
        let div = tensor.divergence(p)?;
        let second = a.a11 * jet.hess.a11 + 2.0 * a.a12 * jet.hess.a12 + a.a22 * jet.hess.a22;
        Ok(-(second + div.dot(&jet.grad)) + tensor.sigma() * jet.value)
    }

    pub fn frame_at(&self, t: f64) -> Result<LocalFrame> {
        self.curve.build_local_frame(t)
    }

    /// Value and local-frame derivatives of one side at the anchor of `frame`.
    pub fn side_state_in_frame(&self, frame: &LocalFrame, side: Side) -> SideState {
        local_state(&self.field(side).jet(frame.anchor), frame)
    }

    pub fn side_state_at(&self, t: f64, side: Side) -> Result<SideState> {
        Ok(self.side_state_in_frame(&self.frame_at(t)?, side))
    }

    /// Jump data with analytic derivatives in arc length along τ.
    pub fn jump_data_at(&self, t: f64) -> Result<JumpData> {
        let c = self.curve.point(t);
        let (n, tau) = self.curve.normal_tangent_at(t)?;
        // ds/dt is negative where τ runs against the parametrization.
        let orientation = c.d1.dot(&tau).signum();
        let dn = self.curve.normal_rate(t)?;
        let speed = c.d1.norm();
        let speed_rate = c.d1.dot(&c.d2) / speed;

        let jump = self
            .u_plus
            .jet(c.position)
            .sub(&self.u_minus.jet(c.position));
        let w_t = jump.grad.dot(&c.d1);
        let w_tt = jump.hess.form(c.d1, c.d1) + jump.grad.dot(&c.d2);

        let flux = |side: Side| -> Result<(f64, f64)> {
            let jet = self.field(side).jet(c.position);
            let tensor = self.tensor(side);
            let a = tensor.at(c.position);
            let (ax, ay) = tensor.gradient(c.position)?;
            let da = ax.scaled(c.d1.x).axpy(c.d1.y, &ay);
            let flux = a.apply(jet.grad);
            let flux_t = da.apply(jet.grad) + a.apply(jet.hess.apply(c.d1));
            Ok((flux.dot(&n), flux_t.dot(&n) + flux.dot(&dn)))
        };
        let (fp, fp_t) = flux(Side::Plus)?;
        let (fm, fm_t) = flux(Side::Minus)?;

        let w1 = w_t / speed;
        Ok(JumpData {
            w: jump.value,
            w1: orientation * w1,
            w2: (w_tt - w1 * speed_rate) / (speed * speed),
            v: fp - fm,
            v1: orientation * (fp_t - fm_t) / speed,
        })
    }

    /// Same quantities by 4th-order central differences in the curve parameter.
    pub fn jump_data_at_fd(&self, t: f64) -> Result<JumpData> {
        let dt = 1e-3 * self.curve.diameter() / self.curve.point(t).d1.norm();
        let w = |s: f64| {
            let p = self.curve.position(s);
            self.u_plus.value(p) - self.u_minus.value(p)
        };
        let v = |s: f64| -> Result<f64> {
            let p = self.curve.position(s);
            let (n, _) = self.curve.normal_tangent_at(s)?;
            let f = |side: Side| {
                self.tensor(side)
                    .at(p)
                    .apply(self.field(side).jet(p).grad)
                    .dot(&n)
            };
            Ok(f(Side::Plus) - f(Side::Minus))
        };
        let arc = |s: f64| self.curve.point(s).d1.norm();
        let d1 = |g: &dyn Fn(f64) -> f64| {
            (g(t - 2.0 * dt) - 8.0 * g(t - dt) + 8.0 * g(t + dt) - g(t + 2.0 * dt)) / (12.0 * dt)
        };
        let d2 = |g: &dyn Fn(f64) -> f64| {
            (-g(t - 2.0 * dt) + 16.0 * g(t - dt) - 30.0 * g(t) + 16.0 * g(t + dt) - g(t + 2.0 * dt))
                / (12.0 * dt * dt)
        };
        let speed = arc(t);
        let speed_rate = d1(&arc);
        let orientation = self
            .curve
            .point(t)
            .d1
            .dot(&self.curve.normal_tangent_at(t)?.1)
            .signum();
        let w_t = d1(&w);
        // Pre-evaluate v so the closure is infallible.
        let vs: Vec<f64> = [-2.0, -1.0, 1.0, 2.0]
            .iter()
            .map(|k| v(t + k * dt))
            .collect::<Result<_>>()?;
        let v_t = (vs[0] - 8.0 * vs[1] + 8.0 * vs[2] - vs[3]) / (12.0 * dt);
        let w1 = w_t / speed;
        Ok(JumpData {
            w: w(t),
            w1: orientation * w1,
            w2: (d2(&w) - w1 * speed_rate) / (speed * speed),
            v: v(t)?,
            v1: orientation * v_t / speed,
        })
    }

    /// Local tensors, σ and f of both sides at `frame`.
    pub fn setting_at(&self, frame: &LocalFrame) -> Result<InterfaceSetting> {
        let side = |s: Side| -> Result<SideCoefficients> {
            Ok(SideCoefficients {
                tensor: LocalTensor::at_frame(self.tensor(s), frame)?,
                sigma: self.tensor(s).sigma(),
                source: self.source(s, frame.anchor)?,
            })
        };
        Ok(InterfaceSetting {
            chi_second: frame.chi_second,
            plus: side(Side::Plus)?,
            minus: side(Side::Minus)?,
        })
    }

    /// The same problem with the two sides relabelled (curve orientation flipped).
    pub fn swapped(&self) -> Self {
        let curve = self.curve.clone().flipped();
        Self {
            name: format!("{}-swapped", self.name),
            curve,
            u_plus: self.u_minus.clone(),
            u_minus: self.u_plus.clone(),
            tensor_plus: self.tensor_minus.clone(),
            tensor_minus: self.tensor_plus.clone(),
        }
    }

    /// Plus state two ways (explicit relations and primitive solve) against the exact one.
    pub fn verify_theorem_at(&self, t: f64, variant: FormulaVariant) -> Result<TheoremReport> {
        let frame = self.frame_at(t)?;
        let minus = self.side_state_in_frame(&frame, Side::Minus);
        let exact = self.side_state_in_frame(&frame, Side::Plus);
        let jumps = self.jump_data_at(t)?;
        let setting = self.setting_at(&frame)?;
        let (path, closed) = if self.is_piecewise_constant() {
            (
                RelationPath::Constant,
                plus_state_closed_form_constant(&minus, &jumps, &setting, variant)?,
            )
        } else {
            (
                RelationPath::Variable,
                plus_state_closed_form_variable(&minus, &jumps, &setting, variant)?,
            )
        };
        let oracle = plus_state_oracle(&minus, &jumps, &setting)?;
        Ok(TheoremReport {
            t,
            point: frame.anchor,
            path,
            closed_form: relative_deviation(&closed, &exact),
            oracle: relative_deviation(&oracle, &exact),
        })
    }

    /// Residual of `[u_ξ]χ″ + [u_ηη] = w″` when `w″` is obtained by central
    /// differences of `[u]` along the local graph with step `ds`.
    pub fn value_jump_second_derivative_residual(&self, t: f64, ds: f64) -> Result<f64> {
        let frame = self.frame_at(t)?;
        let jump_at = |eta: f64| -> Result<f64> {
            let s = self.curve.param_at_eta(&frame, eta)?;
            let p = self.curve.position(s);
            Ok(self.u_plus.value(p) - self.u_minus.value(p))
        };
        if eta_out_of_range(&self.curve, &frame, 2.0 * ds) {
            return Err(Error::GraphDomain {
                eta: ds,
                limit: self.curve.graph_radius(&frame),
            });
        }
        let numeric = (jump_at(ds)? - 2.0 * jump_at(0.0)? + jump_at(-ds)?) / (ds * ds);
        let plus = self.side_state_in_frame(&frame, Side::Plus);
        let minus = self.side_state_in_frame(&frame, Side::Minus);
        let lhs = (plus.u_xi - minus.u_xi) * frame.chi_second + (plus.u_etaeta - minus.u_etaeta);
        Ok((numeric - lhs).abs())
    }
}

fn eta_out_of_range(curve: &InterfaceCurve, frame: &LocalFrame, eta: f64) -> bool {
    eta.abs() >= curve.graph_radius(frame)
}

/// Rotates a world jet into the frame: `u_ξ = ∇u·n`, `u_ξη = nᵀ H τ`, ...
pub fn local_state(jet: &Jet, frame: &LocalFrame) -> SideState {
    let (n, tau) = (frame.normal(), frame.tangent());
    SideState {
        u: jet.value,
        u_xi: jet.grad.dot(&n),
        u_eta: jet.grad.dot(&tau),
        u_xixi: jet.hess.form(n, n),
        u_xieta: jet.hess.form(n, tau),
        u_etaeta: jet.hess.form(tau, tau),
    }
}

/// Componentwise deviations of the computed plus state from the exact one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremReport {
    pub t: f64,
    pub point: Vec2,
    pub path: RelationPath,
    pub closed_form: [f64; 6],
    pub oracle: [f64; 6],
}

impl TheoremReport {
    pub fn max_residual(&self) -> f64 {
        self.closed_form
            .iter()
            .chain(&self.oracle)
            .fold(0.0, |m, r| m.max(*r))
    }
}

/// `n` equispaced parameters over one period.
pub fn curve_samples(curve: &InterfaceCurve, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| curve.period() * i as f64 / n as f64)
        .collect()
}

pub const BUILTIN_CASES: &[&str] = &[
    "continuous",
    "isotropic-circle",
    "isotropic-ellipse",
    "diagonal-circle",
    "diagonal-ellipse",
    "coupled-circle",
    "coupled-ellipse",
    "variable-circle",
    "variable-ellipse",
    "scalar-benchmark",
    "anisotropic-benchmark",
    "no-interface",
];

/// Cases with piecewise-constant tensors used for verifying the explicit relations.
pub const THEOREM_CASES: &[&str] = &[
    "isotropic-circle",
    "isotropic-ellipse",
    "diagonal-circle",
    "diagonal-ellipse",
    "coupled-circle",
    "coupled-ellipse",
];

fn default_minus() -> ScalarField {
    ScalarField::Sum(vec![
        ScalarField::SinCos {
            amp: 1.0,
            kx: 1.0,
            ky: 1.0,
            phase: 0.0,
        },
        ScalarField::polynomial(&[(0.5, 2, 0), (0.2, 0, 1)]),
    ])
}

fn default_plus() -> ScalarField {
    ScalarField::Sum(vec![
        ScalarField::polynomial(&[
            (1.0, 2, 0),
            (-1.0, 0, 2),
            (0.5, 1, 1),
            (0.3, 0, 0),
            (0.2, 3, 0),
        ]),
        ScalarField::ExpSin {
            amp: 0.5,
            alpha: 0.5,
            beta: 1.0,
        },
    ])
}

fn constant(a: Sym2, sigma: f64) -> AnisoTensor {
    AnisoTensor::constant(a, sigma).expect("built-in tensors are SPD")
}

fn test_circle() -> InterfaceCurve {
    InterfaceCurve::circle(Vec2::new(0.1, -0.2), 0.7).expect("valid circle")
}

fn test_ellipse() -> InterfaceCurve {
    InterfaceCurve::ellipse(Vec2::new(0.05, 0.0), (0.9, 0.5), 0.4).expect("valid ellipse")
}

/// Sample points for SPD checks of variable tensors.
fn box_samples() -> Vec<Vec2> {
    let mut pts = Vec::new();
    for i in 0..=20 {
        for j in 0..=20 {
            pts.push(Vec2::new(-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64));
        }
    }
    pts
}

/// Pairs (minus, plus) of the built-in constant tensor regimes.
pub fn tensor_pair(regime: &str) -> Option<(Sym2, Sym2)> {
    match regime {
        "isotropic" => Some((Sym2::scalar(1.0), Sym2::scalar(10.0))),
        "diagonal" => Some((Sym2::new(1.0, 0.0, 4.0), Sym2::new(5.0, 0.0, 0.5))),
        "coupled" => Some((Sym2::new(2.0, 0.5, 1.0), Sym2::new(3.0, -1.0, 2.0))),
        _ => None,
    }
}

pub fn builtin_case(name: &str) -> Option<ManufacturedCase> {
    let case = |curve, u_minus, u_plus, minus, plus| ManufacturedCase {
        name: name.to_string(),
        curve,
        u_plus,
        u_minus,
        tensor_plus: plus,
        tensor_minus: minus,
    };
    let regime = |r: &str, curve: InterfaceCurve| {
        let (m, p) = tensor_pair(r)?;
        Some(case(
            curve,
            default_minus(),
            default_plus(),
            constant(m, 0.5),
            constant(p, 0.2),
        ))
    };
    let variable = |curve: InterfaceCurve| {
        let samples = box_samples();
        let minus =
            AnisoTensor::variable(variable_family("trig-coupled")?, 0.5, &samples, 0.1).ok()?;
        let plus =
            AnisoTensor::variable(variable_family("graded-coupled")?, 0.2, &samples, 0.1).ok()?;
        Some(case(curve, default_minus(), default_plus(), minus, plus))
    };
    let benchmark_circle = || InterfaceCurve::circle(Vec2::zeros(), 0.5).expect("valid circle");
    match name {
        "continuous" => {
            let a = constant(Sym2::new(2.0, 0.5, 1.0), 0.5);
            Some(case(
                test_circle(),
                default_minus(),
                default_minus(),
                a.clone(),
                a,
            ))
        }
        "isotropic-circle" => regime("isotropic", test_circle()),
        "isotropic-ellipse" => regime("isotropic", test_ellipse()),
        "diagonal-circle" => regime("diagonal", test_circle()),
        "diagonal-ellipse" => regime("diagonal", test_ellipse()),
        "coupled-circle" => regime("coupled", test_circle()),
        "coupled-ellipse" => regime("coupled", test_ellipse()),
        "variable-circle" => variable(test_circle()),
        "variable-ellipse" => variable(test_ellipse()),
        "scalar-benchmark" => Some(case(
            benchmark_circle(),
            ScalarField::ExpSin {
                amp: 1.0,
                alpha: 1.0,
                beta: 1.0,
            },
            ScalarField::polynomial(&[(0.1, 2, 0), (0.1, 0, 2), (0.05, 1, 1), (0.5, 0, 0)]),
            constant(Sym2::scalar(1.0), 0.0),
            constant(Sym2::scalar(10.0), 0.0),
        )),
        "anisotropic-benchmark" => Some(case(
            benchmark_circle(),
            ScalarField::SinCos {
                amp: 1.0,
                kx: 1.0,
                ky: 1.0,
                phase: 0.3,
            },
            ScalarField::polynomial(&[
                (0.3, 2, 0),
                (-0.2, 0, 2),
                (0.1, 1, 1),
                (0.4, 0, 0),
                (0.1, 1, 0),
            ]),
            constant(Sym2::new(2.0, 0.5, 1.0), 0.0),
            constant(Sym2::new(3.0, -1.0, 2.0), 0.0),
        )),
        "no-interface" => {
            let a = constant(Sym2::scalar(1.0), 0.0);
            Some(case(
                InterfaceCurve::circle(Vec2::new(10.0, 10.0), 1.0).expect("valid circle"),
                ScalarField::polynomial(&[(0.0, 0, 0)]),
                ScalarField::ExpSin {
                    amp: 1.0,
                    alpha: 1.0,
                    beta: 1.0,
                },
                a.clone(),
                a,
            ))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::jump::{flux_jump_eval, identity_residuals, relative_deviation};
    use crate::tensor::rotate_to_local;

    fn frame(theta: f64) -> LocalFrame {
        LocalFrame {
            anchor: Vec2::new(0.3, 0.2),
            theta,
            chi_second: 0.0,
            param: 0.0,
        }
    }

    #[test]
    fn local_state_examples() {
        let x = ScalarField::polynomial(&[(1.0, 1, 0)]);
        let s = local_state(&x.jet(Vec2::new(0.3, 0.2)), &frame(0.0));
        assert_eq!(
            (s.u_xi, s.u_eta, s.u_xixi, s.u_xieta, s.u_etaeta),
            (1.0, 0.0, 0.0, 0.0, 0.0)
        );
        let s = local_state(&x.jet(Vec2::new(0.3, 0.2)), &frame(FRAC_PI_2));
        assert!(s.u_xi.abs() < 1e-15 && (s.u_eta + 1.0).abs() < 1e-15);
        let x2 = ScalarField::polynomial(&[(1.0, 2, 0)]);
        let s = local_state(&x2.jet(Vec2::new(0.3, 0.2)), &frame(FRAC_PI_4));
        assert!((s.u_xixi - 1.0).abs() < 1e-15);
        assert!((s.u_xieta + 1.0).abs() < 1e-15);
        assert!((s.u_etaeta - 1.0).abs() < 1e-15);
    }

    #[test]
    fn local_state_matches_finite_differences() {
        let case = builtin_case("coupled-ellipse").unwrap();
        let f = case.frame_at(1.1).unwrap();
        let s = case.side_state_in_frame(&f, Side::Plus);
        let h = 1e-4;
        let u = |xi: f64, eta: f64| case.u_plus.value(f.local_to_world(Vec2::new(xi, eta)));
        let fd_xi = (u(h, 0.0) - u(-h, 0.0)) / (2.0 * h);
        let fd_eta = (u(0.0, h) - u(0.0, -h)) / (2.0 * h);
        let fd_xixi = (u(h, 0.0) - 2.0 * u(0.0, 0.0) + u(-h, 0.0)) / (h * h);
        let fd_xieta = (u(h, h) - u(h, -h) - u(-h, h) + u(-h, -h)) / (4.0 * h * h);
        let fd_etaeta = (u(0.0, h) - 2.0 * u(0.0, 0.0) + u(0.0, -h)) / (h * h);
        assert!((s.u_xi - fd_xi).abs() < 1e-7);
        assert!((s.u_eta - fd_eta).abs() < 1e-7);
        assert!((s.u_xixi - fd_xixi).abs() < 1e-5);
        assert!((s.u_xieta - fd_xieta).abs() < 1e-5);
        assert!((s.u_etaeta - fd_etaeta).abs() < 1e-5);
    }

    #[test]
    fn source_satisfies_pde() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for name in ["coupled-circle", "variable-ellipse"] {
            let case = builtin_case(name).unwrap();
            for side in [Side::Plus, Side::Minus] {
                for _ in 0..20 {
                    let p = Vec2::new(rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9));
                    // Divergence form by central differences of the flux A∇u.
                    let h = 1e-5;
                    let flux =
                        |q: Vec2| case.tensor(side).at(q).apply(case.field(side).jet(q).grad);
                    let div = (flux(p + Vec2::new(h, 0.0)).x - flux(p - Vec2::new(h, 0.0)).x
                        + flux(p + Vec2::new(0.0, h)).y
                        - flux(p - Vec2::new(0.0, h)).y)
                        / (2.0 * h);
                    let u = case.field(side).value(p);
                    let residual =
                        -div + case.tensor(side).sigma() * u - case.source(side, p).unwrap();
                    assert!(residual.abs() < 1e-8, "{name} {side:?} residual {residual}");
                }
            }
        }
    }

    #[test]
    fn pde_row_sign_matches_divergence_form() {
        // The sixth identity with −[f] on the right is satisfied by exact one-sided states.
        for name in ["coupled-ellipse", "variable-circle"] {
            let case = builtin_case(name).unwrap();
            for t in [0.3, 2.0, 4.4] {
                let f = case.frame_at(t).unwrap();
                let setting = case.setting_at(&f).unwrap();
                let plus = case.side_state_in_frame(&f, Side::Plus);
                let minus = case.side_state_in_frame(&f, Side::Minus);
                let jumps = case.jump_data_at(t).unwrap();
                let r = identity_residuals(&plus, &minus, &jumps, &setting);
                for (i, ri) in r.iter().enumerate() {
                    assert!(ri.abs() < 1e-11, "{name} identity {} residual {ri}", i + 1);
                }
                let mut flipped = setting;
                flipped.plus.source = 2.0 * setting.minus.source - setting.plus.source;
                let r = identity_residuals(&plus, &minus, &jumps, &flipped);
                let df = setting.plus.source - setting.minus.source;
                if df.abs() > 1e-3 {
                    assert!(r[5].abs() > 1e-3);
                }
            }
        }
    }

    #[test]
    fn continuous_case_has_zero_jumps() {
        let case = builtin_case("continuous").unwrap();
        let j = case.jump_data_at(0.8).unwrap();
        for x in [j.w, j.w1, j.w2, j.v, j.v1] {
            assert!(x.abs() < 1e-14);
        }
    }

    #[test]
    fn constant_offset_jump() {
        let case = ManufacturedCase {
            name: "offset".into(),
            curve: InterfaceCurve::circle(Vec2::zeros(), 1.0).unwrap(),
            u_plus: ScalarField::constant(1.0),
            u_minus: ScalarField::constant(0.0),
            tensor_plus: AnisoTensor::constant(Sym2::new(2.0, 1.0, 3.0), 0.0).unwrap(),
            tensor_minus: AnisoTensor::constant(Sym2::new(1.0, -0.2, 1.5), 0.0).unwrap(),
        };
        let j = case.jump_data_at(2.2).unwrap();
        assert_eq!((j.w, j.w1, j.w2, j.v, j.v1), (1.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn flux_jump_hand_value_on_unit_circle() {
        let case = ManufacturedCase {
            name: "hand".into(),
            curve: InterfaceCurve::circle(Vec2::zeros(), 1.0).unwrap(),
            u_plus: ScalarField::polynomial(&[(1.0, 2, 0), (-1.0, 0, 2)]),
            u_minus: ScalarField::SinCos {
                amp: 1.0,
                kx: 1.0,
                ky: 1.0,
                phase: 0.0,
            },
            tensor_plus: AnisoTensor::constant(Sym2::new(2.0, 1.0, 3.0), 0.0).unwrap(),
            tensor_minus: AnisoTensor::constant(Sym2::scalar(1.0), 0.0).unwrap(),
        };
        let j = case.jump_data_at(0.0).unwrap();
        assert!((j.v - (4.0 - 1f64.cos())).abs() < 1e-14);
    }

    #[test]
    fn analytic_and_fd_jump_data_agree() {
        for name in ["coupled-ellipse", "variable-ellipse", "isotropic-circle"] {
            let case = builtin_case(name).unwrap();
            for t in [0.0, 1.3, 3.9] {
                let a = case.jump_data_at(t).unwrap();
                let f = case.jump_data_at_fd(t).unwrap();
                for (x, y) in [
                    (a.w, f.w),
                    (a.w1, f.w1),
                    (a.w2, f.w2),
                    (a.v, f.v),
                    (a.v1, f.v1),
                ] {
                    assert!(
                        (x - y).abs() < 1e-8 * y.abs().max(1.0),
                        "{name} t={t}: {x} vs {y}"
                    );
                }
            }
        }
    }

    #[test]
    fn flux_jump_eval_reproduces_v_along_curve() {
        for name in ["coupled-ellipse", "variable-circle"] {
            let case = builtin_case(name).unwrap();
            let f = case.frame_at(0.9).unwrap();
            let radius = case.curve.graph_radius(&f);
            for k in -4..=4 {
                let eta = 0.2 * radius * k as f64;
                let s = case.curve.param_at_eta(&f, eta).unwrap();
                let c = case.curve.point(s);
                let along = c.d1.dot(&f.tangent());
                let chi_prime = c.d1.dot(&f.normal()) / along;
                let shifted = LocalFrame {
                    anchor: c.position,
                    ..f
                };
                let plus = case.side_state_in_frame(&shifted, Side::Plus);
                let minus = case.side_state_in_frame(&shifted, Side::Minus);
                let tp = rotate_to_local(&case.tensor_plus.at(c.position), f.theta).unwrap();
                let tm = rotate_to_local(&case.tensor_minus.at(c.position), f.theta).unwrap();
                let v = case.jump_data_at(s).unwrap().v;
                let got = flux_jump_eval(&plus, &minus, &tp, &tm, chi_prime);
                assert!((got - v).abs() < 1e-9, "{name} eta={eta}: {got} vs {v}");
            }
        }
    }

    #[test]
    fn theorem_holds_on_continuous_case() {
        let case = builtin_case("continuous").unwrap();
        for t in curve_samples(&case.curve, 16) {
            let r = case
                .verify_theorem_at(t, FormulaVariant::corrected())
                .unwrap();
            assert!(r.max_residual() < 1e-12);
        }
    }

    #[test]
    fn theorem_holds_on_builtin_cases() {
        for name in THEOREM_CASES {
            let case = builtin_case(name).unwrap();
            for t in curve_samples(&case.curve, 64) {
                let r = case
                    .verify_theorem_at(t, FormulaVariant::corrected())
                    .unwrap();
                assert_eq!(r.path, RelationPath::Constant);
                assert!(r.max_residual() < 1e-8, "{name} t={t}: {:?}", r);
            }
        }
        for name in ["variable-circle", "variable-ellipse"] {
            let case = builtin_case(name).unwrap();
            for t in curve_samples(&case.curve, 64) {
                let r = case
                    .verify_theorem_at(t, FormulaVariant::corrected())
                    .unwrap();
                assert_eq!(r.path, RelationPath::Variable);
                assert!(r.max_residual() < 1e-7, "{name} t={t}: {:?}", r);
            }
        }
    }

    #[test]
    fn theorem_holds_with_minus_outside_and_clockwise_curves() {
        let base = builtin_case("coupled-ellipse").unwrap();
        let samples: Vec<Vec2> = (0..48)
            .map(|k| {
                let a = -2.0 * std::f64::consts::PI * k as f64 / 48.0;
                Vec2::new(0.7 * a.cos() + 0.1 * (3.0 * a).cos(), 0.5 * a.sin())
            })
            .collect();
        let clockwise = ManufacturedCase {
            name: "clockwise".into(),
            curve: InterfaceCurve::sampled(&samples).unwrap(),
            ..base.clone()
        };
        for case in [base.swapped(), clockwise.clone(), clockwise.swapped()] {
            for t in curve_samples(&case.curve, 32) {
                let r = case
                    .verify_theorem_at(t, FormulaVariant::corrected())
                    .unwrap();
                assert!(r.max_residual() < 1e-8, "{} t={t}: {r:?}", case.name);
            }
        }
    }

    #[test]
    fn theorem_is_curvature_robust() {
        for r in [0.5, 1.0, 5.0] {
            let (m, p) = tensor_pair("coupled").unwrap();
            let case = ManufacturedCase {
                name: format!("coupled-r{r}"),
                curve: InterfaceCurve::circle(Vec2::new(0.1, 0.0), r).unwrap(),
                u_plus: default_plus(),
                u_minus: default_minus(),
                tensor_plus: constant(p, 0.3),
                tensor_minus: constant(m, 0.0),
            };
            for t in curve_samples(&case.curve, 32) {
                assert!(
                    case.verify_theorem_at(t, FormulaVariant::corrected())
                        .unwrap()
                        .max_residual()
                        < 1e-8
                );
            }
        }
    }

    #[test]
    fn swapped_case_negates_value_jump() {
        let case = builtin_case("coupled-ellipse").unwrap();
        let swapped = case.swapped();
        let (a, b) = (
            case.jump_data_at(0.7).unwrap(),
            swapped.jump_data_at(0.7).unwrap(),
        );
        assert!((a.w + b.w).abs() < 1e-14);
        assert!((a.v - b.v).abs() < 1e-13);
        assert_eq!(
            swapped.swapped().curve.minus_inside(),
            case.curve.minus_inside()
        );
        let p = Vec2::new(0.01, 0.02);
        assert_eq!(case.side_of(p), Side::Minus);
        assert_eq!(swapped.side_of(p), Side::Plus);
        assert!((case.exact(p) - swapped.exact(p)).abs() < 1e-15);
    }

    #[test]
    fn value_jump_differentiation_is_second_order() {
        let case = builtin_case("coupled-ellipse").unwrap();
        let steps = [0.02, 0.01, 0.005, 0.0025];
        let r: Vec<f64> = steps
            .iter()
            .map(|ds| {
                case.value_jump_second_derivative_residual(0.6, *ds)
                    .unwrap()
            })
            .collect();
        for k in 1..r.len() {
            assert!(r[k - 1] / r[k] >= 3.9, "ratios {:?}", r);
        }
    }

    #[test]
    fn variable_state_matches_oracle_through_relations() {
        let case = builtin_case("variable-ellipse").unwrap();
        let f = case.frame_at(2.5).unwrap();
        let setting = case.setting_at(&f).unwrap();
        let minus = case.side_state_in_frame(&f, Side::Minus);
        let jumps = case.jump_data_at(2.5).unwrap();
        let a = plus_state_oracle(&minus, &jumps, &setting).unwrap();
        let b =
            plus_state_closed_form_variable(&minus, &jumps, &setting, FormulaVariant::corrected())
                .unwrap();
        for d in relative_deviation(&a, &b) {
            assert!(d < 1e-10);
        }
    }
}
