//! Interface relations: the "+"-side derivative state from the "−"-side state and jump data.
//!
//! Two independent routes are provided:
//!
//! * [`plus_state_oracle`] assembles the six primitive identities at the anchor
//!   (`s = 0`, `χ′ = 0`) and solves the 6×6 system;
//! * [`plus_state_closed_form_constant`] / [`plus_state_closed_form_variable`]
//!   evaluate explicit relations term by term.
//!
//! The explicit relations exist in a published form that contains several
//! misprints. [`FormulaVariant`] selects, per [`Erratum`], whether the published or
//! the corrected expression is used. The primitive identities are authoritative.
//!
//! Jumps are `[q] = q⁺ − q⁻`. The PDE is `−∇·(A∇u) + σu = f`, which in the local
//! frame reads `a11 u_ξξ + 2 a12 u_ξη + a22 u_ηη + c1 u_ξ + c2 u_η − σu = −f`.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::tensor::LocalTensor;

/// Condition estimate above which the primitive system is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Prescribed jumps at the anchor: `[u] = w`, `[A∇u·n] = v`, and their s-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JumpData {
    pub w: f64,
    pub w1: f64,
    pub w2: f64,
    pub v: f64,
    pub v1: f64,
}

impl JumpData {
    pub fn negated(&self) -> Self {
        Self {
            w: -self.w,
            w1: -self.w1,
            w2: -self.w2,
            v: -self.v,
            v1: -self.v1,
        }
    }
}

/// Value and local-frame derivatives on one side at the anchor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SideState {
    pub u: f64,
    pub u_xi: f64,
    pub u_eta: f64,
    pub u_xixi: f64,
    pub u_xieta: f64,
    pub u_etaeta: f64,
}

pub const STATE_COMPONENTS: [&str; 6] = ["u", "u_xi", "u_eta", "u_xixi", "u_xieta", "u_etaeta"];

impl SideState {
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.u,
            self.u_xi,
            self.u_eta,
            self.u_xixi,
            self.u_xieta,
            self.u_etaeta,
        ]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            u: a[0],
            u_xi: a[1],
            u_eta: a[2],
            u_xixi: a[3],
            u_xieta: a[4],
            u_etaeta: a[5],
        }
    }

    pub fn basis(k: usize) -> Self {
        let mut a = [0.0; 6];
        a[k] = 1.0;
        Self::from_array(a)
    }
}

/// Local tensor, reaction coefficient and source value of one side at the anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideCoefficients {
    pub tensor: LocalTensor,
    pub sigma: f64,
    pub source: f64,
}

/// Everything the relations need besides the minus state and the jumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceSetting {
    pub chi_second: f64,
    pub plus: SideCoefficients,
    pub minus: SideCoefficients,
}

impl InterfaceSetting {
    /// Exchanges the roles of the two sides (same frame).
    pub fn swapped(&self) -> Self {
        Self {
            chi_second: self.chi_second,
            plus: self.minus,
            minus: self.plus,
        }
    }
}

/// Misprints in the published explicit relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Erratum {
    /// `w′` coefficient of `u_ξη⁺` divides by the world entry `(A11⁺)²` instead of `(a11⁺)²`.
    MixedWorldDenominator,
    /// `S2` carries an extra leading `−χ″`.
    S2ExtraCurvature,
    /// `w″` coefficient in `S3` reads `2(a12⁺)² − a11⁺a12⁺` instead of `2(a12⁺)² − a11⁺a22⁺`.
    S3SecondTangentialCoefficient,
    /// `w′` coefficient in `S3` reads `a11⁺a12⁺a22⁺ − 4(a12⁺)³` instead of `3a11⁺a12⁺a22⁺ − 4(a12⁺)³`.
    S3FirstTangentialFactor,
    /// `u_ξη⁻` and `u_ηη⁻` coefficients of the constant `u_ξξ⁺` relation are exchanged.
    SwappedSecondDerivativeCoefficients,
    /// `w″` coefficient of the variable `u_ξξ⁺` relation divides by `a11⁺` instead of `(a11⁺)²`.
    VariableSecondTangentialDenominator,
    /// The local PDE is written with `= f`, giving `+[f]/a11⁺` where `−∇·(A∇u) + σu = f` gives `−[f]/a11⁺`.
    SourceSign,
}

impl Erratum {
    pub const ALL: [Erratum; 7] = [
        Erratum::MixedWorldDenominator,
        Erratum::S2ExtraCurvature,
        Erratum::S3SecondTangentialCoefficient,
        Erratum::S3FirstTangentialFactor,
        Erratum::SwappedSecondDerivativeCoefficients,
        Erratum::VariableSecondTangentialDenominator,
        Erratum::SourceSign,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Erratum::MixedWorldDenominator => "mixed-world-denominator",
            Erratum::S2ExtraCurvature => "s2-extra-curvature",
            Erratum::S3SecondTangentialCoefficient => "s3-w2-coefficient",
            Erratum::S3FirstTangentialFactor => "s3-w1-factor",
            Erratum::SwappedSecondDerivativeCoefficients => "swapped-minus-second-derivatives",
            Erratum::VariableSecondTangentialDenominator => "variable-w2-denominator",
            Erratum::SourceSign => "source-sign",
        }
    }

    fn bit(&self) -> u8 {
        1 << (*self as u8)
    }
}

/// Which errata are reproduced (published form) versus corrected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FormulaVariant {
    published: u8,
}

impl FormulaVariant {
    pub const fn corrected() -> Self {
        Self { published: 0 }
    }

    pub fn as_published() -> Self {
        Erratum::ALL
            .iter()
            .fold(Self::corrected(), |v, e| v.with_published(*e))
    }

    pub fn only(erratum: Erratum) -> Self {
        Self::corrected().with_published(erratum)
    }

    pub fn with_published(self, erratum: Erratum) -> Self {
        Self {
            published: self.published | erratum.bit(),
        }
    }

    pub fn is_published(&self, erratum: Erratum) -> bool {
        self.published & erratum.bit() != 0
    }

    pub fn is_corrected(&self) -> bool {
        self.published == 0
    }
}

/// The six primitive identities as `M x = b`, unknowns ordered as [`SideState`].
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveSystem {
    pub matrix: SMatrix<f64, 6, 6>,
    pub rhs: SVector<f64, 6>,
}

impl PrimitiveSystem {
    pub fn condition_estimate(&self) -> f64 {
        let sv = self.matrix.singular_values();
        let (max, min) = (sv.max(), sv.min());
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn residual(&self, plus: &SideState) -> SVector<f64, 6> {
        self.matrix * SVector::from(plus.to_array()) - self.rhs
    }

    /// Gaussian elimination with partial pivoting.
    pub fn solve(&self) -> Result<SideState> {
        let condition = self.condition_estimate();
        if !(condition <= MAX_CONDITION) {
            return Err(Error::DegenerateFrame { condition });
        }
        let x = self
            .matrix
            .lu()
            .solve(&self.rhs)
            .ok_or(Error::DegenerateFrame { condition })?;
        Ok(SideState::from_array(x.into()))
    }
}

/// Left-hand sides of the six identities applied to one side's state:
/// value, `u_η`, `χ″u_ξ + u_ηη`, conormal flux, its s-derivative, and the PDE operator.
fn identity_operators(k: f64, side: &SideCoefficients) -> SMatrix<f64, 6, 6> {
    let t = &side.tensor;
    #[rustfmt::skip]
    let m = SMatrix::<f64, 6, 6>::from_row_slice(&[
        1.0,         0.0,  0.0,  0.0,   0.0,           0.0,
        0.0,         0.0,  1.0,  0.0,   0.0,           0.0,
        0.0,         k,    0.0,  0.0,   0.0,           1.0,
        0.0,         t.a11, t.a12, 0.0, 0.0,           0.0,
        0.0,         t.c3, t.c4, 0.0,   t.a11,         t.a12,
        -side.sigma, t.c1, t.c2, t.a11, 2.0 * t.a12,   t.a22,
    ]);
    m
}

fn jump_vector(jumps: &JumpData, setting: &InterfaceSetting) -> SVector<f64, 6> {
    SVector::from([
        jumps.w,
        jumps.w1,
        jumps.w2,
        jumps.v,
        jumps.v1,
        -(setting.plus.source - setting.minus.source),
    ])
}

/// Encodes the six identities with all minus-side terms moved to the right-hand side.
pub fn assemble_primitive_system(
    minus: &SideState,
    jumps: &JumpData,
    setting: &InterfaceSetting,
) -> Result<PrimitiveSystem> {
    if !(setting.plus.tensor.a11 > 0.0) {
        return Err(Error::Coefficient(format!(
            "a11+ must be positive, got {}",
            setting.plus.tensor.a11
        )));
    }
    let k = setting.chi_second;
    let matrix = identity_operators(k, &setting.plus);
    let rhs = jump_vector(jumps, setting)
        + identity_operators(k, &setting.minus) * SVector::from(minus.to_array());
    Ok(PrimitiveSystem { matrix, rhs })
}

/// Residuals of the six identities, `L⁺(plus) − L⁻(minus) − jumps`.
pub fn identity_residuals(
    plus: &SideState,
    minus: &SideState,
    jumps: &JumpData,
    setting: &InterfaceSetting,
) -> [f64; 6] {
    let k = setting.chi_second;
    let r = identity_operators(k, &setting.plus) * SVector::from(plus.to_array())
        - identity_operators(k, &setting.minus) * SVector::from(minus.to_array())
        - jump_vector(jumps, setting);
    r.into()
}

pub fn plus_state_oracle(
    minus: &SideState,
    jumps: &JumpData,
    setting: &InterfaceSetting,
) -> Result<SideState> {
    assemble_primitive_system(minus, jumps, setting)?.solve()
}

/// Shared first four relations (identical for constant and variable coefficients).
fn first_four(
    m: &SideState,
    j: &JumpData,
    k: f64,
    p: &LocalTensor,
    n: &LocalTensor,
) -> (f64, f64, f64, f64) {
    let p11 = p.a11;
    let d11 = p.a11 - n.a11;
    let d12 = p.a12 - n.a12;
    let u = m.u + j.w;
    let u_xi = n.a11 / p11 * m.u_xi - d12 / p11 * m.u_eta + j.v / p11 - p.a12 / p11 * j.w1;
    let u_eta = m.u_eta + j.w1;
    let u_etaeta = k * d11 / p11 * m.u_xi + k * d12 / p11 * m.u_eta + m.u_etaeta - k / p11 * j.v
        + k * p.a12 / p11 * j.w1
        + j.w2;
    (u, u_xi, u_eta, u_etaeta)
}

fn check_plus(setting: &InterfaceSetting) -> Result<()> {
    let a = setting.plus.tensor.a11;
    if !(a > 0.0) {
        return Err(Error::Coefficient(format!(
            "a11+ must be positive, got {a}"
        )));
    }
    Ok(())
}

/// Explicit relations for piecewise-constant tensors.
pub fn plus_state_closed_form_constant(
    minus: &SideState,
    jumps: &JumpData,
    setting: &InterfaceSetting,
    variant: FormulaVariant,
) -> Result<SideState> {
    check_plus(setting)?;
    let (m, j, k) = (minus, jumps, setting.chi_second);
    let (p, n) = (&setting.plus.tensor, &setting.minus.tensor);
    let (p11, p12, p22) = (p.a11, p.a12, p.a22);
    let (d11, d12, d22) = (p11 - n.a11, p12 - n.a12, p22 - n.a22);
    let (ds, df) = (
        setting.plus.sigma - setting.minus.sigma,
        setting.plus.source - setting.minus.source,
    );
    let pub_ = |e| variant.is_published(e);
    let p11_2 = p11 * p11;
    let p11_3 = p11_2 * p11;

    let (u, u_xi, u_eta, u_etaeta) = first_four(m, j, k, p, n);

    let mixed_denominator = if pub_(Erratum::MixedWorldDenominator) {
        p.world_a11 * p.world_a11
    } else {
        p11_2
    };
    let u_xieta = k * (p11 * d12 - 2.0 * p12 * d11) / p11_2 * m.u_xi
        + k * (p11 * d22 - 2.0 * p12 * d12) / p11_2 * m.u_eta
        + n.a11 / p11 * m.u_xieta
        - d12 / p11 * m.u_etaeta
        + k * 2.0 * p12 / p11_2 * j.v
        + j.v1 / p11
        + k * (p11 * p22 - 2.0 * p12 * p12) / mixed_denominator * j.w1
        - p12 / p11 * j.w2;

    let s1 = (2.0 * p11 * p12 * d12 - 4.0 * p12 * p12 * d11 + p11 * p22 * d11) / p11_3;
    let s2_core = (2.0 * p11 * p12 * d22 - 4.0 * p12 * p12 * d12 + p11 * p22 * d12) / p11_3;
    let s2 = if pub_(Erratum::S2ExtraCurvature) {
        -k * s2_core
    } else {
        s2_core
    };
    let w1_factor = if pub_(Erratum::S3FirstTangentialFactor) {
        1.0
    } else {
        3.0
    };
    let w2_entry = if pub_(Erratum::S3SecondTangentialCoefficient) {
        p12
    } else {
        p22
    };
    let s3 = -k * (4.0 * p12 * p12 - p11 * p22) / p11_3 * j.v - 2.0 * p12 / p11_2 * j.v1
        + setting.plus.sigma * j.w / p11
        - k * (w1_factor * p11 * p12 * p22 - 4.0 * p12 * p12 * p12) / p11_3 * j.w1
        + (2.0 * p12 * p12 - p11 * w2_entry) / p11_2 * j.w2;
    let coef_a = (2.0 * p12 * d12 - p11 * d22) / p11_2;
    let coef_b = 2.0 * (p12 * d11 - p11 * d12) / p11_2;
    let (c_xieta, c_etaeta) = if pub_(Erratum::SwappedSecondDerivativeCoefficients) {
        (coef_a, coef_b)
    } else {
        (coef_b, coef_a)
    };
    let source_sign = if pub_(Erratum::SourceSign) { 1.0 } else { -1.0 };
    let u_xixi = -s1 * k * m.u_xi - s2 * k * m.u_eta
        + n.a11 / p11 * m.u_xixi
        + c_xieta * m.u_xieta
        + c_etaeta * m.u_etaeta
        + source_sign * df / p11
        + ds / p11 * m.u
        + s3;

    Ok(SideState {
        u,
        u_xi,
        u_eta,
        u_xixi,
        u_xieta,
        u_etaeta,
    })
}

/// Explicit relations for variable coefficients; `setting` must carry the full
/// c-coefficients of both sides (see [`LocalTensor::at_frame`]).
pub fn plus_state_closed_form_variable(
    minus: &SideState,
    jumps: &JumpData,
    setting: &InterfaceSetting,
    variant: FormulaVariant,
) -> Result<SideState> {
    check_plus(setting)?;
    let (m, j, k) = (minus, jumps, setting.chi_second);
    let (p, n) = (&setting.plus.tensor, &setting.minus.tensor);
    let (p11, p12, p22) = (p.a11, p.a12, p.a22);
    let (d11, d12, d22) = (p11 - n.a11, p12 - n.a12, p22 - n.a22);
    let (dc2, dc3, dc4) = (p.c2 - n.c2, p.c3 - n.c3, p.c4 - n.c4);
    let (ds, df) = (
        setting.plus.sigma - setting.minus.sigma,
        setting.plus.source - setting.minus.source,
    );
    let p11_2 = p11 * p11;
    let p11_3 = p11_2 * p11;

    let (u, u_xi, u_eta, u_etaeta) = first_four(m, j, k, p, n);

    // Shared groupings of the u_ξη⁺ coefficients, reused inside u_ξξ⁺.
    let g_xi = n.c3 * d11 - n.a11 * dc3 - k * p12 * d11;
    let g_eta = p.c3 * d12 - p11 * dc4 - k * p12 * d12;
    let g_w1 = p.c3 * p12 - p11 * p.c4 - k * p12 * p12;
    let g_v = k * p12 - p.c3;

    let u_xieta = g_xi / p11_2 * m.u_xi + g_eta / p11_2 * m.u_eta - d12 / p11 * m.u_etaeta
        + n.a11 / p11 * m.u_xieta
        + g_w1 / p11_2 * j.w1
        - p12 / p11 * j.w2
        + g_v / p11_2 * j.v
        + j.v1 / p11;

    let w2_denominator = if variant.is_published(Erratum::VariableSecondTangentialDenominator) {
        p11
    } else {
        p11_2
    };
    let source_sign = if variant.is_published(Erratum::SourceSign) {
        1.0
    } else {
        -1.0
    };
    let u_xixi = (p11_2 * n.c1 - p11 * n.a11 * p.c1 - 2.0 * p12 * g_xi - k * p11 * p22 * d11)
        / p11_3
        * m.u_xi
        + (p11 * p.c1 * d12 - p11_2 * dc2 - 2.0 * p12 * g_eta - k * p11 * p22 * d12) / p11_3
            * m.u_eta
        + n.a11 / p11 * m.u_xixi
        + (2.0 * p12 * d12 - p11 * d22) / p11_2 * m.u_etaeta
        + 2.0 * (p12 * d11 - p11 * d12) / p11_2 * m.u_xieta
        + (p11 * p12 * p.c1 - p11_2 * p.c2 - 2.0 * p12 * g_w1 - k * p11 * p12 * p22) / p11_3 * j.w1
        + (2.0 * p12 * p12 - p11 * p22) / w2_denominator * j.w2
        + (k * p11 * p22 - p11 * p.c1 - 2.0 * p12 * g_v) / p11_3 * j.v
        - 2.0 * p12 / p11_2 * j.v1
        + (setting.plus.sigma * j.w + ds * m.u) / p11
        + source_sign * df / p11;

    Ok(SideState {
        u,
        u_xi,
        u_eta,
        u_xixi,
        u_xieta,
        u_etaeta,
    })
}

/// Which set of explicit relations is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationPath {
    Constant,
    Variable,
}

impl RelationPath {
    pub const ALL: [RelationPath; 2] = [RelationPath::Constant, RelationPath::Variable];

    pub fn name(&self) -> &'static str {
        match self {
            RelationPath::Constant => "constant",
            RelationPath::Variable => "variable",
        }
    }

    /// Evaluates the explicit relations of this path.
    pub fn evaluate(
        &self,
        minus: &SideState,
        jumps: &JumpData,
        setting: &InterfaceSetting,
        variant: FormulaVariant,
    ) -> Result<SideState> {
        match self {
            RelationPath::Constant => {
                plus_state_closed_form_constant(minus, jumps, setting, variant)
            }
            RelationPath::Variable => {
                plus_state_closed_form_variable(minus, jumps, setting, variant)
            }
        }
    }
}

/// `([(a11 − χ′a12) u_ξ] + [(a12 − χ′a22) u_η]) / √(1 + χ′²)`, the conormal flux jump
/// at a point of the local graph with slope `chi_prime`.
pub fn flux_jump_eval(
    plus: &SideState,
    minus: &SideState,
    plus_tensor: &LocalTensor,
    minus_tensor: &LocalTensor,
    chi_prime: f64,
) -> f64 {
    let flux = |s: &SideState, t: &LocalTensor| {
        (t.a11 - chi_prime * t.a12) * s.u_xi + (t.a12 - chi_prime * t.a22) * s.u_eta
    };
    (flux(plus, plus_tensor) - flux(minus, minus_tensor)) / (1.0 + chi_prime * chi_prime).sqrt()
}

/// Componentwise deviation `|a − b| / max(|b|, 1)`.
pub fn relative_deviation(a: &SideState, b: &SideState) -> [f64; 6] {
    let (a, b) = (a.to_array(), b.to_array());
    std::array::from_fn(|i| (a[i] - b[i]).abs() / b[i].abs().max(1.0))
}
