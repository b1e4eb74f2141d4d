//! Closed interface curves and the local (ξ, η) frame at an interface point.
//!
//! At an anchor `(X*, Y*)` with unit normal `n = (cos θ*, sin θ*)` pointing from
//! Ω⁻ into Ω⁺ and tangent `τ = (−sin θ*, cos θ*)`:
//!
//! ```text
//!   ξ =  (x − X*) cos θ* + (y − Y*) sin θ*
//!   η = −(x − X*) sin θ* + (y − Y*) cos θ*
//! ```
//!
//! Near the anchor the interface is the graph `ξ = χ(η)` with `χ(0) = χ′(0) = 0`.
//! A positive `χ″(0)` means the curve bends toward Ω⁺.

use std::f64::consts::TAU;

use nalgebra::{Rotation2, Vector2};

use crate::error::{Error, Result};
use crate::spline::PeriodicSpline;

pub type Vec2 = Vector2<f64>;

const DEGENERATE_TANGENT: f64 = 1e-14;
const CHI_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub enum CurveShape {
    Circle {
        center: Vec2,
        radius: f64,
    },
    /// `semi_axes.0` along the rotated x-axis, `semi_axes.1` along the rotated y-axis.
    Ellipse {
        center: Vec2,
        semi_axes: (f64, f64),
        rotation: f64,
    },
    /// Closed curve through samples, periodic cubic interpolation in the sample index.
    Sampled {
        samples: Vec<Vec2>,
        x: PeriodicSpline,
        y: PeriodicSpline,
        /// +1 for counter-clockwise sample order, -1 for clockwise.
        winding: f64,
    },
}

/// A smooth closed interface together with the choice of which side is Ω⁻.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceCurve {
    shape: CurveShape,
    minus_inside: bool,
}

/// Position and first two parameter derivatives of the curve.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub position: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
}

impl InterfaceCurve {
    pub fn circle(center: Vec2, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Geometry(format!(
                "circle radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            shape: CurveShape::Circle { center, radius },
            minus_inside: true,
        })
    }

    pub fn ellipse(center: Vec2, semi_axes: (f64, f64), rotation: f64) -> Result<Self> {
        let (a, b) = semi_axes;
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Geometry(format!(
                "ellipse semi-axes must be positive, got ({a}, {b})"
            )));
        }
        Ok(Self {
            shape: CurveShape::Ellipse {
                center,
                semi_axes,
                rotation,
            },
            minus_inside: true,
        })
    }

    /// Closed curve through `samples` (the closing segment back to the first sample is implied).
    pub fn sampled(samples: &[Vec2]) -> Result<Self> {
        let xs: Vec<f64> = samples.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = samples.iter().map(|p| p.y).collect();
        let x = PeriodicSpline::new(&xs)?;
        let y = PeriodicSpline::new(&ys)?;
        let n = samples.len();
        let area2: f64 = (0..n)
            .map(|i| {
                let (p, q) = (samples[i], samples[(i + 1) % n]);
                p.x * q.y - q.x * p.y
            })
            .sum();
        if area2.abs() < f64::EPSILON {
            return Err(Error::Geometry("sampled curve encloses no area".into()));
        }
        let curve = Self {
            shape: CurveShape::Sampled {
                samples: samples.to_vec(),
                x,
                y,
                winding: area2.signum(),
            },
            minus_inside: true,
        };
        for k in 0..2 * n {
            let t = 0.5 * k as f64;
            if curve.point(t).d1.norm() < DEGENERATE_TANGENT {
                return Err(Error::Geometry(format!(
                    "vanishing tangent at sample parameter {t}"
                )));
            }
        }
        Ok(curve)
    }

    /// Makes Ω⁻ the exterior of the curve; the normal then points inward.
    pub fn with_minus_outside(mut self) -> Self {
        self.minus_inside = false;
        self
    }

    /// Exchanges the roles of Ω⁻ and Ω⁺.
    pub fn flipped(mut self) -> Self {
        self.minus_inside = !self.minus_inside;
        self
    }

    pub fn minus_inside(&self) -> bool {
        self.minus_inside
    }

    pub fn shape(&self) -> &CurveShape {
        &self.shape
    }

    pub fn period(&self) -> f64 {
        match &self.shape {
            CurveShape::Circle { .. } | CurveShape::Ellipse { .. } => TAU,
            CurveShape::Sampled { x, .. } => x.period(),
        }
    }

    pub fn point(&self, t: f64) -> CurvePoint {
        match &self.shape {
            CurveShape::Circle { center, radius } => {
                let (s, c) = t.sin_cos();
                CurvePoint {
                    position: center + Vec2::new(c, s) * *radius,
                    d1: Vec2::new(-s, c) * *radius,
                    d2: Vec2::new(-c, -s) * *radius,
                }
            }
            CurveShape::Ellipse {
                center,
                semi_axes: (a, b),
                rotation,
            } => {
                let rot = Rotation2::new(*rotation);
                let (s, c) = t.sin_cos();
                CurvePoint {
                    position: center + rot * Vec2::new(a * c, b * s),
                    d1: rot * Vec2::new(-a * s, b * c),
                    d2: rot * Vec2::new(-a * c, -b * s),
                }
            }
            CurveShape::Sampled { x, y, .. } => {
                let [x0, x1, x2] = x.eval(t);
                let [y0, y1, y2] = y.eval(t);
                CurvePoint {
                    position: Vec2::new(x0, y0),
                    d1: Vec2::new(x1, y1),
                    d2: Vec2::new(x2, y2),
                }
            }
        }
    }

    pub fn position(&self, t: f64) -> Vec2 {
        self.point(t).position
    }

    /// +1 when the parameterization runs counter-clockwise.
    fn winding(&self) -> f64 {
        match &self.shape {
            CurveShape::Sampled { winding, .. } => *winding,
            _ => 1.0,
        }
    }

    /// Unit normal (Ω⁻ → Ω⁺) and unit tangent `τ = rot90(n)` at parameter `t`.
    pub fn normal_tangent_at(&self, t: f64) -> Result<(Vec2, Vec2)> {
        let d1 = self.point(t).d1;
        let speed = d1.norm();
        if !(speed >= DEGENERATE_TANGENT) {
            return Err(Error::Geometry(format!(
                "degenerate tangent |τ| = {speed:e} at t = {t}"
            )));
        }
        let outward = Vec2::new(d1.y, -d1.x) * (self.winding() / speed);
        let n = if self.minus_inside { outward } else { -outward };
        Ok((n, Vec2::new(-n.y, n.x)))
    }

    /// `dn/dt` for the unit normal of [`InterfaceCurve::normal_tangent_at`].
    pub fn normal_rate(&self, t: f64) -> Result<Vec2> {
        let p = self.point(t);
        let (n, _) = self.normal_tangent_at(t)?;
        let speed = p.d1.norm();
        let sign = if self.minus_inside {
            self.winding()
        } else {
            -self.winding()
        };
        let speed_rate = p.d1.dot(&p.d2) / speed;
        Ok(Vec2::new(p.d2.y, -p.d2.x) * (sign / speed) - n * (speed_rate / speed))
    }

    pub fn build_local_frame(&self, t: f64) -> Result<LocalFrame> {
        let p = self.point(t);
        let (n, tau) = self.normal_tangent_at(t)?;
        // ξ'(t) = P'·n = 0 at the anchor, so χ″ = ξ''/η'² there.
        let along = p.d1.dot(&tau);
        Ok(LocalFrame {
            anchor: p.position,
            theta: n.y.atan2(n.x),
            chi_second: p.d2.dot(&n) / (along * along),
            param: t,
        })
    }

    /// Bounding-box diagonal, used as the curve's length scale.
    pub fn diameter(&self) -> f64 {
        match &self.shape {
            CurveShape::Circle { radius, .. } => 2.0 * radius,
            CurveShape::Ellipse {
                semi_axes: (a, b), ..
            } => 2.0 * a.max(*b),
            CurveShape::Sampled { samples, .. } => {
                let (mut lo, mut hi) = (samples[0], samples[0]);
                for p in samples {
                    lo = lo.inf(p);
                    hi = hi.sup(p);
                }
                (hi - lo).norm()
            }
        }
    }

    /// Admissible |η| for [`InterfaceCurve::chi_probe`] at `frame`.
    pub fn graph_radius(&self, frame: &LocalFrame) -> f64 {
        0.5 / frame.chi_second.abs().max(1.0 / self.diameter())
    }

    /// ξ-coordinate of the interface point near the anchor whose local ordinate is `eta`.
    pub fn chi_probe(&self, frame: &LocalFrame, eta: f64) -> Result<f64> {
        let limit = self.graph_radius(frame);
        if !(eta.abs() < limit) {
            return Err(Error::GraphDomain { eta, limit });
        }
        if eta == 0.0 {
            return Ok(0.0);
        }
        Ok(frame
            .world_to_local(self.position(self.param_at_eta(frame, eta)?))
            .x)
    }

    /// Curve parameter whose point has local ordinate `eta` (|eta| within the graph radius).
    pub fn param_at_eta(&self, frame: &LocalFrame, eta: f64) -> Result<f64> {
        let limit = self.graph_radius(frame);
        let g = |t: f64| frame.world_to_local(self.position(t)).y - eta;
        let dg = |t: f64| self.point(t).d1.dot(&frame.tangent());
        let t0 = frame.param;
        if eta == 0.0 {
            return Ok(t0);
        }
        let slope = dg(t0);
        let step = 1.5 * eta / slope;
        let mut lo = t0;
        let mut hi = t0 + step;
        let mut tries = 0;
        while g(lo).signum() == g(hi).signum() {
            hi = t0 + (hi - t0) * 2.0;
            tries += 1;
            if tries > 30 || (hi - t0).abs() > 0.5 * self.period() {
                return Err(Error::GraphDomain { eta, limit });
            }
        }
        if g(lo) > 0.0 {
            std::mem::swap(&mut lo, &mut hi);
        }
        // Safeguarded Newton: bisection keeps g(lo) < 0 < g(hi).
        let mut t = 0.5 * (lo + hi);
        for _ in 0..200 {
            let val = g(t);
            if val < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let d = dg(t);
            let newton = t - val / d;
            let inside = (newton - lo) * (newton - hi) < 0.0;
            let next = if d != 0.0 && inside {
                newton
            } else {
                0.5 * (lo + hi)
            };
            let moved = (next - t).abs() * slope.abs();
            t = next;
            if moved < CHI_TOLERANCE * 1e-3 || (hi - lo).abs() * slope.abs() < CHI_TOLERANCE * 1e-3
            {
                break;
            }
        }
        Ok(t)
    }

    /// Level-set value, negative in Ω⁻, and its gradient.
    pub fn level_set(&self, p: Vec2) -> (f64, Vec2) {
        let sign = if self.minus_inside { 1.0 } else { -1.0 };
        match &self.shape {
            CurveShape::Circle { center, radius } => {
                let r = p - center;
                let dist = r.norm();
                let grad = if dist > 0.0 { r / dist } else { Vec2::x() };
                (sign * (dist - radius), grad * sign)
            }
            CurveShape::Ellipse {
                center,
                semi_axes: (a, b),
                rotation,
            } => {
                let rot = Rotation2::new(*rotation);
                let q = rot.inverse() * (p - center);
                let phi = (q.x / a).powi(2) + (q.y / b).powi(2) - 1.0;
                let grad = rot * Vec2::new(2.0 * q.x / (a * a), 2.0 * q.y / (b * b));
                // Scaled so that |∇φ| ≈ 1 on the curve for moderate aspect ratios.
                let scale = 0.5 * a.min(*b);
                (sign * phi * scale, grad * (sign * scale))
            }
            CurveShape::Sampled { .. } => {
                let t = self.closest_param(p);
                let n = self
                    .normal_tangent_at(t)
                    .map(|(n, _)| n)
                    .unwrap_or_else(|_| Vec2::x());
                ((p - self.position(t)).dot(&n), n)
            }
        }
    }

    /// Newton projection onto the zero level set along ∇φ; returns the curve parameter and point.
    pub fn project(&self, p: Vec2, tol: f64) -> Result<(f64, Vec2)> {
        let mut x = p;
        for _ in 0..50 {
            let (phi, grad) = self.level_set(x);
            let g2 = grad.norm_squared();
            if g2 == 0.0 {
                return Err(Error::Geometry(format!(
                    "level-set gradient vanishes at {x:?}"
                )));
            }
            let step = grad * (phi / g2);
            x -= step;
            if step.norm() <= tol {
                let t = self.param_of(x);
                return Ok((t, self.position(t)));
            }
        }
        Err(Error::Geometry(format!(
            "interface projection from ({}, {}) did not converge in 50 iterations",
            p.x, p.y
        )))
    }

    /// Parameter of a point lying on (or very near) the curve.
    pub fn param_of(&self, p: Vec2) -> f64 {
        match &self.shape {
            CurveShape::Circle { center, .. } => {
                let r = p - center;
                r.y.atan2(r.x).rem_euclid(TAU)
            }
            CurveShape::Ellipse {
                center,
                semi_axes: (a, b),
                rotation,
            } => {
                let q = Rotation2::new(*rotation).inverse() * (p - center);
                (q.y / b).atan2(q.x / a).rem_euclid(TAU)
            }
            CurveShape::Sampled { .. } => self.closest_param(p),
        }
    }

    /// Parameter of the closest curve point (coarse scan then Newton on (P − p)·P′ = 0).
    fn closest_param(&self, p: Vec2) -> f64 {
        let period = self.period();
        let scan = (period.ceil() as usize).max(8) * 16;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..scan {
            let t = period * k as f64 / scan as f64;
            let d = (self.position(t) - p).norm_squared();
            if d < best.0 {
                best = (d, t);
            }
        }
        let mut t = best.1;
        let window = period / scan as f64;
        for _ in 0..50 {
            let c = self.point(t);
            let r = c.position - p;
            let g = r.dot(&c.d1);
            let dg = c.d1.norm_squared() + r.dot(&c.d2);
            if dg <= 0.0 {
                break;
            }
            let dt = (g / dg).clamp(-window, window);
            t -= dt;
            if dt.abs() < 1e-15 * period {
                break;
            }
        }
        t.rem_euclid(period)
    }

    /// The same interface rotated about the origin by `phi`.
    pub fn rotated(&self, phi: f64) -> Result<Self> {
        let rot = Rotation2::new(phi);
        let rotated = match &self.shape {
            CurveShape::Circle { center, radius } => Self::circle(rot * center, *radius)?,
            CurveShape::Ellipse {
                center,
                semi_axes,
                rotation,
            } => Self::ellipse(rot * center, *semi_axes, rotation + phi)?,
            CurveShape::Sampled { samples, .. } => {
                let pts: Vec<Vec2> = samples.iter().map(|p| rot * p).collect();
                Self::sampled(&pts)?
            }
        };
        Ok(Self {
            minus_inside: self.minus_inside,
            ..rotated
        })
    }
}

/// Local coordinate frame at an interface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub anchor: Vec2,
    /// Angle of the Ω⁻ → Ω⁺ normal with the x-axis.
    pub theta: f64,
    /// χ″(0) of the local graph ξ = χ(η).
    pub chi_second: f64,
    /// Curve parameter of the anchor.
    pub param: f64,
}

impl LocalFrame {
    pub fn normal(&self) -> Vec2 {
        let (s, c) = self.theta.sin_cos();
        Vec2::new(c, s)
    }

    pub fn tangent(&self) -> Vec2 {
        let (s, c) = self.theta.sin_cos();
        Vec2::new(-s, c)
    }

    /// World point to (ξ, η).
    pub fn world_to_local(&self, p: Vec2) -> Vec2 {
        let d = p - self.anchor;
        Vec2::new(d.dot(&self.normal()), d.dot(&self.tangent()))
    }

    pub fn local_to_world(&self, q: Vec2) -> Vec2 {
        self.anchor + self.normal() * q.x + self.tangent() * q.y
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn unit_circle() -> InterfaceCurve {
        InterfaceCurve::circle(Vec2::zeros(), 1.0).unwrap()
    }

    /// Fourth-order central second difference of χ at 0.
    fn chi_second_fd(curve: &InterfaceCurve, frame: &LocalFrame, h: f64) -> f64 {
        let chi = |e: f64| curve.chi_probe(frame, e).unwrap();
        (-chi(2.0 * h) + 16.0 * chi(h) - 30.0 * chi(0.0) + 16.0 * chi(-h) - chi(-2.0 * h))
            / (12.0 * h * h)
    }

    #[test]
    fn unit_circle_frame_at_east_point() {
        let f = unit_circle().build_local_frame(0.0).unwrap();
        assert!(f.theta.abs() < 1e-15);
        assert!((f.chi_second + 1.0).abs() < 1e-14);
    }

    #[test]
    fn huge_circle_is_nearly_flat() {
        let c = InterfaceCurve::circle(Vec2::new(3.0, -1.0), 1e6).unwrap();
        for t in [0.0, 1.0, 4.0] {
            let f = c.build_local_frame(t).unwrap();
            assert!(f.chi_second.abs() <= 1.0e-6 + 1e-15);
        }
    }

    #[test]
    fn ellipse_frame_matches_fd_probe() {
        let e = InterfaceCurve::ellipse(Vec2::zeros(), (2.0, 1.0), 0.0).unwrap();
        let f = e.build_local_frame(0.0).unwrap();
        assert!(f.theta.abs() < 1e-15);
        assert!((f.chi_second + 2.0).abs() < 1e-12);
        let probe = chi_second_fd(&e, &f, 1e-3);
        assert!((probe - f.chi_second).abs() < 1e-8, "probe {probe}");
    }

    #[test]
    fn world_local_examples() {
        let f = LocalFrame {
            anchor: Vec2::new(1.0, 2.0),
            theta: 0.0,
            chi_second: 0.0,
            param: 0.0,
        };
        assert_eq!(f.world_to_local(Vec2::new(1.0, 2.0)), Vec2::zeros());
        let g = LocalFrame {
            anchor: Vec2::zeros(),
            theta: FRAC_PI_2,
            chi_second: 0.0,
            param: 0.0,
        };
        let q = g.world_to_local(Vec2::new(1.0, 0.0));
        assert!((q - Vec2::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn world_local_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = LocalFrame {
            anchor: Vec2::new(0.3, -0.7),
            theta: 2.1,
            chi_second: 0.0,
            param: 0.0,
        };
        for _ in 0..100 {
            let p = Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            assert!((f.local_to_world(f.world_to_local(p)) - p).norm() < 1e-13);
        }
    }

    #[test]
    fn normal_tangent_on_unit_circle_north() {
        let (n, tau) = unit_circle().normal_tangent_at(FRAC_PI_2).unwrap();
        assert!((n - Vec2::new(0.0, 1.0)).norm() < 1e-15);
        assert!((tau - Vec2::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn normal_matches_implicit_gradient_on_ellipse() {
        let (a, b, rot) = (1.7, 0.6, 0.4);
        let e = InterfaceCurve::ellipse(Vec2::new(0.2, 0.1), (a, b), rot).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let t = rng.random_range(0.0..TAU);
            let (n, tau) = e.normal_tangent_at(t).unwrap();
            let f = e.build_local_frame(t).unwrap();
            assert!((n - f.normal()).norm() < 1e-13);
            assert!((tau - f.tangent()).norm() < 1e-13);
            assert!(n.dot(&tau).abs() < 1e-12);
            // Oracle: gradient of (x'/a)² + (y'/b)² − 1 in the rotated frame.
            let q = Rotation2::new(-rot) * (e.position(t) - Vec2::new(0.2, 0.1));
            let g = Rotation2::new(rot) * Vec2::new(q.x / (a * a), q.y / (b * b));
            assert!((n - g.normalize()).norm() < 1e-10);
        }
    }

    #[test]
    fn minus_outside_flips_normal_and_curvature_sign() {
        let c = unit_circle().with_minus_outside();
        let f = c.build_local_frame(0.0).unwrap();
        assert!((f.normal() - Vec2::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((f.chi_second - 1.0).abs() < 1e-14);
    }

    #[test]
    fn chi_probe_circle_values() {
        let c = unit_circle();
        let f = c.build_local_frame(0.0).unwrap();
        assert_eq!(c.chi_probe(&f, 0.0).unwrap(), 0.0);
        let expected = (1.0f64 - 0.01).sqrt() - 1.0;
        assert!((c.chi_probe(&f, 0.1).unwrap() - expected).abs() < 1e-13);
        for eta in [0.05, 0.13, 0.31] {
            let d = c.chi_probe(&f, eta).unwrap() - c.chi_probe(&f, -eta).unwrap();
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn chi_probe_rejects_large_offsets() {
        let c = unit_circle();
        let f = c.build_local_frame(1.0).unwrap();
        assert!(matches!(
            c.chi_probe(&f, 0.9),
            Err(Error::GraphDomain { .. })
        ));
    }

    #[test]
    fn sampled_circle_approximates_circle() {
        let n = 256;
        let pts: Vec<Vec2> = (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                Vec2::new(t.cos(), t.sin())
            })
            .collect();
        let s = InterfaceCurve::sampled(&pts).unwrap();
        assert!((s.position(0.0) - s.position(s.period())).norm() < 1e-12);
        let f = s.build_local_frame(0.0).unwrap();
        assert!(f.theta.abs() < 1e-10);
        assert!((f.chi_second + 1.0).abs() < 1e-4);
        // Clockwise samples keep the same outward normal.
        let rev: Vec<Vec2> = pts.iter().rev().cloned().collect();
        let r = InterfaceCurve::sampled(&rev).unwrap();
        let t = r.param_of(Vec2::new(1.0, 0.0));
        let g = r.build_local_frame(t).unwrap();
        assert!((g.normal() - Vec2::new(1.0, 0.0)).norm() < 1e-6);
        assert!((g.chi_second + 1.0).abs() < 1e-4);
    }

    #[test]
    fn projection_lands_on_curve() {
        let e = InterfaceCurve::ellipse(Vec2::zeros(), (1.0, 0.5), 0.3).unwrap();
        let (t, p) = e.project(Vec2::new(0.9, 0.4), 1e-14).unwrap();
        assert!((e.position(t) - p).norm() < 1e-12);
        assert!(e.level_set(p).0.abs() < 1e-12);
        let c = unit_circle();
        let (t, p) = c.project(Vec2::new(0.0, -0.5), 1e-14).unwrap();
        assert!((p - Vec2::new(0.0, -1.0)).norm() < 1e-14);
        assert!((t - 1.5 * PI).abs() < 1e-14);
    }

    #[test]
    fn level_set_sign_convention() {
        let c = unit_circle();
        assert!(c.level_set(Vec2::zeros()).0 < 0.0);
        assert!(c.level_set(Vec2::new(2.0, 0.0)).0 > 0.0);
        let o = unit_circle().with_minus_outside();
        assert!(o.level_set(Vec2::zeros()).0 > 0.0);
    }

    #[test]
    fn degenerate_sampled_curve_rejected() {
        let pts = vec![Vec2::zeros(); 6];
        assert!(InterfaceCurve::sampled(&pts).is_err());
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        fn curves() -> impl Strategy<Value = InterfaceCurve> {
            prop_oneof![
                (0.5f64..5.0, -1.0f64..1.0, -1.0f64..1.0)
                    .prop_map(|(r, x, y)| InterfaceCurve::circle(Vec2::new(x, y), r).unwrap()),
                (0.5f64..2.0, 0.4f64..1.5, 0.0f64..3.0).prop_map(|(a, b, rot)| {
                    InterfaceCurve::ellipse(Vec2::new(0.1, -0.2), (a, b), rot).unwrap()
                }),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn local_graph_is_tangent_at_anchor(curve in curves(), t in 0.0f64..TAU) {
                let f = curve.build_local_frame(t).unwrap();
                prop_assert_eq!(curve.chi_probe(&f, 0.0).unwrap(), 0.0);
                let h = 1e-5 * curve.graph_radius(&f);
                let slope = (curve.chi_probe(&f, h).unwrap() - curve.chi_probe(&f, -h).unwrap()) / (2.0 * h);
                prop_assert!(slope.abs() <= 1e-8 * curve.diameter());
            }

            #[test]
            fn chi_second_matches_probe(curve in curves(), t in 0.0f64..TAU) {
                let f = curve.build_local_frame(t).unwrap();
                let h = 2e-3 * curve.graph_radius(&f);
                let fd = chi_second_fd(&curve, &f, h);
                prop_assert!((fd - f.chi_second).abs() <= 1e-7 * f.chi_second.abs().max(1.0 / curve.diameter()),
                    "fd {} frame {}", fd, f.chi_second);
            }

            #[test]
            fn circle_curvature_magnitude(r in 0.1f64..20.0, t in 0.0f64..TAU, inside in any::<bool>()) {
                let mut c = InterfaceCurve::circle(Vec2::new(0.3, 0.4), r).unwrap();
                if !inside { c = c.with_minus_outside(); }
                let f = c.build_local_frame(t).unwrap();
                let expected = if inside { -1.0 / r } else { 1.0 / r };
                prop_assert!((f.chi_second - expected).abs() <= 1e-10 / r);
            }

            #[test]
            fn frame_is_rotation_equivariant(curve in curves(), t in 0.0f64..TAU, phi in -3.0f64..3.0) {
                let f = curve.build_local_frame(t).unwrap();
                let rotated = curve.rotated(phi).unwrap();
                let anchor = Rotation2::new(phi) * f.anchor;
                let g = rotated.build_local_frame(rotated.param_of(anchor)).unwrap();
                let dtheta = (g.theta - f.theta - phi).rem_euclid(TAU);
                prop_assert!(dtheta.min(TAU - dtheta) < 1e-10);
                prop_assert!((g.chi_second - f.chi_second).abs() < 1e-10 * f.chi_second.abs().max(1.0));
            }

            #[test]
            fn normal_is_unit_and_orthogonal(curve in curves(), t in 0.0f64..TAU) {
                let (n, tau) = curve.normal_tangent_at(t).unwrap();
                prop_assert!((n.norm() - 1.0).abs() < 1e-13);
                prop_assert!((tau.norm() - 1.0).abs() < 1e-13);
                prop_assert!(n.dot(&tau).abs() < 1e-12);
            }
        }
    }
}
