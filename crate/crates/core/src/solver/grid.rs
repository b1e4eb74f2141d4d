use crate::error::{Error, Result};
use crate::geometry::{InterfaceCurve, Vec2};
use crate::manufactured::Side;

/// Uniform node grid over a rectangle with `n` cells per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lower: Vec2,
    pub upper: Vec2,
    pub n: usize,
}

impl GridSpec {
    pub const MIN_CELLS: usize = 8;

    pub fn new(lower: Vec2, upper: Vec2, n: usize) -> Result<Self> {
        if n < Self::MIN_CELLS {
            return Err(Error::Grid(format!(
                "need at least {} cells per side, got {n}",
                Self::MIN_CELLS
            )));
        }
        if !(upper.x > lower.x && upper.y > lower.y) {
            return Err(Error::Grid(format!("empty domain [{lower:?}, {upper:?}]")));
        }
        Ok(Self { lower, upper, n })
    }

    /// `[−1, 1]²`.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0), n)
    }

    pub fn hx(&self) -> f64 {
        (self.upper.x - self.lower.x) / self.n as f64
    }

    pub fn hy(&self) -> f64 {
        (self.upper.y - self.lower.y) / self.n as f64
    }

    /// Spacing along x (`width / n`).
    pub fn h(&self) -> f64 {
        self.hx()
    }

    pub fn nodes_per_side(&self) -> usize {
        self.n + 1
    }

    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.lower.x + i as f64 * self.hx(),
            self.lower.y + j as f64 * self.hy(),
        )
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nodes_per_side() + i
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n || j == self.n
    }
}

/// Grid plus level-set samples and node ownership.
#[derive(Debug, Clone)]
pub struct Grid {
    pub spec: GridSpec,
    pub phi: Vec<f64>,
    sides: Vec<Side>,
}

impl Grid {
    pub fn new(spec: GridSpec, curve: &InterfaceCurve) -> Self {
        let m = spec.nodes_per_side();
        let mut phi = Vec::with_capacity(m * m);
        for j in 0..m {
            for i in 0..m {
                phi.push(curve.level_set(spec.node(i, j)).0);
            }
        }
        let sides = phi
            .iter()
            .map(|p| if *p <= 0.0 { Side::Minus } else { Side::Plus })
            .collect();
        Self { spec, phi, sides }
    }

    pub fn side(&self, i: usize, j: usize) -> Side {
        self.sides[self.spec.index(i, j)]
    }

    /// True when the 3×3 block around an interior node holds both sides.
    pub fn is_irregular(&self, i: usize, j: usize) -> bool {
        if self.spec.is_boundary(i, j) {
            return false;
        }
        let own = self.side(i, j);
        (j - 1..=j + 1).any(|b| (i - 1..=i + 1).any(|a| self.side(a, b) != own))
    }

    /// Interior nodes in row-major order; their position is the unknown index.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.spec.n;
        (1..n).flat_map(move |j| (1..n).map(move |i| (i, j)))
    }

    pub fn unknown_index(&self, i: usize, j: usize) -> Option<usize> {
        let n = self.spec.n;
        (!self.spec.is_boundary(i, j)).then(|| (j - 1) * (n - 1) + (i - 1))
    }

    pub fn unknowns(&self) -> usize {
        (self.spec.n - 1).pow(2)
    }
}
