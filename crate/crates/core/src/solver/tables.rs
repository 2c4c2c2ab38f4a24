//! Grids over `z1` and the tables tabulated on them.

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::Prescription;
use crate::error::Error;
use crate::model::AgentType;

/// Uniform partition of `[0, 1]` with `n_points` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    n_points: usize,
}

impl Grid {
    pub const DEFAULT_POINTS: usize = 1001;

    pub fn new(n_points: usize) -> Result<Self, Error> {
        if n_points < 2 {
            return Err(Error::GridTooSmall(n_points));
        }
        Ok(Grid { n_points })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    fn intervals(&self) -> f64 {
        (self.n_points - 1) as f64
    }

    /// `i / (n - 1)`; exactly 0 and 1 at the ends.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_points);
        i as f64 / self.intervals()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.node(i))
    }

    /// Index of the node closest to `z1` (ties round up). `z1` is clamped
    /// into `[0, 1]` first.
    pub fn nearest(&self, z1: f64) -> usize {
        let pos = z1.clamp(0.0, 1.0) * self.intervals();
        (libm::round(pos) as usize).min(self.n_points - 1)
    }

    /// Bracketing cell `(i, t)` with `z1 = (1 - t) * node(i) + t * node(i + 1)`.
    /// Knots snap to `t = 0` so that lookups there return stored values exactly.
    fn locate(&self, z1: f64) -> (usize, f64) {
        let pos = z1 * self.intervals();
        let knot = libm::round(pos);
        if (pos - knot).abs() <= 1e-12 * self.intervals().max(1.0) {
            return (knot as usize, 0.0);
        }
        let i = (libm::floor(pos) as usize).min(self.n_points - 2);
        (i, pos - i as f64)
    }
}

/// Reward-to-go `V(z, x)` at every grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable {
    grid: Grid,
    minus: Vec<f64>,
    plus: Vec<f64>,
}

impl ValueTable {
    pub fn new(grid: Grid, minus: Vec<f64>, plus: Vec<f64>) -> Result<Self, Error> {
        for found in [minus.len(), plus.len()] {
            if found != grid.n_points() {
                return Err(Error::GridMismatch {
                    expected: grid.n_points(),
                    found,
                });
            }
        }
        Ok(ValueTable { grid, minus, plus })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0, 0.0)
    }

    pub fn constant(grid: Grid, minus: f64, plus: f64) -> Self {
        ValueTable {
            grid,
            minus: vec![minus; grid.n_points()],
            plus: vec![plus; grid.n_points()],
        }
    }

    /// Tabulates `f(z1, x)` at the nodes.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, AgentType) -> f64) -> Self {
        let minus = grid.nodes().map(|z| f(z, AgentType::Minus)).collect();
        let plus = grid.nodes().map(|z| f(z, AgentType::Plus)).collect();
        ValueTable { grid, minus, plus }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn get(&self, i: usize, x: AgentType) -> f64 {
        match x {
            AgentType::Minus => self.minus[i],
            AgentType::Plus => self.plus[i],
        }
    }

    pub fn column(&self, x: AgentType) -> &[f64] {
        match x {
            AgentType::Minus => &self.minus,
            AgentType::Plus => &self.plus,
        }
    }

    /// Piecewise-linear interpolation in `z1`.
    pub fn interpolate(&self, z1: f64, x: AgentType) -> Result<f64, Error> {
        if !(0.0..=1.0).contains(&z1) {
            return Err(Error::OutOfRange {
                what: "interpolation point z1",
                value: z1,
            });
        }
        Ok(self.interpolate_unchecked(z1, x))
    }

    #[inline]
    pub(crate) fn interpolate_unchecked(&self, z1: f64, x: AgentType) -> f64 {
        let col = self.column(x);
        let (i, t) = self.grid.locate(z1);
        if t == 0.0 {
            col[i]
        } else {
            col[i] + t * (col[i + 1] - col[i])
        }
    }

    /// `max |self - other|` over nodes and types.
    pub fn sup_distance(&self, other: &ValueTable) -> f64 {
        self.minus
            .iter()
            .zip(&other.minus)
            .chain(self.plus.iter().zip(&other.plus))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.minus
            .iter()
            .chain(&self.plus)
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }
}

/// Free-function form of [`ValueTable::interpolate`].
pub fn interpolate_value(values: &ValueTable, z1: f64, x: AgentType) -> Result<f64, Error> {
    values.interpolate(z1, x)
}

/// Equilibrium prescription found at one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeEquilibrium {
    pub prescription: Prescription,
    /// More than one pure prescription was consistent at this node.
    pub multiplicity: bool,
    /// The returned prescription randomises for at least one type.
    pub mixing: bool,
}

/// `theta[z]` at every grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumTable {
    grid: Grid,
    nodes: Vec<NodeEquilibrium>,
}

impl EquilibriumTable {
    pub fn new(grid: Grid, nodes: Vec<NodeEquilibrium>) -> Result<Self, Error> {
        if nodes.len() != grid.n_points() {
            return Err(Error::GridMismatch {
                expected: grid.n_points(),
                found: nodes.len(),
            });
        }
        Ok(EquilibriumTable { grid, nodes })
    }

    /// The same prescription at every node.
    pub fn uniform(grid: Grid, prescription: Prescription) -> Self {
        let node = NodeEquilibrium {
            prescription,
            multiplicity: false,
            mixing: !prescription.is_pure(),
        };
        EquilibriumTable {
            grid,
            nodes: vec![node; grid.n_points()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn nodes(&self) -> &[NodeEquilibrium] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NodeEquilibrium {
        &self.nodes[i]
    }

    pub fn prescription(&self, i: usize) -> Prescription {
        self.nodes[i].prescription
    }

    /// Prescription at the node nearest to `z1`. Prescriptions can jump in
    /// `z1`, so they are never interpolated.
    pub fn lookup(&self, z1: f64) -> Prescription {
        self.nodes[self.grid.nearest(z1)].prescription
    }

    pub fn set(&mut self, i: usize, node: NodeEquilibrium) {
        self.nodes[i] = node;
    }

    pub fn count_multiplicity(&self) -> usize {
        self.nodes.iter().filter(|n| n.multiplicity).count()
    }

    pub fn count_mixing(&self) -> usize {
        self.nodes.iter().filter(|n| n.mixing).count()
    }
}
