//! Symmetric finite-difference discretisations.
//!
//! Every operator is assembled from a quadratic form `K` and a diagonal mass
//! `W` (quadrature weights of the grid nodes) and stored as the symmetric
//! matrix `W^{-1/2} K W^{-1/2}`. An eigenvector `v` of the stored matrix
//! corresponds to the grid function `u = W^{-1/2} v` with `Σ w_i u_i² = |v|²`.

mod full;
mod line;
mod potential;
mod window;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SymmetricMatrix;

pub use full::{assemble_full_2d, FullMesh};
pub use line::{assemble_model_1d, assemble_oscillator_1d, half_line_truncation};
pub use potential::{rescale_potential, PotentialShape, RescaledPotential, TestPotential};
pub use window::{
    assemble_window_2d, window_extents, WindowExtents, WindowParams, WindowResolution,
};

/// Condition imposed on one edge of a rectangular grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeCondition {
    Dirichlet,
    Neumann,
}

/// Edge tags of a window `(−S, S) × (0, T)` in tubular coordinates.
/// One-dimensional operators use the pair of tags along their own axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub s_minus: EdgeCondition,
    pub s_plus: EdgeCondition,
    pub t_zero: EdgeCondition,
    pub t_far: EdgeCondition,
}

impl BoundaryCondition {
    pub fn dirichlet() -> Self {
        BoundaryCondition {
            s_minus: EdgeCondition::Dirichlet,
            s_plus: EdgeCondition::Dirichlet,
            t_zero: EdgeCondition::Dirichlet,
            t_far: EdgeCondition::Dirichlet,
        }
    }

    /// Dirichlet on the physical boundary `t = 0`, Neumann on the three artificial edges.
    pub fn mixed() -> Self {
        BoundaryCondition {
            s_minus: EdgeCondition::Neumann,
            s_plus: EdgeCondition::Neumann,
            t_zero: EdgeCondition::Dirichlet,
            t_far: EdgeCondition::Neumann,
        }
    }

    pub fn neumann() -> Self {
        BoundaryCondition {
            s_minus: EdgeCondition::Neumann,
            s_plus: EdgeCondition::Neumann,
            t_zero: EdgeCondition::Neumann,
            t_far: EdgeCondition::Neumann,
        }
    }

    pub fn label(&self) -> &'static str {
        if *self == Self::dirichlet() {
            "dirichlet"
        } else if *self == Self::mixed() {
            "mixed"
        } else if *self == Self::neumann() {
            "neumann"
        } else {
            "custom"
        }
    }
}

/// Threshold regime: `Λ = x₀ + μh^{2/3}` or `Λ = x₀ + z₁h^{2/3} + μh^α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    First,
    Second { alpha: f64 },
}

impl Regime {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Regime::First => Ok(()),
            Regime::Second { alpha } if alpha > 2.0 / 3.0 && alpha < 1.0 => Ok(()),
            Regime::Second { alpha } => {
                Err(Error::param(format!("α must lie in (2/3, 1), got {alpha}")))
            }
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            Regime::First => None,
            Regime::Second { alpha } => Some(alpha),
        }
    }
}

/// Coordinates of the unknowns.
#[derive(Clone, Debug, PartialEq)]
pub enum Chart {
    /// One-dimensional grid; `coords[i]` is the node position.
    Line { coords: Vec<f64> },
    /// Tubular window; `coords[i] = (s, t)` in physical length units.
    Window {
        coords: Vec<[f64; 2]>,
        ns: usize,
        nt: usize,
    },
    /// Cartesian grid; `coords[i] = (x, y)`.
    Cartesian {
        coords: Vec<[f64; 2]>,
        dx: f64,
        dy: f64,
    },
}

impl Chart {
    pub fn kind(&self) -> &'static str {
        match self {
            Chart::Line { .. } => "line",
            Chart::Window { .. } => "window",
            Chart::Cartesian { .. } => "cartesian",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Chart::Line { coords } => coords.len(),
            Chart::Window { coords, .. } | Chart::Cartesian { coords, .. } => coords.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node position as a pair (second entry 0 on a line).
    pub fn point(&self, i: usize) -> [f64; 2] {
        match self {
            Chart::Line { coords } => [coords[i], 0.0],
            Chart::Window { coords, .. } | Chart::Cartesian { coords, .. } => coords[i],
        }
    }
}

/// Assembled operator together with its grid.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    matrix: SymmetricMatrix,
    weights: Vec<f64>,
    chart: Chart,
    bc: BoundaryCondition,
    semiclassical_h: Option<f64>,
    description: String,
}

impl DiscreteOperator {
    pub(crate) fn new(
        matrix: SymmetricMatrix,
        weights: Vec<f64>,
        chart: Chart,
        bc: BoundaryCondition,
        semiclassical_h: Option<f64>,
        description: String,
    ) -> Result<Self> {
        debug_assert_eq!(matrix.n(), weights.len());
        debug_assert_eq!(matrix.n(), chart.len());
        if !matrix.is_symmetric() {
            return Err(Error::Integrity("assembled matrix is not symmetric".into()));
        }
        if !matrix.gershgorin_lower().is_finite() {
            return Err(Error::Integrity(
                "assembled matrix has non-finite entries".into(),
            ));
        }
        Ok(DiscreteOperator {
            matrix,
            weights,
            chart,
            bc,
            semiclassical_h,
            description,
        })
    }

    /// Wraps an explicit matrix with unit weights on a line chart.
    pub fn from_matrix(matrix: SymmetricMatrix, description: impl Into<String>) -> Result<Self> {
        let n = matrix.n();
        Self::new(
            matrix,
            vec![1.0; n],
            Chart::Line {
                coords: (0..n).map(|i| i as f64).collect(),
            },
            BoundaryCondition::dirichlet(),
            None,
            description.into(),
        )
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.n()
    }

    /// Quadrature weight of each node.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn semiclassical_h(&self) -> Option<f64> {
        self.semiclassical_h
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Gershgorin lower bound of the spectrum.
    pub fn lower_bound(&self) -> f64 {
        self.matrix.gershgorin_lower()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_validation() {
        assert!(Regime::First.validate().is_ok());
        assert!(Regime::Second { alpha: 0.8 }.validate().is_ok());
        assert!(Regime::Second { alpha: 0.5 }.validate().is_err());
        assert!(Regime::Second { alpha: 1.0 }.validate().is_err());
    }

    #[test]
    fn bc_labels() {
        assert_eq!(BoundaryCondition::mixed().label(), "mixed");
        assert_eq!(BoundaryCondition::dirichlet().label(), "dirichlet");
    }
}
