//! Uniform one-dimensional spatial mesh from the left edge to the wall.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 16 points, got {0}")]
    TooFewPoints(usize),
    #[error("wall position {x_wall} must exceed left edge {x_min}")]
    EmptyExtent { x_min: f64, x_wall: f64 },
    #[error("extent {extent} is not an integer multiple of spacing {dx}")]
    IncommensurateSpacing { extent: f64, dx: f64 },
}

/// Uniform grid on [x_min, x_wall]. The right endpoint is the hard wall of
/// the scattering problem; both endpoints carry Dirichlet conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    /// Left edge, Å.
    pub x_min: f64,
    /// Wall position (right edge), Å.
    pub x_wall: f64,
    /// Point count including both ends.
    pub n: usize,
    /// Spacing (x_wall − x_min)/(n − 1), Å.
    pub dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_wall: f64, n: usize) -> Result<Self, GridError> {
        if x_wall <= x_min {
            return Err(GridError::EmptyExtent { x_min, x_wall });
        }
        if n < 16 {
            return Err(GridError::TooFewPoints(n));
        }
        Ok(Grid {
            x_min,
            x_wall,
            n,
            dx: (x_wall - x_min) / (n - 1) as f64,
        })
    }

    /// Build from a requested spacing; the extent must divide cleanly
    /// (relative slack 1e-9).
    pub fn from_spacing(x_min: f64, x_wall: f64, dx: f64) -> Result<Self, GridError> {
        if x_wall <= x_min {
            return Err(GridError::EmptyExtent { x_min, x_wall });
        }
        let extent = x_wall - x_min;
        let steps = extent / dx;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(GridError::IncommensurateSpacing { extent, dx });
        }
        Self::new(x_min, x_wall, steps.round() as usize + 1)
    }

    /// Coordinate of node `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    /// All node coordinates.
    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Index of the node nearest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.dx).round();
        (i.max(0.0) as usize).min(self.n - 1)
    }
}
