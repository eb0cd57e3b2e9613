//! Uniform grids on half-lines and the full line, and scalar fields sampled on them.

use crate::error::{Error, Result};

/// Which truncated domain the grid discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `[0, extent]`, one physical boundary at `x = 0`.
    RightHalfLine,
    /// `[-extent, 0]`, one physical boundary at `x = 0`.
    LeftHalfLine,
    /// `[-extent, extent]`, both ends are truncation boundaries.
    FullLine,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::RightHalfLine => "right",
            Side::LeftHalfLine => "left",
            Side::FullLine => "full",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        match s {
            "right" => Some(Side::RightHalfLine),
            "left" => Some(Side::LeftHalfLine),
            "full" => Some(Side::FullLine),
            _ => None,
        }
    }
}

/// Minimum number of nodes accepted for any grid.
pub const MIN_POINTS: usize = 16;

/// A uniform one-dimensional grid.
///
/// Node `k` sits at exactly `x_min + k * h`; coordinates are always recomputed
/// from the index so no rounding accumulates along the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub side: Side,
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub h: f64,
}

impl Grid {
    /// Builds the grid for `side` truncated at `extent` (> 0) with `n_points` nodes.
    ///
    /// For `FullLine` the domain is `[-extent, extent]`; for the half-lines it is
    /// `[0, extent]` or `[-extent, 0]`.
    pub fn make(side: Side, extent: f64, n_points: usize) -> Result<Grid> {
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::BadExtent(extent));
        }
        if n_points < MIN_POINTS {
            return Err(Error::GridTooSmall {
                min: MIN_POINTS,
                got: n_points,
            });
        }
        let (x_min, x_max) = match side {
            Side::RightHalfLine => (0.0, extent),
            Side::LeftHalfLine => (-extent, 0.0),
            Side::FullLine => (-extent, extent),
        };
        let h = (x_max - x_min) / (n_points - 1) as f64;
        Ok(Grid {
            side,
            x_min,
            x_max,
            n_points,
            h,
        })
    }

    /// Coordinate of node `k`.
    #[inline]
    pub fn x(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.h
    }

    /// All node coordinates in index order.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.x(k)).collect()
    }

    /// Index of the node closest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let k = ((x - self.x_min) / self.h).round();
        (k.max(0.0) as usize).min(self.n_points - 1)
    }

    /// Grid for the mirror domain `x -> -x` (right half-line <-> left half-line).
    pub fn reflected(&self) -> Grid {
        let side = match self.side {
            Side::RightHalfLine => Side::LeftHalfLine,
            Side::LeftHalfLine => Side::RightHalfLine,
            Side::FullLine => Side::FullLine,
        };
        Grid {
            side,
            x_min: -self.x_max,
            x_max: -self.x_min,
            n_points: self.n_points,
            h: self.h,
        }
    }
}

/// A scalar field: one value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Field {
    /// Wraps raw values; panics if the length does not match the grid.
    pub fn new(grid: Grid, values: Vec<f64>) -> Field {
        assert_eq!(
            values.len(),
            grid.n_points,
            "field length {} does not match grid with {} nodes",
            values.len(),
            grid.n_points
        );
        Field { grid, values }
    }

    /// The zero field on `grid`.
    pub fn zeros(grid: Grid) -> Field {
        Field {
            grid,
            values: vec![0.0; grid.n_points],
        }
    }

    /// Samples `f` at every node.
    pub fn sample(grid: Grid, f: impl Fn(f64) -> f64) -> Field {
        let values = (0..grid.n_points).map(|k| f(grid.x(k))).collect();
        Field { grid, values }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Index of the largest entry (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = k;
            }
        }
        best
    }

    /// Checks that `other` lives on the same grid.
    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Pointwise binary combination with a field on the same grid.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Ok(Field {
            grid: self.grid,
            values,
        })
    }

    /// The mirrored field `x -> -x` on the reflected grid.
    pub fn reflected(&self) -> Field {
        let mut values = self.values.clone();
        values.reverse();
        Field {
            grid: self.grid.reflected(),
            values,
        }
    }

    /// Restriction to the node-aligned window `[x_lo, x_hi]`.
    ///
    /// Both endpoints are snapped to the nearest node; the result keeps the
    /// spacing of the parent grid and is marked `FullLine` unless it starts or
    /// ends exactly at `x = 0`, in which case the half-line tag is kept.
    pub fn restrict(&self, x_lo: f64, x_hi: f64) -> Result<Field> {
        let k_lo = self.grid.nearest_node(x_lo);
        let k_hi = self.grid.nearest_node(x_hi);
        if k_hi < k_lo + MIN_POINTS - 1 {
            return Err(Error::GridTooSmall {
                min: MIN_POINTS,
                got: k_hi.saturating_sub(k_lo) + 1,
            });
        }
        let x_min = self.grid.x(k_lo);
        let x_max = self.grid.x(k_hi);
        let side = if x_min == 0.0 {
            Side::RightHalfLine
        } else if x_max == 0.0 {
            Side::LeftHalfLine
        } else {
            Side::FullLine
        };
        let grid = Grid {
            side,
            x_min,
            x_max,
            n_points: k_hi - k_lo + 1,
            h: self.grid.h,
        };
        Ok(Field {
            grid,
            values: self.values[k_lo..=k_hi].to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_grid_three_sides() {
        let g = Grid::make(Side::FullLine, 40.0, 8001).unwrap();
        assert_eq!(g.x_min, -40.0);
        assert_eq!(g.x_max, 40.0);
        assert!((g.h - 0.01).abs() < 1e-15, "h = {}", g.h);

        let g = Grid::make(Side::RightHalfLine, 60.0, 6001).unwrap();
        assert_eq!(g.x_min, 0.0);
        assert!((g.h - 0.01).abs() < 1e-15);

        let g = Grid::make(Side::LeftHalfLine, 30.0, 3001).unwrap();
        assert_eq!((g.x_min, g.x_max), (-30.0, 0.0));
    }

    #[test]
    fn node_coordinates_have_no_accumulated_rounding() {
        let g = Grid::make(Side::RightHalfLine, 40.0, 4001).unwrap();
        // x(k) must be the rounding of x_min + k*h itself, not a running sum.
        for k in [0, 1, 7, 400, 4000] {
            let exact = g.x_min + k as f64 * g.h;
            assert_eq!(g.x(k), exact);
        }
        assert_eq!(g.x(g.n_points - 1), g.x_max);
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(Grid::make(Side::FullLine, 0.0, 100).is_err());
        assert!(Grid::make(Side::FullLine, -3.0, 100).is_err());
        assert!(Grid::make(Side::FullLine, f64::NAN, 100).is_err());
        assert!(Grid::make(Side::FullLine, 10.0, 15).is_err());
        assert!(Grid::make(Side::FullLine, 10.0, 16).is_ok());
    }

    #[test]
    fn reflection_is_an_involution() {
        let g = Grid::make(Side::RightHalfLine, 20.0, 2001).unwrap();
        let f = Field::sample(g, |x| x * (-x).exp());
        let back = f.reflected().reflected();
        assert_eq!(back.grid, g);
        assert_eq!(back.values, f.values);
        assert_eq!(f.reflected().grid.side, Side::LeftHalfLine);
    }

    #[test]
    fn restrict_keeps_alignment() {
        let g = Grid::make(Side::FullLine, 10.0, 2001).unwrap();
        let f = Field::sample(g, |x| x.sin());
        let sub = f.restrict(0.0, 5.0).unwrap();
        assert_eq!(sub.grid.side, Side::RightHalfLine);
        assert_eq!(sub.grid.x_min, 0.0);
        assert_eq!(sub.grid.h, g.h);
        assert_eq!(sub.values[0], f.values[1000]);
    }

    #[test]
    fn argmax_finds_peak() {
        let g = Grid::make(Side::RightHalfLine, 40.0, 4001).unwrap();
        let f = Field::sample(g, |x| -(x - 15.0) * (x - 15.0));
        assert_eq!(g.x(f.argmax()), 15.0);
    }
}
