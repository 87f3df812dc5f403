//! Regular lattice of UAV waypoints over the flight area.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub ix: usize,
    pub iy: usize,
}

impl Cell {
    pub const fn new(ix: usize, iy: usize) -> Self {
        Self { ix, iy }
    }
}

/// `nx × ny` lattice points spaced `cell_m` apart, starting at `origin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub origin: Point2,
    pub cell_m: f64,
    pub nx: usize,
    pub ny: usize,
}

const SNAP_TOL: f64 = 1e-6;

impl Lattice {
    pub fn new(origin: Point2, cell_m: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(cell_m > 0.0) || nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter(format!(
                "lattice needs a positive spacing and at least one point per axis (got {cell_m} m, {nx}×{ny})"
            )));
        }
        Ok(Self { origin, cell_m, nx, ny })
    }

    /// Lattice covering `area` corner to corner; both sides must be whole
    /// multiples of `cell_m`. A 1200 m square at 100 m gives 13 × 13 points.
    pub fn covering(area: &Rect, cell_m: f64) -> Result<Self> {
        let steps = |len: f64| -> Result<usize> {
            let r = len / cell_m;
            if !(r >= 0.0) || (r - r.round()).abs() > SNAP_TOL {
                return Err(Error::InvalidParameter(format!(
                    "flight-area side {len} m is not a multiple of the cell size {cell_m} m"
                )));
            }
            Ok(r.round() as usize + 1)
        };
        Self::new(area.min, cell_m, steps(area.width())?, steps(area.height())?)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, c: Cell) -> usize {
        c.iy * self.nx + c.ix
    }

    pub fn cell(&self, index: usize) -> Cell {
        Cell::new(index % self.nx, index / self.nx)
    }

    pub fn position(&self, c: Cell) -> Point2 {
        Point2::new(
            self.origin.x + c.ix as f64 * self.cell_m,
            self.origin.y + c.iy as f64 * self.cell_m,
        )
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).map(|i| self.cell(i))
    }

    /// The lattice point at `p`, if `p` sits on one.
    pub fn cell_at(&self, p: Point2) -> Option<Cell> {
        let fx = (p.x - self.origin.x) / self.cell_m;
        let fy = (p.y - self.origin.y) / self.cell_m;
        let (rx, ry) = (fx.round(), fy.round());
        if (fx - rx).abs() > SNAP_TOL || (fy - ry).abs() > SNAP_TOL {
            return None;
        }
        if rx < 0.0 || ry < 0.0 || rx as usize >= self.nx || ry as usize >= self.ny {
            return None;
        }
        Some(Cell::new(rx as usize, ry as usize))
    }

    /// Neighbour of `c` displaced by `(dx, dy)` cells, if it is on the lattice.
    pub fn offset(&self, c: Cell, dx: i32, dy: i32) -> Option<Cell> {
        let x = c.ix as i64 + dx as i64;
        let y = c.iy as i64 + dy as i64;
        if x < 0 || y < 0 || x as usize >= self.nx || y as usize >= self.ny {
            return None;
        }
        Some(Cell::new(x as usize, y as usize))
    }
}
