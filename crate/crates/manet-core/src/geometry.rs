//! Torus coordinate arithmetic: canonical points, wrap-around distances,
//! annulus membership and square-cell indexing.
//!
//! The network lives on a `side × side` square with wrap-around conditions.
//! All distances are the torus metric, i.e. the minimum over the nine
//! shifted copies of the Euclidean distance; for canonical coordinates this
//! reduces to per-axis `min(|dx|, side - |dx|)`.

use core::fmt;

#[allow(unused_imports)] // provides f64 math in no_std builds
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

/// Errors from geometric constructors and predicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryError {
    /// Torus side must be finite and strictly positive.
    InvalidSide(f64),
    /// Coordinates must be finite.
    NonFinite,
    /// Cell side must lie in `(0, side]`.
    InvalidCellSide { cell_side: f64, side: f64 },
    /// Annulus requires `0 <= r_in < r_out`.
    InvalidAnnulus { r_in: f64, r_out: f64 },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::InvalidSide(s) => write!(f, "torus side must be positive, got {s}"),
            GeometryError::NonFinite => write!(f, "coordinates must be finite"),
            GeometryError::InvalidCellSide { cell_side, side } => {
                write!(f, "cell side {cell_side} out of range (0, {side}]")
            }
            GeometryError::InvalidAnnulus { r_in, r_out } => {
                write!(f, "annulus radii must satisfy 0 <= r_in < r_out, got ({r_in}, {r_out})")
            }
        }
    }
}

/// The `side × side` torus. `side = sqrt(area)`, node density is 1 when the
/// area equals the node count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGeometry {
    side: f64,
}

impl TorusGeometry {
    pub fn new(side: f64) -> Result<Self, GeometryError> {
        if !side.is_finite() || side <= 0.0 {
            return Err(GeometryError::InvalidSide(side));
        }
        Ok(TorusGeometry { side })
    }

    /// Torus of the given area (`side = sqrt(area)`).
    pub fn from_area(area: f64) -> Result<Self, GeometryError> {
        if !area.is_finite() || area <= 0.0 {
            return Err(GeometryError::InvalidSide(area));
        }
        TorusGeometry::new(area.sqrt())
    }

    #[inline]
    pub fn side(&self) -> f64 {
        self.side
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    /// Largest possible torus distance: half the diagonal, `side·√2/2`.
    #[inline]
    pub fn max_distance(&self) -> f64 {
        self.side * core::f64::consts::FRAC_1_SQRT_2
    }

    /// Reduce raw coordinates into the canonical domain `[0, side)²`.
    pub fn wrap(&self, x: f64, y: f64) -> Result<TorusPoint, GeometryError> {
        if !x.is_finite() || !y.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Ok(TorusPoint {
            x: wrap_coord(x, self.side),
            y: wrap_coord(y, self.side),
        })
    }

    /// True iff `p` is canonical for this torus.
    #[inline]
    pub fn contains(&self, p: TorusPoint) -> bool {
        p.x >= 0.0 && p.x < self.side && p.y >= 0.0 && p.y < self.side
    }
}

#[inline]
fn wrap_coord(v: f64, side: f64) -> f64 {
    let r = v - side * (v / side).floor();
    // Rounding on a tiny negative v can land exactly on `side`.
    if r >= side {
        r - side
    } else {
        r
    }
}

/// A canonical point on the torus: both coordinates in `[0, side)`.
///
/// Constructed through [`TorusGeometry::wrap`] so the invariant holds by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    x: f64,
    y: f64,
}

impl TorusPoint {
    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }

    /// Construct without canonicalizing. Callers must guarantee the
    /// coordinates already lie in `[0, side)` of the geometry they will be
    /// used with.
    #[inline]
    pub(crate) fn new_unchecked(x: f64, y: f64) -> Self {
        TorusPoint { x, y }
    }
}

/// Torus distance between two canonical points: the minimum over the nine
/// `(u, v) ∈ {-side, 0, side}²` shifted Euclidean distances.
///
/// Panics if either point is not canonical for `g`; points are meant to be
/// produced by [`TorusGeometry::wrap`].
#[inline]
pub fn torus_distance(p: TorusPoint, q: TorusPoint, g: &TorusGeometry) -> f64 {
    assert!(
        g.contains(p) && g.contains(q),
        "torus_distance requires canonical points"
    );
    let side = g.side;
    let mut dx = (p.x - q.x).abs();
    if dx > side - dx {
        dx = side - dx;
    }
    let mut dy = (p.y - q.y).abs();
    if dy > side - dy {
        dy = side - dy;
    }
    (dx * dx + dy * dy).sqrt()
}

/// True iff `p` lies strictly inside the open annulus
/// `r_in < d(center, p) < r_out` (torus metric).
pub fn in_annulus(
    center: TorusPoint,
    r_in: f64,
    r_out: f64,
    p: TorusPoint,
    g: &TorusGeometry,
) -> Result<bool, GeometryError> {
    if !(r_in >= 0.0 && r_in < r_out) {
        return Err(GeometryError::InvalidAnnulus { r_in, r_out });
    }
    let d = torus_distance(center, p, g);
    Ok(d > r_in && d < r_out)
}

/// A regular square tessellation of the torus.
///
/// A requested cell side rarely divides `side` exactly, so the grid uses
/// `k = max(1, round(side / cell_side))` cells per axis with effective cell
/// side `side / k`. This keeps the tessellation exact on the torus while
/// preserving the requested cell area up to a bounded factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGrid {
    side: f64,
    cells_per_axis: u32,
    cell_side: f64,
}

impl CellGrid {
    /// Fit a grid to a requested cell side in `(0, side]`.
    pub fn fit(g: &TorusGeometry, cell_side: f64) -> Result<Self, GeometryError> {
        if !(cell_side > 0.0 && cell_side <= g.side && cell_side.is_finite()) {
            return Err(GeometryError::InvalidCellSide {
                cell_side,
                side: g.side,
            });
        }
        let k = (g.side / cell_side).round().max(1.0) as u32;
        Ok(CellGrid::with_cells_per_axis(g, k))
    }

    /// Grid with exactly `k >= 1` cells per axis.
    pub fn with_cells_per_axis(g: &TorusGeometry, k: u32) -> Self {
        let k = k.max(1);
        CellGrid {
            side: g.side,
            cells_per_axis: k,
            cell_side: g.side / k as f64,
        }
    }

    #[inline]
    pub fn cells_per_axis(&self) -> u32 {
        self.cells_per_axis
    }

    #[inline]
    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.cell_side * self.cell_side
    }

    #[inline]
    pub fn cell_count(&self) -> u64 {
        self.cells_per_axis as u64 * self.cells_per_axis as u64
    }

    /// Cell coordinates of a canonical point.
    #[inline]
    pub fn index(&self, p: TorusPoint) -> (u32, u32) {
        let k = self.cells_per_axis;
        // Floating-point division may land exactly on k for x = side - eps.
        let cx = ((p.x / self.cell_side) as u32).min(k - 1);
        let cy = ((p.y / self.cell_side) as u32).min(k - 1);
        (cx, cy)
    }

    /// Row-major flat index of a cell.
    #[inline]
    pub fn flat_index(&self, cell: (u32, u32)) -> u32 {
        cell.1 * self.cells_per_axis + cell.0
    }
}

/// Cell coordinates of `p` under the fitted tessellation of requested
/// `cell_side`; see [`CellGrid::fit`] for the adjustment rule.
pub fn cell_index(
    p: TorusPoint,
    cell_side: f64,
    g: &TorusGeometry,
) -> Result<(u32, u32), GeometryError> {
    Ok(CellGrid::fit(g, cell_side)?.index(p))
}
