//! Finite lattices with a fixed linear site order.
//!
//! The site order doubles as the Jordan-Wigner rank order: every fermionic
//! sign in the crate is computed from [`Lattice::rank`]. Periodic lattices
//! reuse the same linear order; the boundary identification only changes
//! which labels are folded onto which site.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Largest lattice representable by a `u64` occupation bitstring.
pub const MAX_SITES: usize = 64;

/// A site label. One-dimensional lattices use `Line`, two-dimensional ones `Grid`.
///
/// The derived order on `Grid` is lexicographic in `(x, y)`, which is exactly
/// the row-major rank order used by [`Lattice`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    Line(i64),
    Grid(i64, i64),
}

impl Site {
    pub fn offset(self, dx: i64, dy: i64) -> Site {
        match self {
            Site::Line(x) => Site::Line(x + dx),
            Site::Grid(x, y) => Site::Grid(x + dx, y + dy),
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Line(x) => write!(f, "{x}"),
            Site::Grid(x, y) => write!(f, "({x},{y})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Geometry {
    /// Sites `lo..=hi`.
    Chain { lo: i64, hi: i64 },
    /// Sites `x0..=x1` by `y0..=y1`.
    Grid { x0: i64, x1: i64, y0: i64, y1: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    geometry: Geometry,
    boundary: Boundary,
}

impl Lattice {
    /// Open interval `[lo, hi]`.
    pub fn chain(lo: i64, hi: i64) -> Result<Self> {
        Self::line(lo, hi, Boundary::Open)
    }

    /// Periodic ring on `[-m-1, m]` with `m+1` identified with `-m-1`.
    ///
    /// `m >= 2` keeps at least three even-centred triples on the ring, so that
    /// neighbouring triples overlap in exactly one site.
    pub fn ring(m: i64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidLattice(format!("ring needs m >= 2, got {m}")));
        }
        Self::line(-m - 1, m, Boundary::Periodic)
    }

    pub fn line(lo: i64, hi: i64, boundary: Boundary) -> Result<Self> {
        if hi < lo {
            return Err(Error::InvalidLattice(format!("empty interval [{lo}, {hi}]")));
        }
        let n = (hi - lo + 1) as usize;
        if n > MAX_SITES {
            return Err(Error::TooLarge { sites: n, limit: MAX_SITES });
        }
        if boundary == Boundary::Periodic && n % 2 != 0 {
            return Err(Error::InvalidLattice(format!("periodic chain needs an even site count, got {n}")));
        }
        Ok(Lattice { geometry: Geometry::Chain { lo, hi }, boundary })
    }

    /// Periodic `lx` by `ly` torus with sites `(0..lx, 0..ly)`.
    pub fn torus(lx: i64, ly: i64) -> Result<Self> {
        if lx < 4 || ly < 4 || lx % 2 != 0 || ly % 2 != 0 {
            return Err(Error::InvalidLattice(format!(
                "torus sides must be even and at least 4, got {lx}x{ly}"
            )));
        }
        Self::grid(0, lx - 1, 0, ly - 1, Boundary::Periodic)
    }

    /// Open rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: i64, x1: i64, y0: i64, y1: i64) -> Result<Self> {
        Self::grid(x0, x1, y0, y1, Boundary::Open)
    }

    fn grid(x0: i64, x1: i64, y0: i64, y1: i64, boundary: Boundary) -> Result<Self> {
        if x1 < x0 || y1 < y0 {
            return Err(Error::InvalidLattice(format!("empty rectangle [{x0},{x1}]x[{y0},{y1}]")));
        }
        let n = ((x1 - x0 + 1) * (y1 - y0 + 1)) as usize;
        if n > MAX_SITES {
            return Err(Error::TooLarge { sites: n, limit: MAX_SITES });
        }
        Ok(Lattice { geometry: Geometry::Grid { x0, x1, y0, y1 }, boundary })
    }

    pub fn dimension(&self) -> usize {
        match self.geometry {
            Geometry::Chain { .. } => 1,
            Geometry::Grid { .. } => 2,
        }
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    pub fn len(&self) -> usize {
        match self.geometry {
            Geometry::Chain { lo, hi } => (hi - lo + 1) as usize,
            Geometry::Grid { x0, x1, y0, y1 } => ((x1 - x0 + 1) * (y1 - y0 + 1)) as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(lo, hi)` of a one-dimensional lattice.
    pub fn interval(&self) -> Option<(i64, i64)> {
        match self.geometry {
            Geometry::Chain { lo, hi } => Some((lo, hi)),
            Geometry::Grid { .. } => None,
        }
    }

    /// `((x0, x1), (y0, y1))` of a two-dimensional lattice.
    pub fn rectangle_bounds(&self) -> Option<((i64, i64), (i64, i64))> {
        match self.geometry {
            Geometry::Grid { x0, x1, y0, y1 } => Some(((x0, x1), (y0, y1))),
            Geometry::Chain { .. } => None,
        }
    }

    /// `m` for rings built by [`Lattice::ring`].
    pub fn ring_m(&self) -> Option<i64> {
        match (self.geometry, self.boundary) {
            (Geometry::Chain { lo, hi }, Boundary::Periodic) if lo == -hi - 1 => Some(hi),
            _ => None,
        }
    }

    /// Folds a label onto the lattice; `None` if the site is not part of it.
    pub fn canonical(&self, site: Site) -> Option<Site> {
        match (self.geometry, site) {
            (Geometry::Chain { lo, hi }, Site::Line(x)) => {
                fold(x, lo, hi, self.boundary).map(Site::Line)
            }
            (Geometry::Grid { x0, x1, y0, y1 }, Site::Grid(x, y)) => {
                let x = fold(x, x0, x1, self.boundary)?;
                let y = fold(y, y0, y1, self.boundary)?;
                Some(Site::Grid(x, y))
            }
            _ => None,
        }
    }

    pub fn contains(&self, site: Site) -> bool {
        self.canonical(site).is_some()
    }

    /// Position of `site` in the site order (after folding).
    pub fn rank(&self, site: Site) -> Result<usize> {
        let c = self.canonical(site).ok_or(Error::SiteOutsideLattice(site))?;
        Ok(match (self.geometry, c) {
            (Geometry::Chain { lo, .. }, Site::Line(x)) => (x - lo) as usize,
            (Geometry::Grid { x0, y0, y1, .. }, Site::Grid(x, y)) => {
                ((x - x0) * (y1 - y0 + 1) + (y - y0)) as usize
            }
            _ => unreachable!("canonical preserves the site kind"),
        })
    }

    /// Inverse of [`Lattice::rank`].
    pub fn site(&self, rank: usize) -> Site {
        let r = rank as i64;
        match self.geometry {
            Geometry::Chain { lo, .. } => Site::Line(lo + r),
            Geometry::Grid { x0, y0, y1, .. } => {
                let h = y1 - y0 + 1;
                Site::Grid(x0 + r / h, y0 + r % h)
            }
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.len()).map(move |r| self.site(r))
    }

    /// Even centres whose local supercharge fits in the lattice.
    ///
    /// One dimension: even `c` with `c-1` and `c+1` present. Two dimensions:
    /// even-even `(x, y)` with all four neighbours present. On periodic
    /// lattices every even (even-even) site qualifies.
    pub fn centers(&self) -> Vec<Site> {
        self.sites()
            .filter(|&s| match s {
                Site::Line(x) => {
                    x.rem_euclid(2) == 0
                        && self.contains(Site::Line(x - 1))
                        && self.contains(Site::Line(x + 1))
                }
                Site::Grid(x, y) => {
                    x.rem_euclid(2) == 0
                        && y.rem_euclid(2) == 0
                        && [(-1, 0), (1, 0), (0, -1), (0, 1)]
                            .iter()
                            .all(|&(dx, dy)| self.contains(s.offset(dx, dy)))
                }
            })
            .collect()
    }

    /// Human-readable description, e.g. `ring[-3,2]` or `torus 4x4`.
    pub fn describe(&self) -> String {
        match (self.geometry, self.boundary) {
            (Geometry::Chain { lo, hi }, Boundary::Open) => format!("chain[{lo},{hi}]"),
            (Geometry::Chain { lo, hi }, Boundary::Periodic) => format!("ring[{lo},{hi}]"),
            (Geometry::Grid { x0, x1, y0, y1 }, Boundary::Open) => {
                format!("rectangle[{x0},{x1}]x[{y0},{y1}]")
            }
            (Geometry::Grid { x0, x1, y0, y1 }, Boundary::Periodic) => {
                format!("torus {}x{}", x1 - x0 + 1, y1 - y0 + 1)
            }
        }
    }
}

fn fold(x: i64, lo: i64, hi: i64, boundary: Boundary) -> Option<i64> {
    match boundary {
        Boundary::Open => (lo..=hi).contains(&x).then_some(x),
        Boundary::Periodic => Some(lo + (x - lo).rem_euclid(hi - lo + 1)),
    }
}
