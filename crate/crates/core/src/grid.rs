//! Grid index sets, ghost folding and field storage.
//!
//! Indices are kept as *twice-indices* `I = 2i` so that staggered points
//! `i = 1/2, 3/2, ...` are exact integers. Array position `k` maps to
//! `I = 2k + 1` on the staggered grid and `I = 2k` on the centred grid.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

/// Smallest admissible outer index `M`.
pub const MIN_LAST_INDEX: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GridKind {
    /// `r_i = i h` for `i = 1/2, 3/2, ..., M`.
    Staggered,
    /// `r_i = i h` for `i = 0, 1, ..., M`.
    Centred,
}

impl GridKind {
    /// Twice-index of the first grid point.
    pub const fn offset(self) -> i64 {
        match self {
            GridKind::Staggered => 1,
            GridKind::Centred => 0,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            GridKind::Staggered => "staggered",
            GridKind::Centred => "centred",
        }
    }

    /// Refinement factor that keeps grid points aligned.
    pub const fn refinement(self) -> u32 {
        match self {
            GridKind::Staggered => 3,
            GridKind::Centred => 2,
        }
    }

    /// Array position of a twice-index, if it lies on this grid.
    pub fn position(self, twice: i64) -> Option<usize> {
        let d = twice - self.offset();
        if d < 0 || d % 2 != 0 {
            None
        } else {
            Some((d / 2) as usize)
        }
    }
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "staggered" => Ok(GridKind::Staggered),
            "centred" | "centered" => Ok(GridKind::Centred),
            _ => Err(Error::InvalidGrid("kind must be staggered or centred")),
        }
    }
}

/// Symmetry of a field under `r -> -r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Reflect a twice-index through the origin.
///
/// Returns the non-negative twice-index and the sign picked up by a field
/// of the given parity. An odd field at the origin itself gets sign 0.
pub fn fold_index(parity: Parity, twice: i64) -> (u64, i8) {
    let sign = match (parity, twice) {
        (Parity::Odd, 0) => 0,
        (Parity::Odd, t) if t < 0 => -1,
        _ => 1,
    };
    (twice.unsigned_abs(), sign)
}

/// `p = 2l + n` for harmonic index `l` on the `n`-sphere (`n + 1` space dimensions).
pub fn p_from_harmonic(l: i64, n: i64) -> Result<u32> {
    if l < 0 {
        return Err(Error::InvalidPower("l must be non-negative"));
    }
    if n < 1 {
        return Err(Error::InvalidPower("n must be at least 1"));
    }
    let p = 2 * l + n;
    u32::try_from(p).map_err(|_| Error::InvalidPower("p out of range"))
}

/// A radial grid `0 <= r <= R` with outer index `M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    kind: GridKind,
    half_steps: u32,
    radius: f64,
    p: u32,
}

impl GridSpec {
    /// Grid with outer twice-index `half_steps = 2M`.
    pub fn new(kind: GridKind, half_steps: u32, radius: f64, p: u32) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidGrid("R must be positive and finite"));
        }
        if p < 1 {
            return Err(Error::InvalidPower("p must be at least 1"));
        }
        if (half_steps as i64 - kind.offset()) % 2 != 0 {
            return Err(Error::InvalidGrid(match kind {
                GridKind::Staggered => "staggered grids need half-integer M",
                GridKind::Centred => "centred grids need integer M",
            }));
        }
        let last = half_steps as f64 / 2.0;
        if last < MIN_LAST_INDEX {
            return Err(Error::GridTooSmall { last_index: last });
        }
        Ok(GridSpec { kind, half_steps, radius, p })
    }

    pub fn centred(m: u32, radius: f64, p: u32) -> Result<Self> {
        Self::new(GridKind::Centred, 2 * m, radius, p)
    }

    /// Staggered grid with `M = half_steps / 2` (so `half_steps` is odd).
    pub fn staggered(half_steps: u32, radius: f64, p: u32) -> Result<Self> {
        Self::new(GridKind::Staggered, half_steps, radius, p)
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `2M`.
    pub fn half_steps(&self) -> u32 {
        self.half_steps
    }

    /// `M`.
    pub fn last_index(&self) -> f64 {
        self.half_steps as f64 / 2.0
    }

    /// `h = R / M`.
    pub fn spacing(&self) -> f64 {
        self.radius / self.last_index()
    }

    pub fn len(&self) -> usize {
        ((self.half_steps as i64 - self.kind.offset()) / 2 + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn twice_index(&self, k: usize) -> i64 {
        2 * k as i64 + self.kind.offset()
    }

    pub fn index(&self, k: usize) -> f64 {
        self.twice_index(k) as f64 / 2.0
    }

    pub fn r(&self, k: usize) -> f64 {
        self.radius * (self.twice_index(k) as f64 / self.half_steps as f64)
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.r(k)).collect()
    }

    /// Map an extended array position (possibly negative) to a physical one.
    ///
    /// Returns the position and the sign for a field of the given parity,
    /// or `None` beyond the outer boundary.
    pub fn fold(&self, ext: i64, parity: Parity) -> Option<(usize, f64)> {
        let (twice, sign) = fold_index(parity, 2 * ext + self.kind.offset());
        let k = self.kind.position(twice as i64)?;
        if k >= self.len() {
            return None;
        }
        Some((k, sign as f64))
    }

    /// The grid refined by `factor`, keeping every point of `self`.
    pub fn refine(&self, factor: u32) -> Result<Self> {
        if self.kind == GridKind::Staggered && factor % 2 == 0 {
            return Err(Error::MisalignedGrids);
        }
        Self::new(self.kind, self.half_steps * factor, self.radius, self.p)
    }

    /// Fine-grid position of coarse position `k` when refined by `factor`.
    pub fn aligned_position(&self, k: usize, factor: u32) -> usize {
        let twice = self.twice_index(k) * factor as i64;
        ((twice - self.kind.offset()) / 2) as usize
    }
}

/// The even field `pi` and odd field `psi` on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldPair {
    pub pi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl FieldPair {
    pub fn zeros(grid: &GridSpec) -> Self {
        FieldPair { pi: vec![0.0; grid.len()], psi: vec![0.0; grid.len()] }
    }

    /// Validated construction; on the centred grid `psi[0]` must vanish.
    pub fn new(grid: &GridSpec, pi: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        if pi.len() != grid.len() || psi.len() != grid.len() {
            return Err(Error::InvalidParameter("field length does not match grid"));
        }
        if grid.kind() == GridKind::Centred && psi[0] != 0.0 {
            return Err(Error::InvalidParameter("odd field must vanish at the origin"));
        }
        Ok(FieldPair { pi, psi })
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &FieldPair) {
        for (x, y) in self.pi.iter_mut().zip(&other.pi) {
            *x += a * y;
        }
        for (x, y) in self.psi.iter_mut().zip(&other.psi) {
            *x += a * y;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.pi.iter().chain(&self.psi).all(|x| x.is_finite())
    }
}
