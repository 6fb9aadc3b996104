//! Radial weights `w_i`, `v_i` for the three weight families.
//!
//! Tables store the scaled weights `wbar_i = w_i / i^p` and
//! `vbar_i = v_i / i^p`, which tend to 1 at large `i`. On the centred
//! grid the row `i = 0` holds the unscaled `w_0` and `v_0`.

mod delta;
mod evans;
mod sbp2;
mod sbp4;
mod tail;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::grid::GridKind;
use crate::math;
use crate::{Error, Result};

pub use delta::{delta_profile, DeltaProfile};
pub use sbp4::{sbp4_exact, Sbp4Core};
pub use tail::{tail_eval, AsymptoticTail};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// `v_i = i^p`, `w_i` from the Evans volume formula.
    Evans,
    /// Second-order summation-by-parts weights, `v = w`.
    Sbp2,
    /// Fourth-order summation-by-parts weights from the exact recurrence.
    Sbp4,
}

impl Method {
    pub const fn name(self) -> &'static str {
        match self {
            Method::Evans => "evans",
            Method::Sbp2 => "sbp2",
            Method::Sbp4 => "sbp4",
        }
    }

    /// Interior accuracy order `2N`.
    pub const fn order(self) -> u32 {
        match self {
            Method::Evans | Method::Sbp2 => 2,
            Method::Sbp4 => 4,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "evans" => Ok(Method::Evans),
            "sbp2" => Ok(Method::Sbp2),
            "sbp4" => Ok(Method::Sbp4),
            _ => Err(Error::InvalidParameter("method must be evans, sbp2 or sbp4")),
        }
    }
}

/// Smallest `i_star` at which the fourth-order tail is accurate to
/// double precision, or `None` when `p` is out of reach.
pub fn required_i_star(method: Method, p: u32) -> Option<u32> {
    match method {
        Method::Evans | Method::Sbp2 => Some(1),
        Method::Sbp4 => match p {
            0 => None,
            1..=10 => Some(1000),
            11..=22 => Some(2000),
            _ => None,
        },
    }
}

/// `i_star` used when none is given: the precision floor, raised to
/// cover a grid of outer index `last_index`.
pub fn default_i_star(method: Method, p: u32, last_index: f64) -> u32 {
    let floor = match method {
        Method::Sbp4 => required_i_star(method, p).unwrap_or(2000),
        Method::Evans | Method::Sbp2 => 1000,
    };
    floor.max(math::ceil(last_index) as u32)
}

/// Weights tabulated for every grid index `i <= i_star`.
#[derive(Clone, Debug)]
pub struct WeightTable {
    method: Method,
    p: u32,
    kind: GridKind,
    i_star: u32,
    chi: f64,
    wbar: Vec<f64>,
    vbar: Vec<f64>,
    u: Vec<f64>,
    delta: Option<DeltaProfile>,
}

/// Tables compare equal when their tabulated data agree bit for bit.
impl PartialEq for WeightTable {
    fn eq(&self, other: &Self) -> bool {
        self.method == other.method
            && self.p == other.p
            && self.kind == other.kind
            && self.i_star == other.i_star
            && self.chi.to_bits() == other.chi.to_bits()
            && bits_eq(&self.wbar, &other.wbar)
            && bits_eq(&self.vbar, &other.vbar)
            && bits_eq(&self.u, &other.u)
    }
}

fn bits_eq(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Sign structure of the induced norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Definiteness {
    Positive,
    /// The odd-field norm has a non-positive direction near the origin.
    Indefinite,
}

pub(crate) fn rows_for(kind: GridKind, i_star: u32) -> usize {
    let last = 2 * i_star as i64;
    let last = if (last - kind.offset()) % 2 != 0 { last - 1 } else { last };
    ((last - kind.offset()) / 2 + 1) as usize
}

impl WeightTable {
    /// Build the table for `method`.
    pub fn build(method: Method, p: u32, kind: GridKind, i_star: u32) -> Result<Self> {
        match method {
            Method::Evans => evans::evans_weights(p, kind, i_star),
            Method::Sbp2 => sbp2::sbp2_weights(p, kind, i_star),
            Method::Sbp4 => sbp4::sbp4_weights(p, kind, i_star),
        }
    }

    /// Assemble a table from tabulated data, as read from a file.
    pub fn from_parts(
        method: Method,
        p: u32,
        kind: GridKind,
        i_star: u32,
        chi: f64,
        wbar: Vec<f64>,
        vbar: Vec<f64>,
        u: Vec<f64>,
    ) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidPower("p must be at least 1"));
        }
        let n = rows_for(kind, i_star);
        if wbar.len() != n || vbar.len() != n || !(u.is_empty() || u.len() == n) {
            return Err(Error::TableMismatch("row count does not match i_star"));
        }
        Ok(WeightTable { method, p, kind, i_star, chi, wbar, vbar, u, delta: None })
    }

    pub(crate) fn assemble(
        method: Method,
        p: u32,
        kind: GridKind,
        i_star: u32,
        wbar: Vec<f64>,
        vbar: Vec<f64>,
        u: Vec<f64>,
        delta: Option<DeltaProfile>,
    ) -> Self {
        let chi = *vbar.last().unwrap_or(&1.0);
        WeightTable { method, p, kind, i_star, chi, wbar, vbar, u, delta }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn i_star(&self) -> u32 {
        self.i_star
    }

    /// `vbar` at the last tabulated index: the boundary factor of a grid
    /// ending there.
    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn len(&self) -> usize {
        self.wbar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wbar.is_empty()
    }

    pub fn index(&self, k: usize) -> f64 {
        (2 * k as i64 + self.kind.offset()) as f64 / 2.0
    }

    pub fn wbar(&self) -> &[f64] {
        &self.wbar
    }

    pub fn vbar(&self) -> &[f64] {
        &self.vbar
    }

    /// Off-diagonal couplings: `u[k]` links positions `k` and `k + 1`.
    /// Empty when the odd-field norm is diagonal.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn u_at(&self, k: usize) -> f64 {
        self.u.get(k).copied().unwrap_or(0.0)
    }

    pub(crate) fn cached_delta(&self) -> Option<&DeltaProfile> {
        self.delta.as_ref()
    }

    /// Scaled weights `(wbar, vbar)` at any index `i > 0`, from the table
    /// or from the asymptotic tail beyond it.
    pub fn scaled_at(&self, twice: i64) -> Result<(f64, f64)> {
        if let Some(k) = self.kind.position(twice) {
            if k < self.len() {
                return Ok((self.wbar[k], self.vbar[k]));
            }
        } else {
            return Err(Error::TableMismatch("index not on this grid"));
        }
        let (v, w) = tail_eval(self.method, self.p, twice as f64 / 2.0)?;
        Ok((w, v))
    }

    /// Unscaled `w_0` (centred tables only).
    pub fn w_origin(&self) -> Option<f64> {
        (self.kind == GridKind::Centred).then(|| self.wbar[0])
    }

    /// Whether the odd-field norm is positive definite.
    pub fn definiteness(&self) -> Definiteness {
        let n = self.len().min(8);
        let start = usize::from(self.kind == GridKind::Centred);
        let raw = |k: usize, x: f64| x * math::powi(self.index(k), self.p as i32);
        let mut pivot_prev = 0.0;
        let mut coupling_prev = 0.0;
        for k in start..n {
            let d = raw(k, self.vbar[k]);
            let pivot = if k == start { d } else { d - coupling_prev * coupling_prev / pivot_prev };
            if !(pivot > 0.0) || !(self.wbar[k] > 0.0) {
                return Definiteness::Indefinite;
            }
            pivot_prev = pivot;
            coupling_prev = self.u_at(k);
        }
        let tail_ok = self.wbar[start..].iter().chain(&self.vbar[start..]).all(|&x| x > 0.0);
        if tail_ok {
            Definiteness::Positive
        } else {
            Definiteness::Indefinite
        }
    }
}

pub fn evans_weights(p: u32, kind: GridKind, i_star: u32) -> Result<WeightTable> {
    evans::evans_weights(p, kind, i_star)
}

pub fn sbp2_weights(p: u32, kind: GridKind, i_star: u32) -> Result<WeightTable> {
    sbp2::sbp2_weights(p, kind, i_star)
}

pub fn sbp4_weights(p: u32, kind: GridKind, i_star: u32) -> Result<WeightTable> {
    sbp4::sbp4_weights(p, kind, i_star)
}

fn check_common(p: u32, i_star: u32) -> Result<()> {
    if p < 1 {
        return Err(Error::InvalidPower("p must be at least 1"));
    }
    if i_star < 8 {
        return Err(Error::InvalidParameter("i_star must be at least 8"));
    }
    Ok(())
}
