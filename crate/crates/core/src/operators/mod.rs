//! Folded difference operators `D` (on the even field) and `D~` (on the
//! odd field), the norms `W`, `W~`, and the summation-by-parts check.
//!
//! Norms are stored divided by `M^p` so that entries near the outer
//! boundary are of order one; the boundary coupling then reads `chi`.

mod closure;
mod probe;
mod truncation;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::grid::{GridKind, GridSpec, Parity};
use crate::math::{abs, powi};
use crate::weights::{Method, WeightTable};
use crate::{Error, Result};
use closure::Closure;

pub use probe::{naive_operator_error, probe_generalized_evans, GeneralizedEvansProbe};
pub use truncation::{truncation_scan, TestField};

/// Scheme family: weights plus boundary closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Evans,
    Sbp2,
    /// Fourth order inside, first order at the outer boundary.
    Sbp41,
    /// Fourth order inside, second order at the outer boundary.
    Sbp42,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Evans, Variant::Sbp2, Variant::Sbp41, Variant::Sbp42];

    pub const fn method(self) -> Method {
        match self {
            Variant::Evans => Method::Evans,
            Variant::Sbp2 => Method::Sbp2,
            Variant::Sbp41 | Variant::Sbp42 => Method::Sbp4,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Variant::Evans => "evans",
            Variant::Sbp2 => "sbp2",
            Variant::Sbp41 => "sbp41",
            Variant::Sbp42 => "sbp42",
        }
    }

    pub const fn interior_order(self) -> u32 {
        self.method().order()
    }

    /// Accuracy of the rows at the outer boundary.
    pub const fn boundary_order(self) -> u32 {
        match self {
            Variant::Evans | Variant::Sbp2 | Variant::Sbp41 => 1,
            Variant::Sbp42 => 2,
        }
    }

    /// Whether the weights exist on this grid kind for this `p`.
    pub fn supports(self, kind: GridKind, p: u32) -> bool {
        !(self == Variant::Evans && kind == GridKind::Centred && p % 2 == 1)
    }

    fn closure(self) -> &'static Closure {
        match self {
            Variant::Evans | Variant::Sbp2 => &closure::SECOND,
            Variant::Sbp41 => &closure::FOURTH_FIRST,
            Variant::Sbp42 => &closure::FOURTH_SECOND,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "evans" => Ok(Variant::Evans),
            "sbp2" => Ok(Variant::Sbp2),
            "sbp41" => Ok(Variant::Sbp41),
            "sbp42" => Ok(Variant::Sbp42),
            _ => Err(Error::InvalidParameter("method must be evans, sbp2, sbp41 or sbp42")),
        }
    }
}

/// Sparse operator stored row by row; coefficients are dimensionless and
/// the factor `1/h` is applied by the caller.
#[derive(Clone, Debug, PartialEq)]
pub struct BandOperator {
    rows: Vec<Vec<(usize, f64)>>,
}

impl BandOperator {
    fn zeros(n: usize) -> Self {
        BandOperator { rows: vec![Vec::new(); n] }
    }

    fn add(&mut self, i: usize, j: usize, x: f64) {
        match self.rows[i].iter_mut().find(|e| e.0 == j) {
            Some(e) => e.1 += x,
            None => self.rows[i].push((j, x)),
        }
    }

    fn finish(mut self) -> Self {
        for row in &mut self.rows {
            row.retain(|e| e.1 != 0.0);
            row.sort_by_key(|e| e.0);
        }
        self
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    /// `(row, column, value)` for every stored entry.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(j, x)| (i, j, x)))
    }

    pub fn apply_row(&self, i: usize, x: &[f64]) -> f64 {
        self.rows[i].iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// `out = scale * A x`.
    pub fn apply(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = scale * self.apply_row(i, x);
        }
    }
}

/// Symmetric tridiagonal norm (diagonal except for a few couplings next
/// to the origin).
#[derive(Clone, Debug, PartialEq)]
pub struct NormOperator {
    diag: Vec<f64>,
    /// `upper[k]` couples positions `k` and `k + 1`.
    upper: Vec<f64>,
}

impl NormOperator {
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn coupling(&self, k: usize) -> f64 {
        self.upper.get(k).copied().unwrap_or(0.0)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i + 1 == j {
            self.coupling(i)
        } else if j + 1 == i {
            self.coupling(j)
        } else {
            0.0
        }
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.diag.len();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i + 1 < n {
                s += self.coupling(i) * x[i + 1];
            }
            if i > 0 {
                s += self.coupling(i - 1) * x[i - 1];
            }
            out[i] = s;
        }
    }

    /// `x^T N y`.
    pub fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.diag.len();
        let mut s = 0.0;
        for i in 0..n {
            s += x[i] * self.diag[i] * y[i];
            if i + 1 < n {
                let c = self.coupling(i);
                if c != 0.0 {
                    s += c * (x[i] * y[i + 1] + x[i + 1] * y[i]);
                }
            }
        }
        s
    }

    /// `N^{-1} b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 0..n {
            let sub = if i > 0 { self.coupling(i - 1) } else { 0.0 };
            let denom = self.diag[i] - if i > 0 { sub * c[i - 1] } else { 0.0 };
            c[i] = self.coupling(i) / denom;
            d[i] = (b[i] - if i > 0 { sub * d[i - 1] } else { 0.0 }) / denom;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        d
    }

    /// Whether every pivot of the `L D L^T` factorisation is positive.
    pub fn is_positive_definite(&self) -> bool {
        let mut prev = 0.0;
        for i in 0..self.diag.len() {
            let pivot = if i > 0 {
                let c = self.coupling(i - 1);
                self.diag[i] - c * c / prev
            } else {
                self.diag[i]
            };
            if !(pivot > 0.0) {
                return false;
            }
            prev = pivot;
        }
        true
    }
}

/// A complete semi-discrete operator on one grid.
#[derive(Clone, Debug)]
pub struct SbpScheme {
    grid: GridSpec,
    variant: Variant,
    d: BandOperator,
    dtilde: BandOperator,
    w: NormOperator,
    wtilde: NormOperator,
    chi: f64,
}

impl SbpScheme {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// `D`, acting on the even field.
    pub fn d(&self) -> &BandOperator {
        &self.d
    }

    /// `D~`, acting on the odd field.
    pub fn dtilde(&self) -> &BandOperator {
        &self.dtilde
    }

    /// Even-field norm `W / M^p`.
    pub fn w(&self) -> &NormOperator {
        &self.w
    }

    /// Odd-field norm `W~ / M^p`.
    pub fn wtilde(&self) -> &NormOperator {
        &self.wtilde
    }

    /// Boundary factor `chi = vbar_M`; `B / M^p` has the single entry `chi`.
    pub fn chi(&self) -> f64 {
        self.chi
    }

    /// `h^{p+1} M^p = h R^p`, turning normalised quadratic forms into
    /// energies.
    pub fn energy_scale(&self) -> f64 {
        self.grid.spacing() * powi(self.grid.radius(), self.grid.p() as i32)
    }

    /// `h^p M^p = R^p`, the factor on boundary terms.
    pub fn boundary_scale(&self) -> f64 {
        powi(self.grid.radius(), self.grid.p() as i32)
    }

    pub fn last(&self) -> usize {
        self.grid.len() - 1
    }
}

/// Assemble `D`, `D~`, `W`, `W~` for `variant` from tabulated weights.
pub fn build_scheme(variant: Variant, grid: &GridSpec, table: &WeightTable) -> Result<SbpScheme> {
    if table.method() != variant.method() {
        return Err(Error::TableMismatch("weight method differs from scheme"));
    }
    if table.p() != grid.p() {
        return Err(Error::TableMismatch("p differs between table and grid"));
    }
    if table.kind() != grid.kind() {
        return Err(Error::TableMismatch("grid kind differs between table and grid"));
    }
    let n = grid.len();
    let p = grid.p() as i32;
    let half_steps = grid.half_steps() as f64;
    let m_pow = powi(grid.last_index(), p);
    let mut w = vec![0.0; n];
    let mut v = vec![0.0; n];
    for k in 0..n {
        let twice = grid.twice_index(k);
        if twice == 0 {
            w[k] = table.w_origin().unwrap_or(f64::NAN) / m_pow;
        } else {
            let (wb, vb) = table.scaled_at(twice)?;
            let t = powi(twice as f64 / half_steps, p);
            w[k] = wb * t;
            v[k] = vb * t;
        }
    }
    let u: Vec<f64> = (0..n - 1).map(|k| table.u_at(k) / m_pow).collect();
    let closure = variant.closure();

    let mut d = BandOperator::zeros(n);
    let mut dt = BandOperator::zeros(n);
    for k in 0..n {
        let from_end = n - 1 - k;
        let row = closure.row(from_end);
        for (j, &c) in row.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let ext = k as i64 + row.first + j as i64;
            let (pos, sign) = grid.fold(ext, Parity::Even).ok_or(Error::InvalidGrid("stencil leaves the grid"))?;
            d.add(k, pos, sign * c);

            let (pos, sign) = grid.fold(ext, Parity::Odd).ok_or(Error::InvalidGrid("stencil leaves the grid"))?;
            if sign == 0.0 {
                continue;
            }
            let a = sign * c / w[k];
            dt.add(k, pos, a * v[pos]);
            if pos > 0 && u[pos - 1] != 0.0 {
                dt.add(k, pos - 1, a * u[pos - 1]);
            }
            if pos + 1 < n && u[pos] != 0.0 {
                dt.add(k, pos + 1, a * u[pos]);
            }
        }
    }

    let mut wd = vec![0.0; n];
    let mut wtd = vec![0.0; n];
    for k in 0..n {
        let m = closure.multiplier(n - 1 - k);
        if grid.twice_index(k) == 0 {
            wd[k] = w[k] / 2.0;
            wtd[k] = w[k] / 2.0;
        } else {
            wd[k] = m * w[k];
            wtd[k] = m * v[k];
        }
    }
    let chi = v[n - 1];
    Ok(SbpScheme {
        grid: *grid,
        variant,
        d: d.finish(),
        dtilde: dt.finish(),
        w: NormOperator { diag: wd, upper: Vec::new() },
        wtilde: NormOperator { diag: wtd, upper: u },
        chi,
    })
}

/// Entries of `W D~ + (W~ D)^T - B` keyed by `(row, column)`, together with
/// the magnitude of the terms that make up each entry.
fn sbp_entries(s: &SbpScheme) -> BTreeMap<(usize, usize), (f64, f64)> {
    let n = s.grid.len();
    let mut m: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    let mut put = |i: usize, j: usize, x: f64| {
        let e = m.entry((i, j)).or_insert((0.0, 0.0));
        e.0 += x;
        e.1 += abs(x);
    };
    for (i, j, x) in s.dtilde.entries() {
        put(i, j, s.w.diag[i] * x);
    }
    for (k, j, x) in s.d.entries() {
        for i in [k.wrapping_sub(1), k, k + 1] {
            if i < n {
                let wik = s.wtilde.get(i, k);
                if wik != 0.0 {
                    put(j, i, wik * x);
                }
            }
        }
    }
    put(n - 1, n - 1, -s.chi);
    m
}

/// Max-norm of `W D~ + (W~ D)^T - B` in the normalised units of the
/// scheme.
pub fn verify_sbp(scheme: &SbpScheme) -> f64 {
    sbp_entries(scheme).values().fold(0.0, |acc, e| if abs(e.0) > acc { abs(e.0) } else { acc })
}

/// Largest entry of the summation-by-parts residual relative to the
/// terms it is made of; sensitive to rows whose weights are tiny.
pub fn verify_sbp_relative(scheme: &SbpScheme) -> f64 {
    sbp_entries(scheme)
        .values()
        .filter(|e| e.1 > 0.0)
        .fold(0.0, |acc, e| if abs(e.0) / e.1 > acc { abs(e.0) / e.1 } else { acc })
}
