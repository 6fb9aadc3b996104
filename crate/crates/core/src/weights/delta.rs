use alloc::vec::Vec;

use super::{Method, WeightTable};
use crate::grid::GridKind;
use crate::math::powi;

/// Regularity coefficients of the odd-field operator row at each index.
///
/// For the second-order methods, `delta0 = i^3 c_0 - p i^2` and
/// `delta1 = i c_2`. For the fourth-order method, `delta0 = i^5 c_0 - p i^4`,
/// `delta1 = -i^2 c_3` and `delta2 = i c_4`. Here `c_a` are the Taylor
/// moments of the row about `r_i`, taken over the extended stencil.
/// Entries at `i = 0` are NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaProfile {
    pub method: Method,
    pub p: u32,
    pub kind: GridKind,
    pub delta0: Vec<f64>,
    pub delta1: Vec<f64>,
    /// Empty for the second-order methods.
    pub delta2: Vec<f64>,
}

impl DeltaProfile {
    pub fn index(&self, k: usize) -> f64 {
        (2 * k as i64 + self.kind.offset()) as f64 / 2.0
    }

    pub fn len(&self) -> usize {
        self.delta0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta0.is_empty()
    }

    /// Position of index `i` in the profile, if tabulated.
    pub fn position(&self, i: f64) -> Option<usize> {
        let twice = i * 2.0;
        if twice != crate::math::round(twice) {
            return None;
        }
        self.kind.position(twice as i64).filter(|&k| k < self.len())
    }

    /// Large-`i` limits implied by the tail expansions.
    pub fn limits(&self) -> Vec<f64> {
        delta_limits(self.method, self.p)
    }
}

/// Large-`i` limits of the regularity coefficients.
pub fn delta_limits(method: Method, p: u32) -> Vec<f64> {
    let p = p as f64;
    match method {
        Method::Evans => alloc::vec![p * (1.0 - p) / 3.0, p / 2.0],
        Method::Sbp2 => alloc::vec![p * (1.0 - p) / 2.0, p / 2.0],
        Method::Sbp4 => alloc::vec![-p * (p - 1.0) * (p - 1.0), p * (p - 1.0) / 3.0, -p / 6.0],
    }
}

/// Regularity coefficients for every tabulated index.
///
/// Tables built in this crate carry a profile computed alongside the
/// weights (exactly, for the fourth-order method). Tables read back from
/// files are evaluated in double precision.
pub fn delta_profile(table: &WeightTable) -> DeltaProfile {
    if let Some(d) = table.cached_delta() {
        return d.clone();
    }
    match table.method() {
        Method::Evans | Method::Sbp2 => second_order(table),
        Method::Sbp4 => fourth_order(table),
    }
}

/// `v_j / i^p` for any grid twice-index `j`, extended through the origin.
fn v_scaled(table: &WeightTable, twice_j: i64, twice_i: i64) -> f64 {
    let j = twice_j.abs();
    if j == 0 {
        return 0.0;
    }
    let vbar = table.scaled_at(j).map(|x| x.1).unwrap_or(f64::NAN);
    vbar * powi(j as f64 / twice_i as f64, table.p() as i32)
}

fn second_order(table: &WeightTable) -> DeltaProfile {
    let p = table.p() as f64;
    let n = table.len();
    let mut d0 = Vec::with_capacity(n);
    let mut d1 = Vec::with_capacity(n);
    for k in 0..n {
        let twice = 2 * k as i64 + table.kind().offset();
        if twice == 0 {
            d0.push(f64::NAN);
            d1.push(f64::NAN);
            continue;
        }
        let i = twice as f64 / 2.0;
        let c0 = (v_scaled(table, twice + 2, twice) - v_scaled(table, twice - 2, twice)) / (2.0 * table.wbar()[k]);
        d0.push(i * i * (i * c0 - p));
        d1.push(i * c0 / 2.0);
    }
    DeltaProfile {
        method: table.method(),
        p: table.p(),
        kind: table.kind(),
        delta0: d0,
        delta1: d1,
        delta2: Vec::new(),
    }
}

/// Extended odd-field norm entry between twice-indices `j`, `k`, divided
/// by `i^p`.
fn wt_scaled(table: &WeightTable, j: i64, k: i64, twice_i: i64) -> f64 {
    let (j, k) = match (j < 0, k < 0) {
        (true, true) => (-j, -k),
        (false, false) => (j, k),
        _ => return 0.0,
    };
    if table.kind() == GridKind::Centred && (j == 0 || k == 0) {
        return 0.0;
    }
    if j == k {
        return v_scaled(table, j, twice_i);
    }
    if (j - k).abs() == 2 {
        let lo = j.min(k);
        if let Some(pos) = table.kind().position(lo) {
            return table.u_at(pos) / powi(twice_i as f64 / 2.0, table.p() as i32);
        }
    }
    0.0
}

fn fourth_order(table: &WeightTable) -> DeltaProfile {
    const TAPS: [(i64, f64); 4] = [(-4, 1.0), (-2, -8.0), (2, 8.0), (4, -1.0)];
    const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];
    let p = table.p() as f64;
    let n = table.len();
    let mut out = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for k in 0..n {
        let twice = 2 * k as i64 + table.kind().offset();
        if twice == 0 {
            for d in &mut out {
                d.push(f64::NAN);
            }
            continue;
        }
        let i = twice as f64 / 2.0;
        let mut a = [0.0; 5];
        for &(dj, c) in &TAPS {
            let j = twice + dj;
            for kk in [j - 2, j, j + 2] {
                let coef = c * wt_scaled(table, j, kk, twice);
                if coef == 0.0 {
                    continue;
                }
                let m = (kk - twice) as f64 / 2.0;
                for (alpha, slot) in a.iter_mut().enumerate() {
                    *slot += coef * powi(m, alpha as i32) / FACT[alpha];
                }
            }
        }
        let w12 = 12.0 * table.wbar()[k];
        out[0].push(i * i * i * i * (i * a[0] / w12 - p));
        out[1].push(-i * i * a[3] / w12);
        out[2].push(i * a[4] / w12);
    }
    let [delta0, delta1, delta2] = out;
    DeltaProfile { method: table.method(), p: table.p(), kind: table.kind(), delta0, delta1, delta2 }
}

#[cfg(test)]
pub(crate) fn strip_cache(table: &WeightTable) -> WeightTable {
    let mut t = table.clone();
    t.delta = None;
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sbp2_limits_approached() {
        for kind in [GridKind::Staggered, GridKind::Centred] {
            for p in 1..=6 {
                let t = WeightTable::build(Method::Sbp2, p, kind, 1000).unwrap();
                let d = delta_profile(&t);
                let k = d.len() - 1;
                for (got, lim) in [d.delta0[k], d.delta1[k]].iter().zip(d.limits()) {
                    assert!((got - lim).abs() <= 1e-3 * lim.abs().max(1.0), "{kind} p={p}: {got} vs {lim}");
                }
            }
        }
    }

    #[test]
    fn evans_limit_matches_expansion() {
        for p in [2u32, 4, 6] {
            let t = WeightTable::build(Method::Evans, p, GridKind::Centred, 1000).unwrap();
            let d = delta_profile(&t);
            let lim = d.limits()[0];
            assert!((d.delta0[1000] - lim).abs() < 1e-4 * lim.abs(), "p={p}");
        }
    }
}
