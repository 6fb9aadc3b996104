//! Diagnostics for schemes that are not summation-by-parts: the naive
//! product-rule operator and the generalised Evans operator.

use alloc::vec::Vec;

use super::TestField;
use crate::grid::GridSpec;
use crate::math::powi;

/// Error of `((i+1)^p Psi_{i+1} - (i-1)^p Psi_{i-1}) / (2 h i^p)` against
/// `psi' + p psi / r` at every point with `i >= 1` short of the boundary,
/// as `(i, error)` pairs.
pub fn naive_operator_error(grid: &GridSpec, field: &TestField<'_>) -> Vec<(f64, f64)> {
    let p = grid.p() as i32;
    let h = grid.spacing();
    (0..grid.len() - 1)
        .filter(|&k| grid.index(k) >= 1.0)
        .map(|k| {
            let i = grid.index(k);
            let r = grid.r(k);
            let up = powi(i + 1.0, p) * (field.f)(r + h);
            let down = powi(i - 1.0, p) * (field.f)(r - h);
            let approx = (up - down) / (2.0 * h * powi(i, p));
            (i, approx - ((field.df)(r) + p as f64 * (field.f)(r) / r))
        })
        .collect()
}

/// Fitted and printed leading error coefficients of the generalised Evans
/// operator `(p+1) D(r^p Psi) / D(r^{p+1})` on `psi = r + b r^3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneralizedEvansProbe {
    pub p: u32,
    pub b: f64,
    /// Coefficient `C` in `error = C h^2` (three-point `D`).
    pub n1_fitted: f64,
    /// `b (p+3)(2p+1)` as printed.
    pub n1_printed: f64,
    /// Coefficient `C` in `error = C h^4 / r^2` (five-point `D`).
    pub n2_fitted: f64,
    /// `-2 b (p+3) p (p-1)(2p-1) / 15` as printed.
    pub n2_printed: f64,
}

fn generalized_evans_error(p: u32, b: f64, r: f64, h: f64, taps: &[(f64, f64)]) -> f64 {
    let psi = |x: f64| x + b * x * x * x;
    let pi = p as i32;
    let num: f64 = taps.iter().map(|&(k, c)| c * powi(r + k * h, pi) * psi(r + k * h)).sum();
    let den: f64 = taps.iter().map(|&(k, c)| c * powi(r + k * h, pi + 1)).sum();
    let exact = 1.0 + 3.0 * b * r * r + p as f64 * (1.0 + b * r * r);
    (p + 1) as f64 * num / den - exact
}

/// Fit the leading error coefficients by Richardson extrapolation in `h`
/// at `r = 1`.
pub fn probe_generalized_evans(p: u32, b: f64) -> GeneralizedEvansProbe {
    const D2: [(f64, f64); 2] = [(-1.0, -0.5), (1.0, 0.5)];
    const D4: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -2.0 / 3.0), (1.0, 2.0 / 3.0), (2.0, -1.0 / 12.0)];
    let r = 1.0;
    let fit = |taps: &[(f64, f64)], power: i32, h: f64| {
        let c = |h: f64| generalized_evans_error(p, b, r, h, taps) * powi(r, power - 2) / powi(h, power);
        let (coarse, fine) = (c(h), c(h / 2.0));
        (4.0 * fine - coarse) / 3.0
    };
    let pf = p as f64;
    GeneralizedEvansProbe {
        p,
        b,
        n1_fitted: fit(&D2, 2, 1.0 / 256.0),
        n1_printed: b * (pf + 3.0) * (2.0 * pf + 1.0),
        n2_fitted: fit(&D4, 4, 1.0 / 32.0),
        n2_printed: -2.0 * b * (pf + 3.0) * pf * (pf - 1.0) * (2.0 * pf - 1.0) / 15.0,
    }
}
