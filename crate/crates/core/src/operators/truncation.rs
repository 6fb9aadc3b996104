use alloc::vec::Vec;

use super::SbpScheme;
use crate::grid::{GridKind, Parity};

/// A smooth test function with its derivative.
pub struct TestField<'a> {
    pub parity: Parity,
    pub f: &'a dyn Fn(f64) -> f64,
    pub df: &'a dyn Fn(f64) -> f64,
}

/// Pointwise truncation error of `h^{-1} D~ Psi` against
/// `psi' + p psi / r` (odd field) or of `h^{-1} D Pi` against `pi'` (even
/// field), at every grid point.
pub fn truncation_scan(scheme: &SbpScheme, field: &TestField<'_>) -> Vec<f64> {
    let grid = scheme.grid();
    let n = grid.len();
    let p = grid.p() as f64;
    let h = grid.spacing();
    let values: Vec<f64> = (0..n)
        .map(|k| {
            if field.parity == Parity::Odd && grid.kind() == GridKind::Centred && k == 0 {
                0.0
            } else {
                (field.f)(grid.r(k))
            }
        })
        .collect();
    (0..n)
        .map(|k| {
            let r = grid.r(k);
            match field.parity {
                Parity::Odd => {
                    let exact = if r == 0.0 { (1.0 + p) * (field.df)(0.0) } else { (field.df)(r) + p * (field.f)(r) / r };
                    scheme.dtilde().apply_row(k, &values) / h - exact
                }
                Parity::Even => scheme.d().apply_row(k, &values) / h - (field.df)(r),
            }
        })
        .collect()
}
