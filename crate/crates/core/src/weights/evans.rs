use alloc::vec::Vec;

use super::{check_common, delta, rows_for, Method, WeightTable};
use crate::grid::GridKind;
use crate::math::{abs, powi};
use crate::{Error, Result};

/// `s(x) = x |x|^p`, the odd extension of `x^{p+1}`.
fn s(x: f64, p: u32) -> f64 {
    x * powi(abs(x), p as i32)
}

/// `wbar_i` for `i >= 1`, summed without cancellation:
/// `((i+1)^{p+1} - (i-1)^{p+1}) / (2 (p+1) i^p)`.
pub(crate) fn evans_wbar(p: u32, i: f64) -> f64 {
    let n = p + 1;
    let mut binom = 1.0;
    let mut sum = 0.0;
    for k in 1..=n {
        binom = binom * (n - k + 1) as f64 / k as f64;
        if k % 2 == 1 {
            sum += binom * powi(i, 1 - k as i32);
        }
    }
    sum / n as f64
}

pub(crate) fn evans_weights(p: u32, kind: GridKind, i_star: u32) -> Result<WeightTable> {
    check_common(p, i_star)?;
    if kind == GridKind::Centred && p % 2 == 1 {
        return Err(Error::OddPOnCentredGrid { p });
    }
    let n = rows_for(kind, i_star);
    let mut wbar = Vec::with_capacity(n);
    let mut vbar = Vec::with_capacity(n);
    for k in 0..n {
        let i = (2 * k as i64 + kind.offset()) as f64 / 2.0;
        if i == 0.0 {
            wbar.push(1.0 / (p + 1) as f64);
            vbar.push(0.0);
        } else if i < 1.0 {
            let w = (s(i + 1.0, p) - s(i - 1.0, p)) / (2.0 * (p + 1) as f64);
            wbar.push(w / powi(i, p as i32));
            vbar.push(1.0);
        } else {
            wbar.push(evans_wbar(p, i));
            vbar.push(1.0);
        }
    }
    let mut table = WeightTable::assemble(Method::Evans, p, kind, i_star, wbar, vbar, Vec::new(), None);
    let profile = delta::delta_profile(&table);
    table.delta = Some(profile);
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staggered_first_weight() {
        let t = evans_weights(2, GridKind::Staggered, 20).unwrap();
        let w_half = t.wbar()[0] * 0.25;
        assert!((w_half - 7.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn centred_origin_weight() {
        for p in [2, 4, 6] {
            let t = evans_weights(p, GridKind::Centred, 20).unwrap();
            assert_eq!(t.w_origin(), Some(1.0 / (p + 1) as f64));
        }
        assert_eq!(
            evans_weights(3, GridKind::Centred, 20).unwrap_err(),
            Error::OddPOnCentredGrid { p: 3 }
        );
    }

    #[test]
    fn binomial_sum_matches_direct_formula() {
        for p in 1..=8 {
            for i in [1.0, 1.5, 2.0, 7.5, 30.0] {
                let direct = (s(i + 1.0, p) - s(i - 1.0, p)) / (2.0 * (p + 1) as f64) / powi(i, p as i32);
                assert!((evans_wbar(p, i) - direct).abs() < 1e-13 * direct, "p={p} i={i}");
            }
        }
    }
}
