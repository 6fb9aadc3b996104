use alloc::vec::Vec;

use super::{check_common, delta, rows_for, Method, WeightTable};
use crate::grid::GridKind;
use crate::math::powi;
use crate::Result;

fn double_factorial(n: u32) -> f64 {
    (1..=n).rev().step_by(2).fold(1.0, |acc, k| acc * k as f64)
}

/// `wbar_{1/2}` on the staggered grid, chosen to suppress the decaying
/// solution of the recurrence.
pub(crate) fn staggered_seed(p: u32) -> f64 {
    let df = double_factorial(p + 1);
    let even = df * df / (p + 1) as f64;
    if p % 2 == 0 {
        even
    } else {
        even * 2.0 / core::f64::consts::PI
    }
}

/// Weights satisfying `(i+1) w_{i+1} - (i-1) w_{i-1} = 2 (p+1) w_i`,
/// with `v = w`.
pub(crate) fn sbp2_weights(p: u32, kind: GridKind, i_star: u32) -> Result<WeightTable> {
    check_common(p, i_star)?;
    let n = rows_for(kind, i_star);
    let pf = p as i32;
    // Unscaled `w_i`; these stay exact wherever they are integers or
    // half-integers, which the scaled recurrence does not.
    let mut w: Vec<f64> = Vec::with_capacity(n);
    match kind {
        GridKind::Centred => {
            let w0 = (1..=p).fold(1.0, |acc, k| acc * k as f64) / powi(2.0, pf);
            let w1 = (1 + p) as f64 * w0;
            w.extend([w0, w1, (1 + p) as f64 * w1]);
        }
        GridKind::Staggered => {
            let w_half = staggered_seed(p) / powi(2.0, pf);
            w.extend([w_half, (4 * p + 3) as f64 / 3.0 * w_half]);
        }
    }
    while w.len() < n {
        let k = w.len() - 1;
        let i = (2 * k as i64 + kind.offset()) as f64 / 2.0;
        w.push((2.0 * (p + 1) as f64 * w[k] + (i - 1.0) * w[k - 1]) / (i + 1.0));
    }
    let mut wbar: Vec<f64> = w
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let i = (2 * k as i64 + kind.offset()) as f64 / 2.0;
            if i == 0.0 {
                x
            } else {
                x / powi(i, pf)
            }
        })
        .collect();
    wbar.truncate(n);
    let vbar = wbar.clone();
    let mut table = WeightTable::assemble(Method::Sbp2, p, kind, i_star, wbar, vbar, Vec::new(), None);
    let profile = delta::delta_profile(&table);
    table.delta = Some(profile);
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centred_seeds() {
        let t = sbp2_weights(2, GridKind::Centred, 20).unwrap();
        assert_eq!(t.wbar()[0], 0.5);
        assert_eq!(t.wbar()[1], 1.5);
        assert_eq!(t.wbar()[2], 4.5 / 4.0);
    }

    #[test]
    fn even_p_staggered_seed() {
        assert_eq!(staggered_seed(2), 9.0 / 3.0);
        assert_eq!(staggered_seed(4), 225.0 / 5.0);
    }
}
