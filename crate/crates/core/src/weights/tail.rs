use alloc::vec;
use alloc::vec::Vec;

use super::{evans::evans_wbar, required_i_star, Method};
use crate::math::powi;
use crate::{Error, Result};

/// Large-`i` expansion `vbar(i) = sum c_n i^{-n}` (same for `wbar`).
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticTail {
    pub method: Method,
    pub p: u32,
    /// Smallest index at which the expansion is used.
    pub threshold: f64,
    /// `(n, c_n)` pairs for `vbar`.
    pub vbar: Vec<(i32, f64)>,
    /// `(n, c_n)` pairs for `wbar`.
    pub wbar: Vec<(i32, f64)>,
}

fn binom(n: i64, k: i64) -> f64 {
    if k < 0 || n < 0 || k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Coefficients of the polynomial solution `sum C_n i^{-2n}` of the
/// second-order recurrence.
fn sbp2_coefficients(p: u32) -> Vec<(i32, f64)> {
    let mut c = vec![1.0];
    for n in 1..=(p as i64 / 2 + 1) {
        let sum: f64 = (0..n)
            .map(|m| c[m as usize] * binom(p as i64 + 1 - 2 * m, 2 * (n - m) + 1))
            .sum();
        c.push(sum / (2 * n) as f64);
    }
    c.into_iter()
        .enumerate()
        .filter(|&(_, x)| x != 0.0)
        .map(|(n, x)| (2 * n as i32, x))
        .collect()
}

/// Fourth-order tail coefficients `(a4, a6)` for `vbar` and `wbar`.
pub(crate) fn sbp4_coefficients(p: u32) -> ([f64; 2], [f64; 2]) {
    let p = p as f64;
    let v4 = (2.0 * p - 1.0) * (p - 1.0) * p * (p + 1.0) * (p + 3.0) / 60.0;
    let v6 = (2.0 * p - 3.0) * (p - 3.0) * (p - 2.0) * (p - 1.0) * p * (p + 1.0) * (p + 3.0) / 504.0;
    let w4 = (2.0 * p + 1.0) * (p + 1.0) * p * (p - 1.0) * (p - 3.0) / 60.0;
    let w6 = (2.0 * p - 1.0) * (p - 5.0) * (p - 3.0) * (p - 2.0) * (p - 1.0) * p * (p + 1.0) / 504.0;
    ([v4, v6], [w4, w6])
}

impl AsymptoticTail {
    pub fn new(method: Method, p: u32) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidPower("p must be at least 1"));
        }
        Ok(match method {
            Method::Evans => {
                let n = p + 1;
                let wbar = (1..=n)
                    .step_by(2)
                    .map(|k| (k as i32 - 1, binom(n as i64, k as i64) / n as f64))
                    .collect();
                AsymptoticTail { method, p, threshold: 1.0, vbar: vec![(0, 1.0)], wbar }
            }
            Method::Sbp2 => {
                let c = sbp2_coefficients(p);
                AsymptoticTail { method, p, threshold: 0.5, vbar: c.clone(), wbar: c }
            }
            Method::Sbp4 => {
                let threshold = required_i_star(method, p)
                    .ok_or(Error::InvalidPower("fourth-order weights need p <= 22"))?;
                let (v, w) = sbp4_coefficients(p);
                AsymptoticTail {
                    method,
                    p,
                    threshold: threshold as f64,
                    vbar: vec![(0, 1.0), (4, v[0]), (6, v[1])],
                    wbar: vec![(0, 1.0), (4, w[0]), (6, w[1])],
                }
            }
        })
    }

    fn sum(terms: &[(i32, f64)], i: f64) -> f64 {
        terms.iter().rev().map(|&(n, c)| c * powi(i, -n)).sum()
    }

    /// `(vbar, wbar)` at index `i`.
    pub fn eval(&self, i: f64) -> Result<(f64, f64)> {
        if i < self.threshold {
            return Err(Error::BelowTailThreshold { index: i, threshold: self.threshold });
        }
        if self.method == Method::Evans {
            return Ok((1.0, evans_wbar(self.p, i)));
        }
        Ok((Self::sum(&self.vbar, i), Self::sum(&self.wbar, i)))
    }
}

/// `(vbar, wbar)` from the asymptotic tail.
pub fn tail_eval(method: Method, p: u32, i: f64) -> Result<(f64, f64)> {
    AsymptoticTail::new(method, p)?.eval(i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sbp2_leading_correction() {
        for p in 1..=12u32 {
            let c = sbp2_coefficients(p);
            let expected = (p * (p * p - 1)) as f64 / 12.0;
            let c1 = c.iter().find(|t| t.0 == 2).map_or(0.0, |t| t.1);
            assert!((c1 - expected).abs() < 1e-12 * expected.max(1.0), "p={p}");
        }
    }

    #[test]
    fn sbp2_polynomial_degree() {
        for p in 1..=12u32 {
            let top = sbp2_coefficients(p).iter().map(|t| t.0).max().unwrap();
            assert!(top <= p as i32, "p={p}");
        }
    }

    #[test]
    fn below_threshold_is_rejected() {
        assert!(matches!(
            tail_eval(Method::Sbp4, 4, 10.0),
            Err(Error::BelowTailThreshold { .. })
        ));
        assert!(tail_eval(Method::Sbp4, 23, 5000.0).is_err());
    }
}
