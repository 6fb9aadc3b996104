//! One-dimensional boundary closures `D_0` with diagonal norms `W_0`
//! satisfying `W_0 D_0 + (W_0 D_0)^T = e_M e_M^T` on a half line ending at
//! `M`.

/// A row of `D_0` given by its first offset and coefficients.
pub(crate) struct Row {
    pub first: i64,
    pub coeffs: &'static [f64],
}

pub(crate) struct Closure {
    pub interior: Row,
    /// Rows `M - r + 1 .. M`.
    pub rows: &'static [Row],
    /// Norm multipliers on the same rows.
    pub norm: &'static [f64],
}

impl Closure {
    /// Taps of the row `from_end` positions before the outer boundary.
    pub fn row(&self, from_end: usize) -> &Row {
        let r = self.rows.len();
        if from_end < r {
            &self.rows[r - 1 - from_end]
        } else {
            &self.interior
        }
    }

    pub fn multiplier(&self, from_end: usize) -> f64 {
        let r = self.norm.len();
        if from_end < r {
            self.norm[r - 1 - from_end]
        } else {
            1.0
        }
    }
}

pub(crate) const SECOND: Closure = Closure {
    interior: Row { first: -1, coeffs: &[-0.5, 0.0, 0.5] },
    rows: &[Row { first: -1, coeffs: &[-1.0, 1.0] }],
    norm: &[0.5],
};

pub(crate) const FOURTH_FIRST: Closure = Closure {
    interior: Row { first: -2, coeffs: &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0] },
    rows: &[
        Row { first: -2, coeffs: &[1.0 / 13.0, -8.0 / 13.0, 0.0, 7.0 / 13.0] },
        Row { first: -2, coeffs: &[1.0 / 5.0, -7.0 / 5.0, 6.0 / 5.0] },
    ],
    norm: &[13.0 / 12.0, 5.0 / 12.0],
};

pub(crate) const FOURTH_SECOND: Closure = Closure {
    interior: Row { first: -2, coeffs: &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0] },
    rows: &[
        Row { first: -2, coeffs: &[4.0 / 49.0, -32.0 / 49.0, 0.0, 59.0 / 98.0, 0.0, -3.0 / 98.0] },
        Row { first: -2, coeffs: &[4.0 / 43.0, -59.0 / 86.0, 0.0, 59.0 / 86.0, -4.0 / 43.0] },
        Row { first: -1, coeffs: &[-0.5, 0.0, 0.5] },
        Row { first: -3, coeffs: &[3.0 / 34.0, 4.0 / 17.0, -59.0 / 34.0, 24.0 / 17.0] },
    ],
    norm: &[49.0 / 48.0, 43.0 / 48.0, 59.0 / 48.0, 17.0 / 48.0],
};

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense `W_0 D_0 + (W_0 D_0)^T` on the last `n` points of a half line.
    fn residual(c: &Closure) -> f64 {
        let n = 16usize;
        let mut a = vec![vec![0.0; n]; n];
        for row in 0..n {
            let from_end = n - 1 - row;
            let r = c.row(from_end);
            for (j, &x) in r.coeffs.iter().enumerate() {
                let col = row as i64 + r.first + j as i64;
                assert!((col as usize) < n || col < 0);
                if col < 0 {
                    continue;
                }
                a[row][col as usize] += c.multiplier(from_end) * x;
            }
        }
        let mut worst: f64 = 0.0;
        // Rows far from the open (left) end only; the left end is cut.
        for i in 4..n {
            for j in 4..n {
                let target = if i == n - 1 && j == n - 1 { 1.0 } else { 0.0 };
                worst = worst.max((a[i][j] + a[j][i] - target).abs());
            }
        }
        worst
    }

    #[test]
    fn closures_are_summation_by_parts() {
        for c in [&SECOND, &FOURTH_FIRST, &FOURTH_SECOND] {
            assert!(residual(c) < 1e-15);
        }
    }
}
