//! Self-convergence on aligned grids and energy-drift diagnostics.

use alloc::vec::Vec;

use crate::boundary::BoundarySpec;
use crate::evolution::{evolve, Bump, EnergyTrace, EvolutionConfig, Snapshot};
use crate::grid::{GridKind, GridSpec, Parity};
use crate::math::{abs, ceil, ln, powi, round, sqrt};
use crate::operators::{build_scheme, SbpScheme, Variant};
use crate::weights::{default_i_star, WeightTable};
use crate::{Error, Result};

/// `(L2_energy, max_scaled)` of a field: `sqrt(h^{p+1} f^T N f)` with the
/// norm of the field's parity, and `max |r^{p/2} f|`.
pub fn scaled_norms(scheme: &SbpScheme, field: &[f64], parity: Parity) -> (f64, f64) {
    let norm = match parity {
        Parity::Even => scheme.w(),
        Parity::Odd => scheme.wtilde(),
    };
    let l2 = sqrt(scheme.energy_scale() * norm.dot(field, field));
    let grid = scheme.grid();
    let half_p = grid.p() as f64 / 2.0;
    let max = field.iter().enumerate().fold(0.0, |m: f64, (k, &x)| {
        let r = grid.r(k);
        let v = if r == 0.0 { 0.0 } else { abs(libm::pow(r, half_p) * x) };
        if v > m {
            v
        } else {
            m
        }
    });
    (l2, max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormKind {
    L2Energy,
    MaxScaled,
}

impl NormKind {
    pub const fn name(self) -> &'static str {
        match self {
            NormKind::L2Energy => "l2_energy",
            NormKind::MaxScaled => "max_scaled",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceConfig {
    pub variant: Variant,
    pub kind: GridKind,
    pub p: u32,
    /// `2 M_0` of the coarsest level.
    pub base_half_steps: u32,
    pub levels: usize,
    pub radius: f64,
    pub lambda: f64,
    pub bc: BoundarySpec,
    pub bump: Bump,
    /// Snapshot spacing; comparison times must be multiples of it.
    pub snapshot_interval: f64,
    pub times: Vec<f64>,
    pub expected_order: f64,
    pub tolerance: f64,
    /// Compare running maxima of `|difference|` over this width in `r`
    /// instead of the differences themselves.
    pub envelope: Option<f64>,
}

impl ConvergenceConfig {
    pub fn refinement(&self) -> u32 {
        self.kind.refinement()
    }

    pub fn base_grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.kind, self.base_half_steps, self.radius, self.p)
    }

    fn interval(&self) -> f64 {
        self.snapshot_interval
    }

    fn check(&self) -> Result<()> {
        if self.levels < 3 {
            return Err(Error::InvalidParameter("at least three levels are needed"));
        }
        if !(self.snapshot_interval > 0.0) {
            return Err(Error::InvalidParameter("snapshot interval must be positive"));
        }
        if self.times.is_empty() {
            return Err(Error::InvalidParameter("no comparison times"));
        }
        for &t in &self.times {
            let k = t / self.interval();
            if !(t > 0.0) || abs(k - round(k)) > 1e-9 {
                return Err(Error::InvalidParameter("comparison times must be positive multiples of the snapshot interval"));
            }
        }
        Ok(())
    }
}

/// Snapshots of one resolution.
#[derive(Clone, Debug)]
pub struct LevelRun {
    pub level: usize,
    pub scheme: SbpScheme,
    pub snapshots: Vec<Snapshot>,
}

/// Evolve refinement level `level` with a time step `q^level` times smaller
/// than the coarse one, so every level samples the same times.
pub fn run_level(config: &ConvergenceConfig, level: usize) -> Result<LevelRun> {
    config.check()?;
    let base = config.base_grid()?;
    let q = config.refinement();
    let grid = base.refine(q.pow(level as u32))?;
    let method = config.variant.method();
    let table = WeightTable::build(method, config.p, config.kind, default_i_star(method, config.p, grid.last_index()))?;
    let scheme = build_scheme(config.variant, &grid, &table)?;
    let interval = config.interval();
    let coarse_dt = interval / ceil(interval / (config.lambda * base.spacing()) - 1e-9);
    let t_end = config.times.iter().fold(0.0, |a: f64, &b| a.max(b));
    let evo = EvolutionConfig {
        lambda: config.lambda,
        t_end,
        bump: config.bump,
        snapshot_interval: interval,
        energy_stride: usize::MAX,
        dt: Some(coarse_dt / powi(q as f64, level as i32)),
    };
    let out = evolve(&scheme, &config.bc, &evo)?;
    let snapshots = out
        .snapshots
        .into_iter()
        .filter(|s| config.times.iter().any(|&t| abs(s.t - t) < 1e-9 * config.radius))
        .collect();
    Ok(LevelRun { level, scheme, snapshots })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RichardsonRow {
    pub t: f64,
    pub norm: NormKind,
    /// Pair of levels `(l, l+1)` whose difference is the coarser one.
    pub pair: usize,
    /// Norm of `e_k` estimated from levels `l, l+1`.
    pub e_lo: f64,
    /// Norm of `e_k` estimated from levels `l+1, l+2`.
    pub e_hi: f64,
    /// `|u_l - u_{l+1}| / |u_{l+1} - u_{l+2}|`.
    pub ratio: f64,
    /// `log(ratio) / log(q)`.
    pub order: f64,
    /// Largest pointwise gap between the two `e_k` estimates relative to
    /// the largest estimate.
    pub pointwise_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RichardsonReport {
    pub rows: Vec<RichardsonRow>,
    /// `(norm, fitted order)`: mean of the per-time orders.
    pub fitted: Vec<(NormKind, f64)>,
    pub expected_order: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl RichardsonReport {
    pub fn fitted_order(&self, norm: NormKind) -> f64 {
        self.fitted.iter().find(|f| f.0 == norm).map_or(f64::NAN, |f| f.1)
    }
}

fn envelope(grid: &GridSpec, d: &[f64], width: f64) -> Vec<f64> {
    let half = width / 2.0;
    (0..d.len())
        .map(|k| {
            let r = grid.r(k);
            d.iter()
                .enumerate()
                .filter(|(j, _)| abs(grid.r(*j) - r) <= half)
                .fold(0.0, |m: f64, (_, &x)| m.max(abs(x)))
        })
        .collect()
}

/// Richardson analysis of precomputed levels (coarsest first).
pub fn richardson(config: &ConvergenceConfig, runs: &[LevelRun]) -> Result<RichardsonReport> {
    config.check()?;
    if runs.len() < 3 {
        return Err(Error::InvalidParameter("at least three levels are needed"));
    }
    let q = config.refinement();
    let coarse = &runs[0].scheme;
    let cg = *coarse.grid();
    for (l, run) in runs.iter().enumerate() {
        let g = run.scheme.grid();
        if g.kind() != cg.kind() || g.half_steps() != cg.half_steps() * q.pow(l as u32) || g.radius() != cg.radius() {
            return Err(Error::MisalignedGrids);
        }
    }
    let k = config.expected_order;
    let shrink = 1.0 - libm::pow(q as f64, -k);
    let mut rows = Vec::new();
    for &t in &config.times {
        let fields: Vec<Vec<f64>> = runs
            .iter()
            .enumerate()
            .map(|(l, run)| {
                let snap = run
                    .snapshots
                    .iter()
                    .find(|s| abs(s.t - t) < 1e-9 * config.radius)
                    .ok_or(Error::InvalidParameter("missing snapshot"))?;
                let factor = q.pow(l as u32);
                Ok((0..cg.len()).map(|c| snap.state.pi[cg.aligned_position(c, factor)]).collect())
            })
            .collect::<Result<_>>()?;
        let diffs: Vec<Vec<f64>> = fields
            .windows(2)
            .map(|w| {
                let d: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| a - b).collect();
                match config.envelope {
                    Some(width) => envelope(&cg, &d, width),
                    None => d,
                }
            })
            .collect();
        for pair in 0..diffs.len() - 1 {
            let h_lo = runs[pair].scheme.grid().spacing();
            let h_hi = runs[pair + 1].scheme.grid().spacing();
            let (a, b) = (&diffs[pair], &diffs[pair + 1]);
            let scale_lo = 1.0 / (libm::pow(h_lo, k) * shrink);
            let scale_hi = 1.0 / (libm::pow(h_hi, k) * shrink);
            let gap = a.iter().zip(b).fold(0.0, |m: f64, (x, y)| m.max(abs(x * scale_lo - y * scale_hi)));
            let top = a.iter().chain(b.iter()).fold(0.0, |m: f64, x| m.max(abs(*x)));
            let na = scaled_norms(coarse, a, Parity::Even);
            let nb = scaled_norms(coarse, b, Parity::Even);
            for (norm, x, y) in [(NormKind::L2Energy, na.0, nb.0), (NormKind::MaxScaled, na.1, nb.1)] {
                let ratio = x / y;
                rows.push(RichardsonRow {
                    t,
                    norm,
                    pair,
                    e_lo: x * scale_lo,
                    e_hi: y * scale_hi,
                    ratio,
                    order: ln(ratio) / ln(q as f64),
                    pointwise_gap: gap / (top * scale_lo.max(scale_hi)),
                });
            }
        }
    }
    let mut fitted = Vec::new();
    let mut passed = true;
    for norm in [NormKind::L2Energy, NormKind::MaxScaled] {
        let orders: Vec<f64> = rows.iter().filter(|r| r.norm == norm).map(|r| r.order).collect();
        let mean = orders.iter().sum::<f64>() / orders.len() as f64;
        passed &= mean.is_finite() && abs(mean - config.expected_order) <= config.tolerance;
        fitted.push((norm, mean));
    }
    Ok(RichardsonReport { rows, fitted, expected_order: config.expected_order, tolerance: config.tolerance, passed })
}

/// Run every level in sequence and analyse them.
pub fn self_convergence(config: &ConvergenceConfig) -> Result<RichardsonReport> {
    let runs: Vec<LevelRun> = (0..config.levels).map(|l| run_level(config, l)).collect::<Result<_>>()?;
    richardson(config, &runs)
}

/// Drift of `E_hat_b` away from its predicted value.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    /// `(t, |E_b - E_pred| / E_b(0))` per sample.
    pub relative: Vec<(f64, f64)>,
    pub max_relative: f64,
    /// Largest drift over the first half of the run.
    pub half_relative: f64,
    /// `max_relative / half_relative`: about 2 for linear growth.
    pub growth_ratio: f64,
    /// Least-squares slope of drift against `t` through the origin.
    pub slope: f64,
}

impl DriftReport {
    /// Growth no faster than linear in `t`.
    pub fn at_most_linear(&self) -> bool {
        !(self.growth_ratio > 2.5)
    }
}

pub fn energy_drift_check(trace: &EnergyTrace) -> DriftReport {
    let e0 = trace.samples.first().map_or(1.0, |s| s.e_hat_b);
    let relative: Vec<(f64, f64)> =
        trace.samples.iter().map(|s| (s.t, abs(s.e_hat_b - s.e_pred) / e0)).collect();
    let t_end = relative.last().map_or(0.0, |r| r.0);
    let max_relative = relative.iter().fold(0.0, |m: f64, r| m.max(r.1));
    let half_relative = relative.iter().filter(|r| r.0 <= t_end / 2.0).fold(0.0, |m: f64, r| m.max(r.1));
    let growth_ratio = if half_relative > 0.0 { max_relative / half_relative } else { f64::NAN };
    let (num, den) = relative.iter().fold((0.0, 0.0), |(a, b), r| (a + r.0 * r.1, b + r.0 * r.0));
    let slope = if den > 0.0 { num / den } else { 0.0 };
    DriftReport { relative, max_relative, half_relative, growth_ratio, slope }
}

/// Scheme on `grid` with freshly built weights.
pub fn scheme_for(variant: Variant, grid: &GridSpec) -> Result<SbpScheme> {
    let method = variant.method();
    let table = WeightTable::build(method, grid.p(), grid.kind(), default_i_star(method, grid.p(), grid.last_index()))?;
    build_scheme(variant, grid, &table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::Profile;

    fn config(variant: Variant, kind: GridKind, base: u32, order: f64) -> ConvergenceConfig {
        ConvergenceConfig {
            variant,
            kind,
            p: 2,
            base_half_steps: base,
            levels: 3,
            radius: 1.0,
            lambda: 0.25,
            bc: BoundarySpec::PiDerivative { rho: 1.0, mu: 1.0 },
            bump: Bump { center: 0.5, width: 0.25, amplitude: 1.0, profile: Profile::Polynomial(8) },
            snapshot_interval: 1.0 / 16.0,
            times: vec![0.0625, 0.125, 0.1875],
            expected_order: order,
            tolerance: 0.15,
            envelope: None,
        }
    }

    #[test]
    fn norms_of_simple_fields() {
        let grid = GridSpec::centred(16, 1.0, 2).unwrap();
        let scheme = scheme_for(Variant::Evans, &grid).unwrap();
        let zero = vec![0.0; grid.len()];
        assert_eq!(scaled_norms(&scheme, &zero, Parity::Even), (0.0, 0.0));
        let mut ind = zero.clone();
        ind[16] = 1.0;
        let (l2, max) = scaled_norms(&scheme, &ind, Parity::Even);
        let h = grid.spacing();
        let table = WeightTable::build(crate::weights::Method::Evans, 2, GridKind::Centred, 16).unwrap();
        let w_m = table.wbar()[16] * 16.0f64.powi(2);
        assert!((l2 * l2 - h * h * h * w_m / 2.0).abs() < 1e-15);
        assert!((max - 1.0).abs() < 1e-15);
        let scaled: Vec<f64> = ind.iter().map(|x| -3.0 * x).collect();
        let (l2s, maxs) = scaled_norms(&scheme, &scaled, Parity::Even);
        assert!((l2s - 3.0 * l2).abs() < 1e-15 && (maxs - 3.0 * max).abs() < 1e-15);
    }

    #[test]
    fn second_order_before_the_boundary() {
        let report = self_convergence(&config(Variant::Sbp2, GridKind::Centred, 96, 2.0)).unwrap();
        assert!(report.passed, "{:?}", report.fitted);
        assert_eq!(report.rows.len(), 6);
    }

    #[test]
    fn fourth_order_before_the_boundary() {
        let report = self_convergence(&config(Variant::Sbp41, GridKind::Staggered, 81, 4.0)).unwrap();
        assert!(report.passed, "{:?}", report.fitted);
    }

    #[test]
    fn misaligned_levels_are_rejected() {
        let cfg = config(Variant::Sbp2, GridKind::Centred, 64, 2.0);
        let mut runs: Vec<LevelRun> = (0..3).map(|l| run_level(&cfg, l).unwrap()).collect();
        runs.swap(1, 2);
        assert_eq!(richardson(&cfg, &runs).unwrap_err(), Error::MisalignedGrids);
    }

    #[test]
    fn bad_configs() {
        let mut cfg = config(Variant::Sbp2, GridKind::Centred, 64, 2.0);
        cfg.levels = 2;
        assert!(self_convergence(&cfg).is_err());
        let mut cfg = config(Variant::Sbp2, GridKind::Centred, 64, 2.0);
        cfg.times = vec![0.1];
        assert!(self_convergence(&cfg).is_err());
    }

    #[test]
    fn drift_of_a_linear_ramp() {
        use crate::evolution::EnergySample;
        let samples = (0..=10)
            .map(|j| {
                let t = j as f64;
                EnergySample { t, e_hat: 1.0, e_hat_b: 1.0 - 1e-9 * t, e_pred: 1.0, boundary_product: 0.0 }
            })
            .collect();
        let report = energy_drift_check(&EnergyTrace { samples });
        assert!((report.max_relative - 1e-8).abs() < 1e-15);
        assert!((report.growth_ratio - 2.0).abs() < 1e-6);
        assert!((report.slope - 1e-9).abs() < 1e-15);
        assert!(report.at_most_linear());
    }
}
