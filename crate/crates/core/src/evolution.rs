//! Method-of-lines evolution `u' = P D u` with classical RK4.

use alloc::vec::Vec;

use crate::boundary::{boundary_product, build_projector, discrete_energy, energy_rate, BoundarySpec, Projector};
use crate::grid::{FieldPair, GridSpec};
use crate::math::{abs, ceil, exp, powi};
use crate::operators::SbpScheme;
use crate::{Error, Result};

/// Shape of the initial pulse as a function of `z = (r - r_c)/width`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// `exp(-1/(1 - z^2))`.
    Exponential,
    /// `(1 - z^2)^k`, of class `C^{k-1}`.
    Polynomial(u32),
}

/// Compactly supported initial pulse in `pi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
    pub profile: Profile,
}

impl Bump {
    /// `r_c = R/2`, width `R/8`, amplitude 1, exponential profile.
    pub fn default_for(radius: f64) -> Self {
        Bump { center: radius / 2.0, width: radius / 8.0, amplitude: 1.0, profile: Profile::Exponential }
    }

    pub fn value(&self, r: f64) -> f64 {
        let z = (r - self.center) / self.width;
        if abs(z) >= 1.0 {
            return 0.0;
        }
        let y = 1.0 - z * z;
        self.amplitude
            * match self.profile {
                Profile::Exponential => exp(-1.0 / y),
                Profile::Polynomial(k) => powi(y, k as i32),
            }
    }
}

/// `Pi_i = A f(z)` with `z = (r_i - r_c)/width` and `f` the bump profile, `Psi = 0`.
pub fn initial_bump(grid: &GridSpec, bump: &Bump) -> Result<FieldPair> {
    if !(bump.width > 0.0) || !(bump.center - bump.width > 0.0) || !(bump.center + bump.width < grid.radius()) {
        return Err(Error::SupportTouchesBoundary);
    }
    let mut state = FieldPair::zeros(grid);
    for (k, x) in state.pi.iter_mut().enumerate() {
        *x = bump.value(grid.r(k));
    }
    Ok(state)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionConfig {
    /// Courant factor `dt / h`.
    pub lambda: f64,
    pub t_end: f64,
    pub bump: Bump,
    /// Time between snapshots; steps are sized to land on these times.
    pub snapshot_interval: f64,
    /// Record energies every this many steps (and at every snapshot).
    pub energy_stride: usize,
    /// Nominal step overriding `lambda h`.
    pub dt: Option<f64>,
}

impl EvolutionConfig {
    /// `lambda = 1/4`, `t_end = 2R`, default bump, snapshots every `R/8`.
    pub fn new(radius: f64) -> Self {
        EvolutionConfig {
            lambda: 0.25,
            t_end: 2.0 * radius,
            bump: Bump::default_for(radius),
            snapshot_interval: radius / 8.0,
            energy_stride: 1,
            dt: None,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter("lambda must be positive"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter("t_end must be positive"));
        }
        if !(self.snapshot_interval > 0.0) {
            return Err(Error::InvalidParameter("snapshot interval must be positive"));
        }
        if matches!(self.dt, Some(dt) if !(dt > 0.0)) {
            return Err(Error::InvalidParameter("dt must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    pub e_hat: f64,
    pub e_hat_b: f64,
    /// `E_hat_b(0)` plus the integrated predicted rate.
    pub e_pred: f64,
    pub boundary_product: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyTrace {
    pub samples: Vec<EnergySample>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub state: FieldPair,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionOutput {
    pub state: FieldPair,
    pub trace: EnergyTrace,
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
}

/// `out = P (h^{-1} D~ Psi, h^{-1} D Pi)`.
pub fn rhs_into(scheme: &SbpScheme, projector: &Projector, state: &FieldPair, out: &mut FieldPair) {
    let inv_h = 1.0 / scheme.grid().spacing();
    scheme.dtilde().apply(&state.psi, inv_h, &mut out.pi);
    scheme.d().apply(&state.pi, inv_h, &mut out.psi);
    projector.apply(out);
}

pub fn rhs(scheme: &SbpScheme, projector: &Projector, state: &FieldPair) -> FieldPair {
    let mut out = FieldPair::zeros(scheme.grid());
    rhs_into(scheme, projector, state, &mut out);
    out
}

/// RK4 integrator with reusable stage storage.
pub struct Stepper<'a> {
    scheme: &'a SbpScheme,
    projector: Projector,
    spec: BoundarySpec,
    k: [FieldPair; 4],
    stage: FieldPair,
}

impl<'a> Stepper<'a> {
    pub fn new(scheme: &'a SbpScheme, spec: &BoundarySpec) -> Result<Self> {
        let projector = build_projector(scheme, spec)?;
        let z = FieldPair::zeros(scheme.grid());
        Ok(Stepper {
            scheme,
            projector,
            spec: *spec,
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            stage: z,
        })
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    /// Advance `state` by `dt`; `predicted` is advanced with the same
    /// stages using the predicted energy rate.
    pub fn step(&mut self, state: &mut FieldPair, dt: f64, predicted: &mut f64) {
        let (s, p) = (self.scheme, &self.projector);
        let mut rates = [0.0; 4];
        rates[0] = energy_rate(s, state, &self.spec);
        rhs_into(s, p, state, &mut self.k[0]);
        for (j, c) in [(1usize, 0.5), (2, 0.5), (3, 1.0)] {
            self.stage.clone_from(state);
            self.stage.axpy(c * dt, &self.k[j - 1]);
            rates[j] = energy_rate(s, &self.stage, &self.spec);
            rhs_into(s, p, &self.stage, &mut self.k[j]);
        }
        for (j, w) in [(0usize, 1.0), (1, 2.0), (2, 2.0), (3, 1.0)] {
            state.axpy(w * dt / 6.0, &self.k[j]);
        }
        *predicted += dt / 6.0 * (rates[0] + 2.0 * rates[1] + 2.0 * rates[2] + rates[3]);
    }
}

/// One RK4 step of the projected system.
pub fn rk4_step(scheme: &SbpScheme, spec: &BoundarySpec, state: &FieldPair, dt: f64) -> Result<FieldPair> {
    let mut stepper = Stepper::new(scheme, spec)?;
    let mut next = state.clone();
    let mut pred = 0.0;
    stepper.step(&mut next, dt, &mut pred);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::NonFinite { t: dt })
    }
}

fn sample(scheme: &SbpScheme, spec: &BoundarySpec, state: &FieldPair, t: f64, e_pred: f64) -> EnergySample {
    let (e_hat, e_hat_b) = discrete_energy(scheme, state, spec);
    EnergySample { t, e_hat, e_hat_b, e_pred, boundary_product: boundary_product(scheme, state) }
}

/// Evolve the default bump (or `config.bump`) to `t_end`.
pub fn evolve(scheme: &SbpScheme, spec: &BoundarySpec, config: &EvolutionConfig) -> Result<EvolutionOutput> {
    let initial = initial_bump(scheme.grid(), &config.bump)?;
    evolve_from(scheme, spec, config, initial)
}

/// Evolve given initial data, projected onto the boundary condition first.
pub fn evolve_from(
    scheme: &SbpScheme,
    spec: &BoundarySpec,
    config: &EvolutionConfig,
    mut state: FieldPair,
) -> Result<EvolutionOutput> {
    config.check()?;
    if state.len() != scheme.grid().len() {
        return Err(Error::InvalidParameter("initial data does not match the grid"));
    }
    let mut stepper = Stepper::new(scheme, spec)?;
    stepper.projector.apply(&mut state);
    let nominal = config.dt.unwrap_or(config.lambda * scheme.grid().spacing());

    let first = sample(scheme, spec, &state, 0.0, 0.0);
    let mut e_pred = first.e_hat_b;
    let mut trace = EnergyTrace { samples: alloc::vec![EnergySample { e_pred, ..first }] };
    let mut snapshots = alloc::vec![Snapshot { t: 0.0, state: state.clone() }];
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut segment = 1usize;
    while t < config.t_end {
        let target = (segment as f64 * config.snapshot_interval).min(config.t_end);
        let length = target - t;
        let n = ceil(length / nominal - 1e-9).max(1.0) as usize;
        let dt = length / n as f64;
        let t0 = t;
        for j in 1..=n {
            stepper.step(&mut state, dt, &mut e_pred);
            steps += 1;
            t = if j == n { target } else { t0 + j as f64 * dt };
            if !state.is_finite() {
                return Err(Error::NonFinite { t });
            }
            if j == n || steps % config.energy_stride.max(1) == 0 {
                trace.samples.push(sample(scheme, spec, &state, t, e_pred));
            }
        }
        snapshots.push(Snapshot { t, state: state.clone() });
        segment += 1;
    }
    Ok(EvolutionOutput { state, trace, snapshots, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::scheme_for;
    use crate::grid::GridKind;
    use crate::operators::Variant;

    fn poly_bump() -> Bump {
        Bump { center: 0.5, width: 0.25, amplitude: 1.0, profile: Profile::Polynomial(8) }
    }

    #[test]
    fn bump_values() {
        let b = Bump::default_for(1.0);
        assert!((b.value(0.5) - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(b.value(0.625), 0.0);
        assert_eq!(b.value(0.1), 0.0);
        let grid = GridSpec::centred(16, 1.0, 2).unwrap();
        let bad = Bump { center: 0.1, width: 0.2, amplitude: 1.0, profile: Profile::Exponential };
        assert_eq!(initial_bump(&grid, &bad), Err(Error::SupportTouchesBoundary));
        let u = initial_bump(&grid, &b).unwrap();
        assert!(u.psi.iter().all(|&x| x == 0.0));
        assert!((u.pi[8] - (-1.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn constant_pi_is_static_in_the_interior() {
        let grid = GridSpec::centred(32, 1.0, 2).unwrap();
        for variant in Variant::ALL {
            let scheme = scheme_for(variant, &grid).unwrap();
            let proj = build_projector(&scheme, &BoundarySpec::MaxDissipative { rho: 1.0, sigma: 0.0 }).unwrap();
            let mut u = FieldPair::zeros(&grid);
            u.pi.iter_mut().for_each(|x| *x = 1.0);
            let du = rhs(&scheme, &proj, &u);
            assert!(du.psi[..28].iter().all(|x| x.abs() < 1e-12), "{variant}");
        }
    }

    #[test]
    fn linear_psi_gives_one_plus_p() {
        let grid = GridSpec::staggered(81, 1.0, 3).unwrap();
        let scheme = scheme_for(Variant::Sbp2, &grid).unwrap();
        let proj = build_projector(&scheme, &BoundarySpec::MaxDissipative { rho: 1.0, sigma: 0.0 }).unwrap();
        let mut u = FieldPair::zeros(&grid);
        for k in 0..grid.len() {
            u.psi[k] = grid.r(k);
        }
        let du = rhs(&scheme, &proj, &u);
        for k in 0..grid.len() - 2 {
            assert!((du.pi[k] - 4.0).abs() < 1e-10, "row {k}: {}", du.pi[k]);
        }
    }

    #[test]
    fn centred_origin_psi_stays_zero() {
        let grid = GridSpec::centred(48, 1.0, 2).unwrap();
        for variant in Variant::ALL {
            let scheme = scheme_for(variant, &grid).unwrap();
            let mut c = EvolutionConfig::new(1.0);
            c.t_end = 0.75;
            c.bump = poly_bump();
            let out = evolve(&scheme, &BoundarySpec::PiDerivative { rho: 1.0, mu: 1.0 }, &c).unwrap();
            assert!(out.snapshots.iter().all(|s| s.state.psi[0] == 0.0), "{variant}");
        }
    }

    #[test]
    fn rk4_step_is_linear() {
        let grid = GridSpec::staggered(41, 1.0, 2).unwrap();
        let scheme = scheme_for(Variant::Sbp42, &grid).unwrap();
        let spec = BoundarySpec::PsiDerivative { sigma: 1.0, nu: 1.0 };
        let proj = build_projector(&scheme, &spec).unwrap();
        let mut u = FieldPair::zeros(&grid);
        let mut v = FieldPair::zeros(&grid);
        for k in 0..grid.len() {
            u.pi[k] = (k as f64 * 0.37).sin();
            v.psi[k] = (k as f64 * 0.11).cos();
        }
        proj.apply(&mut u);
        proj.apply(&mut v);
        let dt = 0.25 * grid.spacing();
        let mut w = u.clone();
        w.axpy(-3.0, &v);
        let su = rk4_step(&scheme, &spec, &u, dt).unwrap();
        let sv = rk4_step(&scheme, &spec, &v, dt).unwrap();
        let sw = rk4_step(&scheme, &spec, &w, dt).unwrap();
        for k in 0..grid.len() {
            assert!((sw.pi[k] - (su.pi[k] - 3.0 * sv.pi[k])).abs() < 1e-12);
            assert!((sw.psi[k] - (su.psi[k] - 3.0 * sv.psi[k])).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_condition_is_invisible_before_the_pulse_arrives() {
        let grid = GridSpec::staggered(243, 1.0, 2).unwrap();
        let scheme = scheme_for(Variant::Sbp41, &grid).unwrap();
        let mut c = EvolutionConfig::new(1.0);
        c.t_end = 0.125;
        c.bump = poly_bump();
        let a = evolve(&scheme, &BoundarySpec::PiDerivative { rho: 1.0, mu: 1.0 }, &c).unwrap();
        let b = evolve(&scheme, &BoundarySpec::MaxDissipative { rho: 1.0, sigma: 1.0 }, &c).unwrap();
        let gap = a.state.pi.iter().zip(&b.state.pi).chain(a.state.psi.iter().zip(&b.state.psi));
        assert!(gap.fold(0.0, |m: f64, (x, y)| m.max((x - y).abs())) < 1e-10);
    }

    #[test]
    fn snapshots_land_on_interval_multiples() {
        let grid = GridSpec::centred(40, 1.0, 2).unwrap();
        let scheme = scheme_for(Variant::Sbp2, &grid).unwrap();
        let mut c = EvolutionConfig::new(1.0);
        c.t_end = 0.5;
        c.lambda = 0.3;
        let out = evolve(&scheme, &BoundarySpec::PiDerivative { rho: 1.0, mu: 1.0 }, &c).unwrap();
        let times: alloc::vec::Vec<f64> = out.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times, [0.0, 0.125, 0.25, 0.375, 0.5]);
        assert!(out.trace.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn derivative_condition_keeps_extended_energy() {
        for kind in [GridKind::Centred, GridKind::Staggered] {
            let grid = GridSpec::new(kind, if kind == GridKind::Centred { 128 } else { 129 }, 1.0, 2).unwrap();
            let scheme = scheme_for(Variant::Sbp2, &grid).unwrap();
            let mut c = EvolutionConfig::new(1.0);
            c.t_end = 2.0;
            c.bump = poly_bump();
            let out = evolve(&scheme, &BoundarySpec::PiDerivative { rho: 2.0, mu: 1.0 }, &c).unwrap();
            let e0 = out.trace.samples[0].e_hat_b;
            for s in &out.trace.samples {
                assert_eq!(s.e_pred, e0);
                assert!((s.e_hat_b - e0).abs() < 1e-4 * e0);
            }
        }
    }

    #[test]
    fn dissipative_energy_decreases() {
        let grid = GridSpec::centred(96, 1.0, 2).unwrap();
        let scheme = scheme_for(Variant::Sbp42, &grid).unwrap();
        let mut c = EvolutionConfig::new(1.0);
        c.t_end = 2.0;
        c.bump = poly_bump();
        let out = evolve(&scheme, &BoundarySpec::MaxDissipative { rho: 1.0, sigma: 1.0 }, &c).unwrap();
        let s = &out.trace.samples;
        assert!(s.windows(2).all(|w| w[1].e_hat <= w[0].e_hat));
        assert!(s.last().unwrap().e_hat < 0.05 * s[0].e_hat, "{}", s.last().unwrap().e_hat / s[0].e_hat);
        for x in s {
            assert!((x.e_hat - x.e_pred).abs() < 1e-4 * s[0].e_hat);
        }
    }
}
