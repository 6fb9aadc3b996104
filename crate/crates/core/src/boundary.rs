//! Outer boundary conditions, sign validation, and the projector
//! `P = 1 - W^{-1} L^T (L W^{-1} L^T)^{-1} L` that imposes them.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::FieldPair;
use crate::math::abs;
use crate::operators::SbpScheme;
use crate::{Error, Result};

/// Homogeneous condition at `r = R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundarySpec {
    /// `rho pi + sigma psi = 0`.
    MaxDissipative { rho: f64, sigma: f64 },
    /// `rho pi + mu pi' = 0`.
    PiDerivative { rho: f64, mu: f64 },
    /// `sigma psi + nu psi' = 0`.
    PsiDerivative { sigma: f64, nu: f64 },
    /// `rho pi + sigma psi + mu pi' + nu psi' = 0`; sign diagnosis only.
    General { rho: f64, sigma: f64, mu: f64, nu: f64 },
}

/// Energy behaviour guaranteed by a valid condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnergyBehaviour {
    Conserved,
    NonIncreasing,
}

impl BoundarySpec {
    /// `(rho, sigma, mu, nu)`, zero where the variant has no coefficient.
    pub fn coefficients(&self) -> [f64; 4] {
        match *self {
            BoundarySpec::MaxDissipative { rho, sigma } => [rho, sigma, 0.0, 0.0],
            BoundarySpec::PiDerivative { rho, mu } => [rho, 0.0, mu, 0.0],
            BoundarySpec::PsiDerivative { sigma, nu } => [0.0, sigma, 0.0, nu],
            BoundarySpec::General { rho, sigma, mu, nu } => [rho, sigma, mu, nu],
        }
    }

    fn with_coefficients(&self, c: [f64; 4]) -> Self {
        let [rho, sigma, mu, nu] = c;
        match self {
            BoundarySpec::MaxDissipative { .. } => BoundarySpec::MaxDissipative { rho, sigma },
            BoundarySpec::PiDerivative { .. } => BoundarySpec::PiDerivative { rho, mu },
            BoundarySpec::PsiDerivative { .. } => BoundarySpec::PsiDerivative { sigma, nu },
            BoundarySpec::General { .. } => BoundarySpec::General { rho, sigma, mu, nu },
        }
    }

    /// `s = rho mu + sigma nu`.
    pub fn s(&self) -> f64 {
        let [rho, sigma, mu, nu] = self.coefficients();
        rho * mu + sigma * nu
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundarySpec::MaxDissipative { .. } => "max_dissipative",
            BoundarySpec::PiDerivative { .. } => "pi_derivative",
            BoundarySpec::PsiDerivative { .. } => "psi_derivative",
            BoundarySpec::General { .. } => "general",
        }
    }

    fn has_derivative(&self) -> bool {
        let [_, _, mu, nu] = self.coefficients();
        mu != 0.0 || nu != 0.0
    }
}

/// A spec with normalised signs and its guaranteed energy behaviour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidatedBoundary {
    pub spec: BoundarySpec,
    pub behaviour: EnergyBehaviour,
}

/// Check the sign conditions `rho, sigma, mu, nu >= 0` (after an overall
/// sign flip) and `s > 0` whenever a derivative enters.
pub fn validate_bc(spec: &BoundarySpec) -> Result<ValidatedBoundary> {
    let mut c = spec.coefficients();
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("boundary coefficients must be finite"));
    }
    if c.iter().all(|&x| x <= 0.0) {
        for x in &mut c {
            *x = -*x;
        }
    }
    if c.iter().any(|&x| x < 0.0) || c.iter().all(|&x| x == 0.0) {
        return Err(Error::IllPosedSigns);
    }
    let spec = spec.with_coefficients(c);
    let [rho, sigma, mu, nu] = c;
    match spec {
        BoundarySpec::PiDerivative { .. } if mu == 0.0 => return Err(Error::DegenerateS),
        BoundarySpec::PsiDerivative { .. } if nu == 0.0 => return Err(Error::DegenerateS),
        _ => {}
    }
    let behaviour = if spec.has_derivative() {
        if !(spec.s() > 0.0) {
            return Err(Error::DegenerateS);
        }
        if mu * sigma == 0.0 && nu * rho == 0.0 {
            EnergyBehaviour::Conserved
        } else {
            EnergyBehaviour::NonIncreasing
        }
    } else if rho * sigma == 0.0 {
        EnergyBehaviour::Conserved
    } else {
        EnergyBehaviour::NonIncreasing
    };
    Ok(ValidatedBoundary { spec, behaviour })
}

/// Rank-one projector onto `L u = 0`, orthogonal in the energy inner
/// product.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    l_pi: Vec<(usize, f64)>,
    l_psi: Vec<(usize, f64)>,
    z_pi: Vec<(usize, f64)>,
    z_psi: Vec<(usize, f64)>,
    inv_lz: f64,
}

fn sparse(dense: &[f64]) -> Vec<(usize, f64)> {
    dense.iter().enumerate().filter(|e| *e.1 != 0.0).map(|(k, &x)| (k, x)).collect()
}

fn dot(sp: &[(usize, f64)], x: &[f64]) -> f64 {
    sp.iter().map(|&(k, a)| a * x[k]).sum()
}

/// Build the projector for a derivative or dissipative condition.
///
/// Only the structure of `L` is checked here; sign conditions are the
/// business of [`validate_bc`].
pub fn build_projector(scheme: &SbpScheme, spec: &BoundarySpec) -> Result<Projector> {
    let n = scheme.grid().len();
    let m = n - 1;
    let h = scheme.grid().spacing();
    let mut l_pi = vec![0.0; n];
    let mut l_psi = vec![0.0; n];
    match *spec {
        BoundarySpec::MaxDissipative { rho, sigma } => {
            l_pi[m] = rho;
            l_psi[m] = sigma;
        }
        BoundarySpec::PiDerivative { rho, mu } => {
            for &(j, a) in scheme.d().row(m) {
                l_pi[j] += mu * a / h;
            }
            l_pi[m] += rho;
        }
        BoundarySpec::PsiDerivative { sigma, nu } => {
            for &(j, a) in scheme.dtilde().row(m) {
                l_psi[j] += nu * a / h;
            }
            l_psi[m] += sigma;
        }
        BoundarySpec::General { .. } => return Err(Error::UnsupportedBoundary),
    }
    let z_pi: Vec<f64> = l_pi.iter().zip(scheme.w().diag()).map(|(l, w)| l / w).collect();
    let z_psi = scheme.wtilde().solve(&l_psi);
    let lz: f64 = l_pi.iter().zip(&z_pi).chain(l_psi.iter().zip(&z_psi)).map(|(a, b)| a * b).sum();
    if !(lz.is_finite() && lz > 0.0) {
        return Err(Error::SingularNormal);
    }
    Ok(Projector { l_pi: sparse(&l_pi), l_psi: sparse(&l_psi), z_pi: sparse(&z_pi), z_psi: sparse(&z_psi), inv_lz: 1.0 / lz })
}

impl Projector {
    /// `L u`.
    pub fn constraint(&self, state: &FieldPair) -> f64 {
        dot(&self.l_pi, &state.pi) + dot(&self.l_psi, &state.psi)
    }

    /// Scale of `|L| |u|`, for judging the size of `L u`.
    pub fn constraint_scale(&self, state: &FieldPair) -> f64 {
        let s = |sp: &[(usize, f64)], x: &[f64]| sp.iter().map(|&(k, a)| abs(a * x[k])).sum::<f64>();
        s(&self.l_pi, &state.pi) + s(&self.l_psi, &state.psi)
    }

    /// `u <- P u`.
    pub fn apply(&self, state: &mut FieldPair) {
        let c = self.constraint(state) * self.inv_lz;
        if c == 0.0 {
            return;
        }
        for &(k, z) in &self.z_pi {
            state.pi[k] -= c * z;
        }
        for &(k, z) in &self.z_psi {
            state.psi[k] -= c * z;
        }
    }

    /// Positions touched by the correction, as `(pi positions, psi positions)`.
    pub fn support(&self) -> (Vec<usize>, Vec<usize>) {
        (self.z_pi.iter().map(|e| e.0).collect(), self.z_psi.iter().map(|e| e.0).collect())
    }
}

/// `(u, v)` in the normalised energy inner product.
pub fn energy_inner(scheme: &SbpScheme, u: &FieldPair, v: &FieldPair) -> f64 {
    scheme.w().dot(&u.pi, &v.pi) + scheme.wtilde().dot(&u.psi, &v.psi)
}

/// `(E_hat, E_hat_b)`.
///
/// `E_hat = h^{p+1} (Pi^T W Pi + Psi^T W~ Psi) / 2`; for derivative
/// conditions with `s > 0`, `E_hat_b` adds
/// `chi R^p (mu Psi_M + nu Pi_M)^2 / (2 s)`.
pub fn discrete_energy(scheme: &SbpScheme, state: &FieldPair, spec: &BoundarySpec) -> (f64, f64) {
    let e = 0.5 * scheme.energy_scale() * energy_inner(scheme, state, state);
    let s = spec.s();
    if !spec.has_derivative() || !(s > 0.0) {
        return (e, e);
    }
    let [_, _, mu, nu] = spec.coefficients();
    let m = scheme.last();
    let b = mu * state.psi[m] + nu * state.pi[m];
    (e, e + scheme.chi() * scheme.boundary_scale() * b * b / (2.0 * s))
}

/// `chi R^p Pi_M Psi_M`, the boundary term in `dE_hat/dt`.
pub fn boundary_product(scheme: &SbpScheme, state: &FieldPair) -> f64 {
    let m = scheme.last();
    scheme.chi() * scheme.boundary_scale() * state.pi[m] * state.psi[m]
}

/// Predicted rate of `E_hat_b` on the projected flow: the boundary product
/// for dissipative conditions (where `E_hat_b = E_hat`), zero for derivative
/// conditions with `s > 0`.
pub fn energy_rate(scheme: &SbpScheme, state: &FieldPair, spec: &BoundarySpec) -> f64 {
    if spec.has_derivative() && spec.s() > 0.0 {
        0.0
    } else {
        boundary_product(scheme, state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::scheme_for;
    use crate::grid::{GridKind, GridSpec};
    use crate::operators::Variant;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn specs() -> [BoundarySpec; 4] {
        [
            BoundarySpec::MaxDissipative { rho: 1.0, sigma: 2.0 },
            BoundarySpec::PiDerivative { rho: 1.0, mu: 1.0 },
            BoundarySpec::PsiDerivative { sigma: 0.5, nu: 1.0 },
            BoundarySpec::MaxDissipative { rho: 0.0, sigma: 1.0 },
        ]
    }

    fn random_state(grid: &GridSpec, rng: &mut ChaCha8Rng) -> FieldPair {
        let mut u = FieldPair::zeros(grid);
        for x in u.pi.iter_mut().chain(u.psi.iter_mut()) {
            *x = rng.gen_range(-1.0..1.0);
        }
        if grid.kind() == GridKind::Centred {
            u.psi[0] = 0.0;
        }
        u
    }

    #[test]
    fn sign_validation() {
        assert_eq!(validate_bc(&BoundarySpec::MaxDissipative { rho: 1.0, sigma: 1.0 }).unwrap().behaviour, EnergyBehaviour::NonIncreasing);
        assert_eq!(validate_bc(&BoundarySpec::MaxDissipative { rho: 1.0, sigma: 0.0 }).unwrap().behaviour, EnergyBehaviour::Conserved);
        assert_eq!(validate_bc(&BoundarySpec::PiDerivative { rho: 1.0, mu: 1.0 }).unwrap().behaviour, EnergyBehaviour::Conserved);
        let flipped = validate_bc(&BoundarySpec::MaxDissipative { rho: -1.0, sigma: -2.0 }).unwrap();
        assert_eq!(flipped.spec, BoundarySpec::MaxDissipative { rho: 1.0, sigma: 2.0 });
        assert_eq!(validate_bc(&BoundarySpec::MaxDissipative { rho: 1.0, sigma: -1.0 }), Err(Error::IllPosedSigns));
        assert_eq!(validate_bc(&BoundarySpec::PiDerivative { rho: 0.0, mu: 1.0 }), Err(Error::DegenerateS));
        assert_eq!(validate_bc(&BoundarySpec::General { rho: 0.0, sigma: 0.0, mu: 0.0, nu: 0.0 }), Err(Error::IllPosedSigns));
        let general = validate_bc(&BoundarySpec::General { rho: 1.0, sigma: 1.0, mu: 1.0, nu: 0.0 }).unwrap();
        assert_eq!(general.behaviour, EnergyBehaviour::NonIncreasing);
    }

    #[test]
    fn general_condition_has_no_projector() {
        let grid = GridSpec::centred(32, 1.0, 2).unwrap();
        let scheme = scheme_for(Variant::Sbp2, &grid).unwrap();
        let spec = BoundarySpec::General { rho: 1.0, sigma: 0.0, mu: 1.0, nu: 0.0 };
        assert_eq!(build_projector(&scheme, &spec), Err(Error::UnsupportedBoundary));
    }

    #[test]
    fn projector_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for variant in Variant::ALL {
            for kind in [GridKind::Staggered, GridKind::Centred] {
                let grid = GridSpec::new(kind, if kind == GridKind::Staggered { 65 } else { 64 }, 1.0, 2).unwrap();
                let scheme = scheme_for(variant, &grid).unwrap();
                for spec in specs() {
                    let proj = build_projector(&scheme, &spec).unwrap();
                    for _ in 0..10 {
                        let u = random_state(&grid, &mut rng);
                        let v = random_state(&grid, &mut rng);
                        let mut pu = u.clone();
                        proj.apply(&mut pu);
                        assert!(abs(proj.constraint(&pu)) <= 1e-13 * proj.constraint_scale(&u));
                        let mut ppu = pu.clone();
                        proj.apply(&mut ppu);
                        let idem = ppu.pi.iter().zip(&pu.pi).chain(ppu.psi.iter().zip(&pu.psi));
                        assert!(idem.fold(0.0, |m: f64, (a, b)| m.max(abs(a - b))) <= 1e-13);
                        let mut pv = v.clone();
                        proj.apply(&mut pv);
                        let lhs = energy_inner(&scheme, &pu, &v);
                        let rhs = energy_inner(&scheme, &u, &pv);
                        assert!(abs(lhs - rhs) <= 1e-13 * (1.0 + abs(lhs)), "{variant} {kind} {spec:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn projector_support_is_local() {
        let grid = GridSpec::staggered(129, 1.0, 3).unwrap();
        let scheme = scheme_for(Variant::Sbp2, &grid).unwrap();
        let proj = build_projector(&scheme, &BoundarySpec::MaxDissipative { rho: 1.0, sigma: 1.0 }).unwrap();
        let (pi, psi) = proj.support();
        assert_eq!(pi, [scheme.last()]);
        assert!(psi.iter().all(|&k| k + 3 > scheme.last()));
    }

    #[test]
    fn energy_rate_matches_semidiscrete_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for variant in Variant::ALL {
            let grid = GridSpec::centred(48, 1.5, 4).unwrap();
            let scheme = scheme_for(variant, &grid).unwrap();
            for spec in specs() {
                let proj = build_projector(&scheme, &spec).unwrap();
                let mut u = random_state(&grid, &mut rng);
                proj.apply(&mut u);
                let du = crate::evolution::rhs(&scheme, &proj, &u);
                // d/dt of E_hat_b along the flow, from the chain rule.
                let mut rate = scheme.energy_scale() * energy_inner(&scheme, &u, &du);
                let s = spec.s();
                if spec.has_derivative() && s > 0.0 {
                    let [_, _, mu, nu] = spec.coefficients();
                    let m = scheme.last();
                    let b = mu * u.psi[m] + nu * u.pi[m];
                    let db = mu * du.psi[m] + nu * du.pi[m];
                    rate += scheme.chi() * scheme.boundary_scale() * b * db / s;
                }
                let predicted = energy_rate(&scheme, &u, &spec);
                let scale = scheme.energy_scale() * energy_inner(&scheme, &u, &u) / grid.spacing();
                assert!(abs(rate - predicted) <= 1e-12 * scale, "{variant} {spec:?}: {rate} vs {predicted}");
            }
        }
    }

    #[test]
    fn dissipative_rate_is_non_positive_on_constraint() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let grid = GridSpec::staggered(63, 1.0, 2).unwrap();
        let scheme = scheme_for(Variant::Sbp42, &grid).unwrap();
        let spec = BoundarySpec::MaxDissipative { rho: 1.0, sigma: 2.0 };
        let proj = build_projector(&scheme, &spec).unwrap();
        for _ in 0..20 {
            let mut u = random_state(&grid, &mut rng);
            proj.apply(&mut u);
            assert!(energy_rate(&scheme, &u, &spec) <= 1e-15);
        }
    }

    #[test]
    fn derivative_energy_adds_boundary_term() {
        let grid = GridSpec::centred(16, 1.0, 2).unwrap();
        let scheme = scheme_for(Variant::Evans, &grid).unwrap();
        let mut u = FieldPair::zeros(&grid);
        u.psi[16] = 2.0;
        let (e, eb) = discrete_energy(&scheme, &u, &BoundarySpec::PiDerivative { rho: 2.0, mu: 1.0 });
        let expected = scheme.chi() * scheme.boundary_scale() * 4.0 / 4.0;
        assert!(abs(eb - e - expected) <= 1e-14);
        let (e2, eb2) = discrete_energy(&scheme, &u, &BoundarySpec::MaxDissipative { rho: 1.0, sigma: 1.0 });
        assert_eq!(e2, eb2);
        assert_eq!(e, e2);
    }
}
