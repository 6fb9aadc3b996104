//! One function per command. Each returns report lines and a list of
//! failed assertions; files go under the configured output directory.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radial_sbp::boundary::EnergyBehaviour;
use radial_sbp::convergence::{richardson, run_level, LevelRun, NormKind, RichardsonReport};
use radial_sbp::operators::{naive_operator_error, probe_generalized_evans, TestField};
use radial_sbp::weights::{default_i_star, Method};
use radial_sbp::{
    build_projector, build_scheme, delta_profile, energy_drift_check, evolve, truncation_scan, validate_bc, verify_sbp,
    BoundarySpec, ConvergenceConfig, EvolutionConfig, FieldPair, GridKind, GridSpec, Parity, SbpScheme, Variant,
    WeightTable,
};

use crate::config::{profile_name, Command, Phase, RunConfig};
use crate::formats;
use crate::CliError;

/// Environment variable naming the weight-table cache directory.
pub const DATA_ENV: &str = "SBP_RADIAL_DATA";

#[derive(Debug, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    /// `name: detail` for every failed assertion.
    pub failures: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn say(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.lines.push(format!("{} {name}: {detail}", if ok { "ok" } else { "FAIL" }));
        if !ok {
            self.failures.push(format!("{name}: {detail}"));
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn dispatch(config: &RunConfig) -> Result<Outcome, CliError> {
    match config.command {
        Command::Weights => weights(config),
        Command::Verify => verify(config),
        Command::Evolve => evolve_cmd(config),
        Command::Converge => converge(config),
        Command::Probe => probe(config),
    }
}

fn write_file(out: &mut Outcome, dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Io(path.clone(), e))?;
    out.files.push(path);
    Ok(())
}

/// Read a table from the cache directory, or build it and store it there.
pub fn load_or_build(method: Method, p: u32, kind: GridKind, i_star: u32) -> Result<WeightTable, CliError> {
    let Some(dir) = std::env::var_os(DATA_ENV).map(PathBuf::from) else {
        return Ok(WeightTable::build(method, p, kind, i_star)?);
    };
    let path = dir.join(formats::weights_file_name(method, p, kind, i_star));
    if let Ok(text) = std::fs::read_to_string(&path) {
        return formats::read_weight_table(&text);
    }
    let table = WeightTable::build(method, p, kind, i_star)?;
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(dir.clone(), e))?;
    std::fs::write(&path, formats::write_weight_table(&table)).map_err(|e| CliError::Io(path, e))?;
    Ok(table)
}

fn i_star_for(config: &RunConfig, method: Method) -> u32 {
    config.i_star.unwrap_or_else(|| default_i_star(method, config.p, config.m))
}

pub fn scheme(config: &RunConfig, variant: Variant, grid: &GridSpec) -> Result<SbpScheme, CliError> {
    let method = variant.method();
    let i_star = config.i_star.unwrap_or_else(|| default_i_star(method, grid.p(), grid.last_index()));
    let table = load_or_build(method, grid.p(), grid.kind(), i_star)?;
    Ok(build_scheme(variant, grid, &table)?)
}

fn weights(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let method = config.method.method();
    let i_star = i_star_for(config, method);
    let table = load_or_build(method, config.p, config.kind, i_star)?;
    let delta = delta_profile(&table);
    out.say(format!(
        "weights method={method} p={} kind={} i_star={i_star} chi={:.16e} definiteness={:?}",
        config.p,
        config.kind,
        table.chi(),
        table.definiteness()
    ));
    if let Some(k) = delta.position(i_star as f64).or_else(|| delta.len().checked_sub(1)) {
        let got = [delta.delta0.get(k), delta.delta1.get(k), delta.delta2.get(k)];
        for (a, (g, limit)) in got.iter().zip(delta.limits()).enumerate() {
            if let Some(g) = g {
                out.say(format!("delta{a}(i={}) = {g:.16e} (limit {limit:.16e})", delta.index(k)));
            }
        }
    }
    write_file(&mut out, &config.out, &formats::weights_file_name(method, config.p, config.kind, i_star), &formats::write_weight_table(&table))?;
    write_file(&mut out, &config.out, &formats::delta_file_name(method, config.p, config.kind, i_star), &formats::write_delta(&delta))?;
    Ok(out)
}

/// `(max |P P u - P u|, max |L P u| / (1 + |L||u|), max adjointness gap)`
/// over `samples` random state pairs.
pub fn projector_residuals(scheme: &SbpScheme, bc: &BoundarySpec, samples: usize, seed: u64) -> Result<[f64; 3], CliError> {
    let proj = build_projector(scheme, bc)?;
    let grid = scheme.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = |rng: &mut ChaCha8Rng| {
        let mut u = FieldPair::zeros(grid);
        for k in 0..grid.len() {
            u.pi[k] = rng.gen_range(-1.0..1.0);
            u.psi[k] = rng.gen_range(-1.0..1.0);
        }
        if grid.kind() == GridKind::Centred {
            u.psi[0] = 0.0;
        }
        u
    };
    let mut worst = [0.0f64; 3];
    for _ in 0..samples {
        let u = random(&mut rng);
        let v = random(&mut rng);
        let mut pu = u.clone();
        proj.apply(&mut pu);
        let mut ppu = pu.clone();
        proj.apply(&mut ppu);
        let idem = ppu.pi.iter().zip(&pu.pi).chain(ppu.psi.iter().zip(&pu.psi)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let lpu = proj.constraint(&pu).abs() / (1.0 + proj.constraint_scale(&u));
        let mut pv = v.clone();
        proj.apply(&mut pv);
        let lhs = radial_sbp::boundary::energy_inner(scheme, &pu, &v);
        let rhs = radial_sbp::boundary::energy_inner(scheme, &u, &pv);
        let adj = (lhs - rhs).abs() / (1.0 + lhs.abs());
        worst = [worst[0].max(idem), worst[1].max(lpu), worst[2].max(adj)];
    }
    Ok(worst)
}

/// Largest truncation error away from the outer boundary for `sin` (odd)
/// and `cos` (even) test fields.
fn interior_error(scheme: &SbpScheme, parity: Parity) -> f64 {
    let (f, df): (&dyn Fn(f64) -> f64, &dyn Fn(f64) -> f64) = match parity {
        Parity::Even => (&|r: f64| r.cos(), &|r: f64| -r.sin()),
        Parity::Odd => (&|r: f64| r.sin(), &|r: f64| r.cos()),
    };
    let err = truncation_scan(scheme, &TestField { parity, f, df });
    let end = err.len().saturating_sub(8);
    err[..end].iter().fold(0.0, |m: f64, e| m.max(e.abs()))
}

fn verify(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let variant = config.variant()?;
    let grid = config.grid()?;
    let s = scheme(config, variant, &grid)?;
    let sbp = verify_sbp(&s);
    out.check("sbp_residual", sbp <= 1e-12, format!("{sbp:.3e} (limit 1e-12)"));
    let [idem, lpu, adj] = projector_residuals(&s, &config.bc, config.samples, config.seed)?;
    out.check("projector_idempotent", idem <= 1e-13, format!("{idem:.3e}"));
    out.check("projector_constraint", lpu <= 1e-13, format!("{lpu:.3e}"));
    out.check("projector_self_adjoint", adj <= 1e-13, format!("{adj:.3e}"));
    let q = if config.kind == GridKind::Staggered { 3 } else { 2 };
    let fine = scheme(config, variant, &grid.refine(q)?)?;
    let order = variant.interior_order() as f64;
    for parity in [Parity::Even, Parity::Odd] {
        let (a, b) = (interior_error(&s, parity), interior_error(&fine, parity));
        let observed = (a / b).ln() / (q as f64).ln();
        out.check(
            &format!("accuracy_{}", if parity == Parity::Even { "even" } else { "odd" }),
            observed > order - 0.3,
            format!("errors {a:.3e} -> {b:.3e}, observed order {observed:.3} (expected {order})"),
        );
    }
    write_file(&mut out, &config.out, &format!("{}_scheme.csv", config.tag), &formats::write_scheme(&s))?;
    Ok(out)
}

fn evolve_cmd(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let variant = config.variant()?;
    let grid = config.grid()?;
    let s = scheme(config, variant, &grid)?;
    let behaviour = validate_bc(&config.bc)?.behaviour;
    let evo = EvolutionConfig {
        lambda: config.lambda,
        t_end: config.t_end,
        bump: config.bump,
        snapshot_interval: config.snapshot_interval,
        energy_stride: config.energy_stride.max(1),
        dt: None,
    };
    let result = evolve(&s, &config.bc, &evo);
    let run = match result {
        Err(radial_sbp::Error::NonFinite { t }) => {
            out.check("finite", false, format!("non-finite value at t = {t}"));
            return Ok(out);
        }
        other => other?,
    };
    out.say(format!(
        "evolve {variant} p={} kind={} M={} bc={} bump={} steps={}",
        config.p,
        config.kind,
        config.m,
        config.bc.name(),
        profile_name(config.bump.profile),
        run.steps
    ));
    out.check("finite", run.state.is_finite(), "all field values finite".into());
    let drift = energy_drift_check(&run.trace);
    out.say(format!(
        "energy drift max {:.3e} relative, half-run {:.3e}, growth ratio {:.3}",
        drift.max_relative, drift.half_relative, drift.growth_ratio
    ));
    if behaviour == EnergyBehaviour::NonIncreasing {
        let e0 = run.trace.samples.first().map_or(1.0, |e| e.e_hat_b);
        let worst = run.trace.samples.windows(2).fold(0.0f64, |m, w| m.max(w[1].e_hat_b - w[0].e_hat_b));
        out.check("energy_non_increasing", worst <= 1e-14 * e0, format!("largest increase {:.3e} relative", worst / e0));
    }
    write_file(&mut out, &config.out, &format!("{}_fields.csv", config.tag), &formats::write_fields(&s, &run.snapshots))?;
    write_file(&mut out, &config.out, &format!("{}_energy.csv", config.tag), &formats::write_energy(&run.trace))?;
    Ok(out)
}

/// Expected order and tolerance of a comparison window.
pub fn expected_order(variant: Variant, post: bool) -> (f64, f64) {
    match (post, variant) {
        (false, Variant::Evans | Variant::Sbp2) => (2.0, 0.15),
        (false, _) => (4.0, 0.2),
        (true, Variant::Sbp42) => (3.0, 0.25),
        (true, _) => (2.0, 0.2),
    }
}

/// Run every level of `config` on its own thread, then analyse.
pub fn converge_levels(config: &ConvergenceConfig) -> Result<RichardsonReport, CliError> {
    let runs: Vec<radial_sbp::Result<LevelRun>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..config.levels).map(|l| scope.spawn(move || run_level(config, l))).collect();
        handles.into_iter().map(|h| h.join().expect("level run panicked")).collect()
    });
    let runs = runs.into_iter().collect::<radial_sbp::Result<Vec<_>>>()?;
    Ok(richardson(config, &runs)?)
}

fn converge(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let variant = config.variant()?;
    let r = config.radius;
    let bump = config.bump;
    let interval = config.snapshot_interval;
    let base = ConvergenceConfig {
        variant,
        kind: config.kind,
        p: config.p,
        base_half_steps: config.half_steps(),
        levels: config.levels,
        radius: r,
        lambda: config.lambda,
        bc: config.bc,
        bump,
        snapshot_interval: interval,
        times: Vec::new(),
        expected_order: 0.0,
        tolerance: 0.0,
        envelope: None,
    };
    let mut reports = Vec::new();
    if matches!(config.phase, Phase::Pre | Phase::Both) {
        // Three equal steps before the leading edge reaches r = R.
        let step = (r - bump.center - bump.width) / 4.0;
        let (order, tol) = expected_order(variant, false);
        let c = ConvergenceConfig {
            snapshot_interval: step,
            times: vec![step, 2.0 * step, 3.0 * step],
            expected_order: order,
            tolerance: tol,
            ..base.clone()
        };
        reports.push(("pre", converge_levels(&c)?));
    }
    if matches!(config.phase, Phase::Post | Phase::Both) {
        let first = config.t_end - 2.0 * interval;
        if !(first > r - bump.center + bump.width) {
            return Err(CliError::InconsistentCombination(format!(
                "t_end = {} leaves no post-boundary window; it must exceed {}",
                config.t_end,
                r - bump.center + bump.width + 2.0 * interval
            )));
        }
        let (order, tol) = expected_order(variant, true);
        let c = ConvergenceConfig {
            times: vec![first, first + interval, config.t_end],
            expected_order: order,
            tolerance: tol,
            envelope: (variant.interior_order() == 4).then_some(r / 4.0),
            ..base
        };
        reports.push(("post", converge_levels(&c)?));
    }
    for (phase, report) in &reports {
        for norm in [NormKind::L2Energy, NormKind::MaxScaled] {
            let got = report.fitted_order(norm);
            out.check(
                &format!("{phase}_order_{}", norm.name()),
                (got - report.expected_order).abs() <= report.tolerance,
                format!("fitted {got:.3} (expected {} +- {})", report.expected_order, report.tolerance),
            );
        }
    }
    let named: Vec<(&str, &RichardsonReport)> = reports.iter().map(|(p, r)| (*p, r)).collect();
    write_file(&mut out, &config.out, &format!("{}_convergence.csv", config.tag), &formats::write_convergence(&named))?;
    Ok(out)
}

/// Exact error of the naive operator on `psi = r`:
/// `sum over odd k >= 3 of C(p+1, k) i^{1-k}`.
pub fn naive_exact_error(p: u32, i: f64) -> f64 {
    let n = p as i64 + 1;
    let mut binom = 1.0;
    let mut sum = 0.0;
    for k in 1..=n {
        binom *= (n - k + 1) as f64 / k as f64;
        if k >= 3 && k % 2 == 1 {
            sum += binom * i.powi(1 - k as i32);
        }
    }
    sum
}

fn probe(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let pr = probe_generalized_evans(config.p, config.b);
    out.say(format!(
        "generalized Evans N=1: fitted {:.6e}, printed b(p+3)(2p+1) = {:.6e}, derived b(p+3)(2p+1)/3 = {:.6e}",
        pr.n1_fitted,
        pr.n1_printed,
        pr.n1_printed / 3.0
    ));
    out.say(format!("generalized Evans N=2: fitted {:.6e}, printed {:.6e}", pr.n2_fitted, pr.n2_printed));
    if pr.n2_printed != 0.0 {
        let rel = (pr.n2_fitted - pr.n2_printed).abs() / pr.n2_printed.abs();
        out.check("evans_n2_coefficient", rel <= 1e-2, format!("relative gap {rel:.3e}"));
    } else {
        out.check("evans_n2_coefficient", pr.n2_fitted.abs() <= 1e-6, format!("fitted {:.3e}, expected 0", pr.n2_fitted));
    }
    let grid = GridSpec::new(GridKind::Centred, config.half_steps().max(16) & !1, config.radius, config.p)?;
    let id = |r: f64| r;
    let one = |_: f64| 1.0;
    let errors = naive_operator_error(&grid, &TestField { parity: Parity::Odd, f: &id, df: &one });
    let gap = errors.iter().fold(0.0f64, |m, &(i, e)| m.max((e - naive_exact_error(config.p, i)).abs()));
    out.check("naive_error_singular", gap <= 1e-12, format!("max gap to the exact 1/i^2 series {gap:.3e}"));
    Ok(out)
}
