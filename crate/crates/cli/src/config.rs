//! Plain-text `key=value` configuration merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use radial_sbp::evolution::Profile;
use radial_sbp::weights::Method;
use radial_sbp::{p_from_harmonic, validate_bc, BoundarySpec, Bump, GridKind, GridSpec, Variant};

use crate::CliError;

pub const KEYS: &[&str] = &[
    "command",
    "method",
    "p",
    "l",
    "n",
    "kind",
    "M",
    "R",
    "lambda",
    "bc",
    "bc_rho",
    "bc_sigma",
    "bc_mu",
    "bc_nu",
    "out",
    "tag",
    "i_star",
    "t_end",
    "levels",
    "phase",
    "bump_center",
    "bump_width",
    "bump_amplitude",
    "bump_profile",
    "snapshot_interval",
    "energy_stride",
    "samples",
    "seed",
    "b",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Weights,
    Verify,
    Evolve,
    Converge,
    Probe,
}

impl FromStr for Command {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "weights" => Command::Weights,
            "verify" => Command::Verify,
            "evolve" => Command::Evolve,
            "converge" => Command::Converge,
            "probe" => Command::Probe,
            _ => return Err(()),
        })
    }
}

/// A method name as written in a config: `sbp4` names the weights only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Evans,
    Sbp2,
    Sbp4,
    Sbp41,
    Sbp42,
}

impl MethodArg {
    pub fn method(self) -> Method {
        match self {
            MethodArg::Evans => Method::Evans,
            MethodArg::Sbp2 => Method::Sbp2,
            MethodArg::Sbp4 | MethodArg::Sbp41 | MethodArg::Sbp42 => Method::Sbp4,
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            MethodArg::Evans => Some(Variant::Evans),
            MethodArg::Sbp2 => Some(Variant::Sbp2),
            MethodArg::Sbp4 => None,
            MethodArg::Sbp41 => Some(Variant::Sbp41),
            MethodArg::Sbp42 => Some(Variant::Sbp42),
        }
    }
}

impl FromStr for MethodArg {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "evans" => MethodArg::Evans,
            "sbp2" => MethodArg::Sbp2,
            "sbp4" => MethodArg::Sbp4,
            "sbp41" => MethodArg::Sbp41,
            "sbp42" => MethodArg::Sbp42,
            _ => return Err(()),
        })
    }
}

impl fmt::Display for MethodArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodArg::Evans => "evans",
            MethodArg::Sbp2 => "sbp2",
            MethodArg::Sbp4 => "sbp4",
            MethodArg::Sbp41 => "sbp41",
            MethodArg::Sbp42 => "sbp42",
        })
    }
}

/// Which comparison window `converge` checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Pre,
    Post,
    Both,
}

impl FromStr for Phase {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "pre" => Phase::Pre,
            "post" => Phase::Post,
            "both" => Phase::Both,
            _ => return Err(()),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub method: MethodArg,
    pub p: u32,
    pub kind: GridKind,
    /// Last index `M`; half-integer on staggered grids.
    pub m: f64,
    pub radius: f64,
    pub lambda: f64,
    pub bc: BoundarySpec,
    pub out: PathBuf,
    pub tag: String,
    pub i_star: Option<u32>,
    pub t_end: f64,
    pub levels: usize,
    pub phase: Phase,
    pub bump: Bump,
    pub snapshot_interval: f64,
    pub energy_stride: usize,
    pub samples: usize,
    pub seed: u64,
    pub b: f64,
}

impl RunConfig {
    pub fn half_steps(&self) -> u32 {
        (2.0 * self.m).round() as u32
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        Ok(GridSpec::new(self.kind, self.half_steps(), self.radius, self.p)?)
    }

    pub fn variant(&self) -> Result<Variant, CliError> {
        self.method.variant().ok_or_else(|| {
            CliError::InconsistentCombination("sbp4 names the weights; schemes are sbp41 or sbp42".into())
        })
    }
}

/// Read `key=value` tokens from config text. Blank lines and `#` comments
/// are skipped; several tokens may share a line.
pub fn parse_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            let (key, value) =
                token.split_once('=').ok_or_else(|| CliError::Malformed(token.to_string()))?;
            let key = normalise_key(key);
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::UnknownKey(key));
            }
            map.insert(key, value.to_string());
        }
    }
    Ok(map)
}

pub fn parse_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    parse_text(&text)
}

fn normalise_key(key: &str) -> String {
    let key = key.trim().replace('-', "_");
    match key.as_str() {
        "m" => "M".to_string(),
        "r" => "R".to_string(),
        _ => key,
    }
}

/// Overlay `flags` on `base`.
pub fn merge(mut base: BTreeMap<String, String>, flags: BTreeMap<String, String>) -> Result<BTreeMap<String, String>, CliError> {
    for (k, v) in flags {
        let k = normalise_key(&k);
        if !KEYS.contains(&k.as_str()) {
            return Err(CliError::UnknownKey(k));
        }
        base.insert(k, v);
    }
    Ok(base)
}

fn get<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    map.get(key)
        .map(|v| {
            v.parse().map_err(|_| CliError::InvalidValue { key: key.to_string(), value: v.clone() })
        })
        .transpose()
}

fn parse_profile(s: &str) -> Option<Profile> {
    match s {
        "exp" => Some(Profile::Exponential),
        _ => s.strip_prefix("poly").and_then(|k| k.parse().ok()).filter(|&k| k >= 1).map(Profile::Polynomial),
    }
}

pub fn profile_name(profile: Profile) -> String {
    match profile {
        Profile::Exponential => "exp".into(),
        Profile::Polynomial(k) => format!("poly{k}"),
    }
}

/// Validate merged settings into a run configuration.
pub fn build(map: &BTreeMap<String, String>) -> Result<RunConfig, CliError> {
    let command: Command = get(map, "command")?.ok_or(CliError::Missing("command"))?;
    let method: MethodArg = get(map, "method")?.unwrap_or(MethodArg::Sbp42);
    let p = match (get::<u32>(map, "p")?, get::<i64>(map, "l")?, get::<i64>(map, "n")?) {
        (Some(p), None, None) => p,
        (None, Some(l), Some(n)) => p_from_harmonic(l, n)?,
        (None, None, None) => return Err(CliError::Missing("p (or l and n)")),
        _ => return Err(CliError::InconsistentCombination("give either p or both l and n".into())),
    };
    if p == 0 {
        return Err(CliError::InvalidValue { key: "p".into(), value: "0".into() });
    }
    let kind: GridKind = get(map, "kind")?.unwrap_or(GridKind::Centred);
    if method == MethodArg::Evans && kind == GridKind::Centred && p % 2 == 1 {
        return Err(CliError::InconsistentCombination(format!(
            "Evans is undefined for odd p on the centred grid (w_0 does not exist for p = {p})"
        )));
    }
    if command != Command::Weights && command != Command::Probe && method == MethodArg::Sbp4 {
        return Err(CliError::InconsistentCombination("sbp4 names the weights; schemes are sbp41 or sbp42".into()));
    }
    let m: f64 = get(map, "M")?.unwrap_or(match kind {
        GridKind::Centred => 64.0,
        GridKind::Staggered => 64.5,
    });
    let twice = 2.0 * m;
    if !(m > 0.0) || twice.fract() != 0.0 || (twice as i64 % 2 == 1) != (kind == GridKind::Staggered) {
        return Err(CliError::InconsistentCombination(format!(
            "M = {m} does not fit the {kind} grid (half-integer on staggered, integer on centred)"
        )));
    }
    let radius: f64 = get(map, "R")?.unwrap_or(1.0);
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CliError::InvalidValue { key: "R".into(), value: radius.to_string() });
    }
    let lambda: f64 = get(map, "lambda")?.unwrap_or(0.25);
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(CliError::InvalidValue { key: "lambda".into(), value: lambda.to_string() });
    }
    let bc = boundary(map)?;
    let bump_profile = match map.get("bump_profile") {
        Some(s) => parse_profile(s).ok_or_else(|| CliError::InvalidValue { key: "bump_profile".into(), value: s.clone() })?,
        None => Profile::Exponential,
    };
    let bump = Bump {
        center: get(map, "bump_center")?.unwrap_or(0.5) * radius,
        width: get(map, "bump_width")?.unwrap_or(0.125) * radius,
        amplitude: get(map, "bump_amplitude")?.unwrap_or(1.0),
        profile: bump_profile,
    };
    let levels: usize = get(map, "levels")?.unwrap_or(3);
    let tag = match map.get("tag") {
        Some(t) if !t.is_empty() && t.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c)) => t.clone(),
        Some(t) => return Err(CliError::InvalidValue { key: "tag".into(), value: t.clone() }),
        None => format!("{method}_p{p}_{kind}"),
    };
    Ok(RunConfig {
        command,
        method,
        p,
        kind,
        m,
        radius,
        lambda,
        bc,
        out: get(map, "out")?.unwrap_or_else(|| PathBuf::from(".")),
        tag,
        i_star: get(map, "i_star")?,
        t_end: get::<f64>(map, "t_end")?.unwrap_or(2.0) * radius,
        levels,
        phase: get(map, "phase")?.unwrap_or(Phase::Both),
        bump,
        snapshot_interval: get::<f64>(map, "snapshot_interval")?.unwrap_or(0.125) * radius,
        energy_stride: get(map, "energy_stride")?.unwrap_or(1),
        samples: get(map, "samples")?.unwrap_or(100),
        seed: get(map, "seed")?.unwrap_or(1),
        b: get(map, "b")?.unwrap_or(1.0),
    })
}

/// Boundary condition from `bc` and `bc_*`. The default is
/// `pi + pi' = 0`.
fn boundary(map: &BTreeMap<String, String>) -> Result<BoundarySpec, CliError> {
    let name: String = get(map, "bc")?.unwrap_or_else(|| "pi_derivative".into());
    let c = |key: &str, default: f64| -> Result<f64, CliError> { Ok(get(map, key)?.unwrap_or(default)) };
    let spec = match name.as_str() {
        "max_dissipative" => BoundarySpec::MaxDissipative { rho: c("bc_rho", 1.0)?, sigma: c("bc_sigma", 1.0)? },
        "pi_derivative" => BoundarySpec::PiDerivative { rho: c("bc_rho", 1.0)?, mu: c("bc_mu", 1.0)? },
        "psi_derivative" => BoundarySpec::PsiDerivative { sigma: c("bc_sigma", 1.0)?, nu: c("bc_nu", 1.0)? },
        "general" => BoundarySpec::General {
            rho: c("bc_rho", 0.0)?,
            sigma: c("bc_sigma", 0.0)?,
            mu: c("bc_mu", 0.0)?,
            nu: c("bc_nu", 0.0)?,
        },
        _ => return Err(CliError::InvalidValue { key: "bc".into(), value: name }),
    };
    Ok(validate_bc(&spec)?.spec)
}
